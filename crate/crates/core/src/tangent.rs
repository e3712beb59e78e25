//! Tangent cones of cube complexes, the coordinate embedding of a cone and
//! its distortion.
//!
//! At a point in the open interior of a `k`-cell `C`, a neighbourhood is a
//! product of `R^k` with the cone over the link of `C`: one axis per
//! `(k+1)`-cell containing `C`, one face per larger cell containing `C`.
//! For a vertex this is exactly [`CubeComplex::star_faces`].
//!
//! The embedding sends a cone point `sum_i t_i e_i` to the coordinate vector
//! `(t_i)` against an orthonormal basis indexed by the axes. It preserves
//! the distance to the origin exactly and distorts the orthant path metric
//! by at most `sqrt(2)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::{CellId, ComplexPoint, CubeComplex};
use crate::error::{Error, Result};
use crate::geometry::{euclid_sparse, ConePoint, MetricSpace, TangentCone};
use crate::rng::rng_for;

/// Tangent cone at a point: Euclidean rank plus the link cone.
#[derive(Debug, Clone)]
pub struct TangentAt {
    pub base: ComplexPoint,
    pub euclidean_rank: usize,
    pub cone: TangentCone,
    /// The `(k+1)`-cell behind each cone axis.
    pub axis_cells: Vec<CellId>,
}

pub fn tangent_cone_at(x: &CubeComplex, p: &ComplexPoint) -> Result<TangentAt> {
    let base = x.canonicalize(p)?;
    let c = base.cell;
    let k = x.cells()[c].dim();
    let axis_cells: Vec<CellId> =
        x.supercells(c).iter().copied().filter(|&d| x.cells()[d].dim() == k + 1).collect();
    if axis_cells.len() > 64 {
        return Err(Error::InvalidArgument(format!("{} cone axes (at most 64)", axis_cells.len())));
    }
    let mut faces = Vec::new();
    for &d in x.supercells(c) {
        let mask = axis_cells
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e == d || x.supercells(e).contains(&d))
            .fold(0u64, |m, (i, _)| m | 1 << i);
        faces.push(mask);
    }
    let cone = TangentCone::new(axis_cells.len(), faces)?;
    Ok(TangentAt { base, euclidean_rank: k, cone, axis_cells })
}

impl TangentAt {
    /// Distance in `R^rank x T`.
    pub fn product_distance(&self, a: (&[f64], &ConePoint), b: (&[f64], &ConePoint)) -> Result<f64> {
        let e: f64 = a.0.iter().zip(b.0).map(|(x, y)| (x - y) * (x - y)).sum();
        let t = self.cone.distance(a.1, b.1)?;
        Ok((e + t * t).sqrt())
    }

    /// The complex point reached from the base by the tangent vector
    /// `(euclid, v)`. Fails if the vector leaves the cells around the base.
    pub fn exp(&self, x: &CubeComplex, euclid: &[f64], v: &ConePoint) -> Result<ComplexPoint> {
        if euclid.len() != self.euclidean_rank {
            return Err(Error::DimensionMismatch { expected: self.euclidean_rank, got: euclid.len() });
        }
        self.cone.check_point(v)?;
        let c = self.base.cell;
        let support = v.support();
        let target = if support == 0 {
            c
        } else {
            let want: Vec<CellId> =
                (0..self.axis_cells.len()).filter(|&i| support >> i & 1 == 1).map(|i| self.axis_cells[i]).collect();
            let dim = self.euclidean_rank + want.len();
            *x.supercells(c)
                .iter()
                .find(|&&d| {
                    x.cells()[d].dim() == dim && want.iter().all(|&e| e == d || x.supercells(e).contains(&d))
                })
                .ok_or_else(|| Error::NotAdmissible(vec![]))?
        };
        let mut coords = x.lift(&self.base, target).expect("target contains the base cell");
        if target != c {
            let frame = x.frame(target, c).expect("base cell is a face");
            for (i, &(j, flip)) in frame.axes.iter().enumerate() {
                coords[j] += if flip { -euclid[i] } else { euclid[i] };
            }
            let base_axes: Vec<usize> = frame.axes.iter().map(|a| a.0).collect();
            for &(axis, t) in v.coords() {
                let e = self.axis_cells[axis];
                let fe = x.frame(target, e).expect("axis cell is a face");
                let j = fe.axes.iter().map(|a| a.0).find(|j| !base_axes.contains(j)).expect("one new axis");
                coords[j] = if frame.base >> j & 1 == 1 { 1.0 - t } else { t };
            }
        } else {
            for (i, e) in euclid.iter().enumerate() {
                coords[i] += e;
            }
        }
        if coords.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidPoint("tangent vector leaves the cells around the base point".into()));
        }
        x.canonicalize(&ComplexPoint::new(target, coords))
    }
}

/// The coordinate embedding of a cone into `R^axes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingMap {
    n_axes: usize,
}

pub fn coordinate_embedding(cone: &TangentCone) -> EmbeddingMap {
    EmbeddingMap { n_axes: cone.n_axes() }
}

impl EmbeddingMap {
    pub fn dim(&self) -> usize {
        self.n_axes
    }

    pub fn apply(&self, x: &ConePoint) -> Vec<f64> {
        x.to_dense(self.n_axes)
    }

    /// `|phi(x) - phi(y)|`.
    pub fn image_distance(&self, x: &ConePoint, y: &ConePoint) -> f64 {
        euclid_sparse(x, y)
    }
}

/// One sampled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub cone_distance: f64,
    pub embedded_distance: f64,
    pub ratio: f64,
    /// Largest `| |phi(x)| - d(O, x) |` over the two points.
    pub radial_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistortionViolation {
    RatioAboveBound { pair: usize, ratio: f64 },
    NotLipschitz { pair: usize, excess: f64 },
    NotRadial { pair: usize, error: f64 },
}

#[derive(Debug, Clone)]
pub struct DistortionReport {
    pub sample_count: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub certified_upper: f64,
    pub violations: Vec<DistortionViolation>,
    pub pairs: Vec<PairSample>,
}

const SHARDS: u64 = 8;

/// Sample point pairs (uniform maximal face, exponential coordinates) and
/// compare cone distances with embedded distances.
pub fn distortion_report(cone: &TangentCone, samples: usize, seed: u64) -> Result<DistortionReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if cone.maximal_faces().is_empty() {
        return Err(Error::InvalidArgument("the cone is a single point".into()));
    }
    let phi = coordinate_embedding(cone);
    let per = samples.div_ceil(SHARDS as usize);
    let shards: Vec<Result<Vec<PairSample>>> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_for(seed, "distortion", s);
            let want = per.min(samples.saturating_sub(s as usize * per));
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                let u = cone.random_point(&mut rng);
                let v = cone.random_point(&mut rng);
                if u == v {
                    continue;
                }
                out.push(sample_pair(cone, &phi, &u, &v)?);
            }
            Ok(out)
        })
        .collect();
    let mut pairs = Vec::with_capacity(samples);
    for s in shards {
        pairs.extend(s?);
    }
    Ok(summarize(pairs))
}

fn sample_pair(cone: &TangentCone, phi: &EmbeddingMap, u: &ConePoint, v: &ConePoint) -> Result<PairSample> {
    let d = cone.distance(u, v)?;
    let e = phi.image_distance(u, v);
    let o = ConePoint::origin();
    let radial_u = (norm(&phi.apply(u)) - cone.distance(&o, u)?).abs();
    let radial_v = (norm(&phi.apply(v)) - cone.distance(&o, v)?).abs();
    Ok(PairSample { cone_distance: d, embedded_distance: e, ratio: d / e, radial_error: radial_u.max(radial_v) })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn summarize(pairs: Vec<PairSample>) -> DistortionReport {
    let bound = std::f64::consts::SQRT_2;
    let mut violations = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if p.ratio > bound + 1e-9 {
            violations.push(DistortionViolation::RatioAboveBound { pair: i, ratio: p.ratio });
        }
        if p.embedded_distance > p.cone_distance + 1e-9 {
            violations.push(DistortionViolation::NotLipschitz { pair: i, excess: p.embedded_distance - p.cone_distance });
        }
        if p.radial_error > 1e-12 {
            violations.push(DistortionViolation::NotRadial { pair: i, error: p.radial_error });
        }
    }
    let max_ratio = pairs.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let mean_ratio = pairs.iter().map(|p| p.ratio).sum::<f64>() / pairs.len() as f64;
    DistortionReport { sample_count: pairs.len(), max_ratio, mean_ratio, certified_upper: bound, violations, pairs }
}

/// Upper bound on the Izeki-Nayatani invariant of a cone from an upper
/// bound `D` on its radial distortion: `1 - 1/D^2`.
pub fn delta_bound_via_distortion(d_upper: f64) -> Result<f64> {
    if !(d_upper >= 1.0) {
        return Err(Error::InvalidArgument(format!("distortion bound {d_upper} < 1")));
    }
    Ok(1.0 - 1.0 / (d_upper * d_upper))
}

/// Clique complex of a random graph on `n_axes` axes (edge probability `p`).
/// Clique complexes are flag, so this is a valid orthant space.
pub fn random_flag_cone(n_axes: usize, p: f64, rng: &mut ChaCha8Rng) -> TangentCone {
    let mut adj = vec![0u64; n_axes];
    for a in 0..n_axes {
        for b in (a + 1)..n_axes {
            if rng.gen_bool(p) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
    }
    let mut cliques = Vec::new();
    let all = if n_axes == 64 { u64::MAX } else { (1u64 << n_axes) - 1 };
    bron_kerbosch(&adj, 0, all, 0, &mut cliques);
    TangentCone::new(n_axes, cliques).expect("clique complexes are flag")
}

fn bron_kerbosch(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 && x == 0 {
        if r != 0 {
            out.push(r);
        }
        return;
    }
    while p != 0 {
        let v = p.trailing_zeros() as usize;
        bron_kerbosch(adj, r | 1 << v, p & adj[v], x & adj[v], out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}
