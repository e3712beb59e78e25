//! The Izeki-Nayatani invariant of a finite measure, as a semidefinite program.
//!
//! A map `phi` from the atoms into a Hilbert space is determined up to
//! isometry by its Gram matrix `G_pq = <phi(p), phi(q)>`. The constraints
//! `|phi(p)| = r_p` and `|phi(p) - phi(q)| <= d(p,q)` become `G_pp = r_p^2`
//! and `G_pq >= (r_p^2 + r_q^2 - d(p,q)^2) / 2`, and the quantity to minimize
//! is the linear form `mu^T G mu` over the fixed denominator `sum_p mu_p r_p^2`.
//!
//! The program is solved by ADMM splitting into the box set and the PSD cone.
//! Every iterate is repaired into an exactly feasible Gram matrix, so each
//! recorded value is an upper bound on the invariant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::CubeComplex;
use crate::error::{Error, Result};
use crate::geometry::{
    ensure_spread, BarycenterParams, ComplexSpace, FiniteMeasure, MetricSpace, SubdivisionConfig, TangentCone,
};
use crate::linalg::{min_eigenvalue, project_psd};
use crate::rng::rng_for;

pub const PSD_TOL: f64 = 1e-9;
pub const LIPSCHITZ_TOL: f64 = 1e-9;
pub const RADIAL_TOL: f64 = 1e-12;
/// Atom pairs whose normalized gap `(d^2 - (r_p - r_q)^2) / 2` is at most this are merged.
const MERGE_GAP: f64 = 1e-12;
/// Normalized Lipschitz shortfall the repair step may leave.
const SLACK: f64 = 1e-12;

/// Gram matrix of a map from the atoms, with the data it must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    /// Row-major `n x n`.
    pub g: Vec<f64>,
    pub radii: Vec<f64>,
    /// Row-major `n x n`.
    pub distances: Vec<f64>,
}

impl GramMatrix {
    pub fn new(g: Vec<f64>, radii: Vec<f64>, distances: Vec<f64>) -> Result<Self> {
        let n = radii.len();
        for len in [g.len(), distances.len()] {
            if len != n * n {
                return Err(Error::DimensionMismatch { expected: n * n, got: len });
            }
        }
        Ok(GramMatrix { n, g, radii, distances })
    }

    /// Gram matrix of the radial map `p -> r_p e`.
    pub fn radial(radii: Vec<f64>, distances: Vec<f64>) -> Result<Self> {
        let g = radii.iter().flat_map(|a| radii.iter().map(move |b| a * b)).collect();
        GramMatrix::new(g, radii, distances)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.g[p * self.n + q]
    }

    pub fn distance(&self, p: usize, q: usize) -> f64 {
        self.distances[p * self.n + q]
    }

    /// `mu^T G mu / sum_p mu_p r_p^2`.
    pub fn ratio(&self, weights: &[f64]) -> f64 {
        let n = self.n;
        let mut num = 0.0;
        for p in 0..n {
            for q in 0..n {
                num += weights[p] * weights[q] * self.g[p * n + q];
            }
        }
        let den: f64 = weights.iter().zip(&self.radii).map(|(w, r)| w * r * r).sum();
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GramViolation {
    /// Smallest eigenvalue below `-PSD_TOL` (relative to the measure scale); magnitude is its absolute value.
    NotPsd { magnitude: f64 },
    Radial { atom: usize, magnitude: f64 },
    Lipschitz { p: usize, q: usize, magnitude: f64 },
}

impl GramViolation {
    pub fn magnitude(&self) -> f64 {
        match *self {
            GramViolation::NotPsd { magnitude }
            | GramViolation::Radial { magnitude, .. }
            | GramViolation::Lipschitz { magnitude, .. } => magnitude,
        }
    }
}

pub fn gram_feasibility_check<P: Clone>(gram: &GramMatrix, mu: &FiniteMeasure<P>) -> Result<Vec<GramViolation>> {
    if mu.atoms().len() != gram.n {
        return Err(Error::DimensionMismatch { expected: gram.n, got: mu.atoms().len() });
    }
    let n = gram.n;
    let mut out = Vec::new();
    // PSD and Lipschitz tolerances are relative to sum mu_p r_p^2 once it exceeds 1
    let scale: f64 = mu.weights().iter().zip(&gram.radii).map(|(w, r)| w * r * r).sum::<f64>().max(1.0);
    let lam = min_eigenvalue(&gram.g, n);
    if lam < -PSD_TOL * scale {
        out.push(GramViolation::NotPsd { magnitude: -lam });
    }
    for p in 0..n {
        let r2 = gram.radii[p] * gram.radii[p];
        let err = (gram.get(p, p) - r2).abs();
        if err > RADIAL_TOL * r2.max(1.0) {
            out.push(GramViolation::Radial { atom: p, magnitude: err });
        }
    }
    for p in 0..n {
        for q in (p + 1)..n {
            let d = gram.distance(p, q);
            let excess = gram.get(p, p) + gram.get(q, q) - 2.0 * gram.get(p, q) - d * d;
            if excess > LIPSCHITZ_TOL * scale {
                out.push(GramViolation::Lipschitz { p, q, magnitude: excess });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DeltaParams {
    pub iterations: usize,
    pub tol: f64,
    pub rho: f64,
    pub barycenter: BarycenterParams,
    /// Also solve with lower distance estimates when distances are inexact.
    pub lower_estimate: bool,
}

impl Default for DeltaParams {
    fn default() -> Self {
        DeltaParams { iterations: 5000, tol: 1e-10, rho: 1.0, barycenter: BarycenterParams::default(), lower_estimate: true }
    }
}

/// Solver output on fixed radii and distances.
#[derive(Debug, Clone)]
pub struct GramSolution {
    pub value: f64,
    pub gram: GramMatrix,
    pub converged: bool,
    /// Best feasible value after each iteration, starting from the radial map.
    pub history: Vec<f64>,
    /// Pairs whose distance was raised to `|r_p - r_q|` to keep the radial map feasible.
    pub distance_adjustments: usize,
}

#[derive(Debug, Clone)]
pub struct DeltaResult<P> {
    /// Upper bound on the invariant, using the (upper) distance estimates.
    pub value: f64,
    pub gram: GramMatrix,
    pub barycenter: P,
    pub barycenter_converged: bool,
    pub converged: bool,
    pub history: Vec<f64>,
    /// Same program with lower distance estimates; only for inexact spaces.
    pub value_lower: Option<f64>,
    pub distance_adjustments: usize,
}

/// Minimize `mu^T G mu / sum mu_p r_p^2` over feasible Gram matrices.
///
/// `distances` is row-major `n x n`. Distances below `|r_p - r_q|` (possible
/// only with inexact or rounded input) are raised to it.
pub fn solve_gram(radii: &[f64], distances: &[f64], weights: &[f64], params: &DeltaParams) -> Result<GramSolution> {
    let n = radii.len();
    if n < 2 {
        return Err(Error::InvalidMeasure("need at least two atoms".into()));
    }
    if distances.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: distances.len() });
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
    }
    let den: f64 = weights.iter().zip(radii).map(|(w, r)| w * r * r).sum();
    if !(den > 0.0) {
        return Err(Error::InvalidMeasure("all atoms sit at the barycenter".into()));
    }
    let mut dist = distances.to_vec();
    let mut adjustments = 0;
    for p in 0..n {
        dist[p * n + p] = 0.0;
        for q in (p + 1)..n {
            let floor = (radii[p] - radii[q]).abs();
            if dist[p * n + q] < floor {
                adjustments += 1;
                dist[p * n + q] = floor;
                dist[q * n + p] = floor;
            }
        }
    }

    // Work in units where the denominator is 1.
    let s = den.sqrt();
    let r: Vec<f64> = radii.iter().map(|x| x / s).collect();
    let d2 = |p: usize, q: usize| (dist[p * n + q] / s).powi(2);

    // Atoms on one ray from the barycenter (zero gap) must map to parallel
    // vectors, so they share a unit direction. Atoms at the barycenter drop out.
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut p: usize) -> usize {
        while parent[p] != p {
            parent[p] = parent[parent[p]];
            p = parent[p];
        }
        p
    }
    for p in 0..n {
        for q in (p + 1)..n {
            if r[p] > 0.0 && r[q] > 0.0 && 0.5 * (d2(p, q) - (r[p] - r[q]).powi(2)) <= MERGE_GAP {
                let (a, b) = (root(&mut parent, p), root(&mut parent, q));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut cluster = vec![usize::MAX; n];
    let mut k = 0;
    for p in (0..n).filter(|&p| r[p] > 0.0) {
        let rp = root(&mut parent, p);
        if cluster[rp] == usize::MAX {
            cluster[rp] = k;
            k += 1;
        }
        cluster[p] = cluster[rp];
    }

    // Reduced program on unit vectors u_c: minimize a^T U a over PSD U with
    // unit diagonal and U_cd >= L_cd, where a_c = sum of mu_p r_p over c.
    let mut a = vec![0.0; k];
    let mut lower = vec![f64::NEG_INFINITY; k * k];
    for p in (0..n).filter(|&p| r[p] > 0.0) {
        a[cluster[p]] += weights[p] * r[p];
        for q in (0..n).filter(|&q| r[q] > 0.0 && cluster[q] != cluster[p]) {
            let l = 0.5 * (r[p] * r[p] + r[q] * r[q] - d2(p, q)) / (r[p] * r[q]);
            let kk = cluster[p] * k + cluster[q];
            lower[kk] = lower[kk].max(l.min(1.0));
        }
    }
    let ones = vec![1.0; k];
    let u0 = vec![1.0; k * k];
    let c: Vec<f64> = a.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
    let value_of = |g: &[f64]| g.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>();

    // Lipschitz shortfall left unrepaired, in normalized units of G.
    let r_max = r.iter().cloned().fold(0.0, f64::max);
    let slack = SLACK / (r_max * r_max);
    let mut best = u0.clone();
    let mut best_value = value_of(&best);
    let mut history = vec![best_value];
    let mut z = u0.clone();
    let mut u = vec![0.0; k * k];
    let mut g = vec![0.0; k * k];
    let mut rho = params.rho;
    let mut converged = k == 1;
    for it in 0..if converged { 0 } else { params.iterations } {
        for kk in 0..k * k {
            g[kk] = z[kk] - u[kk] - c[kk] / rho;
        }
        project_box(&mut g, &ones, &lower);
        let v: Vec<f64> = g.iter().zip(&u).map(|(x, y)| x + y).collect();
        let z_new = project_psd(&v, k);
        let mut primal = 0.0;
        let mut dual = 0.0;
        for kk in 0..k * k {
            primal += (g[kk] - z_new[kk]).powi(2);
            dual += (z_new[kk] - z[kk]).powi(2);
            u[kk] += g[kk] - z_new[kk];
        }
        let (primal, dual) = (primal.sqrt(), rho * dual.sqrt());
        z = z_new;

        if let Some(cand) = repair(&z, &ones, &u0, &lower, slack) {
            let val = value_of(&cand);
            if val < best_value {
                best_value = val;
                best = cand;
            }
        }
        history.push(best_value);
        if primal < params.tol && dual < params.tol {
            converged = true;
            break;
        }
        if it % 10 == 9 {
            if primal > 10.0 * dual {
                rho *= 2.0;
                u.iter_mut().for_each(|x| *x /= 2.0);
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u.iter_mut().for_each(|x| *x *= 2.0);
            }
        }
    }

    // Back to the original units; the diagonal is set exactly.
    let mut gram_g = vec![0.0; n * n];
    for p in (0..n).filter(|&p| r[p] > 0.0) {
        for q in (0..n).filter(|&q| r[q] > 0.0) {
            gram_g[p * n + q] = radii[p] * radii[q] * best[cluster[p] * k + cluster[q]];
        }
        gram_g[p * n + p] = radii[p] * radii[p];
    }
    let gram = GramMatrix::new(gram_g, radii.to_vec(), dist)?;
    let value = gram.ratio(weights);
    Ok(GramSolution { value, gram, converged, history, distance_adjustments: adjustments })
}

fn project_box(g: &mut [f64], r: &[f64], lower: &[f64]) {
    let n = r.len();
    for p in 0..n {
        for q in 0..n {
            let k = p * n + q;
            g[k] = if p == q { r[p] * r[p] } else { g[k].max(lower[k]) };
        }
    }
}

/// Turn a PSD matrix into a feasible one: rescale to the right diagonal,
/// then mix in just enough of the radial Gram matrix to bring every
/// off-diagonal bound within `slack`. Bounds that the radial matrix meets
/// with equality (collinear atoms) leave no room, hence the slack.
fn repair(z: &[f64], r: &[f64], g0: &[f64], lower: &[f64], slack: f64) -> Option<Vec<f64>> {
    let n = r.len();
    let mut scale = vec![0.0; n];
    for p in 0..n {
        if r[p] > 0.0 {
            let zpp = z[p * n + p];
            if !(zpp > 1e-300) {
                return None;
            }
            scale[p] = r[p] / zpp.sqrt();
        }
    }
    let mut h = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            h[p * n + q] = if p == q { r[p] * r[p] } else { scale[p] * z[p * n + q] * scale[q] };
        }
    }
    let mut t: f64 = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let k = p * n + q;
            let short = lower[k] - h[k];
            if short > slack {
                t = t.max((short - slack) / (g0[k] - h[k]));
            }
        }
    }
    if t > 0.0 {
        let t = t.min(1.0);
        for k in 0..n * n {
            h[k] = (1.0 - t) * h[k] + t * g0[k];
        }
    }
    Some(h)
}

/// Upper bound on the invariant of `mu` in `space`.
pub fn delta_of_measure<S: MetricSpace>(
    space: &S,
    mu: &FiniteMeasure<S::Point>,
    params: &DeltaParams,
) -> Result<DeltaResult<S::Point>> {
    ensure_spread(space, mu)?;
    let points = mu.points();
    let weights = mu.weights();
    let n = points.len();
    if n == 2 {
        return two_point(space, &points, &weights, params);
    }
    let bar = space.barycenter(mu, &params.barycenter)?;
    let radii = points.iter().map(|p| space.distance(p, &bar.point)).collect::<Result<Vec<_>>>()?;
    let dist: Vec<f64> = space.distance_matrix(&points)?.into_iter().flatten().collect();
    let sol = solve_gram(&radii, &dist, &weights, params)?;

    let value_lower = if params.lower_estimate && !space.exact_distances() {
        let radii_lo = points.iter().map(|p| space.distance_lower(p, &bar.point)).collect::<Result<Vec<_>>>()?;
        let mut dist_lo = vec![0.0; n * n];
        for p in 0..n {
            for q in (p + 1)..n {
                let d = space.distance_lower(&points[p], &points[q])?;
                dist_lo[p * n + q] = d;
                dist_lo[q * n + p] = d;
            }
        }
        Some(solve_gram(&radii_lo, &dist_lo, &weights, params)?.value)
    } else {
        None
    };
    Ok(DeltaResult {
        value: sol.value,
        gram: sol.gram,
        barycenter: bar.point,
        barycenter_converged: bar.converged,
        converged: sol.converged,
        history: sol.history,
        value_lower,
        distance_adjustments: sol.distance_adjustments,
    })
}

/// Two atoms: the barycenter splits the geodesic in the ratio of the
/// weights, so `r_p = mu_q d` and `r_q = mu_p d`, and the antipodal map
/// `r_p e, -r_q e` is feasible with zero mean.
fn two_point<S: MetricSpace>(
    space: &S,
    points: &[S::Point],
    weights: &[f64],
    params: &DeltaParams,
) -> Result<DeltaResult<S::Point>> {
    let d = space.distance(&points[0], &points[1])?;
    let bar = space.geodesic_point(&points[0], &points[1], weights[1])?;
    let radii = vec![weights[1] * d, weights[0] * d];
    let g = vec![radii[0] * radii[0], -radii[0] * radii[1], -radii[0] * radii[1], radii[1] * radii[1]];
    let gram = GramMatrix::new(g, radii, vec![0.0, d, d, 0.0])?;
    let value = gram.ratio(weights);
    let value_lower = (params.lower_estimate && !space.exact_distances()).then_some(value);
    Ok(DeltaResult {
        value,
        gram,
        barycenter: bar,
        barycenter_converged: true,
        converged: true,
        history: vec![value],
        value_lower,
        distance_adjustments: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Complex,
    Cone,
}

impl SpaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::Complex => "complex",
            SpaceKind::Cone => "cone",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurveyParams {
    /// Fraction of trials drawn on a vertex cone rather than the whole complex.
    pub cone_fraction: f64,
    pub subdivision: SubdivisionConfig,
    pub delta: DeltaParams,
}

impl Default for SurveyParams {
    fn default() -> Self {
        SurveyParams {
            cone_fraction: 0.5,
            subdivision: SubdivisionConfig { level: 4, ..SubdivisionConfig::default() },
            delta: DeltaParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRow {
    pub measure_id: usize,
    pub kind: SpaceKind,
    /// Cone apex, for cone trials.
    pub vertex: Option<usize>,
    pub atoms: usize,
    pub delta_upper: f64,
    pub delta_lower: Option<f64>,
    pub barycenter_converged: bool,
    /// Running maximum of `delta_upper` over rows so far.
    pub max_observed: f64,
}

#[derive(Debug, Clone)]
pub struct SurveyTable {
    pub rows: Vec<SurveyRow>,
    pub max: f64,
}

/// Random measures on `x` and on its vertex cones, with their invariants.
pub fn delta_complex_survey(
    x: &CubeComplex,
    trials: usize,
    atoms_max: usize,
    seed: u64,
    params: &SurveyParams,
) -> Result<SurveyTable> {
    if atoms_max < 2 {
        return Err(Error::InvalidArgument("atoms_max must be at least 2".into()));
    }
    let space = ComplexSpace::new(x.clone(), params.subdivision.clone())?;
    let coned: Vec<usize> = (0..x.vertex_count()).filter(|&v| !x.neighbors(v).is_empty()).collect();
    let rows: Vec<Result<SurveyRow>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, "delta-survey", t as u64);
            let atoms = rng.gen_range(2..=atoms_max);
            let on_cone = !coned.is_empty() && rng.gen_bool(params.cone_fraction.clamp(0.0, 1.0));
            let mut row = SurveyRow {
                measure_id: t,
                kind: SpaceKind::Complex,
                vertex: None,
                atoms,
                delta_upper: 0.0,
                delta_lower: None,
                barycenter_converged: true,
                max_observed: 0.0,
            };
            if on_cone {
                let v = coned[rng.gen_range(0..coned.len())];
                let cone = TangentCone::from_star(&x.star_faces(v)?)?;
                let r = delta_of_measure(&cone, &random_measure(&cone, atoms, &mut rng), &params.delta)?;
                row.kind = SpaceKind::Cone;
                row.vertex = Some(v);
                row.delta_upper = r.value;
                row.barycenter_converged = r.barycenter_converged;
            } else {
                let r = delta_of_measure(&space, &random_measure(&space, atoms, &mut rng), &params.delta)?;
                row.delta_upper = r.value;
                row.delta_lower = r.value_lower;
                row.barycenter_converged = r.barycenter_converged;
            }
            Ok(row)
        })
        .collect();
    let mut out = Vec::with_capacity(trials);
    let mut max: f64 = 0.0;
    for row in rows {
        let mut row = row?;
        max = max.max(row.delta_upper);
        row.max_observed = max;
        out.push(row);
    }
    Ok(SurveyTable { rows: out, max })
}

/// Random atoms with weights in `[0.1, 1]`, redrawn until two atoms differ.
pub fn random_measure<S: MetricSpace>(space: &S, atoms: usize, rng: &mut ChaCha8Rng) -> FiniteMeasure<S::Point> {
    loop {
        let pts: Vec<(S::Point, f64)> = (0..atoms).map(|_| (space.random_point(rng), rng.gen_range(0.1..=1.0))).collect();
        if pts.iter().any(|(p, _)| *p != pts[0].0) {
            return FiniteMeasure::normalized(pts).expect("positive weights");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConePoint, EuclideanBox};

    fn two_point(r1: f64, r2: f64, off: f64, d: f64) -> GramMatrix {
        GramMatrix::new(vec![r1 * r1, off, off, r2 * r2], vec![r1, r2], vec![0.0, d, d, 0.0]).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let mu = FiniteMeasure::uniform(vec![0, 1]).unwrap();
        let ok = two_point(1.0, 2.0, -2.0, 3.0);
        assert!(gram_feasibility_check(&ok, &mu).unwrap().is_empty());

        // [[1, 1.1], [1.1, 1]] has smallest eigenvalue -0.1.
        let bad = GramMatrix::new(vec![1.0, 1.1, 1.1, 1.0], vec![1.0, 1.0], vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        let v = gram_feasibility_check(&bad, &mu).unwrap();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], GramViolation::NotPsd { .. }) && (v[0].magnitude() - 0.1).abs() < 1e-12);

        let mut radial = two_point(1.0, 2.0, -2.0, 3.0);
        radial.g[0] += 0.5;
        let v = gram_feasibility_check(&radial, &mu).unwrap();
        assert!(v.iter().any(|x| matches!(x, GramViolation::Radial { atom: 0, .. }) && (x.magnitude() - 0.5).abs() < 1e-15));

        let three = FiniteMeasure::uniform(vec![0, 1, 2]).unwrap();
        assert!(matches!(gram_feasibility_check(&ok, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn two_atoms_give_zero() {
        let seg = EuclideanBox::segment(3.0);
        let mu = FiniteMeasure::new(vec![(vec![0.5], 0.3), (vec![2.5], 0.7)]).unwrap();
        let r = delta_of_measure(&seg, &mu, &DeltaParams::default()).unwrap();
        assert!(r.value.abs() < 1e-9, "{}", r.value);
        assert!(gram_feasibility_check(&r.gram, &mu).unwrap().is_empty());
    }

    #[test]
    fn tripod_tips_give_zero() {
        let c = TangentCone::rays(3);
        let mu = FiniteMeasure::uniform((0..3).map(|a| ConePoint::axis(a, 1.0)).collect()).unwrap();
        let r = delta_of_measure(&c, &mu, &DeltaParams::default()).unwrap();
        assert!(r.value.abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn two_quadrants_at_most_half() {
        let c = TangentCone::new(3, vec![0b011, 0b110]).unwrap();
        let mu = FiniteMeasure::uniform((0..3).map(|a| ConePoint::axis(a, 1.0)).collect()).unwrap();
        let r = delta_of_measure(&c, &mu, &DeltaParams::default()).unwrap();
        assert!(r.value <= 0.5 + 1e-6, "{}", r.value);
        assert!(gram_feasibility_check(&r.gram, &mu).unwrap().is_empty());
        assert!((r.gram.ratio(&mu.weights()) - r.value).abs() < 1e-10);
    }

    #[test]
    fn history_is_monotone() {
        let sol = solve_gram(&[1.0, 1.0, 1.0], &[0.0, 1.5, 1.8, 1.5, 0.0, 1.2, 1.8, 1.2, 0.0], &[0.2, 0.3, 0.5], &DeltaParams::default())
            .unwrap();
        assert!(sol.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(sol.value <= sol.history[0]);
    }

    #[test]
    fn survey_on_square_is_flat() {
        let x = crate::complex::unit_cube(2);
        let params = SurveyParams { delta: DeltaParams { iterations: 2000, ..DeltaParams::default() }, ..SurveyParams::default() };
        let t = delta_complex_survey(&x, 6, 4, 5, &params).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert!(t.max <= 1e-6, "{:?}", t.rows);
    }
}
