//! Orthant spaces: unions of coordinate orthants glued along shared faces,
//! with the induced path metric. Tangent cones of cube complexes at vertices
//! are of this form.
//!
//! A geodesic between `x` and `y` never uses axes outside
//! `supp(x) ∪ supp(y)` (zeroing the other coordinates is 1-Lipschitz on every
//! orthant), so distances are computed on that restricted cone. There the
//! geodesic passes through a sequence of maximal faces; for each admissible
//! sequence the breakpoints are relaxed one at a time, each update being a
//! closed-form unfolding, and the shortest sequence wins.

use std::fmt;

use crate::complex::Star;
use crate::error::{Error, Result};

/// An orthant space on at most 64 axes, stored by its maximal faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentCone {
    n_axes: usize,
    maximal: Vec<u64>,
}

/// Knobs for the sequence search.
#[derive(Debug, Clone, Copy)]
pub struct OrthantParams {
    /// Longest face sequence tried; `0` means the number of maximal faces.
    pub max_sequence: usize,
    /// Stop relaxing once no breakpoint moves more than this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for OrthantParams {
    fn default() -> Self {
        OrthantParams { max_sequence: 0, tol: 1e-13, max_sweeps: 20_000 }
    }
}

/// A cone point: sorted `(axis, coordinate)` pairs with positive coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConePoint {
    coords: Vec<(usize, f64)>,
}

impl ConePoint {
    pub fn origin() -> Self {
        ConePoint { coords: Vec::new() }
    }

    /// Build from pairs; zero entries are dropped, repeated axes are summed.
    pub fn new(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut coords: Vec<(usize, f64)> = Vec::new();
        for (a, t) in pairs {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidPoint(format!("cone coordinate {t} on axis {a}")));
            }
            if a >= 64 {
                return Err(Error::InvalidPoint(format!("axis {a} out of range")));
            }
            coords.push((a, t));
        }
        coords.sort_by_key(|c| c.0);
        coords.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        coords.retain(|c| c.1 > 0.0);
        Ok(ConePoint { coords })
    }

    pub fn axis(a: usize, t: f64) -> Self {
        ConePoint::new([(a, t)]).expect("valid axis point")
    }

    pub fn coords(&self) -> &[(usize, f64)] {
        &self.coords
    }

    pub fn get(&self, axis: usize) -> f64 {
        self.coords.iter().find(|c| c.0 == axis).map_or(0.0, |c| c.1)
    }

    pub fn support(&self) -> u64 {
        self.coords.iter().fold(0, |m, c| m | 1 << c.0)
    }

    /// Distance to the cone origin.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c.1 * c.1).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ConePoint::new(self.coords.iter().map(|&(a, t)| (a, t * s))).expect("nonnegative scale")
    }

    pub fn to_dense(&self, n_axes: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_axes];
        for &(a, t) in &self.coords {
            v[a] = t;
        }
        v
    }

    /// Parse `axis:value,axis:value`; empty or `O` is the origin.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "O" {
            return Ok(ConePoint::origin());
        }
        let pairs = text
            .split(',')
            .map(|part| {
                let (a, t) = part
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected axis:value, got `{part}`")))?;
                let a = a.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad axis `{a}`")))?;
                let t = t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{t}`")))?;
                Ok((a, t))
            })
            .collect::<Result<Vec<_>>>()?;
        ConePoint::new(pairs)
    }
}

impl fmt::Display for ConePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return f.write_str("O");
        }
        let parts: Vec<String> = self.coords.iter().map(|(a, t)| format!("{a}:{t}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Length and breakpoints of an orthant geodesic.
#[derive(Debug, Clone)]
pub struct OrthantGeodesic {
    pub length: f64,
    /// Interior points where the path changes face, in order from `x`.
    pub breakpoints: Vec<ConePoint>,
}

fn keep_maximal(mut faces: Vec<u64>) -> Vec<u64> {
    faces.sort_unstable();
    faces.dedup();
    let all = faces.clone();
    faces.retain(|&m| !all.iter().any(|&o| o != m && o & m == m));
    faces
}

impl TangentCone {
    /// Cone on `n_axes` axes whose faces are generated by `faces` (any family;
    /// it is closed downward and reduced to maximal members). Every axis must
    /// lie in some face and the face family must be flag.
    pub fn new(n_axes: usize, faces: Vec<u64>) -> Result<Self> {
        if n_axes > 64 {
            return Err(Error::InvalidArgument(format!("{n_axes} axes (at most 64)")));
        }
        let all_axes = if n_axes == 64 { u64::MAX } else { (1u64 << n_axes) - 1 };
        if faces.iter().any(|&f| f & !all_axes != 0) {
            return Err(Error::InvalidArgument("face uses an unknown axis".into()));
        }
        let maximal = keep_maximal(faces.into_iter().filter(|&f| f != 0).collect());
        let cone = TangentCone { n_axes, maximal };
        for a in 0..n_axes {
            if !cone.is_face(1 << a) {
                return Err(Error::InvalidArgument(format!("axis {a} lies in no face")));
            }
        }
        if let Some(bad) = cone.non_flag_clique() {
            return Err(Error::InvalidArgument(format!(
                "face family is not flag: axes {:?} pairwise span faces",
                mask_axes(bad)
            )));
        }
        Ok(cone)
    }

    /// The cone spanned by the cubes at a vertex.
    pub fn from_star(star: &Star) -> Result<Self> {
        TangentCone::new(star.neighbors.len(), star.faces.iter().map(|f| f.0).collect())
    }

    /// Tripod-like cone: `k` rays, no higher faces.
    pub fn rays(k: usize) -> Self {
        TangentCone::new(k, (0..k).map(|a| 1u64 << a).collect()).expect("rays are flag")
    }

    pub fn n_axes(&self) -> usize {
        self.n_axes
    }

    pub fn maximal_faces(&self) -> &[u64] {
        &self.maximal
    }

    pub fn is_face(&self, mask: u64) -> bool {
        mask == 0 || self.maximal.iter().any(|&m| m & mask == mask)
    }

    fn non_flag_clique(&self) -> Option<u64> {
        let d = self.n_axes;
        let adj: Vec<u64> = (0..d)
            .map(|a| {
                (0..d)
                    .filter(|&b| b != a && self.is_face((1u64 << a) | (1u64 << b)))
                    .fold(0u64, |m, b| m | 1 << b)
            })
            .collect();
        let mut stack: Vec<(u64, u64)> =
            (0..d).map(|a| (1u64 << a, adj[a] & !((2u64 << a).wrapping_sub(1)))).collect();
        while let Some((clique, cand)) = stack.pop() {
            if !self.is_face(clique) {
                return Some(clique);
            }
            let mut c = cand;
            while c != 0 {
                let b = c.trailing_zeros() as usize;
                c &= c - 1;
                stack.push((clique | 1 << b, cand & adj[b] & !((2u64 << b).wrapping_sub(1))));
            }
        }
        None
    }

    pub fn check_point(&self, x: &ConePoint) -> Result<()> {
        if let Some(&(a, _)) = x.coords.last() {
            if a >= self.n_axes {
                return Err(Error::InvalidPoint(format!("axis {a} not in a cone with {} axes", self.n_axes)));
            }
        }
        if !self.is_face(x.support()) {
            return Err(Error::NotAdmissible(mask_axes(x.support())));
        }
        Ok(())
    }

    /// Maximal faces of the subcone on the axes in `mask`.
    pub fn restricted_faces(&self, mask: u64) -> Vec<u64> {
        keep_maximal(self.maximal.iter().map(|&m| m & mask).collect())
    }

    /// Intrinsic distance with the default search parameters.
    pub fn distance(&self, x: &ConePoint, y: &ConePoint) -> Result<f64> {
        Ok(self.geodesic(x, y, &OrthantParams::default())?.length)
    }

    pub fn geodesic(&self, x: &ConePoint, y: &ConePoint, params: &OrthantParams) -> Result<OrthantGeodesic> {
        self.check_point(x)?;
        self.check_point(y)?;
        let union = x.support() | y.support();
        if self.is_face(union) {
            let d = euclid_sparse(x, y);
            return Ok(OrthantGeodesic { length: d, breakpoints: Vec::new() });
        }
        let local = Local::new(self, union);
        let xs = local.dense(x);
        let ys = local.dense(y);
        let (length, bps) = local.shortest(&xs, &ys, x.support(), y.support(), params);
        let mut breakpoints: Vec<ConePoint> = Vec::new();
        let mut prev = xs.clone();
        for b in bps {
            if dist(&b, &prev) > 0.0 && dist(&b, &ys) > 0.0 {
                breakpoints.push(local.sparse(&b));
                prev = b;
            }
        }
        Ok(OrthantGeodesic { length, breakpoints })
    }

    /// Point at arc-length fraction `s` along the geodesic from `x` to `y`.
    pub fn geodesic_point(&self, x: &ConePoint, y: &ConePoint, s: f64) -> Result<ConePoint> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("geodesic parameter {s} outside [0,1]")));
        }
        let g = self.geodesic(x, y, &OrthantParams::default())?;
        if s == 0.0 || g.length == 0.0 {
            return Ok(x.clone());
        }
        if s == 1.0 {
            return Ok(y.clone());
        }
        let mut nodes = Vec::with_capacity(g.breakpoints.len() + 2);
        nodes.push(x.clone());
        nodes.extend(g.breakpoints.iter().cloned());
        nodes.push(y.clone());
        Ok(walk_polyline(&nodes, s))
    }

    /// First point after `x` on the geodesic to `y` (the next breakpoint or
    /// `y` itself) and the distance. Used for gradients of distance functions.
    pub fn first_leg(&self, x: &ConePoint, y: &ConePoint) -> Result<(f64, ConePoint)> {
        let g = self.geodesic(x, y, &OrthantParams::default())?;
        let first = g.breakpoints.first().cloned().unwrap_or_else(|| y.clone());
        Ok((g.length, first))
    }
}

fn walk_polyline(nodes: &[ConePoint], s: f64) -> ConePoint {
    let lens: Vec<f64> = nodes.windows(2).map(|w| euclid_sparse(&w[0], &w[1])).collect();
    let total: f64 = lens.iter().sum();
    let mut remaining = s * total;
    for (i, &l) in lens.iter().enumerate() {
        if remaining <= l || i + 1 == lens.len() {
            let t = if l > 0.0 { (remaining / l).clamp(0.0, 1.0) } else { 0.0 };
            return lerp_sparse(&nodes[i], &nodes[i + 1], t);
        }
        remaining -= l;
    }
    nodes[nodes.len() - 1].clone()
}

pub(crate) fn lerp_sparse(a: &ConePoint, b: &ConePoint, t: f64) -> ConePoint {
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for &(k, v) in &a.coords {
        pairs.push((k, (1.0 - t) * v));
    }
    for &(k, v) in &b.coords {
        pairs.push((k, t * v));
    }
    let p = ConePoint::new(pairs).expect("convex combination stays nonnegative");
    ConePoint { coords: p.coords.into_iter().filter(|c| c.1 > 1e-300).collect() }
}

/// Euclidean distance of coordinate vectors (the ambient product metric).
pub fn euclid_sparse(x: &ConePoint, y: &ConePoint) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    let (a, b) = (&x.coords, &y.coords);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            s += a[i].1 * a[i].1;
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            s += b[j].1 * b[j].1;
            j += 1;
        } else {
            let d = a[i].1 - b[j].1;
            s += d * d;
            i += 1;
            j += 1;
        }
    }
    s.sqrt()
}

pub(crate) fn mask_axes(mask: u64) -> Vec<usize> {
    (0..64).filter(|&a| mask >> a & 1 == 1).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The subcone on a set of axes, with dense local coordinates.
struct Local {
    axes: Vec<usize>,
    /// Maximal faces as local masks.
    faces: Vec<u64>,
}

impl Local {
    fn new(cone: &TangentCone, mask: u64) -> Self {
        let axes = mask_axes(mask);
        let to_local = |m: u64| {
            axes.iter().enumerate().fold(0u64, |acc, (i, &a)| if m >> a & 1 == 1 { acc | 1 << i } else { acc })
        };
        let faces = cone.restricted_faces(mask).into_iter().map(to_local).collect();
        Local { axes, faces }
    }

    fn local_mask(&self, global: u64) -> u64 {
        self.axes
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &a)| if global >> a & 1 == 1 { acc | 1 << i } else { acc })
    }

    fn dense(&self, p: &ConePoint) -> Vec<f64> {
        self.axes.iter().map(|&a| p.get(a)).collect()
    }

    fn sparse(&self, v: &[f64]) -> ConePoint {
        ConePoint::new(self.axes.iter().zip(v).map(|(&a, &t)| (a, t.max(0.0))))
            .expect("nonnegative coordinates")
    }

    /// Minimum over face sequences. Returns the length and breakpoints.
    fn shortest(
        &self,
        x: &[f64],
        y: &[f64],
        sx: u64,
        sy: u64,
        params: &OrthantParams,
    ) -> (f64, Vec<Vec<f64>>) {
        let sx = self.local_mask(sx);
        let sy = self.local_mask(sy);
        let nf = self.faces.len();
        let cap = if params.max_sequence == 0 { nf } else { params.max_sequence.min(nf) };
        let lower = dist(x, y);
        let mut best = (f64::INFINITY, Vec::new());
        let starts: Vec<usize> = (0..nf).filter(|&i| self.faces[i] & sx == sx).collect();
        let ends: Vec<bool> = (0..nf).map(|i| self.faces[i] & sy == sy).collect();
        for len in 2..=cap.max(2) {
            let mut seq = Vec::with_capacity(len);
            for &s in &starts {
                seq.push(s);
                self.extend(&mut seq, len, &ends, x, y, params, &mut best);
                seq.pop();
            }
            if best.0 <= lower * (1.0 + 1e-15) {
                break;
            }
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        seq: &mut Vec<usize>,
        len: usize,
        ends: &[bool],
        x: &[f64],
        y: &[f64],
        params: &OrthantParams,
        best: &mut (f64, Vec<Vec<f64>>),
    ) {
        if seq.len() == len {
            if !ends[seq[len - 1]] {
                return;
            }
            let (l, bps) = self.relax(seq, x, y, params);
            if l < best.0 - 1e-12 {
                *best = (l, bps);
            }
            return;
        }
        for f in 0..self.faces.len() {
            if seq.contains(&f) {
                continue;
            }
            seq.push(f);
            self.extend(seq, len, ends, x, y, params, best);
            seq.pop();
        }
    }

    /// Shortest path through a fixed face sequence.
    fn relax(&self, seq: &[usize], x: &[f64], y: &[f64], params: &OrthantParams) -> (f64, Vec<Vec<f64>>) {
        let k = seq.len() - 1;
        let shared: Vec<u64> = seq.windows(2).map(|w| self.faces[w[0]] & self.faces[w[1]]).collect();
        let n = x.len();
        // start every breakpoint at the projection of the straight chord midpoint
        let mut bps: Vec<Vec<f64>> = shared
            .iter()
            .map(|&s| (0..n).map(|i| if s >> i & 1 == 1 { 0.5 * (x[i] + y[i]) } else { 0.0 }).collect())
            .collect();
        let sweeps = if k == 1 { 1 } else { params.max_sweeps };
        for sweep in 0..sweeps {
            let mut moved: f64 = 0.0;
            let order: Box<dyn Iterator<Item = usize>> =
                if sweep % 2 == 0 { Box::new(0..k) } else { Box::new((0..k).rev()) };
            for i in order {
                let p = if i == 0 { x } else { &bps[i - 1] };
                let q = if i + 1 == k { y } else { &bps[i + 1] };
                let b = unfold_point(p, q, shared[i]);
                moved = moved.max(dist(&b, &bps[i]));
                bps[i] = b;
            }
            if moved <= params.tol {
                break;
            }
        }
        let mut length = 0.0;
        let mut prev = x;
        for b in &bps {
            length += dist(prev, b);
            prev = b;
        }
        length += dist(prev, y);
        (length, bps)
    }
}

/// Minimizer over the orthant of `shared` of `|p - b| + |b - q|`.
fn unfold_point(p: &[f64], q: &[f64], shared: u64) -> Vec<f64> {
    let (mut alpha, mut beta) = (0.0, 0.0);
    for i in 0..p.len() {
        if shared >> i & 1 == 0 {
            alpha += p[i] * p[i];
            beta += q[i] * q[i];
        }
    }
    let (alpha, beta) = (alpha.sqrt(), beta.sqrt());
    let t = if alpha + beta > 0.0 { alpha / (alpha + beta) } else { 0.5 };
    (0..p.len())
        .map(|i| if shared >> i & 1 == 1 { p[i] + t * (q[i] - p[i]) } else { 0.0 })
        .collect()
}
