//! Spectral gap of a graph and its nonlinear analogue for a metric target.
//!
//! `lambda1_graph` is the second-smallest eigenvalue of the normalized
//! Laplacian. For a target space `Y` the gap becomes the infimum over
//! nonconstant vertex maps of
//! `sum_{uv in E} d(f(u), f(v))^2 / sum_v deg(v) d(f(v), bar f)^2`,
//! where `bar f` is the barycenter of the pushforward of `deg / 2|E|`.

use std::collections::VecDeque;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BarycenterParams, FiniteMeasure, MetricSpace};
use crate::linalg::sym_eigen;
use crate::rng::rng_for;

/// A simple connected graph without isolated vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("{n} vertices (need at least 2)")));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at {u}")));
            }
            if adj[u].contains(&v) {
                return Err(Error::InvalidGraph(format!("repeated edge {u}-{v}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        if let Some(v) = adj.iter().position(|a| a.is_empty()) {
            return Err(Error::InvalidGraph(format!("vertex {v} is isolated")));
        }
        let g = Graph { n, edges, adj };
        if g.bfs(0).iter().any(|d| d.is_none()) {
            return Err(Error::InvalidGraph("not connected".into()));
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
        Graph::new(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle on {n} vertices")));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn path(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// Text format: a line `n m`, then `m` lines `u v` (0-indexed).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let nums = |line: &str| -> Result<(usize, usize)> {
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(Error::Parse(format!("expected two integers, got {line:?}"))),
            }
        };
        let (n, m) = nums(lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?)?;
        let edges = lines.map(nums).collect::<Result<Vec<_>>>()?;
        if edges.len() != m {
            return Err(Error::Parse(format!("header promises {m} edges, found {}", edges.len())));
        }
        Graph::new(n, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Graph::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hop distances from `s`.
    pub fn bfs(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices are reached");
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances (the graph is connected).
    pub fn distances(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|s| self.bfs(s).into_iter().map(|d| d.expect("connected")).collect()).collect()
    }
}

/// Second eigenpair of the normalized Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralGap {
    pub value: f64,
    /// Eigenfunction of `f -> f - A D^{-1} f` transposed, i.e. `D^{-1/2} x`;
    /// its degree-weighted mean is zero.
    pub function: Vec<f64>,
    /// `|L x - lambda x|` for the unit eigenvector `x` of the symmetric form.
    pub residual: f64,
}

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

pub fn spectral_gap(g: &Graph) -> Result<SpectralGap> {
    let n = g.n;
    let inv_sqrt: Vec<f64> = g.adj.iter().map(|a| 1.0 / (a.len() as f64).sqrt()).collect();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        l[i * n + i] = 1.0;
    }
    for &(u, v) in &g.edges {
        let w = -inv_sqrt[u] * inv_sqrt[v];
        l[u * n + v] = w;
        l[v * n + u] = w;
    }
    let eig = sym_eigen(&l, n);
    let value = eig.values[1];
    let x = eig.vector(1);
    let residual = (0..n)
        .map(|i| {
            let lx: f64 = (0..n).map(|j| l[i * n + j] * x[j]).sum();
            (lx - value * x[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::InvalidArgument(format!("eigensolver residual {residual:e} above tolerance")));
    }
    let function = x.iter().zip(&inv_sqrt).map(|(a, b)| a * b).collect();
    Ok(SpectralGap { value, function, residual })
}

pub fn lambda1_graph(g: &Graph) -> Result<f64> {
    Ok(spectral_gap(g)?.value)
}

/// Degree-weighted pushforward of a vertex map, identical points merged.
pub fn pushforward<P: Clone + PartialEq>(g: &Graph, phi: &[P]) -> Result<FiniteMeasure<P>> {
    if phi.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: phi.len() });
    }
    let total = 2.0 * g.edges.len() as f64;
    let mut atoms: Vec<(P, f64)> = Vec::new();
    for (v, p) in phi.iter().enumerate() {
        let w = g.degree(v) as f64 / total;
        match atoms.iter_mut().find(|(q, _)| q == p) {
            Some(a) => a.1 += w,
            None => atoms.push((p.clone(), w)),
        }
    }
    if atoms.len() < 2 {
        return Err(Error::ConstantMap);
    }
    FiniteMeasure::normalized(atoms)
}

/// Quotient of a vertex map against a given center.
fn quotient_at<S: MetricSpace>(g: &Graph, space: &S, phi: &[S::Point], center: &S::Point) -> Result<(f64, f64)> {
    let mut num = 0.0;
    for &(u, v) in &g.edges {
        num += space.distance(&phi[u], &phi[v])?.powi(2);
    }
    let mut den = 0.0;
    for (v, p) in phi.iter().enumerate() {
        den += g.degree(v) as f64 * space.distance(p, center)?.powi(2);
    }
    Ok((num, den))
}

/// The Rayleigh quotient of `phi`, with its barycenter.
pub fn rayleigh_quotient_with<S: MetricSpace>(
    g: &Graph,
    phi: &[S::Point],
    space: &S,
    params: &BarycenterParams,
) -> Result<(f64, S::Point)> {
    let mu = pushforward(g, phi)?;
    let bar = space.barycenter(&mu, params)?;
    let (num, den) = quotient_at(g, space, phi, &bar.point)?;
    if !(den > 0.0) {
        return Err(Error::ConstantMap);
    }
    Ok((num / den, bar.point))
}

pub fn rayleigh_quotient<S: MetricSpace>(g: &Graph, phi: &[S::Point], space: &S) -> Result<f64> {
    Ok(rayleigh_quotient_with(g, phi, space, &BarycenterParams::default())?.0)
}

#[derive(Debug, Clone)]
pub struct WangParams {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Stop a restart when a sweep lowers the quotient by less than this, relatively.
    pub rel_tol: f64,
    pub steps: Vec<f64>,
    /// Random extra targets per vertex update.
    pub random_targets: usize,
    pub barycenter: BarycenterParams,
}

impl Default for WangParams {
    fn default() -> Self {
        WangParams {
            restarts: 16,
            max_sweeps: 100,
            rel_tol: 1e-8,
            steps: vec![1.0, 0.5, 0.25, 0.1, 0.03, 0.01],
            random_targets: 2,
            barycenter: BarycenterParams::fast(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct WangResult<P> {
    /// Lowest quotient found: an upper bound on the invariant.
    pub value: f64,
    pub witness: Vec<P>,
    pub restarts: Vec<RestartOutcome>,
    /// Best value over the first `k + 1` restarts.
    pub best_so_far: Vec<f64>,
}

/// Multi-restart local search for the nonlinear spectral gap.
///
/// Restart 0 spreads the graph eigenfunction affinely along a geodesic
/// between two far points, so its quotient is `lambda1_graph`; the others
/// start from random maps. Each sweep fixes the barycenter and moves every
/// vertex along the geodesic towards the target and step that lower the
/// quotient most, then recomputes the barycenter.
pub fn wang_lambda1<S: MetricSpace>(g: &Graph, space: &S, seed: u64, params: &WangParams) -> Result<WangResult<S::Point>> {
    if params.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let gap = spectral_gap(g)?;
    let runs: Vec<Result<(Vec<S::Point>, RestartOutcome)>> = (0..params.restarts)
        .into_par_iter()
        .map(|k| restart(g, space, &gap, seed, k, params))
        .collect();
    let mut best: Option<(f64, Vec<S::Point>)> = None;
    let mut restarts = Vec::new();
    let mut best_so_far = Vec::new();
    for run in runs {
        let (phi, out) = run?;
        if best.as_ref().is_none_or(|b| out.value < b.0) {
            best = Some((out.value, phi));
        }
        best_so_far.push(best.as_ref().expect("set above").0);
        restarts.push(out);
    }
    let (value, witness) = best.expect("at least one restart");
    Ok(WangResult { value, witness, restarts, best_so_far })
}

fn restart<S: MetricSpace>(
    g: &Graph,
    space: &S,
    gap: &SpectralGap,
    seed: u64,
    k: usize,
    params: &WangParams,
) -> Result<(Vec<S::Point>, RestartOutcome)> {
    let mut rng = rng_for(seed, "wang", k as u64);
    let n = g.n;
    let mut phi = if k == 0 {
        let (a, b) = far_pair(space, &mut rng)?;
        let (lo, hi) = gap.function.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        gap.function
            .iter()
            .map(|&x| space.geodesic_point(&a, &b, ((x - lo) / (hi - lo)).clamp(0.0, 1.0)))
            .collect::<Result<Vec<_>>>()?
    } else {
        loop {
            let phi: Vec<S::Point> = (0..n).map(|_| space.random_point(&mut rng)).collect();
            if phi.iter().any(|p| *p != phi[0]) {
                break phi;
            }
        }
    };
    let (mut value, mut center) = rayleigh_quotient_with(g, &phi, space, &params.barycenter)?;
    let mut best = (value, phi.clone());
    let mut converged = false;
    let mut sweeps = 0;
    let mut order: Vec<usize> = (0..n).collect();
    while sweeps < params.max_sweeps {
        sweeps += 1;
        order.shuffle(&mut rng);
        let (mut num, mut den) = quotient_at(g, space, &phi, &center)?;
        for &v in &order {
            let mut targets: Vec<S::Point> = g.neighbors(v).iter().map(|&u| phi[u].clone()).collect();
            targets.push(center.clone());
            for _ in 0..params.random_targets {
                targets.push(if rng.gen_bool(0.5) { phi[rng.gen_range(0..n)].clone() } else { space.random_point(&mut rng) });
            }
            let (own_num, own_den) = local_terms(g, space, &phi, &center, v, &phi[v])?;
            let mut choice: Option<(f64, f64, S::Point)> = None;
            let mut best_q = num / den;
            for t in &targets {
                for &s in &params.steps {
                    let cand = space.geodesic_point(&phi[v], t, s)?;
                    if cand == phi[v] {
                        continue;
                    }
                    let (cn, cd) = local_terms(g, space, &phi, &center, v, &cand)?;
                    let (nn, nd) = (num - own_num + cn, den - own_den + cd);
                    if nd > 0.0 && nn / nd < best_q {
                        best_q = nn / nd;
                        choice = Some((nn, nd, cand));
                    }
                }
            }
            if let Some((nn, nd, cand)) = choice {
                num = nn;
                den = nd;
                phi[v] = cand;
            }
        }
        let (q, c) = match rayleigh_quotient_with(g, &phi, space, &params.barycenter) {
            Ok(x) => x,
            Err(Error::ConstantMap) => break,
            Err(e) => return Err(e),
        };
        center = c;
        let previous = value;
        value = q;
        if value < best.0 {
            best = (value, phi.clone());
        }
        if previous - value < params.rel_tol * previous.abs() {
            converged = true;
            break;
        }
    }
    Ok((best.1, RestartOutcome { value: best.0, sweeps, converged }))
}

/// Numerator and denominator contributions of vertex `v` placed at `p`.
fn local_terms<S: MetricSpace>(
    g: &Graph,
    space: &S,
    phi: &[S::Point],
    center: &S::Point,
    v: usize,
    p: &S::Point,
) -> Result<(f64, f64)> {
    let mut num = 0.0;
    for &u in g.neighbors(v) {
        num += space.distance(p, &phi[u])?.powi(2);
    }
    let den = g.degree(v) as f64 * space.distance(p, center)?.powi(2);
    Ok((num, den))
}

/// The farthest pair among a few random points.
fn far_pair<S: MetricSpace>(space: &S, rng: &mut rand_chacha::ChaCha8Rng) -> Result<(S::Point, S::Point)> {
    let pts: Vec<S::Point> = (0..16).map(|_| space.random_point(rng)).collect();
    let mut best = (0.0, 0, 1);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = space.distance(&pts[i], &pts[j])?;
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    if best.0 == 0.0 {
        return Err(Error::InvalidArgument("target space looks like a single point".into()));
    }
    Ok((pts[best.1].clone(), pts[best.2].clone()))
}

pub const SANDWICH_UPPER_TOL: f64 = 1e-3;
pub const SANDWICH_LOWER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub space: String,
    pub lambda1: f64,
    pub delta_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub lambda_wang: f64,
    /// `lambda_wang <= lambda1 + tol`.
    pub upper_ok: bool,
    /// `lambda_wang >= (1 - delta) lambda1 - tol`.
    pub lower_ok: bool,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

pub fn sandwich_report(g: &Graph, space: &str, delta_upper: f64, lambda_wang: f64) -> Result<SandwichReport> {
    let lambda1 = lambda1_graph(g)?;
    let lower = (1.0 - delta_upper) * lambda1;
    Ok(SandwichReport {
        space: space.to_string(),
        lambda1,
        delta_upper,
        lower,
        upper: lambda1,
        lambda_wang,
        upper_ok: lambda_wang <= lambda1 + SANDWICH_UPPER_TOL,
        lower_ok: lambda_wang >= lower - SANDWICH_LOWER_TOL,
    })
}
