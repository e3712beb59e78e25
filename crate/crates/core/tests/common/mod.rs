//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use cubecat::geometry::{ConePoint, TangentCone};
use cubecat::spectral::Graph;

/// Sorted spectrum of `I - D^{-1/2} A D^{-1/2}` from a dense solver.
pub fn laplacian_spectrum(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut deg = vec![0.0; n];
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    let mut l = DMatrix::<f64>::identity(n, n);
    for &(u, v) in edges {
        let w = -1.0 / (deg[u] * deg[v] as f64).sqrt();
        l[(u, v)] = w;
        l[(v, u)] = w;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn oracle_lambda1(g: &Graph) -> f64 {
    laplacian_spectrum(g.vertex_count(), g.edges())[1]
}

/// Shortest cycle by enumerating simple cycles through each smallest vertex.
pub fn brute_girth(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let mut adj = vec![vec![]; n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    fn dfs(adj: &[Vec<usize>], start: usize, v: usize, len: usize, on: &mut [bool], best: &mut Option<usize>) {
        for &w in &adj[v] {
            if w == start && len >= 3 {
                *best = Some(best.map_or(len, |b| b.min(len)));
            } else if w > start && !on[w] && best.is_none_or(|b| len + 1 < b) {
                on[w] = true;
                dfs(adj, start, w, len + 1, on, best);
                on[w] = false;
            }
        }
    }
    let mut best = None;
    for s in 0..n {
        let mut on = vec![false; n];
        on[s] = true;
        dfs(&adj, s, s, 1, &mut on, &mut best);
    }
    best
}

/// Random connected simple graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let e = (u.min(v), u.max(v));
        if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == e) {
            edges.push(e);
        }
    }
    Graph::new(n, edges).expect("connected by construction")
}

/// Cone whose link is a random triangle-free graph, so every face has
/// dimension at most 2.
pub fn random_planar_faced_cone(n_axes: usize, p: f64, rng: &mut ChaCha8Rng) -> TangentCone {
    let mut adj = vec![0u64; n_axes];
    for a in 0..n_axes {
        for b in (a + 1)..n_axes {
            if adj[a] & adj[b] == 0 && rng.gen_bool(p) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
    }
    let mut faces: Vec<u64> = (0..n_axes).map(|a| 1u64 << a).collect();
    for a in 0..n_axes {
        for b in (a + 1)..n_axes {
            if adj[a] >> b & 1 == 1 {
                faces.push(1 << a | 1 << b);
            }
        }
    }
    TangentCone::new(n_axes, faces).expect("triangle-free links are flag")
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Distance in the lattice graph on a truncated cone: nodes are the points
/// with coordinates in `{0, 1/m, ..., side}` whose support is a face, and
/// each node connects to `x + s/m` for primitive `s` with entries in
/// `[-radius, radius]` supported on a face containing `x`. Every edge is a
/// straight segment inside one orthant, so the result is an upper bound.
/// Faces must have dimension at most 2.
pub fn stencil_distance(cone: &TangentCone, m: usize, side: usize, radius: i32, a: &ConePoint, b: &ConePoint) -> f64 {
    let n = cone.n_axes();
    let h = 1.0 / m as f64;
    let cap = (side * m) as i32;
    let to_lattice = |p: &ConePoint| -> Vec<i32> {
        let mut v = vec![0; n];
        for &(axis, t) in p.coords() {
            let k = (t * m as f64).round();
            assert!((k * h - t).abs() < 1e-12, "point {p} is not on the lattice");
            v[axis] = k as i32;
        }
        v
    };
    let faces: Vec<Vec<usize>> =
        cone.maximal_faces().iter().map(|&f| (0..n).filter(|&i| f >> i & 1 == 1).collect()).collect();
    assert!(faces.iter().all(|f| f.len() <= 2), "stencil oracle supports faces of dimension <= 2");
    let mut steps2 = Vec::new();
    for i in -radius..=radius {
        for j in -radius..=radius {
            if gcd(i, j) == 1 {
                steps2.push((i, j));
            }
        }
    }
    let start = to_lattice(a);
    let goal = to_lattice(b);
    let mut dist: HashMap<Vec<i32>, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start.clone(), 0.0);
    heap.push((Reverse(Key(0.0)), start));
    while let Some((Reverse(Key(d)), x)) = heap.pop() {
        if x == goal {
            return d;
        }
        if dist.get(&x).is_some_and(|&best| d > best) {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|&i| x[i] != 0).collect();
        for f in faces.iter().filter(|f| support.iter().all(|i| f.contains(i))) {
            let moves: Vec<(i32, i32)> = if f.len() == 2 { steps2.clone() } else { vec![(1, 0), (-1, 0)] };
            for (s0, s1) in moves {
                let mut y = x.clone();
                y[f[0]] += s0;
                if f.len() == 2 {
                    y[f[1]] += s1;
                }
                if f.iter().any(|&i| y[i] < 0 || y[i] > cap) {
                    continue;
                }
                let len = h * ((s0 * s0 + s1 * s1) as f64).sqrt();
                let nd = d + len;
                if dist.get(&y).is_none_or(|&old| nd < old - 1e-15) {
                    dist.insert(y.clone(), nd);
                    heap.push((Reverse(Key(nd)), y));
                }
            }
        }
    }
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Closed form for a cone with exactly two maximal faces `C x A` and
/// `C x B` (`C` the shared axes): any path between the `A` and `B` parts
/// passes through `C`, so the distance is that of `R^C x (A glued to B at 0)`.
pub fn two_orthant_distance(shared: u64, p: &ConePoint, q: &ConePoint) -> f64 {
    let mut dc2 = 0.0;
    let (mut rp, mut rq) = (0.0, 0.0);
    for &(a, t) in p.coords() {
        if shared >> a & 1 == 1 {
            dc2 += (t - q.get(a)).powi(2);
        } else {
            rp += t * t;
        }
    }
    for &(a, t) in q.coords() {
        if shared >> a & 1 == 1 {
            if p.get(a) == 0.0 {
                dc2 += t * t;
            }
        } else {
            rq += t * t;
        }
    }
    (dc2 + (rp.sqrt() + rq.sqrt()).powi(2)).sqrt()
}

/// `min mu^T G mu / sum mu_p r_p^2` over three vectors with `|v_p| = r_p`
/// and `|v_p - v_q| <= d_pq`, by dense search over the pairwise angles.
///
/// With `theta_pq` the angle between `v_p` and `v_q`, the Lipschitz
/// constraint is `theta_pq <= theta_max_pq`. Three angles are realizable iff
/// each is at most the sum of the other two and all three sum to at most
/// `2 pi`. The objective decreases in every angle, so after fixing two
/// angles on a grid the third takes its largest admissible value. Each of
/// the three choices of grid pair is searched, which also covers the
/// degenerate case where collinear atoms pin the feasible set to a line.
pub fn three_atom_grid(radii: [f64; 3], d: [[f64; 3]; 3], mu: [f64; 3]) -> f64 {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let tmax: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| {
            if radii[i] * radii[j] == 0.0 {
                return PI;
            }
            let c = (radii[i].powi(2) + radii[j].powi(2) - d[i][j].powi(2)) / (2.0 * radii[i] * radii[j]);
            c.clamp(-1.0, 1.0).acos()
        })
        .collect();
    let den: f64 = (0..3).map(|i| mu[i] * radii[i] * radii[i]).sum();
    let w: Vec<f64> = pairs.iter().map(|&(i, j)| 2.0 * mu[i] * mu[j] * radii[i] * radii[j]).collect();
    let base: f64 = (0..3).map(|i| (mu[i] * radii[i]).powi(2)).sum();
    let mut overall = f64::INFINITY;
    for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let eval = |ta: f64, tb: f64| -> Option<f64> {
            let tc = tmax[c].min(ta + tb).min(2.0 * PI - ta - tb);
            if tc < (ta - tb).abs() - 1e-12 {
                return None;
            }
            Some((base + w[a] * ta.cos() + w[b] * tb.cos() + w[c] * tc.cos()) / den)
        };
        let search = |lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64, k: usize| {
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=k {
                let ta = lo_a + (hi_a - lo_a) * i as f64 / k as f64;
                for j in 0..=k {
                    let tb = lo_b + (hi_b - lo_b) * j as f64 / k as f64;
                    if let Some(v) = eval(ta, tb) {
                        if v < best.0 {
                            best = (v, ta, tb);
                        }
                    }
                }
            }
            best
        };
        let mut best = search(0.0, tmax[a], 0.0, tmax[b], 600);
        if !best.0.is_finite() {
            continue;
        }
        let (mut wa, mut wb) = (tmax[a] / 600.0, tmax[b] / 600.0);
        for _ in 0..6 {
            let (lo_a, hi_a) = ((best.1 - 2.0 * wa).max(0.0), (best.1 + 2.0 * wa).min(tmax[a]));
            let (lo_b, hi_b) = ((best.2 - 2.0 * wb).max(0.0), (best.2 + 2.0 * wb).min(tmax[b]));
            let cand = search(lo_a, hi_a, lo_b, hi_b, 100);
            if cand.0 < best.0 {
                best = cand;
            }
            wa = (hi_a - lo_a) / 100.0;
            wb = (hi_b - lo_b) / 100.0;
        }
        overall = overall.min(best.0);
    }
    overall
}

#[derive(Debug, Clone, Deserialize)]
pub struct ThreeAtomInstance {
    pub name: String,
    pub n_axes: usize,
    pub faces: Vec<Vec<usize>>,
    pub atoms: [String; 3],
    pub weights: [f64; 3],
}

impl ThreeAtomInstance {
    pub fn cone(&self) -> TangentCone {
        let masks = self.faces.iter().map(|f| f.iter().fold(0u64, |m, &a| m | 1 << a)).collect();
        TangentCone::new(self.n_axes, masks).expect("bundled cones are flag")
    }

    pub fn points(&self) -> Vec<ConePoint> {
        self.atoms.iter().map(|s| ConePoint::parse(s).expect("bundled points parse")).collect()
    }
}

pub fn three_atom_instances() -> Vec<ThreeAtomInstance> {
    let text = include_str!("../data/three_atom.json");
    serde_json::from_str(text).expect("bundled instances parse")
}
