//! Moduli of uniform embeddings and the ball-counting obstruction for
//! expander families.
//!
//! If `f` is `c`-Lipschitz on edges (`c = rho2(1)`) and `l` is at most the
//! Rayleigh quotient of `f`, then `sum_v deg(v) d(f(v), bar f)^2 <= |E| c^2 / l`,
//! so by Markov at least half the vertices land in the ball of radius
//! `sqrt(D / l) c` around `bar f` (`D` the maximal degree). The preimage of
//! that ball has diameter at most `rho1^{-1}(2r)`, so it holds at most
//! `D^{1 + rho1^{-1}(2r)}` vertices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BarycenterParams, MetricSpace};
use crate::spectral::{pushforward, Graph};

/// Non-decreasing piecewise-linear function on `[0, inf)`, extended past the
/// last breakpoint with the final slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<[f64; 2]>> for PiecewiseLinear {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        PiecewiseLinear::new(v.into_iter().map(|[x, y]| (x, y)).collect())
    }
}

impl From<PiecewiseLinear> for Vec<[f64; 2]> {
    fn from(p: PiecewiseLinear) -> Self {
        p.points.into_iter().map(|(x, y)| [x, y]).collect()
    }
}

impl PiecewiseLinear {
    /// Needs `x_0 = 0`, increasing `x`, non-decreasing `y` and a positive final slope.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a modulus needs at least two breakpoints".into()));
        }
        if points[0].0 != 0.0 || points[0].1 < 0.0 {
            return Err(Error::InvalidArgument("a modulus must start at x = 0 with y >= 0".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return Err(Error::InvalidArgument(format!("modulus not increasing at {:?}", w[1])));
            }
        }
        let (a, b) = (points[points.len() - 2], points[points.len() - 1]);
        if !(b.1 > a.1) {
            return Err(Error::InvalidArgument("final slope must be positive so the modulus is unbounded".into()));
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn identity() -> Self {
        PiecewiseLinear { points: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    /// `t -> s t`.
    pub fn linear(s: f64) -> Result<Self> {
        PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, s)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|&(x, _)| x <= t).clamp(1, p.len() - 1);
        let (a, b) = (p[i - 1], p[i]);
        a.1 + (t - a.0) * (b.1 - a.1) / (b.0 - a.0)
    }

    /// `sup { t : rho(t) <= y }`, or 0 when `y < rho(0)`.
    pub fn inverse(&self, y: f64) -> f64 {
        let p = &self.points;
        if y < p[0].1 {
            return 0.0;
        }
        for w in p.windows(2) {
            if w[1].1 > y {
                let (a, b) = (w[0], w[1]);
                return a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1);
            }
        }
        let (a, b) = (p[p.len() - 2], p[p.len() - 1]);
        b.0 + (y - b.1) * (b.0 - a.0) / (b.1 - a.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformEmbeddingModuli {
    pub rho1: PiecewiseLinear,
    pub rho2: PiecewiseLinear,
}

impl UniformEmbeddingModuli {
    /// Requires `rho1 <= rho2` at every breakpoint of either table.
    pub fn new(rho1: PiecewiseLinear, rho2: PiecewiseLinear) -> Result<Self> {
        let m = UniformEmbeddingModuli { rho1, rho2 };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        for &(x, _) in self.rho1.points.iter().chain(&self.rho2.points) {
            if self.rho1.eval(x) > self.rho2.eval(x) + 1e-12 {
                return Err(Error::InvalidArgument(format!("rho1 exceeds rho2 at {x}")));
            }
        }
        Ok(())
    }

    pub fn identity() -> Self {
        UniformEmbeddingModuli { rho1: PiecewiseLinear::identity(), rho2: PiecewiseLinear::identity() }
    }

    /// `c = rho2(1)`, the Lipschitz constant on edges.
    pub fn lipschitz_c(&self) -> f64 {
        self.rho2.eval(1.0)
    }

    pub fn rho1_inverse(&self, y: f64) -> f64 {
        self.rho1.inverse(y)
    }
}

pub const MODULI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuliViolation {
    pub member: usize,
    pub u: usize,
    pub v: usize,
    pub graph_distance: usize,
    pub image_distance: f64,
    pub bound: Bound,
    /// The modulus value that was crossed.
    pub limit: f64,
}

/// Check `rho1(d(u,v)) <= d(f(u), f(v)) <= rho2(d(u,v))` for all vertex pairs
/// of every family member.
pub fn check_uniform_moduli<S: MetricSpace>(
    space: &S,
    family: &[(Graph, Vec<S::Point>)],
    moduli: &UniformEmbeddingModuli,
) -> Result<Vec<ModuliViolation>> {
    let mut out = Vec::new();
    for (member, (g, f)) in family.iter().enumerate() {
        if f.len() != g.vertex_count() {
            return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: f.len() });
        }
        let hops = g.distances();
        let img = space.distance_matrix(f)?;
        for u in 0..f.len() {
            for v in (u + 1)..f.len() {
                let t = hops[u][v];
                let d = img[u][v];
                let lo = moduli.rho1.eval(t as f64);
                let hi = moduli.rho2.eval(t as f64);
                if d < lo - MODULI_TOL {
                    out.push(ModuliViolation { member, u, v, graph_distance: t, image_distance: d, bound: Bound::Lower, limit: lo });
                }
                if d > hi + MODULI_TOL {
                    out.push(ModuliViolation { member, u, v, graph_distance: t, image_distance: d, bound: Bound::Upper, limit: hi });
                }
            }
        }
    }
    Ok(out)
}

/// How the spectral constant entering the radius was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusRule {
    /// A computed quotient for this graph: `r = sqrt(D / l) c`.
    PerGraph,
    /// Half a family bound `lambda`: `l = lambda / 2`, so `r = sqrt(2 D / lambda) c`.
    Family,
}

impl RadiusRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            RadiusRule::PerGraph => "per-graph",
            RadiusRule::Family => "family",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// At least half the vertices lie in the ball.
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionRecord {
    pub graph_id: String,
    pub vertices: usize,
    pub rule: RadiusRule,
    pub lipschitz_c: f64,
    pub lambda_used: f64,
    /// Quotient of the map itself, for comparison with `lambda_used`.
    pub quotient: f64,
    /// Longest image of an edge; the counting argument needs it `<= c`.
    pub max_edge_image: f64,
    pub radius: f64,
    pub count_in_ball: usize,
    pub half_vertices: usize,
    pub degree_bound: usize,
    pub capacity_bound: f64,
    pub verdict: Verdict,
    /// `count_in_ball <= capacity_bound`.
    pub within_capacity: bool,
    /// `|V| / 2 > capacity_bound`: no uniform embedding with these moduli
    /// can send this graph into the ball.
    pub half_exceeds_capacity: bool,
}

/// Ball-counting record for one graph and map. `lambda_used` is the
/// constant `l` in `r = sqrt(D / l) c`; for [`RadiusRule::Family`] pass
/// `lambda / 2`.
#[allow(clippy::too_many_arguments)]
pub fn obstruction_check<S: MetricSpace>(
    graph_id: &str,
    g: &Graph,
    f: &[S::Point],
    space: &S,
    moduli: &UniformEmbeddingModuli,
    lambda_used: f64,
    rule: RadiusRule,
    params: &BarycenterParams,
) -> Result<ObstructionRecord> {
    if !(lambda_used > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_used = {lambda_used} must be positive")));
    }
    let mu = pushforward(g, f)?;
    let bar = space.barycenter(&mu, params)?.point;
    let mut num = 0.0;
    let mut max_edge: f64 = 0.0;
    for &(u, v) in g.edges() {
        let d = space.distance(&f[u], &f[v])?;
        num += d * d;
        max_edge = max_edge.max(d);
    }
    let radial = f.iter().map(|p| space.distance(p, &bar)).collect::<Result<Vec<_>>>()?;
    let den: f64 = radial.iter().enumerate().map(|(v, r)| g.degree(v) as f64 * r * r).sum();
    if !(den > 0.0) {
        return Err(Error::ConstantMap);
    }
    let c = moduli.lipschitz_c();
    let dmax = g.max_degree();
    let radius = (dmax as f64 / lambda_used).sqrt() * c;
    let count = radial.iter().filter(|&&r| r <= radius).count();
    let n = g.vertex_count();
    let capacity = (dmax as f64).powf(1.0 + moduli.rho1_inverse(2.0 * radius));
    Ok(ObstructionRecord {
        graph_id: graph_id.to_string(),
        vertices: n,
        rule,
        lipschitz_c: c,
        lambda_used,
        quotient: num / den,
        max_edge_image: max_edge,
        radius,
        count_in_ball: count,
        half_vertices: n.div_ceil(2),
        degree_bound: dmax,
        capacity_bound: capacity,
        verdict: if 2 * count >= n { Verdict::Consistent } else { Verdict::Inconsistent },
        within_capacity: count as f64 <= capacity,
        half_exceeds_capacity: n as f64 / 2.0 > capacity,
    })
}
