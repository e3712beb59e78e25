//! Metric geometry: spaces with geodesics, finite measures and barycenters.

mod barycenter;
mod measure;
pub mod orthant;
mod subdivision;

pub use barycenter::{inductive_mean, objective, BarycenterParams, Barycenter};
pub use measure::FiniteMeasure;
pub use orthant::{euclid_sparse, ConePoint, OrthantGeodesic, OrthantParams, TangentCone};
pub use subdivision::{ComplexSpace, DistanceInterval, SubdivisionConfig};

use std::fmt::Debug;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A uniquely geodesic metric space the numerical routines can work in.
pub trait MetricSpace: Sync {
    type Point: Clone + PartialEq + Debug + Send + Sync;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// A lower estimate of the distance; equals `distance` when distances are exact.
    fn distance_lower(&self, a: &Self::Point, b: &Self::Point) -> Result<f64> {
        self.distance(a, b)
    }

    /// Whether `distance` is exact rather than an upper estimate.
    fn exact_distances(&self) -> bool {
        true
    }

    /// Point at fraction `s` of the way from `a` to `b`.
    fn geodesic_point(&self, a: &Self::Point, b: &Self::Point, s: f64) -> Result<Self::Point>;

    fn barycenter(&self, mu: &FiniteMeasure<Self::Point>, params: &BarycenterParams) -> Result<Barycenter<Self::Point>>;

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Self::Point;

    /// Matrix of pairwise distances.
    fn distance_matrix(&self, points: &[Self::Point]) -> Result<Vec<Vec<f64>>> {
        let n = points.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let x = self.distance(&points[i], &points[j])?;
                d[i][j] = x;
                d[j][i] = x;
            }
        }
        Ok(d)
    }
}

/// Error unless the measure has two support points at positive distance.
pub fn ensure_spread<S: MetricSpace>(space: &S, mu: &FiniteMeasure<S::Point>) -> Result<()> {
    let first = &mu.atoms()[0].0;
    for (p, _) in &mu.atoms()[1..] {
        if space.distance(first, p)? > 0.0 {
            return Ok(());
        }
    }
    Err(Error::InvalidMeasure("support is a single point".into()))
}

/// An axis-parallel box in Euclidean space; `[0, L]` is the segment of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl EuclideanBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument("box needs lo < hi in every coordinate".into()));
        }
        Ok(EuclideanBox { lo, hi })
    }

    pub fn segment(length: f64) -> Self {
        EuclideanBox::new(vec![0.0], vec![length]).expect("positive length")
    }

    pub fn unit_cube(dim: usize) -> Self {
        EuclideanBox::new(vec![0.0; dim], vec![1.0; dim]).expect("nonempty cube")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if p.iter().zip(self.lo.iter().zip(&self.hi)).any(|(x, (a, b))| *x < a - 1e-12 || *x > b + 1e-12) {
            return Err(Error::InvalidPoint(format!("{p:?} outside the box")));
        }
        Ok(())
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl MetricSpace for EuclideanBox {
    type Point = Vec<f64>;

    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(euclid(a, b))
    }

    fn geodesic_point(&self, a: &Vec<f64>, b: &Vec<f64>, s: f64) -> Result<Vec<f64>> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect())
    }

    fn barycenter(&self, mu: &FiniteMeasure<Vec<f64>>, _params: &BarycenterParams) -> Result<Barycenter<Vec<f64>>> {
        let mut mean = vec![0.0; self.dim()];
        for (p, w) in mu.atoms() {
            self.check(p)?;
            for (m, x) in mean.iter_mut().zip(p) {
                *m += w * x;
            }
        }
        let obj = objective(self, mu, &mean)?;
        Ok(Barycenter { point: mean, objective: obj, converged: true, net_ok: true, iterations: 0 })
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| rng.gen_range(*a..*b)).collect()
    }
}

impl MetricSpace for TangentCone {
    type Point = ConePoint;

    fn distance(&self, a: &ConePoint, b: &ConePoint) -> Result<f64> {
        TangentCone::distance(self, a, b)
    }

    fn geodesic_point(&self, a: &ConePoint, b: &ConePoint, s: f64) -> Result<ConePoint> {
        TangentCone::geodesic_point(self, a, b, s)
    }

    fn barycenter(&self, mu: &FiniteMeasure<ConePoint>, params: &BarycenterParams) -> Result<Barycenter<ConePoint>> {
        barycenter::cone_barycenter(self, mu, params)
    }

    /// Uniform maximal face, exponential(1) coordinates on its axes.
    fn random_point(&self, rng: &mut ChaCha8Rng) -> ConePoint {
        let faces = self.maximal_faces();
        if faces.is_empty() {
            return ConePoint::origin();
        }
        let f = faces[rng.gen_range(0..faces.len())];
        let pairs: Vec<(usize, f64)> = orthant::mask_axes(f)
            .into_iter()
            .map(|a| (a, -(1.0 - rng.gen::<f64>()).ln()))
            .collect();
        ConePoint::new(pairs).expect("positive coordinates")
    }
}
