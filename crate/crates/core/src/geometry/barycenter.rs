//! Barycenters: minimizers of `x -> sum_p mu_p d(x, p)^2`.
//!
//! The generic scheme is the inductive mean: walk from the current estimate
//! towards the next atom by `1/(k+1)` of the geodesic, atoms visited in a
//! weighted round-robin order. On cones the estimate is then polished face
//! by face with projected gradient steps, which converge far faster than the
//! inductive mean's `O(1/k)` rate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::orthant::{mask_axes, ConePoint, TangentCone};
use super::{FiniteMeasure, MetricSpace};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct BarycenterParams {
    pub iterations: usize,
    pub tol: f64,
    pub seed: u64,
    /// Polish the inductive mean with a local solver where one exists.
    pub refine: bool,
    /// Run the perturbation-net check of the result.
    pub check_net: bool,
}

impl Default for BarycenterParams {
    fn default() -> Self {
        BarycenterParams { iterations: 20_000, tol: 1e-6, seed: 0, refine: true, check_net: true }
    }
}

impl BarycenterParams {
    /// Cheap settings for inner loops (a refined estimate from a short walk).
    pub fn fast() -> Self {
        BarycenterParams { iterations: 64, tol: 1e-6, seed: 0, refine: true, check_net: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barycenter<P> {
    pub point: P,
    /// `sum_p mu_p d(point, p)^2`.
    pub objective: f64,
    /// False if the last refinement round still decreased the objective by more than `tol`.
    pub converged: bool,
    /// No point of the perturbation net beats `point` by more than `tol`.
    pub net_ok: bool,
    pub iterations: usize,
}

pub fn objective<S: MetricSpace + ?Sized>(space: &S, mu: &FiniteMeasure<S::Point>, x: &S::Point) -> Result<f64> {
    let mut f = 0.0;
    for (p, w) in mu.atoms() {
        let d = space.distance(x, p)?;
        f += w * d * d;
    }
    Ok(f)
}

/// Weighted round-robin order: at each step the atom furthest behind its
/// share `k * mu_p` goes next; ties follow a seeded permutation.
fn weighted_cycle(weights: &[f64], steps: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..weights.len()).collect();
    perm.shuffle(&mut rng);
    let mut counts = vec![0usize; weights.len()];
    let mut order = Vec::with_capacity(steps);
    for k in 1..=steps {
        let next = *perm
            .iter()
            .max_by(|&&a, &&b| {
                let da = k as f64 * weights[a] - counts[a] as f64;
                let db = k as f64 * weights[b] - counts[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("nonempty measure");
        counts[next] += 1;
        order.push(next);
    }
    order
}

/// Inductive mean with `iterations` geodesic steps.
pub fn inductive_mean<S: MetricSpace + ?Sized>(
    space: &S,
    mu: &FiniteMeasure<S::Point>,
    iterations: usize,
    seed: u64,
) -> Result<S::Point> {
    let order = weighted_cycle(&mu.weights(), iterations.max(1), seed);
    let mut x = mu.atoms()[order[0]].0.clone();
    for (k, &i) in order.iter().enumerate().skip(1) {
        x = space.geodesic_point(&x, &mu.atoms()[i].0, 1.0 / (k as f64 + 1.0))?;
    }
    Ok(x)
}

/// Compare against points a short step towards every atom and a few random
/// points.
pub(crate) fn net_check<S: MetricSpace + ?Sized>(
    space: &S,
    mu: &FiniteMeasure<S::Point>,
    x: &S::Point,
    fx: f64,
    tol: f64,
    seed: u64,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut targets: Vec<S::Point> = mu.points();
    for _ in 0..4 {
        targets.push(space.random_point(&mut rng));
    }
    for t in &targets {
        let d = space.distance(x, t)?;
        if d <= 0.0 {
            continue;
        }
        for h in [1e-3, 1e-2] {
            let z = space.geodesic_point(x, t, (h / d).min(1.0))?;
            if objective(space, mu, &z)? < fx - tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) fn cone_barycenter(
    cone: &TangentCone,
    mu: &FiniteMeasure<ConePoint>,
    params: &BarycenterParams,
) -> Result<super::Barycenter<ConePoint>> {
    for (p, _) in mu.atoms() {
        cone.check_point(p)?;
    }
    let start = inductive_mean(cone, mu, params.iterations, params.seed)?;
    let mut best = start.clone();
    let mut best_f = objective(cone, mu, &start)?;
    let mut converged = !params.refine;
    let mut iterations = params.iterations;
    if params.refine {
        converged = true;
        let union = mu.atoms().iter().fold(0u64, |m, (p, _)| m | p.support());
        for face in cone.restricted_faces(union) {
            let x0 = project(&start, face);
            let (x, f, ok, its) = polish_in_face(cone, mu, x0, face, params.tol)?;
            iterations += its;
            if f < best_f {
                best = x;
                best_f = f;
                converged = ok;
            }
        }
    }
    let net_ok = if params.check_net {
        net_check(cone, mu, &best, best_f, params.tol, params.seed)?
    } else {
        true
    };
    Ok(super::Barycenter { point: best, objective: best_f, converged, net_ok, iterations })
}

fn project(x: &ConePoint, face: u64) -> ConePoint {
    ConePoint::new(x.coords().iter().copied().filter(|&(a, _)| face >> a & 1 == 1)).expect("subset of a point")
}

/// Projected gradient on one orthant with backtracking. The gradient of
/// `d(., p)^2 / 2` is `-d * u` where `u` is the unit initial direction of the
/// geodesic to `p`.
fn polish_in_face(
    cone: &TangentCone,
    mu: &FiniteMeasure<ConePoint>,
    mut x: ConePoint,
    face: u64,
    tol: f64,
) -> Result<(ConePoint, f64, bool, usize)> {
    let axes = mask_axes(face);
    let n = cone.n_axes();
    let mut fx = objective(cone, mu, &x)?;
    let mut last_gain = f64::INFINITY;
    let mut its = 0;
    for _ in 0..500 {
        its += 1;
        let xd = x.to_dense(n);
        let mut target = vec![0.0; n];
        for (p, w) in mu.atoms() {
            let (d, first) = cone.first_leg(&x, p)?;
            let fd = first.to_dense(n);
            let step = super::euclid(&fd, &xd);
            for i in 0..n {
                let dir = if step > 0.0 { (fd[i] - xd[i]) / step } else { 0.0 };
                target[i] += w * (xd[i] + d * dir);
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = ConePoint::new(
                axes.iter().map(|&a| (a, (xd[a] + t * (target[a] - xd[a])).max(0.0))),
            )?;
            let fc = objective(cone, mu, &cand)?;
            if fc < fx {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                let moved = super::euclid(&cand.to_dense(n), &xd);
                last_gain = fx - fc;
                x = cand;
                fx = fc;
                if moved < 1e-14 {
                    break;
                }
            }
            None => {
                last_gain = 0.0;
                break;
            }
        }
    }
    Ok((x, fx, last_gain <= tol, its))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EuclideanBox;

    #[test]
    fn round_robin_tracks_weights() {
        let order = weighted_cycle(&[0.25, 0.75], 400, 3);
        let zeros = order.iter().filter(|&&i| i == 0).count();
        assert_eq!(zeros, 100);
    }

    #[test]
    fn euclidean_square_corners() {
        let b = EuclideanBox::unit_cube(2);
        let mu = FiniteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let bar = b.barycenter(&mu, &BarycenterParams::default()).unwrap();
        assert!((bar.point[0] - 0.5).abs() < 1e-15 && (bar.point[1] - 0.5).abs() < 1e-15);
        let walk = inductive_mean(&b, &mu, 4000, 1).unwrap();
        assert!(super::super::euclid(&walk, &[0.5, 0.5]) < 1e-3);
    }

    #[test]
    fn tripod_tips_meet_at_origin() {
        let c = TangentCone::rays(3);
        let mu = FiniteMeasure::uniform((0..3).map(|a| ConePoint::axis(a, 1.0)).collect()).unwrap();
        let bar = c.barycenter(&mu, &BarycenterParams::default()).unwrap();
        assert!(bar.point.norm() < 1e-9, "{:?}", bar.point);
        assert!(bar.net_ok && bar.converged);
    }

    #[test]
    fn weighted_segment() {
        let s = EuclideanBox::segment(3.0);
        let mu = FiniteMeasure::new(vec![(vec![0.0], 1.0 / 3.0), (vec![3.0], 2.0 / 3.0)]).unwrap();
        let bar = s.barycenter(&mu, &BarycenterParams::default()).unwrap();
        assert!((bar.point[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_atoms_on_tripod_legs() {
        // geodesic through the origin: bar sits at parameter mu_q along it
        let c = TangentCone::rays(3);
        let p = ConePoint::axis(0, 1.0);
        let q = ConePoint::axis(1, 2.0);
        let mu = FiniteMeasure::new(vec![(p.clone(), 0.3), (q.clone(), 0.7)]).unwrap();
        let bar = c.barycenter(&mu, &BarycenterParams::default()).unwrap();
        let expect = c.geodesic_point(&p, &q, 0.7).unwrap();
        assert!(c.distance(&bar.point, &expect).unwrap() < 1e-9);
    }
}
