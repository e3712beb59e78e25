mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_planar_faced_cone, stencil_distance, two_orthant_distance};
use cubecat::complex::{
    book, grid_raw, l_shape_raw, mutate_drop_face, mutate_duplicate_square, random_square_complex_raw,
    random_tree_raw, star_tree_raw, unit_cube_raw, ComplexPoint, CubeComplex,
};
use cubecat::geometry::{
    BarycenterParams, ComplexSpace, ConePoint, EuclideanBox, FiniteMeasure, MetricSpace, SubdivisionConfig, TangentCone,
};
use cubecat::tangent::random_flag_cone;

fn space(x: CubeComplex, level: usize) -> ComplexSpace {
    ComplexSpace::new(x, SubdivisionConfig { level, ..SubdivisionConfig::default() }).unwrap()
}

/// A point with coordinates `k/m` in a random maximal face.
fn lattice_point(cone: &TangentCone, m: usize, rng: &mut ChaCha8Rng) -> ConePoint {
    let face = *cone.maximal_faces().choose(rng).unwrap();
    let pairs = (0..cone.n_axes()).filter(|&a| face >> a & 1 == 1).map(|a| (a, rng.gen_range(0..=m) as f64 / m as f64));
    ConePoint::new(pairs.filter(|&(_, t)| t > 0.0)).unwrap()
}

fn point_in(mask: u64, rng: &mut ChaCha8Rng) -> ConePoint {
    let mut pairs = Vec::new();
    for a in (0..64).filter(|&a| mask >> a & 1 == 1) {
        if rng.gen_bool(0.85) {
            pairs.push((a, rng.gen_range(0.01..2.0)));
        }
    }
    ConePoint::new(pairs).unwrap()
}

#[test]
fn two_orthant_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let (nc, na, nb) = (rng.gen_range(0..=2), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let n = nc + na + nb;
        let mut axes: Vec<usize> = (0..n).collect();
        axes.shuffle(&mut rng);
        let mask = |s: &[usize]| s.iter().fold(0u64, |m, &a| m | 1 << a);
        let c = mask(&axes[..nc]);
        let a = mask(&axes[nc..nc + na]);
        let b = mask(&axes[nc + na..]);
        let cone = TangentCone::new(n, vec![c | a, c | b]).unwrap();
        assert_eq!(cone.maximal_faces().len(), 2);
        let p = point_in(c | a, &mut rng);
        let q = point_in(c | b, &mut rng);
        let d = cone.distance(&p, &q).unwrap();
        let want = two_orthant_distance(c, &p, &q);
        assert!((d - want).abs() < 1e-9, "{p} -> {q}: {d} vs {want}");
    }
}

#[test]
fn orthant_distance_matches_lattice_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 32;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cone = random_planar_faced_cone(rng.gen_range(3..=6), 0.5, &mut rng);
        let p = lattice_point(&cone, m, &mut rng);
        let q = lattice_point(&cone, m, &mut rng);
        if p == q {
            continue;
        }
        let d = cone.distance(&p, &q).unwrap();
        let oracle = stencil_distance(&cone, m, 1, 4, &p, &q);
        assert!(oracle >= d - 1e-9, "lattice path {oracle} shorter than geodesic {d}");
        worst = worst.max((oracle - d) / d);
        assert!((oracle - d) / d < 0.02, "{p} -> {q}: {d} vs lattice {oracle}");
    }
    println!("worst relative gap {worst:.4}");
}

#[test]
fn l_shape_geodesic_bends_at_the_reflex_vertex() {
    // ambient (2,1) is vertex 5 and (1,2) is vertex 7
    let x = CubeComplex::validate(&l_shape_raw()).unwrap();
    let d = space(x, 8).distance(&ComplexPoint::vertex(5), &ComplexPoint::vertex(7)).unwrap();
    assert!((d - 2.0).abs() <= 0.02, "{d}");
}

#[test]
fn graph_upper_bound_refines_along_divisible_levels() {
    let x = book(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let coarse = space(x.clone(), 1);
    for _ in 0..10 {
        let p = coarse.random_point(&mut rng);
        let q = coarse.random_point(&mut rng);
        let mut last = f64::INFINITY;
        for m in [1, 2, 4, 8, 16] {
            let up = space(x.clone(), m).interval(&p, &q).unwrap().upper;
            assert!(up <= last + 1e-12, "m={m}: {up} > {last}");
            last = up;
        }
    }
}

#[test]
fn two_atom_barycenter_on_the_geodesic() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let cone = random_flag_cone(rng.gen_range(2..=6), 0.5, &mut rng);
        let p = cone.random_point(&mut rng);
        let q = cone.random_point(&mut rng);
        if p == q {
            continue;
        }
        let w = rng.gen_range(0.1..0.9);
        let mu = FiniteMeasure::new(vec![(p.clone(), 1.0 - w), (q.clone(), w)]).unwrap();
        let bar = cone.barycenter(&mu, &BarycenterParams::default()).unwrap().point;
        let expect = cone.geodesic_point(&p, &q, w).unwrap();
        assert!(cone.distance(&bar, &expect).unwrap() < 1e-6, "{bar} vs {expect}");
    }
    let seg = EuclideanBox::segment(3.0);
    let mu = FiniteMeasure::new(vec![(vec![0.5], 0.25), (vec![2.5], 0.75)]).unwrap();
    let bar = seg.barycenter(&mu, &BarycenterParams::default()).unwrap().point;
    assert!((bar[0] - 2.0).abs() < 1e-12);
}

#[test]
fn generators_validate_and_mutations_fail() {
    let mut raws = vec![unit_cube_raw(1), unit_cube_raw(2), unit_cube_raw(3), star_tree_raw(4), grid_raw(3, 2), l_shape_raw()];
    for s in 0..8 {
        raws.push(random_tree_raw(3 + s as usize, s));
        raws.push(random_square_complex_raw(4 + s as usize, s));
    }
    for raw in &raws {
        assert!(CubeComplex::validate(raw).is_ok(), "{raw:?}");
        if raw.cubes.iter().any(|c| c.len() == 4) {
            assert!(CubeComplex::validate(&mutate_drop_face(raw)).is_err());
            assert!(CubeComplex::validate(&mutate_duplicate_square(raw)).is_err());
        }
    }
}

#[test]
fn star_faces_closed_downward_with_unique_cells() {
    for raw in [unit_cube_raw(3), grid_raw(2, 2), random_square_complex_raw(10, 4)] {
        let x = CubeComplex::validate(&raw).unwrap();
        for v in 0..x.vertex_count() {
            let star = x.star_faces(v).unwrap();
            let masks: Vec<u64> = star.faces.iter().map(|f| f.0).collect();
            let mut sorted = masks.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), masks.len(), "a face spans two cells");
            for &m in &masks {
                let mut sub = (m - 1) & m;
                while sub != 0 {
                    assert!(masks.contains(&sub), "face {m:b} lacks subface {sub:b}");
                    sub = (sub - 1) & m;
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn orthant_metric_axioms(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cone = random_flag_cone(rng.gen_range(2..=7), 0.5, &mut rng);
        let (a, b, c) = (cone.random_point(&mut rng), cone.random_point(&mut rng), cone.random_point(&mut rng));
        let ab = cone.distance(&a, &b).unwrap();
        prop_assert!((ab - cone.distance(&b, &a).unwrap()).abs() < 1e-9);
        let ac = cone.distance(&a, &c).unwrap();
        let cb = cone.distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9, "{} > {} + {}", ab, ac, cb);
        prop_assert!(cone.distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn canonicalize_is_idempotent(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = cubecat::complex::random_square_complex(6, seed % 17);
        let s = space(x, 1);
        let p = s.random_point(&mut rng);
        let once = s.complex().canonicalize(&p).unwrap();
        prop_assert_eq!(s.complex().canonicalize(&once).unwrap(), once);
    }
}
