//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    oracle_lambda1, random_planar_faced_cone, stencil_distance, three_atom_grid, three_atom_instances,
    two_orthant_distance,
};
use cubecat::complex::{book, l_shape_raw, random_square_complex, unit_cube, ComplexPoint, CubeComplex};
use cubecat::delta::{delta_complex_survey, delta_of_measure, random_measure, DeltaParams, SurveyParams};
use cubecat::geometry::{ComplexSpace, ConePoint, EuclideanBox, FiniteMeasure, MetricSpace, SubdivisionConfig, TangentCone};
use cubecat::harness::{load_complex, run_experiment, RunReport};
use cubecat::spectral::{lambda1_graph, Graph};
use cubecat::tangent::{distortion_report, random_flag_cone, DistortionViolation};

struct Gate {
    failed: Vec<usize>,
}

impl Gate {
    fn report(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        println!("{} [{id}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn run(name: &str, out: &Path) -> RunReport {
    run_experiment(&config(name), Some(out)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn spectral_exactness(gate: &mut Gate) {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for (g, want) in [
        (Graph::complete(4).unwrap(), 4.0 / 3.0),
        (Graph::cycle(4).unwrap(), 1.0),
        (Graph::complete(2).unwrap(), 2.0),
    ] {
        let got = lambda1_graph(&g).unwrap();
        worst = worst.max((got - want).abs()).max((oracle_lambda1(&g) - want).abs());
    }
    let el = t.elapsed();
    gate.report(
        1,
        "spectral exactness",
        worst <= 1e-9 && el < Duration::from_secs(1),
        format!("max error {worst:.1e} (tol 1e-9), {} (limit 1s)", secs(el)),
    );
}

fn distortion_suite(gate: &mut Gate) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut pairs, mut violations, mut max_ratio) = (0usize, 0usize, 0f64);
    let mut worst_radial: f64 = 0.0;
    for i in 0..20 {
        let cone = random_flag_cone(rng.gen_range(2..=8), 0.5, &mut rng);
        let rep = distortion_report(&cone, 500, i).unwrap();
        pairs += rep.sample_count;
        violations += rep.violations.len();
        max_ratio = max_ratio.max(rep.max_ratio);
        for p in &rep.pairs {
            let lower = p.cone_distance / std::f64::consts::SQRT_2 - 1e-9;
            if p.embedded_distance < lower || p.embedded_distance > p.cone_distance + 1e-9 || p.radial_error > 1e-12 {
                violations += 1;
            }
            worst_radial = worst_radial.max(p.radial_error);
        }
        violations += rep.violations.iter().filter(|v| matches!(v, DistortionViolation::NotRadial { .. })).count();
    }
    let el = t.elapsed();
    gate.report(
        2,
        "distortion suite",
        pairs >= 10_000 && violations == 0 && el < Duration::from_secs(60),
        format!(
            "{pairs} pairs in 20 cones, {violations} violations, max ratio {max_ratio:.6} (bound sqrt 2), \
             max radial error {worst_radial:.1e} (tol 1e-12), {} (limit 60s)",
            secs(el)
        ),
    );
}

fn delta_survey(gate: &mut Gate, out: &Path) -> RunReport {
    let t = Instant::now();
    let report = run("delta_survey", out);
    let complexes: std::collections::BTreeSet<&str> = report.survey.iter().map(|r| r.complex.as_str()).collect();
    for c in &complexes {
        load_complex(c).expect("survey complexes validate");
    }
    let max = report.delta_max().unwrap_or(f64::NAN);

    // trees and single cubes
    let params = SurveyParams::default();
    let mut flat_max: f64 = 0.0;
    let mut flat_count = 0;
    for (i, spec) in ["cube:2", "cube:3", "star:5", "tree:12:3"].iter().enumerate() {
        let x = load_complex(spec).unwrap();
        let table = delta_complex_survey(&x, 12, 8, 900 + i as u64, &params).unwrap();
        flat_count += table.rows.len();
        flat_max = flat_max.max(table.max);
    }
    for r in report.survey.iter().filter(|r| ["cube:2", "star:4", "tree:10:5"].contains(&r.complex.as_str())) {
        flat_max = flat_max.max(r.delta_upper);
        flat_count += 1;
    }
    let el = t.elapsed();
    let atoms_ok = report.survey.iter().all(|r| r.atoms <= 8);
    gate.report(
        3,
        "delta survey",
        report.survey.len() >= 100
            && complexes.len() >= 10
            && atoms_ok
            && max <= 0.5 + 1e-6
            && flat_max <= 1e-6
            && el < Duration::from_secs(600),
        format!(
            "{} measures on {} complexes, max {max:.4e} (bound 0.5 + 1e-6); tree/cube max {flat_max:.1e} over {flat_count} \
             measures (tol 1e-6), {} (limit 600s)",
            report.survey.len(),
            complexes.len(),
            secs(el)
        ),
    );
    report
}

fn two_point_delta(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = DeltaParams::default();
    let mut worst: f64 = 0.0;
    let complexes: Vec<ComplexSpace> = [book(3), unit_cube(2), random_square_complex(8, 3)]
        .into_iter()
        .map(|x| ComplexSpace::new(x, SubdivisionConfig { level: 4, ..SubdivisionConfig::default() }).unwrap())
        .collect();
    let seg = EuclideanBox::segment(2.0);
    for i in 0..100 {
        let value = match i % 3 {
            0 => {
                let cone = random_flag_cone(rng.gen_range(2..=7), 0.5, &mut rng);
                delta_of_measure(&cone, &random_measure(&cone, 2, &mut rng), &params).unwrap().value
            }
            1 => {
                let s = &complexes[(i / 3) % complexes.len()];
                delta_of_measure(s, &random_measure(s, 2, &mut rng), &params).unwrap().value
            }
            _ => delta_of_measure(&seg, &random_measure(&seg, 2, &mut rng), &params).unwrap().value,
        };
        worst = worst.max(value.abs());
    }
    gate.report(4, "two-point delta", worst <= 1e-9, format!("100 measures, max |delta| {worst:.1e} (tol 1e-9)"));
}

fn three_atom_oracle(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let instances = three_atom_instances();
    for inst in &instances {
        let mu = FiniteMeasure::normalized(inst.points().into_iter().zip(inst.weights).collect()).unwrap();
        let res = delta_of_measure(&inst.cone(), &mu, &DeltaParams::default()).unwrap();
        let r = &res.gram.radii;
        let d = &res.gram.distances;
        let w = mu.weights();
        let dm = [[d[0], d[1], d[2]], [d[3], d[4], d[5]], [d[6], d[7], d[8]]];
        let oracle = three_atom_grid([r[0], r[1], r[2]], dm, [w[0], w[1], w[2]]);
        worst = worst.max((res.value - oracle).abs());
    }
    gate.report(
        5,
        "three-atom oracle",
        worst <= 1e-4,
        format!("{} bundled instances, max |solver - grid| {worst:.1e} (tol 1e-4)", instances.len()),
    );
}

fn sandwich(gate: &mut Gate, out: &Path) -> RunReport {
    let t = Instant::now();
    let report = run("sandwich_small", out);
    let mut bad = 0;
    let mut seg_err: f64 = 0.0;
    for r in &report.sandwich {
        if r.lambda_wang < r.lambda1 / 2.0 - 1e-6 || r.lambda_wang > r.lambda1 + 1e-3 || r.vertices > 12 {
            bad += 1;
        }
        if r.space_kind == "segment" {
            seg_err = seg_err.max((r.lambda_wang - r.lambda1).abs());
        }
    }
    let el = t.elapsed();
    gate.report(
        6,
        "sandwich window",
        report.sandwich.len() >= 20 && bad == 0 && seg_err <= 1e-3 && el < Duration::from_secs(300),
        format!(
            "{} graph/space pairs, {bad} outside [lambda1/2 - 1e-6, lambda1 + 1e-3], segment max |wang - lambda1| \
             {seg_err:.1e} (tol 1e-3), {} (limit 300s)",
            report.sandwich.len(),
            secs(el)
        ),
    );
    report
}

fn geodesic_oracles(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut closed_err: f64 = 0.0;
    for _ in 0..1000 {
        let (nc, na, nb) = (rng.gen_range(0..=2usize), rng.gen_range(1..=3usize), rng.gen_range(1..=3usize));
        let c = (1u64 << nc) - 1;
        let a = ((1u64 << na) - 1) << nc;
        let b = ((1u64 << nb) - 1) << (nc + na);
        let cone = TangentCone::new(nc + na + nb, vec![c | a, c | b]).unwrap();
        let point = |mask: u64, rng: &mut ChaCha8Rng| {
            ConePoint::new((0..8).filter(|&i| mask >> i & 1 == 1).map(|i| (i, rng.gen_range(0.01..2.0))).collect::<Vec<_>>())
                .unwrap()
        };
        let p = point(c | a, &mut rng);
        let q = point(c | b, &mut rng);
        closed_err = closed_err.max((cone.distance(&p, &q).unwrap() - two_orthant_distance(c, &p, &q)).abs());
    }

    let m = 32;
    let mut lattice_gap: f64 = 0.0;
    let mut general = 0;
    while general < 100 {
        let cone = random_planar_faced_cone(rng.gen_range(3..=6), 0.5, &mut rng);
        let mut lattice_point = || {
            let faces = cone.maximal_faces();
            let f = faces[rng.gen_range(0..faces.len())];
            let pairs: Vec<(usize, f64)> = (0..cone.n_axes())
                .filter(|&i| f >> i & 1 == 1)
                .map(|i| (i, rng.gen_range(0..=m) as f64 / m as f64))
                .filter(|&(_, t)| t > 0.0)
                .collect();
            ConePoint::new(pairs).unwrap()
        };
        let (p, q) = (lattice_point(), lattice_point());
        if p == q {
            continue;
        }
        let d = cone.distance(&p, &q).unwrap();
        lattice_gap = lattice_gap.max((stencil_distance(&cone, m, 1, 4, &p, &q) - d).abs() / d);
        general += 1;
    }

    // ambient (2,1) and (1,2) are vertices 5 and 7
    let x = CubeComplex::validate(&l_shape_raw()).unwrap();
    let s = ComplexSpace::new(x, SubdivisionConfig { level: 8, ..SubdivisionConfig::default() }).unwrap();
    let l = s.distance(&ComplexPoint::vertex(5), &ComplexPoint::vertex(7)).unwrap();

    gate.report(
        7,
        "geodesic oracles",
        closed_err <= 1e-9 && lattice_gap <= 0.02 && (l - 2.0).abs() <= 0.02,
        format!(
            "two-orthant max error {closed_err:.1e} over 1000 (tol 1e-9); lattice Dijkstra m=32 max relative gap \
             {:.2}% over 100 (tol 2%); L-shape {l:.4} (2.0 +- 1%)",
            100.0 * lattice_gap
        ),
    );
}

fn growing_family(gate: &mut Gate, out: &Path) -> RunReport {
    let t = Instant::now();
    let report = run("growing_family", out);
    let el = t.elapsed();
    let rows = &report.obstruction;
    let pigeonhole = rows.iter().all(|r| r.count_in_ball >= r.half_vertices);
    let sizes: std::collections::BTreeSet<usize> = rows.iter().map(|r| r.vertices).collect();
    // from some size on, every record has |V|/2 above the capacity bound
    let eventually = sizes
        .iter()
        .rev()
        .take_while(|&&n| rows.iter().filter(|r| r.vertices == n).all(|r| r.half_exceeds_capacity))
        .count();
    let capacity: Vec<String> =
        rows.iter().map(|r| format!("n={} {} cap {:.1}", r.vertices, r.rule, r.capacity_bound)).collect();
    gate.report(
        8,
        "growing family",
        !rows.is_empty() && pigeonhole && eventually >= 1 && el < Duration::from_secs(600),
        format!(
            "{} records, pigeonhole {}, |V|/2 > capacity for the largest {eventually} of {} sizes [{}], {} (limit 600s)",
            rows.len(),
            if pigeonhole { "holds everywhere" } else { "broken" },
            sizes.len(),
            capacity.join("; "),
            secs(el)
        ),
    );
    report
}

fn csv_bytes(report: &RunReport) -> Vec<(String, Vec<u8>)> {
    report
        .files
        .iter()
        .filter(|f| f.extension().is_some_and(|e| e == "csv"))
        .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap()))
        .collect()
}

fn reproducibility(gate: &mut Gate, first: &[(&str, RunReport)], out: &Path) {
    let mut differing = Vec::new();
    let mut files = 0;
    for (name, report) in first {
        let again = run(name, out);
        let (a, b) = (csv_bytes(report), csv_bytes(&again));
        files += a.len();
        if a != b {
            differing.push(*name);
        }
    }
    gate.report(
        9,
        "reproducibility",
        differing.is_empty() && files > 0,
        format!("{} configs rerun, {files} CSV files compared byte for byte, differing: {differing:?}", first.len()),
    );
}

fn main() {
    let out = tempfile::tempdir().unwrap();
    let mut gate = Gate { failed: Vec::new() };
    spectral_exactness(&mut gate);
    distortion_suite(&mut gate);
    let survey = delta_survey(&mut gate, out.path());
    two_point_delta(&mut gate);
    three_atom_oracle(&mut gate);
    let sandwich = sandwich(&mut gate, out.path());
    geodesic_oracles(&mut gate);
    let family = growing_family(&mut gate, out.path());
    reproducibility(
        &mut gate,
        &[("delta_survey", survey), ("sandwich_small", sandwich), ("growing_family", family)],
        out.path(),
    );
    if gate.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failed criteria {:?}", gate.failed);
        std::process::exit(1);
    }
}
