//! Declarative experiment runs: graphs, spectral gaps, sandwich checks,
//! ball-counting records and invariant surveys, written as CSV tables.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Stage};
use super::graphs::{girth, random_regular_graph};
use super::moduli::{
    check_uniform_moduli, obstruction_check, Bound, ObstructionRecord, RadiusRule, UniformEmbeddingModuli, Verdict,
};
use super::spaces::{load_complex, Target};
use crate::delta::{delta_complex_survey, DeltaParams, SurveyParams};
use crate::error::{Error, Result};
use crate::geometry::{BarycenterParams, MetricSpace, SubdivisionConfig};
use crate::rng::{derive_seed, thread_pool};
use crate::spectral::{rayleigh_quotient_with, sandwich_report, spectral_gap, wang_lambda1, Graph, WangParams};
use crate::with_target;

#[derive(Debug, Clone, Serialize)]
pub struct GraphRow {
    pub graph_id: String,
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub lambda1: f64,
    pub eigen_residual: f64,
    /// Empty for forests.
    pub girth: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub graph_id: String,
    pub space: String,
    pub space_kind: String,
    pub vertices: usize,
    pub lambda1: f64,
    pub delta_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub lambda_wang: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub pass: bool,
    pub restarts_converged: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionRow {
    pub graph_id: String,
    pub vertices: usize,
    pub rule: String,
    pub lipschitz_c: f64,
    pub lambda_used: f64,
    pub quotient: f64,
    pub max_edge_image: f64,
    pub radius: f64,
    pub count_in_ball: usize,
    pub half_vertices: usize,
    pub degree_bound: usize,
    pub capacity_bound: f64,
    pub verdict: Verdict,
    pub within_capacity: bool,
    pub half_exceeds_capacity: bool,
    pub moduli_lower_violations: usize,
    pub moduli_upper_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveyCsvRow {
    pub complex: String,
    pub measure_id: usize,
    pub kind: String,
    pub vertex: Option<usize>,
    pub atoms: usize,
    pub delta_upper: f64,
    pub delta_lower: Option<f64>,
    pub barycenter_converged: bool,
    pub max_observed: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub graphs: Vec<GraphRow>,
    pub sandwich: Vec<SandwichRow>,
    pub obstruction: Vec<ObstructionRow>,
    pub survey: Vec<SurveyCsvRow>,
}

impl RunReport {
    pub fn delta_max(&self) -> Option<f64> {
        self.survey.iter().map(|r| r.delta_upper).reduce(f64::max)
    }
}

/// Run the pipeline described by a config file. Outputs go under
/// `out_root` if given, else under the config's `[outputs] dir` (relative
/// paths resolve against the config file's directory).
pub fn run_experiment(config_path: &Path, out_root: Option<&Path>) -> Result<RunReport> {
    let cfg = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    run_config(&cfg, base, out_root)
}

pub fn run_config(cfg: &ExperimentConfig, base: &Path, out_root: Option<&Path>) -> Result<RunReport> {
    let pipe = cfg.pipeline()?;
    let root = match out_root {
        Some(p) => p.to_path_buf(),
        None if cfg.outputs.dir.is_absolute() => cfg.outputs.dir.clone(),
        None => base.join(&cfg.outputs.dir),
    };
    let out_dir = if cfg.outputs.timestamp { fresh_dir(&root, &pipe.name)? } else { root };
    std::fs::create_dir_all(&out_dir)?;

    thread_pool().install(|| {
        let graphs = collect_graphs(cfg, base, pipe.seed)?;
        let mut report = RunReport {
            out_dir: out_dir.clone(),
            files: Vec::new(),
            graphs: Vec::new(),
            sandwich: Vec::new(),
            obstruction: Vec::new(),
            survey: Vec::new(),
        };
        for stage in &pipe.stages {
            match stage {
                Stage::Spectral => {
                    report.graphs = graph_rows(&graphs)?;
                    report.files.push(write_csv(&out_dir, "graphs.csv", &report.graphs)?);
                }
                Stage::Sandwich => {
                    report.sandwich = sandwich_rows(cfg, &graphs, pipe.seed)?;
                    report.files.push(write_csv(&out_dir, "sandwich.csv", &report.sandwich)?);
                }
                Stage::Obstruction => {
                    report.obstruction = obstruction_rows(cfg, &graphs, pipe.seed)?;
                    report.files.push(write_csv(&out_dir, "obstruction.csv", &report.obstruction)?);
                }
                Stage::DeltaSurvey => {
                    report.survey = survey_rows(cfg, base, pipe.seed)?;
                    report.files.push(write_csv(&out_dir, "delta_survey.csv", &report.survey)?);
                }
            }
        }
        let summary = out_dir.join("summary.txt");
        std::fs::write(&summary, summary_text(&pipe.name, pipe.seed, &report))?;
        report.files.push(summary);
        Ok(report)
    })
}

fn fresh_dir(root: &Path, name: &str) -> Result<PathBuf> {
    let stamp = humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string().replace(':', "");
    let mut dir = root.join(format!("{name}-{stamp}"));
    let mut k = 1;
    while dir.exists() {
        k += 1;
        dir = root.join(format!("{name}-{stamp}-{k}"));
    }
    Ok(dir)
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

fn named_graph(name: &str) -> Result<Graph> {
    let bad = || Error::Config(format!("unknown graph name {name:?} (use K<n>, C<n> or P<n>)"));
    let (kind, n) = name.split_at(1);
    let n: usize = n.parse().map_err(|_| bad())?;
    match kind {
        "K" => Graph::complete(n),
        "C" => Graph::cycle(n),
        "P" => Graph::path(n),
        _ => Err(bad()),
    }
}

pub fn collect_graphs(cfg: &ExperimentConfig, base: &Path, seed: u64) -> Result<Vec<(String, Graph)>> {
    let mut out = Vec::new();
    for name in &cfg.graphs.named {
        out.push((name.clone(), named_graph(name)?));
    }
    for file in &cfg.graphs.files {
        let path = base.join(file);
        let id = path.file_stem().map_or_else(|| file.display().to_string(), |s| s.to_string_lossy().into_owned());
        out.push((id, Graph::load(&path)?));
    }
    for fam in &cfg.graphs.random_regular {
        for &n in &fam.sizes {
            for k in 0..fam.count {
                let s = derive_seed(seed, "graphs", (n * 1000 + k) as u64);
                out.push((format!("rr-n{n}-d{}-{k}", fam.degree), random_regular_graph(n, fam.degree, s)?));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("[graphs] produced no graphs".into()));
    }
    Ok(out)
}

fn graph_rows(graphs: &[(String, Graph)]) -> Result<Vec<GraphRow>> {
    graphs
        .par_iter()
        .map(|(id, g)| {
            let gap = spectral_gap(g)?;
            Ok(GraphRow {
                graph_id: id.clone(),
                vertices: g.vertex_count(),
                edges: g.edge_count(),
                max_degree: g.max_degree(),
                lambda1: gap.value,
                eigen_residual: gap.residual,
                girth: girth(g),
            })
        })
        .collect()
}

fn sandwich_rows(cfg: &ExperimentConfig, graphs: &[(String, Graph)], seed: u64) -> Result<Vec<SandwichRow>> {
    let sec = cfg.sandwich.as_ref().expect("checked on load");
    let targets = sec.spaces.iter().map(|s| Ok((s.clone(), Target::parse(s, sec.level)?))).collect::<Result<Vec<_>>>()?;
    let params = WangParams { restarts: sec.restarts, max_sweeps: sec.max_sweeps, ..WangParams::default() };
    let jobs: Vec<(usize, &(String, Graph), &(String, Target))> = graphs
        .iter()
        .filter(|(_, g)| g.vertex_count() <= sec.max_vertices)
        .flat_map(|gr| targets.iter().map(move |t| (gr, t)))
        .enumerate()
        .map(|(i, (gr, t))| (i, gr, t))
        .collect();
    jobs.par_iter()
        .map(|&(i, (id, g), (spec, target))| {
            let s = derive_seed(seed, "sandwich", i as u64);
            let (value, converged) = with_target!(target, y => {
                let r = wang_lambda1(g, y, s, &params)?;
                (r.value, r.restarts.iter().filter(|o| o.converged).count())
            });
            let rep = sandwich_report(g, spec, target.delta_upper(), value)?;
            Ok(SandwichRow {
                graph_id: id.clone(),
                space: spec.clone(),
                space_kind: target.kind().to_string(),
                vertices: g.vertex_count(),
                lambda1: rep.lambda1,
                delta_upper: rep.delta_upper,
                lower: rep.lower,
                upper: rep.upper,
                lambda_wang: rep.lambda_wang,
                upper_ok: rep.upper_ok,
                lower_ok: rep.lower_ok,
                pass: rep.pass(),
                restarts_converged: converged,
            })
        })
        .collect()
}

/// A Wang witness shrunk towards its barycenter until every edge image
/// has length at most `c`, with the quotient of the shrunk map.
fn lipschitz_map<S: MetricSpace>(
    g: &Graph,
    space: &S,
    c: f64,
    seed: u64,
    params: &WangParams,
) -> Result<(Vec<S::Point>, f64)> {
    let w = wang_lambda1(g, space, seed, params)?;
    let mut f = w.witness;
    let longest = g.edges().iter().map(|&(u, v)| space.distance(&f[u], &f[v])).try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
    if longest > c {
        let (_, bar) = rayleigh_quotient_with(g, &f, space, &params.barycenter)?;
        let s = c / longest;
        f = f.iter().map(|p| space.geodesic_point(&bar, p, s)).collect::<Result<Vec<_>>>()?;
    }
    let (q, _) = rayleigh_quotient_with(g, &f, space, &params.barycenter)?;
    Ok((f, q))
}

fn obstruction_rows(cfg: &ExperimentConfig, graphs: &[(String, Graph)], seed: u64) -> Result<Vec<ObstructionRow>> {
    let space_sec = cfg.space.as_ref().expect("checked on load");
    let mod_sec = cfg.moduli.as_ref().expect("checked on load");
    let moduli = mod_sec.moduli()?;
    let emb = cfg.embedding.clone().unwrap_or_default();
    let params = WangParams { restarts: emb.restarts, max_sweeps: emb.max_sweeps, ..WangParams::default() };
    let target = Target::parse(&space_sec.target, space_sec.level)?;
    with_target!(&target, y => obstruction_in(y, graphs, &moduli, mod_sec.family_lambda, &mod_sec.rules, &params, seed))
}

fn obstruction_in<S: MetricSpace>(
    space: &S,
    graphs: &[(String, Graph)],
    moduli: &UniformEmbeddingModuli,
    family_lambda: Option<f64>,
    rules: &[RadiusRule],
    params: &WangParams,
    seed: u64,
) -> Result<Vec<ObstructionRow>> {
    let c = moduli.lipschitz_c();
    let maps: Vec<(Vec<S::Point>, f64)> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, (_, g))| lipschitz_map(g, space, c, derive_seed(seed, "obstruction", i as u64), params))
        .collect::<Result<_>>()?;
    let lambda = match family_lambda {
        Some(l) => l,
        None => maps.iter().map(|m| m.1).fold(f64::INFINITY, f64::min),
    };
    let bary = &params.barycenter;
    let per_graph: Vec<Vec<ObstructionRow>> = graphs
        .par_iter()
        .zip(&maps)
        .map(|((id, g), (f, q))| {
            let viol = check_uniform_moduli(space, &[(g.clone(), f.clone())], moduli)?;
            let lower = viol.iter().filter(|v| v.bound == Bound::Lower).count();
            let upper = viol.len() - lower;
            rules
                .iter()
                .map(|&rule| {
                    let used = match rule {
                        RadiusRule::PerGraph => *q,
                        RadiusRule::Family => lambda / 2.0,
                    };
                    let rec = obstruction_check(id, g, f, space, moduli, used, rule, bary)?;
                    Ok(obstruction_row(rec, lower, upper))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_graph.into_iter().flatten().collect())
}

fn obstruction_row(r: ObstructionRecord, lower: usize, upper: usize) -> ObstructionRow {
    ObstructionRow {
        graph_id: r.graph_id,
        vertices: r.vertices,
        rule: r.rule.as_str().to_string(),
        lipschitz_c: r.lipschitz_c,
        lambda_used: r.lambda_used,
        quotient: r.quotient,
        max_edge_image: r.max_edge_image,
        radius: r.radius,
        count_in_ball: r.count_in_ball,
        half_vertices: r.half_vertices,
        degree_bound: r.degree_bound,
        capacity_bound: r.capacity_bound,
        verdict: r.verdict,
        within_capacity: r.within_capacity,
        half_exceeds_capacity: r.half_exceeds_capacity,
        moduli_lower_violations: lower,
        moduli_upper_violations: upper,
    }
}

fn survey_rows(cfg: &ExperimentConfig, base: &Path, seed: u64) -> Result<Vec<SurveyCsvRow>> {
    let sec = cfg.delta_survey.as_ref().expect("checked on load");
    let params = SurveyParams {
        cone_fraction: sec.cone_fraction,
        subdivision: SubdivisionConfig { level: sec.level, ..SubdivisionConfig::default() },
        delta: DeltaParams { iterations: sec.iterations, barycenter: BarycenterParams::default(), ..DeltaParams::default() },
    };
    let mut rows = Vec::new();
    for (i, spec) in sec.complexes.iter().enumerate() {
        let path = base.join(spec);
        let x = if path.exists() { load_complex(&path.to_string_lossy())? } else { load_complex(spec)? };
        let table = delta_complex_survey(&x, sec.trials, sec.atoms_max, derive_seed(seed, "survey", i as u64), &params)?;
        rows.extend(table.rows.into_iter().map(|r| SurveyCsvRow {
            complex: spec.clone(),
            measure_id: r.measure_id,
            kind: r.kind.as_str().to_string(),
            vertex: r.vertex,
            atoms: r.atoms,
            delta_upper: r.delta_upper,
            delta_lower: r.delta_lower,
            barycenter_converged: r.barycenter_converged,
            max_observed: r.max_observed,
        }));
    }
    Ok(rows)
}

fn summary_text(name: &str, seed: u64, r: &RunReport) -> String {
    let mut s = format!("experiment {name}, seed {seed}\n");
    if !r.graphs.is_empty() {
        let min = r.graphs.iter().map(|g| g.lambda1).fold(f64::INFINITY, f64::min);
        s.push_str(&format!("graphs: {} (smallest lambda1 {min:.6})\n", r.graphs.len()));
    }
    if !r.sandwich.is_empty() {
        let pass = r.sandwich.iter().filter(|x| x.pass).count();
        s.push_str(&format!("sandwich: {pass}/{} pairs inside the window\n", r.sandwich.len()));
    }
    if !r.obstruction.is_empty() {
        let consistent = r.obstruction.iter().filter(|x| x.verdict == Verdict::Consistent).count();
        s.push_str(&format!("obstruction: {consistent}/{} records with count >= |V|/2\n", r.obstruction.len()));
        for x in &r.obstruction {
            s.push_str(&format!(
                "  {} [{}] n={} r={:.4} count={} capacity={:.2} half>capacity={}\n",
                x.graph_id, x.rule, x.vertices, x.radius, x.count_in_ball, x.capacity_bound, x.half_exceeds_capacity
            ));
        }
    }
    if let Some(m) = r.delta_max() {
        s.push_str(&format!("delta survey: {} measures, max {m:.3e}\n", r.survey.len()));
    }
    s
}
