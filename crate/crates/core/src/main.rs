use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cubecat::complex::{format_complex_point, parse_complex_point, CubeComplex, RawComplex};
use cubecat::delta::{delta_complex_survey, delta_of_measure, DeltaParams, SurveyParams};
use cubecat::geometry::{BarycenterParams, ComplexSpace, ConePoint, MetricSpace, OrthantParams, SubdivisionConfig, TangentCone};
use cubecat::harness::pipeline::{SandwichRow, SurveyCsvRow};
use cubecat::harness::{load_complex, random_regular_graph, run_experiment, MeasureFile, MeasureKind, Target};
use cubecat::spectral::{sandwich_report, spectral_gap, wang_lambda1, Graph, WangParams};
use cubecat::tangent::distortion_report;
use cubecat::{with_target, Error, Result};

#[derive(Parser)]
#[command(name = "cubecat", version, about = "Geometry of finite CAT(0) cube complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a complex file; prints one violation per line, exit status 1 if any.
    Validate { complex: String },
    /// Geodesic distance between two points of a complex or of one of its vertex cones.
    Geodesic {
        complex: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Read the points as `axis:value` pairs in the tangent cone at this vertex.
        #[arg(long)]
        cone: Option<usize>,
        /// Subdivision level for whole-complex distances.
        #[arg(short = 'm', long, default_value_t = 8)]
        level: usize,
    },
    /// Barycenter of a finite measure.
    Barycenter {
        complex: String,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'm', long, default_value_t = 8)]
        level: usize,
    },
    /// Sample pairs in a vertex cone and compare cone and embedded distances.
    Distortion {
        complex: String,
        #[arg(long)]
        vertex: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Izeki-Nayatani invariant of one measure.
    Delta {
        complex: String,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'm', long, default_value_t = 4)]
        level: usize,
    },
    /// Invariant of random measures on a complex and its vertex cones.
    DeltaSurvey {
        complex: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        atoms_max: usize,
        #[arg(short = 'm', long, default_value_t = 4)]
        level: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Spectral gap of the normalized Laplacian.
    Lambda1 { graph: PathBuf },
    /// Nonlinear spectral gap with values in a target space.
    WangLambda1 {
        graph: PathBuf,
        #[command(flatten)]
        wang: WangArgs,
    },
    /// One-row CSV comparing the nonlinear gap with its window.
    Sandwich {
        graph: PathBuf,
        #[command(flatten)]
        wang: WangArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Random regular graph in the `n m` edge-list format.
    RegularGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// Output root, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct WangArgs {
    /// `segment[:L]`, `tripod`, `rays:K`, `cone:<complex>@<v>`, or a complex.
    #[arg(long, default_value = "builtin:segment")]
    space: String,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'm', long, default_value_t = 4)]
    level: usize,
}

#[derive(Serialize)]
struct DistortionRow {
    pair: usize,
    cone_distance: f64,
    embedded_distance: f64,
    ratio: f64,
    radial_error: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Violations(vs) = &e {
                for v in vs {
                    eprintln!("{v}");
                }
            }
            ExitCode::from(2)
        }
    }
}

fn subdivision(level: usize) -> SubdivisionConfig {
    SubdivisionConfig { level, ..SubdivisionConfig::default() }
}

fn cone_at(x: &CubeComplex, v: usize) -> Result<TangentCone> {
    TangentCone::from_star(&x.star_faces(v)?)
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Validate { complex } => {
            let raw = if Path::new(&complex).exists() { RawComplex::load(&complex)? } else { load_complex(&complex)?.to_raw() };
            match CubeComplex::validate(&raw) {
                Ok(x) => {
                    println!(
                        "valid: {} vertices, {} edges, {} cells, dimension {}",
                        x.vertex_count(),
                        x.edge_count(),
                        x.cells().len(),
                        x.dimension()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(vs) => {
                    for v in vs {
                        println!("{v}");
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Geodesic { complex, from, to, cone, level } => {
            let x = load_complex(&complex)?;
            if let Some(v) = cone {
                let c = cone_at(&x, v)?;
                let (a, b) = (ConePoint::parse(&from)?, ConePoint::parse(&to)?);
                let g = c.geodesic(&a, &b, &OrthantParams::default())?;
                println!("distance {}", g.length);
                for p in &g.breakpoints {
                    println!("breakpoint {p}");
                }
            } else {
                let space = ComplexSpace::new(x, subdivision(level))?;
                let (a, b) = (parse_complex_point(&from)?, parse_complex_point(&to)?);
                let iv = space.interval(&a, &b)?;
                println!("distance {}", iv.path);
                println!("graph_upper {}", iv.upper);
                println!("lower {} certified {}", iv.lower, iv.certified);
                let (pts, _) = space.path(&a, &b)?;
                for p in &pts {
                    println!("via {}", format_complex_point(p));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Barycenter { complex, measure, seed, level } => {
            let x = load_complex(&complex)?;
            let file = MeasureFile::load(&measure)?;
            let params = BarycenterParams { seed, ..BarycenterParams::default() };
            match file.kind {
                MeasureKind::Cone => {
                    let c = cone_at(&x, file.vertex.expect("checked on load"))?;
                    let b = c.barycenter(&file.cone_measure()?, &params)?;
                    println!("point {}", b.point);
                    println!("objective {}\nconverged {}\nnet_ok {}", b.objective, b.converged, b.net_ok);
                }
                MeasureKind::Complex => {
                    let space = ComplexSpace::new(x, subdivision(level))?;
                    let b = space.barycenter(&file.complex_measure()?, &params)?;
                    println!("point {}", format_complex_point(&b.point));
                    println!("objective {}\nconverged {}\nnet_ok {}", b.objective, b.converged, b.net_ok);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Distortion { complex, vertex, samples, seed, csv } => {
            let x = load_complex(&complex)?;
            let r = distortion_report(&cone_at(&x, vertex)?, samples, seed)?;
            let rows: Vec<DistortionRow> = r
                .pairs
                .iter()
                .enumerate()
                .map(|(i, p)| DistortionRow {
                    pair: i,
                    cone_distance: p.cone_distance,
                    embedded_distance: p.embedded_distance,
                    ratio: p.ratio,
                    radial_error: p.radial_error,
                })
                .collect();
            if let Some(path) = &csv {
                write_csv(Some(path), &rows)?;
            }
            println!("samples {}", r.sample_count);
            println!("max_ratio {}\nmean_ratio {}\ncertified_upper {}", r.max_ratio, r.mean_ratio, r.certified_upper);
            println!("violations {}", r.violations.len());
            Ok(if r.violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Delta { complex, measure, iters, seed, level } => {
            let x = load_complex(&complex)?;
            let file = MeasureFile::load(&measure)?;
            let params = DeltaParams {
                iterations: iters,
                barycenter: BarycenterParams { seed, ..BarycenterParams::default() },
                ..DeltaParams::default()
            };
            let (value, lower, converged, bar) = match file.kind {
                MeasureKind::Cone => {
                    let c = cone_at(&x, file.vertex.expect("checked on load"))?;
                    let r = delta_of_measure(&c, &file.cone_measure()?, &params)?;
                    (r.value, r.value_lower, r.converged, r.barycenter.to_string())
                }
                MeasureKind::Complex => {
                    let space = ComplexSpace::new(x, subdivision(level))?;
                    let r = delta_of_measure(&space, &file.complex_measure()?, &params)?;
                    (r.value, r.value_lower, r.converged, format_complex_point(&r.barycenter))
                }
            };
            println!("delta {value}");
            if let Some(l) = lower {
                println!("delta_lower {l}");
            }
            println!("converged {converged}\nbarycenter {bar}");
            Ok(ExitCode::SUCCESS)
        }
        Command::DeltaSurvey { complex, trials, seed, atoms_max, level, csv } => {
            let x = load_complex(&complex)?;
            let params = SurveyParams { subdivision: subdivision(level), ..SurveyParams::default() };
            let table = delta_complex_survey(&x, trials, atoms_max, seed, &params)?;
            let rows: Vec<SurveyCsvRow> = table
                .rows
                .into_iter()
                .map(|r| SurveyCsvRow {
                    complex: complex.clone(),
                    measure_id: r.measure_id,
                    kind: r.kind.as_str().to_string(),
                    vertex: r.vertex,
                    atoms: r.atoms,
                    delta_upper: r.delta_upper,
                    delta_lower: r.delta_lower,
                    barycenter_converged: r.barycenter_converged,
                    max_observed: r.max_observed,
                })
                .collect();
            match &csv {
                Some(path) => {
                    write_csv(Some(path), &rows)?;
                    println!("measures {}\nmax {}", rows.len(), table.max);
                }
                None => write_csv(None, &rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lambda1 { graph } => {
            let g = Graph::load(&graph)?;
            let gap = spectral_gap(&g)?;
            println!("lambda1 {}\nresidual {:e}", gap.value, gap.residual);
            Ok(ExitCode::SUCCESS)
        }
        Command::WangLambda1 { graph, wang } => {
            let g = Graph::load(&graph)?;
            let (value, converged) = wang_value(&g, &wang)?;
            println!("lambda1_wang {value}\nrestarts_converged {converged}/{}", wang.restarts);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sandwich { graph, wang, csv } => {
            let g = Graph::load(&graph)?;
            let target = Target::parse(&wang.space, wang.level)?;
            let (value, converged) = wang_value(&g, &wang)?;
            let rep = sandwich_report(&g, &wang.space, target.delta_upper(), value)?;
            let row = SandwichRow {
                graph_id: graph.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                space: wang.space.clone(),
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
            };
            write_csv(csv.as_deref(), &[row])?;
            Ok(if rep.pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::RegularGraph { n, d, seed } => {
            print!("{}", random_regular_graph(n, d, seed)?.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, out } => {
            let report = run_experiment(&config, out.as_deref())?;
            for f in &report.files {
                println!("{}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn wang_value(g: &Graph, args: &WangArgs) -> Result<(f64, usize)> {
    let target = Target::parse(&args.space, args.level)?;
    let params = WangParams { restarts: args.restarts, max_sweeps: args.sweeps, ..WangParams::default() };
    with_target!(&target, y => {
        let r = wang_lambda1(g, y, args.seed, &params)?;
        Ok((r.value, r.restarts.iter().filter(|o| o.converged).count()))
    })
}
