//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::catalog::{self, sample_points, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{FinslerMetric, SamplePoint, TensorBundle};
use crate::projective::{beltrami_verdict, pm_checks, BaseSpray, ProjectivePair};
use crate::report::{aggregate, CheckResult, VerificationReport};
use crate::suite::{self, beltrami_check, verify_metric, SuiteConfig};
use crate::weyl::{classical_weyl, recover_kappa, weyl_type, DEFAULT_VERDICT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Spray, curvature and Weyl tensor checks for Finsler metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct Sampling {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_VERDICT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog metrics.
    List,
    /// Evaluate tensors at one point.
    Eval {
        #[arg(long)]
        metric: String,
        /// "x1,...,xn;y1,...,yn"
        #[arg(long)]
        point: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Curvature verdict and invariant checks for one metric.
    Verify {
        #[arg(long)]
        metric: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Beltrami analysis of a pair "base,target"; base may be "flat".
    Beltrami {
        #[arg(long)]
        pair: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Run every reproduction criterion.
    PaperSuite {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

pub fn parse_point(s: &str, dim: Option<usize>) -> Result<SamplePoint> {
    let (x, y) = s
        .split_once(';')
        .ok_or_else(|| Error::Argument(format!("point {s:?} must look like \"x1,..,xn;y1,..,yn\"")))?;
    let parse = |part: &str| -> Result<Vec<f64>> {
        part.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Argument(format!("bad coordinate {v:?} in point {s:?}")))
            })
            .collect()
    };
    let (x, y) = (parse(x)?, parse(y)?);
    if x.len() != y.len() {
        return Err(Error::Argument(format!("point {s:?}: x has {} entries, y has {}", x.len(), y.len())));
    }
    if let Some(n) = dim {
        if n != x.len() {
            return Err(Error::Argument(format!("point {s:?} has dimension {}, --dim is {n}", x.len())));
        }
    }
    SamplePoint::new(x, y)
}

fn build_metric(id: &str, dim: usize) -> Result<Arc<dyn FinslerMetric>> {
    catalog::build(id, dim)
}

#[derive(Debug, Serialize)]
struct Evaluation {
    metric: String,
    point: SamplePoint,
    f: f64,
    g: Vec<Vec<f64>>,
    spray: Vec<f64>,
    connection: Vec<Vec<f64>>,
    jacobi: Vec<Vec<f64>>,
    curvature: Vec<Vec<Vec<f64>>>,
    w0: Vec<Vec<f64>>,
    weyl: Vec<Vec<f64>>,
    kappa: f64,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn evaluate(metric: &Arc<dyn FinslerMetric>, p: &SamplePoint) -> Result<Evaluation> {
    let b = TensorBundle::from_metric(metric, p, 1)?;
    let n = p.dim();
    let md = b.metric.as_ref().expect("metric bundle");
    Ok(Evaluation {
        metric: metric.id().to_string(),
        point: p.clone(),
        f: md.f,
        g: rows(&md.g),
        spray: b.spray_values().iter().copied().collect(),
        connection: rows(&b.connection_matrix()),
        jacobi: rows(&b.jacobi_matrix()),
        curvature: (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| b.curvature_value(i, j, k)).collect()).collect())
            .collect(),
        w0: rows(&weyl_type(&b)?.w0),
        weyl: rows(&classical_weyl(&b)?.w),
        kappa: recover_kappa(&b, md.f)?,
    })
}

fn human_evaluation(e: &Evaluation) -> String {
    let mut s = String::new();
    let mat = |s: &mut String, name: &str, m: &[Vec<f64>]| {
        let _ = writeln!(s, "{name}:");
        for r in m {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:>14.6e}")).collect();
            let _ = writeln!(s, "  {}", cells.join(" "));
        }
    };
    let _ = writeln!(s, "metric {} at {}", e.metric, e.point);
    let _ = writeln!(s, "F = {:.12e}", e.f);
    mat(&mut s, "g", &e.g);
    let _ = writeln!(s, "G = {:?}", e.spray);
    mat(&mut s, "N", &e.connection);
    mat(&mut s, "Phi", &e.jacobi);
    for (i, slab) in e.curvature.iter().enumerate() {
        mat(&mut s, &format!("R^{}_jk", i + 1), slab);
    }
    mat(&mut s, "W0", &e.w0);
    mat(&mut s, "W", &e.weyl);
    let _ = writeln!(s, "kappa = {:.12e}", e.kappa);
    s
}

fn human_report(report: &VerificationReport, header: &str) -> String {
    let mut s = String::new();
    if !header.is_empty() {
        let _ = writeln!(s, "{header}");
    }
    for c in &report.checks {
        let _ = writeln!(s, "{}", c.summary_line());
    }
    let _ = writeln!(s, "overall: {}", if report.overall { "PASS" } else { "FAIL" });
    s
}

struct Output {
    text: String,
    passed: bool,
    integrity: Option<Error>,
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn render(cli: &Cli, report: &VerificationReport, header: &str) -> Result<String> {
    Ok(match cli.format {
        Format::Json => report.to_json()? + "\n",
        Format::Human => human_report(report, header),
    })
}

fn parse_pair(spec: &str, dim: usize) -> Result<ProjectivePair> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| Error::Argument(format!("pair {spec:?} must look like \"base,target\"")))?;
    let base = match a.trim() {
        "flat" => BaseSpray::Flat(dim),
        id => BaseSpray::Metric(build_metric(id, dim)?),
    };
    ProjectivePair::new(base, build_metric(b.trim(), dim)?)
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::List => {
            let text = match cli.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Entry {
                        id: &'static str,
                        domain: &'static str,
                        expected: Option<crate::weyl::Classification>,
                    }
                    let list: Vec<Entry> = catalog::catalog()
                        .into_iter()
                        .map(|e| Entry {
                            id: e.id,
                            domain: e.domain_description,
                            expected: e.expected,
                        })
                        .collect();
                    serde_json::to_string_pretty(&list)? + "\n"
                }
                Format::Human => catalog::catalog()
                    .iter()
                    .map(|e| {
                        let expected = e.expected.map_or("-".to_string(), |c| c.to_string());
                        format!("{:<16} {:<44} {expected}\n", e.id, e.domain_description)
                    })
                    .collect(),
            };
            Ok(Output {
                text,
                passed: true,
                integrity: None,
            })
        }
        Command::Eval { metric, point, dim } => {
            let p = parse_point(point, *dim)?;
            let m = build_metric(metric, p.dim())?;
            let e = evaluate(&m, &p)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&e)? + "\n",
                Format::Human => human_evaluation(&e),
            };
            Ok(Output {
                text,
                passed: true,
                integrity: None,
            })
        }
        Command::Verify { metric, sampling } => {
            let m = build_metric(metric, sampling.dim)?;
            let pts = sample_points(m.as_ref(), &SamplerConfig::with_count(sampling.seed, sampling.samples))?;
            let (verdict, checks) = verify_metric(&m, &pts, sampling.seed, sampling.tol)?;
            let report = aggregate(checks, sampling.dim)?;
            let header = format!("{}: {}", m.id(), verdict.classification);
            Ok(Output {
                text: render(cli, &report, &header)?,
                passed: report.overall,
                integrity: None,
            })
        }
        Command::Beltrami { pair, sampling } => {
            let pair = parse_pair(pair, sampling.dim)?;
            let pts = pair.samples(&SamplerConfig::with_count(sampling.seed, sampling.samples))?;
            let mut checks: Vec<CheckResult> = pm_checks(&pair, &pts, sampling.seed, suite::TOL_SECOND)?;
            let verdict = beltrami_verdict(&pair, &pts, sampling.tol)?;
            checks.push(beltrami_check(&verdict, pts.len(), sampling.seed));
            let report = aggregate(checks, sampling.dim)?;
            let header = format!(
                "{}: base {}, target {}, hamel {} (delta {:.3e}, dhdj {:.3e})",
                verdict.pair,
                verdict.base,
                verdict.target.classification,
                verdict.hamel.is_hamel,
                verdict.hamel.delta_sp,
                verdict.hamel.dhdjp
            );
            Ok(Output {
                text: render(cli, &report, &header)?,
                passed: report.overall,
                integrity: verdict.ensure_consistent().err(),
            })
        }
        Command::PaperSuite { dim, seed, samples } => {
            let cfg = SuiteConfig {
                dim: *dim,
                seed: *seed,
                samples: *samples,
            };
            let outcomes = suite::paper_suite(&cfg)?;
            let mut header = String::new();
            for o in &outcomes {
                let _ = writeln!(
                    header,
                    "criterion {:>2} {:<40} {}",
                    o.number,
                    o.title,
                    if o.passed() { "PASS" } else { "FAIL" }
                );
            }
            let report = aggregate(outcomes.into_iter().flat_map(|o| o.checks).collect(), *dim)?;
            Ok(Output {
                text: render(cli, &report, header.trim_end())?,
                passed: report.overall,
                integrity: None,
            })
        }
    }
}

/// Exit status for an error: 3 for integrity violations, 1 for failed
/// preconditions, 2 for everything attributable to the invocation.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Integrity(_) => 3,
        Error::Precondition(_) => 1,
        _ => 2,
    }
}

pub fn run(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out.text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if let Some(e) = out.integrity {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::UnknownMetric(_) = e {
                eprintln!("known metrics: {}", catalog::ids().join(", "));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
