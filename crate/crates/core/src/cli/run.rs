use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::scenario::{Resolved, Scenario, TaskSpec};
use crate::bounds::{bound_sweep, lemma_check, theorem_bound_with_verdict, BoundReport, LemmaStatus};
use crate::curvature::{chern_coefficients, christoffel, reduced_curvature, spray_coefficients};
use crate::error::Error;
use crate::geodesics::{distance, integrate_geodesic, StepControl};
use crate::linalg::matrix_rows;
use crate::soliton::{classify, default_tolerance, residual_samples, verdict_from};
use crate::tensors::{cartan_tensor, eval_f, fundamental_tensor, inverse_fundamental, verify_structure, PointDirection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskStatus {
    Passed,
    Failed,
    HypothesisViolated,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: &'static str,
    pub status: TaskStatus,
    pub result: Value,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub exit_code: i32,
    pub passed: usize,
    pub failed: usize,
    pub hypothesis_violated: usize,
    pub errors: usize,
}

/// The canonical, deterministic report; timings go to a sidecar file.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: Scenario,
    pub tasks: Vec<TaskReport>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
struct Timing {
    total_seconds: f64,
    tasks: Vec<(usize, &'static str, f64)>,
}

struct Outcome {
    status: TaskStatus,
    result: Value,
    artifacts: Vec<String>,
}

fn passed_if(ok: bool) -> TaskStatus {
    if ok {
        TaskStatus::Passed
    } else {
        TaskStatus::Failed
    }
}

fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(name.to_string())
}

fn coords(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn pair_columns(n: usize) -> Vec<String> {
    let mut h = coords("p", n);
    h.extend(coords("q", n));
    h
}

fn pair_cells(p: &[f64], q: &[f64]) -> Vec<String> {
    p.iter().chain(q).map(|v| fmt(*v)).collect()
}

fn bound_rows(reports: &[BoundReport], n: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = pair_columns(n);
    for c in ["distance", "bound", "slack", "h_p", "h_q", "v_norm_p", "v_norm_q", "holds", "converged"] {
        header.push(c.into());
    }
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = pair_cells(&r.p, &r.q);
            for v in [r.measured_distance, r.bound, r.slack, r.h_p, r.h_q, r.v_norm_p, r.v_norm_q] {
                row.push(fmt(v));
            }
            row.push(r.holds.to_string());
            row.push(r.distance_converged.to_string());
            row
        })
        .collect();
    (header, rows)
}

fn run_task(ctx: &Resolved, index: usize, task: &TaskSpec, dir: &Path) -> Result<Outcome, Error> {
    let m = &ctx.metric;
    let n = m.dimension();
    let sampling = &ctx.scenario.sampling;
    let io = |e: std::io::Error| Error::InvalidMetric(format!("cannot write artifact: {e}"));
    match task {
        TaskSpec::Tensors { point, direction } => {
            let pd = PointDirection::new(m, ctx.point(point).to_vec(), direction.clone())?;
            let g = fundamental_tensor(m, &pd)?;
            let structure = verify_structure(m, &sampling.plan);
            Ok(Outcome {
                status: passed_if(structure.passed()),
                result: json!({
                    "x": pd.x,
                    "y": pd.y,
                    "F": eval_f(m, &pd)?,
                    "g": matrix_rows(&g.g),
                    "g_inverse": matrix_rows(&inverse_fundamental(m, &pd)?),
                    "cartan": cartan_tensor(m, &pd)?.c,
                    "structure": structure,
                }),
                artifacts: vec![],
            })
        }
        TaskSpec::Curvature { point, direction } => {
            let pd = PointDirection::new(m, ctx.point(point).to_vec(), direction.clone())?;
            let spray = spray_coefficients(m, &pd)?;
            let curv = reduced_curvature(m, &pd)?;
            Ok(Outcome {
                status: TaskStatus::Passed,
                result: json!({
                    "x": pd.x,
                    "y": pd.y,
                    "spray": spray.g,
                    "nonlinear_connection": matrix_rows(&spray.n),
                    "christoffel": christoffel(m, &pd)?,
                    "reduced_curvature": matrix_rows(&curv.r),
                    "ricci": curv.ric,
                    "chern": chern_coefficients(m, &pd)?.gamma,
                }),
                artifacts: vec![],
            })
        }
        TaskSpec::Geodesic { point, direction, length } => {
            let control = StepControl { step: sampling.geodesic_step, ..StepControl::default() };
            let path = integrate_geodesic(m, ctx.point(point), direction, *length, &control)?;
            let name = format!("geodesic-{index}.csv");
            let file = fs::File::create(dir.join(&name)).map_err(io)?;
            path.write_csv(file).map_err(io)?;
            let defect = path.max_speed_defect(m);
            Ok(Outcome {
                status: passed_if(defect <= 1e-6),
                result: json!({
                    "total_length": path.total_length,
                    "truncated": path.truncated,
                    "samples": path.samples.len(),
                    "error_estimate": path.error_estimate,
                    "max_speed_defect": defect,
                    "end": path.end().map(|e| e.x.clone()),
                }),
                artifacts: vec![name],
            })
        }
        TaskSpec::Distance { pairs } => {
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            let mut all = true;
            for (p, q) in ctx.pairs(*pairs) {
                let fwd = distance(m, &p, &q, &sampling.distance)?;
                let bwd = distance(m, &q, &p, &sampling.distance)?;
                all &= fwd.converged && bwd.converged;
                let mut row = pair_cells(&p, &q);
                row.extend([fmt(fwd.distance), fmt(bwd.distance), (fwd.converged && bwd.converged).to_string()]);
                rows.push(row);
                entries.push(json!({ "p": p, "q": q, "forward": fwd, "backward": bwd }));
            }
            let mut header = pair_columns(n);
            header.extend(["forward".into(), "backward".into(), "converged".into()]);
            let name = write_csv(dir, &format!("distances-{index}.csv"), &header, &rows).map_err(io)?;
            Ok(Outcome { status: passed_if(all), result: json!({ "pairs": entries }), artifacts: vec![name] })
        }
        TaskSpec::SolitonCheck { expect } => {
            let problem = ctx.problem.as_ref().expect("resolved scenarios carry a problem for soliton tasks");
            let samples = residual_samples(problem, &sampling.plan)?;
            let verdict = verdict_from(problem, &samples, default_tolerance(problem.lambda));
            let mut header = coords("x", n);
            header.extend(coords("y", n));
            header.push("residual".into());
            let rows: Vec<Vec<String>> = samples
                .iter()
                .map(|w| w.x.iter().chain(&w.y).chain([&w.residual]).map(|v| fmt(*v)).collect())
                .collect();
            let name = write_csv(dir, &format!("residuals-{index}.csv"), &header, &rows).map_err(io)?;
            let status = match expect {
                Some(label) => passed_if(&verdict.label == label),
                None => TaskStatus::Passed,
            };
            let word = |v: Value| v.as_str().map(String::from).unwrap_or_default();
            let classification = format!(
                "{}, {}",
                word(serde_json::to_value(verdict.class).unwrap_or(Value::Null)),
                word(serde_json::to_value(verdict.regime).unwrap_or(Value::Null))
            );
            Ok(Outcome {
                status,
                result: json!({ "expected": expect, "classification": classification, "verdict": verdict }),
                artifacts: vec![name],
            })
        }
        TaskSpec::LemmaCheck { pairs } => {
            let opts = sampling.bound_options();
            let mut reports = Vec::new();
            for (p, q) in ctx.pairs(*pairs) {
                reports.push(lemma_check(m, &p, &q, &opts)?);
            }
            let ok = reports.iter().all(|r| r.status != LemmaStatus::Fails);
            let mut header = pair_columns(n);
            for c in ["distance", "integral", "rhs", "status", "converged"] {
                header.push(c.into());
            }
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let mut row = pair_cells(&r.p, &r.q);
                    row.extend([fmt(r.distance), fmt(r.integral), fmt(r.rhs)]);
                    row.push(serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
                    row.push(r.distance_converged.to_string());
                    row
                })
                .collect();
            let name = write_csv(dir, &format!("lemma-{index}.csv"), &header, &rows).map_err(io)?;
            Ok(Outcome {
                status: passed_if(ok),
                result: json!({ "h_values": "raw", "slack": crate::bounds::LEMMA_SLACK, "reports": reports }),
                artifacts: vec![name],
            })
        }
        TaskSpec::BoundVerify { pairs } => {
            let problem = ctx.problem.as_ref().expect("resolved scenarios carry a problem for bound tasks");
            let opts = sampling.bound_options();
            let verdict = classify(problem, &opts.plan)?;
            let mut reports = Vec::new();
            for (p, q) in ctx.pairs(*pairs) {
                reports.push(theorem_bound_with_verdict(problem, &verdict, &p, &q, &opts)?);
            }
            let ok = reports.iter().all(|r| r.holds);
            let (header, rows) = bound_rows(&reports, n);
            let name = write_csv(dir, &format!("bounds-{index}.csv"), &header, &rows).map_err(io)?;
            let min_slack = reports.iter().map(|r| r.slack).min_by(f64::total_cmp);
            Ok(Outcome {
                status: passed_if(ok),
                result: json!({ "verdict": verdict, "min_slack": min_slack, "reports": reports }),
                artifacts: vec![name],
            })
        }
        TaskSpec::Sweep { pairs } => {
            let problem = ctx.problem.as_ref().expect("resolved scenarios carry a problem for sweep tasks");
            let sweep = bound_sweep(problem, &ctx.pairs(*pairs), &sampling.bound_options())?;
            let (header, rows) = bound_rows(&sweep.reports, n);
            let name = write_csv(dir, &format!("sweep-{index}.csv"), &header, &rows).map_err(io)?;
            Ok(Outcome {
                status: passed_if(sweep.all_hold()),
                result: serde_json::to_value(&sweep).unwrap_or(Value::Null),
                artifacts: vec![name],
            })
        }
    }
}

/// Run every task in order, write `report.json`, `timing.json` and CSV artifacts into `dir`.
pub fn run(ctx: &Resolved, dir: &Path) -> std::io::Result<RunReport> {
    fs::create_dir_all(dir)?;
    let start = Instant::now();
    let mut tasks = Vec::new();
    let mut timing = Vec::new();
    for (index, task) in ctx.scenario.tasks.iter().enumerate() {
        let t0 = Instant::now();
        let report = match run_task(ctx, index, task, dir) {
            Ok(o) => TaskReport {
                index,
                task: task.name(),
                status: o.status,
                result: o.result,
                artifacts: o.artifacts,
                error: None,
            },
            Err(e) => TaskReport {
                index,
                task: task.name(),
                status: if matches!(e, Error::HypothesisViolated(_)) {
                    TaskStatus::HypothesisViolated
                } else {
                    TaskStatus::Error
                },
                result: Value::Null,
                artifacts: vec![],
                error: Some(e.to_string()),
            },
        };
        timing.push((index, task.name(), t0.elapsed().as_secs_f64()));
        tasks.push(report);
    }
    let count = |s: TaskStatus| tasks.iter().filter(|t| t.status == s).count();
    let (passed, failed, hyp, errors) =
        (count(TaskStatus::Passed), count(TaskStatus::Failed), count(TaskStatus::HypothesisViolated), count(TaskStatus::Error));
    let exit_code = if hyp > 0 {
        EXIT_HYPOTHESIS
    } else if failed + errors > 0 {
        EXIT_VERIFICATION_FAILED
    } else {
        EXIT_OK
    };
    let report = RunReport {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: ctx.scenario.clone(),
        tasks,
        summary: Summary { exit_code, passed, failed, hypothesis_violated: hyp, errors },
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(report_path(dir), text)?;
    let sidecar = Timing { total_seconds: start.elapsed().as_secs_f64(), tasks: timing };
    fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?)?;
    Ok(report)
}

pub fn report_path(dir: &Path) -> PathBuf {
    dir.join("report.json")
}
