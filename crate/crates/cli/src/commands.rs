//! Subcommand drivers. Each writes its artifacts under `output.directory`
//! and maps failures onto [`CliError`].

use std::path::PathBuf;

use burgers_core::analysis::{run_study, ConvergenceRow, LevelWindow, StudyMode, StudyPlan, StudyReport};
use burgers_core::grid::{sample_initial, GridSpec, ModelParams};
use burgers_core::operators;
use burgers_core::reference::{self, ComparisonLine};
use burgers_core::stability::{self, fit_decay, k_limits, Regime, StepVerdict};
use burgers_core::stepper::{BoundaryMode, RunOptions, RunTrajectory};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, IcKind, RunConfig};
use crate::output::{self, num, opt};
use crate::CliError;

/// Fraction of the levels used by the exponential decay fit.
pub const DECAY_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub status: String,
    pub levels: usize,
    pub final_l2: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub r_squared: Option<f64>,
    pub verdict: String,
    pub max_newton_iters: usize,
    pub failure: Option<String>,
}

fn verdict_summary(cfg: &RunConfig, traj: &RunTrajectory<f64>) -> String {
    if cfg.theta >= 0.5 {
        return "unconditional".into();
    }
    if !cfg.monitors {
        return "unchecked".into();
    }
    let first_bad = traj.records.iter().find_map(|r| match r.verdict {
        Some(StepVerdict::Violated { bound, .. }) => Some((r.n, bound)),
        _ => None,
    });
    match first_bad {
        Some((n, bound)) => format!("violated k{bound} at level {n}"),
        None => "satisfied".into(),
    }
}

fn stability_json(cfg: &RunConfig, grid: &GridSpec<f64>, p: &ModelParams<f64>, traj: &RunTrajectory<f64>) -> Value {
    if p.is_unconditional() {
        let alpha = stability::alpha_bound(p).ok();
        return json!({
            "regime": "unconditional",
            "alpha_bound": alpha,
            "beta_star_at_0.9_alpha_bound": alpha.map(|a| stability::beta_star(p, grid.k, 0.9 * a)),
        });
    }
    let linf0 = traj.records.first().map(|r| r.linf).unwrap_or(0.0);
    let linf_max = traj.records.iter().map(|r| r.linf).fold(0.0, f64::max);
    let limits = |w: f64| {
        let b = k_limits(p, grid, w);
        json!({
            "k_limits": b.k_limits,
            "min_limit": b.min_limit().map(|(i, k)| json!({"index": i, "k": k})),
        })
    };
    json!({
        "regime": "conditional",
        "k": grid.k,
        "at_initial_linf": limits(linf0),
        "at_max_linf": limits(linf_max),
        "monitors": cfg.monitors,
    })
}

/// Runs one simulation and writes its artifacts. A numerical failure still
/// writes the partial trajectory and is reported through `failure`.
pub fn simulate(cfg: &RunConfig) -> Result<SimSummary, CliError> {
    let scheme = cfg.scheme()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let (traj, failure) = match scheme.run(&cfg.ic.to_initial(), &cfg.run_options()) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error.to_string())),
    };
    let fit = fit_decay(&traj, DECAY_WINDOW).ok();
    let summary = SimSummary {
        status: if failure.is_some() { "failed" } else { "completed" }.into(),
        levels: traj.records.len(),
        final_l2: traj.records.last().map(|r| r.l2),
        alpha_hat: fit.map(|f| f.alpha_hat),
        r_squared: fit.map(|f| f.r_squared),
        verdict: verdict_summary(cfg, &traj),
        max_newton_iters: traj.records.iter().map(|r| r.newton.iterations).max().unwrap_or(0),
        failure: failure.clone(),
    };

    let dir = &cfg.directory;
    output::ensure_dir(dir)?;
    if cfg.wants(Format::Csv) {
        output::write_text(&dir.join("trajectory.csv"), &output::trajectory_csv(&traj.records))?;
        if let Some(h) = &traj.history {
            let rows = h.levels.iter().enumerate().map(|(n, lvl)| {
                let mut row = vec![n.to_string()];
                row.extend(lvl.iter().map(|&v| num(v)));
                row
            });
            let nodes: Vec<String> = (0..grid.nodes())
                .step_by(h.node_stride)
                .map(|i| format!("w{i}"))
                .collect();
            let mut header = vec!["n"];
            header.extend(nodes.iter().map(String::as_str));
            output::write_text(&dir.join("history.csv"), &output::csv(&header, rows))?;
        }
    }
    if cfg.wants(Format::Dat) {
        let series =
            |f: fn(&burgers_core::stepper::LevelRecord<f64>) -> f64| traj.records.iter().map(move |r| (r.t, f(r)));
        output::write_text(&dir.join("l2.dat"), &output::dat_panel(["t", "l2"], series(|r| r.l2)))?;
        output::write_text(
            &dir.join("h1_semi.dat"),
            &output::dat_panel(["t", "h1_semi"], series(|r| r.h1_semi)),
        )?;
        output::write_text(
            &dir.join("linf.dat"),
            &output::dat_panel(["t", "linf"], series(|r| r.linf)),
        )?;
        output::write_text(&dir.join("g0.dat"), &output::dat_panel(["t", "g0"], series(|r| r.g0)))?;
        output::write_text(&dir.join("gN.dat"), &output::dat_panel(["t", "gN"], series(|r| r.gn)))?;
    }
    if cfg.wants(Format::Json) {
        let meta = json!({
            "command": "simulate",
            "config": cfg.to_dotted(),
            "preset": cfg.preset.map(|p| p.name()),
            "summary": summary,
            "decay_fit": fit.map(|f| json!({
                "alpha_hat": f.alpha_hat,
                "window": f.window,
                "r_squared": f.r_squared,
                "points": f.points,
                "window_fraction": DECAY_WINDOW,
            })),
            "stability": stability_json(cfg, &grid, &params, &traj),
            "implementation": {
                "boundary": match cfg.boundary() {
                    BoundaryMode::Feedback => "feedback",
                    _ => "uncontrolled",
                },
                "nonlinear_solver": "Newton with tridiagonal solve",
                "newton_stop": "residual or update max norm below newton.tol",
                "blowup_linf": burgers_core::stepper::BLOWUP_LINF,
                "h": grid.h,
                "k": grid.k,
            },
        });
        output::write_json(&dir.join("metadata.json"), &meta)?;
    }
    Ok(summary)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimSummary, CliError> {
    let s = simulate(cfg)?;
    match &s.failure {
        Some(f) => Err(CliError::Numerical(format!(
            "{f} (partial output in {})",
            cfg.directory.display()
        ))),
        None => Ok(s),
    }
}

fn state_csv(rows: &[ConvergenceRow<f64>]) -> String {
    output::csv(
        &["resolution", "err_inf", "order_inf", "err_l2", "order_l2"],
        rows.iter().map(|r| {
            vec![
                r.resolution.to_string(),
                opt(r.err_inf),
                opt(r.order_inf),
                opt(r.err_l2),
                opt(r.order_l2),
            ]
        }),
    )
}

fn controller_csv(rep: &StudyReport<f64>) -> String {
    output::csv(
        &["resolution", "err_x0", "order_x0", "err_x1", "order_x1"],
        rep.controller_rows.iter().map(|r| {
            vec![
                r.resolution.to_string(),
                opt(r.err_x0),
                opt(r.order_x0),
                opt(r.err_x1),
                opt(r.order_x1),
            ]
        }),
    )
}

fn comparison_csv(lines: &[ComparisonLine]) -> String {
    output::csv(
        &[
            "resolution",
            "metric",
            "computed",
            "reference",
            "tolerance",
            "pass",
            "gating",
        ],
        lines.iter().map(|l| {
            vec![
                l.resolution.to_string(),
                l.metric.clone(),
                opt(l.computed),
                num(l.reference),
                l.tolerance.clone(),
                l.pass.to_string(),
                l.gating.to_string(),
            ]
        }),
    )
}

fn state_col(rep: &StudyReport<f64>, linf: bool) -> Vec<(usize, Option<f64>, Option<f64>)> {
    rep.state_rows
        .iter()
        .map(|r| {
            if linf {
                (r.resolution, r.err_inf, r.order_inf)
            } else {
                (r.resolution, r.err_l2, r.order_l2)
            }
        })
        .collect()
}

/// Why the configured study cannot be held against the reference tables,
/// or `None` when it can.
fn incomparable(cfg: &RunConfig, fixed: usize, fixed_ref: usize, theta_ok: bool) -> Option<String> {
    let mut why = Vec::new();
    if cfg.ic != IcKind::Quadratic5 {
        why.push("ic.kind is not quadratic5");
    }
    if (cfg.nu, cfg.wd, cfg.c0, cfg.c1) != (1.0, 5.0, 1.0, 1.0) {
        why.push("params differ from example51");
    }
    if cfg.t_final != 1.0 {
        why.push("grid.T is not 1");
    }
    if !cfg.controlled {
        why.push("controls are off");
    }
    if !theta_ok {
        why.push("theta has no reference column");
    }
    if fixed != fixed_ref {
        why.push("held resolution differs from the reference");
    }
    (!why.is_empty()).then(|| why.join("; "))
}

fn plan(
    cfg: &RunConfig,
    mode: StudyMode,
    ladder: Vec<usize>,
    fixed: usize,
    theta: f64,
) -> Result<StudyPlan<f64>, CliError> {
    let params = cfg
        .params()?
        .with_theta(theta)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut plan = StudyPlan::new(mode, ladder, fixed, cfg.t_final, cfg.ic.to_initial(), params)
        .map_err(|e| CliError::Config(e.to_string()))?;
    plan.boundary = cfg.boundary();
    plan.newton = cfg.newton();
    Ok(plan)
}

fn study(plan: &StudyPlan<f64>) -> Result<StudyReport<f64>, CliError> {
    run_study(plan).map_err(|e| CliError::Numerical(e.to_string()))
}

fn window_name(w: LevelWindow) -> &'static str {
    match w {
        LevelWindow::AllLevels => "all_levels",
        LevelWindow::FinalLevel => "final_level",
    }
}

fn study_json(plan: &StudyPlan<f64>, rep: &StudyReport<f64>) -> Value {
    json!({
        "mode": rep.mode,
        "ladder": plan.resolutions,
        "fixed_other": rep.fixed_other,
        "theta": plan.params.theta,
        "state_window": window_name(plan.state_window),
        "controller_window": window_name(plan.controller_window),
        "failures": rep.failures,
        "state_notes": rep.state_rows.iter()
            .filter_map(|r| r.note.as_ref().map(|n| json!({"resolution": r.resolution, "note": n})))
            .collect::<Vec<_>>(),
        "controller_notes": rep.controller_rows.iter()
            .filter_map(|r| r.note.as_ref().map(|n| json!({"resolution": r.resolution, "note": n})))
            .collect::<Vec<_>>(),
    })
}

/// Outcome of a convergence command: `Some(pass)` when a reference
/// comparison was made.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeOutcome {
    pub compared: Option<bool>,
    pub failures: usize,
    pub files: Vec<PathBuf>,
}

fn finish(
    cfg: &RunConfig,
    name: &str,
    studies: Vec<Value>,
    lines: Vec<ComparisonLine>,
    skip_reason: Option<String>,
    failures: usize,
    mut files: Vec<PathBuf>,
) -> Result<ConvergeOutcome, CliError> {
    let compared = skip_reason.is_none().then(|| reference::all_gating_pass(&lines));
    let cmp_path = cfg.directory.join(format!("{name}_comparison.csv"));
    output::write_text(&cmp_path, &comparison_csv(&lines))?;
    files.push(cmp_path.clone());
    let manifest = json!({
        "command": name,
        "config": cfg.to_dotted(),
        "studies": studies,
        "comparison": {
            "made": skip_reason.is_none(),
            "skipped_because": skip_reason,
            "policy": format!(
                "orders within +-{} at the two finest shared rows gate; errors are informational",
                reference::ORDER_TOL
            ),
            "pass": compared,
        },
        "files": files.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let man_path = cfg.directory.join(format!("{name}_manifest.json"));
    output::write_json(&man_path, &manifest)?;
    files.push(man_path);
    let outcome = ConvergeOutcome {
        compared,
        failures,
        files,
    };
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} run(s) failed; see {name}_manifest.json"
        )));
    }
    if compared == Some(false) {
        return Err(CliError::Comparison(format!("see {}", cmp_path.display())));
    }
    Ok(outcome)
}

/// Refine `N` with `M` held; state errors and controller errors.
pub fn converge_space(
    cfg: &RunConfig,
    ladder: Option<Vec<usize>>,
    fixed: Option<usize>,
) -> Result<ConvergeOutcome, CliError> {
    let ladder = ladder.unwrap_or_else(|| reference::SPACE_STATE_LADDER.to_vec());
    let fixed = fixed.unwrap_or(reference::SPACE_STATE_M);
    let plan = plan(cfg, StudyMode::Spatial, ladder, fixed, cfg.theta)?;
    let rep = study(&plan)?;
    output::ensure_dir(&cfg.directory)?;
    let state_path = cfg.directory.join("converge_space.csv");
    output::write_text(&state_path, &state_csv(&rep.state_rows))?;
    let ctrl_path = cfg.directory.join("converge_space_controller.csv");
    output::write_text(&ctrl_path, &controller_csv(&rep))?;

    let skip = incomparable(cfg, fixed, reference::SPACE_STATE_M, cfg.theta == 1.0);
    let mut lines = Vec::new();
    if skip.is_none() {
        lines.extend(reference::compare_column(
            "linf",
            &state_col(&rep, true),
            &reference::column_a(reference::SPACE_STATE),
            false,
        ));
        lines.extend(reference::compare_column(
            "l2",
            &state_col(&rep, false),
            &reference::column_b(reference::SPACE_STATE),
            false,
        ));
    }
    finish(
        cfg,
        "converge_space",
        vec![study_json(&plan, &rep)],
        lines,
        skip,
        rep.failures.len(),
        vec![state_path, ctrl_path],
    )
}

/// Refine `M` with `N` held, once per theta.
pub fn converge_time(
    cfg: &RunConfig,
    ladder: Option<Vec<usize>>,
    fixed: Option<usize>,
    thetas: &[f64],
) -> Result<ConvergeOutcome, CliError> {
    let ladder = ladder.unwrap_or_else(|| reference::TIME_STATE_LADDER.to_vec());
    let fixed = fixed.unwrap_or(reference::TIME_STATE_N);
    if thetas.is_empty() {
        return Err(CliError::Config("thetas: need at least one value".into()));
    }
    let plans = thetas
        .iter()
        .map(|&th| plan(cfg, StudyMode::Temporal, ladder.clone(), fixed, th))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = plans.iter().map(study).collect::<Result<Vec<_>, _>>()?;
    output::ensure_dir(&cfg.directory)?;

    let mut files = Vec::new();
    let mut lines = Vec::new();
    let mut skips = Vec::new();
    let mut failures = 0;
    for (plan, rep) in plans.iter().zip(&reports) {
        let th = plan.params.theta;
        let path = cfg.directory.join(format!("converge_time_theta{th}.csv"));
        output::write_text(&path, &state_csv(&rep.state_rows))?;
        files.push(path);
        let ctrl = cfg.directory.join(format!("converge_time_controller_theta{th}.csv"));
        output::write_text(&ctrl, &controller_csv(rep))?;
        files.push(ctrl);
        failures += rep.failures.len();
        // theta = 1/2 is tabulated in the max norm, theta = 1 in L2
        let column = if th == 0.5 {
            Some((
                "cn_linf",
                state_col(rep, true),
                reference::column_a(reference::TIME_STATE),
            ))
        } else if th == 1.0 {
            Some((
                "be_l2",
                state_col(rep, false),
                reference::column_b(reference::TIME_STATE),
            ))
        } else {
            None
        };
        match (
            incomparable(cfg, fixed, reference::TIME_STATE_N, column.is_some()),
            column,
        ) {
            (None, Some((metric, computed, refcol))) => {
                lines.extend(reference::compare_column(metric, &computed, &refcol, false))
            }
            (why, _) => skips.push(format!("theta {th}: {}", why.unwrap_or_default())),
        }
    }
    let studies = plans.iter().zip(&reports).map(|(p, r)| study_json(p, r)).collect();
    // compare whatever is comparable; skip only when nothing is
    let skip = lines.is_empty().then(|| skips.join("; "));
    finish(cfg, "converge_time", studies, lines, skip, failures, files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    Space,
    Time,
}

/// Controller errors only; no state histories are kept.
pub fn converge_controller(
    cfg: &RunConfig,
    direction: Direction,
    ladder: Option<Vec<usize>>,
    fixed: Option<usize>,
) -> Result<ConvergeOutcome, CliError> {
    let (mode, default_ladder, default_fixed) = match direction {
        Direction::Space => (
            StudyMode::Spatial,
            reference::SPACE_CONTROLLER_LADDER.to_vec(),
            reference::SPACE_CONTROLLER_M,
        ),
        Direction::Time => (
            StudyMode::Temporal,
            reference::TIME_STATE_LADDER.to_vec(),
            reference::TIME_STATE_N,
        ),
    };
    let fixed = fixed.unwrap_or(default_fixed);
    let mut plan = plan(cfg, mode, ladder.unwrap_or(default_ladder), fixed, cfg.theta)?;
    plan.state_errors = false;
    let rep = study(&plan)?;
    output::ensure_dir(&cfg.directory)?;
    let name = match direction {
        Direction::Space => "converge_controller_space",
        Direction::Time => "converge_controller_time",
    };
    let path = cfg.directory.join(format!("{name}.csv"));
    output::write_text(&path, &controller_csv(&rep))?;

    let x0: Vec<_> = rep
        .controller_rows
        .iter()
        .map(|r| (r.resolution, r.err_x0, r.order_x0))
        .collect();
    let x1: Vec<_> = rep
        .controller_rows
        .iter()
        .map(|r| (r.resolution, r.err_x1, r.order_x1))
        .collect();
    let (lines, skip) = match direction {
        Direction::Space => match incomparable(cfg, fixed, reference::SPACE_CONTROLLER_M, cfg.theta == 1.0) {
            None => {
                let mut l =
                    reference::compare_column("x0", &x0, &reference::column_a(reference::SPACE_CONTROLLER), false);
                l.extend(reference::compare_column(
                    "x1",
                    &x1,
                    &reference::column_b(reference::SPACE_CONTROLLER),
                    false,
                ));
                (l, None)
            }
            why => (Vec::new(), why),
        },
        Direction::Time => {
            let expected = if cfg.theta == 1.0 {
                Some(reference::TIME_CONTROLLER_ORDER_IMPLICIT)
            } else if cfg.theta == 0.5 {
                Some(reference::TIME_CONTROLLER_ORDER_CN)
            } else {
                None
            };
            match (
                incomparable(cfg, fixed, reference::TIME_STATE_N, expected.is_some()),
                expected,
            ) {
                (None, Some(o)) => {
                    let last = rep.controller_rows.last().expect("ladder has rows");
                    let line = |metric: &str, ord: Option<f64>| ComparisonLine {
                        resolution: last.resolution,
                        metric: metric.into(),
                        computed: ord,
                        reference: o,
                        tolerance: format!("+-{}", reference::ORDER_TOL),
                        pass: ord.is_some_and(|v| (v - o).abs() <= reference::ORDER_TOL),
                        gating: true,
                    };
                    (
                        vec![line("x0_order", last.order_x0), line("x1_order", last.order_x1)],
                        None,
                    )
                }
                (why, _) => (Vec::new(), Some(why.unwrap_or_default())),
            }
        }
    };
    finish(
        cfg,
        name,
        vec![study_json(&plan, &rep)],
        lines,
        skip,
        rep.failures.len(),
        vec![path],
    )
}

/// Value lists of a sweep; an empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    pub theta: Vec<f64>,
    pub nu: Vec<f64>,
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    /// Time steps are swept through `M`, with `k = T / M`.
    pub steps: Vec<usize>,
}

impl SweepAxes {
    /// Cartesian product in axis order theta, nu, c0, c1, M.
    pub fn points(&self, base: &RunConfig) -> Vec<RunConfig> {
        fn or<T: Copy>(v: &[T], d: T) -> Vec<T> {
            if v.is_empty() {
                vec![d]
            } else {
                v.to_vec()
            }
        }
        let mut out = Vec::new();
        for &theta in &or(&self.theta, base.theta) {
            for &nu in &or(&self.nu, base.nu) {
                for &c0 in &or(&self.c0, base.c0) {
                    for &c1 in &or(&self.c1, base.c1) {
                        for &m in &or(&self.steps, base.m) {
                            let i = out.len();
                            out.push(RunConfig {
                                theta,
                                nu,
                                c0,
                                c1,
                                m,
                                directory: base.directory.join(format!("point_{i:03}")),
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn sweep(base: &RunConfig, axes: &SweepAxes) -> Result<Vec<SimSummary>, CliError> {
    let points = axes.points(base);
    for p in &points {
        p.validate()?;
    }
    let results: Vec<Result<SimSummary, CliError>> = points.par_iter().map(simulate).collect();
    let summaries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    output::ensure_dir(&base.directory)?;
    let rows = points.iter().zip(&summaries).enumerate().map(|(i, (p, s))| {
        vec![
            format!("point_{i:03}"),
            num(p.theta),
            num(p.nu),
            num(p.c0),
            num(p.c1),
            p.m.to_string(),
            num(p.t_final / p.m as f64),
            s.status.clone(),
            opt(s.final_l2),
            opt(s.alpha_hat),
            opt(s.r_squared),
            s.verdict.clone(),
        ]
    });
    output::write_text(
        &base.directory.join("summary.csv"),
        &output::csv(
            &[
                "point",
                "theta",
                "nu",
                "c0",
                "c1",
                "M",
                "k",
                "status",
                "final_l2",
                "alpha_hat",
                "r_squared",
                "verdict",
            ],
            rows,
        ),
    )?;
    output::write_json(
        &base.directory.join("sweep_manifest.json"),
        &json!({
            "command": "sweep",
            "base_config": base.to_dotted(),
            "points": points.len(),
            "axes": {"theta": axes.theta, "nu": axes.nu, "c0": axes.c0, "c1": axes.c1, "M": axes.steps},
        }),
    )?;
    let failed = summaries.iter().filter(|s| s.failure.is_some()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} of {} sweep points failed",
            summaries.len()
        )));
    }
    Ok(summaries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub multiplier: f64,
    pub m: usize,
    pub k: f64,
    pub predicted_stable: bool,
    pub outcome: String,
    pub levels: usize,
    pub final_linf: Option<f64>,
    pub first_violation: Option<usize>,
}

/// Runs the conditional scheme at multiples of the smallest time step
/// limit, evaluated from the initial data.
pub fn stability_probe(cfg: &RunConfig, multipliers: &[f64]) -> Result<Vec<ProbeRow>, CliError> {
    let params = cfg.params()?;
    if params.is_unconditional() {
        return Err(CliError::Config(format!(
            "params.theta: stability-probe needs the conditional regime theta < 0.5, got {}",
            cfg.theta
        )));
    }
    if multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(CliError::Config("multipliers: need positive finite values".into()));
    }
    let grid = cfg.grid()?;
    let w0 = sample_initial(&cfg.ic.to_initial(), &grid, &params).map_err(|e| CliError::Config(e.to_string()))?;
    let w_inf = operators::linf(&w0.values);
    let bounds = k_limits(&params, &grid, w_inf);
    debug_assert_eq!(bounds.regime, Regime::Conditional);
    let (which, kmin) = bounds
        .min_limit()
        .ok_or_else(|| CliError::Numerical("no time step limit in the conditional regime".into()))?;

    let rows: Vec<ProbeRow> = multipliers
        .par_iter()
        .map(|&mult| {
            let m = (cfg.t_final / (mult * kmin)).ceil().max(1.0) as usize;
            let point = RunConfig {
                m,
                monitors: true,
                store_history: false,
                ..cfg.clone()
            };
            let scheme = point.scheme()?;
            let k = point.grid()?.k;
            let (traj, outcome) = match scheme.run(
                &point.ic.to_initial(),
                &RunOptions {
                    monitors: true,
                    ..point.run_options()
                },
            ) {
                Ok(t) => (t, "completed".to_string()),
                Err(f) => (f.partial, f.error.to_string()),
            };
            Ok(ProbeRow {
                multiplier: mult,
                m,
                k,
                predicted_stable: k < kmin,
                outcome,
                levels: traj.records.len(),
                final_linf: traj.records.last().map(|r| r.linf),
                first_violation: traj
                    .records
                    .iter()
                    .find(|r| r.verdict.is_some_and(|v| v.is_violated()))
                    .map(|r| r.n),
            })
        })
        .collect::<Result<_, CliError>>()?;

    output::ensure_dir(&cfg.directory)?;
    let table = rows.iter().map(|r| {
        vec![
            num(r.multiplier),
            r.m.to_string(),
            num(r.k),
            r.predicted_stable.to_string(),
            r.outcome.clone(),
            r.levels.to_string(),
            opt(r.final_linf),
            r.first_violation.map(|n| n.to_string()).unwrap_or_default(),
        ]
    });
    output::write_text(
        &cfg.directory.join("probe.csv"),
        &output::csv(
            &[
                "multiplier",
                "M",
                "k",
                "predicted_stable",
                "outcome",
                "levels",
                "final_linf",
                "first_violation",
            ],
            table,
        ),
    )?;
    output::write_json(
        &cfg.directory.join("probe_manifest.json"),
        &json!({
            "command": "stability-probe",
            "config": cfg.to_dotted(),
            "initial_linf": w_inf,
            "k_limits": bounds.k_limits,
            "binding_limit": {"index": which, "k": kmin},
            "rows": rows,
        }),
    )?;
    Ok(rows)
}
