//! Self-convergence studies.
//!
//! No closed-form solution exists for the controlled problem, so errors are
//! differences between runs on nested meshes: `W^n_i(h, k)` against
//! `W^n_{2i}(h/2, k)` in space, and level `n` of a run with `M` steps against
//! level `2n` of a run with `2M` steps in time. The observed order of a row is
//! `log2(e(coarser pair) / e(this pair))`.
//!
//! The maximum is taken either over every coinciding time level or at the
//! final level only ([`LevelWindow`]). The reference state tables are
//! final-level errors; the controller table is a maximum over all levels.
//! In time, a maximum over all levels is dominated by the initial layer the
//! incompatible data excite, so temporal controller studies default to the
//! final level as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{GridSpec, InitialCondition, ModelParams};
use crate::operators::{self, g0_eval, gn_eval};
use crate::stepper::{BoundaryMode, HistoryMode, NewtonConfig, RunOptions, RunTrajectory, Scheme};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyMode {
    /// Refine `N`, hold `M`.
    Spatial,
    /// Refine `M`, hold `N`.
    Temporal,
}

/// Which coinciding time levels enter an error maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LevelWindow {
    AllLevels,
    #[default]
    FinalLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<T> {
    /// `N` or `M` of the finer run of the pair.
    pub resolution: usize,
    pub err_inf: Option<T>,
    pub err_l2: Option<T>,
    pub order_inf: Option<T>,
    pub order_l2: Option<T>,
    /// Set when a run behind this row failed.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerRow<T> {
    pub resolution: usize,
    pub err_x0: Option<T>,
    pub err_x1: Option<T>,
    pub order_x0: Option<T>,
    pub order_x1: Option<T>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan<T> {
    pub mode: StudyMode,
    /// Doubling ladder of `N` (spatial) or `M` (temporal).
    pub resolutions: Vec<usize>,
    /// The held `M` (spatial) or `N` (temporal).
    pub fixed_other: usize,
    pub t_final: T,
    pub ic: InitialCondition<T>,
    pub params: ModelParams<T>,
    pub boundary: BoundaryMode<T>,
    pub newton: NewtonConfig<T>,
    /// Store histories and compute state errors; controller errors need only
    /// the boundary records.
    pub state_errors: bool,
    pub state_window: LevelWindow,
    pub controller_window: LevelWindow,
}

impl<T: Real> StudyPlan<T> {
    pub fn new(
        mode: StudyMode,
        resolutions: Vec<usize>,
        fixed_other: usize,
        t_final: T,
        ic: InitialCondition<T>,
        params: ModelParams<T>,
    ) -> Result<Self> {
        let plan = Self {
            mode,
            resolutions,
            fixed_other,
            t_final,
            ic,
            params,
            boundary: BoundaryMode::Feedback,
            newton: NewtonConfig::default(),
            state_errors: true,
            state_window: LevelWindow::FinalLevel,
            controller_window: match mode {
                StudyMode::Spatial => LevelWindow::AllLevels,
                StudyMode::Temporal => LevelWindow::FinalLevel,
            },
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolutions.len() < 3 {
            return Err(Error::InvalidParameter(
                "ladder",
                format!("need at least 3 resolutions, got {}", self.resolutions.len()),
            ));
        }
        if let Some(w) = self.resolutions.windows(2).find(|w| w[1] != 2 * w[0]) {
            return Err(Error::InvalidParameter(
                "ladder",
                format!("resolutions must double, got {} then {}", w[0], w[1]),
            ));
        }
        self.params.validate()?;
        self.grid_for(self.resolutions[0]).map(|_| ())
    }

    fn grid_for(&self, resolution: usize) -> Result<GridSpec<T>> {
        match self.mode {
            StudyMode::Spatial => GridSpec::new(resolution, self.fixed_other, self.t_final),
            StudyMode::Temporal => GridSpec::new(self.fixed_other, resolution, self.t_final),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport<T> {
    pub mode: StudyMode,
    pub fixed_other: usize,
    /// Empty when the plan skipped state errors.
    pub state_rows: Vec<ConvergenceRow<T>>,
    pub controller_rows: Vec<ControllerRow<T>>,
    /// `(resolution, message)` of every failed run.
    pub failures: Vec<(usize, String)>,
}

/// `log2(coarse / fine)`; `None` unless both errors are positive and finite.
pub fn observed_order<T: Real>(coarse: T, fine: T) -> Option<T> {
    let ok = |e: T| e > T::zero() && e.is_finite();
    (ok(coarse) && ok(fine)).then(|| (coarse / fine).log2())
}

/// Node and level ratios between two nested runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Nesting {
    node_ratio: usize,
    level_ratio: usize,
}

fn nesting<T: Real>(coarse: &RunTrajectory<T>, fine: &RunTrajectory<T>) -> Result<Nesting> {
    let (gc, gf) = (&coarse.grid, &fine.grid);
    if gc.t_final != gf.t_final || coarse.params != fine.params {
        return Err(Error::Incompatible("runs differ in T or model constants".into()));
    }
    if gf.n % gc.n != 0 || gf.m % gc.m != 0 {
        return Err(Error::Incompatible(format!(
            "mesh ({}, {}) is not nested in ({}, {})",
            gc.n, gc.m, gf.n, gf.m
        )));
    }
    if !coarse.is_complete() || !fine.is_complete() {
        return Err(Error::Incompatible("incomplete trajectory".into()));
    }
    Ok(Nesting {
        node_ratio: gf.n / gc.n,
        level_ratio: gf.m / gc.m,
    })
}

/// Coarse level indices selected by `window`.
fn coarse_levels(m: usize, window: LevelWindow) -> std::ops::RangeInclusive<usize> {
    match window {
        LevelWindow::AllLevels => 0..=m,
        LevelWindow::FinalLevel => m..=m,
    }
}

/// Max over coinciding levels of the nodal difference (max norm and
/// trapezoidal L2 on the coarse mesh).
fn state_difference<T: Real>(
    coarse: &RunTrajectory<T>,
    fine: &RunTrajectory<T>,
    nest: Nesting,
    window: LevelWindow,
) -> Result<(T, T)> {
    let hc = coarse.history.as_ref().ok_or(Error::HistoryMissing)?;
    let hf = fine.history.as_ref().ok_or(Error::HistoryMissing)?;
    // fine node r*i*s_c must be stored: (r * s_c) % s_f == 0
    let step_fine = nest.node_ratio * hc.node_stride;
    if !step_fine.is_multiple_of(hf.node_stride) {
        return Err(Error::Incompatible(format!(
            "fine history stride {} cannot reach every {}-th node",
            hf.node_stride, step_fine
        )));
    }
    let pick = step_fine / hf.node_stride;
    let h_eff = coarse.grid.h * T::from_usize_lossy(hc.node_stride);

    let mut err_inf = T::zero();
    let mut err_l2 = T::zero();
    let mut diff = Vec::new();
    for n in coarse_levels(coarse.grid.m, window) {
        let wc = hc.levels.get(n).ok_or(Error::HistoryMissing)?;
        let wf = hf.levels.get(n * nest.level_ratio).ok_or(Error::HistoryMissing)?;
        diff.clear();
        diff.extend(wc.iter().zip(wf.iter().step_by(pick)).map(|(&a, &b)| a - b));
        err_inf = err_inf.max(operators::linf(&diff));
        if diff.len() >= 2 {
            err_l2 = err_l2.max(operators::inner_l2_raw(&diff, &diff, h_eff).sqrt());
        }
    }
    Ok((err_inf, err_l2))
}

/// Difference between a run on `N` intervals and one on `r * N` (same `M`).
pub fn spatial_self_error<T: Real>(
    run_h: &RunTrajectory<T>,
    run_h2: &RunTrajectory<T>,
    window: LevelWindow,
) -> Result<(T, T)> {
    let nest = nesting(run_h, run_h2)?;
    if nest.level_ratio != 1 {
        return Err(Error::Incompatible(format!(
            "time steps differ: M = {} vs {}",
            run_h.grid.m, run_h2.grid.m
        )));
    }
    state_difference(run_h, run_h2, nest, window)
}

/// Difference between a run with `M` steps and one with `r * M` (same `N`),
/// at the coinciding time levels.
pub fn temporal_self_error<T: Real>(
    run_k: &RunTrajectory<T>,
    run_k2: &RunTrajectory<T>,
    window: LevelWindow,
) -> Result<(T, T)> {
    let nest = nesting(run_k, run_k2)?;
    if nest.node_ratio != 1 {
        return Err(Error::Incompatible(format!(
            "spatial meshes differ: N = {} vs {}",
            run_k.grid.n, run_k2.grid.n
        )));
    }
    state_difference(run_k, run_k2, nest, window)
}

/// Max over coinciding levels of the difference of the feedback laws
/// evaluated at each run's boundary values. Works for spatial or temporal
/// nesting; no history required.
pub fn controller_error<T: Real>(
    coarse: &RunTrajectory<T>,
    fine: &RunTrajectory<T>,
    window: LevelWindow,
) -> Result<(T, T)> {
    let nest = nesting(coarse, fine)?;
    let p = &coarse.params;
    let mut e0 = T::zero();
    let mut e1 = T::zero();
    for n in coarse_levels(coarse.grid.m, window) {
        let rc = &coarse.records[n];
        let rf = &fine.records[n * nest.level_ratio];
        e0 = e0.max((g0_eval(rc.w0, p) - g0_eval(rf.w0, p)).abs());
        e1 = e1.max((gn_eval(rc.wn, p) - gn_eval(rf.wn, p)).abs());
    }
    Ok((e0, e1))
}

/// Lipschitz constant of `g0` on `[-r, r]`:
/// `|g0(a) - g0(b)| <= (1/nu)(c0 + wd + (2/(3 c0)) r^2) |a - b|`.
pub fn g0_lipschitz<T: Real>(p: &ModelParams<T>, r: T) -> T {
    (p.c0 + p.wd + T::lit(2.0) / (T::lit(3.0) * p.c0) * r * r) / p.nu
}

pub fn gn_lipschitz<T: Real>(p: &ModelParams<T>, r: T) -> T {
    (p.c1 + p.wd + T::lit(2.0) / (T::lit(3.0) * p.c1) * r * r) / p.nu
}

/// Largest boundary value difference `(at x=0, at x=1)` over coinciding levels.
pub fn boundary_state_error<T: Real>(
    coarse: &RunTrajectory<T>,
    fine: &RunTrajectory<T>,
    window: LevelWindow,
) -> Result<(T, T)> {
    let nest = nesting(coarse, fine)?;
    let mut e0 = T::zero();
    let mut e1 = T::zero();
    for n in coarse_levels(coarse.grid.m, window) {
        let rc = &coarse.records[n];
        let rf = &fine.records[n * nest.level_ratio];
        e0 = e0.max((rc.w0 - rf.w0).abs());
        e1 = e1.max((rc.wn - rf.wn).abs());
    }
    Ok((e0, e1))
}

fn ordered<T: Real>(errs: &[Option<T>], j: usize) -> Option<T> {
    if j < 2 {
        return None;
    }
    observed_order(errs[j - 1]?, errs[j]?)
}

/// Runs every resolution of the ladder (in parallel) and assembles rows.
///
/// Row `j` carries the errors of the pair `(ladder[j-1], ladder[j])`; row 0
/// has none and row 1 has no order. A failed run annotates the rows it
/// feeds instead of aborting the study.
pub fn run_study<T: Real>(plan: &StudyPlan<T>) -> Result<StudyReport<T>> {
    plan.validate()?;
    let last = plan.resolutions.len() - 1;
    let runs: Vec<std::result::Result<RunTrajectory<T>, String>> = plan
        .resolutions
        .par_iter()
        .enumerate()
        .map(|(j, &res)| {
            let grid = plan.grid_for(res).map_err(|e| e.to_string())?;
            let history = match (plan.state_errors, plan.mode) {
                (false, _) => HistoryMode::None,
                // the finest spatial run only ever plays the fine role
                (true, StudyMode::Spatial) if j == last => HistoryMode::Strided(2),
                (true, _) => HistoryMode::Full,
            };
            let opts = RunOptions {
                newton: plan.newton,
                history,
                monitors: false,
            };
            let scheme = Scheme::new(grid, plan.params)
                .map_err(|e| e.to_string())?
                .with_boundary(plan.boundary);
            scheme.run(&plan.ic, &opts).map_err(|f| f.error.to_string())
        })
        .collect();

    let failures: Vec<(usize, String)> = runs
        .iter()
        .zip(&plan.resolutions)
        .filter_map(|(r, &res)| r.as_ref().err().map(|e| (res, e.clone())))
        .collect();

    let pair_note = |j: usize| -> Option<String> {
        let bad: Vec<String> = [j - 1, j]
            .iter()
            .filter_map(|&i| {
                runs[i]
                    .as_ref()
                    .err()
                    .map(|e| format!("run {} failed: {e}", plan.resolutions[i]))
            })
            .collect();
        (!bad.is_empty()).then(|| bad.join("; "))
    };

    let n = plan.resolutions.len();
    let mut state: Vec<(Option<T>, Option<T>, Option<String>)> = vec![(None, None, None)];
    let mut ctrl: Vec<(Option<T>, Option<T>, Option<String>)> = vec![(None, None, None)];
    for j in 1..n {
        let note = pair_note(j);
        match (&runs[j - 1], &runs[j]) {
            (Ok(a), Ok(b)) => {
                if plan.state_errors {
                    let e = match plan.mode {
                        StudyMode::Spatial => spatial_self_error(a, b, plan.state_window),
                        StudyMode::Temporal => temporal_self_error(a, b, plan.state_window),
                    };
                    match e {
                        Ok((ei, el)) => state.push((Some(ei), Some(el), None)),
                        Err(err) => state.push((None, None, Some(err.to_string()))),
                    }
                }
                match controller_error(a, b, plan.controller_window) {
                    Ok((e0, e1)) => ctrl.push((Some(e0), Some(e1), None)),
                    Err(err) => ctrl.push((None, None, Some(err.to_string()))),
                }
            }
            _ => {
                state.push((None, None, note.clone()));
                ctrl.push((None, None, note));
            }
        }
    }

    let state_rows = if plan.state_errors {
        let inf: Vec<Option<T>> = state.iter().map(|s| s.0).collect();
        let l2: Vec<Option<T>> = state.iter().map(|s| s.1).collect();
        (0..n)
            .map(|j| ConvergenceRow {
                resolution: plan.resolutions[j],
                err_inf: inf[j],
                err_l2: l2[j],
                order_inf: ordered(&inf, j),
                order_l2: ordered(&l2, j),
                note: state[j].2.clone(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let x0: Vec<Option<T>> = ctrl.iter().map(|s| s.0).collect();
    let x1: Vec<Option<T>> = ctrl.iter().map(|s| s.1).collect();
    let controller_rows = (0..n)
        .map(|j| ControllerRow {
            resolution: plan.resolutions[j],
            err_x0: x0[j],
            err_x1: x1[j],
            order_x0: ordered(&x0, j),
            order_x1: ordered(&x1, j),
            note: ctrl[j].2.clone(),
        })
        .collect();

    Ok(StudyReport {
        mode: plan.mode,
        fixed_other: plan.fixed_other,
        state_rows,
        controller_rows,
        failures,
    })
}
