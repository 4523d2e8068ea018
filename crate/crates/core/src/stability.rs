//! Stability constants of the scheme, per-level time step verdicts and
//! exponential decay fits.
//!
//! For `theta >= 1/2` the scheme is unconditionally stable and only the decay
//! exponent bound applies. For `theta < 1/2` the admissible time step is the
//! minimum of five solution-dependent limits `k_1..k_5`, each of which keeps
//! one coefficient `beta_i` of the energy inequality positive.

use serde::{Deserialize, Serialize};

use crate::grid::{GridSpec, ModelParams};
use crate::stepper::{LevelRecord, RunTrajectory};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `theta >= 1/2`.
    Unconditional,
    /// `theta < 1/2`.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds<T> {
    pub regime: Regime,
    /// Largest admissible decay exponent.
    pub alpha_max: T,
    /// `k_1..k_5`; `None` in the unconditional regime.
    pub k_limits: Option<[T; 5]>,
    /// `beta_1..beta_5` at the grid's time step; `None` when unconditional.
    pub betas: Option<[T; 5]>,
}

impl<T: Real> StabilityBounds<T> {
    /// Smallest time step limit and its 1-based index.
    pub fn min_limit(&self) -> Option<(usize, T)> {
        let limits = self.k_limits?;
        let mut best = (1, limits[0]);
        for (i, &k) in limits.iter().enumerate().skip(1) {
            if k < best.1 {
                best = (i + 1, k);
            }
        }
        Some(best)
    }
}

fn min_of<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().fold(T::infinity(), T::min)
}

/// `(theta^2 / 2) * min{nu, (c0 + wd)/2, (c1 + 3 wd)/2}` for `theta >= 1/2`.
pub fn alpha_bound<T: Real>(p: &ModelParams<T>) -> Result<T> {
    if !p.is_unconditional() {
        return Err(Error::Regime {
            required: "theta >= 1/2",
            theta: p.theta.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    let m = min_of(&[p.nu, (p.c0 + p.wd) * half, (p.c1 + T::lit(3.0) * p.wd) * half]);
    Ok(p.theta * p.theta * half * m)
}

/// Time step limits and energy coefficients for a state of max norm `w_inf`.
///
/// In the unconditional regime only `alpha_max` is filled in.
pub fn k_limits<T: Real>(p: &ModelParams<T>, grid: &GridSpec<T>, w_inf: T) -> StabilityBounds<T> {
    if p.is_unconditional() {
        return StabilityBounds {
            regime: Regime::Unconditional,
            alpha_max: alpha_bound(p).expect("unconditional regime"),
            k_limits: None,
            betas: None,
        };
    }
    let lit = T::lit;
    let h = grid.h;
    let k = grid.k;
    let ModelParams { nu, wd, c0, c1, theta } = *p;
    let gap = T::one() - lit(2.0) * theta;
    let w2 = w_inf * w_inf;
    let h2 = h * h;

    let limits = [
        lit(12.0) * nu * h2 / (gap * (lit(108.0) * nu * nu + lit(18.0) * h2 * wd * wd + lit(19.0) * h2 * w2)),
        h / (gap * lit(24.0) * (c0 + wd)),
        lit(9.0) * c0 * h / (gap * lit(32.0) * w2),
        h / (gap * lit(24.0) * (c1 + wd)),
        lit(9.0) * c1 * h / (gap * lit(32.0) * w2),
    ];
    let kg = k * gap;
    let betas = [
        lit(2.0) * nu - kg * (lit(18.0) * nu * nu / h2 + lit(3.0) * wd * wd + lit(19.0 / 6.0) * w2),
        (c0 + wd) - kg * lit(24.0) / h * (c0 + wd) * (c0 + wd),
        T::one() / (lit(3.0) * c0) - kg * lit(32.0) / (lit(27.0) * c0 * c0 * h) * w2,
        (c1 + wd) - kg * lit(24.0) / h * (c1 + wd) * (c1 + wd),
        T::one() / (lit(3.0) * c1) - kg * lit(32.0) / (lit(27.0) * c1 * c1 * h) * w2,
    ];
    let alpha_max = (theta * theta / lit(4.0) * min_of(&[betas[0], betas[1], betas[3]])).max(T::zero());
    StabilityBounds {
        regime: Regime::Conditional,
        alpha_max,
        k_limits: Some(limits),
        betas: Some(betas),
    }
}

/// Limits evaluated before a step from the known level, with the max norm
/// inflated by a safety factor of 2 to stand in for the unknown `W^{n+theta}`.
pub fn a_priori_limits<T: Real>(p: &ModelParams<T>, grid: &GridSpec<T>, w_n_inf: T) -> StabilityBounds<T> {
    k_limits(p, grid, T::lit(2.0) * w_n_inf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StepVerdict<T> {
    Satisfied {
        min_limit: T,
    },
    /// `k >= k_bound`, with `bound` the first offending index in `1..=5`.
    Violated {
        bound: usize,
        limit: T,
    },
    /// Unconditional regime, nothing to check.
    NotApplicable,
}

impl<T> StepVerdict<T> {
    pub fn is_violated(&self) -> bool {
        matches!(self, StepVerdict::Violated { .. })
    }
}

/// Verdict for the grid's step given the max norm reached at one level.
pub fn check_step_linf<T: Real>(p: &ModelParams<T>, grid: &GridSpec<T>, w_inf: T) -> StepVerdict<T> {
    let bounds = k_limits(p, grid, w_inf);
    let Some(limits) = bounds.k_limits else {
        return StepVerdict::NotApplicable;
    };
    match limits.iter().position(|&lim| !(grid.k < lim)) {
        Some(i) => StepVerdict::Violated {
            bound: i + 1,
            limit: limits[i],
        },
        None => StepVerdict::Satisfied {
            min_limit: bounds.min_limit().map(|b| b.1).unwrap_or(T::infinity()),
        },
    }
}

/// A-posteriori verdict using the max norm recorded at `level`.
pub fn check_step<T: Real>(p: &ModelParams<T>, grid: &GridSpec<T>, level: &LevelRecord<T>) -> StepVerdict<T> {
    check_step_linf(p, grid, level.linf)
}

fn beta_star_with_margin<T: Real>(p: &ModelParams<T>, k: T, alpha: T, margin: T) -> T {
    let two = T::lit(2.0);
    let decay = (-two * alpha * k).exp();
    let loss = (T::one() - decay) / k;
    let th2 = p.theta * p.theta;
    min_of(&[
        th2 * p.nu * decay - loss,
        decay * th2 * (p.c0 + p.wd - two * margin) / two - loss,
        decay * th2 * (p.c1 + T::lit(3.0) * p.wd - two * margin) / two - loss,
    ])
}

/// Coefficient of the dissipation sum in the weighted energy bound.
/// Diagnostic only; positive for small enough `k` when `alpha` is admissible.
pub fn beta_star<T: Real>(p: &ModelParams<T>, k: T, alpha: T) -> T {
    beta_star_with_margin(p, k, alpha, T::zero())
}

/// Same coefficient for the error equation. `c` is the unknown generic
/// constant subtracted from the boundary gains; callers pick it.
pub fn beta_star_error<T: Real>(p: &ModelParams<T>, k: T, alpha: T, c: T) -> T {
    beta_star_with_margin(p, k, alpha, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    /// Fitted rate in `||W^n|| ~ A exp(-alpha_hat t)`.
    pub alpha_hat: T,
    pub window: [T; 2],
    pub r_squared: T,
    pub points: usize,
}

/// Log-linear least squares over the last `window_fraction` of the levels.
pub fn fit_decay<T: Real>(traj: &RunTrajectory<T>, window_fraction: T) -> Result<DecayFit<T>> {
    fit_decay_series(&traj.l2_series(), window_fraction)
}

/// [`fit_decay`] on raw `(t, ||W||)` pairs.
pub fn fit_decay_series<T: Real>(series: &[(T, T)], window_fraction: T) -> Result<DecayFit<T>> {
    if !(window_fraction > T::zero() && window_fraction <= T::one()) {
        return Err(Error::InvalidParameter(
            "window_fraction",
            format!("need 0 < fraction <= 1, got {window_fraction}"),
        ));
    }
    let len = series.len();
    let take = (T::from_usize_lossy(len) * window_fraction)
        .ceil()
        .to_usize()
        .unwrap_or(len)
        .min(len);
    let pts: Vec<(T, T)> = series[len - take..]
        .iter()
        .filter(|(_, v)| *v > T::zero() && v.is_finite())
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} positive levels in the fit window, need 3",
            pts.len()
        )));
    }
    let count = T::from_usize_lossy(pts.len());
    let mean_t = pts.iter().fold(T::zero(), |a, p| a + p.0) / count;
    let mean_y = pts.iter().fold(T::zero(), |a, p| a + p.1) / count;
    let (mut stt, mut sty, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(t, y) in &pts {
        let dt = t - mean_t;
        let dy = y - mean_y;
        stt = stt + dt * dt;
        sty = sty + dt * dy;
        syy = syy + dy * dy;
    }
    if !(stt > T::zero()) {
        return Err(Error::InsufficientData("fit window spans no time".into()));
    }
    let slope = sty / stt;
    let ss_res = pts.iter().fold(T::zero(), |a, &(t, y)| {
        let r = y - (mean_y + slope * (t - mean_t));
        a + r * r
    });
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    Ok(DecayFit {
        alpha_hat: -slope,
        window: [pts[0].0, pts[pts.len() - 1].0],
        r_squared,
        points: pts.len(),
    })
}
