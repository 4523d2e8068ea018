//! Truncation error of the scheme on a smooth manufactured field.
//!
//! The exact field is sampled at two consecutive levels and fed to the
//! scheme rows with the exact boundary flux prescribed; subtracting the
//! continuous operator at `(x_i, t_n + theta k)` leaves the local truncation
//! error.

use serde::{Deserialize, Serialize};

use crate::analysis::observed_order;
use crate::grid::{GridSpec, ModelParams};
use crate::stepper::{BoundaryMode, Scheme};
use crate::{Error, Real, Result};

/// A smooth field with the derivatives the continuous operator needs.
pub trait ManufacturedField<T: Real> {
    fn w(&self, x: T, t: T) -> T;
    fn w_t(&self, x: T, t: T) -> T;
    fn w_x(&self, x: T, t: T) -> T;
    fn w_xx(&self, x: T, t: T) -> T;
}

/// `w = e^{-t} (x^3/3 - x^2/2)`, which has `w_x = 0` at both ends.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicDecay;

impl<T: Real> ManufacturedField<T> for CubicDecay {
    fn w(&self, x: T, t: T) -> T {
        (-t).exp() * (x * x * x / T::lit(3.0) - x * x / T::lit(2.0))
    }
    fn w_t(&self, x: T, t: T) -> T {
        -self.w(x, t)
    }
    fn w_x(&self, x: T, t: T) -> T {
        (-t).exp() * (x * x - x)
    }
    fn w_xx(&self, x: T, t: T) -> T {
        (-t).exp() * (x + x - T::one())
    }
}

/// `w_t - nu w_xx + w_d w_x + w w_x`.
pub fn continuous_operator<T: Real, F: ManufacturedField<T>>(f: &F, p: &ModelParams<T>, x: T, t: T) -> T {
    let w = f.w(x, t);
    let wx = f.w_x(x, t);
    f.w_t(x, t) - p.nu * f.w_xx(x, t) + (p.wd + w) * wx
}

/// Truncation error at every node for the step from level `level` to
/// `level + 1`.
pub fn truncation_error<T: Real, F: ManufacturedField<T>>(
    f: &F,
    grid: &GridSpec<T>,
    p: &ModelParams<T>,
    level: usize,
) -> Result<Vec<T>> {
    if level >= grid.m {
        return Err(Error::IndexOutOfRange {
            index: level,
            lo: 0,
            hi: grid.m - 1,
        });
    }
    let (t0, t1) = (grid.t(level), grid.t(level + 1));
    let t_theta = t0 + p.theta * grid.k;
    let sample = |t: T| (0..grid.nodes()).map(|i| f.w(grid.x(i), t)).collect::<Vec<T>>();
    let scheme = Scheme::new(*grid, *p)?.with_boundary(BoundaryMode::Prescribed {
        g0: f.w_x(T::zero(), t_theta),
        gn: f.w_x(T::one(), t_theta),
    });
    let mut tau = scheme.residual(&sample(t1), &sample(t0))?;
    for (i, r) in tau.iter_mut().enumerate() {
        *r = *r - continuous_operator(f, p, grid.x(i), t_theta);
    }
    Ok(tau)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow<T> {
    pub n: usize,
    pub m: usize,
    pub interior: T,
    pub boundary: T,
    pub order_interior: Option<T>,
    pub order_boundary: Option<T>,
}

/// Max interior and boundary truncation error at the level nearest `t_eval`
/// for each `(N, M)`, with orders between successive entries.
pub fn truncation_study<T: Real, F: ManufacturedField<T>>(
    f: &F,
    p: &ModelParams<T>,
    t_final: T,
    t_eval: T,
    meshes: &[(usize, usize)],
) -> Result<Vec<TruncationRow<T>>> {
    let mut rows: Vec<TruncationRow<T>> = Vec::with_capacity(meshes.len());
    for &(n, m) in meshes {
        let grid = GridSpec::new(n, m, t_final)?;
        let level = ((t_eval / grid.k).to_f64_lossy().round() as usize).min(m - 1);
        let tau = truncation_error(f, &grid, p, level)?;
        let interior = tau[1..n].iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let boundary = tau[0].abs().max(tau[n].abs());
        let (order_interior, order_boundary) = match rows.last() {
            Some(prev) => (
                observed_order(prev.interior, interior),
                observed_order(prev.boundary, boundary),
            ),
            None => (None, None),
        };
        rows.push(TruncationRow {
            n,
            m,
            interior,
            boundary,
            order_interior,
            order_boundary,
        });
    }
    Ok(rows)
}
