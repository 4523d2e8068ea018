//! Difference operators, the skew-symmetric convection term, the boundary
//! feedback laws and the discrete inner products.
//!
//! Everything works on plain slices `w[0..=N]` plus the mesh width `h`.
//! The checked functions validate indices; the `raw` submodule holds the
//! unchecked stencils the stepper uses in its inner loops.

use serde::{Deserialize, Serialize};

use crate::grid::ModelParams;
use crate::{Error, Real, Result};

/// Which end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Left,
    Right,
}

pub(crate) mod raw {
    use crate::Real;

    #[inline(always)]
    pub fn dx_forward<T: Real>(w: &[T], h: T, i: usize) -> T {
        (w[i + 1] - w[i]) / h
    }

    #[inline(always)]
    pub fn dx_backward<T: Real>(w: &[T], h: T, i: usize) -> T {
        (w[i] - w[i - 1]) / h
    }

    #[inline(always)]
    pub fn dx_central<T: Real>(w: &[T], h: T, i: usize) -> T {
        (w[i + 1] - w[i - 1]) / (h + h)
    }

    #[inline(always)]
    pub fn dx2_interior<T: Real>(w: &[T], h: T, i: usize) -> T {
        (w[i + 1] - (w[i] + w[i]) + w[i - 1]) / (h * h)
    }

    #[inline(always)]
    pub fn phi<T: Real>(w: &[T], h: T, i: usize) -> T {
        let third = T::one() / T::lit(3.0);
        let n = w.len() - 1;
        if i == 0 {
            third * (w[0] + w[0] + w[1]) * dx_forward(w, h, 0)
        } else if i == n {
            third * (w[n] + w[n] + w[n - 1]) * dx_backward(w, h, n)
        } else {
            third * (w[i - 1] + w[i] + w[i + 1]) * dx_central(w, h, i)
        }
    }
}

fn check_index(i: usize, lo: usize, hi: usize) -> Result<()> {
    if i < lo || i > hi || hi < lo {
        Err(Error::IndexOutOfRange { index: i, lo, hi })
    } else {
        Ok(())
    }
}

fn check_len<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        })
    } else {
        Ok(())
    }
}

/// `(W[i+1] - W[i]) / h` for `0 <= i <= N-1`.
pub fn dx_forward<T: Real>(w: &[T], h: T, i: usize) -> Result<T> {
    check_index(i, 0, w.len().saturating_sub(2))?;
    if w.len() < 2 {
        return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: 0 });
    }
    Ok(raw::dx_forward(w, h, i))
}

/// `(W[i] - W[i-1]) / h` for `1 <= i <= N`.
pub fn dx_backward<T: Real>(w: &[T], h: T, i: usize) -> Result<T> {
    check_index(i, 1, w.len().saturating_sub(1))?;
    Ok(raw::dx_backward(w, h, i))
}

/// `(W[i+1] - W[i-1]) / 2h` for `1 <= i <= N-1`.
pub fn dx_central<T: Real>(w: &[T], h: T, i: usize) -> Result<T> {
    check_index(i, 1, w.len().saturating_sub(2))?;
    Ok(raw::dx_central(w, h, i))
}

/// `(W[i+1] - 2W[i] + W[i-1]) / h^2` for `1 <= i <= N-1`.
pub fn dx2_interior<T: Real>(w: &[T], h: T, i: usize) -> Result<T> {
    check_index(i, 1, w.len().saturating_sub(2))?;
    Ok(raw::dx2_interior(w, h, i))
}

/// Pointwise `theta * W^{n+1} + (1 - theta) * W^n`.
pub fn theta_combine<T: Real>(wn: &[T], wnp1: &[T], theta: T) -> Result<Vec<T>> {
    check_len(wn, wnp1)?;
    let mut out = vec![T::zero(); wn.len()];
    theta_combine_into(wn, wnp1, theta, &mut out);
    Ok(out)
}

#[inline]
pub(crate) fn theta_combine_into<T: Real>(wn: &[T], wnp1: &[T], theta: T, out: &mut [T]) {
    let rest = T::one() - theta;
    for ((z, &a), &b) in out.iter_mut().zip(wn).zip(wnp1) {
        *z = theta * b + rest * a;
    }
}

/// Convection term at node `i`: `(1/3)(sum of the three stencil values)`
/// times the local first difference, with one-sided forms at the ends.
pub fn phi<T: Real>(w: &[T], h: T, i: usize) -> Result<T> {
    if w.len() < 2 {
        return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: 0 });
    }
    check_index(i, 0, w.len() - 1)?;
    Ok(raw::phi(w, h, i))
}

/// [`phi`] at every node.
pub fn phi_field<T: Real>(w: &[T], h: T) -> Vec<T> {
    (0..w.len()).map(|i| raw::phi(w, h, i)).collect()
}

/// Feedback flux at `x = 0`: `(1/nu)((c0 + wd) W0 + 2/(9 c0) W0^3)`.
#[inline]
pub fn g0_eval<T: Real>(w0: T, p: &ModelParams<T>) -> T {
    ((p.c0 + p.wd) * w0 + T::lit(2.0) / (T::lit(9.0) * p.c0) * w0 * w0 * w0) / p.nu
}

/// Feedback flux at `x = 1`: `-(1/nu)((c1 + wd) WN + 2/(9 c1) WN^3)`.
#[inline]
pub fn gn_eval<T: Real>(wn: T, p: &ModelParams<T>) -> T {
    -((p.c1 + p.wd) * wn + T::lit(2.0) / (T::lit(9.0) * p.c1) * wn * wn * wn) / p.nu
}

#[inline]
pub fn g0_prime<T: Real>(w0: T, p: &ModelParams<T>) -> T {
    (p.c0 + p.wd + T::lit(2.0) / (T::lit(3.0) * p.c0) * w0 * w0) / p.nu
}

#[inline]
pub fn gn_prime<T: Real>(wn: T, p: &ModelParams<T>) -> T {
    -(p.c1 + p.wd + T::lit(2.0) / (T::lit(3.0) * p.c1) * wn * wn) / p.nu
}

/// Controller values at both ends of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryControllerEval<T> {
    pub g0: T,
    pub gn: T,
}

impl<T: Real> BoundaryControllerEval<T> {
    pub fn of(w: &[T], p: &ModelParams<T>) -> Self {
        Self {
            g0: g0_eval(w[0], p),
            gn: gn_eval(w[w.len() - 1], p),
        }
    }
}

/// Second difference at an end node, closed with the feedback flux.
///
/// Left: `(2/h)(dx+ W0 - g0(W0))`; right: `(2/h)(-dx- WN + gN(WN))`.
pub fn dx2_boundary<T: Real>(w: &[T], h: T, p: &ModelParams<T>, end: End) -> Result<T> {
    if w.len() < 2 {
        return Err(Error::LengthMismatch {
            expected: 2,
            got: w.len(),
        });
    }
    let two_over_h = T::lit(2.0) / h;
    let n = w.len() - 1;
    Ok(match end {
        End::Left => two_over_h * (raw::dx_forward(w, h, 0) - g0_eval(w[0], p)),
        End::Right => two_over_h * (-raw::dx_backward(w, h, n) + gn_eval(w[n], p)),
    })
}

/// Trapezoidal inner product `(W, V)`.
pub fn inner_l2<T: Real>(w: &[T], v: &[T], h: T) -> Result<T> {
    check_len(w, v)?;
    Ok(inner_l2_raw(w, v, h))
}

pub(crate) fn inner_l2_raw<T: Real>(w: &[T], v: &[T], h: T) -> T {
    let n = w.len() - 1;
    let half = T::lit(0.5);
    let interior = w[1..n]
        .iter()
        .zip(&v[1..n])
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    h * (half * w[0] * v[0] + interior + half * w[n] * v[n])
}

/// `(W, V)_h = h * sum_{i=1..N} W_i V_i`.
pub fn inner_h<T: Real>(w: &[T], v: &[T], h: T) -> Result<T> {
    check_len(w, v)?;
    Ok(h * w[1..].iter().zip(&v[1..]).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
}

/// `||dx- W||_h^2`.
pub fn h1_semi_sq<T: Real>(w: &[T], h: T) -> T {
    let s = w
        .windows(2)
        .fold(T::zero(), |acc, p| acc + (p[1] - p[0]) * (p[1] - p[0]));
    s / h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport<T> {
    /// `||W||` from the trapezoidal product.
    pub l2: T,
    /// `||W||_h` over nodes `1..=N`.
    pub lh: T,
    pub linf: T,
    /// `||dx- W||_h`.
    pub h1_semi: T,
}

pub fn norms<T: Real>(w: &[T], h: T) -> NormReport<T> {
    let lh_sq = h * w[1..].iter().fold(T::zero(), |acc, &a| acc + a * a);
    NormReport {
        l2: inner_l2_raw(w, w, h).sqrt(),
        lh: lh_sq.sqrt(),
        linf: linf(w),
        h1_semi: h1_semi_sq(w, h).sqrt(),
    }
}

#[inline]
pub fn linf<T: Real>(w: &[T]) -> T {
    w.iter().fold(T::zero(), |m, &a| m.max(a.abs()))
}

/// `||dx- W||_h^2 + W0^2 + WN^2 + W0^4 + WN^4`.
///
/// Not homogeneous, so not a norm; reported as a diagnostic only.
pub fn energy_one_sq<T: Real>(w: &[T], h: T) -> T {
    let a = w[0] * w[0];
    let b = w[w.len() - 1] * w[w.len() - 1];
    h1_semi_sq(w, h) + a + b + a * a + b * b
}
