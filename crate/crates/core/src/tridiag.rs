//! Tridiagonal storage and the Thomas algorithm.

use crate::{Error, Real, Result};

/// Pivots smaller than this in magnitude are treated as zero.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Square tridiagonal matrix stored by diagonals.
///
/// Row `i` holds `lower[i]` at column `i-1`, `diag[i]` at column `i` and
/// `upper[i]` at column `i+1`; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
        }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Dense entry `(i, j)`; zero off the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.lower[i]
        } else if i + 1 == j {
            self.upper[i]
        } else {
            T::zero()
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s = s + self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = rhs`, overwriting `rhs` with `x`. No pivoting.
    pub fn solve_in_place(&self, rhs: &mut [T], scratch: &mut Vec<T>) -> Result<()> {
        let n = self.size();
        if rhs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let floor = T::lit(PIVOT_FLOOR);
        scratch.clear();
        scratch.resize(n, T::zero());

        let mut pivot = self.diag[0];
        if !(pivot.abs() >= floor) {
            return Err(Error::SingularTridiagonal { row: 0 });
        }
        scratch[0] = if n > 1 { self.upper[0] / pivot } else { T::zero() };
        rhs[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * scratch[i - 1];
            if !(pivot.abs() >= floor) {
                return Err(Error::SingularTridiagonal { row: i });
            }
            if i + 1 < n {
                scratch[i] = self.upper[i] / pivot;
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - scratch[i] * rhs[i + 1];
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let mut x = rhs.to_vec();
        let mut scratch = Vec::with_capacity(rhs.len());
        self.solve_in_place(&mut x, &mut scratch)?;
        Ok(x)
    }
}
