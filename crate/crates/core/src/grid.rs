//! Uniform space-time mesh, model constants and initial data.

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Uniform mesh on `[0, 1] x [0, T]`.
///
/// `h` and `k` are computed once at construction and every operator reads
/// them from here, so all stencils see the same rounding of `1/N` and `T/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    /// Number of spatial intervals; nodes are `0..=n`.
    pub n: usize,
    /// Number of time steps; levels are `0..=m`.
    pub m: usize,
    pub t_final: T,
    pub h: T,
    pub k: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: usize, m: usize, t_final: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("grid.N", format!("need N >= 2, got {n}")));
        }
        if m < 1 {
            return Err(Error::InvalidParameter("grid.M", format!("need M >= 1, got {m}")));
        }
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::InvalidParameter(
                "grid.T",
                format!("need finite T > 0, got {t_final}"),
            ));
        }
        Ok(Self {
            n,
            m,
            t_final,
            h: T::one() / T::from_usize_lossy(n),
            k: t_final / T::from_usize_lossy(m),
        })
    }

    /// Node count `N + 1`.
    #[inline]
    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.h
    }

    /// `t_n`, computed as `T * (n / M)` so that the last level is exactly `T`.
    #[inline]
    pub fn t(&self, level: usize) -> T {
        self.t_final * (T::from_usize_lossy(level) / T::from_usize_lossy(self.m))
    }

    /// Same spatial mesh, different number of time steps.
    pub fn with_steps(&self, m: usize) -> Result<Self> {
        Self::new(self.n, m, self.t_final)
    }
}

/// Free-function form of [`GridSpec::new`].
pub fn make_grid<T: Real>(n: usize, m: usize, t_final: T) -> Result<GridSpec<T>> {
    GridSpec::new(n, m, t_final)
}

/// Physical and control constants of the shifted problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Viscosity, `> 0`.
    pub nu: T,
    /// Constant target state `w_d >= 0`.
    pub wd: T,
    /// Feedback gain at `x = 0`, `> 0`.
    pub c0: T,
    /// Feedback gain at `x = 1`, `> 0`.
    pub c1: T,
    /// Time weight in `[0, 1]`.
    pub theta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(nu: T, wd: T, c0: T, c1: T, theta: T) -> Result<Self> {
        let p = Self { nu, wd, c0, c1, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let check = |ok: bool, name: &'static str, what: &str, v: T| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(name, format!("{what}, got {v}")))
            }
        };
        check(self.nu > zero, "params.nu", "need nu > 0", self.nu)?;
        check(self.wd >= zero, "params.wd", "need wd >= 0", self.wd)?;
        check(self.c0 > zero, "params.c0", "need c0 > 0", self.c0)?;
        check(self.c1 > zero, "params.c1", "need c1 > 0", self.c1)?;
        check(
            self.theta >= zero && self.theta <= T::one(),
            "params.theta",
            "need 0 <= theta <= 1",
            self.theta,
        )
    }

    pub fn with_theta(mut self, theta: T) -> Result<Self> {
        self.theta = theta;
        self.validate()?;
        Ok(self)
    }

    /// `theta >= 1/2`: the scheme is unconditionally stable.
    pub fn is_unconditional(&self) -> bool {
        self.theta >= T::lit(0.5)
    }
}

/// One time level of the grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField<T> {
    pub values: Vec<T>,
    pub time_index: usize,
}

impl<T: Real> StateField<T> {
    /// Rejects non-finite entries.
    pub fn new(values: Vec<T>, time_index: usize) -> Result<Self> {
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { values, time_index })
    }

    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.nodes()],
            time_index: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        self.values[self.values.len() - 1]
    }
}

/// Initial data `w_0 = y_0 - w_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition<T> {
    /// `5x(x - 1) - w_d`.
    Quadratic5,
    /// `2cos(pi x) - w_d`.
    Cosine2,
    /// Identically zero (the target state).
    Zero,
    /// Node values of `w_0` given directly; no shift is applied.
    Tabulated(Vec<T>),
}

impl<T> InitialCondition<T> {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::Quadratic5 => "quadratic5",
            InitialCondition::Cosine2 => "cosine2",
            InitialCondition::Zero => "zero",
            InitialCondition::Tabulated(_) => "tabulated",
        }
    }
}

pub fn sample_initial<T: Real>(
    ic: &InitialCondition<T>,
    grid: &GridSpec<T>,
    params: &ModelParams<T>,
) -> Result<StateField<T>> {
    let values: Vec<T> = match ic {
        InitialCondition::Quadratic5 => (0..grid.nodes())
            .map(|i| {
                let x = grid.x(i);
                T::lit(5.0) * x * (x - T::one()) - params.wd
            })
            .collect(),
        InitialCondition::Cosine2 => (0..grid.nodes())
            .map(|i| T::lit(2.0) * (T::PI() * grid.x(i)).cos() - params.wd)
            .collect(),
        InitialCondition::Zero => vec![T::zero(); grid.nodes()],
        InitialCondition::Tabulated(v) => {
            if v.len() != grid.nodes() {
                return Err(Error::LengthMismatch {
                    expected: grid.nodes(),
                    got: v.len(),
                });
            }
            v.clone()
        }
    };
    StateField::new(values, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(wd: f64) -> ModelParams<f64> {
        ModelParams::new(1.0, wd, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_steps() {
        let g = make_grid(4, 10, 1.0).unwrap();
        assert_eq!(g.h, 0.25);
        assert_relative_eq!(g.k, 0.1);

        let g = make_grid(100, 10_000, 1.0).unwrap();
        assert_relative_eq!(g.h, 0.01);
        assert_relative_eq!(g.k, 1e-4);

        let g = make_grid(2, 1, 0.5).unwrap();
        assert_eq!((g.h, g.k), (0.5, 0.5));
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(
            make_grid(1, 10, 1.0),
            Err(Error::InvalidParameter("grid.N", _))
        ));
        assert!(matches!(
            make_grid(4, 0, 1.0),
            Err(Error::InvalidParameter("grid.M", _))
        ));
        assert!(make_grid(4, 10, 0.0).is_err());
        assert!(make_grid(4, 10, -1.0).is_err());
        assert!(make_grid(4, 10, f64::NAN).is_err());
    }

    #[test]
    fn mesh_endpoints() {
        for n in [2, 3, 7, 40, 6120] {
            let g = make_grid(n, 3, 1.0_f64).unwrap();
            assert_eq!(g.x(0), 0.0);
            assert!((g.x(n) - 1.0).abs() <= f64::EPSILON);
            assert!((g.h * n as f64 - 1.0).abs() <= f64::EPSILON);
        }
        let g = make_grid(10, 3, 0.3_f64).unwrap();
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.t(3), 0.3);
        assert!((g.k * 3.0 - 0.3).abs() <= 0.3 * f64::EPSILON);
    }

    #[test]
    fn params_validation_names_field() {
        let err = ModelParams::new(1.0, 5.0, 1.0, 1.0, 1.5).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter("params.theta", _)));
        assert!(ModelParams::new(0.0, 5.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, -2.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn quadratic_initial_values() {
        let g = make_grid(2, 1, 1.0).unwrap();
        let w = sample_initial(&InitialCondition::Quadratic5, &g, &params(5.0)).unwrap();
        assert_eq!(w.values[0], -5.0);
        assert_eq!(w.values[1], -6.25);
        assert_eq!(w.time_index, 0);
    }

    #[test]
    fn cosine_initial_values() {
        let g = make_grid(4, 1, 1.0).unwrap();
        let w = sample_initial(&InitialCondition::Cosine2, &g, &params(3.0)).unwrap();
        assert_eq!(w.values[0], -1.0);
        assert_relative_eq!(w.values[4], -5.0);
        assert_relative_eq!(w.values[2], -3.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_is_symmetric_and_deterministic() {
        for n in [2, 5, 17, 64, 101] {
            let g = make_grid(n, 1, 1.0).unwrap();
            let a = sample_initial(&InitialCondition::Quadratic5, &g, &params(5.0)).unwrap();
            let b = sample_initial(&InitialCondition::Quadratic5, &g, &params(5.0)).unwrap();
            for i in 0..=n {
                assert_relative_eq!(a.values[i], a.values[n - i], max_relative = 1e-14);
                assert_eq!(a.values[i].to_bits(), b.values[i].to_bits());
            }
        }
    }

    #[test]
    fn tabulated_length_checked() {
        let g = make_grid(4, 1, 1.0).unwrap();
        let ic = InitialCondition::Tabulated(vec![0.0; 4]);
        assert_eq!(
            sample_initial(&ic, &g, &params(0.0)).unwrap_err(),
            Error::LengthMismatch { expected: 5, got: 4 }
        );
        let ic = InitialCondition::Tabulated(vec![1.0; 5]);
        assert_eq!(sample_initial(&ic, &g, &params(2.0)).unwrap().values, vec![1.0; 5]);
    }

    #[test]
    fn works_in_single_precision() {
        let g = make_grid::<f32>(4, 2, 1.0).unwrap();
        let p = ModelParams::<f32>::new(1.0, 5.0, 1.0, 1.0, 1.0).unwrap();
        let w = sample_initial(&InitialCondition::Quadratic5, &g, &p).unwrap();
        assert_eq!(w.values[0], -5.0f32);
    }
}
