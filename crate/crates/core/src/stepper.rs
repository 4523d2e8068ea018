//! Time stepping for the theta-scheme.
//!
//! The unknown of each implicit step is `W^{n+1}` itself. For `theta > 0`
//! the nonlinear system is solved by Newton's method with a tridiagonal
//! Jacobian, starting from `W^n`; `theta = 0` is the explicit update.

use serde::{Deserialize, Serialize};

use crate::grid::{sample_initial, GridSpec, InitialCondition, ModelParams, StateField};
use crate::operators::{self, g0_eval, g0_prime, gn_eval, gn_prime, raw};
use crate::stability::{self, StepVerdict};
use crate::tridiag::Tridiagonal;
use crate::{Error, Real, Result};

/// A run aborts once the max norm exceeds this.
pub const BLOWUP_LINF: f64 = 1e8;

/// How the boundary flux `w_x` is supplied to the end rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryMode<T> {
    /// Nonlinear feedback laws evaluated at the current boundary state.
    Feedback,
    /// Zero Neumann data.
    Uncontrolled,
    /// Fixed flux values, bypassing the controllers.
    Prescribed { g0: T, gn: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig<T> {
    /// Stop once `||F||_inf <= tol` or `||dW||_inf <= tol`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonStats<T> {
    /// Linear solves performed.
    pub iterations: usize,
    pub final_residual_inf: T,
    /// Size of the last Newton update (zero when no update was needed).
    pub final_step_inf: T,
    pub converged: bool,
}

impl<T: Real> NewtonStats<T> {
    fn trivial() -> Self {
        Self {
            iterations: 0,
            final_residual_inf: T::zero(),
            final_step_inf: T::zero(),
            converged: true,
        }
    }
}

/// What to keep of the space-time field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum HistoryMode {
    #[default]
    None,
    Full,
    /// Every `s`-th node only (`s = 2` keeps exactly the nodes of the mesh
    /// with half as many intervals).
    Strided(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions<T> {
    pub newton: NewtonConfig<T>,
    pub history: HistoryMode,
    /// Record a-posteriori time step verdicts (conditional regime only).
    pub monitors: bool,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            newton: NewtonConfig::default(),
            history: HistoryMode::None,
            monitors: false,
        }
    }
}

/// Scalars recorded at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord<T> {
    pub n: usize,
    pub t: T,
    pub l2: T,
    pub h1_semi: T,
    pub linf: T,
    pub w0: T,
    pub wn: T,
    /// Boundary flux applied at this state (zero when uncontrolled).
    pub g0: T,
    pub gn: T,
    /// Stats of the step that produced this level; trivial at level 0.
    pub newton: NewtonStats<T>,
    pub verdict: Option<StepVerdict<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History<T> {
    pub node_stride: usize,
    /// One entry per recorded level, nodes `0, s, 2s, ..`.
    pub levels: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrajectory<T> {
    pub grid: GridSpec<T>,
    pub params: ModelParams<T>,
    pub boundary: BoundaryMode<T>,
    pub newton: NewtonConfig<T>,
    pub records: Vec<LevelRecord<T>>,
    pub final_state: StateField<T>,
    pub history: Option<History<T>>,
}

impl<T: Real> RunTrajectory<T> {
    pub fn is_complete(&self) -> bool {
        self.records.len() == self.grid.m + 1
    }

    pub fn l2_series(&self) -> Vec<(T, T)> {
        self.records.iter().map(|r| (r.t, r.l2)).collect()
    }
}

/// A run that stopped early. The partial trajectory covers every level
/// computed before the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure<T: Real> {
    pub error: Error,
    pub partial: RunTrajectory<T>,
}

/// Scratch buffers reused across Newton iterations.
struct Workspace<T> {
    z: Vec<T>,
    f: Vec<T>,
    jac: Tridiagonal<T>,
    scratch: Vec<T>,
}

impl<T: Real> Workspace<T> {
    fn new(nodes: usize) -> Self {
        Self {
            z: vec![T::zero(); nodes],
            f: vec![T::zero(); nodes],
            jac: Tridiagonal::zeros(nodes),
            scratch: Vec::with_capacity(nodes),
        }
    }
}

/// Theta-scheme on a fixed mesh with fixed constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme<T> {
    pub grid: GridSpec<T>,
    pub params: ModelParams<T>,
    pub boundary: BoundaryMode<T>,
}

impl<T: Real> Scheme<T> {
    pub fn new(grid: GridSpec<T>, params: ModelParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid,
            params,
            boundary: BoundaryMode::Feedback,
        })
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode<T>) -> Self {
        self.boundary = boundary;
        self
    }

    /// Flux values `(g0, gN)` applied at boundary states `z0`, `zn`.
    #[inline]
    pub fn flux(&self, z0: T, zn: T) -> (T, T) {
        match self.boundary {
            BoundaryMode::Feedback => (g0_eval(z0, &self.params), gn_eval(zn, &self.params)),
            BoundaryMode::Uncontrolled => (T::zero(), T::zero()),
            BoundaryMode::Prescribed { g0, gn } => (g0, gn),
        }
    }

    #[inline]
    fn flux_slope(&self, z0: T, zn: T) -> (T, T) {
        match self.boundary {
            BoundaryMode::Feedback => (g0_prime(z0, &self.params), gn_prime(zn, &self.params)),
            _ => (T::zero(), T::zero()),
        }
    }

    fn check_len(&self, w: &[T]) -> Result<()> {
        if w.len() != self.grid.nodes() {
            return Err(Error::LengthMismatch {
                expected: self.grid.nodes(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Spatial part of every row evaluated at `z`:
    /// diffusion with the flux closure, `w_d` transport and convection.
    pub fn spatial_operator(&self, z: &[T]) -> Result<Vec<T>> {
        self.check_len(z)?;
        let mut out = vec![T::zero(); z.len()];
        self.spatial_operator_into(z, &mut out);
        Ok(out)
    }

    fn spatial_operator_into(&self, z: &[T], out: &mut [T]) {
        let n = self.grid.n;
        let h = self.grid.h;
        let ModelParams { nu, wd, .. } = self.params;
        let two_nu_h2 = (nu + nu) / (h * h);
        let (g0, gn) = self.flux(z[0], z[n]);

        out[0] = -two_nu_h2 * (z[1] - z[0] - h * g0) + wd * raw::dx_forward(z, h, 0) + raw::phi(z, h, 0);
        for i in 1..n {
            out[i] = -nu * raw::dx2_interior(z, h, i) + wd * raw::dx_central(z, h, i) + raw::phi(z, h, i);
        }
        out[n] = -two_nu_h2 * (z[n - 1] - z[n] + h * gn) + wd * raw::dx_backward(z, h, n) + raw::phi(z, h, n);
    }

    /// Scheme rows `F_i` at a candidate next level.
    pub fn residual(&self, w_next: &[T], w_n: &[T]) -> Result<Vec<T>> {
        self.check_len(w_next)?;
        self.check_len(w_n)?;
        if let Some(node) = w_next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        let mut ws = Workspace::new(w_n.len());
        self.residual_into(w_next, w_n, &mut ws);
        Ok(ws.f)
    }

    fn residual_into(&self, w_next: &[T], w_n: &[T], ws: &mut Workspace<T>) {
        operators::theta_combine_into(w_n, w_next, self.params.theta, &mut ws.z);
        self.spatial_operator_into(&ws.z, &mut ws.f);
        let inv_k = T::one() / self.grid.k;
        for ((f, &a), &b) in ws.f.iter_mut().zip(w_next).zip(w_n) {
            *f = *f + (a - b) * inv_k;
        }
    }

    /// `dF_i / dW^{n+1}_j`; only defined for `theta > 0`.
    pub fn jacobian(&self, w_next: &[T], w_n: &[T]) -> Result<Tridiagonal<T>> {
        self.check_len(w_next)?;
        self.check_len(w_n)?;
        self.require_implicit()?;
        let mut ws = Workspace::new(w_n.len());
        operators::theta_combine_into(w_n, w_next, self.params.theta, &mut ws.z);
        self.jacobian_into(&mut ws);
        Ok(ws.jac)
    }

    fn require_implicit(&self) -> Result<()> {
        if self.params.theta > T::zero() {
            Ok(())
        } else {
            Err(Error::Regime {
                required: "theta > 0",
                theta: self.params.theta.to_f64_lossy(),
            })
        }
    }

    /// Fills `ws.jac` assuming `ws.z` holds the theta-combined state.
    fn jacobian_into(&self, ws: &mut Workspace<T>) {
        let z = &ws.z;
        let jac = &mut ws.jac;
        let n = self.grid.n;
        let h = self.grid.h;
        let ModelParams { nu, wd, theta, .. } = self.params;
        let third = T::one() / T::lit(3.0);
        let two = T::lit(2.0);
        let nu_h2 = nu / (h * h);
        let two_nu_h2 = two * nu_h2;
        let inv_k = T::one() / self.grid.k;
        let (s0, sn) = self.flux_slope(z[0], z[n]);

        // row 0
        let d0 = (z[1] - z[0]) / h;
        let p0 = two * z[0] + z[1];
        let dz0 = two_nu_h2 * (T::one() + h * s0) - wd / h + third * (two * d0 - p0 / h);
        let dz1 = -two_nu_h2 + wd / h + third * (d0 + p0 / h);
        jac.lower[0] = T::zero();
        jac.diag[0] = inv_k + theta * dz0;
        jac.upper[0] = theta * dz1;

        let half_h = T::one() / (h + h);
        for i in 1..n {
            let s = z[i - 1] + z[i] + z[i + 1];
            let d = (z[i + 1] - z[i - 1]) * half_h;
            jac.lower[i] = theta * (-nu_h2 - wd * half_h + third * (d - s * half_h));
            jac.diag[i] = inv_k + theta * (two_nu_h2 + third * d);
            jac.upper[i] = theta * (-nu_h2 + wd * half_h + third * (d + s * half_h));
        }

        // row N
        let dn = (z[n] - z[n - 1]) / h;
        let pn = two * z[n] + z[n - 1];
        let dzn = two_nu_h2 * (T::one() - h * sn) + wd / h + third * (two * dn + pn / h);
        let dzm = -two_nu_h2 - wd / h + third * (dn - pn / h);
        jac.lower[n] = theta * dzm;
        jac.diag[n] = inv_k + theta * dzn;
        jac.upper[n] = T::zero();
    }

    /// One implicit step by Newton's method from the guess `W^n`.
    pub fn newton_step(&self, w_n: &[T], cfg: &NewtonConfig<T>) -> Result<(Vec<T>, NewtonStats<T>)> {
        self.check_len(w_n)?;
        self.require_implicit()?;
        if !(cfg.tol > T::zero()) {
            return Err(Error::InvalidParameter(
                "newton.tol",
                format!("need tol > 0, got {}", cfg.tol),
            ));
        }
        let mut ws = Workspace::new(w_n.len());
        let mut w = w_n.to_vec();
        let stats = self.newton_solve(&mut w, w_n, cfg, &mut ws, 0)?;
        Ok((w, stats))
    }

    fn newton_solve(
        &self,
        w: &mut [T],
        w_n: &[T],
        cfg: &NewtonConfig<T>,
        ws: &mut Workspace<T>,
        level: usize,
    ) -> Result<NewtonStats<T>> {
        let mut step_inf = T::zero();
        let mut iterations = 0;
        loop {
            self.residual_into(w, w_n, ws);
            let res_inf = operators::linf(&ws.f);
            if !res_inf.is_finite() {
                return Err(Error::NonConvergence {
                    level,
                    iterations,
                    residual: f64::INFINITY,
                });
            }
            let step_small = iterations > 0 && step_inf <= cfg.tol;
            if res_inf <= cfg.tol || step_small {
                return Ok(NewtonStats {
                    iterations,
                    final_residual_inf: res_inf,
                    final_step_inf: step_inf,
                    converged: true,
                });
            }
            if iterations == cfg.max_iter {
                return Err(Error::NonConvergence {
                    level,
                    iterations,
                    residual: res_inf.to_f64_lossy(),
                });
            }
            // ws.z still holds theta-combined state of w
            self.jacobian_into(ws);
            for f in ws.f.iter_mut() {
                *f = -*f;
            }
            ws.jac.solve_in_place(&mut ws.f, &mut ws.scratch)?;
            step_inf = operators::linf(&ws.f);
            for (a, &d) in w.iter_mut().zip(&ws.f) {
                *a = *a + d;
            }
            iterations += 1;
        }
    }

    /// Explicit update, `theta = 0` only.
    pub fn explicit_step(&self, w_n: &[T]) -> Result<Vec<T>> {
        self.check_len(w_n)?;
        if self.params.theta != T::zero() {
            return Err(Error::Regime {
                required: "theta = 0",
                theta: self.params.theta.to_f64_lossy(),
            });
        }
        let mut out = vec![T::zero(); w_n.len()];
        self.explicit_into(w_n, &mut out);
        if let Some(node) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(out)
    }

    fn explicit_into(&self, w_n: &[T], out: &mut [T]) {
        self.spatial_operator_into(w_n, out);
        let k = self.grid.k;
        for (o, &w) in out.iter_mut().zip(w_n) {
            *o = w - k * *o;
        }
    }

    fn record(&self, n: usize, w: &[T], newton: NewtonStats<T>) -> LevelRecord<T> {
        let norms = operators::norms(w, self.grid.h);
        let last = w.len() - 1;
        let (g0, gn) = self.flux(w[0], w[last]);
        LevelRecord {
            n,
            t: self.grid.t(n),
            l2: norms.l2,
            h1_semi: norms.h1_semi,
            linf: norms.linf,
            w0: w[0],
            wn: w[last],
            g0,
            gn,
            newton,
            verdict: None,
        }
    }

    /// Advances the initial data through all `M` steps.
    pub fn run(
        &self,
        ic: &InitialCondition<T>,
        opts: &RunOptions<T>,
    ) -> std::result::Result<RunTrajectory<T>, RunFailure<T>> {
        let fail_early = |error: Error| RunFailure {
            error,
            partial: RunTrajectory {
                grid: self.grid,
                params: self.params,
                boundary: self.boundary,
                newton: opts.newton,
                records: Vec::new(),
                final_state: StateField {
                    values: Vec::new(),
                    time_index: 0,
                },
                history: None,
            },
        };
        let w0 = sample_initial(ic, &self.grid, &self.params).map_err(fail_early)?;
        self.run_from(w0.values, opts)
    }

    /// Like [`Scheme::run`] but from explicit node values at level 0.
    pub fn run_from(
        &self,
        initial: Vec<T>,
        opts: &RunOptions<T>,
    ) -> std::result::Result<RunTrajectory<T>, RunFailure<T>> {
        let m = self.grid.m;
        let node_stride = match opts.history {
            HistoryMode::None => 0,
            HistoryMode::Full => 1,
            HistoryMode::Strided(s) => s.max(1),
        };
        let mut traj = RunTrajectory {
            grid: self.grid,
            params: self.params,
            boundary: self.boundary,
            newton: opts.newton,
            records: Vec::with_capacity(m + 1),
            final_state: StateField {
                values: Vec::new(),
                time_index: 0,
            },
            history: (node_stride > 0).then(|| History {
                node_stride,
                levels: Vec::with_capacity(m + 1),
            }),
        };
        let store = |traj: &mut RunTrajectory<T>, w: &[T]| {
            if let Some(hist) = traj.history.as_mut() {
                hist.levels.push(w.iter().step_by(hist.node_stride).copied().collect());
            }
        };

        let mut w = initial;
        let finish = |traj: &mut RunTrajectory<T>, w: &[T], n: usize| {
            traj.final_state = StateField {
                values: w.to_vec(),
                time_index: n,
            };
        };
        if let Err(error) = self
            .check_len(&w)
            .and_then(|_| match w.iter().position(|v| !v.is_finite()) {
                Some(node) => Err(Error::NonFinite { node }),
                None => Ok(()),
            })
        {
            return Err(RunFailure { error, partial: traj });
        }

        traj.records.push(self.record(0, &w, NewtonStats::trivial()));
        store(&mut traj, &w);

        let explicit = self.params.theta == T::zero();
        let conditional = !self.params.is_unconditional();
        let mut ws = Workspace::new(w.len());
        let mut w_prev = w.clone();
        let blowup = T::lit(BLOWUP_LINF);

        for n in 0..m {
            w_prev.copy_from_slice(&w);
            let stats = if explicit {
                self.explicit_into(&w_prev, &mut w);
                NewtonStats::trivial()
            } else {
                match self.newton_solve(&mut w, &w_prev, &opts.newton, &mut ws, n + 1) {
                    Ok(s) => s,
                    Err(error) => {
                        finish(&mut traj, &w_prev, n);
                        return Err(RunFailure { error, partial: traj });
                    }
                }
            };

            let linf = operators::linf(&w);
            let finite = w.iter().all(|v| v.is_finite());
            let mut rec = if finite {
                Some(self.record(n + 1, &w, stats))
            } else {
                None
            };
            if let Some(r) = rec.as_mut() {
                if opts.monitors && conditional {
                    r.verdict = Some(stability::check_step_linf(&self.params, &self.grid, r.linf));
                }
            }
            if !finite || linf > blowup {
                if let Some(r) = rec {
                    traj.records.push(r);
                }
                finish(&mut traj, &w_prev, n);
                return Err(RunFailure {
                    error: Error::BlowUp {
                        level: n + 1,
                        linf: linf.to_f64_lossy(),
                    },
                    partial: traj,
                });
            }
            traj.records.push(rec.expect("finite level has a record"));
            store(&mut traj, &w);
        }
        finish(&mut traj, &w, m);
        Ok(traj)
    }
}

/// Free-function form of [`Scheme::residual`] with feedback boundaries.
pub fn residual<T: Real>(w_next: &[T], w_n: &[T], grid: &GridSpec<T>, params: &ModelParams<T>) -> Result<Vec<T>> {
    Scheme::new(*grid, *params)?.residual(w_next, w_n)
}

/// Free-function form of [`Scheme::run`] with feedback boundaries.
pub fn run<T: Real>(
    ic: &InitialCondition<T>,
    grid: &GridSpec<T>,
    params: &ModelParams<T>,
    opts: &RunOptions<T>,
) -> std::result::Result<RunTrajectory<T>, RunFailure<T>> {
    match Scheme::new(*grid, *params) {
        Ok(s) => s.run(ic, opts),
        Err(error) => Err(RunFailure {
            error,
            partial: RunTrajectory {
                grid: *grid,
                params: *params,
                boundary: BoundaryMode::Feedback,
                newton: opts.newton,
                records: Vec::new(),
                final_state: StateField {
                    values: Vec::new(),
                    time_index: 0,
                },
                history: None,
            },
        }),
    }
}
