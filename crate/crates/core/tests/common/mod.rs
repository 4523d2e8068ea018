//! Shared oracles for the integration tests. Nothing here calls into the
//! crate's numerical code.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut ChaCha8Rng, nodes: usize, amp: f64) -> Vec<f64> {
    (0..nodes).map(|_| rng.gen_range(-amp..=amp)).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Consts {
    pub nu: f64,
    pub wd: f64,
    pub c0: f64,
    pub c1: f64,
    pub theta: f64,
}

pub fn g0(z: f64, c: &Consts) -> f64 {
    ((c.c0 + c.wd) * z + 2.0 / (9.0 * c.c0) * z.powi(3)) / c.nu
}

pub fn gn(z: f64, c: &Consts) -> f64 {
    -((c.c1 + c.wd) * z + 2.0 / (9.0 * c.c1) * z.powi(3)) / c.nu
}

/// Scheme rows written out term by term.
pub fn oracle_residual(next: &[f64], prev: &[f64], k: f64, c: &Consts) -> Vec<f64> {
    let n = next.len() - 1;
    let h = 1.0 / n as f64;
    let z: Vec<f64> = (0..=n).map(|i| c.theta * next[i] + (1.0 - c.theta) * prev[i]).collect();
    let mut out = Vec::with_capacity(n + 1);
    {
        let dt = (next[0] - prev[0]) / k;
        let diff = 2.0 * c.nu / (h * h) * (z[1] - z[0] - h * g0(z[0], c));
        let fwd = (z[1] - z[0]) / h;
        let conv = (2.0 * z[0] + z[1]) / 3.0 * fwd;
        out.push(dt - diff + c.wd * fwd + conv);
    }
    for i in 1..n {
        let dt = (next[i] - prev[i]) / k;
        let lap = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / (h * h);
        let cen = (z[i + 1] - z[i - 1]) / (2.0 * h);
        let conv = (z[i - 1] + z[i] + z[i + 1]) / 3.0 * cen;
        out.push(dt - c.nu * lap + c.wd * cen + conv);
    }
    {
        let dt = (next[n] - prev[n]) / k;
        let diff = 2.0 * c.nu / (h * h) * (z[n - 1] - z[n] + h * gn(z[n], c));
        let bwd = (z[n] - z[n - 1]) / h;
        let conv = (2.0 * z[n] + z[n - 1]) / 3.0 * bwd;
        out.push(dt - diff + c.wd * bwd + conv);
    }
    out
}

/// Central finite-difference Jacobian of `f` at `x`, dense.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut cols = vec![vec![0.0; m]; m];
    let mut xp = x.to_vec();
    for j in 0..m {
        xp[j] = x[j] + step;
        let fp = f(&xp);
        xp[j] = x[j] - step;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            cols[i][j] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    cols
}

/// `|a - b| <= tol * max(|a|, |b|, floor)`.
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

/// Trapezoidal `||w||^2`.
pub fn l2_sq(w: &[f64]) -> f64 {
    let n = w.len() - 1;
    let h = 1.0 / n as f64;
    h * (0.5 * w[0] * w[0] + w[1..n].iter().map(|v| v * v).sum::<f64>() + 0.5 * w[n] * w[n])
}

/// `||dx- W||_h^2`.
pub fn semi_sq(w: &[f64]) -> f64 {
    let n = w.len() - 1;
    let h = 1.0 / n as f64;
    w.windows(2).map(|p| (p[1] - p[0]).powi(2)).sum::<f64>() / h
}
