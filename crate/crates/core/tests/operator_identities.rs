mod common;

use burgers_core::grid::ModelParams;
use burgers_core::operators::{
    dx2_boundary, dx2_interior, dx_backward, dx_central, dx_forward, g0_eval, gn_eval, h1_semi_sq, inner_l2, linf,
    phi_field, End,
};
use common::semi_sq;
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=64).prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, n + 1))
}

fn h_of(w: &[f64]) -> f64 {
    1.0 / (w.len() - 1) as f64
}

/// Left side of the transport identity and the sum of its term magnitudes.
fn transport_sum(w: &[f64]) -> (f64, f64) {
    let n = w.len() - 1;
    let h = h_of(w);
    let mut terms = vec![0.5 * h * dx_forward(w, h, 0).unwrap() * w[0]];
    for i in 1..n {
        terms.push(h * dx_central(w, h, i).unwrap() * w[i]);
    }
    terms.push(0.5 * h * dx_backward(w, h, n).unwrap() * w[n]);
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// `|lhs - rhs| <= tol * scale`, where the scale is the magnitude of the
/// terms combined on either side (what rounding acts on).
fn identity_holds(lhs: f64, rhs: f64, scale: f64) -> bool {
    (lhs - rhs).abs() <= (1e-12 * scale).max(1e-14)
}

proptest! {
    #[test]
    fn transport_identity(w in field()) {
        let n = w.len() - 1;
        let (lhs, mag) = transport_sum(&w);
        let rhs = 0.5 * (w[n] * w[n] - w[0] * w[0]);
        let scale = mag.max(0.5 * (w[n] * w[n] + w[0] * w[0]));
        prop_assert!(identity_holds(lhs, rhs, scale), "{lhs} vs {rhs}");
    }

    #[test]
    fn cubic_identity(w in field()) {
        let n = w.len() - 1;
        let h = h_of(&w);
        let phi = phi_field(&w, h);
        let lhs = inner_l2(&phi, &w, h).unwrap();
        let abs_phi: Vec<f64> = phi.iter().map(|v| v.abs()).collect();
        let abs_w: Vec<f64> = w.iter().map(|v| v.abs()).collect();
        let mag = inner_l2(&abs_phi, &abs_w, h).unwrap();
        let rhs = (w[n].powi(3) - w[0].powi(3)) / 3.0;
        let scale = mag.max((w[n].abs().powi(3) + w[0].abs().powi(3)) / 3.0);
        prop_assert!(identity_holds(lhs, rhs, scale), "{lhs} vs {rhs}");
    }

    #[test]
    fn discrete_poincare(w in field()) {
        let n = w.len() - 1;
        let h = h_of(&w);
        let lhs = inner_l2(&w, &w, h).unwrap();
        prop_assert!(lhs <= w[0] * w[0] + w[n] * w[n] + h1_semi_sq(&w, h) * (1.0 + 1e-14));
    }

    #[test]
    fn first_difference_bound(w in field()) {
        let n = w.len() - 1;
        let h = h_of(&w);
        let mut lhs = 0.5 * h * dx_forward(&w, h, 0).unwrap().powi(2)
            + 0.5 * h * dx_backward(&w, h, n).unwrap().powi(2);
        for i in 1..n {
            lhs += h * dx_central(&w, h, i).unwrap().powi(2);
        }
        prop_assert!(lhs <= semi_sq(&w) * (1.0 + 1e-12));
    }

    #[test]
    fn second_difference_bound(w in field(), nu in 0.1..2.0f64, wd in 0.0..5.0f64, c0 in 0.2..5.0f64, c1 in 0.2..5.0f64) {
        let n = w.len() - 1;
        let h = h_of(&w);
        let p = ModelParams::new(nu, wd, c0, c1, 1.0).unwrap();
        let mut lhs = 0.5 * h * dx2_boundary(&w, h, &p, End::Left).unwrap().powi(2)
            + 0.5 * h * dx2_boundary(&w, h, &p, End::Right).unwrap().powi(2);
        for i in 1..n {
            lhs += h * dx2_interior(&w, h, i).unwrap().powi(2);
        }
        let rhs = 6.0 / (h * h) * semi_sq(&w)
            + 4.0 / h * g0_eval(w[0], &p).powi(2)
            + 4.0 / h * gn_eval(w[n], &p).powi(2);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn max_norm_embedding(w in field()) {
        let n = w.len() - 1;
        let m = linf(&w).powi(2);
        let s = semi_sq(&w);
        prop_assert!(m <= 2.0 * (s + w[0] * w[0]) * (1.0 + 1e-14));
        prop_assert!(m <= 2.0 * (s + w[n] * w[n]) * (1.0 + 1e-14));
    }

    #[test]
    fn transport_identity_is_antisymmetric(w in field()) {
        // reversing the mesh flips the sign of every one-sided difference sum
        let rev: Vec<f64> = w.iter().rev().copied().collect();
        let (a, mag) = transport_sum(&w);
        let (b, _) = transport_sum(&rev);
        prop_assert!(identity_holds(a, -b, mag));
    }
}
