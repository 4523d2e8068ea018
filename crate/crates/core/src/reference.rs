//! Reference values for the two benchmark problems, with a
//! comparison policy.
//!
//! Rows are `(resolution, err_a, order_a, err_b, order_b)`. The first row of
//! each table carries errors but no orders.

use serde::{Deserialize, Serialize};

pub type RefRow = (usize, f64, Option<f64>, f64, Option<f64>);

/// Spatial self-convergence of the state, quadratic data, `theta = 1`,
/// `M = 10000`. Columns: max-norm error, L2 error.
pub const SPACE_STATE: &[RefRow] = &[
    (40, 6.76e-7, None, 3.86e-7, None),
    (80, 1.66e-7, Some(2.03), 9.46e-8, Some(2.03)),
    (160, 4.11e-8, Some(2.01), 2.35e-8, Some(2.01)),
    (320, 1.03e-8, Some(2.00), 5.87e-9, Some(2.00)),
    (640, 2.56e-9, Some(2.00), 1.47e-9, Some(2.00)),
];
pub const SPACE_STATE_LADDER: [usize; 6] = [20, 40, 80, 160, 320, 640];
pub const SPACE_STATE_M: usize = 10_000;

/// Temporal self-convergence of the state, quadratic data, `N = 100`.
/// Columns: max-norm error with `theta = 1/2`, L2 error with `theta = 1`.
pub const TIME_STATE: &[RefRow] = &[
    (200, 4.64e-6, None, 1.151e-4, None),
    (400, 5.89e-7, Some(2.97), 4.96e-5, Some(1.22)),
    (800, 1.48e-7, Some(1.99), 2.29e-5, Some(1.11)),
    (1600, 3.73e-8, Some(1.99), 1.10e-5, Some(1.06)),
    (3200, 9.35e-9, Some(1.99), 5.40e-6, Some(1.03)),
];
pub const TIME_STATE_LADDER: [usize; 6] = [100, 200, 400, 800, 1600, 3200];
pub const TIME_STATE_N: usize = 100;

/// Spatial self-convergence of the controllers, quadratic data, `theta = 1`,
/// `M = 10000`. Columns: error at `x = 0`, error at `x = 1`.
///
/// The tabulated last resolution reads 6120; it is treated as 5120, the only
/// value that continues the doubling ladder.
pub const SPACE_CONTROLLER: &[RefRow] = &[
    (80, 1.816, None, 1.808, None),
    (160, 0.804, Some(1.17), 0.799, Some(1.18)),
    (320, 0.246, Some(1.71), 0.244, Some(1.71)),
    (640, 0.065, Some(1.92), 0.065, Some(1.92)),
    (1280, 0.017, Some(1.98), 0.016, Some(1.98)),
    (2560, 0.004, Some(1.99), 0.004, Some(1.99)),
    (5120, 0.0010, Some(1.99), 0.0010, Some(1.99)),
];
pub const SPACE_CONTROLLER_LADDER: [usize; 8] = [40, 80, 160, 320, 640, 1280, 2560, 5120];
pub const SPACE_CONTROLLER_M: usize = 10_000;

/// Expected controller orders in time (no tabulated errors).
pub const TIME_CONTROLLER_ORDER_IMPLICIT: f64 = 1.0;
pub const TIME_CONTROLLER_ORDER_CN: f64 = 2.0;

/// Absolute tolerance on observed orders.
pub const ORDER_TOL: f64 = 0.15;
/// Allowed ratio between a computed and a reference error, either way.
pub const ERROR_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonLine {
    pub resolution: usize,
    pub metric: String,
    pub computed: Option<f64>,
    pub reference: f64,
    pub tolerance: String,
    pub pass: bool,
    /// Informational lines are reported but do not decide the outcome.
    pub gating: bool,
}

/// Compares one computed column against a reference column.
///
/// Orders are gated at the two finest resolutions present in both; raw
/// errors are gated within [`ERROR_FACTOR`] only when `gate_errors` is set.
pub fn compare_column(
    metric: &str,
    computed: &[(usize, Option<f64>, Option<f64>)],
    reference: &[(usize, f64, Option<f64>)],
    gate_errors: bool,
) -> Vec<ComparisonLine> {
    let lookup = |res: usize| computed.iter().find(|c| c.0 == res);
    let shared_orders: Vec<usize> = reference
        .iter()
        .filter(|r| r.2.is_some() && lookup(r.0).is_some())
        .map(|r| r.0)
        .collect();
    let gated_orders = &shared_orders[shared_orders.len().saturating_sub(2)..];

    let mut out = Vec::new();
    for &(res, err_ref, ord_ref) in reference {
        let Some(&(_, err, ord)) = lookup(res) else { continue };
        let ratio_ok = err.is_some_and(|e| e > 0.0 && e / err_ref <= ERROR_FACTOR && err_ref / e <= ERROR_FACTOR);
        out.push(ComparisonLine {
            resolution: res,
            metric: format!("{metric}_err"),
            computed: err,
            reference: err_ref,
            tolerance: format!("factor {ERROR_FACTOR}"),
            pass: ratio_ok,
            gating: gate_errors,
        });
        if let Some(o_ref) = ord_ref {
            out.push(ComparisonLine {
                resolution: res,
                metric: format!("{metric}_order"),
                computed: ord,
                reference: o_ref,
                tolerance: format!("+-{ORDER_TOL}"),
                pass: ord.is_some_and(|o| (o - o_ref).abs() <= ORDER_TOL),
                gating: gated_orders.contains(&res),
            });
        }
    }
    out
}

pub fn column_a(table: &[RefRow]) -> Vec<(usize, f64, Option<f64>)> {
    table.iter().map(|r| (r.0, r.1, r.2)).collect()
}

pub fn column_b(table: &[RefRow]) -> Vec<(usize, f64, Option<f64>)> {
    table.iter().map(|r| (r.0, r.3, r.4)).collect()
}

/// True when every gating line passed.
pub fn all_gating_pass(lines: &[ComparisonLine]) -> bool {
    lines.iter().filter(|l| l.gating).all(|l| l.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_orders_follow_from_errors() {
        // orders printed with two decimals; the rounded errors reproduce them
        // to within rounding of the three-digit mantissas
        for table in [SPACE_STATE, TIME_STATE] {
            for w in table.windows(2) {
                let oa = (w[0].1 / w[1].1).log2();
                let ob = (w[0].3 / w[1].3).log2();
                assert!((oa - w[1].2.unwrap()).abs() < 0.02, "{oa} vs {:?}", w[1].2);
                assert!((ob - w[1].4.unwrap()).abs() < 0.02, "{ob} vs {:?}", w[1].4);
            }
        }
    }

    #[test]
    fn ladders_double() {
        for l in [&SPACE_STATE_LADDER[..], &TIME_STATE_LADDER, &SPACE_CONTROLLER_LADDER] {
            assert!(l.windows(2).all(|w| w[1] == 2 * w[0]));
        }
    }

    #[test]
    fn comparison_gates_two_finest_orders() {
        let computed: Vec<_> = SPACE_STATE
            .iter()
            .map(|r| (r.0, Some(r.1 * 1.5), r.2.map(|o| o + 0.1)))
            .collect();
        let lines = compare_column("linf", &computed, &column_a(SPACE_STATE), true);
        assert!(all_gating_pass(&lines));
        let gated: Vec<_> = lines
            .iter()
            .filter(|l| l.gating && l.metric.ends_with("order"))
            .map(|l| l.resolution)
            .collect();
        assert_eq!(gated, vec![320, 640]);

        let mut off = computed.clone();
        off[4].2 = Some(1.8);
        assert!(!all_gating_pass(&compare_column(
            "linf",
            &off,
            &column_a(SPACE_STATE),
            true
        )));
        let mut big = computed;
        big[0].1 = Some(6.76e-7 * 2.5);
        assert!(!all_gating_pass(&compare_column(
            "linf",
            &big,
            &column_a(SPACE_STATE),
            true
        )));
        assert!(all_gating_pass(&compare_column(
            "linf",
            &big,
            &column_a(SPACE_STATE),
            false
        )));
    }
}
