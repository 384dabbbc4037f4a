//! Property tests for the invariants the modules promise: evenness and
//! parity, derivative consistency against finite differences, solver round
//! trips, and Christoffel monotonicity.

use expoly::mrs::{mrs_number, mrs_rhs};
use expoly::operators::christoffel;
use expoly::orthopoly::{build_recurrence, RecurrenceTable, StieltjesConfig};
use expoly::weights::{q_jet, q_value, t_func, weight_eval};
use expoly::WeightSpec;
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

fn freud2_table() -> &'static Arc<RecurrenceTable> {
    static TABLE: OnceLock<Arc<RecurrenceTable>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Arc::new(
            build_recurrence(
                &WeightSpec::freud(2.0).unwrap(),
                72,
                &StieltjesConfig::default(),
            )
            .unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_and_t_are_even(x in 0.05f64..8.0, alpha in 1.1f64..5.0) {
        let spec = WeightSpec::freud(alpha).unwrap();
        let a = q_jet(&spec, x).unwrap();
        let b = q_jet(&spec, -x).unwrap();
        prop_assert_eq!(a.q, b.q);
        prop_assert_eq!(a.q1, b.q1);
        prop_assert_eq!(t_func(&spec, x).unwrap(), t_func(&spec, -x).unwrap());
    }

    #[test]
    fn freud_t_is_constant(x in 0.01f64..20.0, alpha in 1.1f64..6.0) {
        let spec = WeightSpec::freud(alpha).unwrap();
        let t = t_func(&spec, x).unwrap();
        prop_assert!((t - alpha).abs() <= 1e-12 * alpha);
    }

    #[test]
    fn weight_eval_is_exp_of_logw(x in -12.0f64..12.0) {
        for spec in [
            WeightSpec::freud(2.0).unwrap(),
            WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
        ] {
            let (w, logw) = weight_eval(&spec, x);
            prop_assert!((w - logw.exp()).abs() <= 1e-15 * w.max(1e-300));
            prop_assert!(w <= 1.0);
        }
    }

    #[test]
    fn mrs_round_trip(x in 0.1f64..5000.0) {
        for spec in [
            WeightSpec::freud(2.0).unwrap(),
            WeightSpec::freud(3.0).unwrap(),
            WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
        ] {
            let a = mrs_number(&spec, x, 1e-12).unwrap();
            let back = mrs_rhs(&spec, a).unwrap();
            prop_assert!((back - x).abs() <= 1e-9 * x, "{back} vs {x}");
        }
    }

    #[test]
    fn block_parity_random_x(x in 0.02f64..6.0) {
        let rec = freud2_table();
        let plus = rec.eval_weighted(x, 24, 2).unwrap();
        let minus = rec.eval_weighted(-x, 24, 2).unwrap();
        for k in 0..24 {
            for j in 0..=2 {
                let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
                let a = plus.value(k, j);
                let b = minus.value(k, j);
                prop_assert!(
                    (a - sign * b).abs() <= 1e-10 * a.abs().max(1e-30),
                    "k={} j={}: {} vs {}", k, j, a, b
                );
            }
        }
    }

    #[test]
    fn christoffel_positive_inside_window(frac in -0.95f64..0.95, n in 2usize..40) {
        prop_assume!(frac.abs() > 1e-3);
        let rec = freud2_table();
        let a_2n = (2.0 * n as f64).sqrt(); // alpha = 2 closed form
        let lam = christoffel(rec, n, frac * a_2n, 0).unwrap();
        prop_assert!(lam > 0.0 && lam.is_finite());
    }
}

/// Derivative consistency of the Q jet, checked as a chain: each order
/// against the central finite difference of the previous one. Direct
/// high-order differences of q itself lose too many digits to cancellation
/// to certify 1e-6.
#[test]
fn q_jet_chain_matches_finite_differences() {
    let specs = [
        WeightSpec::freud(2.0).unwrap(),
        WeightSpec::freud(4.0).unwrap(),
        WeightSpec::freud(2.5).unwrap(),
        WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
        WeightSpec::erdos(1.0, 1.0, 1).unwrap(),
        WeightSpec::erdos(2.0, 0.5, 2).unwrap(),
    ];
    for spec in &specs {
        let mut x = 0.3;
        while x < 30.0 {
            if q_value(spec, x * 1.01) > 1e6 {
                break;
            }
            let h = 1e-5 * x.max(1.0);
            let lo = q_jet(spec, x - h).unwrap();
            let hi = q_jet(spec, x + h).unwrap();
            let at = q_jet(spec, x).unwrap();
            let pairs = [
                ((hi.q - lo.q) / (2.0 * h), at.q1),
                ((hi.q1 - lo.q1) / (2.0 * h), at.q2),
                ((hi.q2 - lo.q2) / (2.0 * h), at.q3),
                ((hi.q3 - lo.q3) / (2.0 * h), at.q4),
            ];
            for (i, (fd, exact)) in pairs.iter().enumerate() {
                let denom = exact.abs().max(at.q.abs() * 1e-6).max(1e-12);
                assert!(
                    (fd - exact).abs() <= 1e-6 * denom,
                    "{spec:?} order {} at x={x}: fd {fd} vs jet {exact}",
                    i + 1
                );
            }
            x *= 1.7;
        }
    }
}

/// Weighted derivative rows against finite differences of the previous row.
/// d/dx [p^{(j)} w] = p^{(j+1)} w - Q' p^{(j)} w, so
/// p^{(j+1)} w = FD(p^{(j)} w) + Q' p^{(j)} w.
#[test]
fn eval_weighted_rows_match_difference_oracle() {
    let specs = [
        WeightSpec::freud(2.0).unwrap(),
        WeightSpec::freud(4.0).unwrap(),
        WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
    ];
    for spec in &specs {
        let rec = build_recurrence(spec, 70, &StieltjesConfig::default()).unwrap();
        let a_n = mrs_number(spec, 64.0, 1e-12).unwrap();
        let n = 64;
        let j_max = 3;
        // local oscillation frequency per degree, the scale a derivative
        // multiplies values by; relativizing against it keeps isolated zeros
        // of the target row from inflating the comparison
        let freq: Vec<f64> = (0..n)
            .map(|k| {
                let kk = (k.max(1)) as f64;
                kk / mrs_number(spec, kk, 1e-12).unwrap()
            })
            .collect();
        for i in 0..14 {
            let x = (0.083 + 0.089 * i as f64) * a_n * 1.2;
            // cap the step by the local variation scale: beyond it the
            // stencil cannot resolve the weight at all (Erdős Q' explodes)
            let q1_at = q_jet(spec, x).unwrap().q1;
            let scale = q1_at.max(n as f64 / a_n);
            let h = (1e-4 * x.abs().max(1.0)).min(0.02 / scale);
            let at = rec.eval_weighted(x, n, j_max).unwrap();
            // five-point central stencil: the pinned step is too coarse for
            // the three-point one once the local frequency nears 1/h
            let lo2 = rec.eval_weighted(x - 2.0 * h, n, j_max).unwrap();
            let lo = rec.eval_weighted(x - h, n, j_max).unwrap();
            let hi = rec.eval_weighted(x + h, n, j_max).unwrap();
            let hi2 = rec.eval_weighted(x + 2.0 * h, n, j_max).unwrap();
            let q1 = q_jet(spec, x).unwrap().q1;
            for j in 0..j_max {
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    if at.value(k, 0).abs() <= 1e-280 {
                        continue;
                    }
                    let diff = (lo2.value(k, j) - hi2.value(k, j)
                        + 8.0 * (hi.value(k, j) - lo.value(k, j)))
                        / (12.0 * h);
                    let fd = diff + q1 * at.value(k, j);
                    let exact = at.value(k, j + 1);
                    // outside the oscillatory window the derivative scale is
                    // set by Q'(x) rather than the polynomial frequency
                    let local_scale = freq[k].max(q1.abs());
                    let denom = exact
                        .abs()
                        .max(local_scale * at.value(k, j).abs())
                        .max(1e-280);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * denom,
                        "{spec:?} k={k} j={} x={x}: fd {fd} vs {exact}",
                        j + 1
                    );
                }
            }
        }
    }
}

/// Bessel sums are nondecreasing and capped by the L2 norm of fw.
#[test]
fn bessel_partial_sums_monotone() {
    let rec = freud2_table();
    let f = expoly::operators::gaussian_bump(0.0);
    let c = expoly::operators::fourier_coeffs(&f, rec, 48).unwrap();
    let cap = (std::f64::consts::PI / 2.0).sqrt() * (1.0 + 1e-8);
    let mut run = 0.0;
    for b in &c.coeffs {
        run += b * b;
        assert!(run <= cap, "Bessel sum {run} exceeds {cap}");
    }
}

/// Erdős T is nondecreasing on positive grids (quasi-increasing condition
/// realized as plain monotonicity for these families).
#[test]
fn erdos_t_monotone() {
    for spec in [
        WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
        WeightSpec::erdos(1.0, 1.0, 1).unwrap(),
        WeightSpec::erdos(2.0, 0.5, 2).unwrap(),
    ] {
        let mut prev = 0.0_f64;
        let mut x = 0.05;
        while x < 2.2 && q_value(&spec, x) < 1e6 {
            let t = t_func(&spec, x).unwrap();
            assert!(t >= prev - 1e-12 * prev.abs(), "{spec:?}: T dips at {x}");
            prev = t;
            x *= 1.3;
        }
    }
}
