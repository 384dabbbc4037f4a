//! Dry-run scan of the full boundedness matrix: every (inequality, j, p,
//! weight) cell over n = 8..128, printing the upper-half slope under both the
//! floor (3-point) and ceil (2-point) readings of "upper half".

use expoly::harness::{
    verify_bernstein, verify_lemma27, verify_restricted_range, verify_vp_theorem, BernsteinMode,
    VpTheorem,
};
use expoly::mrs::MrsTable;
use expoly::operators::{prop32_default_grid, standard_suite, verify_prop32};
use expoly::orthopoly::{build_recurrence, StieltjesConfig};
use expoly::report::{ls_slope, RatioReport};
use expoly::WeightSpec;
use std::sync::Arc;
use std::time::Instant;

fn ceil_slope(rows: &[(f64, f64)]) -> f64 {
    let start = rows.len().div_ceil(2).min(rows.len() - 2);
    let pts: Vec<(f64, f64)> = rows[start..]
        .iter()
        .map(|(n, r)| (n.ln(), r.ln()))
        .collect();
    ls_slope(&pts)
}

fn show(label: &str, rep: &RatioReport) {
    let without = rep.slope_without_last();
    let flip = (rep.slope <= rep.slope_tol) != (without <= rep.slope_tol);
    println!(
        "{label:40} slope3={:+.4} slope2={:+.4} drop1={:+.4}{} max={:.4e} {:?}",
        rep.slope,
        ceil_slope(&rep.rows),
        without,
        if flip { " FLIP" } else { "" },
        rep.empirical_constant,
        rep.verdict
    );
}

fn main() {
    let n_grid = [8usize, 16, 32, 64, 128];
    let specs = [
        WeightSpec::freud(2.0).unwrap(),
        WeightSpec::freud(4.0).unwrap(),
        WeightSpec::erdos(2.0, 0.0, 1).unwrap(),
    ];
    let ps = [1.0, 2.0, f64::INFINITY];
    let t0 = Instant::now();
    for spec in &specs {
        let label = spec.label();
        let t1 = Instant::now();
        let table = Arc::new(build_recurrence(spec, 272, &StieltjesConfig::default()).unwrap());
        let mrs_keys: Vec<f64> = n_grid
            .iter()
            .flat_map(|&n| [n as f64, 2.0 * n as f64])
            .collect();
        let mrs = MrsTable::build(spec, &mrs_keys, 1e-12).unwrap();
        println!("== {label} (table {:?})", t1.elapsed());
        let suite = standard_suite(&table);

        for p in ps {
            let rep = verify_restricted_range(&table, &mrs, &n_grid, p, 20, 42).unwrap();
            show(&format!("{label} 2.3 p={p}"), &rep);
        }
        for p in ps {
            let rep =
                verify_vp_theorem(&table, &mrs, &suite, VpTheorem::Ineq15, p, 0, &n_grid, 0.0)
                    .unwrap();
            show(&format!("{label} 1.5 p={p}"), &rep);
        }
        for j in 1..=3 {
            for p in ps {
                for mode in [BernsteinMode::WithT, BernsteinMode::InverseT] {
                    let rep = verify_bernstein(&table, &mrs, &n_grid, p, j, mode, 8, 42).unwrap();
                    show(&format!("{label} {mode:?} j={j} p={p}"), &rep);
                }
            }
        }
        for j in 1..=3 {
            let grid = prop32_default_grid(&mrs, &n_grid, 48).unwrap();
            let rep = verify_prop32(&table, &mrs, &n_grid, j, &grid).unwrap();
            show(&format!("{label} 3.7 j={j}"), &rep);
        }
        for j in 1..=2 {
            for p in ps {
                let rep =
                    verify_vp_theorem(&table, &mrs, &suite, VpTheorem::T11, p, j, &n_grid, 0.0)
                        .unwrap();
                show(&format!("{label} 1.11 j={j} p={p}"), &rep);
            }
            for p in [2.0, f64::INFINITY] {
                let rep =
                    verify_vp_theorem(&table, &mrs, &suite, VpTheorem::T12, p, j, &n_grid, 0.0)
                        .unwrap();
                show(&format!("{label} 1.12 j={j} p={p}"), &rep);
            }
            for p in [1.0, 2.0] {
                let rep =
                    verify_vp_theorem(&table, &mrs, &suite, VpTheorem::T13, p, j, &n_grid, 0.0)
                        .unwrap();
                show(&format!("{label} 1.13 j={j} p={p}"), &rep);
            }
        }
        let rep = verify_lemma27(spec, &mrs, &n_grid, 1000, 42).unwrap();
        show(&format!("{label} 2.7w"), &rep);
        println!("   [{label} done at {:?}]", t0.elapsed());
    }
    println!("total {:?}", t0.elapsed());
}
