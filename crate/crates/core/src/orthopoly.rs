//! Three-term recurrence and stable weighted evaluation of the polynomials
//! orthonormal with respect to w(t)^2 dt.
//!
//! Coefficients come from a discretized Stieltjes procedure on a composite
//! Gauss–Legendre discretization of w^2 over [-R, R]: moments of w^2 are
//! catastrophically ill-conditioned, the discretized inner products are not.
//! The recurrence is carried in orthonormal normalization and every
//! polynomial value is kept in weighted form p_k(x) w(x); unweighted p_k
//! overflows near |x| ~ a_n once n is past a few dozen.

use crate::error::{Error, Result};
use crate::mrs::{mrs_number, MrsTable, DEFAULT_TOL};
use crate::quad::{Grading, HalfLineRule, KahanSum};
use crate::report::RatioReport;
use crate::weights::{weight_eval, WeightSpec};

/// Discretization parameters for the Stieltjes build.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesConfig {
    /// Number of panels on [0, R]; `None` scales with the max degree.
    pub panels: Option<usize>,
    pub nodes_per_panel: usize,
    /// Panel widths grow geometrically outward by this ratio.
    pub grade_ratio: f64,
    /// Build aborts when the orthonormality residual exceeds this.
    pub residual_gate: f64,
}

impl Default for StieltjesConfig {
    fn default() -> Self {
        Self {
            panels: None,
            nodes_per_panel: 64,
            grade_ratio: 1.15,
            residual_gate: 1e-8,
        }
    }
}

/// Maximum derivative order carried by the differentiated recurrence.
pub const J_MAX_CAP: usize = 8;

/// Hard default cap on the table size in double precision.
pub const N_MAX_DEFAULT: usize = 256;

/// Recurrence data: x p_k = a_{k+1} p_{k+1} + a_k p_{k-1} with all diagonal
/// terms exactly zero (even weight), plus the discretization it was built on.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    pub spec: WeightSpec,
    /// Max degree N: offdiagonal entries a_1..a_N are available.
    pub n_max: usize,
    /// mu0 = ∫ w^2 dt.
    pub mu0: f64,
    /// Truncation radius of the discretization.
    pub radius: f64,
    offdiag: Vec<f64>,
    panels: usize,
    nodes_per_panel: usize,
    grade_ratio: f64,
}

/// p_k^{(j)}(x) w(x) for k < n, 0 <= j <= j_max, all rows carrying the common
/// weight factor; no unweighted value is ever materialized.
#[derive(Debug, Clone)]
pub struct WeightedEvalBlock {
    pub x: f64,
    pub n: usize,
    pub j_max: usize,
    pub w: f64,
    pub logw: f64,
    data: Vec<f64>,
}

impl WeightedEvalBlock {
    #[inline]
    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.data[k * (self.j_max + 1) + j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * (self.j_max + 1)..(k + 1) * (self.j_max + 1)]
    }
}

pub fn build_recurrence(
    spec: &WeightSpec,
    n: usize,
    cfg: &StieltjesConfig,
) -> Result<RecurrenceTable> {
    if n < 1 {
        return Err(Error::Precondition("need max degree N >= 1".into()));
    }
    let panels = cfg.panels.unwrap_or_else(|| (n.div_ceil(8)).max(12));
    let a4n = mrs_number(spec, 4.0 * n as f64, DEFAULT_TOL)?;
    let radius = (1.25 * a4n).max(crate::weights::q_radius(spec, 370.0));
    let rule = HalfLineRule::new(
        radius,
        panels,
        cfg.nodes_per_panel,
        Grading::Geometric(cfg.grade_ratio),
    );

    let w_at: Vec<f64> = rule.nodes.iter().map(|&x| weight_eval(spec, x).0).collect();
    let mut mu0 = KahanSum::new();
    for (wq, qw) in w_at.iter().zip(rule.weights.iter()) {
        mu0.add(2.0 * qw * wq * wq);
    }
    let mu0 = mu0.total();
    if !(mu0 > 0.0) || !mu0.is_finite() {
        return Err(Error::NonFinite(format!("mu0 = {mu0}")));
    }

    // Stieltjes, orthonormal normalization: u = x p_k - a_k p_{k-1} equals
    // a_{k+1} p_{k+1} exactly over the symmetric discrete measure, so
    // a_{k+1} = ||u|| and p_{k+1} = u / a_{k+1}.
    let m = rule.nodes.len();
    let inv_sqrt_mu0 = 1.0 / mu0.sqrt();
    let mut p_prev = vec![0.0; m];
    let mut p_cur: Vec<f64> = w_at.iter().map(|w| w * inv_sqrt_mu0).collect();
    let mut offdiag = Vec::with_capacity(n);
    let mut a_k = 0.0;
    for k in 0..n {
        let mut norm2 = KahanSum::new();
        for q in 0..m {
            let u = rule.nodes[q] * p_cur[q] - a_k * p_prev[q];
            p_prev[q] = u; // stash u in p_prev; renormalized below
            norm2.add(2.0 * rule.weights[q] * u * u);
        }
        let a_next = norm2.total().sqrt();
        if !(a_next > 0.0) || !a_next.is_finite() {
            return Err(Error::QuadratureUnderresolved(format!(
                "recurrence coefficient a_{} degenerated to {a_next}",
                k + 1
            )));
        }
        let inv = 1.0 / a_next;
        for q in 0..m {
            let u = p_prev[q] * inv;
            p_prev[q] = p_cur[q];
            p_cur[q] = u;
        }
        offdiag.push(a_next);
        a_k = a_next;
    }

    let table = RecurrenceTable {
        spec: *spec,
        n_max: n,
        mu0,
        radius,
        offdiag,
        panels,
        nodes_per_panel: cfg.nodes_per_panel,
        grade_ratio: cfg.grade_ratio,
    };
    let residual = table.orthonormality_residual();
    if residual > cfg.residual_gate {
        return Err(Error::QuadratureUnderresolved(format!(
            "orthonormality residual {residual:e} exceeds gate {:e}",
            cfg.residual_gate
        )));
    }
    Ok(table)
}

impl RecurrenceTable {
    /// a_k, 1-based: the k-th offdiagonal recurrence coefficient.
    pub fn a(&self, k: usize) -> f64 {
        self.offdiag[k - 1]
    }

    /// Leading-coefficient ratio gamma_{n-1}/gamma_n, equal to a_n.
    pub fn gamma_ratio(&self, n: usize) -> f64 {
        self.a(n)
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Diagonal coefficient b_k; exactly zero for the even weights here.
    pub fn b(&self, _k: usize) -> f64 {
        0.0
    }

    /// The discretization the table was built on.
    pub fn base_rule(&self) -> HalfLineRule {
        HalfLineRule::new(
            self.radius,
            self.panels,
            self.nodes_per_panel,
            Grading::Geometric(self.grade_ratio),
        )
    }

    /// An independent, finer discretization (uniform panels, different node
    /// count) for validation integrals.
    pub fn fine_rule(&self) -> HalfLineRule {
        HalfLineRule::new(self.radius, self.panels + 10, 72, Grading::Uniform)
    }

    /// p_k^{(j)}(x) w(x) for k < n, j <= j_max, via the weighted recurrence
    /// seeded with p_0 w = w/sqrt(mu0) and the differentiated step
    /// p_{k+1}^{(j)} = [x p_k^{(j)} + j p_k^{(j-1)} - a_k p_{k-1}^{(j)}] / a_{k+1}.
    pub fn eval_weighted(&self, x: f64, n: usize, j_max: usize) -> Result<WeightedEvalBlock> {
        if n > self.n_max + 1 {
            return Err(Error::Precondition(format!(
                "requested {n} rows but table holds coefficients through a_{}",
                self.n_max
            )));
        }
        if j_max > J_MAX_CAP {
            return Err(Error::Precondition(format!(
                "derivative order {j_max} beyond cap {J_MAX_CAP}"
            )));
        }
        let (w, logw) = weight_eval(&self.spec, x);
        let cols = j_max + 1;
        let mut data = vec![0.0; n * cols];
        let mut prev = [0.0; J_MAX_CAP + 1];
        let mut cur = [0.0; J_MAX_CAP + 1];
        cur[0] = w / self.mu0.sqrt();
        for k in 0..n {
            data[k * cols..k * cols + cols].copy_from_slice(&cur[..cols]);
            if k + 1 < n {
                let a_k = if k == 0 { 0.0 } else { self.offdiag[k - 1] };
                let inv_a = 1.0 / self.offdiag[k];
                let mut next = [0.0; J_MAX_CAP + 1];
                for j in 0..cols {
                    let lower = if j == 0 { 0.0 } else { cur[j - 1] };
                    next[j] = (x * cur[j] + j as f64 * lower - a_k * prev[j]) * inv_a;
                }
                prev = cur;
                cur = next;
            }
        }
        Ok(WeightedEvalBlock {
            x,
            n,
            j_max,
            w,
            logw,
            data,
        })
    }

    /// `sum_k coeffs[k] tau_k p_k^{(j)}(x) w(x)` without materializing a block;
    /// `taper` maps k to tau_k (identity when absent).
    pub fn weighted_combo(
        &self,
        x: f64,
        coeffs: &[f64],
        j: usize,
        taper: Option<&dyn Fn(usize) -> f64>,
    ) -> Result<f64> {
        let n = coeffs.len();
        if n > self.n_max + 1 {
            return Err(Error::Precondition(format!(
                "combination of {n} terms exceeds table degree {}",
                self.n_max
            )));
        }
        if j > J_MAX_CAP {
            return Err(Error::Precondition(format!(
                "derivative order {j} beyond cap {J_MAX_CAP}"
            )));
        }
        let (w, _) = weight_eval(&self.spec, x);
        let cols = j + 1;
        let mut prev = [0.0; J_MAX_CAP + 1];
        let mut cur = [0.0; J_MAX_CAP + 1];
        cur[0] = w / self.mu0.sqrt();
        let mut acc = 0.0;
        for (k, &coeff) in coeffs.iter().enumerate() {
            let c = match taper {
                Some(t) => coeff * t(k),
                None => coeff,
            };
            acc += c * cur[j];
            if k + 1 < n {
                let a_k = if k == 0 { 0.0 } else { self.offdiag[k - 1] };
                let inv_a = 1.0 / self.offdiag[k];
                let mut next = [0.0; J_MAX_CAP + 1];
                for jj in 0..cols {
                    let lower = if jj == 0 { 0.0 } else { cur[jj - 1] };
                    next[jj] = (x * cur[jj] + jj as f64 * lower - a_k * prev[jj]) * inv_a;
                }
                prev = cur;
                cur = next;
            }
        }
        Ok(acc)
    }

    /// max_{i,j < N} |∫ p_i p_j w^2 - delta_ij| on the independent fine rule.
    /// Odd i+j pairs vanish exactly by parity of the discretization and are
    /// skipped.
    pub fn orthonormality_residual(&self) -> f64 {
        let rule = self.fine_rule();
        let n = self.n_max;
        let m = rule.nodes.len();
        // values[k][q] = p_k(x_q) w(x_q)
        let mut values = vec![0.0; n * m];
        for (q, &x) in rule.nodes.iter().enumerate() {
            let w = weight_eval(&self.spec, x).0;
            let mut prev = 0.0;
            let mut cur = w / self.mu0.sqrt();
            for k in 0..n {
                values[k * m + q] = cur;
                if k + 1 < n {
                    let a_k = if k == 0 { 0.0 } else { self.offdiag[k - 1] };
                    let next = (x * cur - a_k * prev) / self.offdiag[k];
                    prev = cur;
                    cur = next;
                }
            }
        }
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i..n).step_by(2) {
                let mut acc = KahanSum::new();
                for q in 0..m {
                    acc.add(2.0 * rule.weights[q] * values[i * m + q] * values[j * m + q]);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc.total() - target).abs());
            }
        }
        worst
    }

    /// (gamma_{n-1}/gamma_n) / a_n per n: the leading-coefficient ratio
    /// against the MRS number, reported as a flat-band check.
    pub fn verify_34(&self, mrs: &MrsTable, n_grid: &[usize]) -> Result<RatioReport> {
        let mut rows = Vec::with_capacity(n_grid.len());
        for &n in n_grid {
            if n < 1 || n > self.n_max {
                return Err(Error::Precondition(format!(
                    "verify_34 grid point {n} outside [1, {}]",
                    self.n_max
                )));
            }
            let a_mrs = mrs.a_of(n as f64)?;
            rows.push((n as f64, self.gamma_ratio(n) / a_mrs));
        }
        Ok(RatioReport::from_rows("3.4", rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freud2_table(n: usize) -> RecurrenceTable {
        build_recurrence(
            &WeightSpec::freud(2.0).unwrap(),
            n,
            &StieltjesConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn scaled_hermite_recurrence() {
        // weight^2 = e^{-2x^2}: a_k = sqrt(k)/2, mu0 = sqrt(pi/2)
        let table = freud2_table(50);
        assert!((table.mu0 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        for k in 1..=50 {
            let expect = (k as f64).sqrt() / 2.0;
            assert!(
                (table.a(k) - expect).abs() <= 1e-9,
                "a_{k} = {} vs {expect}",
                table.a(k)
            );
        }
    }

    #[test]
    fn residual_small_for_modest_degree() {
        let table = freud2_table(40);
        let r = table.orthonormality_residual();
        assert!(r <= 1e-10, "residual {r}");
    }

    #[test]
    fn eval_block_at_origin() {
        let table = freud2_table(10);
        let block = table.eval_weighted(0.0, 2, 0).unwrap();
        let expect_p0 = (std::f64::consts::PI / 2.0).sqrt().powf(-0.5);
        assert!((block.value(0, 0) - expect_p0).abs() < 1e-12);
        assert!(block.value(1, 0).abs() < 1e-14, "p_1 odd, vanishes at 0");
    }

    #[test]
    fn derivative_rows_vanish_above_degree() {
        let table = freud2_table(10);
        let block = table.eval_weighted(0.7, 6, 5).unwrap();
        for k in 0..6 {
            for j in (k + 1)..=5 {
                assert_eq!(block.value(k, j), 0.0, "p_{k}^{j} should vanish");
            }
        }
        // top derivative of degree k is k! gamma_k, nonzero
        for k in 1..6 {
            assert!(block.value(k, k) != 0.0);
        }
    }

    #[test]
    fn parity_of_block() {
        let table = freud2_table(16);
        let x = 1.234;
        let plus = table.eval_weighted(x, 12, 3).unwrap();
        let minus = table.eval_weighted(-x, 12, 3).unwrap();
        for k in 0..12 {
            for j in 0..=3 {
                let sign = if (k + j) % 2 == 0 { 1.0 } else { -1.0 };
                let a = plus.value(k, j);
                let b = minus.value(k, j);
                assert!(
                    (a - sign * b).abs() <= 1e-10 * a.abs().max(1e-30),
                    "parity violated at k={k} j={j}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn weighted_combo_matches_block() {
        let table = freud2_table(24);
        let coeffs: Vec<f64> = (0..20).map(|k| 1.0 / (1.0 + k as f64)).collect();
        for x in [0.0, 0.9, -2.3] {
            for j in 0..=2 {
                let block = table.eval_weighted(x, 20, j).unwrap();
                let direct: f64 = (0..20).map(|k| coeffs[k] * block.value(k, j)).sum();
                let combo = table.weighted_combo(x, &coeffs, j, None).unwrap();
                assert!((direct - combo).abs() <= 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn tail_block_underflows_to_zero() {
        let table = freud2_table(8);
        let block = table.eval_weighted(30.0, 8, 1).unwrap();
        assert_eq!(block.w, 0.0);
        for k in 0..8 {
            assert_eq!(block.value(k, 0), 0.0);
        }
    }

    #[test]
    fn erdos_table_builds_clean() {
        let spec = WeightSpec::erdos(2.0, 0.0, 1).unwrap();
        let table = build_recurrence(&spec, 40, &StieltjesConfig::default()).unwrap();
        let r = table.orthonormality_residual();
        assert!(r <= 1e-9, "residual {r}");
        for k in 1..=40 {
            assert!(table.a(k) > 0.0);
        }
    }

    #[test]
    fn erdos_depth_two_within_working_cap() {
        // the double tower lives on a tiny interval; the gate still holds
        let spec = WeightSpec::erdos(2.0, 0.0, 2).unwrap();
        let table = build_recurrence(&spec, 24, &StieltjesConfig::default()).unwrap();
        assert!(table.radius < 2.5, "radius {}", table.radius);
        let r = table.orthonormality_residual();
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn leading_coefficient_ratio_band() {
        let spec = WeightSpec::freud(2.0).unwrap();
        let table = freud2_table(130);
        let mrs = MrsTable::build(&spec, &[16.0, 32.0, 64.0, 128.0], 1e-12).unwrap();
        let rep = table.verify_34(&mrs, &[16, 32, 64, 128]).unwrap();
        for (_, ratio) in &rep.rows {
            assert!(*ratio >= 0.3 && *ratio <= 0.8, "ratio {ratio} out of band");
        }
        assert!(rep.passed(), "slope {} too steep", rep.slope);
        // n = 1 edge: finite positive value
        let mrs1 = MrsTable::build(&spec, &[1.0], 1e-12).unwrap();
        let rep1 = table.verify_34(&mrs1, &[1]).unwrap();
        assert!(rep1.rows[0].1.is_finite() && rep1.rows[0].1 > 0.0);
    }
}
