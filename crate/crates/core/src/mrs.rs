//! Mhaskar–Rakhmanov–Saff numbers: for x > 0, a_x is the positive root of
//!
//!   x = (2/pi) ∫_0^1 a_x u Q'(a_x u) (1 - u^2)^{-1/2} du.
//!
//! The substitution u = sin(theta) removes the endpoint singularity exactly,
//! after which a fixed composite Gauss–Legendre rule resolves the integrand
//! to near machine precision. The right-hand side is strictly increasing in
//! a (Q' is positive and increasing on (0, inf)), so doubling/halving finds a
//! bracket and bisection with a Newton polish finds the root
//! deterministically.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, KahanSum};
use crate::weights::{q_jet, q_value, t_func, WeightSpec};
use serde::Serialize;

const RHS_PANELS: usize = 8;
const RHS_NODES: usize = 64;

/// Default relative root tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Right-hand side of the defining equation at candidate a.
pub fn mrs_rhs(spec: &WeightSpec, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Precondition(format!("mrs_rhs needs a > 0, got {a}")));
    }
    rhs_with(spec, a, |jet, s| a * s * jet.q1)
}

/// d/da of the right-hand side, used for the Newton polish.
fn mrs_rhs_prime(spec: &WeightSpec, a: f64) -> Result<f64> {
    rhs_with(spec, a, |jet, s| s * jet.q1 + a * s * s * jet.q2)
}

fn rhs_with<F: Fn(&crate::weights::QJet, f64) -> f64>(
    spec: &WeightSpec,
    a: f64,
    integrand: F,
) -> Result<f64> {
    let rule = gauss_legendre(RHS_NODES);
    let half_width = std::f64::consts::FRAC_PI_2 / RHS_PANELS as f64 / 2.0;
    let mut acc = KahanSum::new();
    for p in 0..RHS_PANELS {
        let mid = (2 * p + 1) as f64 * half_width;
        for (t, w) in rule.0.iter().zip(rule.1.iter()) {
            let theta = mid + half_width * t;
            let s = theta.sin();
            let jet = q_jet(spec, a * s)?;
            acc.add(w * half_width * integrand(&jet, s));
        }
    }
    Ok(acc.total() * std::f64::consts::FRAC_2_PI)
}

/// RHS mapped for bracketing: overflow counts as +inf (monotone RHS).
fn rhs_or_inf(spec: &WeightSpec, a: f64) -> f64 {
    match mrs_rhs(spec, a) {
        Ok(v) => v,
        Err(Error::OverflowDomain(_)) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

/// The MRS number a_x: deterministic bracketing + bisection + Newton polish.
pub fn mrs_number(spec: &WeightSpec, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Precondition(format!(
            "MRS number defined for x > 0, got {x}"
        )));
    }
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
    let mut lo = 1e-8_f64;
    let mut hi = 1.0_f64;
    let mut f_lo = rhs_or_inf(spec, lo);
    let mut f_hi = rhs_or_inf(spec, hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NonFinite("MRS right-hand side returned NaN".into()));
    }
    while f_lo > x {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::BracketFailure(format!(
                "no lower bracket for x = {x}"
            )));
        }
        f_lo = rhs_or_inf(spec, lo);
    }
    while f_hi < x {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::BracketFailure(format!(
                "no upper bracket for x = {x}"
            )));
        }
        f_hi = rhs_or_inf(spec, hi);
    }
    // Bisection to a tight interval.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = rhs_or_inf(spec, mid);
        if f_mid < x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    // Newton polish while it stays inside the bracket.
    for _ in 0..4 {
        let f = rhs_or_inf(spec, a);
        if !f.is_finite() {
            break;
        }
        if (f - x).abs() <= tol * x {
            break;
        }
        let d = match mrs_rhs_prime(spec, a) {
            Ok(d) if d.is_finite() && d > 0.0 => d,
            _ => break,
        };
        let next = a - (f - x) / d;
        if next <= lo || next >= hi || !next.is_finite() {
            break;
        }
        a = next;
    }
    let residual = (rhs_or_inf(spec, a) - x).abs();
    if residual > tol * x * 10.0 {
        return Err(Error::BracketFailure(format!(
            "MRS solve for x = {x} stalled at residual {residual:e}"
        )));
    }
    Ok(a)
}

/// Cached table x -> a_x with solver diagnostics. Built once, then shared
/// read-only; lookups are exact on the keys it was built with.
#[derive(Debug, Clone, Serialize)]
pub struct MrsTable {
    pub spec: WeightSpec,
    pub solver_tol: f64,
    /// (x, a_x, |rhs(a_x) - x|) sorted by x.
    pub entries: Vec<(f64, f64, f64)>,
}

impl MrsTable {
    pub fn build(spec: &WeightSpec, xs: &[f64], tol: f64) -> Result<Self> {
        let mut xs: Vec<f64> = xs.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut entries = Vec::with_capacity(xs.len());
        for &x in &xs {
            let a = mrs_number(spec, x, tol)?;
            let residual = (mrs_rhs(spec, a)? - x).abs();
            entries.push((x, a, residual));
        }
        Ok(Self {
            spec: *spec,
            solver_tol: tol,
            entries,
        })
    }

    /// Exact-key lookup.
    pub fn lookup(&self, x: f64) -> Option<f64> {
        self.entries
            .binary_search_by(|e| e.0.total_cmp(&x))
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Lookup, or a fresh solve at the table's tolerance (no caching; a_x is
    /// cheap and interpolation would bias ratio studies).
    pub fn a_of(&self, x: f64) -> Result<f64> {
        match self.lookup(x) {
            Some(a) => Ok(a),
            None => mrs_number(&self.spec, x, self.solver_tol),
        }
    }
}

/// One row of the Lemma-2.1 style asymptotic ratio study at parameter t.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub t: f64,
    pub a_t: f64,
    /// a_t / a_{Lt}
    pub a_ratio: f64,
    /// Q(a_t) / Q(a_{Lt})
    pub q_ratio: f64,
    /// T(a_t) / T(a_{Lt})
    pub t_ratio: f64,
    /// [t / sqrt(T(a_t))] / Q(a_t)
    pub q_ident: f64,
    /// [t sqrt(T(a_t)) / a_t] / Q'(a_t)
    pub qp_ident: f64,
    /// [1 / T(a_t)] / |1 - a_{Lt}/a_t|
    pub gap_ident: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub spec: WeightSpec,
    pub scale_factor: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    /// (min, max) of one ratio across the grid.
    pub fn band<F: Fn(&ScalingRow) -> f64>(&self, f: F) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.rows {
            let v = f(row);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// The five comparison ratios of the asymptotic lemma plus the T-gap
/// identity, per t in the grid.
pub fn lemma21_report(spec: &WeightSpec, t_grid: &[f64], scale: f64) -> Result<ScalingReport> {
    if !(scale > 0.0) {
        return Err(Error::Precondition(format!(
            "scale factor must be positive, got {scale}"
        )));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let a_t = mrs_number(spec, t, DEFAULT_TOL)?;
        let a_lt = mrs_number(spec, scale * t, DEFAULT_TOL)?;
        let jet = q_jet(spec, a_t)?;
        let jet_l = q_jet(spec, a_lt)?;
        let t_at = t_func(spec, a_t)?;
        let t_alt = t_func(spec, a_lt)?;
        let gap = (1.0 - a_lt / a_t).abs();
        rows.push(ScalingRow {
            t,
            a_t,
            a_ratio: a_t / a_lt,
            q_ratio: jet.q / jet_l.q,
            t_ratio: t_at / t_alt,
            q_ident: (t / t_at.sqrt()) / jet.q,
            qp_ident: (t * t_at.sqrt() / a_t) / jet.q1,
            gap_ident: if gap > 0.0 {
                (1.0 / t_at) / gap
            } else {
                f64::INFINITY
            },
        });
    }
    Ok(ScalingReport {
        spec: *spec,
        scale_factor: scale,
        rows,
    })
}

/// Least-squares slope of log T(a_n) against log n, with the growth-bound
/// verdict slope < 2/(2k+3).
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub k: u32,
    pub slope: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn lemma26_fit(spec: &WeightSpec, k: u32, n_grid: &[f64]) -> Result<GrowthFit> {
    if n_grid.len() < 2 {
        return Err(Error::Precondition("need at least two grid points".into()));
    }
    let span = n_grid.last().unwrap() / n_grid.first().unwrap();
    if span < 100.0 {
        return Err(Error::Precondition(format!(
            "n grid must span at least two decades, got factor {span}"
        )));
    }
    let mut pts = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a = mrs_number(spec, n, DEFAULT_TOL)?;
        let t = t_func(spec, a)?;
        pts.push((n.ln(), t.ln()));
    }
    let slope = crate::report::ls_slope(&pts);
    let bound = 2.0 / (2.0 * k as f64 + 3.0);
    Ok(GrowthFit {
        k,
        slope,
        bound,
        pass: slope < bound,
    })
}

/// Convenience: T(a_x) and Q(a_x) for table emission.
pub fn mrs_row(spec: &WeightSpec, x: f64, tol: f64) -> Result<(f64, f64, f64, f64)> {
    let a = mrs_number(spec, x, tol)?;
    let t = t_func(spec, a)?;
    let q = q_value(spec, a);
    let residual = (mrs_rhs(spec, a)? - x).abs();
    Ok((a, t, q, residual))
}
