//! Exponential weight families `w = exp(-Q)` and their local data.
//!
//! Two families are supported: Freud powers `Q(x) = |x|^alpha` (bounded
//! T-function, T ≡ alpha) and Erdős iterated exponentials
//! `Q(x) = |x|^u (exp_l(|x|^alpha) - exp_l(0))` (unbounded T). Derivatives up
//! to order four are produced with truncated-Taylor (jet) arithmetic so the
//! chain rule through the iterated exponential is exact to rounding.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Beyond this value of Q the weight is an exact zero at double precision;
/// harnesses truncate their domains here.
pub const LOGW_BUDGET: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightFamily {
    Freud,
    Erdos,
}

/// Parameters of one exponential weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub alpha: f64,
    /// Power prefactor |x|^u, Erdős only.
    #[serde(default)]
    pub u: f64,
    /// Iterated-exponential depth, Erdős only. Working cap is l <= 2: deeper
    /// towers overflow double precision at tiny |x|.
    #[serde(default = "default_depth")]
    pub l: u32,
}

fn default_depth() -> u32 {
    1
}

impl WeightSpec {
    pub fn freud(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Precondition(format!(
                "Freud weight needs alpha > 1, got {alpha}"
            )));
        }
        Ok(Self {
            family: WeightFamily::Freud,
            alpha,
            u: 0.0,
            l: 1,
        })
    }

    pub fn erdos(alpha: f64, u: f64, l: u32) -> Result<Self> {
        if !(alpha > 0.0) || !(u >= 0.0) || !(alpha + u > 1.0) || l < 1 {
            return Err(Error::Precondition(format!(
                "Erdős weight needs alpha > 0, u >= 0, alpha + u > 1, l >= 1; got alpha={alpha} u={u} l={l}"
            )));
        }
        if l > 2 {
            return Err(Error::Precondition(format!(
                "iterated-exponential depth {l} exceeds the double-precision working cap of 2"
            )));
        }
        Ok(Self {
            family: WeightFamily::Erdos,
            alpha,
            u,
            l,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            WeightFamily::Freud => Self::freud(self.alpha).map(|_| ()),
            WeightFamily::Erdos => Self::erdos(self.alpha, self.u, self.l).map(|_| ()),
        }
    }

    /// Short label used in report ids and file names.
    pub fn label(&self) -> String {
        match self.family {
            WeightFamily::Freud => format!("freud-a{}", self.alpha),
            WeightFamily::Erdos => format!("erdos-a{}-u{}-l{}", self.alpha, self.u, self.l),
        }
    }
}

/// Q and its derivatives at a point, plus `log w = -Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QJet {
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    pub logw: f64,
}

/// Fourth-order truncated Taylor jet: value and derivatives f, f', .., f''''.
#[derive(Debug, Clone, Copy)]
struct Jet4([f64; 5]);

impl Jet4 {
    fn sub_const(self, c: f64) -> Self {
        let mut d = self.0;
        d[0] -= c;
        Jet4(d)
    }

    fn mul(self, rhs: Jet4) -> Self {
        let a = self.0;
        let b = rhs.0;
        // Leibniz rule
        Jet4([
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
            a[4] * b[0] + 4.0 * a[3] * b[1] + 6.0 * a[2] * b[2] + 4.0 * a[1] * b[3] + a[0] * b[4],
        ])
    }

    fn exp(self) -> Self {
        let g = self.0;
        let mut h = [0.0; 5];
        h[0] = g[0].exp();
        // h' = g' h, differentiated with Leibniz
        h[1] = g[1] * h[0];
        h[2] = g[2] * h[0] + g[1] * h[1];
        h[3] = g[3] * h[0] + 2.0 * g[2] * h[1] + g[1] * h[2];
        h[4] = g[4] * h[0] + 3.0 * g[3] * h[1] + 3.0 * g[2] * h[2] + g[1] * h[3];
        Jet4(h)
    }

    /// x^p on the base variable (x >= 0). Coefficients are checked before the
    /// power so that a vanishing falling factorial kills a singular 0^(p-k).
    fn base_pow(x: f64, p: f64) -> Self {
        let mut out = [0.0; 5];
        let mut coeff = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if coeff == 0.0 {
                *slot = 0.0;
            } else {
                *slot = coeff * pow_zero_safe(x, p - k as f64);
            }
            coeff *= p - k as f64;
        }
        Jet4(out)
    }

    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// x^e with the conventions 0^0 = 1, 0^positive = 0, 0^negative = +inf.
fn pow_zero_safe(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        if e == 0.0 {
            1.0
        } else if e > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powf(e)
    }
}

/// exp_l(y): the l-times iterated exponential.
fn exp_iter(y: f64, l: u32) -> f64 {
    let mut v = y;
    for _ in 0..l {
        v = v.exp();
    }
    v
}

fn q_jet_at(spec: &WeightSpec, x_abs: f64) -> Jet4 {
    match spec.family {
        WeightFamily::Freud => Jet4::base_pow(x_abs, spec.alpha),
        WeightFamily::Erdos => {
            let mut t = Jet4::base_pow(x_abs, spec.alpha);
            for _ in 0..spec.l {
                t = t.exp();
            }
            let shifted = t.sub_const(exp_iter(0.0, spec.l));
            if spec.u == 0.0 {
                shifted
            } else {
                Jet4::base_pow(x_abs, spec.u).mul(shifted)
            }
        }
    }
}

/// Q(x) alone, cheap scalar path for quadrature loops. Returns +inf when the
/// tower overflows.
pub fn q_value(spec: &WeightSpec, x: f64) -> f64 {
    let x = x.abs();
    match spec.family {
        WeightFamily::Freud => x.powf(spec.alpha),
        WeightFamily::Erdos => {
            let body = exp_iter(x.powf(spec.alpha), spec.l) - exp_iter(0.0, spec.l);
            if spec.u == 0.0 {
                body
            } else {
                x.powf(spec.u) * body
            }
        }
    }
}

/// Q, Q', .., Q'''' and log w at |x| (evenness applied).
///
/// Errors with `SingularPoint` when a derivative is genuinely singular at
/// x = 0 (Erdős with u > 0, or fractional Freud powers below the requested
/// order), and `OverflowDomain` when the value leaves the exponent range.
pub fn q_jet(spec: &WeightSpec, x: f64) -> Result<QJet> {
    if !x.is_finite() {
        return Err(Error::Precondition(format!("non-finite x = {x}")));
    }
    let xa = x.abs();
    if xa == 0.0 && spec.family == WeightFamily::Erdos && spec.u > 0.0 {
        return Err(Error::SingularPoint(
            "Erdős weight with u > 0 has singular derivatives at x = 0".into(),
        ));
    }
    let jet = q_jet_at(spec, xa);
    if !jet.is_finite() {
        if jet.0[0].is_finite() && xa == 0.0 {
            return Err(Error::SingularPoint(format!(
                "derivative of Q singular at x = 0 for {}",
                spec.label()
            )));
        }
        return Err(Error::OverflowDomain(format!(
            "Q jet overflows at |x| = {xa} for {}",
            spec.label()
        )));
    }
    let d = jet.0;
    Ok(QJet {
        q: d[0],
        q1: d[1],
        q2: d[2],
        q3: d[3],
        q4: d[4],
        logw: -d[0],
    })
}

/// T(x) = x Q'(x) / Q(x), even in x; identically alpha for Freud powers.
///
/// Erdős families use the algebraic collapse
/// T = u + alpha s exp_l'(s)/(exp_l(s) - exp_l(0)), s = |x|^alpha, written in
/// underflow-safe form, so T stays computable far past the point where the
/// raw Q jet leaves the exponent range.
pub fn t_func(spec: &WeightSpec, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::SingularPoint(
            "T(x) = xQ'/Q undefined at x = 0".into(),
        ));
    }
    match spec.family {
        WeightFamily::Freud => Ok(spec.alpha),
        WeightFamily::Erdos => {
            let s = x.abs().powf(spec.alpha);
            let tail = match spec.l {
                // alpha s / (1 - e^{-s})
                1 => spec.alpha * s / (-(-s).exp_m1()),
                // alpha s e^s / (1 - e^{1 - e^s})
                2 => {
                    let es = s.exp();
                    if !es.is_finite() {
                        return Err(Error::OverflowDomain(format!(
                            "T overflows at |x| = {} for {}",
                            x.abs(),
                            spec.label()
                        )));
                    }
                    spec.alpha * s * es / (1.0 - (1.0 - es).exp())
                }
                _ => {
                    return Err(Error::Precondition(format!(
                        "iterated-exponential depth {} beyond working cap",
                        spec.l
                    )))
                }
            };
            Ok(spec.u + tail)
        }
    }
}

/// (w(x), log w(x)). Never errors: w underflows to 0 while log w stays exact
/// (or saturates to -inf when Q itself leaves the exponent range).
pub fn weight_eval(spec: &WeightSpec, x: f64) -> (f64, f64) {
    let q = q_value(spec, x);
    let logw = -q;
    ((-q).exp(), logw)
}

/// Radius beyond which Q(x) > q_cap, found by doubling + bisection.
pub fn q_radius(spec: &WeightSpec, q_cap: f64) -> f64 {
    let mut hi = 1.0_f64;
    while q_value(spec, hi) <= q_cap {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_value(spec, mid) > q_cap {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// Sampled class-membership diagnostics over a grid: extrema of T (condition
/// (d)), of Q''Q/(Q')^2 (condition (e)) and of |Q'|/Q^lambda (the
/// F_lambda growth condition). Empirical constants only, never a proof.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub lambda: f64,
    pub min_t: f64,
    pub argmin_t: f64,
    pub max_t: f64,
    pub argmax_t: f64,
    pub t_nondecreasing_on_positive_grid: bool,
    pub min_e_ratio: f64,
    pub max_e_ratio: f64,
    pub max_qp_over_q_lambda: f64,
}

pub fn class_report(spec: &WeightSpec, grid: &[f64], lambda: f64) -> Result<ClassReport> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty diagnostic grid".into()));
    }
    if grid.contains(&0.0) {
        return Err(Error::SingularPoint(
            "diagnostic grid contains x = 0".into(),
        ));
    }
    let mut min_t = f64::INFINITY;
    let mut argmin_t = f64::NAN;
    let mut max_t = f64::NEG_INFINITY;
    let mut argmax_t = f64::NAN;
    let mut min_e = f64::INFINITY;
    let mut max_e = f64::NEG_INFINITY;
    let mut max_growth = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut prev_pos: Option<(f64, f64)> = None;
    let mut pos: Vec<f64> = grid.iter().map(|x| x.abs()).collect();
    pos.sort_by(f64::total_cmp);
    for &x in &pos {
        let jet = q_jet(spec, x)?;
        let t = t_func(spec, x)?;
        if t < min_t {
            min_t = t;
            argmin_t = x;
        }
        if t > max_t {
            max_t = t;
            argmax_t = x;
        }
        let e_ratio = jet.q2 * jet.q / (jet.q1 * jet.q1);
        min_e = min_e.min(e_ratio);
        max_e = max_e.max(e_ratio);
        max_growth = max_growth.max(jet.q1.abs() / jet.q.powf(lambda));
        if let Some((px, pt)) = prev_pos {
            if x > px && t < pt - 1e-12 * pt.abs() {
                monotone = false;
            }
        }
        prev_pos = Some((x, t));
    }
    Ok(ClassReport {
        lambda,
        min_t,
        argmin_t,
        max_t,
        argmax_t,
        t_nondecreasing_on_positive_grid: monotone,
        min_e_ratio: min_e,
        max_e_ratio: max_e,
        max_qp_over_q_lambda: max_growth,
    })
}
