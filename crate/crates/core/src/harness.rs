//! Weighted L^p norm estimation and the ratio-boundedness experiments.
//!
//! Each verification routine instantiates one weighted norm inequality: per
//! polynomial degree n it computes the quotient of the inequality's left side
//! by its right side over a fixed function suite, and the report passes when
//! the log-log trend of the quotients is flat. The constants in the source
//! inequalities are existence-only; a flat trend is the falsifiable
//! desk-scale surrogate. The restricted-range inequality is the one exception
//! with an explicit constant (2), checked as a hard cap.

use crate::error::{Error, Result};
use crate::mrs::MrsTable;
use crate::operators::{fourier_coeffs, vp_mean, TestFunction};
use crate::orthopoly::RecurrenceTable;
use crate::quad::{gauss_legendre, KahanSum};
use crate::report::RatioReport;
use crate::weights::{q_value, t_func, WeightSpec};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

/// Domain over which a weighted norm is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DomainPolicy {
    /// The whole line, truncated where the sampler has decayed below 1e-200.
    FullDecay,
    /// The symmetric interval [-r, r].
    Interval(f64),
}

/// Parameters of a weighted norm evaluation. `p = f64::INFINITY` selects the
/// sup norm (dense Chebyshev grid plus golden-section refinement).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormConfig {
    pub p: f64,
    pub grid_density: usize,
    pub domain: DomainPolicy,
    pub refine_tol: f64,
}

impl NormConfig {
    pub fn new(p: f64, grid_density: usize, domain: DomainPolicy) -> Self {
        Self {
            p,
            grid_density: grid_density.max(64),
            domain,
            refine_tol: 1e-6,
        }
    }
}

/// Sampler decay threshold for FullDecay truncation.
const DECAY_FLOOR: f64 = 1e-200;

fn decay_radius<F: Fn(f64) -> f64>(g: &F) -> Result<f64> {
    let mut r = 1.0_f64;
    loop {
        let probe = [r, 0.85 * r, 0.7 * r];
        let mut alive = false;
        for &x in &probe {
            let (vp, vm) = (g(x), g(-x));
            if !vp.is_finite() || !vm.is_finite() {
                return Err(Error::NonFinite(format!(
                    "sampler returned a non-finite value near |x| = {x}"
                )));
            }
            if vp.abs() >= DECAY_FLOOR || vm.abs() >= DECAY_FLOOR {
                alive = true;
            }
        }
        if !alive {
            return Ok(r);
        }
        r *= 1.25;
        if r > 1e7 {
            return Err(Error::NonFinite(
                "sampler has not decayed below 1e-200 by |x| = 1e7".into(),
            ));
        }
    }
}

/// ||g||_{L^p} for a weighted-function sampler g (the sampler returns the
/// already-weighted values, e.g. (fw)(x)).
pub fn weighted_norm<F: Fn(f64) -> f64>(g: &F, cfg: &NormConfig) -> Result<f64> {
    if !(cfg.p >= 1.0) {
        return Err(Error::Precondition(format!(
            "p must be >= 1, got {}",
            cfg.p
        )));
    }
    let radius = match cfg.domain {
        DomainPolicy::Interval(r) => {
            if !(r > 0.0) {
                return Err(Error::Precondition(format!("domain radius {r} <= 0")));
            }
            r
        }
        DomainPolicy::FullDecay => decay_radius(g)?,
    };
    if cfg.p.is_infinite() {
        sup_norm(g, radius, cfg.grid_density.max(64), cfg.refine_tol)
    } else {
        lp_norm(g, cfg.p, radius, cfg.grid_density.max(64), cfg.refine_tol)
    }
}

fn sup_norm<F: Fn(f64) -> f64>(g: &F, radius: f64, points: usize, tol: f64) -> Result<f64> {
    // Chebyshev-distributed grid over [-radius, radius]
    let m = points.max(8);
    let mut best = 0.0_f64;
    let mut best_i = 0usize;
    let mut xs = Vec::with_capacity(m);
    for i in 0..m {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
        xs.push(radius * theta.cos());
    }
    for (i, &x) in xs.iter().enumerate() {
        let v = g(x).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("sampler non-finite at x = {x}")));
        }
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section refinement on the bracket around the best grid point.
    let lo = if best_i + 1 < m {
        xs[best_i + 1]
    } else {
        -radius
    };
    let hi = if best_i > 0 { xs[best_i - 1] } else { radius };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = g(c).abs();
    let mut fd = g(d).abs();
    for _ in 0..120 {
        if (b - a).abs() <= tol * radius.max(1.0) * 1e-3 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d).abs();
        }
    }
    Ok(best.max(fc).max(fd))
}

fn lp_norm<F: Fn(f64) -> f64>(
    g: &F,
    p: f64,
    radius: f64,
    grid_density: usize,
    tol: f64,
) -> Result<f64> {
    let base_panels = (grid_density / 16).max(8);
    let nodes = 32;
    let mut prev: Option<f64> = None;
    let mut panels = base_panels;
    for round in 0..4 {
        let integral = lp_integral(g, p, radius, panels, nodes)?;
        if let Some(before) = prev {
            if (integral - before).abs() <= tol * integral.abs().max(1e-300) {
                return Ok(integral.powf(1.0 / p));
            }
        }
        prev = Some(integral);
        if round < 3 {
            panels *= 2;
        }
    }
    Ok(prev.unwrap().powf(1.0 / p))
}

fn lp_integral<F: Fn(f64) -> f64>(
    g: &F,
    p: f64,
    radius: f64,
    panels: usize,
    nodes: usize,
) -> Result<f64> {
    let rule = gauss_legendre(nodes);
    let width = radius / panels as f64;
    let mut acc = KahanSum::new();
    for panel in 0..panels {
        let mid = (panel as f64 + 0.5) * width;
        for (t, w) in rule.0.iter().zip(rule.1.iter()) {
            let x = mid + 0.5 * width * t;
            let (vp, vm) = (g(x), g(-x));
            if !vp.is_finite() || !vm.is_finite() {
                return Err(Error::NonFinite(format!("sampler non-finite at |x| = {x}")));
            }
            acc.add(0.5 * width * w * (vp.abs().powf(p) + vm.abs().powf(p)));
        }
    }
    Ok(acc.total())
}

/// T(x) evaluated with the origin excluded: the grids stay 1e-8 away from 0,
/// where both families have finite limits anyway.
fn t_guarded(spec: &WeightSpec, x: f64) -> f64 {
    let xa = if x.abs() < 1e-8 { 1e-8 } else { x.abs() };
    t_func(spec, xa).unwrap_or(f64::NAN)
}

/// value * T^pow with the shortcut that an underflowed weighted value makes
/// the whole integrand an exact zero, whatever T does out there.
fn with_t_power(spec: &WeightSpec, value: f64, x: f64, pow: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value * t_guarded(spec, x).powf(pow)
    }
}

/// Standard-normal sampler (Box–Muller over the ChaCha stream); deterministic
/// for a fixed seed, which keeps every report byte-reproducible.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn suite_rng(seed: u64, n: usize, index: usize) -> ChaCha8Rng {
    let mix = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    ChaCha8Rng::seed_from_u64(mix)
}

/// Coefficient vectors (in the orthonormal basis) of the random polynomial
/// suite for degree n; standard normal entries keep ||Pw||_2 well scaled.
/// Streams are keyed by suite index only, so the degree-n polynomial of
/// index i extends the degree-m one coefficient-for-coefficient (m < n):
/// ratio rows then track one coherent family instead of re-rolling the max
/// at every n.
fn random_poly_suite(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut rng = suite_rng(seed, 0, i);
            (0..=n).map(|_| normal(&mut rng)).collect()
        })
        .collect()
}

/// Restricted-range check: ||Pw||_{L^p(R)} / ||Pw||_{L^p([-a_n, a_n])} over a
/// random suite, which the source inequality caps at 2.
pub fn verify_restricted_range(
    rec: &RecurrenceTable,
    mrs: &MrsTable,
    n_grid: &[usize],
    p: f64,
    count: usize,
    seed: u64,
) -> Result<RatioReport> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a_n = mrs.a_of(n as f64)?;
        let mut worst = 0.0_f64;
        for coeffs in random_poly_suite(seed, n, count) {
            let g = |x: f64| rec.weighted_combo(x, &coeffs, 0, None).unwrap_or(f64::NAN);
            let density = 8 * (n + 1);
            let full = weighted_norm(&g, &NormConfig::new(p, density, DomainPolicy::FullDecay))?;
            let restricted = weighted_norm(
                &g,
                &NormConfig::new(p, density, DomainPolicy::Interval(a_n)),
            )?;
            if restricted <= 0.0 {
                return Err(Error::DegenerateSum(format!(
                    "restricted norm vanished at n = {n}"
                )));
            }
            worst = worst.max(full / restricted);
        }
        rows.push((n as f64, worst));
    }
    Ok(RatioReport::from_rows("2.3", rows).with_hard_cap(2.0 * (1.0 + 1e-6)))
}

/// Which side of the Markov–Bernstein pair is being instantiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BernsteinMode {
    /// ||P^{(j)} w / T^{j/2}|| <= C (n/a_n)^j ||Pw||
    WithT,
    /// ||P^{(j)} w|| <= C (n/a_n)^j ||T^{j/2} P w||
    InverseT,
}

#[allow(clippy::too_many_arguments)]
pub fn verify_bernstein(
    rec: &RecurrenceTable,
    mrs: &MrsTable,
    n_grid: &[usize],
    p: f64,
    j: usize,
    mode: BernsteinMode,
    count: usize,
    seed: u64,
) -> Result<RatioReport> {
    if !(1..=4).contains(&j) {
        return Err(Error::Precondition(format!(
            "derivative order j must be in 1..=4, got {j}"
        )));
    }
    let spec = rec.spec;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a_n = mrs.a_of(n as f64)?;
        let scale = (n as f64 / a_n).powi(j as i32);
        let mut worst = 0.0_f64;
        for coeffs in random_poly_suite(seed, n, count) {
            let density = 8 * (n + 1);
            let deriv = |x: f64| rec.weighted_combo(x, &coeffs, j, None).unwrap_or(f64::NAN);
            let plain = |x: f64| rec.weighted_combo(x, &coeffs, 0, None).unwrap_or(f64::NAN);
            let (lhs, rhs) = match mode {
                BernsteinMode::WithT => {
                    let lhs_g = |x: f64| with_t_power(&spec, deriv(x), x, -(j as f64) / 2.0);
                    let lhs = weighted_norm(
                        &lhs_g,
                        &NormConfig::new(p, density, DomainPolicy::FullDecay),
                    )?;
                    let rhs = weighted_norm(
                        &plain,
                        &NormConfig::new(p, density, DomainPolicy::FullDecay),
                    )?;
                    (lhs, rhs)
                }
                BernsteinMode::InverseT => {
                    let lhs = weighted_norm(
                        &deriv,
                        &NormConfig::new(p, density, DomainPolicy::FullDecay),
                    )?;
                    let rhs_g = |x: f64| with_t_power(&spec, plain(x), x, j as f64 / 2.0);
                    let rhs = weighted_norm(
                        &rhs_g,
                        &NormConfig::new(p, density, DomainPolicy::FullDecay),
                    )?;
                    (lhs, rhs)
                }
            };
            if rhs <= 0.0 {
                return Err(Error::DegenerateSum(format!("norm vanished at n = {n}")));
            }
            worst = worst.max(lhs / (scale * rhs));
        }
        rows.push((n as f64, worst));
    }
    let id = match mode {
        BernsteinMode::WithT => format!("2.6/j{j}"),
        BernsteinMode::InverseT => format!("2.7/j{j}"),
    };
    Ok(RatioReport::from_rows(id, rows))
}

/// The de la Vallée Poussin mean inequalities under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VpTheorem {
    /// (1.11): ||v_n^{(j)}(f) w / T^{(2j+1)/4}||_p <= C (n/a_n)^j ||fw||_p
    T11,
    /// (1.12): ||v_n^{(j)}(f) w||_p <= C (n/a_n)^j ||T^{(2j+1)/4} f w||_p, p >= 2
    T12,
    /// (1.13): ||v_n^{(j)}(f) w||_p <= C (n/a_n)^j a_n^{(2-p)/2p} ||T^{(2j+1)/4} f w||_2, 1 <= p <= 2
    T13,
    /// (1.5): ||v_n(f) w / T^{1/4}||_p <= C ||fw||_p
    Ineq15,
    /// (1.6): ||v_n(f) w||_p <= C ||T^{1/4} f w||_p
    Ineq16,
    /// (4.1): ||v_n^{(j)}(f) w||_p <= C (n/a_n)^j T(a_n)^{(2j+1)/4} ||fw||_p
    Ineq41,
    /// (6.4): ||v_n^{(j)}(f) w (1+|x|)^{-(2-p)beta/(2p)}||_p <= C (n/a_n)^j ||T^{(2j+1)/4} f w||_2
    Ineq64,
}

impl VpTheorem {
    pub fn id(&self) -> &'static str {
        match self {
            VpTheorem::T11 => "1.11",
            VpTheorem::T12 => "1.12",
            VpTheorem::T13 => "1.13",
            VpTheorem::Ineq15 => "1.5",
            VpTheorem::Ineq16 => "1.6",
            VpTheorem::Ineq41 => "4.1",
            VpTheorem::Ineq64 => "6.4",
        }
    }

    fn uses_j(&self) -> bool {
        !matches!(self, VpTheorem::Ineq15 | VpTheorem::Ineq16)
    }
}

/// One run of a de la Vallée Poussin mean inequality over the function suite.
///
/// For (1.12) with 1 <= p < 2 — a range the underlying result leaves open —
/// the rows are produced but the verdict is `Exploratory`.
#[allow(clippy::too_many_arguments)]
pub fn verify_vp_theorem(
    rec: &RecurrenceTable,
    mrs: &MrsTable,
    suite: &[TestFunction],
    thm: VpTheorem,
    p: f64,
    j: usize,
    n_grid: &[usize],
    beta: f64,
) -> Result<RatioReport> {
    if !(p >= 1.0) {
        return Err(Error::TheoremRangeViolation(format!("p = {p} < 1")));
    }
    let j = if thm.uses_j() { j } else { 0 };
    if thm.uses_j() && !(1..=4).contains(&j) {
        return Err(Error::Precondition(format!(
            "derivative order j must be in 1..=4, got {j}"
        )));
    }
    let mut exploratory = false;
    match thm {
        VpTheorem::T12 if p < 2.0 => exploratory = true,
        VpTheorem::T13 | VpTheorem::Ineq64 if p > 2.0 => {
            return Err(Error::TheoremRangeViolation(format!(
                "{} needs 1 <= p <= 2, got {p}",
                thm.id()
            )));
        }
        _ => {}
    }
    if thm == VpTheorem::Ineq64 && !(beta > 1.0) {
        return Err(Error::Precondition(format!(
            "(6.4) needs beta > 1, got {beta}"
        )));
    }
    let max_n = *n_grid
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("empty n grid".into()))?;
    if 2 * max_n > rec.n_max {
        return Err(Error::Precondition(format!(
            "vp mean at n = {max_n} needs 2n coefficients but the table has degree {}",
            rec.n_max
        )));
    }
    let spec = rec.spec;
    let tpow = (2.0 * j as f64 + 1.0) / 4.0;

    // Coefficients and right-hand norms are n-independent: compute once per f.
    struct Prepared {
        coeffs: crate::operators::CoeffVector,
        rhs_norm: f64,
    }
    let mut prepared = Vec::with_capacity(suite.len());
    for f in suite {
        let coeffs = fourier_coeffs(f, rec, 2 * max_n)?;
        let density = 16 * max_n;
        let rhs_norm = match thm {
            VpTheorem::T11 | VpTheorem::Ineq15 | VpTheorem::Ineq41 => weighted_norm(
                &|x: f64| f.fw(x),
                &NormConfig::new(p, density, DomainPolicy::FullDecay),
            )?,
            VpTheorem::T12 => weighted_norm(
                &|x: f64| with_t_power(&spec, f.fw(x), x, tpow),
                &NormConfig::new(p, density, DomainPolicy::FullDecay),
            )?,
            VpTheorem::Ineq16 => weighted_norm(
                &|x: f64| with_t_power(&spec, f.fw(x), x, 0.25),
                &NormConfig::new(p, density, DomainPolicy::FullDecay),
            )?,
            VpTheorem::T13 | VpTheorem::Ineq64 => weighted_norm(
                &|x: f64| with_t_power(&spec, f.fw(x), x, tpow),
                &NormConfig::new(2.0, density, DomainPolicy::FullDecay),
            )?,
        };
        if rhs_norm <= 0.0 {
            return Err(Error::DegenerateSum(format!(
                "right-hand norm vanished for target {}",
                f.id
            )));
        }
        prepared.push(Prepared { coeffs, rhs_norm });
    }

    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a_n = mrs.a_of(n as f64)?;
        let scale_base = (n as f64 / a_n).powi(j as i32);
        let scale = match thm {
            VpTheorem::T13 => scale_base * a_n.powf((2.0 - p) / (2.0 * p)),
            VpTheorem::Ineq41 => {
                let t_an = t_func(&spec, a_n)?;
                scale_base * t_an.powf(tpow)
            }
            _ => scale_base,
        };
        let mut worst = 0.0_f64;
        for prep in &prepared {
            let vp = |x: f64| vp_mean(&prep.coeffs, rec, x, n, j).unwrap_or(f64::NAN);
            let density = 16 * n;
            let lhs = match thm {
                VpTheorem::T11 => weighted_norm(
                    &|x: f64| with_t_power(&spec, vp(x), x, -tpow),
                    &NormConfig::new(p, density, DomainPolicy::FullDecay),
                )?,
                VpTheorem::Ineq15 => weighted_norm(
                    &|x: f64| with_t_power(&spec, vp(x), x, -0.25),
                    &NormConfig::new(p, density, DomainPolicy::FullDecay),
                )?,
                VpTheorem::T12 | VpTheorem::T13 | VpTheorem::Ineq16 | VpTheorem::Ineq41 => {
                    weighted_norm(&vp, &NormConfig::new(p, density, DomainPolicy::FullDecay))?
                }
                VpTheorem::Ineq64 => weighted_norm(
                    &|x: f64| vp(x) * (1.0 + x.abs()).powf(-(2.0 - p) * beta / (2.0 * p)),
                    &NormConfig::new(p, density, DomainPolicy::FullDecay),
                )?,
            };
            worst = worst.max(lhs / (scale * prep.rhs_norm));
        }
        rows.push((n as f64, worst));
    }
    let id = if thm.uses_j() {
        format!("{}/j{j}", thm.id())
    } else {
        thm.id().to_string()
    };
    let report = RatioReport::from_rows(id, rows);
    Ok(if exploratory {
        report.exploratory()
    } else {
        report
    })
}

/// Weight-stability check: max |log w(x) - log w(t)| over random pairs with
/// |t - x| < a_n / (n sqrt(T(x))) and |x|, |t| < a_{2n}, per n.
pub fn verify_lemma27(
    spec: &WeightSpec,
    mrs: &MrsTable,
    n_grid: &[usize],
    samples: usize,
    seed: u64,
) -> Result<RatioReport> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a_n = mrs.a_of(n as f64)?;
        let a_2n = mrs.a_of(2.0 * n as f64)?;
        let mut rng = suite_rng(seed, n, 0);
        let mut worst = 0.0_f64;
        let mut accepted = 0usize;
        while accepted < samples {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let x = (2.0 * u - 1.0) * a_2n * 0.999;
            if x.abs() < 1e-8 {
                continue;
            }
            let t_x = t_func(spec, x)?;
            let v = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let t = x + (2.0 * v - 1.0) * a_n / (n as f64 * t_x.sqrt());
            if t.abs() >= a_2n {
                continue;
            }
            let gap = (q_value(spec, t) - q_value(spec, x)).abs();
            worst = worst.max(gap);
            accepted += 1;
        }
        rows.push((n as f64, worst.max(1e-300)));
    }
    Ok(RatioReport::from_rows("2.7w", rows))
}
