//! Ratio-boundedness reports shared by the operator checks and the harness.
//!
//! The inequalities under test assert existence of constants, not values, so
//! the falsifiable desk-scale surrogate is: compute the left/right ratio per
//! n, fit a log-log slope on the upper half of the grid, and pass when the
//! trend is flat (slope below a small tolerance).

use serde::Serialize;

/// Slope tolerance for "bounded" verdicts.
pub const SLOPE_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for p-ranges the underlying result leaves open: rows and
    /// slope are emitted, but no pass/fail is asserted.
    Exploratory,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub inequality_id: String,
    /// (n, ratio) rows, sorted by n.
    pub rows: Vec<(f64, f64)>,
    /// Log-log slope fitted on the upper half of the grid.
    pub slope: f64,
    pub slope_tol: f64,
    pub verdict: Verdict,
    /// Max ratio over the grid.
    pub empirical_constant: f64,
}

impl RatioReport {
    /// Assemble a report from rows; `hard_cap` replaces the slope criterion
    /// for inequalities with an explicit constant (ratio must stay below it).
    pub fn from_rows(id: impl Into<String>, rows: Vec<(f64, f64)>) -> Self {
        Self::with_tol(id, rows, SLOPE_TOL)
    }

    pub fn with_tol(id: impl Into<String>, rows: Vec<(f64, f64)>, slope_tol: f64) -> Self {
        let slope = upper_half_slope(&rows);
        let empirical_constant = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let verdict = if slope <= slope_tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            inequality_id: id.into(),
            rows,
            slope,
            slope_tol,
            verdict,
            empirical_constant,
        }
    }

    pub fn exploratory(mut self) -> Self {
        self.verdict = Verdict::Exploratory;
        self
    }

    /// Replace the slope verdict with a hard bound on every ratio.
    pub fn with_hard_cap(mut self, cap: f64) -> Self {
        let ok = self.rows.iter().all(|r| r.1 <= cap);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Slope with the largest-n row removed; used by the stability check.
    pub fn slope_without_last(&self) -> f64 {
        if self.rows.len() < 3 {
            return self.slope;
        }
        upper_half_slope(&self.rows[..self.rows.len() - 1])
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Log-log slope over the upper half of the (n, ratio) rows.
pub fn upper_half_slope(rows: &[(f64, f64)]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let start = rows.len() / 2;
    let start = if rows.len() - start < 2 {
        rows.len() - 2
    } else {
        start
    };
    let pts: Vec<(f64, f64)> = rows[start..]
        .iter()
        .map(|(n, r)| (n.ln(), r.ln()))
        .collect();
    ls_slope(&pts)
}
