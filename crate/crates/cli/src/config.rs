//! Flat run configuration: a JSON document whose fields individual CLI flags
//! override. The fully resolved configuration is embedded in every JSON
//! report for provenance.

use anyhow::{bail, Context};
use expoly::WeightSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ineq: Option<String>,
    /// "1", "2", ... or "inf".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("config {} is not a flat JSON document", path.display()))?;
        Ok(cfg)
    }

    /// Fields set in `over` win over `self`.
    pub fn overridden_by(mut self, over: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if over.$f.is_some() { self.$f = over.$f; })*
            };
        }
        take!(
            command, family, alpha, u, l, ineq, p, j, beta, n_grid, n, j_max, x, x_min, x_max,
            points, target, lambda, tol, seed, suite_size, oracle, out, svg
        );
        self
    }

    pub fn weight_spec(&self) -> anyhow::Result<WeightSpec> {
        let family = self.family.as_deref().unwrap_or("freud");
        let alpha = self.alpha.unwrap_or(2.0);
        let spec = match family {
            "freud" => WeightSpec::freud(alpha),
            "erdos" => WeightSpec::erdos(alpha, self.u.unwrap_or(0.0), self.l.unwrap_or(1)),
            other => bail!("unknown weight family {other:?} (expected freud or erdos)"),
        };
        spec.map_err(|e| anyhow::anyhow!("invalid weight parameters: {e}"))
    }

    pub fn p_value(&self) -> anyhow::Result<f64> {
        match self.p.as_deref() {
            None | Some("2") => Ok(2.0),
            Some("inf") | Some("Inf") | Some("INF") | Some("infinity") => Ok(f64::INFINITY),
            Some(text) => {
                let v: f64 = text
                    .parse()
                    .with_context(|| format!("p value {text:?} is not a number or 'inf'"))?;
                if v < 1.0 {
                    bail!("p must satisfy 1 <= p <= inf, got {v}");
                }
                Ok(v)
            }
        }
    }

    pub fn n_grid_or_default(&self) -> Vec<usize> {
        self.n_grid
            .clone()
            .unwrap_or_else(|| vec![8, 16, 32, 64, 128])
    }
}

pub fn parse_usize_list(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

pub fn parse_f64_list(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(Into::into))
        .collect()
}
