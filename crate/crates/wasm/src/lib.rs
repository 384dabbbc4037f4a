//! Browser bindings for the interactive demo page: weight/T-function curves,
//! weighted Christoffel functions, and de la Vallée Poussin approximation of
//! a target, each returned as a JSON string the page plots on a canvas.

use expoly::mrs::mrs_number;
use expoly::operators::{
    christoffel, fourier_coeffs, gaussian_bump, oscillatory_target, partial_sum, plateau_target,
    poly_target, vp_mean, TestFunction,
};
use expoly::orthopoly::{build_recurrence, RecurrenceTable, StieltjesConfig};
use expoly::weights::{t_func, weight_eval, WeightSpec};
use serde::Serialize;
use std::sync::Arc;
use wasm_bindgen::prelude::*;

fn spec_from(family: &str, alpha: f64, u: f64, l: u32) -> Result<WeightSpec, JsValue> {
    let res = match family {
        "freud" => WeightSpec::freud(alpha),
        "erdos" => WeightSpec::erdos(alpha, u, l),
        other => return Err(JsValue::from_str(&format!("unknown family {other}"))),
    };
    res.map_err(|e| JsValue::from_str(&e.to_string()))
}

fn err_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn table_for(spec: &WeightSpec, n: usize) -> Result<RecurrenceTable, JsValue> {
    build_recurrence(spec, n, &StieltjesConfig::default()).map_err(err_js)
}

#[derive(Serialize)]
struct WeightCurves {
    x: Vec<f64>,
    w: Vec<f64>,
    t: Vec<f64>,
    q: Vec<f64>,
}

/// w(x), T(x) and Q(x) on a symmetric grid.
#[wasm_bindgen]
pub fn weight_curves(
    family: &str,
    alpha: f64,
    u: f64,
    l: u32,
    x_max: f64,
    points: usize,
) -> Result<String, JsValue> {
    let spec = spec_from(family, alpha, u, l)?;
    let m = points.clamp(16, 4096);
    let mut out = WeightCurves {
        x: Vec::with_capacity(m),
        w: Vec::with_capacity(m),
        t: Vec::with_capacity(m),
        q: Vec::with_capacity(m),
    };
    for i in 0..m {
        let x = -x_max + 2.0 * x_max * i as f64 / (m - 1) as f64;
        let (w, logw) = weight_eval(&spec, x);
        let t = if x.abs() < 1e-8 {
            t_func(&spec, 1e-8).unwrap_or(f64::NAN)
        } else {
            t_func(&spec, x).unwrap_or(f64::NAN)
        };
        out.x.push(x);
        out.w.push(w);
        out.t.push(t);
        out.q.push(-logw);
    }
    serde_json::to_string(&out).map_err(err_js)
}

#[derive(Serialize)]
struct ChristoffelCurve {
    x: Vec<f64>,
    lambda: Vec<f64>,
    a_n: f64,
    a_2n: f64,
}

/// Weighted Christoffel function w(x)^2 lambda_n^{(j)}(x) over the window
/// [-1.1 a_2n, 1.1 a_2n], with the MRS markers.
#[wasm_bindgen]
pub fn christoffel_curve(
    family: &str,
    alpha: f64,
    u: f64,
    l: u32,
    n: usize,
    j: usize,
    points: usize,
) -> Result<String, JsValue> {
    let spec = spec_from(family, alpha, u, l)?;
    let n = n.clamp(1, 96);
    if j >= n {
        return Err(JsValue::from_str("need j < n"));
    }
    let table = table_for(&spec, n.max(13))?;
    let a_n = mrs_number(&spec, n as f64, 1e-12).map_err(err_js)?;
    let a_2n = mrs_number(&spec, 2.0 * n as f64, 1e-12).map_err(err_js)?;
    let span = 1.1 * a_2n;
    let m = points.clamp(16, 4096);
    let mut xs = Vec::with_capacity(m);
    let mut lam = Vec::with_capacity(m);
    for i in 0..m {
        let x = -span + 2.0 * span * i as f64 / (m - 1) as f64;
        xs.push(x);
        lam.push(christoffel(&table, n, x, j).unwrap_or(f64::NAN));
    }
    serde_json::to_string(&ChristoffelCurve {
        x: xs,
        lambda: lam,
        a_n,
        a_2n,
    })
    .map_err(err_js)
}

#[derive(Serialize)]
struct VpCurves {
    x: Vec<f64>,
    fw: Vec<f64>,
    vn: Vec<f64>,
    sn: Vec<f64>,
    a_n: f64,
}

fn demo_target(rec: &Arc<RecurrenceTable>, id: &str) -> Result<TestFunction, JsValue> {
    if id == "sin5" {
        return Ok(oscillatory_target());
    }
    if id == "plateau" {
        return Ok(plateau_target());
    }
    if let Some(shift) = id.strip_prefix("bump@") {
        let s: f64 = shift
            .parse()
            .map_err(|_| JsValue::from_str("bad bump shift"))?;
        return Ok(gaussian_bump(s));
    }
    if let Some(deg) = id.strip_prefix("poly") {
        let d: usize = deg
            .parse()
            .map_err(|_| JsValue::from_str("bad poly degree"))?;
        if d > 12 {
            return Err(JsValue::from_str("poly degree capped at 12"));
        }
        return Ok(poly_target(rec, d));
    }
    Err(JsValue::from_str(
        "unknown target (bump@<shift>, sin5, plateau, poly<d>)",
    ))
}

/// Weighted target fw against its de la Vallée Poussin mean v_n(f)w and
/// partial sum s_n(f)w on a symmetric grid.
#[wasm_bindgen]
pub fn vp_demo(
    family: &str,
    alpha: f64,
    u: f64,
    l: u32,
    target: &str,
    n: usize,
    points: usize,
) -> Result<String, JsValue> {
    let spec = spec_from(family, alpha, u, l)?;
    let n = n.clamp(1, 64);
    let table = Arc::new(table_for(&spec, (2 * n).max(13))?);
    let f = demo_target(&table, target)?;
    let coeffs = fourier_coeffs(&f, &table, 2 * n).map_err(err_js)?;
    let a_n = mrs_number(&spec, n as f64, 1e-12).map_err(err_js)?;
    let a_2n = mrs_number(&spec, (2 * n) as f64, 1e-12).map_err(err_js)?;
    let span = 1.25 * a_2n.max(3.0);
    let m = points.clamp(16, 4096);
    let mut out = VpCurves {
        x: Vec::with_capacity(m),
        fw: Vec::with_capacity(m),
        vn: Vec::with_capacity(m),
        sn: Vec::with_capacity(m),
        a_n,
    };
    for i in 0..m {
        let x = -span + 2.0 * span * i as f64 / (m - 1) as f64;
        out.x.push(x);
        out.fw.push(f.fw(x));
        out.vn
            .push(vp_mean(&coeffs, &table, x, n, 0).unwrap_or(f64::NAN));
        out.sn
            .push(partial_sum(&coeffs, &table, x, n, 0).unwrap_or(f64::NAN));
    }
    serde_json::to_string(&out).map_err(err_js)
}
