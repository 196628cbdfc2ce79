//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers or JSON strings and returns a JSON
//! string; errors come back as JS exceptions carrying the message.

use randschro::domain::BallDomain;
use randschro::ensemble::sample_rng;
use randschro::measures::{AtomicMeasure, MeasureModel};
use randschro::operator::{GridField, GridLayout, HOperator};
use randschro::potential::{evaluate_potential, potential_field, BumpProfile};
use randschro::solver::{picard_solve, ProblemConfig};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-9;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn unit_ball() -> BallDomain {
    BallDomain::centered(3, 1.0).expect("valid ball")
}

/// Values on the grid plane through the center, row-major in `(x0, x1)`;
/// `null` marks cells outside the ball.
#[derive(Serialize)]
struct Slice {
    size: usize,
    origin: f64,
    h: f64,
    values: Vec<Option<f64>>,
}

fn central_slice(layout: &GridLayout, values: &[f64]) -> Slice {
    let h = layout.spacing();
    let r = layout.domain().radius();
    let size = (2.0 * r / h + 1e-9).floor() as usize + 1;
    let mid = (r / h).round() as i32;
    let mut out = vec![None; size * size];
    for (i, v) in values.iter().enumerate() {
        let k = layout.grid_index(i);
        if k[2..].iter().all(|&c| c == mid) {
            out[k[1] as usize * size + k[0] as usize] = Some(*v);
        }
    }
    Slice {
        size,
        origin: -r,
        h,
        values: out,
    }
}

fn operator(h: f64) -> Result<HOperator, JsValue> {
    HOperator::on_ball(&unit_ball(), h).map_err(js_err)
}

/// Discrete `H(1)` against the torsion function `(1 - |x|²)/6` on the unit
/// ball in ℝ³.
#[wasm_bindgen]
pub fn torsion_check(h: f64) -> Result<String, JsValue> {
    let op = operator(h)?;
    let layout = op.layout();
    let h1 = op.apply(&GridField::constant(layout, 1.0)).map_err(js_err)?;
    let exact = GridField::from_fn(layout, |x| layout.domain().torsion(x));
    let error = h1.sup_distance(&exact).map_err(js_err)? / exact.sup_norm();
    let gap: Vec<f64> = h1.values().iter().zip(exact.values()).map(|(a, b)| a - b).collect();
    Ok(json!({
        "nodes": layout.len(),
        "sup_relative_error": error,
        "h_one": central_slice(layout, h1.values()),
        "difference": central_slice(layout, &gap),
    })
    .to_string())
}

fn draw(model_json: &str, seed: u64) -> Result<AtomicMeasure, JsValue> {
    let model: MeasureModel = serde_json::from_str(model_json).map_err(js_err)?;
    let domain = unit_ball();
    model.validate(&domain).map_err(js_err)?;
    Ok(model.sample(&domain, &mut sample_rng(seed, 0, 0)))
}

/// One draw of `model` and its potential `f * μ` on the plane `x₂ = 0`,
/// sampled on a `pixels × pixels` raster.
#[wasm_bindgen]
pub fn potential_map(model_json: &str, profile_json: &str, seed: u64, pixels: usize) -> Result<String, JsValue> {
    let f: BumpProfile = serde_json::from_str(profile_json).map_err(js_err)?;
    f.validate().map_err(js_err)?;
    let mu = draw(model_json, seed)?;
    let pixels = pixels.clamp(8, 400);
    let step = 2.0 / pixels as f64;
    let mut values = Vec::with_capacity(pixels * pixels);
    for row in 0..pixels {
        for col in 0..pixels {
            let x = [-1.0 + (col as f64 + 0.5) * step, -1.0 + (row as f64 + 0.5) * step, 0.0];
            let inside = x[0] * x[0] + x[1] * x[1] < 1.0;
            values.push(inside.then(|| evaluate_potential(&f, &mu, &x)));
        }
    }
    Ok(json!({
        "pixels": pixels,
        "values": values,
        "atoms": mu.atoms(),
        "total_variation": mu.total_variation(),
        "sup_bound": f.sup_norm() * mu.total_variation(),
    })
    .to_string())
}

/// Draws `μ` from `model`, decides admissibility and solves by Picard
/// iteration on a grid of spacing `h`.
#[wasm_bindgen]
pub fn solve_map(problem_json: &str, model_json: &str, h: f64, seed: u64) -> Result<String, JsValue> {
    let problem: ProblemConfig = serde_json::from_str(problem_json).map_err(js_err)?;
    let op = operator(h)?;
    let spec = problem.build(op.layout()).map_err(js_err)?;
    let mu = draw(model_json, seed)?;
    let out = picard_solve(&spec, &mu, &op, TOL, MAX_ITER).map_err(js_err)?;
    let v = potential_field(spec.f(), &mu, op.layout());
    let u = out.u.as_ref().map(|u| central_slice(op.layout(), u.values()));
    Ok(json!({
        "summary": out.summary(),
        "gaps": out.gaps,
        "u": u,
        "potential": central_slice(op.layout(), v.values()),
        "atoms": mu.atoms().len(),
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn torsion_slice_shape() {
        let v: Value = serde_json::from_str(&torsion_check(0.25).unwrap()).unwrap();
        assert_eq!(v["h_one"]["size"], 9);
        assert!(v["sup_relative_error"].as_f64().unwrap() < 0.1);
        let center = &v["h_one"]["values"][4 * 9 + 4];
        assert!((center.as_f64().unwrap() - 1.0 / 6.0).abs() < 0.02);
        assert!(v["h_one"]["values"][0].is_null());
    }

    #[test]
    fn solve_reports_summary() {
        let problem = r#"{"p": 2.0, "b": {"kind": "constant", "value": 0.1},
            "g": {"kind": "constant", "value": 0.05},
            "f": {"family": "tent", "amplitude": 1.0, "radius": 0.5}, "c0": 0.5}"#;
        let model = r#"{"model": "points", "count": {"law": "uniform_range", "low": 0, "high": 3}, "charge": 0.05}"#;
        let v: Value = serde_json::from_str(&solve_map(problem, model, 0.25, 3).unwrap()).unwrap();
        assert_eq!(v["summary"]["admissible"], true);
        assert!(v["summary"]["residual"].as_f64().unwrap() <= TOL);
    }

    #[test]
    fn potential_raster() {
        let model = r#"{"model": "alloy", "spacing": 0.5, "charge": {"law": "uniform", "low": -1.0, "high": 1.0}}"#;
        let f = r#"{"family": "truncated_gaussian", "amplitude": 1.0, "width": 0.2, "cutoff": 0.5}"#;
        let v: Value = serde_json::from_str(&potential_map(model, f, 1, 32).unwrap()).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), 32 * 32);
        let bound = v["sup_bound"].as_f64().unwrap();
        for x in v["values"].as_array().unwrap().iter().filter_map(Value::as_f64) {
            assert!(x.abs() <= bound + 1e-12);
        }
    }
}
