//! Browser bindings: a Halpern run from a JSON config, the two indicator
//! resolvents against the cap projection, and geodesic interpolation.

use halpern_core::experiment::{config_hash, run_config, ExperimentConfig, RunSummary};
use halpern_core::prox::{
    project_cap, resolvent_logcos, resolvent_tansin, Cap, ConvexFunction, ConvexSet, SolverSettings,
};
use halpern_core::{ModelSpace, SpacePoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(js_err)
}

fn sphere_point(space: &ModelSpace, v: &[f64]) -> Result<SpacePoint, JsError> {
    space.point_from_direction(v.to_vec()).map_err(js_err)
}

#[derive(Serialize)]
struct RunView {
    path: Vec<Vec<f64>>,
    d_oracle: Vec<f64>,
    summary: RunSummary,
}

/// Runs a config and returns at most `max_points` iterates plus the summary.
#[wasm_bindgen]
pub fn halpern_run(config_json: &str, max_points: usize) -> Result<String, JsError> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(js_err)?;
    let stride = (cfg.max_iters / max_points.max(1)).max(1);
    let (trace, summary) = run_config(&cfg, &config_hash(config_json.as_bytes()), Some(stride)).map_err(js_err)?;
    to_json(&RunView {
        path: trace.rows.iter().map(|r| r.x.clone()).collect(),
        d_oracle: trace.rows.iter().map(|r| r.d_oracle).collect(),
        summary,
    })
}

#[derive(Serialize)]
struct ResolventView {
    projection: Vec<f64>,
    tansin: Vec<f64>,
    logcos: Vec<f64>,
    tansin_error: f64,
    logcos_error: f64,
}

/// Resolvents of the indicator of the cap `B(center, radius)` at `x`, next to
/// the metric projection.
#[wasm_bindgen]
pub fn resolvent_vs_projection(center: &[f64], radius: f64, x: &[f64]) -> Result<String, JsError> {
    let space = ModelSpace::sphere(2).map_err(js_err)?;
    let c = sphere_point(&space, center)?;
    let x = sphere_point(&space, x)?;
    let cap = Cap::new(&space, c.clone(), radius).map_err(js_err)?;
    let f = ConvexFunction::indicator_of(ConvexSet::cap(&space, c, radius).map_err(js_err)?);
    let settings = SolverSettings::default();
    let p = project_cap(&space, &cap, &x).map_err(js_err)?;
    let a = resolvent_tansin(&space, &f, &x, &settings).map_err(js_err)?;
    let b = resolvent_logcos(&space, &f, &x, &settings).map_err(js_err)?;
    to_json(&ResolventView {
        tansin_error: space.dist_unchecked(&a, &p),
        logcos_error: space.dist_unchecked(&b, &p),
        projection: p.into_coords(),
        tansin: a.into_coords(),
        logcos: b.into_coords(),
    })
}

#[derive(Serialize)]
struct GeodesicView {
    distance: f64,
    points: Vec<Vec<f64>>,
    midpoint: Vec<f64>,
    comparison_residual: f64,
}

/// `samples + 1` points `t x (+) (1 - t) y` and the comparison residual of
/// the midpoint against `z`.
#[wasm_bindgen]
pub fn geodesic(x: &[f64], y: &[f64], z: &[f64], samples: usize) -> Result<String, JsError> {
    let space = ModelSpace::sphere(2).map_err(js_err)?;
    let (x, y, z) = (
        sphere_point(&space, x)?,
        sphere_point(&space, y)?,
        sphere_point(&space, z)?,
    );
    let samples = samples.max(1);
    let points = (0..=samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            space.combine(t, &x, &y).map(SpacePoint::into_coords)
        })
        .collect::<halpern_core::Result<Vec<_>>>()
        .map_err(js_err)?;
    to_json(&GeodesicView {
        distance: space.dist(&x, &y).map_err(js_err)?,
        midpoint: space.combine(0.5, &x, &y).map_err(js_err)?.into_coords(),
        comparison_residual: space.comparison_residual(0.5, &x, &y, &z).map_err(js_err)?,
        points,
    })
}
