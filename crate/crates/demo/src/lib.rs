//! WebAssembly bindings for `www/index.html`.
//!
//! Every export takes plain numbers and strings and returns a flat
//! `Vec<f64>` so the page can draw straight onto a canvas.

use vdsim_core::distillation::noisy_mitigated_analytic;
use vdsim_core::experiments::mixed_input;
use vdsim_core::noise::{NoiseKind, NoiseModel};
use vdsim_core::qaoa::{approximation_ratio, cost, erdos_renyi, mitigated_cost, MaxCutInstance, QaoaParams};
use vdsim_core::quantum::expectation;
use vdsim_core::seed::{derive_seed, stream_rng, GRAPH_STREAM};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn kind(name: &str) -> Result<NoiseKind, JsValue> {
    name.parse().map_err(err)
}

/// A G(n, 1/2) instance as an edge list (`n m` header, one `u v` per line).
#[wasm_bindgen]
pub fn random_graph(n_vertices: usize, seed: u64) -> Result<String, JsValue> {
    let seed = derive_seed(seed, 0);
    let g = erdos_renyi(n_vertices, 0.5, &mut stream_rng(seed, GRAPH_STREAM)).map_err(err)?;
    Ok(g.to_edgelist())
}

/// Approximation ratio over a `resolution × resolution` grid of (α, β),
/// row-major with α along rows. `mitigated` switches to the distilled cost.
#[wasm_bindgen]
pub fn qaoa_landscape(
    edgelist: &str,
    channel: &str,
    eps: f64,
    mitigated: bool,
    resolution: usize,
) -> Result<Vec<f64>, JsValue> {
    let g = MaxCutInstance::from_edgelist(edgelist).map_err(err)?;
    if g.n_vertices() > 8 {
        return Err(JsValue::from_str("at most 8 vertices in the browser"));
    }
    if g.c_max() == 0 {
        return Err(JsValue::from_str("graph has no edges"));
    }
    let model = NoiseModel::new(kind(channel)?, eps).map_err(err)?;
    let r = resolution.clamp(2, 200);
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        let alpha = std::f64::consts::PI * i as f64 / (r - 1) as f64;
        for j in 0..r {
            let beta = std::f64::consts::FRAC_PI_2 * j as f64 / (r - 1) as f64;
            let p = QaoaParams::p1(alpha, beta);
            let c = if mitigated {
                mitigated_cost(&g, &p, Some(&model))
            } else {
                cost(&g, &p, Some(&model))
            }
            .map_err(err)?;
            out.push(approximation_ratio(&g, c));
        }
    }
    Ok(out)
}

/// Ground/thermal mixture distilled through a noisy circuit. Returns
/// `points` triples `(ε, ratio_dephasing, ratio_depolarizing)` followed by the
/// undistilled ratio as the last element.
#[wasm_bindgen]
pub fn thermal_curves(edgelist: &str, eta: f64, eps_max: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    let g = MaxCutInstance::from_edgelist(edgelist).map_err(err)?;
    if g.c_max() == 0 {
        return Err(JsValue::from_str("graph has no edges"));
    }
    let rho = mixed_input(&g, eta).map_err(err)?;
    let h = g.hamiltonian();
    let n = points.clamp(2, 500);
    let mut out = Vec::with_capacity(3 * n + 1);
    for k in 0..n {
        let eps = eps_max * k as f64 / (n - 1) as f64;
        out.push(eps);
        for kind in [NoiseKind::Dephasing, NoiseKind::Depolarizing] {
            let model = NoiseModel::new(kind, eps).map_err(err)?;
            out.push(approximation_ratio(&g, noisy_mitigated_analytic(&rho, h, &model).map_err(err)?));
        }
    }
    out.push(approximation_ratio(&g, expectation(&rho, h).map_err(err)?));
    Ok(out)
}
