//! Grid search plus a box-constrained Nelder–Mead polish over (α, β).

use super::{noiseless_cost, objective_value, MaxCutInstance, Objective, QaoaParams, ALPHA_MAX, BETA_MAX};
use crate::error::Result;
use crate::noise::NoiseModel;

/// Points per axis, endpoints included.
pub const GRID_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Absolute tolerance on simplex spread, applied to parameters and values.
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_evals: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` over the box `[lo, hi]` starting from `x0` with initial
/// steps `step`. Trial points are clamped into the box, so the simplex may
/// collapse onto a face when the optimum sits on the boundary.
pub fn nelder_mead(
    mut f: impl FnMut([f64; 2]) -> Result<f64>,
    x0: [f64; 2],
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    opts: NelderMeadOptions,
) -> Result<NelderMeadResult> {
    let clamp = |x: [f64; 2]| [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])];
    let mut evals = 0usize;
    let mut eval = |x: [f64; 2], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };

    let x0 = clamp(x0);
    let mut simplex: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    simplex.push((x0, eval(x0, &mut evals)?));
    for k in 0..2 {
        let mut x = x0;
        x[k] += step[k];
        if x[k] > hi[k] {
            x[k] = x0[k] - step[k];
        }
        let x = clamp(x);
        simplex.push((x, eval(x, &mut evals)?));
    }

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0], simplex[2]);
        let spread_x = simplex[1..]
            .iter()
            .map(|(x, _)| (x[0] - best.0[0]).abs().max((x[1] - best.0[1]).abs()))
            .fold(0.0, f64::max);
        let spread_f = simplex[1..].iter().map(|(_, v)| (v - best.1).abs()).fold(0.0, f64::max);
        if spread_x <= opts.tol && spread_f <= opts.tol {
            converged = true;
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let towards = |t: f64| clamp([centroid[0] + t * (worst.0[0] - centroid[0]), centroid[1] + t * (worst.0[1] - centroid[1])]);

        let xr = towards(-1.0);
        let fr = eval(xr, &mut evals)?;
        if fr < simplex[0].1 {
            let xe = towards(-2.0);
            let fe = eval(xe, &mut evals)?;
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = towards(-0.5);
            (xc, eval(xc, &mut evals)?)
        } else {
            let xc = towards(0.5);
            (xc, eval(xc, &mut evals)?)
        };
        if fc < worst.1.min(fr) {
            simplex[2] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        for vertex in simplex.iter_mut().skip(1) {
            let x = [
                best.0[0] + 0.5 * (vertex.0[0] - best.0[0]),
                best.0[1] + 0.5 * (vertex.0[1] - best.0[1]),
            ];
            *vertex = (x, eval(x, &mut evals)?);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(NelderMeadResult {
        x: simplex[0].0,
        value: simplex[0].1,
        evaluations: evals,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub params: QaoaParams,
    pub value: f64,
    /// Best grid value, when the grid stage ran.
    pub grid_value: Option<f64>,
    pub evaluations: usize,
    /// False when the polish hit its evaluation budget or failed and the
    /// start point was kept.
    pub polished: bool,
}

pub fn grid_axis(max: f64) -> impl Iterator<Item = f64> {
    (0..GRID_POINTS).map(move |k| max * k as f64 / (GRID_POINTS - 1) as f64)
}

fn grid_step() -> [f64; 2] {
    [ALPHA_MAX / (GRID_POINTS - 1) as f64, BETA_MAX / (GRID_POINTS - 1) as f64]
}

/// argmin of `objective` over (α, β). Without `initial` the 100×100 grid is
/// scanned first and its best point polished; with `initial` the grid is
/// skipped (warm start).
///
/// For a noiseless model every objective equals the state-vector cost, which
/// is then used for the grid.
pub fn optimize(
    instance: &MaxCutInstance,
    model: Option<&NoiseModel>,
    objective: Objective,
    initial: Option<&QaoaParams>,
    opts: NelderMeadOptions,
) -> Result<OptimizeResult> {
    let noiseless = model.is_none_or(|m| m.eps_two_qubit == 0.0 && m.eps_single_qubit == 0.0);
    let f = |x: [f64; 2]| -> Result<f64> {
        let p = QaoaParams::p1(x[0], x[1]);
        if noiseless {
            noiseless_cost(instance, &p)
        } else {
            objective_value(instance, &p, model, objective)
        }
    };

    let mut evaluations = 0;
    let (start, start_value, grid_value) = match initial {
        Some(p) => {
            let x = [p.alpha[0].clamp(0.0, ALPHA_MAX), p.beta[0].clamp(0.0, BETA_MAX)];
            evaluations += 1;
            (x, f(x)?, None)
        }
        None => {
            let mut best = ([0.0, 0.0], f64::INFINITY);
            for a in grid_axis(ALPHA_MAX) {
                for b in grid_axis(BETA_MAX) {
                    let v = f([a, b])?;
                    evaluations += 1;
                    if v < best.1 {
                        best = ([a, b], v);
                    }
                }
            }
            (best.0, best.1, Some(best.1))
        }
    };

    let polish = nelder_mead(f, start, grid_step(), [0.0, 0.0], [ALPHA_MAX, BETA_MAX], opts);
    let (x, value, polished) = match polish {
        Ok(r) => {
            evaluations += r.evaluations;
            if r.value.is_finite() && r.value <= start_value {
                (r.x, r.value, r.converged)
            } else {
                (start, start_value, false)
            }
        }
        Err(_) => (start, start_value, false),
    };
    Ok(OptimizeResult {
        params: QaoaParams::p1(x[0], x[1]),
        value,
        grid_value,
        evaluations,
        polished,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaoa::{cost, erdos_renyi};
    use crate::seed::stream_rng;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: [f64; 2]| Ok((x[0] - 0.3).powi(2) + 3.0 * (x[1] + 0.2).powi(2) + 0.5 * x[0] * x[1]);
        let r = nelder_mead(f, [1.0, 1.0], [0.1, 0.1], [-5.0, -5.0], [5.0, 5.0], NelderMeadOptions::default()).unwrap();
        assert!(r.converged);
        // stationary point of the quadratic
        let det = 2.0 * 6.0 - 0.25;
        let x = (2.0 * 0.3 * 6.0 - 0.5 * (-1.2)) / det;
        let y = (2.0 * (-1.2) - 0.5 * 0.6) / det;
        assert!((r.x[0] - x).abs() < 1e-3 && (r.x[1] - y).abs() < 1e-3, "{:?} vs ({x}, {y})", r.x);
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let f = |x: [f64; 2]| Ok(x[0] + x[1]);
        let r = nelder_mead(f, [0.5, 0.5], [0.1, 0.1], [0.0, 0.0], [1.0, 1.0], NelderMeadOptions::default()).unwrap();
        assert!(r.x[0] >= 0.0 && r.x[1] >= 0.0);
        assert!(r.value < 1e-6);
    }

    #[test]
    fn single_edge_optimum_is_exact() {
        let e = MaxCutInstance::new(2, vec![(0, 1)]).unwrap();
        let r = optimize(&e, None, Objective::Unmitigated, None, NelderMeadOptions::default()).unwrap();
        assert!(r.value <= r.grid_value.unwrap() + 1e-12);
        assert!((r.value + 1.0).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn optimum_beats_zero_angles() {
        for s in 0..3 {
            let g = erdos_renyi(6, 0.5, &mut stream_rng(s, 0)).unwrap();
            let r = optimize(&g, None, Objective::Unmitigated, None, NelderMeadOptions::default()).unwrap();
            assert!(r.value <= r.grid_value.unwrap() + 1e-12);
            assert!(r.value <= cost(&g, &QaoaParams::p1(0.0, 0.0), None).unwrap());
        }
    }
}
