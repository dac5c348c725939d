//! Ascending-ε sweep with warm-started optimisation chains.

use super::{
    approximation_ratio, objective_value, optimize, qaoa_pure_state, qaoa_state, MaxCutInstance, NelderMeadOptions,
    Objective, OptimizeResult,
};
use crate::error::{contract, Result};
use crate::estimators::{min_samples, variance_mitigated, variance_unmitigated};
use crate::experiments::coherent_mismatch;
use crate::noise::{NoiseKind, NoiseModel};
use crate::record::SweepRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub eps_grid: Vec<f64>,
    pub variance_threshold: f64,
    pub polish: NelderMeadOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            eps_grid: (0..21).map(|k| 0.1 * k as f64 / 20.0).collect(),
            variance_threshold: 1e-3,
            polish: NelderMeadOptions::default(),
        }
    }
}

/// Both optimisation chains at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    pub unmitigated: OptimizeResult,
    pub mitigated: OptimizeResult,
}

pub fn check_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.len() < 2 {
        return Err(contract("noise grid needs at least two points"));
    }
    if !eps_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(contract("noise grid must be strictly ascending"));
    }
    Ok(())
}

/// Runs both chains over the grid: cold (grid + polish) at the first level,
/// then each level polishes from the previous level's optimum.
pub fn optimize_chains(instance: &MaxCutInstance, kind: NoiseKind, opts: &SweepOptions) -> Result<Vec<SweepPoint>> {
    check_eps_grid(&opts.eps_grid)?;
    if opts.eps_grid[0] != 0.0 {
        return Err(contract("noise grid must start at 0"));
    }
    let mut points: Vec<SweepPoint> = Vec::with_capacity(opts.eps_grid.len());
    for &eps in &opts.eps_grid {
        let model = NoiseModel::new(kind, eps)?;
        let prev = points.last();
        let unmitigated = optimize(
            instance,
            Some(&model),
            Objective::Unmitigated,
            prev.map(|p| &p.unmitigated.params),
            opts.polish,
        )?;
        let mitigated = match prev {
            // At ε = 0 both objectives coincide (pure state, noiseless circuit).
            None => unmitigated.clone(),
            Some(p) => optimize(instance, Some(&model), Objective::Mitigated, Some(&p.mitigated.params), opts.polish)?,
        };
        points.push(SweepPoint {
            eps,
            unmitigated,
            mitigated,
        });
    }
    Ok(points)
}

/// One record per noise level for `instance` under channel `kind`.
pub fn noise_sweep(
    instance: &MaxCutInstance,
    instance_id: u64,
    seed: u64,
    kind: NoiseKind,
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    let points = optimize_chains(instance, kind, opts)?;
    let h = instance.hamiltonian();
    let ratio_ideal = approximation_ratio(instance, points[0].unmitigated.value);
    points
        .iter()
        .map(|pt| {
            let model = NoiseModel::new(kind, pt.eps)?;
            let (pu, pm) = (&pt.unmitigated.params, &pt.mitigated.params);
            let rho_u = qaoa_state(instance, pu, Some(&model))?;
            let rho_m = qaoa_state(instance, pm, Some(&model))?;
            let cost_unmitigated = objective_value(instance, pu, Some(&model), Objective::Unmitigated)?;
            let cost_mitigated = objective_value(instance, pm, Some(&model), Objective::Mitigated)?;
            let var_u = variance_unmitigated(&rho_u, h, 1)?;
            let var_m = variance_mitigated(&rho_m, h, &model, 1)?;
            let mismatch = coherent_mismatch(&rho_m, &qaoa_pure_state(instance, pm)?)?;
            Ok(SweepRecord {
                instance_id,
                seed,
                channel: kind,
                eps: pt.eps,
                cost_unmitigated,
                cost_mitigated,
                ratio_ideal,
                ratio_unmitigated: approximation_ratio(instance, cost_unmitigated),
                ratio_mitigated: approximation_ratio(instance, cost_mitigated),
                min_samples_unmitigated: min_samples(var_u, opts.variance_threshold)?,
                min_samples_mitigated: min_samples(var_m, opts.variance_threshold)?,
                coherent_mismatch: Some(mismatch.value),
                mismatch_reliable: mismatch.reliable,
                alpha_opt: Some(pm.alpha[0]),
                beta_opt: Some(pm.beta[0]),
                alpha_unmitigated: Some(pu.alpha[0]),
                beta_unmitigated: Some(pu.beta[0]),
            })
        })
        .collect()
}
