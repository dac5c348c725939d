//! Thermal-mixture inputs, eigenvector drift, and the per-ε averages that
//! make up the plotted curves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distillation::noisy_mitigated_analytic;
use crate::error::{contract, Result};
use crate::estimators::{min_samples, variance_mitigated, variance_unmitigated};
use crate::noise::{NoiseKind, NoiseModel};
use crate::qaoa::{approximation_ratio, MaxCutInstance};
use crate::quantum::spectral::DEGENERACY_TOL;
use crate::quantum::{expectation, fidelity, spectral_decompose, DensityMatrix, PureState};
use crate::record::SweepRecord;

pub const DEFAULT_ETA: f64 = 0.1;

/// e^{−ηH}/Z(η); diagonal because H is.
pub fn thermal_state(instance: &MaxCutInstance, eta: f64) -> Result<DensityMatrix> {
    if !eta.is_finite() {
        return Err(contract("eta must be finite"));
    }
    let diag = instance.hamiltonian().diagonal().expect("MaxCut Hamiltonian is diagonal");
    // Shift by the ground energy so large η does not overflow.
    let e0 = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = diag.iter().map(|h| (-eta * (h - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    DensityMatrix::from_probabilities(&weights.iter().map(|w| w / z).collect::<Vec<_>>())
}

/// ½|ψ_GS⟩⟨ψ_GS| + ½ρ_thermal with the lexicographically smallest maximum cut.
pub fn mixed_input(instance: &MaxCutInstance, eta: f64) -> Result<DensityMatrix> {
    let thermal = thermal_state(instance, eta)?;
    let gs = DensityMatrix::basis_state(instance.n_vertices(), instance.ground_bitstrings()[0]);
    DensityMatrix::mixture(&[(0.5, &gs), (0.5, &thermal)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub value: f64,
    /// False when λ₁ − λ₂ is below the degeneracy tolerance, so the dominant
    /// eigenvector is not well defined.
    pub reliable: bool,
}

/// c = 1 − |⟨ψ_dom|ψ_ideal⟩|².
pub fn coherent_mismatch(rho_noisy: &DensityMatrix, ideal: &PureState) -> Result<Mismatch> {
    if rho_noisy.n_qubits() != ideal.n_qubits() {
        return Err(contract("state sizes differ"));
    }
    let spec = spectral_decompose(rho_noisy);
    let f = fidelity(&spec.dominant(), ideal)?;
    Ok(Mismatch {
        value: (1.0 - f).clamp(0.0, 1.0),
        reliable: spec.spectral_gap() >= DEGENERACY_TOL,
    })
}

/// Records for the fixed mixed input over a noise grid. The unmitigated value
/// does not depend on ε: the input state is the same at every level and only
/// the distillation circuit is noisy.
pub fn thermal_sweep(
    instance: &MaxCutInstance,
    instance_id: u64,
    seed: u64,
    kind: NoiseKind,
    eps_grid: &[f64],
    eta: f64,
    variance_threshold: f64,
) -> Result<Vec<SweepRecord>> {
    crate::qaoa::check_eps_grid(eps_grid)?;
    let rho = mixed_input(instance, eta)?;
    let h = instance.hamiltonian();
    let cost_unmitigated = expectation(&rho, h)?;
    let samples_unmitigated = min_samples(variance_unmitigated(&rho, h, 1)?, variance_threshold)?;
    eps_grid
        .iter()
        .map(|&eps| {
            let model = NoiseModel::new(kind, eps)?;
            let cost_mitigated = noisy_mitigated_analytic(&rho, h, &model)?;
            Ok(SweepRecord {
                instance_id,
                seed,
                channel: kind,
                eps,
                cost_unmitigated,
                cost_mitigated,
                ratio_ideal: 1.0,
                ratio_unmitigated: approximation_ratio(instance, cost_unmitigated),
                ratio_mitigated: approximation_ratio(instance, cost_mitigated),
                min_samples_unmitigated: samples_unmitigated,
                min_samples_mitigated: min_samples(variance_mitigated(&rho, h, &model, 1)?, variance_threshold)?,
                coherent_mismatch: None,
                mismatch_reliable: true,
                alpha_opt: None,
                beta_opt: None,
                alpha_unmitigated: None,
                beta_unmitigated: None,
            })
        })
        .collect()
}

/// Instance averages at one (channel, ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub channel: NoiseKind,
    pub eps: f64,
    pub n_instances: usize,
    pub ratio_ideal: f64,
    pub ratio_unmitigated: f64,
    pub ratio_mitigated: f64,
    pub distance_unmitigated: f64,
    pub distance_mitigated: f64,
    pub min_samples_unmitigated: f64,
    pub min_samples_mitigated: f64,
    pub coherent_mismatch: Option<f64>,
    pub unreliable_mismatches: usize,
    /// 1 − mean mitigated distance / mean unmitigated distance; undefined
    /// when the unmitigated distance vanishes (ε = 0).
    pub error_reduction: Option<f64>,
}

pub const AGGREGATE_COLUMNS: [&str; 13] = [
    "channel",
    "eps",
    "n_instances",
    "ratio_ideal",
    "ratio_unmitigated",
    "ratio_mitigated",
    "distance_unmitigated",
    "distance_mitigated",
    "min_samples_unmitigated",
    "min_samples_mitigated",
    "coherent_mismatch",
    "unreliable_mismatches",
    "error_reduction",
];

/// Below this mean distance the reduction ratio is reported as null.
const DISTANCE_FLOOR: f64 = 1e-12;

impl AggregateRow {
    pub fn csv_fields(&self) -> Vec<String> {
        use crate::record::format_float as f;
        let opt = |x: Option<f64>| x.map_or_else(|| "null".to_string(), f);
        vec![
            self.channel.to_string(),
            f(self.eps),
            self.n_instances.to_string(),
            f(self.ratio_ideal),
            f(self.ratio_unmitigated),
            f(self.ratio_mitigated),
            f(self.distance_unmitigated),
            f(self.distance_mitigated),
            f(self.min_samples_unmitigated),
            f(self.min_samples_mitigated),
            opt(self.coherent_mismatch),
            self.unreliable_mismatches.to_string(),
            opt(self.error_reduction),
        ]
    }
}

/// Averages records over instances, one row per (channel, ε), ordered by
/// channel name then ε. Records at the same ε must carry bit-identical ε.
pub fn summarize(records: &[SweepRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(contract("no records to summarize"));
    }
    let mut groups: BTreeMap<(&'static str, u64), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        // ε ≥ 0, so the IEEE bit pattern orders like the value.
        groups.entry((r.channel.as_str(), r.eps.to_bits())).or_default().push(r);
    }
    Ok(groups
        .into_values()
        .map(|rs| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&SweepRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            let mismatches: Vec<f64> = rs.iter().filter_map(|r| r.coherent_mismatch).collect();
            let distance_unmitigated = mean(&|r| r.distance_unmitigated());
            let distance_mitigated = mean(&|r| r.distance_mitigated());
            AggregateRow {
                channel: rs[0].channel,
                eps: rs[0].eps,
                n_instances: rs.len(),
                ratio_ideal: mean(&|r| r.ratio_ideal),
                ratio_unmitigated: mean(&|r| r.ratio_unmitigated),
                ratio_mitigated: mean(&|r| r.ratio_mitigated),
                distance_unmitigated,
                distance_mitigated,
                min_samples_unmitigated: mean(&|r| r.min_samples_unmitigated as f64),
                min_samples_mitigated: mean(&|r| r.min_samples_mitigated as f64),
                coherent_mismatch: (!mismatches.is_empty())
                    .then(|| mismatches.iter().sum::<f64>() / mismatches.len() as f64),
                unreliable_mismatches: rs
                    .iter()
                    .filter(|r| r.coherent_mismatch.is_some() && !r.mismatch_reliable)
                    .count(),
                error_reduction: (distance_unmitigated.abs() > DISTANCE_FLOOR)
                    .then(|| 1.0 - distance_mitigated / distance_unmitigated),
            }
        })
        .collect())
}

/// The aggregate row closest to `eps` for `channel`.
pub fn row_at(rows: &[AggregateRow], channel: NoiseKind, eps: f64) -> Option<&AggregateRow> {
    rows.iter()
        .filter(|r| r.channel == channel)
        .min_by(|a, b| (a.eps - eps).abs().total_cmp(&(b.eps - eps).abs()))
}

/// Mean coherent mismatch per (channel, ε), taken from QAOA sweep records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub channel: NoiseKind,
    pub eps: f64,
    pub mean_mismatch: f64,
    pub n_instances: usize,
    pub unreliable: usize,
}

pub fn drift_sweep(records: &[SweepRecord]) -> Result<Vec<DriftPoint>> {
    let rows = summarize(records)?;
    rows.into_iter()
        .map(|r| {
            let mean_mismatch = r
                .coherent_mismatch
                .ok_or_else(|| contract("records carry no coherent mismatch (not a QAOA sweep)"))?;
            Ok(DriftPoint {
                channel: r.channel,
                eps: r.eps,
                mean_mismatch,
                n_instances: r.n_instances,
                unreliable: r.unreliable_mismatches,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distillation::mitigated_expectation_power;
    use crate::noise::channel_adjoint_on_observable;
    use crate::qaoa::erdos_renyi;
    use crate::seed::stream_rng;

    fn instance(seed: u64) -> MaxCutInstance {
        erdos_renyi(6, 0.5, &mut stream_rng(seed, 0)).unwrap()
    }

    #[test]
    fn thermal_state_examples() {
        let g = instance(1);
        let t = thermal_state(&g, 0.0).unwrap();
        assert!((t.matrix() - DensityMatrix::maximally_mixed(6).matrix()).camax() < 1e-15);

        let e = MaxCutInstance::new(2, vec![(0, 1)]).unwrap();
        let w = thermal_state(&e, 0.1).unwrap().diagonal();
        let z = 2.0 + 2.0 * 0.1f64.exp();
        let expected = [1.0 / z, 0.1f64.exp() / z, 0.1f64.exp() / z, 1.0 / z];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let cold = thermal_state(&e, 200.0).unwrap().diagonal();
        assert!((cold[1] - 0.5).abs() < 1e-12 && (cold[2] - 0.5).abs() < 1e-12 && cold[0] < 1e-80);
    }

    #[test]
    fn thermal_state_commutes_with_h() {
        let g = instance(2);
        let t = thermal_state(&g, 0.1).unwrap();
        let h = g.hamiltonian().to_matrix();
        assert!((t.matrix() * &h - &h * t.matrix()).camax() <= 1e-12);
    }

    #[test]
    fn mixed_input_properties() {
        for s in 0..5 {
            let g = instance(s);
            let rho = mixed_input(&g, 0.1).unwrap();
            rho.check_invariants().unwrap();
            assert!(rho.purity() < 1.0);
            let spec = spectral_decompose(&rho);
            assert!(spec.eigenvalues[0] >= 0.5);
            let gs = PureState::basis(6, g.ground_bitstrings()[0]);
            assert!(fidelity(&spec.dominant(), &gs).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn ground_state_choice_does_not_change_ratios() {
        let g = instance(3);
        let h = g.hamiltonian();
        let thermal = thermal_state(&g, 0.1).unwrap();
        let values: Vec<(f64, f64)> = g
            .ground_bitstrings()
            .iter()
            .map(|&b| {
                let gs = DensityMatrix::basis_state(6, b);
                let rho = DensityMatrix::mixture(&[(0.5, &gs), (0.5, &thermal)]).unwrap();
                (expectation(&rho, h).unwrap(), mitigated_expectation_power(&rho, h, 2).unwrap())
            })
            .collect();
        for v in &values {
            assert!((v.0 - values[0].0).abs() < 1e-12 && (v.1 - values[0].1).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatch_examples() {
        let psi = PureState::plus(2);
        let m = coherent_mismatch(&psi.to_density(), &psi).unwrap();
        assert!(m.value < 1e-12 && m.reliable);
        let rho = DensityMatrix::basis_state(1, 0);
        let m = coherent_mismatch(&rho, &PureState::basis(1, 1)).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
        let flat = DensityMatrix::maximally_mixed(1);
        assert!(!coherent_mismatch(&flat, &PureState::basis(1, 0)).unwrap().reliable);
    }

    #[test]
    fn thermal_sweep_behaviour() {
        let g = instance(4);
        let grid: Vec<f64> = (0..11).map(|k| 0.025 * k as f64).collect();
        let deph = thermal_sweep(&g, 0, 4, NoiseKind::Dephasing, &grid, 0.1, 1e-3).unwrap();
        for r in &deph {
            assert!((r.ratio_mitigated - deph[0].ratio_mitigated).abs() < 1e-10);
        }
        // The mechanism: the adjoint dephasing channel fixes H.
        let fixed = channel_adjoint_on_observable(g.hamiltonian(), NoiseKind::Dephasing, 0.2);
        assert_eq!(fixed.diagonal(), g.hamiltonian().diagonal());
        assert!(deph[0].ratio_mitigated > deph[0].ratio_unmitigated);
        assert_ne!(deph[0].min_samples_mitigated, deph[0].min_samples_unmitigated);

        let dep = thermal_sweep(&g, 0, 4, NoiseKind::Depolarizing, &grid, 0.1, 1e-3).unwrap();
        assert!(dep.windows(2).all(|w| w[1].ratio_mitigated < w[0].ratio_mitigated));
        assert!(dep.iter().any(|r| r.ratio_mitigated < r.ratio_unmitigated));
    }

    #[test]
    fn summarize_reduction_and_null_at_zero() {
        let mk = |id: u64, eps: f64, ru: f64, rm: f64| SweepRecord {
            instance_id: id,
            seed: 0,
            channel: NoiseKind::Dephasing,
            eps,
            cost_unmitigated: 0.0,
            cost_mitigated: 0.0,
            ratio_ideal: 0.9,
            ratio_unmitigated: ru,
            ratio_mitigated: rm,
            min_samples_unmitigated: 1,
            min_samples_mitigated: 3,
            coherent_mismatch: Some(0.01 * id as f64),
            mismatch_reliable: true,
            alpha_opt: None,
            beta_opt: None,
            alpha_unmitigated: None,
            beta_unmitigated: None,
        };
        let recs = vec![
            mk(0, 0.0, 0.9, 0.9),
            mk(1, 0.0, 0.9, 0.9),
            mk(0, 0.1, 0.6, 0.8),
            mk(1, 0.1, 0.8, 0.85),
        ];
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].error_reduction, None);
        assert_eq!(rows[0].csv_fields()[12], "null");
        let r = row_at(&rows, NoiseKind::Dephasing, 0.1).unwrap();
        // unmitigated distances 0.3, 0.1 (mean 0.2); mitigated 0.1, 0.05 (mean 0.075)
        assert!((r.error_reduction.unwrap() - 0.625).abs() < 1e-12);
        assert!((r.coherent_mismatch.unwrap() - 0.005).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
        let drift = drift_sweep(&recs).unwrap();
        assert_eq!(drift.len(), 2);
    }
}
