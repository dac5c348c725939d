//! Depth-1 QAOA for MaxCut with gate noise after every ZZ and X rotation.

mod graph;
mod optimize;
mod sweep;

pub use graph::{erdos_renyi, maxcut_hamiltonian, MaxCutInstance, MAX_VERTICES};
pub use optimize::{grid_axis, nelder_mead, optimize, NelderMeadOptions, NelderMeadResult, OptimizeResult, GRID_POINTS};
pub use sweep::{check_eps_grid, noise_sweep, optimize_chains, SweepOptions, SweepPoint};

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::distillation::{noisy_mitigated_analytic, simulate_vd};
use crate::error::{contract, Error, Result};
use crate::noise::{apply_channel_in_place, NoiseKind, NoiseModel};
use crate::quantum::kernels::{apply_diagonal_unitary, apply_single_qubit_unitary};
use crate::quantum::{expectation, qubit_mask, DensityMatrix, PureState, C64};

pub const ALPHA_MAX: f64 = PI;
pub const BETA_MAX: f64 = FRAC_PI_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl QaoaParams {
    pub fn p1(alpha: f64, beta: f64) -> Self {
        Self {
            alpha: vec![alpha],
            beta: vec![beta],
        }
    }

    pub fn depth(&self) -> usize {
        self.alpha.len()
    }

    fn single_layer(&self) -> Result<(f64, f64)> {
        if self.alpha.len() != self.beta.len() {
            return Err(contract("alpha and beta lengths differ"));
        }
        if self.depth() != 1 {
            return Err(Error::Unsupported(format!("QAOA depth {} (only p = 1)", self.depth())));
        }
        let (a, b) = (self.alpha[0], self.beta[0]);
        if !a.is_finite() || !b.is_finite() {
            return Err(contract("non-finite QAOA angle"));
        }
        Ok((a, b))
    }
}

/// Which expectation value an optimisation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Tr(H ρ_Λ)
    Unmitigated,
    /// Two-copy distillation of ρ_Λ through the equally noisy CSWAP circuit.
    Mitigated,
}

fn zz_phases(n: usize, u: usize, v: usize, alpha: f64) -> Vec<C64> {
    let (mu, mv) = (qubit_mask(n, u), qubit_mask(n, v));
    let same = C64::from_polar(1.0, -alpha / 2.0);
    let diff = C64::from_polar(1.0, alpha / 2.0);
    (0..1usize << n)
        .map(|b| if (b & mu == 0) == (b & mv == 0) { same } else { diff })
        .collect()
}

fn x_rotation(beta: f64) -> [[C64; 2]; 2] {
    let c = C64::from(beta.cos());
    let s = C64::new(0.0, -beta.sin());
    [[c, s], [s, c]]
}

/// ρ_Λ(α, β): ZZ(α) per edge in sorted order, each followed by the model's
/// channel on both endpoints, then X(β) per qubit followed by depolarizing
/// noise of strength `eps_single_qubit` (for either model kind).
pub fn qaoa_state(instance: &MaxCutInstance, params: &QaoaParams, model: Option<&NoiseModel>) -> Result<DensityMatrix> {
    let (alpha, beta) = params.single_layer()?;
    let n = instance.n_vertices();
    let mut rho = PureState::plus(n).to_density();
    for &(u, v) in instance.edges() {
        apply_diagonal_unitary(rho.matrix_mut(), &zz_phases(n, u, v, alpha));
        if let Some(m) = model {
            m.apply(&mut rho, u)?;
            m.apply(&mut rho, v)?;
        }
    }
    let rx = x_rotation(beta);
    for q in 0..n {
        apply_single_qubit_unitary(rho.matrix_mut(), n, q, rx);
        if let Some(m) = model {
            apply_channel_in_place(&mut rho, q, NoiseKind::Depolarizing, m.eps_single_qubit)?;
        }
    }
    Ok(rho)
}

/// Noiseless QAOA output as a state vector.
pub fn qaoa_pure_state(instance: &MaxCutInstance, params: &QaoaParams) -> Result<PureState> {
    let (alpha, beta) = params.single_layer()?;
    let n = instance.n_vertices();
    let d = 1usize << n;
    let mut amp = PureState::plus(n).amplitudes().clone();
    for &(u, v) in instance.edges() {
        for (a, ph) in amp.iter_mut().zip(zz_phases(n, u, v, alpha)) {
            *a *= ph;
        }
    }
    let rx = x_rotation(beta);
    for q in 0..n {
        let mask = qubit_mask(n, q);
        for i0 in (0..d).filter(|i| i & mask == 0) {
            let (a, b) = (amp[i0], amp[i0 | mask]);
            amp[i0] = rx[0][0] * a + rx[0][1] * b;
            amp[i0 | mask] = rx[1][0] * a + rx[1][1] * b;
        }
    }
    PureState::new(DVector::from_vec(amp.as_slice().to_vec()))
}

/// Noiseless cost from the state vector; used for the optimisation grid.
pub fn noiseless_cost(instance: &MaxCutInstance, params: &QaoaParams) -> Result<f64> {
    let psi = qaoa_pure_state(instance, params)?;
    let diag = instance.hamiltonian().diagonal().expect("MaxCut Hamiltonian is diagonal");
    Ok(psi.amplitudes().iter().zip(&diag).map(|(a, h)| a.norm_sqr() * h).sum())
}

/// C^Λ(α, β) = Tr(H ρ_Λ).
pub fn cost(instance: &MaxCutInstance, params: &QaoaParams, model: Option<&NoiseModel>) -> Result<f64> {
    expectation(&qaoa_state(instance, params, model)?, instance.hamiltonian())
}

/// C^Λ_mitigated(α, β) from the closed form Tr(Λ̄(H)ρ_Λ²)/Tr(ρ_Λ²), which
/// equals the circuit simulation (see [`mitigated_cost_circuit`]).
pub fn mitigated_cost(instance: &MaxCutInstance, params: &QaoaParams, model: Option<&NoiseModel>) -> Result<f64> {
    let rho = qaoa_state(instance, params, model)?;
    let vd = model.copied().unwrap_or_else(|| NoiseModel::noiseless(NoiseKind::Depolarizing));
    noisy_mitigated_analytic(&rho, instance.hamiltonian(), &vd)
}

/// C^Λ_mitigated(α, β) by simulating the 2N+1 qubit distillation circuit.
pub fn mitigated_cost_circuit(
    instance: &MaxCutInstance,
    params: &QaoaParams,
    model: Option<&NoiseModel>,
) -> Result<f64> {
    let rho = qaoa_state(instance, params, model)?;
    let vd = model.copied().unwrap_or_else(|| NoiseModel::noiseless(NoiseKind::Depolarizing));
    Ok(simulate_vd(&rho, instance.hamiltonian(), &vd)?.mitigated)
}

pub fn objective_value(
    instance: &MaxCutInstance,
    params: &QaoaParams,
    model: Option<&NoiseModel>,
    objective: Objective,
) -> Result<f64> {
    match objective {
        Objective::Unmitigated => cost(instance, params, model),
        Objective::Mitigated => mitigated_cost(instance, params, model),
    }
}

/// r = C / (−C_max), the expected cut over the maximum cut.
pub fn approximation_ratio(instance: &MaxCutInstance, cost: f64) -> f64 {
    -cost / instance.c_max() as f64
}
