//! Single-qubit Pauli noise: depolarizing and pure dephasing.
//!
//! Conventions follow the channel definitions
//! `Λ_dep(ρ) = (1 − ε)ρ + ε/3 (XρX + YρY + ZρZ)` and
//! `Λ_Z(ρ) = (1 − ε)ρ + ε ZρZ`. Both channels are unital and self-adjoint, so
//! the same maps act on states (Schrödinger) and observables (Heisenberg).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::quantum::kernels::apply_pauli_channel;
use crate::quantum::{DensityMatrix, Pauli, PauliObservable, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarizing,
    Dephasing,
}

impl NoiseKind {
    pub const BOTH: [NoiseKind; 2] = [NoiseKind::Dephasing, NoiseKind::Depolarizing];

    /// Largest ε for which the channel is completely positive.
    pub fn max_eps(self) -> f64 {
        match self {
            NoiseKind::Depolarizing => 0.75,
            NoiseKind::Dephasing => 0.5,
        }
    }

    /// (pX, pY, pZ) for error probability ε.
    pub fn pauli_probabilities(self, eps: f64) -> (f64, f64, f64) {
        match self {
            NoiseKind::Depolarizing => (eps / 3.0, eps / 3.0, eps / 3.0),
            NoiseKind::Dephasing => (0.0, 0.0, eps),
        }
    }

    pub fn check_eps(self, eps: f64) -> Result<()> {
        if !(0.0..=self.max_eps()).contains(&eps) {
            return Err(contract(format!(
                "{self} error probability {eps} outside [0, {}]",
                self.max_eps()
            )));
        }
        Ok(())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "depolarizing" | "dep" => Ok(NoiseKind::Depolarizing),
            "dephasing" | "z" => Ok(NoiseKind::Dephasing),
            other => Err(contract(format!("unknown noise kind {other:?}"))),
        }
    }
}

/// Channel kind plus the error probabilities used after two-qubit-class gates
/// (CSWAP, ZZ) and single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub eps_two_qubit: f64,
    pub eps_single_qubit: f64,
}

impl NoiseModel {
    /// Single-qubit gates get ε/10.
    pub fn new(kind: NoiseKind, eps: f64) -> Result<Self> {
        Self::with_single_qubit(kind, eps, eps / 10.0)
    }

    pub fn with_single_qubit(kind: NoiseKind, eps_two_qubit: f64, eps_single_qubit: f64) -> Result<Self> {
        kind.check_eps(eps_two_qubit)?;
        // single-qubit gate noise is depolarizing regardless of kind
        NoiseKind::Depolarizing.check_eps(eps_single_qubit)?;
        if eps_single_qubit > eps_two_qubit {
            return Err(contract("single-qubit error exceeds two-qubit error"));
        }
        Ok(Self {
            kind,
            eps_two_qubit,
            eps_single_qubit,
        })
    }

    pub fn noiseless(kind: NoiseKind) -> Self {
        Self {
            kind,
            eps_two_qubit: 0.0,
            eps_single_qubit: 0.0,
        }
    }

    /// Applies this model's channel with the two-qubit-gate probability.
    pub fn apply(&self, rho: &mut DensityMatrix, qubit: usize) -> Result<()> {
        apply_channel_in_place(rho, qubit, self.kind, self.eps_two_qubit)
    }
}

pub(crate) fn apply_channel_in_place(rho: &mut DensityMatrix, qubit: usize, kind: NoiseKind, eps: f64) -> Result<()> {
    kind.check_eps(eps)?;
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(contract(format!("qubit {qubit} out of range for {n} qubits")));
    }
    if eps == 0.0 {
        return Ok(());
    }
    let (px, py, pz) = kind.pauli_probabilities(eps);
    apply_pauli_channel(rho.matrix_mut(), n, qubit, px, py, pz);
    Ok(())
}

pub fn apply_depolarizing(rho: &DensityMatrix, qubit: usize, eps: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    apply_channel_in_place(&mut out, qubit, NoiseKind::Depolarizing, eps)?;
    Ok(out)
}

pub fn apply_dephasing(rho: &DensityMatrix, qubit: usize, eps: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    apply_channel_in_place(&mut out, qubit, NoiseKind::Dephasing, eps)?;
    Ok(out)
}

/// Λ(σ) for a single Pauli letter: every channel here maps a Pauli to a
/// scaled copy of itself.
pub fn adjoint_on_pauli(letter: Pauli, kind: NoiseKind, eps: f64) -> (f64, Pauli) {
    let factor = match (kind, letter) {
        (_, Pauli::I) => 1.0,
        (NoiseKind::Depolarizing, _) => 1.0 - 4.0 * eps / 3.0,
        (NoiseKind::Dephasing, Pauli::X | Pauli::Y) => 1.0 - 2.0 * eps,
        (NoiseKind::Dephasing, Pauli::Z) => 1.0,
    };
    (factor, letter)
}

/// (1 − 4ε/3)^k for depolarizing, (1 − 2ε)^k' for dephasing.
pub fn attenuation_factor(string: &PauliString, kind: NoiseKind, eps: f64) -> f64 {
    match kind {
        NoiseKind::Depolarizing => (1.0 - 4.0 * eps / 3.0).powi(string.weight() as i32),
        NoiseKind::Dephasing => (1.0 - 2.0 * eps).powi(string.flip_weight() as i32),
    }
}

/// Λ̄(O) = Λ^⊗N applied to every term of O.
pub fn channel_adjoint_on_observable(obs: &PauliObservable, kind: NoiseKind, eps: f64) -> PauliObservable {
    obs.map_coefficients(|t| attenuation_factor(&t.string, kind, eps))
}

/// Average gate fidelity of a single-qubit channel from its Kraus operators,
/// F = (Σ|Tr K_i|² + d)/(d² + d) with d = 2.
pub fn average_channel_fidelity(kind: NoiseKind, eps: f64) -> f64 {
    let (px, py, pz) = kind.pauli_probabilities(eps);
    let p0 = 1.0 - px - py - pz;
    // Kraus operators √p_σ σ; only the identity has nonzero trace (= 2√p0).
    let d = 2.0;
    let sum_tr_sq = 4.0 * p0;
    (sum_tr_sq + d) / (d * d + d)
}
