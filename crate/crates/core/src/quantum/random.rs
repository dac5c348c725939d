//! Seeded random states and observables for tests, checks and demos.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, Pauli, PauliObservable, PauliString, PauliTerm, PureState, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PureState {
    let d = 1 << n_qubits;
    PureState::normalized(DVector::from_fn(d, |_, _| gaussian(rng))).expect("nonzero with probability one")
}

/// Ginibre-ensemble mixed state of the given rank (G G† / Tr).
pub fn random_density_matrix<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n_qubits;
    let g = DMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    // Remove rounding asymmetry so the Hermiticity check holds exactly.
    m = (&m + m.adjoint()) * C64::from(0.5);
    DensityMatrix::from_raw(n_qubits, m)
}

/// ρ = p |ψ⟩⟨ψ| + (1 − p) σ with σ a random state supported on the
/// orthogonal complement of |ψ⟩; |ψ⟩ is then the dominant eigenvector
/// whenever p exceeds σ's largest eigenvalue times (1 − p).
pub fn random_dominant_mixture<R: Rng + ?Sized>(
    n_qubits: usize,
    weight: f64,
    rng: &mut R,
) -> (DensityMatrix, PureState) {
    let d = 1usize << n_qubits;
    let psi = random_pure_state(n_qubits, rng);
    let v = psi.amplitudes();
    let proj_perp = DMatrix::<C64>::identity(d, d) - v * v.adjoint();
    let sigma = random_density_matrix(n_qubits, d, rng);
    let s = &proj_perp * sigma.matrix() * &proj_perp;
    let s = &s / s.trace();
    let m = v * v.adjoint() * C64::from(weight) + s * C64::from(1.0 - weight);
    let m = (&m + m.adjoint()) * C64::from(0.5);
    (DensityMatrix::from_raw(n_qubits, m), psi)
}

pub fn random_hermitian<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DMatrix<C64> {
    let d = 1 << n_qubits;
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    (&g + g.adjoint()) * C64::from(0.5)
}

pub fn random_pauli_string<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PauliString {
    PauliString::new((0..n_qubits).map(|_| Pauli::ALL[rng.gen_range(0..4)]).collect())
}

/// Random string restricted to I/Z letters.
pub fn random_diagonal_string<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PauliString {
    PauliString::new(
        (0..n_qubits)
            .map(|_| if rng.gen_bool(0.5) { Pauli::Z } else { Pauli::I })
            .collect(),
    )
}

/// Sum of `n_terms` random strings with standard-normal weights.
pub fn random_pauli_observable<R: Rng + ?Sized>(n_qubits: usize, n_terms: usize, rng: &mut R) -> PauliObservable {
    let terms = (0..n_terms)
        .map(|_| PauliTerm {
            coeff: rng.sample(StandardNormal),
            string: random_pauli_string(n_qubits, rng),
        })
        .collect();
    PauliObservable::new(n_qubits, terms).expect("consistent lengths")
}
