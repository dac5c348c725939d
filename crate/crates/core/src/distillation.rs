//! Virtual distillation with two copies.
//!
//! Three routes to the mitigated expectation value are provided and tested
//! against each other:
//!
//! * the spectral route `Tr(Oρ^M)/Tr(ρ^M)` for any M,
//! * the swap route `Tr(O⁽²⁾S⁽²⁾ρ⊗ρ)/Tr(S⁽²⁾ρ⊗ρ)` built from explicit operators,
//! * the noisy circuit: an auxiliary qubit in |+⟩, N controlled-SWAPs between
//!   the copies, each followed by the single-qubit channel on the three qubits
//!   it touched, and an X measurement of the auxiliary.
//!
//! With circuit noise the ratio reduces to `Tr(Λ̄(O)ρ²)/Tr(ρ²)`
//! ([`noisy_mitigated_analytic`]); the attenuation of the auxiliary
//! coherence cancels between numerator and denominator.

use nalgebra::DMatrix;

use crate::error::{contract, Error, Result};
use crate::noise::{apply_channel_in_place, channel_adjoint_on_observable, NoiseModel};
use crate::quantum::kernels::apply_involution;
use crate::quantum::{
    cyclic_shift_m2, expectation, expectation_squared_state, matrix_power, qubit_mask, symmetrized_observable_m2,
    symmetrized_pauli_m2, tensor_product, DensityMatrix, Pauli, PauliObservable, PauliString, PauliTerm, PureState,
    C64,
};

/// Largest register (auxiliary + two copies) the circuit simulator builds.
pub const MAX_VD_REGISTER: usize = 13;

/// Largest copy size for which the joint outcome table is materialised.
pub const MAX_JOINT_QUBITS: usize = 4;

const DEGENERATE_TOL: f64 = 1e-14;

/// Expectations measured by the two-copy circuit.
#[derive(Debug, Clone)]
pub struct VdCircuitResult {
    /// ⟨X_aux O⁽²⁾⟩ on the circuit output.
    pub numerator: f64,
    /// ⟨X_aux⟩ on the circuit output.
    pub denominator: f64,
    pub mitigated: f64,
    pub final_state: Option<DensityMatrix>,
}

/// Tr(Oρ^M) / Tr(ρ^M).
pub fn mitigated_expectation_power(rho: &DensityMatrix, obs: &PauliObservable, power: u32) -> Result<f64> {
    if power == 0 {
        return Err(contract("M must be at least 1"));
    }
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract("observable and state sizes differ"));
    }
    if power == 1 {
        return expectation(rho, obs);
    }
    let rho_m = matrix_power(rho, power)?;
    let norm = rho_m.trace().re;
    if norm <= DEGENERATE_TOL {
        return Err(Error::Degenerate(format!("Tr(rho^{power}) = {norm:e}")));
    }
    Ok(obs.trace_product(&rho_m).re / norm)
}

/// Tr(O⁽²⁾S⁽²⁾ ρ⊗ρ) / Tr(S⁽²⁾ ρ⊗ρ) from explicit dense operators.
pub fn mitigated_expectation_swap(rho: &DensityMatrix, obs: &PauliObservable) -> Result<f64> {
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract("observable and state sizes differ"));
    }
    let n = rho.n_qubits();
    let shift = cyclic_shift_m2(n)?;
    let sym = symmetrized_observable_m2(obs)?;
    let copies = tensor_product(rho.matrix(), rho.matrix())?;
    let shifted = &shift * &copies;
    let den = shifted.trace().re;
    if den <= DEGENERATE_TOL {
        return Err(Error::Degenerate(format!("Tr(S rho⊗rho) = {den:e}")));
    }
    Ok((sym * shifted).trace().re / den)
}

/// Tr(Λ̄(O)ρ²)/Tr(ρ²): the mitigated value the noisy circuit reports.
pub fn noisy_mitigated_analytic(rho: &DensityMatrix, obs: &PauliObservable, model: &NoiseModel) -> Result<f64> {
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract("observable and state sizes differ"));
    }
    model.kind.check_eps(model.eps_two_qubit)?;
    let purity = rho.purity();
    if purity <= DEGENERATE_TOL {
        return Err(Error::Degenerate(format!("purity {purity:e}")));
    }
    let noisy_obs = channel_adjoint_on_observable(obs, model.kind, model.eps_two_qubit);
    Ok(expectation_squared_state(rho, &noisy_obs)? / purity)
}

fn check_register(n: usize) -> Result<()> {
    if n == 0 {
        return Err(contract("state must have at least one qubit"));
    }
    if 2 * n + 1 > MAX_VD_REGISTER {
        return Err(Error::Resource {
            requested: 2 * n + 1,
            limit: MAX_VD_REGISTER,
        });
    }
    Ok(())
}

/// Output of the noisy two-copy circuit on `|+⟩⟨+| ⊗ ρ ⊗ ρ`, CSWAPs applied
/// to qubit pairs 1..N in ascending order.
pub fn build_vd_circuit_state(rho: &DensityMatrix, model: &NoiseModel) -> Result<DensityMatrix> {
    let order: Vec<usize> = (0..rho.n_qubits()).collect();
    build_vd_circuit_state_ordered(rho, model, &order)
}

/// As [`build_vd_circuit_state`] with an explicit CSWAP order (a permutation
/// of `0..N`).
pub fn build_vd_circuit_state_ordered(
    rho: &DensityMatrix,
    model: &NoiseModel,
    order: &[usize],
) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_register(n)?;
    model.kind.check_eps(model.eps_two_qubit)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(contract("CSWAP order must be a permutation of the copy qubits"));
    }

    let total = 2 * n + 1;
    let plus = PureState::plus(1).to_density();
    let copies = tensor_product(rho.matrix(), rho.matrix())?;
    let input = tensor_product(plus.matrix(), &copies)?;
    drop(copies);
    let mut state = DensityMatrix::from_raw(total, input);

    let aux = qubit_mask(total, 0);
    for &i in order {
        let (qa, qb) = (1 + i, 1 + n + i);
        let (ma, mb) = (qubit_mask(total, qa), qubit_mask(total, qb));
        apply_involution(state.matrix_mut(), |j| {
            if j & aux != 0 && ((j & ma != 0) != (j & mb != 0)) {
                j ^ ma ^ mb
            } else {
                j
            }
        });
        for q in [0, qa, qb] {
            apply_channel_in_place(&mut state, q, model.kind, model.eps_two_qubit)?;
        }
    }
    Ok(state)
}

/// Pauli form of X_aux ⊗ A for an operator A on the two copies.
fn with_aux_x(copies_obs: &PauliObservable) -> PauliObservable {
    let x = PauliString::new(vec![Pauli::X]);
    let terms = copies_obs
        .terms()
        .iter()
        .map(|t| PauliTerm {
            coeff: t.coeff,
            string: x.tensor(&t.string),
        })
        .collect();
    PauliObservable::new(copies_obs.n_qubits() + 1, terms).expect("consistent lengths")
}

/// Runs the noisy circuit and reads off ⟨X_aux O⁽²⁾⟩ and ⟨X_aux⟩ exactly.
pub fn simulate_vd(rho: &DensityMatrix, obs: &PauliObservable, model: &NoiseModel) -> Result<VdCircuitResult> {
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract("observable and state sizes differ"));
    }
    let state = build_vd_circuit_state(rho, model)?;
    let n = rho.n_qubits();
    let num_obs = with_aux_x(&symmetrized_pauli_m2(obs));
    let den_obs = with_aux_x(&PauliObservable::identity(2 * n));
    let numerator = expectation(&state, &num_obs)?;
    let denominator = expectation(&state, &den_obs)?;
    if denominator.abs() <= 1e-12 {
        return Err(Error::Degenerate(format!("auxiliary <X> = {denominator:e}")));
    }
    Ok(VdCircuitResult {
        numerator,
        denominator,
        mitigated: numerator / denominator,
        final_state: Some(state),
    })
}

/// Exact distribution of one shot of the circuit: the auxiliary X outcome
/// `x ∈ {+1, −1}` and the computational-basis outcomes `b₁`, `b₂` of the copies.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub n_qubits: usize,
    /// Indexed by `(x_bit · 2^N + b₁) · 2^N + b₂`, with `x_bit = 0` for x = +1.
    pub probabilities: Vec<f64>,
    /// O(b) for every basis string b of one copy.
    pub observable_values: Vec<f64>,
}

impl JointDistribution {
    pub fn decode(&self, index: usize) -> (f64, usize, usize) {
        let d = 1usize << self.n_qubits;
        let x = if index / (d * d) == 0 { 1.0 } else { -1.0 };
        let rest = index % (d * d);
        (x, rest / d, rest % d)
    }

    /// Single-shot value of X_aux O⁽²⁾ for outcome `index`.
    pub fn numerator_sample(&self, index: usize) -> f64 {
        let (x, b1, b2) = self.decode(index);
        x * 0.5 * (self.observable_values[b1] + self.observable_values[b2])
    }

    /// E[x · (O(b₁) + O(b₂))/2].
    pub fn numerator(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.numerator_sample(k))
            .sum()
    }

    /// E[x].
    pub fn denominator(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.decode(k).0)
            .sum()
    }
}

pub fn joint_outcome_distribution(
    rho: &DensityMatrix,
    obs: &PauliObservable,
    model: &NoiseModel,
) -> Result<JointDistribution> {
    let values = obs
        .diagonal()
        .ok_or_else(|| Error::Unsupported("joint outcome statistics need a diagonal observable".into()))?;
    let n = rho.n_qubits();
    if obs.n_qubits() != n {
        return Err(contract("observable and state sizes differ"));
    }
    if n > MAX_JOINT_QUBITS {
        return Err(Error::Resource {
            requested: 2 * n + 1,
            limit: 2 * MAX_JOINT_QUBITS + 1,
        });
    }
    let state = build_vd_circuit_state(rho, model)?;
    let m: &DMatrix<C64> = state.matrix();
    let half = 1usize << (2 * n);
    let mut probabilities = vec![0.0; 2 * half];
    // Hadamard on the auxiliary, then read the diagonal:
    // p(±, r) = (ρ[0r,0r] + ρ[1r,1r] ± 2 Re ρ[0r,1r]) / 2.
    for r in 0..half {
        let p00 = m[(r, r)].re;
        let p11 = m[(half + r, half + r)].re;
        let coh = m[(r, half + r)].re;
        probabilities[r] = (0.5 * (p00 + p11) + coh).max(0.0);
        probabilities[half + r] = (0.5 * (p00 + p11) - coh).max(0.0);
    }
    Ok(JointDistribution {
        n_qubits: n,
        probabilities,
        observable_values: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;
    use crate::quantum::random::{random_density_matrix, random_diagonal_string, random_pauli_string};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn power_route_examples() {
        let rho = DensityMatrix::from_probabilities(&[0.75, 0.25]).unwrap();
        let z = PauliObservable::parse("Z").unwrap();
        assert!((mitigated_expectation_power(&rho, &z, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((mitigated_expectation_power(&rho, &z, 2).unwrap() - 0.8).abs() < 1e-14);
        let pure = PureState::plus(2).to_density();
        let o = PauliObservable::parse("0.4*XX + -0.3*ZI").unwrap();
        let plain = expectation(&pure, &o).unwrap();
        for m in 1..=4 {
            assert!((mitigated_expectation_power(&pure, &o, m).unwrap() - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_route_matches_power_route() {
        let mut r = rng(11);
        for _ in 0..50 {
            let rho = random_density_matrix(2, 3, &mut r);
            let o = PauliObservable::from_string(random_pauli_string(2, &mut r));
            let a = mitigated_expectation_swap(&rho, &o).unwrap();
            let b = mitigated_expectation_power(&rho, &o, 2).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
        let rho = random_density_matrix(2, 4, &mut r);
        assert!((mitigated_expectation_swap(&rho, &PauliObservable::identity(2)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_examples() {
        let mut r = rng(12);
        let rho = random_density_matrix(3, 4, &mut r);
        let o = PauliObservable::parse("0.7*XZI + -0.2*IYY + 1.1*ZIZ").unwrap();
        let clean = noisy_mitigated_analytic(&rho, &o, &NoiseModel::noiseless(NoiseKind::Depolarizing)).unwrap();
        assert!((clean - mitigated_expectation_power(&rho, &o, 2).unwrap()).abs() < 1e-12);

        let diag = PauliObservable::parse("0.5*ZZI + -1*IIZ + 0.25*III").unwrap();
        let base = mitigated_expectation_power(&rho, &diag, 2).unwrap();
        for eps in [0.05, 0.2, 0.45] {
            let m = NoiseModel::new(NoiseKind::Dephasing, eps).unwrap();
            assert!((noisy_mitigated_analytic(&rho, &diag, &m).unwrap() - base).abs() < 1e-12);
        }

        let x1 = PauliObservable::parse("XII").unwrap();
        let m = NoiseModel::new(NoiseKind::Dephasing, 0.1).unwrap();
        let expected = 0.8 * mitigated_expectation_power(&rho, &x1, 2).unwrap();
        assert!((noisy_mitigated_analytic(&rho, &x1, &m).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn circuit_noiseless_examples() {
        let mut r = rng(13);
        let rho = random_density_matrix(2, 2, &mut r);
        let m = NoiseModel::noiseless(NoiseKind::Dephasing);
        let res = simulate_vd(&rho, &PauliObservable::identity(2), &m).unwrap();
        assert!((res.denominator - rho.purity()).abs() < 1e-12);
        let pure = PureState::plus(2).to_density();
        let res = simulate_vd(&pure, &PauliObservable::parse("XZ").unwrap(), &m).unwrap();
        assert!((res.denominator - 1.0).abs() < 1e-12);
        let o = PauliObservable::parse("0.3*XY + ZZ").unwrap();
        let res = simulate_vd(&rho, &o, &m).unwrap();
        assert!((res.mitigated - mitigated_expectation_swap(&rho, &o).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn circuit_output_is_a_state() {
        let mut r = rng(14);
        let rho = random_density_matrix(2, 4, &mut r);
        for kind in NoiseKind::BOTH {
            for eps in [0.0, 0.1, 0.3] {
                let out = build_vd_circuit_state(&rho, &NoiseModel::new(kind, eps).unwrap()).unwrap();
                assert!((out.trace() - 1.0).abs() < 1e-12);
                assert!(out.check_invariants().is_ok());
            }
        }
    }

    #[test]
    fn denominator_attenuation() {
        let mut r = rng(15);
        let rho = random_density_matrix(3, 3, &mut r);
        for kind in NoiseKind::BOTH {
            let eps = 0.07;
            let res = simulate_vd(&rho, &PauliObservable::identity(3), &NoiseModel::new(kind, eps).unwrap()).unwrap();
            // (1 − ε')^N Tr(ρ²) with ε' the rescaled probability: 4ε/3 or 2ε.
            let per_gate = match kind {
                NoiseKind::Depolarizing => 1.0 - 4.0 * eps / 3.0,
                NoiseKind::Dephasing => 1.0 - 2.0 * eps,
            };
            assert!((res.denominator - per_gate.powi(3) * rho.purity()).abs() < 1e-12);
            assert!((res.mitigated - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cswap_order_does_not_matter() {
        let mut r = rng(16);
        let rho = random_density_matrix(3, 4, &mut r);
        let o = PauliObservable::parse("XZY + 0.5*ZIZ").unwrap();
        let num_obs = with_aux_x(&symmetrized_pauli_m2(&o));
        for kind in NoiseKind::BOTH {
            let model = NoiseModel::new(kind, 0.08).unwrap();
            let reference = expectation(&build_vd_circuit_state(&rho, &model).unwrap(), &num_obs).unwrap();
            for order in [[2, 1, 0], [1, 2, 0], [0, 2, 1]] {
                let s = build_vd_circuit_state_ordered(&rho, &model, &order).unwrap();
                assert!((expectation(&s, &num_obs).unwrap() - reference).abs() < 1e-12);
            }
        }
        let model = NoiseModel::noiseless(NoiseKind::Dephasing);
        assert!(build_vd_circuit_state_ordered(&rho, &model, &[0, 0, 1]).is_err());
    }

    #[test]
    fn circuit_matches_closed_form() {
        let mut r = rng(18);
        for n in 1..=3 {
            let rho = random_density_matrix(n, 1 << n, &mut r);
            let o = PauliObservable::from_string(random_pauli_string(n, &mut r));
            for kind in NoiseKind::BOTH {
                for eps in [0.0, 0.05, 0.1] {
                    let model = NoiseModel::new(kind, eps).unwrap();
                    let circuit = simulate_vd(&rho, &o, &model).unwrap().mitigated;
                    let closed = noisy_mitigated_analytic(&rho, &o, &model).unwrap();
                    assert!((circuit - closed).abs() <= 1e-10, "n={n} {kind} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn register_limit() {
        let rho = DensityMatrix::maximally_mixed(7);
        let m = NoiseModel::noiseless(NoiseKind::Dephasing);
        assert!(matches!(
            build_vd_circuit_state(&rho, &m),
            Err(Error::Resource { requested: 15, limit: 13 })
        ));
    }

    #[test]
    fn joint_distribution_consistency() {
        let mut r = rng(17);
        let rho = random_density_matrix(2, 3, &mut r);
        let o = PauliObservable::from_string(random_diagonal_string(2, &mut r));
        for kind in NoiseKind::BOTH {
            let model = NoiseModel::new(kind, 0.06).unwrap();
            let joint = joint_outcome_distribution(&rho, &o, &model).unwrap();
            assert!((joint.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let res = simulate_vd(&rho, &o, &model).unwrap();
            assert!((joint.denominator() - res.denominator).abs() < 1e-12);
            assert!((joint.numerator() - res.numerator).abs() < 1e-12);
        }
        let zero = DensityMatrix::basis_state(2, 0);
        let joint = joint_outcome_distribution(&zero, &o, &NoiseModel::noiseless(NoiseKind::Dephasing)).unwrap();
        let plus_mass: f64 = joint.probabilities[..16].iter().sum();
        assert!((plus_mass - 1.0).abs() < 1e-12);
        let xo = PauliObservable::parse("XZ").unwrap();
        assert!(matches!(
            joint_outcome_distribution(&rho, &xo, &NoiseModel::noiseless(NoiseKind::Dephasing)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn degenerate_inputs() {
        let rho = DensityMatrix::maximally_mixed(1);
        let z = PauliObservable::parse("Z").unwrap();
        assert!(mitigated_expectation_power(&rho, &z, 0).is_err());
        assert!(mitigated_expectation_power(&rho, &PauliObservable::parse("ZZ").unwrap(), 2).is_err());
    }
}
