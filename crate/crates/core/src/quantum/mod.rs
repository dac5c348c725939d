//! Dense states, operators and the constructions shared by every other module.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! computational-basis index. For the distillation register the layout is
//! `[auxiliary, copy-1 qubits, copy-2 qubits]`.

pub mod kernels;
pub mod pauli;
pub mod random;
pub mod spectral;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{contract, Error, Result};

pub use pauli::{Pauli, PauliAction, PauliObservable, PauliString, PauliTerm};
pub use spectral::{spectral_decompose, SpectralDecomposition};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: C64 = Complex64::new(1.0, 0.0);

/// Largest register `tensor_product` will build.
pub const MAX_TENSOR_QUBITS: usize = 14;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Positive semidefiniteness is only verified by eigendecomposition up to this
/// dimension; larger states are produced by trace-preserving maps of checked
/// inputs.
const PSD_CHECK_MAX_DIM: usize = 256;

/// Bit of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

pub(crate) fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(contract(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A Hermitian, unit-trace, positive semidefinite matrix on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates the matrix against the density-matrix invariants.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(contract("density matrix must be square"));
        }
        let n_qubits = qubits_of_dim(matrix.nrows())?;
        let rho = Self { n_qubits, matrix };
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Skips validation; callers guarantee the invariants (e.g. the output of
    /// a trace-preserving map applied to a valid state).
    pub(crate) fn from_raw(n_qubits: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self::from_raw(psi.n_qubits(), v * v.adjoint())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_raw(n_qubits, DMatrix::identity(d, d) / C64::from(d as f64))
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        Self::from_pure(&PureState::basis(n_qubits, index))
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        let n = qubits_of_dim(probs.len())?;
        if probs.iter().any(|p| *p < -PSD_TOL) {
            return Err(contract("negative probability"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(contract(format!("probabilities sum to {total}")));
        }
        let diag = DVector::from_iterator(probs.len(), probs.iter().map(|p| C64::from(*p)));
        Ok(Self::from_raw(n, DMatrix::from_diagonal(&diag)))
    }

    /// Convex combination `Σ w_k ρ_k`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| contract("empty mixture"))?.1;
        let n = first.n_qubits;
        let mut total = 0.0;
        let mut m = DMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.n_qubits != n {
                return Err(contract("mixture of states on different registers"));
            }
            if *w < 0.0 {
                return Err(contract("negative mixture weight"));
            }
            total += w;
            m += &rho.matrix * C64::from(*w);
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(contract(format!("mixture weights sum to {total}")));
        }
        Ok(Self::from_raw(n, m))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr(ρ²) = Σ|ρ_ij|² for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(contract(format!("not Hermitian (max deviation {herm:.3e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(contract(format!("trace is {tr}, expected 1")));
        }
        if self.dim() <= PSD_CHECK_MAX_DIM {
            let min = self
                .matrix
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL {
                return Err(contract(format!("not positive semidefinite (eigenvalue {min:.3e})")));
            }
        }
        Ok(())
    }
}

/// A normalised state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let n_qubits = qubits_of_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(contract(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate("zero or non-finite state vector".into()));
        }
        Self::new(amplitudes / C64::from(norm))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut v = DVector::zeros(1 << n_qubits);
        v[index] = ONE;
        Self { n_qubits, amplitudes: v }
    }

    /// |+⟩^⊗n.
    pub fn plus(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let a = C64::from(1.0 / (d as f64).sqrt());
        Self {
            n_qubits,
            amplitudes: DVector::from_element(d, a),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Kronecker product `a ⊗ b`; `a` occupies the leading qubits.
pub fn tensor_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !a.is_square() || !b.is_square() {
        return Err(contract("tensor_product operands must be square"));
    }
    let na = qubits_of_dim(a.nrows())?;
    let nb = qubits_of_dim(b.nrows())?;
    if na + nb > MAX_TENSOR_QUBITS {
        return Err(Error::Resource {
            requested: na + nb,
            limit: MAX_TENSOR_QUBITS,
        });
    }
    Ok(a.kronecker(b))
}

/// Tr(O ρ). The imaginary residue must be below 1e-10 and is discarded.
pub fn expectation(rho: &DensityMatrix, obs: &PauliObservable) -> Result<f64> {
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract(format!(
            "observable on {} qubits, state on {}",
            obs.n_qubits(),
            rho.n_qubits()
        )));
    }
    let v = obs.trace_product(rho.matrix());
    assert!(v.im.abs() <= 1e-10, "Tr(Oρ) has imaginary part {}", v.im);
    Ok(v.re)
}

/// Tr(O ρ²) without forming ρ², in O(terms · d²).
pub fn expectation_squared_state(rho: &DensityMatrix, obs: &PauliObservable) -> Result<f64> {
    if rho.n_qubits() != obs.n_qubits() {
        return Err(contract("observable and state sizes differ"));
    }
    let m = rho.matrix();
    let d = rho.dim();
    let mut total = ZERO;
    for t in obs.terms() {
        let act = t.string.action();
        let mut acc = ZERO;
        // Tr(P ρ ρ) = Σ_ij (Pρ)_ij ρ_ji with (Pρ)_ij = phase(i^x) ρ_{i^x, j}.
        for j in 0..d {
            let col = m.column(j);
            for i in 0..d {
                let k = i ^ act.x_mask;
                acc += act.phase(k) * col[k] * col[i].conj();
            }
        }
        total += acc * t.coeff;
    }
    debug_assert!(total.im.abs() < 1e-9);
    Ok(total.re)
}

/// ρ^M through the spectrum, with negative eigenvalues clamped to zero.
pub fn matrix_power(rho: &DensityMatrix, power: u32) -> Result<DMatrix<C64>> {
    if power == 0 {
        return Err(contract("matrix_power needs M >= 1"));
    }
    if power == 1 {
        return Ok(rho.matrix().clone());
    }
    Ok(spectral_decompose(rho).reconstruct_with(|l| l.max(0.0).powi(power as i32)))
}

/// The M = 2 cyclic shift on two N-qubit copies: `S |a⟩|b⟩ = |b⟩|a⟩`.
pub fn cyclic_shift_m2(n_qubits: usize) -> Result<DMatrix<C64>> {
    if n_qubits == 0 {
        return Err(contract("cyclic shift needs N >= 1"));
    }
    if 2 * n_qubits > MAX_TENSOR_QUBITS {
        return Err(Error::Resource {
            requested: 2 * n_qubits,
            limit: MAX_TENSOR_QUBITS,
        });
    }
    let d = 1usize << n_qubits;
    let mut s = DMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = ONE;
        }
    }
    Ok(s)
}

/// (O ⊗ I + I ⊗ O) / 2 as a Pauli sum on 2N qubits.
pub fn symmetrized_pauli_m2(obs: &PauliObservable) -> PauliObservable {
    let n = obs.n_qubits();
    let id = PauliString::identity(n);
    let terms = obs
        .terms()
        .iter()
        .flat_map(|t| {
            [
                PauliTerm {
                    coeff: 0.5 * t.coeff,
                    string: t.string.tensor(&id),
                },
                PauliTerm {
                    coeff: 0.5 * t.coeff,
                    string: id.tensor(&t.string),
                },
            ]
        })
        .collect();
    PauliObservable::new(2 * n, terms).expect("lengths are consistent by construction")
}

/// Dense O^(2) = (O ⊗ I + I ⊗ O) / 2.
pub fn symmetrized_observable_m2(obs: &PauliObservable) -> Result<DMatrix<C64>> {
    if 2 * obs.n_qubits() > MAX_TENSOR_QUBITS {
        return Err(Error::Resource {
            requested: 2 * obs.n_qubits(),
            limit: MAX_TENSOR_QUBITS,
        });
    }
    Ok(symmetrized_pauli_m2(obs).to_matrix())
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(contract("fidelity of states with different dimensions"));
    }
    Ok(a.amplitudes().dotc(b.amplitudes()).norm_sqr().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_density_matrix, random_hermitian, random_pauli_observable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn tensor_identities_and_basis_states() {
        let i2 = DMatrix::<C64>::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2).unwrap(), DMatrix::identity(4, 4));
        let p0 = DensityMatrix::basis_state(1, 0);
        let p1 = DensityMatrix::basis_state(1, 1);
        let prod = tensor_product(p0.matrix(), p1.matrix()).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![ZERO, ONE, ZERO, ZERO]));
        assert_eq!(prod, expected);
    }

    #[test]
    fn tensor_trace_multiplies() {
        let mut r = rng();
        let a = random_density_matrix(2, 4, &mut r);
        let b = random_density_matrix(2, 2, &mut r);
        let t = tensor_product(a.matrix(), b.matrix()).unwrap().trace();
        assert!((t - C64::from(a.trace() * b.trace())).norm() < 1e-13);
    }

    #[test]
    fn tensor_rejects_oversized_and_non_square() {
        let big = DMatrix::<C64>::identity(1 << 8, 1 << 8);
        let small = DMatrix::<C64>::identity(1 << 7, 1 << 7);
        assert!(matches!(
            tensor_product(&big, &small),
            Err(Error::Resource { requested: 15, limit: 14 })
        ));
        let rect = DMatrix::<C64>::zeros(2, 4);
        assert!(tensor_product(&rect, &rect).is_err());
        let odd = DMatrix::<C64>::identity(3, 3);
        assert!(tensor_product(&odd, &odd).is_err());
    }

    #[test]
    fn tensor_is_associative() {
        let mut r = rng();
        let a = random_hermitian(1, &mut r);
        let b = random_hermitian(2, &mut r);
        let c = random_hermitian(1, &mut r);
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        assert!((left - right).camax() < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let z = PauliObservable::parse("Z").unwrap();
        assert_eq!(expectation(&DensityMatrix::basis_state(1, 0), &z).unwrap(), 1.0);
        assert!(expectation(&DensityMatrix::maximally_mixed(1), &z).unwrap().abs() < 1e-15);
        let zz = PauliObservable::parse("ZZ").unwrap();
        let plus = PureState::plus(2).to_density();
        assert!(expectation(&plus, &zz).unwrap().abs() < 1e-15);
        assert!(matches!(expectation(&plus, &z), Err(Error::Contract(_))));
    }

    #[test]
    fn squared_state_expectation_matches_dense() {
        let mut r = rng();
        let rho = random_density_matrix(3, 8, &mut r);
        let obs = random_pauli_observable(3, 4, &mut r);
        let dense = (obs.to_matrix() * rho.matrix() * rho.matrix()).trace().re;
        assert!((expectation_squared_state(&rho, &obs).unwrap() - dense).abs() < 1e-12);
    }

    #[test]
    fn matrix_power_examples() {
        let rho = DensityMatrix::from_probabilities(&[0.75, 0.25]).unwrap();
        let sq = matrix_power(&rho, 2).unwrap();
        assert!((sq[(0, 0)].re - 0.5625).abs() < 1e-14);
        assert!((sq[(1, 1)].re - 0.0625).abs() < 1e-14);
        assert!(sq[(0, 1)].norm() < 1e-14);
        assert_eq!(matrix_power(&rho, 1).unwrap(), *rho.matrix());
        let pure = PureState::plus(2).to_density();
        for m in 1..5 {
            assert!((matrix_power(&pure, m).unwrap() - pure.matrix()).camax() < 1e-12);
        }
        assert!(matrix_power(&rho, 0).is_err());
    }

    #[test]
    fn swap_matrix_for_one_qubit() {
        let s = cyclic_shift_m2(1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
        );
        assert_eq!(s, expected);
    }

    #[test]
    fn swap_trick() {
        let mut r = rng();
        let s = cyclic_shift_m2(2).unwrap();
        let rho = random_density_matrix(2, 3, &mut r);
        let sigma = random_density_matrix(2, 2, &mut r);
        let joint = tensor_product(rho.matrix(), sigma.matrix()).unwrap();
        let lhs = (&s * joint).trace();
        let rhs = (rho.matrix() * sigma.matrix()).trace();
        assert!((lhs - rhs).norm() < 1e-13);
        let same = tensor_product(rho.matrix(), rho.matrix()).unwrap();
        assert!(((&s * same).trace().re - rho.purity()).abs() < 1e-13);
    }

    #[test]
    fn symmetrized_observable_examples() {
        let id = PauliObservable::identity(2);
        assert_eq!(symmetrized_observable_m2(&id).unwrap(), DMatrix::identity(16, 16));
        let z = PauliObservable::parse("Z").unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![ONE, ZERO, ZERO, -ONE]));
        assert_eq!(symmetrized_observable_m2(&z).unwrap(), expected);
    }

    #[test]
    fn symmetrized_observable_commutes_with_shift() {
        let mut r = rng();
        for n in 1..=3 {
            let s = cyclic_shift_m2(n).unwrap();
            let o = symmetrized_observable_m2(&random_pauli_observable(n, 1, &mut r)).unwrap();
            assert!((&s * &o - &o * &s).camax() <= 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let a = PureState::plus(2);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&PureState::basis(2, 0), &PureState::basis(2, 3)).unwrap(), 0.0);
        let phased = PureState::new(a.amplitudes() * C64::from_polar(1.0, 0.731)).unwrap();
        assert!((fidelity(&a, &phased).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&a, &PureState::plus(1)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(DMatrix::identity(2, 2)).is_err());
        let not_psd = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::from(1.5), C64::from(-0.5)]));
        assert!(DensityMatrix::new(not_psd).is_err());
        let mut m = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::from(0.5), C64::from(0.5)]));
        m[(0, 1)] = C64::new(0.1, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(DMatrix::identity(2, 2) * C64::from(0.5)).is_ok());
    }
}
