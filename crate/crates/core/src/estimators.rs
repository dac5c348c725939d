//! Sample statistics of the ratio estimator θ̃ = x̄ / ȳ.
//!
//! All variance formulas are first-order Taylor expansions of a ratio of
//! sample means and carry a 1/R prefactor. They are evaluated at R = 1 and
//! divided by R.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distillation::{joint_outcome_distribution, JointDistribution};
use crate::error::{contract, Error, Result};
use crate::noise::{channel_adjoint_on_observable, NoiseKind, NoiseModel};
use crate::quantum::{expectation, expectation_squared_state, qubit_mask, DensityMatrix, PauliObservable};

/// ChaCha stream used for shot sampling; graph generation uses stream 0.
pub const SAMPLING_STREAM: u64 = 1;

const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats {
    /// Pooled θ̃ over every drawn sample.
    pub mean: f64,
    /// Empirical variance of the per-batch θ̃ (estimates Var at R = `samples`).
    pub variance: f64,
    /// Samples per batch, R.
    pub samples: usize,
    pub batches: usize,
    pub batch_estimates: Vec<f64>,
    /// Batches whose ȳ was not positive; their θ̃ is still included.
    pub unstable_batches: usize,
}

impl EstimatorStats {
    /// Standard error of `variance`, treating batch estimates as Gaussian.
    pub fn variance_standard_error(&self) -> f64 {
        self.variance * (2.0 / (self.batches as f64 - 1.0)).sqrt()
    }

    /// Standard error of `mean` from the batch spread.
    pub fn mean_standard_error(&self) -> f64 {
        (self.variance / self.batches as f64).sqrt()
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(contract("R must be at least 1"));
    }
    Ok(())
}

fn purity_checked(rho: &DensityMatrix) -> Result<f64> {
    let p = rho.purity();
    if p <= DEGENERATE_TOL {
        return Err(Error::Degenerate(format!("purity {p:e}")));
    }
    Ok(p)
}

/// The four-term bracket shared by the noiseless and dephasing variances, given
/// Tr(Q ρ) for the squared observable, Tr(A ρ), Tr(A ρ²) and Tr(ρ²).
fn taylor_bracket(sq_rho: f64, o_rho: f64, o_rho2: f64, purity: f64) -> f64 {
    sq_rho / (2.0 * purity * purity) + o_rho * o_rho / (2.0 * purity * purity) + o_rho2 * o_rho2 / purity.powi(4)
        - 2.0 * o_rho2 * o_rho / purity.powi(3)
}

fn checked_variance(v: f64, what: &str) -> Result<f64> {
    // A negative value means the first-order expansion broke down; report it.
    if v < -1e-12 {
        return Err(Error::Degenerate(format!("{what} variance is negative ({v:e})")));
    }
    Ok(v.max(0.0))
}

/// Variance of θ̃ for the noiseless two-copy circuit.
pub fn variance_mitigated_noiseless(rho: &DensityMatrix, obs: &PauliObservable, samples: usize) -> Result<f64> {
    check_samples(samples)?;
    let purity = purity_checked(rho)?;
    let v = taylor_bracket(
        expectation(rho, &obs.square())?,
        expectation(rho, obs)?,
        expectation_squared_state(rho, obs)?,
        purity,
    );
    checked_variance(v / samples as f64, "noiseless mitigated")
}

/// Variance of θ̃ with dephasing in the circuit: the noiseless bracket with O
/// replaced by Λ̄(O), O² by Λ̄(O²), scaled by (1 − 2ε)^{−2N}.
pub fn variance_mitigated_dephasing(
    rho: &DensityMatrix,
    obs: &PauliObservable,
    model: &NoiseModel,
    samples: usize,
) -> Result<f64> {
    if model.kind != NoiseKind::Dephasing {
        return Err(contract("closed-form circuit variance exists for dephasing only"));
    }
    check_samples(samples)?;
    let purity = purity_checked(rho)?;
    let eps = model.eps_two_qubit;
    let noisy = channel_adjoint_on_observable(obs, model.kind, eps);
    let noisy_sq = channel_adjoint_on_observable(&obs.square(), model.kind, eps);
    let bracket = taylor_bracket(
        expectation(rho, &noisy_sq)?,
        expectation(rho, &noisy)?,
        expectation_squared_state(rho, &noisy)?,
        purity,
    );
    let scale = (1.0 - 2.0 * eps).powi(2 * rho.n_qubits() as i32);
    if scale <= DEGENERATE_TOL {
        return Err(Error::Degenerate("auxiliary coherence fully dephased".into()));
    }
    checked_variance(bracket / (scale * samples as f64), "dephasing mitigated")
}

/// Variance of the plain sample mean of H, halved because one distillation
/// shot consumes two copies: (Tr(ρH²) − Tr(ρH)²) / (2R).
pub fn variance_unmitigated(rho: &DensityMatrix, hamiltonian: &PauliObservable, samples: usize) -> Result<f64> {
    check_samples(samples)?;
    let mean = expectation(rho, hamiltonian)?;
    let second = expectation(rho, &hamiltonian.square())?;
    checked_variance((second - mean * mean) / (2.0 * samples as f64), "unmitigated")
}

/// Smallest R with `variance_at_r1 / R ≤ threshold` (at least 1).
pub fn min_samples(variance_at_r1: f64, threshold: f64) -> Result<u64> {
    if threshold <= 0.0 || !threshold.is_finite() {
        return Err(contract("variance threshold must be positive"));
    }
    if variance_at_r1 < 0.0 || variance_at_r1.is_nan() {
        return Err(contract("variance must be non-negative"));
    }
    Ok((variance_at_r1 / threshold).ceil().max(1.0) as u64)
}

/// First and second moments of one shot of the two-copy circuit, with
/// x the auxiliary X outcome and o = (O(b₁) + O(b₂))/2 from the copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementMoments {
    /// E[x]
    pub x: f64,
    /// E[x·o]
    pub xo: f64,
    /// E[o]  (= E[x²·o])
    pub o: f64,
    /// E[o²] (= E[(x·o)²])
    pub o_sq: f64,
}

impl MeasurementMoments {
    pub fn from_joint(joint: &JointDistribution) -> Self {
        let mut m = Self {
            x: 0.0,
            xo: 0.0,
            o: 0.0,
            o_sq: 0.0,
        };
        let d = 1usize << joint.n_qubits;
        for (k, p) in joint.probabilities.iter().enumerate() {
            let (x, b1, b2) = joint.decode(k);
            let o = 0.5 * (joint.observable_values[b1] + joint.observable_values[b2]);
            debug_assert!(b1 < d && b2 < d);
            m.x += p * x;
            m.xo += p * x * o;
            m.o += p * o;
            m.o_sq += p * o * o;
        }
        m
    }

    /// Taylor variance of ȳ-normalised x̄ at R samples:
    /// Var(xo)/μx² + μxo² Var(x)/μx⁴ − 2 μxo Cov(xo, x)/μx³, all over R.
    pub fn ratio_variance(&self, samples: usize) -> Result<f64> {
        check_samples(samples)?;
        if self.x.abs() <= DEGENERATE_TOL {
            return Err(Error::Degenerate("auxiliary <X> vanishes".into()));
        }
        let var_x = 1.0 - self.x * self.x;
        let var_xo = self.o_sq - self.xo * self.xo;
        let cov = self.o - self.xo * self.x;
        let v = var_xo / self.x.powi(2) + self.xo.powi(2) * var_x / self.x.powi(4)
            - 2.0 * self.xo * cov / self.x.powi(3);
        checked_variance(v / samples as f64, "circuit-moment")
    }

    pub fn mitigated(&self) -> f64 {
        self.xo / self.x
    }
}

/// Exact shot moments of the noisy circuit for a diagonal observable, without
/// building the 2N+1 qubit state.
///
/// Observables that are diagonal on the copies and either X or I on the
/// auxiliary keep that form when pulled back through the circuit: Pauli
/// channels map diagonal operators to diagonal operators, CSWAP conjugation
/// only permutes bits, and on the auxiliary the maps act on the two
/// diagonal branches (I part) or scale the coherence (X part). The X moments
/// therefore close to `f^N Tr(Λ̄(A)ρ²)`, while the I moments are tracked as
/// two length-4^N vectors.
pub fn circuit_moments(rho: &DensityMatrix, obs: &PauliObservable, model: &NoiseModel) -> Result<MeasurementMoments> {
    let values = obs
        .diagonal()
        .ok_or_else(|| Error::Unsupported("circuit moments need a diagonal observable".into()))?;
    let n = rho.n_qubits();
    if obs.n_qubits() != n {
        return Err(contract("observable and state sizes differ"));
    }
    model.kind.check_eps(model.eps_two_qubit)?;
    let eps = model.eps_two_qubit;
    let (px, py, _) = model.kind.pauli_probabilities(eps);
    let flip = px + py;
    let coherence = match model.kind {
        NoiseKind::Depolarizing => 1.0 - 4.0 * eps / 3.0,
        NoiseKind::Dephasing => 1.0 - 2.0 * eps,
    }
    .powi(n as i32);

    let purity = rho.purity();
    let noisy = channel_adjoint_on_observable(obs, model.kind, eps);
    let x = coherence * purity;
    let xo = coherence * expectation_squared_state(rho, &noisy)?;

    let d = 1usize << n;
    let p = rho.diagonal();
    let sym: Vec<f64> = (0..d * d)
        .map(|k| 0.5 * (values[k / d] + values[k % d]))
        .collect();
    let sym_sq: Vec<f64> = sym.iter().map(|v| v * v).collect();
    let pull_back = |init: &[f64]| -> f64 {
        let mut branch0 = init.to_vec();
        let mut branch1 = init.to_vec();
        let two_n = 2 * n;
        for i in (0..n).rev() {
            let (ma, mb) = (qubit_mask(two_n, i), qubit_mask(two_n, n + i));
            if flip > 0.0 {
                for m in [ma, mb] {
                    for branch in [&mut branch0, &mut branch1] {
                        let old = branch.clone();
                        for (k, v) in branch.iter_mut().enumerate() {
                            *v = (1.0 - flip) * old[k] + flip * old[k ^ m];
                        }
                    }
                }
                for k in 0..d * d {
                    let (a, b) = (branch0[k], branch1[k]);
                    branch0[k] = (1.0 - flip) * a + flip * b;
                    branch1[k] = (1.0 - flip) * b + flip * a;
                }
            }
            let old = branch1.clone();
            for (k, v) in branch1.iter_mut().enumerate() {
                let src = if (k & ma != 0) != (k & mb != 0) { k ^ ma ^ mb } else { k };
                *v = old[src];
            }
        }
        (0..d * d)
            .map(|k| 0.5 * (branch0[k] + branch1[k]) * p[k / d] * p[k % d])
            .sum()
    };
    Ok(MeasurementMoments {
        x,
        xo,
        o: pull_back(&sym),
        o_sq: pull_back(&sym_sq),
    })
}

/// Variance of θ̃ under circuit noise of either kind for a diagonal observable,
/// from the exact shot moments. For dephasing this equals
/// [`variance_mitigated_dephasing`].
pub fn variance_mitigated_circuit(
    rho: &DensityMatrix,
    obs: &PauliObservable,
    model: &NoiseModel,
    samples: usize,
) -> Result<f64> {
    circuit_moments(rho, obs, model)?.ratio_variance(samples)
}

/// Variance used for sample counts: the closed form under dephasing, the
/// exact-moment route otherwise.
pub fn variance_mitigated(
    rho: &DensityMatrix,
    obs: &PauliObservable,
    model: &NoiseModel,
    samples: usize,
) -> Result<f64> {
    match model.kind {
        NoiseKind::Dephasing => variance_mitigated_dephasing(rho, obs, model, samples),
        NoiseKind::Depolarizing => variance_mitigated_circuit(rho, obs, model, samples),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    /// R, shots per batch.
    pub samples: usize,
    pub batches: usize,
    pub seed: u64,
}

/// Draws `batches × samples` shots from the exact joint outcome distribution
/// and forms θ̃ per batch.
pub fn monte_carlo_estimator(
    rho: &DensityMatrix,
    obs: &PauliObservable,
    model: &NoiseModel,
    config: MonteCarloConfig,
) -> Result<EstimatorStats> {
    if config.samples < 100 {
        return Err(contract("Monte Carlo estimator needs R >= 100"));
    }
    if config.batches < 2 {
        return Err(contract("need at least two batches for a variance"));
    }
    let joint = joint_outcome_distribution(rho, obs, model)?;
    Ok(sample_joint(&joint, config))
}

pub(crate) fn sample_joint(joint: &JointDistribution, config: MonteCarloConfig) -> EstimatorStats {
    let mut cumulative = Vec::with_capacity(joint.probabilities.len());
    let mut acc = 0.0;
    for p in &joint.probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let xs: Vec<f64> = (0..joint.probabilities.len()).map(|k| joint.decode(k).0).collect();
    let nums: Vec<f64> = (0..joint.probabilities.len()).map(|k| joint.numerator_sample(k)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SAMPLING_STREAM);
    let last = cumulative.len() - 1;
    let mut estimates = Vec::with_capacity(config.batches);
    let (mut total_x, mut total_num) = (0.0, 0.0);
    let mut unstable = 0;
    for _ in 0..config.batches {
        let (mut sx, mut snum) = (0.0, 0.0);
        for _ in 0..config.samples {
            let u: f64 = rng.gen::<f64>() * acc;
            let k = cumulative.partition_point(|c| *c <= u).min(last);
            sx += xs[k];
            snum += nums[k];
        }
        if sx <= 0.0 {
            unstable += 1;
        }
        estimates.push(snum / sx);
        total_x += sx;
        total_num += snum;
    }
    let b = estimates.len() as f64;
    let mean_batch = estimates.iter().sum::<f64>() / b;
    let variance = estimates.iter().map(|e| (e - mean_batch).powi(2)).sum::<f64>() / (b - 1.0);
    EstimatorStats {
        mean: total_num / total_x,
        variance,
        samples: config.samples,
        batches: config.batches,
        batch_estimates: estimates,
        unstable_batches: unstable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distillation::simulate_vd;
    use crate::quantum::random::{random_density_matrix, random_diagonal_string, random_pure_state};
    use crate::quantum::PureState;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_observable_has_zero_variance() {
        let rho = random_density_matrix(2, 3, &mut rng(1));
        let v = variance_mitigated_noiseless(&rho, &PauliObservable::identity(2), 1).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn unmitigated_examples() {
        let zz = PauliObservable::parse("ZZ").unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((variance_unmitigated(&mixed, &zz, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((variance_unmitigated(&mixed, &zz, 2).unwrap() - 0.25).abs() < 1e-15);
        let eig = DensityMatrix::basis_state(2, 1);
        assert!(variance_unmitigated(&eig, &zz, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pure_state_identity() {
        let mut r = rng(2);
        let psi = random_pure_state(3, &mut r).to_density();
        let o = PauliObservable::parse("0.6*ZXI + -0.4*IYZ + 0.2*ZZZ").unwrap();
        let a = variance_mitigated_noiseless(&psi, &o, 1).unwrap();
        let b = variance_unmitigated(&psi, &o, 1).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.abs());
    }

    #[test]
    fn dephasing_variance_examples() {
        let mut r = rng(3);
        let rho = random_density_matrix(3, 3, &mut r);
        let o = PauliObservable::parse("ZIZ + 0.5*IZI").unwrap();
        let base = variance_mitigated_noiseless(&rho, &o, 1).unwrap();
        let zero = NoiseModel::noiseless(NoiseKind::Dephasing);
        assert_eq!(variance_mitigated_dephasing(&rho, &o, &zero, 1).unwrap(), base);
        for eps in [0.01, 0.1, 0.3] {
            let m = NoiseModel::new(NoiseKind::Dephasing, eps).unwrap();
            let ratio = variance_mitigated_dephasing(&rho, &o, &m, 1).unwrap() / base;
            assert!((ratio - (1.0 - 2.0 * eps).powi(-6)).abs() < 1e-12 * ratio);
        }
        let dep = NoiseModel::new(NoiseKind::Depolarizing, 0.1).unwrap();
        assert!(variance_mitigated_dephasing(&rho, &o, &dep, 1).is_err());
    }

    #[test]
    fn small_eps_expansion() {
        let n = 6;
        let rho = PureState::plus(n).to_density();
        let o = PauliObservable::parse("ZZIIII + IIZZII + 0.5*IIIIZZ").unwrap();
        let base = variance_mitigated_noiseless(&rho, &o, 1).unwrap();
        let eps = 1e-3;
        let m = NoiseModel::new(NoiseKind::Dephasing, eps).unwrap();
        let ratio = variance_mitigated_dephasing(&rho, &o, &m, 1).unwrap() / base;
        let linear = 1.0 + 4.0 * n as f64 * eps;
        // second-order remainder of (1 − 2ε)^{−2N} is ≈ 2N(2N+1)·2ε²
        assert!((ratio - linear).abs() < 4.0 * (2 * n * (2 * n + 1)) as f64 * eps * eps);
    }

    #[test]
    fn min_samples_examples() {
        assert_eq!(min_samples(0.05, 1e-3).unwrap(), 50);
        assert_eq!(min_samples(0.0, 1e-3).unwrap(), 1);
        assert_eq!(min_samples(1e-3, 1e-3).unwrap(), 1);
        assert!(min_samples(0.1, 0.0).is_err());
        assert!(min_samples(-0.1, 1e-3).is_err());
    }

    #[test]
    fn moments_match_dense_circuit() {
        let mut r = rng(4);
        for n in 1..=3 {
            let rho = random_density_matrix(n, 2, &mut r);
            let o = PauliObservable::new(
                n,
                vec![
                    crate::quantum::PauliTerm { coeff: 0.8, string: random_diagonal_string(n, &mut r) },
                    crate::quantum::PauliTerm { coeff: -0.3, string: random_diagonal_string(n, &mut r) },
                ],
            )
            .unwrap();
            for kind in NoiseKind::BOTH {
                for eps in [0.0, 0.04, 0.12] {
                    let model = NoiseModel::new(kind, eps).unwrap();
                    let exact = MeasurementMoments::from_joint(&joint_outcome_distribution(&rho, &o, &model).unwrap());
                    let fast = circuit_moments(&rho, &o, &model).unwrap();
                    for (a, b) in [(exact.x, fast.x), (exact.xo, fast.xo), (exact.o, fast.o), (exact.o_sq, fast.o_sq)] {
                        assert!((a - b).abs() < 1e-12, "n={n} {kind} eps={eps}: {a} vs {b}");
                    }
                    let sim = simulate_vd(&rho, &o, &model).unwrap();
                    assert!((fast.mitigated() - sim.mitigated).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn moment_route_reproduces_dephasing_formula() {
        let mut r = rng(5);
        let rho = random_density_matrix(4, 3, &mut r);
        let o = PauliObservable::parse("ZZII + -0.5*IZZI + 0.25*IIZZ + -1*IIII").unwrap();
        for eps in [0.0, 0.05, 0.1] {
            let m = NoiseModel::new(NoiseKind::Dephasing, eps).unwrap();
            let a = variance_mitigated_circuit(&rho, &o, &m, 1).unwrap();
            let b = variance_mitigated_dephasing(&rho, &o, &m, 1).unwrap();
            assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let rho = random_density_matrix(2, 2, &mut rng(6));
        let o = PauliObservable::parse("ZI + 0.5*ZZ").unwrap();
        let m = NoiseModel::new(NoiseKind::Dephasing, 0.05).unwrap();
        let cfg = MonteCarloConfig { samples: 200, batches: 10, seed: 99 };
        let a = monte_carlo_estimator(&rho, &o, &m, cfg).unwrap();
        let b = monte_carlo_estimator(&rho, &o, &m, cfg).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_estimator(&rho, &o, &m, MonteCarloConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.batch_estimates, c.batch_estimates);
        assert!(monte_carlo_estimator(&rho, &o, &m, MonteCarloConfig { samples: 99, ..cfg }).is_err());
    }

    #[test]
    fn monte_carlo_converges_to_circuit_value() {
        let (rho, _) = crate::quantum::random::random_dominant_mixture(2, 0.85, &mut rng(7));
        let o = PauliObservable::parse("ZI + 0.5*ZZ + -0.25*IZ").unwrap();
        for kind in NoiseKind::BOTH {
            let m = NoiseModel::new(kind, 0.05).unwrap();
            let target = simulate_vd(&rho, &o, &m).unwrap().mitigated;
            let stats =
                monte_carlo_estimator(&rho, &o, &m, MonteCarloConfig { samples: 100_000, batches: 10, seed: 3 }).unwrap();
            let sigma = (variance_mitigated_circuit(&rho, &o, &m, 1_000_000).unwrap()).sqrt();
            assert!((stats.mean - target).abs() <= 3.0 * sigma, "{kind}: {} vs {target}", stats.mean);
        }
    }
}
