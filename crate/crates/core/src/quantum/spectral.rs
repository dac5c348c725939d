use nalgebra::{DMatrix, DVector};

use super::{DensityMatrix, PureState, C64, TRACE_TOL, ZERO};

/// Eigenvalues closer than this are treated as one degenerate block.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// ρ = Σ λ_k |ψ_k⟩⟨ψ_k| with λ sorted descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column k is |ψ_k⟩.
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> PureState {
        PureState::normalized(self.eigenvectors.column(k).into_owned())
            .expect("eigenvectors are normalised")
    }

    pub fn dominant(&self) -> PureState {
        self.eigenvector(0)
    }

    /// λ₁ − λ₂, or +∞ for a one-dimensional space.
    pub fn spectral_gap(&self) -> f64 {
        match self.eigenvalues.as_slice() {
            [a, b, ..] => a - b,
            _ => f64::INFINITY,
        }
    }

    /// Σ f(λ_k) |ψ_k⟩⟨ψ_k|.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let weights = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|l| C64::from(f(*l))));
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= weights[k];
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.reconstruct_with(|l| l)
    }
}

/// Eigendecomposition with a deterministic basis: eigenvalues descending,
/// negative noise clamped to zero, and degenerate blocks re-expressed in a
/// canonical basis built from the block projector (pivoted Gram–Schmidt over
/// computational basis vectors, largest component real positive, ordered by
/// that component's index).
pub fn spectral_decompose(rho: &DensityMatrix) -> SpectralDecomposition {
    let eig = rho.matrix().clone().symmetric_eigen();
    let d = rho.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > TRACE_TOL && total > 0.0 {
        values.iter_mut().for_each(|l| *l /= total);
    }
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end - 1] - values[end] <= DEGENERACY_TOL {
            end += 1;
        }
        let block = canonical_block(&vectors.columns(start, end - start).into_owned());
        for (k, col) in block.into_iter().enumerate() {
            vectors.set_column(start + k, &col);
        }
        start = end;
    }
    SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

fn canonical_block(block: &DMatrix<C64>) -> Vec<DVector<C64>> {
    let (d, m) = block.shape();
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(m);
    if m == 1 {
        basis.push(block.column(0).into_owned());
    } else {
        // Projector onto the block; its columns are Π|e_j⟩.
        let proj = block * block.adjoint();
        let mut residuals: Vec<DVector<C64>> = (0..d).map(|j| proj.column(j).into_owned()).collect();
        for _ in 0..m {
            let (best, _) = residuals
                .iter()
                .enumerate()
                .map(|(j, r)| (j, r.norm()))
                .fold((0, -1.0), |acc, (j, n)| if n > acc.1 + 1e-12 { (j, n) } else { acc });
            let v = residuals[best].normalize();
            for r in residuals.iter_mut() {
                let c = v.dotc(r);
                *r -= &v * c;
            }
            basis.push(v);
        }
    }
    let mut keyed: Vec<(usize, DVector<C64>)> = basis.into_iter().map(fix_phase).collect();
    keyed.sort_by_key(|(k, _)| *k);
    keyed.into_iter().map(|(_, v)| v).collect()
}

/// Rotates the global phase so the largest-magnitude component (first one on
/// ties) is real positive; returns that component's index.
fn fix_phase(v: DVector<C64>) -> (usize, DVector<C64>) {
    let mut idx = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        let n = z.norm();
        if n > best + 1e-12 {
            best = n;
            idx = i;
        }
    }
    let pivot = v[idx];
    if pivot == ZERO {
        return (idx, v);
    }
    let phase = pivot.conj() / pivot.norm();
    (idx, v * phase)
}
