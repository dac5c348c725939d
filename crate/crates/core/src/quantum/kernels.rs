//! In-place O(d²) conjugation kernels on dense density matrices.
//!
//! Matrices are nalgebra column-major, so element (i, j) lives at `j * d + i`.

use nalgebra::DMatrix;

use super::{qubit_mask, C64};

/// ρ ← U ρ U† for a single-qubit unitary on qubit `q`.
pub fn apply_single_qubit_unitary(m: &mut DMatrix<C64>, n_qubits: usize, q: usize, u: [[C64; 2]; 2]) {
    let d = m.nrows();
    let mask = qubit_mask(n_qubits, q);
    let data = m.as_mut_slice();
    // Rows: ρ ← U ρ.
    for j in 0..d {
        let col = &mut data[j * d..(j + 1) * d];
        for i0 in (0..d).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let (a, b) = (col[i0], col[i1]);
            col[i0] = u[0][0] * a + u[0][1] * b;
            col[i1] = u[1][0] * a + u[1][1] * b;
        }
    }
    // Columns: ρ ← ρ U†, (ρU†)_{i,j} = Σ_k ρ_{ik} conj(U_{jk}).
    for j0 in (0..d).filter(|j| j & mask == 0) {
        let j1 = j0 | mask;
        for i in 0..d {
            let a = data[j0 * d + i];
            let b = data[j1 * d + i];
            data[j0 * d + i] = a * u[0][0].conj() + b * u[0][1].conj();
            data[j1 * d + i] = a * u[1][0].conj() + b * u[1][1].conj();
        }
    }
}

/// ρ ← D ρ D† for a diagonal unitary D = diag(phases).
pub fn apply_diagonal_unitary(m: &mut DMatrix<C64>, phases: &[C64]) {
    let d = m.nrows();
    debug_assert_eq!(phases.len(), d);
    let data = m.as_mut_slice();
    for j in 0..d {
        let pj = phases[j].conj();
        for i in 0..d {
            data[j * d + i] *= phases[i] * pj;
        }
    }
}

/// ρ ← P ρ P† for a permutation matrix `P|j⟩ = |perm(j)⟩` that is an
/// involution (perm ∘ perm = id), such as (controlled) SWAPs.
pub fn apply_involution(m: &mut DMatrix<C64>, perm: impl Fn(usize) -> usize) {
    let d = m.nrows();
    let data = m.as_mut_slice();
    // new(i, j) = old(perm(i), perm(j)); swap each orbit pair once.
    for j in 0..d {
        let pj = perm(j);
        for i in 0..d {
            let pi = perm(i);
            let a = j * d + i;
            let b = pj * d + pi;
            if b > a {
                data.swap(a, b);
            }
        }
    }
}

/// Pauli channel on qubit `q`:
/// ρ ← (1 − px − py − pz) ρ + px XρX + py YρY + pz ZρZ.
///
/// On each 2×2 block `[a b; c d]` of the target qubit, XρX = `[d c; b a]`,
/// YρY = `[d −c; −b a]` and ZρZ = `[a −b; −c d]`.
pub fn apply_pauli_channel(m: &mut DMatrix<C64>, n_qubits: usize, q: usize, px: f64, py: f64, pz: f64) {
    let d = m.nrows();
    let mask = qubit_mask(n_qubits, q);
    let p0 = 1.0 - px - py - pz;
    let keep_diag = p0 + pz;
    let flip_diag = px + py;
    let keep_off = p0 - pz;
    let swap_off = px - py;
    let data = m.as_mut_slice();
    for j0 in (0..d).filter(|j| j & mask == 0) {
        let j1 = j0 | mask;
        for i0 in (0..d).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            let ia = j0 * d + i0;
            let ib = j1 * d + i0;
            let ic = j0 * d + i1;
            let id = j1 * d + i1;
            let (a, b, c, dd) = (data[ia], data[ib], data[ic], data[id]);
            data[ia] = a * keep_diag + dd * flip_diag;
            data[id] = dd * keep_diag + a * flip_diag;
            data[ib] = b * keep_off + c * swap_off;
            data[ic] = c * keep_off + b * swap_off;
        }
    }
}
