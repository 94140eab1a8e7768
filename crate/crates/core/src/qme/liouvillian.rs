//! Lindblad generator on column-stacked density matrices.

use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;
use super::QmeError;
use crate::model::{build_hamiltonian, build_operators, CMatrix, HilbertSpace, Level, ModelError, OperatorSet, SystemParams};

/// Dissipators with their rates in the form `r (cρc† − ½{c†c, ρ})`.
fn channels<'a>(params: &SystemParams, ops: &'a OperatorSet) -> [(f64, &'a CMatrix); 3] {
    [
        (params.kappa, &ops.a),
        (params.gamma13, ops.sigma(Level::One, Level::Three)),
        (params.gamma23, ops.sigma(Level::Two, Level::Three)),
    ]
}

/// `−i[H, ρ] + (κ/2)D[a]ρ + (γ13/2)D[σ13]ρ + (γ23/2)D[σ23]ρ` evaluated with
/// dense matrix products, `D[o]ρ = 2oρo† − o†oρ − ρo†o`.
pub fn lindblad_rhs(params: &SystemParams, ops: &OperatorSet, rho: &CMatrix) -> Result<CMatrix, ModelError> {
    let h = build_hamiltonian(params, ops)?;
    let mi = C64::new(0.0, -1.0);
    let mut out = (&h * rho - rho * &h) * mi;
    for (rate, c) in channels(params, ops) {
        let cd = c.adjoint();
        let cdc = &cd * c;
        let d = (c * rho * &cd) * C64::new(2.0, 0.0) - &cdc * rho - rho * &cdc;
        out += d * C64::new(rate / 2.0, 0.0);
    }
    Ok(out)
}

/// Sparse Liouvillian acting on `vec(ρ)`, where `vec` stacks columns:
/// `ρ[r, c]` sits at `c * dim + r`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub params: SystemParams,
    pub space: HilbertSpace,
    pub matrix: CsrMatrix,
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != C64::new(0.0, 0.0) {
                out.push((r, c, v));
            }
        }
    }
    out
}

pub fn build_liouvillian(params: &SystemParams, ops: &OperatorSet) -> Result<Liouvillian, QmeError> {
    params.validate()?;
    let h = build_hamiltonian(params, ops)?;
    let dim = ops.dim();
    let i = C64::new(0.0, 1.0);
    // L vec(ρ) = vec(−i(Kρ − ρK†) + Σ r cρc†),  K = H − (i/2) Σ r c†c
    let mut k = h;
    for (rate, c) in channels(params, ops) {
        k -= (c.adjoint() * c) * (i * (rate / 2.0));
    }
    let k_nz = nonzeros(&k);
    let mut trip = Vec::with_capacity(2 * k_nz.len() * dim);
    for &(r, q, v) in &k_nz {
        // (Kρ)[r, col] picks ρ[q, col]
        for col in 0..dim {
            trip.push((col * dim + r, col * dim + q, -i * v));
        }
        // (ρK†)[row, r] = Σ_q ρ[row, q] conj(K[r, q])
        for row in 0..dim {
            trip.push((r * dim + row, q * dim + row, i * v.conj()));
        }
    }
    for (rate, c) in channels(params, ops) {
        if rate == 0.0 {
            continue;
        }
        let c_nz = nonzeros(c);
        for &(r1, k1, v1) in &c_nz {
            for &(r2, k2, v2) in &c_nz {
                // (cρc†)[r1, r2] += c[r1,k1] ρ[k1,k2] conj(c[r2,k2])
                trip.push((r2 * dim + r1, k2 * dim + k1, v1 * v2.conj() * rate));
            }
        }
    }
    Ok(Liouvillian {
        params: *params,
        space: ops.space,
        matrix: CsrMatrix::from_triplets(dim * dim, dim * dim, trip),
    })
}

impl Liouvillian {
    pub fn new(params: &SystemParams, n_max: usize) -> Result<Self, QmeError> {
        build_liouvillian(params, &build_operators(HilbertSpace::new(n_max)))
    }

    /// Hilbert-space dimension.
    pub fn hilbert_dim(&self) -> usize {
        self.space.dim()
    }

    /// Superoperator dimension `hilbert_dim²`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    pub fn vectorize(rho: &CMatrix) -> Vec<C64> {
        rho.as_slice().to_vec()
    }

    pub fn unvectorize(&self, v: &[C64]) -> CMatrix {
        let d = self.hilbert_dim();
        CMatrix::from_column_slice(d, d, v)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.unvectorize(&self.matrix.mul_vec(rho.as_slice()))
    }

    /// `‖vec(I)ᵀ L‖∞`, zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim();
        let mut id = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            id[k * d + k] = C64::new(1.0, 0.0);
        }
        self.matrix.left_mul_vec(&id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
