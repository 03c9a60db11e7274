//! Dense complex linear algebra for registers of a few qubits.
//!
//! Qubit 0 is the most significant bit of a basis index, so tensor factor
//! order equals qubit order: in a 2-qubit register `|q0 q1⟩` has index
//! `2*q0 + q1`.
//!
//! Decompositions (Hermitian eigenproblem, SVD, Schur) are delegated to
//! `nalgebra`; everything register-specific is implemented here.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Largest tolerated `max |M - M†|` before a matrix is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Eigenvalues in `[-PSD_TOL, 0)` are rounding noise and clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Reconstruction tolerance for square roots and spectral decompositions.
pub const RECON_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `data.len()` is a
    /// positive perfect square.
    pub fn from_vec(data: Vec<C64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(Error::InvalidInput(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = C64::new(x, 0.0);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in w {
                data.push(a * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `⟨v|M|v⟩`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (o, a) in out.data.iter_mut().zip(&adj.data) {
            *o = (*o + a) * 0.5;
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.data.chunks_exact(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Pauli and single-qubit gate matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn h() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(&[&[s, s], &[s, -s]])
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        let n = self.eigenvectors.dim();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `Σ f(λ_k) v_k v_k†`
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.eigenvectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.eigenvectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }
}

/// Kronecker product with `a` as the slower-varying index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let x = a.data[i * da + j];
            if x == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * n + j * db + l] = x * b.data[k * db + l];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| tensor_product(&acc, f))
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

pub(crate) fn check_register(dim: usize, n_qubits: usize) -> Result<()> {
    if n_qubits >= usize::BITS as usize || 1usize << n_qubits != dim {
        return Err(Error::DimensionMismatch {
            expected: 1usize.checked_shl(n_qubits as u32).unwrap_or(0),
            found: dim,
        });
    }
    Ok(())
}

/// Sorted, deduplicated qubit set; errors on out-of-range indices.
pub(crate) fn qubit_set(qubits: &[usize], n_qubits: usize) -> Result<Vec<usize>> {
    let mut set = qubits.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&index) = set.iter().find(|&&q| q >= n_qubits) {
        return Err(Error::IndexOutOfRange { index, n_qubits });
    }
    Ok(set)
}

#[inline]
pub(crate) fn bit_of(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// Packs the bits of `index` belonging to `qubits` (in the given order) into a
/// smaller index, first listed qubit most significant.
#[inline]
pub(crate) fn gather_bits(index: usize, qubits: &[usize], n_qubits: usize) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | bit_of(index, q, n_qubits))
}

/// Traces out every qubit not listed in `keep`. Kept qubits appear in
/// ascending index order in the result.
pub fn partial_trace(m: &ComplexMatrix, keep: &[usize], n_qubits: usize) -> Result<ComplexMatrix> {
    check_register(m.dim, n_qubits)?;
    let keep = qubit_set(keep, n_qubits)?;
    if keep.is_empty() {
        return Err(Error::InvalidInput(
            "partial trace must keep at least one qubit".into(),
        ));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let out_dim = 1usize << keep.len();
    let mut out = ComplexMatrix::zeros(out_dim);
    let n = m.dim;
    for i in 0..n {
        let ti = gather_bits(i, &traced, n_qubits);
        let ki = gather_bits(i, &keep, n_qubits);
        for j in 0..n {
            if gather_bits(j, &traced, n_qubits) == ti {
                let kj = gather_bits(j, &keep, n_qubits);
                out.data[ki * out_dim + kj] += m.data[i * n + j];
            }
        }
    }
    Ok(out)
}

/// Transposes the tensor factors listed in `subsystem`.
pub fn partial_transpose(
    m: &ComplexMatrix,
    subsystem: &[usize],
    n_qubits: usize,
) -> Result<ComplexMatrix> {
    check_register(m.dim, n_qubits)?;
    let subsystem = qubit_set(subsystem, n_qubits)?;
    let mask = subsystem
        .iter()
        .fold(0usize, |acc, &q| acc | (1 << (n_qubits - 1 - q)));
    let n = m.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let i2 = (i & !mask) | (j & mask);
            let j2 = (j & !mask) | (i & mask);
            out.data[i2 * n + j2] = m.data[i * n + j];
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
///
/// The input is symmetrized before solving; it is rejected if its Hermiticity
/// defect exceeds [`HERMITICITY_TOL`].
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    let deviation = m.hermiticity_defect();
    if deviation > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = m.hermitian_part().to_nalgebra().symmetric_eigen();
    let n = m.dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = eig.eigenvectors[(i, k)];
        }
    }
    Ok(HermitianSpectrum {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: vectors,
    })
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.eigenvalues)
}

/// Clips rounding noise in `[-PSD_TOL, 0)` to zero; errors on anything more
/// negative.
pub fn clip_psd(lambda: f64) -> Result<f64> {
    if lambda < -PSD_TOL {
        Err(Error::NotPositive { eigenvalue: lambda })
    } else {
        Ok(lambda.max(0.0))
    }
}

/// Principal square root of a positive-semidefinite matrix.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eigh(m)?;
    for &l in &spec.eigenvalues {
        clip_psd(l)?;
    }
    Ok(spec.map_eigenvalues(|l| l.max(0.0).sqrt()))
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Eigenvalues of a general (non-Hermitian) matrix via complex Schur form.
pub fn eigenvalues_general(m: &ComplexMatrix) -> Vec<C64> {
    let schur = m.to_nalgebra().schur();
    let (_, t) = schur.unpack();
    (0..m.dim).map(|i| t[(i, i)]).collect()
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn ket(bits: &[f64]) -> Vec<C64> {
        bits.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn phi_plus() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = ket(&[s, 0.0, 0.0, s]);
        ComplexMatrix::outer(&v, &v)
    }

    #[test]
    fn tensor_of_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn x_tensor_x_flips_both_bits() {
        let xx = tensor_product(&pauli::x(), &pauli::x());
        let out = xx.apply(&ket(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(out, ket(&[0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn y_tensor_y_layout() {
        let yy = tensor_product(&pauli::y(), &pauli::y());
        for i in 0..4 {
            assert_eq!(yy[(i, i)], ZERO);
        }
        let anti: Vec<C64> = (0..4).map(|i| yy[(i, 3 - i)]).collect();
        assert_eq!(anti, ket(&[-1.0, 1.0, 1.0, -1.0]));
    }

    #[test]
    fn kronecker_layout_slow_index_first() {
        // |0⟩⟨0| ⊗ X puts X in the top-left block
        let p0 = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let m = tensor_product(&p0, &pauli::x());
        assert_eq!(m[(0, 1)], ONE);
        assert_eq!(m[(2, 3)], ZERO);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&phi_plus(), &[0], 2).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_recovers_product_factors() {
        let mut g = rng(7);
        for _ in 0..100 {
            let a = random_density(&mut g, 2);
            let b = random_density(&mut g, 4);
            let ab = tensor_product(&a, &b);
            assert!(partial_trace(&ab, &[0], 3).unwrap().max_abs_diff(&a) < 1e-12);
            assert!(partial_trace(&ab, &[1, 2], 3).unwrap().max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_direct_summation() {
        // keep qubit 1 of 3: ρ_1[a,b] = Σ_{x,z} ρ[(x,a,z),(x,b,z)]
        let mut g = rng(11);
        let m = random_density(&mut g, 8);
        let r = partial_trace(&m, &[1], 3).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s = ZERO;
                for x in 0..2 {
                    for z in 0..2 {
                        s += m[(4 * x + 2 * a + z, 4 * x + 2 * b + z)];
                    }
                }
                assert!((r[(a, b)] - s).norm() < 1e-15);
            }
        }
        assert!((r.trace().re - 1.0).abs() < 1e-12);
        assert!(r.is_hermitian(1e-15));
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        assert_eq!(
            partial_trace(&phi_plus(), &[2], 2).unwrap_err(),
            Error::IndexOutOfRange {
                index: 2,
                n_qubits: 2
            }
        );
        assert!(partial_trace(&phi_plus(), &[0], 3).is_err());
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut g = rng(3);
        let a = random_density(&mut g, 2);
        let b = random_density(&mut g, 2);
        let pt = partial_transpose(&tensor_product(&a, &b), &[0], 2).unwrap();
        assert!(pt.max_abs_diff(&tensor_product(&a.transpose(), &b)) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let pt = partial_transpose(&phi_plus(), &[0], 2).unwrap();
        let ev = eigvalsh(&pt).unwrap();
        assert!((ev[3] + 0.5).abs() < 1e-14);
        assert!((trace_norm(&pt) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_rejects_bad_index() {
        assert!(partial_transpose(&phi_plus(), &[5], 2).is_err());
    }

    #[test]
    fn eigh_basic() {
        let s = eigh(&ComplexMatrix::from_diag(&[0.5, 0.5])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.5, 0.5]);
        let s = eigh(&pauli::z()).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, -1.0]);
        assert!((s.eigenvectors[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((s.eigenvectors[(1, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_reconstructs_and_is_orthonormal() {
        let mut g = rng(5);
        for dim in [2, 4, 8, 16] {
            let a = random_matrix(&mut g, dim);
            let h = a.hermitian_part();
            let s = eigh(&h).unwrap();
            assert!(s.reconstruct().max_abs_diff(&h) <= 1e-10 * dim as f64);
            let vv = &s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sqrt_cases() {
        let i = ComplexMatrix::identity(4);
        assert!(matrix_sqrt_psd(&i).unwrap().max_abs_diff(&i) < 1e-15);
        let r = matrix_sqrt_psd(&ComplexMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 3.0])) < 1e-14);
        assert!(matches!(
            matrix_sqrt_psd(&pauli::z()),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn sqrt_of_random_psd_squares_back() {
        let mut g = rng(9);
        for _ in 0..20 {
            let a = random_matrix(&mut g, 4);
            let m = &a.adjoint() * &a;
            let s = matrix_sqrt_psd(&m).unwrap();
            assert!((&s * &s).max_abs_diff(&m) < RECON_TOL);
        }
    }

    #[test]
    fn sqrt_with_condition_number_1e6() {
        let mut g = rng(13);
        let a = random_matrix(&mut g, 4);
        let u = eigh(&a.hermitian_part()).unwrap().eigenvectors;
        let d = ComplexMatrix::from_diag(&[1.0, 1e-2, 1e-4, 1e-6]);
        let m = &(&u * &d) * &u.adjoint();
        let s = matrix_sqrt_psd(&m).unwrap();
        assert!((&s * &s).max_abs_diff(&m) < RECON_TOL);
    }

    #[test]
    fn trace_norms() {
        assert!((trace_norm(&ComplexMatrix::identity(4)) - 4.0).abs() < 1e-14);
        let mut g = rng(17);
        let rho = random_density(&mut g, 4);
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let m = ComplexMatrix::from_real(&[&[2.0, 5.0], &[0.0, -1.0]]);
        let mut ev: Vec<f64> = eigenvalues_general(&m).iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn partial_transpose_is_trace_preserving_involution(seed in any::<u64>(), n in 2usize..=3, q in 0usize..3) {
            let q = q % n;
            let mut g = rng(seed);
            let m = random_matrix(&mut g, 1 << n);
            let once = partial_transpose(&m, &[q], n).unwrap();
            let twice = partial_transpose(&once, &[q], n).unwrap();
            prop_assert!(twice.max_abs_diff(&m) < 1e-14);
            prop_assert!((once.trace() - m.trace()).norm() < 1e-14);
        }

        #[test]
        fn density_spectrum_is_a_distribution(seed in any::<u64>(), n in 1usize..=3) {
            let mut g = rng(seed);
            let rho = random_density(&mut g, 1 << n);
            let ev = eigvalsh(&rho).unwrap();
            prop_assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(ev.iter().all(|&l| (-1e-10..=1.0 + 1e-10).contains(&l)));
        }
    }
}
