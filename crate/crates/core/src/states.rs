//! Pure and mixed register states, the named two-qubit families, and
//! per-qubit local-unitary encodings.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::qmath::{
    self, check_register, gather_bits, qubit_set, tensor_all, ComplexMatrix, C64, ONE, ZERO,
};
use crate::{Error, Result};

/// Norm tolerance for [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;
/// Trace tolerance for [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;

/// Normalized state vector on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Requires `2^n` amplitudes of unit norm (within [`NORM_TOL`]).
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = register_size(amplitudes.len())?;
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = register_size(amplitudes.len())?;
        let norm = norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state, qubit 0 = most significant bit.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `self ⊗ other`
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes: qmath::tensor_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// Reduced density matrix on `keep`, computed directly from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = qubit_set(keep, self.n_qubits)?;
        if keep.is_empty() {
            return Err(Error::InvalidInput(
                "reduced state must keep a qubit".into(),
            ));
        }
        let n = self.n_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dr = 1usize << rest.len();
        // reshape ψ into a dk × dr matrix
        let mut psi = vec![ZERO; dk * dr];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            let k = gather_bits(idx, &keep, n);
            let r = gather_bits(idx, &rest, n);
            psi[k * dr + r] = *a;
        }
        let mut m = ComplexMatrix::zeros(dk);
        for i in 0..dk {
            for j in i..dk {
                let s: C64 = (0..dr)
                    .map(|r| psi[i * dr + r] * psi[j * dr + r].conj())
                    .sum();
                m[(i, j)] = s;
                m[(j, i)] = s.conj();
            }
        }
        Ok(DensityMatrix {
            n_qubits: keep.len(),
            matrix: m,
        })
    }

    /// Applies a 2×2 unitary to `qubit` in place.
    pub fn apply_single(&mut self, u: &ComplexMatrix, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        let stride = 1usize << (self.n_qubits - 1 - qubit);
        let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        for base in 0..self.amplitudes.len() {
            if base & stride != 0 {
                continue;
            }
            let a0 = self.amplitudes[base];
            let a1 = self.amplitudes[base | stride];
            self.amplitudes[base] = u00 * a0 + u01 * a1;
            self.amplitudes[base | stride] = u10 * a0 + u11 * a1;
        }
        Ok(())
    }

    /// Applies a 4×4 unitary to the ordered pair `(first, second)`, `first`
    /// being the more significant factor of `u`.
    pub fn apply_pair(&mut self, u: &ComplexMatrix, first: usize, second: usize) -> Result<()> {
        let n = self.n_qubits;
        for q in [first, second] {
            if q >= n {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    n_qubits: n,
                });
            }
        }
        if first == second {
            return Err(Error::InvalidInput(
                "two-qubit operation on a single qubit".into(),
            ));
        }
        let sa = 1usize << (n - 1 - first);
        let sb = 1usize << (n - 1 - second);
        for base in 0..self.amplitudes.len() {
            if base & (sa | sb) != 0 {
                continue;
            }
            let idx = [base, base | sb, base | sa, base | sa | sb];
            let old = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amplitudes[i] = (0..4).map(|c| u[(r, c)] * old[c]).sum();
            }
        }
        Ok(())
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn register_size(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "{len} amplitudes do not describe a qubit register"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Wire form: `{"n_qubits": n, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PureStateJson {
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&PureState> for PureStateJson {
    fn from(s: &PureState) -> Self {
        Self {
            n_qubits: s.n_qubits,
            amplitudes: s.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<PureStateJson> for PureState {
    type Error = Error;
    fn try_from(j: PureStateJson) -> Result<Self> {
        if j.amplitudes.len() != 1usize << j.n_qubits.min(30) {
            return Err(Error::DimensionMismatch {
                expected: 1 << j.n_qubits.min(30),
                found: j.amplitudes.len(),
            });
        }
        PureState::new(
            j.amplitudes
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect(),
        )
    }
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PureStateJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PureStateJson::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix on a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, n_qubits: usize) -> Result<Self> {
        check_register(matrix.dim(), n_qubits)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        for l in qmath::eigvalsh(&matrix)? {
            qmath::clip_psd(l)?;
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Skips validation; for matrices that are physical by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix, n_qubits: usize) -> Self {
        debug_assert_eq!(matrix.dim(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: qmath::tensor_product(&self.matrix, &other.matrix),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = qmath::partial_trace(&self.matrix, keep, self.n_qubits)?;
        let n = m.dim().trailing_zeros() as usize;
        Ok(DensityMatrix {
            n_qubits: n,
            matrix: m,
        })
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn fidelity_with_pure(&self, psi: &PureState) -> f64 {
        self.matrix.expectation(psi.amplitudes()).re
    }

    /// Conjugates by `u` (full-register unitary).
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.dim(),
                found: u.dim(),
            });
        }
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: &(u * &self.matrix) * &u.adjoint(),
        })
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        qmath::eigvalsh(&self.matrix)
    }
}

/// `R_z(a) = diag(e^{-ia/2}, e^{ia/2})`
pub fn rz(a: f64) -> ComplexMatrix {
    let h = 0.5 * a;
    ComplexMatrix::from_rows(&[
        &[C64::from_polar(1.0, -h), ZERO],
        &[ZERO, C64::from_polar(1.0, h)],
    ])
}

/// `R_y(b) = [[cos b/2, -sin b/2], [sin b/2, cos b/2]]`
pub fn ry(b: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * b).sin_cos();
    ComplexMatrix::from_real(&[&[c, -s], &[s, c]])
}

/// `R_z(α) · R_y(β) · R_z(δ)`; covers SU(2), global phase dropped.
pub fn euler_unitary([alpha, beta, delta]: [f64; 3]) -> ComplexMatrix {
    &(&rz(alpha) * &ry(beta)) * &rz(delta)
}

/// One Euler-angle triple per qubit, each angle wrapped into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct EncodingUnitaries {
    angles: Vec<[f64; 3]>,
}

impl EncodingUnitaries {
    pub fn new(angles: Vec<[f64; 3]>) -> Result<Self> {
        if angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("encoding angles must be finite".into()));
        }
        Ok(Self {
            angles: angles.into_iter().map(|t| t.map(wrap_angle)).collect(),
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            angles: vec![[0.0; 3]; n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn unitaries(&self) -> Vec<ComplexMatrix> {
        self.angles.iter().map(|&a| euler_unitary(a)).collect()
    }

    /// `U_1 ⊗ … ⊗ U_N`
    pub fn operator(&self) -> ComplexMatrix {
        tensor_all(&self.unitaries())
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.angles.len() != n_qubits {
            return Err(Error::WrongQubitCount {
                expected: n_qubits,
                found: self.angles.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<[f64; 3]>> for EncodingUnitaries {
    type Error = Error;
    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EncodingUnitaries> for Vec<[f64; 3]> {
    fn from(e: EncodingUnitaries) -> Self {
        e.angles
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `(U_1⊗…⊗U_N) ρ (U_1⊗…⊗U_N)†`
pub fn apply_encoding(state: &DensityMatrix, enc: &EncodingUnitaries) -> Result<DensityMatrix> {
    enc.check(state.n_qubits())?;
    state.conjugate_by(&enc.operator())
}

/// Encoding applied to a state vector.
pub fn apply_encoding_pure(state: &PureState, enc: &EncodingUnitaries) -> Result<PureState> {
    enc.check(state.n_qubits())?;
    let mut out = state.clone();
    for (q, u) in enc.unitaries().iter().enumerate() {
        out.apply_single(u, q)?;
    }
    Ok(out)
}

/// `cos θ |01⟩ + sin θ |10⟩`
pub fn make_psi_theta(theta: f64) -> PureState {
    let (s, c) = theta.sin_cos();
    PureState {
        n_qubits: 2,
        amplitudes: vec![ZERO, C64::new(c, 0.0), C64::new(s, 0.0), ZERO],
    }
}

/// `cos θ |00⟩ + sin θ |11⟩`
pub fn make_phi_theta(theta: f64) -> PureState {
    let (s, c) = theta.sin_cos();
    PureState {
        n_qubits: 2,
        amplitudes: vec![C64::new(c, 0.0), ZERO, ZERO, C64::new(s, 0.0)],
    }
}

/// `(|0⟩|ψ₀^γ⟩ + |1⟩|ψ₁^γ⟩)/√2` with `|ψ₀^γ⟩ = cos γ|0⟩ + sin γ|1⟩` and
/// `|ψ₁^γ⟩ = −sin γ|0⟩ + cos γ|1⟩`.
///
/// γ = 0 is `(|00⟩+|11⟩)/√2`. At γ = π/2 and γ = π/4 the result equals
/// `(|01⟩+|10⟩)/√2` and `(|0+⟩+|1−⟩)/√2` up to a `Z` on qubit 0, a local
/// phase that commutes with dephasing and amplitude damping.
pub fn make_phi_gamma(gamma: f64) -> PureState {
    let (s, c) = gamma.sin_cos();
    let k = FRAC_1_SQRT_2;
    PureState {
        n_qubits: 2,
        amplitudes: vec![
            C64::new(k * c, 0.0),
            C64::new(k * s, 0.0),
            C64::new(-k * s, 0.0),
            C64::new(k * c, 0.0),
        ],
    }
}

/// `(|00⟩+|11⟩)/√2`
pub fn phi_plus() -> PureState {
    make_phi_gamma(0.0)
}

/// `(|01⟩+|10⟩)/√2`
pub fn psi_plus() -> PureState {
    make_psi_theta(std::f64::consts::FRAC_PI_4)
}

/// Two-qubit graph state `(|0+⟩+|1−⟩)/√2`.
pub fn graph_state() -> PureState {
    PureState {
        n_qubits: 2,
        amplitudes: [0.5, 0.5, 0.5, -0.5]
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect(),
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2`
pub fn ghz(n_qubits: usize) -> PureState {
    assert!(n_qubits >= 1);
    let mut amplitudes = vec![ZERO; 1 << n_qubits];
    amplitudes[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[(1 << n_qubits) - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState {
        n_qubits,
        amplitudes,
    }
}

/// Haar-random pure state drawn from the given generator.
pub fn random_pure(rng: &mut impl rand::Rng, n_qubits: usize) -> PureState {
    let amps = (0..1usize << n_qubits)
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    PureState::normalized(amps).expect("gaussian vector is nonzero")
}

/// Standard normal deviate via Box–Muller.
fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Random mixed state `A A† / tr(A A†)` with Gaussian `A` (Hilbert–Schmidt
/// ensemble).
pub fn random_density(rng: &mut impl rand::Rng, n_qubits: usize) -> DensityMatrix {
    let d = 1usize << n_qubits;
    let data: Vec<C64> = (0..d * d)
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    let a = ComplexMatrix::from_vec(data).expect("square");
    let m = &a * &a.adjoint();
    let t = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.scale_real(1.0 / t), n_qubits)
}
