//! Scalar correlation and entanglement quantifiers.
//!
//! Entropic quantities are in bits (base-2 logarithms). Negativity follows
//! `N = (‖ρ^{T_A}‖₁ − 1)/2`, so a Bell state has `N = 1/2`;
//! [`doubled_negativity`] returns `2N = ‖ρ^{T_A}‖₁ − 1`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::qmath::{self, pauli, tensor_product, ComplexMatrix, C64};
use crate::states::{euler_unitary, wrap_angle, DensityMatrix};
use crate::{Error, Result};

/// Purity below `1 − PURITY_TOL` means "not pure".
pub const PURITY_TOL: f64 = 1e-9;

fn entropy_of(m: &ComplexMatrix) -> f64 {
    let ev = qmath::eigvalsh(m).expect("density matrices are Hermitian");
    let s: f64 = ev
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy `−tr ρ log₂ ρ`.
pub fn entropy(state: &DensityMatrix) -> f64 {
    entropy_of(state.matrix())
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    [x, 1.0 - x]
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

fn complement(part: &[usize], n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let a = qmath::qubit_set(part, n)?;
    let b: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::TrivialBipartition);
    }
    Ok((a, b))
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)` with `A = part_a`, `B` its complement.
pub fn mutual_information(state: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    let (a, b) = complement(part_a, state.n_qubits())?;
    let i = entropy(&state.reduced(&a)?) + entropy(&state.reduced(&b)?) - entropy(state);
    Ok(i.max(0.0))
}

/// `Σᵢ S(ρᵢ) − S(ρ)` over single-qubit marginals.
pub fn total_correlations(state: &DensityMatrix) -> f64 {
    let n = state.n_qubits();
    if n == 1 {
        return 0.0;
    }
    let local: f64 = (0..n)
        .map(|q| entropy(&state.reduced(&[q]).expect("qubit in range")))
        .sum();
    (local - entropy(state)).max(0.0)
}

fn require_two_qubits(state: &DensityMatrix) -> Result<()> {
    if state.n_qubits() != 2 {
        return Err(Error::WrongQubitCount {
            expected: 2,
            found: state.n_qubits(),
        });
    }
    Ok(())
}

fn sigma_yy() -> ComplexMatrix {
    tensor_product(&pauli::y(), &pauli::y())
}

fn wootters(mut lambdas: Vec<f64>) -> f64 {
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Eigenvalues of `ρ` at or below this are treated as exact zeros by
/// [`concurrence`].
pub const RANK_TOL: f64 = 1e-13;

/// Wootters concurrence of a two-qubit state.
///
/// With `ρ = W W†`, `W = [√p_k |e_k⟩]` over the eigenpairs above [`RANK_TOL`],
/// the λᵢ are the singular values of the complex symmetric matrix
/// `τ = Wᵀ (σ_y⊗σ_y) W`, which coincide with those of
/// `ω = √(√ρ ρ̃ √ρ)`. No square root of a near-zero eigenvalue enters, so
/// rank-deficient states keep full precision.
pub fn concurrence(state: &DensityMatrix) -> Result<f64> {
    require_two_qubits(state)?;
    let spec = qmath::eigh(state.matrix())?;
    let kept: Vec<usize> = (0..4).filter(|&k| spec.eigenvalues[k] > RANK_TOL).collect();
    let yy = sigma_yy();
    let w: Vec<Vec<C64>> = kept
        .iter()
        .map(|&k| {
            let s = spec.eigenvalues[k].sqrt();
            spec.eigenvector(k).iter().map(|z| z * s).collect()
        })
        .collect();
    let mut tau = ComplexMatrix::zeros(4);
    for (i, wi) in w.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            let ywj = yy.apply(wj);
            tau[(i, j)] = wi.iter().zip(&ywj).map(|(a, b)| a * b).sum();
        }
    }
    Ok(wootters(qmath::singular_values(&tau)))
}

/// Concurrence from the spectrum of the non-Hermitian product
/// `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`: λᵢ = √μᵢ. Can lose about eight digits on
/// rank-deficient states because of the square root of near-zero μᵢ.
pub fn concurrence_product_spectrum(state: &DensityMatrix) -> Result<f64> {
    require_two_qubits(state)?;
    let rho = state.matrix();
    let yy = sigma_yy();
    let r = &(&(rho * &yy) * &rho.conj()) * &yy;
    let lambdas = qmath::eigenvalues_general(&r)
        .iter()
        .map(|mu| mu.re.max(0.0).sqrt())
        .collect();
    Ok(wootters(lambdas))
}

/// Concurrence via the literal `ω = √(√ρ ρ̃ √ρ)` and its singular values.
/// Shares the precision loss of [`concurrence_product_spectrum`].
pub fn concurrence_via_omega(state: &DensityMatrix) -> Result<f64> {
    require_two_qubits(state)?;
    let sqrt_rho = qmath::matrix_sqrt_psd(state.matrix())?;
    let yy = sigma_yy();
    let tilde = &(&yy * &state.matrix().conj()) * &yy;
    let inner = &(&sqrt_rho * &tilde) * &sqrt_rho;
    let omega = qmath::matrix_sqrt_psd(&inner.hermitian_part())?;
    Ok(wootters(qmath::singular_values(&omega)))
}

/// Two-qubit entanglement of formation `h((1 + √(1−C²))/2)`, in bits.
pub fn entanglement_of_formation(state: &DensityMatrix) -> Result<f64> {
    let c = concurrence(state)?.min(1.0);
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    Ok(binary_entropy(x))
}

/// `(‖ρ^{T_A}‖₁ − 1)/2` with `A = part_a`.
pub fn negativity(state: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    Ok(0.5 * doubled_negativity(state, part_a)?)
}

/// `‖ρ^{T_A}‖₁ − 1`
pub fn doubled_negativity(state: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    let (a, _) = complement(part_a, state.n_qubits())?;
    let pt = qmath::partial_transpose(state.matrix(), &a, state.n_qubits())?;
    Ok((qmath::trace_norm(&pt) - 1.0).max(0.0))
}

/// Singlet fraction and the teleportation fidelity it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletFraction {
    /// `F = max ⟨ψ|ρ|ψ⟩` over maximally entangled `|ψ⟩`.
    pub fraction: f64,
    /// `f = (2F + 1)/3`
    pub fidelity: f64,
    /// Euler angles of the `U` with `|ψ⟩ = (U⊗I)|Φ⁺⟩`.
    pub angles: [f64; 3],
}

/// Grid points per Euler angle in the singlet-fraction search.
pub const SINGLET_GRID: usize = 12;
/// Grid points refined by the simplex.
pub const SINGLET_STARTS: usize = 8;

fn singlet_overlap(rho: &ComplexMatrix, angles: [f64; 3]) -> f64 {
    let u = euler_unitary(angles);
    // (U⊗I)|Φ⁺⟩ has amplitude U[a,b]/√2 on |ab⟩
    let psi: Vec<C64> = u.as_slice().iter().map(|z| z * FRAC_1_SQRT_2).collect();
    rho.expectation(&psi).re
}

/// Maximises the overlap with `(U⊗I)|Φ⁺⟩` over all single-qubit `U`:
/// a 12³ Euler-angle grid seeds simplex refinements of the best
/// [`SINGLET_STARTS`] points, and the best refined value wins (ties go to the
/// lexicographically smallest angle triple).
pub fn singlet_fraction(state: &DensityMatrix) -> Result<SingletFraction> {
    require_two_qubits(state)?;
    let rho = state.matrix();
    let step = TAU / SINGLET_GRID as f64;
    let mut grid: Vec<([f64; 3], f64)> = Vec::with_capacity(SINGLET_GRID.pow(3));
    for i in 0..SINGLET_GRID {
        for j in 0..SINGLET_GRID {
            for k in 0..SINGLET_GRID {
                let a = [i as f64 * step, j as f64 * step, k as f64 * step];
                grid.push((a, singlet_overlap(rho, a)));
            }
        }
    }
    // stable: equal values keep grid order
    grid.sort_by(|a, b| b.1.total_cmp(&a.1));
    let cfg = NelderMeadConfig {
        max_iter: 2000,
        f_tol: 1e-15,
        initial_step: 0.5 * step,
        ..Default::default()
    };
    let mut best: Option<([f64; 3], f64)> = None;
    for (start, _) in grid.iter().take(SINGLET_STARTS) {
        let m = nelder_mead(|x| -singlet_overlap(rho, [x[0], x[1], x[2]]), start, &cfg);
        let angles = [wrap_angle(m.x[0]), wrap_angle(m.x[1]), wrap_angle(m.x[2])];
        let value = -m.value;
        best = match best {
            None => Some((angles, value)),
            Some((ba, bv)) => {
                if value > bv + 1e-12 || ((value - bv).abs() <= 1e-12 && angles < ba) {
                    Some((angles, value.max(bv)))
                } else {
                    Some((ba, bv.max(value)))
                }
            }
        };
    }
    let (angles, fraction) = best.expect("at least one start");
    Ok(SingletFraction {
        fraction,
        fidelity: (2.0 * fraction + 1.0) / 3.0,
        angles,
    })
}

/// Entanglement between a system and its environment, `S(ρ_S)`, for a pure
/// joint state.
pub fn system_env_entanglement(joint: &DensityMatrix, system_qubits: &[usize]) -> Result<f64> {
    let purity = joint.purity();
    if purity < 1.0 - PURITY_TOL {
        return Err(Error::NotPure { purity });
    }
    let (s, _) = complement(system_qubits, joint.n_qubits())?;
    Ok(entropy(&joint.reduced(&s)?))
}

/// Smallest eigenvalue of the partial transpose; negative iff NPT.
pub fn min_partial_transpose_eigenvalue(state: &DensityMatrix, part_a: &[usize]) -> Result<f64> {
    let (a, _) = complement(part_a, state.n_qubits())?;
    let pt = qmath::partial_transpose(state.matrix(), &a, state.n_qubits())?;
    let ev = qmath::eigvalsh(&pt)?;
    Ok(*ev.last().expect("nonempty"))
}
