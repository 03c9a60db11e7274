//! Pauli-basis tomography: shot sampling, linear inversion and projection
//! onto physical states.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::readout::{stream_rng, ReadoutModel};
use super::{simulate, Circuit};
use crate::qmath::{self, pauli, tensor_all, ComplexMatrix, C64, ONE, ZERO};
use crate::states::DensityMatrix;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        Pauli::ALL.into_iter().find(|p| p.symbol() == c)
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::X => pauli::x(),
            Pauli::Y => pauli::y(),
            Pauli::Z => pauli::z(),
        }
    }

    /// Rotation taking this Pauli's eigenbasis to the computational basis:
    /// `H` for X, `H·S†` for Y.
    pub fn basis_change(self) -> ComplexMatrix {
        let sdg = ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, C64::new(0.0, -1.0)]]);
        match self {
            Pauli::X => pauli::h(),
            Pauli::Y => &pauli::h() * &sdg,
            Pauli::Z => ComplexMatrix::identity(2),
        }
    }
}

/// Label such as `"XZ"`, qubit 0 first.
pub fn setting_label(setting: &[Pauli]) -> String {
    setting.iter().map(|p| p.symbol()).collect()
}

pub fn parse_setting(label: &str) -> Result<Vec<Pauli>> {
    label
        .chars()
        .map(|c| {
            Pauli::from_symbol(c)
                .ok_or_else(|| Error::IncompleteSettings(format!("bad setting label {label:?}")))
        })
        .collect()
}

/// All `3^n` settings in lexicographic order.
pub fn all_settings(n_qubits: usize) -> Vec<Vec<Pauli>> {
    (0..3usize.pow(n_qubits as u32))
        .map(|mut k| {
            let mut s = vec![Pauli::X; n_qubits];
            for slot in s.iter_mut().rev() {
                *slot = Pauli::ALL[k % 3];
                k /= 3;
            }
            s
        })
        .collect()
}

/// Bitstring of basis index `k`, qubit 0 first.
pub fn bitstring(k: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| {
            if (k >> (n_qubits - 1 - q)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn parse_bitstring(s: &str) -> Option<usize> {
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Outcome distribution of measuring every qubit in its setting's basis.
pub fn exact_probabilities(rho: &DensityMatrix, setting: &[Pauli]) -> Result<Vec<f64>> {
    if setting.len() != rho.n_qubits() {
        return Err(Error::WrongQubitCount {
            expected: rho.n_qubits(),
            found: setting.len(),
        });
    }
    let u = tensor_all(&setting.iter().map(|p| p.basis_change()).collect::<Vec<_>>());
    let rotated = &(&u * rho.matrix()) * &u.adjoint();
    Ok((0..rotated.dim())
        .map(|k| rotated[(k, k)].re.max(0.0))
        .collect())
}

/// Samples `shots` outcomes for one setting, passing each bit through the
/// readout model. Deterministic in `(seed, stream)`.
pub fn sample_counts(
    rho: &DensityMatrix,
    setting: &[Pauli],
    shots: u64,
    readout: &ReadoutModel,
    seed: u64,
    stream: u64,
) -> Result<BTreeMap<String, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = rho.n_qubits();
    if readout.n_qubits() != n {
        return Err(Error::WrongQubitCount {
            expected: n,
            found: readout.n_qubits(),
        });
    }
    let probs = exact_probabilities(rho, setting)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = stream_rng(seed, stream);
    let mut tally = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        let mut reported = 0usize;
        for q in 0..n {
            let bit = (k >> (n - 1 - q)) & 1;
            reported = (reported << 1) | readout.sample_bit(q, bit, &mut rng);
        }
        tally[reported] += 1;
    }
    Ok(tally
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (bitstring(k, n), c))
        .collect())
}

/// Counts for every Pauli setting of one tomography run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyRecord {
    pub settings: Vec<String>,
    pub shots: u64,
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub readout_seed: u64,
}

impl TomographyRecord {
    pub fn n_qubits(&self) -> usize {
        self.settings.first().map_or(0, |s| s.len())
    }

    /// Checks coverage of all `3^n` settings and that each setting's counts
    /// sum to `shots`.
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        let n = self.n_qubits();
        if n == 0 {
            return Err(Error::IncompleteSettings("no settings".into()));
        }
        for s in all_settings(n) {
            let label = setting_label(&s);
            let counts = self
                .counts
                .get(&label)
                .ok_or_else(|| Error::IncompleteSettings(format!("missing setting {label}")))?;
            let mut total = 0;
            for (bits, c) in counts {
                if bits.len() != n || parse_bitstring(bits).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "bad outcome {bits:?} in {label}"
                    )));
                }
                total += c;
            }
            if total != self.shots {
                return Err(Error::InvalidInput(format!(
                    "setting {label} has {total} counts for {} shots",
                    self.shots
                )));
            }
        }
        Ok(())
    }

    /// Relative frequencies of one setting, indexed by basis index.
    pub fn frequencies(&self, label: &str) -> Result<Vec<f64>> {
        let n = self.n_qubits();
        let counts = self
            .counts
            .get(label)
            .ok_or_else(|| Error::IncompleteSettings(format!("missing setting {label}")))?;
        let mut f = vec![0.0; 1 << n];
        for (bits, &c) in counts {
            let k = parse_bitstring(bits)
                .ok_or_else(|| Error::InvalidInput(format!("bad outcome {bits:?}")))?;
            f[k] += c as f64 / self.shots as f64;
        }
        Ok(f)
    }
}

/// Runs every setting on `rho`. Setting `s` draws from stream
/// `first_stream + s`.
pub fn measure_tomography(
    rho: &DensityMatrix,
    shots: u64,
    readout: &ReadoutModel,
    seed: u64,
    first_stream: u64,
    exec: Exec,
) -> Result<TomographyRecord> {
    let settings = all_settings(rho.n_qubits());
    let indexed: Vec<(u64, &Vec<Pauli>)> = (0u64..).zip(&settings).collect();
    let counts = exec.try_map(&indexed, |&(i, s)| {
        Ok::<_, Error>((
            setting_label(s),
            sample_counts(rho, s, shots, readout, seed, first_stream + i)?,
        ))
    })?;
    Ok(TomographyRecord {
        settings: settings.iter().map(|s| setting_label(s)).collect(),
        shots,
        counts: counts.into_iter().collect(),
        readout_seed: seed,
    })
}

/// `ρ = 2^{-n} Σ_P ⟨P⟩ P`, each `⟨P⟩` averaged over every setting that
/// measures `P`'s non-identity factors. Hermitian with unit trace but not
/// necessarily positive.
pub fn linear_inversion(
    n_qubits: usize,
    freqs: &BTreeMap<String, Vec<f64>>,
) -> Result<ComplexMatrix> {
    let settings = all_settings(n_qubits);
    for s in &settings {
        let label = setting_label(s);
        match freqs.get(&label) {
            Some(f) if f.len() == 1 << n_qubits => {}
            Some(_) => {
                return Err(Error::InvalidInput(format!(
                    "wrong outcome count for {label}"
                )))
            }
            None => {
                return Err(Error::IncompleteSettings(format!(
                    "missing setting {label}"
                )))
            }
        }
    }
    let dim = 1usize << n_qubits;
    let mut rho = ComplexMatrix::zeros(dim);
    // each qubit factor: None for identity
    for k in 0..4usize.pow(n_qubits as u32) {
        let mut factors: Vec<Option<Pauli>> = vec![None; n_qubits];
        let mut r = k;
        for slot in factors.iter_mut().rev() {
            *slot = match r % 4 {
                0 => None,
                j => Some(Pauli::ALL[j - 1]),
            };
            r /= 4;
        }
        let compatible: Vec<&Vec<Pauli>> = settings
            .iter()
            .filter(|s| {
                factors
                    .iter()
                    .zip(s.iter())
                    .all(|(f, p)| f.is_none_or(|f| f == *p))
            })
            .collect();
        let mut expectation = 0.0;
        for s in &compatible {
            let f = &freqs[&setting_label(s)];
            for (outcome, &prob) in f.iter().enumerate() {
                let parity = factors
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.is_some())
                    .map(|(q, _)| (outcome >> (n_qubits - 1 - q)) & 1)
                    .sum::<usize>();
                expectation += if parity % 2 == 0 { prob } else { -prob };
            }
        }
        expectation /= compatible.len() as f64;
        let op = tensor_all(
            &factors
                .iter()
                .map(|f| f.map_or_else(|| ComplexMatrix::identity(2), Pauli::matrix))
                .collect::<Vec<_>>(),
        );
        rho = &rho + &op.scale_real(expectation / dim as f64);
    }
    Ok(rho.hermitian_part())
}

/// Closest density matrix in spectral terms: eigenvalues are sorted, the
/// most negative ones zeroed and their weight spread evenly over the rest
/// until none is negative.
pub fn project_to_physical(m: &ComplexMatrix, n_qubits: usize) -> Result<DensityMatrix> {
    let h = m.hermitian_part();
    let tr = h.trace().re;
    if !(tr.is_finite() && tr > 0.0) {
        return Err(Error::BadTrace { trace: tr });
    }
    let spec = qmath::eigh(&h.scale_real(1.0 / tr))?;
    let mut lambda = spec.eigenvalues.clone();
    let mut i = lambda.len();
    let mut deficit = 0.0;
    while i > 0 && lambda[i - 1] + deficit / i as f64 <= 0.0 {
        deficit += lambda[i - 1];
        lambda[i - 1] = 0.0;
        i -= 1;
    }
    for l in lambda.iter_mut().take(i) {
        *l += deficit / i as f64;
    }
    let projected = crate::qmath::HermitianSpectrum {
        eigenvalues: lambda,
        eigenvectors: spec.eigenvectors,
    }
    .reconstruct()
    .hermitian_part();
    Ok(DensityMatrix::from_matrix_unchecked(projected, n_qubits))
}

/// Linear inversion followed by [`project_to_physical`].
pub fn reconstruct_from_frequencies(
    n_qubits: usize,
    freqs: &BTreeMap<String, Vec<f64>>,
) -> Result<DensityMatrix> {
    project_to_physical(&linear_inversion(n_qubits, freqs)?, n_qubits)
}

/// State estimate from a record, optionally mitigating each setting's
/// frequencies with `mitigation` first.
pub fn reconstruct(
    record: &TomographyRecord,
    mitigation: Option<&ReadoutModel>,
) -> Result<DensityMatrix> {
    record.validate()?;
    let n = record.n_qubits();
    let mut freqs = BTreeMap::new();
    for label in record.counts.keys() {
        let f = record.frequencies(label)?;
        let f = match mitigation {
            Some(m) => m.mitigate(&f)?,
            None => f,
        };
        freqs.insert(label.clone(), f);
    }
    reconstruct_from_frequencies(n, &freqs)
}

/// Independent tomography runs of the `measured` qubits of `c`'s output.
/// Repetition `r` uses streams starting at `r · 3^n`. Downstream
/// quantities are meant to be averaged over the returned estimates.
#[allow(clippy::too_many_arguments)]
pub fn averaged_tomography(
    c: &Circuit,
    measured: &[usize],
    repetitions: usize,
    shots: u64,
    readout: &ReadoutModel,
    mitigation: Option<&ReadoutModel>,
    seed: u64,
    exec: Exec,
) -> Result<Vec<DensityMatrix>> {
    if repetitions == 0 {
        return Err(Error::InvalidInput("at least one repetition".into()));
    }
    let rho = simulate(c)?.reduced(measured)?;
    let per_rep = 3u64.pow(measured.len() as u32);
    (0..repetitions as u64)
        .map(|r| {
            let record = measure_tomography(&rho, shots, readout, seed, r * per_rep, exec)?;
            reconstruct(&record, mitigation)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_ad_circuit, BellInput, SYSTEM_QUBITS};
    use crate::measures::negativity;
    use crate::qmath::testutil::rng;
    use crate::states::{phi_plus, random_density};

    fn exact_freqs(rho: &DensityMatrix) -> BTreeMap<String, Vec<f64>> {
        all_settings(rho.n_qubits())
            .iter()
            .map(|s| (setting_label(s), exact_probabilities(rho, s).unwrap()))
            .collect()
    }

    #[test]
    fn settings_enumeration() {
        let s = all_settings(2);
        assert_eq!(s.len(), 9);
        assert_eq!(setting_label(&s[0]), "XX");
        assert_eq!(setting_label(&s[5]), "YZ");
        assert_eq!(parse_setting("ZX").unwrap(), vec![Pauli::Z, Pauli::X]);
        assert!(parse_setting("ZQ").is_err());
        assert_eq!(bitstring(2, 3), "010");
    }

    #[test]
    fn bell_zz_and_xx_outcomes() {
        let bell = phi_plus().density_matrix();
        let ideal = ReadoutModel::ideal(2);
        let zz = sample_counts(&bell, &[Pauli::Z, Pauli::Z], 8192, &ideal, 1, 0).unwrap();
        assert!(zz.keys().all(|k| k == "00" || k == "11"));
        assert_eq!(zz.values().sum::<u64>(), 8192);
        let xx = sample_counts(&bell, &[Pauli::X, Pauli::X], 8192, &ideal, 1, 1).unwrap();
        assert!(xx.keys().all(|k| k == "00" || k == "11"));
        let yy = exact_probabilities(&bell, &[Pauli::Y, Pauli::Y]).unwrap();
        // ⟨YY⟩ = −1 on Φ⁺
        assert!((yy[1] + yy[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let r = random_density(&mut rng(2), 2);
        let m = ReadoutModel::symmetric_flip(2, 0.03);
        let a = sample_counts(&r, &[Pauli::X, Pauli::Y], 500, &m, 7, 3).unwrap();
        assert_eq!(
            a,
            sample_counts(&r, &[Pauli::X, Pauli::Y], 500, &m, 7, 3).unwrap()
        );
        assert_ne!(
            a,
            sample_counts(&r, &[Pauli::X, Pauli::Y], 500, &m, 7, 4).unwrap()
        );
        assert!(sample_counts(&r, &[Pauli::X, Pauli::Y], 0, &m, 7, 3).is_err());
    }

    #[test]
    fn exact_reconstruction_is_identity() {
        let mut g = rng(9);
        for n in [1, 2, 3] {
            for _ in 0..10 {
                let r = random_density(&mut g, n);
                let est = reconstruct_from_frequencies(n, &exact_freqs(&r)).unwrap();
                assert!(est.matrix().max_abs_diff(r.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn projection_is_physical() {
        let m = ComplexMatrix::from_diag(&[0.7, 0.4, 0.0, -0.1]);
        let p = project_to_physical(&m, 2).unwrap();
        let ev = p.spectrum().unwrap();
        assert!(ev.iter().all(|&l| l >= -1e-15));
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // −0.1 is dropped and spread over three: 0.7−1/30, 0.4−1/30, −1/30 <0, then over two
        assert!((ev[0] - 0.65).abs() < 1e-12 && (ev[1] - 0.35).abs() < 1e-12);
    }

    #[test]
    fn mitigation_with_true_model_recovers_exact_frequencies() {
        let r = random_density(&mut rng(4), 2);
        let m = ReadoutModel::new(vec![
            [[0.97, 0.05], [0.03, 0.95]],
            [[0.9, 0.02], [0.1, 0.98]],
        ])
        .unwrap();
        for s in all_settings(2) {
            let exact = exact_probabilities(&r, &s).unwrap();
            let back = m.mitigate(&m.apply(&exact).unwrap()).unwrap();
            for (a, b) in back.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn record_validation_and_json() {
        let bell = phi_plus().density_matrix();
        let rec =
            measure_tomography(&bell, 100, &ReadoutModel::ideal(2), 5, 0, Exec::default()).unwrap();
        rec.validate().unwrap();
        let json = serde_json::to_string(&rec).unwrap();
        let back: TomographyRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        let mut missing = rec.clone();
        missing.counts.remove("XY");
        assert!(matches!(
            reconstruct(&missing, None),
            Err(Error::IncompleteSettings(_))
        ));
        let mut zero = rec;
        zero.shots = 0;
        assert_eq!(reconstruct(&zero, None).unwrap_err(), Error::ZeroShots);
    }

    #[test]
    fn sequential_and_parallel_records_match() {
        let bell = phi_plus().density_matrix();
        let m = ReadoutModel::symmetric_flip(2, 0.03);
        let a = measure_tomography(&bell, 300, &m, 5, 0, Exec::Sequential).unwrap();
        let b = measure_tomography(&bell, 300, &m, 5, 0, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_repetition_matches_direct_reconstruction() {
        let c = build_ad_circuit(BellInput::Phi0, 0.0);
        let ideal = ReadoutModel::ideal(2);
        let reps = averaged_tomography(
            &c,
            &SYSTEM_QUBITS,
            1,
            2000,
            &ideal,
            None,
            3,
            Exec::default(),
        )
        .unwrap();
        let rho = simulate(&c).unwrap().reduced(&SYSTEM_QUBITS).unwrap();
        let rec = measure_tomography(&rho, 2000, &ideal, 3, 0, Exec::default()).unwrap();
        assert_eq!(reps[0], reconstruct(&rec, None).unwrap());
    }

    #[test]
    fn repeated_bell_tomography_negativity() {
        let c = build_ad_circuit(BellInput::Phi0, 0.0);
        let reps = averaged_tomography(
            &c,
            &SYSTEM_QUBITS,
            5,
            8192,
            &ReadoutModel::ideal(2),
            None,
            21,
            Exec::default(),
        )
        .unwrap();
        let mean = reps
            .iter()
            .map(|r| negativity(r, &[0]).unwrap())
            .sum::<f64>()
            / 5.0;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }
}
