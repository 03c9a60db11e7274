//! Per-qubit readout errors, their calibration and inversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Seeded generator on an independent stream.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Independent bit-flip confusion per qubit. `confusion[q][r][t]` is the
/// probability of reporting bit `r` on qubit `q` when its true bit is `t`, so
/// each column sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[[f64; 2]; 2]>", into = "Vec<[[f64; 2]; 2]>")]
pub struct ReadoutModel {
    confusion: Vec<[[f64; 2]; 2]>,
}

impl TryFrom<Vec<[[f64; 2]; 2]>> for ReadoutModel {
    type Error = Error;
    fn try_from(v: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ReadoutModel> for Vec<[[f64; 2]; 2]> {
    fn from(m: ReadoutModel) -> Self {
        m.confusion
    }
}

/// Applies a 2×2 map to the axis of qubit `q` of a `2^n` vector.
pub(crate) fn apply_on_axis(v: &mut [f64], m: &[[f64; 2]; 2], q: usize, n: usize) {
    let stride = 1usize << (n - 1 - q);
    for base in 0..v.len() {
        if base & stride != 0 {
            continue;
        }
        let (a0, a1) = (v[base], v[base | stride]);
        v[base] = m[0][0] * a0 + m[0][1] * a1;
        v[base | stride] = m[1][0] * a0 + m[1][1] * a1;
    }
}

impl ReadoutModel {
    pub fn new(confusion: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if confusion.is_empty() {
            return Err(Error::InvalidInput(
                "readout model needs at least one qubit".into(),
            ));
        }
        for (q, m) in confusion.iter().enumerate() {
            for col in [[m[0][0], m[1][0]], [m[0][1], m[1][1]]] {
                if col.iter().any(|x| !(0.0..=1.0).contains(x))
                    || (col[0] + col[1] - 1.0).abs() > STOCHASTIC_TOL
                {
                    return Err(Error::InvalidInput(format!(
                        "confusion matrix of qubit {q} is not column-stochastic"
                    )));
                }
            }
        }
        Ok(Self { confusion })
    }

    pub fn ideal(n_qubits: usize) -> Self {
        Self::symmetric_flip(n_qubits, 0.0)
    }

    /// Each bit flips with probability `e`.
    pub fn symmetric_flip(n_qubits: usize, e: f64) -> Self {
        let m = [[1.0 - e, e], [e, 1.0 - e]];
        Self {
            confusion: vec![m; n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.confusion.len()
    }

    pub fn confusion(&self) -> &[[[f64; 2]; 2]] {
        &self.confusion
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_qubits() {
            return Err(Error::WrongQubitCount {
                expected: self.n_qubits(),
                found: n,
            });
        }
        Ok(())
    }

    /// Distribution of reported bitstrings given the true distribution.
    pub fn apply(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let n = probs.len().trailing_zeros() as usize;
        self.check(n)?;
        let mut v = probs.to_vec();
        for (q, m) in self.confusion.iter().enumerate() {
            apply_on_axis(&mut v, m, q, n);
        }
        Ok(v)
    }

    /// Reported bit for true bit `bit` on qubit `q`.
    pub fn sample_bit(&self, q: usize, bit: usize, rng: &mut impl Rng) -> usize {
        let flip = self.confusion[q][1 - bit][bit];
        if flip > 0.0 && rng.random::<f64>() < flip {
            1 - bit
        } else {
            bit
        }
    }

    fn inverses(&self) -> Result<Vec<[[f64; 2]; 2]>> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(q, m)| {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.abs() < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "confusion matrix of qubit {q} is singular"
                    )));
                }
                Ok([
                    [m[1][1] / det, -m[0][1] / det],
                    [-m[1][0] / det, m[0][0] / det],
                ])
            })
            .collect()
    }

    /// Inverts the confusion on observed frequencies. The result sums to one
    /// but may hold negative quasi-probabilities.
    pub fn invert(&self, freqs: &[f64]) -> Result<Vec<f64>> {
        let n = freqs.len().trailing_zeros() as usize;
        self.check(n)?;
        let mut v = freqs.to_vec();
        for (q, inv) in self.inverses()?.iter().enumerate() {
            apply_on_axis(&mut v, inv, q, n);
        }
        Ok(v)
    }

    /// [`ReadoutModel::invert`] followed by clipping negatives to zero and
    /// renormalising.
    pub fn mitigate(&self, freqs: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.invert(freqs)?;
        for x in v.iter_mut() {
            *x = x.max(0.0);
        }
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput(
                "mitigated distribution vanished".into(),
            ));
        }
        v.iter_mut().for_each(|x| *x /= total);
        Ok(v)
    }
}

/// Estimates the confusion matrices by preparing every computational basis
/// state and measuring it `shots` times through `readout`.
pub fn calibrate(readout: &ReadoutModel, shots: u64, seed: u64) -> Result<ReadoutModel> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = readout.n_qubits();
    // counts[q][reported][true]
    let mut counts = vec![[[0u64; 2]; 2]; n];
    for basis in 0..1usize << n {
        let mut rng = stream_rng(seed, basis as u64);
        for _ in 0..shots {
            for (q, c) in counts.iter_mut().enumerate() {
                let bit = (basis >> (n - 1 - q)) & 1;
                let r = readout.sample_bit(q, bit, &mut rng);
                c[r][bit] += 1;
            }
        }
    }
    let confusion = counts
        .iter()
        .map(|c| {
            let mut m = [[0.0; 2]; 2];
            for t in 0..2 {
                let total = (c[0][t] + c[1][t]) as f64;
                m[0][t] = c[0][t] as f64 / total;
                m[1][t] = 1.0 - m[0][t];
            }
            m
        })
        .collect();
    ReadoutModel::new(confusion)
}
