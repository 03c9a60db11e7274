//! Single-qubit Kraus channels, their product action on registers,
//! concatenation, and Stinespring dilation onto one environment qubit.
//!
//! The noise strength `p ∈ [0, 1]` plays the role of time: `p = 0` is the
//! identity channel and `p → 1` the long-time limit.

use serde::{Deserialize, Serialize};

use crate::qmath::{pauli, ComplexMatrix, C64, ZERO};
use crate::states::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Tolerance for the completeness relation `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Elementary noise processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Dephasing,
    AmplitudeDamping,
}

impl NoiseKind {
    pub fn channel(self, p: f64) -> Result<KrausChannel> {
        match self {
            NoiseKind::Dephasing => dephasing(p),
            NoiseKind::AmplitudeDamping => amplitude_damping(p),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelKind {
    Identity,
    Dephasing,
    AmplitudeDamping,
    /// Stages in the order they act.
    Concatenation(Vec<ChannelKind>),
}

/// A channel family swept over a single strength `p`; concatenations apply
/// every stage at the same `p`, first stage first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChannelFamily {
    Single(NoiseKind),
    Concat(Vec<NoiseKind>),
}

impl ChannelFamily {
    pub fn at(&self, p: f64) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Single(k) => k.channel(p),
            ChannelFamily::Concat(stages) => {
                let mut it = stages.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::InvalidInput("empty concatenation".into()))?
                    .channel(p)?;
                it.try_fold(first, |acc, k| Ok(concatenate(&acc, &k.channel(p)?)))
            }
        }
    }

    /// The same channel on each of `n_qubits` qubits.
    pub fn product(&self, p: f64, n_qubits: usize) -> Result<Vec<KrausChannel>> {
        let c = self.at(p)?;
        Ok(vec![c; n_qubits])
    }

    pub fn label(&self) -> String {
        match self {
            ChannelFamily::Single(k) => k.label().to_string(),
            ChannelFamily::Concat(ks) => {
                let parts: Vec<_> = ks.iter().map(|k| k.label()).collect();
                format!("concat[{}]", parts.join(","))
            }
        }
    }
}

impl From<NoiseKind> for ChannelFamily {
    fn from(k: NoiseKind) -> Self {
        ChannelFamily::Single(k)
    }
}

/// Completely positive trace-preserving map on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    p: Vec<f64>,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes and completeness.
    pub fn new(kind: ChannelKind, p: Vec<f64>, kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() || kraus_ops.iter().any(|k| k.dim() != 2) {
            return Err(Error::InvalidInput("Kraus operators must be 2x2".into()));
        }
        let ch = Self { kind, p, kraus_ops };
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidInput(format!(
                "Kraus set is not trace preserving (defect {defect:e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self {
            kind: ChannelKind::Identity,
            p: vec![],
            kraus_ops: vec![ComplexMatrix::identity(2)],
        }
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    /// One strength per stage.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// `max |Σ K†K − I|`
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .kraus_ops
            .iter()
            .fold(ComplexMatrix::zeros(2), |acc, k| &acc + &(&k.adjoint() * k));
        sum.max_abs_diff(&ComplexMatrix::identity(2))
    }

    /// `Σ K ρ K†` on a single-qubit matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus_ops
            .iter()
            .fold(ComplexMatrix::zeros(rho.dim()), |acc, k| {
                &acc + &(&(k * rho) * &k.adjoint())
            })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

/// `K₀ = √(1−p/2)·I`, `K₁ = √(p/2)·Z`
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    Ok(KrausChannel {
        kind: ChannelKind::Dephasing,
        p: vec![p],
        kraus_ops: vec![
            ComplexMatrix::identity(2).scale_real((1.0 - 0.5 * p).sqrt()),
            pauli::z().scale_real((0.5 * p).sqrt()),
        ],
    })
}

/// `K₀ = diag(1, √(1−p))`, `K₁ = √p·|0⟩⟨1|`
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    check_p(p)?;
    Ok(KrausChannel {
        kind: ChannelKind::AmplitudeDamping,
        p: vec![p],
        kraus_ops: vec![
            ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]),
            ComplexMatrix::from_real(&[&[0.0, p.sqrt()], &[0.0, 0.0]]),
        ],
    })
}

/// `a` then `b`: Kraus set `{B_j A_i}`.
pub fn concatenate(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let kraus_ops = b
        .kraus_ops
        .iter()
        .flat_map(|bj| a.kraus_ops.iter().map(move |ai| bj * ai))
        .collect();
    let stages = |c: &KrausChannel| match &c.kind {
        ChannelKind::Concatenation(v) => v.clone(),
        k => vec![k.clone()],
    };
    let mut kinds = stages(a);
    kinds.extend(stages(b));
    let mut p = a.p.clone();
    p.extend_from_slice(&b.p);
    KrausChannel {
        kind: ChannelKind::Concatenation(kinds),
        p,
        kraus_ops,
    }
}

/// `M ← (K on qubit q) · M`, where `M` is a 2^n × 2^n matrix.
fn left_local(m: &ComplexMatrix, k: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let dim = m.dim();
    let stride = 1usize << (n - 1 - q);
    let mut out = ComplexMatrix::zeros(dim);
    for row in 0..dim {
        let bit = (row / stride) & 1;
        let r0 = row & !stride;
        let r1 = row | stride;
        let (c0, c1) = (k[(bit, 0)], k[(bit, 1)]);
        if c0 == ZERO && c1 == ZERO {
            continue;
        }
        for col in 0..dim {
            out[(row, col)] = c0 * m[(r0, col)] + c1 * m[(r1, col)];
        }
    }
    out
}

/// `M ← M · (K on qubit q)†`
fn right_local_adjoint(m: &ComplexMatrix, k: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let dim = m.dim();
    let stride = 1usize << (n - 1 - q);
    let mut out = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let bit = (col / stride) & 1;
        let c0 = k[(bit, 0)].conj();
        let c1 = k[(bit, 1)].conj();
        if c0 == ZERO && c1 == ZERO {
            continue;
        }
        let k0 = col & !stride;
        let k1 = col | stride;
        for row in 0..dim {
            out[(row, col)] = m[(row, k0)] * c0 + m[(row, k1)] * c1;
        }
    }
    out
}

/// Applies `channel` to qubit `q` of an `n`-qubit matrix.
pub(crate) fn apply_local_channel(
    m: &ComplexMatrix,
    channel: &KrausChannel,
    q: usize,
    n: usize,
) -> ComplexMatrix {
    if channel.kind == ChannelKind::Identity {
        return m.clone();
    }
    channel
        .kraus_ops
        .iter()
        .fold(ComplexMatrix::zeros(m.dim()), |acc, k| {
            &acc + &right_local_adjoint(&left_local(m, k, q, n), k, q, n)
        })
}

/// `Λ₁ ⊗ … ⊗ Λ_N (ρ)`, one channel per qubit.
pub fn apply_product_channel(
    state: &DensityMatrix,
    per_qubit: &[KrausChannel],
) -> Result<DensityMatrix> {
    let n = state.n_qubits();
    if per_qubit.len() != n {
        return Err(Error::WrongQubitCount {
            expected: n,
            found: per_qubit.len(),
        });
    }
    let m = per_qubit
        .iter()
        .enumerate()
        .fold(state.matrix().clone(), |m, (q, c)| {
            apply_local_channel(&m, c, q, n)
        });
    Ok(DensityMatrix::from_matrix_unchecked(m.hermitian_part(), n))
}

/// Applies `channel` to a single qubit, identity elsewhere.
pub fn apply_on_qubit(
    state: &DensityMatrix,
    channel: &KrausChannel,
    qubit: usize,
) -> Result<DensityMatrix> {
    let n = state.n_qubits();
    if qubit >= n {
        return Err(Error::IndexOutOfRange {
            index: qubit,
            n_qubits: n,
        });
    }
    let mut per_qubit = vec![KrausChannel::identity(); n];
    per_qubit[qubit] = channel.clone();
    apply_product_channel(state, &per_qubit)
}

/// System ⊗ environment unitary `V` with `Tr_E[V(ρ⊗|0⟩⟨0|)V†] = Λ(ρ)`.
/// Basis index is `2·s + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationUnitary {
    matrix: ComplexMatrix,
}

impl DilationUnitary {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr_E[V(ρ⊗|0⟩⟨0|)V†]` for a single-qubit `ρ`.
    pub fn reduced_action(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let env0 = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let joint = crate::qmath::tensor_product(rho, &env0);
        let out = &(&self.matrix * &joint) * &self.matrix.adjoint();
        crate::qmath::partial_trace(&out, &[0], 2).expect("2-qubit register")
    }
}

/// Dilates a channel with at most two Kraus operators onto one environment
/// qubit: `V|s⟩|0⟩ = Σ_j (K_j|s⟩)|j⟩`. The columns for `|s⟩|1⟩` are filled by
/// Gram–Schmidt over the standard basis in index order.
pub fn dilation(c: &KrausChannel) -> Result<DilationUnitary> {
    let ops = c.kraus_ops();
    if ops.len() > 2 {
        return Err(Error::NotDilatable(ops.len()));
    }
    let zero = ComplexMatrix::zeros(2);
    let k = [&ops[0], ops.get(1).unwrap_or(&zero)];
    let mut cols: [Option<Vec<C64>>; 4] = Default::default();
    for s in 0..2 {
        let mut v = vec![ZERO; 4];
        for (j, kj) in k.iter().enumerate() {
            for s2 in 0..2 {
                v[2 * s2 + j] = kj[(s2, s)];
            }
        }
        cols[2 * s] = Some(v);
    }
    let mut basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
    let mut completion = Vec::new();
    for e in 0..4 {
        if completion.len() == 2 {
            break;
        }
        let mut v = vec![ZERO; 4];
        v[e] = C64::new(1.0, 0.0);
        for b in &basis {
            let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v.clone());
            completion.push(v);
        }
    }
    cols[1] = Some(completion[0].clone());
    cols[3] = Some(completion[1].clone());
    let mut matrix = ComplexMatrix::zeros(4);
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.as_ref().expect("filled").iter().enumerate() {
            matrix[(i, j)] = *x;
        }
    }
    Ok(DilationUnitary { matrix })
}

/// Evolves `state ⊗ |0…0⟩_E` with `V_i` acting on `(S_i, E_i)`. The output
/// register is `S₁…S_N E₁…E_N`.
pub fn evolve_joint(state: &PureState, per_qubit: &[KrausChannel]) -> Result<PureState> {
    let n = state.n_qubits();
    if per_qubit.len() != n {
        return Err(Error::WrongQubitCount {
            expected: n,
            found: per_qubit.len(),
        });
    }
    let dilations = per_qubit.iter().map(dilation).collect::<Result<Vec<_>>>()?;
    let mut joint = state.tensor(&PureState::basis(n, 0));
    for (i, v) in dilations.iter().enumerate() {
        joint.apply_pair(&v.matrix, i, n + i)?;
    }
    Ok(joint)
}

/// Wire form of a channel: `{"kind": "dephasing" | "amplitude_damping" |
/// "concat", "p": number | [numbers], "stages": [kinds]}`.
///
/// `stages` is required for `concat` and lists the stages in the order they
/// act; `p` then holds one strength per stage (or a single shared one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: ChannelSpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Strength>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<NoiseKind>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpecKind {
    Dephasing,
    AmplitudeDamping,
    Concat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Strength {
    One(f64),
    PerStage(Vec<f64>),
}

impl ChannelSpec {
    pub fn family(&self) -> Result<ChannelFamily> {
        Ok(match self.kind {
            ChannelSpecKind::Dephasing => ChannelFamily::Single(NoiseKind::Dephasing),
            ChannelSpecKind::AmplitudeDamping => ChannelFamily::Single(NoiseKind::AmplitudeDamping),
            ChannelSpecKind::Concat => match &self.stages {
                Some(s) if !s.is_empty() => ChannelFamily::Concat(s.clone()),
                _ => {
                    return Err(Error::InvalidInput(
                        "concat channel needs a nonempty `stages` list".into(),
                    ))
                }
            },
        })
    }

    /// Every strength in the configuration, for range validation.
    pub fn strengths(&self) -> Vec<f64> {
        match &self.p {
            None => vec![],
            Some(Strength::One(p)) => vec![*p],
            Some(Strength::PerStage(v)) => v.clone(),
        }
    }

    /// Checks the family and every listed `p`.
    pub fn validate(&self) -> Result<()> {
        let family = self.family()?;
        for p in self.strengths() {
            check_p(p)?;
        }
        if let (ChannelFamily::Concat(stages), Some(Strength::PerStage(ps))) = (&family, &self.p) {
            if stages.len() != ps.len() {
                return Err(Error::InvalidInput(format!(
                    "{} stages but {} strengths",
                    stages.len(),
                    ps.len()
                )));
            }
        }
        if matches!(family, ChannelFamily::Single(_))
            && matches!(self.p, Some(Strength::PerStage(_)))
        {
            return Err(Error::InvalidInput(
                "single-stage channel takes one p".into(),
            ));
        }
        Ok(())
    }

    /// Builds the channel at the listed strength(s).
    pub fn build(&self) -> Result<KrausChannel> {
        self.validate()?;
        let p = self
            .p
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("channel needs p".into()))?;
        match (self.family()?, p) {
            (ChannelFamily::Single(k), Strength::One(p)) => k.channel(*p),
            (fam @ ChannelFamily::Concat(_), Strength::One(p)) => fam.at(*p),
            (ChannelFamily::Concat(stages), Strength::PerStage(ps)) => {
                let mut chans = stages.iter().zip(ps).map(|(k, &p)| k.channel(p));
                let first = chans.next().expect("nonempty")?;
                chans.try_fold(first, |acc, c| Ok(concatenate(&acc, &c?)))
            }
            (ChannelFamily::Single(_), Strength::PerStage(_)) => unreachable!("validated"),
        }
    }
}
