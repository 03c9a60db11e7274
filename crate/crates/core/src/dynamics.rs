//! Sweeps over the noise strength, the correlation-flow ledger, ordering
//! checks across the maximally entangled family and crossing search.
//!
//! Every sweep encodes the initial state, dilates each qubit's channel onto
//! its own environment qubit and records quantities on the system register
//! `S`, the environment register `E` and the joint state. The joint register
//! is laid out `S₁…S_N E₁…E_N`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::channels::{apply_product_channel, evolve_joint, ChannelFamily, NoiseKind};
use crate::measures::{self, entropy, total_correlations};
use crate::states::{
    apply_encoding_pure, make_phi_gamma, DensityMatrix, EncodingUnitaries, PureState,
};
use crate::{Error, Exec, Result};

/// Quantities recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    /// Total correlations among the system qubits.
    #[serde(rename = "T_S")]
    TotalCorrelationsSystem,
    /// Total correlations among the environment qubits.
    #[serde(rename = "T_E")]
    TotalCorrelationsEnvironment,
    /// Mutual information between the system and environment registers.
    #[serde(rename = "I_SE")]
    MutualInformationSE,
    /// `Σᵢ I(S_i : E_i)`
    #[serde(rename = "I_local")]
    LocalMutualInformation,
    #[serde(rename = "concurrence")]
    Concurrence,
    #[serde(rename = "negativity")]
    Negativity,
    #[serde(rename = "doubled_negativity")]
    DoubledNegativity,
    /// `S(ρ_S)` of the pure joint state.
    #[serde(rename = "E_SE")]
    SystemEnvEntanglement,
    #[serde(rename = "singlet_fraction")]
    SingletFraction,
    #[serde(rename = "telep_fidelity")]
    TeleportationFidelity,
}

impl Measure {
    /// Column order of trajectory tables.
    pub const ALL: [Measure; 10] = [
        Measure::TotalCorrelationsSystem,
        Measure::TotalCorrelationsEnvironment,
        Measure::MutualInformationSE,
        Measure::LocalMutualInformation,
        Measure::Concurrence,
        Measure::Negativity,
        Measure::DoubledNegativity,
        Measure::SystemEnvEntanglement,
        Measure::SingletFraction,
        Measure::TeleportationFidelity,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Measure::TotalCorrelationsSystem => "T_S",
            Measure::TotalCorrelationsEnvironment => "T_E",
            Measure::MutualInformationSE => "I_SE",
            Measure::LocalMutualInformation => "I_local",
            Measure::Concurrence => "concurrence",
            Measure::Negativity => "negativity",
            Measure::DoubledNegativity => "doubled_negativity",
            Measure::SystemEnvEntanglement => "E_SE",
            Measure::SingletFraction => "singlet_fraction",
            Measure::TeleportationFidelity => "telep_fidelity",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.tag() == tag)
    }

    /// Defined for two-qubit systems only.
    pub fn two_qubit_only(self) -> bool {
        matches!(
            self,
            Measure::Concurrence
                | Measure::Negativity
                | Measure::DoubledNegativity
                | Measure::SingletFraction
                | Measure::TeleportationFidelity
        )
    }

    /// Needs the joint system–environment state rather than `ρ_S` alone.
    pub fn needs_environment(self) -> bool {
        matches!(
            self,
            Measure::TotalCorrelationsEnvironment
                | Measure::MutualInformationSE
                | Measure::LocalMutualInformation
        )
    }

    /// Largest value the quantity can take on an `n`-qubit system.
    pub fn upper_bound(self, n_qubits: usize) -> f64 {
        let n = n_qubits as f64;
        match self {
            Measure::TotalCorrelationsSystem | Measure::TotalCorrelationsEnvironment => {
                (n - 1.0).max(0.0) * 2.0
            }
            Measure::MutualInformationSE | Measure::LocalMutualInformation => 2.0 * n,
            Measure::SystemEnvEntanglement => n,
            Measure::Negativity => 0.5,
            Measure::Concurrence
            | Measure::DoubledNegativity
            | Measure::SingletFraction
            | Measure::TeleportationFidelity => 1.0,
        }
    }
}

/// Two-qubit entanglement quantities of the system state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitMeasures {
    pub concurrence: f64,
    pub negativity: f64,
    pub doubled_negativity: f64,
    pub singlet_fraction: f64,
    pub telep_fidelity: f64,
}

impl TwoQubitMeasures {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        let sf = measures::singlet_fraction(rho)?;
        let doubled = measures::doubled_negativity(rho, &[0])?;
        Ok(Self {
            concurrence: measures::concurrence(rho)?,
            negativity: 0.5 * doubled,
            doubled_negativity: doubled,
            singlet_fraction: sf.fraction,
            telep_fidelity: sf.fidelity,
        })
    }
}

/// All recorded quantities at one noise strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub p: f64,
    pub t_s: f64,
    pub t_e: f64,
    pub i_se: f64,
    pub i_local: f64,
    pub e_se: f64,
    /// Present when the system has exactly two qubits.
    pub two_qubit: Option<TwoQubitMeasures>,
}

impl TrajectoryPoint {
    pub fn get(&self, m: Measure) -> Option<f64> {
        let tq = self.two_qubit.as_ref();
        match m {
            Measure::TotalCorrelationsSystem => Some(self.t_s),
            Measure::TotalCorrelationsEnvironment => Some(self.t_e),
            Measure::MutualInformationSE => Some(self.i_se),
            Measure::LocalMutualInformation => Some(self.i_local),
            Measure::SystemEnvEntanglement => Some(self.e_se),
            Measure::Concurrence => tq.map(|t| t.concurrence),
            Measure::Negativity => tq.map(|t| t.negativity),
            Measure::DoubledNegativity => tq.map(|t| t.doubled_negativity),
            Measure::SingletFraction => tq.map(|t| t.singlet_fraction),
            Measure::TeleportationFidelity => tq.map(|t| t.telep_fidelity),
        }
    }

    pub fn as_map(&self) -> BTreeMap<Measure, f64> {
        Measure::ALL
            .into_iter()
            .filter_map(|m| self.get(m).map(|v| (m, v)))
            .collect()
    }
}

/// `n` evenly spaced points on `[0, 1]` including both ends.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

/// The 101-point grid used by default for sweeps and figures.
pub fn default_p_grid() -> Vec<f64> {
    uniform_grid(101)
}

/// Nonempty, nondecreasing, within `[0, 1]`.
pub fn validate_p_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty p grid".into()));
    }
    for &p in grid {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("p grid must be sorted".into()));
    }
    Ok(())
}

fn register(n: usize, offset: usize) -> Vec<usize> {
    (offset..offset + n).collect()
}

/// Joint state after encoding and dilated evolution at strength `p`.
pub fn joint_state(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
) -> Result<PureState> {
    let encoded = apply_encoding_pure(initial, enc)?;
    evolve_joint(&encoded, &family.product(p, initial.n_qubits())?)
}

/// System state after encoding and the product channel at strength `p`.
pub fn system_state(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
) -> Result<DensityMatrix> {
    let encoded = apply_encoding_pure(initial, enc)?.density_matrix();
    apply_product_channel(&encoded, &family.product(p, initial.n_qubits())?)
}

struct Correlations {
    t_s: f64,
    t_e: f64,
    i_se: f64,
    i_local: f64,
    e_se: f64,
}

fn correlations(joint: &PureState, n: usize) -> Result<(Correlations, DensityMatrix)> {
    let rho_s = joint.reduced(&register(n, 0))?;
    let rho_e = joint.reduced(&register(n, n))?;
    let s_s = entropy(&rho_s);
    let s_e = entropy(&rho_e);
    let mut i_local = 0.0;
    for i in 0..n {
        let pair = joint.reduced(&[i, n + i])?;
        i_local += measures::mutual_information(&pair, &[0])?;
    }
    let c = Correlations {
        t_s: total_correlations(&rho_s),
        t_e: total_correlations(&rho_e),
        // the joint state is pure
        i_se: (s_s + s_e).max(0.0),
        i_local,
        e_se: s_s,
    };
    Ok((c, rho_s))
}

/// Evaluates every quantity at one strength.
pub fn point(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
) -> Result<TrajectoryPoint> {
    let n = initial.n_qubits();
    let joint = joint_state(initial, enc, family, p)?;
    let (c, rho_s) = correlations(&joint, n)?;
    let two_qubit = if n == 2 {
        Some(TwoQubitMeasures::of(&rho_s)?)
    } else {
        None
    };
    Ok(TrajectoryPoint {
        p,
        t_s: c.t_s,
        t_e: c.t_e,
        i_se: c.i_se,
        i_local: c.i_local,
        e_se: c.e_se,
        two_qubit,
    })
}

/// Evaluates one quantity, skipping the joint evolution when `ρ_S` suffices.
pub fn measure_at(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
    m: Measure,
) -> Result<f64> {
    let n = initial.n_qubits();
    if m.two_qubit_only() && n != 2 {
        return Err(Error::WrongQubitCount {
            expected: 2,
            found: n,
        });
    }
    if m.needs_environment() {
        let joint = joint_state(initial, enc, family, p)?;
        let (c, _) = correlations(&joint, n)?;
        return Ok(match m {
            Measure::TotalCorrelationsEnvironment => c.t_e,
            Measure::MutualInformationSE => c.i_se,
            _ => c.i_local,
        });
    }
    let rho = system_state(initial, enc, family, p)?;
    Ok(match m {
        Measure::TotalCorrelationsSystem => total_correlations(&rho),
        Measure::SystemEnvEntanglement => entropy(&rho),
        Measure::Concurrence => measures::concurrence(&rho)?,
        Measure::Negativity => measures::negativity(&rho, &[0])?,
        Measure::DoubledNegativity => measures::doubled_negativity(&rho, &[0])?,
        Measure::SingletFraction => measures::singlet_fraction(&rho)?.fraction,
        Measure::TeleportationFidelity => measures::singlet_fraction(&rho)?.fidelity,
        _ => unreachable!("environment quantities handled above"),
    })
}

/// Trajectory over `p_grid` with the default execution strategy.
pub fn sweep(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p_grid: &[f64],
) -> Result<Vec<TrajectoryPoint>> {
    sweep_with(initial, enc, family, p_grid, Exec::default())
}

pub fn sweep_with(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p_grid: &[f64],
    exec: Exec,
) -> Result<Vec<TrajectoryPoint>> {
    validate_p_grid(p_grid)?;
    enc_matches(initial, enc)?;
    family.at(0.0)?;
    exec.try_map(p_grid, |&p| point(initial, enc, family, p))
}

fn enc_matches(initial: &PureState, enc: &EncodingUnitaries) -> Result<()> {
    if enc.n_qubits() != initial.n_qubits() {
        return Err(Error::WrongQubitCount {
            expected: initial.n_qubits(),
            found: enc.n_qubits(),
        });
    }
    Ok(())
}

/// One row of the correlation-flow ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub p: f64,
    pub delta_t_s: f64,
    pub delta_t_e: f64,
    pub i_se: f64,
    pub i_local: f64,
    /// `ΔT_S + I_SE − I_local + ΔT_E`; zero up to rounding.
    pub residual: f64,
}

impl LedgerEntry {
    /// `ΔT_S + I_SE + ΔT_E`
    pub fn flow(&self) -> f64 {
        self.delta_t_s + self.i_se + self.delta_t_e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLedger {
    pub entries: Vec<LedgerEntry>,
}

impl CorrelationLedger {
    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.residual.abs())
            .fold(0.0, f64::max)
    }
}

/// Ledger residual contract.
pub const LEDGER_TOL: f64 = 1e-9;

fn ledger_entry(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
    t_s0: f64,
) -> Result<LedgerEntry> {
    let joint = joint_state(initial, enc, family, p)?;
    let (c, _) = correlations(&joint, initial.n_qubits())?;
    let delta_t_s = c.t_s - t_s0;
    // the environment starts in a product pure state
    let delta_t_e = c.t_e;
    Ok(LedgerEntry {
        p,
        delta_t_s,
        delta_t_e,
        i_se: c.i_se,
        i_local: c.i_local,
        residual: delta_t_s + c.i_se - c.i_local + delta_t_e,
    })
}

pub fn ledger(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p_grid: &[f64],
) -> Result<CorrelationLedger> {
    ledger_with(initial, enc, family, p_grid, Exec::default())
}

pub fn ledger_with(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    p_grid: &[f64],
    exec: Exec,
) -> Result<CorrelationLedger> {
    validate_p_grid(p_grid)?;
    enc_matches(initial, enc)?;
    let t_s0 = total_correlations(&apply_encoding_pure(initial, enc)?.density_matrix());
    let entries = exec.try_map(p_grid, |&p| ledger_entry(initial, enc, family, p, t_s0))?;
    Ok(CorrelationLedger { entries })
}

/// Marginal tolerance for the conservation check.
pub const MARGINAL_TOL: f64 = 1e-10;

/// `|flow_a − flow_b|` where `flow = ΔT_S + I_SE + ΔT_E` under encodings `a`
/// and `b`. Requires every single-qubit marginal of `initial` to be `I/2`.
pub fn conservation_check(
    initial: &PureState,
    enc_a: &EncodingUnitaries,
    enc_b: &EncodingUnitaries,
    family: &ChannelFamily,
    p: f64,
) -> Result<f64> {
    let n = initial.n_qubits();
    let half = DensityMatrix::maximally_mixed(1);
    for q in 0..n {
        let deviation = initial.reduced(&[q])?.matrix().max_abs_diff(half.matrix());
        if deviation > MARGINAL_TOL {
            return Err(Error::MarginalNotMaximallyMixed {
                qubit: q,
                deviation,
            });
        }
    }
    let flow = |enc: &EncodingUnitaries| -> Result<f64> {
        Ok(ledger(initial, enc, family, &[p])?.entries[0].flow())
    };
    Ok((flow(enc_a)? - flow(enc_b)?).abs())
}

/// One family-level claim checked on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub claim: String,
    /// Strengths at which the claim fails.
    pub violations: Vec<f64>,
}

impl OrderingCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub channel: NoiseKind,
    pub checks: Vec<OrderingCheck>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(OrderingCheck::passed)
    }

    pub fn failures(&self) -> Vec<&OrderingCheck> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

/// Slack allowed when comparing family members.
pub const ORDERING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct FamilyValues {
    concurrence: f64,
    doubled_negativity: f64,
    e_se: f64,
}

/// `γ` grid of `n` points on `[0, π/2]`.
pub fn gamma_grid(n: usize) -> Vec<f64> {
    uniform_grid(n).into_iter().map(|x| x * FRAC_PI_2).collect()
}

/// Checks the robustness orderings of the maximally entangled family
/// `Φ_γ` under symmetric noise. `gammas` must contain `0`, `π/4` and `π/2`.
///
/// Amplitude damping: concurrence largest at `γ = π/2` and smallest at
/// `γ = 0`, negativity the other way round, and `E_SE(Φ_0) ≥ E_SE(Φ_{π/2})`.
/// Dephasing: both measures largest at `γ ∈ {0, π/2}` and smallest at
/// `γ = π/4`.
pub fn verify_orderings(kind: NoiseKind, gammas: &[f64], p_grid: &[f64]) -> Result<OrderingReport> {
    verify_orderings_with(kind, gammas, p_grid, Exec::default())
}

pub fn verify_orderings_with(
    kind: NoiseKind,
    gammas: &[f64],
    p_grid: &[f64],
    exec: Exec,
) -> Result<OrderingReport> {
    validate_p_grid(p_grid)?;
    let locate = |target: f64| {
        gammas
            .iter()
            .position(|&g| (g - target).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidInput(format!("γ grid lacks {target}")))
    };
    let (g0, g4, g2) = (locate(0.0)?, locate(FRAC_PI_2 / 2.0)?, locate(FRAC_PI_2)?);
    let family = ChannelFamily::Single(kind);
    let pairs: Vec<(f64, f64)> = p_grid
        .iter()
        .flat_map(|&p| gammas.iter().map(move |&g| (p, g)))
        .collect();
    let values = exec.try_map(&pairs, |&(p, g)| -> Result<FamilyValues> {
        let rho =
            apply_product_channel(&make_phi_gamma(g).density_matrix(), &family.product(p, 2)?)?;
        Ok(FamilyValues {
            concurrence: measures::concurrence(&rho)?,
            doubled_negativity: measures::doubled_negativity(&rho, &[0])?,
            e_se: entropy(&rho),
        })
    })?;

    let mut checks: Vec<OrderingCheck> = Vec::new();
    let mut add = |claim: &str, fails: &dyn Fn(&[FamilyValues]) -> bool, interior_only: bool| {
        let violations = p_grid
            .iter()
            .enumerate()
            .filter(|&(_, &p)| !interior_only || (p > 0.0 && p < 1.0))
            .filter(|&(i, _)| fails(&values[i * gammas.len()..(i + 1) * gammas.len()]))
            .map(|(_, &p)| p)
            .collect();
        checks.push(OrderingCheck {
            claim: claim.to_string(),
            violations,
        });
    };
    let c = |v: &FamilyValues| v.concurrence;
    let n = |v: &FamilyValues| v.doubled_negativity;
    let is_max = move |row: &[FamilyValues], k: usize, f: fn(&FamilyValues) -> f64| {
        row.iter().all(|v| f(v) <= f(&row[k]) + ORDERING_TOL)
    };
    let is_min = move |row: &[FamilyValues], k: usize, f: fn(&FamilyValues) -> f64| {
        row.iter().all(|v| f(v) >= f(&row[k]) - ORDERING_TOL)
    };
    match kind {
        NoiseKind::AmplitudeDamping => {
            add(
                "concurrence is largest at γ=π/2",
                &|r| !is_max(r, g2, c),
                false,
            );
            add(
                "concurrence is smallest at γ=0",
                &|r| !is_min(r, g0, c),
                false,
            );
            add(
                "negativity is largest at γ=0",
                &|r| !is_max(r, g0, n),
                false,
            );
            add(
                "negativity is smallest at γ=π/2",
                &|r| !is_min(r, g2, n),
                false,
            );
            add(
                "E_SE(γ=0) ≥ E_SE(γ=π/2)",
                &|r| r[g0].e_se < r[g2].e_se - ORDERING_TOL,
                true,
            );
        }
        NoiseKind::Dephasing => {
            add(
                "concurrence is largest at γ=0",
                &|r| !is_max(r, g0, c),
                false,
            );
            add(
                "concurrence is largest at γ=π/2",
                &|r| !is_max(r, g2, c),
                false,
            );
            add(
                "concurrence is smallest at γ=π/4",
                &|r| !is_min(r, g4, c),
                false,
            );
            add(
                "negativity is largest at γ=0",
                &|r| !is_max(r, g0, n),
                false,
            );
            add(
                "negativity is largest at γ=π/2",
                &|r| !is_max(r, g2, n),
                false,
            );
            add(
                "negativity is smallest at γ=π/4",
                &|r| !is_min(r, g4, n),
                false,
            );
        }
    }
    Ok(OrderingReport {
        channel: kind,
        checks,
    })
}

/// Differences smaller than this count as ties in the crossing scan.
pub const CROSSING_NOISE_FLOOR: f64 = 1e-12;
/// Width of the final bisection bracket.
pub const CROSSING_TOL: f64 = 1e-8;

/// Sign changes of `measure(a, p) − measure(b, p)` on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Smallest crossing.
    pub p_star: f64,
    /// Every crossing found, ascending; the first is `p_star`.
    pub all: Vec<f64>,
}

/// Locates sign changes of `measure(a) − measure(b)` under the symmetric
/// channel: a scan over `p_grid` (interior points only, ties within
/// [`CROSSING_NOISE_FLOOR`] skipped) followed by bisection of each bracket to
/// [`CROSSING_TOL`]. `None` when the scan sees no sign change.
pub fn find_crossing(
    a: &PureState,
    b: &PureState,
    family: &ChannelFamily,
    m: Measure,
    p_grid: &[f64],
) -> Result<Option<Crossing>> {
    find_crossing_with(a, b, family, m, p_grid, Exec::default())
}

pub fn find_crossing_with(
    a: &PureState,
    b: &PureState,
    family: &ChannelFamily,
    m: Measure,
    p_grid: &[f64],
    exec: Exec,
) -> Result<Option<Crossing>> {
    validate_p_grid(p_grid)?;
    let enc_a = EncodingUnitaries::identity(a.n_qubits());
    let enc_b = EncodingUnitaries::identity(b.n_qubits());
    let diff = |p: f64| -> Result<f64> {
        Ok(measure_at(a, &enc_a, family, p, m)? - measure_at(b, &enc_b, family, p, m)?)
    };
    let interior: Vec<f64> = p_grid
        .iter()
        .copied()
        .filter(|&p| p > 0.0 && p < 1.0)
        .collect();
    let diffs = exec.try_map(&interior, |&p| diff(p))?;
    let signed: Vec<(f64, f64)> = interior
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| d.abs() > CROSSING_NOISE_FLOOR)
        .map(|(&p, &d)| (p, d))
        .collect();
    let brackets: Vec<((f64, f64), (f64, f64))> = signed
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0], w[1]))
        .collect();
    let all = exec.try_map(&brackets, |&((mut lo, d_lo), (mut hi, _))| -> Result<f64> {
        let s_lo = d_lo.signum();
        while hi - lo >= CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if diff(mid)?.signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    })?;
    Ok(all.first().map(|&p_star| Crossing {
        p_star,
        all: all.clone(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::testutil::rng;
    use crate::states::{ghz, graph_state, make_psi_theta, phi_plus, psi_plus, random_pure};

    fn ad() -> ChannelFamily {
        NoiseKind::AmplitudeDamping.into()
    }

    fn dep() -> ChannelFamily {
        NoiseKind::Dephasing.into()
    }

    #[test]
    fn grid_helpers() {
        let g = default_p_grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((g[37] - 0.37).abs() < 1e-15);
        assert!(validate_p_grid(&[0.0, 1.5]).is_err());
        assert!(validate_p_grid(&[0.5, 0.2]).is_err());
        assert!(validate_p_grid(&[]).is_err());
    }

    #[test]
    fn measure_tags_round_trip() {
        for m in Measure::ALL {
            assert_eq!(Measure::from_tag(m.tag()), Some(m));
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.tag()));
        }
    }

    #[test]
    fn initial_point_of_bell_state() {
        let pt = point(&phi_plus(), &EncodingUnitaries::identity(2), &ad(), 0.0).unwrap();
        assert!((pt.t_s - 2.0).abs() < 1e-12);
        assert!(pt.i_se.abs() < 1e-12 && pt.t_e.abs() < 1e-12 && pt.i_local.abs() < 1e-12);
        let tq = pt.two_qubit.unwrap();
        assert!((tq.concurrence - 1.0).abs() < 1e-12);
        assert!((tq.telep_fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_damping_kills_system_correlations() {
        let pt = point(&phi_plus(), &EncodingUnitaries::identity(2), &ad(), 1.0).unwrap();
        assert!(pt.t_s.abs() < 1e-12);
        // the initial correlations have moved entirely into the environment
        assert!((pt.t_e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn graph_state_dephasing_leaves_environment_uncorrelated() {
        let traj = sweep(
            &graph_state(),
            &EncodingUnitaries::identity(2),
            &dep(),
            &uniform_grid(11),
        )
        .unwrap();
        for pt in traj {
            assert!(pt.t_e.abs() < 1e-10, "p={} T_E={}", pt.p, pt.t_e);
        }
    }

    #[test]
    fn measure_at_agrees_with_point() {
        let enc = EncodingUnitaries::new(vec![[0.3, 1.1, 2.0], [4.0, 0.2, 0.9]]).unwrap();
        let pt = point(&psi_plus(), &enc, &ad(), 0.37).unwrap();
        for m in Measure::ALL {
            let v = measure_at(&psi_plus(), &enc, &ad(), 0.37, m).unwrap();
            assert!((v - pt.get(m).unwrap()).abs() < 1e-12, "{m:?}");
        }
        assert!(measure_at(
            &ghz(3),
            &EncodingUnitaries::identity(3),
            &ad(),
            0.2,
            Measure::Concurrence
        )
        .is_err());
    }

    #[test]
    fn sequential_and_parallel_sweeps_match() {
        let grid = uniform_grid(9);
        let enc = EncodingUnitaries::identity(2);
        let a = sweep_with(&psi_plus(), &enc, &ad(), &grid, Exec::Sequential).unwrap();
        let b = sweep_with(&psi_plus(), &enc, &ad(), &grid, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ledger_residual_vanishes() {
        let mut g = rng(5);
        for n in [2, 3] {
            for fam in [ad(), dep()] {
                let s = random_pure(&mut g, n);
                let l =
                    ledger(&s, &EncodingUnitaries::identity(n), &fam, &uniform_grid(6)).unwrap();
                assert!(l.max_residual() < LEDGER_TOL);
                assert!(l.entries[0].delta_t_s.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conservation_holds_for_bell_states() {
        let x_first =
            EncodingUnitaries::new(vec![[0.0, std::f64::consts::PI, 0.0], [0.0; 3]]).unwrap();
        let d = conservation_check(
            &phi_plus(),
            &EncodingUnitaries::identity(2),
            &x_first,
            &ad(),
            0.5,
        )
        .unwrap();
        assert!(d < 1e-9);
        let same = conservation_check(&phi_plus(), &x_first, &x_first, &ad(), 0.5).unwrap();
        assert_eq!(same, 0.0);
        assert!(matches!(
            conservation_check(&make_psi_theta(0.3), &x_first, &x_first, &ad(), 0.5),
            Err(Error::MarginalNotMaximallyMixed { .. })
        ));
    }

    #[test]
    fn orderings_on_a_small_grid() {
        for kind in [NoiseKind::AmplitudeDamping, NoiseKind::Dephasing] {
            let r = verify_orderings(kind, &gamma_grid(9), &uniform_grid(6)).unwrap();
            assert!(r.passed(), "{:?}", r.failures());
        }
        assert!(verify_orderings(NoiseKind::Dephasing, &[0.0, 1.0], &[0.5]).is_err());
    }

    #[test]
    fn crossing_of_identical_states_is_none() {
        let c = find_crossing(
            &phi_plus(),
            &phi_plus(),
            &ad(),
            Measure::Negativity,
            &uniform_grid(21),
        )
        .unwrap();
        assert!(c.is_none());
    }

    #[test]
    fn crossing_is_bracketed_to_tolerance() {
        // concurrence (1−p) sin 2θ for Ψ_θ against (1−p)² for Φ⁺
        let a = make_psi_theta(0.6);
        let b = phi_plus();
        let c = find_crossing(&a, &b, &ad(), Measure::Concurrence, &uniform_grid(101))
            .unwrap()
            .expect("crossing");
        let enc = EncodingUnitaries::identity(2);
        let lo = measure_at(&a, &enc, &ad(), c.p_star - 1e-7, Measure::Concurrence).unwrap()
            - measure_at(&b, &enc, &ad(), c.p_star - 1e-7, Measure::Concurrence).unwrap();
        let hi = measure_at(&a, &enc, &ad(), c.p_star + 1e-7, Measure::Concurrence).unwrap()
            - measure_at(&b, &enc, &ad(), c.p_star + 1e-7, Measure::Concurrence).unwrap();
        assert!(lo.signum() != hi.signum());
        // (1−p) sin 1.2 = (1−p)² gives p* = 1 − sin 1.2
        assert!((c.p_star - (1.0 - 1.2f64.sin())).abs() < 1e-8);
    }
}
