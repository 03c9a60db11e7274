//! JSON experiment configurations. Every struct rejects unknown fields.

use std::path::PathBuf;

use entflow::channels::{ChannelFamily, ChannelSpec};
use entflow::circuits::BellInput;
use entflow::dynamics::{uniform_grid, validate_p_grid, Measure};
use entflow::encoder::Objective;
use entflow::qmath::C64;
use entflow::states::{self, EncodingUnitaries, PureState};
use serde::{Deserialize, Serialize};

/// Named state family or raw amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `(|0⟩|ψ₀⟩ + |1⟩|ψ₁⟩)/√2`
    PhiGamma {
        gamma: f64,
    },
    /// `cos θ|01⟩ + sin θ|10⟩`
    PsiTheta {
        theta: f64,
    },
    /// `cos θ|00⟩ + sin θ|11⟩`
    PhiTheta {
        theta: f64,
    },
    PhiPlus {},
    PsiPlus {},
    /// `(|0+⟩ + |1−⟩)/√2`
    Graph {},
    Ghz {
        n_qubits: usize,
    },
    Amplitudes {
        n_qubits: usize,
        amplitudes: Vec<[f64; 2]>,
    },
}

impl StateSpec {
    pub fn build(&self) -> Result<PureState, String> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite"))
            }
        };
        Ok(match self {
            StateSpec::PhiGamma { gamma } => {
                finite(*gamma, "gamma")?;
                states::make_phi_gamma(*gamma)
            }
            StateSpec::PsiTheta { theta } => {
                finite(*theta, "theta")?;
                states::make_psi_theta(*theta)
            }
            StateSpec::PhiTheta { theta } => {
                finite(*theta, "theta")?;
                states::make_phi_theta(*theta)
            }
            StateSpec::PhiPlus {} => states::phi_plus(),
            StateSpec::PsiPlus {} => states::psi_plus(),
            StateSpec::Graph {} => states::graph_state(),
            StateSpec::Ghz { n_qubits } => {
                if !(2..=6).contains(n_qubits) {
                    return Err(format!("ghz needs 2..=6 qubits, got {n_qubits}"));
                }
                states::ghz(*n_qubits)
            }
            StateSpec::Amplitudes {
                n_qubits,
                amplitudes,
            } => {
                if amplitudes.len() != 1 << n_qubits {
                    return Err(format!(
                        "{} amplitudes for {n_qubits} qubits",
                        amplitudes.len()
                    ));
                }
                PureState::new(
                    amplitudes
                        .iter()
                        .map(|&[re, im]| C64::new(re, im))
                        .collect(),
                )
                .map_err(|e| e.to_string())?
            }
        })
    }
}

fn family_of(channel: &ChannelSpec) -> Result<ChannelFamily, String> {
    if channel.p.is_some() {
        return Err("channel.p is set by the p grid here; leave it out".into());
    }
    channel.validate().map_err(|e| e.to_string())?;
    channel.family().map_err(|e| e.to_string())
}

fn grid_of(p_grid: &Option<Vec<f64>>, p_points: Option<usize>) -> Result<Vec<f64>, String> {
    let grid = match (p_grid, p_points) {
        (Some(_), Some(_)) => return Err("give either p_grid or p_points".into()),
        (Some(g), None) => g.clone(),
        (None, Some(n)) if n < 2 => return Err("p_points must be at least 2".into()),
        (None, Some(n)) => uniform_grid(n),
        (None, None) => uniform_grid(101),
    };
    validate_p_grid(&grid).map_err(|e| e.to_string())?;
    Ok(grid)
}

fn encoding_of(enc: &Option<Vec<[f64; 3]>>, n: usize) -> Result<EncodingUnitaries, String> {
    match enc {
        None => Ok(EncodingUnitaries::identity(n)),
        Some(a) => {
            if a.len() != n {
                return Err(format!("encoding has {} triples for {n} qubits", a.len()));
            }
            EncodingUnitaries::new(a.clone()).map_err(|e| e.to_string())
        }
    }
}

/// Sweep and ledger runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub state: StateSpec,
    #[serde(default)]
    pub encoding: Option<Vec<[f64; 3]>>,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub p_points: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub struct SweepJob {
    pub state: PureState,
    pub encoding: EncodingUnitaries,
    pub family: ChannelFamily,
    pub grid: Vec<f64>,
}

impl SweepConfig {
    pub fn prepare(&self) -> Result<SweepJob, String> {
        let state = self.state.build()?;
        if state.n_qubits() > 3 {
            return Err("sweeps support at most 3 system qubits".into());
        }
        Ok(SweepJob {
            encoding: encoding_of(&self.encoding, state.n_qubits())?,
            family: family_of(&self.channel)?,
            grid: grid_of(&self.p_grid, self.p_points)?,
            state,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub state: StateSpec,
    pub channel: ChannelSpec,
    pub objective: Objective,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub starts: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub struct OptimizeJob {
    pub state: PureState,
    pub family: ChannelFamily,
    pub objective: Objective,
    pub config: entflow::encoder::OptimizerConfig,
}

impl OptimizeConfig {
    pub fn prepare(&self) -> Result<OptimizeJob, String> {
        let state = self.state.build()?;
        if state.n_qubits() != 2 {
            return Err("optimize needs a two-qubit state".into());
        }
        self.objective.validate(2).map_err(|e| e.to_string())?;
        let mut config = entflow::encoder::OptimizerConfig::default();
        if let Some(g) = self.grid_points {
            if g == 0 {
                return Err("grid_points must be positive".into());
            }
            config.grid_points = g;
        }
        if let Some(s) = self.starts {
            if s == 0 {
                return Err("starts must be positive".into());
            }
            config.starts = s;
        }
        Ok(OptimizeJob {
            state,
            family: family_of(&self.channel)?,
            objective: self.objective.clone(),
            config,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingConfig {
    pub state_a: StateSpec,
    pub state_b: StateSpec,
    pub channel: ChannelSpec,
    pub measure: Measure,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub p_points: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

pub struct CrossingJob {
    pub a: PureState,
    pub b: PureState,
    pub family: ChannelFamily,
    pub measure: Measure,
    pub grid: Vec<f64>,
}

impl CrossingConfig {
    pub fn prepare(&self) -> Result<CrossingJob, String> {
        let a = self.state_a.build()?;
        let b = self.state_b.build()?;
        if a.n_qubits() != b.n_qubits() {
            return Err("states must have the same qubit count".into());
        }
        if self.measure.two_qubit_only() && a.n_qubits() != 2 {
            return Err(format!("{} needs two-qubit states", self.measure.tag()));
        }
        Ok(CrossingJob {
            family: family_of(&self.channel)?,
            measure: self.measure,
            grid: grid_of(&self.p_grid, self.p_points)?,
            a,
            b,
        })
    }
}

/// Simulated tomography of the damping circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoConfig {
    pub input: BellInput,
    /// Rotation angle; give this or `p`.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Per-bit readout flip probability.
    #[serde(default)]
    pub readout_flip: f64,
    /// Calibrate the readout and mitigate the counts.
    #[serde(default)]
    pub mitigate: bool,
    #[serde(default)]
    pub calibration_shots: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

pub struct TomoJob {
    pub input: BellInput,
    pub theta: f64,
    pub repetitions: usize,
    pub readout_flip: f64,
    pub mitigate: bool,
    pub calibration_shots: Option<u64>,
}

impl TomoConfig {
    pub fn prepare(&self) -> Result<TomoJob, String> {
        let theta = match (self.theta, self.p) {
            (Some(_), Some(_)) => return Err("give either theta or p".into()),
            (None, None) => return Err("tomo needs theta or p".into()),
            (Some(t), None) if !t.is_finite() => return Err("theta must be finite".into()),
            (Some(t), None) => t,
            (None, Some(p)) if !(0.0..=1.0).contains(&p) => {
                return Err(format!("p = {p} outside [0, 1]"))
            }
            (None, Some(p)) => entflow::circuits::theta_for_p(p),
        };
        if self.repetitions == 0 {
            return Err("repetitions must be positive".into());
        }
        if !(0.0..0.5).contains(&self.readout_flip) {
            return Err("readout_flip must lie in [0, 0.5)".into());
        }
        if self.shots == Some(0) || self.calibration_shots == Some(0) {
            return Err("shot counts must be positive".into());
        }
        Ok(TomoJob {
            input: self.input,
            theta,
            repetitions: self.repetitions,
            readout_flip: self.readout_flip,
            mitigate: self.mitigate,
            calibration_shots: self.calibration_shots,
        })
    }
}

/// Config for `run`, dispatched on `command`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Sweep(SweepConfig),
    Ledger(SweepConfig),
    Optimize(OptimizeConfig),
    Crossing(CrossingConfig),
    Tomo(TomoConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Ledger(_) => "ledger",
            RunConfig::Optimize(_) => "optimize",
            RunConfig::Crossing(_) => "crossing",
            RunConfig::Tomo(_) => "tomo",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Sweep(c) | RunConfig::Ledger(c) => c.seed,
            RunConfig::Optimize(c) => c.seed,
            RunConfig::Crossing(c) => c.seed,
            RunConfig::Tomo(c) => c.seed,
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            RunConfig::Sweep(c) | RunConfig::Ledger(c) => c.out.as_ref(),
            RunConfig::Optimize(c) => c.out.as_ref(),
            RunConfig::Crossing(c) => c.out.as_ref(),
            RunConfig::Tomo(c) => c.out.as_ref(),
        }
    }
}

/// Parses a config for `command`. A `command` field, if present, must match.
pub fn parse_for(command: &str, text: &str) -> Result<RunConfig, String> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| "config must be a JSON object".to_string())?;
    match obj.get("command") {
        None => {
            obj.insert("command".into(), serde_json::Value::String(command.into()));
        }
        Some(serde_json::Value::String(c)) if c == command => {}
        Some(other) => return Err(format!("config is for {other}, not {command}")),
    }
    parse_run(&value.to_string())
}

pub fn parse_run(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
}
