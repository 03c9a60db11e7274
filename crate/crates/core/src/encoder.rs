//! Search for the local-unitary encoding that makes a two-qubit state most
//! robust under a noise family.
//!
//! A coarse grid over all six Euler angles seeds simplex refinements of the
//! best grid points. The search is deterministic: candidates are reduced in
//! start order, and among encodings within [`TIE_TOL`] of the best value the
//! lexicographically smallest angle tuple wins.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::channels::ChannelFamily;
use crate::dynamics::{measure_at, validate_p_grid, Measure};
use crate::optim::{nelder_mead, NelderMeadConfig};
use crate::states::{EncodingUnitaries, PureState};
use crate::{Error, Exec, Result};

/// Encodings whose values differ by less than this are ties.
pub const TIE_TOL: f64 = 1e-9;
/// Bisection width for [`Objective::ThresholdP`].
pub const THRESHOLD_TOL: f64 = 1e-10;
/// Scan grid seeding the threshold bisection.
pub const THRESHOLD_SCAN: usize = 101;

/// Scalar robustness score; larger is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Objective {
    /// The measure at a single strength.
    MeasureAtP { measure: Measure, p: f64 },
    /// Trapezoidal integral of the measure over `p_grid`.
    AreaUnderCurve { measure: Measure, p_grid: Vec<f64> },
    /// First strength at which the measure drops to `level` or below; `1`
    /// when it never does.
    ThresholdP { measure: Measure, level: f64 },
}

impl Objective {
    pub fn measure(&self) -> Measure {
        match self {
            Objective::MeasureAtP { measure, .. }
            | Objective::AreaUnderCurve { measure, .. }
            | Objective::ThresholdP { measure, .. } => *measure,
        }
    }

    /// The single strength of a pointwise objective.
    pub fn p(&self) -> Option<f64> {
        match self {
            Objective::MeasureAtP { p, .. } => Some(*p),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Objective::MeasureAtP { .. } => "measure_at_p",
            Objective::AreaUnderCurve { .. } => "area_under_curve",
            Objective::ThresholdP { .. } => "threshold_p",
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            Objective::MeasureAtP { p, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidProbability(*p));
                }
            }
            Objective::AreaUnderCurve { p_grid, .. } => {
                validate_p_grid(p_grid)?;
                if p_grid.len() < 2 {
                    return Err(Error::InvalidInput(
                        "area needs at least two grid points".into(),
                    ));
                }
            }
            Objective::ThresholdP { measure, level } => {
                let max = measure.upper_bound(n_qubits);
                if !(*level > 0.0 && *level <= max) {
                    return Err(Error::InvalidInput(format!(
                        "threshold level {level} outside (0, {max}]"
                    )));
                }
            }
        }
        if self.measure().two_qubit_only() && n_qubits != 2 {
            return Err(Error::WrongQubitCount {
                expected: 2,
                found: n_qubits,
            });
        }
        Ok(())
    }
}

/// Objective value of `initial` under encoding `enc`.
pub fn evaluate(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    obj: &Objective,
) -> Result<f64> {
    obj.validate(initial.n_qubits())?;
    evaluate_unchecked(initial, enc, family, obj)
}

fn evaluate_unchecked(
    initial: &PureState,
    enc: &EncodingUnitaries,
    family: &ChannelFamily,
    obj: &Objective,
) -> Result<f64> {
    let m = obj.measure();
    let at = |p: f64| measure_at(initial, enc, family, p, m);
    match obj {
        Objective::MeasureAtP { p, .. } => at(*p),
        Objective::AreaUnderCurve { p_grid, .. } => {
            let values = p_grid.iter().map(|&p| at(p)).collect::<Result<Vec<_>>>()?;
            Ok(p_grid
                .windows(2)
                .zip(values.windows(2))
                .map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] + v[1]))
                .sum())
        }
        Objective::ThresholdP { level, .. } => {
            let mut prev = 0.0;
            for k in 0..THRESHOLD_SCAN {
                let p = k as f64 / (THRESHOLD_SCAN - 1) as f64;
                if at(p)? <= *level {
                    if k == 0 {
                        return Ok(0.0);
                    }
                    let (mut lo, mut hi) = (prev, p);
                    while hi - lo > THRESHOLD_TOL {
                        let mid = 0.5 * (lo + hi);
                        if at(mid)? <= *level {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    return Ok(hi);
                }
                prev = p;
            }
            Ok(1.0)
        }
    }
}

/// Search settings. Defaults: 8 grid points per angle, 8 refined starts and
/// the standard simplex coefficients with a 200-iteration budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub grid_points: usize,
    pub starts: usize,
    pub simplex: NelderMeadConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: 8,
            starts: 8,
            simplex: NelderMeadConfig {
                initial_step: TAU / 16.0,
                ..NelderMeadConfig::default()
            },
        }
    }
}

/// Best encoding found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub encoding: EncodingUnitaries,
    pub value: f64,
    /// Grid points evaluated.
    pub grid_evaluations: usize,
    pub config: OptimizerConfig,
}

/// Wire form of an optimisation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub angles: Vec<[f64; 3]>,
    pub objective: Objective,
    pub value: f64,
    pub channel: String,
    pub p: Option<f64>,
    pub simplex: NelderMeadConfig,
}

impl OptimizationReport {
    pub fn new(opt: &Optimum, obj: &Objective, family: &ChannelFamily) -> Self {
        Self {
            angles: opt.encoding.angles().to_vec(),
            objective: obj.clone(),
            value: opt.value,
            channel: family.label(),
            p: obj.p(),
            simplex: opt.config.simplex,
        }
    }
}

fn angles_of(x: &[f64]) -> Vec<[f64; 3]> {
    x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

pub fn optimize(initial: &PureState, family: &ChannelFamily, obj: &Objective) -> Result<Optimum> {
    optimize_with(
        initial,
        family,
        obj,
        &OptimizerConfig::default(),
        Exec::default(),
    )
}

pub fn optimize_with(
    initial: &PureState,
    family: &ChannelFamily,
    obj: &Objective,
    cfg: &OptimizerConfig,
    exec: Exec,
) -> Result<Optimum> {
    let n = initial.n_qubits();
    if n != 2 {
        return Err(Error::WrongQubitCount {
            expected: 2,
            found: n,
        });
    }
    obj.validate(n)?;
    family.at(0.0)?;
    if cfg.grid_points == 0 || cfg.starts == 0 {
        return Err(Error::InvalidInput(
            "grid and start counts must be positive".into(),
        ));
    }
    let dims = 3 * n;
    let g = cfg.grid_points;
    let total = g.pow(dims as u32);
    let step = TAU / g as f64;
    let grid_point = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; dims];
        for slot in x.iter_mut().rev() {
            *slot = (idx % g) as f64 * step;
            idx /= g;
        }
        x
    };
    let score = |x: &[f64]| -> Result<f64> {
        let enc = EncodingUnitaries::new(angles_of(x))?;
        evaluate_unchecked(initial, &enc, family, obj)
    };

    let values = exec.map_range(total, |i| score(&grid_point(i)));
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..total).collect();
    // stable: equal values stay in grid order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let starts: Vec<usize> = order.into_iter().take(cfg.starts).collect();

    let refined = exec.map(&starts, |&i| {
        let m = nelder_mead(
            |x| score(x).map(|v| -v).unwrap_or(f64::NAN),
            &grid_point(i),
            &cfg.simplex,
        );
        (m.x, -m.value)
    });

    let mut candidates: Vec<(Vec<[f64; 3]>, f64)> = Vec::new();
    for &i in &starts {
        candidates.push((angles_of(&grid_point(i)), values[i]));
    }
    for (x, v) in refined {
        let enc = EncodingUnitaries::new(angles_of(&x))?;
        candidates.push((enc.angles().to_vec(), v));
    }
    let best_value = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let (angles, value) = candidates
        .into_iter()
        .filter(|c| c.1 >= best_value - TIE_TOL)
        .min_by(|a, b| {
            a.0.iter()
                .flatten()
                .partial_cmp(b.0.iter().flatten())
                .expect("finite angles")
        })
        .expect("nonempty candidates");
    Ok(Optimum {
        encoding: EncodingUnitaries::new(angles)?,
        value,
        grid_evaluations: total,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::NoiseKind;
    use crate::states::{make_phi_gamma, make_psi_theta, phi_plus, PureState};
    use std::f64::consts::FRAC_PI_4;

    fn small() -> OptimizerConfig {
        OptimizerConfig {
            grid_points: 4,
            ..Default::default()
        }
    }

    #[test]
    fn objective_values() {
        let id = EncodingUnitaries::identity(2);
        let ad: ChannelFamily = NoiseKind::AmplitudeDamping.into();
        let dep: ChannelFamily = NoiseKind::Dephasing.into();
        let c0 = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 0.0,
        };
        assert!((evaluate(&phi_plus(), &id, &ad, &c0).unwrap() - 1.0).abs() < 1e-12);
        let c5 = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 0.5,
        };
        assert!(
            (evaluate(&make_psi_theta(FRAC_PI_4), &id, &dep, &c5).unwrap() - 0.25).abs() < 1e-12
        );
        let th = Objective::ThresholdP {
            measure: Measure::Concurrence,
            level: 0.5,
        };
        let v = evaluate(&make_phi_gamma(std::f64::consts::FRAC_PI_2), &id, &ad, &th).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
        // ∫(1−p)dp over [0,1]
        let area = Objective::AreaUnderCurve {
            measure: Measure::Concurrence,
            p_grid: crate::dynamics::uniform_grid(11),
        };
        let v = evaluate(
            &make_phi_gamma(std::f64::consts::FRAC_PI_2),
            &id,
            &ad,
            &area,
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn objective_validation() {
        let bad = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 1.5,
        };
        assert!(bad.validate(2).is_err());
        let bad = Objective::ThresholdP {
            measure: Measure::Negativity,
            level: 0.7,
        };
        assert!(bad.validate(2).is_err());
        let json = r#"{"type":"measure_at_p","measure":"concurrence","p":0.5}"#;
        let o: Objective = serde_json::from_str(json).unwrap();
        assert_eq!(
            o,
            Objective::MeasureAtP {
                measure: Measure::Concurrence,
                p: 0.5
            }
        );
        let extra = r#"{"type":"measure_at_p","measure":"concurrence","p":0.5,"x":1}"#;
        assert!(serde_json::from_str::<Objective>(extra).is_err());
    }

    #[test]
    fn product_input_stays_unentangled() {
        let obj = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 0.3,
        };
        let opt = optimize_with(
            &PureState::basis(2, 0),
            &NoiseKind::AmplitudeDamping.into(),
            &obj,
            &small(),
            Exec::default(),
        )
        .unwrap();
        assert!(opt.value.abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_optimum_matches_family_best() {
        let obj = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 0.5,
        };
        let opt = optimize_with(
            &phi_plus(),
            &NoiseKind::AmplitudeDamping.into(),
            &obj,
            &small(),
            Exec::default(),
        )
        .unwrap();
        assert!((opt.value - 0.5).abs() < 1e-6, "{}", opt.value);
    }

    #[test]
    fn deterministic_and_strategy_independent() {
        let obj = Objective::MeasureAtP {
            measure: Measure::Concurrence,
            p: 0.4,
        };
        let fam: ChannelFamily = NoiseKind::Dephasing.into();
        let a = optimize_with(&phi_plus(), &fam, &obj, &small(), Exec::Sequential).unwrap();
        let b = optimize_with(&phi_plus(), &fam, &obj, &small(), Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let ja = serde_json::to_string(&OptimizationReport::new(&a, &obj, &fam)).unwrap();
        let jb = serde_json::to_string(&OptimizationReport::new(&b, &obj, &fam)).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn rejects_three_qubits() {
        let obj = Objective::MeasureAtP {
            measure: Measure::TotalCorrelationsSystem,
            p: 0.4,
        };
        assert!(optimize(&crate::states::ghz(3), &NoiseKind::Dephasing.into(), &obj).is_err());
    }
}
