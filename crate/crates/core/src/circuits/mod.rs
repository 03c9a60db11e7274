//! Gate-level statevector simulation of the amplitude-damping circuits and a
//! simulated tomography pipeline with readout errors.
//!
//! The damping circuits act on four qubits laid out `S₁ S₂ E₁ E₂`. A Bell
//! pair is prepared on the system, then each system qubit drives a
//! controlled `R_y(θ)` onto its environment qubit, followed by a CNOT from the
//! environment back to the system. The system then sees amplitude damping
//! with `p = sin²(θ/2)`.

pub mod readout;
pub mod tomography;

use serde::{Deserialize, Serialize};

use crate::qmath::{pauli, ComplexMatrix, C64, ONE, ZERO};
use crate::states::{ry, PureState};
use crate::{Error, Result};

pub use readout::{calibrate, ReadoutModel};
pub use tomography::{
    averaged_tomography, measure_tomography, project_to_physical, reconstruct, sample_counts,
    Pauli, TomographyRecord,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    X {
        target: usize,
    },
    H {
        target: usize,
    },
    Sdg {
        target: usize,
    },
    Ry {
        target: usize,
        theta: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    ControlledRy {
        control: usize,
        target: usize,
        theta: f64,
    },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X { target }
            | Gate::H { target }
            | Gate::Sdg { target }
            | Gate::Ry { target, .. } => {
                vec![target]
            }
            Gate::Cnot { control, target }
            | Gate::ControlledRy {
                control, target, ..
            } => {
                vec![control, target]
            }
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { theta, .. } | Gate::ControlledRy { theta, .. } => Some(theta),
            _ => None,
        }
    }
}

fn sdg() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, C64::new(0.0, -1.0)]])
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u`, control as the more significant factor.
fn controlled(u: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = u[(i, j)];
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit has no qubits".into()));
        }
        for (k, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= self.n_qubits) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {k} addresses qubit {q} of {}",
                    self.n_qubits
                )));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidCircuit(format!(
                    "gate {k} has control = target"
                )));
            }
            if g.angle().is_some_and(|t| !t.is_finite()) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {k} has a non-finite angle"
                )));
            }
        }
        Ok(())
    }
}

/// Statevector after running `c` on `|0…0⟩`.
pub fn simulate(c: &Circuit) -> Result<PureState> {
    simulate_from(c, PureState::basis(c.n_qubits, 0))
}

pub fn simulate_from(c: &Circuit, mut psi: PureState) -> Result<PureState> {
    c.validate()?;
    if psi.n_qubits() != c.n_qubits {
        return Err(Error::WrongQubitCount {
            expected: c.n_qubits,
            found: psi.n_qubits(),
        });
    }
    for g in &c.gates {
        match *g {
            Gate::X { target } => psi.apply_single(&pauli::x(), target)?,
            Gate::H { target } => psi.apply_single(&pauli::h(), target)?,
            Gate::Sdg { target } => psi.apply_single(&sdg(), target)?,
            Gate::Ry { target, theta } => psi.apply_single(&ry(theta), target)?,
            Gate::Cnot { control, target } => {
                psi.apply_pair(&controlled(&pauli::x()), control, target)?
            }
            Gate::ControlledRy {
                control,
                target,
                theta,
            } => psi.apply_pair(&controlled(&ry(theta)), control, target)?,
        }
    }
    Ok(psi)
}

/// Bell pair prepared on the system register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellInput {
    /// `(|00⟩ + |11⟩)/√2`
    Phi0,
    /// `(|01⟩ + |10⟩)/√2`
    PhiPi2,
}

/// System qubits of the damping circuits.
pub const SYSTEM_QUBITS: [usize; 2] = [0, 1];

/// `θ = 2 asin √p`
pub fn theta_for_p(p: f64) -> f64 {
    2.0 * p.clamp(0.0, 1.0).sqrt().asin()
}

/// `p = sin²(θ/2)`
pub fn p_for_theta(theta: f64) -> f64 {
    (0.5 * theta).sin().powi(2)
}

/// Four-qubit damping circuit on `S₁ S₂ E₁ E₂`.
pub fn build_ad_circuit(input: BellInput, theta: f64) -> Circuit {
    let mut c = Circuit::new(4);
    if input == BellInput::PhiPi2 {
        c.push(Gate::X { target: 1 });
    }
    c.push(Gate::H { target: 0 });
    c.push(Gate::Cnot {
        control: 0,
        target: 1,
    });
    for s in SYSTEM_QUBITS {
        let e = s + 2;
        c.push(Gate::ControlledRy {
            control: s,
            target: e,
            theta,
        });
        c.push(Gate::Cnot {
            control: e,
            target: s,
        });
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, apply_product_channel};
    use crate::states::{phi_plus, psi_plus};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn single_gates() {
        let mut c = Circuit::new(1);
        c.push(Gate::H { target: 0 });
        let psi = simulate(&c).unwrap();
        assert!((psi.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        c.push(Gate::Sdg { target: 0 });
        let psi = simulate(&c).unwrap();
        assert!((psi.amplitudes()[1] - C64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn bell_preparation() {
        let mut c = Circuit::new(2);
        c.push(Gate::H { target: 0 }).push(Gate::Cnot {
            control: 0,
            target: 1,
        });
        let psi = simulate(&c).unwrap();
        assert!(psi.inner(&phi_plus()).norm() > 1.0 - 1e-15);
    }

    #[test]
    fn malformed_circuits_are_rejected() {
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot {
            control: 1,
            target: 1,
        });
        assert!(matches!(simulate(&c), Err(Error::InvalidCircuit(_))));
        let mut c = Circuit::new(2);
        c.push(Gate::X { target: 2 });
        assert!(matches!(simulate(&c), Err(Error::InvalidCircuit(_))));
        let mut c = Circuit::new(1);
        c.push(Gate::Ry {
            target: 0,
            theta: f64::NAN,
        });
        assert!(matches!(simulate(&c), Err(Error::InvalidCircuit(_))));
    }

    #[test]
    fn undamped_circuits_prepare_bell_states() {
        for (input, bell) in [
            (BellInput::Phi0, phi_plus()),
            (BellInput::PhiPi2, psi_plus()),
        ] {
            let psi = simulate(&build_ad_circuit(input, 0.0)).unwrap();
            let expected = bell.tensor(&PureState::basis(2, 0));
            assert!(psi.inner(&expected).norm() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn full_damping_collapses_system() {
        let psi = simulate(&build_ad_circuit(BellInput::Phi0, PI)).unwrap();
        let rho = psi.reduced(&SYSTEM_QUBITS).unwrap();
        let ground = PureState::basis(2, 0).density_matrix();
        assert!(rho.matrix().max_abs_diff(ground.matrix()) < 1e-12);
    }

    #[test]
    fn circuit_matches_kraus_evolution() {
        for k in 0..=20 {
            let theta = k as f64 * PI / 20.0;
            let p = p_for_theta(theta);
            let c = amplitude_damping(p).unwrap();
            for (input, bell) in [
                (BellInput::Phi0, phi_plus()),
                (BellInput::PhiPi2, psi_plus()),
            ] {
                let psi = simulate(&build_ad_circuit(input, theta)).unwrap();
                let rho = psi.reduced(&SYSTEM_QUBITS).unwrap();
                let kraus =
                    apply_product_channel(&bell.density_matrix(), &[c.clone(), c.clone()]).unwrap();
                assert!(
                    rho.matrix().max_abs_diff(kraus.matrix()) < 1e-12,
                    "θ={theta}"
                );
                assert!((psi.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn theta_p_round_trip() {
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!((p_for_theta(theta_for_p(p)) - p).abs() < 1e-15);
        }
        assert!((theta_for_p(0.5) - PI / 2.0).abs() < 1e-15);
    }
}
