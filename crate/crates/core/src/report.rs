//! Trajectory tables, conventions metadata and the figure data sets.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::channels::{ChannelFamily, NoiseKind};
use crate::dynamics::{
    self, default_p_grid, find_crossing_with, Crossing, Measure, TrajectoryPoint,
};
use crate::states::{
    graph_state, make_phi_gamma, make_phi_theta, make_psi_theta, phi_plus, psi_plus,
    EncodingUnitaries, PureState,
};
use crate::{Error, Exec, Result};

/// Header of every trajectory table.
pub const CSV_COLUMNS: [&str; 11] = [
    "p",
    "T_S",
    "T_E",
    "I_SE",
    "I_local",
    "concurrence",
    "negativity",
    "doubled_negativity",
    "E_SE",
    "singlet_fraction",
    "telep_fidelity",
];

/// Twelve significant digits in scientific notation; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Trajectory as CSV text. Two-qubit columns are empty for other sizes.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for pt in points {
        let mut row = vec![format_number(pt.p)];
        row.extend(
            Measure::ALL
                .iter()
                .map(|&m| pt.get(m).map(format_number).unwrap_or_default()),
        );
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Conventions stated alongside every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub log_base: u32,
    pub negativity: &'static str,
    pub doubled_negativity: &'static str,
    pub concurrence: &'static str,
    pub qubit_order: &'static str,
    pub joint_register: &'static str,
    pub number_format: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            log_base: 2,
            negativity: "(||rho^T_A||_1 - 1)/2, partial transpose on qubit 0",
            doubled_negativity: "||rho^T_A||_1 - 1",
            concurrence: "max(0, l1 - l2 - l3 - l4), l_i singular values of W^T (Y x Y) W with rho = W W^dagger",
            qubit_order: "qubit 0 is the most significant bit of the basis index",
            joint_register: "S_1..S_N E_1..E_N, environment E_i dilates the channel on S_i",
            number_format: "scientific, 12 significant digits",
            tool: "entflow",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Figure data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Correlation flow under amplitude damping for `|01⟩+|10⟩` and `|00⟩+|11⟩`.
    Fig2,
    /// Correlation flow under dephasing for `|01⟩+|10⟩` and `|0+⟩+|1−⟩`.
    Fig3,
    /// Negativity, concurrence and `E_SE` of `Φ_0` and `Φ_{π/2}` under damping.
    Fig4,
    /// Negativity of `Φ_0` against `Ψ_{0.7π/4}` under damping, with the
    /// crossing search.
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    pub fn from_name(s: &str) -> Option<Figure> {
        Figure::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn channel(self) -> NoiseKind {
        match self {
            Figure::Fig3 => NoiseKind::Dephasing,
            _ => NoiseKind::AmplitudeDamping,
        }
    }

    /// `(file stem, description, state)` for each curve.
    pub fn states(self) -> Vec<(&'static str, &'static str, PureState)> {
        match self {
            Figure::Fig2 => vec![
                ("psi_01_10", "(|01>+|10>)/sqrt2", psi_plus()),
                ("phi_00_11", "(|00>+|11>)/sqrt2", phi_plus()),
            ],
            Figure::Fig3 => vec![
                ("psi_01_10", "(|01>+|10>)/sqrt2", psi_plus()),
                ("graph_0p_1m", "(|0+>+|1->)/sqrt2", graph_state()),
            ],
            Figure::Fig4 => vec![
                ("phi_gamma_0", "Phi_gamma, gamma=0", make_phi_gamma(0.0)),
                (
                    "phi_gamma_pi_2",
                    "Phi_gamma, gamma=pi/2",
                    make_phi_gamma(FRAC_PI_2),
                ),
            ],
            Figure::Fig5 => vec![
                ("phi_gamma_0", "Phi_gamma, gamma=0", make_phi_gamma(0.0)),
                (
                    "psi_theta_0p7pi_4",
                    "cos(t)|01>+sin(t)|10>, t=0.7*pi/4",
                    make_psi_theta(0.7 * FRAC_PI_4),
                ),
                (
                    "phi_theta_0p7pi_4",
                    "cos(t)|00>+sin(t)|11>, t=0.7*pi/4 (supplementary)",
                    make_phi_theta(0.7 * FRAC_PI_4),
                ),
            ],
        }
    }
}

/// One curve of a figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveEntry {
    pub file: String,
    pub state: &'static str,
    pub encoding: &'static str,
    pub rows: usize,
}

/// Crossing search between two curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingRecord {
    pub a: &'static str,
    pub b: &'static str,
    pub measure: Measure,
    pub crossing: Option<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureManifest {
    pub figure: Figure,
    pub channel: NoiseKind,
    pub p_points: usize,
    pub seed: u64,
    pub curves: Vec<CurveEntry>,
    pub crossings: Vec<CrossingRecord>,
    pub conventions: Conventions,
}

/// CSV files keyed by file name, plus the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub files: Vec<(String, String)>,
    pub manifest: FigureManifest,
}

impl FigureData {
    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.manifest).expect("manifest serialises") + "\n"
    }
}

/// Computes every table behind `fig`. Sweeps are deterministic, so `seed`
/// is only recorded.
pub fn figure_data(fig: Figure, seed: u64, exec: Exec) -> Result<FigureData> {
    let grid = default_p_grid();
    let family = ChannelFamily::Single(fig.channel());
    let states = fig.states();
    let mut files = Vec::new();
    let mut curves = Vec::new();
    for (stem, desc, state) in &states {
        let enc = EncodingUnitaries::identity(state.n_qubits());
        let traj = dynamics::sweep_with(state, &enc, &family, &grid, exec)?;
        let name = format!("{}_{}_{}.csv", fig.name(), stem, fig.channel().label());
        files.push((name.clone(), trajectory_csv(&traj)?));
        curves.push(CurveEntry {
            file: name,
            state: desc,
            encoding: "identity",
            rows: traj.len(),
        });
    }
    let mut crossings = Vec::new();
    if fig == Figure::Fig5 {
        for (i, j) in [(0, 1), (0, 2)] {
            let crossing = find_crossing_with(
                &states[i].2,
                &states[j].2,
                &family,
                Measure::Negativity,
                &grid,
                exec,
            )?;
            crossings.push(CrossingRecord {
                a: states[i].1,
                b: states[j].1,
                measure: Measure::Negativity,
                crossing,
            });
        }
    }
    Ok(FigureData {
        files,
        manifest: FigureManifest {
            figure: fig,
            channel: fig.channel(),
            p_points: grid.len(),
            seed,
            curves,
            crossings,
            conventions: Conventions::default(),
        },
    })
}
