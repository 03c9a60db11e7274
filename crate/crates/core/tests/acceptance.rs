//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::Instant;

use entflow::channels::{apply_on_qubit, apply_product_channel, dilation, NoiseKind};
use entflow::circuits::{calibrate, measure_tomography, reconstruct, ReadoutModel};
use entflow::dynamics::{
    conservation_check, find_crossing, gamma_grid, ledger, sweep, system_state, uniform_grid,
    verify_orderings, Measure, CROSSING_TOL,
};
use entflow::measures::{concurrence, doubled_negativity, negativity, singlet_fraction};
use entflow::report::{figure_data, Figure};
use entflow::states::{
    ghz, graph_state, make_phi_gamma, make_psi_theta, phi_plus, random_density, random_pure,
    EncodingUnitaries,
};
use entflow::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [NoiseKind; 2] = [NoiseKind::Dephasing, NoiseKind::AmplitudeDamping];

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn theta_grid() -> Vec<f64> {
    let (lo, hi) = (0.1, FRAC_PI_2 - 0.1);
    (0..9).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect()
}

fn random_encoding(rng: &mut ChaCha8Rng, n: usize) -> EncodingUnitaries {
    let angles = (0..n)
        .map(|_| [0; 3].map(|_| rng.random::<f64>() * std::f64::consts::TAU))
        .collect();
    EncodingUnitaries::new(angles).unwrap()
}

fn dephasing_concurrence_law() -> Outcome {
    let ps = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst: f64 = 0.0;
    for theta in theta_grid() {
        let rho = make_psi_theta(theta).density_matrix();
        for &p1 in &ps {
            for &p2 in &ps {
                let chans = [
                    NoiseKind::Dephasing.channel(p1).unwrap(),
                    NoiseKind::Dephasing.channel(p2).unwrap(),
                ];
                let c = concurrence(&apply_product_channel(&rho, &chans).unwrap()).unwrap();
                worst = worst.max((c - (1.0 - p1) * (1.0 - p2) * (2.0 * theta).sin()).abs());
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("225 points, max |error| = {worst:.2e} (tol 1e-9)"),
    )
}

fn damping_negativity_law() -> Outcome {
    let id = EncodingUnitaries::identity(2);
    let (mut worst_doubled, mut worst_half): (f64, f64) = (0.0, 0.0);
    for p in uniform_grid(11) {
        let rho = system_state(
            &make_phi_gamma(0.0),
            &id,
            &NoiseKind::AmplitudeDamping.into(),
            p,
        )
        .unwrap();
        let law = (1.0 - p).powi(2);
        worst_doubled = worst_doubled.max((doubled_negativity(&rho, &[0]).unwrap() - law).abs());
        worst_half = worst_half.max((negativity(&rho, &[0]).unwrap() - law / 2.0).abs());
    }
    outcome(
        worst_doubled <= 1e-9 && worst_half <= 1e-9,
        format!("doubled negativity max |error| = {worst_doubled:.2e}, negativity max |error| = {worst_half:.2e} (tol 1e-9)"),
    )
}

fn dilation_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for kind in KINDS {
        for _ in 0..100 {
            let rho = random_density(&mut rng, 1);
            let c = kind.channel(rng.random::<f64>()).unwrap();
            let v = dilation(&c).unwrap();
            worst = worst.max(
                v.reduced_action(rho.matrix())
                    .max_abs_diff(&c.apply(rho.matrix())),
            );
        }
    }
    outcome(
        worst <= 1e-12,
        format!("200 trials, max |error| = {worst:.2e} (tol 1e-12)"),
    )
}

fn decomposition_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = uniform_grid(10);
    let mut worst: f64 = 0.0;
    for (n, count) in [(2, 50), (3, 10)] {
        for _ in 0..count {
            let psi = random_pure(&mut rng, n);
            for kind in KINDS {
                let l = ledger(&psi, &EncodingUnitaries::identity(n), &kind.into(), &grid).unwrap();
                worst = worst.max(l.max_residual());
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("60 states x 2 channels x 10 p, max residual = {worst:.2e} (tol 1e-9)"),
    )
}

fn conservation_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for state in [phi_plus(), ghz(3)] {
        let n = state.n_qubits();
        for kind in KINDS {
            for _ in 0..10 {
                let a = random_encoding(&mut rng, n);
                let b = random_encoding(&mut rng, n);
                for p in uniform_grid(5) {
                    worst = worst.max(conservation_check(&state, &a, &b, &kind.into(), p).unwrap());
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("Bell and GHZ3, 10 encoding pairs, 5 p, max spread = {worst:.2e} (tol 1e-9)"),
    )
}

fn orderings() -> Outcome {
    let mut failures = Vec::new();
    for kind in KINDS {
        let report = verify_orderings(kind, &gamma_grid(51), &uniform_grid(21)).unwrap();
        failures.extend(
            report
                .failures()
                .into_iter()
                .map(|c| format!("{kind:?}: {}", c.claim)),
        );
    }
    let detail = if failures.is_empty() {
        "51 gamma x 21 p, all claims hold for both channels".to_owned()
    } else {
        format!("failed: {}", failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn negativity_crossing() -> Outcome {
    let found = find_crossing(
        &make_phi_gamma(0.0),
        &make_psi_theta(0.7 * FRAC_PI_4),
        &NoiseKind::AmplitudeDamping.into(),
        Measure::Negativity,
        &uniform_grid(101),
    )
    .unwrap();
    match found {
        Some(c) => outcome(
            true,
            format!("p* = {:.10} located to {CROSSING_TOL:e}", c.p_star),
        ),
        None => {
            let id = EncodingUnitaries::identity(2);
            let min_gap = uniform_grid(101)[1..100]
                .iter()
                .map(|&p| {
                    let n = |s| {
                        negativity(
                            &system_state(s, &id, &NoiseKind::AmplitudeDamping.into(), p).unwrap(),
                            &[0],
                        )
                        .unwrap()
                    };
                    n(&make_phi_gamma(0.0)) - n(&make_psi_theta(0.7 * FRAC_PI_4))
                })
                .fold(f64::INFINITY, f64::min);
            outcome(
                false,
                format!("no sign change on (0,1); N(Phi_0) - N(Psi_theta) stays positive, min interior gap = {min_gap:.3e}"),
            )
        }
    }
}

fn teleportation_saturation() -> Outcome {
    let id = EncodingUnitaries::identity(2);
    let mut worst = (0.0, 0.0, 0.0);
    for theta in theta_grid() {
        for p in uniform_grid(11) {
            let rho = system_state(
                &make_psi_theta(theta),
                &id,
                &NoiseKind::AmplitudeDamping.into(),
                p,
            )
            .unwrap();
            let f = singlet_fraction(&rho).unwrap().fraction;
            let law = (1.0 + 2.0 * negativity(&rho, &[0]).unwrap()) / 2.0;
            let err = (f - law).abs();
            if err > worst.0 {
                worst = (err, theta, p);
            }
        }
    }
    let (err, theta, p) = worst;
    outcome(
        err <= 1e-8,
        format!("9 theta x 11 p, max |F - (1+2N)/2| = {err:.3e} at theta = {theta:.4}, p = {p:.1} (tol 1e-8)"),
    )
}

fn factorization_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bell = phi_plus().density_matrix();
    let mut worst = f64::NEG_INFINITY;
    for kind in KINDS {
        for _ in 0..200 {
            let rho = random_density(&mut rng, 2);
            let (c1, c2) = (
                kind.channel(rng.random()).unwrap(),
                kind.channel(rng.random()).unwrap(),
            );
            let out = concurrence(&apply_product_channel(&rho, &[c1.clone(), c2.clone()]).unwrap())
                .unwrap();
            let f1 = concurrence(&apply_on_qubit(&bell, &c1, 0).unwrap()).unwrap();
            let f2 = concurrence(&apply_on_qubit(&bell, &c2, 1).unwrap()).unwrap();
            worst = worst.max(out - f1 * f2 * concurrence(&rho).unwrap());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("400 trials, max violation = {worst:.2e} (tol 1e-9)"),
    )
}

fn dephasing_environment_law() -> Outcome {
    let traj = sweep(
        &graph_state(),
        &EncodingUnitaries::identity(2),
        &NoiseKind::Dephasing.into(),
        &uniform_grid(101),
    )
    .unwrap();
    let worst = traj.iter().map(|pt| pt.t_e.abs()).fold(0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!("101 p, max |T_E| = {worst:.2e} (tol 1e-10)"),
    )
}

fn tomography_statistics() -> Outcome {
    let bell = phi_plus();
    let rho = bell.density_matrix();
    let ideal = ReadoutModel::ideal(2);
    let noisy = ReadoutModel::symmetric_flip(2, 0.03);
    let (mut good, mut improved) = (0, 0);
    let mut min_fid = f64::INFINITY;
    for seed in 0..20u64 {
        let rec = measure_tomography(&rho, 8192, &ideal, seed, 0, Exec::default()).unwrap();
        let fid = reconstruct(&rec, None).unwrap().fidelity_with_pure(&bell);
        min_fid = min_fid.min(fid);
        good += usize::from(fid >= 0.99);

        let rec = measure_tomography(&rho, 8192, &noisy, seed, 0, Exec::default()).unwrap();
        let calibrated = calibrate(&noisy, 8192, seed ^ 0x9e37_79b9_7f4a_7c15).unwrap();
        let raw = reconstruct(&rec, None).unwrap().fidelity_with_pure(&bell);
        let fixed = reconstruct(&rec, Some(&calibrated))
            .unwrap()
            .fidelity_with_pure(&bell);
        improved += usize::from(fixed > raw);
    }
    outcome(
        good == 20 && improved >= 18,
        format!("ideal readout: {good}/20 seeds with fidelity >= 0.99 (min {min_fid:.4}); 3% flips: mitigation better in {improved}/20"),
    )
}

fn determinism() -> Outcome {
    let mut mismatches = Vec::new();
    for fig in Figure::ALL {
        let a = figure_data(fig, 42, Exec::default()).unwrap();
        let b = figure_data(fig, 42, Exec::default()).unwrap();
        let s = figure_data(fig, 42, Exec::Sequential).unwrap();
        if a.files != b.files || a.manifest_json() != b.manifest_json() {
            mismatches.push(format!("{} rerun", fig.name()));
        }
        if a.files != s.files || a.manifest_json() != s.manifest_json() {
            mismatches.push(format!("{} sequential", fig.name()));
        }
    }
    let detail = if mismatches.is_empty() {
        "fig2..fig5 byte-identical across reruns and execution modes".to_owned()
    } else {
        format!("mismatch: {}", mismatches.join(", "))
    };
    outcome(mismatches.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("dephasing concurrence law", dephasing_concurrence_law),
        ("damping negativity law", damping_negativity_law),
        ("Kraus-dilation equivalence", dilation_equivalence),
        ("correlation decomposition", decomposition_law),
        ("conservation across encodings", conservation_law),
        ("robustness orderings", orderings),
        ("negativity crossing", negativity_crossing),
        ("teleportation saturation", teleportation_saturation),
        ("factorization bound", factorization_bound),
        ("dephasing environment law", dephasing_environment_law),
        ("tomography statistics", tomography_statistics),
        ("figure determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {} [{:.1}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
