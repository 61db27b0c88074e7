//! One PASS/FAIL line per acceptance criterion. With `QSL_ACCEPTANCE_STRICT` set, any failure fails the process.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsl_cli::output::{experiment_csv, trajectory_csv};
use qsl_cli::run::{compute_experiment, compute_trajectory, sweep_n, within_bounds, SweepKind};
use qsl_cli::ScenarioConfig;
use qsl_core::bounds::{a_dot_at, max_speed, scan};
use qsl_core::experiment::{expected_dataset, reconstruct_state, ExperimentConfig};
use qsl_core::quantum::{make_state, Operator, StateSpec};
use qsl_core::scalar::CMatrix;
use qsl_core::spectral::{
    dephasing_factor, evolve_dephasing, evolve_grid, model_from_optics, quadrature_oracle_gamma,
    SegmentSpec, SpectralKind, SpectralModel, DEFAULT_NODES_PER_AXIS,
};
use qsl_core::{BoundsRecord64, Evolution64};

use common::{scenario, SCENARIOS};

const SANDWICH_TOL: f64 = 1e-9;
const ORACLE_NODES: usize = 128;
/// Set to make any failed criterion fail the process.
const STRICT_ENV: &str = "QSL_ACCEPTANCE_STRICT";

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, title: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = outcome.pass && in_time;
    println!(
        "[{}] criterion {id:>2}: {title} | {} | {:.2?} (limit {:.0?}{})",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed,
        limit,
        if in_time { "" } else { ", exceeded" }
    );
    pass
}

fn unitary(spec: &StateSpec) -> (Evolution64, Operator<f64>) {
    let ket = make_state::<f64>(spec).unwrap();
    let a = ket.to_projector_operator();
    let n = ket.n_qubits();
    (
        Evolution64::new(ket, SpectralModel::monochromatic(n).unwrap()).unwrap(),
        a,
    )
}

fn grid41() -> Vec<f64> {
    (0..=40).map(|i| i as f64 * 0.025).collect()
}

fn scenario_records(name: &str) -> (ScenarioConfig, Vec<BoundsRecord64>, f64) {
    let cfg = scenario(name);
    let ev = cfg.evolution().unwrap();
    let a = cfg.observable_operator().unwrap();
    let run = compute_trajectory(&cfg, &ev, &a).unwrap();
    (cfg, run.records, run.summary.max_speed)
}

fn ideal_maxima() -> bool {
    let cases = [
        ("|+⟩", StateSpec::Plus, PI),
        ("|++⟩", StateSpec::PlusN(2), 3.0 * 3f64.sqrt() / 4.0 * PI),
        ("|Φ⁺⟩", StateSpec::BellPhiPlus, 2.0 * PI),
        ("|P⟩", StateSpec::P, 2.0 * PI / 3.0),
    ];
    let mut all = true;
    for (label, spec, expected) in cases {
        all &= check(
            1,
            &format!("ideal maximum speed {label}"),
            Duration::from_secs(1),
            || {
                let (ev, a) = unitary(&spec);
                let records = scan(&ev, &a, &grid41()).unwrap();
                let (l, v) = max_speed(&records, |l| a_dot_at(&ev, &a, l).map(f64::abs)).unwrap();
                Outcome {
                    pass: (v - expected).abs() <= 1e-6,
                    detail: format!(
                        "max |ȧ| = {v:.12} at l = {l:.8}, expected {expected:.12}, tol 1e-6"
                    ),
                }
            },
        );
    }
    all
}

fn speedup_law() -> bool {
    check(
        2,
        "maximum upper bound scales as √N·π / N·π",
        Duration::from_secs(5),
        || {
            let mut worst = 0.0f64;
            let mut parts = Vec::new();
            for kind in [SweepKind::Product, SweepKind::Ghz] {
                for row in sweep_n(kind, 4).unwrap() {
                    worst = worst.max((row.max_upper_bound - row.ideal_bound).abs());
                    parts.push(format!("{kind} N={} {:.10}", row.n, row.max_upper_bound));
                }
            }
            Outcome {
                pass: worst <= 1e-9,
                detail: format!(
                    "worst deviation {worst:.2e}, tol 1e-9; {}",
                    parts.join(", ")
                ),
            }
        },
    )
}

fn sandwich_suite() -> bool {
    check(
        3,
        "sandwich bounds on seven scenarios × 41 points",
        Duration::from_secs(30),
        || {
            let mut violations = 0;
            let mut points = 0;
            for name in SCENARIOS {
                let (_, records, _) = scenario_records(name);
                points += records.len();
                violations += records
                    .iter()
                    .filter(|r| r.violates_sandwich(SANDWICH_TOL))
                    .count();
            }
            Outcome {
                pass: violations == 0 && points == 7 * 41,
                detail: format!("{violations} violations over {points} points, tol 1e-9"),
            }
        },
    )
}

fn tightness() -> bool {
    check(
        4,
        "pure-unitary tightness and noisy departure",
        Duration::from_secs(30),
        || {
            let mut worst = 0.0f64;
            for spec in [
                StateSpec::Plus,
                StateSpec::PlusN(2),
                StateSpec::BellPhiPlus,
                StateSpec::P,
                StateSpec::PN(2),
            ] {
                let (ev, a) = unitary(&spec);
                for r in scan(&ev, &a, &grid41()).unwrap() {
                    worst = worst
                        .max((r.b_ci_plus - r.speed()).abs())
                        .max((r.b_ci_minus - r.speed()).abs());
                }
            }
            let (_, noisy, _) = scenario_records("pp_noise");
            let gap = noisy
                .iter()
                .map(|r| r.lower_gap())
                .fold(f64::NEG_INFINITY, f64::max);
            Outcome {
            pass: worst <= 1e-9 && gap >= 0.1,
            detail: format!("max |b_CI± − |ȧ|| = {worst:.2e} (tol 1e-9); |PP⟩+noise max |ȧ| − lower = {gap:.4} (need ≥ 0.1)"),
        }
        },
    )
}

fn noise_ordering() -> bool {
    check(
        5,
        "noise equalizes |PP⟩ and |P⟩, speeds up near l = 0",
        Duration::from_secs(60),
        || {
            let (_, _, p_noise) = scenario_records("p_noise");
            let (_, pp_noise_records, pp_noise) = scenario_records("pp_noise");
            let (_, _, p) = scenario_records("p");
            let (_, pp_records, pp) = scenario_records("pp");
            let noisy_ratio = pp_noise / p_noise;
            let clean_ratio = pp / p;
            let near_zero = pp_noise_records
                .iter()
                .zip(&pp_records)
                .filter(|(n, c)| n.l <= 0.1 && n.speed() > c.speed())
                .map(|(n, _)| n.l)
                .collect::<Vec<_>>();
            Outcome {
            pass: (0.8..=1.2).contains(&noisy_ratio) && clean_ratio > 1.3 && !near_zero.is_empty(),
            detail: format!(
                "noisy ratio {noisy_ratio:.4} ({pp_noise:.4}/{p_noise:.4}) in [0.8, 1.2]; clean ratio {clean_ratio:.4} \
                 ({pp:.4}/{p:.4}) > 1.3; noisy faster at l ∈ {near_zero:?}"
            ),
        }
        },
    )
}

fn scenario_states() -> Vec<StateSpec> {
    vec![
        StateSpec::Plus,
        StateSpec::PlusN(2),
        StateSpec::BellPhiPlus,
        StateSpec::P,
        StateSpec::PN(2),
    ]
}

fn oracle_equivalence() -> bool {
    check(
        6,
        "closed form vs quadrature oracle; grid vs entrywise engine",
        Duration::from_secs(60),
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let mut oracle_worst = 0.0f64;
            for _ in 0..200 {
                let model = if rng.random_bool(0.5) {
                    let n = rng.random_range(1..=3);
                    model_from_optics(
                        SpectralKind::Decorrelated,
                        808.0,
                        Some(rng.random_range(1.0..20.0)),
                        None,
                        n,
                    )
                } else {
                    let filter = rng.random_range(1.0..20.0);
                    model_from_optics(
                        SpectralKind::Correlated,
                        808.0,
                        Some(filter),
                        Some(rng.random_range(0.01..0.5)),
                        2,
                    )
                }
                .unwrap();
                let k: Vec<i8> = (0..model.n_photons())
                    .map(|_| rng.random_range(-1..=1))
                    .collect();
                let l = rng.random_range(-120.0..120.0);
                let closed = dephasing_factor(&model, &k, l).unwrap();
                let oracle = quadrature_oracle_gamma(&model, &k, l, ORACLE_NODES).unwrap();
                oracle_worst = oracle_worst.max((closed - oracle).norm());
            }
            let mut engine_worst = 0.0f64;
            for spec in scenario_states() {
                let ket = make_state::<f64>(&spec).unwrap();
                let n = ket.n_qubits();
                let mut models = vec![
                    SpectralModel::monochromatic(n).unwrap(),
                    model_from_optics(SpectralKind::Decorrelated, 808.0, Some(12.0), None, n)
                        .unwrap(),
                ];
                if n == 2 {
                    models.push(
                        model_from_optics(
                            SpectralKind::Correlated,
                            808.0,
                            Some(12.0),
                            Some(0.06),
                            2,
                        )
                        .unwrap(),
                    );
                }
                for model in &models {
                    for l in (0..=20).map(|i| i as f64 / 20.0) {
                        let grid =
                            evolve_grid(&ket, model, &[SegmentSpec::z(l)], DEFAULT_NODES_PER_AXIS)
                                .unwrap();
                        let exact = evolve_dephasing(&ket.to_density(), model, l).unwrap();
                        let diff: CMatrix<f64> = grid.entries() - exact.entries();
                        engine_worst =
                            engine_worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    }
                }
            }
            Outcome {
                pass: oracle_worst <= 1e-6 && engine_worst <= 1e-8,
                detail: format!(
                "oracle ({ORACLE_NODES} nodes) worst {oracle_worst:.2e} over 200 draws (tol 1e-6); \
                 engines worst {engine_worst:.2e} over l ∈ [0, 1] (tol 1e-8)"
            ),
            }
        },
    )
}

fn qfi_constancy() -> bool {
    check(
        7,
        "coherent Fisher information constant under unitary evolution",
        Duration::from_secs(30),
        || {
            let mut worst = 0.0f64;
            for spec in scenario_states() {
                let (ev, a) = unitary(&spec);
                let q: Vec<f64> = scan(&ev, &a, &grid41())
                    .unwrap()
                    .iter()
                    .map(|r| r.qfi_c)
                    .collect();
                let (lo, hi) = q.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
                worst = worst.max((hi - lo) / hi);
            }
            Outcome {
                pass: worst <= 1e-9,
                detail: format!("largest relative spread {worst:.2e}, tol 1e-9"),
            }
        },
    )
}

fn virtual_experiment() -> bool {
    let mut all = check(
        8,
        "virtual experiment on |+⟩ at lab defaults",
        Duration::from_secs(300),
        || {
            let cfg = scenario("plus");
            let exp = cfg.experiment.clone().unwrap();
            let run = compute_experiment(&cfg).unwrap();
            let x = 2.0 * PI * exp.delta_l;
            let target = PI * x.sin() / x;
            let stats = &run.summary.experiment;
            let max_ok =
                (stats.estimated_max_speed - target).abs() <= 3.0 * stats.estimated_max_speed_std;
            let outside: Vec<String> = run
                .estimates
                .iter()
                .zip(&run.trajectory.records)
                .filter(|(e, r)| !within_bounds(e, r))
                .map(|(e, r)| {
                    let sigmas =
                        ((e.speed_mean - r.upper).max(r.lower - e.speed_mean)) / e.speed_std;
                    format!("l = {:.3} at {sigmas:.2}σ", e.l)
                })
                .collect();
            Outcome {
            pass: max_ok && outside.is_empty(),
            detail: format!(
                "{} resamples, seed {}: max {:.4} ± {:.4} vs {target:.4} ({}); points outside bounds ± 3σ: {}",
                exp.resamples,
                exp.master_seed,
                stats.estimated_max_speed,
                stats.estimated_max_speed_std,
                if max_ok { "within 3σ" } else { "beyond 3σ" },
                if outside.is_empty() { "none".to_string() } else { outside.join(", ") }
            ),
        }
        },
    );
    all &= check(
        8,
        "virtual experiment on |Φ⁺⟩: second-harmonic difference bias",
        Duration::from_secs(300),
        || {
            let cfg = scenario("phi_plus");
            let exp = cfg.experiment.clone().unwrap();
            let run = compute_experiment(&cfg).unwrap();
            let x = 4.0 * PI * exp.delta_l;
            let target = 2.0 * PI * x.sin() / x;
            let stats = &run.summary.experiment;
            Outcome {
                pass: (stats.estimated_max_speed - target).abs()
                    <= 3.0 * stats.estimated_max_speed_std,
                detail: format!(
                    "{:.0} Hz × {:.0} s: max {:.4} ± {:.4} vs {target:.4}",
                    exp.rate_hz,
                    exp.integration_s,
                    stats.estimated_max_speed,
                    stats.estimated_max_speed_std
                ),
            }
        },
    );
    all
}

fn reconstruction() -> bool {
    check(
        9,
        "linear inversion of expected counts",
        Duration::from_secs(60),
        || {
            let exp = ExperimentConfig::default();
            let mut worst = 0.0f64;
            for name in SCENARIOS {
                let cfg = scenario(name);
                let ev = cfg.evolution().unwrap();
                for l in cfg.l_grid() {
                    let rho = ev.rho_at(l).unwrap();
                    let back =
                        reconstruct_state(&expected_dataset(&rho, &exp, l, name).unwrap()).unwrap();
                    let diff: CMatrix<f64> = back.entries() - rho.entries();
                    worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
            Outcome {
                pass: worst <= 1e-9,
                detail: format!(
                    "worst entry error {worst:.2e} over seven scenarios × 41 states, tol 1e-9"
                ),
            }
        },
    )
}

fn determinism() -> bool {
    check(
        10,
        "byte-identical outputs across runs and thread counts",
        Duration::from_secs(300),
        || {
            let cfg = scenario("pp_noise");
            let mut outputs = Vec::new();
            for threads in [1, 2, 4, 1] {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap();
                let run = pool.install(|| compute_experiment(&cfg)).unwrap();
                outputs.push((
                    trajectory_csv(&run.trajectory.records),
                    experiment_csv(&run.estimates),
                ));
            }
            let identical = outputs.windows(2).all(|w| w[0] == w[1]);
            Outcome {
                pass: identical,
                detail: format!(
                    "|PP⟩+noise experiment, threads 1/2/4/1: {}",
                    if identical { "identical" } else { "differ" }
                ),
            }
        },
    )
}

fn main() {
    let results = [
        ideal_maxima(),
        speedup_law(),
        sandwich_suite(),
        tightness(),
        noise_ordering(),
        oracle_equivalence(),
        qfi_constancy(),
        virtual_experiment(),
        reconstruction(),
        determinism(),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 && std::env::var_os(STRICT_ENV).is_some() {
        std::process::exit(1);
    }
}
