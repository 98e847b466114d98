//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line each and exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use optosqueeze_core::spectra::{
    default_frequency_grid, lorentzian_sm, optimal_squeeze, readout_cooperativity, szz, transfer,
    transfer_general, InputCorrelator, SpectrumMode, TransferModel,
};
use optosqueeze_core::stability::{
    analyze, characteristic_polynomial, drift_matrix, max_real_part, routh_hurwitz,
    sweep_detuning, threshold_small_detuning, DriftMatrix, RouthVerdict,
    DEFAULT_SWEEP_POINTS, MARGINAL_FRACTION,
};
use optosqueeze_core::{CavityParams, CouplingKind, SteadyState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn kilda() -> CavityParams {
    CavityParams::new(0.3, 1e-5, 1.0)
}

fn kilda_steady(g_omega: f64, g_gamma: f64) -> SteadyState {
    SteadyState::with_effective_couplings(&kilda(), g_omega, g_gamma).unwrap()
}

/// Exact rational value of the closed-form threshold at the Kilda settings.
const KILDA_THRESHOLD_EXACT: f64 = 1000507.0 / 243000000.0;

fn threshold_onset() -> Outcome {
    let params = kilda();
    let steady = kilda_steady(1.2 * params.gamma, 0.0);
    let sweep = sweep_detuning(&params, &steady, CouplingKind::Dispersive, (-0.1, 0.1), DEFAULT_SWEEP_POINTS)
        .unwrap();
    let onset = sweep.intervals.iter().map(|iv| iv.lower).find(|l| *l > 0.0);
    let sweep_ok = onset.is_some_and(|x| x / 4e-3 <= 1.25 && 4e-3 / x <= 1.25);

    let formula = threshold_small_detuning(&params, &steady, CouplingKind::Dispersive)
        .unwrap()
        .value()
        .unwrap();
    let formula_ok = (formula - KILDA_THRESHOLD_EXACT).abs() <= 1e-12 * KILDA_THRESHOLD_EXACT
        && (formula - 4.1e-3).abs() <= 0.02 * formula;

    outcome(
        sweep_ok && formula_ok,
        format!(
            "sweep onset {} (want 4e-3 within x1.25: {}), formula {formula:.6e} (4.1e-3 within 2%: {})",
            onset.map_or("none".into(), |x| format!("{x:.6e}")),
            verdict(sweep_ok),
            verdict(formula_ok),
        ),
    )
}

fn complementarity() -> Outcome {
    let params = kilda();
    let mut details = Vec::new();
    let mut pass = true;
    for (kind, steady, want_sign) in [
        (CouplingKind::Dispersive, kilda_steady(1.2 * params.gamma, 0.0), 1.0),
        (CouplingKind::Dissipative, kilda_steady(0.0, -0.3 * params.gamma), -1.0),
    ] {
        let sweep = sweep_detuning(&params, &steady, kind, (-0.1, 0.1), DEFAULT_SWEEP_POINTS).unwrap();
        let unstable: Vec<f64> =
            sweep.points.iter().filter(|p| p.report.max_re_eig > 0.0).map(|p| p.delta).collect();
        let one_sided = unstable.iter().all(|d| d * want_sign > 0.0);
        let nearest = unstable.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
        let near_zero = nearest < 0.02;
        let agree = sweep.disagreements().count() == 0;
        pass &= one_sided && near_zero && agree && !unstable.is_empty();
        details.push(format!(
            "{kind}: {} unstable points, one-sided {}, nearest |delta| {nearest:.3e}, disagreements {}",
            unstable.len(),
            one_sided,
            sweep.disagreements().count()
        ));
    }
    outcome(pass, details.join("; "))
}

fn swap_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let params = CavityParams::new(
            10f64.powf(rng.random_range(-2.0..2.0)),
            10f64.powf(rng.random_range(-6.0..-1.0)),
            1.0,
        )
        .with_delta(rng.random_range(-1.0..1.0));
        let g = rng.random_range(-2.0..2.0) * params.gamma;
        let diss = characteristic_polynomial(&drift_matrix(
            &params,
            &SteadyState::with_effective_couplings(&params, 0.0, g).unwrap(),
            CouplingKind::Dissipative,
        ));
        let disp = characteristic_polynomial(&drift_matrix(
            &params.with_delta(-params.delta),
            &SteadyState::with_effective_couplings(&params, g, 0.0).unwrap(),
            CouplingKind::Dispersive,
        ));
        for (a, b) in diss.iter().zip(disp) {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    outcome(worst <= 1e-12, format!("1000 draws, worst coefficient deviation {worst:.2e}"))
}

fn random_drift(rng: &mut ChaCha8Rng) -> DriftMatrix {
    if rng.random_bool(0.5) {
        let params = CavityParams::new(
            10f64.powf(rng.random_range(-1.5..1.0)),
            10f64.powf(rng.random_range(-5.0..-1.0)),
            1.0,
        )
        .with_delta(rng.random_range(-0.2..0.2));
        let g = rng.random_range(-2.0..2.0) * params.gamma;
        let kind = match rng.random_range(0..3) {
            0 => CouplingKind::Dispersive,
            1 => CouplingKind::Dissipative,
            _ => CouplingKind::Mixed,
        };
        let steady = SteadyState::with_effective_couplings(&params, g, rng.random_range(-1.0..1.0) * g).unwrap();
        drift_matrix(&params, &steady, kind)
    } else {
        DriftMatrix::from_entries(std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
    }
}

/// Monic quartic with prescribed roots, plus the largest root real part.
fn random_quartic(rng: &mut ChaCha8Rng, stable: bool) -> ([f64; 5], f64) {
    let re = |rng: &mut ChaCha8Rng| {
        let magnitude = 10f64.powf(rng.random_range(-3.0..0.5));
        if stable || rng.random_bool(0.7) { -magnitude } else { magnitude }
    };
    let mut factors: Vec<[f64; 3]> = Vec::new();
    let mut max_re = f64::NEG_INFINITY;
    match rng.random_range(0..3) {
        0 => {
            for _ in 0..2 {
                let (a, b) = (re(rng), re(rng));
                max_re = max_re.max(a).max(b);
                factors.push([1.0, -(a + b), a * b]);
            }
        }
        1 => {
            let (a, b, c) = (re(rng), re(rng), re(rng));
            let w = rng.random_range(0.01..3.0);
            max_re = max_re.max(a).max(b).max(c);
            factors.push([1.0, -(a + b), a * b]);
            factors.push([1.0, -2.0 * c, c * c + w * w]);
        }
        _ => {
            for _ in 0..2 {
                let c = re(rng);
                let w = rng.random_range(0.01..3.0);
                max_re = max_re.max(c);
                factors.push([1.0, -2.0 * c, c * c + w * w]);
            }
        }
    }
    let (p, q) = (factors[0], factors[1]);
    let coeffs = [
        1.0,
        p[1] + q[1],
        p[2] + p[1] * q[1] + q[2],
        p[1] * q[2] + p[2] * q[1],
        p[2] * q[2],
    ];
    (coeffs, max_re)
}

fn rh_eigen_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut matrices_checked, mut matrix_mismatch) = (0, 0);
    for _ in 0..10_000 {
        let report = analyze(&random_drift(&mut rng)).unwrap();
        if !report.marginal {
            matrices_checked += 1;
            if !report.method_agreement {
                matrix_mismatch += 1;
            }
        }
    }
    let (mut quartics_checked, mut quartic_mismatch, mut construction_mismatch) = (0, 0, 0);
    for k in 0..10_000 {
        let (coeffs, max_re_true) = random_quartic(&mut rng, k % 2 == 0);
        let max_re = max_real_part(&coeffs).unwrap();
        if max_re.abs() <= MARGINAL_FRACTION {
            continue;
        }
        quartics_checked += 1;
        let rh = routh_hurwitz(&coeffs);
        if (rh == RouthVerdict::Stable) != (max_re < 0.0) {
            quartic_mismatch += 1;
        }
        if (rh == RouthVerdict::Stable) != (max_re_true < 0.0) {
            construction_mismatch += 1;
        }
    }
    outcome(
        matrix_mismatch == 0 && quartic_mismatch == 0 && construction_mismatch == 0,
        format!(
            "matrices {matrix_mismatch}/{matrices_checked} disagree, quartics {quartic_mismatch}/{quartics_checked} disagree \
             ({construction_mismatch} against construction)"
        ),
    )
}

fn squeezing_limit() -> Outcome {
    let params = CavityParams::new(1e3, 1e-5, 1.0);
    let n_ba = 2.0;
    let g = (n_ba * params.gamma * params.gamma_m).sqrt();
    let steady = SteadyState::with_effective_couplings(&params, g, 0.0).unwrap();
    let corr = InputCorrelator::new(0.0);
    let s_min = |w: f64| {
        let plus = transfer_general(w, &steady, &params, CouplingKind::Dispersive).unwrap();
        let minus = transfer_general(-w, &steady, &params, CouplingKind::Dispersive).unwrap();
        optimal_squeeze(&plus, &minus, &corr).s_min
    };

    // gamma_m << |offset| << omega_m
    let plateau: Vec<f64> = [1e-3, 3e-3, 1e-2, -1e-3, -3e-3, -1e-2].iter().map(|d| s_min(1.0 - d)).collect();
    let plateau_dev = plateau.iter().map(|s| (s - 0.2).abs()).fold(0.0, f64::max);
    let plateau_ok = plateau_dev <= 0.005;

    let mut lorentz_dev = 0.0_f64;
    for k in -200..=200 {
        let offset = 10.0 * params.gamma_m * k as f64 / 200.0;
        let want = lorentzian_sm(offset, n_ba, 0.0, params.gamma_m);
        lorentz_dev = lorentz_dev.max((s_min(1.0 - offset) - want).abs() / want);
    }
    let lorentz_ok = lorentz_dev <= 0.02;

    let closest = plateau.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        plateau_ok && lorentz_ok,
        format!(
            "plateau: lowest s_min {closest:.4} at gamma_m << |offset| << omega_m, worst |s_min - 0.2| {plateau_dev:.3e} ({}); \
             Lorentzian worst relative deviation {lorentz_dev:.3e} ({})",
            verdict(plateau_ok),
            verdict(lorentz_ok),
        ),
    )
}

fn backaction_scaling() -> Outcome {
    let n_base = 5.0;
    let omega = 1.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ratio in [1e2, 1e3, 1e4] {
        let params = CavityParams::new(ratio * omega, 1e-3, 1.0);
        let g = (n_base * params.gamma * params.gamma_m).sqrt();
        let steady = SteadyState::with_effective_couplings(&params, 0.0, g).unwrap();
        let t = transfer_general(omega, &steady, &params, CouplingKind::Dissipative).unwrap();
        let n = readout_cooperativity(&t, &params).unwrap();
        xs.push((omega / params.gamma).ln());
        ys.push(n.ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    outcome((slope - 2.0).abs() <= 0.05, format!("fitted slope {slope:.5}"))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn parameter_sets() -> Vec<(CavityParams, f64)> {
    let mut out = Vec::new();
    for (gamma, gamma_m) in [(1e2, 1e-3), (1e3, 1e-3), (1e4, 1e-5)] {
        for n_th in [0.0, 0.5, 10.0] {
            for n_ba in [0.1, 2.0, 100.0] {
                out.push((CavityParams::new(gamma, gamma_m, 1.0).with_n_th(n_th), n_ba));
            }
        }
    }
    out
}

fn quadrature_identities() -> Outcome {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (params, n_ba) in parameter_sets() {
        let g = (n_ba * params.gamma * params.gamma_m).sqrt();
        let corr = InputCorrelator::new(params.n_th);
        for w in default_frequency_grid(&params) {
            for (kind, steady, theta) in [
                (CouplingKind::Dispersive, SteadyState::with_effective_couplings(&params, g, 0.0).unwrap(), 0.0),
                (
                    CouplingKind::Dissipative,
                    SteadyState::with_effective_couplings(&params, 0.0, g * params.gamma / (2.0 * w)).unwrap(),
                    0.5 * PI,
                ),
            ] {
                let plus = transfer(TransferModel::BadCavity, w, &steady, &params, kind).unwrap();
                let minus = transfer(TransferModel::BadCavity, -w, &steady, &params, kind).unwrap();
                worst = worst.max((szz(theta, &plus, &minus, &corr, SpectrumMode::Even) - 1.0).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{count} evaluations, worst |S - 1| {worst:.2e}"))
}

fn floor_and_uncertainty() -> Outcome {
    let mut floor_dev = 0.0_f64;
    let mut worst_product = f64::INFINITY;
    for (params, n_ba) in parameter_sets() {
        let corr = InputCorrelator::new(params.n_th);
        let g = (n_ba * params.gamma * params.gamma_m).sqrt();
        let zero = SteadyState::with_effective_couplings(&params, 0.0, 0.0).unwrap();
        let coupled = SteadyState::with_effective_couplings(&params, g, g * params.gamma / 2.0).unwrap();
        let grid = default_frequency_grid(&params);
        for &w in grid.iter().step_by(3) {
            for model in [TransferModel::General, TransferModel::BadCavity] {
                for kind in [CouplingKind::Dispersive, CouplingKind::Dissipative] {
                    let plus = transfer(model, w, &zero, &params, kind).unwrap();
                    let minus = transfer(model, -w, &zero, &params, kind).unwrap();
                    for k in 0..6 {
                        let s = szz(k as f64 * PI / 6.0, &plus, &minus, &corr, SpectrumMode::Even);
                        floor_dev = floor_dev.max((s - 1.0).abs());
                    }
                    let plus = transfer(model, w, &coupled, &params, kind).unwrap();
                    let minus = transfer(model, -w, &coupled, &params, kind).unwrap();
                    let q = optimal_squeeze(&plus, &minus, &corr);
                    worst_product = worst_product.min(q.s_min * q.s_max);
                }
            }
        }
    }
    // The product is 1 + O(n_ba) away from pure states; allow only rounding below 1.
    let pass = floor_dev <= 1e-12 && worst_product >= 1.0 - 1e-9;
    outcome(pass, format!("worst |S - 1| at zero coupling {floor_dev:.2e}, min s_min*s_max {worst_product:.12}"))
}

fn verdict(ok: bool) -> &'static str {
    if ok { "ok" } else { "FAILED" }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 stability threshold", threshold_onset, Duration::from_secs(5)),
        ("2 stability complementarity", complementarity, Duration::from_secs(5)),
        ("3 swap exactness", swap_exactness, Duration::from_secs(1)),
        ("4 RH-eigenvalue agreement", rh_eigen_agreement, Duration::from_secs(10)),
        ("5 squeezing limit", squeezing_limit, Duration::from_secs(5)),
        ("6 backaction suppression", backaction_scaling, Duration::from_secs(5)),
        ("7 exact-quadrature identities", quadrature_identities, Duration::from_secs(1)),
        ("8 shot-noise floor and uncertainty", floor_and_uncertainty, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.3} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
        );
    }
    println!("{} of 8 criteria passed", 8 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
