//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use monogamy_core::bounds::{bb84_parallel_value, beta0};
use monogamy_core::game::{
    bb84_game, constant_guess, game_power, hamming_distance, overlap, round_wise_overlap, winning_operator,
    winning_probability, Strategy,
};
use monogamy_core::linalg::{cyclic_shifts, kittaneh_sum_bound, operator_norm, ComplexMatrix, DimensionList, C64};
use monogamy_core::posver::{
    entangled_soundness_at_rate, max_entanglement_rate, simulate_pv, soundness_bound, ProverModel, TimingScenario,
};
use monogamy_core::qkd::{
    auto_syndrome_length, noise_threshold, secdef_gap, simulate_many, tune_asymptotic_rate, DeviceModel, QkdParams,
};
use monogamy_core::random::{random_density, random_povm, random_projective_measurement, random_psd, stream_rng};
use monogamy_core::seesaw::{bb84_optimal_unentangled_strategy, seesaw, SeesawConfig, SeesawInit};
use monogamy_core::uncertainty::{check_uncertainty_relation, CqEnsemble};
use rand::Rng;

type Check = Result<(bool, String), String>;

fn run(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= limit;
    let pass = ok && in_time;
    println!(
        "criterion {id:>2} {:<4} {title}: {detail} [{:.2}s / limit {}s{}]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", too slow" }
    );
    pass
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1() -> Check {
    let cfg = SeesawConfig {
        restarts: 20,
        seed: 7,
        ..Default::default()
    };
    let r = seesaw(&bb84_game(), &cfg).map_err(err)?;
    let closed = bb84_parallel_value(1).map_err(err)?;
    let ok = (r.value - 0.8535533906).abs() < 1e-6 && closed == beta0() && (closed - 0.8535533906).abs() < 1e-10;
    Ok((ok, format!("seesaw {:.10}, closed form {:.10}", r.value, closed)))
}

fn c2() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=2usize {
        let game = game_power(&bb84_game(), n).map_err(err)?;
        let target = bb84_parallel_value(n as u32).map_err(err)?;
        let product = bb84_optimal_unentangled_strategy().tensor_power(n).map_err(err)?;
        let exact = winning_probability(&game, &product).map_err(err)?.value;
        let seeded = seesaw(
            &game,
            &SeesawConfig {
                init: SeesawInit::FromStrategy { strategy: product },
                ..Default::default()
            },
        )
        .map_err(err)?;
        let free = seesaw(
            &game,
            &SeesawConfig {
                bob_dim: 1 << n,
                charlie_dim: 1 << n,
                restarts: 8,
                max_iters: 200,
                seed: 11,
                ..Default::default()
            },
        )
        .map_err(err)?;
        ok &= (exact - target).abs() < 1e-9 && seeded.value <= target + 1e-6 && free.value <= target + 1e-6;
        parts.push(format!(
            "n={n}: product {exact:.10}, seesaw(product) {:.10}, seesaw(free, d={}) {:.10}, beta0^n {target:.10}",
            seeded.value,
            1 << n,
            free.value
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c3() -> Check {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let epr = [C64::new(r, 0.0), z, z, C64::new(r, 0.0)];
    let game = bb84_game();
    let s = Strategy::pure(
        &epr,
        DimensionList::new(vec![2, 2, 1]).map_err(err)?,
        game.povms.clone(),
        vec![constant_guess(1, 2, 0); 2],
    )
    .map_err(err)?;
    let v = winning_probability(&game, &s).map_err(err)?.value;
    Ok(((v - 0.5).abs() < 1e-12 && v < 0.8536, format!("value {v:.12}")))
}

fn c4() -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0usize;
    for n in 1..=3usize {
        let game = game_power(&bb84_game(), n).map_err(err)?;
        let k = game.outcome_count();
        let mut rng = stream_rng(4, n as u64);
        for _ in 0..200 {
            let psi = monogamy_core::random::random_pure_state(game.dim_a * 4, &mut rng);
            let bob = (0..game.theta_count())
                .map(|_| random_projective_measurement(2, k, &mut rng))
                .collect();
            let charlie = (0..game.theta_count())
                .map(|_| random_projective_measurement(2, k, &mut rng))
                .collect();
            let s = Strategy::pure(
                &psi,
                DimensionList::new(vec![game.dim_a, 2, 2]).map_err(err)?,
                bob,
                charlie,
            )
            .map_err(err)?;
            let ops: Vec<ComplexMatrix> = (0..game.theta_count())
                .map(|t| winning_operator(&game, &s, t))
                .collect();
            for a in 0..ops.len() {
                for b in 0..ops.len() {
                    let dist = hamming_distance(a, b, 2, n) as i32;
                    let excess = operator_norm(&(&ops[a] * &ops[b])) - 2f64.powf(-dist as f64 / 2.0);
                    worst = worst.max(excess);
                    checked += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-8,
        format!("{checked} pairs, max excess over 2^(-t/2): {worst:.3e}"),
    ))
}

fn c5() -> Check {
    let mut rng = stream_rng(5, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let count = rng.random_range(1..=4);
        let dim = rng.random_range(1..=8);
        let ops: Vec<ComplexMatrix> = (0..count)
            .map(|_| {
                let rank = rng.random_range(1..=dim);
                random_psd(dim, rank, &mut rng)
            })
            .collect();
        let (lhs, rhs) = kittaneh_sum_bound(&ops, &cyclic_shifts(count)).map_err(err)?;
        worst = worst.max(lhs - rhs);
    }
    Ok((worst <= 1e-9, format!("200 tuples, max lhs - rhs: {worst:.3e}")))
}

fn c6() -> Check {
    let base = bb84_game();
    let c = overlap(&base).map_err(err)?;
    let mut ok = c == 0.5;
    let mut parts = vec![format!("c(G) = {c}")];
    for n in 1..=3usize {
        let rw = round_wise_overlap(&base, n).map_err(err)?;
        let literal = overlap(&game_power(&base, n).map_err(err)?).map_err(err)?;
        ok &= (rw - c.powi(n as i32)).abs() < 1e-12;
        parts.push(format!("n={n}: round-wise {rw:.12} (literal max {literal:.3})"));
    }
    Ok((ok, parts.join(", ")))
}

fn c7() -> Check {
    let g = noise_threshold();
    Ok(((0.0148..=0.0158).contains(&g), format!("gamma* = {g:.10}")))
}

fn c8() -> Check {
    let r = tune_asymptotic_rate(100_000_000, 0.005, 1e-9, 2000)
        .map_err(err)?
        .ok_or("no epsilon yields a key")?;
    Ok((
        r.gap <= 0.001,
        format!(
            "best eps {:.6}: l/n {:.6} vs limit {:.6}, gap {:.6} (t/n alone = {:.6})",
            r.epsilon,
            r.rate,
            r.limit,
            r.gap,
            r.t as f64 / r.n as f64
        ),
    ))
}

fn c9() -> Check {
    let clean = QkdParams {
        n: 64,
        t: 16,
        s: auto_syndrome_length(64, 16, 0.0, 0.05).map_err(err)?,
        ell: 8,
        gamma: 0.0,
        epsilon: 0.05,
    };
    let a = simulate_many(&clean, 0.0, &DeviceModel::Honest, 9, 10_000).map_err(err)?;
    let noisy = QkdParams {
        n: 400,
        t: 100,
        s: auto_syndrome_length(400, 100, 0.1, 0.05).map_err(err)?,
        ell: 16,
        gamma: 0.1,
        epsilon: 0.05,
    };
    let b = simulate_many(&noisy, 0.05, &DeviceModel::Honest, 9, 100_000).map_err(err)?;
    let ok = a.aborts == 0 && a.key_matches == a.trials && b.hoeffding_violation_rate <= b.hoeffding_bound;
    Ok((
        ok,
        format!(
            "n=64: {} aborts, {}/{} keys equal; n=400: Hoeffding violations {}/{} = {:.2e} <= {:.4}",
            a.aborts,
            a.key_matches,
            a.trials,
            b.hoeffding_violations,
            b.trials,
            b.hoeffding_violation_rate,
            b.hoeffding_bound
        ),
    ))
}

fn c10() -> Check {
    let scenario = TimingScenario {
        v0: 0.0,
        v1: 10.0,
        pos: 4.0,
    };
    let pair = ProverModel::BreidbartPair { a0: 2.0, a1: 7.0 };
    let one = simulate_pv(&scenario, 1, &pair, 10, 100_000).map_err(err)?;
    let twenty = simulate_pv(&scenario, 20, &pair, 10, 1_000_000).map_err(err)?;
    let bound = soundness_bound(20).map_err(err)?;
    let sigma = (bound * (1.0 - bound) / twenty.trials as f64).sqrt();
    let ok = (one.acceptance_rate - 0.8536).abs() <= 0.004 && twenty.acceptance_rate <= bound + 5.0 * sigma;
    Ok((
        ok,
        format!(
            "n=1: {:.5}; n=20: {:.5} vs bound {:.5} + 5 sigma {:.5}",
            one.acceptance_rate,
            twenty.acceptance_rate,
            bound,
            5.0 * sigma
        ),
    ))
}

fn c11() -> Check {
    let rate = max_entanglement_rate();
    let at_250 = entangled_soundness_at_rate(250, 0.2).map_err(err)?.value;
    let first = (1..2000u32)
        .find(|&n| entangled_soundness_at_rate(n, 0.2).is_ok_and(|r| r.value < 1e-3))
        .unwrap_or(0);
    Ok((
        rate > 0.228 && rate < 0.229 && at_250 < 1e-3,
        format!("rate {rate:.6}; 2^(0.2n) beta0^n at n=250: {at_250:.3e} (first below 1e-3 at n={first})"),
    ))
}

fn c12() -> Check {
    let mut rng = stream_rng(12, 0);
    let dims = DimensionList::new(vec![2, 2, 2]).map_err(err)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let rho = random_density(8, &mut rng);
        let f0 = random_povm(2, 2, &mut rng);
        let f1 = random_povm(2, 2, &mut rng);
        let r = check_uncertainty_relation(&rho, &dims, &f0, &f1).map_err(err)?;
        worst = worst.max(r.sum - r.bound);
    }
    let angle = std::f64::consts::FRAC_PI_8;
    let phi = [C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)];
    let game = bb84_game();
    let sat = check_uncertainty_relation(
        &ComplexMatrix::projector(&phi),
        &DimensionList::new(vec![2, 1, 1]).map_err(err)?,
        &game.povms[0],
        &game.povms[1],
    )
    .map_err(err)?;
    let target = 1.0 + std::f64::consts::FRAC_1_SQRT_2;
    Ok((
        worst <= 1e-7 && (sat.sum - target).abs() < 1e-9,
        format!(
            "500 states, max sum - (1+sqrt c): {worst:.3e}; saturating sum {:.12}",
            sat.sum
        ),
    ))
}

fn c13() -> Check {
    let mut rng = stream_rng(13, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let k = rng.random_range(2..=4);
        let dim = rng.random_range(1..=3);
        let mut draw = || {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let cond = (0..k).map(|_| random_density(dim, &mut rng)).collect();
            CqEnsemble::indexed(raw.iter().map(|p| p / total).collect(), cond)
        };
        let a = draw().map_err(err)?;
        let b = draw().map_err(err)?;
        let mask: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let g = secdef_gap(&a, &b, |x| mask[x], None).map_err(err)?;
        worst = worst.max(g.lhs - g.rhs);
    }
    Ok((worst <= 1e-12, format!("200 instances, max lhs - rhs: {worst:.3e}")))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        run(1, "BB84 single-round value", secs(5), c1),
        run(2, "parallel repetition, n = 1, 2", secs(120), c2),
        run(3, "entangled Bob, guessing Charlie", secs(1), c3),
        run(4, "cross-term norms", secs(120), c4),
        run(5, "operator sum bound", secs(30), c5),
        run(6, "overlap laws", secs(1), c6),
        run(7, "QKD noise threshold", secs(1), c7),
        run(8, "QKD asymptotic rate", secs(1), c8),
        run(9, "E-QKD simulator", secs(300), c9),
        run(10, "position verification simulation", secs(300), c10),
        run(11, "entanglement-rate threshold", secs(1), c11),
        run(12, "uncertainty relation suite", secs(120), c12),
        run(13, "conditioned secrecy reduction", secs(30), c13),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
