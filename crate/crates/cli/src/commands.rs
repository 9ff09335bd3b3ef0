use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use monogamy_core::bounds::BoundReport;
use monogamy_core::game::overlap;
use monogamy_core::posver::{
    entangled_soundness_bound, noisy_soundness_bound, simulate_pv, soundness_bound, ProverModel, TimingScenario,
};
use monogamy_core::qkd::{
    auto_syndrome_length, max_key_length, security_delta, simulate_eqkd, simulate_many, DeviceModel, KeyLength,
    QkdParams,
};
use monogamy_core::random::{random_density, random_povm, stream_rng};
use monogamy_core::seesaw::{bb84_optimal_unentangled_strategy, seesaw as run_seesaw, SeesawConfig, SeesawInit};
use monogamy_core::uncertainty::{check_uncertainty_relation, UrReport};
use monogamy_core::DimensionList;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::fixtures::{self, Fixture};
use crate::output::{opt, Format, Report, Table};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Integer with optional scientific notation, e.g. `100000` or `1e5`.
fn parse_int<T: TryFrom<u128>>(s: &str) -> Result<T, CliError> {
    let s = s.trim();
    let value = match s.parse::<u128>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = s.parse().map_err(|_| usage(format!("not an integer: {s:?}")))?;
            if !(f >= 0.0 && f.fract() == 0.0 && f < 1e30) {
                return Err(usage(format!("not a non-negative integer: {s:?}")));
            }
            f as u128
        }
    };
    T::try_from(value).map_err(|_| usage(format!("{s} is out of range")))
}

/// Comma-separated integers and inclusive ranges: `1..10`, `1,2,5..8`.
fn parse_int_list<T: TryFrom<u128> + Copy>(s: &str) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi): (u128, u128) = (parse_int(lo)?, parse_int(hi.trim_start_matches('='))?);
                if lo > hi || hi - lo > 1_000_000 {
                    return Err(usage(format!("bad range {part:?}")));
                }
                for v in lo..=hi {
                    out.push(T::try_from(v).map_err(|_| usage(format!("{v} is out of range")))?);
                }
            }
            None => out.push(parse_int(part)?),
        }
    }
    Ok(out)
}

fn parse_float_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| f64::from_str(p.trim()).map_err(|_| usage(format!("not a number: {p:?}"))))
        .collect()
}

fn floats_or(s: &Option<String>, default: f64) -> Result<Vec<f64>, CliError> {
    s.as_deref().map_or(Ok(vec![default]), parse_float_list)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormulaArg {
    /// `imperfect` when γ is given, else `bb84` for the built-in game and `general` otherwise.
    Auto,
    Bb84,
    General,
    Imperfect,
    SameString,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// `bb84` or a game fixture; supplies the overlap and the basis count.
    #[arg(long, default_value = "bb84")]
    game: String,
    #[arg(long, value_enum, default_value = "auto")]
    formula: FormulaArg,
    /// Repetition counts, e.g. `1..10` or `1,5,10`.
    #[arg(long)]
    n: String,
    /// Size of the accepted guess-pair set.
    #[arg(long, default_value_t = 1)]
    q: u128,
    /// Tolerated error fractions, comma-separated.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    gamma_prime: Option<String>,
}

pub fn bounds(a: BoundsArgs) -> Result<Report, CliError> {
    let ns: Vec<u32> = parse_int_list(&a.n)?;
    let (c, k) = if a.game == "bb84" {
        (0.5, 2)
    } else {
        let g = fixtures::load_game(&a.game)?;
        (overlap(&g)?, g.theta_count())
    };
    let formula = match a.formula {
        FormulaArg::Auto if a.gamma.is_some() => FormulaArg::Imperfect,
        FormulaArg::Auto if a.game == "bb84" => FormulaArg::Bb84,
        FormulaArg::Auto => FormulaArg::General,
        FormulaArg::Bb84 if a.game != "bb84" => return Err(usage("--formula bb84 needs --game bb84")),
        f => f,
    };
    let gammas = floats_or(&a.gamma, 0.0)?;
    let gamma_primes = floats_or(&a.gamma_prime, 0.0)?;
    let mut reports = Vec::new();
    for &n in &ns {
        match formula {
            FormulaArg::Bb84 => reports.push(BoundReport::bb84(n)?),
            FormulaArg::General => reports.push(BoundReport::general(c, k, a.q, n)?),
            FormulaArg::SameString => {
                for &g in &gammas {
                    reports.push(BoundReport::same_string(c, k, n, g)?);
                }
            }
            FormulaArg::Imperfect | FormulaArg::Auto => {
                for &g in &gammas {
                    for &gp in &gamma_primes {
                        reports.push(BoundReport::imperfect(c, k, n, g, gp)?);
                    }
                }
            }
        }
    }
    let mut table = Table::new(vec![
        "formula",
        "n",
        "c",
        "theta_count",
        "q_cardinality",
        "gamma",
        "gamma_prime",
        "value",
        "vacuous",
    ]);
    for r in &reports {
        let formula = serde_json::to_value(r.formula)?;
        table.push(vec![
            formula.as_str().unwrap_or_default().to_string(),
            r.inputs.n.to_string(),
            r.inputs.c.to_string(),
            r.inputs.theta_count.to_string(),
            opt(r.inputs.q_cardinality),
            opt(r.inputs.gamma),
            opt(r.inputs.gamma_prime),
            r.value.to_string(),
            r.vacuous.to_string(),
        ]);
    }
    Ok(Report::json("bounds", None, &reports)?.with_table(table, Format::Csv))
}

#[derive(Args)]
pub struct SeesawArgs {
    /// `bb84` or a game fixture.
    #[arg(long, default_value = "bb84")]
    game: String,
    /// Parallel repetitions of the game.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    bob_dim: usize,
    #[arg(long, default_value_t = 1)]
    charlie_dim: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    /// Strategy fixture whose measurements start every restart.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Omit the optimizing strategy from the output.
    #[arg(long)]
    summary: bool,
}

pub fn seesaw(a: SeesawArgs) -> Result<Report, CliError> {
    let base = fixtures::load_game(&a.game)?;
    let game = monogamy_core::game::game_power(&base, a.n)?;
    let init = match &a.init {
        None => SeesawInit::RandomProjective,
        Some(path) => match fixtures::load(path)? {
            Fixture::Strategy { strategy, .. } => SeesawInit::FromStrategy { strategy },
            other => {
                return Err(CliError::Fixture(format!(
                    "expected a strategy fixture, found {}",
                    other.kind()
                )))
            }
        },
    };
    let cfg = SeesawConfig {
        max_iters: a.max_iters,
        tol: a.tol,
        seed: a.seed,
        bob_dim: a.bob_dim,
        charlie_dim: a.charlie_dim,
        restarts: a.restarts,
        init,
    };
    let r = run_seesaw(&game, &cfg)?;
    if a.summary {
        let v = json!({
            "value": r.value,
            "iterations": r.iterations,
            "trajectory": r.trajectory,
            "restart": r.restart,
            "restart_values": r.restart_values,
        });
        Report::json("seesaw", Some(a.seed), v)
    } else {
        Report::json("seesaw", Some(a.seed), &r)
    }
}

#[derive(Clone, Debug)]
enum SyndromeLen {
    Auto,
    Fixed(u64),
}

impl FromStr for SyndromeLen {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(SyndromeLen::Auto);
        }
        parse_int(s).map(SyndromeLen::Fixed).map_err(|e| e.to_string())
    }
}

impl SyndromeLen {
    fn resolve(&self, n: u64, t: u64, gamma: f64, epsilon: f64) -> Result<u64, CliError> {
        match *self {
            SyndromeLen::Auto => Ok(auto_syndrome_length(n, t, gamma, epsilon)?),
            SyndromeLen::Fixed(s) => Ok(s),
        }
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    parse_int(s).map_err(|e| e.to_string())
}

#[derive(Args)]
pub struct ProtocolArgs {
    /// Rounds.
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    /// Test rounds.
    #[arg(long, value_parser = parse_u64)]
    t: u64,
    /// Abort threshold on the test error rate.
    #[arg(long)]
    gamma: f64,
    /// Sampling slack.
    #[arg(long)]
    epsilon: f64,
    /// Syndrome length in bits, or `auto` for ⌈(n−t)h(γ+ε)⌉.
    #[arg(long, default_value = "auto")]
    s: SyndromeLen,
    /// Key length in bits.
    #[arg(long, value_parser = parse_u64)]
    ell: u64,
}

impl ProtocolArgs {
    fn params(&self) -> Result<QkdParams, CliError> {
        let p = QkdParams {
            n: self.n,
            t: self.t,
            s: self.s.resolve(self.n, self.t, self.gamma, self.epsilon)?,
            ell: self.ell,
            gamma: self.gamma,
            epsilon: self.epsilon,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
pub struct QkdDeltaArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
}

pub fn qkd_delta(a: QkdDeltaArgs) -> Result<Report, CliError> {
    Report::json("qkd-delta", None, security_delta(&a.protocol.params()?)?)
}

#[derive(Args)]
pub struct QkdKeylenArgs {
    /// Rounds, comma-separated (`1e6,1e7` allowed).
    #[arg(long)]
    n: String,
    /// Test rounds, comma-separated, or `auto` for round(n^{2/3}).
    #[arg(long, default_value = "auto")]
    t: String,
    #[arg(long, default_value = "auto")]
    s: SyndromeLen,
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    epsilon: String,
    /// Security target for δ.
    #[arg(long, default_value_t = 1e-9)]
    target: f64,
}

#[derive(Serialize)]
struct KeylenRow {
    n: u64,
    t: u64,
    s: u64,
    gamma: f64,
    epsilon: f64,
    delta_target: f64,
    key_length: KeyLength,
}

pub fn qkd_keylen(a: QkdKeylenArgs) -> Result<Report, CliError> {
    let ns: Vec<u64> = parse_int_list(&a.n)?;
    let ts: Option<Vec<u64>> = if a.t == "auto" {
        None
    } else {
        Some(parse_int_list(&a.t)?)
    };
    let gammas = parse_float_list(&a.gamma)?;
    let epsilons = parse_float_list(&a.epsilon)?;
    let mut rows = Vec::new();
    for &n in &ns {
        let auto_t = [(n as f64).powf(2.0 / 3.0).round() as u64];
        for &t in ts.as_deref().unwrap_or(&auto_t) {
            for &gamma in &gammas {
                for &epsilon in &epsilons {
                    let s = a.s.resolve(n, t, gamma, epsilon)?;
                    let key_length = max_key_length(n, t, s, gamma, epsilon, a.target)?;
                    rows.push(KeylenRow {
                        n,
                        t,
                        s,
                        gamma,
                        epsilon,
                        delta_target: a.target,
                        key_length,
                    });
                }
            }
        }
    }
    let mut table = Table::new(vec![
        "n",
        "t",
        "s",
        "gamma",
        "epsilon",
        "delta_target",
        "status",
        "ell",
        "rate",
        "delta",
    ]);
    for r in &rows {
        let (status, delta) = match &r.key_length {
            KeyLength::Key { report, .. } => ("key", Some(report.delta)),
            KeyLength::NoExtractableKey { .. } => ("no_extractable_key", None),
            KeyLength::Infeasible { .. } => ("infeasible", None),
        };
        let ell = r.key_length.ell();
        table.push(vec![
            r.n.to_string(),
            r.t.to_string(),
            r.s.to_string(),
            r.gamma.to_string(),
            r.epsilon.to_string(),
            r.delta_target.to_string(),
            status.to_string(),
            ell.to_string(),
            (ell as f64 / r.n as f64).to_string(),
            opt(delta),
        ]);
    }
    Ok(Report::json("qkd-keylen", None, &rows)?.with_table(table, Format::Csv))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DeviceArg {
    /// Bob copies Alice's bits up to independent flips.
    Honest,
    /// Outcomes sampled from a quantum strategy (`--strategy`, default the
    /// optimal unentangled BB84 strategy repeated n times).
    Quantum,
}

#[derive(Args)]
pub struct QkdSimArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Independent bit-flip probability on the honest channel.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1000, value_parser = parse_u64)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "honest")]
    device: DeviceArg,
    /// Strategy fixture for the quantum device.
    #[arg(long)]
    strategy: Option<PathBuf>,
    /// Emit the transcript of trial 0 instead of the aggregate.
    #[arg(long)]
    transcript: bool,
}

pub fn qkd_sim(a: QkdSimArgs) -> Result<Report, CliError> {
    let p = a.protocol.params()?;
    let device = match (a.device, &a.strategy) {
        (DeviceArg::Honest, None) => DeviceModel::Honest,
        (DeviceArg::Honest, Some(_)) => return Err(usage("--strategy needs --device quantum")),
        (DeviceArg::Quantum, Some(path)) => match fixtures::load(path)? {
            Fixture::Strategy { strategy, .. } => DeviceModel::Quantum { strategy },
            other => {
                return Err(CliError::Fixture(format!(
                    "expected a strategy fixture, found {}",
                    other.kind()
                )))
            }
        },
        (DeviceArg::Quantum, None) => {
            let n = usize::try_from(p.n).map_err(|_| usage("n is too large"))?;
            DeviceModel::Quantum {
                strategy: bb84_optimal_unentangled_strategy().tensor_power(n)?,
            }
        }
    };
    if a.transcript {
        Report::json("qkd-sim", Some(a.seed), simulate_eqkd(&p, a.noise, &device, a.seed)?)
    } else {
        Report::json(
            "qkd-sim",
            Some(a.seed),
            simulate_many(&p, a.noise, &device, a.seed, a.trials)?,
        )
    }
}

#[derive(Args)]
pub struct PosverBoundArgs {
    /// Rounds, e.g. `1..20`.
    #[arg(long)]
    n: String,
    /// Entanglement dimensions, comma-separated.
    #[arg(long, default_value = "1")]
    d: String,
    /// Tolerated error fractions towards the first verifier.
    #[arg(long)]
    gamma: Option<String>,
    /// Tolerated error fractions towards the second verifier.
    #[arg(long)]
    gamma_prime: Option<String>,
}

pub fn posver_bound(a: PosverBoundArgs) -> Result<Report, CliError> {
    let ns: Vec<u32> = parse_int_list(&a.n)?;
    let ds: Vec<u128> = parse_int_list(&a.d)?;
    let gammas = floats_or(&a.gamma, 0.0)?;
    let gamma_primes = floats_or(&a.gamma_prime, 0.0)?;
    let mut rows = Vec::new();
    let mut table = Table::new(vec![
        "n",
        "d",
        "gamma",
        "gamma_prime",
        "unentangled",
        "entangled",
        "entangled_vacuous",
        "noisy",
    ]);
    for &n in &ns {
        let unentangled = soundness_bound(n)?;
        for &d in &ds {
            let ent = entangled_soundness_bound(n, d)?;
            for &g in &gammas {
                for &gp in &gamma_primes {
                    let noisy = noisy_soundness_bound(n, g, gp)?;
                    table.push(vec![
                        n.to_string(),
                        d.to_string(),
                        g.to_string(),
                        gp.to_string(),
                        unentangled.to_string(),
                        ent.value.to_string(),
                        ent.vacuous.to_string(),
                        noisy.to_string(),
                    ]);
                    rows.push(json!({
                        "n": n,
                        "d": d.to_string(),
                        "gamma": g,
                        "gamma_prime": gp,
                        "unentangled": unentangled,
                        "entangled": ent,
                        "noisy": noisy,
                    }));
                }
            }
        }
    }
    Ok(Report::json("posver", None, rows)?.with_table(table, Format::Csv))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProverArg {
    Honest,
    /// Breidbart-basis pair at `--a0` and `--a1`.
    Breidbart,
    /// One party at `--at`.
    Single,
}

#[derive(Args)]
pub struct PosverSimArgs {
    /// Scenario fixture with the verifier positions and prover model.
    #[arg(long, conflicts_with_all = ["v0", "v1", "pos", "prover"])]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    v0: f64,
    #[arg(long, default_value_t = 10.0)]
    v1: f64,
    /// Claimed position.
    #[arg(long, default_value_t = 5.0)]
    pos: f64,
    #[arg(long, value_enum, default_value = "honest")]
    prover: ProverArg,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    at: Option<f64>,
    /// Qubits per round.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 100_000, value_parser = parse_u64)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn posver_simulate(a: PosverSimArgs) -> Result<Report, CliError> {
    let (scenario, prover) = match &a.scenario {
        Some(path) => match fixtures::load(path)? {
            Fixture::Scenario { scenario, prover } => (scenario, prover),
            other => {
                return Err(CliError::Fixture(format!(
                    "expected a scenario fixture, found {}",
                    other.kind()
                )))
            }
        },
        None => {
            let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("this prover needs {flag}")));
            let prover = match a.prover {
                ProverArg::Honest => ProverModel::Honest,
                ProverArg::Breidbart => ProverModel::BreidbartPair {
                    a0: need(a.a0, "--a0")?,
                    a1: need(a.a1, "--a1")?,
                },
                ProverArg::Single => ProverModel::Single {
                    at: need(a.at, "--at")?,
                },
            };
            (
                TimingScenario {
                    v0: a.v0,
                    v1: a.v1,
                    pos: a.pos,
                },
                prover,
            )
        }
    };
    Report::json(
        "posver",
        Some(a.seed),
        simulate_pv(&scenario, a.n, &prover, a.seed, a.trials)?,
    )
}

#[derive(Args)]
pub struct UrCheckArgs {
    /// Uncertainty fixture with the state and the two measurements.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    fixture: Option<PathBuf>,
    /// Number of random three-qubit states with random binary POVMs.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn ur_check(a: UrCheckArgs) -> Result<Report, CliError> {
    let (reports, seed): (Vec<UrReport>, Option<u64>) = match (&a.fixture, a.random) {
        (Some(path), _) => match fixtures::load(path)? {
            Fixture::Uncertainty { rho_abc, dims, f0, f1 } => {
                (vec![check_uncertainty_relation(&rho_abc, &dims, &f0, &f1)?], None)
            }
            other => {
                return Err(CliError::Fixture(format!(
                    "expected an uncertainty fixture, found {}",
                    other.kind()
                )))
            }
        },
        (None, Some(k)) => {
            let dims = DimensionList::new(vec![2, 2, 2])?;
            let reports = (0..k as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(a.seed, i);
                    let rho = random_density(8, &mut rng);
                    let f0 = random_povm(2, 2, &mut rng);
                    let f1 = random_povm(2, 2, &mut rng);
                    check_uncertainty_relation(&rho, &dims, &f0, &f1)
                })
                .collect::<Result<Vec<_>, _>>()?;
            (reports, Some(a.seed))
        }
        (None, None) => return Err(usage("give --fixture or --random")),
    };
    let mut table = Table::new(vec![
        "index",
        "c",
        "pguess_b",
        "pguess_c",
        "sum",
        "bound",
        "hmin_b",
        "hmin_c",
        "entropy_bound",
        "satisfied",
    ]);
    for (i, r) in reports.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            r.c.to_string(),
            r.pguess_b.to_string(),
            r.pguess_c.to_string(),
            r.sum.to_string(),
            r.bound.to_string(),
            r.hmin_b.to_string(),
            r.hmin_c.to_string(),
            r.entropy_bound.to_string(),
            r.satisfied.to_string(),
        ]);
    }
    Ok(Report::json("ur-check", seed, &reports)?.with_table(table, Format::Json))
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

pub fn validate(a: ValidateArgs) -> Result<Report, CliError> {
    let mut files = Vec::new();
    let mut table = Table::new(vec!["path", "kind", "valid", "error"]);
    for path in &a.paths {
        let (kind, error) = match fixtures::load(path) {
            Ok(f) => (Some(f.kind()), f.validate().err().map(|e| e.to_string())),
            Err(e) => (None, Some(e.to_string())),
        };
        table.push(vec![
            path.display().to_string(),
            opt(kind),
            error.is_none().to_string(),
            opt(error.clone()),
        ]);
        files.push(json!({
            "path": path.display().to_string(),
            "kind": kind,
            "valid": error.is_none(),
            "error": error,
        }));
    }
    let all_valid = files.iter().all(|f| f["valid"] == true);
    Ok(Report::json(
        "fixtures validate",
        None,
        json!({ "all_valid": all_valid, "files": files }),
    )?
    .with_table(table, Format::Json))
}
