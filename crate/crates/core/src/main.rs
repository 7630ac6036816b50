//! Command-line front end.
//!
//! Exit codes: 0 success/certified, 1 configuration error, 2 I/O error,
//! 3 model-precondition violation, 4 certification failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edgeworth::config::RunConfig;
use edgeworth::equilibrium::{MixedStrategyCdf, ProfileFamily, StrategyProfile};
use edgeworth::simulation::simulate_market;
use edgeworth::valuation::{InfiniteHorizon, MarketParams, ValueTable};
use edgeworth::verification::{check_epsilon_equilibrium, DEFAULT_EPS_FRAC};
use edgeworth::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_CERTIFICATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "edgeworth",
    about = "Option values, reservation prices, and mixed pricing equilibria \
             for capacity-one sellers of a perishable good",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (defaults to `out` in the config, else stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count
    #[arg(long)]
    trials: Option<u64>,
    /// Grid size for CDF output / verification price grids
    #[arg(long)]
    grid: Option<usize>,
    /// Certification tolerance
    #[arg(long)]
    eps: Option<f64>,
    /// Maximum horizon for convergence sweeps
    #[arg(long)]
    tmax: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileOverride {
    /// The constructed equilibrium for the configured variant
    Equilibrium,
    /// Every seller posts the buyer reservation price (not an equilibrium)
    AllPbar,
}

#[derive(Subcommand)]
enum Command {
    /// Write the option-value / reservation-price table
    Values(Common),
    /// Write the period-T equilibrium strategies
    Equilibrium(Common),
    /// Certify a strategy profile against the deviation oracle
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "equilibrium")]
        profile: ProfileOverride,
    },
    /// Monte Carlo play of the market under the equilibrium profiles
    Simulate(Common),
    /// Finite-horizon statistics against their infinite-horizon limits
    Converge(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Values(c) => cmd_values(c),
        Command::Equilibrium(c) => cmd_equilibrium(c),
        Command::Verify { common, profile } => cmd_verify(common, *profile),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Converge(c) => cmd_converge(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) => EXIT_CONFIG,
        Error::DegenerateDemand(_)
        | Error::WrongVariant(_)
        | Error::ConditionsViolated(_)
        | Error::NoFixedPoint(_) => EXIT_PRECONDITION,
        Error::InternalConsistency(_) => EXIT_PRECONDITION,
    }
}

/// Writes `body` to `--out`, the config's `out`, or stdout.
fn write_out(common: &Common, cfg: &RunConfig, body: &[u8]) -> Result<(), ExitCode> {
    let path = common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    let io_err = |e: std::io::Error, what: &str| {
        eprintln!("error: cannot write {what}: {e}");
        ExitCode::from(EXIT_IO)
    };
    match path {
        Some(p) => std::fs::write(&p, body).map_err(|e| io_err(e, &p.display().to_string())),
        None => std::io::stdout()
            .write_all(body)
            .map_err(|e| io_err(e, "stdout")),
    }
}

fn load(common: &Common) -> Result<(RunConfig, MarketParams<f64>), Error> {
    let cfg = RunConfig::from_path(&common.config)?;
    let params = cfg.market_params()?;
    Ok((cfg, params))
}

fn cmd_values(common: &Common) -> Result<ExitCode, Error> {
    let (cfg, params) = load(common)?;
    let table = ValueTable::build(params.clone())?;
    let mut body = Vec::new();
    table.to_csv(&mut body).expect("in-memory write");
    if let Err(code) = write_out(common, &cfg, &body) {
        return Ok(code);
    }
    let n = params.n_sellers;
    let t = params.horizon;
    print!("V({n}, {t}) = {}", table.value(n, t));
    match table.reservation_price(n, t) {
        Ok(p) => println!("  P*({n}, {t}) = {p}"),
        Err(_) => println!(),
    }
    Ok(ExitCode::SUCCESS)
}

fn strategy_csv(
    profile: &StrategyProfile<f64>,
    header: &str,
    grid: usize,
) -> std::io::Result<Vec<u8>> {
    let mut body = Vec::new();
    if profile.strategies.iter().all(MixedStrategyCdf::is_pure) {
        writeln!(body, "# {header}")?;
        writeln!(body, "seller,price")?;
        for (i, s) in profile.strategies.iter().enumerate() {
            writeln!(body, "{},{}", i + 1, s.atom_price().expect("pure"))?;
        }
    } else {
        profile.strategies[0].to_csv(&mut body, header, grid)?;
    }
    Ok(body)
}

fn cmd_equilibrium(common: &Common) -> Result<ExitCode, Error> {
    let (cfg, params) = load(common)?;
    let table = ValueTable::build(params.clone())?;
    let family = ProfileFamily::equilibrium(&table)?;
    let profile = family
        .get(params.n_sellers, params.horizon)
        .expect("family covers the full grid");
    let grid = common.grid.or(cfg.grid).unwrap_or(512);
    let header = params.describe();
    let body = strategy_csv(profile, &header, grid).expect("in-memory write");
    if let Err(code) = write_out(common, &cfg, &body) {
        return Ok(code);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(common: &Common, which: ProfileOverride) -> Result<ExitCode, Error> {
    let (cfg, params) = load(common)?;
    let table = ValueTable::build(params.clone())?;
    let profile = match which {
        ProfileOverride::Equilibrium => {
            let family = ProfileFamily::equilibrium(&table)?;
            family
                .get(params.n_sellers, params.horizon)
                .expect("family covers the full grid")
                .clone()
        }
        ProfileOverride::AllPbar => StrategyProfile::symmetric(
            params.n_sellers,
            MixedStrategyCdf::pure(params.reserve_price),
        ),
    };
    let grid = common.grid.or(cfg.grid).unwrap_or(200).max(100);
    let eps = common
        .eps
        .or(cfg.eps)
        .unwrap_or(DEFAULT_EPS_FRAC * params.reserve_price);
    let cert = check_epsilon_equilibrium(&profile, params.horizon, &table, grid, eps)?;
    let mut body = Vec::new();
    writeln!(body, "# {} eps={eps} grid={grid}", params.describe()).expect("in-memory write");
    for r in &cert.reports {
        r.to_csv(&mut body).expect("in-memory write");
    }
    if let Err(code) = write_out(common, &cfg, &body) {
        return Ok(code);
    }
    for r in &cert.reports {
        println!(
            "seller {}: equilibrium value {}, max on-support gap {}, best deviation gain {}",
            r.seller_index, r.equilibrium_value, r.max_gap_on_support, r.best_deviation_gain
        );
    }
    if cert.certified {
        println!("certified: eps-equilibrium at eps = {eps}");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("NOT certified at eps = {eps}");
        Ok(ExitCode::from(EXIT_CERTIFICATION))
    }
}

fn cmd_simulate(common: &Common) -> Result<ExitCode, Error> {
    let (cfg, params) = load(common)?;
    let trials = common.trials.or(cfg.trials).unwrap_or(100_000);
    let seed = common.seed.or(cfg.seed).unwrap_or(0);
    let table = ValueTable::build(params.clone())?;
    let family = ProfileFamily::equilibrium(&table)?;
    let report = simulate_market(&family, &params, trials, seed)?;
    let mut body = Vec::new();
    report.to_csv(&mut body).expect("in-memory write");
    if let Err(code) = write_out(common, &cfg, &body) {
        return Ok(code);
    }
    let v = table.value(params.n_sellers, params.horizon);
    for (i, (m, ci)) in report
        .per_seller_mean_profit
        .iter()
        .zip(&report.per_seller_ci_halfwidth)
        .enumerate()
    {
        println!("seller {i}: mean {m} +/- {ci}   (dynamic-programming value {v})");
    }
    Ok(ExitCode::SUCCESS)
}

fn general_strategy(
    n: usize,
    t: usize,
    table: &ValueTable<f64>,
) -> Result<MixedStrategyCdf<f64>, Error> {
    use edgeworth::equilibrium::{
        duopoly_general_cdf, oligopoly_general_cdf, DEFAULT_INV_TOL_FRAC,
    };
    if n == 1 {
        Ok(MixedStrategyCdf::pure(table.params().reserve_price))
    } else if n == 2 {
        duopoly_general_cdf(t, table)
    } else {
        oligopoly_general_cdf(
            n,
            t,
            table,
            DEFAULT_INV_TOL_FRAC * table.params().reserve_price,
        )
    }
}

fn cmd_converge(common: &Common) -> Result<ExitCode, Error> {
    let (cfg, params) = load(common)?;
    let t_max = common.tmax.or(cfg.tmax).unwrap_or(1000);
    if t_max < 2 {
        return Err(Error::InvalidParameter("tmax must be >= 2".into()));
    }
    let limit = InfiniteHorizon::solve(params.clone())?;
    let n = params.n_sellers;
    let sweep = ValueTable::build(MarketParams {
        horizon: t_max,
        ..params.clone()
    })?;
    let binary = params.demand.is_bernoulli() && n >= 2;
    let mut body = Vec::new();
    writeln!(body, "# {} tmax={t_max}", params.describe()).expect("in-memory write");
    if binary {
        let target = limit.reservation_price(n)?;
        writeln!(body, "T,reservation_price,limit,gap").expect("in-memory write");
        for t in 2..=t_max {
            let p = sweep.reservation_price(n, t)?;
            writeln!(body, "{t},{p},{target},{}", (p - target).abs()).expect("in-memory write");
        }
    } else {
        // Track the value gap plus the strategy CDF at the quartile prices of
        // the longest-horizon strategy.
        let target = limit.value(n);
        let last = general_strategy(n, t_max, &sweep)?;
        let probes: Vec<f64> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&u| last.quantile(u))
            .collect();
        writeln!(body, "T,value,limit,gap,cdf_q25,cdf_q50,cdf_q75").expect("in-memory write");
        for t in 2..=t_max {
            let v = sweep.value(n, t);
            let s = general_strategy(n, t, &sweep)?;
            writeln!(
                body,
                "{t},{v},{target},{},{},{},{}",
                (target - v).abs(),
                s.cdf(probes[0]),
                s.cdf(probes[1]),
                s.cdf(probes[2])
            )
            .expect("in-memory write");
        }
    }
    if let Err(code) = write_out(common, &cfg, &body) {
        return Ok(code);
    }
    Ok(ExitCode::SUCCESS)
}
