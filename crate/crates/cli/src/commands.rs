use std::fs;
use std::io::Write;
use std::path::Path;

use pfair_core::io::{parse_allocation_json, parse_rate_csv, parse_weights_json, solution_to_json};
use pfair_core::sim::{format_results_csv, run_experiment, Distribution, MetricsRecord, Scenario, Scheme};
use pfair_core::verify::{multi_channel_user_count, shared_channel_count, single_channel_user_count};
use pfair_core::{equivalent_airtime, kkt_residual, shadow_prices, throughputs};
use pfair_core::{Algorithm, Error, SolverConfig, Weights};

use crate::{SimulateArgs, SolveArgs, VerifyArgs};

/// Why a command failed, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Convergence(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Convergence(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Convergence(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => Failure::Convergence(e.to_string()),
            Error::NotOptimal { .. } => Failure::Verification(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames,
/// so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig, Failure> {
    let Some(path) = path else {
        return Ok(SolverConfig::default());
    };
    let cfg: SolverConfig = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(format!("solver config {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_weights(path: Option<&Path>, users: usize) -> Result<Weights, Failure> {
    match path {
        Some(path) => Ok(parse_weights_json(&read(path)?)?),
        None => Ok(Weights::uniform(users)),
    }
}

pub fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let algorithm: Algorithm = args.algorithm.parse()?;
    let rates = parse_rate_csv(&read(&args.input)?)?;
    let weights = load_weights(args.weights.as_deref(), rates.num_users())?;
    let cfg = load_config(args.config.as_deref())?;
    match pfair_core::solve(&rates, &weights, algorithm, &cfg) {
        Ok(solution) => emit(args.out.as_deref(), &(solution_to_json(&solution) + "\n")),
        Err(Error::NotConverged { solution }) => {
            emit(args.out.as_deref(), &(solution_to_json(&solution) + "\n"))?;
            Err(Failure::Convergence(format!(
                "no convergence after {} iterations; best KKT residual {:e} written",
                solution.iterations, solution.kkt_residual
            )))
        }
        Err(e) => Err(e.into()),
    }
}

fn format_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let rates = parse_rate_csv(&read(&args.matrix)?)?;
    let alloc = parse_allocation_json(&read(&args.allocation)?)?;
    if (alloc.num_users(), alloc.num_channels()) != (rates.num_users(), rates.num_channels()) {
        return Err(Failure::Input(format!(
            "allocation is {}x{} but the rate matrix is {}x{}",
            alloc.num_users(),
            alloc.num_channels(),
            rates.num_users(),
            rates.num_channels()
        )));
    }
    if !(args.epsilon >= 0.0) {
        return Err(Failure::Input("epsilon must be non-negative".into()));
    }
    let weights = load_weights(args.weights.as_deref(), rates.num_users())?;
    let cfg = SolverConfig::default();
    let report = kkt_residual(&rates, &alloc, &weights, cfg.zero_threshold)?;
    let t = throughputs(&rates, &alloc)?;
    let prices = shadow_prices(&rates, &t, &weights)?;
    let airtime = equivalent_airtime(&alloc, &prices)?;

    println!("kkt_residual: {:e}", report.residual);
    println!("throughputs: {}", format_list(&t));
    println!("shadow_prices: {}", format_list(&prices));
    println!("equivalent_airtime: {}", format_list(&airtime));
    println!("shared_channels: {}", shared_channel_count(&alloc, cfg.zero_threshold));
    println!("multi_channel_users: {}", multi_channel_user_count(&alloc, cfg.zero_threshold));
    println!("single_channel_users: {}", single_channel_user_count(&alloc, cfg.zero_threshold));
    if report.satisfied_at(args.epsilon) {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "KKT residual {:e} exceeds epsilon {:e}",
            report.residual, args.epsilon
        )))
    }
}

/// Scenario variants for `--sweep axis=v1,v2,...`.
fn sweep_variants(base: &Scenario, spec: Option<&str>) -> Result<Vec<Scenario>, Failure> {
    let Some(spec) = spec else {
        return Ok(vec![base.clone()]);
    };
    let (axis, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("sweep {spec:?} is not of the form axis=v1,v2,...")))?;
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Failure::Input(format!("sweep {spec:?} lists no values")));
    }
    let bad_value = |v: &str| Failure::Input(format!("sweep value {v:?} is not valid for {axis}"));
    let mut variants = Vec::with_capacity(values.len());
    for v in values {
        let mut sc = base.clone();
        match axis.trim() {
            "num_stas" => sc.num_stas = v.parse().map_err(|_| bad_value(v))?,
            "hotspot_load" => {
                let load_fraction: f64 = v.parse().map_err(|_| bad_value(v))?;
                sc.distribution = Distribution::Hotspot { load_fraction };
            }
            other => {
                return Err(Failure::Input(format!(
                    "unknown sweep axis {other:?} (expected num_stas or hotspot_load)"
                )))
            }
        }
        sc.validate()?;
        variants.push(sc);
    }
    Ok(variants)
}

fn parse_schemes(list: Option<&str>) -> Result<Vec<Scheme>, Failure> {
    match list {
        None => Ok(Scheme::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .map(|s| s.parse::<Scheme>().map_err(Failure::from))
            .collect(),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut base = Scenario::from_json(&read(&args.scenario)?)?;
    if let Some(seed) = args.seed {
        base.master_seed = seed;
    }
    let schemes = parse_schemes(args.schemes.as_deref())?;
    let cfg = load_config(args.config.as_deref())?;
    let variants = sweep_variants(&base, args.sweep.as_deref())?;

    let mut records: Vec<MetricsRecord> = Vec::new();
    let mut failed = 0;
    for sc in &variants {
        let results = run_experiment(sc, &schemes, &cfg, !args.sequential)?;
        failed += results.failures.len();
        records.extend(results.records);
    }
    write_atomic(&args.out, &format_results_csv(&records))?;
    if failed > 0 {
        return Err(Failure::Convergence(format!(
            "{failed} replication(s) dropped because a scheme failed; the rest were written"
        )));
    }
    Ok(())
}
