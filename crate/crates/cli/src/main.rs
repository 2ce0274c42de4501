use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use linhyper::asymptotics::{estimate_refined_uniform, estimate_theorem, estimate_uniform, outside_validity, EstimateResult};
use linhyper::census::{census_by_cluster, DEFAULT_WORK_CEILING};
use linhyper::montecarlo::{cluster_stats, estimate_linear_probability};
use linhyper::partitions::PartitionVector;
use linhyper::switching::{bijection_audit, ratio_series};
use linhyper::verify::run_suite;
use linhyper::Error;

/// Exact counts, samples and estimates for linear k-partite r-uniform hypergraphs.
#[derive(Parser)]
#[command(name = "linhyper", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact census of H_r(n, m) by cluster count.
    Census(CensusArgs),
    /// Closed-form estimate of the number of linear hypergraphs.
    Estimate(EstimateArgs),
    /// Monte Carlo estimate of the probability of linearity.
    Sample(SampleArgs),
    /// Exhaustive check of the forward/reverse switching counts.
    AuditSwitchings(AuditArgs),
    /// Series of stratum ratios and its two-sided bound.
    SeriesBounds(SeriesArgs),
    /// Run the invariant suite on the built-in grid.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct Instance {
    /// Part sizes, e.g. 2,2,2.
    #[arg(long, value_delimiter = ',', conflicts_with = "uniform_n", required_unless_present = "uniform_n")]
    parts: Vec<u64>,
    /// n singleton parts (ordinary r-graphs on n vertices).
    #[arg(long)]
    uniform_n: Option<u64>,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    m: u64,
}

impl Instance {
    fn pv(&self) -> linhyper::Result<PartitionVector> {
        match self.uniform_n {
            Some(n) => PartitionVector::uniform(n),
            None => PartitionVector::new(self.parts.clone()),
        }
    }
}

#[derive(Args)]
struct CensusArgs {
    /// Part sizes, e.g. 2,2,2.
    #[arg(long, value_delimiter = ',', conflicts_with = "uniform_n", required_unless_present = "uniform_n")]
    parts: Vec<u64>,
    /// n singleton parts; with --csv a comma list of n values.
    #[arg(long, value_delimiter = ',')]
    uniform_n: Vec<u64>,
    #[arg(long)]
    r: usize,
    /// Edge count; with --csv a comma list of m values.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_WORK_CEILING)]
    work_ceiling: u64,
    /// One CSV row per (n, m) pair instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Theorem,
    Uniform,
    Refined,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, value_enum, default_value = "theorem")]
    variant: Variant,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, env = "LINHYPER_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, default_value_t = DEFAULT_WORK_CEILING)]
    work_ceiling: u64,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    instance: Instance,
    /// Scale of the half-width m²/n³ + m³/n⁴ placed around A.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Ceiling for the census that supplies t′ and the exact sum; 0 skips it.
    #[arg(long, default_value_t = DEFAULT_WORK_CEILING)]
    work_ceiling: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_WORK_CEILING)]
    work_ceiling: u64,
}

enum Failure {
    Usage(String),
    Resource(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource { .. } => Failure::Resource(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serialisable output"));
}

/// `x·10^e` with six significant digits, from a natural log.
fn decimal(log_value: f64) -> String {
    if !log_value.is_finite() {
        return "0".into();
    }
    let l10 = log_value / std::f64::consts::LN_10;
    let exp = l10.floor();
    let mut mant = 10f64.powf(l10 - exp);
    let mut exp = exp as i64;
    if format!("{mant:.5}").starts_with("10") {
        mant /= 10.0;
        exp += 1;
    }
    format!("{mant:.5}e{exp}")
}

fn census(a: CensusArgs) -> Result<(), Failure> {
    let shapes: Vec<(String, PartitionVector)> = if a.uniform_n.is_empty() {
        let pv = PartitionVector::new(a.parts.clone())?;
        vec![(pv.n().to_string(), pv)]
    } else {
        a.uniform_n.iter().map(|&n| Ok((n.to_string(), PartitionVector::uniform(n)?))).collect::<Result<_, Error>>()?
    };
    if !a.csv {
        if shapes.len() != 1 || a.m.len() != 1 {
            return Err(Failure::Usage("lists for --uniform-n or --m need --csv".into()));
        }
        let c = census_by_cluster(&shapes[0].1, a.r, a.m[0], a.work_ceiling)?;
        print_json(&c);
        return Ok(());
    }
    println!("n,parts,r,m,M,total,linear,not_plus,by_cluster");
    for (n, pv) in &shapes {
        for &m in &a.m {
            let c = census_by_cluster(pv, a.r, m, a.work_ceiling)?;
            let strata: Vec<String> = c.by_cluster.iter().map(|(t, x)| format!("{t}:{x}")).collect();
            println!(
                "{n},{},{},{m},{},{},{},{},{}",
                pv.sizes().iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                a.r,
                c.threshold,
                c.total,
                c.linear,
                c.not_plus,
                strata.join(" ")
            );
        }
    }
    Ok(())
}

fn uniform_n(inst: &Instance) -> Result<u64, Failure> {
    let pv = inst.pv()?;
    if !pv.is_uniform() {
        return Err(Failure::Usage("this variant needs --uniform-n or all parts of size 1".into()));
    }
    Ok(pv.n())
}

fn estimate(a: EstimateArgs) -> Result<(), Failure> {
    let inst = &a.instance;
    let (n, result): (u64, EstimateResult) = match a.variant {
        Variant::Theorem => {
            let pv = inst.pv()?;
            (pv.n(), estimate_theorem(&pv, inst.r, inst.m)?)
        }
        Variant::Uniform => {
            let n = uniform_n(inst)?;
            (n, estimate_uniform(n, inst.r as u64, inst.m)?)
        }
        Variant::Refined => {
            let n = uniform_n(inst)?;
            (n, estimate_refined_uniform(n, inst.r as u64, inst.m)?)
        }
    };
    let outside = outside_validity(n, inst.m);
    if outside {
        eprintln!("warning: m = {} is at least n^(4/3)/2 for n = {n}; the estimate is outside its range", inst.m);
    }
    let mut v = serde_json::to_value(&result).expect("serialisable output");
    v["value_decimal"] = Value::String(decimal(result.log_value));
    v["outside_validity"] = Value::Bool(outside);
    print_json(&v);
    Ok(())
}

fn sample(a: SampleArgs) -> Result<(), Failure> {
    let pv = a.instance.pv()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let rep = pool.install(|| estimate_linear_probability(&pv, a.instance.r, a.instance.m, a.trials, a.seed))?;
    let mut v = serde_json::to_value(&rep).expect("serialisable output");
    v["cluster_stats"] = serde_json::to_value(cluster_stats(&rep)).expect("serialisable output");
    print_json(&v);
    Ok(())
}

fn audit(a: AuditArgs) -> Result<(), Failure> {
    let pv = a.instance.pv()?;
    print_json(&bijection_audit(&pv, a.instance.r, a.instance.m, a.work_ceiling)?);
    Ok(())
}

fn series(a: SeriesArgs) -> Result<(), Failure> {
    let pv = a.instance.pv()?;
    let ceiling = (a.work_ceiling > 0).then_some(a.work_ceiling);
    print_json(&ratio_series(&pv, a.instance.r, a.instance.m, a.shift, ceiling)?);
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let outcomes = run_suite(a.work_ceiling);
    let passed = outcomes.iter().all(|o| o.passed);
    print_json(&json!({ "passed": passed, "checks": outcomes }));
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Census(a) => census(a),
        Command::Estimate(a) => estimate(a),
        Command::Sample(a) => sample(a),
        Command::AuditSwitchings(a) => audit(a),
        Command::SeriesBounds(a) => series(a),
        Command::Verify(a) => verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("raise --work-ceiling to run it anyway");
            ExitCode::from(3)
        }
        Err(Failure::Checks) => ExitCode::from(1),
    }
}
