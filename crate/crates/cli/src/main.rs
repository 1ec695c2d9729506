//! The `gw` command line tool: sampling, evaluation, reduction, bound
//! verification, exact oracles, Monte Carlo experiments, and a self-test
//! suite, glued together over a line-oriented tree format and CSV with
//! `#`-prefixed metadata headers.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 scientific
//! verification failure.

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use gw_cli::experiments::{
    self, DistConfig, ExperimentConfig, FamilyConfig,
};
use gw_cli::{stats, svg};
use gw_core::bounds::{self, EtaLemmaOutcome};
use gw_core::functionals::{self, FunctionalFamily};
use gw_core::oracle::{self, ExactCounts};
use gw_core::reductions;
use gw_core::rng;
use gw_core::sampler::ConditionedSampler;
use gw_core::tree::Tree;

#[derive(Parser)]
#[command(name = "gw", version, about = "Conditioned branching-tree toolkit")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the timestamp line from output headers.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw conditioned trees and print them one per line.
    Sample {
        /// geometric | poisson | binary | custom
        #[arg(long)]
        dist: String,
        /// Comma-separated pmf for --dist custom.
        #[arg(long)]
        pmf: Option<String>,
        /// Tree size (adjusted up to the support lattice if impossible).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate an additive functional on each input tree.
    Eval {
        /// indset | matching | domset | reduction | fringe | outdeg
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "-")]
        input: String,
        /// Pattern tree for --family fringe.
        #[arg(long)]
        pattern: Option<String>,
        /// Comma-separated outdegrees for --family outdeg.
        #[arg(long)]
        degrees: Option<String>,
        /// Reduction rule for --family reduction.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        rounds: Option<u32>,
    },
    /// Run r reduction rounds on each input tree.
    Reduce {
        /// leaf | oldleaf | path | oldpath
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Certify cut-off error bounds on each input tree.
    VerifyBounds {
        /// indset | matching | domset | reduction
        #[arg(long)]
        family: String,
        #[arg(long = "M")]
        m: u32,
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        rounds: Option<u32>,
        /// Scale on the dominating-set profile bound.
        #[arg(long)]
        dom_constant: Option<f64>,
    },
    /// Exact big-integer counts for each input tree.
    Oracle {
        /// indset | matching | domset
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Also write one standardized histogram SVG per size.
        #[arg(long)]
        histogram: bool,
        /// Overrides the config seed (GW_SEED overrides both).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive oracle-equivalence and bound suites on small trees.
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default exit code for usage errors is 2, which is
            // reserved here for verification failures
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(k) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gw: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match &cli.cmd {
        Cmd::Sample { dist, pmf, n, count, seed } => {
            cmd_sample(cli, dist, pmf.as_deref(), *n, *count, *seed)
        }
        Cmd::Eval { family, input, pattern, degrees, kind, rounds } => {
            cmd_eval(cli, family, input, pattern.as_deref(), degrees.as_deref(), kind.as_deref(), *rounds)
        }
        Cmd::Reduce { kind, r, input } => cmd_reduce(cli, kind, *r, input),
        Cmd::VerifyBounds { family, m, input, kind, rounds, dom_constant } => {
            cmd_verify_bounds(cli, family, *m, input, kind.as_deref(), *rounds, *dom_constant)
        }
        Cmd::Oracle { family, input } => cmd_oracle(cli, family, input),
        Cmd::Experiment { config, out, histogram, seed } => {
            cmd_experiment(cli, config, out, *histogram, *seed)
        }
        Cmd::Selftest => cmd_selftest(),
    }
}

/// FNV-1a over the canonical invocation string; logged so any output can
/// be traced back to its exact configuration.
fn config_hash(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for p in parts {
        for b in p.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn write_header(
    w: &mut impl Write,
    cli: &Cli,
    seed: Option<u64>,
    config_parts: &[&str],
) -> io::Result<()> {
    writeln!(w, "# gw {}", env!("CARGO_PKG_VERSION"))?;
    if let Some(s) = seed {
        writeln!(w, "# seed: {s}")?;
    }
    writeln!(w, "# config: {:016x}", config_hash(config_parts))?;
    if !cli.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(w, "# timestamp: {secs}")?;
    }
    Ok(())
}

/// GW_SEED overrides any seed given on the command line or in a config.
fn resolve_seed(flag_seed: u64) -> Result<u64, Box<dyn std::error::Error>> {
    match std::env::var("GW_SEED") {
        Ok(v) => Ok(v.trim().parse::<u64>().map_err(|_| format!("bad GW_SEED: {v:?}"))?),
        Err(_) => Ok(flag_seed),
    }
}

fn read_trees(input: &str) -> Result<Vec<Tree>, Box<dyn std::error::Error>> {
    let reader: Box<dyn Read> = if input == "-" {
        Box::new(io::stdin())
    } else {
        Box::new(fs::File::open(input)?)
    };
    let mut trees = Vec::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        trees.push(line.parse::<Tree>().map_err(|e| format!("line {:?}: {e}", line))?);
    }
    Ok(trees)
}

fn build_dist(kind: &str, pmf: Option<&str>) -> Result<gw_core::OffspringDistribution, Box<dyn std::error::Error>> {
    let pmf_vec = match pmf {
        Some(s) => Some(
            s.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()?,
        ),
        None => None,
    };
    let dist = DistConfig { kind: kind.to_string(), pmf: pmf_vec }.build()?;
    if dist.warn_mean() {
        eprintln!("gw: warning: offspring mean is {}, not 1; the theory assumes a critical law", dist.mean());
    }
    if dist.warn_variance() {
        eprintln!("gw: warning: offspring variance {} is degenerate", dist.variance());
    }
    Ok(dist)
}

fn build_family(
    name: &str,
    pattern: Option<&str>,
    degrees: Option<&str>,
    kind: Option<&str>,
    rounds: Option<u32>,
) -> Result<FunctionalFamily, Box<dyn std::error::Error>> {
    let degrees_vec = match degrees {
        Some(s) => Some(
            s.split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<Result<Vec<u32>, _>>()?,
        ),
        None => None,
    };
    Ok(FamilyConfig {
        name: name.to_string(),
        kind: kind.map(str::to_string),
        rounds,
        pattern: pattern.map(str::to_string),
        degrees: degrees_vec,
    }
    .build()?)
}

fn cmd_sample(
    cli: &Cli,
    dist_kind: &str,
    pmf: Option<&str>,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let seed = resolve_seed(seed)?;
    let dist = build_dist(dist_kind, pmf)?;
    let n = experiments::adjust_size(&dist, n);
    let sampler = ConditionedSampler::new(&dist, n)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    write_header(&mut out, cli, Some(seed), &["sample", dist_kind, &n.to_string(), &count.to_string()])?;
    for i in 0..count {
        let mut r = rng::stream(rng::split_seed(seed, i as u64), 0);
        let t = sampler.sample(&mut r);
        writeln!(out, "{t}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(
    cli: &Cli,
    family_name: &str,
    input: &str,
    pattern: Option<&str>,
    degrees: Option<&str>,
    kind: Option<&str>,
    rounds: Option<u32>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let family = build_family(family_name, pattern, degrees, kind, rounds)?;
    let trees = read_trees(input)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    write_header(&mut out, cli, None, &["eval", family_name, input])?;
    match &family {
        FunctionalFamily::IndSet | FunctionalFamily::Matching => {
            writeln!(out, "# columns: n,value,root_toll,rho")?;
            for t in &trees {
                let (ev, rho) = match family {
                    FunctionalFamily::IndSet => {
                        let (ev, st) = functionals::eval_independent(t, false);
                        (ev, st.rho[0])
                    }
                    _ => {
                        let (ev, st) = functionals::eval_matching(t, false);
                        (ev, st.rho[0])
                    }
                };
                writeln!(out, "{},{},{},{}", t.len(), ev.value, ev.root_toll, rho)?;
            }
        }
        FunctionalFamily::DomSet => {
            writeln!(out, "# columns: n,value,root_toll,rho0,rho_star")?;
            for t in &trees {
                let (ev, st) = functionals::eval_dominating(t, false);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    t.len(),
                    ev.value,
                    ev.root_toll,
                    st.rho0[0],
                    st.rho_star[0]
                )?;
            }
        }
        _ => {
            writeln!(out, "# columns: n,value,root_toll")?;
            for t in &trees {
                let ev = functionals::evaluate(&family, t);
                writeln!(out, "{},{},{}", t.len(), ev.value, ev.root_toll)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reduce(
    cli: &Cli,
    kind_name: &str,
    r: u32,
    input: &str,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let kind = experiments::parse_reduction_kind(kind_name)?;
    let trees = read_trees(input)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    write_header(&mut out, cli, None, &["reduce", kind_name, &r.to_string(), input])?;
    writeln!(out, "# columns: n,x_r,f_r")?;
    for t in &trees {
        let res = reductions::reduce_r(t, kind, r);
        writeln!(out, "{},{},{}", t.len(), res.x_r, res.f_r)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_bounds(
    cli: &Cli,
    family_name: &str,
    m: u32,
    input: &str,
    kind: Option<&str>,
    rounds: Option<u32>,
    dom_constant: Option<f64>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let family = build_family(family_name, None, None, kind, rounds)?;
    match family {
        FunctionalFamily::IndSet
        | FunctionalFamily::Matching
        | FunctionalFamily::DomSet
        | FunctionalFamily::Reduction { .. } => {}
        _ => return Err("verify-bounds needs indset, matching, domset, or reduction".into()),
    }
    let constant = dom_constant.unwrap_or(bounds::DOM_BOUND_CONSTANT);
    let trees = read_trees(input)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    write_header(&mut out, cli, None, &["verify-bounds", family_name, &m.to_string(), input])?;
    writeln!(out, "# columns: n,M,tau,bound_rhs,cutoff_error,violated")?;
    let mut any_violated = false;
    for t in &trees {
        let rep = bounds::tau_report_with_constant(t, m, &family, constant)?;
        let tau = if rep.tau_star_infinite { f64::INFINITY } else { rep.tau };
        any_violated |= rep.violated || !rep.certified;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.len(),
            m,
            tau,
            rep.bound_rhs,
            rep.cutoff_error,
            rep.violated || !rep.certified
        )?;
    }
    Ok(if any_violated { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_oracle(
    cli: &Cli,
    family_name: &str,
    input: &str,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let trees = read_trees(input)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    write_header(&mut out, cli, None, &["oracle", family_name, input])?;
    match family_name {
        "indset" => {
            writeln!(out, "# columns: n,i,i0")?;
            for t in &trees {
                if let ExactCounts::Independent { i, i0 } = oracle::brute_independent(t)? {
                    writeln!(out, "{},{},{}", t.len(), i, i0)?;
                }
            }
        }
        "matching" => {
            writeln!(out, "# columns: n,m,m0")?;
            for t in &trees {
                if let ExactCounts::Matching { m, m0 } = oracle::brute_matching(t)? {
                    writeln!(out, "{},{},{}", t.len(), m, m0)?;
                }
            }
        }
        "domset" => {
            writeln!(out, "# columns: n,d,d0,d_star")?;
            for t in &trees {
                if let ExactCounts::Dominating { d, d0, d_star } = oracle::brute_dominating(t)? {
                    writeln!(out, "{},{},{},{}", t.len(), d, d0, d_star)?;
                }
            }
        }
        other => return Err(format!("unknown oracle family {other:?}").into()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(
    cli: &Cli,
    config_path: &PathBuf,
    out_dir: &PathBuf,
    histogram: bool,
    seed_flag: Option<u64>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(config_path)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(s) = seed_flag {
        cfg.seed = s;
    }
    cfg.seed = resolve_seed(cfg.seed)?;
    let run = experiments::run_experiment(&cfg)?;

    fs::create_dir_all(out_dir)?;
    let mut csv = io::BufWriter::new(fs::File::create(out_dir.join("replicates.csv"))?);
    write_header(
        &mut csv,
        cli,
        Some(cfg.seed),
        &["experiment", &text],
    )?;
    writeln!(csv, "# columns: n,replicate,seed,F,toll_root")?;
    for row in &run.rows {
        writeln!(
            csv,
            "{},{},{},{},{}",
            row.n, row.replicate, row.seed, row.value, row.root_toll
        )?;
    }
    drop(csv);

    let summary = serde_json::to_string_pretty(&run.summary)?;
    fs::write(out_dir.join("summary.json"), summary + "\n")?;

    if histogram {
        for size in &run.summary.sizes {
            let values: Vec<f64> = run
                .rows
                .iter()
                .filter(|r| r.n == size.n)
                .map(|r| r.value)
                .collect();
            if let Some(zs) = stats::standardize(&values) {
                let title = format!("{} / {} / n = {}", run.summary.family, run.summary.dist, size.n);
                let file = out_dir.join(format!("histogram_{}.svg", size.n));
                fs::write(file, svg::histogram_svg(&zs, 60, &title))?;
            }
        }
    }
    println!("wrote {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut failed = false;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failed |= !ok;
    };

    // exact evaluators against the big-integer oracles, every tree with at
    // most 9 nodes
    let mut equiv_ok = true;
    for n in 1..=9 {
        for t in oracle::enumerate_trees(n)? {
            for family in [FunctionalFamily::IndSet, FunctionalFamily::Matching, FunctionalFamily::DomSet] {
                let value = functionals::evaluate(&family, &t).value;
                let exact = match family {
                    FunctionalFamily::IndSet => oracle::brute_independent(&t)?,
                    FunctionalFamily::Matching => oracle::brute_matching(&t)?,
                    _ => oracle::brute_dominating(&t)?,
                }
                .total();
                if (value.exp() - exact).abs() > 1e-9 * exact {
                    equiv_ok = false;
                }
            }
        }
    }
    check("oracle-equivalence n<=9", equiv_ok);

    // every explicit bound and certificate on the same suite
    let mut bounds_ok = true;
    for n in 1..=9 {
        for t in oracle::enumerate_trees(n)? {
            for m in 1..=8 {
                for family in [FunctionalFamily::IndSet, FunctionalFamily::Matching] {
                    let rep = bounds::tau_report(&t, m, &family)?;
                    bounds_ok &= !rep.violated && rep.certified;
                }
                if m >= 2 {
                    let rep = bounds::tau_report(&t, m, &FunctionalFamily::DomSet)?;
                    bounds_ok &= !rep.violated && rep.certified;
                }
            }
        }
    }
    check("cutoff-bounds n<=9 M<=8", bounds_ok);

    let mut eta_ok = true;
    let mut skipped = 0usize;
    let mut total = 0usize;
    for n in 1..=9 {
        for t in oracle::enumerate_trees(n)? {
            for m in [3u32, 4] {
                total += 1;
                match bounds::check_eta_lemma(&t, m)?.outcome {
                    EtaLemmaOutcome::Holds => {}
                    EtaLemmaOutcome::Skipped => skipped += 1,
                    EtaLemmaOutcome::Violated => eta_ok = false,
                }
            }
        }
    }
    eta_ok &= skipped * 10 <= total * 3;
    check("eta-lemma n<=9 M in {3,4}", eta_ok);

    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}
