use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use drinfeld::experiments::{const_cyclic, const_koblitz, scan, ScanConfig};
use drinfeld::field::FieldCtx;
use drinfeld::frobenius::{prime_record, CSV_HEADER};
use drinfeld::matgroups::group_report;
use drinfeld::polyring::{PolyA, PolyRing};
use drinfeld::skew::DrinfeldModule;
use drinfeld::torsion::{carlitz_scalar, TorsionOracle};
use drinfeld::{Error, Result};

#[derive(Parser)]
#[command(name = "drinfeld", version, about = "Reductions of Drinfeld modules over F_q[T]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan all monic irreducibles in a degree range
    Scan(ScanArgs),
    /// Frobenius data at one prime
    Frob(FrobArgs),
    /// Frobenius on λ-torsion, or a_𝔭 by CRT over several λ
    Torsion(TorsionArgs),
    /// Partial products for the cyclicity and prime-order densities
    Constants(ConstantsArgs),
    /// Counts and ratios per degree, without per-prime output
    Stats(StatsArgs),
    /// Finite verifications
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Matrix-group orders, local factors and closure checks
    Group {
        #[arg(long, default_value_t = 5)]
        q: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiChoice {
    /// φ_T = T + τ − T^{q−1}τ²
    Paper,
    /// φ_T = T + τ
    Carlitz,
}

#[derive(Args)]
struct ModuleArgs {
    #[arg(long, default_value_t = 5)]
    q: u32,
    #[arg(long, value_enum, default_value = "paper", conflicts_with_all = ["g", "delta"])]
    phi: PhiChoice,
    /// τ coefficient of φ_T
    #[arg(long)]
    g: Option<String>,
    /// τ² coefficient of φ_T (omit for rank 1)
    #[arg(long, requires = "g")]
    delta: Option<String>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    module: ModuleArgs,
    /// Degree range a..b (inclusive) or a single degree
    #[arg(long, default_value = "1..8")]
    deg: String,
    #[arg(long, env = "DRINFELD_THREADS")]
    threads: Option<usize>,
    /// Lang–Trotter targets, comma separated
    #[arg(long, default_value = "0,1,T")]
    lt: String,
    /// CSV of per-prime records
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long, default_value = "1..8")]
    deg: String,
    #[arg(long, env = "DRINFELD_THREADS")]
    threads: Option<usize>,
    #[arg(long, default_value = "0,1,T")]
    lt: String,
}

#[derive(Args)]
struct FrobArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long)]
    prime: String,
}

#[derive(Args)]
struct TorsionArgs {
    #[command(flatten)]
    module: ModuleArgs,
    #[arg(long)]
    prime: String,
    /// Torsion level; without it a_𝔭 is reconstructed from default moduli
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Cyclic,
    Koblitz,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 5)]
    q: u32,
    #[arg(long, value_enum, default_value = "cyclic")]
    which: Which,
    #[arg(long, default_value_t = 20)]
    trunc: usize,
}

fn ring_for(q: u32) -> Result<PolyRing> {
    Ok(PolyRing::new(FieldCtx::from_order(q)?))
}

fn parse(ring: &PolyRing, text: &str) -> Result<PolyA> {
    let parsed = ring.parse(text)?;
    if parsed.reduced {
        eprintln!("warning: coefficients of {text:?} reduced mod {}", ring.field().p());
    }
    Ok(parsed.poly)
}

fn module_from(args: &ModuleArgs) -> Result<DrinfeldModule> {
    let ring = ring_for(args.q)?;
    match (&args.g, &args.delta) {
        (Some(g), Some(d)) => DrinfeldModule::rank2(&ring, parse(&ring, g)?, parse(&ring, d)?),
        (Some(g), None) => DrinfeldModule::rank1(&ring, parse(&ring, g)?),
        _ => Ok(match args.phi {
            PhiChoice::Paper => DrinfeldModule::standard(&ring),
            PhiChoice::Carlitz => DrinfeldModule::carlitz(&ring),
        }),
    }
}

fn parse_degrees(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("degree range {text:?}, expected a..b"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b.trim_start_matches('='))?)),
        None => {
            let n = num(text)?;
            Ok((n, n))
        }
    }
}

fn parse_targets(ring: &PolyRing, text: &str) -> Result<Vec<PolyA>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(ring, s))
        .collect()
}

fn scan_config(module: &DrinfeldModule, deg: &str, lt: &str, threads: Option<usize>) -> Result<ScanConfig> {
    let (a, b) = parse_degrees(deg)?;
    let mut cfg = ScanConfig::new(module, a, b).with_targets(parse_targets(module.ring(), lt)?);
    if let Some(t) = threads {
        cfg = cfg.with_threads(t);
    }
    Ok(cfg)
}

fn write_json(path: &PathBuf, v: &Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::from)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap());
}

fn run_scan(args: &ScanArgs) -> Result<()> {
    let module = module_from(&args.module)?;
    let ring = module.ring().clone();
    let cfg = scan_config(&module, &args.deg, &args.lt, args.threads)?;
    let mut csv = match &args.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "{CSV_HEADER}")?;
            Some(w)
        }
        None => None,
    };
    let summary = scan(&cfg, |r| {
        if let Some(w) = csv.as_mut() {
            writeln!(w, "{}", r.csv_row(&ring))?;
        }
        Ok(())
    })?;
    if let Some(mut w) = csv {
        w.flush()?;
    }
    let v = summary.to_json(&ring);
    match &args.summary {
        Some(p) => write_json(p, &v)?,
        None => print_json(&v),
    }
    Ok(())
}

fn run_stats(args: &StatsArgs) -> Result<()> {
    let module = module_from(&args.module)?;
    let cfg = scan_config(&module, &args.deg, &args.lt, args.threads)?;
    let summary = scan(&cfg, |_| Ok(()))?;
    let q = summary.q;
    for d in &summary.degrees {
        let lt: Vec<String> = d
            .lt
            .iter()
            .map(|(t, c)| format!("P[{}]={c} ({:.4})", module.ring().format(t), d.lt_ratio(q, t).unwrap()))
            .collect();
        println!(
            "n={} pi={} cyclic={} ({:.6}) koblitz={} ({:.4}) {}",
            d.n,
            d.pi,
            d.cyclic,
            d.cyclic_ratio(),
            d.koblitz,
            d.koblitz_ratio(q),
            lt.join(" ")
        );
    }
    Ok(())
}

fn run_frob(args: &FrobArgs) -> Result<()> {
    let module = module_from(&args.module)?;
    let ring = module.ring().clone();
    let p = parse(&ring, &args.prime)?;
    check_prime(&ring, &p)?;
    match prime_record(&module, &p) {
        Ok(r) => print_json(&r.to_json(&ring)),
        Err(Error::Unsupported(_)) if module.rank() == 2 => {
            let a = TorsionOracle::new(&module).reconstruct_a_default(&p)?;
            print_json(&json!({
                "prime": ring.format(&p),
                "degree": p.degree(),
                "a_p": ring.format(&a),
                "source": "torsion",
            }));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn check_prime(ring: &PolyRing, p: &PolyA) -> Result<()> {
    if !p.is_monic() {
        return Err(Error::NotMonic(ring.format(p)));
    }
    if !ring.is_irreducible(p)? {
        return Err(Error::NotIrreducible(ring.format(p)));
    }
    Ok(())
}

fn run_torsion(args: &TorsionArgs) -> Result<()> {
    let module = module_from(&args.module)?;
    let ring = module.ring().clone();
    let p = parse(&ring, &args.prime)?;
    check_prime(&ring, &p)?;
    let oracle = TorsionOracle::new(&module);
    let v = match (&args.lambda, module.rank()) {
        (Some(l), 1) => {
            let l = parse(&ring, l)?;
            if module != DrinfeldModule::carlitz(&ring) {
                return Err(Error::Unsupported("rank-1 torsion is only offered for the Carlitz module".into()));
            }
            json!({
                "prime": ring.format(&p),
                "lambda": ring.format(&l),
                "scalar": ring.format(&carlitz_scalar(&ring, &p, &l)?),
                "prime_mod_lambda": ring.format(&ring.rem(&p, &l)?),
            })
        }
        (Some(l), _) => {
            let l = parse(&ring, l)?;
            let fm = oracle.frob_matrix_mod_lambda(&p, &l)?;
            let m: Vec<Vec<String>> = fm
                .matrix
                .iter()
                .map(|row| row.iter().map(|x| ring.format(x)).collect())
                .collect();
            json!({
                "prime": ring.format(&p),
                "lambda": ring.format(&l),
                "tower_degree": fm.tower_degree,
                "matrix": m,
                "trace": ring.format(&fm.trace),
                "det": ring.format(&fm.det),
                "prime_mod_lambda": ring.format(&ring.rem(&p, &l)?),
            })
        }
        (None, _) => {
            let moduli = oracle.default_moduli(&p);
            let a = oracle.reconstruct_a(&p, &moduli)?;
            json!({
                "prime": ring.format(&p),
                "moduli": moduli.iter().map(|l| ring.format(l)).collect::<Vec<_>>(),
                "a_p": ring.format(&a),
            })
        }
    };
    print_json(&v);
    Ok(())
}

fn run_constants(args: &ConstantsArgs) -> Result<()> {
    if args.q < 2 {
        return Err(Error::InvalidArgument("q must be at least 2".into()));
    }
    let c = match args.which {
        Which::Cyclic => const_cyclic(args.q, args.trunc),
        Which::Koblitz => const_koblitz(args.q, args.trunc),
    };
    print_json(&c.to_json());
    Ok(())
}

fn run_check_group(q: u32) -> Result<()> {
    let ring = ring_for(q)?;
    let report = group_report(&ring)?;
    print_json(&serde_json::to_value(&report).map_err(std::io::Error::from)?);
    if !report.all_hold() {
        return Err(Error::Inconsistent("a group verification failed".into()));
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_inconsistent() {
        2
    } else if e.is_io() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Scan(a) => run_scan(a),
        Command::Stats(a) => run_stats(a),
        Command::Frob(a) => run_frob(a),
        Command::Torsion(a) => run_torsion(a),
        Command::Constants(a) => run_constants(a),
        Command::Check {
            what: CheckCommand::Group { q },
        } => run_check_group(*q),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Inconsistent("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
        assert_eq!(exit_code(&Error::parse(0, "x")), 1);
    }

    #[test]
    fn degree_ranges() {
        assert_eq!(parse_degrees("2..8").unwrap(), (2, 8));
        assert_eq!(parse_degrees("2..=8").unwrap(), (2, 8));
        assert_eq!(parse_degrees("5").unwrap(), (5, 5));
        assert!(parse_degrees("a..b").is_err());
    }
}
