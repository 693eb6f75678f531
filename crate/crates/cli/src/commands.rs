//! Subcommand implementations.

use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use equid::charsum::{expsum, invariant_factor_valuation_check, verify_cz_system, verify_weil, BoundReport, OrthogonalityCounter};
use equid::delange::{is_jointly_equidistributed, JointOptions};
use equid::numtheory::is_prime;
use equid::sievelab::experiments::{
    compare_restriction, run_counterexample_4_1, run_counterexample_6_1, run_thm_1_4, ClassReport,
    ExperimentOptions, RestrictedTheorem,
};
use equid::sievelab::{discrepancy, joint_counts, RestrictionSpec};
use equid::vcount::{density, distribution_exact, validate_prop32, ExactCounter};
use equid::{corpus, factor, Error, FactoredModulus, JointCountTable, Limits, PolySystem, SieveRange, SystemFile};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::manifest::Manifest;
use crate::output::{fmt_f64, is_json, parse_list, parse_u64, print_json, write_csv, write_json};
use crate::{limits, Cli, Command, GlobalOpts};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(io::Error),
    /// Exit status of a replayed invocation.
    Exit(u8),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn precondition(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Precondition(msg.into()))
}

/// Reads a system file; `corpus:NAME` selects a shipped system.
fn load_system(spec: &str) -> CliResult<SystemFile> {
    if let Some(name) = spec.strip_prefix("corpus:") {
        return corpus::get(name).ok_or_else(|| {
            let known: Vec<_> = corpus::names().collect();
            precondition(format!("unknown corpus system {name:?}; known: {}", known.join(", ")))
        });
    }
    let text = std::fs::read_to_string(spec).map_err(|e| precondition(format!("{spec}: {e}")))?;
    Ok(SystemFile::from_json(&text)?)
}

fn dry_run(command: &str) -> CliResult {
    print_json(&json!({ "dry_run": true, "command": command, "valid": true }))?;
    Ok(())
}

fn list_arg<T: std::str::FromStr>(name: &str, text: &str) -> CliResult<Vec<T>> {
    parse_list(text).map_err(|e| precondition(format!("--{name}: {e}")))
}

fn check_len(name: &str, v: &[u64], m: usize) -> CliResult {
    if v.len() != m {
        return Err(precondition(format!("--{name} has {} entries for {m} functions", v.len())));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::Check(a) => check(a, g),
        Command::Charsum(a) => charsum(a, g),
        Command::Vcount(a) => vcount(a, g),
        Command::Count(a) => count(a, g),
        Command::Experiment(a) => experiment(a, g),
        Command::Snf(a) => snf(a, g),
        Command::Manifest(a) => replay(a, g),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, value_parser = parse_u64)]
    pub q: u64,
    /// Enumerate all combinations even when the shortcut applies.
    #[arg(long)]
    pub force_slow: bool,
}

fn check(a: &CheckArgs, g: &GlobalOpts) -> CliResult {
    let sys = load_system(&a.system)?;
    let fq = factor(a.q)?;
    let opts = JointOptions {
        force_slow: a.force_slow,
        limits: limits(g)?,
    };
    if g.dry_run {
        return dry_run("check");
    }
    let verdict = is_jointly_equidistributed(&sys.functions, &fq, &opts)?;
    print_json(&verdict)?;
    if let Some(out) = &g.out {
        write_json(out, &verdict)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SnfArgs {
    #[arg(long)]
    pub system: String,
}

fn snf(a: &SnfArgs, g: &GlobalOpts) -> CliResult {
    let sys = load_system(&a.system)?;
    let ps = sys.poly_system()?;
    if g.dry_run {
        return dry_run("snf");
    }
    let c1 = ps.c1().map(|c| c.to_string());
    let value = json!({ "system": ps, "C1": c1 });
    print_json(&value)?;
    if let Some(out) = &g.out {
        write_json(out, &value)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CharsumSweep {
    /// Weil bound over every nonzero tuple modulo a prime.
    Weil,
    /// Cochrane–Zheng bound over every primitive tuple modulo a prime power.
    Cz,
    /// Invariant-factor valuation bound on sampled tuples, for primes up to --mod.
    Valuation,
}

#[derive(Debug, Args)]
pub struct CharsumArgs {
    #[arg(long)]
    pub system: String,
    /// Modulus of the sum (a prime bound for `--sweep valuation`).
    #[arg(long = "mod", alias = "q", value_parser = parse_u64)]
    pub modulus: u64,
    /// Coefficients `r_1,...,r_M` of a single sum.
    #[arg(long, allow_hyphen_values = true)]
    pub tuple: Option<String>,
    #[arg(long, value_enum)]
    pub sweep: Option<CharsumSweep>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn bound_rows(report: &BoundReport) -> impl Iterator<Item = Vec<String>> + '_ {
    report.rows.iter().map(|r| {
        let tuple: Vec<String> = r.tuple.iter().map(u64::to_string).collect();
        vec![
            r.modulus.to_string(),
            tuple.join(";"),
            fmt_f64(r.abs_z),
            fmt_f64(r.bound),
            fmt_f64(r.ratio),
        ]
    })
}

fn finish_bound_report(report: &BoundReport, name: &str, out: Option<&Path>) -> CliResult {
    let summary = json!({
        "sweep": name,
        "modulus": report.modulus,
        "checked": report.checked,
        "skipped": report.skipped.len(),
        "max_ratio": report.max_ratio,
        "argmax": report.argmax,
        "violations": report.violations.len(),
        "holds": report.holds(),
    });
    print_json(&summary)?;
    if let Some(out) = out {
        if is_json(out) {
            write_json(out, report)?;
        } else {
            let header: Vec<String> = ["modulus", "tuple", "abs_z", "bound", "ratio"].map(String::from).to_vec();
            write_csv(out, None, &header, bound_rows(report))?;
        }
    }
    if !report.holds() {
        return Err(Error::Inconsistency(format!(
            "{name} bound exceeded for {} tuples modulo {}",
            report.violations.len(),
            report.modulus
        ))
        .into());
    }
    Ok(())
}

fn charsum(a: &CharsumArgs, g: &GlobalOpts) -> CliResult {
    let sys = load_system(&a.system)?;
    let ps = sys.poly_system()?;
    let lim = limits(g)?;
    let fm = factor(a.modulus)?;
    match (a.sweep, &a.tuple) {
        (None, None) | (Some(_), Some(_)) => Err(precondition("give exactly one of --tuple and --sweep")),
        (None, Some(text)) => {
            let raw: Vec<i64> = list_arg("tuple", text)?;
            let m = a.modulus as i64;
            let tuple: Vec<u64> = raw.iter().map(|r| r.rem_euclid(m) as u64).collect();
            check_len("tuple", &tuple, ps.len())?;
            if g.dry_run {
                return dry_run("charsum");
            }
            let z = expsum::<f64>(&ps, &tuple, &fm)?;
            let value = json!({
                "modulus": z.modulus,
                "tuple": z.tuple,
                "re": z.value.re,
                "im": z.value.im,
                "abs": z.value.norm(),
                "abs_error_bound": z.abs_error_bound,
            });
            print_json(&value)?;
            if let Some(out) = &g.out {
                write_json(out, &value)?;
            }
            Ok(())
        }
        (Some(CharsumSweep::Weil), None) => {
            if !is_prime(a.modulus) {
                return Err(Error::NotPrime(a.modulus).into());
            }
            if g.dry_run {
                return dry_run("charsum");
            }
            let report = verify_weil(&ps, a.modulus)?;
            finish_bound_report(&report, "weil", g.out.as_deref())
        }
        (Some(CharsumSweep::Cz), None) => {
            if !fm.is_prime_power() {
                return Err(precondition(format!("{} is not a prime power", a.modulus)));
            }
            let pp = fm.factors()[0];
            if g.dry_run {
                return dry_run("charsum");
            }
            let report = verify_cz_system(&ps, pp.prime, pp.exp, &lim)?;
            finish_bound_report(&report, "cochrane_zheng", g.out.as_deref())
        }
        (Some(CharsumSweep::Valuation), None) => {
            if g.dry_run {
                return dry_run("charsum");
            }
            valuation_sweep(&ps, a, g.out.as_deref())
        }
    }
}

fn valuation_sweep(ps: &PolySystem, a: &CharsumArgs, out: Option<&Path>) -> CliResult {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let primes: Vec<u64> = (2..=a.modulus).filter(|&p| is_prime(p)).collect();
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for _ in 0..a.samples {
        let tuple: Vec<u64> = (0..ps.len()).map(|_| rng.gen_range(1..1_000_000)).collect();
        for &ell in primes.iter().filter(|&&l| tuple.iter().any(|&r| r % l != 0)) {
            let ok = invariant_factor_valuation_check(ps, ell, &tuple)?;
            failures += usize::from(!ok);
            let t: Vec<String> = tuple.iter().map(u64::to_string).collect();
            rows.push(vec![ell.to_string(), t.join(";"), ok.to_string()]);
        }
    }
    print_json(&json!({
        "sweep": "valuation",
        "prime_bound": a.modulus,
        "seed": a.seed,
        "checked": rows.len(),
        "failures": failures,
    }))?;
    if let Some(out) = out {
        let header: Vec<String> = ["prime", "tuple", "holds"].map(String::from).to_vec();
        write_csv(out, None, &header, rows)?;
    }
    if failures > 0 {
        return Err(Error::Inconsistency(format!("valuation bound failed for {failures} checks")).into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    /// Prime-power convolution assembled by CRT.
    Exact,
    /// Orthogonality over all exponential sums.
    Orthogonality,
}

#[derive(Debug, Args)]
pub struct VcountArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, value_parser = parse_u64)]
    pub q: u64,
    /// Number of unit slots.
    #[arg(long = "N")]
    pub n: u32,
    /// Target residues `w_1,...,w_M`.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<String>,
    /// Write every target's count.
    #[arg(long)]
    pub full_table: bool,
    #[arg(long, value_enum, default_value_t = CountMethod::Exact)]
    pub method: CountMethod,
    /// Small-prime cutoff `C` for the main-term comparison.
    #[arg(long, requires = "r")]
    pub c: Option<u64>,
    /// Exponent cap `R` for the main-term comparison.
    #[arg(long, requires = "c")]
    pub r: Option<u32>,
}

fn vcount(a: &VcountArgs, g: &GlobalOpts) -> CliResult {
    let sys = load_system(&a.system)?;
    let ps = sys.poly_system()?;
    let fq = factor(a.q)?;
    let lim = limits(g)?;
    let w = match &a.w {
        Some(text) => {
            let raw: Vec<i64> = list_arg("w", text)?;
            let w: Vec<u64> = raw.iter().map(|x| x.rem_euclid(a.q as i64) as u64).collect();
            check_len("w", &w, ps.len())?;
            Some(w)
        }
        None => None,
    };
    if w.is_none() && !a.full_table {
        return Err(precondition("give --w or --full-table"));
    }
    if g.dry_run {
        return dry_run("vcount");
    }
    if a.full_table {
        return vcount_table(&ps, a.n, &fq, &lim, g.out.as_deref());
    }
    let w = w.expect("checked above");
    if let (Some(c), Some(r)) = (a.c, a.r) {
        let report = validate_prop32(&ps, a.n, &fq, &w, c, r, &lim)?;
        print_json(&report)?;
        if let Some(out) = &g.out {
            write_json(out, &report)?;
        }
        return Ok(());
    }
    let count: u128 = match a.method {
        CountMethod::Exact => ExactCounter::new(&ps, a.n, &fq, &lim)?.count(&w)?,
        CountMethod::Orthogonality => OrthogonalityCounter::<f64>::new(&ps, &fq, &lim)?.count(a.n, &w)? as u128,
    };
    let dens = density(count, &fq, a.n);
    let value = json!({
        "q": a.q,
        "N": a.n,
        "w": w,
        "count": count.to_string(),
        "density": dens.to_string(),
        "density_f64": dens.to_f64(),
        "method": format!("{:?}", a.method).to_lowercase(),
    });
    print_json(&value)?;
    if let Some(out) = &g.out {
        write_json(out, &value)?;
    }
    Ok(())
}

fn vcount_table(ps: &PolySystem, n: u32, fq: &FactoredModulus, lim: &Limits, out: Option<&Path>) -> CliResult {
    let dist = distribution_exact(ps, n, fq, lim)?;
    print_json(&json!({
        "q": fq.q(),
        "N": n,
        "total": dist.total().to_string(),
        "max": dist.max().to_string(),
    }))?;
    if let Some(out) = out {
        let mut header: Vec<String> = (1..=ps.len()).map(|i| format!("w_{i}")).collect();
        header.push("count".into());
        let rows = dist.iter().map(|(w, c)| {
            let mut row: Vec<String> = w.iter().map(u64::to_string).collect();
            row.push(c.to_string());
            row
        });
        write_csv(out, None, &header, rows)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, value_parser = parse_u64)]
    pub q: u64,
    #[arg(long, value_parser = parse_u64)]
    pub x: u64,
    /// `none`, `pk:K` or `convenient`.
    #[arg(long, default_value = "none")]
    pub restrict: String,
}

fn write_count_table(path: &Path, table: &JointCountTable) -> io::Result<()> {
    let meta = [
        ("x", table.x.to_string()),
        ("q", table.q.to_string()),
        ("restriction", table.restriction.to_string()),
        ("total", table.total_restricted.to_string()),
    ];
    let mut header: Vec<String> = (1..=table.dims).map(|i| format!("b_{i}")).collect();
    header.push("count".into());
    let rows = table.counts.iter().enumerate().map(|(idx, c)| {
        let mut row: Vec<String> = table.class(idx).iter().map(u64::to_string).collect();
        row.push(c.to_string());
        row
    });
    write_csv(path, Some(&meta), &header, rows)
}

fn count(a: &CountArgs, g: &GlobalOpts) -> CliResult {
    let sys = load_system(&a.system)?;
    let spec: RestrictionSpec = a.restrict.parse()?;
    let lim = limits(g)?;
    if a.q < 2 {
        return Err(Error::ModulusTooSmall(a.q).into());
    }
    if a.x > lim.sieve_max_x {
        return Err(Error::BudgetExceeded {
            what: "sieve bound",
            required: a.x as u128,
            limit: lim.sieve_max_x as u128,
        }
        .into());
    }
    if g.dry_run {
        return dry_run("count");
    }
    let restriction = spec.resolve(a.x);
    let sieve = SieveRange::with_limits(a.x, &lim)?;
    let table = joint_counts(&sys.functions, a.q, a.x, restriction, &sieve, &lim)?;
    if let Some(out) = &g.out {
        if is_json(out) {
            write_json(out, &table)?;
        } else {
            write_count_table(out, &table)?;
        }
    }
    let report = discrepancy(&table)?;
    print_json(&report)?;
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    /// Discrepancy with and without `P_{MD+1}(n) > q`.
    #[value(name = "thm1.2")]
    Thm12,
    /// Discrepancy with and without `P_{2M}(n) > q`, squarefree `q`.
    #[value(name = "thm1.3")]
    Thm13,
    /// Prime inputs forcing the zero class for `G, G^2, ..., G^M`.
    #[value(name = "cex4.1")]
    Cex41,
    /// Two-prime inputs forcing the zero class for `(T, T^3)`.
    #[value(name = "cex6.1")]
    Cex61,
    /// Shifted linear dependence forcing the last residue.
    #[value(name = "thm1.4")]
    Thm14,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, value_parser = parse_u64)]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_u64, default_value = "1e7")]
    pub x: u64,
    /// Range `LO:HI` of moduli for thm1.2 and thm1.3.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Number of powers for cex4.1.
    #[arg(long = "M", default_value_t = 2)]
    pub m: usize,
    /// Number of large primes for thm1.4.
    #[arg(long = "R", default_value_t = 3)]
    pub r: u32,
    /// Coefficients `a_1,...,a_{M-1}` for thm1.4.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Targets `b_1,...,b_{M-1}` for thm1.4.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// `K` in `q ≤ (log x)^K`.
    #[arg(long, default_value_t = 2.0)]
    pub log_power: f64,
}

fn parse_sweep(text: &str) -> CliResult<(u64, u64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| precondition(format!("--sweep {text:?} is not LO:HI")))?;
    let lo = parse_u64(lo).map_err(precondition)?;
    let hi = parse_u64(hi).map_err(precondition)?;
    if lo < 2 || hi < lo {
        return Err(precondition(format!("--sweep {text:?} needs 2 ≤ LO ≤ HI")));
    }
    Ok((lo, hi))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    q: u64,
    restriction: String,
    total_unrestricted: u64,
    max_rel_dev_unrestricted: f64,
    total_restricted: u64,
    /// `None` when no input passes the restriction.
    max_rel_dev_restricted: Option<f64>,
}

fn write_class_report(out: Option<&Path>, report: &ClassReport, json_value: &impl Serialize) -> CliResult {
    print_json(json_value)?;
    if let Some(out) = out {
        if is_json(out) {
            write_json(out, json_value)?;
        } else {
            write_count_table(out, &report.table)?;
        }
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs, g: &GlobalOpts) -> CliResult {
    let lim = limits(g)?;
    let opts = ExperimentOptions {
        log_power: a.log_power,
        limits: lim.clone(),
    };
    let system = a.system.as_deref().map(load_system).transpose()?;
    let need_system = || system.as_ref().ok_or_else(|| precondition("this experiment needs --system"));
    let need_q = || a.q.ok_or_else(|| precondition("this experiment needs --q"));
    if a.x > lim.sieve_max_x {
        return Err(Error::BudgetExceeded {
            what: "sieve bound",
            required: a.x as u128,
            limit: lim.sieve_max_x as u128,
        }
        .into());
    }
    match a.name {
        ExperimentName::Thm12 | ExperimentName::Thm13 => {
            let sys = need_system()?;
            let (lo, hi, sweeping) = match (&a.sweep, a.q) {
                (Some(s), _) => {
                    let (lo, hi) = parse_sweep(s)?;
                    (lo, hi, true)
                }
                (None, Some(q)) => (q, q, false),
                (None, None) => return Err(precondition("give --q or --sweep")),
            };
            if g.dry_run {
                return dry_run("experiment");
            }
            let theorem = if a.name == ExperimentName::Thm12 {
                RestrictedTheorem::GeneralModulus
            } else {
                RestrictedTheorem::SquarefreeModulus
            };
            let sieve = SieveRange::with_limits(a.x, &lim)?;
            let ps = sys.poly_system()?;
            let mut rows = Vec::new();
            for q in lo..=hi {
                let restriction = match theorem.restriction(&ps, q) {
                    Ok(r) => r,
                    Err(_) if sweeping => continue,
                    Err(e) => return Err(e.into()),
                };
                let row = match compare_restriction(&sys.functions, theorem, q, a.x, &sieve, &opts) {
                    Ok(c) => SweepRow {
                        q,
                        restriction: restriction.to_string(),
                        total_unrestricted: c.unrestricted.total,
                        max_rel_dev_unrestricted: c.unrestricted.max_rel_dev,
                        total_restricted: c.restricted.total,
                        max_rel_dev_restricted: Some(c.restricted.max_rel_dev),
                    },
                    Err(Error::EmptyTable) => {
                        let plain = joint_counts(&sys.functions, q, a.x, equid::Restriction::None, &sieve, &lim)?;
                        SweepRow {
                            q,
                            restriction: restriction.to_string(),
                            total_unrestricted: plain.total_restricted,
                            max_rel_dev_unrestricted: discrepancy(&plain)?.max_rel_dev,
                            total_restricted: 0,
                            max_rel_dev_restricted: None,
                        }
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push(row);
            }
            print_json(&rows)?;
            if let Some(out) = &g.out {
                if is_json(out) {
                    write_json(out, &rows)?;
                } else {
                    let header: Vec<String> = [
                        "q",
                        "restriction",
                        "total_unrestricted",
                        "max_rel_dev_unrestricted",
                        "total_restricted",
                        "max_rel_dev_restricted",
                    ]
                    .map(String::from)
                    .to_vec();
                    let name = a.name.to_possible_value().expect("named variant");
                    let meta = [("x", a.x.to_string()), ("experiment", name.get_name().to_string())];
                    let csv_rows = rows.iter().map(|r| {
                        vec![
                            r.q.to_string(),
                            r.restriction.clone(),
                            r.total_unrestricted.to_string(),
                            fmt_f64(r.max_rel_dev_unrestricted),
                            r.total_restricted.to_string(),
                            r.max_rel_dev_restricted.map(fmt_f64).unwrap_or_default(),
                        ]
                    });
                    write_csv(out, Some(&meta), &header, csv_rows)?;
                }
            }
            Ok(())
        }
        ExperimentName::Cex41 => {
            let sys = need_system()?;
            let q = need_q()?;
            let [f] = sys.functions.as_slice() else {
                return Err(precondition("cex4.1 takes a system with exactly one function G"));
            };
            if g.dry_run {
                return dry_run("experiment");
            }
            let sieve = SieveRange::with_limits(a.x, &lim)?;
            let r = run_counterexample_4_1(f.poly(), f.rule().clone(), a.m, q, a.x, &sieve, &opts)?;
            write_class_report(g.out.as_deref(), &r, &r)
        }
        ExperimentName::Cex61 => {
            let q = need_q()?;
            if g.dry_run {
                return dry_run("experiment");
            }
            let sieve = SieveRange::with_limits(a.x, &lim)?;
            let r = run_counterexample_6_1(q, a.x, &sieve, &opts)?;
            write_class_report(g.out.as_deref(), &r, &r)
        }
        ExperimentName::Thm14 => {
            let sys = need_system()?;
            let q = need_q()?;
            let Some((last, first)) = sys.functions.split_last() else {
                return Err(Error::EmptySystem.into());
            };
            let coeffs: Vec<i64> = list_arg("a", a.a.as_deref().ok_or_else(|| precondition("thm1.4 needs --a"))?)?;
            let targets: Vec<i64> = match &a.b {
                Some(t) => list_arg("b", t)?,
                None => vec![0; first.len()],
            };
            if g.dry_run {
                return dry_run("experiment");
            }
            let sieve = SieveRange::with_limits(a.x, &lim)?;
            let r = run_thm_1_4(first, &coeffs, last, a.r, &targets, q, a.x, &sieve, &opts)?;
            write_class_report(g.out.as_deref(), &r.class, &r)
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ManifestArgs {
    /// Manifest written by `--manifest-out`.
    pub path: PathBuf,
}

fn replay(a: &ManifestArgs, g: &GlobalOpts) -> CliResult {
    let m = Manifest::read(&a.path)?;
    if m.command == "manifest" {
        return Err(precondition("a manifest cannot replay another manifest"));
    }
    if g.dry_run {
        print_json(&m)?;
        return Ok(());
    }
    match crate::run(m.to_argv()) {
        0 => Ok(()),
        code => Err(CliError::Exit(code)),
    }
}
