//! Command-line front end for the denseness decider.
//!
//! Exit codes: 0 dense (or: check passed), 1 not dense / gate failed,
//! 2 undecided within budgets, 64 usage or parse error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sudense_core::decider::{self, Budget, Verdict, VerdictKind};
use sudense_core::groebner::{self, RatPoly};
use sudense_core::laurent::{parse_poly, MonomialOrder};
use sudense_core::magnus::{xi_eval, PolySystem};
use sudense_core::modular::root_search;
use sudense_core::phyper::qp_oracle;
use sudense_core::words::{parse_basis, SubgroupBasis};

#[derive(Parser)]
#[command(
    name = "sudense",
    version,
    about = "Decides whether a finitely generated subgroup of a free group is dense in the pro-supersolvable topology"
)]
struct Cli {
    /// Worker threads (default: SUDENSE_JOBS, then all logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum OrderFlag {
    #[default]
    Grevlex,
    Lex,
}

impl From<OrderFlag> for MonomialOrder {
    fn from(value: OrderFlag) -> MonomialOrder {
        match value {
            OrderFlag::Grevlex => MonomialOrder::GrevLex,
            OrderFlag::Lex => MonomialOrder::Lex,
        }
    }
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// S-polynomial reduction limit per basis computation.
    #[arg(long, default_value_t = 400_000)]
    groebner_steps: usize,
    /// Wall-clock budget for factoring a certificate constant.
    #[arg(long, default_value_t = 10_000)]
    factor_timeout_ms: u64,
    /// How many ascending odd primes to scan when roots are guaranteed.
    #[arg(long, default_value_t = 64)]
    prime_scan_cap: usize,
    /// Assignment budget for one exhaustive root search.
    #[arg(long, default_value_t = 50_000_000)]
    root_eval_budget: u64,
}

impl BudgetArgs {
    fn to_budget(&self) -> Budget {
        Budget {
            groebner_steps: self.groebner_steps,
            factor_time: Duration::from_millis(self.factor_timeout_ms),
            prime_scan_cap: self.prime_scan_cap,
            root_eval_budget: self.root_eval_budget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide denseness for a word file (`rank d` header, one word per line).
    Decide {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Run only the abelian gate.
    Abdense {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        output: OutputFormat,
    },
    /// Exhaustive quotient-enumeration oracle for each odd prime up to pmax.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = 7)]
        pmax: u64,
    },
    /// Print the semidirect-product embedding of each word.
    Xi { input: PathBuf },
    /// Reduced Groebner basis of an integer polynomial file
    /// (`rank d` header, one polynomial per line).
    Gb {
        input: PathBuf,
        /// Also emit an integer certificate when the variety is empty.
        #[arg(long)]
        certificate: bool,
        #[arg(long, value_enum, default_value_t)]
        order: OrderFlag,
        #[arg(long, default_value_t = 400_000)]
        groebner_steps: usize,
    },
    /// Search a serialized polynomial system for a root modulo a prime.
    Roots {
        input: PathBuf,
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 50_000_000)]
        eval_budget: u64,
    },
    /// Cross-check the decider against the enumeration oracle on a corpus.
    Corpus {
        /// Read corpus entries from a file (blank-line separated word
        /// files) instead of generating them.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Oracle primes: every odd prime up to this bound.
        #[arg(long, default_value_t = 7)]
        pmax: u64,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
}

const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let jobs = cli
        .jobs
        .or_else(|| {
            std::env::var("SUDENSE_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_basis(path: &PathBuf) -> Result<SubgroupBasis> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_basis(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn verdict_exit(kind: VerdictKind) -> ExitCode {
    match kind {
        VerdictKind::Dense => ExitCode::SUCCESS,
        VerdictKind::NotDense | VerdictKind::NotAbDense => ExitCode::from(1),
        VerdictKind::UndecidedAtBudget => ExitCode::from(2),
    }
}

/// Self-contained verdict document: carries the input so witnesses can be
/// re-validated without recomputation.
fn verdict_report(basis: &SubgroupBasis, verdict: &Verdict) -> serde_json::Value {
    json!({
        "schema": 1,
        "rank": basis.rank(),
        "generators": basis.words().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "verdict": verdict.kind,
        "witness": verdict.witness,
        "witness_pending": verdict.witness_pending,
        "ab_witness": verdict.ab_witness,
        "trail": verdict.trail,
    })
}

fn print_verdict(basis: &SubgroupBasis, verdict: &Verdict, output: OutputFormat) {
    match output {
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&verdict_report(basis, verdict)).unwrap()
            );
        }
        OutputFormat::Text => {
            match verdict.kind {
                VerdictKind::Dense => println!("dense"),
                VerdictKind::NotAbDense => {
                    let w = verdict.ab_witness.as_ref().unwrap();
                    println!("not dense (fails the abelian gate at q = {})", w.q);
                    println!("  images of x1..xd in Z/{}Z: {:?}", w.q, w.images);
                }
                VerdictKind::NotDense => match &verdict.witness {
                    Some(w) => {
                        println!("not dense (witness at p = {})", w.p);
                        println!(
                            "  quotient: V_{} x| C with alpha = {}, |C| = {}",
                            basis.rank() - 1,
                            w.alpha,
                            w.m
                        );
                        println!("  c = {:?}, u = {:?}, t = {}", w.c, w.u, w.t);
                    }
                    None => println!("not dense (witness hunt hit a budget; see trail)"),
                },
                VerdictKind::UndecidedAtBudget => {
                    println!("undecided within the configured budgets");
                }
            }
            for rec in &verdict.trail {
                println!(
                    "  branch t={} y0={:?}: variety_empty={:?} a={:?} primes={:?} root={:?}{}",
                    rec.t,
                    rec.y0,
                    rec.variety_empty,
                    rec.certificate_a,
                    rec.primes_tested,
                    rec.root_prime,
                    rec.budget_exhausted
                        .as_ref()
                        .map(|b| format!(" budget: {b}"))
                        .unwrap_or_default()
                );
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Decide {
            input,
            output,
            budgets,
        } => {
            let basis = read_basis(&input)?;
            let verdict = decider::decide(&basis, &budgets.to_budget())?;
            print_verdict(&basis, &verdict, output);
            Ok(verdict_exit(verdict.kind))
        }
        Command::Abdense { input, output } => {
            let basis = read_basis(&input)?;
            let (dense, witness) = decider::ab_dense(&basis);
            match output {
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "schema": 1,
                        "ab_dense": dense,
                        "witness": witness,
                    }))
                    .unwrap()
                ),
                OutputFormat::Text => match &witness {
                    None => println!("abelian-dense"),
                    Some(w) => println!(
                        "not abelian-dense: q = {}, images {:?}",
                        w.q, w.images
                    ),
                },
            }
            Ok(if dense {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Oracle { input, pmax } => {
            let basis = read_basis(&input)?;
            let mut all_hold = true;
            for p in odd_primes_to(pmax) {
                let holds = qp_oracle(&basis, p).map_err(|e| anyhow::anyhow!("{e}"))?;
                all_hold &= holds;
                println!("p = {p}: {}", if holds { "holds" } else { "fails" });
            }
            Ok(if all_hold {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Xi { input } => {
            let basis = read_basis(&input)?;
            if basis.rank() < 2 {
                bail!("the embedding needs rank at least 2");
            }
            for w in basis.words() {
                let img = xi_eval(w).map_err(|e| anyhow::anyhow!("{e}"))?;
                println!("{w}");
                for (j, p) in img.poly().iter().enumerate() {
                    println!("  xi1[{}] = {p}", j + 1);
                }
                println!("  xi2 = {:?}", img.abel());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gb {
            input,
            certificate,
            order,
            groebner_steps,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let (_rank, polys) = parse_poly_file(&text)?;
            let rats: Vec<RatPoly> = polys
                .iter()
                .map(|p| RatPoly::from_laurent(p).map_err(|e| anyhow::anyhow!("{e}")))
                .collect::<Result<_>>()?;
            let gb = groebner::groebner_reduce_with(&rats, order.into(), groebner_steps)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            println!("reduced basis ({} elements, {} order):", gb.generators().len(), match order { OrderFlag::Grevlex => "grevlex", OrderFlag::Lex => "lex" });
            for g in gb.generators() {
                println!("  {g}");
            }
            if certificate {
                if !gb.is_unit_ideal() {
                    println!("variety is nonempty; no certificate");
                    return Ok(ExitCode::from(1));
                }
                let cert = groebner::null_certificate(&polys, order.into(), groebner_steps)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                println!("certificate: a = {}", cert.a);
                for (i, l) in cert.cofactors.iter().enumerate() {
                    println!("  l{} = {l}", i + 1);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Roots {
            input,
            prime,
            eval_budget,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let system = PolySystem::parse(&text).map_err(|e| anyhow::anyhow!("{e}"))?;
            match root_search(&system, prime, eval_budget).map_err(|e| anyhow::anyhow!("{e}"))? {
                Some(root) => {
                    println!("{}", serde_json::to_string_pretty(&root).unwrap());
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("none");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Corpus {
            input,
            count,
            seed,
            pmax,
            budgets,
        } => run_corpus(input, count, seed, pmax, &budgets.to_budget()),
    }
}

fn parse_poly_file(text: &str) -> Result<(usize, Vec<sudense_core::laurent::LaurentPoly>)> {
    let mut rank = None;
    let mut polys = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match rank {
            None => {
                let d = line
                    .strip_prefix("rank")
                    .and_then(|v| v.trim().parse().ok())
                    .context("expected `rank <d>` header")?;
                rank = Some(d);
            }
            Some(d) => polys.push(
                parse_poly(d, line)
                    .map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1))?,
            ),
        }
    }
    let rank = rank.context("missing `rank <d>` header")?;
    if polys.is_empty() {
        bail!("no polynomials in input");
    }
    Ok((rank, polys))
}

fn odd_primes_to(pmax: u64) -> Vec<u64> {
    (3..=pmax)
        .filter(|&p| p % 2 == 1 && (3..p).step_by(2).all(|q| q * q > p || p % q != 0))
        .collect()
}

fn run_corpus(
    input: Option<PathBuf>,
    count: usize,
    seed: u64,
    pmax: u64,
    budget: &Budget,
) -> Result<ExitCode> {
    let entries: Vec<SubgroupBasis> = match input {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            text.split("\n\n")
                .map(str::trim)
                .filter(|block| !block.is_empty())
                .map(|block| parse_basis(block).map_err(|e| anyhow::anyhow!("{e}")))
                .collect::<Result<_>>()?
        }
        None => sudense_core::corpus::generate_corpus(seed, count, 6),
    };
    let primes = odd_primes_to(pmax);
    let mut disagreements = 0usize;
    let mut undecided = 0usize;
    for (idx, basis) in entries.iter().enumerate() {
        let verdict = decider::decide(basis, budget)?;
        let mut status = format!("{:?}", verdict.kind);
        match verdict.kind {
            VerdictKind::Dense => {
                for &p in &primes {
                    if !qp_oracle(basis, p).map_err(|e| anyhow::anyhow!("{e}"))? {
                        status = format!("DISAGREEMENT: dense but the oracle fails at p = {p}");
                        disagreements += 1;
                        break;
                    }
                }
            }
            VerdictKind::NotDense => match &verdict.witness {
                Some(w) => {
                    decider::verify_witness(basis, w)
                        .map_err(|e| anyhow::anyhow!("witness rejected: {e}"))?;
                    if w.p <= pmax && qp_oracle(basis, w.p).map_err(|e| anyhow::anyhow!("{e}"))? {
                        status = format!(
                            "DISAGREEMENT: witness at p = {} but the oracle holds there",
                            w.p
                        );
                        disagreements += 1;
                    }
                }
                None => {
                    undecided += 1;
                    status.push_str(" (witness pending)");
                }
            },
            VerdictKind::NotAbDense => {}
            VerdictKind::UndecidedAtBudget => undecided += 1,
        }
        println!(
            "[{:>3}] d={} e={} -> {}",
            idx,
            basis.rank(),
            basis.len(),
            status
        );
        use std::io::Write;
        let _ = std::io::stdout().flush();
    }
    println!(
        "{} entries, {} disagreements, {} undecided",
        entries.len(),
        disagreements,
        undecided
    );
    Ok(if disagreements > 0 {
        ExitCode::from(1)
    } else if undecided > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}
