//! Command-line front end: build construction terms, verify them by brute
//! force, print boosting-bound tables, classify order statistics, and
//! simulate the med_3 cascade.
//!
//! Exit codes: 0 on success (and verification pass), 1 on verification
//! failure, 2 on usage, parse or budget errors.
//!
//! Variable indices are 0-based in the serialized S-expression format and
//! 1-based in human-readable messages. Function tables and tuple spaces are
//! enumerated in lexicographic order, with the first tuple component as the
//! most significant mixed-radix digit.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use clonekit::chain::{ChainTuple, ChainValue, FunctionTable};
use clonekit::constructions::{
    self, boosting_bound_with_steps, classify_mnk, plan_medk_from_medn, Classification, HalfMedian,
};
use clonekit::error::Error;
use clonekit::term::{oracle_symbols, parse_term, print_term, OracleBindings, Symbol, Term};
use clonekit::verify::{
    check_majority_property, exhaustive_equal, make_adversarial_majority, simulate_cascade,
    Verdict, VerificationReport,
};

#[derive(Parser)]
#[command(
    name = "clonekit",
    version,
    about = "median/majority clone constructions over finite chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Max unique term DAG nodes a construction may materialize.
    #[arg(
        long,
        global = true,
        env = "CLONEKIT_NODE_BUDGET",
        default_value_t = 1_000_000
    )]
    node_budget: u64,

    /// Max tuples per exhaustive scan.
    #[arg(
        long,
        global = true,
        env = "CLONEKIT_EVAL_BUDGET",
        default_value_t = 100_000_000
    )]
    eval_budget: u64,

    /// Max cascade tuple width.
    #[arg(
        long,
        global = true,
        env = "CLONEKIT_WIDTH_BUDGET",
        default_value_t = 1_000_000
    )]
    width_budget: u64,

    /// Worker threads for exhaustive scans.
    #[arg(long, global = true, env = "CLONEKIT_WORKERS", default_value_t = 1)]
    workers: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction term (or plan) and print or save it.
    Build {
        #[command(subcommand)]
        construction: Build,
        /// Write the term or plan here instead of stdout.
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
    /// Check a serialized term against a reference, exhaustively.
    Verify(VerifyArgs),
    /// Print the cascade bound table for an odd arity.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = constructions::DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Classify m^n_k as minimal or exhibit a min_2/max_2 witness.
    Classify {
        #[arg(long, required_unless_present = "table", conflicts_with = "table")]
        n: Option<u64>,
        #[arg(long, requires = "n", conflicts_with = "table")]
        k: Option<u64>,
        /// Print the full grid for all n up to this bound.
        #[arg(long)]
        table: Option<u64>,
    },
    /// Simulate the med_3 cascade and report median frequencies.
    CascadeSim {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        steps: usize,
        /// `distinct`, `constant`, or a comma-separated value list.
        #[arg(long, default_value = "distinct")]
        start: String,
    },
}

#[derive(Subcommand)]
enum Build {
    /// med_k by identification of variables in med_n (n almost divisible by k).
    IdentifyMedian {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// med_3 out of med_n, the (n-1)/2 repetition form.
    Med3FromMedn {
        #[arg(long)]
        n: u64,
    },
    /// Ternary majority out of an n-ary majority oracle.
    Maj3FromMajn {
        #[arg(long)]
        n: u64,
    },
    /// n-ary (even) majority out of an (n+1)-ary majority oracle.
    EvenMajorityFromOdd {
        #[arg(long)]
        n: u64,
    },
    /// n-ary majority as a depth-three term over an (n-2)-ary oracle.
    BoostMajorityByTwo {
        #[arg(long)]
        n: u64,
    },
    /// k-ary majority out of an n-ary majority oracle, any arities >= 3.
    MajorityAnyArity {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// med_3 out of the lower or upper median of even arity n >= 6.
    Med3FromHalfMedian {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Half::Lower)]
        which: Half,
    },
    /// min_2 or max_2 out of a non-minimal m^n_k.
    NonminimalityWitness {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// All med_3 selections from a width-m tuple, lexicographic.
    CascadeStep {
        #[arg(long)]
        m: u64,
    },
    /// Staged plan for med_k out of med_n.
    Plan {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Half {
    Lower,
    Upper,
}

#[derive(Args)]
struct VerifyArgs {
    /// Path to a serialized term.
    term: PathBuf,
    /// `med:<k>`, `mnk:<n>:<k>`, or `majority`.
    #[arg(long)]
    reference: String,
    /// Chain sizes to scan.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2u8, 3, 4])]
    chains: Vec<u8>,
    /// `true` for the order-statistic majority, or `adversarial:<seed>`.
    #[arg(long, default_value = "true")]
    oracle: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Build {
            construction,
            output,
        } => cmd_build(cli, construction, output.as_deref()),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Bound { n, max_steps } => cmd_bound(cli, *n, *max_steps),
        Command::Classify { n, k, table } => cmd_classify(cli, *n, *k, *table),
        Command::CascadeSim { n, steps, start } => cmd_cascade_sim(cli, *n, *steps, start),
    }
}

fn emit(output: Option<&std::path::Path>, content: &str) -> Result<(), Error> {
    match output {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            writeln!(f, "{content}")?;
        }
        None => println!("{content}"),
    }
    Ok(())
}

fn emit_term(cli: &Cli, output: Option<&std::path::Path>, term: &Term) -> Result<ExitCode, Error> {
    let stats = term.stats();
    if cli.format == Format::Json {
        let value = serde_json::json!({
            "term": print_term(term),
            "stats": {
                "arity": stats.arity,
                "node_count": stats.node_count,
                "depth": stats.depth,
            },
        });
        emit(output, &serde_json::to_string_pretty(&value).unwrap())?;
    } else {
        emit(output, &print_term(term))?;
        eprintln!(
            "arity {} | unique nodes {} | depth {}",
            stats.arity, stats.node_count, stats.depth
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_build(
    cli: &Cli,
    construction: &Build,
    output: Option<&std::path::Path>,
) -> Result<ExitCode, Error> {
    let maj_oracle = |arity: u64| Symbol::oracle("maj", arity as usize);
    match construction {
        Build::IdentifyMedian { n, k } => {
            emit_term(cli, output, &constructions::identify_median(*n, *k)?)
        }
        Build::Med3FromMedn { n } => emit_term(cli, output, &constructions::med3_from_medn(*n)?),
        Build::Maj3FromMajn { n } => emit_term(
            cli,
            output,
            &constructions::maj3_from_majn(&maj_oracle(*n)?)?,
        ),
        Build::EvenMajorityFromOdd { n } => emit_term(
            cli,
            output,
            &constructions::even_majority_from_odd(&maj_oracle(*n + 1)?)?,
        ),
        Build::BoostMajorityByTwo { n } => {
            if *n < 5 {
                return Err(Error::NotApplicable(format!(
                    "boosting needs a target arity >= 5, got {n}"
                )));
            }
            emit_term(
                cli,
                output,
                &constructions::boost_majority_by_two(&maj_oracle(*n - 2)?)?,
            )
        }
        Build::MajorityAnyArity { n, k } => emit_term(
            cli,
            output,
            &constructions::majority_any_arity(&maj_oracle(*n)?, *k, cli.node_budget)?,
        ),
        Build::Med3FromHalfMedian { n, which } => {
            let which = match which {
                Half::Lower => HalfMedian::Lower,
                Half::Upper => HalfMedian::Upper,
            };
            emit_term(
                cli,
                output,
                &constructions::med3_from_half_median(*n, which)?,
            )
        }
        Build::NonminimalityWitness { n, k } => {
            let (term, kind) = constructions::nonminimality_witness(*n, *k)?;
            eprintln!("witness for {kind}_2");
            emit_term(cli, output, &term)
        }
        Build::CascadeStep { m } => {
            let terms = constructions::cascade_step_term(*m, cli.node_budget)?;
            let text = terms.iter().map(print_term).collect::<Vec<_>>().join("\n");
            emit(output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Build::Plan { n, k } => {
            let plan = plan_medk_from_medn(*n, *k, cli.node_budget)?;
            emit(output, &serde_json::to_string_pretty(&plan).unwrap())?;
            if cli.format == Format::Text {
                for stage in &plan.stages {
                    if !stage.materializable {
                        eprintln!(
                            "stage over node budget ({}): not materializable",
                            cli.node_budget
                        );
                        break;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

enum OracleChoice {
    TrueMajority,
    Adversarial(u64),
}

fn parse_oracle_choice(spec: &str) -> Result<OracleChoice, Error> {
    if spec == "true" {
        return Ok(OracleChoice::TrueMajority);
    }
    if let Some(seed) = spec.strip_prefix("adversarial:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad seed in `{spec}`")))?;
        return Ok(OracleChoice::Adversarial(seed));
    }
    Err(Error::InvalidParameter(format!(
        "oracle must be `true` or `adversarial:<seed>`, got `{spec}`"
    )))
}

fn print_report(cli: &Cli, report: &VerificationReport) {
    if cli.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(report).unwrap());
        return;
    }
    match &report.verdict {
        Verdict::Pass => println!(
            "PASS: {} tuples on chains {:?} ({:.1?})",
            report.tuples_checked, report.chain_sizes, report.elapsed
        ),
        Verdict::Fail { counterexample } => {
            println!(
                "FAIL after {} tuples: {counterexample:?}",
                report.tuples_checked
            )
        }
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.term)?;
    let term = parse_term(text.trim())?;
    let choice = parse_oracle_choice(&args.oracle)?;
    let symbols = oracle_symbols(&term);
    let bind = move |d: u8| -> Result<OracleBindings, Error> {
        let mut bindings = OracleBindings::new();
        for s in &symbols {
            if let Symbol::Oracle { name, arity } = s {
                let table = match choice {
                    OracleChoice::TrueMajority => FunctionTable::true_majority(*arity, d)?,
                    OracleChoice::Adversarial(seed) => {
                        make_adversarial_majority(*arity, d, seed)?.table
                    }
                };
                bindings = bindings.bind(name, table);
            }
        }
        Ok(bindings)
    };

    let report = if args.reference == "majority" {
        check_majority_property(&term, &args.chains, &bind, cli.workers, cli.eval_budget)?
    } else if let Some(k) = args.reference.strip_prefix("med:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad reference `{}`", args.reference)))?;
        if k.is_multiple_of(2) {
            return Err(Error::EvenArity(k));
        }
        exhaustive_equal(
            &term,
            k,
            k.div_ceil(2),
            &args.chains,
            &bind,
            cli.workers,
            cli.eval_budget,
        )?
    } else if let Some(rest) = args.reference.strip_prefix("mnk:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let parse = |s: &str| -> Result<usize, Error> {
            s.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad reference `{}`", args.reference)))
        };
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "bad reference `{}`",
                args.reference
            )));
        }
        let (n, k) = (parse(parts[0])?, parse(parts[1])?);
        exhaustive_equal(
            &term,
            n,
            k,
            &args.chains,
            &bind,
            cli.workers,
            cli.eval_budget,
        )?
    } else {
        return Err(Error::InvalidParameter(format!(
            "reference must be med:<k>, mnk:<n>:<k> or majority, got `{}`",
            args.reference
        )));
    };

    print_report(cli, &report);
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bound(cli: &Cli, n: u64, max_steps: usize) -> Result<ExitCode, Error> {
    let bs = boosting_bound_with_steps(n, max_steps)?;
    if cli.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&bs).unwrap());
        return Ok(ExitCode::SUCCESS);
    }
    println!("{:>3}  {:<40} {:<40} r_j", "j", "n_j", "k_j");
    for j in 0..bs.n_seq.len() {
        println!(
            "{j:>3}  {:<40} {:<40} {}/{}",
            bs.n_seq[j],
            bs.k_seq[j],
            bs.r_seq[j].numer(),
            bs.r_seq[j].denom()
        );
    }
    println!("b = {}", bs.bound);
    if bs.bound.to_u64() == Some(1) {
        println!("degenerate: the width-3 cascade collapses; med_3 itself is already available");
    }
    for j in &bs.integrality_warnings {
        eprintln!("warning: k_{j} is not an integer");
    }
    Ok(ExitCode::SUCCESS)
}

fn classification_line(n: u64, k: u64) -> Result<String, Error> {
    Ok(match classify_mnk(n, k)? {
        Classification::Minimal(kind) => format!("m^{n}_{k}: minimal ({kind})"),
        Classification::NotMinimal { witness, kind } => {
            format!(
                "m^{n}_{k}: not minimal; {kind}_2 = {}",
                print_term(&witness)
            )
        }
    })
}

fn cmd_classify(
    cli: &Cli,
    n: Option<u64>,
    k: Option<u64>,
    table: Option<u64>,
) -> Result<ExitCode, Error> {
    let mut pairs = Vec::new();
    if let Some(n_max) = table {
        for n in 2..=n_max {
            for k in 1..=n {
                pairs.push((n, k));
            }
        }
    } else {
        let n = n.ok_or_else(|| Error::InvalidParameter("--n required".into()))?;
        let k = k.ok_or_else(|| Error::InvalidParameter("--k required".into()))?;
        pairs.push((n, k));
    }
    if cli.format == Format::Json {
        let mut rows = Vec::new();
        for (n, k) in pairs {
            let row = match classify_mnk(n, k)? {
                Classification::Minimal(kind) => serde_json::json!({
                    "n": n, "k": k, "minimal": true, "kind": kind.to_string(),
                }),
                Classification::NotMinimal { witness, kind } => serde_json::json!({
                    "n": n, "k": k, "minimal": false,
                    "generates": format!("{kind}_2"),
                    "witness": print_term(&witness),
                }),
            };
            rows.push(row);
        }
        println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    } else {
        for (n, k) in pairs {
            println!("{}", classification_line(n, k)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_cascade_sim(cli: &Cli, n: u64, steps: usize, start: &str) -> Result<ExitCode, Error> {
    let start_tuple = match start {
        "distinct" => ChainTuple::new(n.min(255) as u8, (0..n as u8).map(ChainValue).collect())?,
        "constant" => ChainTuple::new(1, vec![ChainValue(0); n as usize])?,
        list => {
            let values: Vec<u8> = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad start value `{s}`")))
                })
                .collect::<Result<_, _>>()?;
            let d = values.iter().max().copied().unwrap_or(0) + 1;
            ChainTuple::from_indices(d, &values)?
        }
    };
    if start_tuple.arity() as u64 != n {
        return Err(Error::InvalidParameter(format!(
            "start tuple has {} components, expected {n}",
            start_tuple.arity()
        )));
    }
    let trace = simulate_cascade(&start_tuple, steps, cli.width_budget)?;
    let lower_bounds: Vec<Option<String>> = match boosting_bound_with_steps(n, steps.max(1)) {
        Ok(bs) => (0..=steps)
            .map(|j| bs.k_seq.get(j).map(|k| k.to_string()))
            .collect(),
        Err(_) => vec![None; steps + 1],
    };
    if cli.format == Format::Json {
        let rows: Vec<_> = (0..=steps)
            .map(|j| {
                serde_json::json!({
                    "step": j,
                    "width": trace.tuples[j].arity(),
                    "median_count": trace.median_counts[j],
                    "below": trace.balance[j].0,
                    "above": trace.balance[j].1,
                    "k_j_lower_bound": lower_bounds[j],
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "true_median": trace.true_median.0,
                "steps": rows,
            }))
            .unwrap()
        );
        return Ok(ExitCode::SUCCESS);
    }
    println!("true median: {}", trace.true_median);
    println!(
        "{:>4} {:>10} {:>12} {:>10} {:>10} {:>12}",
        "step", "width", "median#", "below", "above", "k_j"
    );
    for (j, bound) in lower_bounds.iter().enumerate().take(steps + 1) {
        println!(
            "{j:>4} {:>10} {:>12} {:>10} {:>10} {:>12}",
            trace.tuples[j].arity(),
            trace.median_counts[j],
            trace.balance[j].0,
            trace.balance[j].1,
            bound.as_deref().unwrap_or("-"),
        );
    }
    Ok(ExitCode::SUCCESS)
}
