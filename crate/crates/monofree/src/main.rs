//! Command-line interface: exact convolution tables, property-suite
//! verification reports, word reduction, and mixed-moment evaluation.
//!
//! Exit codes: 0 success, 2 verification failure, 3 non-stabilized value,
//! 4 input error.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use monofree::{
    convolve_states_with_truncation, free_convolve_oracle, m_free_moment, mixed_moment,
    plain_tensor_space, reduce, run_suite, AlgebraPresentation, Coeff, Decoration, EngineError,
    Letter, MomentSpec, NCPolynomial, Suite, Word,
};

/// Hard cap on the requested moment order.
const MAX_ORDER: usize = 10;

#[derive(Parser)]
#[command(name = "monofree", about = "Exact free-probability engine: convolution, verification, reduction", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Representation,
    Oracle,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Free additive convolution of two moment specs.
    Convolve {
        /// First spec: JSON file path, inline JSON, or shorthand like
        /// `semicircle:1`, `two_point:-1,1,1/2`, `point:3`.
        #[arg(long)]
        a: String,
        /// Second spec, same forms as --a.
        #[arg(long)]
        b: String,
        /// Highest moment order to compute.
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Override of the per-order truncation index.
        #[arg(long)]
        truncation: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run a seeded property suite.
    Verify {
        /// One of freeness|bialgebra|confluence|monotone|hierarchy.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance-count scaling where the suite is randomized.
        #[arg(long)]
        size: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Reduce a word to its canonical normal form.
    Reduce {
        /// Schema: F0 (decorated copies) or H0 (plain copies).
        #[arg(long)]
        algebra: String,
        /// The word, e.g. "q3 X'(1) q2".
        word: String,
    },
    /// Mixed moment of a two-leg word of generators.
    Mixed {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Leg word, e.g. "a b a" (legs also accepted as 0/1 or A/B).
        #[arg(long)]
        word: String,
        /// Hierarchy level m for the hard-truncated moment; free when absent.
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        truncation: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

fn input_err(msg: impl Into<String>) -> EngineError {
    EngineError::Parse(msg.into())
}

/// Loads a moment spec from a file path, inline JSON, or a preset shorthand.
fn load_spec(arg: &str, default_label: &str, max_order: usize) -> Result<MomentSpec, EngineError> {
    if arg.trim_start().starts_with('{') {
        return MomentSpec::from_json(arg);
    }
    if std::path::Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg)
            .map_err(|e| input_err(format!("cannot read spec file `{arg}`: {e}")))?;
        return MomentSpec::from_json(&text);
    }
    let (head, params) = match arg.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (arg, None),
    };
    let nums: Vec<Coeff> = match params {
        None => Vec::new(),
        Some(p) => p
            .split(',')
            .map(|t| {
                monofree::parse::parse_rational(t.trim())
                    .ok_or_else(|| input_err(format!("bad rational `{t}` in spec `{arg}`")))
            })
            .collect::<Result<_, _>>()?,
    };
    let one = || Coeff::from_integer(1.into());
    match (head, nums.as_slice()) {
        ("semicircle", []) => Ok(MomentSpec::semicircle(default_label, one(), max_order)),
        ("semicircle", [v]) => Ok(MomentSpec::semicircle(default_label, v.clone(), max_order)),
        ("two_point", []) => Ok(MomentSpec::two_point(
            default_label,
            -one(),
            one(),
            monofree::ncpoly::ratio(1, 2),
            max_order,
        )),
        ("two_point", [a, b, w]) => Ok(MomentSpec::two_point(
            default_label,
            a.clone(),
            b.clone(),
            w.clone(),
            max_order,
        )),
        ("point", [c]) => Ok(MomentSpec::point(default_label, c.clone(), max_order)),
        _ => Err(input_err(format!(
            "unknown spec `{arg}` (expected a JSON file/object or semicircle[:v] | two_point[:a,b,w] | point:c)"
        ))),
    }
}

fn check_order(order: usize) -> Result<(), EngineError> {
    if order < 1 || order > MAX_ORDER {
        return Err(input_err(format!(
            "--order must be between 1 and {MAX_ORDER}, got {order}"
        )));
    }
    Ok(())
}

fn cmd_convolve(
    a: &str,
    b: &str,
    order: usize,
    method: Method,
    truncation: Option<u32>,
    format: Format,
) -> Result<ExitCode, EngineError> {
    check_order(order)?;
    let mu = load_spec(a, "a", order + 2)?;
    let nu = load_spec(b, "b", order + 2)?;
    let representation = match method {
        Method::Oracle => None,
        _ => Some(convolve_states_with_truncation(&mu, &nu, order, truncation)?),
    };
    let oracle = match method {
        Method::Representation => None,
        _ => Some(free_convolve_oracle(&mu, &nu, order)?),
    };
    let mut all_equal = true;
    let mut rows = Vec::with_capacity(order);
    for n in 1..=order {
        let rep = representation.as_ref().map(|r| r[n - 1].clone());
        let ora = oracle.as_ref().map(|o| o[n - 1].clone());
        let equal = match (&rep, &ora) {
            (Some(r), Some(o)) => {
                let eq = r.value == *o;
                all_equal &= eq;
                Some(eq)
            }
            _ => None,
        };
        rows.push((n, rep, ora, equal));
    }
    match format {
        Format::Json => {
            let out = json!({
                "command": "convolve",
                "a": a,
                "b": b,
                "order": order,
                "method": match method { Method::Representation => "representation", Method::Oracle => "oracle", Method::Both => "both" },
                "moments": rows.iter().map(|(n, rep, ora, equal)| {
                    let mut row = serde_json::Map::new();
                    row.insert("n".into(), json!(n));
                    if let Some(r) = rep {
                        row.insert("representation".into(), json!(r.value.to_string()));
                        row.insert("stabilized_at".into(), json!(r.stabilized_at));
                        row.insert("checked_at".into(), json!(r.checked_at));
                    }
                    if let Some(o) = ora {
                        row.insert("oracle".into(), json!(o.to_string()));
                    }
                    if let Some(e) = equal {
                        row.insert("equal".into(), json!(e));
                    }
                    serde_json::Value::Object(row)
                }).collect::<Vec<_>>(),
                "all_equal": if method == Method::Both { json!(all_equal) } else { serde_json::Value::Null },
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Table => {
            let mut header = String::from("n");
            if representation.is_some() {
                header.push_str("\trepresentation\tstabilized");
            }
            if oracle.is_some() {
                header.push_str("\toracle");
            }
            if method == Method::Both {
                header.push_str("\tequal");
            }
            println!("{header}");
            for (n, rep, ora, equal) in &rows {
                let mut line = format!("{n}");
                if let Some(r) = rep {
                    line.push_str(&format!(
                        "\t{}\tm={}..{}",
                        r.value, r.stabilized_at, r.checked_at
                    ));
                }
                if let Some(o) = ora {
                    line.push_str(&format!("\t{o}"));
                }
                if let Some(e) = equal {
                    line.push_str(if *e { "\tyes" } else { "\tNO" });
                }
                println!("{line}");
            }
        }
    }
    Ok(if method == Method::Both && !all_equal {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_verify(
    suite: &str,
    seed: u64,
    size: Option<u32>,
    format: Format,
) -> Result<ExitCode, EngineError> {
    let suite: Suite = suite.parse().map_err(input_err)?;
    let report = run_suite(suite, seed, size)?;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        ),
        Format::Table => {
            println!("suite: {} (seed {})", report.suite, report.seed);
            for p in &report.properties {
                println!(
                    "[{}] {} — {} instances, {} failures{}",
                    if p.failures == 0 { "ok" } else { "FAIL" },
                    p.name,
                    p.instances,
                    p.failures,
                    p.detail
                        .as_ref()
                        .map(|d| format!(" ({d})"))
                        .unwrap_or_default(),
                );
            }
            println!("result: {}", if report.passed { "pass" } else { "FAIL" });
        }
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

/// Builds a presentation whose generator set is read off the word itself.
fn presentation_for(algebra: &str, word: &str) -> Result<AlgebraPresentation, EngineError> {
    let mut gens: Vec<String> = Vec::new();
    for tok in word.split_whitespace() {
        let head: String = tok.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
        if head.is_empty() || head == "q" || head == "p" || tok.starts_with('q') || tok.starts_with('p') {
            continue;
        }
        if !gens.contains(&head) {
            gens.push(head);
        }
    }
    if gens.is_empty() {
        gens.push("X".to_string());
    }
    let names: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
    match algebra.to_ascii_uppercase().as_str() {
        "F0" => AlgebraPresentation::f0("G", &names),
        "H0" => AlgebraPresentation::h0(&[("A", &names[..])]),
        other => Err(input_err(format!("unknown algebra `{other}` (expected F0 or H0)"))),
    }
}

fn cmd_reduce(algebra: &str, word: &str) -> Result<ExitCode, EngineError> {
    let pres = presentation_for(algebra, word)?;
    let parsed = monofree::parse::parse_poly(word, &pres)?;
    let normal = reduce(&parsed, &pres);
    println!("{normal}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_mixed(
    a: &str,
    b: &str,
    word: &str,
    level: Option<u32>,
    truncation: Option<u32>,
    format: Format,
) -> Result<ExitCode, EngineError> {
    let legs: Vec<usize> = word
        .split([' ', ','])
        .filter(|t| !t.is_empty())
        .map(|t| match t.to_ascii_lowercase().as_str() {
            "a" | "0" => Ok(0),
            "b" | "1" => Ok(1),
            other => Err(input_err(format!("bad leg `{other}` (expected a|b|0|1)"))),
        })
        .collect::<Result<_, _>>()?;
    if legs.is_empty() {
        return Err(input_err("empty leg word"));
    }
    check_order(legs.len())?;
    let mu = load_spec(a, "a", legs.len() + 2)?;
    let nu = load_spec(b, "b", legs.len() + 2)?;
    let space = plain_tensor_space(&[("A", "X"), ("B", "Y")])?;
    let specs = [mu, nu];
    let elements: Vec<(usize, NCPolynomial)> = legs
        .iter()
        .map(|&l| {
            let leg = &space.legs()[l];
            let gen = leg.pres.generators_of(leg.label)[0];
            (
                l,
                NCPolynomial::from_word(Word::single(Letter::gen(
                    leg.label,
                    gen,
                    1,
                    Decoration::Plain,
                    false,
                ))),
            )
        })
        .collect();
    let (value, cert) = match level {
        Some(m) => {
            if m < 1 {
                return Err(input_err("--level must be at least 1"));
            }
            (m_free_moment(&elements, &space, &specs, m)?, None)
        }
        None => {
            let c = mixed_moment(&elements, &space, &specs, truncation)?;
            (c.value.clone(), Some((c.stabilized_at, c.checked_at)))
        }
    };
    match format {
        Format::Json => {
            let out = json!({
                "command": "mixed",
                "word": legs,
                "level": level,
                "value": value.to_string(),
                "stabilized_at": cert.map(|c| c.0),
                "checked_at": cert.map(|c| c.1),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        }
        Format::Table => match cert {
            Some((lo, hi)) => println!("{value}\t(stabilized m={lo}..{hi})"),
            None => println!("{value}"),
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, EngineError> {
    match cli.cmd {
        Cmd::Convolve {
            a,
            b,
            order,
            method,
            truncation,
            format,
        } => cmd_convolve(&a, &b, order, method, truncation, format),
        Cmd::Verify {
            suite,
            seed,
            size,
            format,
        } => cmd_verify(&suite, seed, size, format),
        Cmd::Reduce { algebra, word } => cmd_reduce(&algebra, &word),
        Cmd::Mixed {
            a,
            b,
            word,
            level,
            truncation,
            format,
        } => cmd_mixed(&a, &b, &word, level, truncation, format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Keep help/version on stdout with success, everything else is
            // an input error (exit 4) per the exit-code contract.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                EngineError::NonStabilized { .. } => ExitCode::from(3),
                _ => ExitCode::from(4),
            }
        }
    }
}
