//! `thetacode` command-line tool.
//!
//! Exit codes: 0 for a positive answer or success, 1 for a negative answer,
//! 2 for usage, parse and I/O errors.

mod report;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use thetacode::identities::{
    dwnu_system, eval_dwnu, parse_ops, projection_satisfiable, Evaluation,
};
use thetacode::reductions::{clique_brute, clique_instance};
use thetacode::structures::parse_graph;
use thetacode::toolkit::{amalgamate, plant_code, random_separated, GenParams, SeededRng};
use thetacode::{
    canonical_code, decode, edge_structure, enumerate_codes, hom_search, is_separated,
    parse_language_spec, parse_rho, parse_theta, serialize_rho, serialize_theta, solve_with,
    Alphabet, Error, HomMode, HomOptions, Homomorphism, SolveOptions, ThetaStructure,
};

use report::Report;

#[derive(Parser)]
#[command(
    name = "thetacode",
    version,
    about = "Code-signature encodings, decoding and CSP decisions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write to FILE instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct JsonArg {
    /// Emit one JSON record instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical code of the edge structure of a word.
    EncodeWord {
        #[arg(long)]
        word: String,
        /// Letters of the signature; defaults to the word's letters, sorted.
        #[arg(long)]
        alphabet: Option<String>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Canonical code of a rho structure.
    EncodeStructure {
        /// rho file, or `-` for standard input.
        input: String,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Decoding of a theta structure.
    Decode {
        input: String,
        /// Longest code word; defaults to max(|X| - 1, 2).
        #[arg(long)]
        max_len: Option<usize>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Checks separatedness, listing every violation.
    Separated {
        input: String,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Lists valid codes in canonical order.
    Codes {
        input: String,
        #[arg(long)]
        max_len: Option<usize>,
        /// Only codes whose word is in this language.
        #[arg(long, value_name = "SPEC")]
        lang: Option<String>,
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Decides whether a structure maps to the encoded trivial structure.
    Solve {
        input: String,
        /// all, none, finite:PATH, cofinite:PATH or dfa:PATH.
        #[arg(long, value_name = "SPEC")]
        lang: String,
        /// Longest code word searched; defaults to |X| - 1.
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Report the least witness even when searching in parallel.
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Homomorphism search between two structures of the same kind.
    Hom {
        source: String,
        target: String,
        #[arg(long, conflicts_with = "embedding")]
        injective: bool,
        #[arg(long)]
        embedding: bool,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Instance that is rejected exactly when the graph has an n-clique.
    ReduceClique {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "a")]
        alphabet: String,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Brute-force clique check.
    Clique {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Dissected weak near-unanimity systems.
    Dwnu {
        #[command(subcommand)]
        command: DwnuCommand,
    },
    /// Strong amalgam of two separated structures over a shared prefix.
    Amalgamate {
        b: String,
        c: String,
        /// Number of leading elements the two inputs share.
        #[arg(long)]
        shared: u32,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Random separated structure.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "ab")]
        alphabet: String,
        #[arg(long)]
        p_frac: Option<f64>,
        #[arg(long)]
        iota: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Adds a fresh valid code for a word to a separated structure.
    Plant {
        #[arg(long)]
        word: String,
        #[arg(long = "in", value_name = "FILE")]
        input: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Subcommand)]
enum DwnuCommand {
    /// Whether projections on a two-element set satisfy the (n, k) system.
    Trivial {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        json: JsonArg,
    },
    /// Evaluates the (n, k) system on operation tables.
    Eval {
        #[arg(long, num_args = 2, value_names = ["N", "K"], required = true)]
        system: Vec<usize>,
        #[arg(long)]
        ops: String,
        /// Restrict x and y to these elements.
        #[arg(long, num_args = 1..)]
        subset: Option<Vec<u32>>,
        #[command(flatten)]
        json: JsonArg,
    },
}

/// Whether the answer was positive; maps to exit code 0 or 1.
type Status = bool;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    let io_err = |source| Error::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(io_err)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(io_err)
    }
}

fn read_theta(path: &str) -> Result<ThetaStructure, Error> {
    parse_theta(&read_input(path)?).map_err(|e| in_file(path, e))
}

fn in_file(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(thetacode::ParseError::new(0, format!("{path}: {e}")))
}

fn write_output(out: &OutputArg, text: &str) -> Result<(), Error> {
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn default_max_len(x: &ThetaStructure) -> usize {
    x.len().saturating_sub(1).max(2)
}

fn run(command: Command) -> Result<Status, Error> {
    match command {
        Command::EncodeWord {
            word,
            alphabet,
            out,
        } => {
            let alphabet = match alphabet {
                Some(letters) => Alphabet::new(&letters)?,
                None => {
                    let mut letters: Vec<char> = word.chars().collect();
                    letters.sort_unstable();
                    letters.dedup();
                    Alphabet::from_chars(letters)?
                }
            };
            let w = alphabet.relation_word(&word)?;
            let x = canonical_code(&edge_structure(&w, &alphabet)?)?;
            write_output(&out, &serialize_theta(&x))?;
            Ok(true)
        }
        Command::EncodeStructure { input, out } => {
            let c = parse_rho(&read_input(&input)?).map_err(|e| in_file(&input, e))?;
            write_output(&out, &serialize_theta(&canonical_code(&c)?))?;
            Ok(true)
        }
        Command::Decode {
            input,
            max_len,
            out,
        } => {
            let x = read_theta(&input)?;
            let max_len = max_len.unwrap_or_else(|| default_max_len(&x));
            write_output(&out, &serialize_rho(&decode(&x, max_len)))?;
            Ok(true)
        }
        Command::Separated { input, json } => {
            let x = read_theta(&input)?;
            let start = Instant::now();
            let violations = is_separated(&x);
            let report = Report::new("separated", start);
            let ok = violations.is_empty();
            if json.json {
                report.print(json!({
                    "answer": if ok { "SEPARATED" } else { "NOT-SEPARATED" },
                    "witness": violations.iter().map(|v| report::violation(v, &x.alphabet)).collect::<Vec<_>>(),
                }));
            } else if ok {
                println!("SEPARATED");
            } else {
                println!("NOT SEPARATED");
                for v in &violations {
                    println!("{}", v.render(&x.alphabet));
                }
            }
            Ok(ok)
        }
        Command::Codes {
            input,
            max_len,
            lang,
            limit,
            json,
        } => {
            let x = read_theta(&input)?;
            let oracle = lang
                .map(|spec| parse_language_spec(&spec, &x.alphabet))
                .transpose()?;
            let max_len = max_len.unwrap_or_else(|| default_max_len(&x));
            let start = Instant::now();
            let codes = enumerate_codes(&x, max_len, oracle.as_ref(), limit);
            let report = Report::new("codes", start);
            if json.json {
                report.print(json!({
                    "answer": codes.len(),
                    "witness": codes.iter().map(|c| report::code(c, &x.alphabet)).collect::<Vec<_>>(),
                }));
            } else {
                for code in &codes {
                    println!("{}", code.render(&x.alphabet));
                }
            }
            Ok(true)
        }
        Command::Solve {
            input,
            lang,
            max_len,
            threads,
            deterministic,
            json,
        } => {
            let x = read_theta(&input)?;
            let oracle = parse_language_spec(&lang, &x.alphabet)?;
            let opts = SolveOptions {
                max_len,
                threads: threads.max(1),
                deterministic: deterministic || threads <= 1,
            };
            let start = Instant::now();
            let decision = solve_with(&x, &oracle, &opts);
            let report = Report::new("solve", start);
            if json.json {
                report.print(report::decision(&decision, &x.alphabet));
            } else {
                println!("{}", decision.render(&x.alphabet));
            }
            Ok(decision.is_yes())
        }
        Command::Hom {
            source,
            target,
            injective,
            embedding,
            json,
        } => {
            let mode = if embedding {
                HomMode::Embedding
            } else if injective {
                HomMode::Injective
            } else {
                HomMode::Plain
            };
            let opts = HomOptions {
                mode,
                deterministic: true,
            };
            let start = Instant::now();
            let found = hom_between(&source, &target, opts)?;
            let report = Report::new("hom", start);
            if json.json {
                report.print(json!({
                    "answer": if found.is_some() { "YES" } else { "NO" },
                    "witness": found.as_ref().map(|h| &h.map),
                }));
            } else {
                match &found {
                    Some(h) => println!("YES map={}", report::ids(&h.map)),
                    None => println!("NO"),
                }
            }
            Ok(found.is_some())
        }
        Command::ReduceClique {
            graph,
            n,
            alphabet,
            out,
        } => {
            let g = parse_graph(&read_input(&graph)?).map_err(|e| in_file(&graph, e))?;
            let x = clique_instance(&g, n, &Alphabet::new(&alphabet)?)?;
            write_output(&out, &serialize_theta(&x))?;
            Ok(true)
        }
        Command::Clique { graph, n, json } => {
            let g = parse_graph(&read_input(&graph)?).map_err(|e| in_file(&graph, e))?;
            let start = Instant::now();
            let found = clique_brute(&g, n);
            let report = Report::new("clique", start);
            if json.json {
                report
                    .print(json!({ "answer": if found { "YES" } else { "NO" }, "witness": null }));
            } else {
                println!("{}", if found { "YES" } else { "NO" });
            }
            Ok(found)
        }
        Command::Dwnu { command } => run_dwnu(command),
        Command::Amalgamate { b, c, shared, out } => {
            let d = amalgamate(&read_theta(&b)?, &read_theta(&c)?, shared)?;
            write_output(&out, &serialize_theta(&d))?;
            Ok(true)
        }
        Command::Gen {
            n,
            seed,
            alphabet,
            p_frac,
            iota,
            tau,
            h,
            s,
            out,
        } => {
            let defaults = GenParams::new(n, Alphabet::new(&alphabet)?, seed);
            let params = GenParams {
                p_frac: p_frac.unwrap_or(defaults.p_frac),
                iota_density: iota.unwrap_or(defaults.iota_density),
                tau_density: tau.unwrap_or(defaults.tau_density),
                h_density: h.unwrap_or(defaults.h_density),
                s_density: s.unwrap_or(defaults.s_density),
                ..defaults
            };
            write_output(&out, &serialize_theta(&random_separated(&params)?))?;
            Ok(true)
        }
        Command::Plant {
            word,
            input,
            seed,
            out,
        } => {
            let x = read_theta(&input)?;
            let w = x.alphabet.relation_word(&word)?;
            let y = plant_code(&x, &w, &mut SeededRng::new(seed))?;
            write_output(&out, &serialize_theta(&y))?;
            Ok(true)
        }
    }
}

fn run_dwnu(command: DwnuCommand) -> Result<Status, Error> {
    match command {
        DwnuCommand::Trivial { n, k, json } => {
            let start = Instant::now();
            let model = projection_satisfiable(n, k)?;
            let report = Report::new("dwnu-trivial", start);
            if json.json {
                report.print(json!({
                    "answer": if model.is_some() { "SATISFIABLE" } else { "UNSATISFIABLE" },
                    "witness": model.as_ref().map(|m| json!({ "g_second": m.g_second, "f_coord": m.f_coord })),
                }));
            } else {
                match &model {
                    Some(m) => {
                        println!("SATISFIABLE over projections");
                        let system = dwnu_system(n, k)?;
                        for (i, &second) in m.g_second.iter().enumerate() {
                            println!("g_{} = pi_{}", i + 1, if second { 2 } else { 1 });
                        }
                        for (psi, &coord) in m.f_coord.iter().enumerate() {
                            println!("{} = pi_{}", system.f_name(psi), coord + 1);
                        }
                    }
                    None => println!("UNSATISFIABLE over projections"),
                }
            }
            Ok(model.is_some())
        }
        DwnuCommand::Eval {
            system,
            ops,
            subset,
            json,
        } => {
            let system = dwnu_system(system[0], system[1])?;
            let file = parse_ops(&read_input(&ops)?).map_err(|e| in_file(&ops, e))?;
            let assignment = file.assignment(&system)?;
            let start = Instant::now();
            let result = eval_dwnu(&system, &assignment, subset.as_deref())?;
            let report = Report::new("dwnu-eval", start);
            match &result {
                Evaluation::Satisfied if json.json => {
                    report.print(json!({ "answer": "SATISFIED", "witness": null }));
                }
                Evaluation::Satisfied => println!("SATISFIED"),
                Evaluation::Violated { identity, x, y } => {
                    let text = system.describe(*identity);
                    if json.json {
                        report.print(json!({
                            "answer": "VIOLATED",
                            "witness": { "identity": text, "x": x, "y": y },
                        }));
                    } else {
                        println!("VIOLATED {text} at x={x} y={y}");
                    }
                }
            }
            Ok(result.holds())
        }
    }
}

/// Structures in any of the three text formats, told apart by header.
enum AnyStructure {
    Theta(ThetaStructure),
    Rho(thetacode::RhoStructure),
    Graph(thetacode::Graph),
}

fn read_any(path: &str) -> Result<AnyStructure, Error> {
    let text = read_input(path)?;
    let header = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    let parsed = match header {
        "theta" => parse_theta(&text).map(AnyStructure::Theta),
        "rho" => parse_rho(&text).map(AnyStructure::Rho),
        "graph" => parse_graph(&text).map(AnyStructure::Graph),
        other => return Err(in_file(path, format!("unknown structure header {other:?}"))),
    };
    parsed.map_err(|e| in_file(path, e))
}

fn hom_between(
    source: &str,
    target: &str,
    opts: HomOptions,
) -> Result<Option<Homomorphism>, Error> {
    match (read_any(source)?, read_any(target)?) {
        (AnyStructure::Theta(a), AnyStructure::Theta(b)) => hom_search(&a, &b, opts),
        (AnyStructure::Rho(a), AnyStructure::Rho(b)) => hom_search(&a, &b, opts),
        (AnyStructure::Graph(a), AnyStructure::Graph(b)) => hom_search(&a, &b, opts),
        _ => Err(Error::SignatureMismatch(
            "source and target are different kinds of structure".into(),
        )),
    }
}
