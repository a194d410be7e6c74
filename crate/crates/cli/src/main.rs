//! `wo`: weak orthogonality checks, projections, diagram closure,
//! sequence compression and S/P word analysis from the command line.

mod commands;
mod dot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use wo_core::sp::Letter;

use report::{Report, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "wo", version, about = "Weakly orthogonal infinitary rewriting toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Depth budget.
    #[arg(long, global = true, default_value_t = 16, value_parser = positive)]
    depth: usize,
    /// Prefix budget: number of sequence steps to emit.
    #[arg(long, global = true, default_value_t = 64, value_parser = positive)]
    prefix: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weak orthogonality verdict and collapsing rules.
    Check { trs: PathBuf },
    /// List critical pairs.
    Cps { trs: PathBuf },
    /// Redexes of a term, overlap clusters and Y-redexes.
    Redexes {
        trs: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Orthogonalize two co-initial developments.
    Orthogonalize {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Complete development of a redex set.
    Develop {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        set: String,
    },
    /// Project two co-initial parallel steps over each other.
    Project {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Tile a sequence of length at most ω against a parallel step.
    Strip {
        trs: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        step: String,
    },
    /// Join two co-initial sequences of length at most ω.
    Join {
        trs: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Close the diagram of two co-initial developments.
    Diamond {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, default_value = "{}")]
        left: String,
        #[arg(long, default_value = "{}")]
        right: String,
        /// Two terms searched for a common reduct within 3 steps.
        #[arg(long, num_args = 2, value_names = ["T1", "T2"])]
        witness: Option<Vec<String>>,
    },
    /// Compare both sides of the cube identity.
    Cube {
        trs: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        gamma: String,
    },
    /// Compress a sequence to length at most ω.
    Compress {
        trs: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long = "check-depth", default_value_t = 20)]
        check_depth: usize,
    },
    /// Infinite S/P words.
    Sp {
        #[command(subcommand)]
        cmd: SpCmd,
    },
}

#[derive(Subcommand)]
enum SpCmd {
    /// Heights and class membership.
    Classify { word: String },
    /// Partial sums as a table.
    Graph {
        word: String,
        /// Number of letters.
        #[arg(long, default_value_t = 40)]
        length: usize,
        /// Emit CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Validated reduction of a prefix towards S^d or P^d.
    Witness {
        word: String,
        #[arg(long, value_parser = parse_letter)]
        target: Letter,
    },
}

fn parse_letter(s: &str) -> Result<Letter, String> {
    match s {
        "S" => Ok(Letter::S),
        "P" => Ok(Letter::P),
        _ => Err("expected S or P".into()),
    }
}

fn run(cli: &Cli, notes: &mut Vec<String>) -> anyhow::Result<Report> {
    let d = cli.depth;
    match &cli.cmd {
        Cmd::Check { trs } => commands::check(&commands::load_trs(trs)?),
        Cmd::Cps { trs } => commands::cps(&commands::load_trs(trs)?),
        Cmd::Redexes { trs, term } => commands::redexes(&commands::load_trs(trs)?, term, d),
        Cmd::Orthogonalize { trs, term, left, right } => {
            commands::orthogonalize(&commands::load_trs(trs)?, term, left, right, d)
        }
        Cmd::Develop { trs, term, set } => commands::develop(&commands::load_trs(trs)?, term, set, d),
        Cmd::Project { trs, term, left, right } => commands::project(&commands::load_trs(trs)?, term, left, right),
        Cmd::Strip { trs, seq, step } => commands::strip_verb(Arc::new(commands::load_trs(trs)?), seq, step, d),
        Cmd::Join { trs, left, right } => commands::join(Arc::new(commands::load_trs(trs)?), left, right, d),
        Cmd::Diamond { trs, term, left, right, witness } => {
            let witness = witness.as_ref().map(|w| (w[0].as_str(), w[1].as_str()));
            let args = commands::DiamondArgs { term, left, right, witness };
            commands::diamond(&commands::load_trs(trs)?, &args, d, notes)
        }
        Cmd::Cube { trs, term, alpha, beta, gamma } => {
            commands::cube(&commands::load_trs(trs)?, term, [alpha, beta, gamma])
        }
        Cmd::Compress { trs, seq, check_depth } => {
            commands::compress_verb(Arc::new(commands::load_trs(trs)?), seq, *check_depth, cli.prefix)
        }
        Cmd::Sp { cmd } => match cmd {
            SpCmd::Classify { word } => commands::sp_classify(word, d),
            SpCmd::Graph { word, length, .. } => commands::sp_graph(word, *length),
            SpCmd::Witness { word, target } => commands::sp_witness(word, *target, d),
        },
    }
}

fn error_status(e: &anyhow::Error) -> Status {
    match e.downcast_ref::<wo_core::Error>() {
        Some(wo_core::Error::BudgetExhausted(_)) => Status::Budget,
        Some(wo_core::Error::Invariant(_)) => Status::Violated,
        _ => Status::InputError,
    }
}

fn verb_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Check { .. } => "check",
        Cmd::Cps { .. } => "cps",
        Cmd::Redexes { .. } => "redexes",
        Cmd::Orthogonalize { .. } => "orthogonalize",
        Cmd::Develop { .. } => "develop",
        Cmd::Project { .. } => "project",
        Cmd::Strip { .. } => "strip",
        Cmd::Join { .. } => "join",
        Cmd::Diamond { .. } => "diamond",
        Cmd::Cube { .. } => "cube",
        Cmd::Compress { .. } => "compress",
        Cmd::Sp { cmd: SpCmd::Classify { .. } } => "sp classify",
        Cmd::Sp { cmd: SpCmd::Graph { .. } } => "sp graph",
        Cmd::Sp { cmd: SpCmd::Witness { .. } } => "sp witness",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match &cli.cmd {
        Cmd::Sp { cmd: SpCmd::Graph { csv: true, .. } } => Format::Csv,
        _ => cli.format,
    };
    let mut notes = Vec::new();
    let result = run(&cli, &mut notes);
    for n in &notes {
        eprintln!("{n}");
    }
    let rep = match result {
        Ok(rep) => rep,
        Err(e) => {
            let mut rep = Report::new(verb_name(&cli.cmd));
            rep.status = error_status(&e);
            eprintln!("error: {e:#}");
            if format == Format::Json {
                rep.field("message", format!("{e:#}"));
                println!("{}", serde_json::to_string_pretty(&rep.json()).expect("json"));
            }
            return ExitCode::from(rep.status.code());
        }
    };
    match format {
        Format::Text => {
            for l in &rep.lines {
                println!("{l}");
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep.json()).expect("json")),
        Format::Csv => match &rep.csv {
            Some(c) => print!("{c}"),
            None => {
                eprintln!("error: `{}` has no CSV output", rep.verb);
                return ExitCode::from(Status::InputError.code());
            }
        },
        Format::Dot => match &rep.dot {
            Some(d) => print!("{d}"),
            None => {
                eprintln!("error: `{}` has no DOT output", rep.verb);
                return ExitCode::from(Status::InputError.code());
            }
        },
    }
    ExitCode::from(rep.status.code())
}
