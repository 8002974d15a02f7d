use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fomet::pipeline::{exit, Logic, PipelineOptions};
use fomet_cli::commands::{self, Boards, InputError, Outcome};

#[derive(Parser)]
#[command(name = "fomet", version, about = "Neighborhood types, orders and two-pebble games on finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Compact JSON output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fo2,
    C2,
}

impl From<ModeArg> for Logic {
    fn from(m: ModeArg) -> Logic {
        match m {
            ModeArg::Fo2 => Logic::Fo2,
            ModeArg::C2 => Logic::C2,
        }
    }
}

#[derive(Args)]
struct GameArgs {
    a0: PathBuf,
    a1: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "fo2")]
    mode: ModeArg,
    /// Counting index for `c2`; defaults to `k`.
    #[arg(long)]
    threshold: Option<usize>,
    /// Order files for the two structures (elements, smallest first).
    #[arg(long, requires = "order1")]
    order0: Option<PathBuf>,
    #[arg(long, requires = "order0")]
    order1: Option<PathBuf>,
    /// Order both structures by element id.
    #[arg(long, conflicts_with_all = ["order0", "order1"])]
    identity: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a structure file and summarize it.
    Validate { file: PathBuf },
    /// Census of k-neighborhood types.
    Types {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Split the types into frequent and rare.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "fo2")]
        mode: ModeArg,
    },
    /// Build the pair of orders and check the transfer lemmas.
    BuildOrders {
        a0: PathBuf,
        a1: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "fo2")]
        mode: ModeArg,
    },
    /// Solve the k-round two-pebble game.
    Game(GameArgs),
    /// Print a sentence separating the structures, if any.
    Distinguish(GameArgs),
    /// Check that a sentence using `<` does not depend on the order.
    Invariance {
        file: PathBuf,
        #[arg(long)]
        formula: String,
        /// Sample this many random pairs of orders instead of trying all.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the whole certification and exit 0 only if every stage passes.
    Pipeline {
        a0: PathBuf,
        a1: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "fo2")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        matches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play one match of the strategy against a random spoiler.
    Play {
        a0: PathBuf,
        a1: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "fo2")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the game API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory with `<name>.0.fms` / `<name>.1.fms` pairs.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Append each session's events to `<dir>/<id>.jsonl`.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn boards(g: &GameArgs) -> anyhow::Result<Boards> {
    let (s0, s1) = (commands::load_structure(&g.a0)?, commands::load_structure(&g.a1)?);
    Ok(match (&g.order0, &g.order1) {
        (Some(o0), Some(o1)) => Boards::Ordered(commands::load_order(s0, o0)?, commands::load_order(s1, o1)?),
        _ if g.identity => Boards::Ordered(fomet::OrderedStructure::identity(s0), fomet::OrderedStructure::identity(s1)),
        _ => Boards::Plain(s0, s1),
    })
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    use commands::*;
    match &cli.command {
        Command::Validate { file } => Ok(validate(&load_structure(file)?)),
        Command::Types { file, k } => types(&load_structure(file)?, *k),
        Command::Classify { file, k, mode } => classify(&load_structure(file)?, *k, (*mode).into()),
        Command::BuildOrders { a0, a1, k, mode } => build_orders(&load_structure(a0)?, &load_structure(a1)?, *k, (*mode).into()),
        Command::Game(g) => game(&boards(g)?, g.k, mode_for(g.mode.into(), g.k, g.threshold)),
        Command::Distinguish(g) => distinguish(&boards(g)?, g.k, mode_for(g.mode.into(), g.k, g.threshold)),
        Command::Invariance { file, formula, trials, seed } => {
            invariance(&load_structure(file)?, formula, trials.map(|t| (*seed, t)))
        }
        Command::Pipeline { a0, a1, k, mode, matches, seed } => {
            let mut opts = PipelineOptions::new(*k, (*mode).into());
            opts.matches = *matches;
            opts.seed = *seed;
            pipeline(&load_structure(a0)?, &load_structure(a1)?, &opts)
        }
        Command::Play { a0, a1, k, mode, seed } => play(&load_structure(a0)?, &load_structure(a1)?, *k, (*mode).into(), *seed),
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port, corpus, log_dir } = &cli.command {
        let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match rt.block_on(fomet_cli::service::serve(*port, corpus.clone(), log_dir.clone())) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit::INPUT as u8)
            }
        };
    }
    match run(&cli) {
        Ok(Outcome { value, code }) => {
            let text = if cli.pretty { serde_json::to_string_pretty(&value) } else { serde_json::to_string(&value) };
            println!("{}", text.expect("JSON values serialize"));
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.downcast_ref::<InputError>().is_some() { exit::INPUT } else { exit::CERTIFICATION };
            ExitCode::from(code as u8)
        }
    }
}
