use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use cklef::commands::{self, IndexOptions, Outcome};
use cklef::{parse_document, CkDocument, Status};
use cklef_core::IndexMethod;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cklef",
    version,
    about = "Index, K-theory and Lefschetz numbers of geometric endomorphisms of Cuntz-Krieger algebras"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Series,
    Gamma,
    Polynomial,
    Fredholm,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Cuntz-Krieger relations and show the range partition.
    Validate {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
    },
    /// Index of the induced partial path map.
    Index {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::All)]
        method: Method,
        /// Evaluation point of the closed formula.
        #[arg(long)]
        m: Option<usize>,
        /// Range parameter of the closed formula.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Truncation depth of the Fredholm route.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// K-groups of the matrix and generator reductions.
    Ktheory { file: PathBuf },
    /// Map induced on K0.
    K0map {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
    },
    /// Lefschetz number; derived mode when no K1 action is given.
    Lefschetz {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
        /// K1 action, rows separated by `;`, entries by `,`.
        #[arg(long = "k1-matrix", allow_hyphen_values = true)]
        k1_matrix: Option<String>,
    },
    /// Zeta coefficients and their rational closed form.
    Zeta {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
        /// Largest power computed.
        #[arg(long, default_value_t = 5)]
        terms: u32,
        #[arg(long = "k1-matrix", allow_hyphen_values = true)]
        k1_matrix: Option<String>,
    },
    /// Composition `outer ∘ inner`.
    Compose {
        file: PathBuf,
        /// Defaults to the first endomorphism.
        #[arg(long)]
        outer: Option<String>,
        /// Defaults to the second endomorphism.
        #[arg(long)]
        inner: Option<String>,
        /// Write the composite as a new document.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Block name in the emitted document; unnamed by default.
        #[arg(long, default_value = "")]
        name: String,
    },
    /// Iterate an endomorphism.
    Power {
        file: PathBuf,
        #[arg(long)]
        endo: Option<String>,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "")]
        name: String,
    },
}

fn read(path: &PathBuf) -> Result<CkDocument, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(2)
    })?;
    parse_document(&text).map_err(|e| {
        eprintln!("error: {}:{e}", path.display());
        ExitCode::from(2)
    })
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), ExitCode> {
    let result = match cli.command {
        Command::Validate { file, endo } => commands::validate(&read(&file)?, endo.as_deref()),
        Command::Index { file, endo, method, m, n, depth } => {
            let method = match method {
                Method::Series => Some(IndexMethod::Series),
                Method::Gamma => Some(IndexMethod::Gamma),
                Method::Polynomial => Some(IndexMethod::Polynomial),
                Method::Fredholm => Some(IndexMethod::Fredholm),
                Method::All => None,
            };
            commands::index(&read(&file)?, endo.as_deref(), &IndexOptions { method, m, n, depth })
        }
        Command::Ktheory { file } => commands::ktheory(&read(&file)?),
        Command::K0map { file, endo } => commands::k0map(&read(&file)?, endo.as_deref()),
        Command::Lefschetz { file, endo, k1_matrix } => {
            commands::lefschetz(&read(&file)?, endo.as_deref(), k1_matrix.as_deref())
        }
        Command::Zeta { file, endo, terms, k1_matrix } => {
            commands::zeta(&read(&file)?, endo.as_deref(), terms, k1_matrix.as_deref())
        }
        Command::Compose { file, outer, inner, out, name } => {
            return commands::compose(&read(&file)?, outer.as_deref(), inner.as_deref(), &name)
                .map(|o| (o, out))
                .map_err(fail);
        }
        Command::Power { file, endo, n, out, name } => {
            return commands::power(&read(&file)?, endo.as_deref(), n, &name).map(|o| (o, out)).map_err(fail);
        }
    };
    result.map(|o| (o, None)).map_err(fail)
}

fn fail(e: commands::CommandError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let (outcome, out) = match run(cli) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let rendered = match format {
        Format::Text => outcome.report.render_text(),
        Format::Kv => outcome.report.render_kv(),
    };
    print!("{rendered}");
    if let (Some(path), Some(doc)) = (out, &outcome.document) {
        if let Err(e) = fs::write(&path, doc.to_text()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    match outcome.report.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Failed => ExitCode::from(1),
    }
}
