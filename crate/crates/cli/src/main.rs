use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tableparse::config::Config;
use tableparse_cli::service::{self, AppState};
use tableparse_cli::store::DocStore;
use tableparse_cli::{commands, CliError};

#[derive(Parser)]
#[command(
    name = "tableparse",
    version,
    about = "Table structure parsing pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate annotations and a color raster from one spreadsheet sheet.
    Weaksup {
        #[arg(long)]
        xlsx: PathBuf,
        #[arg(long)]
        sheet: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Config::default().dpi)]
        dpi: f64,
    },
    /// Turn a detection file into an annotation tree.
    Infer {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Config::default().confidence_threshold)]
        threshold: f64,
        #[arg(long, default_value_t = Config::default().entity_cap)]
        cap: usize,
    },
    /// Fill a tree's cell grid with OCR text and export CSV.
    Merge {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        with_sums: bool,
    },
    /// Average precision of prediction files against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Also write a JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Serve the annotation API and UI for a document store.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = Config::default().port)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory with a UI bundle to serve instead of the built-in page.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Weaksup {
            xlsx,
            sheet,
            out,
            dpi,
        } => commands::weaksup(&xlsx, &sheet, &out, dpi),
        Command::Infer {
            detections,
            out,
            threshold,
            cap,
        } => commands::infer(&detections, &out, threshold, cap),
        Command::Merge {
            tree,
            text,
            csv,
            with_sums,
        } => commands::merge(&tree, &text, &csv, with_sums),
        Command::Eval { pred, gt, summary } => {
            commands::eval(&pred, &gt, summary.as_deref(), &Config::default())
        }
        Command::Serve {
            store,
            port,
            host,
            ui,
        } => {
            let store = DocStore::open(&store).map_err(|e| CliError::Input(e.to_string()))?;
            let state = Arc::new(AppState::new(store, ui));
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| CliError::Processing(e.to_string()))?;
            runtime
                .block_on(service::serve(state, SocketAddr::new(host, port)))
                .map_err(|e| CliError::Processing(e.to_string()))?;
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
