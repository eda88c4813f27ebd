use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use counterpoint_core::melody_io::SessionStore;
use counterpoint_core::Scheme;
use counterpoint_service::commands::{self, EvolveArgs, RaterSpec};
use counterpoint_service::{router, AppState};

#[derive(Parser)]
#[command(
    name = "counterpoint",
    version,
    about = "Evolve counterpoint against a base melody"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the rating-session HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory holding one JSON file per session.
        #[arg(long, env = "COUNTERPOINT_DATA_DIR", default_value = "sessions")]
        data_dir: PathBuf,
    },
    /// Run an evolution with an automatic rater.
    Evolve {
        #[arg(long)]
        melody: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        generations: u64,
        /// `objective` or `scripted:FILE`.
        #[arg(long, default_value = "objective")]
        rater: RaterSpec,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also mutate every crossover offspring.
        #[arg(long)]
        mutate_offspring: bool,
    },
    /// Write a melody (and optionally a counterpoint) as a MIDI file.
    Render {
        #[arg(long)]
        melody: PathBuf,
        #[arg(long)]
        counterpoint: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a melody file parses.
    Validate {
        #[arg(long)]
        melody: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve {
            port,
            host,
            data_dir,
        } => {
            let store = SessionStore::open(&data_dir)
                .with_context(|| format!("opening {}", data_dir.display()))?;
            let app = router(AppState::new(store));
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                tracing::info!("listening on {}", listener.local_addr()?);
                axum::serve(listener, app).await?;
                anyhow::Ok(())
            })
        }
        Command::Evolve {
            melody,
            scheme,
            seed,
            generations,
            rater,
            out_dir,
            mutate_offspring,
        } => {
            let run = commands::evolve(&EvolveArgs {
                melody,
                scheme,
                seed,
                generations,
                rater,
                out_dir: out_dir.clone(),
                mutate_offspring,
            })?;
            let first = run.trace.first().expect("generation 0").best;
            println!(
                "generation 0 best {first}, best so far {} (individual {}); wrote {}",
                run.best.rating.expect("rated"),
                run.best.id,
                out_dir.display()
            );
            Ok(())
        }
        Command::Render {
            melody,
            counterpoint,
            out,
        } => commands::render(&melody, counterpoint.as_deref(), &out),
        Command::Validate { melody } => {
            println!("{}", commands::validate(&melody)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
