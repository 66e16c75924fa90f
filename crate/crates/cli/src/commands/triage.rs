use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use clap::Subcommand;
use stance_triage::{load_queue, recover, serve, Service};

#[derive(Debug, Subcommand)]
pub enum TriageCommand {
    /// Serve the triage HTTP API.
    Serve {
        /// Queue written by `graph candidates --queue`.
        #[arg(long)]
        queue: PathBuf,
        /// Decision log; created if missing, replayed if present.
        #[arg(long)]
        log: PathBuf,
        /// Port to listen on; 0 picks a free one.
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

pub fn run(cmd: &TriageCommand) -> anyhow::Result<()> {
    let TriageCommand::Serve { queue, log, port, host } = cmd;
    let items = load_queue(queue)?;
    let (state, log, report) = recover(log, items)?;
    tracing::info!(
        replayed = report.replayed,
        truncated_bytes = report.truncated_bytes,
        skipped = report.skipped_unknown,
        "decision log recovered"
    );
    let shared = Arc::new(Mutex::new(Service { state, log }));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(SocketAddr::new(*host, *port)).await?;
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        serve(listener, shared).await?;
        anyhow::Ok(())
    })
}
