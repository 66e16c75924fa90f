//! Triage service: annotators review confident predictions on unlabeled
//! retweet edges, one verdict per item. Verdicts are appended to a
//! line-delimited JSON log before they are acknowledged, and the log is the
//! only persistent state: restarting the service replays it.
//!
//! HTTP API:
//!
//! * `GET /api/queue?class=<pro_russian|pro_ukrainian>&limit=<n>`: pending
//!   items, most confident first.
//! * `POST /api/decisions` with `{"item_id", "verdict", "annotator_id"}`:
//!   records a verdict and returns it with the updated statistics.
//! * `GET /api/stats`: per-class review counts and hit rates.

mod error;
mod log;
mod server;
mod state;

pub use error::{Error, Result};
pub use log::{recover, DecisionLog, Recovery};
pub use server::{router, serve, DecisionRequest, DecisionResponse, Service, Shared};
pub use state::{load_queue, write_queue, TriageState};
