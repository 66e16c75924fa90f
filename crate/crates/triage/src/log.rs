use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use stance_core::network::{AnnotationDecision, TriageItem};

use crate::{Error, Result, TriageState};

/// Append-only decision log, one JSON object per line.
#[derive(Debug)]
pub struct DecisionLog {
    file: File,
    path: PathBuf,
    last_stamp: i64,
}

/// What replaying a log found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recovery {
    pub replayed: usize,
    /// Bytes of an unreadable final line that were cut off.
    pub truncated_bytes: u64,
    /// Logged decisions for items missing from the queue.
    pub skipped_unknown: usize,
}

impl DecisionLog {
    /// Opens or creates the log and returns the decisions already in it.
    /// An unreadable last line, left by a write that never completed, is
    /// truncated; an unreadable line anywhere else is an error.
    pub fn open(path: &Path) -> Result<(DecisionLog, Vec<AnnotationDecision>, u64)> {
        let io = |e| Error::io(path, e);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(io)?;

        let mut decisions = Vec::new();
        let mut good_end = 0usize;
        let mut pos = 0usize;
        let mut line_no = 0usize;
        let mut bad: Option<(usize, String)> = None;
        while pos < bytes.len() {
            line_no += 1;
            let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|k| pos + k);
            let line = &bytes[pos..end.unwrap_or(bytes.len())];
            let next = end.map_or(bytes.len(), |e| e + 1);
            if line.iter().all(u8::is_ascii_whitespace) {
                pos = next;
                continue;
            }
            if let Some((line, reason)) = bad {
                return Err(Error::CorruptLog {
                    path: path.to_path_buf(),
                    line,
                    reason,
                });
            }
            let parsed = std::str::from_utf8(line)
                .map_err(|e| e.to_string())
                .and_then(|s| serde_json::from_str::<AnnotationDecision>(s).map_err(|e| e.to_string()));
            match parsed {
                Ok(d) => {
                    decisions.push(d);
                    good_end = next;
                }
                Err(reason) => bad = Some((line_no, reason)),
            }
            pos = next;
        }

        let mut truncated = 0;
        if let Some((line, reason)) = bad {
            truncated = (bytes.len() - good_end) as u64;
            tracing::warn!(path = %path.display(), line, %reason, bytes = truncated, "truncating incomplete decision log entry");
            file.set_len(good_end as u64).map_err(io)?;
            file.sync_data().map_err(io)?;
        } else if good_end > 0 && bytes[good_end - 1] != b'\n' {
            file.write_all(b"\n").map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        file.seek(SeekFrom::End(0)).map_err(io)?;

        let last_stamp = decisions.iter().map(|d| d.decided_at).max().unwrap_or(i64::MIN);
        Ok((
            DecisionLog {
                file,
                path: path.to_path_buf(),
                last_stamp,
            },
            decisions,
            truncated,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Latest `decided_at` in the log.
    pub fn last_stamp(&self) -> Option<i64> {
        (self.last_stamp != i64::MIN).then_some(self.last_stamp)
    }

    /// Writes one decision and waits until it reaches the disk.
    pub fn append(&mut self, decision: &AnnotationDecision) -> Result<()> {
        let mut line = serde_json::to_vec(decision).expect("decision serializes");
        line.push(b'\n');
        let io = |e| Error::io(&self.path, e);
        self.file.write_all(&line).map_err(io)?;
        self.file.sync_data().map_err(io)?;
        self.last_stamp = self.last_stamp.max(decision.decided_at);
        Ok(())
    }
}

/// Rebuilds the service state for `items` by replaying the log at `path`.
pub fn recover(path: &Path, items: Vec<TriageItem>) -> Result<(TriageState, DecisionLog, Recovery)> {
    let (log, decisions, truncated_bytes) = DecisionLog::open(path)?;
    let mut state = TriageState::new(items)?;
    let mut report = Recovery {
        truncated_bytes,
        ..Default::default()
    };
    for d in &decisions {
        match state.apply(d) {
            Ok(_) => report.replayed += 1,
            Err(Error::UnknownItem(id)) => {
                tracing::warn!(item = %id, "logged decision for an item not in the queue");
                report.skipped_unknown += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((state, log, report))
}
