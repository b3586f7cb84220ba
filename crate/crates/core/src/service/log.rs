use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::ServiceError;

pub const GENESIS: &str = "0000000000000000000000000000000000000000000000000000000000000000";

/// One JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t_ms: u64,
    pub kind: String,
    pub payload: Value,
    pub prev: String,
    pub hash: String,
}

/// `sha256(prev || canonical({kind, payload, t_ms}))`, hex encoded. Object
/// keys serialize sorted, so the body is canonical.
pub fn chain_hash(prev: &str, t_ms: u64, kind: &str, payload: &Value) -> String {
    let body = json!({ "kind": kind, "payload": payload, "t_ms": t_ms });
    let mut h = Sha256::new();
    h.update(prev.as_bytes());
    h.update(serde_json::to_vec(&body).expect("json value"));
    hex::encode(h.finalize())
}

/// Append-only hash-chained event log, optionally mirrored to a file.
#[derive(Debug)]
pub struct SessionLog {
    records: Vec<LogRecord>,
    sink: Option<BufWriter<File>>,
}

impl Default for SessionLog {
    fn default() -> Self {
        Self::new()
    }
}

impl SessionLog {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
            sink: None,
        }
    }

    pub fn to_file(path: &Path) -> io::Result<Self> {
        Ok(Self {
            records: Vec::new(),
            sink: Some(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn last_hash(&self) -> &str {
        self.records.last().map_or(GENESIS, |r| r.hash.as_str())
    }

    /// Appends an event. Timestamps may not go backwards.
    pub fn append(
        &mut self,
        t_ms: u64,
        kind: &str,
        payload: Value,
    ) -> Result<&LogRecord, ServiceError> {
        if let Some(last) = self.records.last() {
            if t_ms < last.t_ms {
                return Err(ServiceError::Log(format!(
                    "timestamp {t_ms} before {}",
                    last.t_ms
                )));
            }
        }
        let prev = self.last_hash().to_string();
        let hash = chain_hash(&prev, t_ms, kind, &payload);
        let rec = LogRecord {
            t_ms,
            kind: kind.to_string(),
            payload,
            prev,
            hash,
        };
        if let Some(w) = &mut self.sink {
            serde_json::to_writer(&mut *w, &rec).map_err(|e| ServiceError::Log(e.to_string()))?;
            w.write_all(b"\n")
                .map_err(|e| ServiceError::Log(e.to_string()))?;
        }
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn flush(&mut self) -> io::Result<()> {
        if let Some(w) = &mut self.sink {
            w.flush()?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("json"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_jsonl())
    }
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>, ServiceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ServiceError::Log(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, ServiceError> {
    let f = File::open(path).map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| ServiceError::Log(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

/// Checks links, hashes and timestamp order. The error names the first
/// bad line (1-based).
pub fn verify_chain(records: &[LogRecord]) -> Result<(), ServiceError> {
    let mut prev = GENESIS.to_string();
    let mut last_t = 0;
    for (i, r) in records.iter().enumerate() {
        let bad = |what: &str| ServiceError::ChainBroken {
            line: i + 1,
            reason: what.to_string(),
        };
        if r.prev != prev {
            return Err(bad("link does not match previous hash"));
        }
        if chain_hash(&r.prev, r.t_ms, &r.kind, &r.payload) != r.hash {
            return Err(bad("hash does not match contents"));
        }
        if r.t_ms < last_t {
            return Err(bad("timestamp goes backwards"));
        }
        last_t = r.t_ms;
        prev = r.hash.clone();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SessionLog {
        let mut log = SessionLog::new();
        log.append(0, "header", json!({"seed": 1})).unwrap();
        log.append(100, "command", json!({"seq": 1, "left": "rest"}))
            .unwrap();
        log.append(100, "mode", json!({"mode": "wrist"})).unwrap();
        log
    }

    #[test]
    fn chain_verifies_and_round_trips() {
        let log = sample();
        verify_chain(log.records()).unwrap();
        let back = parse_log(&log.to_jsonl()).unwrap();
        assert_eq!(back, log.records());
    }

    #[test]
    fn tampering_is_detected() {
        let mut recs = sample().records().to_vec();
        recs[1].payload["left"] = json!("wrist_forward");
        match verify_chain(&recs) {
            Err(ServiceError::ChainBroken { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let mut recs = sample().records().to_vec();
        recs.remove(1);
        assert!(verify_chain(&recs).is_err());
    }

    #[test]
    fn time_is_monotone() {
        let mut log = sample();
        assert!(log.append(50, "late", Value::Null).is_err());
    }

    #[test]
    fn file_sink_matches_memory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let mut log = SessionLog::to_file(&path).unwrap();
        log.append(0, "header", json!({})).unwrap();
        log.append(10, "x", json!([1, 2])).unwrap();
        log.flush().unwrap();
        assert_eq!(read_log(&path).unwrap(), log.records());
    }
}
