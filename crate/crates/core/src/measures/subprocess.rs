//! External estimator speaking line-delimited JSON over a child's stdio.
//!
//! Request: `{"id","bitmap","rows","cols","columns","csv_path"}` where the CSV
//! holds the materialized dataset with compressed rows expanded. Response:
//! `{"id","measures":{name: raw}}`.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Estimator, RawMeasures};
use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::operators::DatasetView;
use crate::tabular::UniversalTable;

pub const DEFAULT_TIMEOUT_SECS: f64 = 60.0;

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubprocessConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub measures: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default)]
    pub min_feature_columns: usize,
    /// Directory the command runs in; the caller's when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_dir: Option<std::path::PathBuf>,
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    bitmap: String,
    rows: u64,
    cols: usize,
    columns: Vec<String>,
    csv_path: &'a str,
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    measures: RawMeasures,
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: Option<String>,
}

pub struct SubprocessEstimator {
    cfg: SubprocessConfig,
    tmpdir: PathBuf,
    inner: Mutex<Channel>,
}

impl SubprocessEstimator {
    pub fn spawn(cfg: SubprocessConfig) -> Result<Self> {
        let (prog, args) = cfg
            .command
            .split_first()
            .ok_or_else(|| Error::Config("subprocess estimator needs a command".into()))?;
        if !(cfg.timeout_secs > 0.0 && cfg.timeout_secs.is_finite()) {
            return Err(Error::Config("subprocess timeout must be positive".into()));
        }
        let mut cmd = Command::new(prog);
        if let Some(dir) = &cfg.working_dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().unwrap();
        let stdout = child.stdout.take().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let tmpdir = std::env::var_os("SKYFORGE_TMPDIR")
            .map(PathBuf::from)
            .unwrap_or_else(std::env::temp_dir);
        // The command may run elsewhere, so hand it absolute paths.
        let tmpdir = std::path::absolute(&tmpdir)?;
        Ok(SubprocessEstimator {
            cfg,
            tmpdir,
            inner: Mutex::new(Channel {
                child,
                stdin,
                lines: rx,
                next_id: 0,
                broken: None,
            }),
        })
    }

    fn call(&self, ch: &mut Channel, u: &UniversalTable, b: &StateBitmap, view: &DatasetView) -> std::result::Result<RawMeasures, String> {
        let id = ch.next_id;
        ch.next_id += 1;
        let path = self
            .tmpdir
            .join(format!("skyforge-{}-{id}-{}.csv", std::process::id(), b.to_hex()));
        let file = std::fs::File::create(&path).map_err(|e| format!("temp csv {}: {e}", path.display()))?;
        view.write_csv(u, std::io::BufWriter::new(file), true)
            .map_err(|e| format!("writing temp csv: {e}"))?;
        let req = Request {
            id,
            bitmap: b.to_hex(),
            rows: view.expanded_rows(u),
            cols: view.columns.len(),
            columns: view.column_names(u),
            csv_path: path.to_str().ok_or("temp path is not UTF-8")?,
        };
        let outcome = (|| {
            let mut line = serde_json::to_string(&req).map_err(|e| e.to_string())?;
            line.push('\n');
            ch.stdin
                .write_all(line.as_bytes())
                .and_then(|_| ch.stdin.flush())
                .map_err(|e| format!("write to estimator: {e}"))?;
            let timeout = Duration::from_secs_f64(self.cfg.timeout_secs);
            let reply = match ch.lines.recv_timeout(timeout) {
                Ok(Ok(l)) => l,
                Ok(Err(e)) => return Err(format!("read from estimator: {e}")),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(format!("no response within {} s", self.cfg.timeout_secs))
                }
                Err(RecvTimeoutError::Disconnected) => return Err("estimator closed its output".into()),
            };
            let resp: Response =
                serde_json::from_str(&reply).map_err(|e| format!("malformed response `{reply}`: {e}"))?;
            if resp.id != id {
                return Err(format!("response id {} does not match request {id}", resp.id));
            }
            Ok(resp.measures)
        })();
        let _ = std::fs::remove_file(&path);
        outcome
    }
}

impl Estimator for SubprocessEstimator {
    fn measures(&self) -> Vec<String> {
        self.cfg.measures.clone()
    }

    fn min_feature_columns(&self) -> usize {
        self.cfg.min_feature_columns
    }

    fn estimate(&self, u: &UniversalTable, b: &StateBitmap, view: &DatasetView) -> std::result::Result<RawMeasures, String> {
        let mut ch = self.inner.lock().unwrap();
        if let Some(why) = &ch.broken {
            return Err(format!("estimator unusable after earlier failure: {why}"));
        }
        let out = self.call(&mut ch, u, b, view);
        if let Err(e) = &out {
            // Framing is lost after a failure; later calls fail fast.
            ch.broken = Some(e.clone());
            let _ = ch.child.kill();
        }
        out
    }
}

impl Drop for SubprocessEstimator {
    fn drop(&mut self) {
        if let Ok(ch) = self.inner.get_mut() {
            let _ = ch.child.kill();
            let _ = ch.child.wait();
        }
    }
}
