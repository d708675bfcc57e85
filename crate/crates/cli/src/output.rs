use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gapbox::Error;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Process exit codes.
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::NoConvergence(_) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

pub type CmdResult<T = ()> = std::result::Result<T, Failure>;

/// Output directory plus the hash and seed stamped into every file.
pub struct Sink {
    dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
}

/// SHA-256 of the compact JSON form of `config`. `serde_json` maps keep
/// keys sorted, so the form is canonical.
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl Sink {
    pub fn new(dir: &Path, config: &Value, seed: u64) -> CmdResult<Sink> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            config_hash: config_hash(config),
            seed,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `{config_hash, seed, ...body}` as pretty JSON.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> CmdResult {
        let mut value = json!({
            "config_hash": self.config_hash,
            "seed": self.seed,
        });
        let body = serde_json::to_value(body).map_err(|e| Failure::validation(e.to_string()))?;
        match body {
            Value::Object(map) => value.as_object_mut().unwrap().extend(map),
            other => {
                value["data"] = other;
            }
        }
        let text = serde_json::to_string_pretty(&value).expect("value serializes");
        fs::write(self.dir.join(name), text + "\n")?;
        Ok(())
    }

    /// CSV with a `# config_hash:` comment line before the header.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CmdResult {
        let mut out = format!("# config_hash: {}\n{}\n", self.config_hash, header.join(","));
        for row in rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(self.dir.join(name), out)?;
        Ok(())
    }

    /// Timestamps live only here, so every other file is reproducible.
    pub fn run_meta(&self, command: &str, started: SystemTime) -> CmdResult {
        let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let meta = json!({
            "command": command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "started_unix": secs(started),
            "finished_unix": secs(SystemTime::now()),
            "version": env!("CARGO_PKG_VERSION"),
        });
        fs::write(
            self.dir.join("run_meta.json"),
            serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
        )?;
        Ok(())
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v}"))
}
