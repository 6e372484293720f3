use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::args::{Format, GlobalArgs};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn from_check(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl From<mkflow::sde::CheckStatus> for Status {
    fn from(s: mkflow::sde::CheckStatus) -> Self {
        match s {
            mkflow::sde::CheckStatus::Pass => Status::Pass,
            mkflow::sde::CheckStatus::Fail => Status::Fail,
            mkflow::sde::CheckStatus::Inconclusive => Status::Inconclusive,
        }
    }
}

pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub outputs: Value,
    pub status: Status,
    /// Tabular form for `--format csv`, when the command has one.
    pub csv: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, inputs: Value, outputs: Value, status: Status) -> Self {
        Self {
            command,
            inputs,
            outputs,
            status,
            csv: None,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn document(&self, global: &GlobalArgs) -> Value {
        let mut provenance = json!({
            "seed": global.seed,
            "version": env!("CARGO_PKG_VERSION"),
        });
        if !global.no_timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            provenance["timestamp"] = json!(secs);
        }
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "status": self.status.as_str(),
            "provenance": provenance,
        })
    }

    /// Writes the report in the requested format and returns its status.
    pub fn emit(self, global: &GlobalArgs) -> Result<Status, CliError> {
        let text = match global.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.document(global))
                    .expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone().ok_or_else(|| {
                CliError::Usage(format!(
                    "{} has no CSV output; use --format json",
                    self.command
                ))
            })?,
        };
        match &global.out {
            Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })?;
            }
        }
        Ok(self.status)
    }
}
