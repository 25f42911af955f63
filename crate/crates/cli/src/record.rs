use std::io::Write;
use std::time::Instant;

use perc_core::SpecFields;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One JSON line of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub command: String,
    pub spec: Option<SpecFields>,
    /// Every parameter that was set, enough to replay the run with `--config`.
    pub parameters: Value,
    pub seed: u64,
    pub samples: Option<u64>,
    /// Results computed by enumeration carry no standard error.
    pub exact: bool,
    pub censored_fraction: Option<f64>,
    pub results: Value,
    pub log_base: String,
    pub code_revision: String,
    pub wall_time_s: f64,
}

pub fn code_revision() -> String {
    format!(
        "perc {}{}",
        env!("CARGO_PKG_VERSION"),
        option_env!("PERC_REVISION")
            .map(|r| format!("+{r}"))
            .unwrap_or_default()
    )
}

/// Stamps records of one command with the shared fields.
pub struct Recorder<'a> {
    pub command: &'a str,
    pub parameters: Value,
    pub seed: u64,
    pub sink: &'a mut dyn Write,
    started: Instant,
}

pub struct Body {
    pub spec: Option<SpecFields>,
    pub samples: Option<u64>,
    pub exact: bool,
    pub censored_fraction: Option<f64>,
    pub results: Value,
}

impl<'a> Recorder<'a> {
    pub fn new(command: &'a str, parameters: Value, seed: u64, sink: &'a mut dyn Write) -> Self {
        Recorder {
            command,
            parameters,
            seed,
            sink,
            started: Instant::now(),
        }
    }

    pub fn emit(&mut self, body: Body) -> Result<(), CliError> {
        let rec = ExperimentRecord {
            schema_version: SCHEMA_VERSION,
            command: self.command.to_string(),
            spec: body.spec,
            parameters: self.parameters.clone(),
            seed: self.seed,
            samples: body.samples,
            exact: body.exact,
            censored_fraction: body.censored_fraction,
            results: body.results,
            log_base: "natural".into(),
            code_revision: code_revision(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let line = serde_json::to_string(&rec).expect("record serializes");
        writeln!(self.sink, "{line}")
            .and_then(|_| self.sink.flush())
            .map_err(|e| CliError::Io(e.to_string()))?;
        self.started = Instant::now();
        Ok(())
    }
}
