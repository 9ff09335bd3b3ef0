//! Report envelopes and their JSON / CSV renderings.

use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a subcommand produced. `seed` is set exactly for stochastic runs.
pub struct Report {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub result: Value,
    pub table: Option<Table>,
    pub default_format: Format,
}

impl Report {
    pub fn json(command: &'static str, seed: Option<u64>, result: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            command,
            seed,
            result: serde_json::to_value(result)?,
            table: None,
            default_format: Format::Json,
        })
    }

    pub fn with_table(mut self, table: Table, default_format: Format) -> Self {
        self.table = Some(table);
        self.default_format = default_format;
        self
    }

    pub fn render(&self, format: Option<Format>, deterministic: bool) -> Result<String, CliError> {
        let timestamp = (!deterministic).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        match format.unwrap_or(self.default_format) {
            Format::Json => {
                let mut env = json!({ "command": self.command });
                if let Some(seed) = self.seed {
                    env["seed"] = json!(seed);
                }
                if let Some(ts) = timestamp {
                    env["timestamp"] = json!(ts);
                }
                env["result"] = self.result.clone();
                Ok(serde_json::to_string_pretty(&env)? + "\n")
            }
            Format::Csv => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| CliError::Usage(format!("{} has no CSV output; use --format json", self.command)))?;
                let mut out = format!("# command: {}\n", self.command);
                if let Some(seed) = self.seed {
                    out += &format!("# seed: {seed}\n");
                }
                if let Some(ts) = timestamp {
                    out += &format!("# timestamp: {ts}\n");
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header)?;
                for row in &table.rows {
                    w.write_record(row)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
                out += &String::from_utf8(bytes).expect("csv output is UTF-8");
                Ok(out)
            }
        }
    }
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
