use serde::Serialize;
use serde_json::Value;

use crate::Format;
use dwarith::{Error, Result};

/// Everything a subcommand reports; the three formats are views of it.
pub struct Outcome {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub passed: bool,
    pub results: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub text: String,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: &'a Value,
    passed: bool,
    results: &'a Value,
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::ContractViolation(format!("serialization failed: {e}")))
}

impl Outcome {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let env = Envelope {
                    tool: "dwarith",
                    version: env!("CARGO_PKG_VERSION"),
                    command: self.command,
                    seed: self.seed,
                    config: &self.config,
                    passed: self.passed,
                    results: &self.results,
                };
                serde_json::to_string_pretty(&env)
                    .map(|s| s + "\n")
                    .map_err(|e| Error::ContractViolation(format!("serialization failed: {e}")))
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let fail = |e: csv::Error| Error::ContractViolation(format!("csv: {e}"));
                w.write_record(&self.header).map_err(fail)?;
                for r in &self.rows {
                    w.write_record(r).map_err(fail)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::ContractViolation(format!("csv: {e}")))?;
                String::from_utf8(bytes).map_err(|e| Error::ContractViolation(format!("csv: {e}")))
            }
            Format::Text => {
                let mut s = self.text.clone();
                if let Some(seed) = self.seed {
                    s = format!("seed: {seed:#x}\n{s}");
                }
                s.push_str(if self.passed { "result: pass\n" } else { "result: FAIL\n" });
                Ok(s)
            }
        }
    }
}
