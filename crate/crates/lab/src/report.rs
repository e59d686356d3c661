//! JSON reports and commented CSV tables.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::LabError;

pub const SURROGATE_NOTE: &str = "values compare measured induced cochains with their closed-form core terms; \
norms of reduced classes are infima over representatives and are not computed";

/// A result together with the resolved config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub note: String,
    pub config: ExperimentConfig,
    pub results: T,
}

impl<T: Serialize + DeserializeOwned> Report<T> {
    pub fn new(config: ExperimentConfig, results: T) -> Report<T> {
        Report {
            schema_version: SCHEMA_VERSION,
            note: SURROGATE_NOTE.to_string(),
            config,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String, LabError> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        Ok(fs::write(path, self.to_json()? + "\n")?)
    }

    pub fn read(path: &Path) -> Result<Report<T>, LabError> {
        crate::config::read_json(path)
    }
}

/// Writes `rows` as CSV behind `#` header lines giving the schema version and the surrogate note.
pub fn write_csv<W: Write, R: Serialize>(mut out: W, rows: &[R]) -> Result<(), LabError> {
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(out, "# {SURROGATE_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>, LabError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::Config(format!("csv: {e}"))
}
