//! JSON Lines persistence for instance datasets, one instance per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Instance, Region};
use crate::cnf::{Assignment, Clause, CnfFormula};
use crate::solver::Verdict;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: schema version {found}, expected {DATASET_SCHEMA_VERSION}")]
    SchemaVersionMismatch { line: usize, found: u32 },
    #[error("line {line}: corrupt record: {reason}")]
    CorruptLine { line: usize, reason: String },
}

#[derive(Serialize, Deserialize)]
struct InstanceLine {
    schema_version: u32,
    id: String,
    n: u32,
    m: u32,
    alpha: f64,
    seed: u64,
    index: usize,
    label: Verdict,
    region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Assignment>,
    clauses: Vec<Clause>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

impl From<&Instance> for InstanceLine {
    fn from(inst: &Instance) -> Self {
        InstanceLine {
            schema_version: DATASET_SCHEMA_VERSION,
            id: inst.id.clone(),
            n: inst.n,
            m: inst.m,
            alpha: inst.alpha,
            seed: inst.seed,
            index: inst.index,
            label: inst.label,
            region: inst.region,
            model_count: inst.model_count,
            witness: inst.witness.clone(),
            clauses: inst.formula.clauses().to_vec(),
        }
    }
}

impl InstanceLine {
    fn into_instance(self) -> Result<Instance, String> {
        if self.clauses.len() != self.m as usize {
            return Err(format!("m = {} but {} clauses", self.m, self.clauses.len()));
        }
        let formula = CnfFormula::new(self.n, self.clauses).map_err(|e| e.to_string())?;
        if let Some(count) = self.model_count {
            if (count > 0) != self.label.is_sat() {
                return Err(format!("label {} disagrees with model count {count}", self.label));
            }
        }
        Ok(Instance {
            id: self.id,
            formula,
            n: self.n,
            m: self.m,
            alpha: self.alpha,
            label: self.label,
            model_count: self.model_count,
            region: self.region,
            seed: self.seed,
            index: self.index,
            witness: self.witness,
        })
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string(&InstanceLine::from(inst)).expect("instance serializes")
}

pub fn write_dataset(instances: &[Instance], path: &Path) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(File::create(path)?);
    for inst in instances {
        out.write_all(instance_to_json(inst).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<Instance>, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line, line_no)?);
    }
    Ok(out)
}

fn parse_line(line: &str, line_no: usize) -> Result<Instance, DatasetError> {
    let corrupt = |reason: String| DatasetError::CorruptLine {
        line: line_no,
        reason,
    };
    let probe: VersionProbe = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
    if probe.schema_version != DATASET_SCHEMA_VERSION {
        return Err(DatasetError::SchemaVersionMismatch {
            line: line_no,
            found: probe.schema_version,
        });
    }
    let raw: InstanceLine = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
    raw.into_instance().map_err(corrupt)
}
