//! Append-only result store: one JSON object per line in `records.jsonl`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{DeviceConfig, OptimizationRecord};
use crate::weyl::{canonicalize, WeylCoordinates};

pub const STORE_FILE: &str = "records.jsonl";

/// Canonical coordinates rounded to a string, shared by equivalent gates.
pub fn point_key(c: WeylCoordinates) -> String {
    let k = canonicalize(c);
    let r = |v: f64| {
        let v = (v * 1e9).round() / 1e9;
        // avoid "-0.000000000"
        if v == 0.0 {
            0.0
        } else {
            v
        }
    };
    format!("{:.9},{:.9},{:.9}", r(k.c1), r(k.c2), r(k.c3))
}

/// One line of the store.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StoreEntry {
    Record {
        schema: u32,
        point: String,
        signature: String,
        record: Box<OptimizationRecord>,
    },
    /// A point where no restart reached unit fidelity.
    Infeasible {
        schema: u32,
        point: String,
        signature: String,
        photons: usize,
        best_fidelity: f64,
    },
}

impl StoreEntry {
    pub fn point(&self) -> &str {
        match self {
            StoreEntry::Record { point, .. } | StoreEntry::Infeasible { point, .. } => point,
        }
    }

    pub fn signature(&self) -> &str {
        match self {
            StoreEntry::Record { signature, .. } | StoreEntry::Infeasible { signature, .. } => signature,
        }
    }

    pub fn record(&self) -> Option<&OptimizationRecord> {
        match self {
            StoreEntry::Record { record, .. } => Some(record),
            StoreEntry::Infeasible { .. } => None,
        }
    }
}

pub struct ResultStore {
    path: PathBuf,
    entries: Vec<StoreEntry>,
}

impl ResultStore {
    /// Opens or creates the store in `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = dir.join(STORE_FILE);
        let mut entries = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: StoreEntry = serde_json::from_str(&line)
                    .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
                entries.push(entry);
            }
        }
        Ok(ResultStore { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn entries(&self) -> &[StoreEntry] {
        &self.entries
    }

    pub fn records(&self) -> impl Iterator<Item = &OptimizationRecord> {
        self.entries.iter().filter_map(StoreEntry::record)
    }

    fn append(&mut self, entry: StoreEntry) -> Result<()> {
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        self.entries.push(entry);
        Ok(())
    }

    /// Appends a converged record keyed by its target's canonical point.
    pub fn push_record(&mut self, record: OptimizationRecord) -> Result<()> {
        let weyl = record
            .weyl()
            .ok_or_else(|| Error::Config("records need targets tagged with Weyl coordinates".into()))?;
        self.append(StoreEntry::Record {
            schema: super::config::SCHEMA_VERSION,
            point: point_key(weyl),
            signature: record.device.signature(),
            record: Box::new(record),
        })
    }

    pub fn push_infeasible(&mut self, device: &DeviceConfig, weyl: WeylCoordinates, best_fidelity: f64) -> Result<()> {
        self.append(StoreEntry::Infeasible {
            schema: super::config::SCHEMA_VERSION,
            point: point_key(weyl),
            signature: device.signature(),
            photons: device.ancilla_photons(),
            best_fidelity,
        })
    }

    /// Whether any entry exists for this point and device signature.
    pub fn has_point(&self, point: &str, signature: &str) -> bool {
        self.entries.iter().any(|e| e.point() == point && e.signature() == signature)
    }

    /// Records for a canonical point, any device.
    pub fn records_at(&self, point: &str) -> impl Iterator<Item = (&str, &OptimizationRecord)> {
        let point = point.to_string();
        self.entries.iter().filter_map(move |e| match e {
            StoreEntry::Record {
                point: p,
                signature,
                record,
                ..
            } if *p == point => Some((signature.as_str(), record.as_ref())),
            _ => None,
        })
    }

    /// Highest-success record at a canonical point, any device.
    pub fn best_at(&self, point: &str) -> Option<&OptimizationRecord> {
        best_of(self.records_at(point).map(|(_, r)| r))
    }
}

/// Highest success; ties go to the earlier record.
pub fn best_of<'a>(records: impl Iterator<Item = &'a OptimizationRecord>) -> Option<&'a OptimizationRecord> {
    records.fold(None, |best: Option<&OptimizationRecord>, r| match best {
        Some(b) if b.success >= r.success => Some(b),
        _ => Some(r),
    })
}
