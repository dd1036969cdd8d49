//! Curve data, the decomposition comparison table, and the store audit.

use std::collections::BTreeMap;

use serde::Serialize;

use super::store::{best_of, point_key, ResultStore, StoreEntry};
use crate::error::{Error, Result};
use crate::linalg::unitarity_deviation;
use crate::optimizer::OptimizationRecord;
use crate::weyl::{canonicalize, WeylCoordinates};

/// Tolerance for re-scored fidelity and success.
pub const AUDIT_TOL: f64 = 1e-9;
/// Tolerance on the Frobenius norm of `U†U - I` for stored devices.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub ancilla_photons: usize,
    pub family: String,
    pub success: f64,
    pub fidelity: f64,
    pub record: String,
    /// Best family at this point for this photon budget.
    pub envelope: bool,
}

/// Best record per (point, photon budget, family), ordered by point then
/// family. The envelope flag marks the optimum at each point.
pub fn curve_rows(store: &ResultStore) -> Vec<CurveRow> {
    type Key = (String, usize);
    let mut groups: BTreeMap<Key, BTreeMap<String, &OptimizationRecord>> = BTreeMap::new();
    for e in store.entries() {
        let StoreEntry::Record { point, record, .. } = e else { continue };
        let fam = groups
            .entry((point.clone(), record.device.ancilla_photons()))
            .or_default();
        let slot = fam.entry(record.family_id.clone()).or_insert(record);
        if record.success > slot.success {
            *slot = record;
        }
    }
    let mut rows = Vec::new();
    for ((_, photons), fams) in groups {
        let best = best_of(fams.values().copied()).map(|r| r.id.clone());
        for (family, r) in fams {
            let c = canonicalize(r.weyl().expect("stored records carry coordinates"));
            rows.push(CurveRow {
                c1: c.c1,
                c2: c.c2,
                c3: c.c3,
                ancilla_photons: photons,
                family,
                success: r.success,
                fidelity: r.fidelity,
                envelope: best.as_deref() == Some(r.id.as_str()),
                record: r.id.clone(),
            });
        }
    }
    rows
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("c1,c2,c3,ancilla_photons,family,success,fidelity,record,envelope\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.c1, r.c2, r.c3, r.ancilla_photons, r.family, r.success, r.fidelity, r.record, r.envelope
        ));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub scheme: String,
    pub success: f64,
    pub ancilla_photons: usize,
}

/// Success and photon cost of a generic two-qubit gate built from three
/// CNOTs, from two B gates, or in one shot, using stored optima.
pub fn decomposition_comparison(store: &ResultStore) -> Result<Vec<ComparisonRow>> {
    let best = |c: WeylCoordinates, name: &str| {
        store
            .best_at(&point_key(c))
            .ok_or_else(|| Error::MissingRecord(name.to_string()))
    };
    let cnot = best(WeylCoordinates::cnot(), "CNOT")?;
    let b = best(WeylCoordinates::b_gate(), "B")?;
    let mut per_point: BTreeMap<&str, f64> = BTreeMap::new();
    for e in store.entries() {
        if let StoreEntry::Record { point, record, .. } = e {
            if record.device.ancilla_photons() == 3 {
                let s = per_point.entry(point.as_str()).or_insert(0.0);
                *s = s.max(record.success);
            }
        }
    }
    let single = per_point
        .values()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| Error::MissingRecord("single-shot (3-photon) points".into()))?;
    Ok(vec![
        ComparisonRow {
            scheme: "3 CNOT".into(),
            success: cnot.success.powi(3),
            ancilla_photons: 3 * cnot.device.ancilla_photons(),
        },
        ComparisonRow {
            scheme: "2 B".into(),
            success: b.success.powi(2),
            ancilla_photons: 2 * b.device.ancilla_photons(),
        },
        ComparisonRow {
            scheme: "single shot".into(),
            success: single,
            ancilla_photons: 3,
        },
    ])
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("scheme,success,ancilla_photons\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.scheme, r.success, r.ancilla_photons));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditFailure {
    pub record: String,
    pub reason: String,
}

/// Re-scores every stored record from its unitary.
pub fn audit(store: &ResultStore) -> Vec<AuditFailure> {
    let mut failures = Vec::new();
    for r in store.records() {
        let fail = |reason: String| AuditFailure {
            record: r.id.clone(),
            reason,
        };
        let dev = unitarity_deviation(&r.matrix.entries);
        if !(dev <= UNITARITY_TOL) {
            failures.push(fail(format!("stored matrix is not unitary (deviation {dev:e})")));
            continue;
        }
        match r.rescore() {
            Ok(s) => {
                let (df, ds) = ((s.fidelity - r.fidelity).abs(), (s.success - r.success).abs());
                if !(df <= AUDIT_TOL && ds <= AUDIT_TOL) {
                    failures.push(fail(format!(
                        "re-scored F={} S={} vs stored F={} S={}",
                        s.fidelity, s.success, r.fidelity, r.success
                    )));
                }
            }
            Err(e) => failures.push(fail(e.to_string())),
        }
    }
    failures
}
