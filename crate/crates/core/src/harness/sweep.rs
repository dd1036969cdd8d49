//! Line, lattice and single-point sweeps over the Weyl chamber.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{DeviceSpec, SweepConfig, SweepKind};
use super::store::{best_of, point_key, ResultStore};
use crate::error::{Error, Result};
use crate::optimizer::{self, OptimizationRecord, OptimizerSettings};
use crate::weyl::{canonicalize, gate_from_coordinates, in_quarter_chamber, WeylCoordinates, CANON_TOL};

/// Resolved sweep: canonical, deduplicated points plus resources.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub points: Vec<WeylCoordinates>,
    /// Points closer than this count as neighbours for continuation.
    pub neighbour_radius: f64,
    pub device: DeviceSpec,
    pub settings: OptimizerSettings,
}

/// Canonical points in first-seen order with equivalent points dropped.
pub fn dedup_canonical(points: impl IntoIterator<Item = WeylCoordinates>) -> Vec<WeylCoordinates> {
    let mut seen = std::collections::HashSet::new();
    points
        .into_iter()
        .map(canonicalize)
        .filter(|c| seen.insert(point_key(*c)))
        .collect()
}

/// Points of the cubic lattice `spacing * Z^3` inside the quarter chamber.
pub fn lattice_points(spacing: f64) -> Result<Vec<WeylCoordinates>> {
    if !(spacing > 0.0) || FRAC_PI_2 / spacing > 256.0 {
        return Err(Error::Config(format!("lattice spacing {spacing} out of range")));
    }
    let n = (FRAC_PI_2 / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=i {
            for k in 0..=j {
                let c = WeylCoordinates::new(i as f64 * spacing, j as f64 * spacing, k as f64 * spacing);
                if in_quarter_chamber(&c, CANON_TOL) {
                    out.push(c);
                }
            }
        }
    }
    Ok(dedup_canonical(out))
}

impl SweepSpec {
    pub fn from_config(cfg: &SweepConfig, spacing_override: Option<f64>) -> Result<Self> {
        let settings = cfg.effective_settings();
        let (points, radius) = match &cfg.sweep {
            SweepKind::Single { point } => (dedup_canonical([coords(point)]), 0.0),
            SweepKind::Line { from, to, points } => {
                if *points < 2 {
                    return Err(Error::Config("a line needs at least two points".into()));
                }
                let (a, b) = (coords(from).as_array(), coords(to).as_array());
                let pts = (0..*points).map(|i| {
                    let t = i as f64 / (*points - 1) as f64;
                    WeylCoordinates::new(
                        a[0] + t * (b[0] - a[0]),
                        a[1] + t * (b[1] - a[1]),
                        a[2] + t * (b[2] - a[2]),
                    )
                });
                let step = (0..3).map(|k| (b[k] - a[k]).powi(2)).sum::<f64>().sqrt() / (*points - 1) as f64;
                (dedup_canonical(pts), step * 1.0001)
            }
            SweepKind::Lattice {
                spacing,
                sample,
                sample_seed,
            } => {
                let h = spacing_override.unwrap_or(spacing.0);
                let mut pts = lattice_points(h)?;
                if let Some(k) = sample {
                    let mut rng = ChaCha8Rng::seed_from_u64(*sample_seed);
                    let mut idx: Vec<usize> = (0..pts.len()).collect();
                    idx.shuffle(&mut rng);
                    idx.truncate(*k);
                    idx.sort_unstable();
                    pts = idx.into_iter().map(|i| pts[i]).collect();
                }
                (pts, h * 1.0001)
            }
        };
        Ok(SweepSpec {
            points,
            neighbour_radius: radius,
            device: cfg.device.clone(),
            settings,
        })
    }
}

fn coords(a: &[super::angle::Angle; 3]) -> WeylCoordinates {
    WeylCoordinates::new(a[0].0, a[1].0, a[2].0)
}

fn distance(a: WeylCoordinates, b: WeylCoordinates) -> f64 {
    let (x, y) = (a.as_array(), b.as_array());
    (0..3).map(|k| (x[k] - y[k]).powi(2)).sum::<f64>().sqrt()
}

/// Per-point outcome of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Best success over all families at this point, if any is feasible.
    pub success: Option<f64>,
    pub family: Option<String>,
    pub families: usize,
    pub record: Option<String>,
}

/// Runs every point not already completed in `store`. A point is complete
/// once its fresh multi-start entry is stored; continuations from
/// neighbouring families run before it, so an interrupted sweep resumes at
/// the first incomplete point.
pub fn run_sweep(spec: &SweepSpec, store: &mut ResultStore) -> Result<Vec<SweepRow>> {
    let mut done: Vec<WeylCoordinates> = Vec::new();
    let mut rows = Vec::new();
    for &point in &spec.points {
        let key = point_key(point);
        let device = spec.device.build(gate_from_coordinates(point))?;
        let signature = device.signature();
        if !fresh_done(store, &key, &signature) {
            for parent in neighbour_parents(store, &done, point, spec.neighbour_radius, &signature) {
                let already = store
                    .records_at(&key)
                    .any(|(sig, r)| sig == signature && r.parent.as_deref() == Some(parent.id.as_str()));
                if already {
                    continue;
                }
                match optimizer::continue_family(&parent, &device.target, &spec.settings) {
                    Ok(r) => store.push_record(r)?,
                    Err(Error::Infeasible { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            match optimizer::optimize(&device, &spec.settings) {
                Ok(r) => store.push_record(fresh(r))?,
                Err(Error::Infeasible { best_fidelity }) => store.push_infeasible(&device, point, best_fidelity)?,
                Err(e) => return Err(e),
            }
        }
        done.push(point);
        rows.push(summarize(store, point, &key, &signature));
    }
    Ok(rows)
}

// a fresh multi-start record has no parent
fn fresh(mut r: OptimizationRecord) -> OptimizationRecord {
    r.parent = None;
    r
}

fn fresh_done(store: &ResultStore, key: &str, signature: &str) -> bool {
    store.entries().iter().any(|e| {
        e.point() == key && e.signature() == signature && e.record().map_or(true, |r| r.parent.is_none())
    })
}

/// Best record of each family found at already-swept neighbouring points.
fn neighbour_parents(
    store: &ResultStore,
    done: &[WeylCoordinates],
    point: WeylCoordinates,
    radius: f64,
    signature: &str,
) -> Vec<OptimizationRecord> {
    let mut by_family: BTreeMap<String, &OptimizationRecord> = BTreeMap::new();
    for &q in done {
        if distance(q, point) > radius {
            continue;
        }
        let key = point_key(q);
        for (sig, r) in store.records_at(&key) {
            if sig != signature {
                continue;
            }
            let slot = by_family.entry(r.family_id.clone()).or_insert(r);
            if r.success > slot.success {
                *slot = r;
            }
        }
    }
    by_family.into_values().cloned().collect()
}

fn summarize(store: &ResultStore, point: WeylCoordinates, key: &str, signature: &str) -> SweepRow {
    let here: Vec<&OptimizationRecord> = store
        .records_at(key)
        .filter(|(s, _)| *s == signature)
        .map(|(_, r)| r)
        .collect();
    let families: std::collections::BTreeSet<&str> = here.iter().map(|r| r.family_id.as_str()).collect();
    let best = best_of(here.iter().copied());
    SweepRow {
        c1: point.c1,
        c2: point.c2,
        c3: point.c3,
        success: best.map(|r| r.success),
        family: best.map(|r| r.family_id.clone()),
        families: families.len(),
        record: best.map(|r| r.id.clone()),
    }
}
