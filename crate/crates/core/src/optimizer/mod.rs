//! Search for interferometers that implement a target gate with unit
//! fidelity and maximal heralding probability.
//!
//! Each restart runs two phases over the extended (non-unitary) matrix
//! space. Phase 1 climbs the fidelity alone until it is numerically one.
//! Phase 2 maximizes `S(M/σ_max) - μ(1 - F)` over a geometric schedule of
//! penalty weights. The best restart is rescaled to unit spectral norm and
//! dilated to a unitary on extra vacuum modes.

pub mod cg;
pub mod dilation;
mod objective;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{enumerate_fock_basis, ModeLayout, OccupationVector};
use crate::kraus::{InterferometerMatrix, KrausPlan, Mat4, MeasurementOutcome};
use crate::linalg::{self, CMatrix};
use crate::metrics::{self, GateScore, TargetGate};
use crate::weyl::WeylCoordinates;

pub use cg::{CgResult, CgSettings, CgStatus, Objective};
pub use dilation::dilate;
use objective::{pack, unpack, FidelityObjective, Mask, PenaltyObjective};

/// Interferometer wiring plus the gate it should implement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub layout: ModeLayout,
    pub ancilla_in: OccupationVector,
    pub outcome: MeasurementOutcome,
    pub target: TargetGate,
}

impl DeviceConfig {
    /// `k` ancilla modes holding one photon each, heralded on the same pattern.
    pub fn single_photon_ancillas(k: usize, target: TargetGate) -> Self {
        DeviceConfig {
            layout: ModeLayout::new(k, 0),
            ancilla_in: OccupationVector::singles(k),
            outcome: MeasurementOutcome::new(OccupationVector::singles(k)),
            target,
        }
    }

    pub fn ancilla_photons(&self) -> usize {
        self.ancilla_in.total()
    }

    pub fn plan(&self) -> Result<KrausPlan> {
        KrausPlan::new(self.layout, &self.ancilla_in, &self.outcome)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    /// Stable text summarizing the resources, used to key stored records.
    pub fn signature(&self) -> String {
        format!(
            "anc={} in={} out={} vac={}",
            self.layout.n_ancilla, self.ancilla_in, self.outcome.pattern, self.layout.n_vacuum
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltySchedule {
    pub initial: f64,
    pub factor: f64,
    pub stages: usize,
    /// Extra stages allowed when the fidelity is still short after the
    /// scheduled ones.
    pub extra_stages: usize,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        PenaltySchedule {
            initial: 1.0,
            factor: 10.0,
            stages: 6,
            extra_stages: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub seed: u64,
    /// Accept a device when `1 - F < fidelity_tol`.
    pub fidelity_tol: f64,
    pub penalty_schedule: PenaltySchedule,
    /// Weight of the contraction penalty relative to the fidelity penalty.
    pub excess_weight: f64,
    pub gradient_tol: f64,
    /// CG iteration budget for the fidelity phase.
    pub phase1_iterations: usize,
    /// Fresh starting points a restart may draw before Phase 1 gives up.
    pub phase1_attempts: usize,
    /// CG iteration budget per penalty stage.
    pub max_iterations: usize,
    /// Devices heralding with lower probability count as failures.
    pub min_success: f64,
    /// Try every detection pattern with the right photon number.
    pub outcome_search: bool,
    /// Freeze the logical-0 rails of both qubits to pass straight through.
    pub knill_structure: bool,
    /// Run restarts on the worker pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 50,
            seed: 0,
            fidelity_tol: 1e-6,
            penalty_schedule: PenaltySchedule::default(),
            excess_weight: 1.0,
            gradient_tol: 1e-7,
            phase1_iterations: 1500,
            phase1_attempts: 8,
            max_iterations: 600,
            min_success: 1e-7,
            outcome_search: false,
            knill_structure: false,
            parallel: true,
        }
    }
}

impl OptimizerSettings {
    /// Default restart budget for the given number of ancilla photons.
    pub fn for_ancillas(photons: usize) -> Self {
        OptimizerSettings {
            restarts: if photons >= 3 { 200 } else { 50 },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.penalty_schedule;
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if !(self.fidelity_tol > 0.0 && self.fidelity_tol < 1.0) {
            return Err(Error::Config("fidelity_tol must lie in (0, 1)".into()));
        }
        if !(s.initial > 0.0 && s.factor >= 1.0) || s.stages == 0 {
            return Err(Error::Config("penalty schedule needs initial > 0, factor >= 1, stages >= 1".into()));
        }
        Ok(())
    }
}

/// A converged device with its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub id: String,
    pub device: DeviceConfig,
    /// Dilated unitary; any added modes are vacuum modes detected empty.
    pub matrix: InterferometerMatrix,
    pub fidelity: f64,
    pub success: f64,
    pub family_id: String,
    pub parent: Option<String>,
    pub seed: u64,
    pub restart: usize,
    pub iterations: usize,
    /// Infinity norm of the penalized-objective gradient at termination.
    pub stationarity: f64,
}

impl OptimizationRecord {
    /// Recomputes F and S from the stored unitary.
    pub fn rescore(&self) -> Result<GateScore> {
        metrics::score_device(&self.matrix, &self.device.ancilla_in, &self.device.outcome, &self.device.target)
    }

    pub fn weyl(&self) -> Option<WeylCoordinates> {
        self.device.target.weyl
    }

    /// The extended-space matrix on the device's own modes.
    pub fn compact_matrix(&self) -> CMatrix {
        let n = self.device.layout.total();
        self.matrix.entries.view((0, 0), (n, n)).into_owned()
    }
}

fn record_id(device: &DeviceConfig, matrix: &CMatrix) -> String {
    let mut h = Sha256::new();
    for z in matrix.iter().chain(device.target.matrix.iter()) {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    h.update(device.signature().as_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of one restart in the extended space.
#[derive(Clone, Debug)]
struct RestartOutcome {
    x: Vec<f64>,
    fidelity: f64,
    success: f64,
    iterations: usize,
    stationarity: f64,
    feasible: bool,
}

/// Rescales to unit spectral norm. Under a mask only the free block is
/// rescaled, so the passthrough entries keep their unit value.
fn normalize_point(x: &mut [f64], n: usize, mask: Option<&Mask>) {
    match mask {
        None => {
            let s = linalg::spectral_norm(&unpack(x, n));
            if s > 0.0 && s.is_finite() {
                x.iter_mut().for_each(|v| *v /= s);
            }
        }
        Some(mask) => mask.normalize_free(x, n),
    }
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Two-phase protocol. Phase 1 is retried from fresh starting points, up
/// to `attempts` times, until it reaches unit fidelity.
fn run_protocol(
    plan: &KrausPlan,
    target: &[Complex64; 16],
    mask: Option<&Mask>,
    starts: &mut dyn FnMut() -> Vec<f64>,
    attempts: usize,
    s: &OptimizerSettings,
) -> RestartOutcome {
    let n = plan.modes();
    let phase1 = CgSettings {
        max_iterations: s.phase1_iterations,
        stop_value: Some(1.0 - 1e-3 * s.fidelity_tol),
        gradient_tol: 1e-14,
        stall_tol: 1e-13,
        stall_window: 50,
        ..CgSettings::default()
    };
    let mut iterations = 0;
    let mut best: Option<CgResult> = None;
    for _ in 0..attempts.max(1) {
        let mut x0 = starts();
        if let Some(m) = mask {
            m.apply_to_point(&mut x0, n);
        }
        let r = cg::maximize(&mut FidelityObjective::new(plan, *target, mask), &x0, &phase1);
        iterations += r.iterations;
        let done = r.value >= 1.0 - s.fidelity_tol;
        if best.as_ref().map_or(true, |b| r.value > b.value) {
            best = Some(r);
        }
        if done {
            break;
        }
    }
    let r1 = best.expect("at least one attempt");
    if !(r1.value >= 1.0 - s.fidelity_tol) {
        return RestartOutcome {
            x: r1.x,
            fidelity: r1.value,
            success: 0.0,
            iterations,
            stationarity: f64::NAN,
            feasible: false,
        };
    }
    let mut x = r1.x;
    let stage = CgSettings {
        max_iterations: s.max_iterations,
        gradient_tol: s.gradient_tol,
        stall_tol: 1e-12,
        stall_window: 30,
        ..CgSettings::default()
    };
    let sched = &s.penalty_schedule;
    let mut mu = sched.initial;
    let mut stationarity = f64::NAN;
    let mut parts = None;
    for k in 0..(sched.stages + sched.extra_stages) {
        if k >= sched.stages {
            if let Some(p) = parts {
                let p: objective::PenaltyParts = p;
                if 1.0 - p.fidelity < s.fidelity_tol {
                    break;
                }
            }
        }
        normalize_point(&mut x, n, mask);
        let mut obj = PenaltyObjective::new(plan, *target, mask, mu, s.excess_weight * mu);
        let r = cg::maximize(&mut obj, &x, &stage);
        iterations += r.iterations;
        stationarity = inf_norm(&r.gradient);
        x = r.x;
        parts = Some(obj.parts(&x));
        mu *= sched.factor;
    }
    normalize_point(&mut x, n, mask);
    let obj = PenaltyObjective::new(plan, *target, mask, mu, 0.0);
    let p = obj.parts(&x);
    RestartOutcome {
        feasible: 1.0 - p.fidelity < s.fidelity_tol && p.success >= s.min_success,
        x,
        fidelity: p.fidelity,
        success: p.success,
        iterations,
        stationarity,
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Maps `f` over `0..n`, on the worker pool when requested and available.
/// Output order always follows the index.
pub fn map_indices<R, F>(n: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

fn knill_mask(device: &DeviceConfig, s: &OptimizerSettings) -> Option<Mask> {
    // logical-0 rails: modes 0 and 2
    s.knill_structure.then(|| Mask::passthrough(device.layout.total(), &[0, 2]))
}

/// Best restart for one fixed wiring; `None` if no restart was feasible.
fn best_restart(device: &DeviceConfig, s: &OptimizerSettings) -> Result<(Option<(usize, RestartOutcome)>, f64)> {
    let plan = device.plan()?;
    let target = device.target.entries();
    let n = plan.modes();
    let mask = knill_mask(device, s);
    let outcomes = map_indices(s.restarts, s.parallel, |k| {
        let mut rng = restart_rng(s.seed, k);
        let mut starts = || pack(&linalg::haar_unitary(n, &mut rng));
        run_protocol(&plan, &target, mask.as_ref(), &mut starts, s.phase1_attempts, s)
    });
    let best_f = outcomes.iter().map(|o| o.fidelity).fold(f64::NEG_INFINITY, f64::max);
    let best = outcomes
        .into_iter()
        .enumerate()
        .filter(|(_, o)| o.feasible)
        .fold(None::<(usize, RestartOutcome)>, |acc, (k, o)| match acc {
            Some((_, ref b)) if b.success >= o.success => acc,
            _ => Some((k, o)),
        });
    Ok((best, best_f))
}

fn build_record(
    device: &DeviceConfig,
    outcome: &RestartOutcome,
    family_id: String,
    parent: Option<String>,
    seed: u64,
    restart: usize,
) -> Result<OptimizationRecord> {
    let n = device.layout.total();
    let m = unpack(&outcome.x, n);
    let sigma = linalg::spectral_norm(&m);
    let m = m.map(|z| z / sigma);
    let (u, added) = dilate(&m)?;
    let layout = device.layout.with_vacuum(device.layout.n_vacuum + added);
    let matrix = InterferometerMatrix::physical(u, layout)?;
    let score = metrics::score_device(&matrix, &device.ancilla_in, &device.outcome, &device.target)?;
    Ok(OptimizationRecord {
        id: record_id(device, &matrix.entries),
        device: device.clone(),
        matrix,
        fidelity: score.fidelity,
        success: score.success,
        family_id,
        parent,
        seed,
        restart,
        iterations: outcome.iterations,
        stationarity: outcome.stationarity,
    })
}

fn outcome_candidates(device: &DeviceConfig, s: &OptimizerSettings) -> Vec<DeviceConfig> {
    if !s.outcome_search {
        return vec![device.clone()];
    }
    enumerate_fock_basis(device.ancilla_photons(), device.layout.measured().max(1))
        .into_iter()
        .filter(|o| o.modes() == device.layout.measured())
        .map(|o| DeviceConfig {
            outcome: MeasurementOutcome::new(o),
            ..device.clone()
        })
        .collect()
}

/// Multi-start two-phase optimization; returns the best feasible device.
pub fn optimize(device: &DeviceConfig, settings: &OptimizerSettings) -> Result<OptimizationRecord> {
    settings.validate()?;
    device.validate()?;
    let mut best: Option<(DeviceConfig, usize, RestartOutcome)> = None;
    let mut best_f = f64::NEG_INFINITY;
    let candidates = outcome_candidates(device, settings);
    for cand in candidates {
        let (found, f) = best_restart(&cand, settings)?;
        best_f = best_f.max(f);
        if let Some((k, o)) = found {
            if best.as_ref().map_or(true, |(_, _, b)| o.success > b.success) {
                best = Some((cand, k, o));
            }
        }
    }
    let Some((dev, k, o)) = best else {
        return Err(Error::Infeasible { best_fidelity: best_f });
    };
    let family = format!("s{}-r{}", settings.seed, k);
    build_record(&dev, &o, family, None, settings.seed, k)
}

/// Re-optimizes for a nearby target starting from a converged record. The
/// family is inherited when unit fidelity is reachable from the seed;
/// otherwise fresh restarts open a new family.
pub fn continue_family(parent: &OptimizationRecord, new_target: &TargetGate, settings: &OptimizerSettings) -> Result<OptimizationRecord> {
    settings.validate()?;
    let device = DeviceConfig {
        target: new_target.clone(),
        ..parent.device.clone()
    };
    let plan = device.plan()?;
    let target = device.target.entries();
    let x0 = pack(&parent.compact_matrix());
    let mask = knill_mask(&device, settings);
    let o = run_protocol(&plan, &target, mask.as_ref(), &mut || x0.clone(), 1, settings);
    // the seed itself is a candidate when it already implements the target
    let seed_outcome = {
        let obj = PenaltyObjective::new(&plan, target, None, 1.0, 0.0);
        let mut x = x0;
        normalize_point(&mut x, plan.modes(), None);
        let p = obj.parts(&x);
        RestartOutcome {
            feasible: 1.0 - p.fidelity < settings.fidelity_tol && p.success >= settings.min_success,
            x,
            fidelity: p.fidelity,
            success: p.success,
            iterations: 0,
            stationarity: parent.stationarity,
        }
    };
    let chosen = match (o.feasible, seed_outcome.feasible) {
        (true, true) if seed_outcome.success > o.success => Some(seed_outcome),
        (true, _) => Some(o),
        (false, true) => Some(seed_outcome),
        (false, false) => None,
    };
    match chosen {
        Some(o) => build_record(&device, &o, parent.family_id.clone(), Some(parent.id.clone()), parent.seed, parent.restart),
        None => optimize(&device, settings),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    /// `U -> U*`, implementing `V*`.
    Conjugation,
    /// Exchange of the two dual-rail qubits on the output side, implementing `SWAP · V`.
    SwapShift,
}

/// SWAP on the two-qubit basis.
pub fn swap_gate() -> Mat4 {
    let mut m = Mat4::zeros();
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = linalg::ONE;
    }
    m
}

/// Transports a converged record along an exact symmetry without
/// re-optimizing; fidelity and success are re-scored from the new device.
pub fn apply_symmetry_transport(record: &OptimizationRecord, which: Symmetry) -> Result<OptimizationRecord> {
    let (matrix, target, tag) = match which {
        Symmetry::Conjugation => (record.matrix.conjugate(), record.device.target.conjugate(), "conj"),
        Symmetry::SwapShift => {
            let mut entries = record.matrix.entries.clone();
            // output modes (0,1) <-> (2,3)
            entries.swap_columns(0, 2);
            entries.swap_columns(1, 3);
            let target = TargetGate {
                matrix: swap_gate() * record.device.target.matrix,
                weyl: record
                    .device
                    .target
                    .weyl
                    .map(|c| WeylCoordinates::new(c.c1 + FRAC_PI_2, c.c2 + FRAC_PI_2, c.c3 + FRAC_PI_2)),
            };
            let matrix = InterferometerMatrix {
                entries,
                ..record.matrix.clone()
            };
            (matrix, target, "swap")
        }
    };
    let device = DeviceConfig {
        target,
        ..record.device.clone()
    };
    let score = metrics::score_device(&matrix, &device.ancilla_in, &device.outcome, &device.target)?;
    Ok(OptimizationRecord {
        id: record_id(&device, &matrix.entries),
        device,
        matrix,
        fidelity: score.fidelity,
        success: score.success,
        family_id: format!("{}:{}", record.family_id, tag),
        parent: Some(record.id.clone()),
        ..record.clone()
    })
}
