//! JSON configuration files for single optimizations and sweeps.

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::angle::Angle;
use crate::error::{Error, Result};
use crate::fock::{ModeLayout, OccupationVector};
use crate::kraus::MeasurementOutcome;
use crate::linalg::matrix_serde;
use crate::metrics::TargetGate;
use crate::optimizer::{DeviceConfig, OptimizerSettings};
use crate::weyl::{gate_from_coordinates, WeylCoordinates};

pub const SCHEMA_VERSION: u32 = 1;

/// Parses `text` into `T`, reporting the offending field path and position.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config(format!(
            "field `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema {schema}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    Weyl([Angle; 3]),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl TargetSpec {
    pub fn gate(&self) -> Result<TargetGate> {
        match self {
            TargetSpec::Weyl([a, b, c]) => Ok(gate_from_coordinates(WeylCoordinates::new(a.0, b.0, c.0))),
            TargetSpec::Matrix(rows) => {
                let m = matrix_serde::from_rows(rows).map_err(Error::Config)?;
                if m.shape() != (4, 4) {
                    return Err(Error::Config(format!("target matrix must be 4x4, got {:?}", m.shape())));
                }
                let m = crate::kraus::Mat4::from_fn(|i, j| m[(i, j)]);
                let gate = TargetGate::new(m)?;
                let core = crate::weyl::kak_decompose(&m)?.core;
                Ok(gate.with_weyl(core))
            }
        }
    }
}

/// Device resources without the target.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSpec {
    /// One photon in each of this many ancilla modes; ignored when
    /// `ancilla_in` is given.
    pub ancilla_photons: usize,
    pub ancilla_in: Option<Vec<u32>>,
    /// Pattern over ancilla then vacuum modes; defaults to the ancilla input.
    pub outcome: Option<Vec<u32>>,
    pub n_vacuum: usize,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        DeviceSpec {
            ancilla_photons: 2,
            ancilla_in: None,
            outcome: None,
            n_vacuum: 0,
        }
    }
}

impl DeviceSpec {
    pub fn photons(&self) -> usize {
        match &self.ancilla_in {
            Some(v) => v.iter().map(|&k| k as usize).sum(),
            None => self.ancilla_photons,
        }
    }

    /// Replaces the ancilla resources by `k` single photons.
    pub fn set_ancilla_photons(&mut self, k: usize) {
        self.ancilla_photons = k;
        self.ancilla_in = None;
        self.outcome = None;
    }

    pub fn build(&self, target: TargetGate) -> Result<DeviceConfig> {
        let anc = match &self.ancilla_in {
            Some(v) => OccupationVector::new(v.clone()),
            None => OccupationVector::singles(self.ancilla_photons),
        };
        let layout = ModeLayout::new(anc.modes(), self.n_vacuum);
        let outcome = match &self.outcome {
            Some(v) => OccupationVector::new(v.clone()),
            None => anc.clone(),
        };
        let device = DeviceConfig {
            layout,
            ancilla_in: anc,
            outcome: MeasurementOutcome::new(outcome),
            target,
        };
        device.validate()?;
        Ok(device)
    }
}

/// Input of the `optimize` command.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub schema: u32,
    pub target: TargetSpec,
    #[serde(default)]
    pub device: DeviceSpec,
    #[serde(default)]
    pub settings: OptimizerSettings,
    #[serde(skip)]
    pub restarts_given: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SweepKind {
    /// Evenly spaced points from `from` to `to`, both included.
    Line { from: [Angle; 3], to: [Angle; 3], points: usize },
    /// Cubic lattice over the quarter chamber, optionally subsampled.
    Lattice {
        #[serde(default = "default_spacing")]
        spacing: Angle,
        #[serde(default)]
        sample: Option<usize>,
        #[serde(default)]
        sample_seed: u64,
    },
    Single { point: [Angle; 3] },
}

fn default_spacing() -> Angle {
    Angle(std::f64::consts::PI / 16.0)
}

/// Input of the `sweep` command.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: u32,
    pub sweep: SweepKind,
    #[serde(default)]
    pub device: DeviceSpec,
    #[serde(default)]
    pub settings: OptimizerSettings,
    #[serde(skip)]
    pub restarts_given: bool,
}

fn restarts_present(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("settings").map(|s| s.get("restarts").is_some()))
        .unwrap_or(false)
}

impl OptimizeConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c: OptimizeConfig = parse_json(text)?;
        check_schema(c.schema)?;
        c.restarts_given = restarts_present(text);
        Ok(c)
    }

    /// Settings with the restart budget scaled to the ancilla count unless
    /// given explicitly.
    pub fn effective_settings(&self) -> OptimizerSettings {
        effective(&self.settings, self.restarts_given, self.device.photons())
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c: SweepConfig = parse_json(text)?;
        check_schema(c.schema)?;
        c.restarts_given = restarts_present(text);
        Ok(c)
    }

    pub fn effective_settings(&self) -> OptimizerSettings {
        effective(&self.settings, self.restarts_given, self.device.photons())
    }
}

fn effective(s: &OptimizerSettings, given: bool, photons: usize) -> OptimizerSettings {
    let mut s = s.clone();
    if !given {
        s.restarts = OptimizerSettings::for_ancillas(photons).restarts;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn optimize_config_with_angles() {
        let c = OptimizeConfig::parse(r#"{"schema": 1, "target": {"weyl": ["pi/2", "0.25pi", 0]}, "device": {"ancilla_photons": 3}}"#).unwrap();
        let g = c.target.gate().unwrap();
        let w = g.weyl.unwrap();
        assert!((w.c1 - PI / 2.0).abs() < 1e-15 && (w.c2 - PI / 4.0).abs() < 1e-15);
        assert_eq!(c.effective_settings().restarts, 200);
        let d = c.device.build(g).unwrap();
        assert_eq!(d.layout.n_ancilla, 3);
    }

    #[test]
    fn explicit_restarts_win() {
        let c = OptimizeConfig::parse(r#"{"schema": 1, "target": {"weyl": [0, 0, 0]}, "settings": {"restarts": 7}}"#).unwrap();
        assert_eq!(c.effective_settings().restarts, 7);
    }

    #[test]
    fn errors_name_field_and_line() {
        let text = "{\n  \"schema\": 1,\n  \"target\": {\"weyl\": [0, 0, 0]},\n  \"settings\": {\"restarts\": \"many\"}\n}";
        let msg = OptimizeConfig::parse(text).unwrap_err().to_string();
        assert!(msg.contains("settings.restarts"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
        let msg = OptimizeConfig::parse(r#"{"schema": 1, "target": {"weyl": [0, 0, 0]}, "setings": {}}"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("setings"), "{msg}");
    }

    #[test]
    fn schema_is_checked() {
        assert!(OptimizeConfig::parse(r#"{"schema": 9, "target": {"weyl": [0, 0, 0]}}"#).is_err());
    }

    #[test]
    fn sweep_kinds() {
        let c = SweepConfig::parse(r#"{"schema": 1, "sweep": {"lattice": {"sample": 5}}}"#).unwrap();
        match c.sweep {
            SweepKind::Lattice { spacing, sample, .. } => {
                assert!((spacing.0 - PI / 16.0).abs() < 1e-15);
                assert_eq!(sample, Some(5));
            }
            _ => panic!(),
        }
        let c = SweepConfig::parse(r#"{"schema": 1, "sweep": {"line": {"from": [0, 0, 0], "to": ["pi/2", 0, 0], "points": 9}}}"#).unwrap();
        assert!(matches!(c.sweep, SweepKind::Line { points: 9, .. }));
    }

    #[test]
    fn matrix_target() {
        let id: Vec<Vec<[f64; 2]>> = (0..4).map(|i| (0..4).map(|j| [if i == j { 1.0 } else { 0.0 }, 0.0]).collect()).collect();
        let text = format!(r#"{{"schema": 1, "target": {{"matrix": {}}}}}"#, serde_json::to_string(&id).unwrap());
        let c = OptimizeConfig::parse(&text).unwrap();
        let w = c.target.gate().unwrap().weyl.unwrap();
        assert!(w.max_abs_diff(&WeylCoordinates::identity()) < 1e-9);
    }
}
