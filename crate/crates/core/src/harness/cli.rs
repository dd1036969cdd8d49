//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::angle::{format_angle, parse_angle};
use super::config::{OptimizeConfig, SweepConfig};
use super::report::{audit, comparison_csv, curve_rows, curves_csv, decomposition_comparison};
use super::store::ResultStore;
use super::sweep::{run_sweep, SweepRow, SweepSpec};
use crate::error::{Error, Result};
use crate::kraus::Mat4;
use crate::linalg::matrix_serde;
use crate::optimizer::{self, OptimizationRecord};
use crate::weyl::{canonicalize, kak_decompose, Mat2, WeylCoordinates};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_AUDIT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "loqc", version, about = "Design heralded linear-optical two-qubit gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Use this many single-photon ancillas instead of the configured ones
    #[arg(long)]
    ancilla_photons: Option<usize>,
    /// Try every detection pattern with the right photon count
    #[arg(long)]
    outcome_search: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize one device from a config file
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a line, lattice or single-point sweep
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_parser = parse_angle_arg)]
        lattice_spacing: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Decompose a 4x4 unitary stored as JSON rows of [re, im] pairs
    Kak { file: PathBuf },
    /// Map a coordinate triple to its canonical representative
    Canon {
        #[arg(allow_hyphen_values = true, value_parser = parse_angle_arg)]
        c1: f64,
        #[arg(allow_hyphen_values = true, value_parser = parse_angle_arg)]
        c2: f64,
        #[arg(allow_hyphen_values = true, value_parser = parse_angle_arg)]
        c3: f64,
    },
    /// Re-score every stored record
    Verify {
        #[arg(long)]
        store: PathBuf,
    },
    /// Emit curve data or the decomposition comparison
    Report {
        #[arg(value_enum, default_value = "curves")]
        what: ReportKind,
        #[arg(long)]
        store: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Curves,
    Table,
}

fn parse_angle_arg(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let format = cli.format;
    match cli.command {
        Command::Optimize {
            config,
            store,
            overrides,
        } => {
            let mut cfg = OptimizeConfig::parse(&read(&config)?)?;
            apply_overrides(&mut cfg.device, &mut cfg.settings, &mut cfg.restarts_given, &overrides);
            let settings = cfg.effective_settings();
            let device = cfg.device.build(cfg.target.gate()?)?;
            let mut store = store.map(ResultStore::open).transpose()?;
            match optimizer::optimize(&device, &settings) {
                Ok(record) => {
                    if let Some(s) = store.as_mut() {
                        s.push_record(record.clone())?;
                    }
                    write_record(out, &record, format)?;
                    Ok(EXIT_OK)
                }
                Err(Error::Infeasible { best_fidelity }) => {
                    if let (Some(s), Some(w)) = (store.as_mut(), device.target.weyl) {
                        s.push_infeasible(&device, w, best_fidelity)?;
                    }
                    Err(Error::Infeasible { best_fidelity })
                }
                Err(e) => Err(e),
            }
        }
        Command::Sweep {
            config,
            store,
            lattice_spacing,
            overrides,
        } => {
            let mut cfg = SweepConfig::parse(&read(&config)?)?;
            apply_overrides(&mut cfg.device, &mut cfg.settings, &mut cfg.restarts_given, &overrides);
            let spec = SweepSpec::from_config(&cfg, lattice_spacing)?;
            let mut store = ResultStore::open(store)?;
            let rows = run_sweep(&spec, &mut store)?;
            write_sweep(out, &rows, format)?;
            Ok(EXIT_OK)
        }
        Command::Kak { file } => {
            let text = read(&file)?;
            let rows: Vec<Vec<[f64; 2]>> = super::config::parse_json(&text)?;
            let m = matrix_serde::from_rows(&rows).map_err(Error::Config)?;
            if m.shape() != (4, 4) {
                return Err(Error::Dimension(format!("expected a 4x4 matrix, got {:?}", m.shape())));
            }
            let k = kak_decompose(&Mat4::from_fn(|i, j| m[(i, j)]))?;
            if format == Some(Format::Json) {
                emit_json(out, &KakOutput::new(&k))?;
            } else {
                writeln!(out, "coordinates: {}", triple(k.core))?;
                writeln!(out, "canonical: {}", triple(canonicalize(k.core)))?;
                for (name, f) in [("pre1", &k.pre1), ("pre2", &k.pre2), ("post1", &k.post1), ("post2", &k.post2)] {
                    writeln!(out, "{name}: {}", mat2_text(f))?;
                }
                writeln!(out, "global phase: {}{:+}i", k.global_phase.re, k.global_phase.im)?;
            }
            Ok(EXIT_OK)
        }
        Command::Canon { c1, c2, c3 } => {
            let c = canonicalize(WeylCoordinates::new(c1, c2, c3));
            if format == Some(Format::Json) {
                emit_json(out, &c)?;
            } else {
                writeln!(out, "{}", triple(c))?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { store } => {
            let store = ResultStore::open(store)?;
            let failures = audit(&store);
            if format == Some(Format::Json) {
                emit_json(out, &failures)?;
            } else if failures.is_empty() {
                writeln!(out, "ok: {} records verified", store.records().count())?;
            } else {
                for f in &failures {
                    writeln!(out, "FAIL {}: {}", f.record, f.reason)?;
                }
            }
            Ok(if failures.is_empty() { EXIT_OK } else { EXIT_AUDIT })
        }
        Command::Report { what, store } => {
            let store = ResultStore::open(store)?;
            let json = format == Some(Format::Json);
            match what {
                ReportKind::Curves => {
                    let rows = curve_rows(&store);
                    if json {
                        emit_json(out, &rows)?;
                    } else {
                        out.write_all(curves_csv(&rows).as_bytes())?;
                    }
                }
                ReportKind::Table => {
                    let rows = decomposition_comparison(&store)?;
                    if json {
                        emit_json(out, &rows)?;
                    } else {
                        out.write_all(comparison_csv(&rows).as_bytes())?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn apply_overrides(
    device: &mut super::config::DeviceSpec,
    settings: &mut optimizer::OptimizerSettings,
    restarts_given: &mut bool,
    o: &Overrides,
) {
    if let Some(seed) = o.seed {
        settings.seed = seed;
    }
    if let Some(r) = o.restarts {
        settings.restarts = r;
        *restarts_given = true;
    }
    if let Some(k) = o.ancilla_photons {
        device.set_ancilla_photons(k);
    }
    if o.outcome_search {
        settings.outcome_search = true;
    }
}

fn triple(c: WeylCoordinates) -> String {
    format!("{} {} {}", format_angle(c.c1), format_angle(c.c2), format_angle(c.c3))
}

fn mat2_text(m: &Mat2) -> String {
    let z = |i: usize, j: usize| format!("{}{:+}i", m[(i, j)].re, m[(i, j)].im);
    format!("[[{}, {}], [{}, {}]]", z(0, 0), z(0, 1), z(1, 0), z(1, 1))
}

#[derive(Serialize)]
struct KakOutput {
    coordinates: WeylCoordinates,
    canonical: WeylCoordinates,
    pre1: Vec<Vec<[f64; 2]>>,
    pre2: Vec<Vec<[f64; 2]>>,
    post1: Vec<Vec<[f64; 2]>>,
    post2: Vec<Vec<[f64; 2]>>,
    global_phase: [f64; 2],
}

impl KakOutput {
    fn new(k: &crate::weyl::KAKFactors) -> Self {
        let rows = |m: &Mat2| (0..2).map(|i| (0..2).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        KakOutput {
            coordinates: k.core,
            canonical: canonicalize(k.core),
            pre1: rows(&k.pre1),
            pre2: rows(&k.pre2),
            post1: rows(&k.post1),
            post2: rows(&k.post2),
            global_phase: [k.global_phase.re, k.global_phase.im],
        }
    }
}

#[derive(Serialize)]
struct RecordSummary<'a> {
    id: &'a str,
    c1: f64,
    c2: f64,
    c3: f64,
    fidelity: f64,
    success: f64,
    ancilla_photons: usize,
    modes: usize,
    family: &'a str,
}

fn write_record(out: &mut dyn Write, r: &OptimizationRecord, format: Option<Format>) -> Result<()> {
    let c = r.weyl().map(canonicalize).unwrap_or_else(WeylCoordinates::identity);
    let s = RecordSummary {
        id: &r.id,
        c1: c.c1,
        c2: c.c2,
        c3: c.c3,
        fidelity: r.fidelity,
        success: r.success,
        ancilla_photons: r.device.ancilla_photons(),
        modes: r.matrix.modes(),
        family: &r.family_id,
    };
    if format == Some(Format::Json) {
        return emit_json(out, &s);
    }
    writeln!(out, "id,c1,c2,c3,fidelity,success,ancilla_photons,modes,family")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        s.id, s.c1, s.c2, s.c3, s.fidelity, s.success, s.ancilla_photons, s.modes, s.family
    )?;
    Ok(())
}

fn write_sweep(out: &mut dyn Write, rows: &[SweepRow], format: Option<Format>) -> Result<()> {
    if format == Some(Format::Json) {
        return emit_json(out, &rows);
    }
    writeln!(out, "c1,c2,c3,success,family,families,record")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.c1,
            r.c2,
            r.c3,
            r.success.map(|v| v.to_string()).unwrap_or_else(|| "infeasible".into()),
            r.family.as_deref().unwrap_or(""),
            r.families,
            r.record.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}
