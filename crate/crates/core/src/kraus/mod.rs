//! Bosonic transfer amplitudes through a linear interferometer and the
//! heralded Kraus operator they induce on the dual-rail two-qubit subspace.
//!
//! Convention: input mode `i` is mapped as `a_i^† -> Σ_j U[i][j] ã_j^†`, so
//! rows index input modes and columns index output modes. The amplitude
//! `<out|Ω(U)|in>` equals `perm(U[rows, cols]) / sqrt(Π n_i! Π k_j!)`, where
//! row `i` is repeated `n_i` times and column `j` is repeated `k_j` times.

pub mod permanent;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{dual_rail_index, dual_rail_modes, enumerate_fock_basis, ModeLayout, OccupationVector, COMP_MODES};
use crate::linalg::{self, CMatrix, ZERO};

pub use permanent::{permanent, ryser, ryser_with_minors};

pub type Mat4 = Matrix4<Complex64>;

pub const UNITARY_TOL: f64 = 1e-10;
pub const SUBUNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    PhysicalUnitary,
    ExtendedSearch,
}

/// Complex N x N mode-transformation matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterferometerMatrix {
    #[serde(with = "linalg::matrix_serde")]
    pub entries: CMatrix,
    pub layout: ModeLayout,
    pub flavor: Flavor,
}

impl InterferometerMatrix {
    /// Unitary device; rejects matrices whose `M†M` deviates from identity.
    pub fn physical(entries: CMatrix, layout: ModeLayout) -> Result<Self> {
        check_shape(&entries, &layout)?;
        let dev = linalg::unitarity_deviation(&entries);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(InterferometerMatrix {
            entries,
            layout,
            flavor: Flavor::PhysicalUnitary,
        })
    }

    /// Unconstrained matrix from the extended search space.
    pub fn extended(entries: CMatrix, layout: ModeLayout) -> Result<Self> {
        check_shape(&entries, &layout)?;
        Ok(InterferometerMatrix {
            entries,
            layout,
            flavor: Flavor::ExtendedSearch,
        })
    }

    pub fn modes(&self) -> usize {
        self.entries.nrows()
    }

    /// Rescales to unit spectral norm so a unitary dilation exists.
    pub fn normalized(&self) -> Self {
        let s = linalg::spectral_norm(&self.entries);
        let entries = if s > 0.0 {
            self.entries.map(|z| z / s)
        } else {
            self.entries.clone()
        };
        InterferometerMatrix {
            entries,
            ..self.clone()
        }
    }

    pub fn conjugate(&self) -> Self {
        InterferometerMatrix {
            entries: linalg::conj(&self.entries),
            ..self.clone()
        }
    }
}

fn check_shape(m: &CMatrix, layout: &ModeLayout) -> Result<()> {
    layout.validate()?;
    if !m.is_square() || m.nrows() != layout.total() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not fit a {}-mode layout",
            m.nrows(),
            m.ncols(),
            layout.total()
        )));
    }
    Ok(())
}

/// Photocount pattern over the measured (ancilla + vacuum) modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementOutcome {
    pub pattern: OccupationVector,
}

impl MeasurementOutcome {
    pub fn new(pattern: impl Into<OccupationVector>) -> Self {
        MeasurementOutcome {
            pattern: pattern.into(),
        }
    }
}

/// Two-photon computational outputs outside the dual-rail subspace.
pub const N_LEAK: usize = 6;
/// Heralded amplitudes per device: 16 dual-rail entries followed by
/// `N_LEAK * 4` leakage entries (`16 + 4 * leak + q_in`).
pub const N_AMPS: usize = 16 + 4 * N_LEAK;
pub type Amplitudes = [Complex64; N_AMPS];

/// Computational occupations with two photons that are not dual-rail states.
pub fn leakage_states() -> Vec<OccupationVector> {
    enumerate_fock_basis(2, COMP_MODES)
        .into_iter()
        .filter(|o| dual_rail_index(o).is_none())
        .collect()
}

/// 4x4 operator on the dual-rail basis, `A[q_out][q_in]`, plus the total
/// squared amplitude heralded into leakage states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausOperator {
    pub matrix: Mat4,
    pub leakage: f64,
}

impl KrausOperator {
    /// Leakage-free operator.
    pub fn new(matrix: Mat4) -> Self {
        KrausOperator { matrix, leakage: 0.0 }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn from_amplitudes(a: &Amplitudes) -> Self {
        KrausOperator {
            matrix: Mat4::from_row_slice(&a[..16]),
            leakage: a[16..].iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        self.matrix.svd(false, false).singular_values.max()
    }
}

/// `<out_occ| Ω(U) |in_occ>` for occupation vectors over all N modes.
pub fn transfer_amplitude(
    u: &InterferometerMatrix,
    in_occ: &OccupationVector,
    out_occ: &OccupationVector,
) -> Result<Complex64> {
    let n = u.modes();
    if in_occ.modes() != n || out_occ.modes() != n {
        return Err(Error::Dimension(format!(
            "occupations over {} and {} modes for a {n}-mode device",
            in_occ.modes(),
            out_occ.modes()
        )));
    }
    if in_occ.total() != out_occ.total() {
        return Err(Error::NonConserving {
            input: in_occ.total(),
            output: out_occ.total(),
        });
    }
    let rows = in_occ.mode_list();
    let cols = out_occ.mode_list();
    let k = rows.len();
    if k > permanent::MAX_DIM {
        return Err(Error::UnsupportedSize(k));
    }
    let sub: Vec<Complex64> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .map(|(r, c)| u.entries[(r, c)])
        .collect();
    let norm = (in_occ.factorial_product() * out_occ.factorial_product()).sqrt();
    Ok(ryser(&sub, k) / norm)
}

/// Kraus operator heralded by `outcome` when `ancilla_in` is injected into
/// the ancilla modes. Both patterns are zero-padded over any vacuum modes.
pub fn kraus_operator(
    u: &InterferometerMatrix,
    ancilla_in: &OccupationVector,
    outcome: &MeasurementOutcome,
) -> Result<KrausOperator> {
    let plan = KrausPlan::new(u.layout, ancilla_in, outcome)?;
    if plan.modes() != u.modes() {
        return Err(Error::Dimension("layout and matrix disagree".into()));
    }
    let flat: Vec<Complex64> = row_major(&u.entries);
    Ok(KrausOperator::from_amplitudes(&plan.evaluate(&flat)))
}

pub(crate) fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let (r, c) = m.shape();
    (0..r * c).map(|k| m[(k / c, k % c)]).collect()
}

#[derive(Clone, Debug)]
struct EntryPlan {
    rows: Vec<usize>,
    cols: Vec<usize>,
    scale: f64,
}

/// Precomputed submatrix selections for all heralded amplitudes of one device
/// wiring; evaluated repeatedly inside the optimizer.
#[derive(Clone, Debug)]
pub struct KrausPlan {
    modes: usize,
    photons: usize,
    // None when every heralded branch leaks out of the dual-rail subspace
    entries: Option<Vec<EntryPlan>>,
}

impl KrausPlan {
    pub fn new(
        layout: ModeLayout,
        ancilla_in: &OccupationVector,
        outcome: &MeasurementOutcome,
    ) -> Result<Self> {
        layout.validate()?;
        let measured = layout.measured();
        if ancilla_in.modes() > measured || outcome.pattern.modes() > measured {
            return Err(Error::Dimension(format!(
                "ancilla pattern {} / outcome {} exceed {measured} measured modes",
                ancilla_in, outcome.pattern
            )));
        }
        let anc = ancilla_in.padded(measured);
        let out = outcome.pattern.padded(measured);
        let available = anc.total() + 2;
        if out.total() + 2 > available {
            return Err(Error::OutcomeStripsPhotons {
                available,
                requested: out.total(),
            });
        }
        let photons = available;
        if photons > permanent::MAX_DIM {
            return Err(Error::UnsupportedSize(photons));
        }
        let modes = layout.total();
        if out.total() + 2 < available {
            // extra photons stay in the computational modes: pure leakage
            return Ok(KrausPlan {
                modes,
                photons,
                entries: None,
            });
        }
        let anc_modes: Vec<usize> = anc.mode_list().iter().map(|m| m + COMP_MODES).collect();
        let out_modes: Vec<usize> = out.mode_list().iter().map(|m| m + COMP_MODES).collect();
        let norm = (anc.factorial_product() * out.factorial_product()).sqrt();
        let mut outputs: Vec<(Vec<usize>, f64)> = (0..4).map(|q| (dual_rail_modes(q).to_vec(), 1.0)).collect();
        outputs.extend(leakage_states().iter().map(|o| (o.mode_list(), o.factorial_product())));
        let mut entries = Vec::with_capacity(N_AMPS);
        for (out_comp, fact) in outputs {
            for q_in in 0..4 {
                let mut rows = dual_rail_modes(q_in).to_vec();
                rows.extend_from_slice(&anc_modes);
                let mut cols = out_comp.clone();
                cols.extend_from_slice(&out_modes);
                entries.push(EntryPlan {
                    rows,
                    cols,
                    scale: 1.0 / (norm * fact.sqrt()),
                });
            }
        }
        Ok(KrausPlan {
            modes,
            photons,
            entries: Some(entries),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Total photon number, i.e. the polynomial degree of every Kraus entry.
    pub fn photons(&self) -> usize {
        self.photons
    }

    /// Heralded amplitudes (see [`Amplitudes`]) for a row-major N x N matrix.
    pub fn evaluate(&self, m: &[Complex64]) -> Amplitudes {
        let mut a = [ZERO; N_AMPS];
        let Some(entries) = &self.entries else {
            return a;
        };
        let n = self.photons;
        let mut sub = vec![ZERO; n * n];
        for (k, e) in entries.iter().enumerate() {
            self.gather(e, m, &mut sub);
            a[k] = ryser(&sub, n) * e.scale;
        }
        a
    }

    /// Kraus entries plus the permanent minors needed for gradients.
    pub fn evaluate_with_jacobian(&self, m: &[Complex64], jac: &mut KrausJacobian) -> Amplitudes {
        let mut a = [ZERO; N_AMPS];
        let n = self.photons;
        jac.photons = n;
        jac.minors.resize(N_AMPS * n * n, ZERO);
        let Some(entries) = &self.entries else {
            jac.minors.iter_mut().for_each(|g| *g = ZERO);
            return a;
        };
        let mut sub = vec![ZERO; n * n];
        for (k, e) in entries.iter().enumerate() {
            self.gather(e, m, &mut sub);
            let g = &mut jac.minors[k * n * n..(k + 1) * n * n];
            a[k] = ryser_with_minors(&sub, n, g) * e.scale;
            g.iter_mut().for_each(|z| *z *= e.scale);
        }
        a
    }

    /// Chain rule through the Kraus map. `grad_a[k]` is the real-coordinate
    /// gradient `∂f/∂Re A_k + i ∂f/∂Im A_k`; the result is accumulated into
    /// `out` in the same convention over the N x N matrix entries.
    pub fn pullback(&self, jac: &KrausJacobian, grad_a: &Amplitudes, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.modes * self.modes);
        let Some(entries) = &self.entries else {
            return;
        };
        let n = jac.photons;
        for (k, e) in entries.iter().enumerate() {
            let ga = grad_a[k];
            if ga == ZERO {
                continue;
            }
            let g = &jac.minors[k * n * n..(k + 1) * n * n];
            for (a, &r) in e.rows.iter().enumerate() {
                for (b, &c) in e.cols.iter().enumerate() {
                    out[r * self.modes + c] += ga * g[a * n + b].conj();
                }
            }
        }
    }

    fn gather(&self, e: &EntryPlan, m: &[Complex64], sub: &mut [Complex64]) {
        let n = self.photons;
        for (a, &r) in e.rows.iter().enumerate() {
            for (b, &c) in e.cols.iter().enumerate() {
                sub[a * n + b] = m[r * self.modes + c];
            }
        }
    }
}

/// Scratch storage for permanent minors of the heralded amplitudes.
#[derive(Clone, Debug, Default)]
pub struct KrausJacobian {
    photons: usize,
    minors: Vec<Complex64>,
}
