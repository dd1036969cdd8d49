//! Fidelity and success probability of a heralded Kraus operator relative
//! to a target two-qubit gate, with analytic gradients.
//!
//! Gradients use the packed real-coordinate convention: for a real function
//! `f` of complex entries `z`, the stored value is `∂f/∂Re z + i ∂f/∂Im z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::OccupationVector;
use crate::kraus::{self, Amplitudes, InterferometerMatrix, KrausJacobian, KrausOperator, KrausPlan, Mat4, MeasurementOutcome, N_AMPS};
use crate::linalg::{CMatrix, ZERO};
use crate::weyl::WeylCoordinates;

/// Dimension of the two-qubit computational space.
pub const D_COMP: f64 = 4.0;

/// Desired 4x4 unitary, optionally tagged with its Weyl coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetGate {
    #[serde(with = "mat4_serde")]
    pub matrix: Mat4,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl: Option<WeylCoordinates>,
}

impl TargetGate {
    pub fn new(matrix: Mat4) -> Result<Self> {
        let dev = (matrix.adjoint() * matrix - Mat4::identity()).norm();
        if dev > kraus::UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(TargetGate { matrix, weyl: None })
    }

    pub fn with_weyl(mut self, c: WeylCoordinates) -> Self {
        self.weyl = Some(c);
        self
    }

    pub fn conjugate(&self) -> Self {
        TargetGate {
            matrix: self.matrix.map(|z| z.conj()),
            weyl: self.weyl.map(|c| WeylCoordinates::new(-c.c1, -c.c2, -c.c3)),
        }
    }

    pub(crate) fn entries(&self) -> [Complex64; 16] {
        mat4_entries(&self.matrix)
    }
}

pub(crate) fn mat4_entries(m: &Mat4) -> [Complex64; 16] {
    let mut a = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            a[4 * i + j] = m[(i, j)];
        }
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateScore {
    pub fidelity: f64,
    pub success: f64,
}

/// Normalized Hilbert-Schmidt product `Tr(a b†) / 4`.
pub fn hs_inner(a: &Mat4, b: &Mat4) -> Complex64 {
    (a * b.adjoint()).trace() / D_COMP
}

/// `F = |<A|T>|² / (<A|A><T|T>)` and `S = <A|A>`, where `<A|A>` also counts
/// the amplitude heralded into leakage states.
pub fn score(a: &KrausOperator, target: &TargetGate) -> Result<GateScore> {
    let mut amps = [ZERO; N_AMPS];
    amps[..16].copy_from_slice(&mat4_entries(&a.matrix));
    amps[16] = Complex64::new(a.leakage.sqrt(), 0.0);
    let (fidelity, success) = fidelity_success(&amps, &target.entries());
    if success == 0.0 || !success.is_finite() {
        return Err(Error::NullBranch);
    }
    Ok(GateScore { fidelity, success })
}

/// Flat-entry version of the score; fidelity is NaN for the zero operator.
pub(crate) fn fidelity_success(a: &Amplitudes, t: &[Complex64; 16]) -> (f64, f64) {
    let (overlap, s_a, s_t) = overlaps(a, t);
    (overlap.norm_sqr() / (s_a * s_t), s_a)
}

fn overlaps(a: &Amplitudes, t: &[Complex64; 16]) -> (Complex64, f64, f64) {
    let mut overlap = ZERO;
    let mut s_t = 0.0;
    for k in 0..16 {
        overlap += a[k] * t[k].conj();
        s_t += t[k].norm_sqr();
    }
    let s_a: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    (overlap / D_COMP, s_a / D_COMP, s_t / D_COMP)
}

/// Gradients of fidelity and success with respect to the Kraus entries.
pub(crate) fn kraus_gradients(a: &Amplitudes, t: &[Complex64; 16]) -> (Amplitudes, Amplitudes) {
    let (overlap, s_a, s_t) = overlaps(a, t);
    let mut g_f = [ZERO; N_AMPS];
    let mut g_s = [ZERO; N_AMPS];
    let denom = s_a * s_a * s_t;
    let o2 = overlap.norm_sqr();
    for k in 0..N_AMPS {
        let tk = if k < 16 { t[k] } else { ZERO };
        g_s[k] = a[k] * (2.0 / D_COMP);
        g_f[k] = (overlap * tk * s_a - a[k] * o2) * (2.0 / (D_COMP * denom));
    }
    (g_f, g_s)
}

/// Gradients of (F, S) with respect to `Re U_ij` and `Im U_ij`.
#[derive(Clone, Debug)]
pub struct ScoreGradient {
    pub score: GateScore,
    /// packed `∂F/∂Re U + i ∂F/∂Im U`
    pub fidelity: CMatrix,
    /// packed `∂S/∂Re U + i ∂S/∂Im U`
    pub success: CMatrix,
}

impl ScoreGradient {
    pub fn d_fidelity_re(&self, i: usize, j: usize) -> f64 {
        self.fidelity[(i, j)].re
    }
    pub fn d_fidelity_im(&self, i: usize, j: usize) -> f64 {
        self.fidelity[(i, j)].im
    }
    pub fn d_success_re(&self, i: usize, j: usize) -> f64 {
        self.success[(i, j)].re
    }
    pub fn d_success_im(&self, i: usize, j: usize) -> f64 {
        self.success[(i, j)].im
    }
}

pub fn score_gradient(
    u: &InterferometerMatrix,
    ancilla_in: &OccupationVector,
    outcome: &MeasurementOutcome,
    target: &TargetGate,
) -> Result<ScoreGradient> {
    let plan = KrausPlan::new(u.layout, ancilla_in, outcome)?;
    let n = u.modes();
    let flat = kraus::row_major(&u.entries);
    let mut jac = KrausJacobian::default();
    let a = plan.evaluate_with_jacobian(&flat, &mut jac);
    let t = target.entries();
    let (fidelity, success) = fidelity_success(&a, &t);
    if success == 0.0 || !success.is_finite() {
        return Err(Error::NullBranch);
    }
    let (g_f, g_s) = kraus_gradients(&a, &t);
    let mut df = vec![ZERO; n * n];
    let mut ds = vec![ZERO; n * n];
    plan.pullback(&jac, &g_f, &mut df);
    plan.pullback(&jac, &g_s, &mut ds);
    Ok(ScoreGradient {
        score: GateScore { fidelity, success },
        fidelity: CMatrix::from_row_slice(n, n, &df),
        success: CMatrix::from_row_slice(n, n, &ds),
    })
}

/// Convenience wrapper: Kraus operator and score in one call.
pub fn score_device(
    u: &InterferometerMatrix,
    ancilla_in: &OccupationVector,
    outcome: &MeasurementOutcome,
    target: &TargetGate,
) -> Result<GateScore> {
    score(&kraus::kraus_operator(u, ancilla_in, outcome)?, target)
}

pub(crate) mod mat4_serde {
    use super::Mat4;
    use crate::linalg::matrix_serde;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat4, s: S) -> Result<S::Ok, S::Error> {
        let d = crate::linalg::CMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
        matrix_serde::to_rows(&d).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat4, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_serde::from_rows(&rows).map_err(D::Error::custom)?;
        if m.shape() != (4, 4) {
            return Err(D::Error::custom("target matrix must be 4x4"));
        }
        Ok(Mat4::from_fn(|i, j| m[(i, j)]))
    }
}

#[cfg(test)]
pub(crate) fn to_cmatrix(m: &Mat4) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

#[cfg(test)]
pub(crate) fn to_mat4(m: &CMatrix) -> Mat4 {
    Mat4::from_fn(|i, j| m[(i, j)])
}
