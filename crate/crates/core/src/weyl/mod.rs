//! Weyl-chamber coordinates of two-qubit gates: synthesis of the entangling
//! core, Cartan (KAK) decomposition, and reduction of coordinate triples
//! under local equivalence and under the extra symmetries that preserve the
//! optimal heralding probability of a linear-optical implementation.

mod chamber;
mod kak;

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kraus::Mat4;
use crate::linalg::{c, ZERO};
use crate::metrics::TargetGate;

pub use chamber::{canonicalize, chamber_reduce, symmetry_orbit, in_quarter_chamber, in_weyl_chamber, CANON_TOL};
pub use kak::{kak_decompose, KAKFactors, Mat2};

/// Entangling-class coordinates `{c1, c2, c3}` of
/// `exp((i/2)(c1 XX + c2 YY + c3 ZZ))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylCoordinates {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl WeylCoordinates {
    pub const fn new(c1: f64, c2: f64, c3: f64) -> Self {
        WeylCoordinates { c1, c2, c3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        WeylCoordinates::new(a[0], a[1], a[2])
    }

    pub fn max_abs_diff(&self, other: &WeylCoordinates) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn identity() -> Self {
        WeylCoordinates::new(0.0, 0.0, 0.0)
    }

    pub fn cnot() -> Self {
        WeylCoordinates::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0)
    }

    pub fn b_gate() -> Self {
        WeylCoordinates::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, 0.0)
    }

    pub fn swap() -> Self {
        let h = std::f64::consts::FRAC_PI_2;
        WeylCoordinates::new(h, h, h)
    }
}

/// Columns are the magic (Bell) basis in which local gates are real
/// orthogonal and the entangling core is diagonal.
pub fn magic_basis() -> Mat4 {
    let s = FRAC_1_SQRT_2;
    let (o, r, i) = (ZERO, c(s, 0.0), c(0.0, s));
    #[rustfmt::skip]
    let m = Matrix4::new(
        r, i,  o, o,
        o, o,  i, r,
        o, o,  i, -r,
        r, -i, o, o,
    );
    m
}

/// Eigenvalue signs of (XX, YY, ZZ) on each magic basis vector.
pub(crate) const MAGIC_SIGNS: [[f64; 3]; 4] = [
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, -1.0],
];

/// Phases `θ_k` with core `= B diag(e^{iθ}) B†`.
pub(crate) fn magic_phases(c: &WeylCoordinates) -> [f64; 4] {
    let v = c.as_array();
    let mut th = [0.0; 4];
    for (k, s) in MAGIC_SIGNS.iter().enumerate() {
        th[k] = 0.5 * (s[0] * v[0] + s[1] * v[1] + s[2] * v[2]);
    }
    th
}

/// Inverse of `magic_phases` for phase vectors summing to zero.
pub(crate) fn coordinates_from_phases(th: &[f64; 4]) -> WeylCoordinates {
    let mut v = [0.0; 3];
    for (j, vj) in v.iter_mut().enumerate() {
        *vj = 0.5 * (0..4).map(|k| MAGIC_SIGNS[k][j] * th[k]).sum::<f64>();
    }
    WeylCoordinates::from_array(v)
}

/// The entangling core `exp((i/2)(c1 XX + c2 YY + c3 ZZ))` as a 4x4 unitary.
pub fn core_matrix(c: &WeylCoordinates) -> Mat4 {
    let b = magic_basis();
    let th = magic_phases(c);
    let d = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| Complex64::from_polar(1.0, th[k])));
    b * d * b.adjoint()
}

pub fn gate_from_coordinates(c: WeylCoordinates) -> TargetGate {
    TargetGate {
        matrix: core_matrix(&c),
        weyl: Some(c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_x, pauli_y, pauli_z, CMatrix};
    use crate::metrics::{to_cmatrix, to_mat4};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn two_body(p: &CMatrix) -> Mat4 {
        to_mat4(&kron(p, p))
    }

    #[test]
    fn magic_basis_diagonalizes_generators() {
        let b = magic_basis();
        assert!((b.adjoint() * b - Mat4::identity()).norm() < 1e-14);
        for (j, p) in [pauli_x(), pauli_y(), pauli_z()].iter().enumerate() {
            let d = b.adjoint() * two_body(p) * b;
            for k in 0..4 {
                for l in 0..4 {
                    let expect = if k == l { c(MAGIC_SIGNS[k][j], 0.0) } else { ZERO };
                    assert!((d[(k, l)] - expect).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn core_matches_series_exponential() {
        let cc = WeylCoordinates::new(0.7, -0.3, 1.9);
        let h = two_body(&pauli_x()) * c(cc.c1, 0.0)
            + two_body(&pauli_y()) * c(cc.c2, 0.0)
            + two_body(&pauli_z()) * c(cc.c3, 0.0);
        // generators commute, so exp(iH/2) = Σ (iH/2)^k / k!
        let x = to_cmatrix(&h.map(|z| z * c(0.0, 0.5)));
        let mut term = CMatrix::identity(4, 4);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &x / c(k as f64, 0.0);
            sum += &term;
        }
        assert!((to_cmatrix(&core_matrix(&cc)) - sum).norm() < 1e-12);
    }

    #[test]
    fn origin_is_identity() {
        assert!((gate_from_coordinates(WeylCoordinates::identity()).matrix - Mat4::identity()).norm() < 1e-15);
    }

    #[test]
    fn swap_point_is_swap_up_to_phase() {
        let g = core_matrix(&WeylCoordinates::swap());
        let mut swap = Mat4::zeros();
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = c(1.0, 0.0);
        }
        let phase = g[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        assert!((g - swap * phase).norm() < 1e-14);
    }

    #[test]
    fn phases_roundtrip() {
        let cc = WeylCoordinates::new(FRAC_PI_2, FRAC_PI_4, 0.1);
        let back = coordinates_from_phases(&magic_phases(&cc));
        assert!(cc.max_abs_diff(&back) < 1e-15);
    }
}
