//! Cartan (KAK) decomposition of two-qubit unitaries through the magic basis.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use super::chamber::{chamber_choice, tetrahedral_actions};
use super::{coordinates_from_phases, core_matrix, magic_basis, WeylCoordinates};
use crate::error::{Error, Result};
use crate::kraus::{Mat4, UNITARY_TOL};
use crate::linalg::{c, ONE, ZERO};

pub type Mat2 = Matrix2<Complex64>;

/// `V = global_phase · (post1 ⊗ post2) · core · (pre1 ⊗ pre2)` with all
/// local factors in SU(2).
#[derive(Clone, Debug)]
pub struct KAKFactors {
    pub pre1: Mat2,
    pub pre2: Mat2,
    pub post1: Mat2,
    pub post2: Mat2,
    pub core: WeylCoordinates,
    pub global_phase: Complex64,
}

impl KAKFactors {
    pub fn reconstruct(&self) -> Mat4 {
        let post = kron2(&self.post1, &self.post2);
        let pre = kron2(&self.pre1, &self.pre2);
        post * core_matrix(&self.core) * pre * self.global_phase
    }
}

pub(crate) fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn paulis() -> [Mat2; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// `exp(i π/4 σ)` for a Pauli matrix σ.
fn quarter_turn(p: &Mat2, sign: f64) -> Mat2 {
    (Mat2::identity() + p * c(0.0, sign)) * c(FRAC_1_SQRT_2, 0.0)
}

/// For each tetrahedral coordinate action, a local pair `(l1, l2)` with
/// `L† core(c) L = core(g·c)`, `L = l1 ⊗ l2`.
fn action_locals() -> Vec<(Mat2, Mat2)> {
    let actions = tetrahedral_actions();
    let p = paulis();
    let generators: Vec<(Mat2, Mat2)> = (0..3)
        .flat_map(|k| [1.0, -1.0].map(|s| (quarter_turn(&p[k], 1.0), quarter_turn(&p[k], s))))
        .collect();
    let two_body: Vec<Mat4> = p.iter().map(|s| kron2(s, s)).collect();
    let identify = |l1: &Mat2, l2: &Mat2| -> Option<usize> {
        let l = kron2(l1, l2);
        let mut perm = [0usize; 3];
        let mut signs = [0.0; 3];
        for a in 0..3 {
            let y = l.adjoint() * two_body[a] * l;
            let (b, s) = (0..3)
                .map(|b| (b, (y * two_body[b]).trace().re / 4.0))
                .find(|(_, s)| (s.abs() - 1.0).abs() < 1e-9)?;
            perm[a] = b;
            signs[a] = s.signum();
        }
        actions.iter().position(|(pp, ss)| *pp == perm && *ss == signs)
    };
    let mut found: Vec<Option<(Mat2, Mat2)>> = vec![None; actions.len()];
    let id = (Mat2::identity(), Mat2::identity());
    let mut frontier = vec![id];
    found[identify(&id.0, &id.1).expect("identity action")] = Some(id);
    while let Some((a1, a2)) = frontier.pop() {
        for (g1, g2) in &generators {
            let (n1, n2) = (a1 * g1, a2 * g2);
            if let Some(k) = identify(&n1, &n2) {
                if found[k].is_none() {
                    found[k] = Some((n1, n2));
                    frontier.push((n1, n2));
                }
            }
        }
    }
    found
        .into_iter()
        .map(|f| f.expect("local rotations generate every chamber action"))
        .collect()
}

/// Real orthogonal `P` (det +1) nearly diagonalizing the complex symmetric
/// unitary `m`. Real and imaginary parts commute, so a generic real mix of
/// the two shares their eigenvectors; several fixed mixes are tried and
/// the one with the smallest off-diagonal residual wins.
fn real_diagonalizer(m: &Mat4) -> Matrix4<f64> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let mixes = [0.577_215_664_9, 1.618_033_988_7, -2.718_281_828_4, 0.318_309_886_1, -1.414_213_562_3, 4.669_201_609_1];
    let mut best: Option<(f64, Matrix4<f64>)> = None;
    for r in mixes {
        let eig = SymmetricEigen::new(re + im * r);
        let p = eig.eigenvectors;
        let pc = p.map(|x| c(x, 0.0));
        let d = pc.transpose() * m * pc;
        let mut off: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        if best.as_ref().map_or(true, |(o, _)| off < *o) {
            best = Some((off, p));
        }
        if off < 1e-13 {
            break;
        }
    }
    let mut p = best.expect("at least one mix").1;
    if p.determinant() < 0.0 {
        for i in 0..4 {
            p[(i, 0)] = -p[(i, 0)];
        }
    }
    p
}

/// Splits `k ≈ s · (a ⊗ b)` with `a, b ∈ SU(2)`.
fn factor_local(k: &Mat4) -> (Mat2, Mat2) {
    // realignment: R[(i1,j1),(i2,j2)] = k[(2 i1 + i2, 2 j1 + j2)] = a[i1,j1] b[i2,j2]
    let r = |p: usize, q: usize| k[(2 * (p / 2) + q / 2, 2 * (p % 2) + q % 2)];
    let (mut bp, mut bq, mut bv) = (0, 0, -1.0);
    for p in 0..4 {
        for q in 0..4 {
            if r(p, q).norm() > bv {
                bv = r(p, q).norm();
                bp = p;
                bq = q;
            }
        }
    }
    let pivot = r(bp, bq);
    let a = Mat2::from_fn(|i, j| r(2 * i + j, bq));
    let b = Mat2::from_fn(|i, j| r(bp, 2 * i + j) / pivot);
    (to_su2(a), to_su2(b))
}

fn to_su2(m: Mat2) -> Mat2 {
    let d = m.determinant();
    m / d.sqrt()
}

/// Decomposes a two-qubit unitary into local rotations around an entangling
/// core whose coordinates lie in the Weyl chamber.
pub fn kak_decompose(v: &Mat4) -> Result<KAKFactors> {
    let dev = (v.adjoint() * v - Mat4::identity()).norm();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let det_phase = Complex64::from_polar(1.0, v.determinant().arg() / 4.0);
    let vs = v / det_phase;
    let b = magic_basis();
    let vm = b.adjoint() * vs * b;
    let m2 = vm.transpose() * vm;
    let p = real_diagonalizer(&m2);
    let pc = p.map(|x| c(x, 0.0));
    let d = pc.transpose() * m2 * pc;
    let mut theta = [0.0; 4];
    for k in 0..4 {
        theta[k] = d[(k, k)].arg() / 2.0;
    }
    // K1 = Vm P diag(e^{-iθ}) must be real orthogonal with det +1
    let mut m = (theta.iter().sum::<f64>() / PI).round() as i64;
    if m.rem_euclid(2) == 1 {
        theta[0] += PI;
        m += 1;
    }
    let j = m / 2;
    for t in theta.iter_mut() {
        *t -= j as f64 * FRAC_PI_2;
    }
    let mut phase = det_phase * Complex64::from_polar(1.0, j as f64 * FRAC_PI_2);
    let dinv = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| Complex64::from_polar(1.0, -theta[k])));
    let k1 = vm * pc * dinv;
    let post = b * k1 * b.adjoint();
    let pre = b * pc.transpose() * b.adjoint();
    let (mut post1, mut post2) = factor_local(&post);
    let (mut pre1, mut pre2) = factor_local(&pre);
    let raw = coordinates_from_phases(&theta);

    // move the core into the chamber, carrying the local frames along
    let (action, shifts, reduced) = chamber_choice(raw.as_array());
    let (l1, l2) = action_locals()[action];
    post1 *= l1;
    post2 *= l2;
    pre1 = l1.adjoint() * pre1;
    pre2 = l2.adjoint() * pre2;
    let p3 = paulis();
    for (jdx, n) in shifts.iter().enumerate() {
        let n = *n as i64;
        phase *= Complex64::from_polar(1.0, n as f64 * FRAC_PI_2);
        if n.rem_euclid(2) == 1 {
            // σ⊗σ = -(iσ)⊗(iσ)
            phase = -phase;
            let s = p3[jdx] * c(0.0, 1.0);
            pre1 = s * pre1;
            pre2 = s * pre2;
        }
    }
    let core = WeylCoordinates::from_array(reduced);
    let mut out = KAKFactors {
        pre1,
        pre2,
        post1,
        post2,
        core,
        global_phase: phase,
    };
    // absorb the residual ±1 / ±i ambiguity of the SU(2) square roots
    let unphased = KAKFactors {
        global_phase: ONE,
        ..out.clone()
    }
    .reconstruct();
    let overlap = (unphased.adjoint() * v).trace();
    out.global_phase = overlap / overlap.norm();
    Ok(out)
}
