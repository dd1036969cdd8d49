//! Unitary dilation of a contraction: embeds an N x N matrix with spectral
//! norm at most one as the top-left block of an (N + r) x (N + r) unitary,
//! where r counts singular values strictly below one. The extra rows and
//! columns are vacuum modes that are injected empty and detected empty.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kraus::SUBUNITARY_TOL;
use crate::linalg::{c, CMatrix, ZERO};

/// Singular values within this distance of one are treated as saturated.
pub const SATURATION_TOL: f64 = 1e-13;

/// Returns the dilated unitary and the number of added modes.
///
/// With `M = W Σ V†` and `S = sqrt(1 - Σ²)` restricted to the deficient
/// singular values, the dilation is `[[M, W_r S_r], [-S_r V_r†, Σ_r]]`.
pub fn dilate(m: &CMatrix) -> Result<(CMatrix, usize)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("dilation needs a square matrix, got {:?}", m.shape())));
    }
    let n = m.nrows();
    let svd = m.clone().svd(true, true);
    let (w, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::Dimension("SVD failed".into())),
    };
    let sigma = svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    if smax > 1.0 + SUBUNITARY_TOL {
        return Err(Error::NotSubunitary(smax));
    }
    let deficient: Vec<usize> = (0..n).filter(|&k| sigma[k] < 1.0 - SATURATION_TOL).collect();
    let r = deficient.len();
    let clamped: Vec<f64> = sigma
        .iter()
        .map(|&s| if s >= 1.0 - SATURATION_TOL { 1.0 } else { s })
        .collect();
    let mut out = DMatrix::from_element(n + r, n + r, ZERO);
    // top-left block rebuilt from the clamped spectrum keeps the result exactly unitary
    let sig = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, clamped.iter().map(|&s| c(s, 0.0))));
    let top = &w * sig * &vt;
    out.view_mut((0, 0), (n, n)).copy_from(&top);
    for (col, &k) in deficient.iter().enumerate() {
        let s = clamped[k];
        let defect = (1.0 - s * s).sqrt();
        for i in 0..n {
            out[(i, n + col)] = w[(i, k)] * defect;
            out[(n + col, i)] = -vt[(k, i)] * defect;
        }
        out[(n + col, n + col)] = Complex64::new(s, 0.0);
    }
    Ok((out, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, random_gaussian, spectral_norm, unitarity_deviation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_input_is_returned_untrimmed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(5, &mut rng);
        let (d, r) = dilate(&u).unwrap();
        assert_eq!(r, 0);
        assert!((d - u).norm() < 1e-12);
    }

    #[test]
    fn diagonal_contraction() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)]));
        let (d, r) = dilate(&m).unwrap();
        assert_eq!((r, d.nrows()), (1, 3));
        assert!(unitarity_deviation(&d) < 1e-12);
        assert!((d.view((0, 0), (2, 2)) - &m).norm() < 1e-12);
    }

    #[test]
    fn random_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..8 {
            let g = random_gaussian(n, n, &mut rng);
            let m = g.map(|z| z / spectral_norm(&g));
            let (d, _) = dilate(&m).unwrap();
            assert!(unitarity_deviation(&d) < 1e-10);
            assert!((d.view((0, 0), (n, n)) - &m).norm() < 1e-12);
        }
    }

    #[test]
    fn expanding_matrix_rejected() {
        let m = CMatrix::identity(3, 3).map(|z| z * 1.01);
        assert!(matches!(dilate(&m), Err(Error::NotSubunitary(_))));
    }
}
