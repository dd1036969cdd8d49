//! Matrix permanents by Ryser's inclusion-exclusion formula, visiting
//! column subsets in Gray-code order so each step adds or removes a single
//! column from the running row sums.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};

pub const MAX_DIM: usize = 30;

/// Permanent of a square matrix.
pub fn permanent(m: &CMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "permanent needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n > MAX_DIM {
        return Err(Error::UnsupportedSize(n));
    }
    let rows: Vec<Complex64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    Ok(ryser(&rows, n))
}

/// Ryser permanent of an `n x n` row-major buffer.
pub fn ryser(a: &[Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return ONE;
    }
    let mut row_sums = [ZERO; MAX_DIM];
    let row_sums = &mut row_sums[..n];
    let mut total = ZERO;
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray & (1 << j) != 0 {
            for (i, r) in row_sums.iter_mut().enumerate() {
                *r += a[i * n + j];
            }
        } else {
            for (i, r) in row_sums.iter_mut().enumerate() {
                *r -= a[i * n + j];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, &r| acc * r);
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Permanent together with all of its first derivatives: `grad[i*n + j]`
/// is the permanent of the minor with row i and column j removed.
pub fn ryser_with_minors(a: &[Complex64], n: usize, grad: &mut [Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(grad.len(), n * n);
    grad.iter_mut().for_each(|g| *g = ZERO);
    if n == 0 {
        return ONE;
    }
    let mut row_sums = [ZERO; MAX_DIM];
    let mut excl = [ZERO; MAX_DIM];
    let row_sums = &mut row_sums[..n];
    let excl = &mut excl[..n];
    let mut total = ZERO;
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let added = gray & (1 << j) != 0;
        for (i, r) in row_sums.iter_mut().enumerate() {
            if added {
                *r += a[i * n + j];
            } else {
                *r -= a[i * n + j];
            }
        }
        // excl[i] = product of all row sums except row i
        let mut prefix = ONE;
        for i in 0..n {
            excl[i] = prefix;
            prefix *= row_sums[i];
        }
        let mut suffix = ONE;
        for i in (0..n).rev() {
            excl[i] *= suffix;
            suffix *= row_sums[i];
        }
        let negative = gray.count_ones() % 2 == 1;
        if negative {
            total -= prefix;
        } else {
            total += prefix;
        }
        let mut bits = gray;
        while bits != 0 {
            let l = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for i in 0..n {
                if negative {
                    grad[i * n + l] -= excl[i];
                } else {
                    grad[i * n + l] += excl[i];
                }
            }
        }
    }
    if n % 2 == 1 {
        grad.iter_mut().for_each(|g| *g = -*g);
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, random_gaussian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive(a: &[Complex64], n: usize) -> Complex64 {
        fn rec(a: &[Complex64], n: usize, row: usize, used: &mut Vec<bool>) -> Complex64 {
            if row == n {
                return ONE;
            }
            let mut s = ZERO;
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    s += a[row * n + j] * rec(a, n, row + 1, used);
                    used[j] = false;
                }
            }
            s
        }
        rec(a, n, 0, &mut vec![false; n])
    }

    fn flat(m: &CMatrix) -> Vec<Complex64> {
        let n = m.nrows();
        (0..n * n).map(|k| m[(k / n, k % n)]).collect()
    }

    #[test]
    fn identity_and_ones() {
        assert!((permanent(&CMatrix::identity(4, 4)).unwrap() - ONE).norm() < 1e-15);
        let ones = CMatrix::from_element(3, 3, ONE);
        assert!((permanent(&ones).unwrap() - c(6.0, 0.0)).norm() < 1e-13);
        assert_eq!(permanent(&CMatrix::zeros(0, 0)).unwrap(), ONE);
    }

    #[test]
    fn oversize_rejected() {
        let m = CMatrix::zeros(31, 31);
        assert!(matches!(permanent(&m), Err(Error::UnsupportedSize(31))));
        assert!(permanent(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn matches_permutation_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            let m = random_gaussian(n, n, &mut rng);
            let a = flat(&m);
            let p = ryser(&a, n);
            let q = naive(&a, n);
            assert!((p - q).norm() <= 1e-12 * q.norm().max(1.0), "n={n}");
        }
    }

    #[test]
    fn minors_match_explicit_deletion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            let m = random_gaussian(n, n, &mut rng);
            let a = flat(&m);
            let mut g = vec![ZERO; n * n];
            let p = ryser_with_minors(&a, n, &mut g);
            assert!((p - ryser(&a, n)).norm() < 1e-12);
            for i in 0..n {
                for j in 0..n {
                    let minor = m.clone().remove_row(i).remove_column(j);
                    let expect = naive(&flat(&minor), n - 1);
                    assert!((g[i * n + j] - expect).norm() < 1e-12, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn linear_in_each_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 5;
        let a = flat(&random_gaussian(n, n, &mut rng));
        let b = flat(&random_gaussian(n, n, &mut rng));
        let (alpha, beta) = (c(0.3, -1.2), c(-0.7, 0.4));
        for row in 0..n {
            let mut x = a.clone();
            let mut y = a.clone();
            let mut z = a.clone();
            for j in 0..n {
                x[row * n + j] = b[row * n + j];
                z[row * n + j] = alpha * a[row * n + j] + beta * b[row * n + j];
            }
            y.copy_from_slice(&a);
            let lhs = ryser(&z, n);
            let rhs = alpha * ryser(&y, n) + beta * ryser(&x, n);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
    }
}
