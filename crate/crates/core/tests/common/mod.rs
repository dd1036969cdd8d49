//! Reference implementations used as test oracles. They share no code with
//! the library beyond the matrix types.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C = Complex64;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Permanent by the defining sum over permutations.
pub fn naive_permanent(a: &DMatrix<C>) -> C {
    let n = a.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C::new(0.0, 0.0);
    permute(&mut perm, 0, &mut |p| {
        let mut prod = C::new(1.0, 0.0);
        for (i, &j) in p.iter().enumerate() {
            prod *= a[(i, j)];
        }
        total += prod;
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Output Fock state of `u` on the input occupation, by expanding
/// `prod_i (sum_j u_ij b_j^dag)^{n_i} / sqrt(n_i!)` applied to vacuum.
pub fn evolve(u: &DMatrix<C>, input: &[u32]) -> BTreeMap<Vec<u32>, C> {
    let m = u.nrows();
    let mut poly: BTreeMap<Vec<u32>, C> = BTreeMap::new();
    poly.insert(vec![0; m], C::new(1.0, 0.0));
    for (i, &n) in input.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (mono, coef) in &poly {
                for j in 0..m {
                    let mut k = mono.clone();
                    k[j] += 1;
                    *next.entry(k).or_insert(C::new(0.0, 0.0)) += coef * u[(i, j)];
                }
            }
            poly = next;
        }
        poly.values_mut().for_each(|v| *v /= factorial(n).sqrt());
    }
    poly.into_iter()
        .map(|(k, v)| {
            let norm = k.iter().map(|&x| factorial(x)).product::<f64>().sqrt();
            (k, v * norm)
        })
        .collect()
}

/// Dual-rail computational state: qubit bits `(q1, q2)` of `index`.
pub fn dual_rail(index: usize) -> Vec<u32> {
    let (q1, q2) = (index >> 1, index & 1);
    let mut v = vec![0; 4];
    v[q1] = 1;
    v[2 + q2] = 1;
    v
}

/// Two-photon occupations of the four computational modes.
pub fn two_photon_states() -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a..4 {
            let mut v = vec![0; 4];
            v[a] += 1;
            v[b] += 1;
            out.push(v);
        }
    }
    out
}

/// Heralded map `<outcome| Ω(U) |q_in, ancilla>` onto every two-photon
/// computational state: the dual-rail 4x4 block and the total squared
/// amplitude landing elsewhere. `ancilla` and `outcome` cover every mode
/// after the first four.
pub fn heralded_oracle(u: &DMatrix<C>, ancilla: &[u32], outcome: &[u32]) -> (DMatrix<C>, f64) {
    let mut a = DMatrix::from_element(4, 4, C::new(0.0, 0.0));
    let mut leak = 0.0;
    let rails: Vec<Vec<u32>> = (0..4).map(dual_rail).collect();
    for qi in 0..4 {
        let mut input = dual_rail(qi);
        input.extend_from_slice(ancilla);
        let out = evolve(u, &input);
        for comp in two_photon_states() {
            let mut key = comp.clone();
            key.extend_from_slice(outcome);
            let v = out.get(&key).copied().unwrap_or(C::new(0.0, 0.0));
            match rails.iter().position(|r| *r == comp) {
                Some(qo) => a[(qo, qi)] = v,
                None => leak += v.norm_sqr(),
            }
        }
    }
    (a, leak)
}

/// Fidelity and success with `<A|A>` including leakage, from the
/// Hilbert-Schmidt product `Tr(A B^dag)/4`.
pub fn fidelity_success(a: &DMatrix<C>, leak: f64, t: &DMatrix<C>) -> (f64, f64) {
    let ip = |x: &DMatrix<C>, y: &DMatrix<C>| (x * y.adjoint()).trace() / 4.0;
    let sa = ip(a, a).re + leak / 4.0;
    let st = ip(t, t).re;
    (ip(a, t).norm_sqr() / (sa * st), sa)
}

/// Central difference of a real function of a real vector.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}
