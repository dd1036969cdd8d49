mod common;

use common::{central_difference, heralded_oracle, naive_permanent, C};
use loqc::fock::{ModeLayout, OccupationVector};
use loqc::kraus::{kraus_operator, permanent, InterferometerMatrix, MeasurementOutcome};
use loqc::linalg::{haar_unitary, random_gaussian};
use loqc::metrics::{score_device, score_gradient};
use loqc::weyl::{gate_from_coordinates, WeylCoordinates};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn ryser_agrees_with_permutation_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for n in 1..=6 {
        for _ in 0..20 {
            let a = random_gaussian(n, n, &mut rng);
            let fast = permanent(&a).unwrap();
            let slow = naive_permanent(&a);
            assert!((fast - slow).norm() <= 1e-12 * slow.norm().max(1.0), "n={n}");
        }
    }
}

fn random_device(rng: &mut ChaCha8Rng, n_anc: usize, n_vac: usize) -> InterferometerMatrix {
    let layout = ModeLayout::new(n_anc, n_vac);
    InterferometerMatrix::physical(haar_unitary(layout.total(), rng), layout).unwrap()
}

#[test]
fn kraus_block_and_leakage_match_fock_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let anc = [1u32, 1];
    for _ in 0..20 {
        let u = random_device(&mut rng, 2, 0);
        let a = kraus_operator(&u, &anc.to_vec().into(), &MeasurementOutcome::new(anc.to_vec())).unwrap();
        let (block, leak) = heralded_oracle(&u.entries, &anc, &anc);
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.matrix[(i, j)] - block[(i, j)]).norm() < 1e-12);
            }
        }
        assert!((a.leakage - leak).abs() < 1e-12);
    }
}

#[test]
fn uneven_ancillas_and_vacuum_detectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    // two photons in one ancilla mode, one vacuum mode, outcome moving a
    // photon into the vacuum detector
    let anc_in = [2u32, 0];
    let outcome = [1u32, 0, 1];
    for _ in 0..5 {
        let layout = ModeLayout::new(2, 1);
        let u = InterferometerMatrix::physical(haar_unitary(7, &mut rng), layout).unwrap();
        let a = kraus_operator(&u, &anc_in.to_vec().into(), &MeasurementOutcome::new(outcome.to_vec())).unwrap();
        let mut padded_in = anc_in.to_vec();
        padded_in.push(0);
        let (block, leak) = heralded_oracle(&u.entries, &padded_in, &outcome);
        assert!((a.matrix - nalgebra::Matrix4::from_fn(|i, j| block[(i, j)])).norm() < 1e-12);
        assert!((a.leakage - leak).abs() < 1e-12);
    }
}

#[test]
fn score_matches_oracle_fidelity_and_success() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let t = gate_from_coordinates(WeylCoordinates::new(1.1, 0.4, 0.2));
    let td = DMatrix::from_fn(4, 4, |i, j| t.matrix[(i, j)]);
    let anc = [1u32, 1, 1];
    for _ in 0..5 {
        let u = random_device(&mut rng, 3, 0);
        let s = score_device(&u, &anc.to_vec().into(), &MeasurementOutcome::new(anc.to_vec()), &t).unwrap();
        let (block, leak) = heralded_oracle(&u.entries, &anc, &anc);
        let (f, p) = common::fidelity_success(&block, leak, &td);
        assert!((s.fidelity - f).abs() < 1e-12 && (s.success - p).abs() < 1e-14);
    }
}

#[test]
fn heralded_branches_never_exceed_the_input_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let anc: OccupationVector = vec![1, 1].into();
    for _ in 0..5 {
        let u = random_device(&mut rng, 2, 0);
        let total: f64 = loqc::fock::enumerate_fock_basis(2, 2)
            .into_iter()
            .map(|o| {
                let a = kraus_operator(&u, &anc, &MeasurementOutcome::new(o)).unwrap();
                a.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>() + a.leakage
            })
            .sum();
        assert!(total > 0.0 && total <= 4.0 + 1e-12, "{total}");
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let layout = ModeLayout::new(2, 0);
    let anc: OccupationVector = vec![1, 1].into();
    let out = MeasurementOutcome::new(vec![1, 1]);
    let t = gate_from_coordinates(WeylCoordinates::cnot());
    for _ in 0..5 {
        let m = random_gaussian(6, 6, &mut rng).map(|z| z * 0.5);
        let u = InterferometerMatrix::extended(m.clone(), layout).unwrap();
        let g = score_gradient(&u, &anc, &out, &t).unwrap();
        let x: Vec<f64> = m.iter().flat_map(|z| [z.re, z.im]).collect();
        let rebuild = |x: &[f64]| {
            let m = DMatrix::from_fn(6, 6, |i, j| {
                let k = 2 * (j * 6 + i);
                C::new(x[k], x[k + 1])
            });
            score_device(&InterferometerMatrix::extended(m, layout).unwrap(), &anc, &out, &t).unwrap()
        };
        let fd_f = central_difference(|x| rebuild(x).fidelity, &x, 1e-6);
        let fd_s = central_difference(|x| rebuild(x).success, &x, 1e-6);
        for k in 0..36 {
            let (i, j) = (k % 6, k / 6);
            let an = [
                (g.d_fidelity_re(i, j), fd_f[2 * k]),
                (g.d_fidelity_im(i, j), fd_f[2 * k + 1]),
                (g.d_success_re(i, j), fd_s[2 * k]),
                (g.d_success_im(i, j), fd_s[2 * k + 1]),
            ];
            for (a, f) in an {
                assert!((a - f).abs() <= 1e-5 * a.abs().max(1e-4), "({i},{j}) {a} vs {f}");
            }
        }
    }
}
