//! Coordinate-level symmetry reductions.
//!
//! Local equivalence acts on `{c1,c2,c3}` by permutations, sign flips of
//! pairs of coordinates and shifts of any coordinate by π; its fundamental
//! domain is the Weyl chamber `0 <= c3 <= c2 <= c1 <= π - c2`.
//!
//! Heralded linear-optical success is additionally invariant under complex
//! conjugation (`{c1,c2,c3} -> {π-c1,c2,c3}`) and under composition with
//! SWAP (`{c1,c2,c3} -> {π/2-c3, π/2-c2, π/2-c1}`). Together these reduce the
//! chamber to the quarter `π/2 >= c1 >= c2 >= c3 >= 0, c1 + c3 <= π/2`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI};

use super::WeylCoordinates;

/// Tolerance for boundary decisions in canonicalization.
pub const CANON_TOL: f64 = 1e-10;

fn fold_half(x: f64) -> f64 {
    let mut r = x.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r = PI - r;
    }
    r.max(0.0)
}

/// Reduction by every symmetry except the SWAP shift: all sign flips, π
/// shifts and permutations, landing in `π/2 >= c1 >= c2 >= c3 >= 0`.
fn half_chamber(c: [f64; 3]) -> [f64; 3] {
    let mut v = c.map(fold_half);
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    v
}

fn lex_cmp_tol(a: &[f64; 3], b: &[f64; 3], tol: f64) -> Ordering {
    for k in 0..3 {
        if (a[k] - b[k]).abs() > tol {
            return a[k].partial_cmp(&b[k]).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Representative of the full symmetry orbit inside the quarter chamber.
/// On the boundary plane `c1 + c3 = π/2` the lexicographically smaller of
/// the two mirror images is returned.
pub fn canonicalize(c: WeylCoordinates) -> WeylCoordinates {
    let h1 = half_chamber(c.as_array());
    let h2 = half_chamber(h1.map(|x| x + FRAC_PI_2));
    let (s1, s2) = (h1[0] + h1[2], h2[0] + h2[2]);
    let pick = if (s1 - s2).abs() > CANON_TOL {
        if s1 < s2 {
            h1
        } else {
            h2
        }
    } else if lex_cmp_tol(&h2, &h1, CANON_TOL) == Ordering::Less {
        h2
    } else {
        h1
    };
    WeylCoordinates::from_array(pick)
}

pub fn in_quarter_chamber(c: &WeylCoordinates, tol: f64) -> bool {
    in_half_chamber(c, tol) && c.c1 + c.c3 <= FRAC_PI_2 + tol
}

fn in_half_chamber(c: &WeylCoordinates, tol: f64) -> bool {
    c.c3 >= -tol && c.c2 >= c.c3 - tol && c.c1 >= c.c2 - tol && c.c1 <= FRAC_PI_2 + tol
}

pub fn in_weyl_chamber(c: &WeylCoordinates, tol: f64) -> bool {
    c.c3 >= -tol && c.c2 >= c.c3 - tol && c.c1 >= c.c2 - tol && c.c1 + c.c2 <= PI + tol && c.c1 < PI - tol
}

/// The 24 coordinate maps generated by permutations and paired sign flips.
pub(crate) fn tetrahedral_actions() -> Vec<([usize; 3], [f64; 3])> {
    // (perm, signs): image[perm[a]] = signs[a] * c[a]
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let signs = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for s in signs {
            out.push((p, s));
        }
    }
    out
}

pub(crate) fn apply_action(c: [f64; 3], perm: [usize; 3], signs: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for a in 0..3 {
        out[perm[a]] = signs[a] * c[a];
    }
    out
}

/// Shift amounts (in units of π) taking each coordinate into `[0, π)`,
/// snapping values within tolerance of π down to 0.
pub(crate) fn pi_shifts(c: [f64; 3]) -> [f64; 3] {
    c.map(|x| {
        let mut n = (x / PI).floor();
        if x - n * PI > PI - CANON_TOL {
            n += 1.0;
        }
        n
    })
}

/// Local-equivalence representative in the Weyl chamber (no conjugation or
/// SWAP symmetry). Ties on the chamber boundary resolve to the
/// lexicographically smallest triple.
pub fn chamber_reduce(c: WeylCoordinates) -> WeylCoordinates {
    let (_, _, v) = chamber_choice(c.as_array());
    WeylCoordinates::from_array(v)
}

/// Index of the chosen tetrahedral action, the π shifts applied after it,
/// and the resulting chamber point.
pub(crate) fn chamber_choice(c: [f64; 3]) -> (usize, [f64; 3], [f64; 3]) {
    let mut best: Option<(usize, [f64; 3], [f64; 3])> = None;
    for (k, (perm, signs)) in tetrahedral_actions().into_iter().enumerate() {
        let g = apply_action(c, perm, signs);
        let n = pi_shifts(g);
        let mut v = [0.0; 3];
        for j in 0..3 {
            v[j] = g[j] - n[j] * PI;
        }
        if !in_weyl_chamber(&WeylCoordinates::from_array(v), CANON_TOL) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, _, b)) => lex_cmp_tol(&v, b, CANON_TOL) == Ordering::Less,
        };
        if better {
            best = Some((k, n, v));
        }
    }
    let (k, n, v) = best.expect("Weyl chamber is a fundamental domain");
    (k, n, v.map(|x| x.max(0.0)))
}

fn reduce_mod_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > 2.0 * PI - 1e-9 {
        0.0
    } else {
        r
    }
}

fn orbit_key(v: &[f64; 3]) -> [i64; 3] {
    v.map(|x| (x * 1e8).round() as i64)
}

/// All triples reachable from `c` by the symmetry table (Weyl-group moves,
/// π shifts, conjugation and SWAP composition), each coordinate reduced
/// into `[0, 2π)`. Ordered deterministically.
pub fn symmetry_orbit(c: WeylCoordinates) -> Vec<WeylCoordinates> {
    type Gen = fn([f64; 3]) -> [f64; 3];
    let gens: [Gen; 11] = [
        |[a, b, c]| [a, c, b],
        |[a, b, c]| [a, -c, -b],
        |[a, b, c]| [b, a, c],
        |[a, b, c]| [-b, -a, c],
        |[a, b, c]| [c, b, a],
        |[a, b, c]| [-c, b, -a],
        |[a, b, c]| [a + PI, b, c],
        |[a, b, c]| [a, b + PI, c],
        |[a, b, c]| [a, b, c + PI],
        |[a, b, c]| [PI - a, b, c],
        |[a, b, c]| [FRAC_PI_2 - c, FRAC_PI_2 - b, FRAC_PI_2 - a],
    ];
    let start = c.as_array().map(reduce_mod_2pi);
    let mut seen: BTreeMap<[i64; 3], [f64; 3]> = BTreeMap::new();
    let mut queue = VecDeque::new();
    seen.insert(orbit_key(&start), start);
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        for g in gens {
            let w = g(v).map(reduce_mod_2pi);
            let key = orbit_key(&w);
            if !seen.contains_key(&key) {
                seen.insert(key, w);
                queue.push_back(w);
            }
        }
    }
    seen.into_values().map(WeylCoordinates::from_array).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(a: WeylCoordinates, b: WeylCoordinates, tol: f64) -> bool {
        a.max_abs_diff(&b) <= tol
    }

    #[test]
    fn conjugation_example() {
        let r = canonicalize(WeylCoordinates::new(3.0 * FRAC_PI_4, 0.0, 0.0));
        assert!(close(r, WeylCoordinates::new(FRAC_PI_4, 0.0, 0.0), 1e-15));
    }

    #[test]
    fn swap_maps_to_origin() {
        let r = canonicalize(WeylCoordinates::swap());
        assert!(close(r, WeylCoordinates::identity(), 1e-15));
    }

    #[test]
    fn named_points_are_fixed() {
        for p in [WeylCoordinates::identity(), WeylCoordinates::cnot(), WeylCoordinates::b_gate()] {
            assert!(close(canonicalize(p), p, 1e-15), "{p:?}");
        }
        let sqrt_swap = WeylCoordinates::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);
        assert!(close(canonicalize(sqrt_swap), sqrt_swap, 1e-15));
        // the A2 vertex (π/2, π/2, 0) is the SWAP image of CNOT
        let a2 = WeylCoordinates::new(FRAC_PI_2, FRAC_PI_2, 0.0);
        assert!(close(canonicalize(a2), WeylCoordinates::cnot(), 1e-15));
    }

    #[test]
    fn origin_orbit_contains_swap() {
        let orbit = symmetry_orbit(WeylCoordinates::identity());
        assert!(orbit.iter().any(|c| close(*c, WeylCoordinates::swap(), 1e-12)));
    }

    #[test]
    fn cnot_fixed_by_conjugation() {
        let c = WeylCoordinates::cnot();
        let image = WeylCoordinates::new(PI - c.c1, c.c2, c.c3);
        assert!(close(image, c, 0.0));
        assert!(symmetry_orbit(c).iter().any(|o| close(*o, c, 1e-12)));
    }

    #[test]
    fn generic_orbit_is_full_group() {
        let orbit = symmetry_orbit(WeylCoordinates::new(0.31, 0.17, 0.05));
        assert_eq!(orbit.len(), 768);
    }

    #[test]
    fn chamber_reduce_examples() {
        let r = chamber_reduce(WeylCoordinates::new(-FRAC_PI_2, 0.0, 0.0));
        assert!(close(r, WeylCoordinates::cnot(), 1e-12));
        // conjugate images are distinct off the c3 = 0 face
        let p = WeylCoordinates::new(0.9, 0.4, 0.2);
        let q = chamber_reduce(WeylCoordinates::new(-0.9, -0.4, -0.2));
        assert!(close(q, WeylCoordinates::new(PI - 0.9, 0.4, 0.2), 1e-12));
        assert!(!close(q, p, 1e-3));
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent_and_orbit_constant(
            a in -7.0f64..7.0, b in -7.0f64..7.0, c in -7.0f64..7.0
        ) {
            let x = WeylCoordinates::new(a, b, c);
            let r = canonicalize(x);
            prop_assert!(in_quarter_chamber(&r, 1e-12));
            prop_assert!(close(canonicalize(r), r, 1e-12));
            for o in symmetry_orbit(x) {
                prop_assert!(close(canonicalize(o), r, 1e-12), "{:?} -> {:?} vs {:?}", o, canonicalize(o), r);
            }
        }

        #[test]
        fn chamber_reduce_lands_in_chamber(
            a in -7.0f64..7.0, b in -7.0f64..7.0, c in -7.0f64..7.0
        ) {
            let r = chamber_reduce(WeylCoordinates::new(a, b, c));
            prop_assert!(in_weyl_chamber(&r, 1e-10));
            prop_assert!(close(chamber_reduce(r), r, 1e-12));
        }
    }
}
