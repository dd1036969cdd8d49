//! Fock-basis bookkeeping: occupation vectors, mode layouts and the
//! dual-rail encoding of two qubits into four computational modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of computational modes for two dual-rail qubits.
pub const COMP_MODES: usize = 4;

/// Photon counts per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        OccupationVector(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        OccupationVector(vec![0; modes])
    }

    /// One photon in each of `modes` modes.
    pub fn singles(modes: usize) -> Self {
        OccupationVector(vec![1; modes])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    pub fn concat(&self, other: &OccupationVector) -> OccupationVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        OccupationVector(v)
    }

    /// Pads with empty modes up to `modes`.
    pub fn padded(&self, modes: usize) -> OccupationVector {
        let mut v = self.0.clone();
        if v.len() < modes {
            v.resize(modes, 0);
        }
        OccupationVector(v)
    }

    /// Mode indices repeated by occupation, e.g. (2,0,1) -> [0,0,2].
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(m, &n)| std::iter::repeat(m).take(n as usize))
            .collect()
    }

    /// Product of factorials of the counts.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(v: Vec<u32>) -> Self {
        OccupationVector(v)
    }
}

impl std::fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Mode bookkeeping: computational modes first, then ancilla modes, then
/// unoccupied vacuum modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLayout {
    pub n_comp: usize,
    pub n_ancilla: usize,
    pub n_vacuum: usize,
}

impl ModeLayout {
    pub fn new(n_ancilla: usize, n_vacuum: usize) -> Self {
        ModeLayout {
            n_comp: COMP_MODES,
            n_ancilla,
            n_vacuum,
        }
    }

    pub fn total(&self) -> usize {
        self.n_comp + self.n_ancilla + self.n_vacuum
    }

    /// Modes that are photodetected (everything past the computational block).
    pub fn measured(&self) -> usize {
        self.n_ancilla + self.n_vacuum
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_comp != COMP_MODES {
            return Err(Error::Dimension(format!(
                "two dual-rail qubits need {COMP_MODES} computational modes, got {}",
                self.n_comp
            )));
        }
        Ok(())
    }

    pub fn with_vacuum(&self, n_vacuum: usize) -> Self {
        ModeLayout { n_vacuum, ..*self }
    }
}

/// The four two-qubit basis states in the dual-rail encoding, indexed
/// `2*q1 + q2`. Qubit k in {1,2} sends logical 0 to mode 2k-1 and logical 1
/// to mode 2k (1-based).
#[derive(Clone, Debug)]
pub struct DualRailBasis {
    pub basis_states: [OccupationVector; 4],
}

impl Default for DualRailBasis {
    fn default() -> Self {
        DualRailBasis {
            basis_states: [0, 1, 2, 3].map(dual_rail_state),
        }
    }
}

/// Occupation of the computational modes for basis index 0..3.
pub fn dual_rail_state(index: usize) -> OccupationVector {
    assert!(index < 4, "two-qubit basis index out of range: {index}");
    let (q1, q2) = (index >> 1, index & 1);
    let mut v = vec![0u32; COMP_MODES];
    v[q1] = 1;
    v[2 + q2] = 1;
    OccupationVector(v)
}

/// Computational-mode indices (0-based) occupied by basis state `index`.
pub fn dual_rail_modes(index: usize) -> [usize; 2] {
    [index >> 1, 2 + (index & 1)]
}

/// Inverse of the dual-rail encoding. Returns `None` for leakage states.
pub fn dual_rail_index(occ: &OccupationVector) -> Option<usize> {
    match occ.counts() {
        [a, b, c, d] => {
            let q1 = match (a, b) {
                (1, 0) => 0,
                (0, 1) => 1,
                _ => return None,
            };
            let q2 = match (c, d) {
                (1, 0) => 0,
                (0, 1) => 1,
                _ => return None,
            };
            Some(2 * q1 + q2)
        }
        _ => None,
    }
}

/// All occupation vectors with `n_photons` photons over `n_modes` modes,
/// in ascending lexicographic order.
pub fn enumerate_fock_basis(n_photons: usize, n_modes: usize) -> Vec<OccupationVector> {
    assert!(n_modes >= 1, "at least one mode is required");
    let mut out = Vec::new();
    let mut current = vec![0u32; n_modes];
    fill(&mut current, 0, n_photons as u32, &mut out);
    out
}

fn fill(current: &mut Vec<u32>, mode: usize, remaining: u32, out: &mut Vec<OccupationVector>) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(OccupationVector(current.clone()));
        return;
    }
    for n in 0..=remaining {
        current[mode] = n;
        fill(current, mode + 1, remaining - n, out);
    }
    current[mode] = 0;
}

/// Binomial coefficient as u128 (exact for the small arguments used here).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
