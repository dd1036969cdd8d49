//! Objectives over the extended search space: an unconstrained complex
//! N x N matrix packed as interleaved `(re, im)` pairs in row-major order.

use num_complex::Complex64;

use super::cg::Objective;
use crate::kraus::{KrausJacobian, KrausPlan, N_AMPS};
use crate::linalg::{c, spectral_norm, CMatrix, ZERO};
use crate::metrics::{fidelity_success, kraus_gradients};

pub(crate) fn pack(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut x = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            x.push(m[(i, j)].re);
            x.push(m[(i, j)].im);
        }
    }
    x
}

pub(crate) fn unpack_flat(x: &[f64], out: &mut [Complex64]) {
    for (k, z) in out.iter_mut().enumerate() {
        *z = c(x[2 * k], x[2 * k + 1]);
    }
}

pub(crate) fn unpack(x: &[f64], n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| c(x[2 * (i * n + j)], x[2 * (i * n + j) + 1]))
}

/// Entries frozen to the identity pattern (rows and columns of modes that
/// pass straight through the device).
#[derive(Clone, Debug, Default)]
pub(crate) struct Mask {
    frozen: Vec<bool>,
}

impl Mask {
    pub fn passthrough(n: usize, modes: &[usize]) -> Self {
        let mut frozen = vec![false; n * n];
        for &m in modes {
            for k in 0..n {
                frozen[m * n + k] = true;
                frozen[k * n + m] = true;
            }
        }
        Mask { frozen }
    }

    pub fn apply_to_point(&self, x: &mut [f64], n: usize) {
        for (k, &f) in self.frozen.iter().enumerate() {
            if f {
                let diag = k / n == k % n;
                x[2 * k] = if diag { 1.0 } else { 0.0 };
                x[2 * k + 1] = 0.0;
            }
        }
    }

    /// Scales the free entries so that the free block has unit spectral norm.
    pub fn normalize_free(&self, x: &mut [f64], n: usize) {
        let mut free = x.to_vec();
        self.apply_to_gradient(&mut free);
        let s = spectral_norm(&unpack(&free, n));
        if s > 0.0 && s.is_finite() {
            for (k, &f) in self.frozen.iter().enumerate() {
                if !f {
                    x[2 * k] /= s;
                    x[2 * k + 1] /= s;
                }
            }
        }
    }

    fn apply_to_gradient(&self, g: &mut [f64]) {
        for (k, &f) in self.frozen.iter().enumerate() {
            if f {
                g[2 * k] = 0.0;
                g[2 * k + 1] = 0.0;
            }
        }
    }
}

struct Workspace {
    m: Vec<Complex64>,
    grad: Vec<Complex64>,
    jac: KrausJacobian,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            m: vec![ZERO; n * n],
            grad: vec![ZERO; n * n],
            jac: KrausJacobian::default(),
        }
    }
}

fn write_gradient(src: &[Complex64], g: &mut [f64]) {
    for (k, z) in src.iter().enumerate() {
        g[2 * k] = z.re;
        g[2 * k + 1] = z.im;
    }
}

/// Fidelity alone; scale invariant, so no normalization is needed.
pub(crate) struct FidelityObjective<'a> {
    plan: &'a KrausPlan,
    target: [Complex64; 16],
    mask: Option<&'a Mask>,
    ws: Workspace,
}

impl<'a> FidelityObjective<'a> {
    pub fn new(plan: &'a KrausPlan, target: [Complex64; 16], mask: Option<&'a Mask>) -> Self {
        FidelityObjective {
            plan,
            target,
            mask,
            ws: Workspace::new(plan.modes()),
        }
    }
}

impl Objective for FidelityObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.plan.modes() * self.plan.modes()
    }

    fn value_grad(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        let ws = &mut self.ws;
        unpack_flat(x, &mut ws.m);
        let a = self.plan.evaluate_with_jacobian(&ws.m, &mut ws.jac);
        let (f, s) = fidelity_success(&a, &self.target);
        if !(s > 0.0) || !f.is_finite() {
            g.iter_mut().for_each(|v| *v = 0.0);
            return 0.0;
        }
        let (g_f, _) = kraus_gradients(&a, &self.target);
        ws.grad.iter_mut().for_each(|z| *z = ZERO);
        self.plan.pullback(&ws.jac, &g_f, &mut ws.grad);
        write_gradient(&ws.grad, g);
        if let Some(mask) = self.mask {
            mask.apply_to_gradient(g);
        }
        f
    }
}

/// Penalized success
/// `J = S(M) - μ (1 - F(M)) - ν Σ_k (λ_k - 1)₊²`,
/// where `λ_k` are the eigenvalues of `M†M`. The last term pushes the
/// matrix back into the contractions, so its dilation stays physical.
pub(crate) struct PenaltyObjective<'a> {
    plan: &'a KrausPlan,
    target: [Complex64; 16],
    mask: Option<&'a Mask>,
    pub mu: f64,
    pub nu: f64,
    ws: Workspace,
}

/// Components of the penalized objective at one point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PenaltyParts {
    pub fidelity: f64,
    /// success of `M / σ_max(M)`
    pub success: f64,
}

impl<'a> PenaltyObjective<'a> {
    pub fn new(plan: &'a KrausPlan, target: [Complex64; 16], mask: Option<&'a Mask>, mu: f64, nu: f64) -> Self {
        PenaltyObjective {
            plan,
            target,
            mask,
            mu,
            nu,
            ws: Workspace::new(plan.modes()),
        }
    }

    /// Fidelity and normalized success without gradients.
    pub fn parts(&self, x: &[f64]) -> PenaltyParts {
        let n = self.plan.modes();
        let mut m = vec![ZERO; n * n];
        unpack_flat(x, &mut m);
        let sigma = spectral_norm(&CMatrix::from_row_slice(n, n, &m));
        let a = self.plan.evaluate(&m);
        let (f, s) = fidelity_success(&a, &self.target);
        PenaltyParts {
            fidelity: f,
            success: s / sigma.powi(2 * self.plan.photons() as i32),
        }
    }
}

/// `Σ (λ - 1)₊²` over the eigenvalues of `M†M`, and its packed gradient
/// `4 M Σ (λ - 1)₊ w w†`.
pub(crate) fn excess_penalty(m: &CMatrix) -> (f64, CMatrix) {
    let eig = (m.adjoint() * m).symmetric_eigen();
    let n = m.ncols();
    let mut value = 0.0;
    let mut h = CMatrix::zeros(n, n);
    for k in 0..n {
        let over = eig.eigenvalues[k] - 1.0;
        if over > 0.0 {
            value += over * over;
            let w = eig.eigenvectors.column(k);
            h += (w * w.adjoint()) * c(over, 0.0);
        }
    }
    (value, m * h * c(4.0, 0.0))
}

impl Objective for PenaltyObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.plan.modes() * self.plan.modes()
    }

    fn value_grad(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        let n = self.plan.modes();
        let ws = &mut self.ws;
        unpack_flat(x, &mut ws.m);
        let a = self.plan.evaluate_with_jacobian(&ws.m, &mut ws.jac);
        let (f, s) = fidelity_success(&a, &self.target);
        if !(s > 0.0) || !f.is_finite() {
            g.iter_mut().for_each(|v| *v = 0.0);
            return -self.mu;
        }
        let (excess, g_excess) = excess_penalty(&CMatrix::from_row_slice(n, n, &ws.m));
        let (g_f, g_s) = kraus_gradients(&a, &self.target);
        let mut g_a = [ZERO; N_AMPS];
        for k in 0..N_AMPS {
            g_a[k] = g_s[k] + g_f[k] * self.mu;
        }
        ws.grad.iter_mut().for_each(|z| *z = ZERO);
        self.plan.pullback(&ws.jac, &g_a, &mut ws.grad);
        for i in 0..n {
            for j in 0..n {
                ws.grad[i * n + j] -= g_excess[(i, j)] * self.nu;
            }
        }
        write_gradient(&ws.grad, g);
        if let Some(mask) = self.mask {
            mask.apply_to_gradient(g);
        }
        s - self.mu * (1.0 - f) - self.nu * excess
    }
}
