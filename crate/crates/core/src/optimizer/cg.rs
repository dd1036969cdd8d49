//! Nonlinear conjugate-gradient ascent: Polak-Ribière+ directions with a
//! restart whenever the direction stops being an ascent direction, and a
//! strong-Wolfe line search that zooms with cubic interpolation.

/// Smooth objective to be maximized.
pub trait Objective {
    fn dim(&self) -> usize;
    /// Writes the gradient into `grad` and returns the value.
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Clone, Debug)]
pub struct CgSettings {
    pub max_iterations: usize,
    /// Stop once the gradient infinity-norm falls below this.
    pub gradient_tol: f64,
    /// Stop when the value has improved by less than this (relative) over
    /// `stall_window` consecutive iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
    /// Stop as soon as the value reaches this level.
    pub stop_value: Option<f64>,
    pub max_line_evals: usize,
    /// Sufficient-increase and curvature constants.
    pub c1: f64,
    pub c2: f64,
    /// Largest step length the line search may try.
    pub max_step: f64,
}

impl Default for CgSettings {
    fn default() -> Self {
        CgSettings {
            max_iterations: 500,
            gradient_tol: 1e-9,
            stall_tol: 1e-12,
            stall_window: 25,
            stop_value: None,
            max_line_evals: 30,
            c1: 1e-4,
            c2: 0.1,
            max_step: 1e3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgStatus {
    GradientTol,
    StopValue,
    Stalled,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: CgStatus,
    /// Objective value after each accepted step.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Probe<'a, O: Objective> {
    obj: &'a mut O,
    x: &'a [f64],
    d: &'a [f64],
    trial: Vec<f64>,
    grad: Vec<f64>,
    evals: usize,
}

impl<'a, O: Objective> Probe<'a, O> {
    /// Value and directional derivative at step `alpha`.
    fn at(&mut self, alpha: f64) -> (f64, f64) {
        for ((t, x), d) in self.trial.iter_mut().zip(self.x).zip(self.d) {
            *t = x + alpha * d;
        }
        self.evals += 1;
        let f = self.obj.value_grad(&self.trial, &mut self.grad);
        (f, dot(&self.grad, self.d))
    }
}

/// Minimizer of the cubic interpolating two (step, value, slope) triples,
/// safeguarded into the interior of the bracket.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let fallback = 0.5 * (a + b);
    if disc < 0.0 || !disc.is_finite() {
        return fallback;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    let margin = 0.1 * (hi - lo);
    if !t.is_finite() || t < lo + margin || t > hi - margin {
        fallback
    } else {
        t
    }
}

enum Search {
    Found { alpha: f64, value: f64 },
    Failed,
}

/// Strong-Wolfe line search on `φ(α) = -f(x + α d)`.
fn line_search<O: Objective>(probe: &mut Probe<'_, O>, f0: f64, slope0: f64, alpha0: f64, s: &CgSettings) -> Search {
    // work with the minimization form
    let (phi0, dphi0) = (-f0, -slope0);
    let mut prev = (0.0, phi0, dphi0);
    let mut alpha = alpha0.min(s.max_step);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..s.max_line_evals {
        let (f, g) = probe.at(alpha);
        let (phi, dphi) = (-f, -g);
        if !phi.is_finite() {
            alpha = 0.5 * (prev.0 + alpha);
            continue;
        }
        if phi < phi0 && best.map_or(true, |(_, v)| phi < v) {
            best = Some((alpha, phi));
        }
        if phi > phi0 + s.c1 * alpha * dphi0 || (i > 0 && phi >= prev.1) {
            return zoom(probe, phi0, dphi0, prev, (alpha, phi, dphi), s, best);
        }
        if dphi.abs() <= -s.c2 * dphi0 {
            return Search::Found { alpha, value: f };
        }
        if dphi >= 0.0 {
            return zoom(probe, phi0, dphi0, (alpha, phi, dphi), prev, s, best);
        }
        prev = (alpha, phi, dphi);
        if alpha >= s.max_step {
            break;
        }
        alpha = (2.0 * alpha).min(s.max_step);
    }
    accept_best(probe, best)
}

fn zoom<O: Objective>(
    probe: &mut Probe<'_, O>,
    phi0: f64,
    dphi0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    s: &CgSettings,
    mut best: Option<(f64, f64)>,
) -> Search {
    for _ in 0..s.max_line_evals {
        let alpha = cubic_min(lo.0, lo.1, lo.2, hi.0, hi.1, hi.2);
        if (hi.0 - lo.0).abs() < 1e-16 * lo.0.abs().max(1.0) {
            break;
        }
        let (f, g) = probe.at(alpha);
        let (phi, dphi) = (-f, -g);
        if phi < phi0 && best.map_or(true, |(_, v)| phi < v) {
            best = Some((alpha, phi));
        }
        if !phi.is_finite() || phi > phi0 + s.c1 * alpha * dphi0 || phi >= lo.1 {
            hi = (alpha, phi, dphi);
        } else {
            if dphi.abs() <= -s.c2 * dphi0 {
                return Search::Found { alpha, value: f };
            }
            if dphi * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, phi, dphi);
        }
    }
    accept_best(probe, best)
}

fn accept_best<O: Objective>(probe: &mut Probe<'_, O>, best: Option<(f64, f64)>) -> Search {
    match best {
        // re-evaluate so the probe's gradient buffer matches the accepted point
        Some((alpha, _)) => {
            let (f, _) = probe.at(alpha);
            Search::Found { alpha, value: f }
        }
        None => Search::Failed,
    }
}

/// Maximizes `obj` starting from `x0`.
pub fn maximize<O: Objective>(obj: &mut O, x0: &[f64], s: &CgSettings) -> CgResult {
    let n = obj.dim();
    assert_eq!(x0.len(), n);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_grad(&x, &mut g);
    let mut evals = 1;
    let mut d = g.clone();
    let mut trace = Vec::new();
    let mut last_alpha: Option<f64> = None;
    let mut last_slope = 0.0;
    let mut stall = 0;
    let mut restarted = true;
    let mut status = CgStatus::MaxIterations;
    let mut iterations = 0;

    for it in 0..s.max_iterations {
        iterations = it;
        if let Some(stop) = s.stop_value {
            if f >= stop {
                status = CgStatus::StopValue;
                break;
            }
        }
        if inf_norm(&g) < s.gradient_tol {
            status = CgStatus::GradientTol;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope <= 0.0 {
            d.copy_from_slice(&g);
            slope = dot(&g, &g);
            restarted = true;
        }
        let alpha0 = match last_alpha {
            Some(a) if !restarted && slope > 0.0 => (a * last_slope / slope).clamp(1e-10, s.max_step),
            Some(a) => a.clamp(1e-10, s.max_step),
            None => 1.0 / inf_norm(&g).max(1e-12),
        };
        let mut probe = Probe {
            obj: &mut *obj,
            x: &x,
            d: &d,
            trial: vec![0.0; n],
            grad: vec![0.0; n],
            evals: 0,
        };
        let outcome = line_search(&mut probe, f, slope, alpha0, s);
        evals += probe.evals;
        let (alpha, f_new, g_new) = match outcome {
            Search::Found { alpha, value } => (alpha, value, probe.grad),
            Search::Failed => {
                if restarted {
                    status = CgStatus::LineSearchFailed;
                    break;
                }
                d.copy_from_slice(&g);
                restarted = true;
                last_alpha = None;
                continue;
            }
        };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += alpha * di;
        }
        let gg = dot(&g, &g);
        let beta = if gg > 0.0 {
            (g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum::<f64>() / gg).max(0.0)
        } else {
            0.0
        };
        let improvement = f_new - f;
        f = f_new;
        g = g_new;
        trace.push(f);
        restarted = (it + 1) % n.max(1) == 0;
        if restarted {
            d.copy_from_slice(&g);
        } else {
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = gi + beta * *di;
            }
        }
        last_alpha = Some(alpha);
        last_slope = slope;
        if improvement <= s.stall_tol * f.abs().max(1e-300) {
            stall += 1;
            if stall >= s.stall_window {
                status = CgStatus::Stalled;
                iterations = it + 1;
                break;
            }
        } else {
            stall = 0;
        }
        iterations = it + 1;
    }
    if status == CgStatus::MaxIterations {
        if let Some(stop) = s.stop_value {
            if f >= stop {
                status = CgStatus::StopValue;
            }
        }
    }
    CgResult {
        x,
        value: f,
        gradient: g,
        iterations,
        evaluations: evals,
        status,
        trace,
    }
}
