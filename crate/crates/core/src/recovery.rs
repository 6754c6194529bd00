//! Recovery algorithms: one-step hard thresholding, analysis-side l1
//! minimization with an exact data constraint, and the iterative
//! thresholding scheme with a decaying threshold.

use crate::error::{CoreError, Result};
use crate::frame::{Frame, FrameCoeffs};
use crate::grid::Grid2D;
use crate::model::MaskSpec;
use rustfft::num_complex::Complex64;

/// Result of one-step thresholding: the kept index set, the threshold,
/// and the synthesized reconstruction.
#[derive(Debug, Clone)]
pub struct ThresholdOutcome {
    pub reconstruction: Grid2D,
    pub beta: f64,
    /// Per band, per lattice position: whether the coefficient was kept.
    pub kept: Vec<Vec<bool>>,
    pub kept_count: usize,
}

/// Keep every analysis coefficient with `|c| >= beta`, synthesize once.
pub fn one_step_threshold<F: Frame>(
    x_tilde: &Grid2D,
    frame: &F,
    beta: f64,
) -> Result<ThresholdOutcome> {
    if !(beta >= 0.0) {
        return Err(CoreError::BadArgument(format!(
            "threshold beta = {beta} must be nonnegative"
        )));
    }
    let mut coeffs = frame.analysis(x_tilde)?;
    let mut kept = Vec::with_capacity(coeffs.bands.len());
    let mut kept_count = 0usize;
    for band in &mut coeffs.bands {
        let mut flags = vec![false; band.values.len()];
        for (v, flag) in band.values.iter_mut().zip(&mut flags) {
            if v.norm() >= beta {
                *flag = true;
                kept_count += 1;
            } else {
                *v = Complex64::default();
            }
        }
        kept.push(flags);
    }
    Ok(ThresholdOutcome {
        reconstruction: frame.synthesis(&coeffs)?,
        beta,
        kept,
        kept_count,
    })
}

/// One-step reconstruction keeping an externally chosen index set
/// (`keep(band, k1, k2)`), the oracle-cluster variant.
pub fn one_step_with_selector<F: Frame>(
    x_tilde: &Grid2D,
    frame: &F,
    mut keep: impl FnMut(usize, usize, usize) -> bool,
) -> Result<Grid2D> {
    let mut coeffs = frame.analysis(x_tilde)?;
    coeffs.retain(|b, k1, k2| keep(b, k1, k2));
    frame.synthesis(&coeffs)
}

/// `q`-th quantile of the nonzero coefficient magnitudes with the
/// midpoint rule: for `pos = q * count` landing on an integer boundary,
/// the two neighbors are averaged. Returns 0 when every coefficient
/// vanishes.
pub fn quantile_threshold<Id>(coeffs: &FrameCoeffs<Id>, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CoreError::BadArgument(format!(
            "quantile q = {q} outside (0, 1)"
        )));
    }
    let mut mags: Vec<f64> = coeffs
        .bands
        .iter()
        .flat_map(|b| b.values.iter())
        .map(|v| v.norm())
        .filter(|&m| m > 0.0)
        .collect();
    if mags.is_empty() {
        return Ok(0.0);
    }
    mags.sort_unstable_by(|a, b| a.partial_cmp(b).expect("magnitudes are finite"));
    let m = mags.len();
    let pos = q * m as f64;
    let i = pos.floor() as usize;
    Ok(if pos == i as f64 && i >= 1 {
        0.5 * (mags[i - 1] + mags[i.min(m - 1)])
    } else {
        mags[i.min(m - 1)]
    })
}

/// Options of the l1 solver.
#[derive(Debug, Clone, Copy)]
pub struct L1Options {
    pub max_iter: usize,
    pub tol: f64,
    /// Accepted analysis-domain noise budget; only recorded in the
    /// solution (the constraint stays exact equality on the known part).
    pub noise_eps: f64,
    /// Product of the primal and dual step sizes; must stay below
    /// `1 / ||Phi*||^2 = 1`. The boundary value is not convergent for
    /// this iteration, so the default backs off slightly.
    pub step_product: f64,
}

impl Default for L1Options {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-6,
            noise_eps: 0.0,
            step_product: 0.9,
        }
    }
}

/// Solution of the analysis-l1 problem
/// `min ||Phi* x||_1  s.t.  P_K x = f_known`.
#[derive(Debug, Clone)]
pub struct L1Solution {
    pub reconstruction: Grid2D,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    pub feasibility_residual: f64,
    pub noise_eps: f64,
}

/// Primal-dual iteration (dual clip onto the unit sup-norm ball, primal
/// descent through synthesis, exact projection onto the affine data
/// constraint by overwriting known samples). With a Parseval frame
/// `||Phi*|| = 1`, so unit step sizes are admissible. Non-convergence at
/// `max_iter` is reported through `converged`, not as an error.
pub fn l1_inpaint<F: Frame>(
    f_known: &Grid2D,
    mask: &MaskSpec,
    frame: &F,
    opts: &L1Options,
) -> Result<L1Solution> {
    l1_inpaint_from(f_known, f_known, mask, frame, opts)
}

/// [`l1_inpaint`] warm-started from `start` (projected onto the data
/// constraint before iterating).
pub fn l1_inpaint_from<F: Frame>(
    start: &Grid2D,
    f_known: &Grid2D,
    mask: &MaskSpec,
    frame: &F,
    opts: &L1Options,
) -> Result<L1Solution> {
    if f_known.n() != mask.n() || f_known.n() != frame.n() || start.n() != f_known.n() {
        return Err(CoreError::ShapeMismatch(format!(
            "data side {}, mask side {}, frame side {}",
            f_known.n(),
            mask.n(),
            frame.n()
        )));
    }
    let sigma = opts.step_product.sqrt();
    let tau = opts.step_product.sqrt();
    let mut x = start.clone();
    mask.overwrite_known(&mut x, f_known);
    let mut cx = frame.analysis(&x)?;
    let mut cx_prev = cx.clone();
    let mut dual = cx.zeroed_clone();
    let mut trace = Vec::with_capacity(opts.max_iter);
    let mut converged = false;
    let mut iterations = 0usize;
    for it in 1..=opts.max_iter {
        iterations = it;
        // Dual ascent on Phi* x_bar = 2 Phi* x - Phi* x_prev, then radial
        // clip onto the unit sup-norm ball (the l1 conjugate).
        for ((yb, cb), pb) in dual.bands.iter_mut().zip(&cx.bands).zip(&cx_prev.bands) {
            for ((y, c), p) in yb.values.iter_mut().zip(&cb.values).zip(&pb.values) {
                let cand = *y + sigma * (2.0 * c - p);
                let mag = cand.norm();
                *y = if mag > 1.0 { cand / mag } else { cand };
            }
        }
        // Primal descent and exact projection onto the constraint.
        let descent = frame.synthesis(&dual)?;
        let mut x_new = x.clone();
        x_new.add_scaled(&descent, -tau);
        mask.overwrite_known(&mut x_new, f_known);
        let mut delta = x_new.clone();
        delta.add_scaled(&x, -1.0);
        let rel_change = delta.norm() / x_new.norm().max(1e-300);
        cx_prev = cx;
        cx = frame.analysis(&x_new)?;
        trace.push(cx.l1_norm());
        x = x_new;
        if rel_change < opts.tol {
            converged = true;
            break;
        }
    }
    let mut feas = mask.apply_known(&x);
    feas.add_scaled(&mask.apply_known(f_known), -1.0);
    let feasibility_residual = feas.norm() / f_known.norm().max(1e-300);
    Ok(L1Solution {
        reconstruction: x,
        iterations,
        converged,
        objective_trace: trace,
        feasibility_residual,
        noise_eps: opts.noise_eps,
    })
}

/// Threshold schedule shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    Linear,
    Exponential,
}

/// Schedule of the iterative thresholding scheme.
#[derive(Debug, Clone, Copy)]
pub struct IterSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub n_iter: usize,
    pub decay: Decay,
}

impl IterSchedule {
    pub fn beta_at(&self, t: usize) -> f64 {
        if self.n_iter <= 1 {
            return self.beta_start;
        }
        let frac = t as f64 / (self.n_iter - 1) as f64;
        match self.decay {
            Decay::Exponential if self.beta_start > 0.0 && self.beta_end > 0.0 => {
                self.beta_start * (self.beta_end / self.beta_start).powf(frac)
            }
            _ => self.beta_start + (self.beta_end - self.beta_start) * frac,
        }
    }
}

/// Iterate `x <- f_known + P_M Phi S_beta Phi* x` with hard thresholding
/// `S_beta` and the threshold decaying along the schedule; the known part
/// is never modified. `n_iter = 0` returns `f_known` unchanged.
pub fn iterative_threshold_inpaint<F: Frame>(
    f_known: &Grid2D,
    mask: &MaskSpec,
    frame: &F,
    schedule: &IterSchedule,
) -> Result<Grid2D> {
    if !(schedule.beta_start >= schedule.beta_end && schedule.beta_end >= 0.0) {
        return Err(CoreError::BadArgument(format!(
            "schedule must satisfy beta_start >= beta_end >= 0, got {} < {}",
            schedule.beta_start, schedule.beta_end
        )));
    }
    let mut x = f_known.clone();
    for t in 0..schedule.n_iter {
        let beta = schedule.beta_at(t);
        let mut coeffs = frame.analysis(&x)?;
        for band in &mut coeffs.bands {
            for v in &mut band.values {
                if v.norm() < beta {
                    *v = Complex64::default();
                }
            }
        }
        let synth = frame.synthesis(&coeffs)?;
        x = f_known.clone();
        x.add_scaled(&mask.apply_missing(&synth), 1.0);
    }
    Ok(x)
}

/// Relative l2 error `||x - x0|| / ||x0||`.
pub fn relative_error(x: &Grid2D, x0: &Grid2D) -> Result<f64> {
    if x.n() != x0.n() {
        return Err(CoreError::ShapeMismatch(format!(
            "grid sides differ: {} vs {}",
            x.n(),
            x0.n()
        )));
    }
    let denom = x0.norm();
    if denom == 0.0 {
        return Err(CoreError::BadArgument(
            "relative error against a zero reference".into(),
        ));
    }
    let mut diff = x.clone();
    diff.add_scaled(x0, -1.0);
    Ok(diff.norm() / denom)
}
