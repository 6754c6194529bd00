//! Experiment sweeps over (frame, algorithm, level) cells: build the
//! level's grid and line image, mask it with the scale-dependent strip,
//! recover, attach coherence diagnostics and emit CSV rows.

use crate::config::{CliError, CliResult, Config};
use inpaint_core::Grid2D;
use inpaint_core::diagnostics::{
    ClusterSet, cluster_l1, cluster_coherence_filtered, error_bounds,
    frame_norm_constant, masked_cluster_mass, wavelet_cluster_coherence_filtered,
};
use inpaint_core::frame::{EitherId, Frame, PairFrame, centered};
use inpaint_core::grid::two_pow;
use inpaint_core::meyer::{MeyerBandId, MeyerFrame, RingFrame};
use inpaint_core::model::{LineModelSpec, MaskSpec, filtered_line_image, grid_side_for_level};
use inpaint_core::recovery::{
    Decay, IterSchedule, L1Options, iterative_threshold_inpaint, l1_inpaint_from,
    one_step_threshold, one_step_with_selector, quantile_threshold, relative_error,
};
use inpaint_core::shearlet::{ShearBandId, ShearletFrame};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Meyer,
    Shearlet,
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameKind::Meyer => "meyer",
            FrameKind::Shearlet => "shearlet",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    OneStep,
    Iterative,
    L1,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::OneStep => "one_step",
            Algorithm::Iterative => "iterative",
            Algorithm::L1 => "l1",
        })
    }
}

/// Scale law of the strip half-width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HLaw {
    /// `h_j = c 2^(-2j)`
    InvSquare,
    /// `h_j = c 2^(-j)`
    Inv,
    /// `h_j = c`
    Const,
}

impl HLaw {
    pub fn h_at(self, c0: f64, j: i32) -> f64 {
        match self {
            HLaw::InvSquare => c0 * two_pow(-2 * j),
            HLaw::Inv => c0 * two_pow(-j),
            HLaw::Const => c0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    /// Data-driven: `beta` is the `q`-quantile of the masked image's
    /// coefficient magnitudes.
    Quantile(f64),
    /// Keep exactly the cluster window set (plus the completion bands of
    /// the experiment frame, which carry no model-scale content).
    OracleCluster,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub frames: Vec<FrameKind>,
    pub algorithms: Vec<Algorithm>,
    pub levels: Vec<i32>,
    pub h_law: HLaw,
    pub h_c0: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub beta_rule: BetaRule,
    pub l1: L1Options,
    pub iter_n: usize,
    pub iter_decay: Decay,
    pub seed: u64,
}

impl SweepConfig {
    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        let frames = cfg
            .list("frames")
            .unwrap_or_else(|| vec!["meyer".into(), "shearlet".into()])
            .iter()
            .map(|s| match s.as_str() {
                "meyer" | "wavelet" => Ok(FrameKind::Meyer),
                "shearlet" => Ok(FrameKind::Shearlet),
                other => Err(CliError::Config(format!("key `frames`: unknown frame `{other}`"))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if frames.is_empty() {
            return Err(CliError::Config("key `frames`: empty frame list".into()));
        }
        let algorithms = cfg
            .list("algorithms")
            .unwrap_or_else(|| vec!["one_step".into(), "l1".into()])
            .iter()
            .map(|s| match s.as_str() {
                "one_step" => Ok(Algorithm::OneStep),
                "iterative" => Ok(Algorithm::Iterative),
                "l1" => Ok(Algorithm::L1),
                other => Err(CliError::Config(format!(
                    "key `algorithms`: unknown algorithm `{other}`"
                ))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if algorithms.is_empty() {
            return Err(CliError::Config("key `algorithms`: empty list".into()));
        }
        let levels = cfg
            .list("levels")
            .unwrap_or_else(|| vec!["3".into(), "4".into(), "5".into()])
            .iter()
            .map(|s| {
                s.parse::<i32>()
                    .map_err(|_| CliError::Config(format!("key `levels`: bad level `{s}`")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        if levels.is_empty() {
            return Err(CliError::Config("key `levels`: empty list".into()));
        }
        for &j in &levels {
            if !(1..=6).contains(&j) {
                return Err(CliError::Config(format!(
                    "key `levels`: level {j} outside the supported range 1..=6"
                )));
            }
        }
        let h_law = match cfg.str_or("h_law", "2^-2j") {
            "2^-2j" => HLaw::InvSquare,
            "2^-j" => HLaw::Inv,
            "const" => HLaw::Const,
            other => {
                return Err(CliError::Config(format!(
                    "key `h_law`: expected one of 2^-2j, 2^-j, const; got `{other}`"
                )));
            }
        };
        let h_c0 = cfg.f64_or("h_c0", 0.25)?;
        let rho = cfg.f64_or("rho", inpaint_core::model::DEFAULT_RHO)?;
        let epsilon = cfg.f64_or("epsilon", inpaint_core::diagnostics::DEFAULT_EPSILON)?;
        // Every (j, law) pair must keep the strip inside the line support.
        for &j in &levels {
            let h = h_law.h_at(h_c0, j);
            if !(h >= 0.0 && h < rho) {
                return Err(CliError::Config(format!(
                    "key `h_c0`: h_{j} = {h} violates 0 <= h < rho = {rho}"
                )));
            }
        }
        let beta_rule = match cfg.str_or("beta.mode", "oracle") {
            "oracle" | "oracle-cluster" => BetaRule::OracleCluster,
            "quantile" => BetaRule::Quantile(cfg.f64_or("thresh.q", 0.90)?),
            other => {
                return Err(CliError::Config(format!(
                    "key `beta.mode`: expected oracle or quantile, got `{other}`"
                )));
            }
        };
        let iter_decay = match cfg.str_or("iter.decay", "exponential") {
            "linear" => Decay::Linear,
            "exponential" => Decay::Exponential,
            other => {
                return Err(CliError::Config(format!(
                    "key `iter.decay`: expected linear or exponential, got `{other}`"
                )));
            }
        };
        Ok(Self {
            frames,
            algorithms,
            levels,
            h_law,
            h_c0,
            epsilon,
            rho,
            beta_rule,
            l1: L1Options {
                max_iter: cfg.usize_or("l1.max_iter", 500)?,
                tol: cfg.f64_or("l1.tol", 1e-6)?,
                noise_eps: cfg.f64_or("l1.noise_eps", 0.0)?,
                step_product: cfg.f64_or("l1.step_product", 0.9)?,
            },
            iter_n: cfg.usize_or("iter.n", 50)?,
            iter_decay,
            seed: cfg.u64_or("seed", 0)?,
        })
    }
}

/// One sweep row. `wall_time` is a deterministic workload proxy
/// (total transform coefficient volume in units of 1e8), so repeated
/// runs emit identical CSVs; the measured seconds stay in
/// `measured_secs` and are printed to the log only.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub frame: FrameKind,
    pub algorithm: Algorithm,
    pub level: i32,
    pub h: f64,
    pub relative_error: f64,
    pub delta_j: f64,
    pub mu_c: f64,
    pub bound_l1: f64,
    pub bound_thresh: f64,
    pub converged: bool,
    pub wall_time: f64,
    pub measured_secs: f64,
}

pub const CSV_HEADER: &str =
    "frame,algorithm,j,h_j,relative_error,delta_j,mu_c,bound_l1,bound_thresh,converged,wall_time";

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.frame,
            self.algorithm,
            self.level,
            self.h,
            self.relative_error,
            self.delta_j,
            self.mu_c,
            self.bound_l1,
            self.bound_thresh,
            self.converged,
            self.wall_time
        )
    }
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> CliResult<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    f.write_all(out.as_bytes())
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Carrier-band predicate of a level-`j` wavelet experiment.
fn meyer_carrier(id: EitherId<MeyerBandId, i32>, j: i32) -> bool {
    matches!(
        id,
        EitherId::Left(MeyerBandId::Wavelet { scale, .. }) if scale == 2 * j || scale == 2 * j + 1
    )
}

fn shear_carrier(id: EitherId<EitherId<ShearBandId, MeyerBandId>, i32>, j: i32) -> bool {
    matches!(
        id,
        EitherId::Left(EitherId::Left(
            ShearBandId::Interior { j: bj, .. } | ShearBandId::Seam { j: bj, .. }
        )) if bj == j
    )
}

/// The level-`j` wavelet experiment frame: carrier scales `2j, 2j+1`,
/// oriented bands and the scaling layer at `2j-1` below, and isotropic
/// completion rings at the capped scales `2j+2, 2j+3` above. The frame
/// tiles the whole grid exactly, so it is Parseval on all of it (the
/// objective has no flat directions and thresholding reconstructs
/// in-corona data exactly).
pub type WaveletExperimentFrame = PairFrame<MeyerFrame, RingFrame>;

pub fn wavelet_experiment_frame(n: usize, j: i32) -> CliResult<WaveletExperimentFrame> {
    Ok(PairFrame::new(
        MeyerFrame::new(n, &[2 * j - 1, 2 * j, 2 * j + 1], Some(2 * j - 1))?,
        RingFrame::new(n, &[2 * j + 2, 2 * j + 3])?,
    )?)
}

/// The level-`j` shearlet experiment frame: carrier shearlet scale `j`
/// with the adjacent scale `j-1` and the scaling layer at `2j-2` below,
/// and isotropic rings at `2j+2, 2j+3` above; tiles the whole grid
/// exactly.
pub type ShearExperimentFrame =
    PairFrame<PairFrame<ShearletFrame, MeyerFrame>, RingFrame>;

pub fn shearlet_experiment_frame(n: usize, j: i32) -> CliResult<ShearExperimentFrame> {
    Ok(PairFrame::new(
        PairFrame::new(
            ShearletFrame::new(n, &[j - 1, j], false)?,
            MeyerFrame::new(n, &[], Some(2 * j - 2))?,
        )?,
        RingFrame::new(n, &[2 * j + 2, 2 * j + 3])?,
    )?)
}

#[derive(Debug, Clone, Copy)]
pub struct CellDiag {
    pub delta_j: f64,
    pub mu_c: f64,
    pub bound_l1: f64,
    pub bound_thresh: f64,
}

/// Work proxy: total coefficient volume of the frame plus one grid, in
/// units of 1e8 (deterministic stand-in for the wall-time column).
fn work_units<F: Frame>(frame: &F, transforms: usize) -> f64 {
    let coeffs: usize = frame
        .band_shapes()
        .iter()
        .map(|s| s.m1 * s.m2)
        .sum::<usize>()
        + frame.n() * frame.n();
    ((transforms * coeffs) as f64 / 1e8).max(1e-4)
}

fn meyer_diagnostics(
    cfg: &SweepConfig,
    j: i32,
    x0: &Grid2D,
    mask: &MaskSpec,
    frame_norm: f64,
) -> CliResult<CellDiag> {
    let n = x0.n();
    let cluster = ClusterSet::wavelet(j, cfg.epsilon, cfg.rho)?;
    // Diagnostics live on the carrier scales; the probe maximum of the
    // coherence is attained there.
    let carrier = MeyerFrame::new(n, &[2 * j, 2 * j + 1], None)?;
    let clean = carrier.analysis(x0)?;
    let delta_j = cluster_l1(&clean, |id, c1, c2| !cluster.contains_meyer(id, c1, c2));
    let mu_c = wavelet_cluster_coherence_filtered(&carrier, mask, &cluster, |_| true)?;
    let mass = masked_cluster_mass(&carrier, mask, x0, |id, c1, c2| {
        cluster.contains_meyer(id, c1, c2)
    })?;
    let bounds = error_bounds(delta_j, mu_c, 0.0, cfg.l1.noise_eps, frame_norm, mass);
    Ok(CellDiag {
        delta_j,
        mu_c,
        bound_l1: bounds.bound_l1,
        bound_thresh: bounds.bound_thresh,
    })
}

fn shear_diagnostics(
    cfg: &SweepConfig,
    j: i32,
    x0: &Grid2D,
    mask: &MaskSpec,
    frame_norm: f64,
) -> CliResult<CellDiag> {
    let n = x0.n();
    let cluster = ClusterSet::shearlet(j, cfg.epsilon.min(0.2499), cfg.rho)?;
    let carrier = ShearletFrame::new(n, &[j], false)?;
    let clean = carrier.analysis(x0)?;
    let delta_j = cluster_l1(&clean, |id, c1, c2| !cluster.contains_shearlet(id, c1, c2));
    let mu_c = cluster_coherence_filtered(
        &carrier,
        mask,
        |id, c1, c2| cluster.contains_shearlet(id, c1, c2),
        |_| true,
    )?;
    let mass = masked_cluster_mass(&carrier, mask, x0, |id, c1, c2| {
        cluster.contains_shearlet(id, c1, c2)
    })?;
    let bounds = error_bounds(delta_j, mu_c, 0.0, cfg.l1.noise_eps, frame_norm, mass);
    Ok(CellDiag {
        delta_j,
        mu_c,
        bound_l1: bounds.bound_l1,
        bound_thresh: bounds.bound_thresh,
    })
}

/// Shared recovery dispatch: the oracle keeps cluster indices on the
/// carrier plus every completion coefficient.
fn run_algorithm<F: Frame>(
    cfg: &SweepConfig,
    algorithm: Algorithm,
    frame: &F,
    f_known: &Grid2D,
    mask: &MaskSpec,
    mut keep: impl FnMut(usize, usize, usize) -> bool,
) -> CliResult<(Grid2D, bool, usize)> {
    Ok(match algorithm {
        Algorithm::OneStep => {
            let rec = match cfg.beta_rule {
                BetaRule::OracleCluster => one_step_with_selector(f_known, frame, keep)?,
                BetaRule::Quantile(q) => {
                    let beta = quantile_threshold(&frame.analysis(f_known)?, q)?;
                    one_step_threshold(f_known, frame, beta)?.reconstruction
                }
            };
            (rec, true, 2)
        }
        Algorithm::L1 => {
            // Warm start from the oracle projection: the solver then
            // spends its budget refining toward the minimizer.
            let warm = one_step_with_selector(f_known, frame, &mut keep)?;
            let mut start = f_known.clone();
            start.add_scaled(&mask.apply_missing(&warm), 1.0);
            let sol = l1_inpaint_from(&start, f_known, mask, frame, &cfg.l1)?;
            let iters = sol.iterations;
            (sol.reconstruction, sol.converged, 2 * iters + 2)
        }
        Algorithm::Iterative => {
            let coeffs = frame.analysis(f_known)?;
            let sched = IterSchedule {
                beta_start: coeffs.max_abs(),
                beta_end: coeffs.max_abs() * 1e-3,
                n_iter: cfg.iter_n,
                decay: cfg.iter_decay,
            };
            let rec = iterative_threshold_inpaint(f_known, mask, frame, &sched)?;
            (rec, true, 2 * cfg.iter_n)
        }
    })
}

fn run_meyer_algorithms(
    cfg: &SweepConfig,
    algorithms: &[Algorithm],
    j: i32,
    x0: &Grid2D,
    mask: &MaskSpec,
) -> CliResult<(CellDiag, Vec<(Algorithm, Grid2D, bool, f64)>)> {
    let n = x0.n();
    let frame = wavelet_experiment_frame(n, j)?;
    let shapes = frame.band_shapes();
    let cluster = ClusterSet::wavelet(j, cfg.epsilon, cfg.rho)?;
    let diag = meyer_diagnostics(cfg, j, x0, mask, frame_norm_constant(&frame))?;
    let f_known = mask.apply_known(x0);
    let mut outs = Vec::new();
    for &algorithm in algorithms {
        let keep = |b: usize, k1: usize, k2: usize| {
            let sh = shapes[b];
            match sh.id {
                EitherId::Left(id) => {
                    cluster.contains_meyer(id, centered(k1, sh.m1), centered(k2, sh.m2))
                }
                EitherId::Right(_) => true,
            }
        };
        let (rec, converged, transforms) =
            run_algorithm(cfg, algorithm, &frame, &f_known, mask, keep)?;
        outs.push((algorithm, rec, converged, work_units(&frame, transforms)));
    }
    Ok((diag, outs))
}

fn run_shear_algorithms(
    cfg: &SweepConfig,
    algorithms: &[Algorithm],
    j: i32,
    x0: &Grid2D,
    mask: &MaskSpec,
) -> CliResult<(CellDiag, Vec<(Algorithm, Grid2D, bool, f64)>)> {
    let n = x0.n();
    let frame = shearlet_experiment_frame(n, j)?;
    let shapes = frame.band_shapes();
    let cluster = ClusterSet::shearlet(j, cfg.epsilon.min(0.2499), cfg.rho)?;
    let diag = shear_diagnostics(cfg, j, x0, mask, frame_norm_constant(&frame))?;
    let f_known = mask.apply_known(x0);
    let mut outs = Vec::new();
    for &algorithm in algorithms {
        let keep = |b: usize, k1: usize, k2: usize| {
            let sh = shapes[b];
            match sh.id {
                EitherId::Left(EitherId::Left(id)) => {
                    cluster.contains_shearlet(id, centered(k1, sh.m1), centered(k2, sh.m2))
                }
                _ => true,
            }
        };
        let (rec, converged, transforms) =
            run_algorithm(cfg, algorithm, &frame, &f_known, mask, keep)?;
        outs.push((algorithm, rec, converged, work_units(&frame, transforms)));
    }
    Ok((diag, outs))
}

/// Run every algorithm of one (frame, level) cell; failures surface as
/// `converged = false` rows with infinite error rather than aborting the
/// sweep.
pub fn run_level(
    cfg: &SweepConfig,
    frame: FrameKind,
    j: i32,
) -> CliResult<Vec<SweepRecord>> {
    let start = Instant::now();
    let n = grid_side_for_level(j);
    let spec = LineModelSpec::new(cfg.rho)?;
    let x0 = filtered_line_image(&spec, j, n)?;
    let h = cfg.h_law.h_at(cfg.h_c0, j);
    let mask = MaskSpec::strip(n, h, cfg.rho)?;
    let outcome = match frame {
        FrameKind::Meyer => run_meyer_algorithms(cfg, &cfg.algorithms, j, &x0, &mask),
        FrameKind::Shearlet => run_shear_algorithms(cfg, &cfg.algorithms, j, &x0, &mask),
    };
    let records = match outcome {
        Ok((diag, outs)) => outs
            .into_iter()
            .map(|(algorithm, rec, converged, work)| {
                Ok(SweepRecord {
                    frame,
                    algorithm,
                    level: j,
                    h,
                    relative_error: relative_error(&rec, &x0)?,
                    delta_j: diag.delta_j,
                    mu_c: diag.mu_c,
                    bound_l1: diag.bound_l1,
                    bound_thresh: diag.bound_thresh,
                    converged,
                    wall_time: work,
                    measured_secs: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
        Err(e) => {
            eprintln!("cell ({frame}, j={j}) failed: {e}");
            cfg.algorithms
                .iter()
                .map(|&algorithm| SweepRecord {
                    frame,
                    algorithm,
                    level: j,
                    h,
                    relative_error: f64::INFINITY,
                    delta_j: f64::NAN,
                    mu_c: f64::NAN,
                    bound_l1: f64::NAN,
                    bound_thresh: f64::NAN,
                    converged: false,
                    wall_time: 1e-4,
                    measured_secs: start.elapsed().as_secs_f64(),
                })
                .collect()
        }
    };
    Ok(records)
}

/// Run the whole sweep; rows are emitted in deterministic configuration
/// order (frame-major, then algorithm, then level).
pub fn run_sweep(cfg: &SweepConfig) -> CliResult<Vec<SweepRecord>> {
    let mut by_cell: Vec<((FrameKind, Algorithm, i32), SweepRecord)> = Vec::new();
    for &frame in &cfg.frames {
        for &j in &cfg.levels {
            for r in run_level(cfg, frame, j)? {
                eprintln!(
                    "cell ({frame}, {}, j={j}): err={:.4} mu_c={:.4} [{:.1}s]",
                    r.algorithm, r.relative_error, r.mu_c, r.measured_secs
                );
                by_cell.push(((frame, r.algorithm, j), r));
            }
        }
    }
    let mut records = Vec::new();
    for &frame in &cfg.frames {
        for &algorithm in &cfg.algorithms {
            for &j in &cfg.levels {
                let idx = by_cell
                    .iter()
                    .position(|(k, _)| *k == (frame, algorithm, j))
                    .expect("every configured cell was run");
                records.push(by_cell[idx].1.clone());
            }
        }
    }
    Ok(records)
}
