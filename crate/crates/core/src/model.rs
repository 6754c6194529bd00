//! Masked line-singularity data model.
//!
//! The model image is a weighted distribution supported on the segment
//! `[-rho, rho] x {0}` of the torus: a smooth bump `w` along `x1` times a
//! Dirac in `x2`, so its spectrum is `w_hat(xi1)`, independent of `xi2`.
//! Level-`j` data is the band-pass `wL_j` with spectrum
//! `w_hat(xi1) F_j(xi)`, where `F_j` sums the phaseless wavelet windows
//! of scales `2j` and `2j+1` and is supported in the corona `C_j`.
//! Missing data is a vertical strip `|x1| <= h`.

use crate::error::{CoreError, Result};
use crate::fft::plan;
use crate::grid::{Grid2D, Spectrum2D, dft, idft, two_pow};
use crate::meyer::{Orientation, w2d_abs};
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Grid side hosting the level-`j` corona: `n_j = 2^(2j+1)`, the smallest
/// power of two whose frequency range strictly contains
/// `|xi|_inf <= 2^(2j-1)`.
pub fn grid_side_for_level(j: i32) -> usize {
    1usize << (2 * j + 1)
}

pub const DEFAULT_RHO: f64 = 0.35;

/// Line-singularity model: bump half-length `rho`, weight fixed to the
/// smooth bump `exp(1 - 1/(1 - (x/rho)^2))`.
#[derive(Debug)]
pub struct LineModelSpec {
    rho: f64,
    hat_cache: Mutex<HashMap<usize, std::sync::Arc<Vec<f64>>>>,
}

impl Clone for LineModelSpec {
    fn clone(&self) -> Self {
        Self::new(self.rho).expect("rho validated at construction")
    }
}

impl LineModelSpec {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(CoreError::Model(format!("rho = {rho} outside (0, 1/2)")));
        }
        Ok(Self {
            rho,
            hat_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The weight `w(x)`: 1 at the center, smoothly vanishing (with all
    /// derivatives) at `+-rho`.
    pub fn weight(&self, x: f64) -> f64 {
        let u = x / self.rho;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    /// `w_hat` at every integer frequency `[-n/2, n/2)`, indexed by
    /// `xi + n/2`. Computed by trapezoid sums refined until the change is
    /// below 1e-12 (the weight is smooth and compactly supported, so the
    /// sums converge superalgebraically); cached per grid side.
    pub fn weight_hat_table(&self, n: usize) -> std::sync::Arc<Vec<f64>> {
        if let Some(t) = self.hat_cache.lock().unwrap().get(&n) {
            return t.clone();
        }
        let mut k = 16 * n.max(1024);
        let mut prev = self.weight_hat_fft(k, n);
        loop {
            k *= 2;
            let next = self.weight_hat_fft(k, n);
            let diff = prev
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            prev = next;
            if diff < 1e-12 || k >= (1 << 22) {
                break;
            }
        }
        let arc = std::sync::Arc::new(prev);
        self.hat_cache.lock().unwrap().insert(n, arc.clone());
        arc
    }

    /// Trapezoid evaluation of all torus Fourier coefficients via one
    /// fine FFT of length `k`.
    fn weight_hat_fft(&self, k: usize, n: usize) -> Vec<f64> {
        let mut samples: Vec<Complex64> = (0..k)
            .map(|m| {
                let mut x = m as f64 / k as f64;
                if x >= 0.5 {
                    x -= 1.0;
                }
                Complex64::new(self.weight(x), 0.0)
            })
            .collect();
        let fft = plan(k, false);
        fft.process(&mut samples);
        let h = (n / 2) as i64;
        (-h..h)
            .map(|xi| samples[xi.rem_euclid(k as i64) as usize].re / k as f64)
            .collect()
    }

    /// `w_hat(xi)` at an arbitrary real frequency by refined trapezoid
    /// quadrature on `[-rho, rho]` (accuracy ~1e-12; the weight is even,
    /// so the transform is real).
    pub fn weight_hat(&self, xi: f64) -> Complex64 {
        let mut m = 1024usize;
        let mut prev = self.weight_hat_quad(m, xi);
        loop {
            m *= 2;
            let next = self.weight_hat_quad(m, xi);
            let done = (next - prev).abs() < 1e-13 || m >= (1 << 21);
            prev = next;
            if done {
                break;
            }
        }
        Complex64::new(prev, 0.0)
    }

    fn weight_hat_quad(&self, m: usize, xi: f64) -> f64 {
        let step = 2.0 * self.rho / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let x = -self.rho + i as f64 * step;
            let v = self.weight(x) * (2.0 * PI * x * xi).cos();
            s += if i == 0 || i == m { 0.5 * v } else { v };
        }
        s * step
    }
}

/// Single phaseless wavelet-scale window
/// `F~_s(xi) = sum_iota |W^iota(xi / 2^s)|`.
pub fn bandpass_f_tilde(s: i32, xi1: f64, xi2: f64) -> f64 {
    let inv = two_pow(-s);
    Orientation::ALL
        .iter()
        .map(|&iota| w2d_abs(iota, xi1 * inv, xi2 * inv))
        .sum()
}

/// Corona filter `F_j = F~_{2j} + F~_{2j+1}` sampled on the grid.
/// Errors when `C_j` does not fit.
pub fn bandpass_f(j: i32, n: usize) -> Result<Spectrum2D> {
    if two_pow(2 * j - 1) > (n / 2) as f64 {
        return Err(CoreError::ScaleOverflow { scale: 2 * j, n });
    }
    let mut s = Spectrum2D::zeros(n)?;
    let h = (n / 2) as i64;
    let outer = two_pow(2 * j - 1) as i64;
    for xi1 in (-outer).max(-h)..=outer.min(h - 1) {
        for xi2 in (-outer).max(-h)..=outer.min(h - 1) {
            let v = bandpass_f_tilde(2 * j, xi1 as f64, xi2 as f64)
                + bandpass_f_tilde(2 * j + 1, xi1 as f64, xi2 as f64);
            if v != 0.0 {
                s.set_freq(xi1, xi2, Complex64::new(v, 0.0));
            }
        }
    }
    s.with_corona_tag(j)
}

/// Spectrum of the filtered line image: `w_hat(xi1) F_j(xi)`.
pub fn line_spectrum(spec: &LineModelSpec, j: i32, n: usize) -> Result<Spectrum2D> {
    let filter = bandpass_f(j, n)?;
    let what = spec.weight_hat_table(n);
    let h = (n / 2) as i64;
    let mut out = Spectrum2D::zeros(n)?;
    for (idx, v) in filter.values().iter().enumerate() {
        if v.re != 0.0 {
            let (xi1, xi2) = filter.freq_of_index(idx);
            let w = what[(xi1 + h) as usize];
            out.set_freq(xi1, xi2, Complex64::new(w * v.re, 0.0));
        }
    }
    out.with_corona_tag(j)
}

/// The level-`j` data image `wL_j` (real-valued by conjugate symmetry of
/// its spectrum).
pub fn filtered_line_image(spec: &LineModelSpec, j: i32, n: usize) -> Result<Grid2D> {
    let s = line_spectrum(spec, j, n)?;
    let g = idft(&s);
    let scale = g.max_abs().max(1e-300);
    let imag = g.max_abs_imag();
    if imag > 1e-9 * scale {
        return Err(CoreError::NotReal(imag));
    }
    let reals: Vec<f64> = g.values().iter().map(|v| v.re).collect();
    Grid2D::from_real(g.n(), &reals)
}

/// `||wL_j||_2`, evaluated spectrally on the minimal hosting grid.
pub fn line_image_norm(spec: &LineModelSpec, j: i32) -> Result<f64> {
    let n = grid_side_for_level(j);
    Ok(line_spectrum(spec, j, n)?.norm())
}

/// Vertical-strip mask `|x1| <= h` sampled on the grid: a column is
/// masked when its torus distance to column 0 is at most
/// `ceil(h n) / n` (sub-pixel widths round outward, so the sampled strip
/// never under-masks; `h = 0` still masks the single column `x1 = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    n: usize,
    h: f64,
    masked: Vec<bool>,
}

impl MaskSpec {
    /// Strip mask validated against the model support: requires
    /// `0 <= h < rho`.
    pub fn strip(n: usize, h: f64, rho: f64) -> Result<Self> {
        if !(h >= 0.0) || h >= rho {
            return Err(CoreError::Model(format!(
                "strip half-width h = {h} outside [0, rho = {rho})"
            )));
        }
        Self::strip_free(n, h)
    }

    /// Strip mask without a model bound (`0 <= h <= 1/2`).
    pub fn strip_free(n: usize, h: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&h) {
            return Err(CoreError::Model(format!(
                "strip half-width h = {h} outside [0, 1/2]"
            )));
        }
        let half_cols = (h * n as f64).ceil() as usize;
        let masked = (0..n).map(|m| m.min(n - m) <= half_cols).collect();
        Ok(Self { n, h, masked })
    }

    /// Arbitrary union of masked columns (multi-bar masks and custom
    /// geometries).
    pub fn from_columns(n: usize, masked: Vec<bool>) -> Result<Self> {
        if masked.len() != n {
            return Err(CoreError::ShapeMismatch(format!(
                "{} column flags for side {n}",
                masked.len()
            )));
        }
        let frac = masked.iter().filter(|&&m| m).count() as f64 / n as f64;
        Ok(Self {
            n,
            h: frac / 2.0,
            masked,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_masked_col(&self, m1: usize) -> bool {
        self.masked[m1]
    }

    pub fn masked_col_count(&self) -> usize {
        (0..self.n).filter(|&m| self.is_masked_col(m)).count()
    }

    pub fn masked_fraction(&self) -> f64 {
        self.masked_col_count() as f64 / self.n as f64
    }

    /// Indicator image of the missing strip.
    pub fn mask_grid(&self) -> Grid2D {
        let n = self.n;
        let values: Vec<f64> = (0..n * n)
            .map(|idx| f64::from(self.is_masked_col(idx / n)))
            .collect();
        Grid2D::from_real(n, &values).expect("mask side is a valid grid side")
    }

    /// `P_K f`: zero out the masked strip.
    pub fn apply_known(&self, f: &Grid2D) -> Grid2D {
        self.project(f, false)
    }

    /// `P_M f`: keep only the masked strip.
    pub fn apply_missing(&self, f: &Grid2D) -> Grid2D {
        self.project(f, true)
    }

    fn project(&self, f: &Grid2D, keep_masked: bool) -> Grid2D {
        assert_eq!(f.n(), self.n, "mask and grid sides differ");
        let n = self.n;
        let mut out = f.clone();
        for m1 in 0..n {
            if self.is_masked_col(m1) != keep_masked {
                for v in &mut out.values_mut()[m1 * n..(m1 + 1) * n] {
                    *v = Complex64::default();
                }
            }
        }
        out
    }

    /// Overwrite the known (unmasked) columns of `target` with those of
    /// `source`; the exact projection onto `{x : P_K x = P_K source}`.
    pub fn overwrite_known(&self, target: &mut Grid2D, source: &Grid2D) {
        assert_eq!(target.n(), self.n);
        assert_eq!(source.n(), self.n);
        let n = self.n;
        for m1 in 0..n {
            if !self.is_masked_col(m1) {
                let row = m1 * n..(m1 + 1) * n;
                target.values_mut()[row.clone()].copy_from_slice(&source.values()[row]);
            }
        }
    }

    /// 1D spectrum of the strip indicator along `xi1` (the discrete
    /// Dirichlet kernel), indexed by `xi1 + n/2`.
    pub fn dirichlet_kernel(&self) -> Vec<Complex64> {
        let n = self.n;
        let h = (n / 2) as i64;
        (-h..h)
            .map(|xi| {
                let mut acc = Complex64::default();
                for m1 in 0..n {
                    if self.is_masked_col(m1) {
                        let phase = -2.0 * PI * m1 as f64 * xi as f64 / n as f64;
                        acc += Complex64::from_polar(1.0, phase);
                    }
                }
                acc / n as f64
            })
            .collect()
    }
}

/// Verify the mask's spectral action: `dft(M_h f)` must equal the
/// row-wise circular convolution of `dft(f)` with the strip's Dirichlet
/// kernel (the torus analogue of `2h sinc(2h xi1)`). Returns the maximum
/// absolute discrepancy over the whole grid for an internal band-limited
/// test signal.
pub fn mask_spectrum_check(h: f64, n: usize) -> Result<f64> {
    use rand::prelude::*;
    let mask = MaskSpec::strip_free(n, h)?;
    let band = 8i64.min((n / 4) as i64);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x4d41534b);
    let mut fhat = Spectrum2D::zeros(n)?;
    for xi1 in -band..=band {
        for xi2 in -band..=band {
            fhat.set_freq(
                xi1,
                xi2,
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            );
        }
    }
    let f = idft(&fhat);
    let masked_hat = dft(&mask.apply_missing(&f));
    let kernel = mask.dirichlet_kernel();
    let hh = (n / 2) as i64;
    let mut worst = 0.0f64;
    for xi1 in -hh..hh {
        for xi2 in -hh..hh {
            let direct = masked_hat.at_freq(xi1, xi2);
            let mut conv = Complex64::default();
            if xi2.abs() <= band {
                for src in -band..=band {
                    // kernel index of frequency (xi1 - src) mod n, centered
                    let kidx = (xi1 - src + hh).rem_euclid(n as i64) as usize;
                    conv += kernel[kidx] * fhat.at_freq(src, xi2);
                }
            }
            worst = worst.max((direct - conv).norm());
        }
    }
    Ok(worst)
}
