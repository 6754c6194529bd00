//! 2D Parseval Meyer wavelet system on the torus grid.
//!
//! The 1D windows follow the classical construction: a smooth ramp `nu`,
//! the scaling symbol `phi_hat` supported in `|xi| <= 1/8`, and the
//! wavelet symbol `W` supported in `1/16 <= |xi| <= 1/4` carrying the two
//! unimodular phase factors `exp(-16 pi i xi / 3)` and
//! `exp(-8 pi i xi / 3)`. Orientations combine them as
//! `W^v = phi_hat(xi1) W(xi2)`, `W^h = W(xi1) phi_hat(xi2)`,
//! `W^d = W(xi1) W(xi2)`.
//!
//! A scale-`s` band uses the window `W^iota(xi / 2^s)` with translation
//! modulus `min(2^s, n)` per axis; on fitting scales (`2^s <= n`) the
//! atoms are exactly `2^-s W^iota(xi/2^s) exp(-2 pi i <k, xi/2^s>)` as in
//! the continuum system. Scales up to `log2(n) + 2` are admitted; the
//! top two are grid-capped completion layers that tile the outer annulus
//! `(n/4, n/2]` so that a full frame covers every grid frequency.

use crate::error::{CoreError, Result};
use crate::fft::fft2_inplace;
use crate::frame::{BandCoeffs, BandShape, Frame, FrameCoeffs, fold, modulus_capped};
use crate::grid::{Grid2D, Spectrum2D, dft, idft, two_pow};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::Path;

/// Polynomial ramp: 0 for `x <= 0`, 1 for `x >= 1`, and
/// `x^4 (35 - 84 x + 70 x^2 - 20 x^3)` in between, which satisfies
/// `nu(x) + nu(1 - x) = 1`.
pub fn nu_ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * x * (35.0 - 84.0 * x + (70.0 - 20.0 * x) * x * x)
    }
}

/// Scaling symbol: 1 on `|xi| <= 1/16`, cosine ramp on
/// `1/16 <= |xi| <= 1/8`, 0 beyond (exactly, including the boundary).
pub fn meyer_phi_hat(xi: f64) -> f64 {
    let t = 16.0 * xi.abs() - 1.0;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * nu_ramp(t)).cos()
    }
}

/// Modulus of the 1D wavelet symbol.
pub fn meyer_w_abs(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 / 16.0 || a >= 0.25 {
        0.0
    } else if a < 0.125 {
        (FRAC_PI_2 * nu_ramp(16.0 * a - 1.0)).sin()
    } else {
        (FRAC_PI_2 * nu_ramp(8.0 * a - 1.0)).cos()
    }
}

/// 1D wavelet symbol with its unimodular phase factors. Only the modulus
/// enters tightness; the phases shift the spatial profile by roughly
/// 16/9 lattice steps (see [`W_AXIS_CENTER`]).
pub fn meyer_w(xi: f64) -> Complex64 {
    let modulus = meyer_w_abs(xi);
    if modulus == 0.0 {
        return Complex64::default();
    }
    let phase = if xi.abs() < 0.125 {
        -16.0 * PI * xi / 3.0
    } else {
        -8.0 * PI * xi / 3.0
    };
    Complex64::from_polar(modulus, phase)
}

/// Orientation of a 2D wavelet band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    H,
    V,
    D,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::H, Orientation::V, Orientation::D];

    pub fn letter(self) -> char {
        match self {
            Orientation::H => 'h',
            Orientation::V => 'v',
            Orientation::D => 'd',
        }
    }
}

/// `W^iota(z)` for `z = xi / 2^s`.
pub fn w2d(iota: Orientation, z1: f64, z2: f64) -> Complex64 {
    match iota {
        Orientation::V => meyer_w(z2) * meyer_phi_hat(z1),
        Orientation::H => meyer_w(z1) * meyer_phi_hat(z2),
        Orientation::D => meyer_w(z1) * meyer_w(z2),
    }
}

/// `|W^iota(z)|`, the phaseless window used by the band-pass filters.
pub fn w2d_abs(iota: Orientation, z1: f64, z2: f64) -> f64 {
    match iota {
        Orientation::V => meyer_w_abs(z2) * meyer_phi_hat(z1),
        Orientation::H => meyer_w_abs(z1) * meyer_phi_hat(z2),
        Orientation::D => meyer_w_abs(z1) * meyer_w_abs(z2),
    }
}

/// Identifier of one wavelet band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeyerBandId {
    Coarse { scale: i32 },
    Wavelet { iota: Orientation, scale: i32 },
}

impl MeyerBandId {
    pub fn scale(self) -> i32 {
        match self {
            MeyerBandId::Coarse { scale } => scale,
            MeyerBandId::Wavelet { scale, .. } => scale,
        }
    }
}

pub type WaveletCoeffs = FrameCoeffs<MeyerBandId>;

/// The Meyer system restricted to a set of scales, optionally completed
/// below by scaling-function translates.
#[derive(Debug, Clone)]
pub struct MeyerFrame {
    n: usize,
    log2n: i32,
    coarse: Option<i32>,
    scales: Vec<i32>,
    shapes: Vec<BandShape<MeyerBandId>>,
}

impl MeyerFrame {
    /// Frame with wavelet scales `scales` and an optional coarse layer.
    /// Scales up to `log2(n) + 2` are admitted.
    pub fn new(n: usize, scales: &[i32], coarse: Option<i32>) -> Result<Self> {
        if !n.is_power_of_two() || n < crate::grid::MIN_GRID_SIDE {
            return Err(CoreError::BadGridSize(n));
        }
        let log2n = n.trailing_zeros() as i32;
        let mut scales: Vec<i32> = scales.to_vec();
        scales.sort_unstable();
        scales.dedup();
        if scales.is_empty() && coarse.is_none() {
            return Err(CoreError::BadArgument("empty scale range".into()));
        }
        for &s in &scales {
            if s < 0 || s > log2n + 2 {
                return Err(CoreError::ScaleOverflow { scale: s, n });
            }
        }
        if let Some(c) = coarse {
            if c < 0 || c > log2n + 2 {
                return Err(CoreError::ScaleOverflow { scale: c, n });
            }
        }
        let mut shapes = Vec::new();
        if let Some(c) = coarse {
            let m = modulus_capped(c, n);
            shapes.push(BandShape {
                id: MeyerBandId::Coarse { scale: c },
                m1: m,
                m2: m,
            });
        }
        for &s in &scales {
            let m = modulus_capped(s, n);
            for iota in Orientation::ALL {
                shapes.push(BandShape {
                    id: MeyerBandId::Wavelet { iota, scale: s },
                    m1: m,
                    m2: m,
                });
            }
        }
        Ok(Self {
            n,
            log2n,
            coarse,
            scales,
            shapes,
        })
    }

    /// Full multiscale frame: coarse layer at scale 3 plus wavelet scales
    /// `3 ..= log2(n) + 2`; tiles every grid frequency exactly.
    pub fn full(n: usize) -> Result<Self> {
        let log2n = n.trailing_zeros() as i32;
        let scales: Vec<i32> = (3..=log2n + 2).collect();
        Self::new(n, &scales, Some(3))
    }

    /// Analysis range `j_min ..= j_max` completed below by a coarse layer
    /// at `j_min`, so synthesis . analysis is the identity on signals
    /// band-limited to `|xi|_inf <= 2^(j_max - 3)`.
    pub fn range(n: usize, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(CoreError::BadArgument(format!(
                "empty scale range {j_min}..={j_max}"
            )));
        }
        let scales: Vec<i32> = (j_min..=j_max).collect();
        Self::new(n, &scales, Some(j_min))
    }

    pub fn scales(&self) -> &[i32] {
        &self.scales
    }

    pub fn coarse_scale(&self) -> Option<i32> {
        self.coarse
    }

    /// Largest `|xi|_inf` with tiling exactly 1, for frames with a coarse
    /// layer and contiguous scales.
    pub fn covered_band(&self) -> i64 {
        let top = self.scales.last().copied().unwrap_or(self.coarse.unwrap_or(0));
        let by_tiling = two_pow(top + 1 - 4);
        by_tiling.min(self.n as f64 / 2.0) as i64
    }

    pub fn band_index(&self, id: MeyerBandId) -> Option<usize> {
        self.shapes.iter().position(|s| s.id == id)
    }

    fn half_widths(&self, id: MeyerBandId) -> (f64, f64) {
        match id {
            MeyerBandId::Coarse { scale } => (two_pow(scale - 3), two_pow(scale - 3)),
            MeyerBandId::Wavelet { iota, scale } => match iota {
                Orientation::V => (two_pow(scale - 3), two_pow(scale - 2)),
                Orientation::H => (two_pow(scale - 2), two_pow(scale - 3)),
                Orientation::D => (two_pow(scale - 2), two_pow(scale - 2)),
            },
        }
    }

    fn window(&self, id: MeyerBandId, xi1: i64, xi2: i64) -> Complex64 {
        match id {
            MeyerBandId::Coarse { scale } => {
                let inv = two_pow(-scale);
                Complex64::new(
                    meyer_phi_hat(xi1 as f64 * inv) * meyer_phi_hat(xi2 as f64 * inv),
                    0.0,
                )
            }
            MeyerBandId::Wavelet { iota, scale } => {
                let inv = two_pow(-scale);
                w2d(iota, xi1 as f64 * inv, xi2 as f64 * inv)
            }
        }
    }

    fn axis_range(&self, half_width: f64) -> std::ops::RangeInclusive<i64> {
        let h = (self.n / 2) as i64;
        let lo = (-half_width).ceil() as i64;
        let hi = half_width.floor() as i64;
        lo.max(-h)..=hi.min(h - 1)
    }

    fn for_band_support(
        &self,
        shape: &BandShape<MeyerBandId>,
        mut visit: impl FnMut(i64, i64, Complex64),
    ) {
        let (b1, b2) = self.half_widths(shape.id);
        let norm = 1.0 / ((shape.m1 * shape.m2) as f64).sqrt();
        for xi1 in self.axis_range(b1) {
            for xi2 in self.axis_range(b2) {
                let w = self.window(shape.id, xi1, xi2);
                if w != Complex64::default() {
                    visit(xi1, xi2, w * norm);
                }
            }
        }
    }
}

impl Frame for MeyerFrame {
    type BandId = MeyerBandId;

    fn n(&self) -> usize {
        self.n
    }

    fn band_shapes(&self) -> Vec<BandShape<MeyerBandId>> {
        self.shapes.clone()
    }

    fn analysis(&self, f: &Grid2D) -> Result<WaveletCoeffs> {
        if f.n() != self.n {
            return Err(CoreError::ShapeMismatch(format!(
                "grid side {} does not match frame side {}",
                f.n(),
                self.n
            )));
        }
        let fhat = dft(f);
        let bands: Vec<BandCoeffs<MeyerBandId>> = self
            .shapes
            .par_iter()
            .map(|shape| {
                let mut folded = vec![Complex64::default(); shape.m1 * shape.m2];
                self.for_band_support(shape, |xi1, xi2, a| {
                    folded[fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)] +=
                        fhat.at_freq(xi1, xi2) * a.conj();
                });
                // Atom phase is exp(-2 pi i <k, xi/M>), so analysis applies
                // the inverse-direction kernel.
                fft2_inplace(&mut folded, shape.m1, shape.m2, true);
                BandCoeffs {
                    id: shape.id,
                    m1: shape.m1,
                    m2: shape.m2,
                    values: folded,
                }
            })
            .collect();
        Ok(WaveletCoeffs { n: self.n, bands })
    }

    fn synthesis(&self, coeffs: &WaveletCoeffs) -> Result<Grid2D> {
        if coeffs.bands.len() != self.shapes.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "coefficient set has {} bands, frame has {}",
                coeffs.bands.len(),
                self.shapes.len()
            )));
        }
        for (b, shape) in coeffs.bands.iter().zip(&self.shapes) {
            if b.id != shape.id || b.m1 != shape.m1 || b.m2 != shape.m2 {
                return Err(CoreError::ShapeMismatch(format!(
                    "band {:?} ({}x{}) does not match frame band {:?} ({}x{})",
                    b.id, b.m1, b.m2, shape.id, shape.m1, shape.m2
                )));
            }
        }
        let chats: Vec<Vec<Complex64>> = coeffs
            .bands
            .par_iter()
            .map(|b| {
                let mut v = b.values.clone();
                fft2_inplace(&mut v, b.m1, b.m2, false);
                v
            })
            .collect();
        let mut xhat = Spectrum2D::zeros(self.n)?;
        for (shape, chat) in self.shapes.iter().zip(&chats) {
            self.for_band_support(shape, |xi1, xi2, a| {
                let c = chat[fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)];
                xhat.add_freq(xi1, xi2, a * c);
            });
        }
        Ok(idft(&xhat))
    }

    fn tiling(&self) -> Spectrum2D {
        let mut t = Spectrum2D::zeros(self.n).expect("side validated at construction");
        for shape in &self.shapes {
            let count = (shape.m1 * shape.m2) as f64;
            self.for_band_support(shape, |xi1, xi2, a| {
                t.add_freq(xi1, xi2, Complex64::new(count * a.norm_sqr(), 0.0));
            });
        }
        t
    }

    fn atom_spectrum(&self, band: usize, k1: usize, k2: usize) -> Spectrum2D {
        let shape = &self.shapes[band];
        let mut s = Spectrum2D::zeros(self.n).expect("side validated at construction");
        self.for_band_support(shape, |xi1, xi2, a| {
            let phase = -2.0
                * PI
                * (k1 as f64 * xi1 as f64 / shape.m1 as f64
                    + k2 as f64 * xi2 as f64 / shape.m2 as f64);
            s.set_freq(xi1, xi2, a * Complex64::from_polar(1.0, phase));
        });
        s
    }

    fn atom_norms(&self) -> Vec<f64> {
        self.shapes
            .iter()
            .map(|shape| {
                let mut sum = 0.0;
                self.for_band_support(shape, |_, _, a| sum += a.norm_sqr());
                sum.sqrt()
            })
            .collect()
    }
}

/// Isotropic completion layer: one band per listed wavelet scale with
/// the phaseless radial window
/// `R_s(xi) = sqrt(sum_iota |W^iota(xi / 2^s)|^2)`, the exact square
/// root of that scale's tiling contribution. Used by experiment frames
/// to close a carrier system's corona at a third of the coefficient
/// cost of three oriented bands.
#[derive(Debug, Clone)]
pub struct RingFrame {
    n: usize,
    shapes: Vec<BandShape<i32>>,
}

impl RingFrame {
    pub fn new(n: usize, scales: &[i32]) -> Result<Self> {
        if !n.is_power_of_two() || n < crate::grid::MIN_GRID_SIDE {
            return Err(CoreError::BadGridSize(n));
        }
        let log2n = n.trailing_zeros() as i32;
        let mut scales: Vec<i32> = scales.to_vec();
        scales.sort_unstable();
        scales.dedup();
        if scales.is_empty() {
            return Err(CoreError::BadArgument("empty ring scale list".into()));
        }
        for &s in &scales {
            if s < 0 || s > log2n + 2 {
                return Err(CoreError::ScaleOverflow { scale: s, n });
            }
        }
        let shapes = scales
            .iter()
            .map(|&s| {
                let m = modulus_capped(s, n);
                BandShape { id: s, m1: m, m2: m }
            })
            .collect();
        Ok(Self { n, shapes })
    }

    fn window(scale: i32, xi1: i64, xi2: i64) -> f64 {
        let inv = two_pow(-scale);
        let (z1, z2) = (xi1 as f64 * inv, xi2 as f64 * inv);
        Orientation::ALL
            .iter()
            .map(|&iota| w2d_abs(iota, z1, z2).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn for_band_support(&self, shape: &BandShape<i32>, mut visit: impl FnMut(i64, i64, f64)) {
        let h = (self.n / 2) as i64;
        let half = two_pow(shape.id - 2);
        let lo = ((-half).ceil() as i64).max(-h);
        let hi = ((half.floor()) as i64).min(h - 1);
        let norm = 1.0 / ((shape.m1 * shape.m2) as f64).sqrt();
        for xi1 in lo..=hi {
            for xi2 in lo..=hi {
                let w = Self::window(shape.id, xi1, xi2);
                if w != 0.0 {
                    visit(xi1, xi2, w * norm);
                }
            }
        }
    }
}

impl Frame for RingFrame {
    type BandId = i32;

    fn n(&self) -> usize {
        self.n
    }

    fn band_shapes(&self) -> Vec<BandShape<i32>> {
        self.shapes.clone()
    }

    fn analysis(&self, f: &Grid2D) -> Result<FrameCoeffs<i32>> {
        if f.n() != self.n {
            return Err(CoreError::ShapeMismatch(format!(
                "grid side {} does not match frame side {}",
                f.n(),
                self.n
            )));
        }
        let fhat = dft(f);
        let bands = self
            .shapes
            .par_iter()
            .map(|shape| {
                let mut folded = vec![Complex64::default(); shape.m1 * shape.m2];
                self.for_band_support(shape, |xi1, xi2, a| {
                    folded[fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)] +=
                        fhat.at_freq(xi1, xi2) * a;
                });
                fft2_inplace(&mut folded, shape.m1, shape.m2, true);
                BandCoeffs {
                    id: shape.id,
                    m1: shape.m1,
                    m2: shape.m2,
                    values: folded,
                }
            })
            .collect();
        Ok(FrameCoeffs { n: self.n, bands })
    }

    fn synthesis(&self, coeffs: &FrameCoeffs<i32>) -> Result<Grid2D> {
        if coeffs.bands.len() != self.shapes.len() {
            return Err(CoreError::ShapeMismatch(format!(
                "coefficient set has {} bands, frame has {}",
                coeffs.bands.len(),
                self.shapes.len()
            )));
        }
        let chats: Vec<Vec<Complex64>> = coeffs
            .bands
            .par_iter()
            .map(|b| {
                let mut v = b.values.clone();
                fft2_inplace(&mut v, b.m1, b.m2, false);
                v
            })
            .collect();
        let mut xhat = Spectrum2D::zeros(self.n)?;
        for (shape, chat) in self.shapes.iter().zip(&chats) {
            self.for_band_support(shape, |xi1, xi2, a| {
                let c = chat[fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)];
                xhat.add_freq(xi1, xi2, a * c);
            });
        }
        Ok(idft(&xhat))
    }

    fn tiling(&self) -> Spectrum2D {
        let mut t = Spectrum2D::zeros(self.n).expect("side validated at construction");
        for shape in &self.shapes {
            let count = (shape.m1 * shape.m2) as f64;
            self.for_band_support(shape, |xi1, xi2, a| {
                t.add_freq(xi1, xi2, Complex64::new(count * a * a, 0.0));
            });
        }
        t
    }

    fn atom_spectrum(&self, band: usize, k1: usize, k2: usize) -> Spectrum2D {
        let shape = self.shapes[band];
        let mut s = Spectrum2D::zeros(self.n).expect("side validated at construction");
        self.for_band_support(&shape, |xi1, xi2, a| {
            let phase = -2.0
                * PI
                * (k1 as f64 * xi1 as f64 / shape.m1 as f64
                    + k2 as f64 * xi2 as f64 / shape.m2 as f64);
            s.set_freq(xi1, xi2, a * Complex64::from_polar(1.0, phase));
        });
        s
    }

    fn atom_norms(&self) -> Vec<f64> {
        self.shapes
            .iter()
            .map(|shape| {
                let mut sum = 0.0;
                self.for_band_support(shape, |_, _, a| sum += a * a);
                sum.sqrt()
            })
            .collect()
    }
}

/// Spectrum of the `k = 0` wavelet atom at scale `j` on an `n`-grid:
/// `2^-j W^iota(xi / 2^j)` for fitting scales.
pub fn wavelet_atom_spectrum(iota: Orientation, j: i32, n: usize) -> Result<Spectrum2D> {
    let frame = MeyerFrame::new(n, &[j], None)?;
    let band = frame
        .band_index(MeyerBandId::Wavelet { iota, scale: j })
        .expect("band exists by construction");
    Ok(frame.atom_spectrum(band, 0, 0))
}

/// Convenience analysis over `j_min ..= j_max` with the completing coarse
/// layer at `j_min`.
pub fn wavelet_analysis(f: &Grid2D, j_min: i32, j_max: i32) -> Result<WaveletCoeffs> {
    MeyerFrame::range(f.n(), j_min, j_max)?.analysis(f)
}

/// Adjoint of [`wavelet_analysis`] on the same scale range.
pub fn wavelet_synthesis(coeffs: &WaveletCoeffs, j_min: i32, j_max: i32) -> Result<Grid2D> {
    MeyerFrame::range(coeffs.n, j_min, j_max)?.synthesis(coeffs)
}

/// Dump coefficients: per band an ASCII header `iota scale modulus`
/// followed by the raw complex array (f64 LE interleaved re/im,
/// row-major).
pub fn dump_wavelet_coeffs(coeffs: &WaveletCoeffs, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for band in &coeffs.bands {
        let (iota, scale) = match band.id {
            MeyerBandId::Coarse { scale } => ('c', scale),
            MeyerBandId::Wavelet { iota, scale } => (iota.letter(), scale),
        };
        writeln!(w, "{iota} {scale} {}", band.m1)?;
        for v in &band.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::dft;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nu_endpoint_and_symmetry() {
        assert_eq!(nu_ramp(-1.0), 0.0);
        assert_eq!(nu_ramp(2.0), 1.0);
        assert!((nu_ramp(0.5) - 0.5).abs() < 1e-15);
        assert!((nu_ramp(0.3) + nu_ramp(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn window_supports() {
        assert_eq!(meyer_phi_hat(0.0), 1.0);
        assert_eq!(meyer_phi_hat(0.125), 0.0);
        assert_eq!(meyer_w(0.05).norm(), 0.0);
        assert_eq!(meyer_w(0.25).norm(), 0.0);
        assert!((meyer_w(0.125).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_dim_partition_of_unity() {
        // phi_hat^2 + sum_{j=0..6} |W(xi/2^j)|^2 telescopes to 1.
        for &xi in &[0.2, 0.9, 3.7, 0.01, 1.0] {
            let mut s = meyer_phi_hat(xi).powi(2);
            for j in 0..=6 {
                s += meyer_w_abs(xi / two_pow(j)).powi(2);
            }
            assert!((s - 1.0).abs() < 1e-12, "xi={xi}: sum={s}");
        }
    }

    #[test]
    fn atom_support_matches_scale_four() {
        let spec = wavelet_atom_spectrum(Orientation::V, 4, 64).unwrap();
        for (idx, v) in spec.values().iter().enumerate() {
            let (xi1, xi2) = spec.freq_of_index(idx);
            if v.norm() > 0.0 {
                assert!(xi1.abs() <= 2, "xi1={xi1}");
                assert!(xi2.abs() >= 1 && xi2.abs() <= 4, "xi2={xi2}");
            }
        }
    }

    #[test]
    fn atom_norms_equal_across_orientations() {
        let norms: Vec<f64> = Orientation::ALL
            .iter()
            .map(|&iota| wavelet_atom_spectrum(iota, 4, 64).unwrap().norm())
            .collect();
        assert!((norms[0] - norms[1]).abs() < 1e-12 * norms[0]);
        assert!((norms[0] - norms[2]).abs() < 1e-12 * norms[0]);
    }

    #[test]
    fn scale_overflow_is_an_error() {
        assert!(matches!(
            MeyerFrame::new(64, &[9], None),
            Err(CoreError::ScaleOverflow { .. })
        ));
        assert!(MeyerFrame::new(64, &[8], None).is_ok());
    }

    fn random_bandlimited(n: usize, max_freq: i64, seed: u64) -> Grid2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Spectrum2D::zeros(n).unwrap();
        for xi1 in -max_freq..=max_freq {
            for xi2 in -max_freq..=max_freq {
                s.set_freq(
                    xi1,
                    xi2,
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                );
            }
        }
        idft(&s)
    }

    #[test]
    fn zero_grid_has_zero_coefficients() {
        let f = Grid2D::zeros(32).unwrap();
        let c = wavelet_analysis(&f, 3, 5).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn parseval_and_round_trip_on_bandlimited_input() {
        let n = 64;
        // Scales 3..=7 cover |xi|_inf <= 16.
        let frame = MeyerFrame::range(n, 3, 7).unwrap();
        for seed in 0..5 {
            let f = random_bandlimited(n, 16, seed);
            let c = frame.analysis(&f).unwrap();
            let energy = c.sum_sq();
            let norm_sq = f.norm_sq();
            assert!(
                (energy - norm_sq).abs() <= 1e-8 * norm_sq,
                "tightness: {energy} vs {norm_sq}"
            );
            let back = frame.synthesis(&c).unwrap();
            let mut diff = back.clone();
            diff.add_scaled(&f, -1.0);
            assert!(diff.norm() <= 1e-8 * f.norm());
        }
    }

    #[test]
    fn full_frame_tiles_whole_grid() {
        let frame = MeyerFrame::full(32).unwrap();
        let t = frame.tiling();
        for v in t.values() {
            assert!((v.re - 1.0).abs() < 1e-10, "tiling={}", v.re);
        }
    }

    #[test]
    fn fast_analysis_matches_direct_inner_products() {
        let n = 32;
        let frame = MeyerFrame::new(n, &[3, 4], Some(3)).unwrap();
        let f = random_bandlimited(n, 4, 7);
        let coeffs = frame.analysis(&f).unwrap();
        let mut checked = 0usize;
        for (b, band) in coeffs.bands.iter().enumerate() {
            for k1 in 0..band.m1 {
                for k2 in 0..band.m2 {
                    let atom = idft(&frame.atom_spectrum(b, k1, k2));
                    let direct = f.inner(&atom).unwrap();
                    let fast = band.at(k1, k2);
                    assert!(
                        (direct - fast).norm() < 1e-10,
                        "band {b} k=({k1},{k2}): {direct} vs {fast}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 500);
    }

    #[test]
    fn ridge_coefficients_concentrate_near_small_k2() {
        // A horizontal ridge at x2 = 0 produces V-band coefficients whose
        // largest magnitude sits within a few lattice steps of k2 = 0
        // (the bandpass profile oscillates, so the argmax is not exactly 0).
        let n = 64;
        let mut s = Spectrum2D::zeros(n).unwrap();
        for xi2 in -16..16 {
            s.set_freq(0, xi2, Complex64::new(1.0, 0.0));
        }
        let f = idft(&s);
        let frame = MeyerFrame::new(n, &[5], None).unwrap();
        let c = frame.analysis(&f).unwrap();
        let band = &c.bands[frame
            .band_index(MeyerBandId::Wavelet {
                iota: Orientation::V,
                scale: 5,
            })
            .unwrap()];
        let mut best_k2 = 0i64;
        let mut best_val = 0.0;
        for k2 in 0..band.m2 {
            let v = band.at(0, k2).norm();
            if v > best_val {
                best_val = v;
                best_k2 = crate::frame::centered(k2, band.m2);
            }
        }
        assert!(best_k2.abs() <= 3, "peak at k2={best_k2}");
    }
}
