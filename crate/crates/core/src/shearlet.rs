//! Smooth cone-adapted Parseval shearlet system on the torus grid.
//!
//! Frequency support at scale `j` is the Cartesian corona
//! `C_j = [-2^(2j-1), 2^(2j-1)]^2 \ [-2^(2j-4), 2^(2j-4)]^2`, windowed
//! radially by `corona_window(2^-2j xi)` and angularly by
//! `V(2^j xi2/xi1 - ell)` (horizontal cone, `|xi2| <= |xi1|`) or
//! `V(2^j xi1/xi2 - ell)` (vertical cone). Interior shears `|ell| < 2^j`
//! live on one cone with normalization `2^(-3j/2)`; the two seam bands
//! `ell = +-2^j` straddle the diagonals with both cone pieces glued,
//! normalization `2^(-3j/2 - 1/2)`, and a translation lattice refined by
//! a factor 2 on the short axis. That count (`2^(3j+1)` translates per
//! seam band) is the unique choice consistent with the printed seam
//! normalization and makes the tiling sum exactly 1; the half phase
//! applied to both lattice axes would overcount the diagonal by a factor
//! of two.
//!
//! Translation moduli are capped at the grid side `n`; a capped top
//! scale acts as a completion layer so that a full frame tiles every
//! grid frequency exactly.

use crate::error::{CoreError, Result};
use crate::fft::fft2_inplace;
use crate::frame::{BandCoeffs, BandShape, Frame, FrameCoeffs, fold, modulus_capped};
use crate::grid::{Grid2D, Spectrum2D, dft, idft, two_pow};
use crate::meyer::{meyer_phi_hat, nu_ramp};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::Path;

/// Angular bump: `cos(pi/2 nu(|x|))` on `(-1, 1)`, zero beyond. Satisfies
/// `sum_{k=-1}^{1} V(x+k)^2 = 1` on `[-1, 1]` and `V(0) = 1`.
pub fn bump_v(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        0.0
    } else {
        (FRAC_PI_2 * nu_ramp(a)).cos()
    }
}

/// Separable 2D scaling symbol `phi_hat(xi1) phi_hat(xi2)`.
pub fn phi2_hat(xi1: f64, xi2: f64) -> f64 {
    meyer_phi_hat(xi1) * meyer_phi_hat(xi2)
}

/// Radial corona window
/// `sqrt(phi2_hat(z/4)^2 - phi2_hat(z)^2)`, supported on
/// `1/16 <= |z|_inf <= 1/2` with value 1 on `1/8 <= |z|_inf <= 1/4`.
pub fn corona_window(z1: f64, z2: f64) -> f64 {
    let outer = phi2_hat(z1 / 4.0, z2 / 4.0);
    let inner = phi2_hat(z1, z2);
    (outer * outer - inner * inner).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cone {
    H,
    V,
}

/// Identifier of one shearlet band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ShearBandId {
    /// Single DC atom (torus scaling layer).
    Dc,
    Interior {
        cone: Cone,
        j: i32,
        ell: i64,
    },
    /// `ell = +2^j` (positive, main diagonal) or `-2^j` (anti-diagonal).
    Seam {
        j: i32,
        positive: bool,
    },
}

impl ShearBandId {
    pub fn scale(self) -> Option<i32> {
        match self {
            ShearBandId::Dc => None,
            ShearBandId::Interior { j, .. } | ShearBandId::Seam { j, .. } => Some(j),
        }
    }

    pub fn ell(self) -> Option<i64> {
        match self {
            ShearBandId::Dc => None,
            ShearBandId::Interior { ell, .. } => Some(ell),
            ShearBandId::Seam { j, positive } => {
                Some(if positive { 1i64 << j } else { -(1i64 << j) })
            }
        }
    }
}

pub type ShearletCoeffs = FrameCoeffs<ShearBandId>;

/// Cone-adapted shearlet frame over a set of scales.
#[derive(Debug, Clone)]
pub struct ShearletFrame {
    n: usize,
    scales: Vec<i32>,
    include_dc: bool,
    shapes: Vec<BandShape<ShearBandId>>,
    /// Index into `shapes` of each scale's first band.
    scale_offsets: Vec<usize>,
}

/// Largest scale with nonempty in-grid corona: `2^(2j-4) < n/2`.
pub fn top_scale_for(n: usize) -> i32 {
    let log2n = n.trailing_zeros() as i32;
    (log2n + 3 - 1) / 2
}

fn interior_count(j: i32) -> i64 {
    2 * (1i64 << j) - 1
}

impl ShearletFrame {
    pub fn new(n: usize, scales: &[i32], include_dc: bool) -> Result<Self> {
        if !n.is_power_of_two() || n < crate::grid::MIN_GRID_SIDE {
            return Err(CoreError::BadGridSize(n));
        }
        let mut scales: Vec<i32> = scales.to_vec();
        scales.sort_unstable();
        scales.dedup();
        if scales.is_empty() && !include_dc {
            return Err(CoreError::BadArgument("empty scale range".into()));
        }
        let top = top_scale_for(n);
        for &j in &scales {
            if !(0..=top).contains(&j) {
                return Err(CoreError::ScaleOverflow { scale: j, n });
            }
        }
        let mut shapes = Vec::new();
        if include_dc {
            shapes.push(BandShape {
                id: ShearBandId::Dc,
                m1: 1,
                m2: 1,
            });
        }
        let mut scale_offsets = Vec::with_capacity(scales.len());
        for &j in &scales {
            scale_offsets.push(shapes.len());
            let lmax = 1i64 << j;
            let m_long = modulus_capped(2 * j, n);
            let m_short = modulus_capped(j, n);
            let m_seam_short = modulus_capped(j + 1, n);
            for ell in -(lmax - 1)..=(lmax - 1) {
                shapes.push(BandShape {
                    id: ShearBandId::Interior { cone: Cone::H, j, ell },
                    m1: m_long,
                    m2: m_short,
                });
            }
            for ell in -(lmax - 1)..=(lmax - 1) {
                shapes.push(BandShape {
                    id: ShearBandId::Interior { cone: Cone::V, j, ell },
                    m1: m_short,
                    m2: m_long,
                });
            }
            for positive in [false, true] {
                shapes.push(BandShape {
                    id: ShearBandId::Seam { j, positive },
                    m1: m_long,
                    m2: m_seam_short,
                });
            }
        }
        Ok(Self {
            n,
            scales,
            include_dc,
            shapes,
            scale_offsets,
        })
    }

    /// Full frame: DC layer plus every scale with in-grid content; tiles
    /// the whole grid exactly.
    pub fn full(n: usize) -> Result<Self> {
        let scales: Vec<i32> = (1..=top_scale_for(n)).collect();
        Self::new(n, &scales, true)
    }

    pub fn scales(&self) -> &[i32] {
        &self.scales
    }

    pub fn includes_dc(&self) -> bool {
        self.include_dc
    }

    pub fn band_index(&self, id: ShearBandId) -> Option<usize> {
        self.shapes.iter().position(|s| s.id == id)
    }

    /// Local band slot within a scale's block, mirroring construction
    /// order: H interiors, V interiors, seam-, seam+.
    fn local_slot(j: i32, cone_is_h: bool, ell: i64) -> usize {
        let lmax = 1i64 << j;
        let per_cone = interior_count(j);
        if ell.abs() < lmax {
            let base = if cone_is_h { 0 } else { per_cone };
            (base + ell + lmax - 1) as usize
        } else {
            (2 * per_cone) as usize + usize::from(ell > 0)
        }
    }

    /// Visit the in-grid support of a single band with its window value
    /// (no lattice normalization). Iterates only the band's own wedge.
    pub fn for_band_support(&self, band: usize, mut visit: impl FnMut(i64, i64, f64)) {
        let n = self.n;
        let h = (n / 2) as i64;
        let id = self.shapes[band].id;
        if id == ShearBandId::Dc {
            visit(0, 0, 1.0);
            return;
        }
        let j = id.scale().expect("non-DC band has a scale");
        let ell = id.ell().expect("non-DC band has a shear");
        let swap = matches!(id, ShearBandId::Interior { cone: Cone::V, .. });
        let inv = two_pow(-2 * j);
        let outer = two_pow(2 * j - 1).min(h as f64);
        let lo_long = (-outer).ceil() as i64;
        let hi_long = (outer.floor() as i64).min(h - 1);
        // "long" axis: xi1 for H/seam bands, xi2 for V bands. The short
        // coordinate runs over the wedge [(ell-1) long / 2^j, (ell+1) long / 2^j];
        // seam bands additionally take the partner-cone wedge.
        for long in lo_long.max(-h)..=hi_long {
            if long == 0 {
                continue;
            }
            let base = long as f64 * two_pow(-j);
            let mut short_lo = (base * (ell - 1) as f64).min(base * (ell + 1) as f64);
            let mut short_hi = (base * (ell - 1) as f64).max(base * (ell + 1) as f64);
            if matches!(id, ShearBandId::Seam { .. }) {
                // Partner-cone piece reaches to long * 2^j / (|ell| - 1).
                let den = (ell.abs() - 1).max(1) as f64;
                let extra = long as f64 * (1i64 << j) as f64 / den * ell.signum() as f64;
                short_lo = short_lo.min(extra);
                short_hi = short_hi.max(extra);
            }
            let s_lo = (short_lo.floor() as i64).max(-h);
            let s_hi = (short_hi.ceil() as i64).min(h - 1);
            for short in s_lo..=s_hi {
                let (xi1, xi2) = if swap { (short, long) } else { (long, short) };
                let w = corona_window(xi1 as f64 * inv, xi2 as f64 * inv);
                if w == 0.0 {
                    continue;
                }
                let on_h_side = xi2.abs() <= xi1.abs();
                let u = if on_h_side {
                    two_pow(j) * xi2 as f64 / xi1 as f64
                } else {
                    two_pow(j) * xi1 as f64 / xi2 as f64
                };
                let matches_band = match id {
                    ShearBandId::Dc => false,
                    ShearBandId::Interior { cone, .. } => {
                        on_h_side == (cone == Cone::H) && (u - ell as f64).abs() < 1.0
                    }
                    ShearBandId::Seam { .. } => (u - ell as f64).abs() < 1.0,
                };
                if !matches_band {
                    continue;
                }
                let v = bump_v(u - ell as f64);
                if v != 0.0 {
                    visit(xi1, xi2, w * v);
                }
            }
        }
    }

    /// Visit every nonzero window product of scale `j` on the grid:
    /// `visit(local_slot, xi1, xi2, window_value)` with
    /// `window_value = corona_window * V` (no lattice normalization).
    fn scatter(&self, j: i32, mut visit: impl FnMut(usize, i64, i64, f64)) {
        let n = self.n;
        let h = (n / 2) as i64;
        let outer = two_pow(2 * j - 1).min(h as f64);
        let inner = two_pow(2 * j - 4);
        let lo = (-outer).ceil() as i64;
        let hi = (outer.floor() as i64).min(h - 1);
        let lmax = 1i64 << j;
        let inv = two_pow(-2 * j);
        for xi1 in lo.max(-h)..=hi {
            for xi2 in lo.max(-h)..=hi {
                let linf = xi1.abs().max(xi2.abs()) as f64;
                if linf <= inner {
                    continue;
                }
                let w = corona_window(xi1 as f64 * inv, xi2 as f64 * inv);
                if w == 0.0 {
                    continue;
                }
                let u = if xi2.abs() <= xi1.abs() {
                    two_pow(j) * xi2 as f64 / xi1 as f64
                } else {
                    two_pow(j) * xi1 as f64 / xi2 as f64
                };
                let on_h_side = xi2.abs() <= xi1.abs();
                let ell_lo = (u - 1.0).ceil() as i64;
                let ell_hi = (u + 1.0).floor() as i64;
                for ell in ell_lo..=ell_hi {
                    if ell.abs() > lmax {
                        continue;
                    }
                    let v = bump_v(u - ell as f64);
                    if v == 0.0 {
                        continue;
                    }
                    visit(Self::local_slot(j, on_h_side, ell), xi1, xi2, w * v);
                }
            }
        }
    }
}

impl Frame for ShearletFrame {
    type BandId = ShearBandId;

    fn n(&self) -> usize {
        self.n
    }

    fn band_shapes(&self) -> Vec<BandShape<ShearBandId>> {
        self.shapes.clone()
    }

    fn analysis(&self, f: &Grid2D) -> Result<ShearletCoeffs> {
        if f.n() != self.n {
            return Err(CoreError::ShapeMismatch(format!(
                "grid side {} does not match frame side {}",
                f.n(),
                self.n
            )));
        }
        let fhat = dft(f);
        let mut folded: Vec<Vec<Complex64>> = self
            .shapes
            .iter()
            .map(|s| vec![Complex64::default(); s.m1 * s.m2])
            .collect();
        if self.include_dc {
            folded[0][0] = fhat.at_freq(0, 0);
        }
        for (si, &j) in self.scales.iter().enumerate() {
            let offset = self.scale_offsets[si];
            // Split borrow: each scale writes only into its own block.
            let block = &mut folded[offset..];
            let shapes = &self.shapes[offset..];
            self.scatter(j, |slot, xi1, xi2, w| {
                let shape = &shapes[slot];
                let a = w / ((shape.m1 * shape.m2) as f64).sqrt();
                block[slot][fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)] +=
                    fhat.at_freq(xi1, xi2) * a;
            });
        }
        let bands: Vec<BandCoeffs<ShearBandId>> = self
            .shapes
            .par_iter()
            .zip(folded.into_par_iter())
            .map(|(shape, mut values)| {
                // Atom phase is exp(+2 pi i <k, xi/M>), so analysis applies
                // the forward-direction kernel.
                fft2_inplace(&mut values, shape.m1, shape.m2, false);
                BandCoeffs {
                    id: shape.id,
                    m1: shape.m1,
                    m2: shape.m2,
                    values,
                }
            })
            .collect();
        Ok(ShearletCoeffs { n: self.n, bands })
    }

    fn synthesis(&self, coeffs: &ShearletCoeffs) -> Result<Grid2D> {
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
                fft2_inplace(&mut v, b.m1, b.m2, true);
                v
            })
            .collect();
        let mut xhat = Spectrum2D::zeros(self.n)?;
        if self.include_dc {
            xhat.set_freq(0, 0, chats[0][0]);
        }
        for (si, &j) in self.scales.iter().enumerate() {
            let offset = self.scale_offsets[si];
            let shapes = &self.shapes[offset..];
            let chats = &chats[offset..];
            self.scatter(j, |slot, xi1, xi2, w| {
                let shape = &shapes[slot];
                let a = w / ((shape.m1 * shape.m2) as f64).sqrt();
                let c = chats[slot][fold(xi1, shape.m1) * shape.m2 + fold(xi2, shape.m2)];
                xhat.add_freq(xi1, xi2, c * a);
            });
        }
        Ok(idft(&xhat))
    }

    fn tiling(&self) -> Spectrum2D {
        let mut t = Spectrum2D::zeros(self.n).expect("side validated at construction");
        if self.include_dc {
            // phi2_hat at integer frequencies is nonzero only at 0.
            t.add_freq(0, 0, Complex64::new(1.0, 0.0));
        }
        for &j in &self.scales {
            self.scatter(j, |_slot, xi1, xi2, w| {
                t.add_freq(xi1, xi2, Complex64::new(w * w, 0.0));
            });
        }
        t
    }

    fn atom_spectrum(&self, band: usize, k1: usize, k2: usize) -> Spectrum2D {
        let shape = self.shapes[band];
        let mut s = Spectrum2D::zeros(self.n).expect("side validated at construction");
        let norm = 1.0 / ((shape.m1 * shape.m2) as f64).sqrt();
        self.for_band_support(band, |xi1, xi2, w| {
            let phase = 2.0
                * PI
                * (k1 as f64 * xi1 as f64 / shape.m1 as f64
                    + k2 as f64 * xi2 as f64 / shape.m2 as f64);
            s.set_freq(xi1, xi2, Complex64::from_polar(w * norm, phase));
        });
        s
    }

    fn atom_norms(&self) -> Vec<f64> {
        (0..self.shapes.len())
            .map(|b| {
                let shape = self.shapes[b];
                let norm_sq = 1.0 / (shape.m1 * shape.m2) as f64;
                let mut sum = 0.0;
                self.for_band_support(b, |_, _, w| sum += w * w * norm_sq);
                sum.sqrt()
            })
            .collect()
    }
}

/// Convenience analysis over scales `j_min ..= j_max` plus the DC layer.
pub fn shearlet_analysis(f: &Grid2D, j_min: i32, j_max: i32) -> Result<ShearletCoeffs> {
    if j_min > j_max {
        return Err(CoreError::BadArgument(format!(
            "empty scale range {j_min}..={j_max}"
        )));
    }
    let scales: Vec<i32> = (j_min..=j_max).collect();
    ShearletFrame::new(f.n(), &scales, true)?.analysis(f)
}

/// Adjoint of [`shearlet_analysis`] on the same range.
pub fn shearlet_synthesis(coeffs: &ShearletCoeffs, j_min: i32, j_max: i32) -> Result<Grid2D> {
    let scales: Vec<i32> = (j_min..=j_max).collect();
    ShearletFrame::new(coeffs.n, &scales, true)?.synthesis(coeffs)
}

/// Single coefficient of the continuous-parameter system
/// `a^(3/2) corona_window(a^2 xi) V^iota(xi A_a S_-s) exp(2 pi i <xi, t>)`
/// evaluated by direct frequency summation. At lattice points
/// `(a, s, t) = (2^-j, ell, (k1/M1, k2/M2))` this equals the discrete
/// interior coefficient exactly.
pub fn continuous_shearlet_coeff(
    f: &Grid2D,
    a: f64,
    s: f64,
    t: (f64, f64),
    iota: Cone,
) -> Result<Complex64> {
    continuous_coeff_from_spectrum(&dft(f), a, s, t, iota)
}

/// [`continuous_shearlet_coeff`] on a precomputed spectrum, for callers
/// evaluating many `(a, s, t)` parameters of one signal.
pub fn continuous_coeff_from_spectrum(
    fhat: &Spectrum2D,
    a: f64,
    s: f64,
    t: (f64, f64),
    iota: Cone,
) -> Result<Complex64> {
    let n = fhat.n();
    let h = (n / 2) as i64;
    if !(a > 0.0) || 1.0 / (16.0 * a * a) >= h as f64 {
        return Err(CoreError::ScaleOverflow {
            scale: (-a.log2()).round() as i32,
            n,
        });
    }
    let outer = (0.5 / (a * a)).min(h as f64);
    let lo = (-outer).ceil() as i64;
    let hi = (outer.floor() as i64).min(h - 1);
    let mut acc = Complex64::default();
    let amp = a.powf(1.5);
    for xi1 in lo.max(-h)..=hi {
        for xi2 in lo.max(-h)..=hi {
            let w = corona_window(a * a * xi1 as f64, a * a * xi2 as f64);
            if w == 0.0 {
                continue;
            }
            let ratio = match iota {
                Cone::H => {
                    if xi1 == 0 {
                        continue;
                    }
                    xi2 as f64 / (a * xi1 as f64)
                }
                Cone::V => {
                    if xi2 == 0 {
                        continue;
                    }
                    xi1 as f64 / (a * xi2 as f64)
                }
            };
            let v = bump_v(ratio - s);
            if v == 0.0 {
                continue;
            }
            let phase = -2.0 * PI * (t.0 * xi1 as f64 + t.1 * xi2 as f64);
            acc += fhat.at_freq(xi1, xi2) * amp * w * v * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(acc)
}

/// Dump coefficients: per band an ASCII header `iota j ell mod1 mod2`
/// followed by the raw complex array (f64 LE interleaved re/im,
/// row-major). The DC band is written as `c 0 0 1 1`.
pub fn dump_shearlet_coeffs(coeffs: &ShearletCoeffs, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for band in &coeffs.bands {
        let (iota, j, ell) = match band.id {
            ShearBandId::Dc => ('c', 0, 0),
            ShearBandId::Interior { cone, j, ell } => {
                (if cone == Cone::H { 'h' } else { 'v' }, j, ell)
            }
            ShearBandId::Seam { j, positive } => {
                ('s', j, if positive { 1i64 << j } else { -(1i64 << j) })
            }
        };
        writeln!(w, "{iota} {j} {ell} {} {}", band.m1, band.m2)?;
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
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_v_identities() {
        assert_eq!(bump_v(1.5), 0.0);
        assert_eq!(bump_v(0.0), 1.0);
        let half = bump_v(0.5).powi(2) + bump_v(-0.5).powi(2);
        assert!((half - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = (-1..=1).map(|k| bump_v(x + k as f64).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x}: {s}");
        }
    }

    #[test]
    fn corona_window_plateau_and_telescope() {
        assert_eq!(corona_window(0.05, 0.02), 0.0);
        assert!((corona_window(0.2, 0.1) - 1.0).abs() < 1e-15);
        assert_eq!(corona_window(0.6, 0.1), 0.0);
        let (z1, z2) = (7.3, -2.1);
        let mut s = phi2_hat(z1, z2).powi(2);
        for j in 0..=5 {
            s += corona_window(z1 * two_pow(-2 * j), z2 * two_pow(-2 * j)).powi(2);
        }
        assert!((s - 1.0).abs() < 1e-12, "telescope={s}");
    }

    #[test]
    fn interior_atom_support_is_a_wedge() {
        let frame = ShearletFrame::new(64, &[2], false).unwrap();
        let band = frame
            .band_index(ShearBandId::Interior {
                cone: Cone::V,
                j: 2,
                ell: 0,
            })
            .unwrap();
        let spec = frame.atom_spectrum(band, 0, 0);
        let mut nonzero = 0;
        for (idx, v) in spec.values().iter().enumerate() {
            if v.norm() > 0.0 {
                let (xi1, xi2) = spec.freq_of_index(idx);
                assert!(xi2 != 0 && (xi1 as f64 / xi2 as f64).abs() < 0.25);
                let linf = xi1.abs().max(xi2.abs());
                assert!(linf >= 1 && linf <= 8, "outside C_2: ({xi1},{xi2})");
                nonzero += 1;
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn seam_atom_straddles_diagonal() {
        let frame = ShearletFrame::new(64, &[2], false).unwrap();
        let band = frame
            .band_index(ShearBandId::Seam {
                j: 2,
                positive: true,
            })
            .unwrap();
        let spec = frame.atom_spectrum(band, 0, 0);
        let (mut below, mut above) = (false, false);
        for (idx, v) in spec.values().iter().enumerate() {
            if v.norm() > 1e-12 {
                let (xi1, xi2) = spec.freq_of_index(idx);
                if xi1 != 0 && (xi2 as f64 / xi1 as f64).abs() < 1.0 {
                    below = true;
                }
                if xi1 == 0 || (xi2 as f64 / xi1 as f64).abs() > 1.0 {
                    above = true;
                }
            }
        }
        assert!(below && above, "below={below} above={above}");
    }

    #[test]
    fn full_frame_tiles_whole_grid() {
        let frame = ShearletFrame::full(32).unwrap();
        let t = frame.tiling();
        for (idx, v) in t.values().iter().enumerate() {
            let (xi1, xi2) = t.freq_of_index(idx);
            assert!((v.re - 1.0).abs() < 1e-10, "tiling({xi1},{xi2})={}", v.re);
        }
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
    fn parseval_and_round_trip() {
        let n = 64;
        let frame = ShearletFrame::full(n).unwrap();
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
    fn fast_analysis_matches_direct_inner_products_with_seams() {
        let n = 32;
        let frame = ShearletFrame::new(n, &[1, 2], true).unwrap();
        let f = random_bandlimited(n, 8, 3);
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
                        "band {:?} k=({k1},{k2}): {direct} vs {fast}",
                        band.id
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 300);
    }

    #[test]
    fn axis_swap_swaps_cones() {
        let n = 32;
        let f = random_bandlimited(n, 8, 11);
        let swapped = Grid2D::from_fn(n, |x1, x2| {
            f.at((x2 * n as f64).round() as usize % n, (x1 * n as f64).round() as usize % n)
        })
        .unwrap();
        let frame = ShearletFrame::new(n, &[2], false).unwrap();
        let ca = frame.analysis(&f).unwrap();
        let cb = frame.analysis(&swapped).unwrap();
        for ell in -3..=3 {
            let bh = frame
                .band_index(ShearBandId::Interior { cone: Cone::H, j: 2, ell })
                .unwrap();
            let bv = frame
                .band_index(ShearBandId::Interior { cone: Cone::V, j: 2, ell })
                .unwrap();
            let h_of_swapped = &cb.bands[bh];
            let v_of_orig = &ca.bands[bv];
            for k1 in 0..h_of_swapped.m1 {
                for k2 in 0..h_of_swapped.m2 {
                    let d = (h_of_swapped.at(k1, k2) - v_of_orig.at(k2, k1)).norm();
                    assert!(d < 1e-12, "ell={ell} k=({k1},{k2}): {d}");
                }
            }
        }
    }

    #[test]
    fn continuous_matches_discrete_on_lattice() {
        let n = 64;
        let f = random_bandlimited(n, 16, 9);
        let j = 2;
        let frame = ShearletFrame::new(n, &[j], false).unwrap();
        let coeffs = frame.analysis(&f).unwrap();
        for (ell, k1, k2) in [(0i64, 0usize, 0usize), (1, 2, 5), (-2, 3, 11)] {
            let band = frame
                .band_index(ShearBandId::Interior { cone: Cone::V, j, ell })
                .unwrap();
            let shape = frame.band_shapes()[band];
            let t = (k1 as f64 / shape.m1 as f64, k2 as f64 / shape.m2 as f64);
            let cont =
                continuous_shearlet_coeff(&f, two_pow(-j), ell as f64, t, Cone::V).unwrap();
            let disc = coeffs.bands[band].at(k1, k2);
            assert!(
                (cont - disc).norm() < 1e-10,
                "ell={ell} k=({k1},{k2}): {cont} vs {disc}"
            );
        }
    }

    #[test]
    fn zero_signal_zero_coefficients_and_back() {
        let f = Grid2D::zeros(32).unwrap();
        let c = shearlet_analysis(&f, 1, 2).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        let back = shearlet_synthesis(&c, 1, 2).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }

    #[test]
    fn unsupported_scale_is_an_error() {
        assert!(matches!(
            ShearletFrame::new(32, &[5], false),
            Err(CoreError::ScaleOverflow { .. })
        ));
        assert!(continuous_shearlet_coeff(
            &Grid2D::zeros(32).unwrap(),
            0.001,
            0.0,
            (0.0, 0.0),
            Cone::V
        )
        .is_err());
    }
}
