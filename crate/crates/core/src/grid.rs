//! Sampled fields on the unit torus and their centered spectra.
//!
//! A [`Grid2D`] holds `n * n` samples, row-major, with index `(m1, m2)`
//! mapping to the torus point `(m1/n, m2/n)`. Norms carry Riemann weights
//! `1/n^2` so they approximate continuum `L2` norms independently of `n`.
//!
//! A [`Spectrum2D`] holds samples at integer frequencies
//! `xi in [-n/2, n/2)^2`; with the conventions below the pair
//! [`dft`]/[`idft`] is unitary: `norm(grid) == norm(spectrum)` and the
//! round trip is the identity.

use crate::error::{CoreError, Result};
use crate::fft::fft2_inplace;
use rustfft::num_complex::Complex64;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MIN_GRID_SIDE: usize = 16;

fn check_side(n: usize) -> Result<()> {
    if n < MIN_GRID_SIDE || !n.is_power_of_two() {
        return Err(CoreError::BadGridSize(n));
    }
    Ok(())
}

/// Real or complex samples on the `n x n` periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n: usize,
    values: Vec<Complex64>,
}

impl Grid2D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_side(n)?;
        Ok(Self {
            n,
            values: vec![Complex64::default(); n * n],
        })
    }

    pub fn from_complex(n: usize, values: Vec<Complex64>) -> Result<Self> {
        check_side(n)?;
        if values.len() != n * n {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} samples, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        check_side(n)?;
        if values.len() != n * n {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} samples, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            n,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    /// Build from a sample function of the torus point `(x1, x2)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        check_side(n)?;
        let mut values = Vec::with_capacity(n * n);
        for m1 in 0..n {
            for m2 in 0..n {
                values.push(f(m1 as f64 / n as f64, m2 as f64 / n as f64));
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn at(&self, m1: usize, m2: usize) -> Complex64 {
        self.values[m1 * self.n + m2]
    }

    pub fn set(&mut self, m1: usize, m2: usize, v: Complex64) {
        self.values[m1 * self.n + m2] = v;
    }

    /// Riemann-weighted squared norm `(1/n^2) sum |g|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / (self.n * self.n) as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Riemann-weighted inner product `(1/n^2) sum f conj(g)`.
    pub fn inner(&self, other: &Grid2D) -> Result<Complex64> {
        if self.n != other.n {
            return Err(CoreError::ShapeMismatch(format!(
                "grid sides differ: {} vs {}",
                self.n, other.n
            )));
        }
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s / (self.n * self.n) as f64)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Real parts, failing when any imaginary part exceeds `tol` in
    /// absolute value.
    pub fn to_real(&self, tol: f64) -> Result<Vec<f64>> {
        let imag = self.max_abs_imag();
        if imag > tol {
            return Err(CoreError::NotReal(imag));
        }
        Ok(self.values.iter().map(|v| v.re).collect())
    }

    pub fn is_exactly_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// `self + scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Grid2D, scale: f64) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * scale;
        }
    }
}

/// Complex samples at centered integer frequencies `[-n/2, n/2)^2`.
///
/// Storage is row-major with index `(q1, q2)` holding frequency
/// `(q1 - n/2, q2 - n/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    n: usize,
    values: Vec<Complex64>,
    corona_tag: Option<i32>,
}

impl Spectrum2D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_side(n)?;
        Ok(Self {
            n,
            values: vec![Complex64::default(); n * n],
            corona_tag: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn min_freq(&self) -> i64 {
        -((self.n / 2) as i64)
    }

    pub fn max_freq_excl(&self) -> i64 {
        (self.n / 2) as i64
    }

    pub fn contains_freq(&self, xi1: i64, xi2: i64) -> bool {
        let h = (self.n / 2) as i64;
        xi1 >= -h && xi1 < h && xi2 >= -h && xi2 < h
    }

    pub fn at_freq(&self, xi1: i64, xi2: i64) -> Complex64 {
        let h = (self.n / 2) as i64;
        let q1 = (xi1 + h) as usize;
        let q2 = (xi2 + h) as usize;
        self.values[q1 * self.n + q2]
    }

    pub fn set_freq(&mut self, xi1: i64, xi2: i64, v: Complex64) {
        let h = (self.n / 2) as i64;
        let q1 = (xi1 + h) as usize;
        let q2 = (xi2 + h) as usize;
        self.values[q1 * self.n + q2] = v;
    }

    pub fn add_freq(&mut self, xi1: i64, xi2: i64, v: Complex64) {
        let h = (self.n / 2) as i64;
        let q1 = (xi1 + h) as usize;
        let q2 = (xi2 + h) as usize;
        self.values[q1 * self.n + q2] += v;
    }

    /// Plancherel-side squared norm: plain `sum |S|^2` over integer
    /// frequencies (the counting measure dual to the Riemann weights).
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn corona_tag(&self) -> Option<i32> {
        self.corona_tag
    }

    /// Tag this spectrum as supported in the corona
    /// `C_j = [-2^(2j-1), 2^(2j-1)]^2 \ [-2^(2j-4), 2^(2j-4)]^2`,
    /// verifying that every entry outside it is exactly zero.
    pub fn with_corona_tag(mut self, j: i32) -> Result<Self> {
        let outer = two_pow(2 * j - 1);
        let inner = two_pow(2 * j - 4);
        for (q, v) in self.values.iter().enumerate() {
            if *v == Complex64::default() {
                continue;
            }
            let (xi1, xi2) = self.freq_of_index(q);
            let linf = xi1.abs().max(xi2.abs()) as f64;
            if linf > outer || linf < inner {
                return Err(CoreError::ShapeMismatch(format!(
                    "nonzero entry at ({xi1},{xi2}) outside corona C_{j}"
                )));
            }
        }
        self.corona_tag = Some(j);
        Ok(self)
    }

    pub fn freq_of_index(&self, idx: usize) -> (i64, i64) {
        let h = (self.n / 2) as i64;
        ((idx / self.n) as i64 - h, (idx % self.n) as i64 - h)
    }
}

/// `2^e` as an `f64`, defined for negative exponents as well.
pub fn two_pow(e: i32) -> f64 {
    (2.0f64).powi(e)
}

/// Forward transform: `S(xi) = (1/n^2) sum_m g(m) exp(-2 pi i <m, xi> / n)`.
pub fn dft(g: &Grid2D) -> Spectrum2D {
    let n = g.n;
    let mut raw = g.values.clone();
    fft2_inplace(&mut raw, n, n, false);
    let mut out = Spectrum2D::zeros(n).expect("grid side already validated");
    let scale = 1.0 / (n * n) as f64;
    let h = n / 2;
    for q1 in 0..n {
        let r1 = (q1 + h) % n;
        for q2 in 0..n {
            let r2 = (q2 + h) % n;
            out.values[q1 * n + q2] = raw[r1 * n + r2] * scale;
        }
    }
    out
}

/// Inverse transform: `g(m) = sum_xi S(xi) exp(+2 pi i <m, xi> / n)`.
pub fn idft(s: &Spectrum2D) -> Grid2D {
    let n = s.n;
    let h = n / 2;
    let mut raw = vec![Complex64::default(); n * n];
    for q1 in 0..n {
        let r1 = (q1 + h) % n;
        for q2 in 0..n {
            let r2 = (q2 + h) % n;
            raw[r1 * n + r2] = s.values[q1 * n + q2];
        }
    }
    fft2_inplace(&mut raw, n, n, true);
    Grid2D { n, values: raw }
}

const GRID_MAGIC: &[u8; 4] = b"G2D1";

/// Write a grid in the bit-exact binary format: magic `G2D1`, `u32` LE
/// side, `u8` flag (0 real / 1 complex), then `f64` LE samples row-major
/// (complex samples interleave re/im).
pub fn write_grid(g: &Grid2D, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(GRID_MAGIC)?;
    w.write_all(&(g.n as u32).to_le_bytes())?;
    let complex = !g.is_exactly_real();
    w.write_all(&[u8::from(complex)])?;
    for v in &g.values {
        w.write_all(&v.re.to_le_bytes())?;
        if complex {
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: &mut u64, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| CoreError::Format {
        offset: *offset,
        reason: format!("truncated while reading {what}"),
    })?;
    *offset += buf.len() as u64;
    Ok(())
}

/// Read a grid written by [`write_grid`].
pub fn read_grid(path: &Path) -> Result<Grid2D> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut offset = 0u64;
    let mut magic = [0u8; 4];
    read_exact_at(&mut r, &mut magic, &mut offset, "magic")?;
    if &magic != GRID_MAGIC {
        return Err(CoreError::Format {
            offset: 0,
            reason: format!("bad magic {magic:?}"),
        });
    }
    let mut nb = [0u8; 4];
    read_exact_at(&mut r, &mut nb, &mut offset, "side length")?;
    let n = u32::from_le_bytes(nb) as usize;
    check_side(n).map_err(|_| CoreError::Format {
        offset: 4,
        reason: format!("side {n} is not a power of two >= {MIN_GRID_SIDE}"),
    })?;
    let mut flag = [0u8; 1];
    read_exact_at(&mut r, &mut flag, &mut offset, "real/complex flag")?;
    if flag[0] > 1 {
        return Err(CoreError::Format {
            offset: 8,
            reason: format!("flag {} is neither 0 nor 1", flag[0]),
        });
    }
    let complex = flag[0] == 1;
    let mut values = Vec::with_capacity(n * n);
    let mut fb = [0u8; 8];
    for _ in 0..n * n {
        read_exact_at(&mut r, &mut fb, &mut offset, "sample")?;
        let re = f64::from_le_bytes(fb);
        let im = if complex {
            read_exact_at(&mut r, &mut fb, &mut offset, "sample")?;
            f64::from_le_bytes(fb)
        } else {
            0.0
        };
        values.push(Complex64::new(re, im));
    }
    // Trailing bytes mean the header lied about the payload size.
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(CoreError::Format {
            offset,
            reason: "trailing bytes after samples".into(),
        });
    }
    Ok(Grid2D { n, values })
}

/// Export a real grid as binary PGM (`P5`, maxval 255), mapping `range`
/// (default: data min/max) affinely onto 0..=255 with clipping.
pub fn export_pgm(g: &Grid2D, path: &Path, range: Option<(f64, f64)>) -> Result<()> {
    let reals = g.to_real(1e-9 * g.max_abs().max(1e-300))?;
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let lo = reals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = reals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", g.n, g.n)?;
    let bytes: Vec<u8> = reals
        .iter()
        .map(|&v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// Read a binary PGM written by [`export_pgm`] (or any `P5` file with
/// maxval <= 255), mapping bytes back to `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<Grid2D> {
    fn token(data: &[u8], pos: &mut usize) -> Result<String> {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
        }
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(CoreError::Format {
                offset: *pos as u64,
                reason: "truncated PGM header".into(),
            });
        }
        Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
    }
    fn number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
        let at = *pos as u64;
        token(data, pos)?.parse().map_err(|_| CoreError::Format {
            offset: at,
            reason: format!("bad {what}"),
        })
    }
    let data = std::fs::read(path)?;
    let mut pos = 0usize;
    if token(&data, &mut pos)? != "P5" {
        return Err(CoreError::Format {
            offset: 0,
            reason: "not a binary PGM (P5) file".into(),
        });
    }
    let w = number(&data, &mut pos, "width")?;
    let h = number(&data, &mut pos, "height")?;
    let maxval = number(&data, &mut pos, "maxval")?;
    if w != h {
        return Err(CoreError::Format {
            offset: pos as u64,
            reason: format!("only square images are supported, got {w}x{h}"),
        });
    }
    if maxval == 0 || maxval > 255 {
        return Err(CoreError::Format {
            offset: pos as u64,
            reason: format!("unsupported maxval {maxval}"),
        });
    }
    pos += 1; // single whitespace byte after maxval
    if data.len() < pos + w * h {
        return Err(CoreError::Format {
            offset: data.len() as u64,
            reason: "truncated PGM payload".into(),
        });
    }
    let values: Vec<f64> = data[pos..pos + w * h]
        .iter()
        .map(|&b| b as f64 / maxval as f64)
        .collect();
    Grid2D::from_real(w, &values)
}
