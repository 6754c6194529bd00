//! Frame-agnostic coefficient containers and the analysis/synthesis
//! contract shared by the wavelet and shearlet systems.
//!
//! Both systems are implemented the same way: every band is a window
//! `A(xi) = window(xi) / sqrt(M1 * M2)` on the centered frequency grid
//! together with a translation lattice of `M1 x M2` atoms,
//! `atom(xi) = A(xi) * exp(sign * 2 pi i (xi1 k1 / M1 + xi2 k2 / M2))`.
//! Analysis folds `fhat * conj(A)` onto the `(M1, M2)` residue lattice and
//! applies one small unnormalized DFT; synthesis runs the adjoint. Folding
//! is exact because every band's in-grid support meets each residue class
//! at most once (up to boundary points where the window vanishes), so
//! `sum_bands M1 M2 |A|^2 = 1` makes the whole system a Parseval frame on
//! its covered band.

use crate::error::Result;
use crate::grid::{Grid2D, Spectrum2D};
use rustfft::num_complex::Complex64;

/// Coefficients of one band: a row-major `m1 x m2` array over one period
/// of the translation lattice.
#[derive(Debug, Clone)]
pub struct BandCoeffs<Id> {
    pub id: Id,
    pub m1: usize,
    pub m2: usize,
    pub values: Vec<Complex64>,
}

impl<Id> BandCoeffs<Id> {
    pub fn at(&self, k1: usize, k2: usize) -> Complex64 {
        self.values[k1 * self.m2 + k2]
    }

    /// Lattice index pair of a flat position.
    pub fn unflatten(&self, idx: usize) -> (usize, usize) {
        (idx / self.m2, idx % self.m2)
    }
}

/// Analysis coefficients of a whole frame, band by band in the frame's
/// canonical order.
#[derive(Debug, Clone)]
pub struct FrameCoeffs<Id> {
    pub n: usize,
    pub bands: Vec<BandCoeffs<Id>>,
}

impl<Id> FrameCoeffs<Id> {
    pub fn coeff_count(&self) -> usize {
        self.bands.iter().map(|b| b.values.len()).sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.values.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.values.iter().map(|v| v.norm()).sum::<f64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.bands
            .iter()
            .flat_map(|b| b.values.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Zero every coefficient for which `keep` returns false.
    /// `keep` receives the band index and the lattice position.
    pub fn retain(&mut self, mut keep: impl FnMut(usize, usize, usize) -> bool) {
        for (b, band) in self.bands.iter_mut().enumerate() {
            let m2 = band.m2;
            for (idx, v) in band.values.iter_mut().enumerate() {
                if !keep(b, idx / m2, idx % m2) {
                    *v = Complex64::default();
                }
            }
        }
    }

    pub fn zeroed_clone(&self) -> Self
    where
        Id: Clone,
    {
        FrameCoeffs {
            n: self.n,
            bands: self
                .bands
                .iter()
                .map(|b| BandCoeffs {
                    id: b.id.clone(),
                    m1: b.m1,
                    m2: b.m2,
                    values: vec![Complex64::default(); b.values.len()],
                })
                .collect(),
        }
    }
}

/// Centered representative of a lattice index: maps `[0, m)` onto
/// `[-m/2, m/2)`.
pub fn centered(k: usize, modulus: usize) -> i64 {
    let k = k as i64;
    let m = modulus as i64;
    if k < (m + 1) / 2 {
        k
    } else {
        k - m
    }
}

/// Residue of a (possibly negative) frequency modulo `m`.
pub fn fold(xi: i64, m: usize) -> usize {
    xi.rem_euclid(m as i64) as usize
}

/// Natural modulus `2^pow` capped at the grid side `n`. In-grid band
/// supports stay injective under the capped fold, so capping preserves
/// exactness while bounding lattice sizes.
pub(crate) fn modulus_capped(pow: i32, n: usize) -> usize {
    if pow >= 0 && (pow as u32) < usize::BITS && (1usize << pow) < n {
        1usize << pow
    } else {
        n
    }
}

/// Shape metadata of one band.
#[derive(Debug, Clone, Copy)]
pub struct BandShape<Id> {
    pub id: Id,
    pub m1: usize,
    pub m2: usize,
}

/// Common surface of the two frame implementations. Analysis and
/// synthesis are exact adjoints; on the covered band the composition is
/// the identity.
pub trait Frame {
    type BandId: Copy + Eq + Ord + std::fmt::Debug;

    fn n(&self) -> usize;

    /// Band list in the canonical (deterministic) order used by
    /// analysis results.
    fn band_shapes(&self) -> Vec<BandShape<Self::BandId>>;

    fn analysis(&self, f: &Grid2D) -> Result<FrameCoeffs<Self::BandId>>;

    fn synthesis(&self, coeffs: &FrameCoeffs<Self::BandId>) -> Result<Grid2D>;

    /// Pointwise frame diagnostic `sum_atoms |atom_hat(xi)|^2`
    /// (equivalently `sum_bands M1 M2 |A(xi)|^2`); equals 1 exactly on
    /// the covered band.
    fn tiling(&self) -> Spectrum2D;

    /// Spectrum of a single atom, identified by band index and lattice
    /// position.
    fn atom_spectrum(&self, band: usize, k1: usize, k2: usize) -> Spectrum2D;

    /// l2 norm of one atom of each band (translates share the norm).
    fn atom_norms(&self) -> Vec<f64>;
}

/// Band identifier of a [`PairFrame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EitherId<L, R> {
    Left(L),
    Right(R),
}

/// Union of two frames on the same grid: bands are concatenated, the
/// tiling sums. Used to complete a carrier system with bands of another
/// family (for example a capped wavelet scale closing the outer annulus
/// over a shearlet corona).
#[derive(Debug, Clone)]
pub struct PairFrame<A, B> {
    left: A,
    right: B,
}

impl<A: Frame, B: Frame> PairFrame<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        if left.n() != right.n() {
            return Err(crate::error::CoreError::ShapeMismatch(format!(
                "pair frame sides differ: {} vs {}",
                left.n(),
                right.n()
            )));
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &A {
        &self.left
    }

    pub fn right(&self) -> &B {
        &self.right
    }
}

impl<A: Frame, B: Frame> Frame for PairFrame<A, B> {
    type BandId = EitherId<A::BandId, B::BandId>;

    fn n(&self) -> usize {
        self.left.n()
    }

    fn band_shapes(&self) -> Vec<BandShape<Self::BandId>> {
        let mut shapes: Vec<BandShape<Self::BandId>> = self
            .left
            .band_shapes()
            .into_iter()
            .map(|s| BandShape {
                id: EitherId::Left(s.id),
                m1: s.m1,
                m2: s.m2,
            })
            .collect();
        shapes.extend(self.right.band_shapes().into_iter().map(|s| BandShape {
            id: EitherId::Right(s.id),
            m1: s.m1,
            m2: s.m2,
        }));
        shapes
    }

    fn analysis(&self, f: &Grid2D) -> Result<FrameCoeffs<Self::BandId>> {
        let a = self.left.analysis(f)?;
        let b = self.right.analysis(f)?;
        let mut bands: Vec<BandCoeffs<Self::BandId>> = a
            .bands
            .into_iter()
            .map(|band| BandCoeffs {
                id: EitherId::Left(band.id),
                m1: band.m1,
                m2: band.m2,
                values: band.values,
            })
            .collect();
        bands.extend(b.bands.into_iter().map(|band| BandCoeffs {
            id: EitherId::Right(band.id),
            m1: band.m1,
            m2: band.m2,
            values: band.values,
        }));
        Ok(FrameCoeffs { n: f.n(), bands })
    }

    fn synthesis(&self, coeffs: &FrameCoeffs<Self::BandId>) -> Result<Grid2D> {
        let n_left = self.left.band_shapes().len();
        let split = |range: std::ops::Range<usize>| -> Vec<usize> { range.collect() };
        let left_idx = split(0..n_left);
        let right_idx = split(n_left..coeffs.bands.len());
        let left = FrameCoeffs {
            n: coeffs.n,
            bands: left_idx
                .iter()
                .map(|&i| {
                    let b = &coeffs.bands[i];
                    let EitherId::Left(id) = b.id else {
                        panic!("band order does not match the pair frame");
                    };
                    BandCoeffs {
                        id,
                        m1: b.m1,
                        m2: b.m2,
                        values: b.values.clone(),
                    }
                })
                .collect(),
        };
        let right = FrameCoeffs {
            n: coeffs.n,
            bands: right_idx
                .iter()
                .map(|&i| {
                    let b = &coeffs.bands[i];
                    let EitherId::Right(id) = b.id else {
                        panic!("band order does not match the pair frame");
                    };
                    BandCoeffs {
                        id,
                        m1: b.m1,
                        m2: b.m2,
                        values: b.values.clone(),
                    }
                })
                .collect(),
        };
        let mut out = self.left.synthesis(&left)?;
        let g = self.right.synthesis(&right)?;
        out.add_scaled(&g, 1.0);
        Ok(out)
    }

    fn tiling(&self) -> Spectrum2D {
        let mut t = self.left.tiling();
        let u = self.right.tiling();
        for (a, b) in t.values_mut().iter_mut().zip(u.values()) {
            *a += b;
        }
        t
    }

    fn atom_spectrum(&self, band: usize, k1: usize, k2: usize) -> Spectrum2D {
        let n_left = self.left.band_shapes().len();
        if band < n_left {
            self.left.atom_spectrum(band, k1, k2)
        } else {
            self.right.atom_spectrum(band - n_left, k1, k2)
        }
    }

    fn atom_norms(&self) -> Vec<f64> {
        let mut norms = self.left.atom_norms();
        norms.extend(self.right.atom_norms());
        norms
    }
}
