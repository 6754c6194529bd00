//! Discrete Parseval frames (2D Meyer wavelets and cone-adapted
//! shearlets) on the unit torus, a masked line-singularity model, sparse
//! recovery by analysis-side l1 minimization and thresholding, and
//! cluster-coherence diagnostics.

pub mod diagnostics;
pub mod error;
mod fft;
pub mod frame;
pub mod grid;
pub mod meyer;
pub mod model;
pub mod recovery;
pub mod shearlet;

pub use error::{CoreError, Result};
pub use frame::{BandCoeffs, Frame, FrameCoeffs};
pub use grid::{Grid2D, Spectrum2D, dft, idft};
pub use rustfft::num_complex::Complex64;
