//! Shared FFT plumbing: cached rustfft plans and in-place 2D transforms
//! over row-major `Vec<Complex64>` buffers.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Fetch (or create) a cached plan of the given length and direction.
pub fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = plan_cache().lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, dir)
        })
        .clone()
}

/// Unnormalized in-place 2D transform of a `rows x cols` row-major buffer.
///
/// `inverse = false` applies `sum exp(-2*pi*i*...)` along both axes,
/// `inverse = true` the conjugate kernel. No 1/N scaling is applied.
pub fn fft2_inplace(values: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    assert_eq!(values.len(), rows * cols, "buffer does not match shape");
    if rows == 0 || cols == 0 {
        return;
    }
    let row_plan = plan(cols, inverse);
    let mut scratch = vec![Complex64::default(); row_plan.get_inplace_scratch_len()];
    for r in 0..rows {
        row_plan.process_with_scratch(&mut values[r * cols..(r + 1) * cols], &mut scratch);
    }
    let col_plan = plan(rows, inverse);
    let mut col = vec![Complex64::default(); rows];
    let mut scratch = vec![Complex64::default(); col_plan.get_inplace_scratch_len()];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = values[r * cols + c];
        }
        col_plan.process_with_scratch(&mut col, &mut scratch);
        for r in 0..rows {
            values[r * cols + c] = col[r];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_then_inverse_is_scaled_identity() {
        let rows = 4;
        let cols = 8;
        let orig: Vec<Complex64> = (0..rows * cols)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let mut buf = orig.clone();
        fft2_inplace(&mut buf, rows, cols, false);
        fft2_inplace(&mut buf, rows, cols, true);
        let scale = (rows * cols) as f64;
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }
}
