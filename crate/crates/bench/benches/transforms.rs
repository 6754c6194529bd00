//! Criterion benchmarks of the transform and solver hot paths.

use criterion::{Criterion, criterion_group, criterion_main};
use inpaint_core::Complex64;
use inpaint_core::frame::Frame;
use inpaint_core::grid::{Grid2D, Spectrum2D, dft, idft};
use inpaint_core::meyer::MeyerFrame;
use inpaint_core::model::{DEFAULT_RHO, LineModelSpec, MaskSpec, filtered_line_image};
use inpaint_core::recovery::{L1Options, l1_inpaint};
use inpaint_core::shearlet::ShearletFrame;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn bandlimited(n: usize, seed: u64) -> Grid2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Spectrum2D::zeros(n).unwrap();
    let b = (n / 4) as i64;
    for xi1 in -b..=b {
        for xi2 in -b..=b {
            s.set_freq(
                xi1,
                xi2,
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            );
        }
    }
    idft(&s)
}

fn bench_transforms(c: &mut Criterion) {
    let n = 256;
    let f = bandlimited(n, 1);
    c.bench_function("dft_256", |b| b.iter(|| dft(&f)));

    let meyer = MeyerFrame::full(n).unwrap();
    c.bench_function("meyer_analysis_256", |b| b.iter(|| meyer.analysis(&f).unwrap()));
    let mc = meyer.analysis(&f).unwrap();
    c.bench_function("meyer_synthesis_256", |b| b.iter(|| meyer.synthesis(&mc).unwrap()));

    let shear = ShearletFrame::full(n).unwrap();
    c.bench_function("shearlet_analysis_256", |b| {
        b.iter(|| shear.analysis(&f).unwrap())
    });
    let sc = shear.analysis(&f).unwrap();
    c.bench_function("shearlet_synthesis_256", |b| {
        b.iter(|| shear.synthesis(&sc).unwrap())
    });
}

fn bench_solver(c: &mut Criterion) {
    let spec = LineModelSpec::new(DEFAULT_RHO).unwrap();
    let n = 128;
    let img = filtered_line_image(&spec, 3, n).unwrap();
    let mask = MaskSpec::strip(n, 0.02, DEFAULT_RHO).unwrap();
    let known = mask.apply_known(&img);
    let frame = ShearletFrame::full(n).unwrap();
    let opts = L1Options {
        max_iter: 10,
        tol: 0.0,
        noise_eps: 0.0,
        step_product: 0.9,
    };
    c.bench_function("l1_ten_iterations_128", |b| {
        b.iter(|| l1_inpaint(&known, &mask, &frame, &opts).unwrap())
    });
}

criterion_group!(benches, bench_transforms, bench_solver);
criterion_main!(benches);
