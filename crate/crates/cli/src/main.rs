//! `inpaint` command line: frame checks, experiment sweeps, demo
//! inpainting, coherence diagnostics, phase-space portraits and plots.

use clap::{Parser, Subcommand};
use inpaint_cli::config::{CliError, CliResult, Config};
use inpaint_cli::{demo, plot, sweep};
use inpaint_core::frame::Frame;
use inpaint_core::grid::{Grid2D, Spectrum2D, export_pgm, idft, read_pgm, two_pow};
use inpaint_core::meyer::MeyerFrame;
use inpaint_core::model::{LineModelSpec, MaskSpec, filtered_line_image, grid_side_for_level};
use inpaint_core::shearlet::ShearletFrame;
use inpaint_core::Complex64;
use rand::prelude::*;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "inpaint",
    about = "Parseval wavelet/shearlet frames, strip-mask inpainting and cluster-coherence experiments"
)]
struct Cli {
    /// Configuration file (flat `key = value` lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Random seed override
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the frequency partition of unity of both frames
    TilingCheck {
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Verify tightness on random band-limited signals
    ParsevalCheck {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Run the configured experiment sweep, writing sweep.csv
    Sweep,
    /// Inpaint an image (PGM P5) or the built-in synthetic section
    Demo {
        /// Input image; a synthetic section is generated when omitted
        #[arg(long)]
        image: Option<PathBuf>,
        /// Vertical bars `center:half_width,...` in torus units
        #[arg(long, default_value = "0.28:0.012,0.55:0.02,0.8:0.012")]
        bars: String,
    },
    /// Cluster coherence, concentration and bound report for one cell
    Coherence {
        #[arg(long, default_value_t = 3)]
        level: i32,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Phase-space portrait of the (masked) line image
    Portrait {
        #[arg(long, default_value_t = 3)]
        level: i32,
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        #[arg(long, default_value_t = 128)]
        res: usize,
    },
    /// Render a sweep CSV as an SVG plot
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out_svg: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    Ok(cfg)
}

fn ensure_out(dir: &PathBuf) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::TilingCheck { n } => tiling_check(*n),
        Command::ParsevalCheck { n, trials } => parseval_check(*n, *trials, &cfg),
        Command::Sweep => {
            ensure_out(&cli.out)?;
            let sweep_cfg = sweep::SweepConfig::from_config(&cfg)?;
            let records = sweep::run_sweep(&sweep_cfg)?;
            let path = cli.out.join("sweep.csv");
            sweep::write_csv(&records, &path)?;
            println!("{}", sweep::CSV_HEADER);
            for r in &records {
                println!("{}", r.csv_row());
            }
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Demo { image, bars } => {
            ensure_out(&cli.out)?;
            let img = match image {
                Some(path) => read_pgm(path).map_err(|e| CliError::Io(e.to_string()))?,
                None => demo::synthetic_seismic(256)?,
            };
            let bars = demo::parse_bars(bars)?;
            let report = demo::run_demo(&img, &bars, &cfg, &cli.out)?;
            println!("frame,psnr_masked_db");
            for row in &report.rows {
                println!("{},{}", row.frame, row.psnr_masked);
            }
            eprintln!(
                "masked {} columns; outputs in {}",
                report.masked_cols,
                cli.out.display()
            );
            Ok(())
        }
        Command::Coherence { level, h } => coherence_report(&cfg, *level, *h),
        Command::Portrait { level, h, res } => {
            ensure_out(&cli.out)?;
            portrait(&cfg, *level, *h, *res, &cli.out)
        }
        Command::Plot { csv, out_svg } => plot::plot_sweep(csv, out_svg),
    }
}

fn tiling_check(n: usize) -> CliResult<()> {
    let meyer = MeyerFrame::full(n)?;
    let shear = ShearletFrame::full(n)?;
    for (name, frame_tiling) in [
        ("meyer", meyer.tiling()),
        ("shearlet", shear.tiling()),
    ] {
        let worst = frame_tiling
            .values()
            .iter()
            .map(|v| (v.re - 1.0).abs().max(v.im.abs()))
            .fold(0.0, f64::max);
        println!("{name}: max |tiling - 1| = {worst:.3e} over the whole {n}x{n} grid");
        if worst > 1e-10 {
            return Err(CliError::Config(format!(
                "{name} tiling deviates by {worst:.3e} (tolerance 1e-10)"
            )));
        }
    }
    Ok(())
}

fn random_bandlimited(n: usize, max_freq: i64, rng: &mut impl Rng) -> Grid2D {
    let mut s = Spectrum2D::zeros(n).expect("valid side");
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

fn parseval_check(n: usize, trials: usize, cfg: &Config) -> CliResult<()> {
    let seed = cfg.u64_or("seed", 0)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let meyer = MeyerFrame::full(n)?;
    let shear = ShearletFrame::full(n)?;
    let band = (n / 4) as i64;
    let mut worst_tight = 0.0f64;
    let mut worst_rt = 0.0f64;
    let mut check = |coeffs_energy: f64, back: Grid2D, f: &Grid2D| {
        worst_tight = worst_tight.max((coeffs_energy.sqrt() / f.norm() - 1.0).abs());
        let mut diff = back;
        diff.add_scaled(f, -1.0);
        worst_rt = worst_rt.max(diff.norm() / f.norm());
    };
    for _ in 0..trials {
        let f = random_bandlimited(n, band, &mut rng);
        let mc = meyer.analysis(&f)?;
        check(mc.sum_sq(), meyer.synthesis(&mc)?, &f);
        let sc = shear.analysis(&f)?;
        check(sc.sum_sq(), shear.synthesis(&sc)?, &f);
    }
    println!(
        "{trials} trials at n={n}: max |energy ratio - 1| = {worst_tight:.3e}, max round-trip residual = {worst_rt:.3e}"
    );
    if worst_tight > 1e-8 || worst_rt > 1e-8 {
        return Err(CliError::Config(
            "tightness deviates beyond 1e-8".to_string(),
        ));
    }
    Ok(())
}

fn coherence_report(cfg: &Config, level: i32, h_override: Option<f64>) -> CliResult<()> {
    use inpaint_core::diagnostics::*;
    let sweep_cfg = sweep::SweepConfig::from_config(cfg)?;
    let n = grid_side_for_level(level);
    let spec = LineModelSpec::new(sweep_cfg.rho)?;
    let x0 = filtered_line_image(&spec, level, n)?;
    let h = h_override.unwrap_or(sweep_cfg.h_law.h_at(sweep_cfg.h_c0, level));
    let mask = MaskSpec::strip(n, h, sweep_cfg.rho)?;
    let seed = cfg.u64_or("diag.seed", 7)?;

    // Diagnostics on the carrier scales of the wavelet experiment.
    let carrier = MeyerFrame::new(n, &[2 * level, 2 * level + 1], None)?;
    let cluster = ClusterSet::wavelet(level, sweep_cfg.epsilon, sweep_cfg.rho)?;
    let member = |id, c1, c2| cluster.contains_meyer(id, c1, c2);
    let mu = wavelet_cluster_coherence(&carrier, &mask, &cluster)?;
    let kappa = concentration_estimate(&carrier, &mask, member, 20, seed)?;
    let coeffs = carrier.analysis(&x0)?;
    let delta = clustered_sparsity_delta(&coeffs, member);
    let mass = masked_cluster_mass(&carrier, &mask, &x0, member)?;
    let report = error_bounds(delta, mu, kappa, 0.0, frame_norm_constant(&carrier), mass);
    println!("frame,level,h,mu_c,kappa_hat,delta,masked_mass,bound_l1,bound_thresh,valid");
    println!(
        "meyer,{level},{h},{mu},{kappa},{delta},{mass},{},{},{}",
        report.bound_l1, report.bound_thresh, report.valid
    );
    Ok(())
}

fn portrait(cfg: &Config, level: i32, h: f64, res: usize, out: &PathBuf) -> CliResult<()> {
    use inpaint_core::diagnostics::phase_space_portrait;
    let rho = cfg.f64_or("rho", inpaint_core::model::DEFAULT_RHO)?;
    let n = grid_side_for_level(level);
    let spec = LineModelSpec::new(rho)?;
    let x0 = filtered_line_image(&spec, level, n)?;
    let img = if h > 0.0 {
        MaskSpec::strip(n, h, rho)?.apply_known(&x0)
    } else {
        x0
    };
    let p = phase_space_portrait(&img, two_pow(-level), 1.5, res)?;
    let path = out.join(format!("portrait_j{level}.pgm"));
    export_pgm(&p, &path, None)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
