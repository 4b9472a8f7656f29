use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;

use mompca_core::datagen::{lowrank_clean, lowrank_with_outliers, SyntheticDataset};
use mompca_core::metrics::relative_reconstruction_error;
use mompca_core::{Config, Error};

use crate::util::{manifest_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct BenchArgs {
    /// Observations per dataset.
    #[arg(long)]
    pub n: usize,
    /// Features per observation.
    #[arg(long)]
    pub p: usize,
    /// True rank of the planted low-rank matrix.
    #[arg(long)]
    pub r: usize,
    /// Fitted subspace dimension (default: the true rank).
    #[arg(long)]
    pub d: Option<usize>,
    /// Block count (default: 3 * floor(sqrt(n)), which keeps a majority of
    /// blocks clean against the floor(sqrt(n)) injected outliers).
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent repetitions with derived seeds seed, seed+1, ...
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Generate clean data (no outlier rows injected).
    #[arg(long)]
    pub clean: bool,
    /// Median-center before fitting. The generator produces mean-zero data
    /// and the error metric compares raw projections, so centering is off by
    /// default here.
    #[arg(long)]
    pub center: bool,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Output CSV table.
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump each generated dataset (corrupted data, clean ground truth,
    /// outlier row indices) as CSV files into this directory.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
}

struct RunOutcome {
    seed: u64,
    robust: f64,
    classical: f64,
}

pub fn run(args: BenchArgs) -> Result<(), Error> {
    if args.repeats == 0 {
        return Err(Error::InvalidInput("need at least one repeat".into()));
    }
    let d = args.d.unwrap_or(args.r);
    let l = args
        .l
        .unwrap_or_else(|| (3 * (args.n as f64).sqrt().floor() as usize).clamp(1, args.n));
    if !args.clean {
        let outliers = (args.n as f64).sqrt().floor();
        if l as f64 <= 2.5 * outliers {
            eprintln!(
                "warning: L = {l} leaves no clean majority against the {outliers} injected \
                 outlier rows (want L > 2.5 * {outliers}); the robust fit may degrade"
            );
        }
    }

    let mut outcomes = Vec::with_capacity(args.repeats);
    for rep in 0..args.repeats {
        let seed = args.seed + rep as u64;
        let ds: SyntheticDataset<f64> = if args.clean {
            lowrank_clean(args.n, args.p, args.r, seed)?
        } else {
            lowrank_with_outliers(args.n, args.p, args.r, seed)?
        };
        if let Some(dir) = &args.dump_dir {
            dump_dataset(&ds, dir, seed)?;
        }
        let robust = fit_and_score(&ds, d, l, &args, seed)?;
        let classical = fit_and_score(&ds, d, 1, &args, seed)?;
        outcomes.push(RunOutcome {
            seed,
            robust,
            classical,
        });
    }

    let mean = |f: fn(&RunOutcome) -> f64| -> f64 {
        outcomes.iter().map(f).sum::<f64>() / outcomes.len() as f64
    };
    let mean_robust = mean(|o| o.robust);
    let mean_classical = mean(|o| o.classical);

    let mut csv = String::new();
    csv.push_str("repeat,seed,n,p,r,d,l,relative_error_mompca,relative_error_classical\n");
    for (rep, o) in outcomes.iter().enumerate() {
        writeln!(
            csv,
            "{rep},{},{},{},{},{d},{l},{},{}",
            o.seed, args.n, args.p, args.r, o.robust, o.classical
        )
        .expect("writing to a string");
    }
    writeln!(
        csv,
        "mean,,{},{},{},{d},{l},{mean_robust},{mean_classical}",
        args.n, args.p, args.r
    )
    .expect("writing to a string");
    write_atomic(&args.out, csv.as_bytes())?;

    let mut manifest = RunManifest::new("bench", args.seed);
    manifest
        .param("n", args.n)
        .param("p", args.p)
        .param("r", args.r)
        .param("d", d)
        .param("l", l)
        .param("repeats", args.repeats)
        .param("clean", args.clean)
        .param("center", args.center)
        .param("tol", args.tol)
        .param("max_iter", args.max_iter)
        .param("mean_relative_error_mompca", mean_robust)
        .param("mean_relative_error_classical", mean_classical);
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))?;

    println!(
        "bench: n={} p={} r={} d={d} L={l}, {} repeat(s){}",
        args.n,
        args.p,
        args.r,
        args.repeats,
        if args.clean { ", clean data" } else { "" }
    );
    println!("  seed   median-of-means   classical (L=1)");
    for o in &outcomes {
        println!("  {:4}   {:15.6e}   {:15.6e}", o.seed, o.robust, o.classical);
    }
    println!("  mean   {mean_robust:15.6e}   {mean_classical:15.6e}");
    println!("  table -> {}", args.out.display());
    Ok(())
}

fn dump_dataset(ds: &SyntheticDataset<f64>, dir: &Path, seed: u64) -> Result<(), Error> {
    let mut data = Vec::new();
    mompca_core::csvio::write_matrix(&ds.data, &mut data)?;
    write_atomic(&dir.join(format!("data_{seed}.csv")), &data)?;

    let mut clean = Vec::new();
    mompca_core::csvio::write_matrix(&ds.clean, &mut clean)?;
    write_atomic(&dir.join(format!("clean_{seed}.csv")), &clean)?;

    let mut rows = String::from("outlier_row\n");
    for r in &ds.outlier_rows {
        writeln!(rows, "{r}").expect("writing to a string");
    }
    write_atomic(&dir.join(format!("outlier_rows_{seed}.csv")), rows.as_bytes())
}

fn fit_and_score(
    ds: &SyntheticDataset<f64>,
    d: usize,
    l: usize,
    args: &BenchArgs,
    seed: u64,
) -> Result<f64, Error> {
    let mut config = Config::new(d, l).with_seed(seed);
    config.eta = args.eta;
    config.tol = args.tol;
    config.max_iter = args.max_iter;
    config.centering = args.center;
    let model = mompca_core::mompca::fit(&ds.data, &config)?;
    let recon = model.reconstruct(&ds.data)?;
    let inliers = ds.inlier_rows();
    relative_reconstruction_error(&recon, &ds.clean, &inliers)
}
