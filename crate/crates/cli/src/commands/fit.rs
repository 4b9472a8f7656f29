use std::path::PathBuf;

use clap::Args;

use mompca_core::{Config, Error};

use super::read_csv_matrix;
use crate::util::{default_block_count, manifest_path, suffixed_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct FitArgs {
    /// Input observations, one row per observation.
    #[arg(long)]
    pub input: PathBuf,
    /// Target subspace dimension d.
    #[arg(long)]
    pub d: usize,
    /// Block count L. Default: max(3, 3*ceil(sqrt(N))) capped at N/10 — a
    /// majority of blocks stays clean as long as the outlier count is below
    /// about a third of L (the L > (2+eta)|O| condition with eta = 1).
    #[arg(long)]
    pub l: Option<usize>,
    /// Step size. Default: reciprocal of the median block's top mean-scatter
    /// eigenvalue, a scale-free choice.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Relative objective tolerance of the stopping test.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the robust median-centering step.
    #[arg(long)]
    pub no_center: bool,
    /// Redraw the partition every iteration (experimental).
    #[arg(long)]
    pub repartition: bool,
    /// Where to write the fitted model JSON.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Where to write the full fit report JSON (default: alongside the
    /// model as `<model-out>.report.json`).
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

pub fn build_config(
    d: usize,
    l: Option<usize>,
    eta: Option<f64>,
    tol: f64,
    max_iter: usize,
    seed: u64,
    no_center: bool,
    repartition: bool,
    n: usize,
) -> Config {
    let block_count = l.unwrap_or_else(|| {
        let picked = default_block_count(n);
        eprintln!(
            "using L = {picked} for N = {n}: majority-of-clean-blocks needs \
             L > (2+eta)|outliers|, so this tolerates about {} outliers",
            picked / 3
        );
        picked
    });
    let mut config = Config::new(d, block_count).with_seed(seed);
    config.eta = eta;
    config.tol = tol;
    config.max_iter = max_iter;
    config.centering = !no_center;
    config.repartition_each_iter = repartition;
    config
}

pub fn run(args: FitArgs) -> Result<(), Error> {
    let x = read_csv_matrix(&args.input)?;
    let config = build_config(
        args.d,
        args.l,
        args.eta,
        args.tol,
        args.max_iter,
        args.seed,
        args.no_center,
        args.repartition,
        x.n_rows(),
    );
    let model = mompca_core::mompca::fit(&x, &config)?;

    write_atomic(&args.model_out, model.to_json().as_bytes())?;
    let report_out = args
        .report_out
        .clone()
        .unwrap_or_else(|| suffixed_path(&args.model_out, ".report.json"));
    let report_json =
        serde_json::to_string_pretty(model.report()).expect("report serializes");
    write_atomic(&report_out, report_json.as_bytes())?;

    let mut manifest = RunManifest::new("fit", args.seed);
    manifest
        .param("d", config.subspace_dim)
        .param("l", config.block_count)
        .param("eta", model.resolved_eta())
        .param("tol", config.tol)
        .param("max_iter", config.max_iter)
        .param("centering", config.centering)
        .param("repartition", config.repartition_each_iter)
        .param("input", args.input.display().to_string());
    manifest.input(&args.input)?;
    manifest.output(&args.model_out).output(&report_out);
    manifest.write(&manifest_path(&args.model_out))?;

    let report = model.report();
    println!(
        "fit: {} observations x {} features -> d = {}, L = {}",
        x.n_rows(),
        x.n_cols(),
        config.subspace_dim,
        config.block_count
    );
    println!(
        "     {} iterations, converged = {}, objective {:.6e} -> {:.6e} (best {:.6e}), eta = {:.6e}",
        report.iterations_run,
        report.converged,
        report.initial_objective().unwrap_or(f64::NAN),
        report.final_objective().unwrap_or(f64::NAN),
        report.best_objective().unwrap_or(f64::NAN),
        model.resolved_eta()
    );
    println!("     model -> {}", args.model_out.display());
    Ok(())
}
