use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use mompca_core::anomaly::{anomaly_scores, label_top_fraction};
use mompca_core::metrics::{precision_recall_f1, PrfScores};
use mompca_core::{Error, Model};

use super::{read_csv_labels, read_csv_matrix};
use crate::util::{manifest_path, suffixed_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct AnomalyArgs {
    /// Observations to score.
    #[arg(long)]
    pub input: PathBuf,
    /// Fitted model JSON; omit to fit on the input first.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Known outlier fraction o in (0, 1): the largest ceil(o*N) scores are
    /// labeled outliers.
    #[arg(long)]
    pub fraction: f64,
    /// Ground-truth labels (single 0/1 column); enables the metrics block.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output CSV of (index, score, label).
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics JSON path (default `<out>.metrics.json`; only with --truth).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,

    // fit parameters, used only when --model is omitted
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_center: bool,
}

#[derive(Serialize)]
struct AnomalyMetrics {
    fraction: f64,
    labeled: usize,
    threshold: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    precision_undefined: bool,
    recall_undefined: bool,
    f1_undefined: bool,
}

pub fn run(args: AnomalyArgs) -> Result<(), Error> {
    let x = read_csv_matrix(&args.input)?;
    let (model, fitted_here) = match &args.model {
        Some(path) => (Model::from_json(&fs::read_to_string(path)?)?, false),
        None => {
            let d = args.d.ok_or_else(|| {
                Error::InvalidInput("either --model or --d must be given".into())
            })?;
            let config = super::fit::build_config(
                d,
                args.l,
                args.eta,
                args.tol,
                args.max_iter,
                args.seed,
                args.no_center,
                false,
                x.n_rows(),
            );
            let expected_outliers = (args.fraction * x.n_rows() as f64).ceil();
            eprintln!(
                "note: with o = {} expect about {expected_outliers} outliers; the \
                 majority-of-clean-blocks condition suggests L > {:.0} (using L = {})",
                args.fraction,
                3.0 * expected_outliers,
                config.block_count
            );
            (mompca_core::mompca::fit(&x, &config)?, true)
        }
    };

    let scores = anomaly_scores(&model, &x)?;
    let result = label_top_fraction(&scores, args.fraction)?;

    let mut csv = String::new();
    csv.push_str("index,score,label\n");
    for (i, (&score, &label)) in result.scores.iter().zip(&result.labels).enumerate() {
        writeln!(csv, "{i},{score},{}", u8::from(label)).expect("writing to a string");
    }
    write_atomic(&args.out, csv.as_bytes())?;

    let mut manifest = RunManifest::new("anomaly", model.config().seed);
    manifest
        .param("fraction", args.fraction)
        .param("threshold", result.threshold)
        .param("fitted_here", fitted_here)
        .param("d", model.subspace_dim())
        .param("l", model.config().block_count)
        .param("input", args.input.display().to_string());
    manifest.input(&args.input)?;
    if let Some(path) = &args.model {
        manifest.input(path)?;
    }
    manifest.output(&args.out);

    let labeled = result.labels.iter().filter(|&&l| l).count();
    println!(
        "anomaly: scored {} observations, labeled {} (threshold {:.6e}) -> {}",
        x.n_rows(),
        labeled,
        result.threshold,
        args.out.display()
    );

    if let Some(truth_path) = &args.truth {
        let truth = read_csv_labels(truth_path)?;
        let prf: PrfScores = precision_recall_f1(&result.labels, &truth)?;
        let metrics = AnomalyMetrics {
            fraction: args.fraction,
            labeled,
            threshold: result.threshold,
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
            precision_undefined: prf.precision_undefined,
            recall_undefined: prf.recall_undefined,
            f1_undefined: prf.f1_undefined,
        };
        let metrics_out = args
            .metrics_out
            .clone()
            .unwrap_or_else(|| suffixed_path(&args.out, ".metrics.json"));
        let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
        write_atomic(&metrics_out, json.as_bytes())?;
        manifest.input(truth_path)?;
        manifest.output(&metrics_out);
        println!(
            "         precision {:.4}, recall {:.4}, f1 {:.4} -> {}",
            prf.precision,
            prf.recall,
            prf.f1,
            metrics_out.display()
        );
    }

    manifest.write(&manifest_path(&args.out))?;
    Ok(())
}
