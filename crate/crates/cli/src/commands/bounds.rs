use std::path::PathBuf;

use clap::Args;

use mompca_core::metrics::{deviation_bound, deviation_bound_unchecked, sample_moments};
use mompca_core::Error;

use super::{read_csv_labels, read_csv_matrix};
use crate::util::{manifest_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub d: usize,
    /// Total observation count N.
    #[arg(long)]
    pub n: usize,
    /// Block count L.
    #[arg(long)]
    pub l: usize,
    /// Outlier count |O|.
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
    /// Slack eta in the L > (2 + eta)|O| condition.
    #[arg(long, default_value_t = 1.0)]
    pub eta_slack: f64,
    /// Second moment of the inlier norm distribution.
    #[arg(long)]
    pub mu2: Option<f64>,
    /// Fourth moment of the inlier norm distribution.
    #[arg(long)]
    pub mu4: Option<f64>,
    /// Estimate the moments from this sample instead of --mu2/--mu4.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Truth labels for the sample; moments use inlier rows only.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Evaluate the formulas even when the assumptions fail (warn only).
    #[arg(long)]
    pub force: bool,
    /// Output report JSON.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: BoundsArgs) -> Result<(), Error> {
    let mut moments_source = "flags";
    let (mu2, mu4) = match (&args.sample, args.mu2, args.mu4) {
        (Some(path), _, _) => {
            let x = read_csv_matrix(path)?;
            let moments = match &args.truth {
                Some(truth_path) => {
                    let truth = read_csv_labels(truth_path)?;
                    if truth.len() != x.n_rows() {
                        return Err(Error::LengthMismatch {
                            left: truth.len(),
                            right: x.n_rows(),
                        });
                    }
                    let inlier_rows: Vec<usize> = truth
                        .iter()
                        .enumerate()
                        .filter_map(|(i, &is_outlier)| (!is_outlier).then_some(i))
                        .collect();
                    moments_source = "sample (inlier rows)";
                    sample_moments(&x, Some(&inlier_rows))
                }
                None => {
                    moments_source = "sample (all rows)";
                    sample_moments(&x, None)
                }
            };
            moments
        }
        (None, Some(mu2), Some(mu4)) => (mu2, mu4),
        _ => {
            return Err(Error::InvalidInput(
                "supply either --sample or both --mu2 and --mu4".into(),
            ))
        }
    };

    let n_inliers = args.n.saturating_sub(args.outliers);
    let report = match deviation_bound(
        args.p,
        args.d,
        mu2,
        mu4,
        args.n,
        args.l,
        args.outliers,
        n_inliers,
        args.eta_slack,
    ) {
        Ok(report) => report,
        Err(Error::AssumptionViolated(msg)) if args.force => {
            eprintln!("warning: {msg}; evaluating the formulas anyway (--force)");
            deviation_bound_unchecked(
                args.p,
                args.d,
                mu2,
                mu4,
                args.n,
                args.l,
                args.outliers,
                n_inliers,
                args.eta_slack,
            )?
        }
        Err(e) => return Err(e),
    };

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&args.out, json.as_bytes())?;

    let mut manifest = RunManifest::new("bounds", 0);
    manifest
        .param("p", args.p)
        .param("d", args.d)
        .param("n", args.n)
        .param("l", args.l)
        .param("outliers", args.outliers)
        .param("eta_slack", args.eta_slack)
        .param("mu2", mu2)
        .param("mu4", mu4)
        .param("moments_source", moments_source)
        .param("force", args.force);
    if let Some(path) = &args.sample {
        manifest.input(path)?;
    }
    if let Some(path) = &args.truth {
        manifest.input(path)?;
    }
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))?;

    println!(
        "bounds: C(P) = {:.6e}, C = {:.6e}, deviation <= {:.6e} with probability >= {:.6}",
        report.c_of_p, report.c_const, report.deviation_bound, report.success_probability
    );
    println!("        report -> {}", args.out.display());
    Ok(())
}
