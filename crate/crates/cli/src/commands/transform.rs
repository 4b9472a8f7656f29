use std::fs;
use std::path::PathBuf;

use clap::Args;

use mompca_core::{csvio, Error, Model};

use super::read_csv_matrix;
use crate::util::{manifest_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct TransformArgs {
    /// Observations to project, one row each.
    #[arg(long)]
    pub input: PathBuf,
    /// Fitted model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Output CSV of scores (one row per observation, d columns).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: TransformArgs) -> Result<(), Error> {
    let x = read_csv_matrix(&args.input)?;
    let model = Model::from_json(&fs::read_to_string(&args.model)?)?;
    let scores = model.transform(&x)?;

    let mut buf = Vec::new();
    csvio::write_matrix(&scores, &mut buf)?;
    write_atomic(&args.out, &buf)?;

    let mut manifest = RunManifest::new("transform", model.config().seed);
    manifest
        .param("input", args.input.display().to_string())
        .param("model", args.model.display().to_string())
        .param("d", model.subspace_dim());
    manifest.input(&args.input)?;
    manifest.input(&args.model)?;
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))?;

    println!(
        "transform: {} observations -> {} scores of dimension {} -> {}",
        x.n_rows(),
        scores.n_rows(),
        scores.n_cols(),
        args.out.display()
    );
    Ok(())
}
