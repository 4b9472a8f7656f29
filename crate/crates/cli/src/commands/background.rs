use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;

use mompca_core::background::{
    object_map_to_frame, read_pgm, separate, write_pgm, Frame, FrameSequence,
};
use mompca_core::{Config, Error};

use crate::util::{manifest_path, write_atomic, RunManifest};

#[derive(Args)]
pub struct BackgroundArgs {
    /// Directory of binary PGM frames, processed in filename order
    /// (e.g. 000000.pgm, 000001.pgm, ...).
    #[arg(long)]
    pub frames: PathBuf,
    /// Output directory for background frames and the object map.
    #[arg(long)]
    pub out: PathBuf,
    /// Fitted subspace dimension.
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    /// Block count over the pixel observations.
    #[arg(long, default_value_t = 40)]
    pub l: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

pub fn run(args: BackgroundArgs) -> Result<(), Error> {
    let frame_paths = list_pgm_files(&args.frames)?;
    if frame_paths.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two .pgm frames in {}",
            args.frames.display()
        )));
    }
    let mut frames = Vec::with_capacity(frame_paths.len());
    for path in &frame_paths {
        let file = File::open(path)?;
        frames.push(read_pgm(BufReader::new(file))?);
    }
    let seq = FrameSequence::new(frames)?;

    let mut config = Config::new(args.d, args.l).with_seed(args.seed);
    config.eta = args.eta;
    config.tol = args.tol;
    config.max_iter = args.max_iter;
    let separation = separate(&seq, &config)?;

    fs::create_dir_all(&args.out)?;
    let mut outputs = Vec::new();
    for (i, frame) in separation.background.frames().iter().enumerate() {
        let path = args.out.join(format!("background_{i:06}.pgm"));
        write_frame_atomic(frame, &path)?;
        outputs.push(path);
    }
    let map_frame = object_map_to_frame(&separation.object_map, seq.width(), seq.height())?;
    let map_pgm = args.out.join("object_map.pgm");
    write_frame_atomic(&map_frame, &map_pgm)?;
    outputs.push(map_pgm);

    let mut map_csv = String::from("pixel,l1_residual\n");
    for (i, v) in separation.object_map.iter().enumerate() {
        writeln!(map_csv, "{i},{v}").expect("writing to a string");
    }
    let map_csv_path = args.out.join("object_map.csv");
    write_atomic(&map_csv_path, map_csv.as_bytes())?;
    outputs.push(map_csv_path);

    let manifest_target = args.out.join("run");
    let mut manifest = RunManifest::new("background", args.seed);
    manifest
        .param("d", args.d)
        .param("l", args.l)
        .param("tol", args.tol)
        .param("max_iter", args.max_iter)
        .param("frames", args.frames.display().to_string())
        .param("frame_count", seq.frame_count())
        .param("width", seq.width())
        .param("height", seq.height());
    for path in &frame_paths {
        manifest.input(path)?;
    }
    for path in &outputs {
        manifest.output(path);
    }
    manifest.write(&manifest_path(&manifest_target))?;

    let report = separation.model.report();
    println!(
        "background: {} frames of {}x{} -> {} pixel observations, d = {}, L = {}",
        seq.frame_count(),
        seq.width(),
        seq.height(),
        seq.width() * seq.height(),
        args.d,
        args.l
    );
    println!(
        "            {} iterations, converged = {}; outputs in {}",
        report.iterations_run,
        report.converged,
        args.out.display()
    );
    Ok(())
}

fn list_pgm_files(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    Ok(paths)
}

fn write_frame_atomic(frame: &Frame, path: &Path) -> Result<(), Error> {
    let mut bytes = Vec::with_capacity(frame.pixels.len() + 32);
    write_pgm(frame, &mut bytes)?;
    write_atomic(path, &bytes)
}
