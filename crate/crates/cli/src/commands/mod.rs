pub mod anomaly;
pub mod background;
pub mod bench;
pub mod bounds;
pub mod fit;
pub mod transform;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use mompca_core::csvio;
use mompca_core::{Error, Matrix};

pub fn read_csv_matrix(path: &Path) -> Result<Matrix, Error> {
    let file = File::open(path)?;
    csvio::read_matrix(BufReader::new(file))
}

pub fn read_csv_labels(path: &Path) -> Result<Vec<bool>, Error> {
    let file = File::open(path)?;
    csvio::read_labels(BufReader::new(file))
}
