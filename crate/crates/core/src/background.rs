//! Video background/foreground separation over grayscale frame sequences.
//!
//! Each pixel becomes one observation: its value across the f frames is a
//! length-f feature vector, so a sequence of m x n frames turns into an
//! (m*n) x f data matrix. Fitting a low-dimensional model to those pixel
//! trajectories captures the static background; per-pixel residuals flag the
//! moving content.
//!
//! Frame I/O is binary PGM (P5, maxval 255) only: bit-exact and scriptable
//! to and from any video tool without codec dependencies.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::model::MompcaModel;
use crate::mompca::{fit, FitConfig};
use crate::scalar::Scalar;

/// One grayscale frame, 8-bit, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "frame of {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }
}

/// A fixed-shape sequence of at least two frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidInput(
                "a frame sequence needs at least two frames".into(),
            ));
        }
        let (w, h) = (frames[0].width, frames[0].height);
        for (i, f) in frames.iter().enumerate() {
            if f.width != w || f.height != h {
                return Err(Error::ShapeMismatch {
                    frame: i,
                    got_w: f.width,
                    got_h: f.height,
                    want_w: w,
                    want_h: h,
                });
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }
}

/// Pixel trajectories as a data matrix: row = pixel (row-major scan of the
/// frame grid), column = frame, intensities mapped to [0, 1].
pub fn frames_to_matrix<T: Scalar>(seq: &FrameSequence) -> DataMatrix<T> {
    let f = seq.frame_count();
    let pixels = seq.width() * seq.height();
    let scale = T::from_f64_lossy(1.0 / 255.0);
    let mut values = vec![T::zero(); pixels * f];
    for (j, frame) in seq.frames.iter().enumerate() {
        for (i, &v) in frame.pixels.iter().enumerate() {
            values[i * f + j] = T::from_u8(v).expect("u8 fits any scalar") * scale;
        }
    }
    DataMatrix::from_parts(pixels, f, values)
}

/// Inverse of [`frames_to_matrix`]: clamps to [0, 1] and re-quantizes to 8-bit.
pub fn matrix_to_frames<T: Scalar>(
    x: &DataMatrix<T>,
    width: usize,
    height: usize,
) -> Result<FrameSequence> {
    if x.n_rows() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            got: x.n_rows(),
            context: "pixel rows vs frame shape",
        });
    }
    let f = x.n_cols();
    let mut frames = Vec::with_capacity(f);
    for j in 0..f {
        let mut pixels = Vec::with_capacity(width * height);
        for i in 0..width * height {
            let v = x.get(i, j).to_f64_lossy().clamp(0.0, 1.0);
            pixels.push((v * 255.0).round() as u8);
        }
        frames.push(Frame::new(width, height, pixels)?);
    }
    FrameSequence::new(frames)
}

/// Background model and per-pixel motion map.
#[derive(Debug, Clone)]
pub struct Separation<T> {
    pub background: FrameSequence,
    /// L1 norm of each pixel's residual trajectory, row-major over the grid.
    pub object_map: Vec<T>,
    pub model: MompcaModel<T>,
}

/// Fits the pixel-trajectory model and splits the sequence into a
/// reconstructed background and a residual object map.
pub fn separate<T: Scalar>(seq: &FrameSequence, config: &FitConfig<T>) -> Result<Separation<T>> {
    let x = frames_to_matrix::<T>(seq);
    let model = fit(&x, config)?;
    let recon = model.reconstruct(&x)?;

    let mut object_map = Vec::with_capacity(x.n_rows());
    for i in 0..x.n_rows() {
        let l1: T = x
            .row(i)
            .iter()
            .zip(recon.row(i))
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        object_map.push(l1);
    }

    let background = matrix_to_frames(&recon, seq.width(), seq.height())?;
    Ok(Separation {
        background,
        object_map,
        model,
    })
}

/// Renders a nonnegative per-pixel map as an 8-bit heat frame, scaled by the
/// maximum value (an all-zero map stays black).
pub fn object_map_to_frame<T: Scalar>(
    object_map: &[T],
    width: usize,
    height: usize,
) -> Result<Frame> {
    if object_map.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            got: object_map.len(),
            context: "object map vs frame shape",
        });
    }
    let max = object_map
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v))
        .to_f64_lossy();
    let pixels = object_map
        .iter()
        .map(|&v| {
            if max > 0.0 {
                ((v.to_f64_lossy() / max).clamp(0.0, 1.0) * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    Frame::new(width, height, pixels)
}

/// Reads a binary PGM (P5) image. Comments and arbitrary whitespace in the
/// header are accepted; maxval must be 255.
pub fn read_pgm<R: BufRead>(mut reader: R) -> Result<Frame> {
    let mut header_fields = Vec::with_capacity(4);
    let mut byte = [0u8; 1];
    let mut field = String::new();
    let mut in_comment = false;
    while header_fields.len() < 4 {
        if reader.read(&mut byte)? == 0 {
            return Err(Error::InvalidInput("truncated pgm header".into()));
        }
        let c = byte[0];
        if in_comment {
            if c == b'\n' {
                in_comment = false;
            }
            continue;
        }
        match c {
            b'#' => in_comment = true,
            b' ' | b'\t' | b'\r' | b'\n' => {
                if !field.is_empty() {
                    header_fields.push(std::mem::take(&mut field));
                }
            }
            _ => field.push(c as char),
        }
    }
    if header_fields[0] != "P5" {
        return Err(Error::InvalidInput(format!(
            "unsupported pgm magic {:?} (only binary P5 is supported)",
            header_fields[0]
        )));
    }
    let width: usize = header_fields[1]
        .parse()
        .map_err(|_| Error::InvalidInput("bad pgm width".into()))?;
    let height: usize = header_fields[2]
        .parse()
        .map_err(|_| Error::InvalidInput("bad pgm height".into()))?;
    let maxval: usize = header_fields[3]
        .parse()
        .map_err(|_| Error::InvalidInput("bad pgm maxval".into()))?;
    if maxval != 255 {
        return Err(Error::InvalidInput(format!(
            "unsupported pgm maxval {maxval} (only 255 is supported)"
        )));
    }
    let mut pixels = vec![0u8; width * height];
    reader.read_exact(&mut pixels)?;
    Frame::new(width, height, pixels)
}

/// Writes a binary PGM (P5) image.
pub fn write_pgm<W: Write>(frame: &Frame, mut writer: W) -> Result<()> {
    write!(writer, "P5\n{} {}\n255\n", frame.width, frame.height)?;
    writer.write_all(&frame.pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(width: usize, height: usize, phase: usize) -> Frame {
        let pixels = (0..width * height)
            .map(|i| if (i + phase) % 2 == 0 { 30 } else { 200 })
            .collect();
        Frame::new(width, height, pixels).unwrap()
    }

    #[test]
    fn layout_of_a_tiny_sequence() {
        let f0 = Frame::new(2, 2, vec![0, 51, 102, 255]).unwrap();
        let f1 = Frame::new(2, 2, vec![255, 204, 153, 0]).unwrap();
        let seq = FrameSequence::new(vec![f0, f1]).unwrap();
        let x: DataMatrix<f64> = frames_to_matrix(&seq);
        assert_eq!((x.n_rows(), x.n_cols()), (4, 2));
        // pixel 0: frame 0 value 0, frame 1 value 255
        assert_eq!(x.row(0), &[0.0, 1.0]);
        // pixel 3 (bottom-right in row-major order)
        assert_eq!(x.row(3), &[1.0, 0.0]);
    }

    #[test]
    fn constant_video_has_zero_variance_rows() {
        let seq = FrameSequence::new(vec![checker(4, 3, 0); 5]).unwrap();
        let x: DataMatrix<f64> = frames_to_matrix(&seq);
        for i in 0..x.n_rows() {
            let row = x.row(i);
            assert!(row.iter().all(|&v| v == row[0]));
        }
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let seq = FrameSequence::new(vec![checker(5, 4, 0), checker(5, 4, 1), checker(5, 4, 0)])
            .unwrap();
        let x: DataMatrix<f64> = frames_to_matrix(&seq);
        let back = matrix_to_frames(&x, 5, 4).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn pgm_round_trip_is_bit_exact() {
        let frame = checker(7, 3, 1);
        let mut buf = Vec::new();
        write_pgm(&frame, &mut buf).unwrap();
        let back = read_pgm(&buf[..]).unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let bytes = b"P5 # magic\n# a comment line\n 3\t2 # dims\n255\n\x00\x01\x02\x03\x04\x05";
        let frame = read_pgm(&bytes[..]).unwrap();
        assert_eq!((frame.width, frame.height), (3, 2));
        assert_eq!(frame.pixels, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn mismatched_frame_shapes_are_rejected() {
        let err = FrameSequence::new(vec![checker(4, 4, 0), checker(4, 3, 0)]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { frame: 1, .. }));
    }
}
