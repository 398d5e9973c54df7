//! Reader for the big-endian IDX containers used by MNIST.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;
/// Side length of an MNIST image.
pub const MNIST_SIDE: usize = 28;

/// Grayscale images with their labels, before binarization.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayscaleSet {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl GrayscaleSet {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        let per_image = rows * cols;
        if per_image == 0 || pixels.len() != per_image * labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} pixel bytes cannot hold {} images of {rows}x{cols}",
                pixels.len(),
                labels.len()
            )));
        }
        Ok(Self { rows, cols, pixels, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(rows, cols)` of every image.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major pixels of image `index`.
    pub fn image(&self, index: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[index * n..(index + 1) * n]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn be_u32(bytes: &[u8], offset: usize, path: &str) -> Result<u32> {
    let chunk = bytes
        .get(offset..offset + 4)
        .ok_or(Error::Truncated { path: path.to_string(), needed: offset + 4, actual: bytes.len() })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("4-byte slice")))
}

fn check_magic(bytes: &[u8], expected: u32, path: &str) -> Result<()> {
    let found = be_u32(bytes, 0, path)?;
    if found != expected {
        return Err(Error::BadMagic { path: path.to_string(), found, expected });
    }
    Ok(())
}

/// Parses an image container, returning `(count, rows, cols, pixels)`.
pub fn parse_images(bytes: &[u8], path: &str) -> Result<(usize, usize, usize, Vec<u8>)> {
    check_magic(bytes, IMAGE_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let needed = 16 + count * rows * cols;
    if bytes.len() < needed {
        return Err(Error::Truncated { path: path.to_string(), needed, actual: bytes.len() });
    }
    Ok((count, rows, cols, bytes[16..needed].to_vec()))
}

pub fn parse_labels(bytes: &[u8], path: &str) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC, path)?;
    let count = be_u32(bytes, 4, path)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(Error::Truncated { path: path.to_string(), needed, actual: bytes.len() });
    }
    Ok(bytes[8..needed].to_vec())
}

/// Loads an MNIST image/label file pair. Images must be 28x28 and labels in `0..=9`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<GrayscaleSet> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let (count, rows, cols, pixels) = parse_images(&read_file(ip)?, &ip.display().to_string())?;
    let labels = parse_labels(&read_file(lp)?, &lp.display().to_string())?;
    if (rows, cols) != (MNIST_SIDE, MNIST_SIDE) {
        return Err(Error::DimensionMismatch(format!("images are {rows}x{cols}, expected 28x28")));
    }
    if labels.len() != count {
        return Err(Error::DimensionMismatch(format!("{count} images but {} labels", labels.len())));
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(Error::LabelOutOfRange { index, label });
    }
    GrayscaleSet::new(rows, cols, pixels, labels)
}
