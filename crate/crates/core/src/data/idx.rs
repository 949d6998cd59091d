//! Big-endian IDX containers as used by the MNIST family.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw `u8` image tensor, one row per image.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let len = self.rows * self.cols;
        &self.pixels[i * len..(i + 1) * len]
    }
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(path, format!("byte {offset}"), "file truncated inside header"))
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = read_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(Error::format(
            path,
            "byte 0",
            format!("bad magic 0x{magic:08x}, expected 0x{expected:08x}"),
        ));
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, expected: usize, path: &Path) -> Result<()> {
    let have = bytes.len() - header;
    if have < expected {
        return Err(Error::format(
            path,
            format!("byte {}", bytes.len()),
            format!("payload truncated: {have} of {expected} bytes present"),
        ));
    }
    if have > expected {
        return Err(Error::format(
            path,
            format!("byte {}", header + expected),
            format!("{} trailing bytes after payload", have - expected),
        ));
    }
    Ok(())
}

/// `path` is only used to label errors.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    let rows = read_u32(bytes, 8, path)? as usize;
    let cols = read_u32(bytes, 12, path)? as usize;
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::format(path, "byte 4", "image dimensions overflow"))?;
    check_payload(bytes, 16, expected, path)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC, path)?;
    let count = read_u32(bytes, 4, path)? as usize;
    check_payload(bytes, 8, count, path)?;
    Ok(bytes[8..].to_vec())
}

/// Loads the rows labelled `class_a` (→ −1) or `class_b` (→ +1). Pixels are
/// kept on the 0..=255 scale.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    class_a: u8,
    class_b: u8,
) -> Result<Dataset> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    if class_a == class_b {
        return Err(Error::input("the two requested classes must differ"));
    }
    let image_bytes = std::fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let label_bytes = std::fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let images = parse_idx_images(&image_bytes, images_path)?;
    let labels = parse_idx_labels(&label_bytes, labels_path)?;
    if images.count != labels.len() {
        return Err(Error::format(
            labels_path,
            "byte 4",
            format!("{} labels for {} images", labels.len(), images.count),
        ));
    }

    let width = images.rows * images.cols;
    let mut data = Vec::new();
    let mut y = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let sign = if label == class_a {
            -1
        } else if label == class_b {
            1
        } else {
            continue;
        };
        data.extend(images.image(i).iter().map(|&p| f64::from(p)));
        y.push(sign);
    }
    for (class, sign) in [(class_a, -1), (class_b, 1)] {
        if !y.contains(&sign) {
            return Err(Error::input(format!("class {class} has no rows in {}", labels_path.display())));
        }
    }
    let x = Matrix::from_vec(y.len(), width, data)?;
    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    Dataset::new(format!("{name}[{class_a}v{class_b}]"), x, y)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn write_pair(dir: &Path, images: &[u8], labels: &[u8]) -> (std::path::PathBuf, std::path::PathBuf) {
        let (ip, lp) = (dir.join("img.idx"), dir.join("lab.idx"));
        std::fs::write(&ip, images).unwrap();
        std::fs::write(&lp, labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn two_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels = [0u8, 17, 255, 3, 9, 128, 64, 1];
        let (ip, lp) = write_pair(dir.path(), &fixture::images(2, 2, 2, &pixels), &fixture::labels(&[3, 0]));
        let ds = load_idx(&ip, &lp, 0, 3).unwrap();
        assert_eq!(ds.y, vec![1, -1]);
        assert_eq!(ds.x.row(0), &[0.0, 17.0, 255.0, 3.0]);
        assert_eq!(ds.x.row(1), &[9.0, 128.0, 64.0, 1.0]);
    }

    #[test]
    fn filters_other_classes() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_pair(dir.path(), &fixture::images(4, 1, 1, &[10, 20, 30, 40]), &fixture::labels(&[5, 1, 4, 1]));
        let ds = load_idx(&ip, &lp, 1, 4).unwrap();
        assert_eq!(ds.x.as_slice(), &[20.0, 30.0, 40.0]);
        assert_eq!(ds.y, vec![-1, 1, -1]);
    }

    #[test]
    fn absent_class_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_pair(dir.path(), &fixture::images(2, 1, 1, &[1, 2]), &fixture::labels(&[0, 0]));
        assert!(matches!(load_idx(&ip, &lp, 0, 3), Err(Error::Input(_))));
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let mut bytes = fixture::images(1, 1, 1, &[0]);
        bytes[3] = 0x01;
        match parse_idx_images(&bytes, Path::new("x")) {
            Err(Error::Format { location, .. }) => assert_eq!(location, "byte 0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncation_is_reported() {
        let bytes = fixture::images(2, 2, 2, &[1, 2, 3]);
        match parse_idx_images(&bytes, Path::new("x")) {
            Err(Error::Format { location, .. }) => assert_eq!(location, format!("byte {}", bytes.len())),
            other => panic!("{other:?}"),
        }
        let header_cut = &fixture::labels(&[1])[..6];
        assert!(matches!(parse_idx_labels(header_cut, Path::new("x")), Err(Error::Format { .. })));
    }

    #[test]
    fn count_mismatch_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_pair(dir.path(), &fixture::images(2, 1, 1, &[1, 2]), &fixture::labels(&[0, 3, 3]));
        assert!(matches!(load_idx(&ip, &lp, 0, 3), Err(Error::Format { .. })));
    }
}
