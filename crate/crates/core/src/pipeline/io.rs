//! Image ingestion and atomic file output.

use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Result, SegError};
use crate::grid::{GridShape, ScalarField};
use crate::pipeline::pgm::{decode_pgm, is_pgm};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SegError::NotFound(path.to_path_buf()),
        _ => SegError::io(path, e),
    })
}

/// Loads an 8/16-bit grayscale graymap or PNG, scaled to `[0, 1]` by the
/// format's maximum sample value.
pub fn load_image(path: &Path) -> Result<ScalarField> {
    let bytes = read_bytes(path)?;
    if is_pgm(&bytes) {
        let g = decode_pgm(&bytes, path)?;
        let scale = 1.0 / g.maxval as f64;
        let values = g.samples.iter().map(|&s| s as f64 * scale).collect();
        return ScalarField::new(g.shape, values);
    }
    if bytes.starts_with(PNG_SIGNATURE) {
        return decode_png_gray(&bytes, path);
    }
    Err(SegError::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: "expected a P5 graymap or a PNG".into(),
    })
}

fn decode_png_gray(bytes: &[u8], path: &Path) -> Result<ScalarField> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| {
        SegError::CorruptFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })?;
    let shape = GridShape::new(img.width() as usize, img.height() as usize)?;
    let values: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().iter().map(|&s| s as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => {
            buf.into_raw().iter().map(|&s| s as f64 / 65535.0).collect()
        }
        other => {
            return Err(SegError::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("PNG color type {:?} is not grayscale", other.color()),
            })
        }
    };
    ScalarField::new(shape, values)
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SegError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| SegError::io(path, e))?;
    tmp.persist(path).map_err(|e| SegError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::pgm::{encode_pgm16, encode_pgm8};

    #[test]
    fn eight_bit_graymap_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let s = GridShape::new(2, 2).unwrap();
        std::fs::write(&path, encode_pgm8(s, &[0, 255, 128, 64])).unwrap();
        let f = load_image(&path).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn sixteen_bit_graymap_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g16.pgm");
        let s = GridShape::new(2, 1).unwrap();
        std::fs::write(&path, encode_pgm16(s, &[1000, 65535])).unwrap();
        let f = load_image(&path).unwrap();
        assert_eq!(f.values()[1], 1.0);
        assert_eq!(f.values()[0], 1000.0 / 65535.0);
    }

    #[test]
    fn grayscale_png_is_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = image::GrayImage::from_raw(3, 1, vec![0, 51, 255]).unwrap();
        img.save(&path).unwrap();
        let f = load_image(&path).unwrap();
        assert_eq!(f.values(), &[0.0, 0.2, 1.0]);
    }

    #[test]
    fn color_png_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.png");
        image::RgbImage::new(2, 2).save(&path).unwrap();
        assert!(matches!(
            load_image(&path),
            Err(SegError::UnsupportedFormat { .. })
        ));
    }

    #[test]
    fn error_kinds_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.pgm");
        let err = load_image(&missing).unwrap_err();
        assert!(matches!(err, SegError::NotFound(_)));
        assert!(err.to_string().contains("nope.pgm"));

        let junk = dir.path().join("junk.bin");
        std::fs::write(&junk, b"hello").unwrap();
        assert!(matches!(
            load_image(&junk),
            Err(SegError::UnsupportedFormat { .. })
        ));

        let trunc = dir.path().join("t.png");
        std::fs::write(&trunc, PNG_SIGNATURE).unwrap();
        let err = load_image(&trunc).unwrap_err();
        assert!(matches!(err, SegError::CorruptFile { .. }));
        assert!(err.to_string().contains("t.png"));
    }
}
