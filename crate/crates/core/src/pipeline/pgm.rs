//! Binary portable graymap ("P5") reading and writing.

use std::path::Path;

use crate::error::{Result, SegError};
use crate::grid::GridShape;

/// Decoded graymap: raw samples plus the declared maximum value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub shape: GridShape,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

pub fn is_pgm(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit()
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Option<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Graymap> {
    let corrupt = |reason: &str| SegError::CorruptFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if !is_pgm(bytes) {
        return Err(corrupt("missing netpbm magic number"));
    }
    if bytes[1] != b'5' {
        return Err(SegError::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("netpbm variant P{} (only binary P5 graymaps)", bytes[1] as char),
        });
    }
    let mut header = Header { bytes, pos: 2 };
    let width = header.number().ok_or_else(|| corrupt("bad width"))?;
    let height = header.number().ok_or_else(|| corrupt("bad height"))?;
    let maxval = header.number().ok_or_else(|| corrupt("bad maxval"))?;
    if !(1..=65535).contains(&maxval) {
        return Err(corrupt("maxval outside 1..=65535"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(header.pos) {
        Some(c) if c.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(corrupt("truncated header")),
    }
    let shape = GridShape::new(width as usize, height as usize)
        .map_err(|_| corrupt("zero image dimension"))?;
    let wide = maxval > 255;
    let needed = shape.len() * if wide { 2 } else { 1 };
    let raster = &bytes[header.pos..];
    if raster.len() < needed {
        return Err(corrupt(&format!(
            "truncated raster: {} of {needed} bytes",
            raster.len()
        )));
    }
    let samples: Vec<u16> = if wide {
        raster[..needed]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]))
            .collect()
    } else {
        raster[..needed].iter().map(|&b| b as u16).collect()
    };
    if samples.iter().any(|&s| s as u32 > maxval) {
        return Err(corrupt("sample exceeds maxval"));
    }
    Ok(Graymap {
        shape,
        maxval: maxval as u16,
        samples,
    })
}

/// Encodes 8-bit samples as a P5 graymap with maxval 255.
pub fn encode_pgm8(shape: GridShape, samples: &[u8]) -> Vec<u8> {
    debug_assert_eq!(samples.len(), shape.len());
    let mut out = format!("P5\n{} {}\n255\n", shape.width(), shape.height()).into_bytes();
    out.extend_from_slice(samples);
    out
}

/// Encodes 16-bit samples as a P5 graymap with maxval 65535 (big-endian).
pub fn encode_pgm16(shape: GridShape, samples: &[u16]) -> Vec<u8> {
    debug_assert_eq!(samples.len(), shape.len());
    let mut out = format!("P5\n{} {}\n65535\n", shape.width(), shape.height()).into_bytes();
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem.pgm")
    }

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# depth\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9]);
        let g = decode_pgm(&bytes, p()).unwrap();
        assert_eq!(g.samples, vec![7, 9]);
        assert_eq!(g.maxval, 255);
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let s = GridShape::new(3, 1).unwrap();
        let bytes = encode_pgm16(s, &[0, 256, 65535]);
        let g = decode_pgm(&bytes, p()).unwrap();
        assert_eq!(g.samples, vec![0, 256, 65535]);
        assert_eq!(g.maxval, 65535);
    }

    #[test]
    fn ascii_variant_unsupported() {
        let err = decode_pgm(b"P2\n1 1\n255\n0\n", p()).unwrap_err();
        assert!(matches!(err, SegError::UnsupportedFormat { .. }));
    }

    #[test]
    fn truncated_raster_is_corrupt() {
        let s = GridShape::new(4, 4).unwrap();
        let bytes = encode_pgm8(s, &[1; 16]);
        let err = decode_pgm(&bytes[..bytes.len() - 3], p()).unwrap_err();
        assert!(matches!(err, SegError::CorruptFile { .. }));
        let err = decode_pgm(b"P5\n4 4", p()).unwrap_err();
        assert!(matches!(err, SegError::CorruptFile { .. }));
    }
}
