//! Grayscale image I/O. Output is always 16-bit binary PGM (P5, big-endian),
//! which keeps reconstructions bit-exact. Input accepts P2/P5 PGM directly and
//! anything else the `image` crate can decode.

use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::{Grid2D, Signal};

/// An image scaled to `[0, 1]` plus the bit depth it was stored with.
#[derive(Clone, Debug)]
pub struct LoadedImage {
    pub image: Grid2D,
    pub bit_depth: u32,
}

pub fn read_image(path: &Path) -> Result<LoadedImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        return parse_pgm(&bytes);
    }
    let decoded = image::load_from_memory(&bytes)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let bit_depth =
        if decoded.color().bits_per_pixel() / u16::from(decoded.color().channel_count()) > 8 {
            16
        } else {
            8
        };
    let luma = decoded.to_luma16();
    let (w, h) = luma.dimensions();
    let values = luma
        .as_raw()
        .iter()
        .map(|&v| f64::from(v) / 65535.0)
        .collect();
    Ok(LoadedImage {
        image: Grid2D::from_vec(h as usize, w as usize, values)?,
        bit_depth,
    })
}

pub fn parse_pgm(bytes: &[u8]) -> Result<LoadedImage> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        tokens.push(
            std::str::from_utf8(&bytes[start..pos])
                .unwrap_or("")
                .to_string(),
        );
    }
    let magic = tokens[0].as_str();
    let parse = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad PGM header field {s:?}")))
    };
    let (cols, rows, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    let n = rows * cols;
    let scale = maxval as f64;
    let values: Vec<f64> = match magic {
        "P5" => {
            // Exactly one whitespace byte separates the header from the raster.
            let data = &bytes[(pos + 1).min(bytes.len())..];
            let wide = maxval > 255;
            let need = if wide { 2 * n } else { n };
            if data.len() < need {
                return Err(Error::Format(format!(
                    "PGM raster has {} bytes, expected {need}",
                    data.len()
                )));
            }
            if wide {
                data[..need]
                    .chunks_exact(2)
                    .map(|p| f64::from(u16::from_be_bytes([p[0], p[1]])) / scale)
                    .collect()
            } else {
                data[..n].iter().map(|&v| f64::from(v) / scale).collect()
            }
        }
        "P2" => {
            let text = std::str::from_utf8(&bytes[pos..])
                .map_err(|_| Error::Format("P2 raster is not text".into()))?;
            let vals: Vec<f64> = text
                .split_ascii_whitespace()
                .take(n)
                .map(|t| parse(t).map(|v| v as f64 / scale))
                .collect::<Result<_>>()?;
            if vals.len() != n {
                return Err(Error::Format("truncated P2 raster".into()));
            }
            vals
        }
        other => return Err(Error::Format(format!("unsupported PGM magic {other:?}"))),
    };
    Ok(LoadedImage {
        image: Grid2D::from_vec(rows, cols, values)?,
        bit_depth: if maxval > 255 { 16 } else { 8 },
    })
}

/// 16-bit P5 encoding of `img` clamped to `[0, 1]`.
pub fn encode_pgm16(img: &Grid2D) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.cols(), img.rows()).into_bytes();
    out.reserve(2 * img.len());
    for &v in img.values() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn write_pgm16(path: &Path, img: &Grid2D) -> Result<()> {
    std::fs::write(path, encode_pgm16(img)).map_err(|e| Error::io(path, e))
}

/// 8-bit P5 encoding, for preparing inputs.
pub fn encode_pgm8(img: &Grid2D) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend(
        img.values()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm16_round_trip() {
        let img = Grid2D::from_fn(5, 7, |(r, c)| (r * 7 + c) as f64 / 34.0);
        let back = parse_pgm(&encode_pgm16(&img)).unwrap();
        assert_eq!(back.bit_depth, 16);
        assert!(back.image.distance(&img) < 1e-4);
        assert_eq!(encode_pgm16(&back.image), encode_pgm16(&img));
    }

    #[test]
    fn pgm8_and_ascii() {
        let img = Grid2D::from_fn(3, 2, |(r, c)| if (r + c) % 2 == 0 { 1.0 } else { 0.0 });
        let back = parse_pgm(&encode_pgm8(&img)).unwrap();
        assert_eq!(back.bit_depth, 8);
        assert_eq!(back.image, img);
        let ascii = b"P2\n# comment\n2 2\n10\n0 5\n10 2\n";
        let g = parse_pgm(ascii).unwrap().image;
        assert_eq!(g.get(0, 1), 0.5);
        assert_eq!(g.get(1, 0), 1.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(parse_pgm(b"P7\n2 2\n255\n0000").is_err());
        assert!(parse_pgm(b"P5\n2").is_err());
    }
}
