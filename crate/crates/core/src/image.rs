//! 8-bit grayscale images, the PGM codec and probability-map rendering.

use crate::distribution::ProbabilityMap;
use crate::error::{Error, Result};

/// An 8-bit grayscale image stored row-major.
///
/// Pixel `(i, j)` is row `i`, column `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (pixels.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                pixels.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Per-pixel flags for intensities 0 and 255, where only one change
    /// direction is feasible.
    pub fn saturation_flags(&self) -> Vec<bool> {
        self.pixels.iter().map(|&v| v == 0 || v == 255).collect()
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }
}

/// Header tokenizer that skips whitespace and `#` comments.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_separators(&mut self) {
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

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!("invalid {what} {:?}", String::from_utf8_lossy(tok)))
            })
    }
}

/// Decodes a binary (`P5`) or ASCII (`P2`) PGM with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(Error::UnsupportedMagic(
            String::from_utf8_lossy(bytes).into_owned(),
        ));
    }
    let binary = match &bytes[..2] {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::UnsupportedMagic(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };
    let mut reader = HeaderReader { bytes, pos: 2 };
    if reader.pos < bytes.len()
        && !bytes[reader.pos].is_ascii_whitespace()
        && bytes[reader.pos] != b'#'
    {
        return Err(Error::MalformedHeader(
            "magic not followed by whitespace".into(),
        ));
    }
    let width = reader.number("width")? as usize;
    let height = reader.number("height")? as usize;
    let maxval = reader.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;

    let pixels = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        match bytes.get(reader.pos) {
            Some(c) if c.is_ascii_whitespace() => {}
            _ => {
                return Err(Error::TruncatedData { expected, found: 0 });
            }
        }
        let raster = &bytes[reader.pos + 1..];
        if raster.len() < expected {
            return Err(Error::TruncatedData {
                expected,
                found: raster.len(),
            });
        }
        raster[..expected].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            let Some(tok) = reader.token() else {
                return Err(Error::TruncatedData {
                    expected,
                    found: pixels.len(),
                });
            };
            let value = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| {
                    Error::MalformedHeader(format!(
                        "invalid sample {:?}",
                        String::from_utf8_lossy(tok)
                    ))
                })?;
            if value > 255 {
                return Err(Error::MalformedHeader(format!(
                    "sample {value} exceeds maxval"
                )));
            }
            pixels.push(value as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Encodes an image as binary PGM: `P5\n<w> <h>\n255\n` followed by the raw bytes.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

/// Quantizes a change probability to an intensity, mapping 1/3 to 255.
///
/// Values above 1/3 (possible only at saturated pixels) clip to 255.
pub fn probability_intensity(p: f64) -> u8 {
    // 3 * 255 rather than 765 keeps p = 1/6 exactly at 127.5.
    let scaled = (p * 3.0) * 255.0;
    (scaled + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Renders the per-direction change probability map as a grayscale heatmap.
///
/// The scale is anchored at the theoretical maximum 1/3 so maps from
/// different models are directly comparable.
pub fn render_probability_heatmap(pm: &ProbabilityMap) -> Result<GrayImage> {
    let mut pixels = Vec::with_capacity(pm.len());
    for (&p, &sat) in pm.probabilities().iter().zip(pm.saturation()) {
        let bound = if sat { 0.5 } else { 1.0 / 3.0 };
        if !(0.0..=bound).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        pixels.push(probability_intensity(p));
    }
    GrayImage::new(pm.width(), pm.height(), pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::DistributionModel;
    use proptest::prelude::*;

    #[test]
    fn minimal_binary_image() {
        let img = read_pgm(b"P5\n1 1\n255\n\x00").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[0]);
    }

    #[test]
    fn ascii_variant() {
        let img = read_pgm(b"P2\n2 1\n255\n0 255\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixels(), &[0, 255]);
    }

    #[test]
    fn comments_in_header() {
        let img = read_pgm(b"P5\n# created by hand\n2 # width\n1\n255\n\x05\x06").unwrap();
        assert_eq!(img.pixels(), &[5, 6]);
        let img = read_pgm(b"P2\n# c\n1 2\n# another\n255\n 3\n# mid\n 4\n").unwrap();
        assert_eq!(img.pixels(), &[3, 4]);
    }

    #[test]
    fn truncated_raster() {
        let mut bytes = b"P5\n512 512\n255\n".to_vec();
        bytes.extend(std::iter::repeat(0u8).take(100));
        assert!(matches!(
            read_pgm(&bytes),
            Err(Error::TruncatedData {
                expected: 262144,
                found: 100
            })
        ));
        assert!(matches!(
            read_pgm(b"P2\n2 2\n255\n1 2 3"),
            Err(Error::TruncatedData {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            read_pgm(b"P6\n1 1\n255\n\0\0\0"),
            Err(Error::UnsupportedMagic(_))
        ));
        assert!(matches!(read_pgm(b"P"), Err(Error::UnsupportedMagic(_))));
        assert!(matches!(
            read_pgm(b"P5\n1 1\n65535\n\0\0"),
            Err(Error::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            read_pgm(b"P5\n1 1\n15\n\0"),
            Err(Error::UnsupportedMaxval(15))
        ));
        assert!(matches!(
            read_pgm(b"P5\nx 1\n255\n\0"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P5\n0 1\n255\n"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P5\n1 1"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pgm(b"P2\n1 1\n255\n300\n"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn writer_layout() {
        let img = GrayImage::new(1, 1, vec![7]).unwrap();
        assert_eq!(write_pgm(&img), b"P5\n1 1\n255\n\x07".to_vec());
        let img = GrayImage::new(2, 2, vec![0, 1, 2, 3]).unwrap();
        let bytes = write_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 1, 2, 3]);
        assert_eq!(&bytes[..bytes.len() - 4], b"P5\n2 2\n255\n");
    }

    #[test]
    fn invalid_construction() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn heatmap_anchor_points() {
        assert_eq!(probability_intensity(0.0), 0);
        assert_eq!(probability_intensity(1.0 / 3.0), 255);
        assert_eq!(probability_intensity(1.0 / 6.0), 128);
        assert_eq!(probability_intensity(0.5), 255);
    }

    #[test]
    fn heatmap_rendering() {
        let zero = ProbabilityMap::from_parts(
            3,
            2,
            vec![0.0; 6],
            vec![false; 6],
            1.0,
            DistributionModel::Linear,
        );
        assert!(render_probability_heatmap(&zero)
            .unwrap()
            .pixels()
            .iter()
            .all(|&v| v == 0));
        let full = ProbabilityMap::from_parts(
            3,
            2,
            vec![1.0 / 3.0; 6],
            vec![false; 6],
            0.0,
            DistributionModel::Linear,
        );
        assert!(render_probability_heatmap(&full)
            .unwrap()
            .pixels()
            .iter()
            .all(|&v| v == 255));
        let bad = ProbabilityMap::from_parts(
            1,
            1,
            vec![0.4],
            vec![false],
            0.0,
            DistributionModel::Linear,
        );
        assert!(matches!(
            render_probability_heatmap(&bad),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        let sat =
            ProbabilityMap::from_parts(1, 1, vec![0.4], vec![true], 0.0, DistributionModel::Linear);
        assert_eq!(render_probability_heatmap(&sat).unwrap().pixels(), &[255]);
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            let img = GrayImage::from_fn(w, h, |i, j| {
                (crate::rng::counter_u64(seed, (i * w + j) as u64) >> 56) as u8
            });
            prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }

        #[test]
        fn heatmap_monotone(a in 0.0f64..=1.0 / 3.0, b in 0.0f64..=1.0 / 3.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(probability_intensity(lo) <= probability_intensity(hi));
        }
    }
}
