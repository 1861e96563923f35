//! Grayscale image segmentation by splitting the intensity distribution,
//! plus minimal binary PGM/PPM I/O.

use std::fmt::Write as _;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::split::unisplit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Image(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major intensities.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Pixel count per intensity.
    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &p in &self.pixels {
            h[p as usize] += 1;
        }
        h
    }
}

/// Luma `0.299 R + 0.587 G + 0.114 B`, rounded half up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

pub fn to_gray(width: usize, height: usize, rgb: &[u8]) -> Result<GrayImage> {
    if rgb.len() != 3 * width * height {
        return Err(Error::Image(format!(
            "{} bytes for a {width}x{height} rgb image",
            rgb.len()
        )));
    }
    GrayImage::new(
        width,
        height,
        rgb.chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect(),
    )
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
}

fn parse_header(buf: &[u8]) -> Result<(Header, usize)> {
    let bad = |m: &str| Error::Image(m.to_string());
    if buf.len() < 2 || buf[0] != b'P' {
        return Err(bad("not a PNM file"));
    }
    let magic = [buf[0], buf[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for f in fields.iter_mut() {
        loop {
            match buf.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while buf.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while buf.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *f = std::str::from_utf8(&buf[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header field"))?;
    }
    // exactly one whitespace byte precedes the raster
    if !buf.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("bad header terminator"));
    }
    if fields[2] == 0 || fields[2] > 255 {
        return Err(bad("only 8-bit maxval is supported"));
    }
    Ok((
        Header {
            magic,
            width: fields[0],
            height: fields[1],
        },
        pos + 1,
    ))
}

/// Reads a binary PGM (P5) or PPM (P6); color input is converted with
/// [`luma`].
pub fn read_pnm<R: Read>(mut reader: R) -> Result<GrayImage> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let (h, start) = parse_header(&buf)?;
    let channels = match &h.magic {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(Error::Image("only P5 and P6 are supported".into())),
    };
    let need = channels * h.width * h.height;
    let raster = buf
        .get(start..start + need)
        .ok_or_else(|| Error::Image(format!("raster has {} of {need} bytes", buf.len() - start)))?;
    if channels == 1 {
        GrayImage::new(h.width, h.height, raster.to_vec())
    } else {
        to_gray(h.width, h.height, raster)
    }
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut w: W) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.pixels)?;
    Ok(())
}

/// Spreads the `c` pixels of intensity `v` evenly over `(v - 0.5, v + 0.5)`.
///
/// Intensities are rounded measurements; splitting the raw atoms would leave
/// two-level images as two points, and the uniformity test rejects every
/// interval holding a heavy atom.
pub fn dequantize(hist: &[u64; 256]) -> Vec<f64> {
    let mut out = Vec::with_capacity(hist.iter().sum::<u64>() as usize);
    for (v, &c) in hist.iter().enumerate() {
        for i in 0..c {
            out.push(v as f64 - 0.5 + (i as f64 + 0.5) / c as f64);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Segment of every pixel, row-major.
    pub labels: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
}

impl Segmentation {
    pub fn k(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Segment of an intensity.
    pub fn label_of(&self, v: u8) -> usize {
        self.thresholds.partition_point(|&t| t < v as f64)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k = {}", self.k());
        let t: Vec<String> = self.thresholds.iter().map(|t| format!("{t:.3}")).collect();
        let _ = writeln!(s, "thresholds = [{}]", t.join(", "));
        let _ = writeln!(s, "{:>8} {:>10} {:>10}", "segment", "pixels", "mean");
        for (i, (c, m)) in self.counts.iter().zip(&self.means).enumerate() {
            let _ = writeln!(s, "{i:>8} {c:>10} {m:>10.3}");
        }
        s
    }
}

/// Splits the intensity distribution and labels every pixel by the
/// interval it falls in.
pub fn segment(img: &GrayImage, alpha: f64) -> Result<Segmentation> {
    let hist = img.histogram();
    let data = Dataset::from_raw(&dequantize(&hist))?;
    let thresholds = unisplit(&data, alpha)?.valley_points;
    let mut seg = Segmentation {
        labels: Vec::new(),
        counts: vec![0; thresholds.len() + 1],
        means: vec![0.0; thresholds.len() + 1],
        thresholds,
    };
    let lut: Vec<usize> = (0..=255u8).map(|v| seg.label_of(v)).collect();
    seg.labels = img.pixels.par_iter().map(|&p| lut[p as usize]).collect();
    for (v, &c) in hist.iter().enumerate() {
        seg.counts[lut[v]] += c;
        seg.means[lut[v]] += (v as u64 * c) as f64;
    }
    for (m, &c) in seg.means.iter_mut().zip(&seg.counts) {
        if c > 0 {
            *m /= c as f64;
        }
    }
    Ok(seg)
}

/// Replaces every pixel by the rounded mean intensity of its segment.
pub fn recolor(img: &GrayImage, labels: &[usize]) -> Result<GrayImage> {
    if labels.len() != img.pixels.len() {
        return Err(Error::LengthMismatch(labels.len(), img.pixels.len()));
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sum = vec![0u64; k];
    let mut count = vec![0u64; k];
    for (&p, &l) in img.pixels.iter().zip(labels) {
        sum[l] += p as u64;
        count[l] += 1;
    }
    // integer half-up rounding of sum / count
    let level: Vec<u8> = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| {
            if c == 0 {
                0
            } else {
                ((2 * s + c) / (2 * c)) as u8
            }
        })
        .collect();
    GrayImage::new(
        img.width,
        img.height,
        labels.par_iter().map(|&l| level[l]).collect(),
    )
}
