//! PNG boundary: the only place where samples are quantized.

use std::io::Cursor;

use png::{BitDepth, ColorType, Transformations};

use super::Image;
use crate::error::{Error, Result};

/// Decodes an 8- or 16-bit grayscale or RGB PNG into `[0, 1]` samples.
pub fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::PngDecode(e.to_string()))?;

    let (color, depth) = reader.output_color_type();
    let channels = match color {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        ColorType::GrayscaleAlpha | ColorType::Rgba => {
            return Err(Error::UnsupportedPng("alpha channel".into()))
        }
        ColorType::Indexed => return Err(Error::UnsupportedPng("indexed color".into())),
    };
    let (bytes_per_sample, full_scale) = match depth {
        BitDepth::Eight => (1, 255.0),
        BitDepth::Sixteen => (2, 65535.0),
        other => {
            return Err(Error::UnsupportedPng(format!(
                "bit depth {other:?} (only 8 and 16 supported)"
            )))
        }
    };

    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::PngDecode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::PngDecode(e.to_string()))?;
    let (height, width) = (info.height as usize, info.width as usize);

    let mut planes = vec![vec![0.0; height * width]; channels];
    for i in 0..height {
        let row = &buf[i * info.line_size..];
        for j in 0..width {
            for (c, plane) in planes.iter_mut().enumerate() {
                let at = (j * channels + c) * bytes_per_sample;
                let raw = if bytes_per_sample == 1 {
                    row[at] as f64
                } else {
                    u16::from_be_bytes([row[at], row[at + 1]]) as f64
                };
                plane[i * width + j] = raw / full_scale;
            }
        }
    }
    Image::from_planes(height, width, planes)
}

/// Quantizes one sample: clamp to `[0, 1]`, then round half away from zero.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encodes as an 8-bit grayscale (1 channel) or RGB (3 channels) PNG.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let (channels, height, width) = img.shape();
    let mut interleaved = Vec::with_capacity(img.len());
    for k in 0..height * width {
        for c in 0..channels {
            interleaved.push(quantize_u8(img.plane(c)[k]));
        }
    }

    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(if channels == 1 {
            ColorType::Grayscale
        } else {
            ColorType::Rgb
        });
        encoder.set_depth(BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::PngEncode(e.to_string()))?;
        writer
            .write_image_data(&interleaved)
            .map_err(|e| Error::PngEncode(e.to_string()))?;
        writer
            .finish()
            .map_err(|e| Error::PngEncode(e.to_string()))?;
    }
    Ok(out)
}

pub fn read_png(path: impl AsRef<std::path::Path>) -> Result<Image> {
    decode_png(&std::fs::read(path)?)
}

pub fn write_png(path: impl AsRef<std::path::Path>, img: &Image) -> Result<()> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}
