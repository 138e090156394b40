//! Image, mask and trace files.
//!
//! Images are read from 8-bit PNG (grayscale or RGB) or binary PGM/PPM and
//! mapped to `[0, 1]` as `byte / 255`. Writing clamps to `[0, 1]` and rounds
//! `255 * v` half away from zero, so `0.5` becomes 128.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat};

use crate::degradations::{Image, MaskMap};
use crate::error::{Error, Result};
use crate::restoration::TrainTrace;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    fs::read(path).map_err(|e| io_error(path, e))
}

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let bytes = read_bytes(path)?;
    let format = match image::guess_format(&bytes) {
        Ok(ImageFormat::Png) => ImageFormat::Png,
        // only the binary gray and color variants
        Ok(ImageFormat::Pnm) if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") => {
            ImageFormat::Pnm
        }
        Ok(ImageFormat::Pnm) => {
            return Err(unsupported(path, "only binary PGM (P5) and PPM (P6) are supported"))
        }
        Ok(other) => return Err(unsupported(path, format!("{other:?} is not supported"))),
        Err(_) => return Err(unsupported(path, "not a PNG, PGM or PPM file")),
    };
    image::load_from_memory_with_format(&bytes, format).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads an 8-bit grayscale (1 channel) or RGB (3 channel) image.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img.color() {
        ColorType::L8 => (1, img.into_luma8().into_raw()),
        ColorType::Rgb8 => (3, img.into_rgb8().into_raw()),
        ColorType::L16 | ColorType::La16 | ColorType::Rgb16 | ColorType::Rgba16 => {
            return Err(Error::SixteenBitDepth(path.to_path_buf()))
        }
        other => {
            return Err(unsupported(
                path,
                format!("color type {other:?}; expected 8-bit grayscale or RGB"),
            ))
        }
    };
    Image::new(h, w, channels, bytes.into_iter().map(|b| f64::from(b) / 255.0).collect())
}

/// Quantizes to bytes: clamp to `[0, 1]`, then round `255 * v` half away from zero.
pub fn quantize(img: &Image) -> Result<Vec<u8>> {
    img.data()
        .iter()
        .map(|&v| {
            if v.is_nan() {
                Err(Error::NonFinite("cannot save an image containing NaN".into()))
            } else {
                Ok((v.clamp(0.0, 1.0) * 255.0).round() as u8)
            }
        })
        .collect()
}

fn write_bytes(path: &Path, bytes: &[u8], w: usize, h: usize, channels: usize) -> Result<()> {
    use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
    use image::ImageEncoder;

    let color = if channels == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let written = match ext.as_deref() {
        // P5 / P6, never the PAM variant
        Some("ppm" | "pgm" | "pnm") => {
            let subtype = if channels == 1 {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            PnmEncoder::new(&mut out)
                .with_subtype(subtype)
                .write_image(bytes, w as u32, h as u32, color)
        }
        _ => image::codecs::png::PngEncoder::new(&mut out).write_image(bytes, w as u32, h as u32, color),
    };
    written.map_err(|e| match e {
        image::ImageError::IoError(source) => io_error(path, source),
        other => io_error(path, std::io::Error::other(other.to_string())),
    })?;
    std::io::Write::flush(&mut out).map_err(|e| io_error(path, e))
}

/// Writes `img` as an 8-bit PNG (binary PGM/PPM when the extension asks for it).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let bytes = quantize(img)?;
    write_bytes(path.as_ref(), &bytes, img.width(), img.height(), img.channels())
}

/// Loads a mask stored as an 8-bit grayscale image; bytes `>= 128` are kept.
pub fn load_mask(path: impl AsRef<Path>) -> Result<MaskMap> {
    let path = path.as_ref();
    let img = decode(path)?;
    if img.color() != ColorType::L8 {
        return Err(unsupported(path, "masks must be 8-bit grayscale"));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let keep = img.into_luma8().into_raw().into_iter().map(|b| b >= 128).collect();
    MaskMap::new(h, w, keep)
}

/// Writes a mask as an 8-bit grayscale PNG: 255 where kept, 0 elsewhere.
pub fn save_mask(mask: &MaskMap, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = mask.keep().iter().map(|&k| if k { 255 } else { 0 }).collect();
    write_bytes(path.as_ref(), &bytes, mask.width(), mask.height(), 1)
}

fn push_value(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("nan");
    } else if v == f64::INFINITY {
        out.push_str("inf");
    } else if v == f64::NEG_INFINITY {
        out.push_str("-inf");
    } else {
        write!(out, "{v}").expect("writing to a String cannot fail");
    }
}

/// CSV text of a trace: header `iter,loss,psnr_ref,psnr_obs_0,...` then one
/// row per snapshot. A missing reference is written as `nan`, identical
/// images as `inf`. Values use the shortest representation that parses
/// back to the same `f64`.
pub fn trace_to_csv(trace: &TrainTrace) -> String {
    let mut out = String::from("iter,loss,psnr_ref");
    for k in 0..trace.task_count {
        write!(out, ",psnr_obs_{k}").expect("writing to a String cannot fail");
    }
    out.push('\n');
    for row in &trace.rows {
        write!(out, "{}", row.iteration).expect("writing to a String cannot fail");
        out.push(',');
        push_value(&mut out, row.loss);
        out.push(',');
        push_value(&mut out, row.psnr_ref.unwrap_or(f64::NAN));
        for &p in &row.psnr_obs {
            out.push(',');
            push_value(&mut out, p);
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(trace: &TrainTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, trace_to_csv(trace)).map_err(|e| io_error(path, e))
}

/// One parsed trace row: iteration, then the remaining columns in header order.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub values: Vec<f64>,
}

/// Parses a trace file written by [`write_trace`], returning the header
/// columns and rows.
pub fn read_trace(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<TraceRecord>)> {
    let path = path.as_ref();
    let text = String::from_utf8(read_bytes(path)?).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let bad = |line: usize, reason: String| Error::Decode {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad(1, "missing header".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    if header.len() < 3 || header[..3] != ["iter", "loss", "psnr_ref"] {
        return Err(bad(1, "header must start with iter,loss,psnr_ref".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(bad(i + 2, format!("expected {} fields", header.len())));
        }
        let iteration = fields[0]
            .parse()
            .map_err(|e| bad(i + 2, format!("iteration: {e}")))?;
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(i + 2, format!("{f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(TraceRecord { iteration, values });
    }
    Ok((header, rows))
}

/// `path` with `suffix` inserted before the extension (`out.png` + `_best`
/// gives `out_best.png`).
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}{suffix}.{ext}"),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::restoration::TraceRow;

    #[test]
    fn quantization_rule() {
        let img = Image::new(1, 6, 1, vec![0.0, 1.0, 0.5, 1.7, -0.2, 0.499 / 255.0]).unwrap();
        assert_eq!(quantize(&img).unwrap(), vec![0, 255, 128, 255, 0, 0]);
        let mut img = Image::filled(1, 1, 1, 0.0).unwrap();
        img.data_mut()[0] = f64::NAN;
        assert!(matches!(quantize(&img), Err(Error::NonFinite(_))));
    }

    #[test]
    fn csv_layout() {
        let empty = TrainTrace {
            task_count: 2,
            ..TrainTrace::default()
        };
        assert_eq!(trace_to_csv(&empty), "iter,loss,psnr_ref,psnr_obs_0,psnr_obs_1\n");
        let row = |i, r| TraceRow {
            iteration: i,
            loss: 0.25,
            task_losses: vec![0.25],
            psnr_ref: r,
            psnr_obs: vec![f64::INFINITY],
        };
        let trace = TrainTrace {
            rows: vec![row(0, None), row(10, Some(21.5)), row(12, Some(1.0 / 3.0))],
            losses: vec![],
            task_count: 1,
        };
        let csv = trace_to_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0.25,nan,inf");
        assert_eq!(lines[2], "10,0.25,21.5,inf");
        assert_eq!(lines[3].split(',').nth(2).unwrap().parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling_path(Path::new("a/out.png"), "_best"), Path::new("a/out_best.png"));
        assert_eq!(sibling_path(Path::new("out"), "_x"), Path::new("out_x"));
    }
}
