//! PSNR and SSIM. Both clamp their inputs to the valid range first, so the
//! numbers match what a reader would measure on the saved 8-bit files
//! (up to quantization).

use std::fmt;

use crate::degradations::Image;
use crate::error::{Error, Result};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// Decibels.
    Psnr,
    Ssim,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub kind: MetricKind,
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_metric(self.value, f)
    }
}

fn fmt_metric(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else if let Some(p) = f.precision() {
        write!(f, "{v:.p$}")
    } else {
        write!(f, "{v}")
    }
}

/// Mean squared error over all pixels and channels of the clamped images.
pub fn mse(a: &Image, b: &Image, peak: f64) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.data().len() as f64;
    Ok(a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = x.clamp(0.0, peak) - y.clamp(0.0, peak);
            d * d
        })
        .sum::<f64>()
        / n)
}

/// `10 log10(peak^2 / MSE)`; identical images give `+inf`.
pub fn psnr(a: &Image, b: &Image, peak: f64) -> Result<MetricValue> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::invalid(format!("PSNR peak must be positive, got {peak}")));
    }
    let err = mse(a, b, peak)?;
    let value = if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / err).log10()
    };
    Ok(MetricValue {
        value,
        kind: MetricKind::Psnr,
    })
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Valid-region separable filtering of a single-channel plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, win: &[f64]) -> Vec<f64> {
    let k = win.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut tmp = vec![0.0; oh * w];
    for y in 0..oh {
        for (t, &wt) in win.iter().enumerate() {
            let src = &plane[(y + t) * w..(y + t + 1) * w];
            let dst = &mut tmp[y * w..(y + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wt * s;
            }
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = win
                .iter()
                .enumerate()
                .map(|(t, wt)| wt * tmp[y * w + x + t])
                .sum();
        }
    }
    out
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), `K1 = 0.01`,
/// `K2 = 0.03` on a unit dynamic range, computed per channel over the valid
/// region and averaged across channels.
pub fn ssim(a: &Image, b: &Image) -> Result<MetricValue> {
    a.check_same_shape(b)?;
    let (h, w) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let win = gaussian_window();
    let channels = a.channels();
    let mut total = 0.0;
    for ch in 0..channels {
        let pa: Vec<f64> = a.data().iter().skip(ch).step_by(channels).map(|v| v.clamp(0.0, 1.0)).collect();
        let pb: Vec<f64> = b.data().iter().skip(ch).step_by(channels).map(|v| v.clamp(0.0, 1.0)).collect();
        let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
        let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
        let ab: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let mu_a = filter_valid(&pa, h, w, &win);
        let mu_b = filter_valid(&pb, h, w, &win);
        let e_aa = filter_valid(&aa, h, w, &win);
        let e_bb = filter_valid(&bb, h, w, &win);
        let e_ab = filter_valid(&ab, h, w, &win);
        let mut sum = 0.0;
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        }
        total += sum / mu_a.len() as f64;
    }
    Ok(MetricValue {
        value: total / channels as f64,
        kind: MetricKind::Ssim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random(seed: u64, h: usize, w: usize) -> Image {
        let mut rng = Rng::seed_from_u64(seed);
        Image::new(h, w, 3, rng.uniform(h * w * 3, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn identical_psnr_is_infinite() {
        let a = random(1, 8, 8);
        let v = psnr(&a, &a, 1.0).unwrap();
        assert_eq!(v.value, f64::INFINITY);
        assert_eq!(v.to_string(), "inf");
    }

    #[test]
    fn constant_difference_psnr() {
        let a = Image::filled(4, 4, 3, 0.25).unwrap();
        let b = Image::filled(4, 4, 3, 0.75).unwrap();
        let v = psnr(&a, &b, 1.0).unwrap().value;
        assert!((v - 6.020_599_913_279_624).abs() < 1e-6, "{v}");
    }

    #[test]
    fn halving_mse_adds_3db() {
        let a = Image::filled(4, 4, 3, 0.5).unwrap();
        let b = Image::filled(4, 4, 3, 0.5 + 0.2).unwrap();
        let c = Image::filled(4, 4, 3, 0.5 + 0.2 / 2f64.sqrt()).unwrap();
        let d = psnr(&a, &c, 1.0).unwrap().value - psnr(&a, &b, 1.0).unwrap().value;
        assert!((d - 3.010_299_956_639_812).abs() < 1e-9, "{d}");
    }

    #[test]
    fn psnr_symmetric_and_checks_dims() {
        let a = random(2, 8, 8);
        let b = random(3, 8, 8);
        assert_eq!(psnr(&a, &b, 1.0).unwrap(), psnr(&b, &a, 1.0).unwrap());
        assert!(psnr(&a, &random(4, 8, 9), 1.0).is_err());
        assert!(psnr(&a, &b, 0.0).is_err());
    }

    #[test]
    fn ssim_identical_is_one() {
        let a = random(5, 16, 20);
        assert!((ssim(&a, &a).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_constant_pair() {
        let a = Image::filled(16, 16, 3, 0.2).unwrap();
        let b = Image::filled(16, 16, 3, 0.4).unwrap();
        let v = ssim(&a, &b).unwrap().value;
        let expect = (2.0 * 0.08 + 1e-4) / (0.04 + 0.16 + 1e-4);
        assert!((v - expect).abs() < 1e-9, "{v}");
        assert!((v - 0.8).abs() < 1e-3);
    }

    #[test]
    fn ssim_anticorrelated_ramp_is_negative() {
        let a = Image::from_fn(16, 16, 1, |_, x, _| x as f64 / 15.0).unwrap();
        let b = a.map(|v| 1.0 - v);
        assert!(ssim(&a, &b).unwrap().value < 0.0);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let a = random(6, 10, 30);
        assert!(ssim(&a, &a).is_err());
    }

    #[test]
    fn ssim_symmetric_and_channel_swap_invariant() {
        let a = random(7, 14, 14);
        let b = random(8, 14, 14);
        let ab = ssim(&a, &b).unwrap().value;
        let ba = ssim(&b, &a).unwrap().value;
        assert!((ab - ba).abs() < 1e-14);
        let swap = |img: &Image| {
            Image::from_fn(14, 14, 3, |y, x, c| img.get(y, x, [2, 0, 1][c])).unwrap()
        };
        let swapped = ssim(&swap(&a), &swap(&b)).unwrap().value;
        assert!((ab - swapped).abs() < 1e-14);
        assert!((-1.0..=1.0).contains(&ab));
    }
}
