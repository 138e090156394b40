//! Slice-wise sine and cosine.
//!
//! The network spends a large share of its time in `sin`/`cos` over whole
//! activation matrices. These routines use a Cody–Waite reduction by pi/2
//! followed by the fdlibm minimax polynomials on `[-pi/4, pi/4]`. The
//! quadrant is read from the bits of a magic-constant rounding and applied
//! with selects and a sign-bit xor, so the loops are branch-free and
//! vectorize. Wider-vector variants are chosen at run time; none of them
//! contracts multiplies and adds, so every variant returns identical bits.
//! Results agree with `f64::sin`/`f64::cos` to a few ulp. Slices containing
//! arguments beyond `REDUCTION_LIMIT` fall back to the standard library.

// the polynomial coefficients are kept digit for digit as fdlibm prints them
#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_2_PI as TWO_OVER_PI;

const REDUCTION_LIMIT: f64 = 1.0e5;

// pi/2 split into three parts; the first two have 33 significant bits so
// q * part is exact for |q| < 2^20.
const PIO2_1: f64 = 1.570_796_326_734_125_614_17e0;
const PIO2_2: f64 = 6.077_100_506_303_965_976_60e-11;
const PIO2_3: f64 = 2.022_266_248_795_950_631_54e-21;
// Adding 1.5 * 2^52 rounds to an integer (ties to even) for |v| < 2^51 and
// leaves that integer in the low mantissa bits.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

const S1: f64 = -1.666_666_666_666_663_243_48e-1;
const S2: f64 = 8.333_333_333_322_489_461_24e-3;
const S3: f64 = -1.984_126_982_985_794_931_34e-4;
const S4: f64 = 2.755_731_370_707_006_767_89e-6;
const S5: f64 = -2.505_076_025_340_686_341_95e-8;
const S6: f64 = 1.589_690_995_211_550_102_21e-10;

const C1: f64 = 4.166_666_666_666_660_190_37e-2;
const C2: f64 = -1.388_888_888_887_410_957_49e-3;
const C3: f64 = 2.480_158_728_947_672_941_78e-5;
const C4: f64 = -2.755_731_435_139_066_330_35e-7;
const C5: f64 = 2.087_572_321_298_174_827_90e-9;
const C6: f64 = -1.135_964_755_778_819_482_65e-11;

#[inline(always)]
fn kernel_sin(r: f64) -> f64 {
    let z = r * r;
    let p = S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)));
    r + r * z * (S1 + z * p)
}

#[inline(always)]
fn kernel_cos(r: f64) -> f64 {
    let z = r * r;
    let p = C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6))));
    let hz = 0.5 * z;
    let w = 1.0 - hz;
    w + (((1.0 - w) - hz) + z * z * p)
}

/// Reduced argument and quadrant bits of `x`.
#[inline(always)]
fn reduce(x: f64) -> (f64, u64) {
    let t = x * TWO_OVER_PI + ROUND_MAGIC;
    let q = t - ROUND_MAGIC;
    let r = ((x - q * PIO2_1) - q * PIO2_2) - q * PIO2_3;
    (r, t.to_bits())
}

/// `sin` of the reduced argument `r` in quadrant `quadrant` (low two bits).
#[inline(always)]
fn from_quadrant(r: f64, quadrant: u64) -> f64 {
    let s = kernel_sin(r);
    let c = kernel_cos(r);
    let v = if quadrant & 1 == 0 { s } else { c };
    f64::from_bits(v.to_bits() ^ ((quadrant & 2) << 62))
}

#[inline(always)]
fn sin_lane(x: f64) -> f64 {
    let (r, q) = reduce(x);
    from_quadrant(r, q)
}

#[inline(always)]
fn cos_lane(x: f64) -> f64 {
    let (r, q) = reduce(x);
    from_quadrant(r, q.wrapping_add(1))
}

/// Defines `$name` as a run-time dispatch over copies of `$body` compiled for
/// the widest available vector instruction set.
macro_rules! multiversion {
    ($(fn $name:ident($($arg:ident: $ty:ty),*) $body:block)*) => {$(
        fn $name($($arg: $ty),*) {
            #[inline(always)]
            fn body($($arg: $ty),*) $body
            #[cfg(target_arch = "x86_64")]
            {
                #[target_feature(enable = "avx512f")]
                unsafe fn wide($($arg: $ty),*) {
                    body($($arg),*)
                }
                #[target_feature(enable = "avx2")]
                unsafe fn mid($($arg: $ty),*) {
                    body($($arg),*)
                }
                if is_x86_feature_detected!("avx512f") {
                    // SAFETY: the required target feature was just detected.
                    return unsafe { wide($($arg),*) };
                }
                if is_x86_feature_detected!("avx2") {
                    // SAFETY: as above.
                    return unsafe { mid($($arg),*) };
                }
            }
            body($($arg),*)
        }
    )*};
}

multiversion! {
    fn sin_fast(x: &[f64], scale: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = sin_lane(v * scale);
        }
    }

    fn cos_fast(x: &[f64], scale: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = cos_lane(v * scale);
        }
    }

    fn sin_cos_fast(x: &[f64], scale: f64, sin_out: &mut [f64], cos_out: &mut [f64]) {
        for ((s, c), &v) in sin_out.iter_mut().zip(cos_out.iter_mut()).zip(x) {
            let (r, q) = reduce(v * scale);
            *s = from_quadrant(r, q);
            *c = from_quadrant(r, q.wrapping_add(1));
        }
    }

    fn sin_cos_in_place_fast(x: &mut [f64], scale: f64, sin_out: &mut [f64], cos_gain: f64) {
        for (s, v) in sin_out.iter_mut().zip(x.iter_mut()) {
            let (r, q) = reduce(*v * scale);
            *s = from_quadrant(r, q);
            *v = from_quadrant(r, q.wrapping_add(1)) * cos_gain;
        }
    }
}

fn within_limit(x: &[f64], scale: f64) -> bool {
    x.iter().fold(0.0f64, |m, v| m.max((v * scale).abs())) <= REDUCTION_LIMIT
}

/// `out[i] = sin(scale * x[i])`.
pub fn sin_scaled(x: &[f64], scale: f64, out: &mut [f64]) {
    assert_eq!(x.len(), out.len());
    if !within_limit(x, scale) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = (v * scale).sin();
        }
        return;
    }
    sin_fast(x, scale, out)
}

/// `out[i] = cos(scale * x[i])`.
pub fn cos_scaled(x: &[f64], scale: f64, out: &mut [f64]) {
    assert_eq!(x.len(), out.len());
    if !within_limit(x, scale) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = (v * scale).cos();
        }
        return;
    }
    cos_fast(x, scale, out)
}

/// Both `sin(scale * x[i])` and `cos(scale * x[i])`, sharing one reduction.
pub fn sin_cos_scaled(x: &[f64], scale: f64, sin_out: &mut [f64], cos_out: &mut [f64]) {
    assert_eq!(x.len(), sin_out.len());
    assert_eq!(x.len(), cos_out.len());
    if !within_limit(x, scale) {
        for ((s, c), &v) in sin_out.iter_mut().zip(cos_out.iter_mut()).zip(x) {
            (*s, *c) = (v * scale).sin_cos();
        }
        return;
    }
    sin_cos_fast(x, scale, sin_out, cos_out)
}

/// Writes `sin(scale * x[i])` to `sin_out[i]` and overwrites `x[i]` with
/// `cos_gain * cos(scale * x[i])`.
pub fn sin_cos_scaled_in_place(x: &mut [f64], scale: f64, sin_out: &mut [f64], cos_gain: f64) {
    assert_eq!(x.len(), sin_out.len());
    if !within_limit(x, scale) {
        for (s, v) in sin_out.iter_mut().zip(x.iter_mut()) {
            let (sv, cv) = (*v * scale).sin_cos();
            (*s, *v) = (sv, cv * cos_gain);
        }
        return;
    }
    sin_cos_in_place_fast(x, scale, sin_out, cos_gain)
}

/// In-place `sin`.
pub fn sin_in_place(x: &mut [f64]) {
    if !within_limit(x, 1.0) {
        for v in x.iter_mut() {
            *v = v.sin();
        }
        return;
    }
    for v in x.iter_mut() {
        *v = sin_lane(*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1e-300) + 1e-16
    }

    #[test]
    fn special_points() {
        let xs = [0.0, -0.0, 1e-300, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, -3.0];
        let mut s = [0.0; 6];
        let mut c = [0.0; 6];
        sin_scaled(&xs, 1.0, &mut s);
        cos_scaled(&xs, 1.0, &mut c);
        for i in 0..xs.len() {
            assert!((s[i] - xs[i].sin()).abs() < 1e-16, "sin {}", xs[i]);
            assert!((c[i] - xs[i].cos()).abs() < 1e-16, "cos {}", xs[i]);
        }
        assert_eq!(s[0], 0.0);
        assert_eq!(c[0], 1.0);
    }

    #[test]
    fn large_arguments_fall_back() {
        let xs = [3.0e7, -1.0, 2.0];
        let mut s = [0.0; 3];
        sin_scaled(&xs, 1.0, &mut s);
        for i in 0..3 {
            assert_eq!(s[i], xs[i].sin());
        }
    }

    #[test]
    fn in_place_matches_scaled() {
        let mut xs: Vec<f64> = (0..257).map(|i| (i as f64 - 128.0) * 0.731).collect();
        let mut expect = vec![0.0; xs.len()];
        sin_scaled(&xs, 1.0, &mut expect);
        sin_in_place(&mut xs);
        assert_eq!(xs, expect);
    }

    #[test]
    fn every_variant_matches_scalar_lanes() {
        let xs: Vec<f64> = (0..1031).map(|i| (i as f64 - 515.0) * 0.377).collect();
        let mut s = vec![0.0; xs.len()];
        let mut c = vec![0.0; xs.len()];
        let mut s2 = vec![0.0; xs.len()];
        let mut c2 = vec![0.0; xs.len()];
        sin_scaled(&xs, 30.0, &mut s);
        cos_scaled(&xs, 30.0, &mut c);
        sin_cos_scaled(&xs, 30.0, &mut s2, &mut c2);
        for i in 0..xs.len() {
            assert_eq!(s[i].to_bits(), sin_lane(xs[i] * 30.0).to_bits());
            assert_eq!(c[i].to_bits(), cos_lane(xs[i] * 30.0).to_bits());
        }
        assert_eq!(s, s2);
        assert_eq!(c, c2);
        let mut inplace: Vec<f64> = xs.clone();
        sin_cos_scaled_in_place(&mut inplace, 30.0, &mut s2, 1.0);
        assert_eq!(s, s2);
        assert_eq!(c, inplace);
    }

    proptest! {
        #[test]
        fn matches_std_on_activation_range(x in -2000.0f64..2000.0) {
            let mut s = [0.0];
            let mut c = [0.0];
            sin_scaled(&[x], 1.0, &mut s);
            cos_scaled(&[x], 1.0, &mut c);
            prop_assert!((s[0] - x.sin()).abs() < 1e-15, "sin({x}) {} vs {}", s[0], x.sin());
            prop_assert!((c[0] - x.cos()).abs() < 1e-15, "cos({x}) {} vs {}", c[0], x.cos());
        }

        #[test]
        fn relative_accuracy_near_zero(x in -1.0f64..1.0) {
            let mut s = [0.0];
            sin_scaled(&[x], 1.0, &mut s);
            prop_assert!(close(s[0], x.sin()));
        }
    }
}
