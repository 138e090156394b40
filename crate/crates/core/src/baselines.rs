//! Classical reference reconstructions the network results are compared against.

use crate::degradations::{Image, MaskMap};
use crate::error::{Error, Result};

/// Nearest-neighbor upsampling to `height x width`: output pixel `(y, x)`
/// copies low-resolution pixel `(floor(y / factor), floor(x / factor))`,
/// clamped to the last row/column.
pub fn nearest_upsample(low: &Image, factor: usize, height: usize, width: usize) -> Result<Image> {
    if factor == 0 {
        return Err(Error::invalid("upsampling factor must be at least 1"));
    }
    let (lh, lw) = low.dims();
    Image::from_fn(height, width, low.channels(), |y, x, c| {
        low.get((y / factor).min(lh - 1), (x / factor).min(lw - 1), c)
    })
}

/// Keeps observed pixels and fills every missing pixel with the per-channel
/// mean of the observed ones.
pub fn mean_fill(observed: &Image, mask: &MaskMap) -> Result<Image> {
    if observed.dims() != mask.dims() {
        return Err(Error::shapes(
            format!("image {}", observed.shape_str()),
            format!("mask {}x{}", mask.height(), mask.width()),
        ));
    }
    let kept = mask.kept_count();
    if kept == 0 {
        return Err(Error::invalid("mask keeps no pixels"));
    }
    let ch = observed.channels();
    let mut means = vec![0.0; ch];
    for (y, x) in (0..mask.height()).flat_map(|y| (0..mask.width()).map(move |x| (y, x))) {
        if mask.is_kept(y, x) {
            for (c, m) in means.iter_mut().enumerate() {
                *m += observed.get(y, x, c);
            }
        }
    }
    for m in &mut means {
        *m /= kept as f64;
    }
    let (h, w) = observed.dims();
    Image::from_fn(h, w, ch, |y, x, c| {
        if mask.is_kept(y, x) {
            observed.get(y, x, c)
        } else {
            means[c]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_replicates_blocks() {
        let low = Image::from_fn(2, 3, 1, |y, x, _| (y * 3 + x) as f64).unwrap();
        let up = nearest_upsample(&low, 2, 4, 5).unwrap();
        assert_eq!(up.get(0, 0, 0), 0.0);
        assert_eq!(up.get(1, 1, 0), 0.0);
        assert_eq!(up.get(3, 2, 0), 4.0);
        assert_eq!(up.get(3, 4, 0), 5.0);
    }

    #[test]
    fn mean_fill_uses_observed_mean() {
        let img = Image::from_fn(2, 2, 3, |y, x, c| (y * 2 + x) as f64 + c as f64 * 10.0).unwrap();
        let mask = MaskMap::new(2, 2, vec![true, false, false, true]).unwrap();
        let out = mean_fill(&img, &mask).unwrap();
        assert_eq!(out.get(0, 0, 0), 0.0);
        assert_eq!(out.get(0, 1, 0), 1.5);
        assert_eq!(out.get(1, 0, 2), 21.5);
        assert_eq!(out.get(1, 1, 1), 13.0);
        assert!(mean_fill(&img, &MaskMap::new(2, 2, vec![false; 4]).unwrap()).is_err());
    }
}
