//! Seeded piecewise-smooth RGB test scenes.
//!
//! A scene is a smooth two-axis color gradient with a handful of shapes
//! (discs and axis-aligned boxes) pasted on top. Every shape carries its own
//! linear color ramp, so the image is smooth inside each region and has sharp
//! edges between regions.

use crate::degradations::Image;
use crate::error::{Error, Result};
use crate::numerics::Rng;

const SHAPES: usize = 6;

enum Shape {
    Disc { cy: f64, cx: f64, r: f64 },
    Boxed { y0: f64, x0: f64, y1: f64, x1: f64 },
}

impl Shape {
    fn contains(&self, y: f64, x: f64) -> bool {
        match *self {
            Shape::Disc { cy, cx, r } => (y - cy).powi(2) + (x - cx).powi(2) <= r * r,
            Shape::Boxed { y0, x0, y1, x1 } => y >= y0 && y <= y1 && x >= x0 && x <= x1,
        }
    }
}

/// Color `base + gy * y + gx * x` per channel, in unit coordinates.
struct Ramp {
    base: [f64; 3],
    gy: [f64; 3],
    gx: [f64; 3],
}

impl Ramp {
    fn sample(rng: &mut Rng, slope: f64) -> Ramp {
        let mut pick = |lo: f64, hi: f64| lo + (hi - lo) * rng.next_f64();
        Ramp {
            base: [pick(0.15, 0.85), pick(0.15, 0.85), pick(0.15, 0.85)],
            gy: [pick(-slope, slope), pick(-slope, slope), pick(-slope, slope)],
            gx: [pick(-slope, slope), pick(-slope, slope), pick(-slope, slope)],
        }
    }

    fn at(&self, y: f64, x: f64, c: usize) -> f64 {
        (self.base[c] + self.gy[c] * (y - 0.5) + self.gx[c] * (x - 0.5)).clamp(0.0, 1.0)
    }
}

/// Deterministic `height x width` RGB scene with values in `[0, 1]`.
pub fn piecewise_smooth(seed: u64, height: usize, width: usize) -> Result<Image> {
    if height == 0 || width == 0 {
        return Err(Error::invalid("scene must be non-empty"));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let background = Ramp::sample(&mut rng, 0.6);
    let mut shapes = Vec::with_capacity(SHAPES);
    for i in 0..SHAPES {
        let shape = if i % 2 == 0 {
            Shape::Disc {
                cy: rng.next_f64(),
                cx: rng.next_f64(),
                r: 0.1 + 0.2 * rng.next_f64(),
            }
        } else {
            let (ya, yb) = (rng.next_f64(), rng.next_f64());
            let (xa, xb) = (rng.next_f64(), rng.next_f64());
            Shape::Boxed {
                y0: ya.min(yb),
                x0: xa.min(xb),
                y1: ya.max(yb).max(ya.min(yb) + 0.15),
                x1: xa.max(xb).max(xa.min(xb) + 0.15),
            }
        };
        shapes.push((shape, Ramp::sample(&mut rng, 0.8)));
    }
    let (fh, fw) = (height as f64, width as f64);
    Image::from_fn(height, width, 3, |y, x, c| {
        let (u, v) = ((y as f64 + 0.5) / fh, (x as f64 + 0.5) / fw);
        // later shapes are drawn over earlier ones
        shapes
            .iter()
            .rev()
            .find(|(s, _)| s.contains(u, v))
            .map_or_else(|| background.at(u, v, c), |(_, ramp)| ramp.at(u, v, c))
    })
}
