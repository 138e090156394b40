//! Images, pixel coordinate grids, corruption synthesis and the linear
//! degradation operators (identity, downsampling, masking, blur) together
//! with their exact adjoints.
//!
//! Downsampling and blur are separable. Each axis is a sparse matrix whose
//! rows already fold symmetric boundary reflection into the tap weights, so
//! the adjoint is the literal transpose of what `apply` computes.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

pub const DEFAULT_SR_FACTOR: usize = 4;
pub const DEFAULT_MASK_SPARSITY: f64 = 0.1;
pub const DEFAULT_BLUR_SIGMA: f64 = 1.6;
pub const DEFAULT_BLUR_WIDTH: usize = 25;
pub const DEFAULT_NOISE_SIGMA: f64 = 25.0;

/// `H x W x C` image, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Image> {
        if height == 0 || width == 0 || !(channels == 1 || channels == 3) {
            return Err(Error::invalid(format!(
                "image must be non-empty with 1 or 3 channels, got {height}x{width}x{channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::shapes(
                format!("{height}x{width}x{channels} image"),
                format!("{} values", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data".into()));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Image> {
        Image::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds an image from `f(y, x, channel)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Image> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Image::new(height, width, channels, data)
    }

    pub(crate) fn zeros_unchecked(height: usize, width: usize, channels: usize) -> Image {
        Image {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    /// Reinterprets an `(H*W) x C` matrix as an image.
    pub fn from_matrix(height: usize, width: usize, m: &Matrix) -> Result<Image> {
        if m.rows() != height * width {
            return Err(Error::shapes(
                format!("{height}x{width} grid"),
                format!("{} matrix rows", m.rows()),
            ));
        }
        Image::new(height, width, m.cols(), m.data().to_vec())
    }

    /// The pixels as an `(H*W) x C` matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec_unchecked(self.height * self.width, self.channels, self.data.clone())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        (self.height, self.width, self.channels) == (other.height, other.width, other.channels)
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shapes(self.shape_str(), other.shape_str()))
        }
    }

    pub fn shape_str(&self) -> String {
        format!("{}x{}x{}", self.height, self.width, self.channels)
    }

    /// Copy with every value clamped to `[0, 1]`.
    pub fn clamped(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Grayscale images are replicated into three channels; RGB is returned as is.
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Image {
            height: self.height,
            width: self.width,
            channels: 3,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn add(&self, other: &Image) -> Result<Image> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Image) -> Result<Image> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Image {
        self.map(|v| v * s)
    }

    fn zip_with(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.check_same_shape(other)?;
        let data: Vec<f64> = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image arithmetic".into()));
        }
        Ok(Image { data, ..*self })
    }

    /// Euclidean inner product over all elements.
    pub fn dot(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Per-channel mean.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (s, v) in sums.iter_mut().zip(px) {
                *s += v;
            }
        }
        let n = (self.height * self.width) as f64;
        sums.into_iter().map(|s| s / n).collect()
    }
}

/// Normalized pixel coordinates, one `(y, x)` row per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordGrid {
    height: usize,
    width: usize,
    coords: Matrix,
}

impl CoordGrid {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn coords(&self) -> &Matrix {
        &self.coords
    }
}

fn linspace(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let step = 2.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { 1.0 } else { -1.0 + step * i as f64 })
        .collect()
}

/// `h x w` grid, each axis evenly spaced over `[-1, 1]` inclusive.
pub fn make_coord_grid(h: usize, w: usize) -> Result<CoordGrid> {
    if h == 0 || w == 0 {
        return Err(Error::invalid(format!("coordinate grid must be non-empty, got {h}x{w}")));
    }
    let ys = linspace(h);
    let xs = linspace(w);
    let mut data = Vec::with_capacity(h * w * 2);
    for &y in &ys {
        for &x in &xs {
            data.push(y);
            data.push(x);
        }
    }
    Ok(CoordGrid {
        height: h,
        width: w,
        coords: Matrix::from_vec_unchecked(h * w, 2, data),
    })
}

/// Normalized 1D Gaussian, applied along rows and then columns.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    width: usize,
    sigma: f64,
    weights: Vec<f64>,
}

impl BlurKernel {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> usize {
        self.width / 2
    }
}

pub fn gaussian_kernel(width: usize, sigma: f64) -> Result<BlurKernel> {
    if width.is_multiple_of(2) {
        return Err(Error::invalid(format!("blur kernel width must be odd, got {width}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma must be positive, got {sigma}")));
    }
    let r = (width / 2) as f64;
    let mut weights: Vec<f64> = (0..width)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    // exact mirror symmetry regardless of summation rounding
    for i in 0..width / 2 {
        weights[width - 1 - i] = weights[i];
    }
    Ok(BlurKernel {
        width,
        sigma,
        weights,
    })
}

/// Which pixels are observed; shared across channels.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskMap {
    height: usize,
    width: usize,
    keep: Vec<bool>,
}

impl MaskMap {
    pub fn new(height: usize, width: usize, keep: Vec<bool>) -> Result<MaskMap> {
        if height == 0 || width == 0 || keep.len() != height * width {
            return Err(Error::shapes(
                format!("{height}x{width} mask"),
                format!("{} entries", keep.len()),
            ));
        }
        Ok(MaskMap {
            height,
            width,
            keep,
        })
    }

    pub fn all_kept(height: usize, width: usize) -> Result<MaskMap> {
        MaskMap::new(height, width, vec![true; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn is_kept(&self, y: usize, x: usize) -> bool {
        self.keep[y * self.width + x]
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn kept_fraction(&self) -> f64 {
        self.kept_count() as f64 / self.keep.len() as f64
    }
}

/// Keeps each pixel independently with probability `sparsity`.
pub fn sample_mask(rng: &mut Rng, h: usize, w: usize, sparsity: f64) -> Result<MaskMap> {
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::invalid(format!("mask sparsity must be in (0, 1], got {sparsity}")));
    }
    if h == 0 || w == 0 {
        return Err(Error::invalid(format!("mask must be non-empty, got {h}x{w}")));
    }
    let keep = (0..h * w).map(|_| rng.next_f64() < sparsity).collect();
    MaskMap::new(h, w, keep)
}

/// Adds i.i.d. `N(0, (sigma255/255)^2)` to every element; no clamping.
pub fn add_gaussian_noise(rng: &mut Rng, img: &Image, sigma255: f64) -> Result<Image> {
    if !(sigma255 >= 0.0) || !sigma255.is_finite() {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma255}")));
    }
    let noise = rng.normal(img.data.len(), 0.0, sigma255 / 255.0)?;
    let data = img.data.iter().zip(&noise).map(|(v, n)| v + n).collect();
    Image::new(img.height, img.width, img.channels, data)
}

/// Symmetric (edge-duplicating) reflection of an index into `[0, n)`.
fn reflect(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Sparse `out_len x in_len` matrix acting on one image axis.
#[derive(Clone, Debug, PartialEq)]
struct AxisOperator {
    in_len: usize,
    out_len: usize,
    taps: Vec<Vec<(usize, f64)>>,
}

impl AxisOperator {
    /// Builds a row from unreflected `(index, weight)` pairs, merging
    /// indices that reflect onto the same sample.
    fn push_row(&mut self, raw: impl IntoIterator<Item = (i64, f64)>) {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (j, w) in raw {
            let idx = reflect(j, self.in_len);
            match row.iter_mut().find(|(k, _)| *k == idx) {
                Some(entry) => entry.1 += w,
                None => row.push((idx, w)),
            }
        }
        row.sort_by_key(|&(k, _)| k);
        self.taps.push(row);
    }

    fn lanczos2(in_len: usize, factor: usize) -> AxisOperator {
        let out_len = in_len.div_ceil(factor);
        let s = factor as f64;
        let mut op = AxisOperator {
            in_len,
            out_len,
            taps: Vec::with_capacity(out_len),
        };
        for o in 0..out_len {
            let center = (o as f64 + 0.5) * s - 0.5;
            let support = 2.0 * s;
            let lo = (center - support).floor() as i64;
            let hi = (center + support).ceil() as i64;
            let raw: Vec<(i64, f64)> = (lo..=hi)
                .filter_map(|j| {
                    let u = j as f64 - center;
                    (u.abs() < support).then(|| (j, lanczos2_kernel(u / s)))
                })
                .filter(|&(_, w)| w != 0.0)
                .collect();
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            op.push_row(raw.into_iter().map(|(j, w)| (j, w / total)));
        }
        op
    }

    fn convolution(len: usize, kernel: &BlurKernel) -> AxisOperator {
        let r = kernel.radius() as i64;
        let mut op = AxisOperator {
            in_len: len,
            out_len: len,
            taps: Vec::with_capacity(len),
        };
        for o in 0..len as i64 {
            op.push_row(
                kernel
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(t, &w)| (o + t as i64 - r, w)),
            );
        }
        op
    }
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        let x = std::f64::consts::PI * t;
        x.sin() / x
    }
}

/// `sinc(t) * sinc(t/2)` on `|t| < 2`, zero outside.
pub fn lanczos2_kernel(t: f64) -> f64 {
    if t.abs() < 2.0 {
        sinc(t) * sinc(t / 2.0)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Rows,
    Cols,
}

/// Applies `op` (or its transpose) along one axis of `img`.
fn apply_axis(img: &Image, op: &AxisOperator, axis: Axis, transpose: bool) -> Image {
    let c = img.channels;
    let (src_len, dst_len) = if transpose {
        (op.out_len, op.in_len)
    } else {
        (op.in_len, op.out_len)
    };
    match axis {
        Axis::Rows => {
            assert_eq!(img.height, src_len);
            let row_len = img.width * c;
            let mut out = Image::zeros_unchecked(dst_len, img.width, c);
            for (o, taps) in op.taps.iter().enumerate() {
                for &(j, w) in taps {
                    let (src, dst) = if transpose { (o, j) } else { (j, o) };
                    let s = &img.data[src * row_len..(src + 1) * row_len];
                    let d = &mut out.data[dst * row_len..(dst + 1) * row_len];
                    for (dv, sv) in d.iter_mut().zip(s) {
                        *dv += w * sv;
                    }
                }
            }
            out
        }
        Axis::Cols => {
            assert_eq!(img.width, src_len);
            let mut out = Image::zeros_unchecked(img.height, dst_len, c);
            for y in 0..img.height {
                let s_row = &img.data[y * src_len * c..(y + 1) * src_len * c];
                let d_row = &mut out.data[y * dst_len * c..(y + 1) * dst_len * c];
                for (o, taps) in op.taps.iter().enumerate() {
                    for &(j, w) in taps {
                        let (src, dst) = if transpose { (o, j) } else { (j, o) };
                        for ch in 0..c {
                            d_row[dst * c + ch] += w * s_row[src * c + ch];
                        }
                    }
                }
            }
            out
        }
    }
}

/// Descriptive kind of a [`DegradationOp`].
#[derive(Clone, Debug, PartialEq)]
pub enum OpKind {
    Identity,
    /// Antialiased lanczos2 downsampling by an integer factor.
    Downsample { factor: usize },
    Mask(MaskMap),
    Blur(BlurKernel),
}

/// A linear map from a render (`input_dims`) to an observation (`output_dims`).
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationOp {
    kind: OpKind,
    input_dims: (usize, usize),
    output_dims: (usize, usize),
    separable: Option<(AxisOperator, AxisOperator)>,
}

impl DegradationOp {
    pub fn identity(h: usize, w: usize) -> Result<DegradationOp> {
        if h == 0 || w == 0 {
            return Err(Error::invalid("identity operator needs non-empty dims"));
        }
        Ok(DegradationOp {
            kind: OpKind::Identity,
            input_dims: (h, w),
            output_dims: (h, w),
            separable: None,
        })
    }

    /// Lanczos2 downsampling of an `h x w` render by `factor`; output is
    /// `ceil(h/factor) x ceil(w/factor)`.
    pub fn downsample(h: usize, w: usize, factor: usize) -> Result<DegradationOp> {
        if factor == 0 {
            return Err(Error::invalid("downsampling factor must be at least 1"));
        }
        if h == 0 || w == 0 {
            return Err(Error::invalid("downsampling needs non-empty dims"));
        }
        let rows = AxisOperator::lanczos2(h, factor);
        let cols = AxisOperator::lanczos2(w, factor);
        Ok(DegradationOp {
            kind: OpKind::Downsample { factor },
            input_dims: (h, w),
            output_dims: (rows.out_len, cols.out_len),
            separable: Some((rows, cols)),
        })
    }

    pub fn mask(map: MaskMap) -> DegradationOp {
        let dims = map.dims();
        DegradationOp {
            kind: OpKind::Mask(map),
            input_dims: dims,
            output_dims: dims,
            separable: None,
        }
    }

    /// Separable blur of an `h x w` render with symmetric boundary reflection.
    pub fn blur(h: usize, w: usize, kernel: BlurKernel) -> Result<DegradationOp> {
        if h == 0 || w == 0 {
            return Err(Error::invalid("blur needs non-empty dims"));
        }
        let rows = AxisOperator::convolution(h, &kernel);
        let cols = AxisOperator::convolution(w, &kernel);
        Ok(DegradationOp {
            kind: OpKind::Blur(kernel),
            input_dims: (h, w),
            output_dims: (h, w),
            separable: Some((rows, cols)),
        })
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OpKind::Identity => "identity",
            OpKind::Downsample { .. } => "downsample",
            OpKind::Mask(_) => "mask",
            OpKind::Blur(_) => "blur",
        }
    }

    pub fn input_dims(&self) -> (usize, usize) {
        self.input_dims
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.output_dims
    }

    /// The mask, for mask operators.
    pub fn mask_map(&self) -> Option<&MaskMap> {
        match &self.kind {
            OpKind::Mask(m) => Some(m),
            _ => None,
        }
    }

    fn check_dims(&self, img: &Image, expected: (usize, usize), side: &str) -> Result<()> {
        if img.dims() != expected {
            return Err(Error::shapes(
                format!("{} {side} {}x{}", self.name(), expected.0, expected.1),
                format!("image {}", img.shape_str()),
            ));
        }
        Ok(())
    }

    /// Forward action on an image of `input_dims`.
    pub fn apply(&self, img: &Image) -> Result<Image> {
        self.check_dims(img, self.input_dims, "input")?;
        Ok(match &self.kind {
            OpKind::Identity => img.clone(),
            OpKind::Mask(map) => masked(img, map),
            OpKind::Downsample { .. } | OpKind::Blur(_) => {
                let (rows, cols) = self.separable.as_ref().expect("separable operator");
                let tmp = apply_axis(img, rows, Axis::Rows, false);
                apply_axis(&tmp, cols, Axis::Cols, false)
            }
        })
    }

    /// Transpose action on an image of `output_dims`.
    pub fn adjoint(&self, img: &Image) -> Result<Image> {
        self.check_dims(img, self.output_dims, "output")?;
        Ok(match &self.kind {
            OpKind::Identity => img.clone(),
            OpKind::Mask(map) => masked(img, map),
            OpKind::Downsample { .. } | OpKind::Blur(_) => {
                let (rows, cols) = self.separable.as_ref().expect("separable operator");
                let tmp = apply_axis(img, cols, Axis::Cols, true);
                apply_axis(&tmp, rows, Axis::Rows, true)
            }
        })
    }
}

fn masked(img: &Image, map: &MaskMap) -> Image {
    let c = img.channels;
    let mut out = img.clone();
    for (px, &keep) in out.data.chunks_exact_mut(c).zip(&map.keep) {
        if !keep {
            px.fill(0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(rng: &mut Rng, h: usize, w: usize, c: usize) -> Image {
        Image::new(h, w, c, rng.uniform(h * w * c, -1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn grid_endpoints() {
        let g = make_coord_grid(2, 2).unwrap();
        assert_eq!(
            g.coords().data(),
            &[-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0]
        );
        let g = make_coord_grid(1, 1).unwrap();
        assert_eq!(g.coords().data(), &[0.0, 0.0]);
        let g = make_coord_grid(3, 1).unwrap();
        let ys: Vec<f64> = (0..3).map(|r| g.coords().get(r, 0)).collect();
        assert_eq!(ys, vec![-1.0, 0.0, 1.0]);
        assert!(make_coord_grid(0, 3).is_err());
    }

    #[test]
    fn grid_in_unit_box() {
        let g = make_coord_grid(7, 13).unwrap();
        assert!(g.coords().data().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(g.coords().rows(), 91);
    }

    #[test]
    fn kernel_properties() {
        let k = gaussian_kernel(25, 1.6).unwrap();
        let sum: f64 = k.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..25 {
            assert_eq!(k.weights()[i], k.weights()[24 - i]);
        }
        assert!((k.weights()[12] - 0.2494).abs() < 1e-3, "{}", k.weights()[12]);
        assert!(gaussian_kernel(24, 1.6).is_err());
        assert!(gaussian_kernel(5, 0.0).is_err());
    }

    #[test]
    fn lanczos_kernel_values() {
        assert_eq!(lanczos2_kernel(0.0), 1.0);
        assert!(lanczos2_kernel(1.0).abs() < 1e-16);
        assert_eq!(lanczos2_kernel(2.0), 0.0);
        assert!(lanczos2_kernel(1.5) < 0.0);
    }

    #[test]
    fn reflect_is_symmetric() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-2, 5), 1);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(-13, 3), 0);
        assert_eq!(reflect(7, 1), 0);
    }

    #[test]
    fn downsample_dims_and_constants() {
        let op = DegradationOp::downsample(64, 64, 4).unwrap();
        assert_eq!(op.output_dims(), (16, 16));
        let op = DegradationOp::downsample(10, 7, 4).unwrap();
        assert_eq!(op.output_dims(), (3, 2));
        let img = Image::filled(10, 7, 3, 0.37).unwrap();
        let out = op.apply(&img).unwrap();
        for v in out.data() {
            assert!((v - 0.37).abs() < 1e-14);
        }
        assert!(DegradationOp::downsample(8, 8, 0).is_err());
    }

    #[test]
    fn factor_one_is_identity() {
        let mut rng = Rng::seed_from_u64(3);
        let img = random_image(&mut rng, 9, 6, 3);
        let op = DegradationOp::downsample(9, 6, 1).unwrap();
        assert!(op.apply(&img).unwrap().max_abs_diff(&img).unwrap() < 1e-12);
    }

    #[test]
    fn blur_keeps_constants() {
        let op = DegradationOp::blur(5, 8, gaussian_kernel(25, 1.6).unwrap()).unwrap();
        let img = Image::filled(5, 8, 3, 0.6).unwrap();
        let out = op.apply(&img).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() < 1e-14);
    }

    #[test]
    fn identity_and_full_mask_pass_through() {
        let mut rng = Rng::seed_from_u64(4);
        let img = random_image(&mut rng, 4, 5, 3);
        let id = DegradationOp::identity(4, 5).unwrap();
        assert_eq!(id.apply(&img).unwrap(), img);
        assert_eq!(id.adjoint(&img).unwrap(), img);
        let m = DegradationOp::mask(MaskMap::all_kept(4, 5).unwrap());
        assert_eq!(m.apply(&img).unwrap(), img);
    }

    #[test]
    fn mask_self_adjoint_and_idempotent() {
        let mut rng = Rng::seed_from_u64(5);
        let img = random_image(&mut rng, 6, 6, 3);
        let op = DegradationOp::mask(sample_mask(&mut rng, 6, 6, 0.4).unwrap());
        let once = op.apply(&img).unwrap();
        assert_eq!(op.adjoint(&img).unwrap(), once);
        assert_eq!(op.apply(&once).unwrap(), once);
    }

    #[test]
    fn apply_checks_dims() {
        let op = DegradationOp::downsample(8, 8, 2).unwrap();
        let wrong = Image::filled(4, 4, 3, 0.0).unwrap();
        assert!(op.apply(&wrong).is_err());
        assert!(op.adjoint(&Image::filled(8, 8, 3, 0.0).unwrap()).is_err());
        assert!(op.adjoint(&wrong).is_ok());
    }

    #[test]
    fn adjoint_identity_all_ops() {
        let mut rng = Rng::seed_from_u64(6);
        let (h, w) = (11, 9);
        let ops = vec![
            DegradationOp::identity(h, w).unwrap(),
            DegradationOp::downsample(h, w, 2).unwrap(),
            DegradationOp::downsample(h, w, 4).unwrap(),
            DegradationOp::mask(sample_mask(&mut rng, h, w, 0.3).unwrap()),
            DegradationOp::blur(h, w, gaussian_kernel(7, 1.0).unwrap()).unwrap(),
            DegradationOp::blur(h, w, gaussian_kernel(25, 1.6).unwrap()).unwrap(),
        ];
        for op in &ops {
            for _ in 0..20 {
                let x = random_image(&mut rng, h, w, 3);
                let (oh, ow) = op.output_dims();
                let y = random_image(&mut rng, oh, ow, 3);
                let lhs = op.apply(&x).unwrap().dot(&y).unwrap();
                let rhs = x.dot(&op.adjoint(&y).unwrap()).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "{}: {lhs} vs {rhs}", op.name());
            }
        }
    }

    #[test]
    fn mask_sampling() {
        let mut rng = Rng::seed_from_u64(7);
        let all = sample_mask(&mut rng, 8, 8, 1.0).unwrap();
        assert_eq!(all.kept_count(), 64);
        let a = sample_mask(&mut Rng::seed_from_u64(9), 32, 32, 0.3).unwrap();
        let b = sample_mask(&mut Rng::seed_from_u64(9), 32, 32, 0.3).unwrap();
        assert_eq!(a, b);
        let big = sample_mask(&mut rng, 256, 256, 0.1).unwrap();
        assert!((big.kept_fraction() - 0.1).abs() < 0.01);
        assert!(sample_mask(&mut rng, 4, 4, 0.0).is_err());
        assert!(sample_mask(&mut rng, 4, 4, 1.5).is_err());
    }

    #[test]
    fn noise_synthesis() {
        let clean = Image::filled(256, 256, 3, 0.5).unwrap();
        let same = add_gaussian_noise(&mut Rng::seed_from_u64(1), &clean, 0.0).unwrap();
        assert_eq!(same, clean);
        let noisy = add_gaussian_noise(&mut Rng::seed_from_u64(1), &clean, 25.0).unwrap();
        let again = add_gaussian_noise(&mut Rng::seed_from_u64(1), &clean, 25.0).unwrap();
        assert_eq!(noisy, again);
        let diff = noisy.sub(&clean).unwrap();
        let n = diff.data().len() as f64;
        let mean = diff.data().iter().sum::<f64>() / n;
        let std = (diff.data().iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - 0.098).abs() < 0.002, "{std}");
        assert!(add_gaussian_noise(&mut Rng::seed_from_u64(1), &clean, -1.0).is_err());
    }
}
