//! Turning a task kind, an observation and run settings into the operator,
//! task and training configuration of a run. The command line and the
//! examples both go through here.

use crate::config::{Settings, TaskKind};
use crate::degradations::{
    add_gaussian_noise, gaussian_kernel, sample_mask, DegradationOp, Image, MaskMap,
};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::restoration::{TaskSpec, TrainConfig};

/// Resolution of the render that explains an observation of `dims`.
pub fn canonical_dims(kind: TaskKind, dims: (usize, usize), factor: usize) -> (usize, usize) {
    match kind {
        TaskKind::Sr => (dims.0 * factor, dims.1 * factor),
        _ => dims,
    }
}

/// The operator mapping a `canonical` render to a `kind` observation.
pub fn operator(
    kind: TaskKind,
    canonical: (usize, usize),
    settings: &Settings,
    mask: Option<&MaskMap>,
) -> Result<DegradationOp> {
    let (h, w) = canonical;
    match kind {
        TaskKind::Denoise => DegradationOp::identity(h, w),
        TaskKind::Sr => DegradationOp::downsample(h, w, settings.factor),
        TaskKind::Inpaint => {
            let mask = mask.ok_or_else(|| Error::invalid("inpainting needs a mask"))?;
            if mask.dims() != canonical {
                return Err(Error::shapes(
                    format!("render {h}x{w}"),
                    format!("mask {}x{}", mask.height(), mask.width()),
                ));
            }
            Ok(DegradationOp::mask(mask.clone()))
        }
        TaskKind::Deblur => {
            DegradationOp::blur(h, w, gaussian_kernel(settings.blur_width, settings.blur_sigma)?)
        }
    }
}

/// A task for `observed` (grayscale is replicated to RGB).
pub fn build_task(
    kind: TaskKind,
    observed: &Image,
    canonical: (usize, usize),
    settings: &Settings,
    mask: Option<&MaskMap>,
    weight: f64,
) -> Result<TaskSpec> {
    let op = operator(kind, canonical, settings, mask)?;
    TaskSpec::new(observed.to_rgb(), op, weight)
}

/// Training configuration for a run whose iteration default follows `kind`.
pub fn train_config(
    settings: &Settings,
    kind: TaskKind,
    canonical: (usize, usize),
    reference: Option<Image>,
) -> TrainConfig {
    let (activation, encoding) = settings.activation.network(settings.posenc_freqs);
    let mut cfg = TrainConfig::new(canonical);
    cfg.iterations = settings.iterations_for(kind);
    cfg.learning_rate = settings.lr;
    cfg.seed = settings.seed;
    cfg.width = settings.width;
    cfg.depth = settings.depth;
    cfg.omega0 = settings.omega0;
    cfg.activation = activation;
    cfg.encoding = encoding;
    cfg.snapshot_every = settings.snapshot_every;
    cfg.reference = reference.map(|r| r.to_rgb());
    cfg
}

/// A synthetic corruption of `clean`. Inpainting samples a fresh mask
/// (returned alongside) and zeroes the dropped pixels.
pub fn corrupt(
    kind: TaskKind,
    clean: &Image,
    settings: &Settings,
) -> Result<(Image, Option<MaskMap>)> {
    let mut rng = Rng::seed_from_u64(settings.seed);
    let (h, w) = clean.dims();
    match kind {
        TaskKind::Denoise => Ok((add_gaussian_noise(&mut rng, clean, settings.noise_sigma)?, None)),
        TaskKind::Inpaint => {
            let mask = sample_mask(&mut rng, h, w, settings.mask_sparsity)?;
            let op = DegradationOp::mask(mask.clone());
            Ok((op.apply(clean)?, Some(mask)))
        }
        TaskKind::Sr | TaskKind::Deblur => {
            Ok((operator(kind, (h, w), settings, None)?.apply(clean)?, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sr_canonical_and_operator_shapes() {
        let s = Settings::default();
        assert_eq!(canonical_dims(TaskKind::Sr, (5, 7), 4), (20, 28));
        assert_eq!(canonical_dims(TaskKind::Deblur, (5, 7), 4), (5, 7));
        let op = operator(TaskKind::Sr, (21, 30), &s, None).unwrap();
        assert_eq!(op.output_dims(), (6, 8));
        assert!(operator(TaskKind::Inpaint, (4, 4), &s, None).is_err());
    }

    #[test]
    fn corruptions_are_seeded() {
        let clean = Image::from_fn(12, 12, 3, |y, x, c| (y + x + c) as f64 / 40.0).unwrap();
        let s = Settings {
            seed: 3,
            ..Settings::default()
        };
        let (a, _) = corrupt(TaskKind::Denoise, &clean, &s).unwrap();
        let (b, _) = corrupt(TaskKind::Denoise, &clean, &s).unwrap();
        assert_eq!(a, b);
        let (holes, mask) = corrupt(TaskKind::Inpaint, &clean, &s).unwrap();
        let mask = mask.unwrap();
        for y in 0..12 {
            for x in 0..12 {
                let expect = if mask.is_kept(y, x) { clean.get(y, x, 1) } else { 0.0 };
                assert_eq!(holes.get(y, x, 1), expect);
            }
        }
        let (low, _) = corrupt(TaskKind::Sr, &clean, &s).unwrap();
        assert_eq!(low.dims(), (3, 3));
    }

    #[test]
    fn train_config_follows_settings() {
        let s = Settings {
            activation: crate::config::Activation::ReluPe,
            posenc_freqs: 3,
            ..Settings::default()
        };
        let cfg = train_config(&s, TaskKind::Deblur, (8, 8), None);
        assert_eq!(cfg.iterations, 4000);
        assert_eq!(cfg.encoding.output_dim(2), 12);
    }
}
