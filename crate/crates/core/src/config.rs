//! Run settings shared by the command line and TOML run files.
//!
//! A run file holds the same keys as the flags (with `_` in place of `-`),
//! every key optional. `[[tasks]]` tables describe joint observations.
//! Relative paths are resolved against the directory holding the file.
//!
//! ```toml
//! task = "sr"
//! input = "low.png"
//! out = "restored.png"
//! factor = 4
//! iters = 500
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::degradations::{
    DEFAULT_BLUR_SIGMA, DEFAULT_BLUR_WIDTH, DEFAULT_MASK_SPARSITY, DEFAULT_NOISE_SIGMA,
    DEFAULT_SR_FACTOR,
};
use crate::error::{Error, Result};
use crate::network::{
    ActivationKind, InputEncoding, DEFAULT_DEPTH, DEFAULT_OMEGA0, DEFAULT_POSENC_FREQUENCIES,
    DEFAULT_WIDTH,
};
use crate::restoration::{
    DEFAULT_DEBLUR_ITERATIONS, DEFAULT_ITERATIONS, DEFAULT_LEARNING_RATE, DEFAULT_SNAPSHOT_EVERY,
    NOISY_TASK_WEIGHT,
};

const MAX_ITERATIONS: usize = 10_000_000;
const MAX_WIDTH: usize = 4096;
const MAX_DEPTH: usize = 64;
const MAX_POSENC_FREQUENCIES: usize = 30;
const MAX_FACTOR: usize = 64;
const MAX_BLUR_WIDTH: usize = 255;

/// The four restoration recipes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Denoise,
    Sr,
    Inpaint,
    Deblur,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Denoise => "denoise",
            TaskKind::Sr => "sr",
            TaskKind::Inpaint => "inpaint",
            TaskKind::Deblur => "deblur",
        }
    }

    /// Loss weight in joint runs when none is given: noisy observations are
    /// down-weighted so the cleaner ones dominate.
    pub fn default_joint_weight(self) -> f64 {
        match self {
            TaskKind::Denoise => NOISY_TASK_WEIGHT,
            _ => 1.0,
        }
    }

    pub fn default_iterations(self) -> usize {
        match self {
            TaskKind::Deblur => DEFAULT_DEBLUR_ITERATIONS,
            _ => DEFAULT_ITERATIONS,
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<TaskKind> {
        <TaskKind as ValueEnum>::from_str(s, true)
            .map_err(|_| Error::Config(format!("unknown task kind {s:?} (denoise, sr, inpaint, deblur)")))
    }
}

/// Hidden activation choice, including the positionally encoded ReLU variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Sine,
    Relu,
    ReluPe,
    Tanh,
    Sigmoid,
    Selu,
}

impl Activation {
    /// Network activation and input encoding; `posenc_freqs` matters only for `relu-pe`.
    pub fn network(self, posenc_freqs: usize) -> (ActivationKind, InputEncoding) {
        match self {
            Activation::Sine => (ActivationKind::Sine, InputEncoding::RawCoords),
            Activation::Relu => (ActivationKind::Relu, InputEncoding::RawCoords),
            Activation::ReluPe => (
                ActivationKind::Relu,
                InputEncoding::PositionalEncoding {
                    num_frequencies: posenc_freqs,
                },
            ),
            Activation::Tanh => (ActivationKind::Tanh, InputEncoding::RawCoords),
            Activation::Sigmoid => (ActivationKind::Sigmoid, InputEncoding::RawCoords),
            Activation::Selu => (ActivationKind::Selu, InputEncoding::RawCoords),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sine => "sine",
            Activation::Relu => "relu",
            Activation::ReluPe => "relu-pe",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Selu => "selu",
        }
    }
}

/// One observation of a joint run.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub kind: TaskKind,
    pub path: PathBuf,
    pub weight: Option<f64>,
}

impl TaskEntry {
    /// Parses `kind:path` or `kind:path:weight`.
    pub fn parse(spec: &str) -> Result<TaskEntry> {
        let bad = || Error::Config(format!("task {spec:?} is not kind:path[:weight]"));
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        let kind: TaskKind = kind.parse()?;
        let (path, weight) = match rest.rsplit_once(':') {
            Some((path, w)) if !path.is_empty() => match w.parse::<f64>() {
                Ok(w) => (path, Some(w)),
                Err(_) => (rest, None),
            },
            _ => (rest, None),
        };
        if path.is_empty() {
            return Err(bad());
        }
        Ok(TaskEntry {
            kind,
            path: PathBuf::from(path),
            weight,
        })
    }

    pub fn weight_or_default(&self) -> f64 {
        self.weight.unwrap_or(self.kind.default_joint_weight())
    }
}

/// Contents of a TOML run file. Every key is optional; flags given on the
/// command line take precedence.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<TaskKind>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    /// Read by `restore`, written by `corrupt`; so not checked for existence.
    pub mask: Option<PathBuf>,
    pub iters: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub width: Option<usize>,
    pub depth: Option<usize>,
    pub omega0: Option<f64>,
    pub activation: Option<Activation>,
    pub posenc_freqs: Option<usize>,
    pub factor: Option<usize>,
    pub mask_sparsity: Option<f64>,
    pub blur_sigma: Option<f64>,
    pub blur_width: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub tasks: Vec<TaskEntry>,
}

impl RunConfig {
    /// Reads and validates a run file.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        RunConfig::from_toml(&text, base)
            .map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
    }

    /// Parses run-file text, resolving relative paths against `base` and
    /// checking that every input file exists and every number is in range.
    pub fn from_toml(text: &str, base: &Path) -> Result<RunConfig> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut cfg.input,
            &mut cfg.out,
            &mut cfg.trace,
            &mut cfg.reference,
            &mut cfg.mask,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        for t in &mut cfg.tasks {
            resolve(&mut t.path);
        }
        let inputs = cfg.input.iter().chain(&cfg.reference).chain(cfg.tasks.iter().map(|t| &t.path));
        for p in inputs {
            if !p.exists() {
                return Err(Error::FileNotFound(p.clone()));
            }
        }
        cfg.overlay(Settings::default()).validate()?;
        for t in &cfg.tasks {
            check_weight(t.weight_or_default())?;
        }
        Ok(cfg)
    }

    /// `base` with every numeric key present in this file replaced.
    pub fn overlay(&self, base: Settings) -> Settings {
        Settings {
            iters: self.iters.or(base.iters),
            lr: self.lr.unwrap_or(base.lr),
            seed: self.seed.unwrap_or(base.seed),
            width: self.width.unwrap_or(base.width),
            depth: self.depth.unwrap_or(base.depth),
            omega0: self.omega0.unwrap_or(base.omega0),
            activation: self.activation.unwrap_or(base.activation),
            posenc_freqs: self.posenc_freqs.unwrap_or(base.posenc_freqs),
            factor: self.factor.unwrap_or(base.factor),
            mask_sparsity: self.mask_sparsity.unwrap_or(base.mask_sparsity),
            blur_sigma: self.blur_sigma.unwrap_or(base.blur_sigma),
            blur_width: self.blur_width.unwrap_or(base.blur_width),
            noise_sigma: self.noise_sigma.unwrap_or(base.noise_sigma),
            snapshot_every: self.snapshot_every.unwrap_or(base.snapshot_every),
        }
    }
}

pub(crate) fn check_weight(w: f64) -> Result<()> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Config(format!("task weight must be positive, got {w}")));
    }
    Ok(())
}

/// Fully resolved numeric settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    /// `None` means the task's own default (4000 for deblurring, else 500).
    pub iters: Option<usize>,
    pub lr: f64,
    pub seed: u64,
    pub width: usize,
    pub depth: usize,
    pub omega0: f64,
    pub activation: Activation,
    pub posenc_freqs: usize,
    pub factor: usize,
    pub mask_sparsity: f64,
    pub blur_sigma: f64,
    pub blur_width: usize,
    /// On the 0..255 scale.
    pub noise_sigma: f64,
    pub snapshot_every: usize,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings {
            iters: None,
            lr: DEFAULT_LEARNING_RATE,
            seed: 0,
            width: DEFAULT_WIDTH,
            depth: DEFAULT_DEPTH,
            omega0: DEFAULT_OMEGA0,
            activation: Activation::Sine,
            posenc_freqs: DEFAULT_POSENC_FREQUENCIES,
            factor: DEFAULT_SR_FACTOR,
            mask_sparsity: DEFAULT_MASK_SPARSITY,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            blur_width: DEFAULT_BLUR_WIDTH,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }
}

impl Settings {
    pub fn iterations_for(&self, kind: TaskKind) -> usize {
        self.iters.unwrap_or(kind.default_iterations())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if let Some(n) = self.iters {
            if n > MAX_ITERATIONS {
                return fail(format!("iters must be at most {MAX_ITERATIONS}, got {n}"));
            }
        }
        if !positive(self.lr) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        if !(1..=MAX_WIDTH).contains(&self.width) {
            return fail(format!("width must be in 1..={MAX_WIDTH}, got {}", self.width));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return fail(format!("depth must be in 1..={MAX_DEPTH}, got {}", self.depth));
        }
        if !positive(self.omega0) {
            return fail(format!("omega0 must be positive, got {}", self.omega0));
        }
        if !(1..=MAX_POSENC_FREQUENCIES).contains(&self.posenc_freqs) {
            return fail(format!(
                "posenc-freqs must be in 1..={MAX_POSENC_FREQUENCIES}, got {}",
                self.posenc_freqs
            ));
        }
        if !(1..=MAX_FACTOR).contains(&self.factor) {
            return fail(format!("factor must be in 1..={MAX_FACTOR}, got {}", self.factor));
        }
        if !(self.mask_sparsity > 0.0 && self.mask_sparsity <= 1.0) {
            return fail(format!("mask-sparsity must be in (0, 1], got {}", self.mask_sparsity));
        }
        if !positive(self.blur_sigma) {
            return fail(format!("blur-sigma must be positive, got {}", self.blur_sigma));
        }
        if self.blur_width.is_multiple_of(2) || self.blur_width > MAX_BLUR_WIDTH {
            return fail(format!(
                "blur-width must be odd and at most {MAX_BLUR_WIDTH}, got {}",
                self.blur_width
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return fail(format!("noise-sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.snapshot_every == 0 {
            return fail("snapshot-every must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let s = Settings::default();
        s.validate().unwrap();
        assert_eq!(s.iterations_for(TaskKind::Deblur), 4000);
        assert_eq!(s.iterations_for(TaskKind::Sr), 500);
        assert_eq!((s.width, s.depth, s.omega0, s.lr), (256, 6, 30.0, 1e-4));
        assert_eq!((s.blur_width, s.blur_sigma, s.noise_sigma), (25, 1.6, 25.0));
    }

    #[test]
    fn task_entry_forms() {
        let t = TaskEntry::parse("denoise:a/noisy.png").unwrap();
        assert_eq!((t.kind, t.weight_or_default()), (TaskKind::Denoise, 0.1));
        let t = TaskEntry::parse("sr:c:/low.png:0.5").unwrap();
        assert_eq!(t.path, Path::new("c:/low.png"));
        assert_eq!(t.weight, Some(0.5));
        assert_eq!(TaskEntry::parse("sr:low.png").unwrap().weight_or_default(), 1.0);
        assert!(TaskEntry::parse("blur:x.png").is_err());
        assert!(TaskEntry::parse("sr").is_err());
        assert!(TaskEntry::parse("sr:").is_err());
    }

    #[test]
    fn file_values_and_bounds() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("in.png"), b"").unwrap();
        let cfg = RunConfig::from_toml(
            "task = \"deblur\"\ninput = \"in.png\"\nactivation = \"relu-pe\"\nblur_sigma = 2.0\n\
             [[tasks]]\nkind = \"sr\"\npath = \"in.png\"\n",
            dir.path(),
        )
        .unwrap();
        assert_eq!(cfg.task, Some(TaskKind::Deblur));
        assert_eq!(cfg.input.as_deref(), Some(dir.path().join("in.png").as_path()));
        let s = cfg.overlay(Settings::default());
        assert_eq!((s.activation, s.blur_sigma, s.blur_width), (Activation::ReluPe, 2.0, 25));
        assert_eq!(cfg.tasks[0].path, dir.path().join("in.png"));

        let err = |text: &str| RunConfig::from_toml(text, dir.path()).unwrap_err();
        assert!(matches!(err("input = \"missing.png\""), Error::FileNotFound(_)));
        assert!(matches!(err("blur_width = 24"), Error::Config(_)));
        assert!(matches!(err("mask_sparsity = 0.0"), Error::Config(_)));
        assert!(matches!(err("lr = -1.0"), Error::Config(_)));
        assert!(matches!(err("colour = 3"), Error::Config(_)));
        assert!(matches!(err("iters = \"many\""), Error::Config(_)));
        assert!(matches!(
            err("[[tasks]]\nkind = \"sr\"\npath = \"in.png\"\nweight = 0.0"),
            Error::Config(_)
        ));
    }
}
