//! The `inr-restore` command line.
//!
//! Exit codes: 0 success, 1 usage or invalid settings, 2 file errors,
//! 3 numeric failure (non-finite loss or output).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::config::{check_weight, Activation, RunConfig, Settings, TaskEntry, TaskKind};
use crate::degradations::{
    Image, DEFAULT_BLUR_SIGMA, DEFAULT_BLUR_WIDTH, DEFAULT_MASK_SPARSITY, DEFAULT_NOISE_SIGMA,
    DEFAULT_SR_FACTOR,
};
use crate::error::{Error, Result};
use crate::io::{load_image, load_mask, save_image, save_mask, sibling_path, write_trace};
use crate::metrics::{psnr, ssim};
use crate::network::{DEFAULT_DEPTH, DEFAULT_OMEGA0, DEFAULT_POSENC_FREQUENCIES, DEFAULT_WIDTH};
use crate::recipes;
use crate::restoration::{
    restore, RestorationResult, TaskSpec, DEFAULT_ITERATIONS, DEFAULT_LEARNING_RATE,
    DEFAULT_SNAPSHOT_EVERY,
};

#[derive(Parser, Debug)]
#[command(
    name = "inr-restore",
    version,
    about = "Restore a corrupted image by fitting a sine-activated coordinate network to it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a corrupted observation from a clean image.
    Corrupt(CorruptArgs),
    /// Restore one observation (denoise, sr, inpaint or deblur).
    Restore(RestoreArgs),
    /// Restore from several observations of the same scene at once.
    Joint(JointArgs),
    /// Restore with a chosen hidden activation, for comparing activations.
    Ablate(AblateArgs),
    /// Print PSNR and SSIM between two images.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
struct CorruptArgs {
    /// Clean input image.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Corrupted output image.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corruption to apply.
    #[arg(long, value_enum, default_value_t = TaskKind::Denoise)]
    task: TaskKind,
    /// Random seed for noise and masks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian noise standard deviation on the 0..255 scale.
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA)]
    noise_sigma: f64,
    /// Downsampling factor (lanczos2) for sr.
    #[arg(long, default_value_t = DEFAULT_SR_FACTOR)]
    factor: usize,
    /// Where to write the sampled mask for inpaint (255 = observed).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Probability that a pixel is observed, for inpaint.
    #[arg(long, default_value_t = DEFAULT_MASK_SPARSITY)]
    mask_sparsity: f64,
    #[command(flatten)]
    blur: BlurFlags,
    /// TOML run file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BlurFlags {
    /// Gaussian blur standard deviation in pixels.
    #[arg(long, default_value_t = DEFAULT_BLUR_SIGMA)]
    blur_sigma: f64,
    /// Gaussian blur kernel width (odd).
    #[arg(long, default_value_t = DEFAULT_BLUR_WIDTH)]
    blur_width: usize,
}

#[derive(Args, Debug)]
struct OutputFlags {
    /// Restored output image (the best snapshot when --reference is given).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV trace of loss and PSNR per snapshot.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Clean image used only to score snapshots and pick the best one.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// TOML run file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainFlags {
    /// Adam iterations [4000 for deblur unless set].
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iters: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    lr: f64,
    /// Seed for network initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hidden layer width.
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    width: usize,
    /// Number of hidden layers.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Sine frequency scale.
    #[arg(long, default_value_t = DEFAULT_OMEGA0)]
    omega0: f64,
    /// Positional encoding frequencies for relu-pe.
    #[arg(long, default_value_t = DEFAULT_POSENC_FREQUENCIES)]
    posenc_freqs: usize,
    /// Log a trace row every this many iterations.
    #[arg(long, default_value_t = DEFAULT_SNAPSHOT_EVERY)]
    snapshot_every: usize,
    /// Downsampling factor for sr.
    #[arg(long, default_value_t = DEFAULT_SR_FACTOR)]
    factor: usize,
    #[command(flatten)]
    blur: BlurFlags,
}

#[derive(Args, Debug)]
struct RestoreArgs {
    /// Observed (corrupted) image.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Degradation the observation went through.
    #[arg(long, value_enum, default_value_t = TaskKind::Denoise)]
    task: TaskKind,
    /// Mask image for inpaint (>= 128 = observed).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Hidden activation.
    #[arg(long, value_enum, default_value_t = Activation::Sine)]
    activation: Activation,
    #[command(flatten)]
    output: OutputFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct AblateArgs {
    /// Observed (corrupted) image.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Degradation the observation went through.
    #[arg(long, value_enum, default_value_t = TaskKind::Sr)]
    task: TaskKind,
    /// Mask image for inpaint (>= 128 = observed).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Hidden activation; relu-pe adds a positional encoding of the input.
    #[arg(long, value_enum, default_value_t = Activation::Sine)]
    activation: Activation,
    #[command(flatten)]
    output: OutputFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct JointArgs {
    /// Observation as kind:path[:weight], repeatable. Weight defaults to 0.1
    /// for denoise and 1.0 otherwise.
    #[arg(long = "task", value_name = "KIND:PATH[:WEIGHT]")]
    tasks: Vec<String>,
    /// Mask image for an inpaint observation (>= 128 = observed).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Hidden activation.
    #[arg(long, value_enum, default_value_t = Activation::Sine)]
    activation: Activation,
    #[command(flatten)]
    output: OutputFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// First image.
    #[arg(long)]
    a: PathBuf,
    /// Second image.
    #[arg(long)]
    b: PathBuf,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => return clap_exit(e),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return clap_exit(e),
    };
    let (_, sub) = matches.subcommand().expect("a subcommand is required");
    match dispatch(cli.command, sub) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("inr-restore: error: {e}");
            exit_code(&e)
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    if e.use_stderr() {
        1
    } else {
        0
    }
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        e if e.is_io() => 2,
        Error::NonFinite(_) | Error::StaleTape(_) => 3,
        _ => 1,
    }
}

/// True when the user typed `id` on the command line.
fn given(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

fn pick<T>(m: &ArgMatches, id: &str, flag: T, file: Option<T>) -> T {
    match file {
        Some(v) if !given(m, id) => v,
        _ => flag,
    }
}

fn pick_path(flag: Option<PathBuf>, file: Option<PathBuf>) -> Option<PathBuf> {
    flag.or(file)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or(Ok(RunConfig::default()), RunConfig::load)
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::Config(format!("missing --{flag} (or `{flag}` in the run file)")))
}

fn train_settings(
    m: &ArgMatches,
    t: &TrainFlags,
    activation: Activation,
    cfg: &RunConfig,
) -> Result<Settings> {
    let s = Settings {
        iters: if given(m, "iters") { Some(t.iters) } else { cfg.iters },
        lr: pick(m, "lr", t.lr, cfg.lr),
        seed: pick(m, "seed", t.seed, cfg.seed),
        width: pick(m, "width", t.width, cfg.width),
        depth: pick(m, "depth", t.depth, cfg.depth),
        omega0: pick(m, "omega0", t.omega0, cfg.omega0),
        activation: pick(m, "activation", activation, cfg.activation),
        posenc_freqs: pick(m, "posenc_freqs", t.posenc_freqs, cfg.posenc_freqs),
        factor: pick(m, "factor", t.factor, cfg.factor),
        blur_sigma: pick(m, "blur_sigma", t.blur.blur_sigma, cfg.blur_sigma),
        blur_width: pick(m, "blur_width", t.blur.blur_width, cfg.blur_width),
        snapshot_every: pick(m, "snapshot_every", t.snapshot_every, cfg.snapshot_every),
        ..cfg.overlay(Settings::default())
    };
    s.validate()?;
    Ok(s)
}

fn dispatch(command: Command, m: &ArgMatches) -> Result<()> {
    match command {
        Command::Corrupt(a) => run_corrupt(a, m),
        Command::Restore(a) => {
            run_single("restore", a.input, a.task, a.mask, a.activation, a.output, a.train, m)
        }
        Command::Ablate(a) => {
            run_single("ablate", a.input, a.task, a.mask, a.activation, a.output, a.train, m)
        }
        Command::Joint(a) => run_joint(a, m),
        Command::Metrics(a) => run_metrics(a),
    }
}

fn run_corrupt(a: CorruptArgs, m: &ArgMatches) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let task = pick(m, "task", a.task, cfg.task);
    let s = Settings {
        seed: pick(m, "seed", a.seed, cfg.seed),
        noise_sigma: pick(m, "noise_sigma", a.noise_sigma, cfg.noise_sigma),
        factor: pick(m, "factor", a.factor, cfg.factor),
        mask_sparsity: pick(m, "mask_sparsity", a.mask_sparsity, cfg.mask_sparsity),
        blur_sigma: pick(m, "blur_sigma", a.blur.blur_sigma, cfg.blur_sigma),
        blur_width: pick(m, "blur_width", a.blur.blur_width, cfg.blur_width),
        ..cfg.overlay(Settings::default())
    };
    s.validate()?;
    let input = require(pick_path(a.input, cfg.input), "input")?;
    let out = require(pick_path(a.out, cfg.out), "out")?;
    let mask_path = pick_path(a.mask, cfg.mask);
    if task == TaskKind::Inpaint && mask_path.is_none() {
        return Err(Error::Config("inpaint needs --mask to write the sampled mask to".into()));
    }
    let clean = load_image(&input)?;
    let (observed, mask) = recipes::corrupt(task, &clean, &s)?;
    save_image(&observed, &out)?;
    if let (Some(mask), Some(path)) = (mask, mask_path) {
        save_mask(&mask, path)?;
    }
    let (h, w) = observed.dims();
    println!("{} {}x{} -> {}", task.name(), h, w, out.display());
    Ok(())
}

fn load_reference(path: Option<&Path>) -> Result<Option<Image>> {
    path.map(|p| load_image(p).map(|r| r.to_rgb())).transpose()
}

#[allow(clippy::too_many_arguments)]
fn run_single(
    label: &str,
    input: Option<PathBuf>,
    task: TaskKind,
    mask: Option<PathBuf>,
    activation: Activation,
    output: OutputFlags,
    train: TrainFlags,
    m: &ArgMatches,
) -> Result<()> {
    let cfg = load_config(output.config.as_deref())?;
    let task = pick(m, "task", task, cfg.task);
    let s = train_settings(m, &train, activation, &cfg)?;
    let input = require(pick_path(input, cfg.input.clone()), "input")?;
    let out = require(pick_path(output.out, cfg.out.clone()), "out")?;
    let mask = match pick_path(mask, cfg.mask.clone()) {
        Some(p) => Some(load_mask(p)?),
        None if task == TaskKind::Inpaint => {
            return Err(Error::Config("inpaint needs --mask".into()))
        }
        None => None,
    };
    let observed = load_image(&input)?;
    let canonical = recipes::canonical_dims(task, observed.dims(), s.factor);
    let spec = recipes::build_task(task, &observed, canonical, &s, mask.as_ref(), 1.0)?;
    let reference = load_reference(pick_path(output.reference, cfg.reference.clone()).as_deref())?;
    let config = recipes::train_config(&s, task, canonical, reference);
    let result = restore(&config, std::slice::from_ref(&spec))?;
    let trace = pick_path(output.trace, cfg.trace.clone());
    finish(&result, &out, trace.as_deref())?;
    let what = format!("{label} {} ({})", task.name(), s.activation.name());
    report(&what, config.iterations, &result);
    Ok(())
}

fn run_joint(a: JointArgs, m: &ArgMatches) -> Result<()> {
    let cfg = load_config(a.output.config.as_deref())?;
    let s = train_settings(m, &a.train, a.activation, &cfg)?;
    let entries = if a.tasks.is_empty() {
        cfg.tasks.clone()
    } else {
        a.tasks.iter().map(|t| TaskEntry::parse(t)).collect::<Result<Vec<_>>>()?
    };
    if entries.is_empty() {
        return Err(Error::Config("joint needs at least one --task kind:path[:weight]".into()));
    }
    let out = require(pick_path(a.output.out, cfg.out.clone()), "out")?;
    let mask = pick_path(a.mask, cfg.mask.clone()).map(load_mask).transpose()?;
    let observed = entries
        .iter()
        .map(|e| load_image(&e.path))
        .collect::<Result<Vec<_>>>()?;
    // the finest observation fixes the render grid
    let canonical = entries
        .iter()
        .zip(&observed)
        .map(|(e, o)| recipes::canonical_dims(e.kind, o.dims(), s.factor))
        .max_by_key(|&(h, w)| h * w)
        .expect("at least one task");
    let tasks = entries
        .iter()
        .zip(&observed)
        .map(|(e, o)| {
            let weight = e.weight_or_default();
            check_weight(weight)?;
            recipes::build_task(e.kind, o, canonical, &s, mask.as_ref(), weight)
        })
        .collect::<Result<Vec<TaskSpec>>>()?;
    // the longest per-task default budget applies when --iters is absent
    let budget_kind = entries
        .iter()
        .map(|e| e.kind)
        .max_by_key(|k| k.default_iterations())
        .expect("at least one task");
    let reference = load_reference(pick_path(a.output.reference, cfg.reference.clone()).as_deref())?;
    let config = recipes::train_config(&s, budget_kind, canonical, reference);
    let result = restore(&config, &tasks)?;
    let trace = pick_path(a.output.trace, cfg.trace.clone());
    finish(&result, &out, trace.as_deref())?;
    let kinds: Vec<&str> = entries.iter().map(|e| e.kind.name()).collect();
    report(&format!("joint {}", kinds.join("+")), config.iterations, &result);
    Ok(())
}

fn finish(result: &RestorationResult, out: &Path, trace: Option<&Path>) -> Result<()> {
    save_image(result.output(), out)?;
    if result.best.is_some() {
        save_image(&result.final_image, sibling_path(out, "_final"))?;
    }
    if let Some(t) = trace {
        write_trace(&result.trace, t)?;
    }
    Ok(())
}

fn report(what: &str, iterations: usize, result: &RestorationResult) {
    let last = result.trace.rows.last();
    let loss = last.map_or(f64::NAN, |r| r.loss);
    println!("{what}: {iterations} iterations, final loss {loss:.6e}");
    if let (Some(best), Some(final_psnr)) = (result.best_psnr, last.and_then(|r| r.psnr_ref)) {
        println!(
            "psnr vs reference: best {best:.2} dB at iteration {}, final {final_psnr:.2} dB",
            result.best_iteration
        );
    }
}

fn run_metrics(a: MetricsArgs) -> Result<()> {
    let mut x = load_image(&a.a)?;
    let mut y = load_image(&a.b)?;
    if x.channels() != y.channels() {
        x = x.to_rgb();
        y = y.to_rgb();
    }
    println!("psnr {:.4}", psnr(&x, &y, 1.0)?);
    match ssim(&x, &y) {
        Ok(v) => println!("ssim {v:.4}"),
        Err(Error::InvalidArgument(_)) => println!("ssim n/a (image smaller than the 11x11 window)"),
        Err(e) => return Err(e),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_cli(["inr-restore"]), 1);
        assert_eq!(run_cli(["inr-restore", "restore", "--bogus"]), 1);
        assert_eq!(run_cli(["inr-restore", "metrics", "--a", "x.png"]), 1);
        assert_eq!(run_cli(["inr-restore", "restore", "--task", "colorize"]), 1);
        assert_eq!(run_cli(["inr-restore", "--help"]), 0);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::FileNotFound("x".into())), 2);
        assert_eq!(exit_code(&Error::NonFinite("loss".into())), 3);
        assert_eq!(exit_code(&Error::Config("bad".into())), 1);
    }

    #[test]
    fn help_shows_defaults() {
        let mut cmd = Cli::command();
        let help = cmd
            .find_subcommand_mut("restore")
            .unwrap()
            .render_long_help()
            .to_string();
        for needle in [
            "--iters <ITERS>",
            "[default: 500]",
            "[default: 0.0001]",
            "[default: 256]",
            "[default: 6]",
            "[default: 30]",
            "[default: sine]",
            "[default: 4]",
            "[default: 1.6]",
            "[default: 25]",
            "[default: 10]",
        ] {
            assert!(help.contains(needle), "{needle} missing from\n{help}");
        }
    }
}
