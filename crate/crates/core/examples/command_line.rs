// Drives the command line through the library: writes a scene to disk,
// corrupts it, restores it and reads the trace back, all via `run_cli`.
//
//     cargo run --release --example command_line -- [work_dir] [iterations]

use std::path::{Path, PathBuf};

use inr_restore::cli::run_cli;
use inr_restore::io::{read_trace, save_image};
use inr_restore::synthetic::piecewise_smooth;
use inr_restore::{Error, Result};

fn cli(args: &[&str]) -> Result<()> {
    let argv = std::iter::once("inr-restore").chain(args.iter().copied());
    match run_cli(argv) {
        0 => Ok(()),
        code => Err(Error::Config(format!("{args:?} exited with {code}"))),
    }
}

/// Runs the pipeline in `dir` and returns the number of trace rows and the
/// last logged PSNR against the clean scene.
pub fn run_example(dir: &Path, size: usize, iterations: usize, width: usize) -> Result<(usize, f64)> {
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    save_image(&piecewise_smooth(5, size, size)?, path("clean.png"))?;
    cli(&["corrupt", "--input", &path("clean.png"), "--noise-sigma", "25", "--seed", "7", "--out", &path("noisy.png")])?;
    let iters = iterations.to_string();
    let width = width.to_string();
    cli(&[
        "restore", "--task", "denoise", "--input", &path("noisy.png"), "--reference", &path("clean.png"),
        "--iters", &iters, "--width", &width, "--seed", "1", "--out", &path("restored.png"), "--trace", &path("trace.csv"),
    ])?;
    cli(&["metrics", "--a", &path("restored.png"), "--b", &path("clean.png")])?;
    let (header, rows) = read_trace(path("trace.csv"))?;
    assert_eq!(header[..3], ["iter", "loss", "psnr_ref"]);
    let last = rows.last().map_or(f64::NAN, |r| r.values[1]);
    Ok((rows.len(), last))
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = args.first().map_or_else(|| std::env::temp_dir().join("inr-restore-demo"), PathBuf::from);
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    let iterations = args.get(1).map_or(500, |n| n.parse().expect("iterations must be an integer"));
    let (rows, last) = run_example(&dir, 64, iterations, 256)?;
    println!("{rows} trace rows, last psnr vs clean {last:.2} dB; files in {}", dir.display());
    Ok(())
}
