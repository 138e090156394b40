// Non-blind deblurring of a Gaussian-blurred scene (width 25, sigma 1.6).
//
// Runs 4000 iterations by default; the blur operator and its transpose use
// symmetric boundary reflection.
//
//     cargo run --release --example deblur -- [size] [iterations] [out_dir]

use std::path::PathBuf;

use inr_restore::config::{Settings, TaskKind};
use inr_restore::io::save_image;
use inr_restore::metrics::psnr;
use inr_restore::recipes;
use inr_restore::restoration::restore;
use inr_restore::synthetic::piecewise_smooth;
use inr_restore::Result;

pub struct Params {
    pub size: usize,
    pub settings: Settings,
    pub out_dir: Option<PathBuf>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            size: 64,
            settings: Settings::default(),
            out_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub blurred_psnr: f64,
    pub best_psnr: f64,
    pub iterations: usize,
}

pub fn run_example(p: &Params) -> Result<Outcome> {
    let s = &p.settings;
    let clean = piecewise_smooth(s.seed, p.size, p.size)?;
    let (blurred, _) = recipes::corrupt(TaskKind::Deblur, &clean, s)?;
    let dims = clean.dims();
    let task = recipes::build_task(TaskKind::Deblur, &blurred, dims, s, None, 1.0)?;
    let config = recipes::train_config(s, TaskKind::Deblur, dims, Some(clean.clone()));
    let result = restore(&config, &[task])?;
    if let Some(dir) = &p.out_dir {
        save_image(&blurred, dir.join("deblur_blurred.png"))?;
        save_image(result.output(), dir.join("deblur_best.png"))?;
    }
    Ok(Outcome {
        blurred_psnr: psnr(&blurred, &clean, 1.0)?.value,
        best_psnr: result.best_psnr.unwrap_or(f64::NAN),
        iterations: config.iterations,
    })
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut p = Params::default();
    if let Some(s) = args.first() {
        p.size = s.parse().expect("size must be an integer");
    }
    if let Some(n) = args.get(1) {
        p.settings.iters = Some(n.parse().expect("iterations must be an integer"));
    }
    p.out_dir = args.get(2).map(PathBuf::from);
    let o = run_example(&p)?;
    println!("blurred input     {:.2} dB", o.blurred_psnr);
    println!("network (best)    {:.2} dB after {} iterations", o.best_psnr, o.iterations);
    Ok(())
}
