// Denoising a synthetic scene with sigma = 25 Gaussian noise.
//
// The network fits the noisy observation through the identity operator. It
// reaches the clean image before it starts reproducing the noise, so the
// snapshot scored best against the clean reference beats the input.
//
//     cargo run --release --example denoise -- [size] [iterations] [out_dir]

use std::path::PathBuf;

use inr_restore::config::{Settings, TaskKind};
use inr_restore::io::{save_image, write_trace};
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
    pub noisy_psnr: f64,
    pub best_psnr: f64,
    pub best_iteration: usize,
    pub final_psnr: f64,
}

pub fn run_example(p: &Params) -> Result<Outcome> {
    let clean = piecewise_smooth(p.settings.seed, p.size, p.size)?;
    let (noisy, _) = recipes::corrupt(TaskKind::Denoise, &clean, &p.settings)?;
    let dims = clean.dims();
    let task = recipes::build_task(TaskKind::Denoise, &noisy, dims, &p.settings, None, 1.0)?;
    let config = recipes::train_config(&p.settings, TaskKind::Denoise, dims, Some(clean.clone()));
    let result = restore(&config, &[task])?;
    if let Some(dir) = &p.out_dir {
        save_image(&clean, dir.join("denoise_clean.png"))?;
        save_image(&noisy, dir.join("denoise_noisy.png"))?;
        save_image(result.output(), dir.join("denoise_best.png"))?;
        write_trace(&result.trace, dir.join("denoise_trace.csv"))?;
    }
    Ok(Outcome {
        noisy_psnr: psnr(&noisy, &clean, 1.0)?.value,
        best_psnr: result.best_psnr.unwrap_or(f64::NAN),
        best_iteration: result.best_iteration,
        final_psnr: psnr(&result.final_image, &clean, 1.0)?.value,
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
    println!("noisy input     {:.2} dB", o.noisy_psnr);
    println!("best snapshot   {:.2} dB (iteration {})", o.best_psnr, o.best_iteration);
    println!("final iterate   {:.2} dB", o.final_psnr);
    Ok(())
}
