// Inpainting when only ten percent of the pixels are observed.
//
// The loss only sees kept pixels; the network's smoothness bias fills the
// rest. Compared against filling every hole with the mean observed color.
//
//     cargo run --release --example inpainting -- [size] [iterations] [out_dir]

use std::path::PathBuf;

use inr_restore::baselines::mean_fill;
use inr_restore::config::{Settings, TaskKind};
use inr_restore::io::{save_image, save_mask};
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
    pub kept_fraction: f64,
    pub mean_fill_psnr: f64,
    pub best_psnr: f64,
}

pub fn run_example(p: &Params) -> Result<Outcome> {
    let s = &p.settings;
    let clean = piecewise_smooth(s.seed, p.size, p.size)?;
    let (holes, mask) = recipes::corrupt(TaskKind::Inpaint, &clean, s)?;
    let mask = mask.expect("inpainting samples a mask");
    let dims = clean.dims();
    let task = recipes::build_task(TaskKind::Inpaint, &holes, dims, s, Some(&mask), 1.0)?;
    let config = recipes::train_config(s, TaskKind::Inpaint, dims, Some(clean.clone()));
    let result = restore(&config, &[task])?;
    let filled = mean_fill(&holes, &mask)?;
    if let Some(dir) = &p.out_dir {
        save_image(&holes, dir.join("inpaint_observed.png"))?;
        save_mask(&mask, dir.join("inpaint_mask.png"))?;
        save_image(&filled, dir.join("inpaint_mean_fill.png"))?;
        save_image(result.output(), dir.join("inpaint_best.png"))?;
    }
    Ok(Outcome {
        kept_fraction: mask.kept_fraction(),
        mean_fill_psnr: psnr(&filled, &clean, 1.0)?.value,
        best_psnr: result.best_psnr.unwrap_or(f64::NAN),
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
    println!("observed pixels   {:.1}%", 100.0 * o.kept_fraction);
    println!("mean fill         {:.2} dB", o.mean_fill_psnr);
    println!("network (best)    {:.2} dB", o.best_psnr);
    Ok(())
}
