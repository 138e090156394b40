// 4x super-resolution of a synthetic scene, against nearest-neighbor upsampling.
//
// The low-resolution input is produced with the same lanczos2 operator the
// loss uses. The network renders at full resolution and is fitted through
// that operator.
//
//     cargo run --release --example super_resolution -- [size] [iterations] [out_dir]

use std::path::PathBuf;

use inr_restore::baselines::nearest_upsample;
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
            size: 96,
            settings: Settings::default(),
            out_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub nearest_psnr: f64,
    pub best_psnr: f64,
}

pub fn run_example(p: &Params) -> Result<Outcome> {
    let s = &p.settings;
    let clean = piecewise_smooth(s.seed, p.size, p.size)?;
    let (low, _) = recipes::corrupt(TaskKind::Sr, &clean, s)?;
    // render on the scene's own grid; it need not be a multiple of the factor
    let canonical = clean.dims();
    let (h, w) = canonical;
    let task = recipes::build_task(TaskKind::Sr, &low, canonical, s, None, 1.0)?;
    let config = recipes::train_config(s, TaskKind::Sr, canonical, Some(clean.clone()));
    let result = restore(&config, &[task])?;
    let nearest = nearest_upsample(&low, s.factor, h, w)?;
    if let Some(dir) = &p.out_dir {
        save_image(&low, dir.join("sr_low.png"))?;
        save_image(&nearest, dir.join("sr_nearest.png"))?;
        save_image(result.output(), dir.join("sr_best.png"))?;
    }
    Ok(Outcome {
        nearest_psnr: psnr(&nearest, &clean, 1.0)?.value,
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
    println!("nearest neighbor  {:.2} dB", o.nearest_psnr);
    println!("network (best)    {:.2} dB", o.best_psnr);
    Ok(())
}
