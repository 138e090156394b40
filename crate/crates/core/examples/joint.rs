// Joint restoration from a noisy full-resolution view and a clean 4x
// downsampled view of the same scene.
//
// One network is fitted to both observations at once, each through its own
// operator. The noisy view gets weight 0.1 and the low-resolution view 1.0,
// so the sharp but noisy view contributes detail without dominating.
//
//     cargo run --release --example joint -- [size] [iterations] [out_dir]

use std::path::PathBuf;

use inr_restore::config::{Settings, TaskKind};
use inr_restore::io::save_image;
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
    pub denoise_only: f64,
    pub sr_only: f64,
    pub joint: f64,
}

pub fn run_example(p: &Params) -> Result<Outcome> {
    let s = &p.settings;
    let clean = piecewise_smooth(s.seed, p.size, p.size)?;
    let dims = clean.dims();
    let (noisy, _) = recipes::corrupt(TaskKind::Denoise, &clean, s)?;
    let (low, _) = recipes::corrupt(TaskKind::Sr, &clean, s)?;
    let config = recipes::train_config(s, TaskKind::Sr, dims, Some(clean.clone()));
    let run = |kinds: &[(TaskKind, f64)]| -> Result<f64> {
        let tasks = kinds
            .iter()
            .map(|&(kind, weight)| {
                let observed = if kind == TaskKind::Denoise { &noisy } else { &low };
                recipes::build_task(kind, observed, dims, s, None, weight)
            })
            .collect::<Result<Vec<_>>>()?;
        let result = restore(&config, &tasks)?;
        if let (Some(dir), true) = (&p.out_dir, kinds.len() > 1) {
            save_image(result.output(), dir.join("joint_best.png"))?;
        }
        Ok(result.best_psnr.unwrap_or(f64::NAN))
    };
    Ok(Outcome {
        denoise_only: run(&[(TaskKind::Denoise, 1.0)])?,
        sr_only: run(&[(TaskKind::Sr, 1.0)])?,
        joint: run(&[
            (TaskKind::Denoise, TaskKind::Denoise.default_joint_weight()),
            (TaskKind::Sr, TaskKind::Sr.default_joint_weight()),
        ])?,
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
    println!("denoise only      {:.2} dB", o.denoise_only);
    println!("sr only           {:.2} dB", o.sr_only);
    println!("joint             {:.2} dB", o.joint);
    Ok(())
}
