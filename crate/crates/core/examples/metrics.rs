// PSNR and SSIM of a scene against shifted, noisy and identical copies.
//
//     cargo run --release --example metrics

use inr_restore::degradations::{add_gaussian_noise, Image};
use inr_restore::metrics::{psnr, ssim};
use inr_restore::numerics::Rng;
use inr_restore::synthetic::piecewise_smooth;
use inr_restore::Result;

/// `(label, psnr, ssim)` rows.
pub fn run_example(size: usize, seed: u64) -> Result<Vec<(&'static str, f64, f64)>> {
    let clean = piecewise_smooth(seed, size, size)?;
    let mut rng = Rng::seed_from_u64(seed);
    let brighter = clean.map(|v| v + 0.05);
    let noisy = add_gaussian_noise(&mut rng, &clean, 25.0)?;
    let shifted = Image::from_fn(size, size, 3, |y, x, c| clean.get(y, x.saturating_sub(1), c))?;
    [("identical", &clean), ("brighter", &brighter), ("noisy", &noisy), ("shifted", &shifted)]
        .into_iter()
        .map(|(label, img)| Ok((label, psnr(img, &clean, 1.0)?.value, ssim(img, &clean)?.value)))
        .collect()
}

fn main() -> Result<()> {
    println!("{:<10} {:>9} {:>7}", "copy", "psnr", "ssim");
    for (label, p, s) in run_example(64, 0)? {
        println!("{label:<10} {p:>9.2} {s:>7.4}");
    }
    Ok(())
}
