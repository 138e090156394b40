// Checks backpropagated parameter gradients against central differences on
// a tiny network, for every operator type.
//
//     cargo run --release --example gradient_check

use inr_restore::config::{Settings, TaskKind};
use inr_restore::degradations::{make_coord_grid, sample_mask, Image};
use inr_restore::network::{init_siren, ActivationKind, InputEncoding};
use inr_restore::numerics::Rng;
use inr_restore::recipes;
use inr_restore::restoration::{loss, loss_and_grads, TaskSpec};
use inr_restore::Result;

const STEP: f64 = 1e-6;

/// Largest relative error between analytic and numerical gradients, with
/// `max(|a|, |n|, 1e-3)` in the denominator so near-zero entries are
/// judged on absolute error.
pub fn max_relative_error(
    activation: ActivationKind,
    encoding: InputEncoding,
    task: TaskKind,
    seed: u64,
) -> Result<f64> {
    let (h, w) = (6, 5);
    let mut rng = Rng::seed_from_u64(seed);
    let mut net = init_siren(&mut rng, 2, 6, 2, 3, 30.0, activation, encoding)?;
    // move off the zero-bias start so no ReLU sits exactly on its kink
    let jitter = rng.uniform(net.param_count(), -0.05, 0.05)?;
    let start: Vec<f64> = net.flatten_params().iter().zip(&jitter).map(|(p, j)| p + j).collect();
    net.set_flat_params(&start)?;
    let grid = make_coord_grid(h, w)?;
    let settings = Settings {
        factor: 2,
        blur_width: 7,
        blur_sigma: 1.0,
        ..Settings::default()
    };
    let mask = sample_mask(&mut rng, h, w, 0.3)?;
    let op = recipes::operator(task, (h, w), &settings, Some(&mask))?;
    let (oh, ow) = op.output_dims();
    let observed = Image::new(oh, ow, 3, rng.uniform(oh * ow * 3, 0.0, 1.0)?)?;
    let tasks = [TaskSpec::new(observed, op, 0.7)?];

    let (_, grads) = loss_and_grads(&net, &grid, &tasks)?;
    let analytic = grads.flatten();
    let mut params = net.flatten_params();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + STEP;
        net.set_flat_params(&params)?;
        let up = loss(&net, &grid, &tasks)?;
        params[i] = orig - STEP;
        net.set_flat_params(&params)?;
        let down = loss(&net, &grid, &tasks)?;
        params[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    net.set_flat_params(&params)?;
    Ok(worst)
}

fn main() -> Result<()> {
    let encodings = [
        InputEncoding::RawCoords,
        InputEncoding::PositionalEncoding { num_frequencies: 2 },
    ];
    let tasks = [TaskKind::Denoise, TaskKind::Sr, TaskKind::Inpaint, TaskKind::Deblur];
    for activation in ActivationKind::ALL {
        for encoding in encodings {
            for task in tasks {
                let err = max_relative_error(activation, encoding, task, 11)?;
                println!("{:<8} {:<28} {:<8} {err:.2e}", activation.name(), format!("{encoding:?}"), task.name());
            }
        }
    }
    Ok(())
}
