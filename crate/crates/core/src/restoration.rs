//! Fitting a coordinate network to one or more corrupted observations.
//!
//! Every task contributes `weight * mean((A f - x0)^2)` where `A` is the
//! task's degradation operator and `f` the current full-resolution render.
//! For masked tasks the mean runs over observed elements only. Gradients
//! flow back through `A^T` into the network's reverse pass, and parameters
//! are updated with Adam on the full coordinate grid every iteration.

use crate::degradations::{make_coord_grid, CoordGrid, DegradationOp, Image, OpKind};
use crate::error::{Error, Result};
use crate::metrics::psnr;
use crate::network::{
    init_siren, ActivationKind, BackwardScratch, ForwardTape, Gradients, InputEncoding, Network, DEFAULT_DEPTH, DEFAULT_OMEGA0,
    DEFAULT_WIDTH,
};
use crate::numerics::Rng;

pub const DEFAULT_ITERATIONS: usize = 500;
pub const DEFAULT_DEBLUR_ITERATIONS: usize = 4000;
pub const DEFAULT_REAL_NOISE_ITERATIONS: usize = 1000;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 10;
/// Joint-training weight for observations that carry noise.
pub const NOISY_TASK_WEIGHT: f64 = 0.1;

/// One observation, the operator that produces it from a render, and its loss weight.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub observed: Image,
    pub op: DegradationOp,
    pub weight: f64,
}

impl TaskSpec {
    pub fn new(observed: Image, op: DegradationOp, weight: f64) -> Result<TaskSpec> {
        let task = TaskSpec {
            observed,
            op,
            weight,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0) || !self.weight.is_finite() {
            return Err(Error::invalid(format!(
                "task weight must be positive, got {}",
                self.weight
            )));
        }
        if self.observed.dims() != self.op.output_dims() {
            return Err(Error::shapes(
                format!(
                    "{} output {}x{}",
                    self.op.name(),
                    self.op.output_dims().0,
                    self.op.output_dims().1
                ),
                format!("observation {}", self.observed.shape_str()),
            ));
        }
        if self.observed.channels() != 3 {
            return Err(Error::invalid(format!(
                "observations must be RGB, got {} channel(s)",
                self.observed.channels()
            )));
        }
        if let Some(map) = self.op.mask_map() {
            if map.kept_count() == 0 {
                return Err(Error::invalid("mask keeps no pixels"));
            }
        }
        Ok(())
    }

    /// Observation as compared against `op(render)`: masked tasks drop the
    /// unobserved pixels from both sides.
    fn target(&self) -> Result<Image> {
        match self.op.kind() {
            OpKind::Mask(_) => self.op.apply(&self.observed),
            _ => Ok(self.observed.clone()),
        }
    }

    /// Number of elements the squared error is averaged over.
    fn element_count(&self) -> usize {
        let c = self.observed.channels();
        match self.op.mask_map() {
            Some(map) => map.kept_count() * c,
            None => self.observed.data().len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub width: usize,
    pub depth: usize,
    pub omega0: f64,
    pub activation: ActivationKind,
    pub encoding: InputEncoding,
    /// Resolution of the render the network is fitted on.
    pub canonical_size: (usize, usize),
    pub snapshot_every: usize,
    /// Clean image used only to score snapshots.
    pub reference: Option<Image>,
}

impl TrainConfig {
    pub fn new(canonical_size: (usize, usize)) -> TrainConfig {
        TrainConfig {
            iterations: DEFAULT_ITERATIONS,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed: 0,
            width: DEFAULT_WIDTH,
            depth: DEFAULT_DEPTH,
            omega0: DEFAULT_OMEGA0,
            activation: ActivationKind::Sine,
            encoding: InputEncoding::RawCoords,
            canonical_size,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (h, w) = self.canonical_size;
        if h == 0 || w == 0 {
            return Err(Error::invalid("canonical size must be non-empty"));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::invalid("snapshot interval must be at least 1"));
        }
        if let Some(r) = &self.reference {
            if r.dims() != self.canonical_size || r.channels() != 3 {
                return Err(Error::shapes(
                    format!("canonical {h}x{w}x3"),
                    format!("reference {}", r.shape_str()),
                ));
            }
        }
        Ok(())
    }
}

/// Adam moments for every parameter block (`beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`).
#[derive(Clone, Debug)]
pub struct AdamState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(net: &Network) -> AdamState {
        let sizes: Vec<usize> = net
            .layers()
            .iter()
            .flat_map(|l| [l.weights.data().len(), l.bias.len()])
            .collect();
        AdamState::with_block_sizes(&sizes)
    }

    pub fn with_block_sizes(sizes: &[usize]) -> AdamState {
        AdamState {
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]], lr: f64) -> Result<()> {
        if !(lr > 0.0) || !lr.is_finite() {
            return Err(Error::invalid(format!("learning rate must be positive, got {lr}")));
        }
        let sizes_ok = params.len() == self.first.len()
            && grads.len() == self.first.len()
            && params
                .iter()
                .zip(grads)
                .zip(&self.first)
                .all(|((p, g), m)| p.len() == m.len() && g.len() == m.len());
        if !sizes_ok {
            return Err(Error::shapes(
                format!("{} optimizer blocks", self.first.len()),
                format!("{} parameter / {} gradient blocks", params.len(), grads.len()),
            ));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Applies one Adam step to the network's parameters.
pub fn adam_step(
    state: &mut AdamState,
    net: &mut Network,
    grads: &Gradients,
    lr: f64,
) -> Result<()> {
    let g = grads.slices();
    let mut p = net.param_slices_mut();
    state.update(&mut p, &g, lr)
}

/// Raw (unclamped) `H x W x 3` render of the network over `grid`.
pub fn render(net: &Network, grid: &CoordGrid) -> Result<Image> {
    let (out, _) = net.forward(grid.coords())?;
    Image::from_matrix(grid.height(), grid.width(), &out)
}

/// Loss, per-task losses, gradients and the render they were computed from.
#[derive(Clone, Debug)]
pub struct LossEvaluation {
    pub loss: f64,
    pub task_losses: Vec<f64>,
    pub grads: Gradients,
    pub render: Image,
}

fn check_tasks(grid: &CoordGrid, tasks: &[TaskSpec]) -> Result<()> {
    if tasks.is_empty() {
        return Err(Error::invalid("at least one task is required"));
    }
    for (k, t) in tasks.iter().enumerate() {
        t.validate()?;
        if t.op.input_dims() != grid.dims() {
            return Err(Error::shapes(
                format!("grid {}x{}", grid.height(), grid.width()),
                format!(
                    "task {k} operator input {}x{}",
                    t.op.input_dims().0,
                    t.op.input_dims().1
                ),
            ));
        }
    }
    Ok(())
}

/// Weighted task losses and the gradient of their sum with respect to the render.
fn task_losses(render: &Image, tasks: &[TaskSpec]) -> Result<(Vec<f64>, Image)> {
    let mut losses = Vec::with_capacity(tasks.len());
    let mut grad = Image::zeros_unchecked(render.height(), render.width(), render.channels());
    for t in tasks {
        let residual = t.op.apply(render)?.sub(&t.target()?)?;
        let n = t.element_count() as f64;
        let sq: f64 = residual.data().iter().map(|r| r * r).sum();
        losses.push(sq / n);
        let back = t.op.adjoint(&residual.scale(2.0 * t.weight / n))?;
        for (g, b) in grad.data_mut().iter_mut().zip(back.data()) {
            *g += b;
        }
    }
    Ok((losses, grad))
}

fn weighted_sum(tasks: &[TaskSpec], losses: &[f64]) -> f64 {
    tasks.iter().zip(losses).map(|(t, l)| t.weight * l).sum()
}

/// Full evaluation: forward pass, task losses and exact parameter gradients.
pub fn evaluate(net: &Network, grid: &CoordGrid, tasks: &[TaskSpec]) -> Result<LossEvaluation> {
    check_tasks(grid, tasks)?;
    let mut work = Workspace::default();
    evaluate_in(net, grid, tasks, &mut work)
}

/// Buffers carried from one training iteration to the next.
#[derive(Default)]
struct Workspace {
    tape: Option<ForwardTape>,
    scratch: BackwardScratch,
}

/// [`evaluate`] without task validation, reusing the buffers in `work`.
fn evaluate_in(
    net: &Network,
    grid: &CoordGrid,
    tasks: &[TaskSpec],
    work: &mut Workspace,
) -> Result<LossEvaluation> {
    let spent = work.tape.take().unwrap_or_else(ForwardTape::empty);
    let (out, tape) = net.forward_recycling(grid.coords(), spent)?;
    let render = Image::from_matrix(grid.height(), grid.width(), &out)?;
    let (losses, grad_render) = task_losses(&render, tasks)?;
    let loss = weighted_sum(tasks, &losses);
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("loss is {loss}")));
    }
    let grads = net.backward_with_scratch(&tape, &grad_render.to_matrix(), &mut work.scratch)?;
    work.tape = Some(tape);
    Ok(LossEvaluation {
        loss,
        task_losses: losses,
        grads,
        render,
    })
}

/// `sum_k weight_k * mean((op_k(render) - x0_k)^2)` and its parameter gradients.
pub fn loss_and_grads(
    net: &Network,
    grid: &CoordGrid,
    tasks: &[TaskSpec],
) -> Result<(f64, Gradients)> {
    let e = evaluate(net, grid, tasks)?;
    Ok((e.loss, e.grads))
}

/// Loss only (no reverse pass).
pub fn loss(net: &Network, grid: &CoordGrid, tasks: &[TaskSpec]) -> Result<f64> {
    check_tasks(grid, tasks)?;
    let r = render(net, grid)?;
    let (losses, _) = task_losses(&r, tasks)?;
    Ok(weighted_sum(tasks, &losses))
}

/// One logged snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub task_losses: Vec<f64>,
    /// PSNR of the clamped render against the reference, when one is given.
    pub psnr_ref: Option<f64>,
    /// Per task: PSNR of `op(render)` against the (masked) observation.
    pub psnr_obs: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
    /// Total loss at every iteration, before that iteration's update.
    pub losses: Vec<f64>,
    pub task_count: usize,
}

impl TrainTrace {
    pub fn max_psnr_ref(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.psnr_ref)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }
}

#[derive(Clone, Debug)]
pub struct RestorationResult {
    /// Render after the last update.
    pub final_image: Image,
    /// Snapshot with the highest PSNR against the reference.
    pub best: Option<Image>,
    pub best_iteration: usize,
    pub best_psnr: Option<f64>,
    pub trace: TrainTrace,
    pub network: Network,
}

impl RestorationResult {
    /// The best snapshot when a reference was given, otherwise the final render.
    pub fn output(&self) -> &Image {
        self.best.as_ref().unwrap_or(&self.final_image)
    }
}

fn snapshot(
    iteration: usize,
    loss: f64,
    task_losses: Vec<f64>,
    render: &Image,
    tasks: &[TaskSpec],
    reference: Option<&Image>,
) -> Result<TraceRow> {
    let psnr_ref = reference
        .map(|r| psnr(render, r, 1.0).map(|m| m.value))
        .transpose()?;
    let psnr_obs = tasks
        .iter()
        .map(|t| Ok(psnr(&t.op.apply(render)?, &t.target()?, 1.0)?.value))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TraceRow {
        iteration,
        loss,
        task_losses,
        psnr_ref,
        psnr_obs,
    })
}

/// Fits a freshly initialized network to `tasks`. See [`restore_with_progress`].
pub fn restore(config: &TrainConfig, tasks: &[TaskSpec]) -> Result<RestorationResult> {
    restore_with_progress(config, tasks, |_| {})
}

/// Runs `config.iterations` full-batch Adam steps, logging a trace row every
/// `snapshot_every` iterations plus one for the final state, and calling
/// `progress` with each row as it is logged.
pub fn restore_with_progress(
    config: &TrainConfig,
    tasks: &[TaskSpec],
    mut progress: impl FnMut(&TraceRow),
) -> Result<RestorationResult> {
    config.validate()?;
    let grid = make_coord_grid(config.canonical_size.0, config.canonical_size.1)?;
    check_tasks(&grid, tasks)?;
    let mut rng = Rng::seed_from_u64(config.seed);
    let mut net = init_siren(
        &mut rng,
        config.depth,
        config.width,
        2,
        3,
        config.omega0,
        config.activation,
        config.encoding,
    )?;
    let mut adam = AdamState::new(&net);
    let reference = config.reference.as_ref();
    let mut trace = TrainTrace {
        task_count: tasks.len(),
        ..TrainTrace::default()
    };
    let mut best: Option<(f64, usize, Image)> = None;
    let consider = |row: &TraceRow, img: &Image, best: &mut Option<(f64, usize, Image)>| {
        if let Some(p) = row.psnr_ref {
            if best.as_ref().is_none_or(|(b, _, _)| p > *b) {
                *best = Some((p, row.iteration, img.clone()));
            }
        }
    };

    let mut work = Workspace::default();
    for it in 0..config.iterations {
        let eval = evaluate_in(&net, &grid, tasks, &mut work)?;
        trace.losses.push(eval.loss);
        if it % config.snapshot_every == 0 {
            let row = snapshot(it, eval.loss, eval.task_losses.clone(), &eval.render, tasks, reference)?;
            consider(&row, &eval.render, &mut best);
            progress(&row);
            trace.rows.push(row);
        }
        adam_step(&mut adam, &mut net, &eval.grads, config.learning_rate)?;
    }

    let final_image = render(&net, &grid)?;
    if config.iterations > 0 {
        let (losses, _) = task_losses(&final_image, tasks)?;
        let total = weighted_sum(tasks, &losses);
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("final loss is {total}")));
        }
        let row = snapshot(config.iterations, total, losses, &final_image, tasks, reference)?;
        consider(&row, &final_image, &mut best);
        progress(&row);
        trace.rows.push(row);
    }
    if let (Some(reference), None) = (reference, &best) {
        let p = psnr(&final_image, reference, 1.0)?.value;
        best = Some((p, 0, final_image.clone()));
    }

    let (best_psnr, best_iteration, best) = match best {
        Some((p, i, img)) => (Some(p), i, Some(img)),
        None => (None, 0, None),
    };
    Ok(RestorationResult {
        final_image,
        best,
        best_iteration,
        best_psnr,
        trace,
        network: net,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degradations::{gaussian_kernel, sample_mask};
    use crate::network::LayerParams;
    use crate::numerics::Matrix;

    fn constant_net(value: f64) -> Network {
        let layers = vec![
            LayerParams {
                weights: Matrix::zeros(4, 2),
                bias: vec![0.0; 4],
            },
            LayerParams {
                weights: Matrix::zeros(3, 4),
                bias: vec![value; 3],
            },
        ];
        Network::from_layers(layers, ActivationKind::Sine, InputEncoding::RawCoords, 30.0).unwrap()
    }

    fn small_net(seed: u64) -> Network {
        let mut rng = Rng::seed_from_u64(seed);
        init_siren(
            &mut rng,
            2,
            8,
            2,
            3,
            30.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords,
        )
        .unwrap()
    }

    #[test]
    fn render_of_constant_net() {
        let grid = make_coord_grid(5, 7).unwrap();
        let img = render(&constant_net(0.3), &grid).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (5, 7, 3));
        assert!(img.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn renders_are_bit_identical() {
        let grid = make_coord_grid(9, 9).unwrap();
        let net = small_net(3);
        assert_eq!(render(&net, &grid).unwrap(), render(&net, &grid).unwrap());
    }

    #[test]
    fn exact_fit_has_zero_loss_and_gradient() {
        let grid = make_coord_grid(8, 8).unwrap();
        let net = small_net(4);
        let r = render(&net, &grid).unwrap();
        let mut rng = Rng::seed_from_u64(5);
        let ops = vec![
            DegradationOp::identity(8, 8).unwrap(),
            DegradationOp::downsample(8, 8, 2).unwrap(),
            DegradationOp::mask(sample_mask(&mut rng, 8, 8, 0.5).unwrap()),
            DegradationOp::blur(8, 8, gaussian_kernel(5, 1.0).unwrap()).unwrap(),
        ];
        for op in ops {
            let obs = op.apply(&r).unwrap();
            let task = TaskSpec::new(obs, op, 1.0).unwrap();
            let (l, g) = loss_and_grads(&net, &grid, &[task]).unwrap();
            assert_eq!(l, 0.0);
            assert!(g.flatten().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identity_loss_is_plain_mse() {
        let grid = make_coord_grid(6, 6).unwrap();
        let net = constant_net(0.25);
        let obs = Image::filled(6, 6, 3, 0.75).unwrap();
        let task = TaskSpec::new(obs, DegradationOp::identity(6, 6).unwrap(), 1.0).unwrap();
        let (l, _) = loss_and_grads(&net, &grid, &[task]).unwrap();
        assert!((l - 0.25).abs() < 1e-15);
    }

    #[test]
    fn masked_loss_averages_over_kept_pixels() {
        let grid = make_coord_grid(4, 4).unwrap();
        let net = constant_net(0.0);
        let keep = (0..16).map(|i| i % 4 == 0).collect();
        let map = crate::degradations::MaskMap::new(4, 4, keep).unwrap();
        let obs = Image::filled(4, 4, 3, 0.5).unwrap();
        let task = TaskSpec::new(obs, DegradationOp::mask(map), 1.0).unwrap();
        let (l, _) = loss_and_grads(&net, &grid, &[task]).unwrap();
        assert!((l - 0.25).abs() < 1e-15);
    }

    #[test]
    fn loss_rejects_bad_tasks() {
        let grid = make_coord_grid(4, 4).unwrap();
        let net = constant_net(0.0);
        assert!(loss_and_grads(&net, &grid, &[]).is_err());
        let obs = Image::filled(5, 5, 3, 0.5).unwrap();
        let task = TaskSpec::new(obs, DegradationOp::identity(5, 5).unwrap(), 1.0).unwrap();
        assert!(loss_and_grads(&net, &grid, &[task]).is_err());
        let obs = Image::filled(4, 4, 3, 0.5).unwrap();
        assert!(TaskSpec::new(obs.clone(), DegradationOp::identity(4, 4).unwrap(), 0.0).is_err());
        assert!(TaskSpec::new(obs, DegradationOp::identity(3, 4).unwrap(), 1.0).is_err());
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut state = AdamState::with_block_sizes(&[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        state.update(&mut [p.as_mut_slice()], &[&[0.0, 0.0, 0.0]], 1e-3).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn adam_first_step_has_magnitude_lr() {
        let mut state = AdamState::with_block_sizes(&[4]);
        let mut p = vec![0.0; 4];
        let g = [3.0, -0.01, 250.0, -7.5];
        state.update(&mut [p.as_mut_slice()], &[&g], 0.01).unwrap();
        for (pi, gi) in p.iter().zip(&g) {
            let expect = -0.01 * gi / (gi.abs() + 1e-8);
            assert!((pi - expect).abs() < 1e-12);
            assert!((pi.abs() - 0.01).abs() < 1e-6);
        }
    }

    #[test]
    fn adam_two_steps_match_hand_oracle() {
        let mut state = AdamState::with_block_sizes(&[1]);
        let mut p = vec![1.0];
        for _ in 0..2 {
            state.update(&mut [p.as_mut_slice()], &[&[1.0]], 0.1).unwrap();
        }
        // hand-stepped: m1 = 0.1, v1 = 0.001, m1_hat = 1, v1_hat = 1
        let p1 = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
        // m2 = 0.19, v2 = 0.001999; corrections 0.19 and 0.001999
        let m2_hat = 0.19 / (1.0 - 0.9f64 * 0.9);
        let v2_hat = (0.999 * 0.001 + 0.001) / (1.0 - 0.999f64 * 0.999);
        let p2 = p1 - 0.1 * m2_hat / (v2_hat.sqrt() + 1e-8);
        assert!((p[0] - p2).abs() < 1e-12, "{} vs {p2}", p[0]);
    }

    #[test]
    fn adam_rejects_bad_input() {
        let mut state = AdamState::with_block_sizes(&[2]);
        let mut p = vec![0.0; 3];
        assert!(state.update(&mut [p.as_mut_slice()], &[&[0.0; 3]], 0.1).is_err());
        let mut p = vec![0.0; 2];
        assert!(state.update(&mut [p.as_mut_slice()], &[&[0.0; 2]], 0.0).is_err());
    }

    #[test]
    fn zero_iterations_returns_initial_render() {
        let clean = Image::filled(6, 6, 3, 0.5).unwrap();
        let task =
            TaskSpec::new(clean.clone(), DegradationOp::identity(6, 6).unwrap(), 1.0).unwrap();
        let mut cfg = TrainConfig::new((6, 6));
        cfg.iterations = 0;
        cfg.width = 8;
        cfg.depth = 2;
        cfg.seed = 11;
        let res = restore(&cfg, &[task]).unwrap();
        assert!(res.trace.rows.is_empty());
        let mut rng = Rng::seed_from_u64(11);
        let net = init_siren(&mut rng, 2, 8, 2, 3, 30.0, ActivationKind::Sine, InputEncoding::RawCoords)
            .unwrap();
        let grid = make_coord_grid(6, 6).unwrap();
        assert_eq!(res.final_image, render(&net, &grid).unwrap());
        assert!(res.best.is_none());
    }

    #[test]
    fn short_run_is_deterministic_and_logs() {
        let clean = Image::from_fn(8, 8, 3, |y, x, c| (y + x + c) as f64 / 20.0).unwrap();
        let task =
            TaskSpec::new(clean.clone(), DegradationOp::identity(8, 8).unwrap(), 1.0).unwrap();
        let mut cfg = TrainConfig::new((8, 8));
        cfg.iterations = 25;
        cfg.width = 16;
        cfg.depth = 2;
        cfg.learning_rate = 1e-3;
        cfg.snapshot_every = 10;
        cfg.reference = Some(clean);
        let a = restore(&cfg, std::slice::from_ref(&task)).unwrap();
        let b = restore(&cfg, &[task]).unwrap();
        assert_eq!(a.final_image, b.final_image);
        assert_eq!(a.trace, b.trace);
        let iters: Vec<usize> = a.trace.rows.iter().map(|r| r.iteration).collect();
        assert_eq!(iters, vec![0, 10, 20, 25]);
        assert_eq!(a.trace.losses.len(), 25);
        assert!(a.best.is_some());
        assert_eq!(a.best_psnr, a.trace.max_psnr_ref());
        assert!(a.trace.losses[24] < a.trace.losses[0]);
    }
}
