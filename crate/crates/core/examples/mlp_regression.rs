//! The network core on its own: fit sin(3x) with a ReLU MLP and Adam.
//!
//! cargo run --example mlp_regression

use gcmi::nn::{AdamConfig, AdamState, Mlp, OutputActivation};
use ndarray::Array2;

fn main() -> gcmi::Result<()> {
    let n = 256;
    let x = Array2::from_shape_fn((n, 1), |(i, _)| -1.0 + 2.0 * i as f64 / (n - 1) as f64);
    let y = x.mapv(|v| (3.0 * v).sin());

    let mut net = Mlp::new(1, &[32, 32], 1, OutputActivation::Identity, 4)?;
    let mut adam = AdamState::new(
        &net,
        AdamConfig {
            learning_rate: 0.003,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 0.0,
        },
    )?;
    for step in 0..=2000 {
        let cache = net.forward_cached(x.view())?;
        let residual = cache.output() - &y;
        // d(mean squared error)/d(output)
        let grad_out = residual.mapv(|r| 2.0 * r / n as f64);
        let grads = net.param_gradients(x.view(), &cache, grad_out.view())?;
        adam.step(&mut net, &grads)?;
        if step % 400 == 0 {
            println!("step {step:>4}  mse {:.6}", residual.mapv(|r| r * r).mean().unwrap());
        }
    }
    let probe = Array2::from_shape_vec((3, 1), vec![-0.5, 0.0, 0.5]).unwrap();
    println!("f(-0.5, 0, 0.5) = {:.3?}", net.forward(probe.view())?.column(0).to_vec());
    println!("sin    targets  = {:.3?}", [-1.5f64.sin(), 0.0, 1.5f64.sin()]);
    Ok(())
}
