//! Fit y = sin(3x) on [-1, 1] with a small tanh network and Adam, using the
//! explicit forward/backward API.
//!
//! cargo run --release --example nn_regression

use adrlab::nn::{Activation, AdamState, Init, Matrix, Mlp};
use adrlab::rng::seeded;
use rand::Rng;

fn main() -> adrlab::Result<()> {
    let mut rng = seeded(0);
    let mut net = Mlp::new(&[1, 32, 32, 1], Activation::Tanh, Activation::Identity, Init::UniformFanIn, &mut rng)?;
    let mut opt = AdamState::new(3e-3);
    let test_x: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
    let xt = Matrix::from_vec(test_x.len(), 1, test_x.clone())?;

    for step in 0..=3000 {
        let xs: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Matrix::from_vec(64, 1, xs.clone())?;
        let pred = net.forward(&x)?;
        // d/dpred of the mean squared error.
        let grad: Vec<f64> = pred
            .data()
            .iter()
            .zip(&xs)
            .map(|(p, x)| 2.0 * (p - (3.0 * x).sin()) / 64.0)
            .collect();
        let grads = net.backward(&Matrix::from_vec(64, 1, grad)?)?;
        opt.step(net.params_mut(), &grads.as_list())?;

        if step % 500 == 0 {
            let p = net.predict(&xt)?;
            let mse = p
                .data()
                .iter()
                .zip(&test_x)
                .map(|(p, x)| (p - (3.0 * x).sin()).powi(2))
                .sum::<f64>()
                / test_x.len() as f64;
            println!("step {step:>5}  test mse {mse:.6}");
        }
    }
    Ok(())
}
