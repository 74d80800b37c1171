use hdpg_core::nn::{Activation, GradientSet, MlpParams, MlpSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar objective `<g, f(x)>`.
fn objective(net: &MlpParams, x: &[f64], g: &[f64]) -> f64 {
    net.output(x).unwrap().iter().zip(g).map(|(a, b)| a * b).sum()
}

fn max_relative_error(net: &MlpParams, x: &[f64], g: &[f64]) -> f64 {
    let (_, cache) = net.forward(x).unwrap();
    let (grads, dx) = net.backward(&cache, g).unwrap();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let analytic: Vec<f64> = grads.values().copied().collect();
    let mut probe = net.clone();
    for (i, &a) in analytic.iter().enumerate() {
        let orig = *probe.values_mut().nth(i).unwrap();
        *probe.values_mut().nth(i).unwrap() = orig + eps;
        let up = objective(&probe, x, g);
        *probe.values_mut().nth(i).unwrap() = orig - eps;
        let down = objective(&probe, x, g);
        *probe.values_mut().nth(i).unwrap() = orig;
        let fd = (up - down) / (2.0 * eps);
        worst = worst.max(rel(a, fd));
    }
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += eps;
        xm[j] -= eps;
        let fd = (objective(net, &xp, g) - objective(net, &xm, g)) / (2.0 * eps);
        worst = worst.max(rel(dx[j], fd));
    }
    worst
}

/// Relative error with an absolute floor so exact zeros compare cleanly.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn random_case(seed: u64) -> (MlpParams, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let depth = rng.gen_range(2..=4);
        let sizes: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=6)).collect();
        let hidden = if rng.gen_bool(0.5) { Activation::Tanh } else { Activation::Relu };
        let output = if rng.gen_bool(0.5) { Activation::Tanh } else { Activation::Linear };
        let spec = MlpSpec::new(sizes.clone(), hidden, output);
        let mut net = MlpParams::init_with_rng(spec, &mut rng).unwrap();
        if net.param_count() > 200 {
            continue;
        }
        // Non-zero biases so every path is exercised.
        for v in net.values_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Skip draws that sit on a ReLU kink, where the derivative is undefined.
        let (_, cache) = net.forward(&x).unwrap();
        let near_kink = hidden == Activation::Relu
            && cache.pre_activations()[..cache.pre_activations().len() - 1]
                .iter()
                .flatten()
                .any(|z| z.abs() < 1e-4);
        if !near_kink {
            return (net, x, g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn backward_matches_central_differences(seed in any::<u64>()) {
        let (net, x, g) = random_case(seed);
        let err = max_relative_error(&net, &x, &g);
        prop_assert!(err < 1e-4, "max relative error {}", err);
    }

    #[test]
    fn gradients_share_parameter_shapes(seed in any::<u64>()) {
        let (net, x, g) = random_case(seed);
        let (_, cache) = net.forward(&x).unwrap();
        let (grads, dx) = net.backward(&cache, &g).unwrap();
        prop_assert_eq!(grads.values().count(), net.param_count());
        prop_assert_eq!(grads.layers.len(), net.layers().len());
        for (gl, pl) in grads.layers.iter().zip(net.layers()) {
            prop_assert_eq!((gl.rows, gl.cols), (pl.rows, pl.cols));
        }
        prop_assert_eq!(dx.len(), net.input_dim());
    }
}

#[test]
fn linear_layer_weight_gradient_is_outer_product() {
    let spec = MlpSpec::new(vec![3, 2], Activation::Relu, Activation::Linear);
    let net = MlpParams::init(spec, 5).unwrap();
    let x = [0.5, -1.5, 2.0];
    let g = [3.0, -0.25];
    let (_, cache) = net.forward(&x).unwrap();
    let (grads, _) = net.backward(&cache, &g).unwrap();
    let w = &grads.layers[0];
    for r in 0..2 {
        for c in 0..3 {
            assert_eq!(w.weights[r * 3 + c], g[r] * x[c]);
        }
        assert_eq!(w.bias[r], g[r]);
    }
}

#[test]
fn zero_output_gradient_gives_zero_gradients() {
    let (net, x, g) = random_case(1);
    let (_, cache) = net.forward(&x).unwrap();
    let (grads, dx) = net.backward(&cache, &vec![0.0; g.len()]).unwrap();
    assert!(grads.values().all(|&v| v == 0.0));
    assert!(dx.iter().all(|&v| v == 0.0));
    assert_eq!(GradientSet::zeros_like(&net).norm(), 0.0);
}
