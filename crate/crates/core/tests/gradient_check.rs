use caclab_core::rrbfn::{gradient, loss, rbf_forward, recurrent_input, sigmoid, Example, RrbfnParams};
use caclab_core::traffic::new_stream;
use rand::Rng;

const STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
// Central differences at this step are accurate to ~1e-10 absolute, so the
// relative comparison is floored for partials that are essentially zero.
const ABS_FLOOR: f64 = 1e-6;

fn random_net(seed: u64, m: usize, h: usize) -> (RrbfnParams, Vec<Example>) {
    let mut rng = new_stream(seed);
    let mut uni = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let recurrent = (0..m).map(|_| uni(-1.0, 1.0)).collect();
    let centers = (0..m * h).map(|_| uni(0.2, 0.8)).collect();
    let widths = (0..h).map(|_| uni(0.05, 0.6)).collect();
    let weights = (0..h).map(|_| uni(-3.0, 3.0)).collect();
    let bias = uni(-1.0, 1.0);
    let params = RrbfnParams::new(m, h, recurrent, centers, widths, weights, bias).unwrap();
    let batch =
        (0..6).map(|i| Example { inputs: (0..m).map(|_| uni(-1.5, 1.5)).collect(), target: (i % 2) as f64 }).collect();
    (params, batch)
}

fn finite_difference(params: &RrbfnParams, batch: &[Example]) -> Vec<f64> {
    let base = params.trainable_values();
    (0..base.len())
        .map(|k| {
            let mut p = params.clone();
            let mut v = base.clone();
            v[k] = base[k] + STEP;
            p.set_trainable_values(&v);
            let up = loss(&p, batch).unwrap();
            v[k] = base[k] - STEP;
            p.set_trainable_values(&v);
            let down = loss(&p, batch).unwrap();
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

#[test]
fn analytic_partials_match_central_differences() {
    for restart in 0..20u64 {
        let (params, batch) = random_net(1000 + restart, 4, 3);
        let analytic = gradient(&params, &batch).unwrap().to_flat();
        let numeric = finite_difference(&params, &batch);
        assert_eq!(analytic.len(), numeric.len());
        for (k, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let rel = (a - n).abs() / a.abs().max(n.abs()).max(ABS_FLOOR);
            assert!(rel < REL_TOL, "restart {restart} component {k}: analytic {a:e} numeric {n:e}");
        }
    }
}

#[test]
fn batch_gradient_is_mean_of_sample_gradients() {
    let (params, batch) = random_net(77, 4, 3);
    let whole = gradient(&params, &batch).unwrap().to_flat();
    let mut mean = vec![0.0; whole.len()];
    for e in &batch {
        for (acc, g) in mean.iter_mut().zip(gradient(&params, std::slice::from_ref(e)).unwrap().to_flat()) {
            *acc += g / batch.len() as f64;
        }
    }
    for (a, b) in whole.iter().zip(&mean) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn exact_fit_is_stationary() {
    let (params, batch) = random_net(5, 4, 3);
    let sample = &batch[0];
    let (y, _) = recurrent_input(&sample.inputs, &params.fresh_state(), &params).unwrap();
    let fitted = Example { inputs: sample.inputs.clone(), target: sigmoid(rbf_forward(&y, &params)) };
    let g = gradient(&params, std::slice::from_ref(&fitted)).unwrap();
    assert!(g.norm() < 1e-8, "norm {}", g.norm());
    assert_eq!(loss(&params, &[fitted]).unwrap(), 0.0);
}

#[test]
fn loss_is_non_negative_on_random_batches() {
    for seed in 0..100 {
        let (params, batch) = random_net(seed, 3, 2);
        assert!(loss(&params, &batch).unwrap() >= 0.0);
    }
}
