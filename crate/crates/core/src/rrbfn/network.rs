//! Forward pass, squared-error loss and its analytic gradient.
//!
//! Input neuron `j` fires `y_j = σ(x_j + r_j·y_j⁻)` where `y_j⁻` is its
//! previous activation. The hidden layer is Gaussian over the squared
//! distance to each centre, `φ_i = exp(−‖y − c_i‖² / s_i)`, and the linear
//! output `z = b + Σ w_i φ_i` is squashed by a final sigmoid.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::traffic::{new_stream, RandomStream};

pub const MIN_WIDTH: f64 = 1e-6;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrbfnParams {
    input_width: usize,
    hidden_width: usize,
    /// One self-connection per input neuron, in `[-1, 1]`.
    pub recurrent_weights: Vec<f64>,
    /// Row-major `hidden_width × input_width`.
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Activations of the input layer carried from one call to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct RrbfnState {
    pub previous_activations: Vec<f64>,
}

impl RrbfnState {
    pub fn new(input_width: usize) -> Self {
        Self { previous_activations: vec![0.0; input_width] }
    }
}

/// One numeric training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub inputs: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitOptions {
    /// Standard deviation of the normal the recurrent weights are drawn from
    /// before truncation to `[-1, 1]`.
    pub recurrent_std: f64,
    pub output_weight_std: f64,
}

impl Default for InitOptions {
    fn default() -> Self {
        Self { recurrent_std: 1.0, output_weight_std: 0.1 }
    }
}

impl RrbfnParams {
    pub fn new(
        input_width: usize,
        hidden_width: usize,
        recurrent_weights: Vec<f64>,
        centers: Vec<f64>,
        widths: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        if input_width == 0 || hidden_width == 0 {
            return Err(invalid("layer widths must be positive"));
        }
        if recurrent_weights.len() != input_width
            || centers.len() != input_width * hidden_width
            || widths.len() != hidden_width
            || output_weights.len() != hidden_width
        {
            return Err(invalid("parameter group lengths do not match the layer sizes"));
        }
        if recurrent_weights.iter().any(|r| !(-1.0..=1.0).contains(r)) {
            return Err(invalid("recurrent weights must lie in [-1, 1]"));
        }
        if widths.iter().any(|w| !(*w >= MIN_WIDTH)) {
            return Err(invalid(format!("widths must be >= {MIN_WIDTH}")));
        }
        let all = centers.iter().chain(&output_weights).chain(std::iter::once(&output_bias));
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite parameter"));
        }
        Ok(Self { input_width, hidden_width, recurrent_weights, centers, widths, output_weights, output_bias })
    }

    /// Recurrent weights from a truncated normal, centres drawn from the rows
    /// of `data` (as zero-state input activations), widths set to the mean
    /// pairwise centre distance and small random output weights.
    pub fn initialize(
        input_width: usize,
        hidden_width: usize,
        data: &[Example],
        options: &InitOptions,
        seed: u64,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(invalid("cannot initialise centres from an empty data set"));
        }
        if let Some(bad) = data.iter().find(|e| e.inputs.len() != input_width) {
            return Err(invalid(format!("example has {} inputs, expected {input_width}", bad.inputs.len())));
        }
        let mut rng = new_stream(seed);
        let recurrent_weights = truncated_normal(&mut rng, options.recurrent_std, input_width)?;

        let mut centers = Vec::with_capacity(hidden_width * input_width);
        for _ in 0..hidden_width {
            let pick = &data[rng.random_range(0..data.len())];
            centers.extend(pick.inputs.iter().map(|&x| sigmoid(x)));
        }

        let mut sum = 0.0;
        let mut pairs = 0usize;
        for a in 0..hidden_width {
            for b in (a + 1)..hidden_width {
                let ca = &centers[a * input_width..(a + 1) * input_width];
                let cb = &centers[b * input_width..(b + 1) * input_width];
                sum += ca.iter().zip(cb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                pairs += 1;
            }
        }
        let mean_distance = if pairs > 0 && sum > 0.0 { sum / pairs as f64 } else { 1.0 };
        let widths = vec![mean_distance.max(MIN_WIDTH); hidden_width];

        let normal = Normal::new(0.0, options.output_weight_std).map_err(|e| invalid(e.to_string()))?;
        let output_weights = (0..hidden_width).map(|_| normal.sample(&mut rng)).collect();

        Self::new(input_width, hidden_width, recurrent_weights, centers, widths, output_weights, 0.0)
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.input_width..(i + 1) * self.input_width]
    }

    pub fn fresh_state(&self) -> RrbfnState {
        RrbfnState::new(self.input_width)
    }

    pub fn trainable_len(&self) -> usize {
        2 * self.hidden_width + 1 + self.centers.len()
    }

    /// Trainable values in gradient order: output weights, bias, centres, widths.
    pub fn trainable_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.trainable_len());
        v.extend(&self.output_weights);
        v.push(self.output_bias);
        v.extend(&self.centers);
        v.extend(&self.widths);
        v
    }

    pub fn set_trainable_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.trainable_len());
        let h = self.hidden_width;
        let c = self.centers.len();
        self.output_weights.copy_from_slice(&values[..h]);
        self.output_bias = values[h];
        self.centers.copy_from_slice(&values[h + 1..h + 1 + c]);
        self.widths.copy_from_slice(&values[h + 1 + c..]);
    }

    /// Gradient step; widths are floored afterwards.
    pub fn apply_gradient(&mut self, grad: &ParamGradient, learning_rate: f64) {
        for (w, g) in self.output_weights.iter_mut().zip(&grad.output_weights) {
            *w -= learning_rate * g;
        }
        self.output_bias -= learning_rate * grad.output_bias;
        for (c, g) in self.centers.iter_mut().zip(&grad.centers) {
            *c -= learning_rate * g;
        }
        for (s, g) in self.widths.iter_mut().zip(&grad.widths) {
            *s = (*s - learning_rate * g).max(MIN_WIDTH);
        }
    }
}

fn truncated_normal(rng: &mut RandomStream, std: f64, n: usize) -> Result<Vec<f64>> {
    if std == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
    Ok((0..n)
        .map(|_| loop {
            let x: f64 = normal.sample(rng);
            if (-1.0..=1.0).contains(&x) {
                break x;
            }
        })
        .collect())
}

/// Sigmoid input layer with self-connections.
pub fn recurrent_input(features: &[f64], state: &RrbfnState, params: &RrbfnParams) -> Result<(Vec<f64>, RrbfnState)> {
    if features.len() != params.input_width || state.previous_activations.len() != params.input_width {
        return Err(invalid(format!(
            "expected {} inputs and state entries, got {} and {}",
            params.input_width,
            features.len(),
            state.previous_activations.len()
        )));
    }
    let activations: Vec<f64> = features
        .iter()
        .zip(&params.recurrent_weights)
        .zip(&state.previous_activations)
        .map(|((x, r), prev)| sigmoid(x + r * prev))
        .collect();
    let next = RrbfnState { previous_activations: activations.clone() };
    Ok((activations, next))
}

fn hidden_responses(activations: &[f64], params: &RrbfnParams) -> Vec<(f64, f64)> {
    (0..params.hidden_width)
        .map(|i| {
            let d2: f64 = activations.iter().zip(params.center(i)).map(|(y, c)| (y - c).powi(2)).sum();
            (d2, (-d2 / params.widths[i]).exp())
        })
        .collect()
}

/// Linear RBF output `b + Σ w_i exp(−‖y − c_i‖² / s_i)`.
pub fn rbf_forward(activations: &[f64], params: &RrbfnParams) -> f64 {
    debug_assert_eq!(activations.len(), params.input_width);
    params.output_bias
        + hidden_responses(activations, params)
            .iter()
            .zip(&params.output_weights)
            .map(|((_, phi), w)| w * phi)
            .sum::<f64>()
}

/// Full pass with the output squashed to `[0, 1]`.
pub fn forward(features: &[f64], state: &RrbfnState, params: &RrbfnParams) -> Result<(f64, RrbfnState)> {
    let (activations, next) = recurrent_input(features, state, params)?;
    Ok((sigmoid(rbf_forward(&activations, params)), next))
}

fn check_batch(params: &RrbfnParams, batch: &[Example]) -> Result<()> {
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    if let Some(bad) = batch.iter().find(|e| e.inputs.len() != params.input_width) {
        return Err(invalid(format!("example has {} inputs, expected {}", bad.inputs.len(), params.input_width)));
    }
    Ok(())
}

/// Mean squared error with the recurrent state reset before every example.
pub fn loss(params: &RrbfnParams, batch: &[Example]) -> Result<f64> {
    check_batch(params, batch)?;
    let fresh = params.fresh_state();
    let mut total = 0.0;
    for e in batch {
        let (out, _) = forward(&e.inputs, &fresh, params)?;
        total += (out - e.target).powi(2);
    }
    Ok(total / batch.len() as f64)
}

/// Partial derivatives of [`loss`] with respect to the trainable parameters.
/// Recurrent weights are not trained.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
}

impl ParamGradient {
    fn zeros(params: &RrbfnParams) -> Self {
        Self {
            output_weights: vec![0.0; params.hidden_width],
            output_bias: 0.0,
            centers: vec![0.0; params.centers.len()],
            widths: vec![0.0; params.hidden_width],
        }
    }

    /// Same order as [`RrbfnParams::trainable_values`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.output_weights.clone();
        v.push(self.output_bias);
        v.extend(&self.centers);
        v.extend(&self.widths);
        v
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

pub fn gradient(params: &RrbfnParams, batch: &[Example]) -> Result<ParamGradient> {
    check_batch(params, batch)?;
    let fresh = params.fresh_state();
    let m = params.input_width;
    let scale = 1.0 / batch.len() as f64;
    let mut grad = ParamGradient::zeros(params);

    for e in batch {
        let (y, _) = recurrent_input(&e.inputs, &fresh, params)?;
        let hidden = hidden_responses(&y, params);
        let z =
            params.output_bias + hidden.iter().zip(&params.output_weights).map(|((_, phi), w)| w * phi).sum::<f64>();
        let s = sigmoid(z);
        let dz = 2.0 * (s - e.target) * s * (1.0 - s) * scale;

        grad.output_bias += dz;
        for (i, &(d2, phi)) in hidden.iter().enumerate() {
            let w = params.output_weights[i];
            let width = params.widths[i];
            grad.output_weights[i] += dz * phi;
            grad.widths[i] += dz * w * phi * d2 / (width * width);
            let common = dz * w * phi * 2.0 / width;
            let center = params.center(i);
            for j in 0..m {
                grad.centers[i * m + j] += common * (y[j] - center[j]);
            }
        }
    }
    Ok(grad)
}
