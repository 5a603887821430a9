use nalgebra::{DMatrix, DVector};

use super::arch::{Activation, Architecture};
use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `|L_j| x in_width`, structural zeros included.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activations: Vec<Activation>,
}

/// A network with its weights assembled: `x -> f_w(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetFunction {
    pub input_dim: usize,
    pub layers: Vec<DenseLayer>,
    /// Apply a final `clamp(-1, 1)` stage.
    pub clip_output: bool,
}

/// Fills the weight matrices and biases from `w` through the sharing map.
pub fn materialize(arch: &Architecture, w: &[f64]) -> Result<NetFunction> {
    if w.len() != arch.p() {
        return Err(LabError::Domain(format!(
            "parameter vector has length {}, architecture has p = {}",
            w.len(),
            arch.p()
        )));
    }
    let layers = arch
        .layers
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let width = arch.in_width(j);
            let weights = DMatrix::from_fn(spec.size, width, |k, l| {
                spec.weights[k * width + l].map_or(0.0, |a| w[a])
            });
            let bias = DVector::from_iterator(spec.size, spec.biases.iter().map(|b| b.map_or(0.0, |a| w[a])));
            DenseLayer {
                weights,
                bias,
                activations: spec.activations.clone(),
            }
        })
        .collect();
    Ok(NetFunction {
        input_dim: arch.input_dim,
        layers,
        clip_output: false,
    })
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// `[x, a_1, ..., a_D]` concatenated.
    pub state: Vec<f64>,
    pub pre: Vec<DVector<f64>>,
    pub output: f64,
}

impl NetFunction {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn with_clip(mut self, clip: bool) -> Self {
        self.clip_output = clip;
        self
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.input_dim {
            return Err(LabError::Domain(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let total = self.input_dim + self.layers.iter().map(|l| l.bias.len()).sum::<usize>();
        let mut state = Vec::with_capacity(total);
        state.extend_from_slice(x);
        let mut pre = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let width = layer.weights.ncols();
            let h = DVector::from_column_slice(&state[..width]);
            let z = &layer.weights * h + &layer.bias;
            state.extend(z.iter().zip(&layer.activations).map(|(v, act)| act.apply(*v)));
            pre.push(z);
        }
        let raw = *state.last().unwrap_or(&0.0);
        let output = if self.clip_output { raw.clamp(-1.0, 1.0) } else { raw };
        Ok(ForwardTrace { state, pre, output })
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward_trace(x)?.output)
    }

    /// Gradient of the unclipped output with respect to every entry of the
    /// concatenated state `[x, a_1, ..., a_D]`, plus per-layer deltas
    /// `d out / d pre_j`.
    fn backward(&self, trace: &ForwardTrace) -> (Vec<f64>, Vec<DVector<f64>>) {
        let mut grad_state = vec![0.0; trace.state.len()];
        if let Some(last) = grad_state.last_mut() {
            *last = 1.0;
        }
        let mut deltas = vec![DVector::zeros(0); self.layers.len()];
        let mut offset = trace.state.len();
        for (j, layer) in self.layers.iter().enumerate().rev() {
            let size = layer.bias.len();
            offset -= size;
            let delta = DVector::from_iterator(
                size,
                (0..size).map(|k| grad_state[offset + k] * layer.activations[k].derivative(trace.pre[j][k])),
            );
            let width = layer.weights.ncols();
            let back = layer.weights.tr_mul(&delta);
            for (g, b) in grad_state[..width].iter_mut().zip(back.iter()) {
                *g += b;
            }
            deltas[j] = delta;
        }
        (grad_state, deltas)
    }

    /// `grad_x f(x)` by backpropagation (clip stage ignored).
    pub fn input_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let trace = self.forward_trace(x)?;
        let (grad_state, _) = self.backward(&trace);
        Ok(grad_state[..self.input_dim].to_vec())
    }
}

/// Output and `grad_w f_w(x)`, accumulated over tied entries.
pub fn param_gradient(arch: &Architecture, net: &NetFunction, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let trace = net.forward_trace(x)?;
    let (_, deltas) = net.backward(&trace);
    let mut grad = vec![0.0; arch.p()];
    accumulate_param_grad(arch, &trace, &deltas, 1.0, &mut grad);
    Ok((*trace.state.last().unwrap_or(&0.0), grad))
}

fn accumulate_param_grad(
    arch: &Architecture,
    trace: &ForwardTrace,
    deltas: &[DVector<f64>],
    scale: f64,
    grad: &mut [f64],
) {
    for (j, spec) in arch.layers.iter().enumerate() {
        let width = arch.in_width(j);
        let h = &trace.state[..width];
        for k in 0..spec.size {
            let dk = scale * deltas[j][k];
            if dk == 0.0 {
                continue;
            }
            for (entry, hv) in spec.weights[k * width..(k + 1) * width].iter().zip(h) {
                if let Some(a) = entry {
                    grad[*a] += dk * hv;
                }
            }
            if let Some(a) = spec.biases[k] {
                grad[a] += dk;
            }
        }
    }
}

/// Mean squared error over `(x_i, y_i)` and its gradient in `w`. When
/// `clip` is set the reported loss uses clipped outputs while the gradient
/// stays that of the unclipped squared loss.
pub fn mse_and_gradient(
    arch: &Architecture,
    net: &NetFunction,
    xs: &[Vec<f64>],
    ys: &[f64],
    clip: bool,
) -> Result<(f64, Vec<f64>)> {
    let n = xs.len() as f64;
    let mut grad = vec![0.0; arch.p()];
    let mut loss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let trace = net.forward_trace(x)?;
        let raw = *trace.state.last().unwrap_or(&0.0);
        let shown = if clip { raw.clamp(-1.0, 1.0) } else { raw };
        loss += (shown - y) * (shown - y);
        let (_, deltas) = net.backward(&trace);
        accumulate_param_grad(arch, &trace, &deltas, 2.0 * (raw - y) / n, &mut grad);
    }
    Ok((loss / n, grad))
}

pub fn mse(net: &NetFunction, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
    let mut loss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let f = net.forward(x)?;
        loss += (f - y) * (f - y);
    }
    Ok(loss / xs.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netzoo::arch::LayerSpec;

    fn single(act: Activation, bias: bool) -> Architecture {
        let layer = LayerSpec {
            size: 1,
            activations: vec![act],
            weights: vec![Some(0)],
            biases: vec![bias.then_some(1)],
        };
        Architecture::new(1, vec![layer], 1.0, 1.0).unwrap()
    }

    #[test]
    fn identity_like_single_weight() {
        let net = materialize(&single(Activation::Identity, false), &[1.0]).unwrap();
        assert_eq!(net.forward(&[0.7]).unwrap(), 0.7);
    }

    #[test]
    fn relu_neuron_kills_negative_input() {
        let net = materialize(&single(Activation::Relu, false), &[1.0]).unwrap();
        assert_eq!(net.forward(&[-2.0]).unwrap(), 0.0);
    }

    #[test]
    fn shared_weight_fills_every_tied_entry() {
        let layer = LayerSpec {
            size: 1,
            activations: vec![Activation::Identity],
            weights: vec![Some(0), Some(0)],
            biases: vec![None],
        };
        let arch = Architecture::new(2, vec![layer], 1.0, 1.0).unwrap();
        assert_eq!(arch.q(), 2);
        let net = materialize(&arch, &[0.3]).unwrap();
        assert_eq!(net.layers[0].weights[(0, 0)], 0.3);
        assert_eq!(net.layers[0].weights[(0, 1)], 0.3);
    }

    #[test]
    fn all_structural_network_is_zero() {
        let layer = LayerSpec {
            size: 1,
            activations: vec![Activation::Identity],
            weights: vec![None, None],
            biases: vec![None],
        };
        let arch = Architecture::new(2, vec![layer], 1.0, 1.0).unwrap();
        assert_eq!(arch.p(), 0);
        let net = materialize(&arch, &[]).unwrap();
        assert_eq!(net.forward(&[3.0, -4.0]).unwrap(), 0.0);
    }

    #[test]
    fn length_and_dimension_mismatch() {
        let arch = single(Activation::Identity, true);
        assert!(materialize(&arch, &[1.0]).is_err());
        let net = materialize(&arch, &[1.0, 0.5]).unwrap();
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_weights_give_zero() {
        let arch = Architecture::feedforward(4, &[5, 3], Activation::Tanh, true, 1.0, 1.0).unwrap();
        let net = materialize(&arch, &vec![0.0; arch.p()]).unwrap();
        assert_eq!(net.forward(&[0.1, 0.2, -0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn clip_stage() {
        let net = materialize(&single(Activation::Identity, true), &[1.0, 2.0])
            .unwrap()
            .with_clip(true);
        assert_eq!(net.forward(&[0.5]).unwrap(), 1.0);
    }
}
