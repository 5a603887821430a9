use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// The fixed menu of 1-Lipschitz nonlinearities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Abs,
    /// Linear output neuron.
    Identity,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Abs => v.abs(),
            Activation::Identity => v,
        }
    }

    pub fn derivative(self, v: f64) -> f64 {
        match self {
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = v.tanh();
                1.0 - t * t
            }
            Activation::Abs => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Self::Relu),
            "tanh" => Ok(Self::Tanh),
            "abs" => Ok(Self::Abs),
            "identity" | "linear" => Ok(Self::Identity),
            other => Err(LabError::Config(format!("unknown nonlinearity `{other}`"))),
        }
    }
}

/// One layer `L_j`. Its weight matrix has shape `size x in_width`, where
/// `in_width = d + sum_{i<j} |L_i|` (input first, then earlier layers).
/// `None` marks a structural zero, `Some(a)` ties the entry to `w[a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub size: usize,
    pub activations: Vec<Activation>,
    /// Row-major, `size * in_width` entries.
    pub weights: Vec<Option<usize>>,
    pub biases: Vec<Option<usize>>,
}

/// Fixed architecture `w in R^p -> f_w`, with magnitude bound `W` on the
/// parameters and radius bound `R` on the covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct Architecture {
    pub input_dim: usize,
    pub layers: Vec<LayerSpec>,
    p: usize,
    q: usize,
    pub w_bound: f64,
    pub radius: f64,
}

impl Architecture {
    pub fn new(input_dim: usize, layers: Vec<LayerSpec>, w_bound: f64, radius: f64) -> Result<Self> {
        if input_dim == 0 {
            return Err(LabError::Config("input dimension must be positive".into()));
        }
        let last = layers
            .last()
            .ok_or_else(|| LabError::Config("architecture needs at least one layer".into()))?;
        if last.size != 1 {
            return Err(LabError::Config(format!(
                "output layer must have one neuron, has {}",
                last.size
            )));
        }
        let mut in_width = input_dim;
        let mut counts: Vec<usize> = Vec::new();
        for (j, layer) in layers.iter().enumerate() {
            if layer.size == 0 {
                return Err(LabError::Config(format!("layer {} is empty", j + 1)));
            }
            if layer.activations.len() != layer.size
                || layer.biases.len() != layer.size
                || layer.weights.len() != layer.size * in_width
            {
                return Err(LabError::Config(format!("layer {} has inconsistent shapes", j + 1)));
            }
            for idx in layer.weights.iter().chain(&layer.biases).flatten() {
                if *idx >= counts.len() {
                    counts.resize(idx + 1, 0);
                }
                counts[*idx] += 1;
            }
            in_width += layer.size;
        }
        if let Some(unused) = counts.iter().position(|&c| c == 0) {
            return Err(LabError::Config(format!("parameter index {unused} is never used")));
        }
        if !(w_bound > 0.0) || !(radius > 0.0) {
            return Err(LabError::Config("W and R must be positive".into()));
        }
        let p = counts.len();
        let q = counts.iter().copied().max().unwrap_or(0).max(1);
        Ok(Self {
            input_dim,
            layers,
            p,
            q,
            w_bound,
            radius,
        })
    }

    /// Plain chain `x -> L_1 -> ... -> L_D` with one scalar linear output and
    /// one parameter per entry.
    pub fn feedforward(
        input_dim: usize,
        hidden: &[usize],
        activation: Activation,
        bias: bool,
        w_bound: f64,
        radius: f64,
    ) -> Result<Self> {
        let mut sizes: Vec<usize> = hidden.to_vec();
        sizes.push(1);
        let mut layers = Vec::with_capacity(sizes.len());
        let mut next = 0usize;
        let mut in_width = input_dim;
        let mut prev_offset = 0usize;
        let mut prev_size = input_dim;
        for (j, &size) in sizes.iter().enumerate() {
            let mut weights = vec![None; size * in_width];
            for k in 0..size {
                for l in prev_offset..prev_offset + prev_size {
                    weights[k * in_width + l] = Some(next);
                    next += 1;
                }
            }
            let biases = (0..size)
                .map(|_| {
                    bias.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect();
            let act = if j + 1 == sizes.len() {
                Activation::Identity
            } else {
                activation
            };
            layers.push(LayerSpec {
                size,
                activations: vec![act; size],
                weights,
                biases,
            });
            prev_offset = in_width;
            prev_size = size;
            in_width += size;
        }
        Self::new(input_dim, layers, w_bound, radius)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Maximum number of entries tied to one parameter.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of layers `D`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Width of the concatenated input seen by layer `j` (0-based).
    pub fn in_width(&self, j: usize) -> usize {
        self.input_dim + self.layers[..j].iter().map(|l| l.size).sum::<usize>()
    }

    /// True when every layer reads only from the layer directly below it
    /// (the input for the first layer).
    pub fn is_chain(&self) -> bool {
        let mut offset = 0usize;
        let mut prev = self.input_dim;
        for (j, layer) in self.layers.iter().enumerate() {
            let width = self.in_width(j);
            for k in 0..layer.size {
                for l in 0..width {
                    if layer.weights[k * width + l].is_some() && !(offset..offset + prev).contains(&l) {
                        return false;
                    }
                }
            }
            offset = width;
            prev = layer.size;
        }
        true
    }

    /// Fan-in (number of variable weights) per row, used by the initializer.
    fn fan_in(&self, j: usize, k: usize) -> usize {
        let width = self.in_width(j);
        self.layers[j].weights[k * width..(k + 1) * width]
            .iter()
            .filter(|e| e.is_some())
            .count()
            .max(1)
    }

    /// Per-parameter uniform draw on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, using
    /// the fan-in of the first row that references the parameter.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut scale = vec![None; self.p];
        for (j, layer) in self.layers.iter().enumerate() {
            let width = self.in_width(j);
            for k in 0..layer.size {
                let s = 1.0 / (self.fan_in(j, k) as f64).sqrt();
                for idx in layer.weights[k * width..(k + 1) * width].iter().flatten() {
                    scale[*idx].get_or_insert(s);
                }
                if let Some(idx) = layer.biases[k] {
                    scale[idx].get_or_insert(s);
                }
            }
        }
        scale
            .into_iter()
            .map(|s| {
                let s = s.unwrap_or(1.0);
                rng.random_range(-s..=s)
            })
            .collect()
    }

    pub fn to_wire(&self) -> ArchitectureWire {
        ArchitectureWire {
            layer_sizes: self.layers.iter().map(|l| l.size).collect(),
            input_dim: self.input_dim,
            masks: self
                .layers
                .iter()
                .map(|l| LayerMask {
                    weights: l.weights.iter().map(Option::is_some).collect(),
                    biases: l.biases.iter().map(Option::is_some).collect(),
                })
                .collect(),
            sharing: self
                .layers
                .iter()
                .map(|l| LayerSharing {
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                })
                .collect(),
            nonlinearities: self.layers.iter().map(|l| l.activations.clone()).collect(),
            p: self.p,
            q: self.q,
            depth: self.depth(),
            w: self.w_bound,
            r: self.radius,
        }
    }

    pub fn from_wire(wire: &ArchitectureWire) -> Result<Self> {
        let n = wire.layer_sizes.len();
        if wire.masks.len() != n || wire.sharing.len() != n || wire.nonlinearities.len() != n {
            return Err(LabError::Config("architecture arrays disagree on depth".into()));
        }
        let mut layers = Vec::with_capacity(n);
        for j in 0..n {
            let (mask, share) = (&wire.masks[j], &wire.sharing[j]);
            let consistent = mask.weights.len() == share.weights.len()
                && mask.biases.len() == share.biases.len()
                && mask.weights.iter().zip(&share.weights).all(|(m, s)| *m == s.is_some())
                && mask.biases.iter().zip(&share.biases).all(|(m, s)| *m == s.is_some());
            if !consistent {
                return Err(LabError::Config(format!(
                    "layer {} mask disagrees with sharing map",
                    j + 1
                )));
            }
            layers.push(LayerSpec {
                size: wire.layer_sizes[j],
                activations: wire.nonlinearities[j].clone(),
                weights: share.weights.clone(),
                biases: share.biases.clone(),
            });
        }
        let arch = Self::new(wire.input_dim, layers, wire.w, wire.r)?;
        if arch.p != wire.p || arch.q != wire.q || arch.depth() != wire.depth {
            return Err(LabError::Config(
                "declared p, Q or D disagree with the sharing map".into(),
            ));
        }
        Ok(arch)
    }

    /// Every parameter index referenced by layer `j`.
    pub fn layer_params(&self, j: usize) -> BTreeSet<usize> {
        let l = &self.layers[j];
        l.weights.iter().chain(&l.biases).flatten().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMask {
    pub weights: Vec<bool>,
    pub biases: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSharing {
    pub weights: Vec<Option<usize>>,
    pub biases: Vec<Option<usize>>,
}

/// JSON form `{layer_sizes, input_dim, masks, sharing, nonlinearities, p, Q, D, W, R}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureWire {
    pub layer_sizes: Vec<usize>,
    pub input_dim: usize,
    pub masks: Vec<LayerMask>,
    pub sharing: Vec<LayerSharing>,
    pub nonlinearities: Vec<Vec<Activation>>,
    pub p: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "D")]
    pub depth: usize,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

/// Architecture plus a flat weight vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub architecture: ArchitectureWire,
    pub weights: Vec<f64>,
}

/// Options for [`random_architecture`].
#[derive(Clone, Copy, Debug)]
pub struct RandomArchOptions {
    pub max_input_dim: usize,
    pub max_depth: usize,
    pub max_params: usize,
    pub max_width: usize,
    /// Allow layers to read from any earlier layer, not just the previous one.
    pub skip_connections: bool,
    /// Tie a fraction of entries to already used parameters.
    pub weight_sharing: bool,
    pub biases: bool,
}

impl Default for RandomArchOptions {
    fn default() -> Self {
        Self {
            max_input_dim: 8,
            max_depth: 3,
            max_params: 50,
            max_width: 6,
            skip_connections: false,
            weight_sharing: true,
            biases: true,
        }
    }
}

/// Random architecture within the given size limits. Layer sizes, sparsity
/// pattern, sharing and nonlinearities are all drawn from `rng`.
pub fn random_architecture<R: Rng + ?Sized>(
    rng: &mut R,
    opts: RandomArchOptions,
    w_bound: f64,
    radius: f64,
) -> Result<Architecture> {
    let input_dim = rng.random_range(1..=opts.max_input_dim.max(1));
    let depth = rng.random_range(1..=opts.max_depth.max(1));
    let mut sizes: Vec<usize> = (0..depth - 1)
        .map(|_| rng.random_range(1..=opts.max_width.max(1)))
        .collect();
    sizes.push(1);
    let menu = [Activation::Relu, Activation::Tanh, Activation::Abs];

    // slots: (layer, flat position, is_bias); structural pattern first
    let mut layers = Vec::with_capacity(depth);
    let mut slots: Vec<(usize, usize, bool)> = Vec::new();
    let mut in_width = input_dim;
    let mut prev_offset = 0usize;
    let mut prev_size = input_dim;
    for (j, &size) in sizes.iter().enumerate() {
        let mut row_slots = Vec::new();
        for k in 0..size {
            for l in 0..in_width {
                let readable = if opts.skip_connections {
                    true
                } else {
                    (prev_offset..prev_offset + prev_size).contains(&l)
                };
                if readable && rng.random::<f64>() < 0.8 {
                    row_slots.push((j, k * in_width + l, false));
                }
            }
            if opts.biases && rng.random::<f64>() < 0.5 {
                row_slots.push((j, k, true));
            }
        }
        if j + 1 == depth && slots.is_empty() && row_slots.is_empty() {
            // the network must have at least one parameter
            row_slots.push((j, prev_offset, false));
        }
        slots.extend(row_slots);
        let activations = if j + 1 == depth {
            vec![Activation::Identity]
        } else {
            (0..size).map(|_| menu[rng.random_range(0..menu.len())]).collect()
        };
        layers.push(LayerSpec {
            size,
            activations,
            weights: vec![None; size * in_width],
            biases: vec![None; size],
        });
        prev_offset = in_width;
        prev_size = size;
        in_width += size;
    }

    // keep at most max_params distinct parameters; extra slots get tied
    let budget = opts.max_params.max(1);
    let mut next = 0usize;
    for (j, pos, is_bias) in slots {
        let share = opts.weight_sharing && next > 0 && rng.random::<f64>() < 0.2;
        let idx = if share || next >= budget {
            if next == 0 {
                continue;
            }
            rng.random_range(0..next)
        } else {
            next += 1;
            next - 1
        };
        if is_bias {
            layers[j].biases[pos] = Some(idx);
        } else {
            layers[j].weights[pos] = Some(idx);
        }
    }
    Architecture::new(input_dim, layers, w_bound, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn feedforward_counts() {
        let arch = Architecture::feedforward(16, &[512], Activation::Relu, true, 1.0, 1.0).unwrap();
        assert_eq!(arch.p(), 16 * 512 + 512 + 512 + 1);
        assert_eq!(arch.q(), 1);
        assert_eq!(arch.depth(), 2);
        assert!(arch.is_chain());
        assert_eq!(arch.in_width(1), 16 + 512);
    }

    #[test]
    fn rejects_unused_index_and_bad_output() {
        let layer = LayerSpec {
            size: 1,
            activations: vec![Activation::Identity],
            weights: vec![Some(1)],
            biases: vec![None],
        };
        assert!(Architecture::new(1, vec![layer], 1.0, 1.0).is_err());
        let wide = LayerSpec {
            size: 2,
            activations: vec![Activation::Identity; 2],
            weights: vec![Some(0), Some(1)],
            biases: vec![None, None],
        };
        assert!(Architecture::new(1, vec![wide], 1.0, 1.0).is_err());
    }

    #[test]
    fn random_architectures_respect_limits() {
        let mut rng = seed::rng(17);
        for _ in 0..2000 {
            let arch = random_architecture(&mut rng, RandomArchOptions::default(), 1.0, 1.0).unwrap();
            assert!(arch.p() >= 1);
            assert!(arch.input_dim <= 8);
            assert!(arch.depth() <= 3);
            assert!(arch.p() <= 50);
            assert!(arch.is_chain());
        }
    }

    #[test]
    fn wire_round_trip() {
        let mut rng = seed::rng(2);
        let opts = RandomArchOptions {
            skip_connections: true,
            ..Default::default()
        };
        let arch = random_architecture(&mut rng, opts, 2.0, 1.0).unwrap();
        let json = serde_json::to_string(&arch.to_wire()).unwrap();
        for key in [
            "layer_sizes",
            "input_dim",
            "masks",
            "sharing",
            "nonlinearities",
            "\"p\"",
            "\"Q\"",
            "\"D\"",
            "\"W\"",
            "\"R\"",
        ] {
            assert!(json.contains(key), "missing {key}");
        }
        let back = Architecture::from_wire(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, arch);
    }

    #[test]
    fn activations_are_one_lipschitz() {
        for act in [
            Activation::Relu,
            Activation::Tanh,
            Activation::Abs,
            Activation::Identity,
        ] {
            for i in -50..50 {
                let a = i as f64 * 0.1;
                let b = a + 0.037;
                assert!((act.apply(b) - act.apply(a)).abs() <= 0.037 + 1e-15);
            }
        }
    }
}
