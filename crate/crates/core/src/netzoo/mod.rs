//! Layered networks with skip connections and weight sharing.
//!
//! Neurons are split into layers `L_1..L_D`; layer `j` reads the input and
//! every earlier layer through a `|L_j| x (d + sum_{i<j} |L_i|)` matrix whose
//! variable entries (and biases) are tied to coordinates of one flat
//! parameter vector `w`.

mod arch;
mod net;
mod param_lip;
mod train;

pub use arch::{
    random_architecture, Activation, Architecture, ArchitectureWire, LayerMask, LayerSharing, LayerSpec, NetworkFile,
    RandomArchOptions,
};
pub use net::{materialize, mse, mse_and_gradient, param_gradient, DenseLayer, ForwardTrace, NetFunction};
pub use param_lip::{check_param_lipschitz, param_lip_j, sample_ball, spectral_budget, ParamLipReport};
pub use train::{trace_csv, train_from, train_to_threshold, TrainOptions, TrainOutcome, DIVERGENCE_LOSS};
