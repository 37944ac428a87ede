//! Dense feed-forward networks with hand-written reverse mode, parameter
//! clipping and Adam; hosts the fitting model and the critic.

mod adam;
mod checkpoint;
mod dense;
mod models;

pub use adam::{adam_step, OptimizerState};
pub use checkpoint::{
    Checkpoint, CheckpointKind, LayerRecord, NetRecord, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use dense::{clip_params, Activation, DenseNet, ForwardCache, Gradients, Layer};
pub use models::{extract_weighted_adjacency, CriticModel, FitCache, FittingModel, ParamRole};
