//! Score functions, the augmented-Lagrangian engine, the critic-augmented
//! learner and the NOTEARS / random baselines.

mod config;
mod fit;
mod lbfgs;
mod result;
mod score;
mod split;
mod train;

pub use config::{CasperConfig, LagrangianSchedule, ModelKind};
pub use fit::{casper_fit, notears_fit, notears_mlp_fit, random_baseline};
pub use result::{EpochRecord, TrainResult, WeightedAdjacencyRecord};
pub use score::{casper_score, dag_penalty, least_squares_score, ScoreEval};
pub use train::{critic_clip_bound, critic_inner_loop};
