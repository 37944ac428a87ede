//! Versioned JSON checkpoints of dense networks and fitting models.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dense::{Activation, DenseNet, Layer};
use super::models::{CriticModel, FittingModel};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "CASPER-NN";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `rows x cols` (fan_in x fan_out).
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRecord {
    pub activation: Activation,
    pub layers: Vec<LayerRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointKind {
    Linear,
    Mlp,
    Critic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub magic: String,
    pub version: u32,
    pub kind: CheckpointKind,
    pub nets: Vec<NetRecord>,
}

impl From<&DenseNet> for NetRecord {
    fn from(net: &DenseNet) -> Self {
        NetRecord {
            activation: net.activation(),
            layers: net
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    rows: l.weight.nrows(),
                    cols: l.weight.ncols(),
                    weight: l.weight.transpose().as_slice().to_vec(),
                    bias: l.bias.as_slice().to_vec(),
                })
                .collect(),
        }
    }
}

impl NetRecord {
    pub fn to_net(&self) -> Result<DenseNet> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for rec in &self.layers {
            if rec.weight.len() != rec.rows * rec.cols || rec.bias.len() != rec.cols {
                return Err(Error::Input(
                    "checkpoint layer shape does not match its data".into(),
                ));
            }
            layers.push(Layer {
                weight: DMatrix::from_row_slice(rec.rows, rec.cols, &rec.weight),
                bias: DVector::from_column_slice(&rec.bias),
            });
        }
        DenseNet::new(layers, self.activation)
    }
}

impl Checkpoint {
    pub fn from_model(model: &FittingModel) -> Self {
        let (kind, nets) = match model {
            FittingModel::Linear { weight } => {
                let d = weight.nrows();
                let layer = Layer {
                    weight: weight.clone(),
                    bias: DVector::zeros(d),
                };
                let net = DenseNet::new(vec![layer], Activation::Relu).expect("square layer");
                (CheckpointKind::Linear, vec![NetRecord::from(&net)])
            }
            FittingModel::Mlp { nets } => (
                CheckpointKind::Mlp,
                nets.iter().map(NetRecord::from).collect(),
            ),
        };
        Self {
            magic: CHECKPOINT_MAGIC.into(),
            version: CHECKPOINT_VERSION,
            kind,
            nets,
        }
    }

    pub fn from_critic(critic: &CriticModel) -> Self {
        Self {
            magic: CHECKPOINT_MAGIC.into(),
            version: CHECKPOINT_VERSION,
            kind: CheckpointKind::Critic,
            nets: vec![NetRecord::from(&critic.net)],
        }
    }

    fn check_header(&self) -> Result<()> {
        if self.magic != CHECKPOINT_MAGIC {
            return Err(Error::Input(format!(
                "bad checkpoint magic '{}'",
                self.magic
            )));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Input(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<FittingModel> {
        self.check_header()?;
        match self.kind {
            CheckpointKind::Linear => {
                let net = self
                    .nets
                    .first()
                    .ok_or_else(|| Error::Input("empty linear checkpoint".into()))?
                    .to_net()?;
                Ok(FittingModel::Linear {
                    weight: net.layers()[0].weight.clone(),
                })
            }
            CheckpointKind::Mlp => FittingModel::from_nets(
                self.nets
                    .iter()
                    .map(NetRecord::to_net)
                    .collect::<Result<_>>()?,
            ),
            CheckpointKind::Critic => Err(Error::Input(
                "checkpoint holds a critic, not a fitting model".into(),
            )),
        }
    }

    pub fn to_critic(&self) -> Result<CriticModel> {
        self.check_header()?;
        match (self.kind, self.nets.as_slice()) {
            (CheckpointKind::Critic, [net]) => CriticModel::from_net(net.to_net()?),
            _ => Err(Error::Input("checkpoint does not hold a critic".into())),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(s)?;
        ck.check_header()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
