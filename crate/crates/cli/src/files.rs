//! JSON network and effort files. Node ids are 1-based on disk and 0-based in memory.

use std::fs;
use std::path::Path;

use effortnet::{
    Attenuation, EffortProfile, EpParams, NetworkKind, NetworkTopology, ProductivityModel,
    RewardScheme,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindField {
    #[default]
    Hierarchy,
    Dag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MuField {
    One,
    Power { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductivityField {
    #[default]
    Ep,
    Linear,
}

/// On-disk network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub kind: KindField,
    pub beta: f64,
    pub b: f64,
    pub mu: MuField,
    #[serde(default)]
    pub productivity: ProductivityField,
    #[serde(default)]
    pub h: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffortFile {
    pub x: Vec<f64>,
}

/// A validated network file.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub net: NetworkTopology,
    pub model: ProductivityModel,
    pub params: EpParams,
    pub h: RewardScheme,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: cannot read: {e}", path.display())))
}

fn zero_based(key: &str, k: usize, ids: [usize; 2], shown: String) -> Result<[usize; 2], CliError> {
    if ids.contains(&0) {
        return Err(CliError::Validation(format!(
            "{key}[{k}] = {shown}: node ids start at 1"
        )));
    }
    Ok([ids[0] - 1, ids[1] - 1])
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<Bundle, CliError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &[i, j])| {
                zero_based("edges", k, [i, j], format!("[{i}, {j}]")).map(|e| (e[0], e[1]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let kind = match self.kind {
            KindField::Hierarchy => NetworkKind::Hierarchy,
            KindField::Dag => NetworkKind::Dag,
        };
        let net = NetworkTopology::new(self.nodes, kind, &edges)
            .map_err(|e| CliError::Validation(format!("edges: {e}")))?;
        let mu = match self.mu {
            MuField::One => Attenuation::One,
            MuField::Power { alpha } => Attenuation::Power(alpha),
        };
        let params = EpParams::new(self.beta, self.b, mu).map_err(|e| {
            let key = match e {
                effortnet::model::ParamError::Beta(_) => "beta",
                effortnet::model::ParamError::Cost(_) => "b",
                _ => "mu.alpha",
            };
            CliError::Validation(format!("{key}: {e}"))
        })?;
        let model = match self.productivity {
            ProductivityField::Ep => ProductivityModel::Ep(params),
            ProductivityField::Linear => ProductivityModel::Linear,
        };
        let triples = self
            .h
            .iter()
            .enumerate()
            .map(|(k, &(i, j, v))| {
                zero_based("h", k, [i, j], format!("[{i}, {j}, {v}]")).map(|e| (e[0], e[1], v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let h = RewardScheme::new(&net, triples)
            .map_err(|e| CliError::Validation(format!("h: {e}")))?;
        Ok(Bundle {
            net,
            model,
            params,
            h,
        })
    }
}

impl Bundle {
    /// The file that loads back into this bundle.
    pub fn to_file(&self) -> NetworkFile {
        let mu = match self.params.mu() {
            Attenuation::One => MuField::One,
            Attenuation::Power(alpha) => MuField::Power { alpha },
        };
        NetworkFile {
            nodes: self.net.node_count(),
            edges: self
                .net
                .edges()
                .iter()
                .map(|&(i, j)| [i + 1, j + 1])
                .collect(),
            kind: match self.net.kind() {
                NetworkKind::Hierarchy => KindField::Hierarchy,
                NetworkKind::Dag => KindField::Dag,
            },
            beta: self.params.beta(),
            b: self.params.b(),
            mu,
            productivity: match self.model {
                ProductivityModel::Ep(_) => ProductivityField::Ep,
                ProductivityModel::Linear => ProductivityField::Linear,
            },
            h: self
                .h
                .entries()
                .map(|(i, j, v)| (i + 1, j + 1, v))
                .collect(),
        }
    }

    /// Same network and scheme with another `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Bundle, CliError> {
        let params = EpParams::new(beta, self.params.b(), self.params.mu())
            .map_err(|e| CliError::Validation(format!("beta: {e}")))?;
        let model = match self.model {
            ProductivityModel::Ep(_) => ProductivityModel::Ep(params),
            ProductivityModel::Linear => ProductivityModel::Linear,
        };
        Ok(Bundle {
            net: self.net.clone(),
            model,
            params,
            h: self.h.clone(),
        })
    }
}

pub fn load_network(path: &Path) -> Result<Bundle, CliError> {
    let text = read(path)?;
    let prefix = |e: CliError| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    };
    NetworkFile::parse(&text)
        .and_then(|f| f.validate())
        .map_err(prefix)
}

pub fn save_network(path: &Path, bundle: &Bundle) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&bundle.to_file())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    fs::write(path, text + "\n")
        .map_err(|e| CliError::Validation(format!("{}: cannot write: {e}", path.display())))
}

pub fn load_efforts(path: &Path, n: usize) -> Result<EffortProfile, CliError> {
    let text = read(path)?;
    let file: EffortFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if file.x.len() != n {
        return Err(CliError::Validation(format!(
            "{}: x has {} entries, the network has {n} nodes",
            path.display(),
            file.x.len()
        )));
    }
    EffortProfile::new(file.x)
        .map_err(|e| CliError::Validation(format!("{}: x: {e}", path.display())))
}
