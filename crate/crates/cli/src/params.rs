//! Experiment parameters, shared by the JSON config and the command line.

use std::path::Path;

use clap::{Args, ValueEnum};
use perc_core::{BoundaryCondition, GraphKind, Model, TorusSpec};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GraphArg {
    Torus,
    Lattice,
}

impl From<GraphArg> for GraphKind {
    fn from(g: GraphArg) -> Self {
        match g {
            GraphArg::Torus => GraphKind::Torus,
            GraphArg::Lattice => GraphKind::Lattice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BcArg {
    Periodic,
    Free,
    Bulk,
    All,
}

impl BcArg {
    pub fn conditions(self) -> Vec<BoundaryCondition> {
        match self {
            BcArg::Periodic => vec![BoundaryCondition::Periodic],
            BcArg::Free => vec![BoundaryCondition::Free],
            BcArg::Bulk => vec![BoundaryCondition::Bulk],
            BcArg::All => vec![
                BoundaryCondition::Periodic,
                BoundaryCondition::Free,
                BoundaryCondition::Bulk,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryExperiment {
    FourPoint,
    ThirdMoment,
    LongPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IneqCheck {
    /// FKG, BK and tree-graph margins by enumeration.
    Exact,
    /// Torus susceptibility against the lattice lower bound.
    Lemma,
}

/// Every tunable of every experiment. The config file and the flags fill the
/// same fields; flags win.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Experiment name; only read from config files, where it must match the subcommand.
    #[arg(skip)]
    pub command: Option<String>,
    #[arg(skip)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub side: Option<u32>,
    /// Spread-out range; nearest-neighbour when absent.
    #[arg(long)]
    pub range: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Replicates (samples) per estimate.
    #[arg(long)]
    pub n: Option<u64>,
    /// Largest cluster explored on the lattice before censoring.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, value_enum)]
    pub graph: Option<GraphArg>,
    /// Lattice point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<i32>>,
    /// Axis distances used for the correlation length.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub radius_max: Option<u32>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Subcritical offsets for the critical-point command.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long)]
    pub p_c_ref: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub p_values: Option<Vec<f64>>,
    #[arg(long)]
    pub omega1: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Random-graph vertex counts.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    pub bc: Option<BcArg>,
    #[arg(long, value_enum)]
    pub experiment: Option<BoundaryExperiment>,
    #[arg(long, value_enum)]
    pub check: Option<IneqCheck>,
}

pub const DEFAULT_N: u64 = 1000;
pub const DEFAULT_CAP: u64 = 1_000_000;

fn strip_nulls(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

fn parse_params(value: Value, origin: &str) -> Result<Params, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{origin}: field `{path}`: {}", e.inner()))
    })
}

/// Reads a config file: either a parameter document or a previously emitted
/// record, whose parameters and seed are replayed.
pub fn load_config(path: &Path) -> Result<Params, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    match value.get("schema_version") {
        Some(_) => {
            let mut params = strip_nulls(value.get("parameters").cloned().unwrap_or(Value::Null));
            if let Some(c) = value.get("command") {
                params.insert("command".into(), c.clone());
            }
            if let Some(s) = value.get("seed") {
                params.insert("seed".into(), s.clone());
            }
            parse_params(Value::Object(params), &origin)
        }
        None => parse_params(value, &origin),
    }
}

impl Params {
    /// `self` with every field set in `over` replaced.
    pub fn overlay(self, over: &Params) -> Params {
        let mut base = strip_nulls(serde_json::to_value(self).expect("params serialize"));
        base.extend(strip_nulls(
            serde_json::to_value(over).expect("params serialize"),
        ));
        serde_json::from_value(Value::Object(base)).expect("params round-trip")
    }

    /// The set fields only, for the record.
    pub fn to_record_value(&self) -> Value {
        let mut m = strip_nulls(serde_json::to_value(self).expect("params serialize"));
        m.remove("command");
        m.remove("seed");
        Value::Object(m)
    }

    pub fn require<T: Clone>(field: &Option<T>, name: &str) -> Result<T, CliError> {
        field
            .clone()
            .ok_or_else(|| CliError::Validation(format!("missing required field `{name}`")))
    }

    pub fn model(&self) -> Model {
        match self.range {
            Some(range) => Model::SpreadOut { range },
            None => Model::NearestNeighbor,
        }
    }

    pub fn spec_with_side(&self, side: u32) -> Result<TorusSpec, CliError> {
        let dim = Self::require(&self.dim, "dim")?;
        Ok(TorusSpec::new(dim, side, self.model())?)
    }

    pub fn spec(&self) -> Result<TorusSpec, CliError> {
        self.spec_with_side(Self::require(&self.side, "side")?)
    }

    pub fn p(&self) -> Result<f64, CliError> {
        let p = Self::require(&self.p, "p")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Validation(format!(
                "field `p`: {p} is not a probability"
            )));
        }
        Ok(p)
    }

    pub fn n(&self) -> u64 {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_CAP)
    }
}
