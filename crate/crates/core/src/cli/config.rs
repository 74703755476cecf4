//! JSON run configurations, one per subcommand. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::{ExtremalKind, RateConvention, RecursionMethod, Truncation};
use crate::coding::Decoder;
use crate::dist::ParametricDist;
use crate::noise::NoiseModel;
use crate::sim::SimConfig;
use crate::sweep::linear_grid;

/// Queue whose departure law is computed analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// General inter-arrival law, geometric service with rate `mu`.
    GGeo1 { arrival: ParametricDist, mu: f64 },
    /// Bernoulli arrivals with rate `lambda`, general service.
    GeoG1 {
        lambda: f64,
        service: ParametricDist,
    },
    /// I.i.d. batches per slot, general service.
    #[serde(rename = "type_ii")]
    TypeII {
        batch: ParametricDist,
        service: ParametricDist,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub system: SystemSpec,
    pub noise: NoiseModel,
    #[serde(default)]
    pub no_timestamps: bool,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub recursion: RecursionMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub recursion: RecursionMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub arrival: ParametricDist,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => linear_grid(*start, *stop, *step),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Grid,
    pub mus: Vec<f64>,
    pub noise: NoiseModel,
    #[serde(default)]
    pub q_max: Option<usize>,
    /// Companion whitespace-separated data file for gnuplot.
    #[serde(default)]
    pub gnuplot: Option<PathBuf>,
    /// Companion SVG line chart.
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoDensityConfig {
    pub sim: SimConfig,
    /// Fail unless the mean is within this many standard errors of the analytic value.
    #[serde(default)]
    pub assert_within_stderr: Option<f64>,
    #[serde(default)]
    pub truncation: Truncation,
}

fn both_decoders() -> Vec<Decoder> {
    vec![Decoder::WithTimestamps, Decoder::WithoutTimestamps]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeExpConfig {
    pub sim: SimConfig,
    pub n: usize,
    /// Codebook size for a single experiment; exclusive with `rates`.
    #[serde(default)]
    pub messages: Option<usize>,
    /// Per-symbol rates for a sweep.
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    pub trials: usize,
    #[serde(default = "both_decoders")]
    pub decoders: Vec<Decoder>,
    #[serde(default)]
    pub codebook_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalConfig {
    pub lambda: f64,
    pub mu: f64,
    pub noise: NoiseModel,
    pub kinds: Vec<ExtremalKind>,
    #[serde(default)]
    pub q_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroBatch {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lambda: f64,
    pub service: ParametricDist,
    pub batch: u32,
    pub noise: NoiseModel,
    #[serde(default)]
    pub convention: RateConvention,
    /// Explicit zero-batch probabilities, bypassing `convention`.
    #[serde(default)]
    pub m0: Option<ZeroBatch>,
}
