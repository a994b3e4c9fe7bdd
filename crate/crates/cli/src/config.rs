//! Experiment files.
//!
//! An experiment is a TOML document. Every section and key is optional and
//! falls back to the defaults below; unknown keys are rejected. The fully
//! resolved document is echoed at the top of every output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use treelink::bsm::DEFAULT_FUSION_SUCCESS;
use treelink::chain::{DEFAULT_ALPHA_DB_PER_KM, DEFAULT_ETA_GEN};
use treelink::optimizer::{ChainParams, LossSpec, SearchBounds};
use treelink::{AdaptiveVariant, BranchingVector, BsmStrategy, OracleSettings};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// `as-printed` or `symmetrized`. Left unset, BSM-level commands use
    /// `symmetrized` and rate commands use `as-printed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub chain: ChainSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
    pub bsm_curve: BsmCurveSection,
    pub rate_envelope: EnvelopeSection,
    pub optimize: OptimizeSection,
    pub validate: ValidateSection,
    pub repeaterless: RepeaterlessSection,
    pub calibrate: CalibrateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub eta_gen: f64,
    pub alpha_db_per_km: f64,
    pub p_f: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            eta_gen: DEFAULT_ETA_GEN,
            alpha_db_per_km: DEFAULT_ALPHA_DB_PER_KM,
            p_f: DEFAULT_FUSION_SUCCESS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub samples: u64,
    pub seed: u64,
    pub enumeration_limit: u64,
}

impl Default for OracleSection {
    fn default() -> Self {
        let d = OracleSettings::default();
        Self {
            samples: d.samples,
            seed: d.seed,
            enumeration_limit: d.enumeration_limit,
        }
    }
}

impl OracleSection {
    pub fn settings(&self) -> OracleSettings {
        OracleSettings {
            samples: self.samples,
            seed: self.seed,
            enumeration_limit: self.enumeration_limit,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Companion matplotlib script, written next to the CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_script: Option<PathBuf>,
}

/// Tree search space shared by the commands that optimize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub max_depth: usize,
    pub max_branch: u32,
    pub min_qubits: u64,
    pub qubit_budget: u64,
    pub repeaters: Vec<u32>,
    pub multiplexing: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_link_qubits: Option<u64>,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchBounds::new(30);
        Self {
            max_depth: d.max_depth,
            max_branch: d.max_branch,
            min_qubits: d.min_qubits,
            qubit_budget: d.qubit_budget,
            repeaters: d.repeater_set,
            multiplexing: d.multiplexing_set,
            max_link_qubits: None,
        }
    }
}

impl SearchSection {
    pub fn bounds(&self) -> SearchBounds {
        SearchBounds {
            max_depth: self.max_depth,
            max_branch: self.max_branch,
            min_qubits: self.min_qubits,
            qubit_budget: self.qubit_budget,
            repeater_set: self.repeaters.clone(),
            multiplexing_set: self.multiplexing.clone(),
            max_link_qubits: self.max_link_qubits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsmCurveSection {
    pub epsilons: Vec<f64>,
    pub strategies: Vec<String>,
    /// Adds adaptive rows with loss `eps` on level 1 and `1 - (1 - eps)^2`
    /// below.
    pub delayed_profile: bool,
    /// Fixed tree for every encoded strategy. Without it each point uses the
    /// best tree in `search`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<Vec<u32>>,
    pub search: SearchSection,
    /// Samples per candidate while searching static and dynamic trees.
    pub screening_samples: u64,
}

impl Default for BsmCurveSection {
    fn default() -> Self {
        Self {
            epsilons: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
            strategies: BsmStrategy::ALL.iter().map(|s| s.name().to_owned()).collect(),
            delayed_profile: false,
            tree: None,
            search: SearchSection {
                min_qubits: 25,
                qubit_budget: 35,
                ..SearchSection::default()
            },
            screening_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeSection {
    pub distances_km: Vec<f64>,
    pub repeaters: Vec<u32>,
    pub protocols: Vec<ProtocolSection>,
}

impl Default for EnvelopeSection {
    fn default() -> Self {
        Self {
            distances_km: (0..=18).map(|i| 100.0 + 50.0 * f64::from(i)).collect(),
            repeaters: (1..=16).collect(),
            protocols: vec![
                ProtocolSection {
                    name: "original".into(),
                    strategy: "physical".into(),
                    qubit_budget: Some(406),
                    ..ProtocolSection::default()
                },
                ProtocolSection {
                    name: "improved-adaptive".into(),
                    strategy: "adaptive".into(),
                    qubit_budget: Some(354),
                    ..ProtocolSection::default()
                },
                ProtocolSection {
                    name: "improved-static".into(),
                    strategy: "static".into(),
                    qubit_budget: Some(348),
                    max_link_qubits: Some(12),
                    ..ProtocolSection::default()
                },
                ProtocolSection {
                    name: "improved-dynamic".into(),
                    strategy: "dynamic".into(),
                    qubit_budget: Some(342),
                    max_link_qubits: Some(12),
                    ..ProtocolSection::default()
                },
            ],
        }
    }
}

/// One curve of a rate envelope. Either a fixed configuration
/// (`inner_tree`, `multiplexing` and, for encoded links, `link_tree`) or a
/// `qubit_budget` to optimize the decay exponent under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub name: String,
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_tree: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_tree: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplexing: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubit_budget: Option<u64>,
    pub max_depth: usize,
    pub max_branch: u32,
    pub multiplexing_set: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_link_qubits: Option<u64>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let d = SearchSection::default();
        Self {
            name: String::new(),
            strategy: "physical".into(),
            inner_tree: None,
            link_tree: None,
            multiplexing: None,
            qubit_budget: None,
            max_depth: d.max_depth,
            max_branch: d.max_branch,
            multiplexing_set: d.multiplexing,
            max_link_qubits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSection {
    /// `bsm`, `rate` or `envelope`.
    pub objective: String,
    pub strategy: String,
    /// Loss values for `bsm`; one row per value.
    pub epsilons: Vec<f64>,
    /// `uniform` or `delayed`.
    pub profile: String,
    /// Distances for `rate` (one row each) or the fit grid for `envelope`.
    pub distances_km: Vec<f64>,
    pub search: SearchSection,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self {
            objective: "bsm".into(),
            strategy: "adaptive".into(),
            epsilons: vec![0.05, 0.25],
            profile: "uniform".into(),
            distances_km: vec![100.0, 200.0, 400.0],
            search: SearchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub trees: Vec<Vec<u32>>,
    pub epsilons: Vec<f64>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            trees: vec![vec![2], vec![2, 2], vec![3, 2], vec![2, 2, 2]],
            epsilons: vec![0.0, 0.05, 0.1, 0.2, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepeaterlessSection {
    pub distances_km: Vec<f64>,
}

impl Default for RepeaterlessSection {
    fn default() -> Self {
        Self {
            distances_km: (1..=20).map(|i| 50.0 * f64::from(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateSection {
    pub targets: Vec<CalibrationTarget>,
    pub max_depth: usize,
    pub max_branch: u32,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        let target = |strategy: &str, qubits| CalibrationTarget {
            strategy: strategy.into(),
            qubits,
        };
        Self {
            targets: vec![
                target("physical", 406),
                target("adaptive", 354),
                target("static", 348),
                target("dynamic", 342),
            ],
            max_depth: 3,
            max_branch: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub strategy: String,
    pub qubits: u64,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize")
    }

    /// The variant in effect, falling back to `default`.
    pub fn variant_or(&self, default: AdaptiveVariant) -> Result<AdaptiveVariant, CliError> {
        match &self.variant {
            Some(name) => parse_variant(name),
            None => Ok(default),
        }
    }

    pub fn chain_params(&self, variant: AdaptiveVariant) -> ChainParams {
        ChainParams {
            eta_gen: self.chain.eta_gen,
            alpha_db_per_km: self.chain.alpha_db_per_km,
            p_f: self.chain.p_f,
            variant,
            oracle: self.oracle.settings(),
        }
    }
}

pub fn parse_variant(name: &str) -> Result<AdaptiveVariant, CliError> {
    name.parse().map_err(|e: treelink::Error| CliError::Input(e.to_string()))
}

pub fn parse_strategy(name: &str) -> Result<BsmStrategy, CliError> {
    name.parse().map_err(|e: treelink::Error| CliError::Input(e.to_string()))
}

pub fn parse_tree(branches: &[u32]) -> Result<BranchingVector, CliError> {
    BranchingVector::new(branches.to_vec()).map_err(CliError::from)
}

pub fn parse_loss(profile: &str, eps: f64) -> Result<LossSpec, CliError> {
    match profile {
        "uniform" => Ok(LossSpec::Uniform(eps)),
        "delayed" => Ok(LossSpec::DelayedDeeperLevels(eps)),
        other => Err(CliError::Input(format!(
            "unknown loss profile `{other}` (expected `uniform` or `delayed`)"
        ))),
    }
}
