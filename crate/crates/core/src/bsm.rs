//! Closed-form success probability of the adaptive logical Bell-state
//! measurement on two identically tree-encoded qubits, and the number of
//! optical modes each link-BSM strategy consumes.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_probability, Error, Result};
use crate::tree_code::{BranchingVector, LossProfile, TreeMeasurement};

/// Linear-optical fusion success probability without ancillas.
pub const DEFAULT_FUSION_SUCCESS: f64 = 0.5;

/// How a link Bell-state measurement is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BsmStrategy {
    /// Single fusion on unencoded link photons.
    Physical,
    /// Level-1 fusions one pair at a time; deeper qubits measured singly.
    Adaptive,
    /// Every qubit pair of the two trees fused at once.
    Static,
    /// Level-1 pairs fused; deeper pairs fused only below a successful fusion.
    Dynamic,
}

impl BsmStrategy {
    pub const ALL: [BsmStrategy; 4] = [
        BsmStrategy::Physical,
        BsmStrategy::Adaptive,
        BsmStrategy::Static,
        BsmStrategy::Dynamic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BsmStrategy::Physical => "physical",
            BsmStrategy::Adaptive => "adaptive",
            BsmStrategy::Static => "static",
            BsmStrategy::Dynamic => "dynamic",
        }
    }

    pub fn is_encoded(self) -> bool {
        self != BsmStrategy::Physical
    }
}

impl fmt::Display for BsmStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BsmStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BsmStrategy::ALL
            .into_iter()
            .find(|strategy| strategy.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown BSM strategy `{s}`")))
    }
}

/// Which exponents the adaptive closed form uses for the single-qubit Z
/// measurements that complete the logical BSM.
///
/// `AsPrinted` charges `b_1` child measurements and `b_0 - i - 1` remaining
/// level-1 measurements; `Symmetrized` charges them on both trees
/// (`2 b_1` and `2 (b_0 - i - 1)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaptiveVariant {
    AsPrinted,
    Symmetrized,
}

impl AdaptiveVariant {
    pub fn name(self) -> &'static str {
        match self {
            AdaptiveVariant::AsPrinted => "as-printed",
            AdaptiveVariant::Symmetrized => "symmetrized",
        }
    }

    /// Number of trees whose completing Z measurements are charged.
    pub(crate) fn charged_sides(self) -> i32 {
        match self {
            AdaptiveVariant::AsPrinted => 1,
            AdaptiveVariant::Symmetrized => 2,
        }
    }
}

impl fmt::Display for AdaptiveVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdaptiveVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-printed" => Ok(AdaptiveVariant::AsPrinted),
            "symmetrized" => Ok(AdaptiveVariant::Symmetrized),
            _ => Err(Error::InvalidParameter(format!("unknown adaptive variant `{s}`"))),
        }
    }
}

/// Success of a single fusion on two unencoded photons with loss `eps` each.
pub fn physical_fusion_prob(eps: f64, p_f: f64) -> Result<f64> {
    check_probability("loss probability", eps)?;
    check_probability("fusion success probability", p_f)?;
    Ok((1.0 - eps) * (1.0 - eps) * p_f)
}

/// Probability that fusing one level-1 pair and Z-measuring its children
/// yields `X_L X'_L`.
pub fn x_pair_prob(
    tree: &BranchingVector,
    profile: &LossProfile,
    p_f: f64,
    variant: AdaptiveVariant,
) -> Result<f64> {
    check_probability("fusion success probability", p_f)?;
    let tm = TreeMeasurement::new(tree, profile)?;
    Ok(x_pair_from(&tm, p_f, variant))
}

fn x_pair_from(tm: &TreeMeasurement, p_f: f64, variant: AdaptiveVariant) -> f64 {
    let eta1 = tm.profile().survival(1);
    let children = tm.tree().branch(1) as i32;
    let child_z = if children == 0 { 1.0 } else { tm.z(2).expect("depth >= 2") };
    eta1 * eta1 * p_f * child_z.powi(variant.charged_sides() * children)
}

/// Success probability of the adaptive logical BSM.
pub fn adaptive_bsm_prob(
    tree: &BranchingVector,
    profile: &LossProfile,
    p_f: f64,
    variant: AdaptiveVariant,
) -> Result<f64> {
    check_probability("fusion success probability", p_f)?;
    let tm = TreeMeasurement::new(tree, profile)?;
    let eta1_sq = profile.survival(1).powi(2);
    let xi1_sq = tm.indirect_z(1)?.powi(2);
    let pz1 = tm.z(1)?;
    let x_pair = x_pair_from(&tm, p_f, variant);
    let b0 = tree.root_children();

    let recovered_loss = (1.0 - eta1_sq) * xi1_sq;
    let failure = eta1_sq * (1.0 - p_f);
    let mut total = 0.0;
    for i in 0..b0 {
        // i earlier pairs, j of them lost (and recovered), the rest failed.
        let mut prefix = 0.0;
        for j in 0..=i {
            let weight = binomial(u64::from(i), u64::from(j))? as f64;
            prefix += weight * recovered_loss.powi(j as i32) * failure.powi((i - j) as i32);
        }
        let remaining = variant.charged_sides() * (b0 - i - 1) as i32;
        total += prefix * x_pair * pz1.powi(remaining);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Optical modes consumed by one link BSM.
pub fn link_modes(strategy: BsmStrategy, link_tree: Option<&BranchingVector>) -> Result<u64> {
    match (strategy, link_tree) {
        (BsmStrategy::Physical, _) => Ok(2),
        (BsmStrategy::Adaptive, Some(tree)) => Ok(2 * u64::from(tree.root_children())),
        (BsmStrategy::Static | BsmStrategy::Dynamic, Some(tree)) => Ok(2 * tree.num_qubits()),
        (strategy, None) => Err(Error::MissingLinkTree(strategy)),
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| Error::InvalidParameter(format!("C({n},{k}) overflows u64")))?
            / (i + 1);
    }
    Ok(acc)
}
