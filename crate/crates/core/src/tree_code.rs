//! Regular tree codes and the success probabilities of their single-qubit and
//! logical Pauli measurements under per-level photon loss.
//!
//! Levels are counted from the root (level 0). The root is consumed when a
//! qubit is encoded, so a [`LossProfile`] only carries loss probabilities for
//! the physical levels `1..=depth`.

use std::fmt;

use crate::error::{check_probability, Error, Result};

/// Shape of a regular tree: `branches[k]` is the number of children of every
/// qubit on level `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchingVector(Vec<u32>);

impl BranchingVector {
    pub fn new(branches: Vec<u32>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidBranching("empty branching vector".into()));
        }
        if let Some(pos) = branches.iter().position(|&b| b == 0) {
            return Err(Error::InvalidBranching(format!(
                "entry {pos} is zero; every level needs at least one child"
            )));
        }
        if branches.iter().any(|&b| b > i32::MAX as u32) {
            return Err(Error::InvalidBranching("branching entry too large".into()));
        }
        let tree = Self(branches);
        tree.checked_num_qubits()
            .ok_or_else(|| Error::InvalidBranching("qubit count overflows u64".into()))?;
        Ok(tree)
    }

    pub fn branches(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// Children per qubit on `level`; zero at and below the leaf level.
    pub fn branch(&self, level: usize) -> u32 {
        self.0.get(level).copied().unwrap_or(0)
    }

    /// Number of level-1 qubits (`b_0`).
    pub fn root_children(&self) -> u32 {
        self.0[0]
    }

    /// Qubits in the tree excluding the root.
    pub fn num_qubits(&self) -> u64 {
        self.checked_num_qubits().expect("validated on construction")
    }

    /// Qubits on `level` (the root level holds one).
    pub fn level_size(&self, level: usize) -> u64 {
        self.0[..level.min(self.depth())]
            .iter()
            .map(|&b| u64::from(b))
            .product()
    }

    fn checked_num_qubits(&self) -> Option<u64> {
        let mut level = 1u64;
        let mut total = 0u64;
        for &b in &self.0 {
            level = level.checked_mul(u64::from(b))?;
            total = total.checked_add(level)?;
        }
        Some(total)
    }
}

impl TryFrom<Vec<u32>> for BranchingVector {
    type Error = Error;

    fn try_from(branches: Vec<u32>) -> Result<Self> {
        Self::new(branches)
    }
}

impl fmt::Display for BranchingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Loss probability of every qubit on each physical level `1..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossProfile(Vec<f64>);

impl LossProfile {
    /// `per_level[0]` is the loss on level 1.
    pub fn new(per_level: Vec<f64>) -> Result<Self> {
        if per_level.is_empty() {
            return Err(Error::InvalidParameter("loss profile needs at least one level".into()));
        }
        for &eps in &per_level {
            check_probability("loss probability", eps)?;
        }
        Ok(Self(per_level))
    }

    pub fn uniform(loss: f64, depth: usize) -> Result<Self> {
        Self::new(vec![loss; depth])
    }

    /// Level 1 at `level_one`, every deeper level at `deeper`.
    pub fn split(level_one: f64, deeper: f64, depth: usize) -> Result<Self> {
        let mut levels = vec![deeper; depth];
        if let Some(first) = levels.first_mut() {
            *first = level_one;
        }
        Self::new(levels)
    }

    /// Loss `eps` on level 1 and `1 - (1 - eps)^2` on deeper levels, as seen by
    /// link-tree qubits that wait for level-1 fusion outcomes.
    pub fn delayed_deeper_levels(eps: f64, depth: usize) -> Result<Self> {
        check_probability("loss probability", eps)?;
        Self::split(eps, 1.0 - (1.0 - eps) * (1.0 - eps), depth)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn per_level(&self) -> &[f64] {
        &self.0
    }

    /// Loss on `level` (1-based).
    pub fn loss(&self, level: usize) -> f64 {
        self.0[level - 1]
    }

    pub fn survival(&self, level: usize) -> f64 {
        1.0 - self.loss(level)
    }

    pub(crate) fn check_matches(&self, tree: &BranchingVector) -> Result<()> {
        if self.depth() == tree.depth() {
            Ok(())
        } else {
            Err(Error::ProfileDepthMismatch {
                expected: tree.depth(),
                got: self.depth(),
            })
        }
    }
}

/// Indirect-Z success probabilities `xi_0..=xi_depth` of one tree under one
/// loss profile, evaluated bottom-up once and then queried.
#[derive(Debug, Clone)]
pub struct TreeMeasurement {
    tree: BranchingVector,
    profile: LossProfile,
    indirect: Vec<f64>,
}

impl TreeMeasurement {
    pub fn new(tree: &BranchingVector, profile: &LossProfile) -> Result<Self> {
        profile.check_matches(tree)?;
        let depth = tree.depth();
        let mut indirect = vec![0.0; depth + 1];
        for k in (0..depth).rev() {
            // A child on level k+1 must survive and every grandchild on level
            // k+2 must yield Z (directly or indirectly). Leaves have no
            // grandchildren, so the product is empty.
            let grandchildren = tree.branch(k + 1);
            let grandchild_z = if grandchildren == 0 {
                1.0
            } else {
                let eps = profile.loss(k + 2);
                (1.0 - eps + eps * indirect[k + 2]).powi(grandchildren as i32)
            };
            let attempt = profile.survival(k + 1) * grandchild_z;
            indirect[k] = 1.0 - (1.0 - attempt).powi(tree.branch(k) as i32);
        }
        Ok(Self {
            tree: tree.clone(),
            profile: profile.clone(),
            indirect,
        })
    }

    pub fn tree(&self) -> &BranchingVector {
        &self.tree
    }

    pub fn profile(&self) -> &LossProfile {
        &self.profile
    }

    /// `xi_k` for `0 <= k <= depth`.
    pub fn indirect_z(&self, level: usize) -> Result<f64> {
        self.indirect
            .get(level)
            .copied()
            .ok_or(Error::LevelOutOfRange {
                level,
                min: 0,
                max: self.tree.depth(),
            })
    }

    /// Direct-or-indirect Z success on a level-`k` qubit, `1 <= k <= depth`.
    pub fn z(&self, level: usize) -> Result<f64> {
        if level == 0 || level > self.tree.depth() {
            return Err(Error::LevelOutOfRange {
                level,
                min: 1,
                max: self.tree.depth(),
            });
        }
        let eps = self.profile.loss(level);
        Ok(1.0 - eps + eps * self.indirect[level])
    }

    pub fn logical_z(&self) -> f64 {
        let pz1 = self.z(1).expect("depth is at least one");
        pz1.powi(self.tree.root_children() as i32)
    }

    pub fn logical_x(&self) -> f64 {
        self.indirect[0]
    }
}

pub fn num_qubits(tree: &BranchingVector) -> u64 {
    tree.num_qubits()
}

pub fn indirect_z_prob(tree: &BranchingVector, profile: &LossProfile, level: usize) -> Result<f64> {
    TreeMeasurement::new(tree, profile)?.indirect_z(level)
}

pub fn z_prob(tree: &BranchingVector, profile: &LossProfile, level: usize) -> Result<f64> {
    TreeMeasurement::new(tree, profile)?.z(level)
}

pub fn logical_z_prob(tree: &BranchingVector, profile: &LossProfile) -> Result<f64> {
    Ok(TreeMeasurement::new(tree, profile)?.logical_z())
}

pub fn logical_x_prob(tree: &BranchingVector, profile: &LossProfile) -> Result<f64> {
    Ok(TreeMeasurement::new(tree, profile)?.logical_x())
}
