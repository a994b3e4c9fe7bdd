//! Operational decision rules of the logical BSM strategies under loss.
//!
//! Qubits of a regular tree are interchangeable within a level, so the walker
//! never names individual qubits: every visit draws fresh outcomes, and each
//! rule visits any given qubit (or fused pair) at most once. Fused pairs are
//! drawn as a single three-way outcome because the individual survivals of
//! fused photons are never consulted again.

use crate::bsm::{AdaptiveVariant, BsmStrategy};
use crate::tree_code::{BranchingVector, LossProfile};

use super::source::OutcomeSource;
use super::FusionOutcome;

pub(crate) struct Walker<'a, S> {
    pub tree: &'a BranchingVector,
    pub profile: &'a LossProfile,
    pub p_f: f64,
    pub source: &'a mut S,
}

impl<S: OutcomeSource> Walker<'_, S> {
    pub fn run(&mut self, strategy: BsmStrategy, variant: AdaptiveVariant) -> bool {
        match strategy {
            BsmStrategy::Physical => self.fuse(1) == FusionOutcome::Success,
            BsmStrategy::Adaptive => self.adaptive(variant),
            BsmStrategy::Static => self.static_pattern(),
            BsmStrategy::Dynamic => self.dynamic_pattern(),
        }
    }

    fn survives(&mut self, level: usize) -> bool {
        let eta = self.profile.survival(level);
        self.source.bernoulli(eta)
    }

    fn fuse(&mut self, level: usize) -> FusionOutcome {
        let eta = self.profile.survival(level);
        let probs = FusionOutcome::probabilities(eta, eta, self.p_f);
        FusionOutcome::ALL[self.source.choose(&probs)]
    }

    /// Direct or indirect Z on one unfused qubit.
    fn z_single(&mut self, level: usize) -> bool {
        self.survives(level) || self.indirect_single(level)
    }

    /// Indirect Z on one qubit: some child survives (X) and all of that
    /// child's children yield Z.
    fn indirect_single(&mut self, level: usize) -> bool {
        for _ in 0..self.tree.branch(level) {
            if self.survives(level + 1) && self.all_z_single(level + 2, self.tree.branch(level + 1)) {
                return true;
            }
        }
        false
    }

    fn all_z_single(&mut self, level: usize, count: u32) -> bool {
        (0..count).all(|_| self.z_single(level))
    }

    /// Both sides of a lost pair recover Z from their own unfused subtrees.
    fn pair_indirect_single(&mut self) -> bool {
        self.indirect_single(1) && self.indirect_single(1)
    }

    fn adaptive(&mut self, variant: AdaptiveVariant) -> bool {
        let b0 = self.tree.root_children();
        let sides = variant.charged_sides() as u32;
        for i in 0..b0 {
            match self.fuse(1) {
                FusionOutcome::Loss => {
                    if !self.pair_indirect_single() {
                        return false;
                    }
                }
                FusionOutcome::Failure => {}
                FusionOutcome::Success => {
                    let children = sides * self.tree.branch(1);
                    let remaining = sides * (b0 - i - 1);
                    return self.all_z_single(2, children) && self.all_z_single(1, remaining);
                }
            }
        }
        false
    }

    /// ZZ on a fused pair in the static pattern: known unless the fusion was
    /// lost, in which case one child pair must have fused successfully (XX)
    /// with ZZ recovered on all of its child pairs.
    fn static_zz(&mut self, level: usize) -> bool {
        match self.fuse(level) {
            FusionOutcome::Loss => self.static_zz_indirect(level),
            _ => true,
        }
    }

    fn static_zz_indirect(&mut self, level: usize) -> bool {
        for _ in 0..self.tree.branch(level) {
            if self.fuse(level + 1) == FusionOutcome::Success
                && self.all_static_zz(level + 2, self.tree.branch(level + 1))
            {
                return true;
            }
        }
        false
    }

    fn all_static_zz(&mut self, level: usize, count: u32) -> bool {
        (0..count).all(|_| self.static_zz(level))
    }

    fn static_pattern(&mut self) -> bool {
        let mut have_x = false;
        for _ in 0..self.tree.root_children() {
            match self.fuse(1) {
                FusionOutcome::Loss => {
                    if !self.static_zz_indirect(1) {
                        return false;
                    }
                }
                FusionOutcome::Failure => {}
                FusionOutcome::Success => {
                    if !have_x && self.all_static_zz(2, self.tree.branch(1)) {
                        have_x = true;
                    }
                }
            }
        }
        have_x
    }

    /// ZZ on a pair fused because its parent fused successfully. Below a lost
    /// pair nothing is fused, so each side falls back to single-qubit
    /// indirect Z.
    fn dynamic_zz(&mut self, level: usize) -> bool {
        match self.fuse(level) {
            FusionOutcome::Loss => self.indirect_single(level) && self.indirect_single(level),
            _ => true,
        }
    }

    fn dynamic_pattern(&mut self) -> bool {
        let mut have_x = false;
        for _ in 0..self.tree.root_children() {
            match self.fuse(1) {
                FusionOutcome::Loss => {
                    if !self.pair_indirect_single() {
                        return false;
                    }
                }
                FusionOutcome::Failure => {}
                FusionOutcome::Success => {
                    if !have_x && (0..self.tree.branch(1)).all(|_| self.dynamic_zz(2)) {
                        have_x = true;
                    }
                }
            }
        }
        have_x
    }
}
