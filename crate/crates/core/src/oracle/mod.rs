//! Ground truth for logical BSM success: seeded Monte Carlo over the
//! strategies' decision rules, and exact weighted enumeration of the same
//! rules for trees small enough to enumerate.
//!
//! The adaptive procedure defaults to charging completing Z measurements on
//! both trees ([`AdaptiveVariant::Symmetrized`]); the one-tree accounting is
//! available through [`BsmSetup::with_variant`] for formula comparisons.

mod procedures;
pub mod source;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bsm::{AdaptiveVariant, BsmStrategy};
use crate::error::{check_probability, Error, Result};
use crate::tree_code::{BranchingVector, LossProfile};

use procedures::Walker;
pub use source::{Enumerator, OutcomeSource, RngSource};

/// Maximum number of outcome paths [`exact_bsm_prob`] will visit.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 10_000_000;

/// Samples per independently seeded partition of a Monte Carlo run. Fixed so
/// that results do not depend on the number of worker threads.
const PARTITION: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionOutcome {
    Success,
    Failure,
    Loss,
}

impl FusionOutcome {
    pub const ALL: [FusionOutcome; 3] = [FusionOutcome::Success, FusionOutcome::Failure, FusionOutcome::Loss];

    /// `[P(Success), P(Failure), P(Loss)]` for photons surviving with
    /// probabilities `eta_a` and `eta_b`.
    pub fn probabilities(eta_a: f64, eta_b: f64, p_f: f64) -> [f64; 3] {
        let both = eta_a * eta_b;
        [both * p_f, both * (1.0 - p_f), 1.0 - both]
    }
}

/// Monte Carlo estimate of a success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        let mean = successes as f64 / samples as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }

    /// Whether `value` lies within `sigmas` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.std_error
    }
}

/// How static and dynamic link-BSM probabilities are obtained when a closed
/// form is unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSettings {
    pub samples: u64,
    pub seed: u64,
    /// Try exact enumeration first, giving up after this many outcome
    /// paths; zero disables enumeration.
    pub enumeration_limit: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 2024,
            enumeration_limit: 100_000,
        }
    }
}

/// One logical BSM problem: two identical trees under a loss profile.
#[derive(Debug, Clone, Copy)]
pub struct BsmSetup<'a> {
    tree: &'a BranchingVector,
    profile: &'a LossProfile,
    p_f: f64,
    variant: AdaptiveVariant,
}

impl<'a> BsmSetup<'a> {
    pub fn new(tree: &'a BranchingVector, profile: &'a LossProfile, p_f: f64) -> Result<Self> {
        profile.check_matches(tree)?;
        check_probability("fusion success probability", p_f)?;
        Ok(Self {
            tree,
            profile,
            p_f,
            variant: AdaptiveVariant::Symmetrized,
        })
    }

    pub fn with_variant(mut self, variant: AdaptiveVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn simulate<S: OutcomeSource>(&self, strategy: BsmStrategy, source: &mut S) -> bool {
        Walker {
            tree: self.tree,
            profile: self.profile,
            p_f: self.p_f,
            source,
        }
        .run(strategy, self.variant)
    }

    pub fn estimate(&self, strategy: BsmStrategy, samples: u64, seed: u64) -> Result<Estimate> {
        if samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo needs at least one sample".into()));
        }
        let partitions = samples.div_ceil(PARTITION);
        let successes: u64 = (0..partitions)
            .into_par_iter()
            .map(|part| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(part);
                let mut source = RngSource::new(rng);
                let count = PARTITION.min(samples - part * PARTITION);
                (0..count).filter(|_| self.simulate(strategy, &mut source)).count() as u64
            })
            .sum();
        Ok(Estimate::from_counts(successes, samples, seed))
    }

    pub fn exact(&self, strategy: BsmStrategy) -> Result<f64> {
        self.exact_with_limit(strategy, DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn exact_with_limit(&self, strategy: BsmStrategy, limit: u64) -> Result<f64> {
        let (p, _paths) = Enumerator::new(limit).run(|e| self.simulate(strategy, e))?;
        Ok(p.clamp(0.0, 1.0))
    }

    /// Exact value when the enumeration fits in `settings.enumeration_limit`
    /// paths, otherwise the Monte Carlo mean.
    pub fn probability(&self, strategy: BsmStrategy, settings: &OracleSettings) -> Result<f64> {
        if settings.enumeration_limit > 0 {
            match self.exact_with_limit(strategy, settings.enumeration_limit) {
                Err(Error::EnumerationTooLarge { .. }) => {}
                other => return other,
            }
        }
        Ok(self.estimate(strategy, settings.samples, settings.seed)?.mean)
    }

    /// Number of outcome paths the exact enumeration visits.
    pub fn enumeration_size(&self, strategy: BsmStrategy, limit: u64) -> Result<u64> {
        Enumerator::new(limit)
            .run(|e| self.simulate(strategy, e))
            .map(|(_, paths)| paths)
    }
}

/// One Bernoulli draw of logical BSM success.
pub fn simulate_bsm<R: Rng>(
    strategy: BsmStrategy,
    tree: &BranchingVector,
    profile: &LossProfile,
    p_f: f64,
    rng: &mut R,
) -> Result<bool> {
    let setup = BsmSetup::new(tree, profile, p_f)?;
    Ok(setup.simulate(strategy, &mut RngSource::new(rng)))
}

pub fn estimate_bsm(
    strategy: BsmStrategy,
    tree: &BranchingVector,
    profile: &LossProfile,
    p_f: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    BsmSetup::new(tree, profile, p_f)?.estimate(strategy, samples, seed)
}

pub fn exact_bsm_prob(
    strategy: BsmStrategy,
    tree: &BranchingVector,
    profile: &LossProfile,
    p_f: f64,
) -> Result<f64> {
    BsmSetup::new(tree, profile, p_f)?.exact(strategy)
}
