//! Sources of random outcomes. The BSM procedures are written once against
//! [`OutcomeSource`]; a seeded RNG turns them into a Monte Carlo sampler and
//! [`Enumerator`] replays them over every reachable outcome path.

use rand::Rng;

use crate::error::{Error, Result};

pub trait OutcomeSource {
    /// Draw an index into `weights` (non-negative, summing to one).
    fn choose(&mut self, weights: &[f64]) -> usize;

    fn bernoulli(&mut self, p: f64) -> bool {
        self.choose(&[1.0 - p, p]) == 1
    }
}

pub struct RngSource<R> {
    rng: R,
}

impl<R: Rng> RngSource<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }
}

impl<R: Rng> OutcomeSource for RngSource<R> {
    fn choose(&mut self, weights: &[f64]) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the cumulative sum; take the last live option
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
    }
}

#[derive(Debug, Clone)]
struct Decision {
    choice: usize,
    weights: Vec<f64>,
}

impl Decision {
    fn next_live(&self, after: usize) -> Option<usize> {
        (after + 1..self.weights.len()).find(|&i| self.weights[i] > 0.0)
    }
}

/// Depth-first enumeration of a procedure's decision tree.
///
/// Each call to [`Enumerator::run`] re-executes the procedure, forcing the
/// recorded prefix of choices and taking the first live option for any new
/// variable. Variables a path never asks for are never branched on, so
/// unreachable parts of the tree cost nothing. Zero-weight options are
/// skipped.
pub struct Enumerator {
    trail: Vec<Decision>,
    cursor: usize,
    weight: f64,
    limit: u64,
}

impl Enumerator {
    pub fn new(limit: u64) -> Self {
        Self {
            trail: Vec::new(),
            cursor: 0,
            weight: 1.0,
            limit,
        }
    }

    /// Sum of path weights for which `procedure` returns true, and the number
    /// of paths visited.
    pub fn run<F>(mut self, mut procedure: F) -> Result<(f64, u64)>
    where
        F: FnMut(&mut Self) -> bool,
    {
        let mut success = 0.0;
        let mut paths = 0u64;
        loop {
            self.cursor = 0;
            self.weight = 1.0;
            let ok = procedure(&mut self);
            debug_assert_eq!(self.cursor, self.trail.len(), "procedure must be deterministic");
            paths += 1;
            if ok {
                success += self.weight;
            }
            if !self.advance() {
                return Ok((success, paths));
            }
            if paths >= self.limit {
                return Err(Error::EnumerationTooLarge {
                    states: paths,
                    limit: self.limit,
                });
            }
        }
    }

    fn advance(&mut self) -> bool {
        while let Some(last) = self.trail.last_mut() {
            if let Some(next) = last.next_live(last.choice) {
                last.choice = next;
                return true;
            }
            self.trail.pop();
        }
        false
    }
}

impl OutcomeSource for Enumerator {
    fn choose(&mut self, weights: &[f64]) -> usize {
        if self.cursor == self.trail.len() {
            let first = weights
                .iter()
                .position(|&w| w > 0.0)
                .expect("at least one outcome has positive weight");
            self.trail.push(Decision {
                choice: first,
                weights: weights.to_vec(),
            });
        }
        let choice = self.trail[self.cursor].choice;
        self.cursor += 1;
        self.weight *= weights[choice];
        choice
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumerates_independent_coins() {
        let (p, paths) = Enumerator::new(100)
            .run(|s| s.bernoulli(0.5) && s.bernoulli(0.25))
            .unwrap();
        assert!((p - 0.125).abs() < 1e-15);
        // the second coin is only reached after the first succeeds
        assert_eq!(paths, 3);
    }

    #[test]
    fn total_mass_is_one() {
        let (p, _) = Enumerator::new(1000)
            .run(|s| {
                let a = s.choose(&[0.2, 0.3, 0.5]);
                if a == 2 {
                    s.bernoulli(0.7);
                }
                true
            })
            .unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skips_dead_branches() {
        let (p, paths) = Enumerator::new(10).run(|s| s.bernoulli(1.0)).unwrap();
        assert_eq!((p, paths), (1.0, 1));
    }

    #[test]
    fn refuses_oversized_trees() {
        let err = Enumerator::new(8)
            .run(|s| (0..10).map(|_| s.bernoulli(0.5)).fold(false, |a, b| a ^ b))
            .unwrap_err();
        assert_eq!(err, Error::EnumerationTooLarge { states: 8, limit: 8 });
    }

    #[test]
    fn rng_source_follows_weights() {
        let mut s = RngSource::new(ChaCha8Rng::seed_from_u64(7));
        let n = 100_000;
        let hits = (0..n).filter(|_| s.choose(&[0.0, 0.3, 0.7]) == 1).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.3).abs() < 4.0 * (0.3f64 * 0.7 / n as f64).sqrt());
        assert!((0..1000).all(|_| s.choose(&[0.0, 1.0]) == 1));
    }
}
