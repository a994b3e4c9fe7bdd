//! Repeater-chain performance: fiber loss, the repeaterless benchmark, the
//! per-repeater loss model, end-to-end rates in ebits per optical mode,
//! envelopes over the number of repeaters, and exponential fits.
//!
//! Rates are assembled in log space as well as linear space. At long
//! distances the linear rate of a poorly matched configuration underflows
//! `f64`, while its logarithm stays finite and still orders configurations.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::bsm::{self, AdaptiveVariant, BsmStrategy};
use crate::error::{check_probability, Error, Result};
use crate::oracle::{BsmSetup, OracleSettings};
use crate::tree_code::{BranchingVector, LossProfile, TreeMeasurement};

/// Telecom fiber attenuation.
pub const DEFAULT_ALPHA_DB_PER_KM: f64 = 0.2;

/// Survival after RGS generation used for every protocol comparison.
pub const DEFAULT_ETA_GEN: f64 = 0.9797;

/// A repeater chain between two users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// End-to-end distance in km.
    pub distance_km: f64,
    /// Number of equidistant repeaters, at least one.
    pub repeaters: u32,
    /// Inner qubits per biclique partition (parallel link attempts).
    pub multiplexing: u32,
    pub inner_tree: BranchingVector,
    /// Required for every encoded link strategy.
    pub link_tree: Option<BranchingVector>,
    pub eta_gen: f64,
    pub alpha_db_per_km: f64,
    pub p_f: f64,
    pub strategy: BsmStrategy,
    pub variant: AdaptiveVariant,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km >= 0.0) {
            return Err(Error::NegativeDistance(self.distance_km));
        }
        if self.repeaters == 0 {
            return Err(Error::InvalidParameter("need at least one repeater".into()));
        }
        if self.multiplexing == 0 {
            return Err(Error::InvalidParameter("multiplexing must be at least one".into()));
        }
        if !(self.eta_gen > 0.0 && self.eta_gen <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta_gen = {} must lie in (0, 1]",
                self.eta_gen
            )));
        }
        if !(self.alpha_db_per_km > 0.0 && self.alpha_db_per_km.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fiber loss {} dB/km must be positive",
                self.alpha_db_per_km
            )));
        }
        check_probability("fusion success probability", self.p_f)?;
        match (self.strategy, &self.link_tree) {
            (BsmStrategy::Physical, Some(_)) => Err(Error::InvalidParameter(
                "physical link qubits take no link tree".into(),
            )),
            (strategy, None) if strategy.is_encoded() => Err(Error::MissingLinkTree(strategy)),
            _ => Ok(()),
        }
    }

    pub fn with_distance(&self, distance_km: f64) -> Self {
        Self {
            distance_km,
            ..self.clone()
        }
    }

    pub fn with_repeaters(&self, repeaters: u32) -> Self {
        Self {
            repeaters,
            ..self.clone()
        }
    }
}

/// One point of a rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub distance_km: f64,
    pub repeaters: u32,
    /// Ebits per optical mode.
    pub rate: f64,
    /// Natural log of the rate; finite even where `rate` underflows.
    pub ln_rate: f64,
    pub config: ChainConfig,
}

/// `10^(-alpha L / 10)`.
pub fn transmissivity(distance_km: f64, alpha_db_per_km: f64) -> Result<f64> {
    if !(distance_km >= 0.0) {
        return Err(Error::NegativeDistance(distance_km));
    }
    Ok(10f64.powf(-alpha_db_per_km * distance_km / 10.0))
}

/// Direct-transmission capacity `-log2(1 - eta)` of a pure-loss fiber.
pub fn repeaterless_rate(distance_km: f64, alpha_db_per_km: f64) -> Result<f64> {
    let eta = transmissivity(distance_km, alpha_db_per_km)?;
    if eta >= 1.0 {
        return Err(Error::UnboundedRate);
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Loss seen by the qubits of one repeater.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLossModel {
    /// Loss of every qubit held at a repeater while outcomes travel back.
    pub repeater_loss: f64,
    /// Survival of a photon sent to the neighbouring minor node.
    pub link_survival: f64,
    pub inner_profile: LossProfile,
    /// Loss profile of the link tree; `None` for physical link qubits.
    pub link_profile: Option<LossProfile>,
}

/// `(repeater_loss, link_survival)`: loss of qubits held at a repeater for one
/// segment's worth of transmissivity, and survival of a photon sent half a
/// segment to a minor node.
pub fn segment_losses(distance_km: f64, repeaters: u32, eta_gen: f64, alpha_db_per_km: f64) -> Result<(f64, f64)> {
    let eta = transmissivity(distance_km, alpha_db_per_km)?;
    let segments = f64::from(repeaters) + 1.0;
    Ok((
        1.0 - eta_gen * eta.powf(1.0 / segments),
        eta_gen * eta.powf(1.0 / (2.0 * segments)),
    ))
}

pub fn link_loss_model(cfg: &ChainConfig) -> Result<LinkLossModel> {
    cfg.validate()?;
    let (repeater_loss, link_survival) =
        segment_losses(cfg.distance_km, cfg.repeaters, cfg.eta_gen, cfg.alpha_db_per_km)?;
    let inner_profile = LossProfile::uniform(repeater_loss, cfg.inner_tree.depth())?;
    let link_profile = match (&cfg.link_tree, cfg.strategy) {
        (Some(tree), BsmStrategy::Adaptive) => {
            // only level 1 travels; deeper qubits wait at the repeater
            Some(LossProfile::split(1.0 - link_survival, repeater_loss, tree.depth())?)
        }
        (Some(tree), BsmStrategy::Static | BsmStrategy::Dynamic) => {
            Some(LossProfile::uniform(1.0 - link_survival, tree.depth())?)
        }
        _ => None,
    };
    Ok(LinkLossModel {
        repeater_loss,
        link_survival,
        inner_profile,
        link_profile,
    })
}

/// Success probability of one unencoded link fusion.
pub fn physical_link_success(cfg: &ChainConfig) -> Result<f64> {
    if cfg.strategy != BsmStrategy::Physical {
        return Err(Error::WrongStrategy {
            expected: BsmStrategy::Physical,
            got: cfg.strategy,
        });
    }
    let model = link_loss_model(cfg)?;
    Ok(model.link_survival * model.link_survival * cfg.p_f)
}

/// The factors of a chain rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub logical_x: f64,
    pub logical_z: f64,
    pub link_success: f64,
    pub repeaters: u32,
    pub multiplexing: u32,
    /// Optical modes per link BSM.
    pub link_modes: u64,
}

impl RateTerms {
    /// Modes consumed per link attempt round: `m` times the per-BSM modes.
    pub fn modes(&self) -> f64 {
        f64::from(self.multiplexing) * self.link_modes as f64
    }

    pub fn rate(&self) -> f64 {
        let n = self.repeaters as i32;
        let m = self.multiplexing as i32;
        let heralded = 1.0 - (1.0 - self.link_success).powi(m);
        self.logical_x.powi(2 * n) * self.logical_z.powi(2 * (m - 1) * n) * heralded.powi(n + 1)
            / self.modes()
    }

    pub fn ln_rate(&self) -> f64 {
        combine_ln_factors(
            ln_link_factor(self.link_success, self.repeaters, self.multiplexing, self.modes()),
            ln_x_factor(self.logical_x, self.repeaters),
            ln_z_factor(self.logical_z, self.repeaters),
            self.multiplexing,
        )
    }
}

// The log-rate is split into factors so that searches can tabulate them per
// tree and recombine them without changing a single bit of the result.

/// `(n + 1) ln(1 - (1 - p)^m) - ln(modes)`.
pub(crate) fn ln_link_factor(link_success: f64, repeaters: u32, multiplexing: u32, modes: f64) -> f64 {
    let n = f64::from(repeaters);
    let m = f64::from(multiplexing);
    // 1 - (1 - p)^m without cancellation for small p
    let heralded = -(m * (-link_success).ln_1p()).exp_m1();
    (n + 1.0) * heralded.ln() - modes.ln()
}

/// `2n ln P_X`: logical X on one inner qubit per partition at every repeater.
pub(crate) fn ln_x_factor(logical_x: f64, repeaters: u32) -> f64 {
    2.0 * f64::from(repeaters) * logical_x.ln()
}

/// `2n ln P_Z`: logical Z cost of each additional multiplexed inner qubit.
pub(crate) fn ln_z_factor(logical_z: f64, repeaters: u32) -> f64 {
    2.0 * f64::from(repeaters) * logical_z.ln()
}

pub(crate) fn combine_ln_factors(link: f64, x: f64, z: f64, multiplexing: u32) -> f64 {
    let mut ln = link + x;
    if multiplexing > 1 {
        ln += f64::from(multiplexing - 1) * z;
    }
    ln
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct LinkKey {
    strategy: BsmStrategy,
    tree: BranchingVector,
    profile: Vec<u64>,
    p_f: u64,
}

/// Rate evaluation with a shared cache of oracle link probabilities.
#[derive(Debug, Default)]
pub struct RateModel {
    oracle: OracleSettings,
    cache: Mutex<HashMap<LinkKey, f64>>,
}

impl RateModel {
    pub fn new(oracle: OracleSettings) -> Self {
        Self {
            oracle,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn oracle(&self) -> OracleSettings {
        self.oracle
    }

    /// Link BSM success probability for `cfg` under `loss`.
    pub fn link_success(&self, cfg: &ChainConfig, loss: &LinkLossModel) -> Result<f64> {
        match (cfg.strategy, &cfg.link_tree, &loss.link_profile) {
            (BsmStrategy::Physical, _, _) => Ok(loss.link_survival * loss.link_survival * cfg.p_f),
            (BsmStrategy::Adaptive, Some(tree), Some(profile)) => {
                bsm::adaptive_bsm_prob(tree, profile, cfg.p_f, cfg.variant)
            }
            (strategy, Some(tree), Some(profile)) => self.oracle_link(strategy, tree, profile, cfg.p_f),
            (strategy, _, _) => Err(Error::MissingLinkTree(strategy)),
        }
    }

    fn oracle_link(
        &self,
        strategy: BsmStrategy,
        tree: &BranchingVector,
        profile: &LossProfile,
        p_f: f64,
    ) -> Result<f64> {
        let key = LinkKey {
            strategy,
            tree: tree.clone(),
            profile: profile.per_level().iter().map(|x| x.to_bits()).collect(),
            p_f: p_f.to_bits(),
        };
        if let Some(&p) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(p);
        }
        let p = BsmSetup::new(tree, profile, p_f)?.probability(strategy, &self.oracle)?;
        self.cache.lock().expect("cache poisoned").insert(key, p);
        Ok(p)
    }

    pub fn terms(&self, cfg: &ChainConfig) -> Result<RateTerms> {
        let loss = link_loss_model(cfg)?;
        let inner = TreeMeasurement::new(&cfg.inner_tree, &loss.inner_profile)?;
        Ok(RateTerms {
            logical_x: inner.logical_x(),
            logical_z: inner.logical_z(),
            link_success: self.link_success(cfg, &loss)?,
            repeaters: cfg.repeaters,
            multiplexing: cfg.multiplexing,
            link_modes: bsm::link_modes(cfg.strategy, cfg.link_tree.as_ref())?,
        })
    }

    pub fn rate(&self, cfg: &ChainConfig) -> Result<f64> {
        Ok(self.terms(cfg)?.rate())
    }

    pub fn point(&self, cfg: &ChainConfig) -> Result<RatePoint> {
        let terms = self.terms(cfg)?;
        Ok(RatePoint {
            distance_km: cfg.distance_km,
            repeaters: cfg.repeaters,
            rate: terms.rate(),
            ln_rate: terms.ln_rate(),
            config: cfg.clone(),
        })
    }

    /// Best rate over `repeater_set` at each distance, sorted by distance.
    /// Ties go to the smaller repeater count.
    pub fn envelope(
        &self,
        template: &ChainConfig,
        distances_km: &[f64],
        repeater_set: &[u32],
    ) -> Result<Vec<RatePoint>> {
        if distances_km.is_empty() || repeater_set.is_empty() {
            return Err(Error::InvalidParameter("envelope needs distances and repeater counts".into()));
        }
        let mut repeaters = repeater_set.to_vec();
        repeaters.sort_unstable();
        repeaters.dedup();
        let mut distances = distances_km.to_vec();
        distances.sort_by(f64::total_cmp);

        distances
            .par_iter()
            .map(|&distance| {
                let mut best: Option<RatePoint> = None;
                for &n in &repeaters {
                    let point = self.point(&template.with_distance(distance).with_repeaters(n))?;
                    let better = match &best {
                        None => true,
                        Some(b) => point.ln_rate > b.ln_rate,
                    };
                    if better {
                        best = Some(point);
                    }
                }
                Ok(best.expect("repeater set is non-empty"))
            })
            .collect()
    }
}

/// End-to-end rate in ebits per mode.
pub fn rate(cfg: &ChainConfig) -> Result<f64> {
    RateModel::default().rate(cfg)
}

pub fn envelope(template: &ChainConfig, distances_km: &[f64], repeater_set: &[u32]) -> Result<Vec<RatePoint>> {
    RateModel::default().envelope(template, distances_km, repeater_set)
}

/// Least-squares fit of `ln R = intercept - slope * L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    /// Decay exponent `s` in 1/km.
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_exponent(points: &[RatePoint]) -> Result<ExponentFit> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.distance_km, p.ln_rate)).collect();
    fit_log_linear(&xy)
}

/// Fit on `(L, ln R)` pairs; non-finite logarithms (zero rates) are skipped.
pub fn fit_log_linear(points: &[(f64, f64)]) -> Result<ExponentFit> {
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|(_, y)| y.is_finite()).collect();
    let distinct = usable.windows(2).any(|w| w[0].0 != w[1].0);
    if !distinct {
        return Err(Error::DegenerateFit(usable.len()));
    }
    let n = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    let gradient = sxy / sxx;
    Ok(ExponentFit {
        slope: -gradient,
        intercept: mean_y - gradient * mean_x,
    })
}

/// Fit of `ln R = -s L + c` on raw rates.
pub fn fit_rates(points: &[(f64, f64)]) -> Result<ExponentFit> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(l, r)| (l, r.ln())).collect();
    fit_log_linear(&logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(b: &[u32]) -> BranchingVector {
        BranchingVector::new(b.to_vec()).unwrap()
    }

    fn physical(distance_km: f64, repeaters: u32, multiplexing: u32) -> ChainConfig {
        ChainConfig {
            distance_km,
            repeaters,
            multiplexing,
            inner_tree: tree(&[1]),
            link_tree: None,
            eta_gen: 1.0,
            alpha_db_per_km: DEFAULT_ALPHA_DB_PER_KM,
            p_f: 0.5,
            strategy: BsmStrategy::Physical,
            variant: AdaptiveVariant::AsPrinted,
        }
    }

    #[test]
    fn transmissivity_examples() {
        assert_eq!(transmissivity(0.0, 0.2).unwrap(), 1.0);
        assert!((transmissivity(50.0, 0.2).unwrap() - 0.1).abs() < 1e-15);
        assert!((transmissivity(100.0, 0.2).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(transmissivity(-1.0, 0.2), Err(Error::NegativeDistance(-1.0)));
    }

    #[test]
    fn repeaterless_examples() {
        let half = 10.0 * 2f64.log10() / 0.2;
        assert!((repeaterless_rate(half, 0.2).unwrap() - 1.0).abs() < 1e-12);
        assert!((repeaterless_rate(50.0, 0.2).unwrap() - 0.152003093).abs() < 1e-9);
        let far = repeaterless_rate(500.0, 0.2).unwrap();
        assert!((far / (1e-10 / std::f64::consts::LN_2) - 1.0).abs() < 1e-9);
        assert_eq!(repeaterless_rate(0.0, 0.2), Err(Error::UnboundedRate));
    }

    #[test]
    fn loss_model_examples() {
        let mut cfg = physical(0.0, 1, 1);
        let m = link_loss_model(&cfg).unwrap();
        assert_eq!((m.repeater_loss, m.link_survival), (0.0, 1.0));

        cfg.distance_km = 100.0;
        cfg.strategy = BsmStrategy::Adaptive;
        cfg.link_tree = Some(tree(&[2, 2]));
        let m = link_loss_model(&cfg).unwrap();
        assert!((m.repeater_loss - 0.9).abs() < 1e-12);
        let link = m.link_profile.unwrap();
        assert!((link.loss(1) - (1.0 - 0.01f64.powf(0.25))).abs() < 1e-12);
        assert!((link.loss(1) - 0.68377).abs() < 1e-5);
        assert!((link.loss(2) - 0.9).abs() < 1e-12);

        cfg.strategy = BsmStrategy::Static;
        let link = link_loss_model(&cfg).unwrap().link_profile.unwrap();
        assert_eq!(link.loss(1), link.loss(2));

        let mut gen = physical(0.0, 1, 1);
        gen.eta_gen = 0.9797;
        gen.inner_tree = tree(&[2, 3]);
        let m = link_loss_model(&gen).unwrap();
        assert!(m.inner_profile.per_level().iter().all(|&e| (e - 0.0203).abs() < 1e-12));
    }

    #[test]
    fn physical_link_examples() {
        assert_eq!(physical_link_success(&physical(0.0, 1, 1)).unwrap(), 0.5);
        assert!((physical_link_success(&physical(100.0, 1, 1)).unwrap() - 0.05).abs() < 1e-12);
        let mut cfg = physical(0.0, 1, 1);
        cfg.eta_gen = 0.9;
        assert!((physical_link_success(&cfg).unwrap() - 0.405).abs() < 1e-12);
        cfg.strategy = BsmStrategy::Adaptive;
        cfg.link_tree = Some(tree(&[2]));
        assert!(matches!(physical_link_success(&cfg), Err(Error::WrongStrategy { .. })));
    }

    #[test]
    fn rate_examples() {
        let r = rate(&physical(0.0, 1, 3)).unwrap();
        assert!((r - 0.875f64.powi(2) / 6.0).abs() < 1e-12);

        let mut cfg = physical(0.0, 1, 2);
        cfg.strategy = BsmStrategy::Adaptive;
        cfg.link_tree = Some(tree(&[2, 3]));
        let r = rate(&cfg).unwrap();
        assert!((r - 0.9375f64.powi(2) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn total_loss_gives_zero_rate() {
        let lost = RateTerms {
            logical_x: 0.0,
            logical_z: 0.0,
            link_success: 0.7,
            repeaters: 3,
            multiplexing: 2,
            link_modes: 2,
        };
        assert_eq!(lost.rate(), 0.0);
        assert_eq!(lost.ln_rate(), f64::NEG_INFINITY);
        let no_link = RateTerms {
            logical_x: 1.0,
            logical_z: 1.0,
            link_success: 0.0,
            ..lost
        };
        assert_eq!(no_link.rate(), 0.0);
        assert_eq!(no_link.ln_rate(), f64::NEG_INFINITY);
    }

    #[test]
    fn ln_rate_matches_rate() {
        let mut cfg = physical(300.0, 6, 4);
        cfg.inner_tree = tree(&[3, 4, 2]);
        cfg.eta_gen = 0.9797;
        let terms = RateModel::default().terms(&cfg).unwrap();
        assert!((terms.ln_rate() - terms.rate().ln()).abs() < 1e-9);
    }

    #[test]
    fn unit_probabilities_give_inverse_modes() {
        let terms = RateTerms {
            logical_x: 1.0,
            logical_z: 1.0,
            link_success: 1.0,
            repeaters: 5,
            multiplexing: 3,
            link_modes: 8,
        };
        assert_eq!(terms.rate(), 1.0 / 24.0);
        assert!((terms.ln_rate() + 24f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mode_count_divides_rate() {
        let base = RateTerms {
            logical_x: 0.9,
            logical_z: 0.95,
            link_success: 0.4,
            repeaters: 4,
            multiplexing: 3,
            link_modes: 2 * 3,
        };
        for k in 2..5u64 {
            let scaled = RateTerms {
                link_modes: base.link_modes * k,
                ..base
            };
            assert!((base.rate() / scaled.rate() - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = physical(10.0, 0, 1);
        assert!(rate(&cfg).is_err());
        cfg.repeaters = 1;
        cfg.strategy = BsmStrategy::Static;
        assert_eq!(rate(&cfg), Err(Error::MissingLinkTree(BsmStrategy::Static)));
        let mut cfg = physical(10.0, 1, 1);
        cfg.alpha_db_per_km = 0.0;
        assert!(rate(&cfg).is_err());
        cfg.alpha_db_per_km = 0.2;
        cfg.distance_km = -5.0;
        assert_eq!(rate(&cfg), Err(Error::NegativeDistance(-5.0)));
    }

    #[test]
    fn envelope_takes_pointwise_max() {
        let mut cfg = physical(0.0, 1, 3);
        cfg.inner_tree = tree(&[4, 3]);
        cfg.eta_gen = 0.9797;
        let distances: Vec<f64> = (1..=8).map(|i| 25.0 * i as f64).collect();
        let env = envelope(&cfg, &distances, &[1, 2, 4, 8]).unwrap();
        assert_eq!(env.len(), distances.len());
        for point in &env {
            for n in [1, 2, 4, 8] {
                let r = rate(&cfg.with_distance(point.distance_km).with_repeaters(n)).unwrap();
                assert!(point.rate >= r);
            }
        }
        let single = envelope(&cfg, &distances, &[3]).unwrap();
        for p in &single {
            assert_eq!(p.rate, rate(&cfg.with_distance(p.distance_km).with_repeaters(3)).unwrap());
        }
    }

    #[test]
    fn envelope_ties_prefer_fewer_repeaters() {
        // lossless links and trees: every n gives 1/(2m) * heralding^(n+1) with p=1
        let mut cfg = physical(0.0, 1, 1);
        cfg.p_f = 1.0;
        let env = envelope(&cfg, &[0.0], &[5, 2, 9]).unwrap();
        assert_eq!(env[0].repeaters, 2);
    }

    #[test]
    fn fits_recover_slopes() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| {
            let l = 50.0 * i as f64;
            (l, (-0.01 * l).exp())
        }).collect();
        let fit = fit_rates(&pts).unwrap();
        assert!((fit.slope - 0.01).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);

        let pts: Vec<(f64, f64)> = (0..20).map(|i| {
            let l = 30.0 * i as f64;
            (l, 5.0 * (-0.02 * l).exp())
        }).collect();
        let fit = fit_rates(&pts).unwrap();
        assert!((fit.slope - 0.02).abs() < 1e-9);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-9);

        assert_eq!(fit_rates(&[(1.0, 0.0), (2.0, 0.0)]), Err(Error::DegenerateFit(0)));
        assert_eq!(fit_rates(&[(1.0, 0.5)]), Err(Error::DegenerateFit(1)));
    }
}
