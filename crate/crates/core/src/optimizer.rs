//! Exhaustive search over regular tree shapes, multiplexing and repeater
//! counts under a qubit budget, plus repeater-graph-state qubit accounting.
//!
//! Rate objectives tabulate every per-tree factor of the log-rate once per
//! (repeater count, distance) grid point and then scan all budget-feasible
//! combinations. The tabulated factors are produced by the same functions the
//! [`chain`](crate::chain) module uses, so a reported score re-evaluates to the
//! identical value through [`evaluate`].

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::bsm::{self, AdaptiveVariant, BsmStrategy};
use crate::chain::{
    self, combine_ln_factors, ln_link_factor, ln_x_factor, ln_z_factor, ChainConfig, RateModel,
};
use crate::error::{Error, Result};
use crate::oracle::{BsmSetup, OracleSettings};
use crate::tree_code::{BranchingVector, LossProfile, TreeMeasurement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_depth: usize,
    pub max_branch: u32,
    /// Smallest tree (qubits excluding the root) considered by BSM searches.
    pub min_qubits: u64,
    /// Per-tree budget for BSM searches, whole-RGS budget for rate searches.
    pub qubit_budget: u64,
    pub repeater_set: Vec<u32>,
    pub multiplexing_set: Vec<u32>,
    /// Cap on link-tree qubits in rate searches. Static and dynamic link
    /// probabilities come from the oracle, which makes large link spaces slow.
    pub max_link_qubits: Option<u64>,
}

impl SearchBounds {
    pub fn new(qubit_budget: u64) -> Self {
        Self {
            max_depth: 3,
            max_branch: 16,
            min_qubits: 1,
            qubit_budget,
            repeater_set: (1..=16).collect(),
            multiplexing_set: (1..=16).collect(),
            max_link_qubits: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let problem = if self.max_depth == 0 {
            Some("max_depth must be at least 1")
        } else if self.max_branch == 0 {
            Some("max_branch must be at least 1")
        } else if self.qubit_budget == 0 {
            Some("qubit_budget must be at least 1")
        } else if self.repeater_set.contains(&0) {
            Some("repeater counts must be at least 1")
        } else if self.multiplexing_set.contains(&0) {
            Some("multiplexing values must be at least 1")
        } else {
            None
        };
        match problem {
            Some(p) => Err(Error::Infeasible(p.into())),
            None => Ok(()),
        }
    }
}

/// All regular trees within the depth, branching and qubit bounds, in
/// lexicographic order of their branching vectors.
pub fn enumerate_trees(bounds: &SearchBounds) -> Vec<BranchingVector> {
    fn extend(bounds: &SearchBounds, prefix: &mut Vec<u32>, level_size: u64, total: u64, out: &mut Vec<BranchingVector>) {
        if !prefix.is_empty() && total >= bounds.min_qubits {
            out.push(BranchingVector::new(prefix.clone()).expect("bounded tree"));
        }
        if prefix.len() == bounds.max_depth {
            return;
        }
        for b in 1..=bounds.max_branch {
            let next = level_size * u64::from(b);
            if total + next > bounds.qubit_budget {
                break;
            }
            prefix.push(b);
            extend(bounds, prefix, next, total + next, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(bounds, &mut Vec::new(), 1, 0, &mut out);
    out
}

/// Photons in one repeater graph state. Roots are consumed by encoding;
/// a physical link qubit counts as one photon.
pub fn rgs_size(
    strategy: BsmStrategy,
    multiplexing: u32,
    inner_tree: &BranchingVector,
    link_tree: Option<&BranchingVector>,
) -> Result<u64> {
    let arms = 2 * u64::from(multiplexing);
    match (strategy, link_tree) {
        (BsmStrategy::Physical, None) => Ok(arms * (inner_tree.num_qubits() + 1)),
        (BsmStrategy::Physical, Some(_)) => {
            Err(Error::InvalidParameter("physical link qubits take no link tree".into()))
        }
        (_, Some(link)) => Ok(arms * (inner_tree.num_qubits() + link.num_qubits())),
        (strategy, None) => Err(Error::MissingLinkTree(strategy)),
    }
}

/// Loss profile applied to candidate trees of a BSM search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec {
    Uniform(f64),
    /// `eps` on level 1 and `1 - (1 - eps)^2` below.
    DelayedDeeperLevels(f64),
}

impl LossSpec {
    pub fn profile(&self, depth: usize) -> Result<LossProfile> {
        match *self {
            LossSpec::Uniform(eps) => LossProfile::uniform(eps, depth),
            LossSpec::DelayedDeeperLevels(eps) => LossProfile::delayed_deeper_levels(eps, depth),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Logical BSM success probability of a single tree.
    BsmProb { loss: LossSpec },
    /// Natural log of the chain rate at one distance, maximised over the
    /// repeater set.
    Rate { distance_km: f64 },
    /// Minus the fitted decay exponent of the rate envelope over the given
    /// distances.
    EnvelopeExponent { distances_km: Vec<f64> },
}

/// Chain parameters held fixed during a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub eta_gen: f64,
    pub alpha_db_per_km: f64,
    pub p_f: f64,
    pub variant: AdaptiveVariant,
    pub oracle: OracleSettings,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            eta_gen: chain::DEFAULT_ETA_GEN,
            alpha_db_per_km: chain::DEFAULT_ALPHA_DB_PER_KM,
            p_f: bsm::DEFAULT_FUSION_SUCCESS,
            variant: AdaptiveVariant::AsPrinted,
            oracle: OracleSettings::default(),
        }
    }
}

/// A point of the search space. Fields not searched by an objective are
/// `None`: BSM searches only fill `link_tree`, envelope searches leave
/// `repeaters` open.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Candidate {
    pub inner_tree: Option<BranchingVector>,
    pub link_tree: Option<BranchingVector>,
    pub multiplexing: Option<u32>,
    pub repeaters: Option<u32>,
}

impl Candidate {
    /// Chain configuration at `distance_km`; `repeaters` defaults to one
    /// when the candidate leaves it open.
    pub fn chain_config(&self, strategy: BsmStrategy, params: &ChainParams, distance_km: f64) -> Result<ChainConfig> {
        let inner_tree = self
            .inner_tree
            .clone()
            .ok_or_else(|| Error::InvalidParameter("candidate has no inner tree".into()))?;
        let cfg = ChainConfig {
            distance_km,
            repeaters: self.repeaters.unwrap_or(1),
            multiplexing: self
                .multiplexing
                .ok_or_else(|| Error::InvalidParameter("candidate has no multiplexing".into()))?,
            inner_tree,
            link_tree: self.link_tree.clone(),
            eta_gen: params.eta_gen,
            alpha_db_per_km: params.alpha_db_per_km,
            p_f: params.p_f,
            strategy,
            variant: params.variant,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub candidate: Candidate,
    /// Objective value; larger is better. See [`Objective`] for units.
    pub score: f64,
    /// Tree qubits for BSM searches, RGS photons for rate searches.
    pub qubits: u64,
}

/// Total order on search results: higher score, then fewer qubits, then the
/// lexicographically smaller candidate. NaN scores rank below everything.
fn better(a: &Optimum, b: &Optimum) -> Ordering {
    let score = |x: f64| if x.is_nan() { f64::NEG_INFINITY } else { x };
    score(a.score)
        .total_cmp(&score(b.score))
        .then_with(|| b.qubits.cmp(&a.qubits))
        .then_with(|| b.candidate.cmp(&a.candidate))
}

fn pick_best(a: Optimum, b: Optimum) -> Optimum {
    if better(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Objective value of one candidate, evaluated through the public model
/// functions.
pub fn evaluate(
    objective: &Objective,
    candidate: &Candidate,
    strategy: BsmStrategy,
    bounds: &SearchBounds,
    params: &ChainParams,
) -> Result<f64> {
    match objective {
        Objective::BsmProb { loss } => bsm_score(strategy, candidate.link_tree.as_ref(), *loss, params),
        Objective::Rate { distance_km } => {
            let model = RateModel::new(params.oracle);
            let cfg = candidate.chain_config(strategy, params, *distance_km)?;
            match candidate.repeaters {
                Some(_) => Ok(model.point(&cfg)?.ln_rate),
                None => Ok(model.envelope(&cfg, &[*distance_km], &bounds.repeater_set)?[0].ln_rate),
            }
        }
        Objective::EnvelopeExponent { distances_km } => {
            let model = RateModel::new(params.oracle);
            let cfg = candidate.chain_config(strategy, params, distances_km[0])?;
            let env = model.envelope(&cfg, distances_km, &bounds.repeater_set)?;
            match chain::fit_exponent(&env) {
                Ok(fit) => Ok(-fit.slope),
                Err(Error::DegenerateFit(_)) => Ok(f64::NEG_INFINITY),
                Err(e) => Err(e),
            }
        }
    }
}

fn bsm_score(strategy: BsmStrategy, tree: Option<&BranchingVector>, loss: LossSpec, params: &ChainParams) -> Result<f64> {
    match (strategy, tree) {
        (BsmStrategy::Physical, _) => {
            let eps = loss.profile(1)?.loss(1);
            bsm::physical_fusion_prob(eps, params.p_f)
        }
        (BsmStrategy::Adaptive, Some(tree)) => {
            bsm::adaptive_bsm_prob(tree, &loss.profile(tree.depth())?, params.p_f, params.variant)
        }
        (strategy, Some(tree)) => {
            let profile = loss.profile(tree.depth())?;
            BsmSetup::new(tree, &profile, params.p_f)?.probability(strategy, &params.oracle)
        }
        (strategy, None) => Err(Error::MissingLinkTree(strategy)),
    }
}

/// Exhaustive maximisation of `objective` within `bounds`.
pub fn optimize(
    objective: &Objective,
    bounds: &SearchBounds,
    strategy: BsmStrategy,
    params: &ChainParams,
) -> Result<Optimum> {
    bounds.validate()?;
    match objective {
        Objective::BsmProb { loss } => optimize_bsm(*loss, bounds, strategy, params),
        Objective::Rate { distance_km } => {
            let grid = RateGrid::new(&[*distance_km], bounds, params)?;
            optimize_rate(&grid, bounds, strategy, params, Reduce::SingleDistance)
        }
        Objective::EnvelopeExponent { distances_km } => {
            if distances_km.len() < 2 {
                return Err(Error::InvalidParameter("envelope fit needs at least two distances".into()));
            }
            let grid = RateGrid::new(distances_km, bounds, params)?;
            optimize_rate(&grid, bounds, strategy, params, Reduce::EnvelopeSlope)
        }
    }
}

fn optimize_bsm(loss: LossSpec, bounds: &SearchBounds, strategy: BsmStrategy, params: &ChainParams) -> Result<Optimum> {
    if strategy == BsmStrategy::Physical {
        return Ok(Optimum {
            candidate: Candidate {
                inner_tree: None,
                link_tree: None,
                multiplexing: None,
                repeaters: None,
            },
            score: bsm_score(strategy, None, loss, params)?,
            qubits: 1,
        });
    }
    let trees = enumerate_trees(bounds);
    if trees.is_empty() {
        return Err(Error::Infeasible(format!(
            "no tree with {}..={} qubits, depth <= {}, branching <= {}",
            bounds.min_qubits, bounds.qubit_budget, bounds.max_depth, bounds.max_branch
        )));
    }
    let scored: Result<Vec<Optimum>> = trees
        .into_par_iter()
        .map(|tree| {
            Ok(Optimum {
                score: bsm_score(strategy, Some(&tree), loss, params)?,
                qubits: tree.num_qubits(),
                candidate: Candidate {
                    inner_tree: None,
                    link_tree: Some(tree),
                    multiplexing: None,
                    repeaters: None,
                },
            })
        })
        .collect();
    Ok(scored?.into_iter().reduce(pick_best).expect("non-empty"))
}

/// Per-grid-point losses for a rate search. Points are ordered distance-major.
struct RateGrid {
    distances: Vec<f64>,
    repeaters: Vec<u32>,
    /// `(repeater_loss, link_survival)` per point.
    losses: Vec<(f64, f64)>,
}

impl RateGrid {
    fn new(distances_km: &[f64], bounds: &SearchBounds, params: &ChainParams) -> Result<Self> {
        let mut distances = distances_km.to_vec();
        distances.sort_by(f64::total_cmp);
        let mut repeaters = bounds.repeater_set.clone();
        repeaters.sort_unstable();
        repeaters.dedup();
        if repeaters.is_empty() || bounds.multiplexing_set.is_empty() {
            return Err(Error::Infeasible("empty repeater or multiplexing set".into()));
        }
        let mut losses = Vec::with_capacity(distances.len() * repeaters.len());
        for &d in &distances {
            for &n in &repeaters {
                losses.push(chain::segment_losses(d, n, params.eta_gen, params.alpha_db_per_km)?);
            }
        }
        Ok(Self {
            distances,
            repeaters,
            losses,
        })
    }

    fn points(&self) -> impl Iterator<Item = (usize, u32, (f64, f64))> + '_ {
        let nr = self.repeaters.len();
        self.losses
            .iter()
            .enumerate()
            .map(move |(i, &loss)| (i, self.repeaters[i % nr], loss))
    }
}

/// Inner-tree factors `(2n ln P_X, 2n ln P_Z)` per grid point.
struct InnerTable {
    tree: BranchingVector,
    x: Vec<f64>,
    z: Vec<f64>,
}

fn inner_table(tree: BranchingVector, grid: &RateGrid) -> Result<InnerTable> {
    let mut x = Vec::with_capacity(grid.losses.len());
    let mut z = Vec::with_capacity(grid.losses.len());
    for (_, n, (repeater_loss, _)) in grid.points() {
        let tm = TreeMeasurement::new(&tree, &LossProfile::uniform(repeater_loss, tree.depth())?)?;
        x.push(ln_x_factor(tm.logical_x(), n));
        z.push(ln_z_factor(tm.logical_z(), n));
    }
    Ok(InnerTable { tree, x, z })
}

/// Link BSM success probability per grid point.
struct LinkTable {
    tree: Option<BranchingVector>,
    success: Vec<f64>,
    modes: u64,
}

fn link_table(
    strategy: BsmStrategy,
    tree: Option<BranchingVector>,
    grid: &RateGrid,
    params: &ChainParams,
    model: &RateModel,
) -> Result<LinkTable> {
    let mut success = Vec::with_capacity(grid.losses.len());
    for (i, n, _) in grid.points() {
        let distance = grid.distances[i / grid.repeaters.len()];
        let probe = ChainConfig {
            distance_km: distance,
            repeaters: n,
            multiplexing: 1,
            inner_tree: BranchingVector::new(vec![1])?,
            link_tree: tree.clone(),
            eta_gen: params.eta_gen,
            alpha_db_per_km: params.alpha_db_per_km,
            p_f: params.p_f,
            strategy,
            variant: params.variant,
        };
        let loss = chain::link_loss_model(&probe)?;
        success.push(model.link_success(&probe, &loss)?);
    }
    Ok(LinkTable {
        modes: bsm::link_modes(strategy, tree.as_ref())?,
        tree,
        success,
    })
}

#[derive(Debug, Clone, Copy)]
enum Reduce {
    SingleDistance,
    EnvelopeSlope,
}

fn optimize_rate(
    grid: &RateGrid,
    bounds: &SearchBounds,
    strategy: BsmStrategy,
    params: &ChainParams,
    reduce: Reduce,
) -> Result<Optimum> {
    let model = RateModel::new(params.oracle);
    let min_arms = 2 * u64::from(*bounds.multiplexing_set.iter().min().expect("non-empty"));
    let per_arm = bounds.qubit_budget / min_arms;
    let tree_bounds = SearchBounds {
        min_qubits: 1,
        qubit_budget: per_arm,
        ..bounds.clone()
    };
    let trees = enumerate_trees(&tree_bounds);
    let inner: Vec<InnerTable> = trees
        .par_iter()
        .cloned()
        .map(|t| inner_table(t, grid))
        .collect::<Result<_>>()?;
    let links: Vec<LinkTable> = if strategy.is_encoded() {
        let cap = bounds.max_link_qubits.unwrap_or(u64::MAX);
        trees
            .par_iter()
            .filter(|t| t.num_qubits() <= cap)
            .cloned()
            .map(|t| link_table(strategy, Some(t), grid, params, &model))
            .collect::<Result<_>>()?
    } else {
        vec![link_table(strategy, None, grid, params, &model)?]
    };

    let mut multiplexing = bounds.multiplexing_set.clone();
    multiplexing.sort_unstable();
    multiplexing.dedup();
    let jobs: Vec<(u32, usize)> = multiplexing
        .iter()
        .flat_map(|&m| (0..links.len()).map(move |l| (m, l)))
        .collect();

    let best = jobs
        .into_par_iter()
        .filter_map(|(m, l)| {
            let link = &links[l];
            let arms = 2 * u64::from(m);
            let link_qubits = link.tree.as_ref().map_or(1, |t| t.num_qubits());
            let link_ln: Vec<f64> = grid
                .points()
                .map(|(i, n, _)| ln_link_factor(link.success[i], n, m, f64::from(m) * link.modes as f64))
                .collect();
            let mut local: Option<Optimum> = None;
            for table in &inner {
                let qubits = arms * (table.tree.num_qubits() + link_qubits);
                if qubits > bounds.qubit_budget {
                    continue;
                }
                let (score, repeaters) = reduce_grid(grid, reduce, |i| {
                    combine_ln_factors(link_ln[i], table.x[i], table.z[i], m)
                });
                let candidate = Optimum {
                    candidate: Candidate {
                        inner_tree: Some(table.tree.clone()),
                        link_tree: link.tree.clone(),
                        multiplexing: Some(m),
                        repeaters,
                    },
                    score,
                    qubits,
                };
                local = Some(match local {
                    None => candidate,
                    Some(prev) => pick_best(prev, candidate),
                });
            }
            local
        })
        .reduce_with(pick_best);

    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no {strategy} repeater graph state fits in {} qubits",
            bounds.qubit_budget
        ))
    })
}

/// Collapse per-point log-rates to a score: the best repeater count at a
/// single distance, or minus the fitted slope of the envelope.
fn reduce_grid(grid: &RateGrid, reduce: Reduce, ln_rate: impl Fn(usize) -> f64) -> (f64, Option<u32>) {
    let nr = grid.repeaters.len();
    let mut envelope = Vec::with_capacity(grid.distances.len());
    let mut argmax = None;
    for (d, &distance) in grid.distances.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut best_n = grid.repeaters[0];
        for (k, &n) in grid.repeaters.iter().enumerate() {
            let v = ln_rate(d * nr + k);
            if v > best {
                best = v;
                best_n = n;
            }
        }
        envelope.push((distance, best));
        argmax = Some(best_n);
    }
    match reduce {
        Reduce::SingleDistance => (envelope[0].1, argmax),
        Reduce::EnvelopeSlope => match chain::fit_log_linear(&envelope) {
            Ok(fit) => (-fit.slope, None),
            Err(_) => (f64::NEG_INFINITY, None),
        },
    }
}
