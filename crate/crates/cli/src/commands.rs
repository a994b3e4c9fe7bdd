//! The subcommands. Each turns a resolved [`ExperimentSpec`] into a
//! [`Report`]; writing files and choosing exit codes is left to the caller.

use std::collections::BTreeMap;
use std::path::Path;

use treelink::bsm::{adaptive_bsm_prob, physical_fusion_prob};
use treelink::chain::{fit_exponent, repeaterless_rate, transmissivity, ChainConfig, RateModel};
use treelink::optimizer::{
    enumerate_trees, optimize, rgs_size, Candidate, ChainParams, LossSpec, Objective, Optimum, SearchBounds,
};
use treelink::oracle::{BsmSetup, DEFAULT_ENUMERATION_LIMIT};
use treelink::{AdaptiveVariant, BranchingVector, BsmStrategy, Error, OracleSettings};

use crate::config::{parse_loss, parse_strategy, parse_tree, ExperimentSpec, ProtocolSection};
use crate::csv::{format_number, Cell, Table};
use crate::error::CliError;
use crate::plot;

/// Tolerance for the closed form of the symmetrized adaptive BSM against
/// exact enumeration.
pub const VALIDATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BsmCurve,
    RateEnvelope,
    Optimize,
    Validate,
    Repeaterless,
    CalibrateFig4,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BsmCurve => "bsm-curve",
            Command::RateEnvelope => "rate-envelope",
            Command::Optimize => "optimize",
            Command::Validate => "validate",
            Command::Repeaterless => "repeaterless",
            Command::CalibrateFig4 => "calibrate-fig4",
        }
    }

    /// Adaptive variant used when the experiment leaves it unset.
    pub fn default_variant(self, spec: &ExperimentSpec) -> AdaptiveVariant {
        let rate_objective = spec.optimize.objective != "bsm";
        match self {
            Command::RateEnvelope => AdaptiveVariant::AsPrinted,
            Command::Optimize if rate_objective => AdaptiveVariant::AsPrinted,
            _ => AdaptiveVariant::Symmetrized,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub plot_script: Option<String>,
    /// Set when a validation run found mismatches.
    pub failure: Option<String>,
}

impl Report {
    fn table(table: Table) -> Self {
        Self {
            table,
            plot_script: None,
            failure: None,
        }
    }
}

/// Resolve defaults, run `command` and prefix the table with the tool
/// version and the resolved experiment.
pub fn run(command: Command, spec: &ExperimentSpec) -> Result<Report, CliError> {
    let mut spec = spec.clone();
    let variant = spec.variant_or(command.default_variant(&spec))?;
    spec.variant = Some(variant.name().to_owned());

    let mut report = match command {
        Command::BsmCurve => bsm_curve(&spec, variant)?,
        Command::RateEnvelope => rate_envelope(&spec, variant)?,
        Command::Optimize => optimize_report(&spec, variant)?,
        Command::Validate => validate(&spec)?,
        Command::Repeaterless => repeaterless(&spec)?,
        Command::CalibrateFig4 => calibrate(&spec)?,
    };
    let mut preamble = format!(
        "{} {}\ncommand: {}\nresolved configuration:\n\n",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        command.name()
    );
    preamble.push_str(&spec.to_toml());
    report.table.preamble(&preamble);

    if let Some(script) = &spec.output.plot_script {
        let csv = spec.output.csv.as_deref().ok_or_else(|| {
            CliError::Input("a plot script needs a CSV output path (--out or output.csv)".into())
        })?;
        report.plot_script = match command {
            Command::BsmCurve => Some(plot::bsm_curve(&file_name(csv))),
            Command::RateEnvelope => Some(plot::rate_envelope(&file_name(csv))),
            _ => {
                return Err(CliError::Input(format!(
                    "{} has no plot script (requested {})",
                    command.name(),
                    script.display()
                )))
            }
        };
    }
    Ok(report)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check_grid(name: &str, values: &[f64], lower: f64, upper: f64) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Input(format!("{name} must not be empty")));
    }
    if let Some(bad) = values.iter().find(|v| !(lower..=upper).contains(*v)) {
        return Err(CliError::Input(format!("{name} value {bad} outside [{lower}, {upper}]")));
    }
    Ok(())
}

fn check_distances(name: &str, values: &[f64]) -> Result<(), CliError> {
    check_grid(name, values, 0.0, f64::MAX)?;
    if values.contains(&0.0) {
        return Err(CliError::Input(format!(
            "{name} contains L = 0, where the repeaterless rate is unbounded; start the grid above zero"
        )));
    }
    Ok(())
}

/// Exact value when enumerable within `settings`, else a sampled estimate.
fn measure(
    setup: &BsmSetup<'_>,
    strategy: BsmStrategy,
    settings: &OracleSettings,
) -> Result<(f64, f64), CliError> {
    if settings.enumeration_limit > 0 {
        match setup.exact_with_limit(strategy, settings.enumeration_limit) {
            Ok(p) => return Ok((p, 0.0)),
            Err(Error::EnumerationTooLarge { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let est = setup.estimate(strategy, settings.samples, settings.seed)?;
    Ok((est.mean, est.std_error))
}

fn bsm_curve(spec: &ExperimentSpec, variant: AdaptiveVariant) -> Result<Report, CliError> {
    let section = &spec.bsm_curve;
    check_grid("bsm_curve.epsilons", &section.epsilons, 0.0, 1.0)?;
    let strategies: Vec<BsmStrategy> = section
        .strategies
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<Result<_, _>>()?;
    if strategies.is_empty() {
        return Err(CliError::Input("bsm_curve.strategies must not be empty".into()));
    }
    let fixed = section.tree.as_deref().map(parse_tree).transpose()?;
    let bounds = section.search.bounds();
    let p_f = spec.chain.p_f;
    let mut screening = spec.chain_params(variant);
    screening.oracle = OracleSettings {
        samples: section.screening_samples.max(1),
        seed: spec.oracle.seed,
        enumeration_limit: 0,
    };
    // final estimates use a seed independent of the screening runs
    let final_settings = OracleSettings {
        seed: spec.oracle.seed.wrapping_add(1),
        ..spec.oracle.settings()
    };

    let mut profiles = vec![("uniform", false)];
    if section.delayed_profile {
        profiles.push(("delayed", true));
    }

    let mut table = Table::new(&["epsilon", "strategy", "variant_or_profile", "probability", "std_error_or_0"]);
    let mut chosen = Vec::new();
    let mut curves: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for &eps in &section.epsilons {
        for &strategy in &strategies {
            for &(profile_name, delayed) in &profiles {
                if delayed && strategy == BsmStrategy::Physical {
                    continue;
                }
                let loss = if delayed {
                    LossSpec::DelayedDeeperLevels(eps)
                } else {
                    LossSpec::Uniform(eps)
                };
                let label = match (strategy, delayed) {
                    (BsmStrategy::Adaptive, false) => variant.name(),
                    _ => profile_name,
                };
                let (p, std) = if strategy == BsmStrategy::Physical {
                    (physical_fusion_prob(eps, p_f)?, 0.0)
                } else {
                    let tree = match &fixed {
                        Some(t) => t.clone(),
                        None => best_tree(loss, &bounds, strategy, &screening)?,
                    };
                    let profile = loss.profile(tree.depth())?;
                    let value = if strategy == BsmStrategy::Adaptive {
                        (adaptive_bsm_prob(&tree, &profile, p_f, variant)?, 0.0)
                    } else {
                        measure(&BsmSetup::new(&tree, &profile, p_f)?, strategy, &final_settings)?
                    };
                    chosen.push(format!(
                        "tree epsilon={} strategy={strategy} variant_or_profile={label} b={tree}",
                        format_number(eps)
                    ));
                    value
                };
                curves
                    .entry((strategy.name().to_owned(), label.to_owned()))
                    .or_default()
                    .push((eps, p));
                table.push(vec![eps.into(), strategy.name().into(), label.into(), p.into(), std.into()]);
            }
        }
    }
    for line in chosen {
        table.footer(line);
    }
    let physical = curves.get(&("physical".to_owned(), "uniform".to_owned())).cloned();
    if let Some(physical) = physical {
        for ((strategy, label), curve) in &curves {
            if strategy == "physical" {
                continue;
            }
            let crossing = crossover(curve, &physical)
                .map(format_number)
                .unwrap_or_else(|| "none".into());
            table.footer(format!(
                "crossover strategy={strategy} variant_or_profile={label} vs physical: epsilon={crossing}"
            ));
        }
    }
    Ok(Report::table(table))
}

/// First loss value where `curve` drops below `baseline`, linearly
/// interpolated between grid points.
pub fn crossover(curve: &[(f64, f64)], baseline: &[(f64, f64)]) -> Option<f64> {
    let diff: Vec<(f64, f64)> = curve
        .iter()
        .zip(baseline)
        .map(|(&(x, a), &(_, b))| (x, a - b))
        .collect();
    diff.windows(2).find_map(|w| {
        let ((x0, d0), (x1, d1)) = (w[0], w[1]);
        (d0 > 0.0 && d1 <= 0.0).then(|| x0 + (x1 - x0) * d0 / (d0 - d1))
    })
}

fn best_tree(
    loss: LossSpec,
    bounds: &SearchBounds,
    strategy: BsmStrategy,
    params: &ChainParams,
) -> Result<BranchingVector, CliError> {
    let best = optimize(&Objective::BsmProb { loss }, bounds, strategy, params)?;
    best.candidate
        .link_tree
        .ok_or_else(|| CliError::Input(format!("{strategy} search returned no tree")))
}

/// Chain template and qubit count for one envelope protocol.
pub fn resolve_protocol(
    protocol: &ProtocolSection,
    distances_km: &[f64],
    repeaters: &[u32],
    params: &ChainParams,
) -> Result<(ChainConfig, u64), CliError> {
    let strategy = parse_strategy(&protocol.strategy)?;
    let explicit = protocol.inner_tree.is_some() || protocol.link_tree.is_some() || protocol.multiplexing.is_some();
    let candidate = match (explicit, protocol.qubit_budget) {
        (true, _) => Candidate {
            inner_tree: Some(parse_tree(protocol.inner_tree.as_deref().ok_or_else(|| {
                CliError::Input(format!("protocol `{}` needs inner_tree", protocol.name))
            })?)?),
            link_tree: protocol.link_tree.as_deref().map(parse_tree).transpose()?,
            multiplexing: Some(protocol.multiplexing.ok_or_else(|| {
                CliError::Input(format!("protocol `{}` needs multiplexing", protocol.name))
            })?),
            repeaters: None,
        },
        (false, Some(budget)) => {
            let bounds = SearchBounds {
                max_depth: protocol.max_depth,
                max_branch: protocol.max_branch,
                min_qubits: 1,
                qubit_budget: budget,
                repeater_set: repeaters.to_vec(),
                multiplexing_set: protocol.multiplexing_set.clone(),
                max_link_qubits: protocol.max_link_qubits,
            };
            let objective = Objective::EnvelopeExponent {
                distances_km: distances_km.to_vec(),
            };
            optimize(&objective, &bounds, strategy, params)?.candidate
        }
        (false, None) => {
            return Err(CliError::Input(format!(
                "protocol `{}` needs either a qubit_budget or inner_tree and multiplexing",
                protocol.name
            )))
        }
    };
    let cfg = candidate.chain_config(strategy, params, distances_km[0])?;
    let qubits = rgs_size(strategy, cfg.multiplexing, &cfg.inner_tree, cfg.link_tree.as_ref())?;
    if let Some(budget) = protocol.qubit_budget {
        if qubits > budget {
            return Err(CliError::Input(format!(
                "protocol `{}` uses {qubits} qubits, over its budget of {budget}",
                protocol.name
            )));
        }
    }
    Ok((cfg, qubits))
}

fn rate_envelope(spec: &ExperimentSpec, variant: AdaptiveVariant) -> Result<Report, CliError> {
    let section = &spec.rate_envelope;
    check_distances("rate_envelope.distances_km", &section.distances_km)?;
    if section.repeaters.is_empty() || section.repeaters.contains(&0) {
        return Err(CliError::Input("rate_envelope.repeaters must be non-empty and positive".into()));
    }
    if section.protocols.is_empty() {
        return Err(CliError::Input("rate_envelope.protocols must not be empty".into()));
    }
    let params = spec.chain_params(variant);
    let model = RateModel::new(params.oracle);

    let mut table = Table::new(&["L_km", "protocol", "best_n", "rate_ebits_per_mode", "repeaterless_rate"]);
    for protocol in &section.protocols {
        let name = if protocol.name.is_empty() {
            protocol.strategy.clone()
        } else {
            protocol.name.clone()
        };
        let (cfg, qubits) = resolve_protocol(protocol, &section.distances_km, &section.repeaters, &params)?;
        let envelope = model.envelope(&cfg, &section.distances_km, &section.repeaters)?;
        for point in &envelope {
            table.push(vec![
                point.distance_km.into(),
                name.as_str().into(),
                point.repeaters.into(),
                point.rate.into(),
                repeaterless_rate(point.distance_km, spec.chain.alpha_db_per_km)?.into(),
            ]);
        }
        let fit = match fit_exponent(&envelope) {
            Ok(fit) => format!(
                "s_per_km={} intercept={}",
                format_number(fit.slope),
                format_number(fit.intercept)
            ),
            Err(e) => format!("fit unavailable: {e}"),
        };
        let link = cfg
            .link_tree
            .as_ref()
            .map_or_else(|| "none".to_owned(), ToString::to_string);
        table.footer(format!(
            "fit protocol={name} strategy={} {fit} inner_tree={} link_tree={link} multiplexing={} rgs_qubits={qubits}",
            cfg.strategy, cfg.inner_tree, cfg.multiplexing
        ));
        let beyond = envelope.iter().find(|p| {
            repeaterless_rate(p.distance_km, spec.chain.alpha_db_per_km)
                .map(|direct| p.ln_rate > direct.ln())
                .unwrap_or(false)
        });
        table.footer(format!(
            "beats-repeaterless protocol={name} from_L_km={}",
            beyond.map_or_else(|| "none".to_owned(), |p| format_number(p.distance_km))
        ));
    }
    Ok(Report::table(table))
}

fn optimize_report(spec: &ExperimentSpec, variant: AdaptiveVariant) -> Result<Report, CliError> {
    let section = &spec.optimize;
    let strategy = parse_strategy(&section.strategy)?;
    let bounds = section.search.bounds();
    let params = spec.chain_params(variant);
    let mut table = Table::new(&[
        "objective",
        "strategy",
        "loss_profile",
        "epsilon",
        "distance_km",
        "inner_tree",
        "link_tree",
        "multiplexing",
        "repeaters",
        "qubits",
        "score",
    ]);
    let tree_cell = |t: &Option<BranchingVector>| Cell::from(t.as_ref().map(ToString::to_string).unwrap_or_default());
    let opt_cell = |x: Option<u32>| x.map_or_else(|| Cell::from(""), Cell::from);
    let row = |objective: &str, profile: &str, eps: Option<f64>, distance: Option<f64>, best: &Optimum| {
        vec![
            objective.into(),
            strategy.name().into(),
            profile.into(),
            eps.map_or_else(|| Cell::from(""), Cell::from),
            distance.map_or_else(|| Cell::from(""), Cell::from),
            tree_cell(&best.candidate.inner_tree),
            tree_cell(&best.candidate.link_tree),
            opt_cell(best.candidate.multiplexing),
            opt_cell(best.candidate.repeaters),
            best.qubits.into(),
            best.score.into(),
        ]
    };
    match section.objective.as_str() {
        "bsm" => {
            check_grid("optimize.epsilons", &section.epsilons, 0.0, 1.0)?;
            for &eps in &section.epsilons {
                let loss = parse_loss(&section.profile, eps)?;
                let best = optimize(&Objective::BsmProb { loss }, &bounds, strategy, &params)?;
                table.push(row("bsm", &section.profile, Some(eps), None, &best));
            }
            table.footer("score: logical BSM success probability");
        }
        "rate" => {
            check_distances("optimize.distances_km", &section.distances_km)?;
            for &distance in &section.distances_km {
                let best = optimize(&Objective::Rate { distance_km: distance }, &bounds, strategy, &params)?;
                table.push(row("rate", "chain", None, Some(distance), &best));
            }
            table.footer("score: natural log of the rate in ebits per mode; qubits: photons per repeater graph state");
        }
        "envelope" => {
            check_distances("optimize.distances_km", &section.distances_km)?;
            let objective = Objective::EnvelopeExponent {
                distances_km: section.distances_km.clone(),
            };
            let best = optimize(&objective, &bounds, strategy, &params)?;
            table.push(row("envelope", "chain", None, None, &best));
            table.footer("score: minus the fitted decay exponent s of the rate envelope (1/km)");
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown objective `{other}` (expected `bsm`, `rate` or `envelope`)"
            )))
        }
    }
    Ok(Report::table(table))
}

fn validate(spec: &ExperimentSpec) -> Result<Report, CliError> {
    let section = &spec.validate;
    check_grid("validate.epsilons", &section.epsilons, 0.0, 1.0)?;
    let p_f = spec.chain.p_f;
    let limit = DEFAULT_ENUMERATION_LIMIT.max(spec.oracle.enumeration_limit);
    let mut table = Table::new(&["tree", "epsilon", "variant", "analytic", "exact", "abs_diff", "status"]);
    let mut mismatches = 0usize;
    let mut worst_printed = 0.0f64;
    for branches in &section.trees {
        let tree = parse_tree(branches)?;
        for &eps in &section.epsilons {
            let profile = treelink::LossProfile::uniform(eps, tree.depth())?;
            let setup = BsmSetup::new(&tree, &profile, p_f)?;
            let exact = match setup.exact_with_limit(BsmStrategy::Adaptive, limit) {
                Ok(p) => Some(p),
                Err(Error::EnumerationTooLarge { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            for variant in [AdaptiveVariant::Symmetrized, AdaptiveVariant::AsPrinted] {
                let analytic = adaptive_bsm_prob(&tree, &profile, p_f, variant)?;
                let Some(exact) = exact else {
                    table.push(vec![
                        tree.to_string().into(),
                        eps.into(),
                        variant.name().into(),
                        analytic.into(),
                        "".into(),
                        "".into(),
                        format!("enumeration exceeds {limit} paths").into(),
                    ]);
                    continue;
                };
                let diff = (analytic - exact).abs();
                let status = match variant {
                    AdaptiveVariant::Symmetrized if diff > VALIDATION_TOLERANCE => {
                        mismatches += 1;
                        "mismatch"
                    }
                    AdaptiveVariant::AsPrinted if diff > VALIDATION_TOLERANCE => {
                        worst_printed = worst_printed.max(diff);
                        "deviation"
                    }
                    _ => "ok",
                };
                table.push(vec![
                    tree.to_string().into(),
                    eps.into(),
                    variant.name().into(),
                    analytic.into(),
                    exact.into(),
                    diff.into(),
                    status.into(),
                ]);
            }
        }
    }
    table.footer(format!(
        "symmetrized mismatches above {}: {mismatches}",
        format_number(VALIDATION_TOLERANCE)
    ));
    table.footer(format!("largest as-printed deviation: {}", format_number(worst_printed)));
    let mut report = Report::table(table);
    if mismatches > 0 {
        report.failure = Some(format!(
            "{mismatches} symmetrized closed-form values differ from enumeration by more than {}",
            format_number(VALIDATION_TOLERANCE)
        ));
    }
    Ok(report)
}

fn repeaterless(spec: &ExperimentSpec) -> Result<Report, CliError> {
    let distances = &spec.repeaterless.distances_km;
    check_distances("repeaterless.distances_km", distances)?;
    let alpha = spec.chain.alpha_db_per_km;
    let mut table = Table::new(&["L_km", "transmissivity", "repeaterless_rate"]);
    for &l in distances {
        table.push(vec![
            l.into(),
            transmissivity(l, alpha)?.into(),
            repeaterless_rate(l, alpha)?.into(),
        ]);
    }
    Ok(Report::table(table))
}

/// Every `(m, b_in, b_link)` whose repeater graph state has exactly the
/// target number of photons.
pub fn calibration_candidates(
    strategy: BsmStrategy,
    qubits: u64,
    max_depth: usize,
    max_branch: u32,
) -> Result<Vec<(u32, BranchingVector, Option<BranchingVector>)>, CliError> {
    let trees = enumerate_trees(&SearchBounds {
        max_depth,
        max_branch,
        ..SearchBounds::new(qubits.max(1))
    });
    let mut by_size: BTreeMap<u64, Vec<&BranchingVector>> = BTreeMap::new();
    for t in &trees {
        by_size.entry(t.num_qubits()).or_default().push(t);
    }
    let mut out = Vec::new();
    for m in 1..=u32::try_from(qubits / 2).unwrap_or(u32::MAX) {
        let arms = 2 * u64::from(m);
        if !qubits.is_multiple_of(arms) {
            continue;
        }
        let per_arm = qubits / arms;
        if strategy == BsmStrategy::Physical {
            for inner in by_size.get(&(per_arm.saturating_sub(1))).into_iter().flatten() {
                out.push((m, (*inner).clone(), None));
            }
            continue;
        }
        for (&n_in, inner) in by_size.range(1..per_arm) {
            for link in by_size.get(&(per_arm - n_in)).into_iter().flatten() {
                for i in inner {
                    out.push((m, (*i).clone(), Some((*link).clone())));
                }
            }
        }
    }
    for (m, inner, link) in &out {
        debug_assert_eq!(rgs_size(strategy, *m, inner, link.as_ref()).ok(), Some(qubits));
    }
    Ok(out)
}

fn calibrate(spec: &ExperimentSpec) -> Result<Report, CliError> {
    let section = &spec.calibrate;
    let mut table = Table::new(&[
        "strategy",
        "target_qubits",
        "multiplexing",
        "inner_tree",
        "link_tree",
        "inner_qubits",
        "link_qubits",
    ]);
    for target in &section.targets {
        let strategy = parse_strategy(&target.strategy)?;
        let found = calibration_candidates(strategy, target.qubits, section.max_depth, section.max_branch)?;
        for (m, inner, link) in &found {
            table.push(vec![
                strategy.name().into(),
                target.qubits.into(),
                (*m).into(),
                inner.to_string().into(),
                link.as_ref().map(ToString::to_string).unwrap_or_default().into(),
                inner.num_qubits().into(),
                link.as_ref().map_or(1, BranchingVector::num_qubits).into(),
            ]);
        }
        table.footer(format!(
            "candidates strategy={strategy} target_qubits={} count={}",
            target.qubits,
            found.len()
        ));
    }
    Ok(Report::table(table))
}
