//! Runs a validated config and assembles its report.
//!
//! Run `r` draws every random choice from `derive_seed(master, r, c)` where
//! the component `c` is one of the `COMPONENT_*` constants below.

use robustopt_core::influence::{
    baseline_individual as influence_individual, baseline_perturbed, baseline_uniform_greedy, bottleneck_influence,
    robust_influence, single_solution_metrics, DirectedGraph, InfluenceInstance,
};
use robustopt_core::learning::{
    baseline_even_split, baseline_individual, baseline_uniform, bottleneck_losses, raw_loss_table, robust_train,
    CorruptedCopies, CorruptionSet, DatasetRole, LabeledDataset, Method, MlpParams,
};
use robustopt_core::rng::{derive_seed, SplitMix64};
use robustopt_core::robust::{
    bottleneck_from_table, eta_default, pure_minimax, regret_bound, run_improper_robust, ExactFiniteOracle, MwuConfig,
    ObjectiveSense, RobustRunResult, TableLosses,
};
use robustopt_core::submodular::{
    independent_rounding, robust_coverage_fractional, CoverageObjective, GreedyOracle, ItemSet, ObjectiveFamily,
    SubmodularObjective,
};

use crate::config::{
    CoverageParams, ExperimentConfig, ExperimentKind, InfluenceParams, LearningParams, SyntheticRegretParams,
};
use crate::edgelist::load_edge_list;
use crate::error::{CliError, CliResult};
use crate::idx::load_labeled;
use crate::report::{emit_csv, RunReport};

/// Random instance (table, coverage family, sampled subgraphs).
pub const COMPONENT_INSTANCE: u64 = 0;
/// The robust algorithm's round seeds.
pub const COMPONENT_ALGORITHM: u64 = 1;
/// Randomized baselines and rounding.
pub const COMPONENT_BASELINE: u64 = 2;
/// Fixed corrupted validation copies.
pub const COMPONENT_VALIDATION: u64 = 3;
/// Fixed corrupted test copies.
pub const COMPONENT_TEST: u64 = 4;

/// Slack on checks that compare floating-point sums.
pub const CHECK_SLACK: f64 = 1e-9;

pub fn run_seed(master: u64, run: usize, component: u64) -> u64 {
    derive_seed(master, run as u64, component)
}

/// Validates, runs and writes the report into the configured output directory.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    cfg.validate()?;
    let dir = cfg.output_path()?;
    let report = run_experiment(cfg)?;
    emit_csv(&report, &dir)?;
    Ok(report)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<RunReport> {
    cfg.validate()?;
    let config_echo = cfg.echo()?;
    let mut report = RunReport {
        kind: cfg.kind.name().to_string(),
        seed: cfg.seed,
        runs: cfg.runs,
        config_hash: crate::config::hash_text(&config_echo),
        config_echo,
        ..RunReport::default()
    };
    match cfg.kind {
        ExperimentKind::SyntheticRegret => synthetic_regret(cfg, cfg.synthetic_regret.as_ref().expect("validated"), &mut report)?,
        ExperimentKind::Coverage => coverage(cfg, cfg.coverage.as_ref().expect("validated"), &mut report)?,
        ExperimentKind::Influence => influence(cfg, cfg.influence.as_ref().expect("validated"), &mut report)?,
        ExperimentKind::Learning => learning(cfg, cfg.learning.as_ref().expect("validated"), &mut report)?,
    }
    Ok(report)
}

fn history<F: robustopt_core::Scalar, X>(run: &RobustRunResult<X, F>) -> Vec<Vec<f64>> {
    run.weight_history
        .iter()
        .map(|w| w.as_slice().iter().map(|v| v.to_f64_lossy()).collect())
        .collect()
}

/// Uniform `[0, 1)` loss table with `solutions` rows and `objectives` columns.
pub fn random_loss_table(solutions: usize, objectives: usize, seed: u64) -> TableLosses<f64> {
    let mut rng = SplitMix64::new(seed);
    let rows = (0..solutions)
        .map(|_| (0..objectives).map(|_| rng.unit_f64()).collect())
        .collect();
    TableLosses::new(rows).expect("dimensions are positive")
}

fn synthetic_regret(cfg: &ExperimentConfig, p: &SyntheticRegretParams, report: &mut RunReport) -> CliResult<()> {
    report.objectives = p.objectives;
    for run in 0..cfg.runs {
        let table = random_loss_table(p.solutions, p.objectives, run_seed(cfg.seed, run, COMPONENT_INSTANCE));
        let eta = p.eta.unwrap_or_else(|| eta_default(p.objectives, p.rounds));
        let mut oracle = ExactFiniteOracle::new((0..p.solutions).collect(), &table, ObjectiveSense::Loss)
            .map_err(CliError::core("oracle"))?;
        let config = MwuConfig::new(p.rounds, eta, ObjectiveSense::Loss, run_seed(cfg.seed, run, COMPONENT_ALGORITHM))
            .map_err(CliError::core("mwu config"))?;
        let result = run_improper_robust(&table, &mut oracle, &config).map_err(CliError::core(format!("run {run}")))?;
        let tau = pure_minimax(&table, ObjectiveSense::Loss);
        let bound = regret_bound(p.objectives, p.rounds, 1.0, p.eta).at(tau);
        report.metric(run, "mwu", "bottleneck", result.bottleneck);
        report.metric(run, "mwu", "minimax", tau);
        report.metric(run, "mwu", "bound", bound);
        report.metric(run, "mwu", "eta", eta);
        report.check(run, "regret_bound", result.bottleneck, bound + CHECK_SLACK);
        report.weight_history(run, "mwu", history(&result));
        report.curve(run, "mwu", result.bottleneck_prefixes());
    }
    Ok(())
}

/// `m` random weighted coverage functions over a shared item set.
pub fn random_coverage_family(
    objectives: usize,
    items: usize,
    elements: usize,
    cover_probability: f64,
    seed: u64,
) -> CliResult<Vec<CoverageObjective<f64>>> {
    let mut rng = SplitMix64::new(seed);
    (0..objectives)
        .map(|_| {
            let weights = (0..elements).map(|_| rng.uniform(0.1, 1.0)).collect();
            let covers = (0..items)
                .map(|_| (0..elements).filter(|_| rng.bernoulli(cover_probability)).collect())
                .collect();
            CoverageObjective::new(weights, covers).map_err(CliError::core("coverage instance"))
        })
        .collect()
}

fn worst_value(covs: &[CoverageObjective<f64>], set: &ItemSet) -> f64 {
    covs.iter().map(|c| c.value(set)).fold(f64::INFINITY, f64::min)
}

fn coverage(cfg: &ExperimentConfig, p: &CoverageParams, report: &mut RunReport) -> CliResult<()> {
    report.objectives = p.objectives;
    for run in 0..cfg.runs {
        let covs = random_coverage_family(
            p.objectives,
            p.items,
            p.elements,
            p.cover_probability,
            run_seed(cfg.seed, run, COMPONENT_INSTANCE),
        )?;
        let algo_seed = run_seed(cfg.seed, run, COMPONENT_ALGORITHM);

        let frac = robust_coverage_fractional(&covs, p.budget, p.rounds, p.ascent_steps, algo_seed)
            .map_err(CliError::core(format!("run {run}: fractional")))?;
        report.metric(run, "fractional", "worst_case", frac.worst_case_value(&covs));
        report.metric(run, "fractional", "bottleneck", frac.run.bottleneck);
        report.weight_history(run, "fractional", history(&frac.run));
        report.curve(run, "fractional", frac.run.bottleneck_prefixes());

        let rounding_seed = run_seed(cfg.seed, run, COMPONENT_BASELINE);
        let (mut value, mut size) = (0.0, 0.0);
        for s in 0..p.roundings {
            let set = independent_rounding(&frac.solution, derive_seed(rounding_seed, s as u64, 0));
            value += worst_value(&covs, &set);
            size += set.len() as f64;
        }
        report.metric(run, "rounded", "worst_case", value / p.roundings as f64);
        report.metric(run, "rounded", "mean_size", size / p.roundings as f64);

        let family = ObjectiveFamily::new(&covs);
        let mut oracle = GreedyOracle::new(&covs, p.budget);
        let config = MwuConfig::new(
            p.rounds,
            eta_default(p.objectives, p.rounds),
            ObjectiveSense::Reward,
            algo_seed,
        )
        .map_err(CliError::core("mwu config"))?;
        let greedy = run_improper_robust(&family, &mut oracle, &config).map_err(CliError::core(format!("run {run}: greedy")))?;
        report.metric(run, "greedy-mwu", "bottleneck", greedy.bottleneck);
        report.weight_history(run, "greedy-mwu", history(&greedy));
        report.curve(run, "greedy-mwu", greedy.bottleneck_prefixes());

        // The relaxation agrees with the set function at every greedy answer.
        let gap = greedy
            .solutions
            .iter()
            .flat_map(|s| {
                let x = s.indicator::<f64>(p.items);
                covs.iter().map(move |c| (c.relaxation(&x) - c.value(s)).abs())
            })
            .fold(0.0, f64::max);
        report.check(run, "relaxation_integral", gap, CHECK_SLACK);
    }
    Ok(())
}

fn influence(cfg: &ExperimentConfig, p: &InfluenceParams, report: &mut RunReport) -> CliResult<()> {
    report.objectives = p.objectives;
    let base = match (p.complete_nodes, &p.edge_list) {
        (Some(n), _) => DirectedGraph::complete(n).map_err(CliError::core("complete graph"))?,
        (None, Some(path)) => load_edge_list(cfg.resolve(path))?.graph,
        (None, None) => unreachable!("validated"),
    };
    if p.budget > base.node_count() {
        return Err(CliError::Config(format!("budget {} exceeds {} nodes", p.budget, base.node_count())));
    }
    let eta = p.eta.unwrap_or_else(|| eta_default(p.objectives, p.rounds));
    for run in 0..cfg.runs {
        let ctx = |what: &str| CliError::core(format!("run {run}: {what}"));
        let inst = InfluenceInstance::sample(
            base.clone(),
            p.objectives,
            p.edge_probability,
            run_seed(cfg.seed, run, COMPONENT_INSTANCE),
        )
        .map_err(ctx("sampling"))?;
        let robust = robust_influence::<f64>(&inst, p.budget, p.rounds, eta, run_seed(cfg.seed, run, COMPONENT_ALGORITHM))
            .map_err(ctx("robust"))?;
        let individual = influence_individual::<f64>(&inst, p.budget).map_err(ctx("individual"))?;
        let uniform = baseline_uniform_greedy::<f64>(&inst, p.budget).map_err(ctx("uniform"))?;
        let perturbed = baseline_perturbed(
            &inst,
            p.budget,
            &robust.weight_history,
            run_seed(cfg.seed, run, COMPONENT_BASELINE),
        )
        .map_err(ctx("perturbed"))?;
        let bn = |sets: &[ItemSet]| -> CliResult<f64> {
            Ok(inst.denormalize(bottleneck_influence::<f64>(&inst, sets).map_err(ctx("bottleneck"))?))
        };

        report.metric(run, "robust", "bottleneck", inst.denormalize(robust.bottleneck));
        report.metric(run, "individual", "bottleneck", bn(&individual)?);
        report.metric(run, "uniform-greedy", "bottleneck", bn(&[uniform])?);
        report.metric(run, "perturbed", "bottleneck", bn(&perturbed)?);

        let single = single_solution_metrics(&robust, &inst).map_err(ctx("single solution"))?;
        report.metric(run, "robust", "best_single", inst.denormalize(single.best_single));
        report.metric(run, "robust", "best_single_ratio", single.best_single_ratio);
        if let Some(r) = single.exhaustive_ratio {
            report.metric(run, "robust", "exhaustive_ratio", r);
        }
        report.weight_history(run, "robust", history(&robust));
        report.curve(run, "robust", robust.bottleneck_prefixes().into_iter().map(|v| inst.denormalize(v)));
    }
    Ok(())
}

/// Train, validation and test slices of the configured files.
pub fn learning_splits(
    cfg: &ExperimentConfig,
    p: &LearningParams,
) -> CliResult<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let all = load_labeled(cfg.resolve(&p.images), cfg.resolve(&p.labels))?;
    let need = p.train + p.validation + p.test;
    if need > all.len() {
        return Err(CliError::Config(format!(
            "splits need {need} images but {} holds {}",
            p.images.display(),
            all.len()
        )));
    }
    let slice = |start, len, role| all.slice(start, len, role).map_err(CliError::core("splitting data"));
    Ok((
        slice(0, p.train, DatasetRole::Train)?,
        slice(p.train, p.validation, DatasetRole::Validation)?,
        slice(p.train + p.validation, p.test, DatasetRole::Test)?,
    ))
}

/// Method label used in learning reports, e.g. `hybrid-g0.5`.
pub fn robust_label(method: Method, gamma: f64) -> String {
    format!("{}-g{gamma}", method.name())
}

/// Mean `‖w_{t+1} - w_t‖₁` over the first half of the transitions.
pub fn early_drift<X>(run: &RobustRunResult<X, f32>) -> f64 {
    let drift = run.weight_drift();
    if drift.is_empty() {
        return 0.0;
    }
    let early = drift.len().div_ceil(2);
    drift[..early].iter().map(|&d| d as f64).sum::<f64>() / early as f64
}

/// Worst-corruption mean test loss of each prefix `θ_1..θ_t`.
fn prefix_curve(solutions: &[MlpParams<f32>], test: &CorruptedCopies) -> CliResult<Vec<f64>> {
    let table = raw_loss_table(solutions, test).map_err(CliError::core("test losses"))?;
    (1..=table.len())
        .map(|t| bottleneck_from_table(&table[..t], ObjectiveSense::Loss).map_err(CliError::core("prefix bottleneck")))
        .collect()
}

fn record_solutions(
    report: &mut RunReport,
    run: usize,
    label: &str,
    solutions: &[MlpParams<f32>],
    test: &CorruptedCopies,
) -> CliResult<f64> {
    let b = bottleneck_losses(solutions, test).map_err(CliError::core(format!("run {run}: {label}")))?;
    report.metric(run, label, "individual", b.individual);
    report.metric(run, label, "ensemble", b.ensemble);
    report.check(run, &format!("jensen/{label}"), b.ensemble, b.individual + CHECK_SLACK);
    report.curve(run, label, prefix_curve(solutions, test)?);
    Ok(b.individual)
}

fn learning(cfg: &ExperimentConfig, p: &LearningParams, report: &mut RunReport) -> CliResult<()> {
    let cset = CorruptionSet::by_name(&p.corruption_set).map_err(CliError::core("corruption set"))?;
    report.objectives = cset.m();
    let (train, validation, test) = learning_splits(cfg, p)?;
    let train_cfg = p.train_config();
    for run in 0..cfg.runs {
        let seed = run_seed(cfg.seed, run, COMPONENT_ALGORITHM);
        let val = CorruptedCopies::new(&validation, &cset, run_seed(cfg.seed, run, COMPONENT_VALIDATION));
        let tst = CorruptedCopies::new(&test, &cset, run_seed(cfg.seed, run, COMPONENT_TEST));

        for &method in &p.methods {
            for &gamma in &p.gammas {
                let method = Method::from(method);
                let label = robust_label(method, gamma);
                let result = robust_train::<f32>(&train, &val, &cset, p.rounds, &train_cfg, method, gamma as f32, seed)
                    .map_err(CliError::core(format!("run {run}: {label}")))?;
                record_solutions(report, run, &label, &result.solutions, &tst)?;
                report.metric(run, &label, "early_drift", early_drift(&result));
                report.weight_history(run, &label, history(&result));
            }
        }

        if !p.baselines {
            continue;
        }
        let uniform = baseline_uniform::<f32>(&train, &val, &cset, p.rounds, &train_cfg, Method::Hybrid, seed)
            .map_err(CliError::core(format!("run {run}: uniform")))?;
        record_solutions(report, run, "uniform", &uniform.solutions, &tst)?;
        report.weight_history(run, "uniform", history(&uniform));

        let even = baseline_even_split::<f32>(&train, &cset, p.rounds, &train_cfg, seed)
            .map_err(CliError::core(format!("run {run}: even split")))?;
        record_solutions(report, run, "even-split", &even, &tst)?;

        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..cset.m() {
            let label = format!("individual-{i}");
            let sols = baseline_individual::<f32>(i, &train, &cset, p.rounds, &train_cfg, seed)
                .map_err(CliError::core(format!("run {run}: {label}")))?;
            let individual = record_solutions(report, run, &label, &sols, &tst)?;
            let ensemble = *report.values(&label, "ensemble").last().expect("just recorded");
            if best.is_none_or(|(b, _, _)| individual < b) {
                best = Some((individual, i, ensemble));
            }
        }
        let (individual, index, ensemble) = best.expect("corruption sets are nonempty");
        report.metric(run, "best-individual", "individual", individual);
        report.metric(run, "best-individual", "ensemble", ensemble);
        report.metric(run, "best-individual", "corruption", index as f64);
    }
    Ok(())
}
