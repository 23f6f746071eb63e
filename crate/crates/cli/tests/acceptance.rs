//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. All randomness derives from `MASTER`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, Axis};
use robustopt_cli::config::{CoverageParams, InfluenceParams, LearningParams, MethodName, SyntheticRegretParams};
use robustopt_cli::{execute, run_experiment, ExperimentConfig, ExperimentKind, RunReport};
use robustopt_core::learning::{apply_corruption, CorruptionSet, Image, MlpParams};
use robustopt_core::rng::{derive_seed, SplitMix64};
use robustopt_core::robust::{
    run_improper_robust, run_infinite_robust, ExactFiniteOracle, MwuConfig, ObjectiveSense, ProbabilitySimplex,
    SimplexMixture, TableLosses,
};
use robustopt_core::robust::eta_default;
use robustopt_core::submodular::{greedy_oracle, robust_coverage_fractional, CoverageObjective, ItemSet, SubmodularObjective};
use robustopt_core::WeightVector64;

const MASTER: u64 = 20171204;

type Criterion = (&'static str, &'static str, fn() -> Vec<(String, Outcome)>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng_for(criterion: u64) -> SplitMix64 {
    SplitMix64::new(derive_seed(MASTER, criterion, 0))
}

/// Loss table with `rows[x][i] = L_i(x)`, kept alongside the raw rows for the oracles below.
struct Instance {
    rows: Vec<Vec<f64>>,
    m: usize,
}

fn regret_instances() -> Vec<Instance> {
    let mut rng = rng_for(1);
    (0..120)
        .map(|_| {
            let m = 1 + rng.below(8);
            let n = 1 + rng.below(16);
            let rows = (0..n).map(|_| (0..m).map(|_| rng.unit_f64()).collect()).collect();
            Instance { rows, m }
        })
        .collect()
}

/// `min_x max_i L_i(x)` by direct enumeration.
fn brute_tau(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// `max_i mean_t L_i(x_t)` recomputed from the chosen indices.
fn played_bottleneck(rows: &[Vec<f64>], played: &[usize], m: usize) -> f64 {
    (0..m)
        .map(|i| played.iter().map(|&x| rows[x][i]).sum::<f64>() / played.len() as f64)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn mwu_play(inst: &Instance, rounds: usize, eta: f64, seed: u64) -> Vec<usize> {
    let table = TableLosses::new(inst.rows.clone()).unwrap();
    let mut oracle = ExactFiniteOracle::new((0..inst.rows.len()).collect(), &table, ObjectiveSense::Loss).unwrap();
    let config = MwuConfig::new(rounds, eta, ObjectiveSense::Loss, seed).unwrap();
    run_improper_robust(&table, &mut oracle, &config).unwrap().solutions
}

fn criterion_1() -> Outcome {
    let instances = regret_instances();
    let (mut checked, mut worst_margin) = (0, f64::INFINITY);
    for (k, inst) in instances.iter().enumerate() {
        for rounds in [100, 1000] {
            let eta = eta_default(inst.m, rounds);
            let played = mwu_play(inst, rounds, eta, k as u64);
            let lhs = played_bottleneck(&inst.rows, &played, inst.m);
            let rhs = brute_tau(&inst.rows) + (2.0 * (inst.m as f64).ln() / rounds as f64).sqrt() + 1e-9;
            worst_margin = worst_margin.min(rhs - lhs);
            checked += 1;
        }
    }
    outcome(
        worst_margin >= 0.0,
        format!("{checked} instance/T pairs, smallest margin {worst_margin:.3e}"),
    )
}

fn criterion_2() -> Outcome {
    let instances = regret_instances();
    let (mut checked, mut worst_margin) = (0, f64::INFINITY);
    for (k, inst) in instances.iter().enumerate() {
        for rounds in [100, 1000] {
            for eta in [0.05, 0.2] {
                let played = mwu_play(inst, rounds, eta, k as u64);
                let lhs = played_bottleneck(&inst.rows, &played, inst.m);
                let rhs = (1.0 + eta) * brute_tau(&inst.rows) + (inst.m as f64).ln() / (eta * rounds as f64) + 1e-9;
                worst_margin = worst_margin.min(rhs - lhs);
                checked += 1;
            }
        }
    }
    outcome(
        worst_margin >= 0.0,
        format!("{checked} instance/T/eta triples, smallest margin {worst_margin:.3e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = rng_for(3);
    let rounds = 2000;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let m = 2 + rng.below(7);
        let n = 2 + rng.below(15);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.unit_f64()).collect()).collect();
        let inst = Instance { rows, m };
        let mwu = played_bottleneck(&inst.rows, &mwu_play(&inst, rounds, eta_default(m, rounds), k), m);

        let table = TableLosses::new(inst.rows.clone()).unwrap();
        let mut problem = SimplexMixture::new((0..n).collect::<Vec<usize>>(), &table).unwrap();
        let pgd = run_infinite_robust(&mut problem, &ProbabilitySimplex { dim: m }, rounds, 0.0, k).unwrap();
        let pgd = played_bottleneck(&inst.rows, &pgd.solutions, m);
        worst = worst.max((pgd - mwu).abs());
    }
    outcome(worst <= 0.05, format!("20 instances, largest |PGD - MWU| = {worst:.4}"))
}

/// Raw coverage instance: element weights and the elements each item covers.
struct RawCoverage {
    weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
}

impl RawCoverage {
    /// Between `lo` and `hi` elements, inclusive.
    fn random(rng: &mut SplitMix64, items: usize, lo: usize, hi: usize) -> Self {
        let elements = lo + rng.below(hi - lo + 1);
        let weights = (0..elements).map(|_| rng.uniform(0.0, 1.0)).collect();
        let density = rng.uniform(0.1, 0.6);
        let covers = (0..items)
            .map(|_| (0..elements).filter(|_| rng.bernoulli(density)).collect())
            .collect();
        Self { weights, covers }
    }

    fn objective(&self) -> CoverageObjective<f64> {
        CoverageObjective::new(self.weights.clone(), self.covers.clone()).unwrap()
    }

    fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Normalized covered weight of the item mask.
    fn value(&self, mask: u32) -> f64 {
        let mut hit = vec![false; self.weights.len()];
        for (j, c) in self.covers.iter().enumerate() {
            if mask >> j & 1 == 1 {
                c.iter().for_each(|&e| hit[e] = true);
            }
        }
        let covered: f64 = self.weights.iter().zip(&hit).filter(|(_, &h)| h).map(|(w, _)| w).sum();
        if self.total() > 0.0 {
            covered / self.total()
        } else {
            0.0
        }
    }

    /// Normalized `Σ_e w_e min(1, Σ_{j covers e} x_j)`.
    fn relaxed(&self, x: &[f64]) -> f64 {
        let mut load = vec![0.0; self.weights.len()];
        for (j, c) in self.covers.iter().enumerate() {
            c.iter().for_each(|&e| load[e] += x[j]);
        }
        let v: f64 = self.weights.iter().zip(&load).map(|(w, l)| w * l.min(1.0)).sum();
        if self.total() > 0.0 {
            v / self.total()
        } else {
            0.0
        }
    }
}

fn mask_of(set: &ItemSet) -> u32 {
    set.iter().fold(0, |m, j| m | 1 << j)
}

fn criterion_4() -> Outcome {
    let mut rng = rng_for(4);
    let bound = 1.0 - (-1.0f64).exp();
    let (mut violations, mut worst_ratio) = (0, f64::INFINITY);
    for _ in 0..250 {
        let n = 1 + rng.below(12);
        let k = 1 + rng.below(4.min(n));
        let m = 1 + rng.below(3);
        let raws: Vec<RawCoverage> = (0..m).map(|_| RawCoverage::random(&mut rng, n, 1, 20)).collect();
        let w = WeightVector64::normalized((0..m).map(|_| rng.uniform(0.01, 1.0)).collect()).unwrap();
        let objs: Vec<_> = raws.iter().map(RawCoverage::objective).collect();
        let mix = |mask: u32| raws.iter().enumerate().map(|(i, r)| w.get(i) * r.value(mask)).sum::<f64>();
        let greedy = mix(mask_of(&greedy_oracle(&objs, &w, k).unwrap()));
        let opt = (0u32..1 << n)
            .filter(|s| s.count_ones() as usize <= k)
            .map(mix)
            .fold(0.0, f64::max);
        if greedy < bound * opt - 1e-12 {
            violations += 1;
        }
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(greedy / opt);
        }
    }
    outcome(
        violations == 0,
        format!("250 instances, {violations} violations, worst greedy/OPT {worst_ratio:.4}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rng_for(5);
    let mut exact_gap = 0.0f64;
    for _ in 0..60 {
        let n = 1 + rng.below(10);
        let raw = RawCoverage::random(&mut rng, n, 1, 15);
        let obj = raw.objective();
        for mask in 0u32..1 << n {
            let x: Vec<f64> = (0..n).map(|j| (mask >> j & 1) as f64).collect();
            exact_gap = exact_gap.max((obj.relaxation(&x) - raw.value(mask)).abs());
            let set = ItemSet::new((0..n).filter(|j| mask >> j & 1 == 1).collect()).unwrap();
            exact_gap = exact_gap.max((obj.value(&set) - raw.value(mask)).abs());
        }
    }
    let exact_ok = exact_gap <= 1e-12;

    let (rounds, steps) = (200, 200);
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 0..20u64 {
        let n = 1 + rng.below(3);
        let budget = 1 + rng.below(n);
        let m = 2 + rng.below(3);
        let raws: Vec<RawCoverage> = (0..m).map(|_| RawCoverage::random(&mut rng, n, 2, 6)).collect();
        let objs: Vec<_> = raws.iter().map(RawCoverage::objective).collect();
        let robust = robust_coverage_fractional(&objs, budget, rounds, steps, k).unwrap();
        let value = robust.worst_case_value(&objs);

        let worst_at = |x: &[f64]| raws.iter().map(|r| r.relaxed(x)).fold(f64::INFINITY, f64::min);
        let mut grid = 0.0f64;
        let ticks = 101usize;
        for code in 0..ticks.pow(n as u32) {
            let x: Vec<f64> = (0..n).map(|d| (code / ticks.pow(d as u32) % ticks) as f64 * 0.01).collect();
            if x.iter().sum::<f64>() <= budget as f64 + 1e-9 {
                grid = grid.max(worst_at(&x));
            }
        }
        let tol = (2.0 * (m as f64).ln() / rounds as f64).sqrt() + 1e-2;
        worst_excess = worst_excess.max((value - grid).abs() - tol);
    }
    outcome(
        exact_ok && worst_excess <= 0.0,
        format!("integral gap {exact_gap:.1e}; 20 grid instances, worst |robust - grid| minus tolerance {worst_excess:.4}"),
    )
}

fn base_config(kind: ExperimentKind, runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        seed: MASTER,
        runs,
        output_dir: None,
        influence: None,
        learning: None,
        synthetic_regret: None,
        coverage: None,
        base_dir: PathBuf::new(),
    }
}

fn complete_a(runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        influence: Some(InfluenceParams {
            complete_nodes: Some(100),
            edge_list: None,
            objectives: 50,
            edge_probability: 0.015,
            budget: 2,
            rounds: 200,
            eta: None,
        }),
        ..base_config(ExperimentKind::Influence, runs)
    }
}

fn criterion_6() -> Outcome {
    let report = run_experiment(&complete_a(10)).unwrap();
    let mean = |method: &str, metric: &str| report.mean(method, metric).unwrap();
    let robust = mean("robust", "bottleneck");
    let baselines = [
        ("individual", mean("individual", "bottleneck")),
        ("uniform-greedy", mean("uniform-greedy", "bottleneck")),
        ("perturbed", mean("perturbed", "bottleneck")),
    ];
    let best = baselines.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let ratio = robust / best;
    let exhaustive = mean("robust", "exhaustive_ratio");
    let passed = baselines.iter().all(|b| robust > b.1) && ratio >= 1.2 && (0.5..=0.95).contains(&exhaustive);
    outcome(
        passed,
        format!(
            "robust {robust:.2} vs individual {:.2} / uniform {:.2} / perturbed {:.2}, ratio {ratio:.3}, exhaustive ratio {exhaustive:.3}",
            baselines[0].1, baselines[1].1, baselines[2].1
        ),
    )
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-10k")
}

#[allow(clippy::too_many_arguments)]
fn learning_config(
    runs: usize,
    train: usize,
    validation: usize,
    test: usize,
    set: &str,
    rounds: usize,
    steps: usize,
    hidden: usize,
    gammas: Vec<f64>,
) -> ExperimentConfig {
    ExperimentConfig {
        learning: Some(LearningParams {
            images: data_dir().join("images-idx3-ubyte.gz"),
            labels: data_dir().join("labels-idx1-ubyte.gz"),
            train,
            validation,
            test,
            corruption_set: set.to_string(),
            rounds,
            gammas,
            methods: vec![MethodName::Hybrid, MethodName::Composite],
            baselines: true,
            learning_rate: 0.5,
            steps,
            batch_size: 100,
            hidden,
        }),
        ..base_config(ExperimentKind::Learning, runs)
    }
}

fn criterion_7() -> Vec<(String, Outcome)> {
    let cfg = learning_config(3, 2000, 500, 1000, "pixel", 10, 200, 64, vec![0.5, 0.1]);
    let report: RunReport = run_experiment(&cfg).unwrap();
    let ind = |method: &str| report.mean(method, "individual").unwrap();
    let (hybrid, composite, uniform) = (ind("hybrid-g0.5"), ind("composite-g0.5"), ind("uniform"));
    let (even, best) = (ind("even-split"), ind("best-individual"));
    let a = outcome(
        hybrid < uniform && composite < uniform && uniform < even && uniform < best,
        format!(
            "individual bottleneck: hybrid {hybrid:.4}, composite {composite:.4}, uniform {uniform:.4}, even split {even:.4}, best individual {best:.4}"
        ),
    );

    let jensen: Vec<_> = report.checks.iter().filter(|c| c.name.starts_with("jensen/")).collect();
    let broken = jensen.iter().filter(|c| !c.passed()).count();
    let b = outcome(
        broken == 0 && !jensen.is_empty(),
        format!("{} ensemble <= individual checks, {broken} broken", jensen.len()),
    );

    let drift = |method: &str| report.mean(method, "early_drift").unwrap();
    let pairs = [
        ("hybrid", drift("hybrid-g0.1"), drift("hybrid-g0.5")),
        ("composite", drift("composite-g0.1"), drift("composite-g0.5")),
    ];
    let c = outcome(
        pairs.iter().all(|p| p.1 > p.2),
        pairs
            .iter()
            .map(|p| format!("{} early drift g0.1 {:.2e} vs g0.5 {:.2e}", p.0, p.1, p.2))
            .collect::<Vec<_>>()
            .join("; "),
    );
    vec![("7a".into(), a), ("7b".into(), b), ("7c".into(), c)]
}

/// Largest relative error of `grad` against central differences of `objective` on `probes` coordinates.
fn fd_error(
    params: &MlpParams<f64>,
    grad: &MlpParams<f64>,
    objective: &dyn Fn(&MlpParams<f64>) -> f64,
    probes: usize,
    rng: &mut SplitMix64,
) -> f64 {
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let i = rng.below(params.num_params());
        let mut plus = params.clone();
        plus.flat_set(i, params.flat_get(i) + eps);
        let mut minus = params.clone();
        minus.flat_set(i, params.flat_get(i) - eps);
        let numeric = (objective(&plus) - objective(&minus)) / (2.0 * eps);
        let analytic = grad.flat_get(i);
        let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    worst
}

fn mean_ce(p: &MlpParams<f64>, rows: &Array2<f64>, labels: &[u8]) -> f64 {
    rows.rows()
        .into_iter()
        .zip(labels)
        .map(|(r, &y)| -p.forward(r.as_slice().unwrap()).unwrap()[y as usize].ln())
        .sum::<f64>()
        / labels.len() as f64
}

fn criterion_8() -> Outcome {
    let mut rng = rng_for(8);
    let (batch, hidden) = (8, 16);
    let cset = CorruptionSet::mixed();
    let images: Vec<Image> = (0..batch)
        .map(|_| Image::new(28, 28, (0..784).map(|_| rng.unit_f64() as f32).collect()).unwrap())
        .collect();
    let labels: Vec<u8> = (0..batch).map(|_| rng.below(10) as u8).collect();
    let corrupt = |img: &Image, i: usize, seed: u64| -> Vec<f64> {
        apply_corruption(img, &cset.specs[i], seed).unwrap().pixels().iter().map(|&p| p as f64).collect()
    };
    let params = MlpParams::<f64>::init(784, hidden, 10, rng.next_u64()).unwrap();

    // Hybrid: each image carries one sampled corruption, weight 1/B.
    let picks: Vec<usize> = (0..batch).map(|_| rng.below(cset.m())).collect();
    let hybrid_rows = Array2::from_shape_vec(
        (batch, 784),
        images.iter().zip(&picks).enumerate().flat_map(|(n, (img, &i))| corrupt(img, i, n as u64)).collect(),
    )
    .unwrap();
    let (_, hybrid_grad) = params
        .loss_and_grad(hybrid_rows.view(), &labels, &vec![1.0 / batch as f64; batch])
        .unwrap();
    let hybrid_obj = |p: &MlpParams<f64>| mean_ce(p, &hybrid_rows, &labels);
    let hybrid_err = fd_error(&params, &hybrid_grad, &hybrid_obj, 50, &mut rng);

    // Composite: Σ_i w_i · mean CE on copy i through one parameter set.
    let w = WeightVector64::normalized((0..cset.m()).map(|_| rng.uniform(0.05, 1.0)).collect()).unwrap();
    let copies: Vec<Array2<f64>> = (0..cset.m())
        .map(|i| {
            Array2::from_shape_vec(
                (batch, 784),
                images.iter().enumerate().flat_map(|(n, img)| corrupt(img, i, n as u64)).collect(),
            )
            .unwrap()
        })
        .collect();
    let stacked = ndarray::concatenate(Axis(0), &copies.iter().map(|c| c.view()).collect::<Vec<_>>()).unwrap();
    let stacked_labels: Vec<u8> = (0..cset.m()).flat_map(|_| labels.iter().copied()).collect();
    let row_weights: Vec<f64> = (0..cset.m())
        .flat_map(|i| std::iter::repeat_n(w.get(i) / batch as f64, batch))
        .collect();
    let (_, composite_grad) = params.loss_and_grad(stacked.view(), &stacked_labels, &row_weights).unwrap();
    let composite_obj = |p: &MlpParams<f64>| {
        copies
            .iter()
            .enumerate()
            .map(|(i, c)| w.get(i) * mean_ce(p, c, &labels))
            .sum::<f64>()
    };
    let composite_err = fd_error(&params, &composite_grad, &composite_obj, 50, &mut rng);

    outcome(
        hybrid_err < 1e-4 && composite_err < 1e-4,
        format!("50 probes each, worst relative error hybrid {hybrid_err:.2e}, composite {composite_err:.2e}"),
    )
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let configs = vec![
        ExperimentConfig {
            synthetic_regret: Some(SyntheticRegretParams {
                objectives: 5,
                solutions: 12,
                rounds: 300,
                eta: None,
            }),
            ..base_config(ExperimentKind::SyntheticRegret, 3)
        },
        ExperimentConfig {
            coverage: Some(CoverageParams {
                objectives: 3,
                items: 8,
                elements: 20,
                budget: 2,
                rounds: 50,
                ascent_steps: 50,
                cover_probability: 0.3,
                roundings: 20,
            }),
            ..base_config(ExperimentKind::Coverage, 2)
        },
        complete_a(2),
        learning_config(2, 300, 100, 100, "mixed", 3, 10, 8, vec![0.5, 0.1]),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for cfg in configs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let mut c = cfg.clone();
            c.output_dir = Some(d.path().to_path_buf());
            execute(&c).unwrap();
        }
        let (a, b) = (files_of(dirs[0].path()), files_of(dirs[1].path()));
        assert_eq!(a.len(), b.len());
        for (fa, fb) in a.iter().zip(&b) {
            compared += 1;
            if fa != fb {
                differing.push(format!("{}/{}", cfg.kind.name(), fa.0));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!("{compared} files compared across 4 experiment kinds, differing: {differing:?}"),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", "regret bound, default step", || vec![("1".into(), criterion_1())]),
        ("2", "regret bound, explicit step", || vec![("2".into(), criterion_2())]),
        ("3", "projected gradient adversary vs multiplicative weights", || vec![("3".into(), criterion_3())]),
        ("4", "greedy approximation guarantee", || vec![("4".into(), criterion_4())]),
        ("5", "coverage relaxation and robust fractional coverage", || vec![("5".into(), criterion_5())]),
        ("6", "influence, complete graph A", || vec![("6".into(), criterion_6())]),
        ("7", "corrupted-digit learning, reduced scale", criterion_7),
        ("8", "gradient check", || vec![("8".into(), criterion_8())]),
        ("9", "byte-identical reruns", || vec![("9".into(), criterion_9())]),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let results = run();
        let secs = start.elapsed().as_secs_f64();
        for (label, o) in results {
            let verdict = if o.passed { "PASS" } else { "FAIL" };
            println!("criterion {label:<3} {verdict}  {name} [{secs:.1}s]: {}", o.detail);
            failed += usize::from(!o.passed);
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion line(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
