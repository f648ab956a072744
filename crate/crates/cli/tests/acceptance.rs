//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every expected value is either trivial arithmetic or frozen from an
//! independent oracle computed in this file (exhaustive enumeration,
//! integer DP counting, finite differences inside the library harness).

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use compsplit_core::ain::{
    grad_invariance_check, param_overhead, AinNet, Blueprint, NetDims, ParamDescriptor,
};
use compsplit_core::assets;
use compsplit_core::dataset::{synth_grid, DatasetTable};
use compsplit_core::factor::{FactorSpace, FactorSpec};
use compsplit_core::fpe::{bind, fit_gaussian, kernel_profile, BasePhasor};
use compsplit_core::ladder::{ladder_similarity, LadderMode, LadderParams};
use compsplit_core::orthotopic::{
    orthotopic_split, ExclusionInterval, ExclusionSpec, SubspaceSelection,
};
use compsplit_core::pairwise::{pairwise_split, solve_pair_thresholds, PairThresholds};
use compsplit_core::verify::{check_compliance, run_count, wio};

fn criterion(n: usize, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "[{}] criterion {n} ({name}): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn uniform_space(cards: &[usize]) -> FactorSpace {
    let factors = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| FactorSpec {
            name: format!("f{i}"),
            cardinality: c,
            task_relevant: true,
            ordered: true,
        })
        .collect();
    FactorSpace::new(factors).unwrap()
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_01_compliance_sweep() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let mut checked = 0usize;
    for _ in 0..100 {
        let i = rng.random_range(3..=6usize);
        let cards: Vec<usize> = (0..i).map(|_| rng.random_range(3..=6)).collect();
        let table = synth_grid(&uniform_space(&cards), 1, 0).unwrap();
        for c in 0..i {
            let split = orthotopic_split(
                &table,
                c,
                &ExclusionSpec::corner(0.0),
                &SubspaceSelection::All,
            )
            .unwrap();
            let report = check_compliance(&split, &table, c).unwrap();
            assert!(
                report.satisfied && report.violations.is_empty(),
                "cards {cards:?} c={c}: {report:?}"
            );
            assert!(report.kappa.min_kappa.unwrap() >= c);
            assert!(report.kappa.max_kappa.unwrap() < i);
            checked += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = elapsed < 60.0;
    assert!(
        criterion(
            1,
            "compliance sweep",
            pass,
            &format!("{checked} splits over 100 random spaces, zero violations, {elapsed:.2}s"),
        ),
        "sweep exceeded the 60s budget: {elapsed:.2}s"
    );
}

// ---------------------------------------------------------------- 2

#[test]
fn criterion_02_canonical_3x3x3_goldens() {
    let table = synth_grid(&uniform_space(&[3, 3, 3]), 1, 0).unwrap();
    let expectations = [
        (0usize, 8usize, 0usize, 2usize),
        (1, 20, 1, 2),
        (2, 26, 2, 2),
    ];
    for (c, train, min_k, max_k) in expectations {
        let split = orthotopic_split(
            &table,
            c,
            &ExclusionSpec::corner(0.0),
            &SubspaceSelection::All,
        )
        .unwrap();
        assert_eq!(split.train_ids.len(), train, "c={c}");
        let report = check_compliance(&split, &table, c).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.kappa.min_kappa, Some(min_k), "c={c}");
        assert_eq!(report.kappa.max_kappa, Some(max_k), "c={c}");

        // independent brute-force kappa oracle over raw id sets
        let test_ids: HashSet<&str> = split.test_ids.iter().map(String::as_str).collect();
        let train_rows: Vec<&[u16]> = table
            .rows()
            .iter()
            .filter(|r| !test_ids.contains(r.id.as_str()))
            .map(|r| r.assignment.values())
            .collect();
        let mut oracle_min = usize::MAX;
        let mut oracle_max = 0;
        for row in table.rows() {
            if !test_ids.contains(row.id.as_str()) {
                continue;
            }
            let k = train_rows
                .iter()
                .map(|t| {
                    t.iter()
                        .zip(row.assignment.values())
                        .filter(|(a, b)| a == b)
                        .count()
                })
                .max()
                .unwrap();
            oracle_min = oracle_min.min(k);
            oracle_max = oracle_max.max(k);
        }
        assert_eq!((oracle_min, oracle_max), (min_k, max_k), "c={c}");
    }
    assert!(criterion(
        2,
        "canonical (3,3,3) goldens",
        true,
        "train 8/20/26, kappa [0,2]/[1,2]/[2,2], oracle-confirmed",
    ));
}

// ---------------------------------------------------------------- 3

/// Independent oracle: integer DP over the number of assignments with
/// exactly k coordinates inside the excluded interval [t, n); the train
/// side keeps assignments with at most c excluded coordinates.
fn dp_train_count(cards_and_thresholds: &[(usize, usize)], c: usize) -> u64 {
    let mut dp = vec![1u64];
    for &(n, t) in cards_and_thresholds {
        let mut next = vec![0u64; dp.len() + 1];
        for (k, &count) in dp.iter().enumerate() {
            next[k] += count * t as u64;
            next[k + 1] += count * (n - t) as u64;
        }
        dp = next;
    }
    dp[..=c].iter().sum()
}

/// Exact train counts per (dataset, c) on the full task-relevant grid,
/// frozen from the DP oracle. None marks the row whose shipped threshold
/// is out of range (cars3d c=0: orientation threshold 26 of 24).
type GoldenRows = &'static [(usize, Option<u64>)];
const SHIPPED_THRESHOLD_GOLDENS: &[(&str, GoldenRows)] = &[
    (
        "dsprites",
        &[
            (0, Some(7200)),
            (1, Some(5964)),
            (2, Some(11520)),
            (3, Some(10592)),
        ],
    ),
    ("iraven", &[(0, Some(180)), (1, Some(180)), (2, Some(188))]),
    ("cars3d", &[(0, None), (1, Some(10914)), (2, Some(10008))]),
    (
        "clevr",
        &[(0, Some(28)), (1, Some(88)), (2, Some(93)), (3, Some(116))],
    ),
    (
        "shapes3d",
        &[
            (0, Some(15309)),
            (1, Some(18228)),
            (2, Some(19880)),
            (3, Some(19256)),
            (4, Some(19904)),
        ],
    ),
    (
        "mpi3d",
        &[
            (0, Some(144400)),
            (1, Some(282336)),
            (2, Some(327252)),
            (3, Some(384720)),
            (4, Some(307200)),
            (5, Some(366300)),
        ],
    ),
];

#[test]
fn criterion_03_shipped_threshold_fractions() {
    let mut out_of_band: Vec<String> = Vec::new();
    for (dataset, rows) in SHIPPED_THRESHOLD_GOLDENS {
        let space = assets::builtin_space(dataset)
            .unwrap()
            .restrict_to_task_relevant();
        let table = synth_grid(&space, 1, 0).unwrap();
        let n = table.len() as f64;
        for &(c, golden) in rows.iter() {
            let spec = match assets::threshold_spec(dataset, c, &space) {
                Ok(spec) => spec,
                Err(err) => {
                    assert!(
                        golden.is_none(),
                        "{dataset} c={c} unexpectedly failed: {err}"
                    );
                    out_of_band.push(format!("{dataset} c={c}: unresolvable thresholds ({err})"));
                    continue;
                }
            };
            assert!(golden.is_some(), "{dataset} c={c} unexpectedly resolved");
            let split = orthotopic_split(&table, c, &spec, &SubspaceSelection::All).unwrap();
            let train = split.train_ids.len() as u64;

            // dual route: independent DP count from the raw thresholds
            let row = assets::threshold_rows(dataset)
                .unwrap()
                .iter()
                .find(|r| r.c == c)
                .unwrap();
            let ct: Vec<(usize, usize)> = space
                .factors()
                .iter()
                .map(|f| (f.cardinality, row.thresholds[&f.name]))
                .collect();
            assert_eq!(
                dp_train_count(&ct, c),
                train,
                "{dataset} c={c} oracle mismatch"
            );
            assert_eq!(Some(train), golden, "{dataset} c={c} golden mismatch");

            let fraction = train as f64 / n;
            if dataset == &"shapes3d" && c == 1 {
                assert!(
                    (fraction - 0.569625).abs() <= 1e-12,
                    "shapes3d c=1 spot check: {fraction}"
                );
            }
            if !(0.50..=0.70).contains(&fraction) {
                out_of_band.push(format!("{dataset} c={c}: train fraction {fraction:.6}"));
            }
        }
    }
    let pass = out_of_band.is_empty();
    criterion(
        3,
        "shipped threshold fractions",
        pass,
        &if pass {
            "all rows within [0.50, 0.70], goldens oracle-confirmed".to_string()
        } else {
            format!(
                "goldens oracle-confirmed exactly, but {} of 25 rows fall outside [0.50, 0.70]",
                out_of_band.len()
            )
        },
    );
    assert!(
        pass,
        "shipped threshold rows outside the [0.50, 0.70] train-fraction band:\n  {}",
        out_of_band.join("\n  ")
    );
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_04_nested_monotonicity() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    for trial in 0..50 {
        let i = rng.random_range(3..=5usize);
        let cards: Vec<usize> = (0..i).map(|_| rng.random_range(3..=6)).collect();
        let table = synth_grid(&uniform_space(&cards), 1, 0).unwrap();
        let v = [0.0, 0.33, 0.66, 1.0][rng.random_range(0..4usize)];
        let spec = ExclusionSpec::corner(v);
        let mut previous: Option<HashSet<String>> = None;
        for c in 0..i {
            let split = orthotopic_split(&table, c, &spec, &SubspaceSelection::All).unwrap();
            let test: HashSet<String> = split.test_ids.iter().cloned().collect();
            if let Some(prev) = &previous {
                assert!(
                    test.is_subset(prev),
                    "trial {trial} cards {cards:?} v={v}: test({c}) not nested"
                );
            }
            previous = Some(test);
        }
    }
    assert!(criterion(
        4,
        "nested monotonicity",
        true,
        "test(c) contains test(c+1) on 50 random grids, exact set containment",
    ));
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_pairwise_solver() {
    let ten = uniform_space(&[10, 10]);
    let balanced = solve_pair_thresholds(&ten, (0, 1), 0.10, 1.0).unwrap();
    assert_eq!(balanced.excluded, (3, 3));
    assert!((balanced.achieved_fraction - 0.09).abs() < 1e-15);
    let exact = solve_pair_thresholds(&ten, (0, 1), 0.10, 0.0).unwrap();
    assert_eq!(exact.excluded, (2, 5));
    assert!((exact.achieved_fraction - 0.10).abs() < 1e-15);

    // every pair of every shipped schema: the weight-0 solve must land
    // within +/-0.02 of the target whenever any candidate does
    let mut pairs_checked = 0usize;
    for name in assets::builtin_schema_names() {
        let space = assets::builtin_space(name).unwrap();
        let tr = space.task_relevant_indices();
        for (ai, &a) in tr.iter().enumerate() {
            for &b in &tr[ai + 1..] {
                let n_a = space.factor(a).cardinality;
                let n_b = space.factor(b).cardinality;
                let in_band_exists = (1..n_a).any(|ka| {
                    (1..n_b).any(|kb| ((ka * kb) as f64 / (n_a * n_b) as f64 - 0.10).abs() <= 0.02)
                });
                let solved = solve_pair_thresholds(&space, (a, b), 0.10, 0.0).unwrap();
                if in_band_exists {
                    assert!(
                        (solved.achieved_fraction - 0.10).abs() <= 0.02,
                        "{name} pair ({a},{b}): achieved {}",
                        solved.achieved_fraction
                    );
                }
                pairs_checked += 1;
            }
        }
    }
    assert!(criterion(
        5,
        "pairwise solver",
        true,
        &format!("goldens (3,3)@w=1 and (2,5)@w=0; band held on {pairs_checked} schema pairs"),
    ));
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_06_pairwise_orthotopic_equivalence() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    for trial in 0..20 {
        let i = rng.random_range(2..=5usize);
        let cards: Vec<usize> = (0..i).map(|_| rng.random_range(2..=6)).collect();
        let space = uniform_space(&cards);
        let table = synth_grid(&space, 1, 0).unwrap();
        let a = rng.random_range(0..i);
        let b = (a + 1 + rng.random_range(0..i - 1)) % i;
        let (a, b) = (a.min(b), a.max(b));
        let k_a = rng.random_range(1..cards[a]);
        let k_b = rng.random_range(1..cards[b]);
        let thresholds = PairThresholds {
            pair: (a, b),
            excluded: (k_a, k_b),
            achieved_fraction: (k_a * k_b) as f64 / (cards[a] * cards[b]) as f64,
        };
        let pw = pairwise_split(&table, (a, b), &thresholds).unwrap();

        let restricted = space.with_task_relevant(&[a, b]).unwrap();
        let rtable = DatasetTable::new(restricted.clone(), table.rows().to_vec()).unwrap();
        let intervals = vec![
            ExclusionInterval::new(a, cards[a] - k_a, k_a, &restricted).unwrap(),
            ExclusionInterval::new(b, cards[b] - k_b, k_b, &restricted).unwrap(),
        ];
        let ortho = orthotopic_split(
            &rtable,
            1,
            &ExclusionSpec::Explicit { intervals },
            &SubspaceSelection::All,
        )
        .unwrap();
        assert_eq!(pw.train_ids, ortho.train_ids, "trial {trial}");
        assert_eq!(pw.test_ids, ortho.test_ids, "trial {trial}");
    }
    assert!(criterion(
        6,
        "pairwise/orthotopic equivalence",
        true,
        "id-identical on 20 random grids",
    ));
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_07_run_count_accounting() {
    for i in 2..=10usize {
        let rc = run_count(i, 1.min(i)).unwrap();
        assert_eq!(rc.orthotopic, 1, "I={i}");
        assert_eq!(rc.pairwise, (i * (i - 1) / 2) as u64, "I={i}");
    }
    assert!(criterion(
        7,
        "run-count accounting",
        true,
        "orthotopic 1, pairwise C(I,2) for I in 2..10, exact",
    ));
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_08_ladder_curve() {
    let started = Instant::now();
    let params = LadderParams {
        attributes: 6,
        cardinality: 8,
        c_values: None,
        mode: LadderMode::Concat,
        dim: 2048,
        holistic_dim: 1024,
        trials: 100,
        seed: 0,
    };
    let curve = ladder_similarity(&params).unwrap();
    for p in &curve.points {
        let expected = p.c as f64 / 6.0;
        let band = 3.0 * p.se.max(1e-12);
        assert!(
            (p.mean - expected).abs() <= band,
            "c={}: mean {} vs {} (3se {})",
            p.c,
            p.mean,
            expected,
            band
        );
    }
    let last = curve.points.last().unwrap();
    assert!(
        (last.mean - 1.0).abs() <= 1e-12,
        "c=6 endpoint: {}",
        last.mean
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        criterion(
            8,
            "ladder curve",
            elapsed < 30.0,
            &format!("per-c mean within 3se of c/6, endpoints exact, {elapsed:.2}s"),
        ),
        "ladder exceeded the 30s budget"
    );
}

// ---------------------------------------------------------------- 9

#[test]
fn criterion_09_fpe_kernel_properties() {
    // binding homomorphism on 100 random value pairs
    let base = BasePhasor::sample(1024, 0.5, 9).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for _ in 0..100 {
        let a = rng.random_range(-4.0..4.0);
        let b = rng.random_range(-4.0..4.0);
        let bound = bind(&base.encode(a, 1.0), &base.encode(b, 1.0)).unwrap();
        let direct = base.encode(a + b, 1.0);
        for (x, y) in bound.iter().zip(&direct) {
            assert!((x - y).abs() <= 1e-10, "pair ({a}, {b})");
        }
    }

    // K(0) = 1 to 1e-12
    let deltas: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.1).collect();
    let zero_at = deltas.iter().position(|&d| d == 0.0).unwrap();
    let curve = kernel_profile(&base, 1.0, &deltas);
    assert!((curve.values[zero_at] - 1.0).abs() <= 1e-12);

    // Gaussian fit quality and width monotonicity, 10 seeds per setting
    let mut widths = Vec::new();
    for &std in &[0.2, 0.5, 1.0] {
        let mut sigmas = Vec::new();
        let mut r2s = Vec::new();
        for seed in 0..10 {
            let b = BasePhasor::sample(1024, std, seed).unwrap();
            let fit = fit_gaussian(&kernel_profile(&b, 1.0, &deltas)).unwrap();
            sigmas.push(fit.sigma);
            r2s.push(fit.r_squared);
        }
        if (std - 0.5).abs() < 1e-12 {
            let mean_r2 = r2s.iter().sum::<f64>() / r2s.len() as f64;
            assert!(mean_r2 >= 0.95, "mean r2 {mean_r2} at phase std 0.5");
        }
        widths.push(sigmas.iter().sum::<f64>() / sigmas.len() as f64);
    }
    assert!(
        widths[0] > widths[1] && widths[1] > widths[2],
        "fitted sigma not strictly decreasing: {widths:?}"
    );
    assert!(criterion(
        9,
        "FPE kernel",
        true,
        "binding <= 1e-10 on 100 pairs, K(0)=1, r2 >= 0.95, width monotone",
    ));
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_ain_gradient_invariance() {
    let dims = NetDims {
        input: 8,
        encoded: 4,
        hidden: 16,
        compressed: 4,
        classes: vec![3, 4, 3],
    };
    for seed in 0..10 {
        let net = AinNet::init(dims.clone(), seed).unwrap();
        let report = grad_invariance_check(&net, 10, seed).unwrap();
        assert!(
            report.cross_zero,
            "seed {seed}: cross gradients not exactly zero"
        );
        assert_eq!(report.max_cross_norm, 0.0, "seed {seed}");
        assert!(
            report.min_own_norm > 1e-8,
            "seed {seed}: own norm {}",
            report.min_own_norm
        );
        assert!(
            report.fd_max_rel_error <= 1e-5,
            "seed {seed}: fd error {}",
            report.fd_max_rel_error
        );
        assert!(report.pass);
    }
    let control = AinNet::init_with_blueprint(dims, Blueprint::Monolithic, 0).unwrap();
    let report = grad_invariance_check(&control, 10, 0).unwrap();
    assert!(
        report.max_cross_norm > 0.0,
        "negative control produced zero cross norms"
    );
    assert!(!report.pass);
    assert!(criterion(
        10,
        "AIN gradient invariance",
        true,
        "cross grads bit-zero over 10 nets x 10 samples, fd <= 1e-5, control fails",
    ));
}

// ---------------------------------------------------------------- 11

#[test]
fn criterion_11_overhead_accounting() {
    for (e, m, h) in [
        (1u64, 1u64, 1u64),
        (100, 10_000, 10),
        (7, 333, 2),
        (50, 1_000_000, 128),
    ] {
        let mut prev: Option<(u64, u64)> = None;
        for p in 2..=8u64 {
            let r = param_overhead(&ParamDescriptor {
                encoder: e,
                meta: m,
                head: h,
                attributes: p,
            })
            .unwrap();
            assert!(r.ain < r.ed, "e={e} m={m} h={h} P={p}");
            if let Some((pa, pe)) = prev {
                assert_eq!(r.ain - pa, e + h, "ain slope at P={p}");
                assert_eq!(r.ed - pe, e + m + h, "ed slope at P={p}");
            }
            prev = Some((r.ain, r.ed));
        }
    }
    let r = param_overhead(&ParamDescriptor {
        encoder: 100,
        meta: 10_000,
        head: 10,
        attributes: 4,
    })
    .unwrap();
    assert_eq!((r.monolithic, r.ain, r.ed), (10_040, 10_440, 40_440));
    assert_eq!(format!("{:.2}%", r.ain_overhead * 100.0), "3.98%");
    assert_eq!(format!("{:.1}%", r.ed_overhead * 100.0), "302.8%");
    assert!(criterion(
        11,
        "overhead accounting",
        true,
        "ain < ed for P in 2..8, slopes e+h / e+m+h exact, worked example +3.98%/+302.8%",
    ));
}

// ---------------------------------------------------------------- 12

#[test]
fn criterion_12_wio_metric() {
    assert_eq!(wio(95.0, 80.0, 10.0).unwrap(), 93.0);
    for lambda in [1.0, 2.5, 10.0, 1000.0] {
        assert_eq!(wio(100.0, 100.0, lambda).unwrap(), 100.0);
    }
    assert!(criterion(
        12,
        "WIO metric",
        true,
        "(95,80,10) -> 93 and (100,100,*) -> 100, exact"
    ));
}

// ---------------------------------------------------------------- 13

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_compsplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_13_byte_identical_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let base = tmp.path();
    let grid = base.join("grid");
    let out = |name: &str| base.join(name).to_string_lossy().into_owned();

    let synth = run_cli(&[
        "synth",
        "--schema",
        "clevr",
        "--seed",
        "5",
        "--out",
        &out("grid"),
    ]);
    assert!(synth.status.success(), "{synth:?}");
    let grid_csv = grid.join("grid.csv").to_string_lossy().into_owned();

    // randomized commands, run twice with identical flags
    let commands: Vec<Vec<String>> = vec![
        vec![
            "split".into(),
            "orthotopic".into(),
            "--schema".into(),
            "clevr".into(),
            "--data".into(),
            grid_csv.clone(),
            "--c".into(),
            "1".into(),
            "--v".into(),
            "0.4".into(),
            "--selection".into(),
            "random-n".into(),
            "--n-orthotopes".into(),
            "2".into(),
            "--seed".into(),
            "9".into(),
        ],
        vec![
            "split".into(),
            "holdout".into(),
            "--schema".into(),
            "clevr".into(),
            "--data".into(),
            grid_csv.clone(),
            "--target-fraction".into(),
            "0.2".into(),
            "--seed".into(),
            "11".into(),
        ],
        vec![
            "ladder".into(),
            "--i".into(),
            "3".into(),
            "--cardinality".into(),
            "4".into(),
            "--dim".into(),
            "64".into(),
            "--trials".into(),
            "20".into(),
            "--seed".into(),
            "3".into(),
        ],
        vec![
            "fpe-kernel".into(),
            "--dim".into(),
            "128".into(),
            "--phase-std".into(),
            "0.5".into(),
            "--seed".into(),
            "7".into(),
        ],
        vec![
            "ain-gradcheck".into(),
            "--classes".into(),
            "3,3".into(),
            "--trials".into(),
            "2".into(),
            "--seed".into(),
            "13".into(),
        ],
    ];
    for (k, argv) in commands.iter().enumerate() {
        let dir_a = out(&format!("a{k}"));
        let dir_b = out(&format!("b{k}"));
        let mut run_a: Vec<&str> = argv.iter().map(String::as_str).collect();
        run_a.extend(["--out", &dir_a]);
        let mut run_b: Vec<&str> = argv.iter().map(String::as_str).collect();
        run_b.extend(["--out", &dir_b]);
        assert!(run_cli(&run_a).status.success(), "command {k} failed");
        assert!(run_cli(&run_b).status.success());
        assert_eq!(
            dir_bytes(Path::new(&dir_a)),
            dir_bytes(Path::new(&dir_b)),
            "command {k} not byte-identical across reruns"
        );

        // re-run from the embedded config of the first JSON output
        let json_file = dir_bytes(Path::new(&dir_a))
            .into_iter()
            .find(|(name, _)| name.ends_with(".json"))
            .unwrap();
        let value: serde_json::Value = serde_json::from_slice(&json_file.1).unwrap();
        let embedded: Vec<String> = value["run_config"]["argv"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let dir_c = out(&format!("c{k}"));
        let mut rerun: Vec<&str> = embedded.iter().map(String::as_str).collect();
        rerun.extend(["--out", &dir_c]);
        assert!(run_cli(&rerun).status.success());
        assert_eq!(
            dir_bytes(Path::new(&dir_a)),
            dir_bytes(Path::new(&dir_c)),
            "command {k} not byte-identical when re-run from its embedded config"
        );
    }

    // synth itself re-runs identically
    let grid2 = out("grid2");
    assert!(
        run_cli(&["synth", "--schema", "clevr", "--seed", "5", "--out", &grid2])
            .status
            .success()
    );
    assert_eq!(dir_bytes(&grid), dir_bytes(Path::new(&grid2)));

    assert!(criterion(
        13,
        "determinism",
        true,
        "synth, orthotopic, holdout, ladder, fpe-kernel, ain-gradcheck byte-identical on rerun and from embedded config",
    ));
}
