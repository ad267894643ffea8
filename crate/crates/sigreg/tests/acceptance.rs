//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line and
//! then asserts. A lock keeps them sequential so the timing check runs on an
//! otherwise idle process.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use sigreg::commands::{cmd_experiment, cmd_fit, cmd_simulate, FitArgs, PATHS_CSV, TARGETS_CSV};
use sigreg::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use sigreg_core::datagen::{simulate, PathModel, ResponseKind, SimSpec};
use sigreg_core::ridge::ridge_fit;
use sigreg_core::{
    batch_signatures, chen_concat, sig_dim, sig_len, signature, SampledPath, TruncatedSignature,
    DEFAULT_BUDGET,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn report(n: usize, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} [{name}]: {verdict} ({detail})");
    assert!(pass, "criterion {n} [{name}] failed: {detail}");
}

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn criterion_01_signature_sizes() {
    let _g = serial();
    let start = Instant::now();
    let table = [
        ((2, 1), 2),
        ((2, 2), 6),
        ((2, 5), 62),
        ((2, 7), 254),
        ((3, 2), 12),
        ((3, 5), 363),
        ((3, 7), 3279),
        ((6, 2), 42),
        ((6, 5), 9330),
        ((6, 7), 335922),
    ];
    let wrong: Vec<_> = table
        .iter()
        .filter(|((d, m), want)| sig_dim(*d, *m).ok() != Some(*want))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "signature sizing",
        wrong.is_empty() && secs < 1.0,
        format!("{} of 10 entries wrong, {secs:.3} s", wrong.len()),
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let _g = serial();
    let start = Instant::now();
    let mut r = common::rng(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(2..=3);
        let p = r.random_range(2..=5);
        let m = r.random_range(1..=4);
        let points = common::random_points(&mut r, d, p);
        let sig = signature(&common::polyline(&points), m).unwrap();
        for (w, v) in common::oracle_signature(&points, m, 400) {
            worst = worst.max((sig.get(&w).unwrap() - v).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "oracle equivalence",
        worst <= 1e-6 && secs < 120.0,
        format!("max abs gap {worst:.2e} over 100 polylines, {secs:.1} s"),
    );
}

#[test]
fn criterion_03_parabola() {
    let _g = serial();
    let p = 1000;
    let rows: Vec<[f64; 2]> = (0..p)
        .map(|i| {
            let t = i as f64 / (p - 1) as f64;
            [t, t * t]
        })
        .collect();
    let sig = signature(&SampledPath::from_rows(&rows, None).unwrap(), 2).unwrap();
    let e12 = (sig.get(&[1, 2]).unwrap() - 2.0 / 3.0).abs();
    let e21 = (sig.get(&[2, 1]).unwrap() - 1.0 / 3.0).abs();
    report(
        3,
        "analytic case",
        e12 <= 1e-4 && e21 <= 1e-4,
        format!("|S(1,2) - 2/3| = {e12:.2e}, |S(2,1) - 1/3| = {e21:.2e}"),
    );
}

fn random_path(r: &mut impl Rng, d: usize, p: usize) -> SampledPath {
    common::polyline(
        &(0..p)
            .map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect())
            .collect::<Vec<Vec<f64>>>(),
    )
}

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

#[test]
fn criterion_04_invariants() {
    let _g = serial();
    let start = Instant::now();
    let cases = 1000;
    let mut r = common::rng(44);
    let mut failures: Vec<&str> = Vec::new();
    let mut count = |ok: bool, name: &'static str| {
        if !ok && !failures.contains(&name) {
            failures.push(name);
        }
    };
    for _ in 0..cases {
        let d = r.random_range(1..=3);
        let p = r.random_range(2..=8);
        let m = r.random_range(0..=4);
        let path = random_path(&mut r, d, p);
        let s = signature(&path, m).unwrap();

        let b = signature(&random_path(&mut r, d, 4), m).unwrap();
        let c = signature(&random_path(&mut r, d, 4), m).unwrap();
        let left = chen_concat(&chen_concat(&s, &b).unwrap(), &c).unwrap();
        let right = chen_concat(&s, &chen_concat(&b, &c).unwrap()).unwrap();
        count(
            rel_close(left.coeffs(), right.coeffs(), 1e-12),
            "associativity",
        );

        let id = TruncatedSignature::identity(*s.shape());
        count(
            chen_concat(&s, &id).unwrap().coeffs() == s.coeffs()
                && chen_concat(&id, &s).unwrap().coeffs() == s.coeffs(),
            "identity",
        );

        let shift: Vec<f64> = (0..d).map(|_| r.random_range(-10.0..10.0)).collect();
        let moved: Vec<Vec<f64>> = path
            .rows()
            .map(|row| row.iter().zip(&shift).map(|(x, s)| x + s).collect())
            .collect();
        let sm = signature(&common::polyline(&moved), m).unwrap();
        count(rel_close(s.coeffs(), sm.coeffs(), 1e-12), "translation");

        let fine = signature(&path.subdivide(r.random_range(1..4)), m).unwrap();
        let mut t = 0.0;
        let times: Vec<f64> = (0..p)
            .map(|_| {
                t += r.random_range(0.01..1.0);
                t
            })
            .collect();
        let retimed = signature(&path.retime(times).unwrap(), m).unwrap();
        count(
            rel_close(s.coeffs(), fine.coeffs(), 1e-12)
                && rel_close(s.coeffs(), retimed.coeffs(), 1e-12),
            "subdivision",
        );

        if m >= 1 {
            let (first, last) = (path.row(0), path.row(p - 1));
            count(
                s.level(1)
                    .iter()
                    .enumerate()
                    .all(|(k, v)| (v - (last[k] - first[k])).abs() <= 1e-14 * v.abs().max(1.0)),
                "level one",
            );
        }

        let tv = path.total_variation();
        let mut fact = 1.0;
        let mut ok = s.coeffs()[0] == 1.0 && s.norm() <= tv.exp() * (1.0 + 1e-9);
        for k in 0..=m {
            if k > 0 {
                fact *= k as f64;
            }
            ok &= s.level_norm(k) <= tv.powi(k as i32) / fact * (1.0 + 1e-9);
        }
        count(ok, "norm bound");
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        4,
        "invariant suite",
        failures.is_empty() && secs < 120.0,
        format!("{cases} cases per property, violated: {failures:?}, {secs:.1} s"),
    );
}

fn toy_config(n: usize) -> ExperimentConfig {
    ExperimentConfig {
        n,
        seed: 2020,
        ..ExperimentConfig::defaults(ExperimentKind::ToyConvergence)
    }
}

#[test]
fn criterion_05_toy_convergence() {
    let _g = serial();
    let start = Instant::now();
    let big = run_experiment(&toy_config(500)).unwrap();
    let small = run_experiment(&toy_config(50)).unwrap();
    let hits = big.m_hats(2).iter().filter(|&&m| m == 5).count();
    let mut distinct = small.m_hats(2);
    distinct.sort_unstable();
    distinct.dedup();
    let secs = start.elapsed().as_secs_f64();
    report(
        5,
        "toy convergence",
        hits >= 18 && distinct.len() >= 3 && secs < 600.0,
        format!(
            "n=500: {hits}/20 runs with m_hat=5, histogram {:?}; n=50: histogram {:?}; {secs:.1} s",
            big.m_hat_histogram[&2], small.m_hat_histogram[&2]
        ),
    );
}

#[test]
fn criterion_06_dimension_jump() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let spec = SimSpec {
        n: 50,
        d: 2,
        p: 100,
        seed: 2020,
        model: PathModel::Polysinus,
        response: ResponseKind::Signature { m_star: 5 },
    };
    cmd_simulate(&spec, dir.path()).unwrap();
    let fit = cmd_fit(&FitArgs {
        paths: dir.path().join(PATHS_CSV),
        targets: dir.path().join(TARGETS_CSV),
        k_pen: None,
        kpen_auto: true,
        rho: 0.4,
        m_max: None,
        lambda: None,
        standardize: false,
        folds: 5,
        seed: 2020,
        budget: DEFAULT_BUDGET,
        output: dir.path().join("fit.json"),
    })
    .unwrap();
    let jump = fit.dimension_jump.as_ref().unwrap();
    let grid = &jump.kpen_grid;
    let boundaries: Vec<usize> = (1..jump.m_hats.len())
        .filter(|&j| jump.m_hats[j] != jump.m_hats[j - 1])
        .collect();
    let step = (grid[1] / grid[0]).log10();
    let at = (fit.k_pen / 2.0).log10();
    let gap = boundaries
        .iter()
        .map(|&b| ((grid[b].log10() - at) / step).abs())
        .fold(f64::INFINITY, f64::min);
    report(
        6,
        "dimension-jump calibration",
        gap <= 1.0 + 1e-9 && fit.m_hat <= 5,
        format!(
            "K_pen = {:.4}, jump at grid value {:.4} ({gap:.2} grid steps from a plateau boundary), \
             m_hat = {}, plateaus change at {} grid points",
            fit.k_pen,
            fit.k_pen / 2.0,
            fit.m_hat,
            boundaries.len()
        ),
    );
}

#[test]
fn criterion_07_gaussian_process_study() {
    let _g = serial();
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n: 300,
        train_fraction: 2.0 / 3.0,
        dims: vec![8],
        repetitions: 20,
        seed: 2020,
        ..ExperimentConfig::defaults(ExperimentKind::DimensionStudyGp)
    };
    let rep = run_experiment(&cfg).unwrap();
    let sig = rep.summary(8, "signature", "test_mse").unwrap().median;
    let fourier = rep.summary(8, "fourier", "test_mse").unwrap().median;
    let secs = start.elapsed().as_secs_f64();
    report(
        7,
        "GP dimension study",
        sig < fourier && secs < 900.0,
        format!(
            "d=8, 200 train / 100 test, R=20: median test MSE signature {sig:.4} vs Fourier {fourier:.4}, {secs:.1} s"
        ),
    );
}

fn objective(f: &nalgebra::DMatrix<f64>, y: &[f64], b: &[f64], lambda: f64) -> f64 {
    let fit = f * DVector::from_column_slice(b);
    let rss: f64 = fit.iter().zip(y).map(|(a, t)| (t - a) * (t - a)).sum();
    rss / y.len() as f64 + lambda * b[1..].iter().map(|v| v * v).sum::<f64>()
}

#[test]
fn criterion_08_objective_monotonicity() {
    let _g = serial();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for seed in 0..50u64 {
        let data = simulate(&SimSpec {
            n: 60,
            d: 2,
            p: 30,
            seed,
            model: PathModel::Polysinus,
            response: ResponseKind::Signature { m_star: 4 },
        })
        .unwrap();
        let aug: Vec<SampledPath> = data.paths.iter().map(SampledPath::time_augment).collect();
        let full = batch_signatures(&aug, 5).unwrap();
        let lambda = 1e-2;
        let mut prev = f64::INFINITY;
        for m in 0..=5 {
            let block = full.columns(0, sig_len(3, m).unwrap()).into_owned();
            let model = ridge_fit(&block, &data.targets, lambda).unwrap();
            let value = objective(&block, &data.targets, model.coeffs(), lambda);
            if prev.is_finite() {
                let excess = (value - prev) / prev;
                worst = worst.max(excess);
                if excess > 1e-8 {
                    violations += 1;
                }
            }
            prev = value;
        }
    }
    report(
        8,
        "penalized-objective monotonicity",
        violations == 0,
        format!(
            "50 datasets, orders 0..5: {violations} increases, largest relative change {worst:.2e}"
        ),
    );
}

#[test]
fn criterion_09_determinism() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        n: 60,
        p: 20,
        dims: vec![1, 3],
        repetitions: 3,
        seed: 99,
        ..ExperimentConfig::defaults(ExperimentKind::DimensionStudyGp)
    };
    let run = |tag: &str| {
        let tidy = dir.path().join(format!("{tag}.csv"));
        cmd_experiment(&cfg, &dir.path().join(format!("{tag}.json")), &tidy).unwrap();
        std::fs::read(tidy).unwrap()
    };
    let a = run("first");
    let b = run("second");
    report(
        9,
        "determinism",
        a == b && !a.is_empty(),
        format!(
            "two runs produced {} and {} bytes, identical: {}",
            a.len(),
            b.len(),
            a == b
        ),
    );
}

fn time_once(path: &SampledPath, m: usize) -> f64 {
    let start = Instant::now();
    std::hint::black_box(signature(std::hint::black_box(path), m).unwrap());
    start.elapsed().as_secs_f64()
}

fn median(mut times: Vec<f64>) -> f64 {
    times.sort_by(f64::total_cmp);
    (times[4] + times[5]) / 2.0
}

#[test]
fn criterion_10_linear_scaling() {
    let _g = serial();
    let mut r = common::rng(10);
    let long = random_path(&mut r, 4, 100_000);
    let short = common::polyline(
        &long
            .rows()
            .take(50_000)
            .map(<[f64]>::to_vec)
            .collect::<Vec<_>>(),
    );
    time_once(&short, 4);
    time_once(&long, 4);
    let (mut short_times, mut long_times) = (Vec::new(), Vec::new());
    for _ in 0..10 {
        short_times.push(time_once(&short, 4));
        long_times.push(time_once(&long, 4));
    }
    let (t1, t2) = (median(short_times), median(long_times));
    let ratio = t2 / t1;
    report(
        10,
        "linear scaling in p",
        (1.6..=2.6).contains(&ratio),
        format!(
            "d=4, m=4, median of 10 interleaved runs: p=50000 {:.2} ms, p=100000 {:.2} ms, ratio {ratio:.2}",
            t1 * 1e3,
            t2 * 1e3
        ),
    );
}
