mod common;

use common::{oracle_signature, words};
use sigreg_core::datagen::{
    gen_gaussian_process, gen_polysinus, polysinus_params, polysinus_value, signature_response,
    PathModel, ResponseKind, SimSpec,
};
use sigreg_core::{uniform_grid, SampledPath};

fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

#[test]
fn response_noise_has_uniform_variance() {
    let flat: Vec<SampledPath> = (0..100_000)
        .map(|_| SampledPath::new(vec![0.0, 1.0], vec![0.0, 0.0], 1).unwrap())
        .collect();
    let r = signature_response(&flat, 1, 11).unwrap();
    let v = variance(r.noise.iter().copied());
    let want = 100.0 * 100.0 / 3.0;
    assert!((v / want - 1.0).abs() < 0.05, "variance {v}");
    assert!(r
        .targets
        .iter()
        .zip(&r.noise)
        .all(|(y, e)| (y - e - r.beta[0]).abs() < 1e-12));
}

#[test]
fn gaussian_process_noise_has_unit_variance() {
    let spec = SimSpec {
        n: 2500,
        d: 4,
        p: 10,
        seed: 5,
        model: PathModel::GaussianProcess,
        response: ResponseKind::TrendNorm,
    };
    let sample = gen_gaussian_process(&spec).unwrap();
    let times = uniform_grid(spec.p);
    for (j, &t) in times.iter().enumerate() {
        let xi = sample
            .paths
            .iter()
            .zip(&sample.slopes)
            .flat_map(|(path, slope)| (0..spec.d).map(move |k| path.row(j)[k] - slope[k] * t));
        let v = variance(xi);
        assert!((v - 1.0).abs() < 0.05, "t={t}: variance {v}");
    }
    for (y, slope) in sample.targets.iter().zip(&sample.slopes) {
        assert!(slope.iter().all(|a| a.abs() <= 3.0));
        assert!((y - slope.iter().map(|a| a * a).sum::<f64>().sqrt()).abs() < 1e-12);
    }
}

#[test]
fn polysinus_stays_in_its_usual_range() {
    let spec = SimSpec {
        n: 1000,
        d: 5,
        p: 100,
        seed: 3,
        model: PathModel::Polysinus,
        response: ResponseKind::Signature { m_star: 1 },
    };
    let paths = gen_polysinus(&spec).unwrap().paths;
    let values: Vec<f64> = paths
        .iter()
        .flat_map(|p| p.values().iter().copied())
        .collect();
    let inside = values
        .iter()
        .filter(|v| (-15.0..=25.0).contains(*v))
        .count();
    assert!(inside as f64 >= 0.95 * values.len() as f64);
    for (i, path) in paths.iter().enumerate().take(50) {
        for k in 0..spec.d {
            let a = polysinus_params(spec.seed, i, k);
            let at_zero = a[0] - 10.0 * a[3].powi(3);
            assert!((path.row(0)[k] - at_zero).abs() < 1e-12);
            assert_eq!(path.row(0)[k], polysinus_value(&a, 0.0));
        }
    }
}

#[test]
fn noiseless_response_matches_iterated_integrals() {
    let spec = SimSpec {
        n: 8,
        d: 2,
        p: 6,
        seed: 21,
        model: PathModel::Polysinus,
        response: ResponseKind::Signature { m_star: 2 },
    };
    let paths = gen_polysinus(&spec).unwrap().paths;
    let r = signature_response(&paths, 2, spec.seed).unwrap();
    let mut layout = vec![vec![]];
    layout.extend(words(2, 2));
    for (i, path) in paths.iter().enumerate() {
        let points: Vec<Vec<f64>> = path.rows().map(|r| r.to_vec()).collect();
        let oracle = oracle_signature(&points, 2, 400);
        let signal: f64 = layout.iter().zip(&r.beta).map(|(w, b)| b * oracle[w]).sum();
        let got = r.targets[i] - r.noise[i];
        assert!(
            (got - signal).abs() < 1e-6 * signal.abs().max(1.0),
            "{got} vs {signal}"
        );
    }
}
