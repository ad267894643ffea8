//! Test helpers: a brute-force iterated-integral oracle and seeded path fixtures.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigreg_core::SampledPath;

/// All words of length `1..=m` over `1..=d`, shortest first.
pub fn words(d: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut level: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        level = level
            .iter()
            .flat_map(|w| {
                (1..=d).map(move |i| {
                    let mut v = w.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// Linear interpolation of the polyline `points` with `sub` steps per segment.
fn refine(points: &[Vec<f64>], sub: usize) -> Vec<Vec<f64>> {
    let mut fine = vec![points[0].clone()];
    for w in points.windows(2) {
        for s in 1..=sub {
            let u = s as f64 / sub as f64;
            fine.push(
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| a + u * (b - a))
                    .collect(),
            );
        }
    }
    fine
}

/// Iterated integrals `int dX^{i1} ... dX^{ik}` by nested trapezoid sums on a
/// grid with `sub` points per segment.
fn trapezoid(points: &[Vec<f64>], m: usize, sub: usize) -> HashMap<Vec<usize>, f64> {
    let d = points[0].len();
    let fine = refine(points, sub);
    let steps = fine.len();
    let mut running: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    running.insert(vec![], vec![1.0; steps]);
    for w in words(d, m) {
        let (prefix, last) = w.split_at(w.len() - 1);
        let i = last[0] - 1;
        let inner = &running[prefix];
        let mut acc = vec![0.0; steps];
        for j in 1..steps {
            let dx = fine[j][i] - fine[j - 1][i];
            acc[j] = acc[j - 1] + 0.5 * (inner[j - 1] + inner[j]) * dx;
        }
        running.insert(w, acc);
    }
    running
        .into_iter()
        .map(|(w, v)| (w, *v.last().unwrap()))
        .collect()
}

/// Richardson-extrapolated trapezoid oracle for the signature coefficients of
/// the polyline through `points`.
pub fn oracle_signature(points: &[Vec<f64>], m: usize, sub: usize) -> HashMap<Vec<usize>, f64> {
    let coarse = trapezoid(points, m, sub);
    let fine = trapezoid(points, m, 2 * sub);
    fine.iter()
        .map(|(w, f)| (w.clone(), (4.0 * f - coarse[w]) / 3.0))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p` points in `[-1, 1]^d`.
pub fn random_points(rng: &mut impl Rng, d: usize, p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

pub fn polyline(points: &[Vec<f64>]) -> SampledPath {
    SampledPath::from_rows(points, None).unwrap()
}
