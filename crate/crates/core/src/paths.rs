//! Sampled multivariate paths and their piecewise-linear interpolants.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A `p x d` array of samples taken at strictly increasing times.
///
/// The continuous path it stands for is the linear interpolation of the rows.
/// Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    d: usize,
}

/// The uniform partition `j / (p - 1)` of `[0, 1]`.
pub fn uniform_grid(p: usize) -> Vec<f64> {
    match p {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => {
            let last = (p - 1) as f64;
            (0..p).map(|j| j as f64 / last).collect()
        }
    }
}

impl SampledPath {
    /// Builds a path from row-major `values` (`times.len()` rows of `d` entries).
    pub fn new(times: Vec<f64>, values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        let p = times.len();
        if values.len() != p * d {
            return Err(Error::LengthMismatch {
                expected: p * d,
                found: values.len(),
            });
        }
        if p < 2 {
            return Err(Error::TooFewSamples(p));
        }
        for (j, t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite { row: j, col: d });
            }
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / d,
                    col: idx % d,
                });
            }
        }
        if let Some(j) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingTimes(j + 1));
        }
        Ok(Self { times, values, d })
    }

    /// Builds a path from a `p x d` matrix, defaulting to the uniform grid on `[0, 1]`.
    pub fn from_matrix(values: &DMatrix<f64>, times: Option<Vec<f64>>) -> Result<Self> {
        let (p, d) = values.shape();
        let mut flat = Vec::with_capacity(p * d);
        for r in 0..p {
            for c in 0..d {
                flat.push(values[(r, c)]);
            }
        }
        let times = match times {
            Some(t) => {
                if t.len() != p {
                    return Err(Error::LengthMismatch {
                        expected: p,
                        found: t.len(),
                    });
                }
                t
            }
            None => uniform_grid(p),
        };
        Self::new(times, flat, d)
    }

    /// Builds a path from a slice of rows, defaulting to the uniform grid on `[0, 1]`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], times: Option<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let times = times.unwrap_or_else(|| uniform_grid(rows.len()));
        if times.len() != rows.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: times.len(),
            });
        }
        Self::new(times, flat, d)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of samples `p`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Row-major sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    /// Displacements of the `p - 1` linear segments.
    pub fn increments(&self) -> impl Iterator<Item = impl Iterator<Item = f64> + '_> + '_ {
        self.values
            .chunks_exact(self.d)
            .zip(self.values.chunks_exact(self.d).skip(1))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| y - x))
    }

    /// Appends the sample time as a last coordinate.
    pub fn time_augment(&self) -> SampledPath {
        let d = self.d + 1;
        let mut values = Vec::with_capacity(self.len() * d);
        for (row, &t) in self.rows().zip(&self.times) {
            values.extend_from_slice(row);
            values.push(t);
        }
        SampledPath {
            times: self.times.clone(),
            values,
            d,
        }
    }

    /// Exact length of the polyline: sum of Euclidean segment norms.
    pub fn total_variation(&self) -> f64 {
        self.increments()
            .map(|inc| libm::sqrt(inc.map(|x| x * x).sum::<f64>()))
            .sum()
    }

    /// Inserts `extra` evenly spaced collinear points inside every segment.
    pub fn subdivide(&self, extra: usize) -> SampledPath {
        if extra == 0 {
            return self.clone();
        }
        let steps = extra + 1;
        let p = self.len();
        let new_p = (p - 1) * steps + 1;
        let mut times = Vec::with_capacity(new_p);
        let mut values = Vec::with_capacity(new_p * self.d);
        for j in 0..p - 1 {
            let (a, b) = (self.row(j), self.row(j + 1));
            let (ta, tb) = (self.times[j], self.times[j + 1]);
            for s in 0..steps {
                let w = s as f64 / steps as f64;
                times.push(ta + w * (tb - ta));
                values.extend(a.iter().zip(b).map(|(x, y)| x + w * (y - x)));
            }
        }
        times.push(self.times[p - 1]);
        values.extend_from_slice(self.row(p - 1));
        SampledPath {
            times,
            values,
            d: self.d,
        }
    }

    /// Same vertices, new sample times.
    pub fn retime(&self, times: Vec<f64>) -> Result<SampledPath> {
        SampledPath::new(times, self.values.clone(), self.d)
    }

    /// Keeps only the listed coordinates (0-based), in the given order.
    pub fn project(&self, coords: &[usize]) -> Result<SampledPath> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.d) {
            return Err(Error::DigitOutOfRange {
                digit: c + 1,
                d: self.d,
            });
        }
        let values = self
            .rows()
            .flat_map(|row| coords.iter().map(move |&c| row[c]))
            .collect();
        SampledPath::new(self.times.clone(), values, coords.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_grid_is_uniform() {
        let p = SampledPath::from_rows(&[[0.0], [1.0]], None).unwrap();
        assert_eq!(p.times(), &[0.0, 1.0]);
        assert_eq!(p.dim(), 1);
        assert_eq!(p.len(), 2);
        assert_eq!(uniform_grid(5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn two_point_displacement() {
        let p = SampledPath::from_rows(&[[0.0, 0.0], [1.0, 2.0]], None).unwrap();
        let inc: Vec<Vec<f64>> = p.increments().map(|i| i.collect()).collect();
        assert_eq!(inc, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn from_matrix_round_trips() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        let p = SampledPath::from_matrix(&m, Some(vec![0.0, 0.1, 0.7])).unwrap();
        assert_eq!(p.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        assert_eq!(p.times(), &[0.0, 0.1, 0.7]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            SampledPath::from_rows(&[[0.0]], None),
            Err(Error::TooFewSamples(1))
        );
        assert_eq!(
            SampledPath::from_rows(&[[0.0], [f64::NAN]], None),
            Err(Error::NonFinite { row: 1, col: 0 })
        );
        assert_eq!(
            SampledPath::from_rows(&[[0.0], [1.0], [2.0]], Some(vec![0.0, 0.5, 0.5])),
            Err(Error::NonIncreasingTimes(2))
        );
        assert!(SampledPath::new(vec![0.0, 1.0], vec![], 0).is_err());
    }

    #[test]
    fn duplicate_rows_are_allowed() {
        let p = SampledPath::from_rows(&[[1.0], [1.0], [2.0]], None).unwrap();
        assert_eq!(p.total_variation(), 1.0);
    }

    #[test]
    fn time_augmentation() {
        let p = SampledPath::from_rows(&[[3.0], [1.0], [4.0]], None).unwrap();
        let a = p.time_augment();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.values(), &[3.0, 0.0, 1.0, 0.5, 4.0, 1.0]);
        let aa = a.time_augment();
        for row in aa.rows() {
            assert_eq!(row[1], row[2]);
        }
        let q = SampledPath::from_rows(&[[1.0, 2.0], [0.0, 1.0], [5.0, 5.0]], None).unwrap();
        let qa = q.time_augment();
        assert_eq!((qa.dim(), qa.len()), (3, 3));
        assert_eq!(qa.project(&[0, 1]).unwrap(), q);
    }

    #[test]
    fn total_variation_cases() {
        let unit = SampledPath::from_rows(&[[0.0], [1.0]], None).unwrap();
        assert_eq!(unit.total_variation(), 1.0);
        let tri = SampledPath::from_rows(&[[0.0, 0.0], [3.0, 4.0]], None).unwrap();
        assert_eq!(tri.total_variation(), 5.0);
        let updown = SampledPath::from_rows(&[[0.0], [1.0], [0.0]], None).unwrap();
        assert_eq!(updown.total_variation(), 2.0);
    }

    #[test]
    fn subdivision() {
        let p = SampledPath::from_rows(&[[0.0, 0.0], [2.0, 4.0]], None).unwrap();
        let s = p.subdivide(1);
        assert_eq!(s.values(), &[0.0, 0.0, 1.0, 2.0, 2.0, 4.0]);
        assert_eq!(s.times(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.subdivide(0), p);
        let q = SampledPath::from_rows(&[[0.0, 1.0], [2.0, -1.0], [0.5, 3.0]], None).unwrap();
        let tv = q.total_variation();
        for k in 0..6 {
            let r = q.subdivide(k);
            assert!((r.total_variation() - tv).abs() <= 1e-12 * tv);
        }
    }
}
