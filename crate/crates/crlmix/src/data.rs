//! Ordinal regression datasets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An ordinal dataset: responses `y_i ∈ {1..C}` and an `n × p` design matrix
/// whose first column is identically one (the intercept).
///
/// The binary expansion used by the continuation-ratio factorization is
/// implied by `y` and served through [`indicator`](Self::indicator) and
/// [`mass`](Self::mass): `Y_ij = 1(y_i = j)` and `m_ij = 1(y_i ≥ j)` for
/// stages `j = 1..C-1`. Stages with `m_ij = 0` carry no likelihood term (a
/// Binomial with zero trials is identically one).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrdinalDataset {
    y: Vec<usize>,
    x: Vec<f64>, // row-major n × p
    n: usize,
    p: usize,
    c: usize,
    /// Number of active stages per observation: `min(y_i, C-1)`.
    active_stages: Vec<usize>,
}

impl OrdinalDataset {
    /// Builds a dataset from responses and design rows. Requires `n ≥ 1`,
    /// `C ≥ 2`, every `y_i ∈ {1..C}`, a constant first column, and finite
    /// entries.
    pub fn new(y: Vec<usize>, x_rows: Vec<Vec<f64>>, c: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::invalid("dataset must contain at least one observation"));
        }
        if y.len() != x_rows.len() {
            return Err(Error::dim(format!(
                "{} responses but {} design rows",
                y.len(),
                x_rows.len()
            )));
        }
        Self::build(y, x_rows, c)
    }

    /// An empty dataset (`n = 0`) for prior-only runs.
    pub fn empty(c: usize, p: usize) -> Result<Self> {
        if c < 2 {
            return Err(Error::invalid(format!("need C >= 2 categories, got {c}")));
        }
        if p < 1 {
            return Err(Error::invalid("need p >= 1 (the intercept)"));
        }
        Ok(OrdinalDataset {
            y: Vec::new(),
            x: Vec::new(),
            n: 0,
            p,
            c,
            active_stages: Vec::new(),
        })
    }

    fn build(y: Vec<usize>, x_rows: Vec<Vec<f64>>, c: usize) -> Result<Self> {
        if c < 2 {
            return Err(Error::invalid(format!("need C >= 2 categories, got {c}")));
        }
        let p = x_rows[0].len();
        if p < 1 {
            return Err(Error::invalid("design matrix must have at least the intercept column"));
        }
        let n = y.len();
        let mut x = Vec::with_capacity(n * p);
        for (i, row) in x_rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::dim(format!(
                    "design row {i} has {} columns, expected {p}",
                    row.len()
                )));
            }
            if row[0] != 1.0 {
                return Err(Error::invalid(format!(
                    "design row {i} does not start with the intercept 1 (got {})",
                    row[0]
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite covariate at row {i}, column {j}")));
            }
            x.extend_from_slice(row);
        }
        for (i, &yi) in y.iter().enumerate() {
            if yi < 1 || yi > c {
                return Err(Error::invalid(format!(
                    "response at row {i} is {yi}, outside 1..={c}"
                )));
            }
        }
        let active_stages = y.iter().map(|&yi| yi.min(c - 1)).collect();
        Ok(OrdinalDataset { y, x, n, p, c, active_stages })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_categories(&self) -> usize {
        self.c
    }

    pub fn response(&self, i: usize) -> usize {
        self.y[i]
    }

    pub fn responses(&self) -> &[usize] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// `Y_ij`: 1 if observation `i` fell in category `j` (1-based).
    #[inline]
    pub fn indicator(&self, i: usize, j: usize) -> bool {
        self.y[i] == j
    }

    /// `m_ij`: whether stage `j` (1-based, `j ≤ C-1`) is active for
    /// observation `i`, i.e. `y_i ≥ j`.
    #[inline]
    pub fn mass(&self, i: usize, j: usize) -> bool {
        self.y[i] >= j
    }

    /// Number of active stages `min(y_i, C-1)` for observation `i`; stage
    /// indices `1..=active` have `m_ij = 1`.
    #[inline]
    pub fn active_stages(&self, i: usize) -> usize {
        self.active_stages[i]
    }

    /// Per-covariate observed mean (including the intercept column).
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.p];
        if self.n == 0 {
            means[0] = 1.0;
            return means;
        }
        for i in 0..self.n {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// Observed (min, max) per covariate column.
    pub fn column_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.p];
        for i in 0..self.n {
            for (r, v) in ranges.iter_mut().zip(self.row(i)) {
                r.0 = r.0.min(*v);
                r.1 = r.1.max(*v);
            }
        }
        ranges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(xs: &[&[f64]]) -> Vec<Vec<f64>> {
        xs.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn masses_and_indicators_from_binary_expansion() {
        let d = OrdinalDataset::new(
            vec![1, 2, 3],
            rows(&[&[1.0, 0.5], &[1.0, -0.5], &[1.0, 2.0]]),
            3,
        )
        .unwrap();
        // y=1: Y_1=1, m_1=1, m_2=0
        assert!(d.indicator(0, 1) && d.mass(0, 1) && !d.mass(0, 2));
        // y=2: m_1=m_2=1, Y_2=1
        assert!(d.mass(1, 1) && d.mass(1, 2) && d.indicator(1, 2));
        // y=3: both stages active, no success before the last category
        assert!(d.mass(2, 1) && d.mass(2, 2) && !d.indicator(2, 1) && !d.indicator(2, 2));
        assert_eq!(d.active_stages(0), 1);
        assert_eq!(d.active_stages(2), 2);
        // one-hot sums to one by construction
        for i in 0..3 {
            let s: usize = (1..=3).filter(|&j| d.indicator(i, j)).count();
            assert_eq!(s, 1);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(OrdinalDataset::new(vec![], vec![], 3).is_err());
        assert!(OrdinalDataset::new(vec![1], rows(&[&[0.5]]), 3).is_err()); // intercept not 1
        assert!(OrdinalDataset::new(vec![4], rows(&[&[1.0]]), 3).is_err()); // y out of range
        assert!(OrdinalDataset::new(vec![1], rows(&[&[1.0]]), 1).is_err()); // C = 1 rejected
        assert!(OrdinalDataset::new(vec![1, 2], rows(&[&[1.0, 1.0], &[1.0]]), 3).is_err());
    }

    #[test]
    fn binary_response_supported() {
        let d = OrdinalDataset::new(vec![1, 2], rows(&[&[1.0], &[1.0]]), 2).unwrap();
        assert_eq!(d.active_stages(0), 1);
        assert_eq!(d.active_stages(1), 1);
    }

    #[test]
    fn empty_dataset_for_prior_runs() {
        let d = OrdinalDataset::empty(4, 2).unwrap();
        assert_eq!(d.n(), 0);
        assert_eq!(d.n_categories(), 4);
        assert_eq!(d.column_means(), vec![1.0, 0.0]);
    }
}
