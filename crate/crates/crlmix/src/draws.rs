//! Retained posterior draws and their on-disk format.
//!
//! A draws file is line-delimited JSON: the first line is the [`RunMeta`]
//! header record, every following line one [`DrawRecord`]. Plain nested
//! vectors keep the records language-agnostic and inspectable at desk scale.
//! Wall-clock timings live only in memory (and in job manifests), never in
//! the file, so reruns with identical seeds are byte-identical.

use crate::error::{Error, Result};
use crate::kernel::category_probs_raw;
use crate::num::sigmoid;
use crate::prior::Variant;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Run metadata stamped at the head of a draws file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub variant: Variant,
    pub c: usize,
    pub p: usize,
    pub truncation: usize,
    pub n_obs: usize,
    pub seed: u64,
    pub stream: u64,
    pub n_iter: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub parallel_categories: bool,
    /// FNV-1a hash of the generating `ModelSpec`.
    pub spec_hash: u64,
    /// Wall time (seconds) per 1000 sweeps; in-memory only.
    #[serde(skip)]
    pub seconds_per_1000: Vec<f64>,
}

/// Kernel atoms of one retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AtomsDraw {
    /// `beta[j][l]` is the `p`-vector of component `l`, category stage `j`.
    Regression(Vec<Vec<Vec<f64>>>),
    /// `theta[j][l]` is the scalar atom of component `l`, stage `j`.
    Scalar(Vec<Vec<f64>>),
}

/// Weight parameters of one retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightsDraw {
    /// `gamma[l]`, `l = 1..L-1`, the stick-breaking regression coefficients.
    Lsbp { gamma: Vec<Vec<f64>> },
    /// Covariate-free weights plus the DP total-mass parameter.
    Dp { omega: Vec<f64>, alpha: f64 },
}

/// Centering hyperparameters of one retained draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CenteringDraw {
    /// Per stage `j`: mean vector and covariance matrix (row-major rows).
    Niw { mu: Vec<Vec<f64>>, sigma: Vec<Vec<Vec<f64>>> },
    /// Per stage `j`: scalar mean and variance.
    Nig { mu: Vec<f64>, sigma2: Vec<f64> },
}

/// One retained Gibbs state. Per-observation Pólya-Gamma latents are not
/// retained; no downstream functional needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawRecord {
    /// 1-based sweep index this draw was taken at.
    pub sweep: u64,
    pub atoms: AtomsDraw,
    pub weights: WeightsDraw,
    pub centering: CenteringDraw,
    /// Occupancy count of each mixture component (length `L`).
    pub label_counts: Vec<u32>,
}

impl DrawRecord {
    /// Mixture weights `p_l(x)` implied by this draw, length `L`.
    ///
    /// Logistic stick-breaking values are clamped to `[1e-12, 1 - 1e-12]`
    /// so downstream products and logs stay finite.
    pub fn weights_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.weights {
            WeightsDraw::Dp { omega, .. } => omega.clone(),
            WeightsDraw::Lsbp { gamma } => {
                let l_total = gamma.len() + 1;
                let mut w = Vec::with_capacity(l_total);
                let mut survivor = 1.0;
                for g in gamma {
                    let eta = sigmoid(dot(x, g)).clamp(1e-12, 1.0 - 1e-12);
                    w.push(eta * survivor);
                    survivor *= 1.0 - eta;
                }
                w.push(survivor);
                w
            }
        }
    }

    /// Continuation-ratio logits of component `l` at covariate `x`
    /// (length `C-1`).
    pub fn component_logits(&self, l: usize, x: &[f64]) -> Vec<f64> {
        match &self.atoms {
            AtomsDraw::Regression(beta) => beta.iter().map(|stage| dot(x, &stage[l])).collect(),
            AtomsDraw::Scalar(theta) => theta.iter().map(|stage| stage[l]).collect(),
        }
    }

    /// Number of mixture components `L`.
    pub fn truncation(&self) -> usize {
        self.label_counts.len()
    }

    /// Number of occupied components in this draw.
    pub fn n_distinct(&self) -> u32 {
        self.label_counts.iter().filter(|&&m| m > 0).count() as u32
    }

    /// Mixture category probabilities at `x`: `Σ_l p_l(x) K(· | θ_l(x))`.
    pub fn category_probs_at(&self, x: &[f64]) -> Vec<f64> {
        let w = self.weights_at(x);
        let c = match &self.atoms {
            AtomsDraw::Regression(beta) => beta.len() + 1,
            AtomsDraw::Scalar(theta) => theta.len() + 1,
        };
        let mut probs = vec![0.0; c];
        for (l, &wl) in w.iter().enumerate() {
            if wl == 0.0 {
                continue;
            }
            let theta = self.component_logits(l, x);
            for (j, k) in category_probs_raw(&theta).iter().enumerate() {
                probs[j] += wl * k;
            }
        }
        probs
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A thinned sequence of retained draws plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub meta: RunMeta,
    pub draws: Vec<DrawRecord>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Writes the header record and one JSON line per retained draw.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let head = serde_json::to_string(&self.meta).map_err(|e| Error::numeric(e.to_string()))?;
        writeln!(w, "{head}").map_err(|e| Error::numeric(e.to_string()))?;
        for d in &self.draws {
            let line = serde_json::to_string(d).map_err(|e| Error::numeric(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| Error::numeric(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let head = lines
            .next()
            .ok_or_else(|| Error::invalid("draws file is empty"))?
            .map_err(|e| Error::invalid(e.to_string()))?;
        let meta: RunMeta =
            serde_json::from_str(&head).map_err(|e| Error::invalid(format!("bad header record: {e}")))?;
        let mut draws = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::invalid(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let d: DrawRecord = serde_json::from_str(&line)
                .map_err(|e| Error::invalid(format!("bad draw record on line {}: {e}", idx + 2)))?;
            draws.push(d);
        }
        Ok(PosteriorDraws { meta, draws })
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)
            .map_err(|e| Error::invalid(format!("cannot create {}: {e}", path.display())))?;
        self.write_jsonl(std::io::BufWriter::new(f))
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
        Self::read_jsonl(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_draws() -> PosteriorDraws {
        let meta = RunMeta {
            variant: Variant::General,
            c: 3,
            p: 2,
            truncation: 2,
            n_obs: 5,
            seed: 1,
            stream: 0,
            n_iter: 10,
            burn_in: 5,
            thin: 1,
            parallel_categories: false,
            spec_hash: 42,
            seconds_per_1000: vec![0.1],
        };
        let draw = DrawRecord {
            sweep: 6,
            atoms: AtomsDraw::Regression(vec![
                vec![vec![0.1, 0.2], vec![-0.3, 0.4]],
                vec![vec![0.0, 0.0], vec![1.0, -1.0]],
            ]),
            weights: WeightsDraw::Lsbp { gamma: vec![vec![0.5, -0.5]] },
            centering: CenteringDraw::Niw {
                mu: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
                sigma: vec![
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                ],
            },
            label_counts: vec![3, 2],
        };
        PosteriorDraws { meta, draws: vec![draw] }
    }

    #[test]
    fn jsonl_round_trip_drops_timing_only() {
        let d = toy_draws();
        let mut buf = Vec::new();
        d.write_jsonl(&mut buf).unwrap();
        let back = PosteriorDraws::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back.draws, d.draws);
        assert!(back.meta.seconds_per_1000.is_empty());
        let mut expect = d.meta.clone();
        expect.seconds_per_1000 = vec![];
        assert_eq!(back.meta, expect);
    }

    #[test]
    fn draw_functionals_mix_components() {
        let d = &toy_draws().draws[0];
        let x = [1.0, 2.0];
        let w = d.weights_at(&x);
        assert_eq!(w.len(), 2);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let probs = d.category_probs_at(&x);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.n_distinct(), 2);
    }
}
