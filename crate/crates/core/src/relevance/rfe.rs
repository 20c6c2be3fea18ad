//! Decoding relevance by recursive feature elimination.
//!
//! A ridge least-squares classifier predicts the binary condition from the
//! features under contiguous k-fold cross-validation. The importance of a
//! feature is the drop in held-out accuracy when its held-out values are
//! permuted within each fold. Significance comes from a label-permutation
//! null: refits on shuffled labels, each contributing the largest importance
//! over all features, so the threshold controls the familywise error. Features
//! at or below the threshold are eliminated and the rest refit until the set
//! is stable.

use std::collections::BTreeSet;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::citest::numeric_view;
use crate::error::{Error, Result};
use crate::scm::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfeParams {
    /// Ridge penalty on the standardized weights.
    pub regularization: f64,
    pub folds: usize,
    /// Permutations per feature for the observed importance, and the number
    /// of label-permutation refits in the null.
    pub permutations: usize,
    /// Familywise significance level.
    pub level: f64,
    /// Overrides the dataset seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for RfeParams {
    fn default() -> Self {
        RfeParams {
            regularization: 1.0,
            folds: 5,
            permutations: 200,
            level: 0.05,
            seed: None,
        }
    }
}

impl RfeParams {
    fn validate(&self) -> Result<()> {
        if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            return Err(Error::input("regularization must be positive"));
        }
        if self.folds < 2 {
            return Err(Error::input("at least two folds are needed"));
        }
        if self.permutations == 0 {
            return Err(Error::input("permutations must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::input("level must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    /// Base held-out accuracy minus mean accuracy with the feature permuted.
    pub drop: f64,
    pub threshold: f64,
    pub retained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfeReport {
    pub relevant: BTreeSet<String>,
    /// One entry per elimination round, in order.
    pub rounds: Vec<Vec<FeatureImportance>>,
}

/// Decoding-relevant features of `data` for the binary `condition` column.
pub fn rfe_decoding_set(
    data: &Dataset,
    condition: &str,
    params: &RfeParams,
) -> Result<BTreeSet<String>> {
    rfe_report(data, condition, params).map(|r| r.relevant)
}

pub fn rfe_report(data: &Dataset, condition: &str, params: &RfeParams) -> Result<RfeReport> {
    params.validate()?;
    let labels = binary_labels(data, condition)?;
    let names: Vec<&str> = data.features();
    if names.is_empty() {
        return Err(Error::input("dataset has no feature columns"));
    }
    let columns: Vec<Vec<f64>> = names
        .iter()
        .map(|n| numeric_view(data, n).map(|c| c.into_owned()))
        .collect::<Result<_>>()?;
    let n = labels.len();
    if n < 2 * params.folds {
        return Err(Error::Degenerate(format!(
            "{n} rows are too few for {} folds",
            params.folds
        )));
    }
    let seed = params.seed.or(data.seed()).unwrap_or(0);

    let mut active: Vec<usize> = (0..names.len()).collect();
    let mut rounds = Vec::new();
    for round in 0u64.. {
        let x: Vec<&[f64]> = active.iter().map(|&j| columns[j].as_slice()).collect();
        let problem = Problem::new(&x, &labels, params)?;
        let (drops, threshold) = problem.importances(seed, round, params);
        let importances: Vec<FeatureImportance> = active
            .iter()
            .zip(&drops)
            .map(|(&j, &drop)| FeatureImportance {
                feature: names[j].to_string(),
                drop,
                threshold,
                retained: drop > threshold,
            })
            .collect();
        let kept: Vec<usize> = active
            .iter()
            .zip(&importances)
            .filter(|(_, imp)| imp.retained)
            .map(|(&j, _)| j)
            .collect();
        rounds.push(importances);
        if kept.len() == active.len() || kept.is_empty() {
            active = kept;
            break;
        }
        active = kept;
    }
    Ok(RfeReport {
        relevant: active.iter().map(|&j| names[j].to_string()).collect(),
        rounds,
    })
}

/// Maps a two-valued column to ±1 labels, smaller value → -1.
fn binary_labels(data: &Dataset, condition: &str) -> Result<Vec<f64>> {
    let values = numeric_view(data, condition)?;
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    match distinct.as_slice() {
        [low, _high] => Ok(values
            .iter()
            .map(|v| if v == low { -1.0 } else { 1.0 })
            .collect()),
        [_] => Err(Error::Degenerate(format!(
            "condition `{condition}` has a single class"
        ))),
        _ => Err(Error::input(format!(
            "condition `{condition}` is not binary"
        ))),
    }
}

struct Fold {
    start: usize,
    end: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    gram: Cholesky<f64, Dyn>,
}

/// Fixed design with precomputed per-fold standardization and Gram factors;
/// only the labels change between refits.
struct Problem<'a> {
    x: &'a [&'a [f64]],
    y: &'a [f64],
    folds: Vec<Fold>,
}

impl<'a> Problem<'a> {
    fn new(x: &'a [&'a [f64]], y: &'a [f64], params: &RfeParams) -> Result<Self> {
        let n = y.len();
        let d = x.len();
        let k = params.folds;
        let mut folds = Vec::with_capacity(k);
        for f in 0..k {
            let (start, end) = (f * n / k, (f + 1) * n / k);
            let train = n - (end - start);
            let mut mean = vec![0.0; d];
            let mut scale = vec![0.0; d];
            for j in 0..d {
                let s: f64 = x[j][..start].iter().chain(&x[j][end..]).sum();
                mean[j] = s / train as f64;
                let ss: f64 = x[j][..start]
                    .iter()
                    .chain(&x[j][end..])
                    .map(|v| (v - mean[j]).powi(2))
                    .sum();
                let sd = (ss / train as f64).sqrt();
                scale[j] = if sd > 0.0 { sd } else { 1.0 };
            }
            let mut gram = DMatrix::<f64>::identity(d, d) * params.regularization;
            for a in 0..d {
                for b in a..d {
                    let s: f64 = (0..n)
                        .filter(|i| *i < start || *i >= end)
                        .map(|i| (x[a][i] - mean[a]) * (x[b][i] - mean[b]))
                        .sum::<f64>()
                        / (scale[a] * scale[b]);
                    gram[(a, b)] += s;
                    if a != b {
                        gram[(b, a)] += s;
                    }
                }
            }
            let gram = gram
                .cholesky()
                .ok_or_else(|| Error::Degenerate("ridge system is not positive definite".into()))?;
            folds.push(Fold {
                start,
                end,
                mean,
                scale,
                gram,
            });
        }
        Ok(Problem { x, y, folds })
    }

    /// Held-out scores (for accuracy) and per-fold weights in raw units,
    /// fitted on `labels`.
    fn fit(&self, labels: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = labels.len();
        let d = self.x.len();
        let k = self.folds.len();
        // Per-fold block sums so each training sum is total minus block.
        let mut block_y = vec![0.0; k];
        let mut block_xy = vec![vec![0.0; d]; k];
        for (f, fold) in self.folds.iter().enumerate() {
            block_y[f] = labels[fold.start..fold.end].iter().sum();
            for j in 0..d {
                block_xy[f][j] = self.x[j][fold.start..fold.end]
                    .iter()
                    .zip(&labels[fold.start..fold.end])
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
        let total_y: f64 = block_y.iter().sum();
        let total_xy: Vec<f64> = (0..d)
            .map(|j| block_xy.iter().map(|b| b[j]).sum())
            .collect();

        let mut scores = vec![0.0; n];
        let mut weights = Vec::with_capacity(k);
        for (f, fold) in self.folds.iter().enumerate() {
            let train = (n - (fold.end - fold.start)) as f64;
            let sum_y = total_y - block_y[f];
            let y_bar = sum_y / train;
            let rhs = DVector::from_fn(d, |j, _| {
                let sxy = total_xy[j] - block_xy[f][j];
                (sxy - fold.mean[j] * sum_y) / fold.scale[j]
            });
            let w = fold.gram.solve(&rhs);
            let raw: Vec<f64> = (0..d).map(|j| w[j] / fold.scale[j]).collect();
            let offset = y_bar - (0..d).map(|j| raw[j] * fold.mean[j]).sum::<f64>();
            for (i, score) in scores
                .iter_mut()
                .enumerate()
                .take(fold.end)
                .skip(fold.start)
            {
                *score = offset + (0..d).map(|j| raw[j] * self.x[j][i]).sum::<f64>();
            }
            weights.push(raw);
        }
        (scores, weights)
    }

    fn correct(score: f64, label: f64) -> bool {
        (score > 0.0) == (label > 0.0)
    }

    fn accuracy(scores: &[f64], labels: &[f64]) -> f64 {
        let hits = scores
            .iter()
            .zip(labels)
            .filter(|(s, y)| Self::correct(**s, **y))
            .count();
        hits as f64 / labels.len() as f64
    }

    /// Accuracy after permuting feature `j` within every held-out fold.
    fn permuted_accuracy(
        &self,
        j: usize,
        scores: &[f64],
        weights: &[Vec<f64>],
        labels: &[f64],
        rng: &mut ChaCha20Rng,
    ) -> f64 {
        let col = self.x[j];
        let mut hits = 0usize;
        for (fold, w) in self.folds.iter().zip(weights) {
            let mut order: Vec<usize> = (fold.start..fold.end).collect();
            order.shuffle(rng);
            for (i, &src) in (fold.start..fold.end).zip(&order) {
                let s = scores[i] + w[j] * (col[src] - col[i]);
                hits += Self::correct(s, labels[i]) as usize;
            }
        }
        hits as f64 / labels.len() as f64
    }

    fn rng(seed: u64, round: u64, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(
            seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        rng.set_stream(stream);
        rng
    }

    /// Observed importance per feature and the familywise threshold.
    fn importances(&self, seed: u64, round: u64, params: &RfeParams) -> (Vec<f64>, f64) {
        let d = self.x.len();
        let p = params.permutations;
        let (scores, weights) = self.fit(self.y);
        let base = Self::accuracy(&scores, self.y);
        let drops: Vec<f64> = (0..d)
            .into_par_iter()
            .map(|j| {
                let mut rng = Self::rng(seed, round, j as u64);
                let total: f64 = (0..p)
                    .map(|_| self.permuted_accuracy(j, &scores, &weights, self.y, &mut rng))
                    .sum();
                base - total / p as f64
            })
            .collect();

        let mut maxima: Vec<f64> = (0..p)
            .into_par_iter()
            .map(|b| {
                let mut rng = Self::rng(seed, round, (d + b) as u64);
                let mut labels = self.y.to_vec();
                labels.shuffle(&mut rng);
                let (scores, weights) = self.fit(&labels);
                let base = Self::accuracy(&scores, &labels);
                (0..d)
                    .map(|j| base - self.permuted_accuracy(j, &scores, &weights, &labels, &mut rng))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        maxima.sort_by(f64::total_cmp);
        let rank = ((1.0 - params.level) * p as f64).ceil() as usize;
        let threshold = maxima[rank.clamp(1, p) - 1];
        (drops, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VariableRole;
    use crate::scm::{canonical_fixture, Column, ColumnData};

    fn quick() -> RfeParams {
        RfeParams {
            permutations: 40,
            ..RfeParams::default()
        }
    }

    #[test]
    fn chain_keeps_only_the_mediator() {
        let data = canonical_fixture("stim-chain")
            .unwrap()
            .sample(2000, 11)
            .unwrap();
        let relevant = rfe_decoding_set(&data, "S", &quick()).unwrap();
        assert_eq!(relevant, ["X1".to_string()].into());
    }

    #[test]
    fn collider_keeps_both() {
        let data = canonical_fixture("stim-collider")
            .unwrap()
            .sample(2000, 12)
            .unwrap();
        let relevant = rfe_decoding_set(&data, "S", &quick()).unwrap();
        assert_eq!(relevant, ["X1".to_string(), "X2".to_string()].into());
    }

    #[test]
    fn deterministic_given_seed() {
        let data = canonical_fixture("resp-fork")
            .unwrap()
            .sample(500, 3)
            .unwrap();
        let data = data.binarize(&["R"], 0.0).unwrap();
        let a = rfe_report(&data, "R", &quick()).unwrap();
        let b = rfe_report(&data, "R", &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_matches_direct_ridge() {
        let data = canonical_fixture("stim-collider")
            .unwrap()
            .sample(200, 4)
            .unwrap();
        let y = binary_labels(&data, "S").unwrap();
        let cols: Vec<Vec<f64>> = ["X1", "X2"]
            .iter()
            .map(|n| data.numeric(n).unwrap().to_vec())
            .collect();
        let x: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let params = RfeParams::default();
        let problem = Problem::new(&x, &y, &params).unwrap();
        let (scores, _) = problem.fit(&y);

        // Fold 0 by direct normal equations on standardized training rows.
        let (start, end) = (0, 40);
        let train: Vec<usize> = (end..200).collect();
        let stats: Vec<(f64, f64)> = cols
            .iter()
            .map(|c| {
                let m = train.iter().map(|&i| c[i]).sum::<f64>() / train.len() as f64;
                let v = train.iter().map(|&i| (c[i] - m).powi(2)).sum::<f64>() / train.len() as f64;
                (m, v.sqrt())
            })
            .collect();
        let z = DMatrix::from_fn(train.len(), 2, |r, j| {
            (cols[j][train[r]] - stats[j].0) / stats[j].1
        });
        let y_bar = train.iter().map(|&i| y[i]).sum::<f64>() / train.len() as f64;
        let yc = DVector::from_fn(train.len(), |r, _| y[train[r]] - y_bar);
        let lhs = z.transpose() * &z + DMatrix::identity(2, 2);
        let w = lhs.lu().solve(&(z.transpose() * yc)).unwrap();
        for i in start..end {
            let s = y_bar
                + (0..2)
                    .map(|j| w[j] * (cols[j][i] - stats[j].0) / stats[j].1)
                    .sum::<f64>();
            assert!((s - scores[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn label_errors() {
        let col = |name: &str, role, data| Column {
            name: name.into(),
            role,
            data,
        };
        let single = Dataset::new(
            vec![
                col(
                    "S",
                    VariableRole::Stimulus,
                    ColumnData::Categorical(vec![1; 20]),
                ),
                col(
                    "X",
                    VariableRole::Feature,
                    ColumnData::Numeric((0..20).map(f64::from).collect()),
                ),
            ],
            None,
        )
        .unwrap();
        assert!(matches!(
            rfe_decoding_set(&single, "S", &quick()),
            Err(Error::Degenerate(_))
        ));

        let data = canonical_fixture("resp-fork")
            .unwrap()
            .sample(100, 1)
            .unwrap();
        assert!(matches!(
            rfe_decoding_set(&data, "R", &quick()),
            Err(Error::InvalidInput(_))
        ));
        let bad = RfeParams {
            folds: 1,
            ..quick()
        };
        assert!(rfe_decoding_set(&data, "R", &bad).is_err());
    }
}
