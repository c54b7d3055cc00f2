//! Covariance PCA used as an optional preprocessing step for the binary detector.
//!
//! With more attributes than samples (the usual chromatogram case) the
//! decomposition runs on the `N × N` Gram matrix of the centred data and maps
//! its eigenvectors back, which yields the same non-zero spectrum as the
//! `d × d` covariance.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Example};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, parse_usize, Lines};

/// Relative cut-off below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

const FORMAT_HEADER: &str = "oilcheck-pca";
const FORMAT_VERSION: &str = "1";

/// How many components to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PcaRule {
    /// Smallest count whose cumulative variance ratio reaches the threshold.
    Variance(f64),
    /// Every component with a strictly positive eigenvalue.
    Positive,
}

impl fmt::Display for PcaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PcaRule::Variance(t) => write!(f, "{t}"),
            PcaRule::Positive => f.write_str("positive"),
        }
    }
}

impl FromStr for PcaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("positive") {
            return Ok(PcaRule::Positive);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("pca rule `{s}` is neither a fraction nor `positive`")))?;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("variance threshold {t} outside (0, 1]")));
        }
        Ok(PcaRule::Variance(t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal directions, largest variance first.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

/// Fits covariance PCA (`1 / (N - 1)` normalization) on the dataset's features.
pub fn fit_pca(dataset: &Dataset) -> Result<PcaModel> {
    let rows: Vec<&[f64]> = dataset.examples.iter().map(|e| e.features.as_slice()).collect();
    fit_rows(&rows)
}

pub fn fit_rows(rows: &[&[f64]]) -> Result<PcaModel> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidDataset(format!("PCA needs at least 2 samples, got {n}")));
    }
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: row.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centred = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let scale = 1.0 / (n - 1) as f64;

    let (mut eigenvalues, mut components) = if d <= n {
        let cov = centred.tr_mul(&centred) * scale;
        let eig = SymmetricEigen::new(cov);
        let vectors: Vec<Vec<f64>> = (0..d).map(|k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), vectors)
    } else {
        let gram = (&centred * centred.transpose()) * scale;
        let eig = SymmetricEigen::new(gram);
        let mut vectors = Vec::with_capacity(n);
        for k in 0..n {
            let u = eig.eigenvectors.column(k);
            vectors.push((centred.transpose() * u).iter().copied().collect::<Vec<f64>>());
        }
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), vectors)
    };

    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));
    let largest = eigenvalues[order[0]].max(0.0);
    let keep = order
        .into_iter()
        .filter(|&k| largest > 0.0 && eigenvalues[k] > ZERO_EIGENVALUE * largest)
        .take((n - 1).min(d))
        .collect::<Vec<_>>();

    let mut kept_values = Vec::with_capacity(keep.len());
    let mut kept_vectors = Vec::with_capacity(keep.len());
    for k in keep {
        let mut v = std::mem::take(&mut components[k]);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let pivot = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        kept_values.push(std::mem::take(&mut eigenvalues[k]));
        kept_vectors.push(v);
    }
    orthonormalize(&mut kept_vectors);

    Ok(PcaModel {
        mean,
        components: kept_vectors,
        eigenvalues: kept_values,
    })
}

/// One modified Gram-Schmidt pass to clean up round-off from the Gram route.
fn orthonormalize(vectors: &mut [Vec<f64>]) {
    for k in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(k);
        let v = &mut rest[0];
        for u in done.iter() {
            let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Cumulative variance ratio after each component count `1..=rank`.
    pub fn cumulative_ratio(&self) -> Vec<f64> {
        let total = self.total_variance();
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|&e| {
                acc += e;
                acc / total
            })
            .collect()
    }

    pub fn select_components(&self, rule: PcaRule) -> usize {
        select_from_eigenvalues(&self.eigenvalues, rule)
    }

    /// Coordinates of `x - mean` on the first `m` components.
    pub fn project(&self, x: &[f64], m: usize) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if m == 0 || m > self.rank() {
            return Err(Error::InvalidParameter(format!(
                "component count {m} outside 1..={}",
                self.rank()
            )));
        }
        Ok(self.components[..m]
            .iter()
            .map(|c| {
                c.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(w, (v, mu))| w * (v - mu))
                    .sum()
            })
            .collect())
    }

    /// `mean + Σ coeff_k component_k`.
    pub fn reconstruct(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (c, comp) in coefficients.iter().zip(&self.components) {
            x.iter_mut().zip(comp).for_each(|(v, w)| *v += c * w);
        }
        x
    }

    /// Replaces every example's features by its first `m` coordinates.
    pub fn transform(&self, dataset: &Dataset, m: usize) -> Result<Dataset> {
        let examples = dataset
            .examples
            .iter()
            .map(|e| {
                Ok(Example {
                    features: self.project(&e.features, m)?,
                    ..e.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(dataset.space.clone(), examples)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join("\t");
        let mut out = format!("{FORMAT_HEADER}\t{FORMAT_VERSION}\ndim\t{}\nrank\t{}\n", self.dim(), self.rank());
        out.push_str(&format!("mean\t{}\n", join(&self.mean)));
        out.push_str(&format!("eigenvalues\t{}\n", join(&self.eigenvalues)));
        for c in &self.components {
            out.push_str(&format!("component\t{}\n", join(c)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        if lines.expect(FORMAT_HEADER)? != [FORMAT_VERSION] {
            return Err(Error::ModelFormat("unsupported PCA model version".into()));
        }
        let dim = parse_usize(lines.expect("dim")?.first().copied().unwrap_or(""))?;
        let rank = parse_usize(lines.expect("rank")?.first().copied().unwrap_or(""))?;
        let numbers = |fields: Vec<&str>, len: usize| -> Result<Vec<f64>> {
            let v = fields.iter().map(|t| parse_f64(t)).collect::<Result<Vec<_>>>()?;
            if v.len() != len {
                return Err(Error::ModelFormat(format!("expected {len} values, found {}", v.len())));
            }
            Ok(v)
        };
        let mean = numbers(lines.expect("mean")?, dim)?;
        let eigenvalues = numbers(lines.expect("eigenvalues")?, rank)?;
        let components = (0..rank)
            .map(|_| numbers(lines.expect("component")?, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(PcaModel {
            mean,
            components,
            eigenvalues,
        })
    }
}

/// Component count chosen by `rule` for a non-increasing spectrum.
pub fn select_from_eigenvalues(eigenvalues: &[f64], rule: PcaRule) -> usize {
    let largest = eigenvalues.first().copied().unwrap_or(0.0);
    let positive = eigenvalues
        .iter()
        .filter(|&&e| largest > 0.0 && e > ZERO_EIGENVALUE * largest)
        .count();
    match rule {
        PcaRule::Positive => positive,
        PcaRule::Variance(threshold) => {
            let total: f64 = eigenvalues.iter().sum();
            let mut acc = 0.0;
            for (m, &e) in eigenvalues.iter().enumerate() {
                acc += e;
                if acc / total >= threshold {
                    return m + 1;
                }
            }
            eigenvalues.len()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(points: &[&[f64]]) -> PcaModel {
        fit_rows(points).unwrap()
    }

    #[test]
    fn rank_one_line() {
        let model = fit(&[&[0.0, 0.0], &[1.0, 2.0], &[2.0, 4.0], &[-1.0, -2.0]]);
        assert_eq!(model.rank(), 1);
        let expected = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()];
        for (a, b) in model.components[0].iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_cross() {
        let model = fit(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        assert_eq!(model.rank(), 2);
        assert!((model.eigenvalues[0] - model.eigenvalues[1]).abs() < 1e-12);
        assert!((model.eigenvalues[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_from_eigenvalues(&[9.0, 1.0], PcaRule::Variance(0.95)), 2);
        assert_eq!(select_from_eigenvalues(&[99.0, 1.0], PcaRule::Variance(0.95)), 1);
        assert_eq!(select_from_eigenvalues(&[5.0, 1.0, 1e-14], PcaRule::Positive), 2);
        assert_eq!("positive".parse::<PcaRule>().unwrap(), PcaRule::Positive);
        assert_eq!("0.98".parse::<PcaRule>().unwrap(), PcaRule::Variance(0.98));
        assert!("1.5".parse::<PcaRule>().is_err());
    }

    #[test]
    fn projection_errors_and_mean() {
        let model = fit(&[&[1.0, 0.0], &[-1.0, 0.5], &[0.0, 1.0]]);
        assert!(model.project(&model.mean, 1).unwrap().iter().all(|&v| v == 0.0));
        assert!(model.project(&[0.0], 1).is_err());
        assert!(model.project(&[0.0, 0.0], 3).is_err());
        assert!(model.project(&[0.0, 0.0], 0).is_err());
    }

    #[test]
    fn too_few_samples() {
        assert!(fit_rows(&[&[1.0, 2.0]]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let model = fit(&[&[1.0, 0.2, 3.0], &[-1.0, 0.5, 0.1], &[0.0, 1.0, 2.0], &[2.0, 2.0, 2.0]]);
        assert_eq!(PcaModel::from_text(&model.to_text()).unwrap(), model);
    }
}
