//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use oilcheck::dataset::{Dataset, Example, LabelSet, LabelSpace};
use oilcheck::mllvq::{surrogate_gradient, surrogate_loss, Polarity, PrototypeBook};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact fraction with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn zero() -> Self {
        Ratio::new(0, 1)
    }

    pub fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn div_int(self, k: i128) -> Ratio {
        Ratio::new(self.num, self.den * k)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn mean(values: &[Ratio]) -> Ratio {
    if values.is_empty() {
        return Ratio::zero();
    }
    values.iter().fold(Ratio::zero(), |a, &b| a.add(b)).div_int(values.len() as i128)
}

/// One example as the oracle sees it.
#[derive(Clone, Debug)]
pub struct Case {
    pub truth: BTreeSet<usize>,
    pub predicted: BTreeSet<usize>,
    pub scores: Vec<i64>,
}

/// Position (1-based) of label `l` when labels are sorted by descending
/// score, ties to the smaller index.
fn rank(scores: &[i64], l: usize) -> i128 {
    1 + (0..scores.len())
        .filter(|&k| scores[k] > scores[l] || (scores[k] == scores[l] && k < l))
        .count() as i128
}

fn f1(tp: i128, fp: i128, fn_: i128) -> Ratio {
    if 2 * tp + fp + fn_ == 0 {
        Ratio::zero()
    } else {
        Ratio::new(2 * tp, 2 * tp + fp + fn_)
    }
}

pub fn micro_f1(cases: &[Case], labels: usize) -> Ratio {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for c in cases {
        for l in 0..labels {
            match (c.truth.contains(&l), c.predicted.contains(&l)) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
    }
    f1(tp, fp, fn_)
}

pub fn macro_f1(cases: &[Case], labels: usize) -> Ratio {
    let mut per_label = Vec::new();
    for l in 0..labels {
        let tp = cases.iter().filter(|c| c.truth.contains(&l) && c.predicted.contains(&l)).count() as i128;
        let fp = cases.iter().filter(|c| !c.truth.contains(&l) && c.predicted.contains(&l)).count() as i128;
        let fn_ = cases.iter().filter(|c| c.truth.contains(&l) && !c.predicted.contains(&l)).count() as i128;
        if tp + fp + fn_ > 0 {
            per_label.push(f1(tp, fp, fn_));
        }
    }
    mean(&per_label)
}

pub fn one_error(cases: &[Case]) -> Ratio {
    let per: Vec<Ratio> = cases
        .iter()
        .map(|c| {
            let top = (0..c.scores.len()).find(|&l| rank(&c.scores, l) == 1).unwrap();
            Ratio::new(i128::from(!c.truth.contains(&top)), 1)
        })
        .collect();
    mean(&per)
}

pub fn average_precision(cases: &[Case]) -> Ratio {
    let per: Vec<Ratio> = cases
        .iter()
        .map(|c| {
            let terms: Vec<Ratio> = c
                .truth
                .iter()
                .map(|&l| {
                    let r = rank(&c.scores, l);
                    let above = c.truth.iter().filter(|&&k| rank(&c.scores, k) <= r).count() as i128;
                    Ratio::new(above, r)
                })
                .collect();
            mean(&terms)
        })
        .collect();
    mean(&per)
}

pub fn jaccard(cases: &[Case]) -> Ratio {
    let per: Vec<Ratio> = cases
        .iter()
        .map(|c| {
            let inter = c.truth.intersection(&c.predicted).count() as i128;
            let union = c.truth.union(&c.predicted).count() as i128;
            if union == 0 {
                Ratio::new(1, 1)
            } else {
                Ratio::new(inter, union)
            }
        })
        .collect();
    mean(&per)
}

pub fn exact_match(cases: &[Case]) -> Ratio {
    let per: Vec<Ratio> = cases
        .iter()
        .map(|c| Ratio::new(i128::from(c.truth == c.predicted), 1))
        .collect();
    mean(&per)
}

/// Every subset of `0..labels`, as bit masks turned into sets.
pub fn subsets(labels: usize) -> Vec<BTreeSet<usize>> {
    (0..1u32 << labels)
        .map(|mask| (0..labels).filter(|&l| mask & (1 << l) != 0).collect())
        .collect()
}

/// Exhaustive Real AdaBoost.MH round by brute force: every feature, every
/// split between sorted distinct values plus "everything above". Returns
/// the training-set responses `h(x_i, l)` of the chosen stump and its `Z`.
pub fn naive_round(rows: &[Vec<f64>], y: &[Vec<f64>], w: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = rows.len();
    let labels = y[0].len();
    let eps = 1.0 / (n * labels) as f64;
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for j in 0..rows[0].len() {
        let mut values: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut thresholds = vec![values[0] - 1.0];
        thresholds.extend(values.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        for &theta in &thresholds {
            // [branch][label][sign] with branch 1 = above
            let mut mass = vec![vec![[0.0f64; 2]; labels]; 2];
            for i in 0..n {
                let b = usize::from(rows[i][j] > theta);
                for l in 0..labels {
                    let s = usize::from(y[i][l] > 0.0);
                    mass[b][l][s] += w[i][l];
                }
            }
            let z: f64 = 2.0
                * mass
                    .iter()
                    .flat_map(|b| b.iter().map(|m| (m[0] * m[1]).sqrt()))
                    .sum::<f64>();
            if best.as_ref().is_none_or(|(bz, _)| z < *bz - 1e-12) {
                let conf: Vec<Vec<f64>> = mass
                    .iter()
                    .map(|b| b.iter().map(|m| 0.5 * ((m[1] + eps) / (m[0] + eps)).ln()).collect())
                    .collect();
                let h = (0..n).map(|i| conf[usize::from(rows[i][j] > theta)].clone()).collect();
                best = Some((z, h));
            }
        }
    }
    let (z, h) = best.unwrap();
    (h, z)
}

/// `rounds` rounds of the brute-force learner; training scores `f(x_i, l)`.
pub fn naive_boost(rows: &[Vec<f64>], y: &[Vec<f64>], rounds: usize) -> Vec<Vec<f64>> {
    let n = rows.len();
    let labels = y[0].len();
    let mut w = vec![vec![1.0 / (n * labels) as f64; labels]; n];
    let mut f = vec![vec![0.0; labels]; n];
    for _ in 0..rounds {
        let (h, _) = naive_round(rows, y, &w);
        let mut total = 0.0;
        for i in 0..n {
            for l in 0..labels {
                w[i][l] *= (-y[i][l] * h[i][l]).exp();
                f[i][l] += h[i][l];
                total += w[i][l];
            }
        }
        w.iter_mut().flatten().for_each(|v| *v /= total);
    }
    f
}

/// Dataset from `(features, labels)` pairs over labels named `l0, l1, ...`.
pub fn dataset(rows: &[(Vec<f64>, Vec<usize>)], labels: usize) -> Dataset {
    let space = LabelSpace::new((0..labels).map(|l| format!("l{l}"))).unwrap();
    let examples = rows
        .iter()
        .enumerate()
        .map(|(i, (x, ls))| Example::new(format!("r{i}"), x.clone(), ls.iter().copied().collect::<LabelSet>(), None).unwrap())
        .collect();
    Dataset::new(space, examples).unwrap()
}

const H: f64 = 1e-5;

fn random_book(rng: &mut ChaCha8Rng, labels: usize, per_class: usize, dim: usize) -> PrototypeBook {
    let space = LabelSpace::new((0..labels).map(|l| format!("l{l}"))).unwrap();
    let mut group = || -> Vec<Vec<Vec<f64>>> {
        (0..labels)
            .map(|_| (0..per_class).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect()
    };
    let positive = group();
    let negative = group();
    PrototypeBook::new(space, positive, negative).unwrap()
}

/// Smallest gap between the nearest and second-nearest prototype of each
/// group, and smallest |hinge argument| over all pairs.
fn distance_to_kink(book: &PrototypeBook, x: &[f64], labels: &LabelSet, alpha: f64) -> f64 {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    let mut gap = f64::INFINITY;
    let mut score = Vec::new();
    for l in 0..book.space().len() {
        let mut s = 0.0;
        for pol in [Polarity::Positive, Polarity::Negative] {
            let mut d: Vec<f64> = (0..book.per_class()).map(|k| sq(x, book.position(book.slot(l, pol, k)))).collect();
            d.sort_by(f64::total_cmp);
            if d.len() > 1 {
                gap = gap.min(d[1] - d[0]);
            }
            s += if pol == Polarity::Negative { d[0] } else { -d[0] };
        }
        score.push(s);
    }
    for &p in labels {
        for q in (0..score.len()).filter(|q| !labels.contains(q)) {
            gap = gap.min((alpha - score[p] + score[q]).abs());
        }
    }
    gap
}

/// Relative error between the analytic surrogate gradient and central
/// differences at `points` random evaluation points away from kinks.
pub fn gradient_check(points: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::new();
    while errors.len() < points {
        let labels = rng.random_range(2..5);
        let per_class = rng.random_range(1..4);
        let dim = rng.random_range(1..5);
        let mut book = random_book(&mut rng, labels, per_class, dim);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let truth: LabelSet = (0..labels).filter(|_| rng.random_bool(0.4)).collect();
        if truth.is_empty() || truth.len() == labels {
            continue;
        }
        let alpha = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.0) };
        if distance_to_kink(&book, &x, &truth, alpha) < 1e-3 {
            continue;
        }
        let grad = surrogate_gradient(&book, &x, &truth, alpha).unwrap();
        let mut analytic = vec![0.0; book.len() * dim];
        for &(slot, c) in &grad.terms {
            for (j, (xj, wj)) in x.iter().zip(book.position(slot)).enumerate() {
                analytic[slot * dim + j] = c * (xj - wj);
            }
        }
        let mut numeric = vec![0.0; book.len() * dim];
        for slot in 0..book.len() {
            for j in 0..dim {
                let orig = book.position(slot)[j];
                book.position_mut(slot)[j] = orig + H;
                let up = surrogate_loss(&book, &x, &truth, alpha).unwrap();
                book.position_mut(slot)[j] = orig - H;
                let down = surrogate_loss(&book, &x, &truth, alpha).unwrap();
                book.position_mut(slot)[j] = orig;
                numeric[slot * dim + j] = (up - down) / (2.0 * H);
            }
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
        assert!((grad.loss - surrogate_loss(&book, &x, &truth, alpha).unwrap()).abs() < 1e-12);
        errors.push(if scale == 0.0 { diff } else { diff / scale });
    }
    errors
}

