//! Lloyd's k-means used to seed prototype positions.

use rand::seq::index::sample;
use rand::Rng;

/// Upper bound on Lloyd iterations.
pub const MAX_ITERATIONS: usize = 100;

/// Magnitude of the uniform jitter added when a group has fewer points than centers.
pub const JITTER: f64 = 1e-3;

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(center, x);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// `k` centers for `points`. Groups smaller than `k` get jittered copies of
/// their points; otherwise centers start at `k` distinct sampled points and
/// Lloyd iterations run until assignments stop changing.
pub fn kmeans<R: Rng + ?Sized>(points: &[&[f64]], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(!points.is_empty() && k > 0, "k-means needs points and at least one center");
    let n = points.len();
    if n < k {
        return (0..k)
            .map(|c| {
                points[c % n]
                    .iter()
                    .map(|&v| v + rng.random_range(-JITTER..=JITTER))
                    .collect()
            })
            .collect();
    }

    let mut centers: Vec<Vec<f64>> = sample(rng, n, k).into_iter().map(|i| points[i].to_vec()).collect();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (a, x) in assignment.iter_mut().zip(points) {
            let c = nearest(&centers, x);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, x) in assignment.iter().zip(points) {
            counts[a] += 1;
            sums[a].iter_mut().zip(x.iter()).for_each(|(s, v)| *s += v);
        }
        for ((center, sum), count) in centers.iter_mut().zip(sums).zip(counts) {
            if count > 0 {
                *center = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    centers
}
