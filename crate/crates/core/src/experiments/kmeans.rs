//! Lloyd's k-means with k-means++ seeding and restarts.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster of each row, numbered in order of first appearance.
    pub labels: Vec<usize>,
    pub inertia: f64,
}

const MAX_ITER: usize = 300;

fn sq_dist(data: &DMatrix<f64>, i: usize, centres: &DMatrix<f64>, c: usize) -> f64 {
    data.row(i).iter().zip(centres.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plus_plus(data: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = data.nrows();
    let mut centres = DMatrix::zeros(k, data.ncols());
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    centres.set_row(0, &data.row(first));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(data, i, &centres, 0)).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if u < d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            // Every point coincides with a centre: take an unused row uniformly.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centres.set_row(c, &data.row(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(data, i, &centres, c));
        }
    }
    centres
}

fn lloyd(data: &DMatrix<f64>, mut centres: DMatrix<f64>) -> (Vec<usize>, f64) {
    let (n, k) = (data.nrows(), centres.nrows());
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let best = (0..k)
                .map(|c| (c, sq_dist(data, i, &centres, c)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
                .0;
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let mean = data.select_rows(&members).row_mean();
            centres.set_row(c, &mean);
        }
    }
    let inertia = (0..n).map(|i| sq_dist(data, i, &centres, labels[i])).sum();
    (labels, inertia)
}

fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// k-means on the rows of `data`; the lowest-inertia restart wins.
pub fn kmeans(data: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    if k == 0 || k > data.nrows() {
        return Err(Error::InvalidArgument(format!("cluster count {k} outside 1..={}", data.nrows())));
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts.max(1) {
        let mut rng = seed::rng(seed, &[r as u64]);
        let (labels, inertia) = lloyd(data, plus_plus(data, k, &mut rng));
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansResult { labels: relabel(&labels), inertia });
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cluster_per_point() {
        let data = DMatrix::from_fn(6, 2, |i, j| (i * i + j) as f64);
        let res = kmeans(&data, 6, 10, 1).unwrap();
        assert_eq!(res.inertia, 0.0);
        assert_eq!(res.labels, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn single_cluster() {
        let data = DMatrix::from_fn(5, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(kmeans(&data, 1, 5, 1).unwrap().labels, vec![0; 5]);
    }

    #[test]
    fn recovers_planted_groups() {
        let data = DMatrix::from_fn(10, 2, |i, j| if i % 2 == 0 { 10.0 + (i + j) as f64 * 0.01 } else { (i * j) as f64 * 0.01 });
        let res = kmeans(&data, 2, 20, 3).unwrap();
        assert_eq!(res.labels, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn duplicate_rows_do_not_break_seeding() {
        let data = DMatrix::from_element(4, 2, 1.0);
        let res = kmeans(&data, 3, 3, 0).unwrap();
        assert_eq!(res.inertia, 0.0);
    }

    #[test]
    fn rejects_bad_k() {
        let data = DMatrix::zeros(3, 1);
        assert!(kmeans(&data, 0, 1, 0).is_err());
        assert!(kmeans(&data, 4, 1, 0).is_err());
    }
}
