//! Trajectory clustering under the discrete Fréchet metric.
//!
//! Fréchet space has no usable mean, so clusters are represented by medoids
//! (PAM). The spatial centroids in [`ClusterSummary`] are display aids only.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use serde::Serialize;

use crate::rng;
use crate::trajectory::{frechet_points, Point, Trajectory};
use crate::{Error, Result};

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps row-major values, checking shape, symmetry, sign and diagonal.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::invalid("distance matrix must be non-empty and n×n"));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::invalid("distance matrix diagonal must be zero"));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || v != values[j * n + i] {
                    return Err(Error::invalid("distance matrix must be symmetric and non-negative"));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// All pairwise discrete Fréchet distances.
pub fn pairwise_frechet(trajectories: &[Trajectory]) -> Result<DistanceMatrix> {
    let n = trajectories.len();
    if n == 0 {
        return Err(Error::invalid("cannot build a distance matrix for zero trajectories"));
    }
    if trajectories.iter().any(|t| t.is_empty()) {
        return Err(Error::invalid("empty trajectory in clustering input"));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = frechet_points(trajectories[i].points(), trajectories[j].points());
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster index per item, in `[0, k)`.
    pub assignment: Vec<usize>,
    /// Item index of each cluster's medoid, ascending; cluster `c` is
    /// represented by `medoids[c]`.
    pub medoids: Vec<usize>,
    /// Total distance of every item to its medoid.
    pub cost: f64,
}

/// Sum over items of the distance to the nearest medoid.
pub fn total_cost(matrix: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..matrix.n())
        .map(|i| {
            medoids
                .iter()
                .map(|&m| matrix.get(i, m))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Seeded random starts tried after the greedy one.
const RANDOM_STARTS: usize = 4;

/// PAM: greedy BUILD medoids plus a few seeded random starts, each improved
/// by best-improvement single swaps until no swap lowers the total cost.
/// The cheapest local optimum wins; ties keep the earliest start.
pub fn k_medoids(matrix: &DistanceMatrix, k: usize, seed: u64) -> Result<Clustering> {
    let n = matrix.n();
    if k == 0 || k > n {
        return Err(Error::invalid(alloc::format!(
            "k-medoids needs 1 <= k <= n (k = {k}, n = {n})"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut best = swap_descent(matrix, build(matrix, k));
    for _ in 0..RANDOM_STARTS {
        let candidate = swap_descent(matrix, index::sample(&mut rng, n, k).into_vec());
        if candidate.1 < best.1 - 1e-12 * (1.0 + best.1) {
            best = candidate;
        }
    }
    let mut medoids = best.0;
    medoids.sort_unstable();
    let assignment = assign(matrix, &medoids);
    let cost = (0..n).map(|i| matrix.get(i, medoids[assignment[i]])).sum();
    Ok(Clustering {
        k,
        assignment,
        medoids,
        cost,
    })
}

/// Greedy initialization: each new medoid is the item that lowers the
/// total cost most; ties go to the lowest index.
fn build(matrix: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = matrix.n();
    let mut medoids = Vec::with_capacity(k);
    let mut trial = Vec::with_capacity(k);
    while medoids.len() < k {
        let mut pick: Option<(f64, usize)> = None;
        for candidate in 0..n {
            if medoids.contains(&candidate) {
                continue;
            }
            trial.clone_from(&medoids);
            trial.push(candidate);
            let c = total_cost(matrix, &trial);
            if pick.is_none_or(|(b, _)| c < b) {
                pick = Some((c, candidate));
            }
        }
        medoids.push(pick.expect("k <= n leaves a candidate").1);
    }
    medoids
}

fn swap_descent(matrix: &DistanceMatrix, mut medoids: Vec<usize>) -> (Vec<usize>, f64) {
    let (n, k) = (matrix.n(), medoids.len());
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    let mut cost = total_cost(matrix, &medoids);
    let mut trial = medoids.clone();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for candidate in 0..n {
                if is_medoid[candidate] {
                    continue;
                }
                trial.copy_from_slice(&medoids);
                trial[slot] = candidate;
                let c = total_cost(matrix, &trial);
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, slot, candidate));
                }
            }
        }
        match best {
            Some((c, slot, candidate)) if c < cost - 1e-12 * (1.0 + cost) => {
                is_medoid[medoids[slot]] = false;
                is_medoid[candidate] = true;
                medoids[slot] = candidate;
                cost = c;
            }
            _ => return (medoids, cost),
        }
    }
}

/// Nearest medoid per item, ties to the lowest cluster index; a medoid is
/// always a member of its own cluster.
fn assign(matrix: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..matrix.n())
        .map(|i| {
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                if matrix.get(i, medoids[c]) < matrix.get(i, medoids[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    /// Mean (x, y) over every point of every member trajectory.
    pub centroid: Point,
    /// Item index of the medoid trajectory.
    pub medoid: usize,
}

pub fn cluster_report(clustering: &Clustering, trajectories: &[Trajectory]) -> Result<Vec<ClusterSummary>> {
    if clustering.assignment.len() != trajectories.len() {
        return Err(Error::invalid("clustering does not match the trajectory list"));
    }
    let mut sums = vec![(0usize, 0usize, 0.0f64, 0.0f64); clustering.k];
    for (traj, &c) in trajectories.iter().zip(&clustering.assignment) {
        let s = &mut sums[c];
        s.0 += 1;
        for p in traj.points() {
            s.1 += 1;
            s.2 += p.x;
            s.3 += p.y;
        }
    }
    Ok(sums
        .iter()
        .enumerate()
        .map(|(c, &(size, npts, sx, sy))| {
            let centroid = if npts > 0 {
                Point::new(sx / npts as f64, sy / npts as f64, 0.0)
            } else {
                Point::new(0.0, 0.0, 0.0)
            };
            ClusterSummary {
                cluster: c,
                size,
                centroid,
                medoid: clustering.medoids[c],
            }
        })
        .collect())
}

/// Mean silhouette coefficient; reporting aid only, never used to pick k.
pub fn silhouette(matrix: &DistanceMatrix, clustering: &Clustering) -> f64 {
    let n = matrix.n();
    if clustering.k < 2 || n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = clustering.assignment[i];
        let mut sums = vec![(0.0f64, 0usize); clustering.k];
        for j in 0..n {
            if i != j {
                let s = &mut sums[clustering.assignment[j]];
                s.0 += matrix.get(i, j);
                s.1 += 1;
            }
        }
        if sums[own].1 == 0 {
            continue;
        }
        let a = sums[own].0 / sums[own].1 as f64;
        let b = sums
            .iter()
            .enumerate()
            .filter(|&(c, s)| c != own && s.1 > 0)
            .map(|(_, s)| s.0 / s.1 as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() && a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(y: f64) -> Trajectory {
        Trajectory::from_xy(&[(0.0, y), (5.0, y), (10.0, y)]).unwrap()
    }

    #[test]
    fn single_and_duplicate_matrices() {
        let m = pairwise_frechet(&[line(0.0)]).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 0.0);
        let m = pairwise_frechet(&[line(1.0), line(1.0)]).unwrap();
        assert!(m.row(0).iter().chain(m.row(1)).all(|&v| v == 0.0));
        assert!(pairwise_frechet(&[]).is_err());
    }

    #[test]
    fn k_equals_n_is_zero_cost() {
        let trajs: Vec<_> = (0..5).map(|i| line(i as f64 * 3.0)).collect();
        let m = pairwise_frechet(&trajs).unwrap();
        let c = k_medoids(&m, 5, 1).unwrap();
        assert_eq!(c.cost, 0.0);
        assert_eq!(c.medoids, vec![0, 1, 2, 3, 4]);
        assert_eq!(c.assignment, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn separates_duplicated_groups() {
        let trajs = vec![line(0.0), line(100.0), line(0.0), line(0.0), line(100.0)];
        let m = pairwise_frechet(&trajs).unwrap();
        for seed in 0..10 {
            let c = k_medoids(&m, 2, seed).unwrap();
            assert_eq!(c.cost, 0.0);
            let a = &c.assignment;
            assert_eq!(a[0], a[2]);
            assert_eq!(a[0], a[3]);
            assert_eq!(a[1], a[4]);
            assert_ne!(a[0], a[1]);
        }
    }

    #[test]
    fn medoids_stay_in_their_clusters_with_duplicates() {
        let trajs = vec![line(0.0), line(0.0), line(0.0)];
        let m = pairwise_frechet(&trajs).unwrap();
        let c = k_medoids(&m, 2, 3).unwrap();
        for (cl, &med) in c.medoids.iter().enumerate() {
            assert_eq!(c.assignment[med], cl);
        }
    }

    #[test]
    fn k_out_of_range() {
        let m = pairwise_frechet(&[line(0.0), line(1.0)]).unwrap();
        assert!(k_medoids(&m, 3, 0).is_err());
        assert!(k_medoids(&m, 0, 0).is_err());
    }

    #[test]
    fn report_singletons() {
        let trajs = vec![
            Trajectory::from_xy(&[(0.0, 0.0), (2.0, 0.0)]).unwrap(),
            Trajectory::from_xy(&[(10.0, 10.0), (10.0, 14.0)]).unwrap(),
        ];
        let m = pairwise_frechet(&trajs).unwrap();
        let c = k_medoids(&m, 2, 0).unwrap();
        let r = cluster_report(&c, &trajs).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|s| s.size == 1));
        assert_eq!((r[0].centroid.x, r[0].centroid.y), (1.0, 0.0));
        assert_eq!((r[1].centroid.x, r[1].centroid.y), (10.0, 12.0));
        assert!(cluster_report(&c, &trajs[..1]).is_err());
    }

    #[test]
    fn silhouette_of_clean_split_is_high() {
        let trajs = vec![line(0.0), line(1.0), line(100.0), line(101.0)];
        let m = pairwise_frechet(&trajs).unwrap();
        let c = k_medoids(&m, 2, 0).unwrap();
        assert!(silhouette(&m, &c) > 0.9);
    }

    #[test]
    fn matrix_validation() {
        assert!(DistanceMatrix::from_values(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_values(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_values(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }
}
