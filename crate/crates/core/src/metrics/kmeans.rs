//! Seeded k-means over sparse binary vectors.

use rand::Rng;

use crate::hash;

/// Binary bag-of-strings vector hashed into `dim` buckets: the sorted,
/// deduplicated indices of the set coordinates.
pub fn hashed_features<S: AsRef<str>>(items: &[S], dim: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = items
        .iter()
        .map(|s| (hash::fnv1a(s.as_ref().as_bytes()) % dim as u64) as u32)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

impl Clustering {
    /// Member indices of each cluster, in point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

fn sq_dist(point: &[u32], centroid: &[f64], centroid_norm: f64) -> f64 {
    // |x|^2 - 2 x.c + |c|^2 with x binary
    let dot: f64 = point.iter().map(|&i| centroid[i as usize]).sum();
    (point.len() as f64 - 2.0 * dot + centroid_norm).max(0.0)
}

fn sq_dist_points(a: &[u32], b: &[u32]) -> f64 {
    // symmetric difference size
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (a.len() + b.len() - 2 * common) as f64
}

/// k-means++ seeding followed by exactly `iterations` Lloyd steps.
///
/// Ties in assignment go to the lowest cluster index; a cluster left empty
/// keeps its previous centroid. Requires `points.len() >= k >= 1`.
pub fn kmeans<R: Rng>(
    points: &[Vec<u32>],
    dim: usize,
    k: usize,
    iterations: usize,
    rng: &mut R,
) -> Clustering {
    assert!(k >= 1 && points.len() >= k, "need at least k points");
    let n = points.len();

    // k-means++ seeding on point-to-point distances.
    let mut centers: Vec<usize> = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist_points(p, &points[centers[0]]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            if d2[pick] == 0.0 {
                // rounding at the tail: take the last point with mass
                pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // every point coincides with a center already; pick uniformly
            rng.random_range(0..n)
        };
        centers.push(next);
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist_points(p, &points[next]);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }

    let mut centroids: Vec<Vec<f64>> = centers
        .iter()
        .map(|&c| {
            let mut v = vec![0.0; dim];
            for &i in &points[c] {
                v[i as usize] = 1.0;
            }
            v
        })
        .collect();
    let mut assignments = vec![0usize; n];

    let assign = |centroids: &[Vec<f64>], assignments: &mut [usize]| {
        let norms: Vec<f64> = centroids.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let mut best = (f64::INFINITY, 0);
            for (ci, c) in centroids.iter().enumerate() {
                let d = sq_dist(p, c, norms[ci]);
                if d < best.0 {
                    best = (d, ci);
                }
            }
            *a = best.1;
        }
    };

    for _ in 0..iterations {
        assign(&centroids, &mut assignments);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sizes[a] += 1;
            for &i in p {
                sums[a][i as usize] += 1.0;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                let inv = 1.0 / sizes[c] as f64;
                centroids[c] = sums[c].iter().map(|x| x * inv).collect();
            }
        }
    }
    assign(&centroids, &mut assignments);
    Clustering {
        assignments,
        centroids,
    }
}
