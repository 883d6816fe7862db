//! Initialization: project the angles onto the unit circle/torus embedding,
//! cluster with k-means, then estimate each cluster's parameters by the
//! method of moments (mean-resultant-length inversion).

use crate::data::{AngleData, ComponentParams, MixtureState, ModelKind};
use crate::error::{Error, Result};
use crate::summaries::circ_mean;
use rand::Rng;

const KMEANS_RESTARTS: usize = 10;
const KMEANS_ITERS: usize = 50;
/// Moment estimates of κ are clamped into this range.
const KAPPA_RANGE: (f64, f64) = (1e-2, 500.0);

/// Fisher's rational approximation of A⁻¹, the inverse of
/// A(κ) = I₁(κ)/I₀(κ), mapping a mean resultant length to a von Mises κ.
fn vm_kappa_from_resultant(r: f64) -> f64 {
    let k = if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r * r + 3.0 * r)
    };
    k.clamp(KAPPA_RANGE.0, KAPPA_RANGE.1)
}

/// Wrapped normal κ from the resultant length: R̄ = exp(−1/(2κ)).
fn wnorm_kappa_from_resultant(r: f64) -> f64 {
    if r <= 0.0 {
        return KAPPA_RANGE.0;
    }
    let k = -1.0 / (2.0 * r.ln());
    k.clamp(KAPPA_RANGE.0, KAPPA_RANGE.1)
}

fn embed(data: &AngleData) -> Vec<Vec<f64>> {
    (0..data.len())
        .map(|i| {
            data.row(i)
                .iter()
                .flat_map(|&a| [a.cos(), a.sin()])
                .collect()
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Standard k-means with k-means++ seeding; returns assignments of the best
/// restart by within-cluster sum of squares.
fn kmeans<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    let dim = points[0].len();
    let mut best_assign = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;
    for _ in 0..KMEANS_RESTARTS {
        // k-means++ seeding.
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        centers.push(points[rng.random_range(0..n)].clone());
        while centers.len() < k {
            let d2: Vec<f64> = points
                .iter()
                .map(|p| {
                    centers
                        .iter()
                        .map(|c| sq_dist(p, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let total: f64 = d2.iter().sum();
            let next = if total <= 0.0 {
                rng.random_range(0..n)
            } else {
                let u: f64 = rng.random_range(0.0..total);
                let mut acc = 0.0;
                let mut idx = n - 1;
                for (i, &d) in d2.iter().enumerate() {
                    acc += d;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                idx
            };
            centers.push(points[next].clone());
        }
        // Lloyd iterations.
        let mut assign = vec![0usize; n];
        for _ in 0..KMEANS_ITERS {
            let mut changed = false;
            for (i, p) in points.iter().enumerate() {
                let (mut bj, mut bd) = (0usize, f64::INFINITY);
                for (j, c) in centers.iter().enumerate() {
                    let d = sq_dist(p, c);
                    if d < bd {
                        bd = d;
                        bj = j;
                    }
                }
                if assign[i] != bj {
                    assign[i] = bj;
                    changed = true;
                }
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (i, p) in points.iter().enumerate() {
                counts[assign[i]] += 1;
                for (s, &x) in sums[assign[i]].iter_mut().zip(p) {
                    *s += x;
                }
            }
            for j in 0..k {
                if counts[j] == 0 {
                    // Re-seed an emptied centroid from a random point.
                    centers[j] = points[rng.random_range(0..n)].clone();
                } else {
                    for (c, s) in centers[j].iter_mut().zip(&sums[j]) {
                        *c = s / counts[j] as f64;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = points
            .iter()
            .zip(&assign)
            .map(|(p, &j)| sq_dist(p, &centers[j]))
            .sum();
        if inertia < best_inertia {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    best_assign
}

fn cluster_moments(
    kind: ModelKind,
    data: &AngleData,
    members: &[usize],
) -> Result<ComponentParams<f64>> {
    let inv = |r: f64| match kind {
        ModelKind::Wnorm | ModelKind::Wnorm2 => wnorm_kappa_from_resultant(r),
        _ => vm_kappa_from_resultant(r),
    };
    let col = |c: usize| -> Vec<f64> { members.iter().map(|&i| data.row(i)[c]).collect() };
    let moments = |xs: &[f64]| -> (f64, f64) {
        let mu = circ_mean(xs).unwrap_or(xs[0]);
        let (s, co) = xs
            .iter()
            .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
        let r = (s * s + co * co).sqrt() / xs.len() as f64;
        (mu, inv(r))
    };
    if kind.is_bivariate() {
        let (mu1, k1) = moments(&col(0));
        let (mu2, k2) = moments(&col(1));
        Ok(ComponentParams::bivariate(mu1, mu2, k1, k2, 0.0))
    } else {
        let (mu, k) = moments(&col(0));
        Ok(ComponentParams::univariate(mu, k))
    }
}

/// Moment-based starting state: k-means on the embedded angles, circular
/// means and resultant-length κ estimates per cluster, κ₃ = 0, mixing
/// proportions from cluster sizes.
pub fn init_kmeans_moment<R: Rng>(
    data: &AngleData,
    kind: ModelKind,
    k: usize,
    rng: &mut R,
) -> Result<MixtureState<f64>> {
    if data.len() < k {
        return Err(Error::domain(format!(
            "initialization needs at least K = {k} observations, got {}",
            data.len()
        )));
    }
    data.check_kind(kind)?;
    if k == 1 {
        let members: Vec<usize> = (0..data.len()).collect();
        let comp = cluster_moments(kind, data, &members)?;
        return MixtureState::new(vec![comp], vec![1.0]);
    }
    let points = embed(data);
    let assign = kmeans(&points, k, rng);
    let mut comps = Vec::with_capacity(k);
    let mut pmix = Vec::with_capacity(k);
    for j in 0..k {
        let mut members: Vec<usize> = assign
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == j)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            // Emptied cluster after restarts: claim a random observation.
            members.push(rng.random_range(0..data.len()));
        }
        pmix.push(members.len() as f64 / data.len() as f64);
        comps.push(cluster_moments(kind, data, &members)?);
    }
    let total: f64 = pmix.iter().sum();
    for p in &mut pmix {
        *p /= total;
    }
    MixtureState::new(comps, pmix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{rmix, RngStream};

    #[test]
    fn single_cluster_uses_sample_moments() {
        let data = AngleData::Univariate(vec![1.0, 1.2, 0.8, 1.1, 0.9]);
        let mut rng = RngStream::new(1, 0).rng();
        let state = init_kmeans_moment(&data, ModelKind::Vm, 1, &mut rng).unwrap();
        assert_eq!(state.pmix, vec![1.0]);
        let want = circ_mean(&[1.0, 1.2, 0.8, 1.1, 0.9]).unwrap();
        assert!((state.comps[0].mu1 - want).abs() < 1e-12);
    }

    #[test]
    fn separated_clusters_recover_means() {
        let truth = MixtureState::new(
            vec![
                ComponentParams::bivariate(1.0, 1.0, 8.0, 8.0, 0.0),
                ComponentParams::bivariate(4.5, 4.5, 8.0, 8.0, 0.0),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let (data, _) = rmix(400, ModelKind::Vmsin, &truth, &mut rng).unwrap();
        let state = init_kmeans_moment(&data, ModelKind::Vmsin, 2, &mut rng).unwrap();
        let mut mus: Vec<f64> = state.comps.iter().map(|c| c.mu1).collect();
        mus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mus[0] - 1.0).abs() < 0.1, "{mus:?}");
        assert!((mus[1] - 4.5).abs() < 0.1, "{mus:?}");
        assert!(state.comps.iter().all(|c| c.kappa3 == 0.0));
    }

    #[test]
    fn too_few_observations_rejected() {
        let data = AngleData::Univariate(vec![1.0]);
        let mut rng = RngStream::new(3, 0).rng();
        assert!(init_kmeans_moment(&data, ModelKind::Vm, 2, &mut rng).is_err());
    }

    #[test]
    fn kappa_inversions_are_sane() {
        // A(2) ≈ 0.698: the inverse should return ~2.
        let a2 = crate::special::bessel_a(2.0f64).unwrap();
        let k = vm_kappa_from_resultant(a2);
        assert!((k - 2.0).abs() < 0.05, "k={k}");
        // Wrapped normal: R̄ = exp(−1/(2κ)) at κ=3 → invert.
        let r = (-1.0f64 / 6.0).exp();
        assert!((wnorm_kappa_from_resultant(r) - 3.0).abs() < 1e-12);
    }
}
