//! The data-augmentation Gibbs step: latent allocation draws from the
//! posterior membership probabilities, followed by a Dirichlet draw for the
//! mixing proportions.

use crate::data::AngleData;
use crate::densities::MixtureDensity;
use crate::error::{Error, Result};
use crate::scalar::log_sum_exp;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Sample a Dirichlet(α) vector by normalized Gamma draws.
pub fn sample_dirichlet<R: Rng>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut draws = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let g = Gamma::new(a, 1.0)
            .map_err(|e| Error::config(format!("invalid Dirichlet concentration: {e}")))?;
        draws.push(g.sample(rng));
    }
    let total: f64 = draws.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        // Degenerate underflow; fall back to the flat simplex midpoint.
        return Ok(vec![1.0 / alpha.len() as f64; alpha.len()]);
    }
    Ok(draws.into_iter().map(|d| d / total).collect())
}

/// One allocation sweep: draw each observation's component indicator from
/// its membership probabilities (computed in log space), count allocations,
/// then draw new mixing proportions from Dirichlet(α + n).
pub fn gibbs_allocation<R: Rng>(
    mixture: &MixtureDensity<f64>,
    data: &AngleData,
    alpha: &[f64],
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<usize>, Vec<f64>)> {
    let k = mixture.n_comp();
    if k == 1 {
        return Ok((vec![0; data.len()], vec![data.len()], vec![1.0]));
    }
    let mut labels = Vec::with_capacity(data.len());
    let mut counts = vec![0usize; k];
    for i in 0..data.len() {
        let lw = mixture.log_weights(data.row(i));
        let lse = log_sum_exp(&lw);
        if !lse.is_finite() {
            return Err(Error::degenerate(format!(
                "all component densities vanish at observation {i}"
            )));
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = k - 1;
        for (j, &l) in lw.iter().enumerate() {
            acc += (l - lse).exp();
            if u < acc {
                chosen = j;
                break;
            }
        }
        labels.push(chosen as u32);
        counts[chosen] += 1;
    }
    let posterior_alpha: Vec<f64> = alpha
        .iter()
        .zip(&counts)
        .map(|(&a, &n)| a + n as f64)
        .collect();
    let pmix = sample_dirichlet(&posterior_alpha, rng)?;
    Ok((labels, counts, pmix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ComponentParams, MixtureState, ModelKind};
    use crate::densities::EvalConfig;
    use crate::sampling::RngStream;

    #[test]
    fn single_component_allocation() {
        let state = MixtureState::new(
            vec![ComponentParams::univariate(1.0, 2.0)],
            vec![1.0],
        )
        .unwrap();
        let mixture = MixtureDensity::new(ModelKind::Vm, &state, EvalConfig::default()).unwrap();
        let data = AngleData::Univariate(vec![0.5, 1.5, 2.5]);
        let mut rng = RngStream::new(1, 0).rng();
        let (labels, counts, pmix) = gibbs_allocation(&mixture, &data, &[4.0], &mut rng).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        assert_eq!(counts, vec![3]);
        assert_eq!(pmix, vec![1.0]);
    }

    #[test]
    fn separated_components_allocate_by_proximity() {
        let state = MixtureState::new(
            vec![
                ComponentParams::univariate(1.0, 50.0),
                ComponentParams::univariate(4.0, 50.0),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let mixture = MixtureDensity::new(ModelKind::Vm, &state, EvalConfig::default()).unwrap();
        let data = AngleData::Univariate(vec![0.9, 1.1, 3.9, 4.1, 1.0, 4.0]);
        let mut rng = RngStream::new(2, 0).rng();
        let (labels, _, _) = gibbs_allocation(&mixture, &data, &[4.0, 4.0], &mut rng).unwrap();
        assert_eq!(&labels[..], &[0, 0, 1, 1, 0, 1]);
    }

    #[test]
    fn long_run_label_frequencies_match_membership() {
        let state = MixtureState::new(
            vec![
                ComponentParams::univariate(1.5, 2.0),
                ComponentParams::univariate(3.5, 1.0),
            ],
            vec![0.6, 0.4],
        )
        .unwrap();
        let mixture = MixtureDensity::new(ModelKind::Vm, &state, EvalConfig::default()).unwrap();
        let data = AngleData::Univariate(vec![2.4]);
        let want = mixture.membership(&[2.4]).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let mut count0 = 0usize;
        let reps = 10_000;
        for _ in 0..reps {
            let (labels, _, _) =
                gibbs_allocation(&mixture, &data, &[4.0, 4.0], &mut rng).unwrap();
            if labels[0] == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / reps as f64;
        assert!((freq - want[0]).abs() < 0.01, "freq {freq} vs {}", want[0]);
    }

    #[test]
    fn dirichlet_mean_matches_alpha() {
        let mut rng = RngStream::new(4, 0).rng();
        let alpha = [2.0, 6.0];
        let mut mean = [0.0, 0.0];
        let reps = 20_000;
        for _ in 0..reps {
            let p = sample_dirichlet(&alpha, &mut rng).unwrap();
            mean[0] += p[0];
            mean[1] += p[1];
        }
        assert!((mean[0] / reps as f64 - 0.25).abs() < 0.01);
        assert!((mean[1] / reps as f64 - 0.75).abs() < 0.01);
    }
}
