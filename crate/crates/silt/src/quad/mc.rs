//! Monte Carlo expectations with reproducible parallel substreams.
//!
//! Work is cut into fixed-size chunks; chunk `c` draws from an
//! independent counter-based substream (`ChaCha8`, stream id `c + 1`,
//! all seeded from the caller's seed).  Chunk statistics are merged
//! sequentially in chunk order, so the result is bit-identical for a
//! given `(seed, n)` no matter how many threads executed the chunks,
//! and re-running with more samples reuses no stream.
//!
//! Heavy-tailed integrands (the `1/P` integrands of the generalized
//! gamma function at `n = 0` have infinite variance under the plain
//! estimator) are handled by a median-of-means mode over 32 groups of
//! chunks; the default `Auto` mode switches to it when the sample
//! kurtosis explodes.

use super::{IntegralEstimate, Method, QuadError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Sampling law for [`mc_expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// `dim` independent Exponential(1) coordinates.
    IidExponential,
    /// Uniform point on the standard `dim`-simplex (Dirichlet(1,..,1)):
    /// iid exponentials normalized by their sum.
    DirichletSimplex,
}

/// How the point estimate and its error figure are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMode {
    /// Sample mean and standard error.
    Plain,
    /// Median of 32 group means; error is the scaled spread of the
    /// group means.  Robust when the plain variance is unreliable.
    MedianOfMeans,
    /// Plain, unless the sample kurtosis exceeds a threshold, then
    /// median-of-means.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct McOptions {
    pub error_mode: ErrorMode,
}

const CHUNK: u64 = 1 << 14;
const GROUPS: u64 = 32;
/// Excess-kurtosis level above which `Auto` distrusts the plain
/// standard error.
const KURTOSIS_THRESHOLD: f64 = 100.0;
/// Median-of-means error inflation: sqrt(pi/2), the asymptotic ratio
/// of the median's spread to the mean's for normal group means.
const MEDIAN_FACTOR: f64 = 1.253_314_137_315_500_3;

#[derive(Clone, Copy, Default)]
struct ChunkStat {
    sum: f64,
    sum2: f64,
    sum3: f64,
    sum4: f64,
    count: u64,
    rejected: u64,
}

/// Estimate `E[g(x)]` under `sampler` from `n` samples.  Uses
/// [`ErrorMode::Auto`]; see [`mc_expectation_with`].
pub fn mc_expectation<G>(
    g: G,
    dim: usize,
    sampler: Sampler,
    n: u64,
    seed: u64,
) -> Result<IntegralEstimate, QuadError>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    mc_expectation_with(g, dim, sampler, n, seed, McOptions::default())
}

/// Estimate `E[g(x)]` with explicit options.
///
/// Non-finite integrand values taint the run: the finite samples still
/// produce a partial estimate, but the result is an error reporting how
/// many points were rejected.
pub fn mc_expectation_with<G>(
    g: G,
    dim: usize,
    sampler: Sampler,
    n: u64,
    seed: u64,
    opt: McOptions,
) -> Result<IntegralEstimate, QuadError>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if n < 2 {
        return Err(QuadError::TooFewSamples(n));
    }
    let chunks = n.div_ceil(CHUNK);
    let stats: Vec<ChunkStat> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            run_chunk(&g, dim, sampler, seed, c, len)
        })
        .collect();

    // Sequential merge in chunk order: the arithmetic below never
    // depends on which thread ran which chunk.
    let mut all = ChunkStat::default();
    let mut group_sum = [0.0; GROUPS as usize];
    let mut group_count = [0u64; GROUPS as usize];
    for (c, s) in stats.iter().enumerate() {
        all.sum += s.sum;
        all.sum2 += s.sum2;
        all.sum3 += s.sum3;
        all.sum4 += s.sum4;
        all.count += s.count;
        all.rejected += s.rejected;
        let gi = c % GROUPS as usize;
        group_sum[gi] += s.sum;
        group_count[gi] += s.count;
    }

    if all.count == 0 {
        return Err(QuadError::Tainted {
            rejected: all.rejected,
            total: n,
            partial: IntegralEstimate {
                value: f64::NAN,
                error: f64::INFINITY,
                evaluations: n,
                method: Method::MonteCarlo,
                seed: Some(seed),
            },
        });
    }

    let cnt = all.count as f64;
    let mean = all.sum / cnt;
    let m2 = (all.sum2 - cnt * mean * mean).max(0.0);
    let plain_se = if all.count > 1 {
        (m2 / (cnt - 1.0) / cnt).sqrt()
    } else {
        f64::INFINITY
    };

    let use_mom = match opt.error_mode {
        ErrorMode::Plain => false,
        ErrorMode::MedianOfMeans => true,
        ErrorMode::Auto => {
            if m2 == 0.0 {
                false
            } else {
                let m4 = all.sum4 - 4.0 * mean * all.sum3 + 6.0 * mean * mean * all.sum2
                    - 3.0 * cnt * mean.powi(4);
                let kurtosis = cnt * m4 / (m2 * m2) - 3.0;
                !kurtosis.is_finite() || kurtosis > KURTOSIS_THRESHOLD
            }
        }
    };

    let (value, error) = if use_mom {
        median_of_means(&group_sum, &group_count).unwrap_or((mean, plain_se))
    } else {
        (mean, plain_se)
    };

    let estimate = IntegralEstimate {
        value,
        error,
        evaluations: n,
        method: Method::MonteCarlo,
        seed: Some(seed),
    };
    if all.rejected > 0 {
        return Err(QuadError::Tainted {
            rejected: all.rejected,
            total: n,
            partial: estimate,
        });
    }
    Ok(estimate)
}

fn median_of_means(group_sum: &[f64], group_count: &[u64]) -> Option<(f64, f64)> {
    let mut means: Vec<f64> = group_sum
        .iter()
        .zip(group_count)
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    let k = means.len();
    if k < 2 {
        return None;
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    };
    let kf = k as f64;
    let gm = means.iter().sum::<f64>() / kf;
    let var = means.iter().map(|m| (m - gm) * (m - gm)).sum::<f64>() / (kf - 1.0);
    Some((median, MEDIAN_FACTOR * (var / kf).sqrt()))
}

fn run_chunk<G>(g: &G, dim: usize, sampler: Sampler, seed: u64, chunk: u64, len: u64) -> ChunkStat
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk + 1);
    let mut x = vec![0.0; dim];
    let mut stat = ChunkStat::default();
    for _ in 0..len {
        for xi in x.iter_mut() {
            *xi = sample_exponential(&mut rng);
        }
        if sampler == Sampler::DirichletSimplex {
            let total: f64 = x.iter().sum();
            for xi in x.iter_mut() {
                *xi /= total;
            }
        }
        let y = g(&x);
        if y.is_finite() {
            let y2 = y * y;
            stat.sum += y;
            stat.sum2 += y2;
            stat.sum3 += y2 * y;
            stat.sum4 += y2 * y2;
            stat.count += 1;
        } else {
            stat.rejected += 1;
        }
    }
    stat
}

#[inline]
fn sample_exponential<R: Rng>(rng: &mut R) -> f64 {
    // gen::<f64>() is uniform on [0, 1); 1-u is in (0, 1], so the log
    // is finite and the result nonnegative.
    -(1.0 - rng.gen::<f64>()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_is_exact() {
        let est = mc_expectation(|_| 2.5, 3, Sampler::IidExponential, 10_000, 7).unwrap();
        assert_eq!(est.value, 2.5);
        assert_eq!(est.error, 0.0);
        assert_eq!(est.evaluations, 10_000);
    }

    #[test]
    fn exponential_mean_within_four_sigma() {
        let dim = 5;
        let est = mc_expectation(
            |x| x.iter().sum::<f64>(),
            dim,
            Sampler::IidExponential,
            200_000,
            11,
        )
        .unwrap();
        assert!(
            (est.value - dim as f64).abs() < 4.0 * est.error,
            "{} +- {}",
            est.value,
            est.error
        );
        // Sum of 5 exponentials has variance 5.
        let expected_se = (5.0_f64 / 200_000.0).sqrt();
        assert!((est.error - expected_se).abs() < 0.3 * expected_se);
    }

    #[test]
    fn dirichlet_pair_moment() {
        // For Dirichlet(1,1,1,1): E[u1 u2] = Gamma(4)/Gamma(6) = 1/20.
        let est =
            mc_expectation(|u| u[0] * u[1], 4, Sampler::DirichletSimplex, 400_000, 3).unwrap();
        assert!((est.value - 0.05).abs() < 4.0 * est.error);
    }

    #[test]
    fn replay_is_bit_identical_across_thread_counts() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                mc_expectation(
                    |x| (x[0] * x[1]).sqrt(),
                    2,
                    Sampler::IidExponential,
                    300_000,
                    99,
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        let c = run(3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
        assert_eq!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn different_seeds_differ() {
        let a = mc_expectation(|x| x[0], 1, Sampler::IidExponential, 10_000, 1).unwrap();
        let b = mc_expectation(|x| x[0], 1, Sampler::IidExponential, 10_000, 2).unwrap();
        assert_ne!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn standard_error_scales_like_sqrt_n() {
        let f = |x: &[f64]| x[0] + x[1].sin();
        let small = mc_expectation(f, 2, Sampler::IidExponential, 10_000, 5).unwrap();
        let large = mc_expectation(f, 2, Sampler::IidExponential, 1_000_000, 5).unwrap();
        let ratio = small.error / large.error;
        assert!(
            (7.0..13.0).contains(&ratio),
            "se ratio {ratio} outside 10 +- 30%"
        );
    }

    #[test]
    fn tainted_samples_reported() {
        // Blows up on roughly 1 - e^{-0.01} of draws.
        let err = mc_expectation(
            |x| {
                if x[0] < 0.01 {
                    f64::INFINITY
                } else {
                    x[0]
                }
            },
            1,
            Sampler::IidExponential,
            50_000,
            13,
        )
        .unwrap_err();
        match err {
            QuadError::Tainted {
                rejected,
                total,
                partial,
            } => {
                assert!(rejected > 200 && rejected < 900, "rejected {rejected}");
                assert_eq!(total, 50_000);
                assert!(partial.value.is_finite());
            }
            other => panic!("expected Tainted, got {other:?}"),
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            mc_expectation(|_| 1.0, 1, Sampler::IidExponential, 1, 0),
            Err(QuadError::TooFewSamples(1))
        ));
    }

    #[test]
    fn median_of_means_tracks_plain_mean_on_gaussian_like_data() {
        let f = |x: &[f64]| x[0];
        let plain = mc_expectation_with(
            f,
            1,
            Sampler::IidExponential,
            2_000_000,
            21,
            McOptions {
                error_mode: ErrorMode::Plain,
            },
        )
        .unwrap();
        let mom = mc_expectation_with(
            f,
            1,
            Sampler::IidExponential,
            2_000_000,
            21,
            McOptions {
                error_mode: ErrorMode::MedianOfMeans,
            },
        )
        .unwrap();
        assert!((plain.value - 1.0).abs() < 4.0 * plain.error);
        assert!((mom.value - 1.0).abs() < 4.0 * mom.error);
        assert!((plain.value - mom.value).abs() < 4.0 * plain.error.hypot(mom.error));
    }
}
