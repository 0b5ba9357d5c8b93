//! Univariate slice sampler with stepping out and shrinkage (Neal, 2003).

use rand::Rng;

/// Upper bound on shrinkage proposals before giving up and keeping the
/// current point. Only reachable when the log density is badly behaved.
const MAX_SHRINK: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceSampler {
    pub width: f64,
    pub max_steps: u32,
}

impl Default for SliceSampler {
    fn default() -> Self {
        SliceSampler {
            width: 1.0,
            max_steps: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceOutcome {
    pub value: f64,
    /// Log-density evaluations spent, including the one at the start point.
    pub evaluations: u32,
    pub step_outs: u32,
}

impl SliceSampler {
    /// One transition from `x0` targeting `exp(log_density)`.
    pub fn sample<R, F>(&self, x0: f64, mut log_density: F, rng: &mut R) -> SliceOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(f64) -> f64,
    {
        let mut evaluations = 0;
        let mut eval = |x: f64| {
            evaluations += 1;
            log_density(x)
        };

        // log of a uniform draw under the density at x0
        let level = eval(x0) + rng.random::<f64>().ln();

        let w = self.width;
        let mut left = x0 - w * rng.random::<f64>();
        let mut right = left + w;
        let mut j = (self.max_steps as f64 * rng.random::<f64>()).floor() as u32;
        let mut k = self.max_steps.saturating_sub(1).saturating_sub(j);
        let mut step_outs = 0;
        while j > 0 && level < eval(left) {
            left -= w;
            j -= 1;
            step_outs += 1;
        }
        while k > 0 && level < eval(right) {
            right += w;
            k -= 1;
            step_outs += 1;
        }

        for _ in 0..MAX_SHRINK {
            let x1 = left + (right - left) * rng.random::<f64>();
            if level < eval(x1) {
                return SliceOutcome {
                    value: x1,
                    evaluations,
                    step_outs,
                };
            }
            if x1 < x0 {
                left = x1;
            } else {
                right = x1;
            }
        }
        SliceOutcome {
            value: x0,
            evaluations,
            step_outs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(target: impl Fn(f64) -> f64, x0: f64, n: usize, seed: u64) -> Vec<f64> {
        let sampler = SliceSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = x0;
        (0..n)
            .map(|_| {
                x = sampler.sample(x, &target, &mut rng).value;
                x
            })
            .collect()
    }

    #[test]
    fn standard_normal_moments() {
        let xs = run(|x| -0.5 * x * x, 3.0, 40_000, 1);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.05, "{m}");
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn steps_out_for_wide_targets() {
        // sd 20 with unit width forces stepping out
        let sampler = SliceSampler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut x = 0.0;
        let mut total_steps = 0;
        let mut sum_sq = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let out = sampler.sample(x, |t| -0.5 * (t / 20.0).powi(2), &mut rng);
            x = out.value;
            total_steps += out.step_outs;
            sum_sq += x * x;
        }
        assert!(total_steps > 0);
        let sd = (sum_sq / n as f64).sqrt();
        assert!((sd - 20.0).abs() < 2.0, "{sd}");
    }

    #[test]
    fn respects_support() {
        // exponential(1) on [0, inf)
        let xs = run(|x| if x < 0.0 { f64::NEG_INFINITY } else { -x }, 1.0, 20_000, 9);
        assert!(xs.iter().all(|&x| x >= 0.0));
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 1.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(run(|x| -x * x, 0.1, 100, 5), run(|x| -x * x, 0.1, 100, 5));
    }
}
