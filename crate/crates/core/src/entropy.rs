//! Differential entropy and the bivariate entropy-comparison direction test.
//!
//! For an additive noise model `y = f(x) + n` the true direction minimizes
//! `H(cause) + H(noise)`. Replacing the entropies by those of Gaussians with
//! the same variance can flip that comparison when the noise is not Gaussian.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::regression::{oof_predict, RegressorConfig};

/// Vasicek m-spacing estimate of differential entropy in nats, with
/// `m = floor(sqrt(n))` and order statistics clamped at the sample ends.
pub fn entropy_estimate(samples: ArrayView1<f64>) -> Result<f64> {
    let n = samples.len();
    if n < 10 {
        return Err(invalid(format!("entropy estimate needs at least 10 samples, got {n}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(invalid("entropy estimate needs finite samples".to_string()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[n - 1] <= sorted[0] {
        return Err(Error::DegenerateInput("constant sample has no differential entropy".into()));
    }
    let m = ((n as f64).sqrt().floor() as usize).max(1);
    let scale = n as f64 / (2 * m) as f64;
    let mut total = 0.0;
    for i in 0..n {
        let hi = sorted[(i + m).min(n - 1)];
        let lo = sorted[i.saturating_sub(m)];
        let gap = hi - lo;
        if gap <= 0.0 {
            return Err(Error::DegenerateInput(format!(
                "more than {m} tied values around {lo}; spacing estimate diverges"
            )));
        }
        total += (scale * gap).ln();
    }
    Ok(total / n as f64)
}

/// Entropy of a Gaussian with the given variance: `0.5 ln(2 pi e var)`.
pub fn gaussian_entropy(variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(invalid(format!("variance must be positive, got {variance}")));
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * variance).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    Nonparametric,
    GaussianAssumption,
}

impl EntropyMode {
    pub const ALL: [EntropyMode; 2] = [EntropyMode::Nonparametric, EntropyMode::GaussianAssumption];

    pub fn name(self) -> &'static str {
        match self {
            EntropyMode::Nonparametric => "nonparametric",
            EntropyMode::GaussianAssumption => "gaussian",
        }
    }

    /// Entropy of `samples` under this mode.
    pub fn entropy(self, samples: ArrayView1<f64>) -> Result<f64> {
        match self {
            EntropyMode::Nonparametric => entropy_estimate(samples),
            EntropyMode::GaussianAssumption => {
                if samples.len() < 2 {
                    return Err(invalid("variance needs at least 2 samples".to_string()));
                }
                let var = samples.var_axis(Axis(0), 1.0).into_scalar();
                if var <= 0.0 {
                    return Err(Error::DegenerateInput("constant sample has zero variance".into()));
                }
                gaussian_entropy(var)
            }
        }
    }
}

impl fmt::Display for EntropyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntropyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nonparametric" | "np" => Ok(EntropyMode::Nonparametric),
            "gaussian" | "gaussian_assumption" | "gaussian-assumption" => Ok(EntropyMode::GaussianAssumption),
            _ => Err(invalid(format!("unknown entropy mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `x` causes `y`.
    Forward,
    /// `y` causes `x`.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionVerdict {
    pub direction: Direction,
    pub total_entropy_forward: f64,
    pub total_entropy_reverse: f64,
    pub mode: EntropyMode,
    /// Both totals were equal; the verdict defaults to `Forward`.
    pub tie: bool,
}

impl DirectionVerdict {
    pub fn from_totals(forward: f64, reverse: f64, mode: EntropyMode) -> Self {
        let direction = if reverse < forward {
            Direction::Reverse
        } else {
            Direction::Forward
        };
        Self {
            direction,
            total_entropy_forward: forward,
            total_entropy_reverse: reverse,
            mode,
            tie: forward == reverse,
        }
    }
}

/// Out-of-fold residuals of both bivariate regressions.
#[derive(Clone, Debug)]
pub struct DirectionFit {
    /// `y - E[y | x]`.
    pub residual_forward: Array1<f64>,
    /// `x - E[x | y]`.
    pub residual_reverse: Array1<f64>,
}

pub fn fit_both_directions(x: ArrayView1<f64>, y: ArrayView1<f64>, reg: &RegressorConfig) -> Result<DirectionFit> {
    if x.len() != y.len() {
        return Err(invalid(format!("x has {} samples, y has {}", x.len(), y.len())));
    }
    let fwd = oof_predict(x.insert_axis(Axis(1)), y, reg)?;
    let rev = oof_predict(y.insert_axis(Axis(1)), x, reg)?;
    Ok(DirectionFit {
        residual_forward: &y - &fwd,
        residual_reverse: &x - &rev,
    })
}

/// Compares `H(x) + H(y - E[y|x])` against `H(y) + H(x - E[x|y])` and picks
/// the smaller.
pub fn direction_test(
    x: ArrayView1<f64>,
    y: ArrayView1<f64>,
    mode: EntropyMode,
    reg: &RegressorConfig,
) -> Result<DirectionVerdict> {
    if x.len() < 50 {
        return Err(invalid(format!("direction test needs at least 50 samples, got {}", x.len())));
    }
    let fit = fit_both_directions(x, y, reg)?;
    let forward = mode.entropy(x)? + mode.entropy(fit.residual_forward.view())?;
    let reverse = mode.entropy(y)? + mode.entropy(fit.residual_reverse.view())?;
    Ok(DirectionVerdict::from_totals(forward, reverse, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn uniform(n: usize, lo: f64, hi: f64, seed: u64) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    }

    fn normal(n: usize, seed: u64) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn gaussian_entropy_values() {
        assert!((gaussian_entropy(1.0).unwrap() - 1.418_938_533_204_672_7).abs() < 1e-12);
        let inv = std::f64::consts::E.powi(2) / (2.0 * std::f64::consts::PI * std::f64::consts::E);
        assert!((gaussian_entropy(inv).unwrap() - 1.0).abs() < 1e-12);
        let u05 = gaussian_entropy(25.0 / 12.0).unwrap();
        assert!((u05 - 1.7859).abs() < 1e-4, "{u05}");
        let total = u05 + gaussian_entropy(9.0 / 12.0).unwrap();
        assert!((total - 3.061).abs() < 1e-3, "{total}");
        assert!(gaussian_entropy(0.0).is_err());
        assert!(gaussian_entropy(-1.0).is_err());
    }

    #[test]
    fn vasicek_uniform_and_gaussian() {
        let h = entropy_estimate(uniform(2000, 0.0, 5.0, 1).view()).unwrap();
        assert!((h - 5f64.ln()).abs() < 0.05, "{h}");
        let h = entropy_estimate(normal(2000, 2).view()).unwrap();
        assert!((h - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 0.05, "{h}");
    }

    #[test]
    fn affine_rule() {
        let x = normal(2000, 3);
        let h = entropy_estimate(x.view()).unwrap();
        for (a, b) in [(2.0, 1.0), (-0.5, 3.0), (10.0, -7.0)] {
            let y = x.mapv(|v| a * v + b);
            let hy = entropy_estimate(y.view()).unwrap();
            assert!((hy - h - f64::ln(f64::abs(a))).abs() < 0.05, "a={a}");
        }
    }

    #[test]
    fn gaussian_bounds_the_estimate() {
        let families = [uniform(2000, 0.0, 1.0, 4), normal(2000, 5), {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            (0..2000).map(|_| -rng.random::<f64>().ln()).collect()
        }];
        for x in families {
            let var = x.var_axis(Axis(0), 1.0).into_scalar();
            assert!(gaussian_entropy(var).unwrap() >= entropy_estimate(x.view()).unwrap() - 0.05);
        }
    }

    #[test]
    fn estimate_converges() {
        let truth_u = 5f64.ln();
        let truth_g = gaussian_entropy(1.0).unwrap();
        for seed in 0..5 {
            let small = entropy_estimate(uniform(100, 0.0, 5.0, seed).view()).unwrap();
            let large = entropy_estimate(uniform(10_000, 0.0, 5.0, seed).view()).unwrap();
            assert!((large - truth_u).abs() <= (small - truth_u).abs());
            let small = entropy_estimate(normal(100, seed).view()).unwrap();
            let large = entropy_estimate(normal(10_000, seed).view()).unwrap();
            assert!((large - truth_g).abs() <= (small - truth_g).abs());
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            entropy_estimate(Array1::from_elem(20, 1.0).view()),
            Err(Error::DegenerateInput(_))
        ));
        assert!(entropy_estimate(Array1::linspace(0.0, 1.0, 9).view()).is_err());
        let mut heavy_ties = Array1::linspace(0.0, 1.0, 100);
        heavy_ties.slice_mut(ndarray::s![..50]).fill(0.5);
        assert!(matches!(entropy_estimate(heavy_ties.view()), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn verdict_ties_go_forward() {
        let v = DirectionVerdict::from_totals(1.0, 1.0, EntropyMode::Nonparametric);
        assert_eq!(v.direction, Direction::Forward);
        assert!(v.tie);
        let v = DirectionVerdict::from_totals(1.0, 0.5, EntropyMode::Nonparametric);
        assert_eq!(v.direction, Direction::Reverse);
        assert!(!v.tie);
    }

    #[test]
    fn swapping_inputs_swaps_totals() {
        let x = uniform(300, 0.0, 5.0, 7);
        let y = &x + &uniform(300, 1.0, 4.0, 8);
        let reg = RegressorConfig::default();
        for mode in EntropyMode::ALL {
            let a = direction_test(x.view(), y.view(), mode, &reg).unwrap();
            let b = direction_test(y.view(), x.view(), mode, &reg).unwrap();
            assert_eq!(a.total_entropy_forward, b.total_entropy_reverse);
            assert_eq!(a.total_entropy_reverse, b.total_entropy_forward);
            assert!(a.tie || a.direction != b.direction);
        }
    }

    #[test]
    fn direction_test_input_checks() {
        let reg = RegressorConfig::default();
        let x = uniform(40, 0.0, 1.0, 9);
        assert!(direction_test(x.view(), x.view(), EntropyMode::Nonparametric, &reg).is_err());
        let x = uniform(60, 0.0, 1.0, 9);
        let y = uniform(61, 0.0, 1.0, 10);
        assert!(direction_test(x.view(), y.view(), EntropyMode::Nonparametric, &reg).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("gaussian".parse::<EntropyMode>().unwrap(), EntropyMode::GaussianAssumption);
        assert_eq!("Nonparametric".parse::<EntropyMode>().unwrap(), EntropyMode::Nonparametric);
        assert!("kde".parse::<EntropyMode>().is_err());
    }
}
