use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::FlowField;
use crate::growth::SECONDS_PER_DAY;
use crate::{Real, Vec2};

/// Parameters of the synthetic forecast error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// Vector RMSE at lead 0 (u/s).
    pub sigma0: f64,
    /// Relative RMSE growth per day of lead time.
    pub growth_per_day: f64,
    /// Spatial correlation length (u).
    pub corr_len: f64,
    /// Temporal correlation time (s); `None` freezes the error pattern.
    #[serde(default)]
    pub corr_time: Option<f64>,
    /// Random Fourier features per component.
    #[serde(default = "default_features")]
    pub features: usize,
}

fn default_features() -> usize {
    64
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self {
            sigma0: 0.0,
            growth_per_day: 0.0,
            corr_len: 1.0,
            corr_time: None,
            features: default_features(),
        }
    }
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return Err(invalid(format!("sigma0 must be >= 0, got {}", self.sigma0)));
        }
        if !(self.growth_per_day >= 0.0 && self.growth_per_day.is_finite()) {
            return Err(invalid("growth_per_day must be >= 0"));
        }
        if !(self.corr_len > 0.0 && self.corr_len.is_finite()) {
            return Err(invalid("corr_len must be > 0"));
        }
        if matches!(self.corr_time, Some(tc) if !(tc > 0.0)) {
            return Err(invalid("corr_time must be > 0"));
        }
        if self.features == 0 {
            return Err(invalid("features must be >= 1"));
        }
        Ok(())
    }

    /// Vector RMSE at `lead` seconds.
    pub fn sigma(&self, lead: f64) -> f64 {
        self.sigma0 * (1.0 + self.growth_per_day * lead.max(0.0) / SECONDS_PER_DAY)
    }
}

/// splitmix64 finalizer over the pair.
fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Feature {
    kx: f64,
    ky: f64,
    omega: f64,
    phase: f64,
}

fn draw_features(rng: &mut ChaCha8Rng, model: &ErrorModel) -> Vec<Feature> {
    // Gaussian covariance exp(-r²/2ℓ²) has a Gaussian spectrum with std 1/ℓ.
    let k = Normal::new(0.0, 1.0 / model.corr_len).unwrap();
    (0..model.features)
        .map(|_| Feature {
            kx: k.sample(rng),
            ky: k.sample(rng),
            omega: match model.corr_time {
                Some(tc) => {
                    let z: f64 = StandardNormal.sample(rng);
                    z / tc
                }
                None => 0.0,
            },
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect()
}

fn unit_field(features: &[Feature], p: Vec2<f64>, t: f64) -> f64 {
    let s: f64 = features.iter().map(|f| (f.kx * p.x + f.ky * p.y + f.omega * t + f.phase).cos()).sum();
    s * (2.0 / features.len() as f64).sqrt()
}

/// Smooth zero-mean error increment on the grid and time axis of `window`.
///
/// Each component is a random Fourier-feature field with Gaussian spatial
/// covariance of length `corr_len` and unit variance, scaled so the vector
/// RMSE is `sigma(t - t_issue)`. Deterministic in `(seed, t_issue)`.
pub fn make_error_field<T: Real>(window: &FlowField<T>, model: &ErrorModel, seed: u64, t_issue: T) -> Result<FlowField<T>> {
    model.validate()?;
    if model.sigma0 == 0.0 {
        return FlowField::constant(window.grid, window.time, Vec2::zero());
    }
    let t_issue = t_issue.as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, t_issue.to_bits()));
    let fu = draw_features(&mut rng, model);
    let fv = draw_features(&mut rng, model);
    let per_comp = std::f64::consts::FRAC_1_SQRT_2;
    FlowField::from_fn(window.grid, window.time, |p, t| {
        let (p, t) = (Vec2::new(p.x.as_f64(), p.y.as_f64()), t.as_f64());
        let s = model.sigma(t - t_issue) * per_comp;
        let lt = t - t_issue;
        Vec2::new(T::lit(s * unit_field(&fu, p, lt)), T::lit(s * unit_field(&fv, p, lt)))
    })
}

/// Vector RMSE of an error increment over the nodes of slice `k`.
pub fn slice_rmse<T: Real>(err: &FlowField<T>, k: usize) -> f64 {
    let n = err.grid.len();
    let (u, v) = (&err.u_data()[k * n..(k + 1) * n], &err.v_data()[k * n..(k + 1) * n]);
    let ss: f64 = u.iter().zip(v).map(|(a, b)| a.as_f64().powi(2) + b.as_f64().powi(2)).sum();
    (ss / n as f64).sqrt()
}
