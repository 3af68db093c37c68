use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpatialGrid;
use crate::sim::Mission;
use crate::{Real, Vec2};

/// Start-time window and per-mission constants for [`sample_missions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionSampling<T> {
    pub t_earliest: T,
    pub t_latest: T,
    pub horizon: T,
    pub m0: T,
    pub u_max: T,
}

/// `n` missions with starts uniform over the region shrunk by
/// `min_border_dist` and start times uniform over the sampling window.
pub fn sample_missions<T: Real>(
    region: &SpatialGrid<T>,
    n: usize,
    min_border_dist: T,
    seed: u64,
    sampling: &MissionSampling<T>,
) -> Result<Vec<Mission<T>>> {
    let (x_lo, x_hi) = (region.x0 + min_border_dist, region.x_max() - min_border_dist);
    let (y_lo, y_hi) = (region.y0 + min_border_dist, region.y_max() - min_border_dist);
    if !(min_border_dist >= T::zero()) || !(x_hi >= x_lo) || !(y_hi >= y_lo) {
        return Err(invalid("no feasible start positions at that border distance"));
    }
    if !(sampling.t_latest >= sampling.t_earliest) {
        return Err(invalid("empty start-time window"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6D69_7373_696F_6E73);
    let mut unit = || T::lit(rng.random::<f64>());
    Ok((0..n)
        .map(|id| {
            let x = x_lo + (x_hi - x_lo) * unit();
            let y = y_lo + (y_hi - y_lo) * unit();
            let t0 = sampling.t_earliest + (sampling.t_latest - sampling.t_earliest) * unit();
            Mission {
                id,
                x0: Vec2::new(x, y),
                t0,
                horizon: sampling.horizon,
                m0: sampling.m0,
                u_max: sampling.u_max,
            }
        })
        .collect())
}
