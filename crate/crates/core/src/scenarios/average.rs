use crate::error::{invalid, Result};
use crate::field::{FlowField, SpatialGrid, TimeAxis};
use crate::Real;

/// Exact mean of the piecewise-linear-in-time node series over `[a, b]`.
fn block_mean<T: Real>(data: &[T], time: &TimeAxis<T>, n: usize, a: T, b: T, out: &mut [T]) {
    out.iter_mut().for_each(|v| *v = T::zero());
    let at = |k: usize, s: T, node: usize| {
        let w = (s - time.time(k)) / time.dt;
        let lo = data[k * n + node];
        if w == T::zero() {
            lo
        } else {
            lo + (data[(k + 1) * n + node] - lo) * w
        }
    };
    for k in 0..time.nt - 1 {
        let s0 = time.time(k).max(a);
        let s1 = time.time(k + 1).min(b);
        if s1 <= s0 {
            continue;
        }
        let half = (s1 - s0) / T::lit(2.0);
        for (node, o) in out.iter_mut().enumerate() {
            *o += half * (at(k, s0, node) + at(k, s1, node));
        }
    }
    let len = b - a;
    out.iter_mut().for_each(|v| *v /= len);
}

/// Time-block means of `truth` over consecutive windows of length `window`,
/// resampled onto `coarse_grid`. Each output slice is stamped at its block
/// center; a trailing remainder shorter than one window is dropped.
pub fn monthly_average<T: Real>(truth: &FlowField<T>, window: T, coarse_grid: &SpatialGrid<T>) -> Result<FlowField<T>> {
    let span = truth.time.t_end() - truth.time.t0;
    if !(window > T::zero()) {
        return Err(invalid("averaging window must be > 0"));
    }
    if truth.time.nt < 2 || window > span + truth.time.tol() {
        return Err(invalid(format!("averaging window {window} exceeds the truth span {span}")));
    }
    let blocks = ((span / window) + truth.time.tol() / window).floor().to_usize().unwrap().max(1);
    let n = truth.grid.len();
    let (mut u, mut v) = (vec![T::zero(); n * blocks], vec![T::zero(); n * blocks]);
    for b in 0..blocks {
        let a = truth.time.t0 + window * T::from_usize(b).unwrap();
        let e = a + window;
        block_mean(truth.u_data(), &truth.time, n, a, e, &mut u[b * n..(b + 1) * n]);
        block_mean(truth.v_data(), &truth.time, n, a, e, &mut v[b * n..(b + 1) * n]);
    }
    let time = TimeAxis::new(truth.time.t0 + window / T::lit(2.0), window, blocks)?;
    let means = FlowField::new(truth.grid, time, u, v)?;
    means.resample(coarse_grid, &time)
}

/// Systematic bias applied to an average field: scale then rotate by `rotate_deg`.
pub fn bias_average<T: Real>(avg: &FlowField<T>, scale: T, rotate_deg: T) -> Result<FlowField<T>> {
    let (s, c) = rotate_deg.to_radians().sin_cos();
    let (u, v): (Vec<T>, Vec<T>) = avg
        .u_data()
        .iter()
        .zip(avg.v_data())
        .map(|(&u, &v)| (scale * (c * u - s * v), scale * (s * u + c * v)))
        .unzip();
    FlowField::new(avg.grid, avg.time, u, v)
}

/// `avg` held constant outside its stamped instants so it covers `[t_a, t_b]`
/// with slices every `dt`.
pub fn extend_average<T: Real>(avg: &FlowField<T>, t_a: T, t_b: T, dt: T) -> Result<FlowField<T>> {
    avg.resample_time_clamped(&TimeAxis::spanning(t_a, t_b, dt)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::double_gyre;
    use crate::Vec2;

    fn fine() -> SpatialGrid<f64> {
        SpatialGrid::spanning(0.0, 0.0, 2.0, 1.0, 21, 11).unwrap()
    }

    fn coarse() -> SpatialGrid<f64> {
        SpatialGrid::spanning(0.0, 0.0, 2.0, 1.0, 5, 3).unwrap()
    }

    #[test]
    fn steady_truth_is_its_own_average() {
        let t = FlowField::constant(fine(), TimeAxis::new(0.0, 10.0, 7).unwrap(), Vec2::new(0.3, -0.1)).unwrap();
        let a = monthly_average(&t, 30.0, &coarse()).unwrap();
        assert_eq!(a.time.nt, 2);
        assert_eq!(a.time.t0, 15.0);
        assert!(a.u_data().iter().all(|&x| (x - 0.3).abs() < 1e-15));
        assert!(a.v_data().iter().all(|&x| (x + 0.1).abs() < 1e-15));
    }

    #[test]
    fn zero_mean_oscillation_averages_out() {
        let period = 100.0;
        let t = FlowField::from_fn(fine(), TimeAxis::new(0.0, 1.0, 201).unwrap(), |p, t| {
            let s = (2.0 * std::f64::consts::PI * t / period).sin();
            Vec2::new(s * (1.0 + p.x), -s)
        })
        .unwrap();
        let a = monthly_average(&t, 100.0, &coarse()).unwrap();
        assert!(a.max_speed() < 1e-3, "{}", a.max_speed());
    }

    #[test]
    fn gyre_average_matches_per_node_quadrature() {
        let time = TimeAxis::new(0.0, 3.0, 41).unwrap();
        let t = double_gyre(0.1, 0.25, 2.0 * std::f64::consts::PI / 50.0, fine(), time).unwrap();
        let a = monthly_average(&t, 40.0, &coarse()).unwrap();
        // Other order: resample every truth slice first, then trapezoid per node.
        let rc = t.resample(&coarse(), &time).unwrap();
        let (ru, _) = rc.components();
        let n = coarse().len();
        for b in 0..a.time.nt {
            for node in 0..n {
                let mut acc = 0.0;
                let (t_a, t_b) = (40.0 * b as f64, 40.0 * (b + 1) as f64);
                for k in 0..time.nt - 1 {
                    let (s0, s1) = (time.time(k).max(t_a), time.time(k + 1).min(t_b));
                    if s1 <= s0 {
                        continue;
                    }
                    let val = |s: f64| {
                        let w = (s - time.time(k)) / 3.0;
                        ru.data()[k * n + node] * (1.0 - w) + ru.data()[(k + 1) * n + node] * w
                    };
                    acc += 0.5 * (s1 - s0) * (val(s0) + val(s1));
                }
                assert!((a.u_data()[b * n + node] - acc / 40.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bias_rotates_and_scales() {
        let t = FlowField::constant(coarse(), TimeAxis::new(0.0, 1.0, 1).unwrap(), Vec2::new(1.0, 0.0)).unwrap();
        let b = bias_average(&t, 2.0, 90.0).unwrap();
        let v = b.sample(Vec2::new(1.0, 0.5), 0.0).unwrap();
        assert!(v.x.abs() < 1e-15 && (v.y - 2.0).abs() < 1e-15);
    }

    #[test]
    fn window_longer_than_truth_rejected() {
        let t = FlowField::constant(fine(), TimeAxis::new(0.0, 10.0, 3).unwrap(), Vec2::zero()).unwrap();
        assert!(monthly_average(&t, 25.0, &coarse()).is_err());
        assert!(monthly_average(&t, 0.0, &coarse()).is_err());
    }

    #[test]
    fn extended_average_is_clamped() {
        let t = FlowField::constant(fine(), TimeAxis::new(0.0, 10.0, 3).unwrap(), Vec2::new(0.5, 0.0)).unwrap();
        let a = monthly_average(&t, 20.0, &coarse()).unwrap();
        let e = extend_average(&a, 0.0, 100.0, 10.0).unwrap();
        assert_eq!(e.sample(Vec2::new(1.0, 0.5), 95.0).unwrap(), Vec2::new(0.5, 0.0));
    }
}
