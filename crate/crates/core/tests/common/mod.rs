#![allow(dead_code)]

use floatfarm::field::{FlowField, ScalarField, SpatialGrid, TimeAxis};
use floatfarm::Vec2;

pub const DAY: f64 = 86_400.0;

/// Double gyre on `[x0, x0 + 2L] × [y0, y0 + L]`, written out independently
/// of the library generator.
pub fn gyre_velocity(p: Vec2<f64>, t: f64, a: f64, eps: f64, omega: f64, origin: Vec2<f64>, l: f64) -> Vec2<f64> {
    use std::f64::consts::PI;
    let x = (p.x - origin.x) / l;
    let y = (p.y - origin.y) / l;
    let s = eps * (omega * t).sin();
    let f = s * x * x + (1.0 - 2.0 * s) * x;
    let df = 2.0 * s * x + 1.0 - 2.0 * s;
    Vec2::new(
        -PI * a * (PI * f).sin() * (PI * y).cos(),
        PI * a * df * (PI * f).cos() * (PI * y).sin(),
    )
}

pub fn gaussian(p: Vec2<f64>, c: Vec2<f64>, r: f64) -> f64 {
    let d = p - c;
    (-(d.dot(d)) / (2.0 * r * r)).exp()
}

fn bilinear_clamped(values: &[f64], g: &SpatialGrid<f64>, p: Vec2<f64>) -> f64 {
    let fx = ((p.x - g.x0) / g.dx).clamp(0.0, (g.nx - 1) as f64);
    let fy = ((p.y - g.y0) / g.dy).clamp(0.0, (g.ny - 1) as f64);
    let i = (fx.floor() as usize).min(g.nx - 2);
    let j = (fy.floor() as usize).min(g.ny - 2);
    let (wx, wy) = (fx - i as f64, fy - j as f64);
    let v = |i: usize, j: usize| values[j * g.nx + i];
    (1.0 - wy) * ((1.0 - wx) * v(i, j) + wx * v(i + 1, j)) + wy * ((1.0 - wx) * v(i, j + 1) + wx * v(i + 1, j + 1))
}

fn clamp_box(g: &SpatialGrid<f64>, p: Vec2<f64>) -> Vec2<f64> {
    Vec2::new(p.x.clamp(g.x0, g.x_max()), p.y.clamp(g.y0, g.y_max()))
}

fn sample_clamped_flow(flow: &FlowField<f64>, p: Vec2<f64>, t: f64) -> Vec2<f64> {
    flow.sample(clamp_box(&flow.grid, p), t).unwrap()
}

/// Brute-force backward dynamic program with `headings` evenly spaced thrust
/// directions at `u_max` plus idle, `steps` uniform time steps, RK4 drift
/// with `substeps` per step, trapezoidal reward and bilinear interpolation of
/// the next-stage value. Positions are clamped to the grid box. Returns the
/// value at `t0` on the nodes of `gamma.grid`.
#[allow(clippy::too_many_arguments)]
pub fn dp_value(
    flow: &FlowField<f64>,
    gamma: &ScalarField<f64>,
    terminal: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
    u_max: f64,
    headings: usize,
    substeps: usize,
) -> Vec<f64> {
    let g = gamma.grid;
    let dt = (t1 - t0) / steps as f64;
    let h = dt / substeps as f64;
    let mut controls = vec![Vec2::new(0.0, 0.0)];
    for k in 0..headings {
        let a = 2.0 * std::f64::consts::PI * k as f64 / headings as f64;
        controls.push(Vec2::new(a.cos(), a.sin()) * u_max);
    }
    let mut next = terminal.to_vec();
    for n in (0..steps).rev() {
        let ts = t0 + n as f64 * dt;
        let cur: Vec<f64> = g
            .nodes()
            .map(|x| {
                controls
                    .iter()
                    .map(|&u| {
                        let mut p = x;
                        let mut t = ts;
                        let mut reward = 0.0;
                        let gam = |p: Vec2<f64>, t: f64| gamma.sample(clamp_box(&g, p), t).unwrap();
                        for _ in 0..substeps {
                            let f = |q: Vec2<f64>, s: f64| sample_clamped_flow(flow, q, s) + u;
                            let k1 = f(p, t);
                            let k2 = f(p + k1 * (h / 2.0), t + h / 2.0);
                            let k3 = f(p + k2 * (h / 2.0), t + h / 2.0);
                            let k4 = f(p + k3 * h, t + h);
                            let q = clamp_box(&g, p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0));
                            reward += 0.5 * h * (gam(p, t) + gam(q, t + h));
                            p = q;
                            t += h;
                        }
                        reward + bilinear_clamped(&next, &g, p)
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        next = cur;
    }
    next
}

/// Seeded double-gyre instance on a small grid: `(flow, gamma)` over
/// `[0, horizon]`. The growth blob is wide enough (radius at least ~5 cells
/// on a 12-node grid) to be resolved by first-order schemes.
pub fn small_gyre_instance(seed: u64, n: usize, horizon: f64) -> (FlowField<f64>, ScalarField<f64>) {
    // Simple LCG so the instance parameters do not depend on library RNG choices.
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut unif = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let l = 100_000.0;
    let origin = Vec2::new(0.0, 0.0);
    let a = 0.03 + 0.03 * unif();
    let eps = 0.25 * unif();
    let omega = 2.0 * std::f64::consts::PI / ((2.0 + 4.0 * unif()) * DAY);
    let c = Vec2::new((0.6 + 0.8 * unif()) * l, (0.35 + 0.3 * unif()) * l);
    let r = (0.45 + 0.15 * unif()) * l;
    let peak = (1.0 + unif()) / DAY;
    let base = 0.2 / DAY;

    let grid = SpatialGrid::spanning(0.0, 0.0, 2.0 * l, l, n, n).unwrap();
    let time = TimeAxis::spanning(0.0, horizon, 3.0 * 3600.0).unwrap();
    let flow = FlowField::from_fn(grid, time, |p, t| gyre_velocity(p, t, a, eps, omega, origin, l)).unwrap();
    let gamma = ScalarField::from_fn(grid, time, |p, _| base + peak * gaussian(p, c, r)).unwrap();
    (flow, gamma)
}
