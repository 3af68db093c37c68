use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{format_err, invalid, Result};
use crate::field::{self, ScalarField, SpatialGrid, TimeAxis};
use crate::{Real, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegrator {
    /// Forward Euler in reversed time; the discount decay is integrated exactly.
    #[default]
    Euler,
    /// Two-stage TVD Runge-Kutta.
    TvdRk2,
}

/// One-sided difference stencil used inside the Lax-Friedrichs Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialScheme {
    /// First-order upwind differences.
    #[default]
    Upwind1,
    /// Second-order ENO differences; pair with `TimeIntegrator::TvdRk2`.
    Eno2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig<T> {
    /// Radius of the control disc (u/s).
    pub u_max: T,
    /// Courant number.
    pub cfl: T,
    /// Discount time constant (s); `None` solves the undiscounted problem.
    pub tau: Option<T>,
    #[serde(default)]
    pub integrator: TimeIntegrator,
    #[serde(default)]
    pub scheme: SpatialScheme,
}

impl<T: Real> SolveConfig<T> {
    pub fn new(u_max: T) -> Self {
        Self {
            u_max,
            cfl: T::lit(0.5),
            tau: None,
            integrator: TimeIntegrator::Euler,
            scheme: SpatialScheme::Upwind1,
        }
    }

    pub fn with_tau(mut self, tau: Option<T>) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_cfl(mut self, cfl: T) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_integrator(mut self, integrator: TimeIntegrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_scheme(mut self, scheme: SpatialScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_max >= T::zero()) || !self.u_max.is_finite() {
            return Err(invalid(format!("u_max must be >= 0, got {}", self.u_max)));
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(invalid(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        if let Some(tau) = self.tau {
            if !(tau > T::zero()) || !tau.is_finite() {
                return Err(invalid(format!("tau must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Backward-solved optimal value `J*(x, t)` on retained time slices.
///
/// Carries an exact affine map `scale·J + offset` over the stored solution so
/// rescaled or shifted value functions share the solved slices bit for bit.
#[derive(Debug, Clone)]
pub struct ValueFunction<T> {
    slices: ScalarField<T>,
    pub t_start: T,
    pub t_end: T,
    pub config: SolveConfig<T>,
    scale: T,
    offset: T,
}

impl<T: Real> ValueFunction<T> {
    pub(crate) fn from_slices(slices: ScalarField<T>, t_start: T, t_end: T, config: SolveConfig<T>) -> Self {
        Self {
            slices,
            t_start,
            t_end,
            config,
            scale: T::one(),
            offset: T::zero(),
        }
    }

    /// Wraps precomputed slices, e.g. an analytic value for testing a policy.
    pub fn from_field(slices: ScalarField<T>, config: SolveConfig<T>) -> Self {
        let (t0, t1) = (slices.time.t0, slices.time.t_end());
        Self::from_slices(slices, t0, t1, config)
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.slices.grid
    }

    pub fn time(&self) -> &TimeAxis<T> {
        &self.slices.time
    }

    /// Stored solution before the affine map.
    pub fn raw_slices(&self) -> &ScalarField<T> {
        &self.slices
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    /// `c·J + k`, composed exactly with any existing map.
    pub fn affine(&self, c: T, k: T) -> Self {
        let mut out = self.clone();
        out.scale = self.scale * c;
        out.offset = self.offset * c + k;
        out
    }

    #[inline]
    fn map(&self, v: T) -> T {
        if self.scale == T::one() && self.offset == T::zero() {
            v
        } else {
            self.scale * v + self.offset
        }
    }

    pub fn value_at(&self, p: Vec2<T>, t: T) -> Result<T> {
        Ok(self.map(self.slices.sample(p, t)?))
    }

    pub fn slice_values(&self, k: usize) -> Vec<T> {
        self.slices.slice(k).iter().map(|&v| self.map(v)).collect()
    }

    pub fn start_slice(&self) -> Vec<T> {
        self.slice_values(0)
    }

    pub fn end_slice(&self) -> Vec<T> {
        self.slice_values(self.slices.time.nt - 1)
    }

    /// All slices with the affine map applied.
    pub fn materialize(&self) -> ScalarField<T> {
        if self.scale == T::one() && self.offset == T::zero() {
            return self.slices.clone();
        }
        let data = self.slices.data().iter().map(|&v| self.map(v)).collect();
        ScalarField::new(self.slices.grid, self.slices.time, data).expect("affine map of finite data stays finite")
    }

    /// Writes the slices as a scalar field file plus a `<path>.json` sidecar.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        field::write_scalar(&self.materialize(), path)?;
        let meta = Sidecar {
            u_max: self.config.u_max.as_f64(),
            tau: self.config.tau.map(Real::as_f64),
            t_start: self.t_start.as_f64(),
            t_end: self.t_end.as_f64(),
            cfl: self.config.cfl.as_f64(),
            integrator: self.config.integrator,
            scheme: self.config.scheme,
        };
        fs::write(sidecar_path(path), serde_json::to_vec_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let slices = field::read_scalar(path)?;
        let meta: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)
            .map_err(|e| format_err("sidecar", e.to_string()))?;
        let config = SolveConfig {
            u_max: T::lit(meta.u_max),
            cfl: T::lit(meta.cfl),
            tau: meta.tau.map(T::lit),
            integrator: meta.integrator,
            scheme: meta.scheme,
        };
        config.validate()?;
        Ok(Self::from_slices(slices, T::lit(meta.t_start), T::lit(meta.t_end), config))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    u_max: f64,
    tau: Option<f64>,
    t_start: f64,
    #[serde(rename = "T")]
    t_end: f64,
    cfl: f64,
    #[serde(default)]
    integrator: TimeIntegrator,
    #[serde(default)]
    scheme: SpatialScheme,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
