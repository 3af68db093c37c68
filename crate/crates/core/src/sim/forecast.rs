use crate::error::{invalid, Result};
use crate::field::FlowField;
use crate::growth::SECONDS_PER_DAY;
use crate::scenarios::{make_error_field, ErrorModel};
use crate::Real;

/// Issues imperfect forecasts: the truth over a window plus a seeded error.
#[derive(Debug, Clone)]
pub struct ForecastProvider<'a, T> {
    pub truth: &'a FlowField<T>,
    pub error_model: ErrorModel,
    /// Time between forecast issues (s).
    pub refresh_interval: T,
    /// Coverage of each issued forecast (s).
    pub forecast_length: T,
    pub seed: u64,
}

impl<'a, T: Real> ForecastProvider<'a, T> {
    /// Daily 5-day forecasts.
    pub fn new(truth: &'a FlowField<T>, error_model: ErrorModel, seed: u64) -> Self {
        Self {
            truth,
            error_model,
            refresh_interval: T::lit(SECONDS_PER_DAY),
            forecast_length: T::lit(5.0 * SECONDS_PER_DAY),
            seed,
        }
    }

    pub fn with_refresh(mut self, refresh_interval: T) -> Self {
        self.refresh_interval = refresh_interval;
        self
    }

    pub fn with_length(mut self, forecast_length: T) -> Self {
        self.forecast_length = forecast_length;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.refresh_interval > T::zero()) || !(self.forecast_length > T::zero()) {
            return Err(invalid("refresh interval and forecast length must be > 0"));
        }
        self.error_model.validate()
    }

    /// Forecast issued at `t_issue` covering `[t_issue, t_issue + forecast_length]`.
    pub fn issue_forecast(&self, t_issue: T) -> Result<FlowField<T>> {
        self.issue_until(t_issue, t_issue + self.forecast_length)
    }

    /// Forecast issued at `t_issue`, truncated at `t_until`.
    pub fn issue_until(&self, t_issue: T, t_until: T) -> Result<FlowField<T>> {
        self.validate()?;
        let time = &self.truth.time;
        if !(t_until > t_issue) || t_until - t_issue > self.forecast_length + time.tol() {
            return Err(invalid(format!("forecast window [{t_issue}, {t_until}] is empty or too long")));
        }
        if !time.contains(t_issue) || !time.contains(t_until) {
            return Err(invalid(format!(
                "forecast window [{t_issue}, {t_until}] exceeds truth coverage [{}, {}]",
                time.t0,
                time.t_end()
            )));
        }
        let window = self.truth.window_on(&self.truth.grid, t_issue, t_until)?;
        if self.error_model.sigma0 == 0.0 {
            return Ok(window);
        }
        window.add(&make_error_field(&window, &self.error_model, self.seed, t_issue)?)
    }
}
