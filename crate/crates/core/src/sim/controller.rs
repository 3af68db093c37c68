use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "floating")]
    Floating,
    #[serde(rename = "greedy_1h")]
    Greedy1h,
    #[serde(rename = "greedy_5d")]
    Greedy5d,
    #[serde(rename = "longterm")]
    Longterm,
    #[serde(rename = "longterm_discounted")]
    LongtermDiscounted,
    #[serde(rename = "oracle")]
    Oracle,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Floating => "floating",
            ControllerKind::Greedy1h => "greedy_1h",
            ControllerKind::Greedy5d => "greedy_5d",
            ControllerKind::Longterm => "longterm",
            ControllerKind::LongtermDiscounted => "longterm_discounted",
            ControllerKind::Oracle => "oracle",
        }
    }

    /// Whether the controller recomputes a value function.
    pub fn solves(self) -> bool {
        matches!(
            self,
            ControllerKind::Greedy5d | ControllerKind::Longterm | ControllerKind::LongtermDiscounted | ControllerKind::Oracle
        )
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the controller matrix.
///
/// When deserializing, an absent `uses_avg_currents` takes the kind's default
/// (on for the long-term kinds, off otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawSpec")]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    /// Discount time constant (s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Look-ahead (s). Greedy: forecast window length, default the forecast
    /// length. Long-term and oracle: from the mission start, default and
    /// minimum the mission horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning_horizon: Option<f64>,
    pub uses_avg_currents: bool,
    /// Overrides the mission's actuation bound (u/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    /// Report name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: ControllerKind,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    planning_horizon: Option<f64>,
    #[serde(default)]
    uses_avg_currents: Option<bool>,
    #[serde(default)]
    u_max: Option<f64>,
    #[serde(default)]
    label: Option<String>,
}

impl From<RawSpec> for ControllerSpec {
    fn from(r: RawSpec) -> Self {
        let base = ControllerSpec::new(r.kind);
        Self {
            tau: r.tau,
            planning_horizon: r.planning_horizon,
            uses_avg_currents: r.uses_avg_currents.unwrap_or(base.uses_avg_currents),
            u_max: r.u_max,
            label: r.label,
            ..base
        }
    }
}

impl ControllerSpec {
    pub fn new(kind: ControllerKind) -> Self {
        Self {
            kind,
            tau: None,
            planning_horizon: None,
            uses_avg_currents: matches!(kind, ControllerKind::Longterm | ControllerKind::LongtermDiscounted),
            u_max: None,
            label: None,
        }
    }

    pub fn floating() -> Self {
        Self::new(ControllerKind::Floating)
    }

    pub fn greedy_1h() -> Self {
        Self::new(ControllerKind::Greedy1h)
    }

    pub fn greedy_5d() -> Self {
        Self::new(ControllerKind::Greedy5d)
    }

    pub fn longterm() -> Self {
        Self::new(ControllerKind::Longterm)
    }

    pub fn longterm_discounted(tau: f64) -> Self {
        Self {
            tau: Some(tau),
            ..Self::new(ControllerKind::LongtermDiscounted)
        }
    }

    pub fn oracle() -> Self {
        Self::new(ControllerKind::Oracle)
    }

    pub fn with_u_max(mut self, u_max: f64) -> Self {
        self.u_max = Some(u_max);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind.to_string())
    }

    pub fn validate(&self) -> Result<()> {
        use ControllerKind::*;
        let name = self.label();
        match (self.kind, self.tau) {
            (LongtermDiscounted, None) => return Err(invalid(format!("{name}: longterm_discounted requires tau"))),
            (Longterm | Floating | Greedy1h, Some(_)) => {
                return Err(invalid(format!("{name}: {} does not take tau", self.kind)));
            }
            (_, Some(tau)) if !(tau > 0.0 && tau.is_finite()) => return Err(invalid(format!("{name}: tau must be > 0"))),
            _ => {}
        }
        match (self.kind, self.uses_avg_currents) {
            (Longterm | LongtermDiscounted, false) => {
                return Err(invalid(format!("{name}: {} requires average currents", self.kind)));
            }
            (Greedy5d | Oracle | Floating, true) => {
                return Err(invalid(format!("{name}: {} does not use average currents", self.kind)));
            }
            _ => {}
        }
        if matches!(self.u_max, Some(u) if !(u >= 0.0 && u.is_finite())) {
            return Err(invalid(format!("{name}: u_max must be >= 0")));
        }
        if matches!(self.planning_horizon, Some(h) if !(h > 0.0 && h.is_finite())) {
            return Err(invalid(format!("{name}: planning_horizon must be > 0")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip_through_json() {
        let spec: ControllerSpec = serde_json::from_str(r#"{"kind":"greedy_5d"}"#).unwrap();
        assert_eq!(spec.kind, ControllerKind::Greedy5d);
        let lt = ControllerSpec::longterm_discounted(1_296_000.0);
        let back: ControllerSpec = serde_json::from_str(&serde_json::to_string(&lt).unwrap()).unwrap();
        assert_eq!(back, lt);
    }

    #[test]
    fn consistency_rules() {
        assert!(ControllerSpec::longterm().validate().is_ok());
        assert!(ControllerSpec::longterm_discounted(1_728_000.0).validate().is_ok());
        let mut s = ControllerSpec::longterm();
        s.uses_avg_currents = false;
        assert!(s.validate().is_err());
        let mut s = ControllerSpec::oracle();
        s.uses_avg_currents = true;
        assert!(s.validate().is_err());
        let mut s = ControllerSpec::longterm_discounted(1.0);
        s.tau = None;
        assert!(s.validate().is_err());
        let mut s = ControllerSpec::floating();
        s.tau = Some(10.0);
        assert!(s.validate().is_err());
        assert!(ControllerSpec::oracle().with_u_max(-0.1).validate().is_err());
        let mut g = ControllerSpec::greedy_1h();
        g.uses_avg_currents = true;
        assert!(g.validate().is_ok());
    }

    #[test]
    fn avg_currents_default_follows_kind() {
        let s: ControllerSpec = serde_json::from_str(r#"{"kind":"longterm"}"#).unwrap();
        assert!(s.uses_avg_currents && s.validate().is_ok());
        let s: ControllerSpec = serde_json::from_str(r#"{"kind":"oracle"}"#).unwrap();
        assert!(!s.uses_avg_currents);
        let s: ControllerSpec = serde_json::from_str(r#"{"kind":"longterm","uses_avg_currents":false}"#).unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn label_defaults_to_kind() {
        assert_eq!(ControllerSpec::oracle().label(), "oracle");
        assert_eq!(ControllerSpec::oracle().with_label("oracle_0.2").label(), "oracle_0.2");
    }
}
