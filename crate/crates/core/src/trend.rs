//! Trend verdicts for running sups along a refinement schedule.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// The running sup varies by less than 10% over the last five steps.
    Stable,
    /// The running sup grew by more than 25% across the last three steps.
    Growing,
    /// Neither criterion applies, or the schedule is too short to decide.
    Indeterminate,
}

pub const STABLE_WINDOW: usize = 5;
pub const STABLE_VARIATION: f64 = 0.10;
pub const GROWTH_SPAN: usize = 3;
pub const GROWTH_FACTOR: f64 = 1.25;

/// Running maxima of a sequence.
pub fn running_sup(values: &[f64]) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            best = best.max(v);
            best
        })
        .collect()
}

/// Classifies per-step values (e.g. one per radius as `r ↓ 1`) by the
/// behaviour of their running sup.
pub fn classify(values: &[f64]) -> Trend {
    let sup = running_sup(values);
    let n = sup.len();
    if n > GROWTH_SPAN {
        let (now, before) = (sup[n - 1], sup[n - 1 - GROWTH_SPAN]);
        if !now.is_finite() || now > GROWTH_FACTOR * before {
            return Trend::Growing;
        }
    }
    if n >= STABLE_WINDOW {
        let window = &sup[n - STABLE_WINDOW..];
        let hi = window[STABLE_WINDOW - 1];
        let lo = window[0];
        if hi == 0.0 || (hi - lo) <= STABLE_VARIATION * hi {
            return Trend::Stable;
        }
    }
    Trend::Indeterminate
}
