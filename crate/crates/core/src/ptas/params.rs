use crate::error::{Error, Result};

/// Tuning knobs of the candidate-generation step.
///
/// The defaults from [`default_params`] are what the approximation guarantee
/// asks for and are far too large for anything but toy inputs; every field is
/// public so callers can override them individually.
#[derive(Debug, Clone, PartialEq)]
pub struct PtasParams {
    pub epsilon: f64,
    /// Sample size per cluster.
    pub tau: usize,
    /// Oversampling factor: each repetition draws `eta * k` D² samples.
    pub eta: usize,
    /// Independent repetitions.
    pub zeta: usize,
    /// Assumed approximation factor of the baseline solution.
    pub alpha: f64,
    /// Cap on (subset tuple, weight tuple) combinations per repetition.
    pub candidate_budget: Option<u64>,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 0.5 {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(epsilon))
    }
}

// ceil that ignores floating noise just above an integer
fn ceil_clean(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `τ = ⌈(k/ε²)·ln(k/ε)⌉`, `η = ⌈τ·α·k/ε²⌉`, `ζ = ⌈32/ε⌉`.
pub fn default_params(k: usize, epsilon: f64, alpha: f64) -> Result<PtasParams> {
    check_epsilon(epsilon)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    let kf = k as f64;
    let eps2 = epsilon * epsilon;
    // k/ε ≥ 2 on the admissible range, so the logarithm is positive.
    let tau = ceil_clean(kf / eps2 * (kf / epsilon).ln()).max(1);
    let eta = ceil_clean(tau as f64 * alpha * kf / eps2).max(1);
    let zeta = ceil_clean(32.0 / epsilon).max(1);
    Ok(PtasParams {
        epsilon,
        tau,
        eta,
        zeta,
        alpha,
        candidate_budget: None,
    })
}

impl PtasParams {
    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if self.tau == 0 || self.eta == 0 || self.zeta == 0 {
            return Err(Error::InvalidParameter("tau, eta and zeta must be at least 1".into()));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 1, got {}",
                self.alpha
            )));
        }
        if self.candidate_budget == Some(0) {
            return Err(Error::BudgetZero);
        }
        Ok(())
    }
}
