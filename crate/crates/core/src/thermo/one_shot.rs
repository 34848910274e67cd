//! One-shot distillation and formation in golden units, and small-copy rate
//! estimates.
//!
//! A golden unit `id_m` against `R^π` carries divergence `2 ln m`, so a raw
//! channel divergence `D` corresponds to `D/2` nats of golden units. The
//! integer count is `m = ⌊e^{D/2}⌋` for distillation and `⌈e^{D/2}⌉` for
//! formation; both the integer count and the continuous `D/2` are reported.

use super::require_square;
use crate::channels::Channel;
use crate::divergences::{
    amplitudes_from_input, channel_ht_rel_entropy, channel_max_rel_entropy_log, channel_rel_entropy_log,
    smoothed_channel_max_rel_entropy_log, AscentOptions, Certificate, HtBudget,
};
use crate::error::{Error, Result};
use crate::qcore::linalg::{kron, CMatrix};
use crate::qcore::ThermalContext;
use crate::sdp::CHANNEL_SDP_CHOI_LIMIT;

/// Largest number of copies accepted by the rate estimate.
pub const MAX_COPIES: usize = 3;

/// Largest Choi dimension of `N^⊗k` the rate estimate will attempt.
pub const RATE_CHOI_LIMIT: usize = 64;

/// Slack when rounding `e^{D/2}` to an integer unit count.
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneShotMode {
    Distill,
    Cost,
}

impl OneShotMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OneShotMode::Distill => "distill",
            OneShotMode::Cost => "cost",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OneShotResult {
    pub mode: OneShotMode,
    pub eps: f64,
    pub copies: usize,
    /// `D_H^ε` (distill) or smoothed `D_∞^ε` (cost) of `N^⊗copies` against `T^β`.
    pub raw_divergence: f64,
    /// `raw_divergence / 2`.
    pub half_divergence: f64,
    /// Golden-unit dimension `m`.
    pub units: u64,
    /// `ln m` for distillation.
    pub distill_nats: Option<f64>,
    /// `ln m` for formation.
    pub cost_nats: Option<f64>,
    /// `raw_divergence / (2·copies)`.
    pub rate_per_copy: f64,
    pub certificate: Certificate,
    /// Set when part of the computation was skipped for budget reasons.
    pub partial: bool,
    pub warning: Option<String>,
    /// Amplitude matrix of the best input found (distillation only).
    pub input_amplitudes: Option<CMatrix>,
}

impl OneShotResult {
    /// The golden-unit value of whichever side was computed.
    pub fn nats(&self) -> f64 {
        self.distill_nats.or(self.cost_nats).unwrap_or(f64::NAN)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn unit_count(raw: f64, mode: OneShotMode) -> u64 {
    let x = (raw / 2.0).exp();
    let m = match mode {
        OneShotMode::Distill => (x + COUNT_SLACK).floor(),
        OneShotMode::Cost => (x - COUNT_SLACK).ceil(),
    };
    if m.is_finite() {
        m.max(1.0) as u64
    } else {
        u64::MAX
    }
}

fn finish(mode: OneShotMode, eps: f64, copies: usize, raw: f64, certificate: Certificate) -> OneShotResult {
    let units = unit_count(raw, mode);
    let nats = (units as f64).ln();
    OneShotResult {
        mode,
        eps,
        copies,
        raw_divergence: raw,
        half_divergence: raw / 2.0,
        units,
        distill_nats: (mode == OneShotMode::Distill).then_some(nats),
        cost_nats: (mode == OneShotMode::Cost).then_some(nats),
        rate_per_copy: raw / (2.0 * copies as f64),
        certificate,
        partial: false,
        warning: None,
        input_amplitudes: None,
    }
}

pub fn one_shot_distill(n: &Channel, ctx: &ThermalContext, eps: f64) -> Result<OneShotResult> {
    one_shot(n, ctx, eps, 1, OneShotMode::Distill, &HtBudget::default())
}

pub fn one_shot_cost(n: &Channel, ctx: &ThermalContext, eps: f64) -> Result<OneShotResult> {
    one_shot(n, ctx, eps, 1, OneShotMode::Cost, &HtBudget::default())
}

/// One-shot value of `N^⊗copies` with bath `ctx^⊗copies`.
pub fn one_shot(
    n: &Channel,
    ctx: &ThermalContext,
    eps: f64,
    copies: usize,
    mode: OneShotMode,
    budget: &HtBudget,
) -> Result<OneShotResult> {
    check_eps(eps)?;
    require_square(n, ctx)?;
    if copies == 0 || copies > MAX_COPIES {
        return Err(Error::input(format!(
            "copies must lie in 1..={MAX_COPIES}, got {copies}"
        )));
    }
    let nk = n.power(copies);
    let ck = ctx.power(copies)?;
    let log_gamma = ck.log_gamma();
    let choi_dim = nk.dim_in() * nk.dim_out();
    match mode {
        OneShotMode::Distill => {
            let mut budget = budget.clone();
            if copies > 1 && budget.seed_inputs.is_empty() {
                // product of the single-copy optimizer as a starting point
                let single = channel_ht_rel_entropy(n, &ctx.log_gamma(), eps, &budget)?;
                if let Some(psi) = &single.achieving_input {
                    let a = amplitudes_from_input(psi)?;
                    let mut prod = a.clone();
                    for _ in 1..copies {
                        prod = kron(&prod, &a);
                    }
                    budget.seed_inputs.push(prod);
                }
            }
            let large = choi_dim > CHANNEL_SDP_CHOI_LIMIT;
            if large {
                budget.restarts = 0;
                budget.max_evals = budget.max_evals.min(150);
            }
            let r = channel_ht_rel_entropy(&nk, &log_gamma, eps, &budget)?;
            let mut out = finish(mode, eps, copies, r.value, r.certificate);
            out.partial = large;
            out.warning = if large {
                Some(format!(
                    "budget exceeded: Choi dimension {choi_dim} above {CHANNEL_SDP_CHOI_LIMIT}; short search without the joint program"
                ))
            } else {
                r.warning
            };
            out.input_amplitudes = r.achieving_input.as_ref().map(amplitudes_from_input).transpose()?;
            Ok(out)
        }
        OneShotMode::Cost => {
            if choi_dim > CHANNEL_SDP_CHOI_LIMIT {
                // the unsmoothed value still bounds the smoothed one from above
                let r = channel_max_rel_entropy_log(&nk, &log_gamma)?;
                let mut out = finish(mode, eps, copies, r.value, Certificate::UpperBound);
                out.partial = true;
                out.warning = Some(format!(
                    "budget exceeded: Choi dimension {choi_dim} above {CHANNEL_SDP_CHOI_LIMIT}; reporting the unsmoothed max-divergence"
                ));
                return Ok(out);
            }
            let r = smoothed_channel_max_rel_entropy_log(&nk, &log_gamma, eps)?;
            let mut out = finish(mode, eps, copies, r.value, r.certificate);
            out.warning = r.warning;
            Ok(out)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatePoint {
    pub copies: usize,
    pub distill: OneShotResult,
    pub cost: OneShotResult,
}

impl RatePoint {
    /// `D_H^ε(N^⊗k)/k`.
    pub fn ht_rate(&self) -> f64 {
        self.distill.raw_divergence / self.copies as f64
    }

    /// Smoothed `D_∞^ε(N^⊗k)/k`.
    pub fn smoothed_max_rate(&self) -> f64 {
        self.cost.raw_divergence / self.copies as f64
    }
}

#[derive(Debug, Clone)]
pub struct RateEstimate {
    pub eps: f64,
    /// `D[N‖T^β]` in nats.
    pub target: f64,
    pub points: Vec<RatePoint>,
    pub partial: bool,
    pub warnings: Vec<String>,
}

/// One-shot rates for `k = 1..=max_copies` next to the asymptotic target.
pub fn asymptotic_rate_estimate(
    n: &Channel,
    ctx: &ThermalContext,
    eps: f64,
    max_copies: usize,
) -> Result<RateEstimate> {
    asymptotic_rate_estimate_seeded(n, ctx, eps, max_copies, HtBudget::default().seed)
}

/// As [`asymptotic_rate_estimate`], with the search seed supplied.
pub fn asymptotic_rate_estimate_seeded(
    n: &Channel,
    ctx: &ThermalContext,
    eps: f64,
    max_copies: usize,
    seed: u64,
) -> Result<RateEstimate> {
    check_eps(eps)?;
    require_square(n, ctx)?;
    if max_copies == 0 || max_copies > MAX_COPIES {
        return Err(Error::input(format!(
            "max_copies must lie in 1..={MAX_COPIES}, got {max_copies}"
        )));
    }
    let target = channel_rel_entropy_log(n, &ctx.log_gamma(), &AscentOptions::default())?.value;
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    let mut partial = false;
    let mut single: Option<CMatrix> = None;
    let choi1 = n.dim_in() * n.dim_out();
    for k in 1..=max_copies {
        let choi = choi1.pow(k as u32);
        if choi > RATE_CHOI_LIMIT {
            partial = true;
            warnings.push(format!(
                "budget exceeded: stopped before {k} copies (Choi dimension {choi} above {RATE_CHOI_LIMIT})"
            ));
            break;
        }
        let mut budget = HtBudget {
            seed,
            ..HtBudget::default()
        };
        if let Some(a) = &single {
            let mut prod = a.clone();
            for _ in 1..k {
                prod = kron(&prod, a);
            }
            budget.seed_inputs.push(prod);
        }
        let distill = one_shot(n, ctx, eps, k, OneShotMode::Distill, &budget)?;
        let cost = one_shot(n, ctx, eps, k, OneShotMode::Cost, &budget)?;
        if k == 1 {
            single = distill.input_amplitudes.clone();
        }
        partial |= distill.partial || cost.partial;
        warnings.extend(distill.warning.iter().chain(cost.warning.iter()).cloned());
        points.push(RatePoint {
            copies: k,
            distill,
            cost,
        });
    }
    Ok(RateEstimate {
        eps,
        target,
        points,
        partial,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Hermitian, ThermalContext};
    use std::f64::consts::LN_2;

    #[test]
    fn golden_unit_counts() {
        let ctx = ThermalContext::degenerate(2, 1.0).unwrap();
        let id = Channel::identity(2);
        let d = one_shot_distill(&id, &ctx, 1e-6).unwrap();
        assert_eq!(d.units, 2);
        assert!((d.distill_nats.unwrap() - LN_2).abs() < 1e-15);
        assert!((d.raw_divergence - 2.0 * LN_2).abs() < 1e-5);
        let c = one_shot_cost(&id, &ctx, 1e-6).unwrap();
        assert_eq!(c.units, 2);
        assert!(c.distill_nats.is_none());
    }

    #[test]
    fn free_object_is_zero() {
        let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 0.9]), 1.2).unwrap();
        let t = Channel::absolutely_thermal(&ctx, 2);
        for eps in [0.01, 0.05, 0.3, 0.7] {
            assert_eq!(one_shot_distill(&t, &ctx, eps).unwrap().distill_nats, Some(0.0));
            assert_eq!(one_shot_cost(&t, &ctx, eps).unwrap().cost_nats, Some(0.0));
        }
    }

    #[test]
    fn eps_bounds() {
        let ctx = ThermalContext::degenerate(2, 1.0).unwrap();
        let id = Channel::identity(2);
        for eps in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(one_shot_distill(&id, &ctx, eps).unwrap_err().is_input_error());
        }
    }

    #[test]
    fn rates_for_two_copies() {
        let ctx = ThermalContext::degenerate(2, 1.0).unwrap();
        let id = Channel::identity(2);
        let eps = 0.05;
        let est = asymptotic_rate_estimate(&id, &ctx, eps, 2).unwrap();
        assert_eq!(est.points.len(), 2);
        assert!(!est.partial);
        let slack = (1.0 / (1.0 - eps)).ln();
        for p in &est.points {
            let k = p.copies as f64;
            assert!(p.ht_rate() >= 0.0);
            assert!(p.ht_rate() <= 2.0 * LN_2 + slack / k + 1e-6);
            // compared in golden units per copy
            assert!(p.distill.rate_per_copy <= p.cost.rate_per_copy + slack + 1e-6);
        }
        assert!((est.points[1].ht_rate() - est.points[0].ht_rate()).abs() <= slack + 1e-9);
    }
}
