//! Tail-risk kernel: empirical expected shortfall, CVaR via the
//! Rockafellar–Uryasev variational form, and the moral-risk coupling that
//! turns judgment scores plus predictions into a penalizable loss.
//!
//! Everything here is an exact computation on finite samples — sorting
//! replaces iterative minimization, and `theta` is the tail *fraction*
//! (the worst `theta` share of cases), so `theta = 1` degenerates cleanly
//! to the plain mean instead of dividing by zero.

use crate::error::{Error, Result};

/// Fraction of worst-off samples under consideration, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFraction(f64);

impl TailFraction {
    /// Full-sample tail: reduces every tail statistic to the plain mean.
    pub const FULL: TailFraction = TailFraction(1.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta > 1.0 {
            return Err(Error::validation(
                "theta",
                format!("tail fraction must be in (0, 1], got {theta}"),
            ));
        }
        Ok(Self(theta))
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

/// CVaR result: the tail mean and the smallest minimizer of the
/// variational functional (the `(1-theta)`-quantile of the losses).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cvar {
    pub value: f64,
    pub t_star: f64,
}

fn check_samples(what: &'static str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::validation(what, "sample vector must be nonempty"));
    }
    if let Some(bad) = xs.iter().find(|v| !v.is_finite()) {
        return Err(Error::validation(
            what,
            format!("sample vector must be all finite, found {bad}"),
        ));
    }
    Ok(())
}

fn sorted_ascending(xs: &[f64]) -> Vec<f64> {
    let mut s = xs.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    s
}

/// The `⌈θn⌉`-th smallest sample value (type-1 order statistic, no
/// interpolation).
pub fn lower_quantile(xs: &[f64], theta: TailFraction) -> Result<f64> {
    check_samples("samples", xs)?;
    let s = sorted_ascending(xs);
    let n = s.len();
    let k = (theta.get() * n as f64).ceil() as usize;
    Ok(s[k.clamp(1, n) - 1])
}

/// Empirical expected shortfall of the lower `theta`-tail:
///
/// `ES_θ(X) = −(1/θ)·( mean(X·1[X ≤ x_θ]) + x_θ·(θ − P[X ≤ x_θ]) )`
///
/// where `x_θ` is the lower quantile. The correction term redistributes
/// the quantile atom so fractional tails average correctly; the sign
/// convention reports how bad the tail is as a positive magnitude when
/// the tail is negative.
pub fn expected_shortfall(xs: &[f64], theta: TailFraction) -> Result<f64> {
    check_samples("samples", xs)?;
    let x_theta = lower_quantile(xs, theta)?;
    let n = xs.len() as f64;
    let tail_mean = xs.iter().filter(|&&x| x <= x_theta).sum::<f64>() / n;
    let tail_prob = xs.iter().filter(|&&x| x <= x_theta).count() as f64 / n;
    Ok(-(tail_mean + x_theta * (theta.get() - tail_prob)) / theta.get())
}

/// The Rockafellar–Uryasev functional `F_θ(t) = t + (1/θ)·mean((loss − t)⁺)`.
///
/// Convex and piecewise linear in `t`; its minimum over `t` is the CVaR
/// of the losses, attained at the `(1−θ)`-quantile.
pub fn ru_functional(losses: &[f64], theta: TailFraction, t: f64) -> Result<f64> {
    check_samples("losses", losses)?;
    if !t.is_finite() {
        return Err(Error::validation("t", format!("must be finite, got {t}")));
    }
    let n = losses.len() as f64;
    let excess: f64 = losses.iter().map(|&x| (x - t).max(0.0)).sum();
    Ok(t + excess / (theta.get() * n))
}

/// CVaR of the losses at tail fraction `theta`, computed exactly.
///
/// Sorting pins the minimizer: `t_star` is the `⌈(1−θ)n⌉`-th smallest
/// loss (clamped to the minimum when `θ = 1`, where every `t ≤ min` is a
/// minimizer), and the value is the functional evaluated there — the mean
/// of the worst `θ`-tail with fractional-tail interpolation built in.
pub fn cvar(losses: &[f64], theta: TailFraction) -> Result<Cvar> {
    check_samples("losses", losses)?;
    let s = sorted_ascending(losses);
    let n = s.len();
    let k = ((1.0 - theta.get()) * n as f64).ceil() as usize;
    let t_star = s[k.clamp(1, n) - 1];
    let excess: f64 = s.iter().map(|&x| (x - t_star).max(0.0)).sum();
    Ok(Cvar {
        value: t_star + excess / (theta.get() * n as f64),
        t_star,
    })
}

/// Penalizable disagreement between a probabilistic prediction and the
/// moral reading of the same action:
///
/// `risk = ŷ·(τ⁺ − ej)⁺ + (1 − ŷ)·(ej − τ⁺)⁺`
///
/// The first term charges confidence in approval when the judgment sits
/// below the threshold; the second charges denial when it sits above.
/// Zero exactly when the prediction fully agrees with the moral label or
/// the judgment lies on the threshold. Linear in `ŷ` with slope
/// `τ⁺ − ej`, which is what routes gradients through the penalty.
pub fn moral_risk(y_hat: f64, ej: f64, tau_plus: f64) -> Result<f64> {
    if !y_hat.is_finite() || !(0.0..=1.0).contains(&y_hat) {
        return Err(Error::validation(
            "y_hat",
            format!("prediction must be a probability in [0, 1], got {y_hat}"),
        ));
    }
    for (name, v) in [("ej", ej), ("tau_plus", tau_plus)] {
        if !v.is_finite() {
            return Err(Error::validation(name, format!("must be finite, got {v}")));
        }
    }
    Ok(y_hat * (tau_plus - ej).max(0.0) + (1.0 - y_hat) * (ej - tau_plus).max(0.0))
}

/// Expected Moral Shortfall: the CVaR of per-sample moral risks.
///
/// Averages the worst `theta`-fraction of risks; `theta = 1` is the mean
/// risk. Nonincreasing in `theta` (a wider tail dilutes the worst cases).
pub fn ems(risks: &[f64], theta: TailFraction) -> Result<f64> {
    check_samples("risks", risks)?;
    if let Some(bad) = risks.iter().find(|&&r| r < 0.0) {
        return Err(Error::validation(
            "risks",
            format!("risks must be nonnegative, found {bad}"),
        ));
    }
    Ok(cvar(risks, theta)?.value)
}

/// Subgradient of [`ems`] with respect to each risk component:
/// `(1/(θn))·1[risk_i > t_star]`, with ties at `t_star` assigned zero.
///
/// This is the piece the composite training loss routes through
/// backpropagation; tie components sit on the nondifferentiable boundary
/// and taking the zero element of the subdifferential there keeps the
/// update conservative.
pub fn ems_subgradient(risks: &[f64], theta: TailFraction) -> Result<Vec<f64>> {
    check_samples("risks", risks)?;
    let c = cvar(risks, theta)?;
    let scale = 1.0 / (theta.get() * risks.len() as f64);
    Ok(risks
        .iter()
        .map(|&r| if r > c.t_star { scale } else { 0.0 })
        .collect())
}
