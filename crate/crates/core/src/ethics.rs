//! Normative-ethics calculus for scoring a single action.
//!
//! An action is described by six context terms covering the three broad
//! normative theories: consequence characteristics (severity, utility,
//! duration), the agent's moral intention, and the principles upheld or
//! violated. A philosophy weighting distributes mass over the three
//! theories, a sign profile decides whether each term pushes the judgment
//! up or down, and the signed weighted sum is the ethical judgment score.
//!
//! The score is read against a per-action threshold pair `±(tau_default +
//! tau_adjust)` where the adjustment is the sample standard deviation of
//! the six unsigned weighted terms, so dispersed contexts widen the grey
//! zone while uniform contexts keep it at the domain default.

use crate::error::{Error, Result};

/// Weights over the three normative theories.
///
/// `alpha` weighs consequentialism, `beta` deontology, `gamma` virtue
/// ethics. Components live in `[0, 1]` and must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormativeWeights {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

/// Tolerance for the weights-sum-to-one check.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl NormativeWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(
                    "weights",
                    format!("{name} must be in [0, 1], got {v}"),
                ));
            }
        }
        let sum = alpha + beta + gamma;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::validation(
                "weights",
                format!("alpha + beta + gamma must equal 1, got {sum}"),
            ));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Look up a named philosophy preset.
    ///
    /// `consequentialist` = (0.8, 0.1, 0.1), `principlism` = (0.3, 0.6, 0.1),
    /// `uniform` = (1/3, 1/3, 1/3).
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "consequentialist" => Self::new(0.8, 0.1, 0.1),
            "principlism" => Self::new(0.3, 0.6, 0.1),
            "uniform" => Self::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
            other => Err(Error::validation(
                "weights.preset",
                format!("unknown preset `{other}` (expected consequentialist, principlism, or uniform)"),
            )),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The six quantified context terms of one action, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextVector {
    pub severity: f64,
    pub utility: f64,
    pub duration: f64,
    pub intention: f64,
    pub upheld: f64,
    pub violated: f64,
}

impl ContextVector {
    pub const ZERO: ContextVector = ContextVector {
        severity: 0.0,
        utility: 0.0,
        duration: 0.0,
        intention: 0.0,
        upheld: 0.0,
        violated: 0.0,
    };

    pub fn new(
        severity: f64,
        utility: f64,
        duration: f64,
        intention: f64,
        upheld: f64,
        violated: f64,
    ) -> Result<Self> {
        let cv = Self {
            severity,
            utility,
            duration,
            intention,
            upheld,
            violated,
        };
        cv.validate()?;
        Ok(cv)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named_terms() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(
                    "context",
                    format!("{name} must be finite and in [0, 1], got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Terms in canonical order: severity, utility, duration, intention,
    /// upheld, violated.
    pub fn terms(&self) -> [f64; 6] {
        [
            self.severity,
            self.utility,
            self.duration,
            self.intention,
            self.upheld,
            self.violated,
        ]
    }

    fn named_terms(&self) -> [(&'static str, f64); 6] {
        [
            ("severity", self.severity),
            ("utility", self.utility),
            ("duration", self.duration),
            ("intention", self.intention),
            ("upheld", self.upheld),
            ("violated", self.violated),
        ]
    }
}

/// Direction in which a term contributes to the judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Positive),
            -1 => Ok(Sign::Negative),
            other => Err(Error::validation(
                "sign",
                format!("sign must be exactly -1 or +1, got {other}"),
            )),
        }
    }

    fn flipped(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Per-term contribution directions.
///
/// The default treats utility, intention, and principles upheld as
/// positive contributions; severity, duration, and principles violated
/// enter negatively (harms count against the action).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignProfile {
    pub severity: Sign,
    pub utility: Sign,
    pub duration: Sign,
    pub intention: Sign,
    pub upheld: Sign,
    pub violated: Sign,
}

impl Default for SignProfile {
    fn default() -> Self {
        Self {
            severity: Sign::Negative,
            utility: Sign::Positive,
            duration: Sign::Negative,
            intention: Sign::Positive,
            upheld: Sign::Positive,
            violated: Sign::Negative,
        }
    }
}

impl SignProfile {
    pub fn factors(&self) -> [f64; 6] {
        [
            self.severity.factor(),
            self.utility.factor(),
            self.duration.factor(),
            self.intention.factor(),
            self.upheld.factor(),
            self.violated.factor(),
        ]
    }

    /// Profile with every direction reversed.
    pub fn negated(&self) -> Self {
        Self {
            severity: self.severity.flipped(),
            utility: self.utility.flipped(),
            duration: self.duration.flipped(),
            intention: self.intention.flipped(),
            upheld: self.upheld.flipped(),
            violated: self.violated.flipped(),
        }
    }
}

/// Threshold pair bounding the morally grey zone.
///
/// `tau_plus = tau_default + tau_adjust` and `tau_minus = -tau_plus` by
/// construction, so the pair is always symmetric around zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair {
    tau_default: f64,
    tau_adjust: f64,
}

impl ThresholdPair {
    pub fn new(tau_default: f64, tau_adjust: f64) -> Result<Self> {
        if !tau_default.is_finite() || tau_default < 0.0 {
            return Err(Error::validation(
                "tau_default",
                format!("must be finite and >= 0, got {tau_default}"),
            ));
        }
        if !tau_adjust.is_finite() || tau_adjust < 0.0 {
            return Err(Error::validation(
                "tau_adjust",
                format!("must be finite and >= 0, got {tau_adjust}"),
            ));
        }
        Ok(Self {
            tau_default,
            tau_adjust,
        })
    }

    pub fn tau_default(&self) -> f64 {
        self.tau_default
    }
    pub fn tau_adjust(&self) -> f64 {
        self.tau_adjust
    }
    pub fn tau_plus(&self) -> f64 {
        self.tau_default + self.tau_adjust
    }
    pub fn tau_minus(&self) -> f64 {
        -self.tau_plus()
    }
}

/// Tri-state verdict for one judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoralVerdict {
    MorallyRight,
    MorallyGrey,
    MorallyWrong,
}

/// The six signed weighted term products, in canonical order.
///
/// Consequence terms (severity, utility, duration) take `alpha`, the
/// intention term takes `beta`, and the principle terms take `gamma`.
pub fn weighted_terms(
    w: &NormativeWeights,
    ec: &ContextVector,
    g: &SignProfile,
) -> Result<[f64; 6]> {
    ec.validate()?;
    let t = ec.terms();
    let s = g.factors();
    let wts = [w.alpha(), w.alpha(), w.alpha(), w.beta(), w.gamma(), w.gamma()];
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = s[i] * wts[i] * t[i];
    }
    Ok(out)
}

/// Ethical judgment score: the sum of the signed weighted terms.
pub fn ethical_judgment(
    w: &NormativeWeights,
    ec: &ContextVector,
    g: &SignProfile,
) -> Result<f64> {
    Ok(weighted_terms(w, ec, g)?.iter().sum())
}

/// Sample standard deviation (denominator n-1) of a fixed-size term list.
fn sample_std(terms: &[f64]) -> f64 {
    let n = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / n;
    let ss: f64 = terms.iter().map(|t| (t - mean) * (t - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Context-sensitive threshold pair for one action.
///
/// The adjustment is the sample standard deviation of the six unsigned
/// weighted terms `w_i * ec_i` — sign factors are excluded so the
/// adjustment measures contextual dispersion, not moral direction.
pub fn context_threshold(
    w: &NormativeWeights,
    ec: &ContextVector,
    g: &SignProfile,
    tau_default: f64,
) -> Result<ThresholdPair> {
    let signed = weighted_terms(w, ec, g)?;
    let s = g.factors();
    // Strip the signs back off: |g_i| = 1, so g_i * term recovers w_i * ec_i.
    let unsigned: Vec<f64> = signed.iter().zip(s.iter()).map(|(t, g)| t * g).collect();
    ThresholdPair::new(tau_default, sample_std(&unsigned))
}

/// Tri-state verdict. Boundary values fall into the grey zone.
pub fn moral_verdict(ej: f64, thresholds: &ThresholdPair) -> MoralVerdict {
    if ej > thresholds.tau_plus() {
        MoralVerdict::MorallyRight
    } else if ej < thresholds.tau_minus() {
        MoralVerdict::MorallyWrong
    } else {
        MoralVerdict::MorallyGrey
    }
}

/// Binary collapse of the verdict used as a training / override target.
///
/// Returns 1 iff `ej >= tau_plus`; the grey zone maps to 0 (conservative
/// denial). The `ej == tau_plus` tie deliberately counts as 1 so the rule
/// is a single deterministic cutoff.
pub fn moral_label(ej: f64, thresholds: &ThresholdPair) -> u8 {
    u8::from(ej >= thresholds.tau_plus())
}
