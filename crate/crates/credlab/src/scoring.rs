//! Strictly proper scoring rules represented by convex generators.
//!
//! A binary-outcome proper scoring rule is characterized by a strictly
//! convex generator `G`: the expected score of reporting `r` when the true
//! success probability is `p` takes the Savage form `G(r) + G'(r)(p - r)`,
//! and the regret from misreporting is the Bregman divergence
//! `G(p) - G(r) - G'(r)(p - r)`. The curvature `G''` is what prices
//! misreporting, so everything downstream keys off it.

use crate::error::{Error, Result};

/// The generator family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `G(p) = p^2`, constant curvature 2.
    Brier,
    /// `G(p) = p^alpha` with `alpha > 1`; curvature `alpha(alpha-1)p^(alpha-2)`.
    Power { alpha: f64 },
}

/// A strictly convex generator together with the report/type domain on which
/// it is evaluated.
///
/// Power generators with `alpha < 2` have a curvature singularity at 0, so
/// their default domain is `[0.05, 0.95]`; Brier and `alpha >= 2` default to
/// the full unit interval. Use [`Generator::with_domain`] to override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    domain_lo: f64,
    domain_hi: f64,
}

impl Generator {
    pub fn brier() -> Self {
        Generator {
            kind: GeneratorKind::Brier,
            domain_lo: 0.0,
            domain_hi: 1.0,
        }
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "power generator requires alpha > 1, got {alpha}"
            )));
        }
        let (lo, hi) = if alpha < 2.0 { (0.05, 0.95) } else { (0.0, 1.0) };
        Ok(Generator {
            kind: GeneratorKind::Power { alpha },
            domain_lo: lo,
            domain_hi: hi,
        })
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Parameter(format!(
                "generator domain must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"
            )));
        }
        self.domain_lo = lo;
        self.domain_hi = hi;
        Ok(self)
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    /// `(domain_lo, domain_hi)`.
    pub fn domain(&self) -> (f64, f64) {
        (self.domain_lo, self.domain_hi)
    }

    fn check(&self, x: f64) -> Result<()> {
        if x.is_finite() && x >= self.domain_lo && x <= self.domain_hi {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                lo: self.domain_lo,
                hi: self.domain_hi,
            })
        }
    }

    /// `G(p)`.
    pub fn value(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(match self.kind {
            GeneratorKind::Brier => p * p,
            GeneratorKind::Power { alpha } => p.powf(alpha),
        })
    }

    /// `G'(p)`.
    pub fn slope(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(match self.kind {
            GeneratorKind::Brier => 2.0 * p,
            GeneratorKind::Power { alpha } => alpha * p.powf(alpha - 1.0),
        })
    }

    /// `G''(p)`, strictly positive on the domain.
    ///
    /// For `alpha < 2` the curvature blows up as `p -> 0`; evaluating at
    /// `p = 0` is a domain error even if 0 is inside the configured domain.
    pub fn curvature(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        match self.kind {
            GeneratorKind::Brier => Ok(2.0),
            GeneratorKind::Power { alpha } => {
                if alpha < 2.0 && p <= 0.0 {
                    return Err(Error::Domain {
                        value: p,
                        lo: f64::MIN_POSITIVE,
                        hi: self.domain_hi,
                    });
                }
                Ok(alpha * (alpha - 1.0) * p.powf(alpha - 2.0))
            }
        }
    }

    /// Expected score of reporting `r` against true probability `p`:
    /// `G(r) + G'(r)(p - r)`. Maximized over `r` exactly at `r = p`.
    pub fn expected_score(&self, r: f64, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(self.value(r)? + self.slope(r)? * (p - r))
    }

    /// Expected-score regret of reporting `r` against truth `p`:
    /// `G(p) - G(r) - G'(r)(p - r)`, the Bregman divergence of `p` from `r`.
    /// Non-negative, zero iff `r = p`.
    pub fn scoring_regret(&self, r: f64, p: f64) -> Result<f64> {
        Ok(self.value(p)? - self.value(r)? - self.slope(r)? * (p - r))
    }
}
