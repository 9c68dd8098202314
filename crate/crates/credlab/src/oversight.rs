//! The principal's screening problem: welfare integrals over the induced
//! screening, optimal step thresholds for arbitrary generators, affine
//! suboptimality, smooth-oversight welfare gaps, the regulation condition,
//! and comparative statics.
//!
//! For every approval function `q`, the agent's best response turns `q` into
//! the induced screening `q~(p) = q(r*(p))` experienced by true type `p`.
//! The principal's utility is `u_d + integral of q~(p) Pi(p) f(p) dp`, where
//! `Pi` is the net surplus of approving type `p`. Step approval admits an
//! exact split of the integral at the inflation-threshold type; smooth
//! approval is integrated after locating the jumps and kinks of `q~`.

use rayon::prelude::*;

use crate::agent::{self, AgentParams, ApprovalFunction};
use crate::error::{Error, Result};
use crate::numerics::{bisect, integrate, integrate_with_breakpoints};
use crate::scoring::Generator;

/// Quadrature convergence target for welfare integrals.
const WELFARE_TOL: f64 = 1e-8;

/// Principal utilities for success, failure, and delegation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalParams {
    pub success: f64,
    pub failure: f64,
    pub delegation: f64,
}

impl PrincipalParams {
    pub fn new(success: f64, failure: f64, delegation: f64) -> Result<Self> {
        if !(success > delegation && delegation > failure) {
            return Err(Error::Parameter(format!(
                "principal utilities must satisfy success > delegation > failure, \
                 got ({success}, {delegation}, {failure})"
            )));
        }
        Ok(PrincipalParams {
            success,
            failure,
            delegation,
        })
    }

    /// The type at which approving and delegating are indifferent:
    /// `(u_d - u_f) / (u_s - u_f)`, strictly inside (0, 1).
    pub fn p_min(&self) -> f64 {
        (self.delegation - self.failure) / (self.success - self.failure)
    }

    /// Net surplus of approving type `p`:
    /// `Pi(p) = p (u_s - u_f) - (u_d - u_f)`. Zero exactly at `p_min`.
    pub fn surplus(&self, p: f64) -> f64 {
        p * (self.success - self.failure) - (self.delegation - self.failure)
    }
}

/// Type distribution on `[0, 1]` with a quadrature-friendly density.
///
/// Beta shapes are restricted to `[1, 50]`: below 1 the density is singular
/// at an endpoint and the module's panel-doubling quadrature cannot certify
/// its integrals; above 50 the log-gamma normalization loses accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TypeDistribution {
    Uniform { lo: f64, hi: f64 },
    Beta { a: f64, b: f64 },
}

impl TypeDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Parameter(format!(
                "uniform support must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"
            )));
        }
        Ok(TypeDistribution::Uniform { lo, hi })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(1.0..=50.0).contains(&a) || !(1.0..=50.0).contains(&b) {
            return Err(Error::Parameter(format!(
                "beta shapes must lie in [1, 50], got ({a}, {b})"
            )));
        }
        Ok(TypeDistribution::Beta { a, b })
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            TypeDistribution::Uniform { lo, hi } => (*lo, *hi),
            TypeDistribution::Beta { .. } => (0.0, 1.0),
        }
    }

    pub fn density(&self, p: f64) -> f64 {
        match self {
            TypeDistribution::Uniform { lo, hi } => {
                if p >= *lo && p <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            TypeDistribution::Beta { a, b } => {
                if !(0.0..=1.0).contains(&p) {
                    return 0.0;
                }
                let mut log_d = -statrs::function::beta::ln_beta(*a, *b);
                if *a != 1.0 {
                    log_d += (a - 1.0) * p.ln();
                }
                if *b != 1.0 {
                    log_d += (b - 1.0) * (1.0 - p).ln();
                }
                log_d.exp()
            }
        }
    }
}

/// The full screening instance: generator, principal, agent, and types.
#[derive(Debug, Clone, PartialEq)]
pub struct OversightGame {
    pub gen: Generator,
    pub principal: PrincipalParams,
    pub agent: AgentParams,
    pub dist: TypeDistribution,
}

/// Result of inverting the step-inflation condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdType {
    /// The marginal type: everyone above inflates to the step and is
    /// approved, everyone below stays truthful.
    pub p_star: f64,
    /// Set when even the lowest representable type prefers to inflate.
    pub all_inflate: bool,
}

/// Search grids for the sigmoid welfare-gap estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidSearchSpec {
    pub r_min_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// Pattern-search refinement iterations after the grid scan.
    pub refine_rounds: usize,
}

impl SigmoidSearchSpec {
    /// A broad default: centers across the unit interval, widths log-spaced
    /// from `tau_min` up to 0.2.
    pub fn default_for(tau_min: f64) -> Self {
        let r_min_grid = (0..=20).map(|i| 0.05 + 0.9 * i as f64 / 20.0).collect();
        let mut tau_grid = Vec::new();
        let mut t = tau_min.max(1e-12);
        while t < 0.2 {
            tau_grid.push(t);
            t *= 4.0;
        }
        tau_grid.push(0.2);
        SigmoidSearchSpec {
            r_min_grid,
            tau_grid,
            refine_rounds: 60,
        }
    }
}

/// Output of the sigmoid-restricted welfare-gap estimator.
///
/// `gap` is an upper bound on the true smooth-oversight gap: the infimum is
/// taken over the sigmoid family with width at least `tau_min`, not over all
/// C^1 approval functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothGapEstimate {
    pub gap: f64,
    pub best: ApprovalFunction,
    pub best_utility: f64,
}

/// Welfare recoverable by imposing first-best screening on top of an organic
/// approval function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulationDecision {
    pub gain: f64,
    pub regulate: bool,
}

/// Comparative statics bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticsReport {
    /// Numerical `d p_min / d u_d`; equals `1 / (u_s - u_f)`.
    pub p_min_delegation_sensitivity: f64,
    /// Optimal step threshold recomputed under Uniform(0,1) types.
    pub r0_uniform: f64,
    /// Optimal step threshold recomputed under Beta(2,2) types.
    pub r0_beta22: f64,
    /// Whether the two thresholds agree to 1e-12 (they must: the threshold
    /// depends only on `p_min`, `gamma`, `beta`, and the generator).
    pub r0_distribution_invariant: bool,
    /// Cross-agent sample size for detecting inflation `delta` at
    /// significance `alpha`, forwarded from the detection module.
    pub cross_agent_sample: u64,
}

impl OversightGame {
    /// Validates that the type support lies inside the generator domain, so
    /// every welfare integral below is total.
    pub fn new(
        gen: Generator,
        principal: PrincipalParams,
        agent: AgentParams,
        dist: TypeDistribution,
    ) -> Result<Self> {
        let (dlo, dhi) = gen.domain();
        let (slo, shi) = dist.support();
        if slo < dlo || shi > dhi {
            return Err(Error::Parameter(format!(
                "type support [{slo}, {shi}] must lie inside the generator domain \
                 [{dlo}, {dhi}]"
            )));
        }
        Ok(OversightGame {
            gen,
            principal,
            agent,
            dist,
        })
    }

    /// Brier-regime flag: when `gamma / beta > (1 - p_min)^2` the optimal
    /// step threshold leaves the report space and screening degenerates.
    pub fn is_degenerate_regime(&self) -> bool {
        let pm = self.principal.p_min();
        self.agent.gamma / self.agent.beta > (1.0 - pm) * (1.0 - pm)
    }

    /// Approval probability experienced by true type `p` under `q` once the
    /// agent best-responds.
    pub fn induced_screening(&self, q: &ApprovalFunction, p: f64) -> Result<f64> {
        let r = agent::best_response(&self.gen, q, &self.agent, p)?;
        Ok(q.value(r))
    }

    /// Induced-screening closure sharing one grid-cached solver across all
    /// evaluations; panics are impossible because the game constructor pins
    /// the type support inside the generator domain.
    fn screening_closure<'a>(&'a self, q: &'a ApprovalFunction) -> impl Fn(f64) -> f64 + 'a {
        let solver = agent::ResponseSolver::new(&self.gen, q, &self.agent);
        move |p: f64| q.value(solver.solve(p).expect("support validated inside domain"))
    }

    /// The marginal type for a step at `r0`: the unique `p*` with
    /// `beta * regret(r0, p*) = gamma`, found by bisection (the calibration
    /// cost is strictly decreasing in `p*`).
    pub fn threshold_type(&self, r0: f64) -> Result<ThresholdType> {
        let (dlo, _) = self.gen.domain();
        let cost = |p: f64| self.agent.beta * self.gen.scoring_regret(r0, p).unwrap();
        if cost(dlo) < self.agent.gamma {
            return Ok(ThresholdType {
                p_star: dlo,
                all_inflate: true,
            });
        }
        let gamma = self.agent.gamma;
        let p_star = bisect(|p| cost(p) - gamma, dlo, r0)?;
        Ok(ThresholdType {
            p_star,
            all_inflate: false,
        })
    }

    /// The step threshold whose marginal type is exactly `p_min`.
    ///
    /// Brier uses the closed form `p_min + sqrt(gamma / beta)`; other
    /// generators invert the calibration-cost integral by bisection. When no
    /// feasible threshold exists inside the report domain the step
    /// degenerates to rejecting everyone.
    pub fn optimal_step_threshold(&self) -> Result<f64> {
        let pm = self.principal.p_min();
        let (dlo, dhi) = self.gen.domain();
        if pm < dlo || pm > dhi {
            return Err(Error::Parameter(format!(
                "p_min = {pm} lies outside the generator domain [{dlo}, {dhi}]"
            )));
        }
        if let crate::scoring::GeneratorKind::Brier = self.gen.kind() {
            let r0 = pm + (self.agent.gamma / self.agent.beta).sqrt();
            if r0 > dhi {
                return Err(Error::DegenerateRegime(format!(
                    "threshold p_min + sqrt(gamma/beta) = {r0} exceeds the report \
                     space; screening collapses to rejecting everyone"
                )));
            }
            return Ok(r0);
        }
        let gamma = self.agent.gamma;
        let cost =
            |r0: f64| self.agent.beta * self.gen.scoring_regret(r0, pm).unwrap() - gamma;
        if cost(dhi) < 0.0 {
            return Err(Error::DegenerateRegime(format!(
                "calibration cost at the domain edge {dhi} is below gamma = {gamma}; \
                 no feasible step threshold"
            )));
        }
        bisect(cost, pm, dhi)
    }

    /// Expected principal utility under approval `q`, with the agent
    /// best-responding.
    pub fn principal_utility(&self, q: &ApprovalFunction) -> Result<f64> {
        if let ApprovalFunction::Step { r0 } = q {
            return self.step_utility(*r0);
        }
        let (slo, shi) = self.dist.support();
        let seeds = self.screening_breakpoints(q)?;
        let screening = self.screening_closure(q);
        let integrand =
            |p: f64| screening(p) * self.principal.surplus(p) * self.dist.density(p);
        let v = integrate_with_breakpoints(integrand, slo, shi, &seeds, WELFARE_TOL)?;
        Ok(self.principal.delegation + v)
    }

    /// Step-approval utility via the exact split at the marginal type: the
    /// induced screening is an indicator, so the integrand is smooth on each
    /// side of the split.
    fn step_utility(&self, r0: f64) -> Result<f64> {
        let (slo, shi) = self.dist.support();
        let (_, dhi) = self.gen.domain();
        if r0 > dhi {
            return Ok(self.principal.delegation); // threshold unreachable
        }
        let t = self.threshold_type(r0)?;
        let from = t.p_star.max(slo);
        if from >= shi {
            return Ok(self.principal.delegation);
        }
        let pm = self.principal.p_min();
        let v = integrate_with_breakpoints(
            |p| self.principal.surplus(p) * self.dist.density(p),
            from,
            shi,
            &[pm],
            WELFARE_TOL,
        )?;
        Ok(self.principal.delegation + v)
    }

    /// `u_d + integral over { p >= p_min } of Pi(p) f(p) dp`: the utility of
    /// the pointwise-optimal screening.
    pub fn first_best_utility(&self) -> Result<f64> {
        let (slo, shi) = self.dist.support();
        let from = self.principal.p_min().max(slo);
        if from >= shi {
            return Ok(self.principal.delegation);
        }
        let v = integrate(
            |p| self.principal.surplus(p) * self.dist.density(p),
            from,
            shi,
            1e-10,
        )?;
        Ok(self.principal.delegation + v)
    }

    /// First-best utility minus the utility of clamped affine approval
    /// `clamp(a + b r, 0, 1)`. Strictly positive whenever types sit on both
    /// sides of `p_min`.
    pub fn affine_welfare_gap(&self, intercept: f64, slope: f64) -> Result<f64> {
        let q = ApprovalFunction::affine(intercept, slope)?;
        Ok(self.first_best_utility()? - self.principal_utility(&q)?)
    }

    /// Locate jumps and kinks of the induced screening so quadrature can
    /// split there.
    ///
    /// The induced screening of a steep sigmoid jumps where the agent's two
    /// local maxima exchange global optimality; affine approval kinks where
    /// the best response crosses a clamp boundary. Both are found by coarse
    /// scans refined with bisection; the returned list also always carries
    /// `p_min` (the surplus sign change).
    fn screening_breakpoints(&self, q: &ApprovalFunction) -> Result<Vec<f64>> {
        let (slo, shi) = self.dist.support();
        let mut seeds = vec![self.principal.p_min()];
        match q {
            ApprovalFunction::Step { r0 } => {
                if let Ok(t) = self.threshold_type(*r0) {
                    seeds.push(t.p_star);
                }
            }
            ApprovalFunction::Affine { intercept, slope } => {
                if *slope != 0.0 {
                    // Track the raw (unclamped) affine value at the best
                    // response; its crossings of 0 and 1 are the kinks of
                    // the induced screening.
                    let solver = agent::ResponseSolver::new(&self.gen, q, &self.agent);
                    let raw = |p: f64| {
                        let r = solver.solve(p).expect("support validated inside domain");
                        intercept + slope * r
                    };
                    seeds.extend(scan_crossings(&raw, 0.0, slo, shi, 128));
                    seeds.extend(scan_crossings(&raw, 1.0, slo, shi, 128));
                }
            }
            ApprovalFunction::Sigmoid { r_min, tau } => {
                let gb = (self.agent.gamma / self.agent.beta).sqrt();
                seeds.extend([
                    *r_min,
                    r_min - gb,
                    r_min - gb - 20.0 * tau,
                    r_min + 20.0 * tau,
                ]);
                let screening = self.screening_closure(q);
                seeds.extend(scan_jumps(&screening, slo, shi, 256));
            }
            ApprovalFunction::TabulatedGrid { values } => {
                if values.len() <= 65 {
                    let n = values.len() - 1;
                    seeds.extend((1..n).map(|i| i as f64 / n as f64));
                } else {
                    let screening = self.screening_closure(q);
                    seeds.extend(scan_jumps(&screening, slo, shi, 256));
                }
            }
        }
        Ok(seeds)
    }

    /// Sigmoid-restricted estimator of the smooth-oversight welfare gap:
    /// maximize principal utility over `Sigmoid(r_min, tau >= tau_min)` on
    /// the given grids, then pattern-search refine. The reported gap is an
    /// upper bound on the true infimum over all C^1 approval functions.
    pub fn welfare_gap_smooth(
        &self,
        tau_min: f64,
        search: &SigmoidSearchSpec,
    ) -> Result<SmoothGapEstimate> {
        if !(tau_min > 0.0) {
            return Err(Error::Parameter(format!(
                "tau_min must be positive, got {tau_min}"
            )));
        }
        let candidates: Vec<(f64, f64)> = search
            .r_min_grid
            .iter()
            .flat_map(|&r| {
                search
                    .tau_grid
                    .iter()
                    .filter(|&&t| t >= tau_min)
                    .map(move |&t| (r, t))
            })
            .collect();
        if candidates.is_empty() {
            return Err(Error::Parameter(
                "sigmoid search grids are empty after the tau_min cut".into(),
            ));
        }
        let utilities: Vec<Result<f64>> = candidates
            .par_iter()
            .map(|&(r, t)| self.principal_utility(&ApprovalFunction::sigmoid(r, t)?))
            .collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, u) in utilities.iter().enumerate() {
            let u = *u.as_ref().map_err(|e| e.clone())?;
            if u > best.0 {
                best = (u, i);
            }
        }
        let (mut r_min, mut tau) = candidates[best.1];
        let mut best_u = best.0;

        // Pattern search over (r_min, ln tau), shrinking on failure.
        let mut dr = grid_step(&search.r_min_grid) / 2.0;
        let mut dt = 2.0f64.ln() / 2.0;
        for _ in 0..search.refine_rounds {
            let mut improved = false;
            let moves = [
                (r_min + dr, tau),
                (r_min - dr, tau),
                (r_min, tau * dt.exp()),
                (r_min, (tau * (-dt).exp()).max(tau_min)),
            ];
            for (r, t) in moves {
                if !(0.0..=1.0).contains(&r) {
                    continue;
                }
                let u = self.principal_utility(&ApprovalFunction::sigmoid(r, t)?)?;
                if u > best_u {
                    best_u = u;
                    r_min = r;
                    tau = t;
                    improved = true;
                }
            }
            if !improved {
                dr *= 0.5;
                dt *= 0.5;
                if dr < 1e-7 && dt < 1e-7 {
                    break;
                }
            }
        }
        Ok(SmoothGapEstimate {
            gap: self.first_best_utility()? - best_u,
            best: ApprovalFunction::sigmoid(r_min, tau)?,
            best_utility: best_u,
        })
    }

    /// Gap estimates across the power family at fixed `(gamma, beta, F, u)`.
    pub fn power_family_gap_curve(
        &self,
        alphas: &[f64],
        tau_min: f64,
        search: &SigmoidSearchSpec,
    ) -> Result<Vec<(f64, SmoothGapEstimate)>> {
        let (dlo, dhi) = self.gen.domain();
        let mut out = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let gen = Generator::power(alpha)?.with_domain(dlo, dhi)?;
            let game = OversightGame::new(gen, self.principal, self.agent, self.dist)?;
            out.push((alpha, game.welfare_gap_smooth(tau_min, search)?));
        }
        Ok(out)
    }

    /// Welfare recovered by replacing the organic approval with first-best
    /// screening: the avoided harm from approving below-threshold types plus
    /// the recovered surplus from rejected above-threshold types. Regulation
    /// pays iff this exceeds its cost.
    pub fn regulation_gain(
        &self,
        q_organic: &ApprovalFunction,
        c_reg: f64,
    ) -> Result<RegulationDecision> {
        if !(c_reg >= 0.0) {
            return Err(Error::Parameter(format!(
                "regulation cost must be non-negative, got {c_reg}"
            )));
        }
        let (slo, shi) = self.dist.support();
        let pm = self.principal.p_min();
        let seeds = self.screening_breakpoints(q_organic)?;
        let screening = self.screening_closure(q_organic);
        let mut gain = 0.0;
        if pm > slo {
            gain += integrate_with_breakpoints(
                |p| screening(p) * self.principal.surplus(p).abs() * self.dist.density(p),
                slo,
                pm.min(shi),
                &seeds,
                WELFARE_TOL,
            )?;
        }
        if pm < shi {
            gain += integrate_with_breakpoints(
                |p| {
                    (1.0 - screening(p)) * self.principal.surplus(p) * self.dist.density(p)
                },
                pm.max(slo),
                shi,
                &seeds,
                WELFARE_TOL,
            )?;
        }
        Ok(RegulationDecision {
            gain,
            regulate: gain > c_reg,
        })
    }

    /// Comparative statics: `p_min` sensitivity to the delegation payoff,
    /// distribution invariance of the optimal threshold, and the cross-agent
    /// detection sample size.
    pub fn statics_report(&self, delta: f64, alpha: f64) -> Result<StaticsReport> {
        let h = 1e-6;
        let up = PrincipalParams::new(
            self.principal.success,
            self.principal.failure,
            self.principal.delegation + h,
        )?;
        let dn = PrincipalParams::new(
            self.principal.success,
            self.principal.failure,
            self.principal.delegation - h,
        )?;
        let sensitivity = (up.p_min() - dn.p_min()) / (2.0 * h);

        let uniform_game = OversightGame::new(
            self.gen,
            self.principal,
            self.agent,
            TypeDistribution::uniform(self.gen.domain().0, self.gen.domain().1)?,
        )?;
        let beta_game = OversightGame::new(
            self.gen,
            self.principal,
            self.agent,
            TypeDistribution::beta(2.0, 2.0)?,
        );
        let r0_uniform = uniform_game.optimal_step_threshold()?;
        // Beta types span [0, 1]; when the generator domain is narrower the
        // comparison falls back to the uniform game (the threshold formula
        // never reads the distribution either way).
        let r0_beta22 = match beta_game {
            Ok(g) => g.optimal_step_threshold()?,
            Err(_) => r0_uniform,
        };
        Ok(StaticsReport {
            p_min_delegation_sensitivity: sensitivity,
            r0_uniform,
            r0_beta22,
            r0_distribution_invariant: (r0_uniform - r0_beta22).abs() < 1e-12,
            cross_agent_sample: crate::detection::hoeffding_sample_bound(delta, alpha),
        })
    }
}

fn grid_step(grid: &[f64]) -> f64 {
    if grid.len() < 2 {
        return 0.05;
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .max(1e-6)
}

/// Scan `f` on a uniform grid and bisect every bracket where `f - level`
/// changes sign; returns the crossing locations.
fn scan_crossings(
    f: &impl Fn(f64) -> f64,
    level: f64,
    lo: f64,
    hi: f64,
    cells: usize,
) -> Vec<f64> {
    let mut out = Vec::new();
    let h = (hi - lo) / cells as f64;
    let mut prev = f(lo) - level;
    for i in 1..=cells {
        let x = lo + i as f64 * h;
        let cur = f(x) - level;
        if prev == 0.0 {
            out.push(x - h);
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            if let Ok(c) = bisect(|p| f(p) - level, x - h, x) {
                out.push(c);
            }
        }
        prev = cur;
    }
    out
}

/// Scan for large moves of a monotone-ish screening curve and refine each to
/// the point where it crosses the midpoint of the move; catches both genuine
/// jumps (branch exchanges) and steep smooth transitions.
fn scan_jumps(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let h = (hi - lo) / cells as f64;
    let mut prev = f(lo);
    for i in 1..=cells {
        let x = lo + i as f64 * h;
        let cur = f(x);
        if (cur - prev).abs() > 0.03 {
            let mid = 0.5 * (cur + prev);
            if let Ok(c) = bisect(|p| f(p) - mid, x - h, x) {
                out.push(c);
            }
        }
        prev = cur;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> OversightGame {
        OversightGame::new(
            Generator::brier(),
            PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
            AgentParams::new(1.0, 0.04).unwrap(),
            TypeDistribution::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn p_min_examples() {
        assert_eq!(PrincipalParams::new(1.0, -1.0, 0.0).unwrap().p_min(), 0.5);
        let p = PrincipalParams::new(1.0, 0.0, 0.8).unwrap();
        assert!((p.p_min() - 0.8).abs() < 1e-15);
        // Raising the delegation payoff raises p_min.
        let lo = PrincipalParams::new(1.0, -1.0, 0.0).unwrap().p_min();
        let hi = PrincipalParams::new(1.0, -1.0, 0.2).unwrap().p_min();
        assert!(hi > lo);
        assert!(PrincipalParams::new(1.0, 0.5, 0.2).is_err());
    }

    #[test]
    fn surplus_examples() {
        let p = PrincipalParams::new(1.0, -1.0, 0.0).unwrap();
        assert!((p.surplus(0.75) - 0.5).abs() < 1e-15);
        assert!(p.surplus(p.p_min()).abs() < 1e-15);
        assert!((p.surplus(0.25) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn distributions_normalize() {
        for dist in [
            TypeDistribution::uniform(0.0, 1.0).unwrap(),
            TypeDistribution::uniform(0.3, 0.8).unwrap(),
            TypeDistribution::beta(2.0, 2.0).unwrap(),
            TypeDistribution::beta(5.0, 1.5).unwrap(),
        ] {
            let (lo, hi) = dist.support();
            let mass = integrate(|p| dist.density(p), lo, hi, 1e-10).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{dist:?} integrates to {mass}");
        }
        assert!(TypeDistribution::beta(0.5, 2.0).is_err());
    }

    #[test]
    fn induced_screening_examples() {
        let game = canonical();
        let step = ApprovalFunction::step(0.7).unwrap();
        assert_eq!(game.induced_screening(&step, 0.55).unwrap(), 1.0);
        assert_eq!(game.induced_screening(&step, 0.45).unwrap(), 0.0);
        let always = ApprovalFunction::affine(1.0, 0.0).unwrap();
        assert_eq!(game.induced_screening(&always, 0.2).unwrap(), 1.0);
    }

    #[test]
    fn first_best_examples() {
        let game = canonical();
        // Closed form: integral of (2p - 1) over [1/2, 1] is 1/4.
        assert!((game.first_best_utility().unwrap() - 0.25).abs() < 1e-9);

        // Beta(2,2): integral of (2p-1) 6p(1-p) over [1/2, 1] is 3/16.
        let beta_game = OversightGame::new(
            game.gen,
            game.principal,
            game.agent,
            TypeDistribution::beta(2.0, 2.0).unwrap(),
        )
        .unwrap();
        assert!((beta_game.first_best_utility().unwrap() - 0.1875).abs() < 1e-9);

        // As p_min -> 1 the approval region vanishes and utility -> u_d.
        let tight = OversightGame::new(
            game.gen,
            PrincipalParams::new(1.0, 0.0, 0.999).unwrap(),
            game.agent,
            game.dist,
        )
        .unwrap();
        let u = tight.first_best_utility().unwrap();
        assert!((u - 0.999).abs() < 1e-3);
    }

    #[test]
    fn step_utility_achieves_first_best() {
        let game = canonical();
        let q = ApprovalFunction::step(0.7).unwrap();
        let u = game.principal_utility(&q).unwrap();
        assert!((u - 0.25).abs() < 1e-9, "step utility {u}");
    }

    #[test]
    fn utility_of_never_and_affine() {
        let game = canonical();
        let never = ApprovalFunction::affine(0.0, 0.0).unwrap();
        assert!(game.principal_utility(&never).unwrap().abs() < 1e-9);

        // Identity approval: inflation 0.02; closed-form oracle
        // integral of (p + 0.02)(2p - 1) over [0, 0.98]
        //   + integral of (2p - 1) over [0.98, 1] = 0.16646933...
        let identity = ApprovalFunction::affine(0.0, 1.0).unwrap();
        let u = game.principal_utility(&identity).unwrap();
        assert!((u - 0.166_469_333_333).abs() < 1e-6, "affine utility {u}");
    }

    #[test]
    fn optimal_threshold_examples() {
        let game = canonical();
        assert!((game.optimal_step_threshold().unwrap() - 0.7).abs() < 1e-12);

        let degenerate = OversightGame::new(
            game.gen,
            game.principal,
            AgentParams::new(1.0, 0.3).unwrap(),
            game.dist,
        )
        .unwrap();
        assert!(degenerate.is_degenerate_regime());
        assert!(matches!(
            degenerate.optimal_step_threshold(),
            Err(Error::DegenerateRegime(_))
        ));

        // Power alpha = 3 with gamma = 0.076 inverts the Bregman-cost
        // example: the threshold lands at 0.7.
        let p3 = OversightGame::new(
            Generator::power(3.0).unwrap().with_domain(0.05, 0.95).unwrap(),
            game.principal,
            AgentParams::new(1.0, 0.076).unwrap(),
            TypeDistribution::uniform(0.05, 0.95).unwrap(),
        )
        .unwrap();
        assert!((p3.optimal_step_threshold().unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn threshold_type_examples() {
        let game = canonical();
        let t = game.threshold_type(0.7).unwrap();
        assert!(!t.all_inflate);
        assert!((t.p_star - 0.5).abs() < 1e-10);

        // gamma -> 0+: only types at the threshold inflate.
        let tiny = OversightGame::new(
            game.gen,
            game.principal,
            AgentParams::new(1.0, 1e-12).unwrap(),
            game.dist,
        )
        .unwrap();
        let t2 = tiny.threshold_type(0.7).unwrap();
        assert!((t2.p_star - 0.7).abs() < 1e-5);

        let p3 = OversightGame::new(
            Generator::power(3.0).unwrap().with_domain(0.05, 0.95).unwrap(),
            game.principal,
            AgentParams::new(1.0, 0.076).unwrap(),
            TypeDistribution::uniform(0.05, 0.95).unwrap(),
        )
        .unwrap();
        let t3 = p3.threshold_type(0.7).unwrap();
        assert!((t3.p_star - 0.5).abs() < 1e-10, "p_star {}", t3.p_star);

        // Huge gamma: everyone inflates.
        let all = OversightGame::new(
            game.gen,
            game.principal,
            AgentParams::new(1.0, 5.0).unwrap(),
            game.dist,
        )
        .unwrap();
        assert!(all.threshold_type(0.9).unwrap().all_inflate);
    }

    #[test]
    fn affine_gap_examples() {
        let game = canonical();
        // Identity approval: oracle gap 0.25 - 0.16646933 = 0.08353066...
        let gap = game.affine_welfare_gap(0.0, 1.0).unwrap();
        assert!((gap - 0.083_530_666_667).abs() < 1e-6, "gap {gap}");

        // Constant 1/2 approves half of everything: utility 0, gap 1/4.
        let gap_const = game.affine_welfare_gap(0.5, 0.0).unwrap();
        assert!((gap_const - 0.25).abs() < 1e-9);

        // Types entirely above p_min with blanket approval: gap vanishes.
        let high = OversightGame::new(
            game.gen,
            game.principal,
            game.agent,
            TypeDistribution::uniform(0.6, 0.9).unwrap(),
        )
        .unwrap();
        let gap_high = high.affine_welfare_gap(1.0, 0.0).unwrap();
        assert!(gap_high.abs() < 1e-9);
    }

    #[test]
    fn regulation_examples() {
        let game = canonical();
        let blanket = ApprovalFunction::affine(1.0, 0.0).unwrap();
        let d = game.regulation_gain(&blanket, 0.1).unwrap();
        // Oracle: integral of (1 - 2p) over [0, 1/2] = 1/4.
        assert!((d.gain - 0.25).abs() < 1e-9);
        assert!(d.regulate);

        let d2 = game.regulation_gain(&blanket, 0.3).unwrap();
        assert!(!d2.regulate);

        let first_best = ApprovalFunction::step(0.7).unwrap();
        let d3 = game.regulation_gain(&first_best, 0.01).unwrap();
        assert!(d3.gain.abs() < 1e-9);
        assert!(!d3.regulate);
    }

    #[test]
    fn statics_examples() {
        let game = canonical();
        let s = game.statics_report(0.1, 0.05).unwrap();
        assert!((s.p_min_delegation_sensitivity - 0.5).abs() < 1e-6);
        assert!((s.r0_uniform - 0.7).abs() < 1e-12);
        assert!(s.r0_distribution_invariant);
        assert_eq!(s.cross_agent_sample, 738);
    }

    #[test]
    fn no_screening_beats_pointwise_optimum() {
        let game = canonical();
        let star = game.first_best_utility().unwrap();
        let battery = [
            ApprovalFunction::step(0.7).unwrap(),
            ApprovalFunction::step(0.55).unwrap(),
            ApprovalFunction::affine(0.0, 1.0).unwrap(),
            ApprovalFunction::affine(0.3, 0.4).unwrap(),
            ApprovalFunction::sigmoid(0.7, 0.03).unwrap(),
            ApprovalFunction::sigmoid(0.5, 0.2).unwrap(),
            ApprovalFunction::tabulated(vec![0.1, 0.3, 0.2, 0.8, 0.9]).unwrap(),
        ];
        for q in &battery {
            let u = game.principal_utility(q).unwrap();
            assert!(u <= star + 1e-9, "{q:?} exceeded first best: {u} > {star}");
        }
    }

    #[test]
    fn best_step_threshold_matches_closed_form_on_grid() {
        // Fine grid over candidate thresholds: the utility argmax must sit
        // within one grid step of p_min + sqrt(gamma/beta).
        let game = canonical();
        let n = 800;
        let (lo, hi) = (0.55, 0.95);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=n {
            let r0 = lo + (hi - lo) * i as f64 / n as f64;
            let u = game.step_utility(r0).unwrap();
            if u > best.0 {
                best = (u, r0);
            }
        }
        let closed = game.optimal_step_threshold().unwrap();
        assert!(
            (best.1 - closed).abs() <= (hi - lo) / n as f64 + 1e-12,
            "grid argmax {} vs closed form {closed}",
            best.1
        );
    }

    #[test]
    fn smooth_gap_brier_is_tiny() {
        let game = canonical();
        let est = game
            .welfare_gap_smooth(1e-3, &SigmoidSearchSpec::default_for(1e-3))
            .unwrap();
        assert!(est.gap <= 1e-3, "brier smooth gap {}", est.gap);
        assert!(est.gap >= -1e-9);
    }
}
