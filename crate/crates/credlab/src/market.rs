//! Polymatroidal marketplace: Edmonds greedy allocation, Archer–Tardos
//! DSIC payments, and the operator's bid-inflation equilibrium under a
//! reputational compliance score.
//!
//! The feasible region is the box polymatroid of a monotone submodular
//! capacity `nu` with unit-bounded marginals. The greedy processes agents in
//! decreasing bid order and hands each its marginal capacity; payments
//! follow the threshold identity `p_i = b_i x_i - integral of x_i(z, b_-i)`,
//! which is computed exactly because the allocation is piecewise constant in
//! the own bid with breakpoints at the other agents' bids. Revenue is then
//! piecewise linear in each coordinate, so the operator's compliance/revenue
//! trade-off is maximized coordinate-wise in closed form.

use crate::error::{Error, Result};
use crate::numerics::golden_max;
use crate::scoring::Generator;

/// Monotone submodular capacity on subsets of `{0, .., n-1}` with
/// `nu(empty) = 0` and marginals bounded by 1, tabulated over all `2^n`
/// subsets (bitmask-indexed).
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularCapacity {
    n: usize,
    table: Vec<f64>,
}

impl SubmodularCapacity {
    /// Validates the table exhaustively; the error message carries the first
    /// violating subset/agent witness.
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if !(2..=12).contains(&n) {
            return Err(Error::Parameter(format!(
                "agent count must lie in [2, 12], got {n}"
            )));
        }
        if table.len() != 1 << n {
            return Err(Error::Parameter(format!(
                "capacity table must have 2^{n} = {} entries, got {}",
                1 << n,
                table.len()
            )));
        }
        let cap = SubmodularCapacity { n, table };
        cap.validate()?;
        Ok(cap)
    }

    /// `nu(S)` for the bitmask `S`.
    pub fn value(&self, mask: u32) -> f64 {
        self.table[mask as usize]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `nu(S + i) - nu(S)`; `i` must not be in `S`.
    pub fn marginal(&self, mask: u32, i: usize) -> f64 {
        debug_assert_eq!(mask & (1 << i), 0);
        self.table[(mask | (1 << i)) as usize] - self.table[mask as usize]
    }

    /// Pairwise non-modularity gap
    /// `kappa_ij = nu({i}) + nu({j}) - nu({i, j}) >= 0`.
    pub fn nonmodularity_gap(&self, i: usize, j: usize) -> f64 {
        assert!(i != j && i < self.n && j < self.n);
        self.value(1 << i) + self.value(1 << j) - self.value((1 << i) | (1 << j))
    }

    fn validate(&self) -> Result<()> {
        if self.table[0] != 0.0 {
            return Err(Error::Capacity(format!(
                "nu(empty) must be 0, got {}",
                self.table[0]
            )));
        }
        if let Some(v) = self.table.iter().find(|v| !v.is_finite()) {
            return Err(Error::Capacity(format!("non-finite capacity value {v}")));
        }
        let full = 1u32 << self.n;
        for mask in 0..full {
            for i in 0..self.n {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let gain = self.marginal(mask, i);
                if gain < 0.0 {
                    return Err(Error::Capacity(format!(
                        "monotonicity fails: nu(S + {i}) < nu(S) for S = {mask:#b}"
                    )));
                }
                if gain > 1.0 {
                    return Err(Error::Capacity(format!(
                        "marginal of agent {i} at S = {mask:#b} is {gain} > 1"
                    )));
                }
                for j in 0..self.n {
                    if j == i || mask & (1 << j) != 0 {
                        continue;
                    }
                    // Local exchange condition, equivalent to submodularity:
                    // the marginal of i shrinks when j joins S.
                    let with_j = self.marginal(mask | (1 << j), i);
                    if with_j > gain + 1e-12 {
                        return Err(Error::Capacity(format!(
                            "submodularity fails for agents {i}, {j} at S = {mask:#b}: \
                             marginal grows from {gain} to {with_j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Load from the JSON document
    /// `{"n": 2, "nu": {"": 0.0, "1": 1.0, "2": 1.0, "1,2": 1.5}}` where
    /// subset keys are comma-separated 1-based agent indices and `""` is the
    /// empty set.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let n = value
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Parameter("capacity JSON needs an integer field `n`".into()))?
            as usize;
        let nu = value
            .get("nu")
            .and_then(|v| v.as_object())
            .ok_or_else(|| Error::Parameter("capacity JSON needs an object field `nu`".into()))?;
        if n > 12 {
            return Err(Error::Parameter(format!("agent count {n} exceeds 12")));
        }
        let mut table = vec![f64::NAN; 1 << n];
        for (key, val) in nu {
            let mut mask = 0u32;
            if !key.is_empty() {
                for part in key.split(',') {
                    let idx: usize = part.trim().parse().map_err(|_| {
                        Error::Parameter(format!("bad subset key `{key}` in capacity JSON"))
                    })?;
                    if idx == 0 || idx > n {
                        return Err(Error::Parameter(format!(
                            "agent index {idx} out of range 1..={n} in key `{key}`"
                        )));
                    }
                    mask |= 1 << (idx - 1);
                }
            }
            let v = val.as_f64().ok_or_else(|| {
                Error::Parameter(format!("non-numeric capacity for subset `{key}`"))
            })?;
            table[mask as usize] = v;
        }
        if let Some(missing) = table.iter().position(|v| v.is_nan()) {
            return Err(Error::Parameter(format!(
                "capacity JSON is missing subset mask {missing:#b}"
            )));
        }
        SubmodularCapacity::new(n, table)
    }
}

/// A marketplace instance: capacity, true bids, and the operator's
/// compliance/revenue weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    pub capacity: SubmodularCapacity,
    pub bids: Vec<f64>,
    pub delta_rep: f64,
    pub gamma: f64,
}

impl MarketInstance {
    pub fn new(
        capacity: SubmodularCapacity,
        bids: Vec<f64>,
        delta_rep: f64,
        gamma: f64,
    ) -> Result<Self> {
        if bids.len() != capacity.n() {
            return Err(Error::Parameter(format!(
                "expected {} bids, got {}",
                capacity.n(),
                bids.len()
            )));
        }
        if bids.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::Parameter("bids must be finite and non-negative".into()));
        }
        if !(delta_rep > 0.0) {
            return Err(Error::Parameter(format!(
                "reputational weight must be positive, got {delta_rep}"
            )));
        }
        if !(gamma >= 0.0) {
            return Err(Error::Parameter(format!(
                "revenue weight must be non-negative, got {gamma}"
            )));
        }
        Ok(MarketInstance {
            capacity,
            bids,
            delta_rep,
            gamma,
        })
    }

    /// Full instance from JSON, extending the capacity document with
    /// `"bids"`, `"delta_rep"`, and `"gamma"` fields.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parameter(format!("market JSON does not parse: {e}")))?;
        let capacity = SubmodularCapacity::from_json(&value)?;
        let bids = value
            .get("bids")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Parameter("market JSON needs an array field `bids`".into()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Parameter("non-numeric bid".into()))
            })
            .collect::<Result<Vec<f64>>>()?;
        let delta_rep = value
            .get("delta_rep")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| Error::Parameter("market JSON needs a number `delta_rep`".into()))?;
        let gamma = value
            .get("gamma")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| Error::Parameter("market JSON needs a number `gamma`".into()))?;
        MarketInstance::new(capacity, bids, delta_rep, gamma)
    }
}

/// What a sealed-bid participant sees: its own bid, allocation, and payment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentObservation {
    pub own_bid: f64,
    pub own_allocation: f64,
    pub own_payment: f64,
}

/// Greedy processing order: decreasing bid, ties by ascending agent index.
fn greedy_order(bids: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| {
        bids[b]
            .partial_cmp(&bids[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

/// Edmonds greedy allocation: in decreasing bid order each agent receives
/// its marginal capacity given the agents already processed. The result is a
/// vertex of the polymatroid maximizing total bid-weighted allocation.
pub fn greedy_allocation(cap: &SubmodularCapacity, effective_bids: &[f64]) -> Vec<f64> {
    assert_eq!(effective_bids.len(), cap.n());
    let mut x = vec![0.0; cap.n()];
    let mut processed = 0u32;
    for &i in &greedy_order(effective_bids) {
        x[i] = cap.marginal(processed, i);
        processed |= 1 << i;
    }
    x
}

/// Allocation of agent `i` when its bid is `z` and the others bid
/// `bids[-i]`: the marginal of `i` given everyone ahead of it.
fn allocation_at(cap: &SubmodularCapacity, bids: &[f64], i: usize, z: f64) -> f64 {
    let mut ahead = 0u32;
    for (j, &bj) in bids.iter().enumerate() {
        if j != i && (bj > z || (bj == z && j < i)) {
            ahead |= 1 << j;
        }
    }
    cap.marginal(ahead, i)
}

/// Archer–Tardos threshold payments
/// `p_i = b_i x_i - integral over [0, b_i] of x_i(z, b_-i) dz`, computed
/// exactly: the allocation is piecewise constant in the own bid with
/// breakpoints at the other agents' bids, so the integral is a finite sum.
pub fn at_payments(cap: &SubmodularCapacity, effective_bids: &[f64]) -> Vec<f64> {
    assert_eq!(effective_bids.len(), cap.n());
    let x = greedy_allocation(cap, effective_bids);
    let mut payments = vec![0.0; cap.n()];
    for i in 0..cap.n() {
        let bi = effective_bids[i];
        let mut cuts: Vec<f64> = effective_bids
            .iter()
            .enumerate()
            .filter(|&(j, &bj)| j != i && bj > 0.0 && bj < bi)
            .map(|(_, &bj)| bj)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut integral = 0.0;
        let mut lo = 0.0;
        for hi in cuts.into_iter().chain(std::iter::once(bi)) {
            if hi > lo {
                integral += (hi - lo) * allocation_at(cap, effective_bids, i, 0.5 * (lo + hi));
            }
            lo = hi;
        }
        payments[i] = bi * x[i] - integral;
    }
    payments
}

/// Total DSIC revenue: the sum of the threshold payments.
pub fn revenue(cap: &SubmodularCapacity, effective_bids: &[f64]) -> f64 {
    at_payments(cap, effective_bids).iter().sum()
}

/// Closed-form marginal revenue from inflating bid `j`:
/// the sum of `kappa_ij` over agents bidding above `j`.
///
/// Exact at `n = 2`; for `n >= 3` with higher-order submodular interactions
/// the derivative involves marginals conditioned on the full ahead-set, so
/// compare against [`marginal_revenue_fd`] rather than assuming equality.
pub fn marginal_revenue_formula(cap: &SubmodularCapacity, bids: &[f64], j: usize) -> f64 {
    assert!(j < cap.n());
    bids.iter()
        .enumerate()
        .filter(|&(i, &bi)| i != j && bi > bids[j])
        .map(|(i, _)| cap.nonmodularity_gap(i, j))
        .sum()
}

/// Finite-difference oracle for the marginal revenue. Fails with
/// [`Error::OrderingChanged`] when the step crosses another agent's bid, in
/// which case the caller must shrink `delta`.
pub fn marginal_revenue_fd(
    cap: &SubmodularCapacity,
    bids: &[f64],
    j: usize,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!(
            "finite-difference step must be positive, got {delta}"
        )));
    }
    let mut bumped = bids.to_vec();
    bumped[j] += delta;
    if greedy_order(bids) != greedy_order(&bumped) {
        return Err(Error::OrderingChanged(format!(
            "bumping bid {j} by {delta} reorders the greedy; shrink the step"
        )));
    }
    Ok((revenue(cap, &bumped) - revenue(cap, bids)) / delta)
}

/// The operator's compliance score: how the deviation of effective from true
/// bids is penalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplianceScore {
    /// `-delta_rep * sum (bhat_i - b_i)^2`.
    Quadratic,
    /// `-delta_rep * sum Bregman_G(b_i; bhat_i)` with a power-family
    /// generator: a strictly proper per-coordinate score pinning truthful
    /// execution.
    PowerBregman { alpha: f64 },
}

fn compliance_penalty(score: ComplianceScore, truth: f64, executed: f64) -> f64 {
    match score {
        ComplianceScore::Quadratic => (executed - truth) * (executed - truth),
        ComplianceScore::PowerBregman { alpha } => {
            let g = |p: f64| p.powf(alpha);
            let g1 = |p: f64| alpha * p.powf(alpha - 1.0);
            g(truth) - g(executed) - g1(executed) * (truth - executed)
        }
    }
}

/// Operator objective `V = -delta_rep * penalty + gamma * R`.
pub fn operator_objective(
    inst: &MarketInstance,
    score: ComplianceScore,
    effective_bids: &[f64],
) -> f64 {
    let penalty: f64 = inst
        .bids
        .iter()
        .zip(effective_bids)
        .map(|(&b, &bh)| compliance_penalty(score, b, bh))
        .sum();
    -inst.delta_rep * penalty + inst.gamma * revenue(&inst.capacity, effective_bids)
}

/// The operator's local equilibrium under the quadratic compliance score:
/// cyclic coordinate ascent from the true bids, each coordinate solved
/// exactly on the intervals between the other agents' bids (revenue is
/// piecewise linear there, so each piece is a closed-form quadratic).
pub fn operator_best_response(inst: &MarketInstance) -> Result<Vec<f64>> {
    operator_best_response_scored(inst, ComplianceScore::Quadratic)
}

/// [`operator_best_response`] generalized over the compliance score.
/// Non-quadratic scores use golden-section maximization per interval.
pub fn operator_best_response_scored(
    inst: &MarketInstance,
    score: ComplianceScore,
) -> Result<Vec<f64>> {
    let n = inst.capacity.n();
    let ub = inst.bids.iter().cloned().fold(1.0f64, f64::max);
    let mut exec = inst.bids.clone();
    for _ in 0..100 {
        let mut max_move = 0.0f64;
        for j in 0..n {
            let truth = inst.bids[j];
            let mut edges: Vec<f64> = exec
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &b)| b)
                .filter(|&b| b > 0.0 && b < ub)
                .collect();
            edges.push(0.0);
            edges.push(ub);
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup();

            let value = |t: f64| {
                let mut cand = exec.clone();
                cand[j] = t;
                -inst.delta_rep * compliance_penalty(score, truth, t)
                    + inst.gamma * revenue(&inst.capacity, &cand)
            };

            let mut best_t = exec[j];
            let mut best_v = value(best_t);
            for w in edges.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi - lo < 1e-15 {
                    continue;
                }
                let candidate = match score {
                    ComplianceScore::Quadratic => {
                        // Revenue is linear on (lo, hi): recover the slope
                        // from two interior probes, maximize the quadratic
                        // in closed form, clamp into the interval.
                        let t1 = lo + (hi - lo) / 3.0;
                        let t2 = lo + 2.0 * (hi - lo) / 3.0;
                        let r1 = {
                            let mut c = exec.clone();
                            c[j] = t1;
                            revenue(&inst.capacity, &c)
                        };
                        let r2 = {
                            let mut c = exec.clone();
                            c[j] = t2;
                            revenue(&inst.capacity, &c)
                        };
                        let slope = (r2 - r1) / (t2 - t1);
                        (truth + inst.gamma * slope / (2.0 * inst.delta_rep)).clamp(lo, hi)
                    }
                    ComplianceScore::PowerBregman { .. } => golden_max(&value, lo, hi, 1e-12).0,
                };
                for t in [candidate, lo, hi] {
                    let v = value(t);
                    if v > best_v {
                        best_v = v;
                        best_t = t;
                    }
                }
            }
            max_move = max_move.max((best_t - exec[j]).abs());
            exec[j] = best_t;
        }
        if max_move <= 1e-12 {
            return Ok(exec);
        }
    }
    Err(Error::Convergence(
        "coordinate ascent did not settle within 100 sweeps".into(),
    ))
}

/// First-order prediction of the operator's inflation on coordinate `j`:
/// `gamma / (2 delta_rep) * marginal_revenue_formula(j)`.
pub fn first_order_inflation(inst: &MarketInstance, j: usize) -> f64 {
    inst.gamma / (2.0 * inst.delta_rep)
        * marginal_revenue_formula(&inst.capacity, &inst.bids, j)
}

/// Sealed-bid observation of agent `i` when `executed` is what the
/// mechanism actually ran on and `own_bid` is what the agent submitted.
pub fn observation(
    cap: &SubmodularCapacity,
    i: usize,
    own_bid: f64,
    executed: &[f64],
) -> AgentObservation {
    let x = greedy_allocation(cap, executed);
    let p = at_payments(cap, executed);
    AgentObservation {
        own_bid,
        own_allocation: x[i],
        own_payment: p[i],
    }
}

/// Sealed-bid undetectability check for a single-coordinate inflation.
///
/// For each non-deviating agent, compares its observation when the operator
/// executes `inflated_bids` against a counterfactual world where
/// `inflated_bids` are everyone's true bids faithfully executed. Exact
/// field-by-field equality; entry `j` (the inflated coordinate) is trivially
/// true.
pub fn verify_nt3_signals(
    cap: &SubmodularCapacity,
    true_bids: &[f64],
    inflated_bids: &[f64],
) -> Result<Vec<bool>> {
    if true_bids.len() != cap.n() || inflated_bids.len() != cap.n() {
        return Err(Error::Parameter("bid vectors must match the capacity size".into()));
    }
    let diffs: Vec<usize> = (0..cap.n())
        .filter(|&i| true_bids[i] != inflated_bids[i])
        .collect();
    if diffs.len() > 1 {
        return Err(Error::Precondition(format!(
            "profiles differ in {} coordinates; exactly one inflation is required",
            diffs.len()
        )));
    }
    let mut equal = vec![true; cap.n()];
    for i in 0..cap.n() {
        if diffs.first() == Some(&i) {
            continue;
        }
        // Scenario A: operator runs the inflated profile over true bids.
        let seen_a = observation(cap, i, true_bids[i], inflated_bids);
        // Scenario B: the inflated profile is genuine and faithfully run.
        let seen_b = observation(cap, i, inflated_bids[i], inflated_bids);
        equal[i] = seen_a.own_bid == seen_b.own_bid
            && seen_a.own_allocation == seen_b.own_allocation
            && seen_a.own_payment == seen_b.own_payment;
    }
    Ok(equal)
}

/// Welfare accounting for a deviation from truthful execution.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationWelfare {
    /// Change in `b_i x_i - p_i` per agent, valued at true bids.
    pub agent_surplus_change: Vec<f64>,
    /// Operator objective change `V(inflated) - V(true)`.
    pub operator_gain: f64,
    /// Leading-order prediction `gamma^2 ||grad R||^2 / (4 delta_rep)`.
    pub gradient_norm_prediction: f64,
    /// Whether the greedy processing order changed (allocative efficiency
    /// is lost when it does).
    pub ordering_changed: bool,
}

/// Per-agent surplus changes, the operator's net gain, its leading-order
/// prediction, and the efficiency flag for a single deviation.
pub fn deviation_welfare(
    cap: &SubmodularCapacity,
    true_bids: &[f64],
    inflated_bids: &[f64],
    delta_rep: f64,
    gamma: f64,
) -> DeviationWelfare {
    let x_true = greedy_allocation(cap, true_bids);
    let p_true = at_payments(cap, true_bids);
    let x_infl = greedy_allocation(cap, inflated_bids);
    let p_infl = at_payments(cap, inflated_bids);
    let surplus_change: Vec<f64> = (0..cap.n())
        .map(|i| {
            let before = true_bids[i] * x_true[i] - p_true[i];
            let after = true_bids[i] * x_infl[i] - p_infl[i];
            after - before
        })
        .collect();
    let penalty: f64 = true_bids
        .iter()
        .zip(inflated_bids)
        .map(|(&b, &bh)| (bh - b) * (bh - b))
        .sum();
    let operator_gain = -delta_rep * penalty
        + gamma * (revenue(cap, inflated_bids) - revenue(cap, true_bids));
    let grad_sq: f64 = (0..cap.n())
        .map(|j| marginal_revenue_formula(cap, true_bids, j).powi(2))
        .sum();
    DeviationWelfare {
        agent_surplus_change: surplus_change,
        operator_gain,
        gradient_norm_prediction: gamma * gamma * grad_sq / (4.0 * delta_rep),
        ordering_changed: greedy_order(true_bids) != greedy_order(inflated_bids),
    }
}
