//! Acceptance battery: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines for passing criteria too.

use credlab::agent::{
    best_response, combined_objective, first_order_prediction, predicted_scoring_loss,
    residual_gamma_threshold,
};
use credlab::detection::{
    competition_detection_prob, competition_mc, hoeffding_sample_bound, simulate_detection,
    DetectionSpec,
};
use credlab::market::{
    at_payments, greedy_allocation, marginal_revenue_fd, marginal_revenue_formula,
    operator_best_response, verify_nt3_signals, MarketInstance, SubmodularCapacity,
};
use credlab::oversight::SigmoidSearchSpec;
use credlab::{
    AgentParams, ApprovalFunction, Generator, OversightGame, PrincipalParams, TypeDistribution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(name: &str, ok: bool, detail: String) {
    eprintln!("{} {} — {}", name, if ok { "PASS" } else { "FAIL" }, detail);
    assert!(ok, "{name} failed: {detail}");
}

fn canonical() -> OversightGame {
    OversightGame::new(
        Generator::brier(),
        PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
        AgentParams::new(1.0, 0.04).unwrap(),
        TypeDistribution::uniform(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

/// A1: Brier first-best exactness. The canonical game's step threshold 0.7
/// earns exactly the first-best 0.25, and a 75-combination grid of
/// non-degenerate (gamma, beta, p_min) settings all close the gap to 1e-6.
#[test]
fn a1_brier_step_first_best() {
    let game = canonical();
    let q = ApprovalFunction::step(game.optimal_step_threshold().unwrap()).unwrap();
    let u = game.principal_utility(&q).unwrap();
    let star = game.first_best_utility().unwrap();
    let mut ok = (u - 0.25).abs() < 1e-6 && (star - 0.25).abs() < 1e-6;
    let mut worst: f64 = (u - star).abs();

    let gammas = [0.01, 0.02, 0.04, 0.08, 0.12];
    let betas = [0.5, 1.0, 1.7, 2.4, 4.0];
    let p_mins = [0.3, 0.5, 0.65];
    let mut tested = 0;
    for &g in &gammas {
        for &b in &betas {
            for &pm in &p_mins {
                let principal = PrincipalParams::new(1.0, -1.0, pm * 2.0 - 1.0).unwrap();
                assert!((principal.p_min() - pm).abs() < 1e-12);
                let game = OversightGame::new(
                    Generator::brier(),
                    principal,
                    AgentParams::new(b, g).unwrap(),
                    TypeDistribution::uniform(0.0, 1.0).unwrap(),
                )
                .unwrap();
                if game.is_degenerate_regime() {
                    continue;
                }
                tested += 1;
                let q =
                    ApprovalFunction::step(game.optimal_step_threshold().unwrap()).unwrap();
                let diff =
                    (game.principal_utility(&q).unwrap() - game.first_best_utility().unwrap())
                        .abs();
                worst = worst.max(diff);
                ok &= diff < 1e-6;
            }
        }
    }
    criterion(
        "A1",
        ok && tested >= 60,
        format!("canonical U = {u:.9}; {tested} grid games, worst |gap| = {worst:.2e}"),
    );
}

/// A2: step first-best for non-quadratic generators. The optimal threshold's
/// marginal type equals p_min to 1e-8 and the utility gap closes to 1e-6 for
/// the power family on [0.05, 0.95].
#[test]
fn a2_general_generator_step_first_best() {
    let mut ok = true;
    let mut detail = String::new();
    for alpha in [1.5, 2.5, 3.0] {
        let game = OversightGame::new(
            Generator::power(alpha).unwrap().with_domain(0.05, 0.95).unwrap(),
            PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
            AgentParams::new(1.0, 0.04).unwrap(),
            TypeDistribution::uniform(0.05, 0.95).unwrap(),
        )
        .unwrap();
        let r0 = game.optimal_step_threshold().unwrap();
        let t = game.threshold_type(r0).unwrap();
        let gap = (game
            .principal_utility(&ApprovalFunction::step(r0).unwrap())
            .unwrap()
            - game.first_best_utility().unwrap())
        .abs();
        ok &= (t.p_star - 0.5).abs() < 1e-8 && gap < 1e-6 && !t.all_inflate;
        detail.push_str(&format!(
            "alpha {alpha}: r0 = {r0:.6}, p* - p_min = {:.1e}, |gap| = {gap:.1e}; ",
            t.p_star - 0.5
        ));
    }
    criterion("A2", ok, detail);
}

/// A3: perturbation-formula order. Under smooth sigmoid oversight the error
/// of the first-order prediction shrinks at empirical order >= 1.8 as gamma
/// halves.
#[test]
fn a3_perturbation_order() {
    let gen = Generator::brier();
    let q = ApprovalFunction::sigmoid(0.5, 0.05).unwrap();
    let mut min_order = f64::INFINITY;
    for p in [0.42, 0.45, 0.55, 0.6] {
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&g| {
                let pr = AgentParams::new(1.0, g).unwrap();
                let r = best_response(&gen, &q, &pr, p).unwrap();
                let f = first_order_prediction(&gen, &q, &pr, p).unwrap();
                (r - f).abs()
            })
            .collect();
        for w in errs.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    criterion(
        "A3",
        min_order >= 1.8,
        format!("minimum empirical order {min_order:.3}"),
    );
}

/// A4: quadratic scoring-loss law. At gamma = 1e-3 the realized regret of
/// the best response stays within 5% of the predicted loss for affine and
/// sigmoid oversight at five interior types.
#[test]
fn a4_scoring_loss_quadratic_law() {
    let gen = Generator::brier();
    let pr = AgentParams::new(1.0, 1e-3).unwrap();
    let qs = [
        ApprovalFunction::affine(0.1, 0.8).unwrap(),
        ApprovalFunction::sigmoid(0.5, 0.05).unwrap(),
    ];
    let mut ok = true;
    let mut worst = 1.0f64;
    for q in &qs {
        for p in [0.3, 0.4, 0.5, 0.6, 0.7] {
            let r = best_response(&gen, q, &pr, p).unwrap();
            let actual = pr.beta * gen.scoring_regret(r, p).unwrap();
            let predicted = predicted_scoring_loss(&gen, q, &pr, p).unwrap();
            let ratio = actual / predicted;
            if (ratio - 1.0).abs() > (worst - 1.0).abs() {
                worst = ratio;
            }
            ok &= (0.95..=1.05).contains(&ratio);
        }
    }
    criterion("A4", ok, format!("worst actual/predicted ratio {worst:.4}"));
}

/// A5: affine suboptimality. Every approval on a 21x21 (intercept, slope)
/// grid leaves a strictly positive welfare gap, and the identity approval's
/// gap matches the closed-form oracle 0.0835307 to 1e-3.
#[test]
fn a5_affine_suboptimality() {
    let game = canonical();
    let mut min_gap = f64::INFINITY;
    for i in 0..21 {
        for j in 0..21 {
            let a = -0.5 + 1.5 * i as f64 / 20.0;
            let b = -1.5 + 3.0 * j as f64 / 20.0;
            let q = ApprovalFunction::affine(a, b).unwrap();
            if q.is_constant() {
                // Fully clamped approvals screen nothing; their gap is
                // first-best minus a constant-approval utility, positive
                // whenever mass sits on both sides of p_min.
            }
            min_gap = min_gap.min(game.affine_welfare_gap(a, b).unwrap());
        }
    }
    // Oracle: integral of (p + 0.02)(2p - 1) over [0, 0.98] plus the
    // saturated tail gives utility 0.16646933; first best is 0.25.
    let canonical_gap = game.affine_welfare_gap(0.0, 1.0).unwrap();
    let oracle = 0.25 - 0.166_469_333_333_333_3;
    let ok = min_gap > 0.0 && (canonical_gap - oracle).abs() < 1e-3;
    criterion(
        "A5",
        ok,
        format!("min grid gap {min_gap:.3e}; identity gap {canonical_gap:.6} vs oracle {oracle:.6}"),
    );
}

/// A6: welfare-gap behavior of the sigmoid-restricted estimator across the
/// power family, exactly as specified: the Brier gap must close under 1e-3,
/// the alpha-curve must increase strictly in |alpha - 2|, and doubling gamma
/// must scale the alpha = 3 gap by a factor in [3, 5].
///
/// The first clause holds. The other two are structurally unattainable for
/// this estimator: the optimizer always drives tau down to tau_min, where
/// the sigmoid approaches the step approval that achieves first-best for
/// every generator, so the measured gap is the step-approximation residue
/// (linear in tau_min, decreasing in the generator curvature and scaling as
/// sqrt(gamma)) rather than the variance-driven smooth-oversight quantity
/// the ordering was derived from. The assertions are kept as specified; the
/// failure is expected and documented rather than masked.
#[test]
fn a6_welfare_gap_power_family() {
    let tau_min = 1e-3;
    let search = SigmoidSearchSpec::default_for(tau_min);
    let base = OversightGame::new(
        Generator::power(2.0).unwrap().with_domain(0.05, 0.95).unwrap(),
        PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
        AgentParams::new(1.0, 0.04).unwrap(),
        TypeDistribution::uniform(0.05, 0.95).unwrap(),
    )
    .unwrap();
    let alphas = [2.0, 2.25, 2.5, 3.0];
    let curve = base.power_family_gap_curve(&alphas, tau_min, &search).unwrap();
    let gaps: Vec<f64> = curve.iter().map(|(_, est)| est.gap).collect();

    let doubled = OversightGame::new(
        base.gen,
        base.principal,
        AgentParams::new(1.0, 0.08).unwrap(),
        base.dist,
    )
    .unwrap();
    let g3x2 = doubled.power_family_gap_curve(&[3.0], tau_min, &search).unwrap()[0]
        .1
        .gap;
    let ratio = g3x2 / gaps[3];

    let brier_ok = gaps[0] <= 1e-3;
    let ordering_ok = gaps[0] < gaps[1] && gaps[1] < gaps[2] && gaps[2] < gaps[3];
    let scaling_ok = (3.0..=5.0).contains(&ratio);
    criterion(
        "A6",
        brier_ok && ordering_ok && scaling_ok,
        format!(
            "gaps {:?} (ordering {}), gamma-doubling ratio {ratio:.2} (target [3, 5]); \
             the tau_min floor of the sigmoid estimator decreases in alpha and scales \
             as sqrt(gamma), so the ordering and scaling clauses cannot hold",
            gaps, ordering_ok
        ),
    );
}

/// A7: market first-order inflation. The canonical two-agent instance
/// inflates the losing bid by exactly gamma kappa / (2 delta_rep); the
/// optimizer error against the first-order formula sits at the convergence
/// floor for every gamma in the halving sweep (revenue is piecewise linear,
/// making the first-order formula exact here, a vacuously satisfied O(gamma^2)
/// remainder); and the closed-form marginal revenue matches the
/// finite-difference oracle to 1e-10 on two-agent instances.
#[test]
fn a7_market_first_order_inflation() {
    let cap = SubmodularCapacity::new(2, vec![0.0, 1.0, 1.0, 1.5]).unwrap();
    let inst = MarketInstance::new(cap.clone(), vec![0.9, 0.4], 1.0, 0.1).unwrap();
    let exec = operator_best_response(&inst).unwrap();
    let inflation = exec[1] - 0.4;
    let mut ok = (inflation - 0.025).abs() < 1e-4;

    let mut max_err = 0.0f64;
    for gamma in [0.1, 0.05, 0.025] {
        let inst = MarketInstance::new(cap.clone(), vec![0.9, 0.4], 1.0, gamma).unwrap();
        let exec = operator_best_response(&inst).unwrap();
        let err = (exec[1]
            - 0.4
            - credlab::market::first_order_inflation(&inst, 1))
        .abs();
        max_err = max_err.max(err);
    }
    let order_ok = max_err <= 1e-12; // exactness: errors at the solver floor
    ok &= order_ok;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_fd = 0.0f64;
    for _ in 0..30 {
        let k = rng.gen_range(0.0..0.9f64);
        let a = rng.gen_range(0.3..1.0f64);
        let b = rng.gen_range(0.3..1.0f64);
        let pair = (a + b - k.min(a).min(b)).min(a + b);
        let cap2 = SubmodularCapacity::new(2, vec![0.0, a, b, pair]).unwrap();
        let b1 = rng.gen_range(0.1..0.9);
        let b2 = loop {
            let c = rng.gen_range(0.1..0.9);
            if (c - b1) as f64 > 1e-3 || (b1 - c) > 1e-3 {
                break c;
            }
        };
        for j in 0..2 {
            let fd = marginal_revenue_fd(&cap2, &[b1, b2], j, 1e-5).unwrap();
            let cf = marginal_revenue_formula(&cap2, &[b1, b2], j);
            worst_fd = worst_fd.max((fd - cf).abs());
        }
    }
    ok &= worst_fd < 1e-10;
    criterion(
        "A7",
        ok,
        format!(
            "inflation {inflation:.6} (target 0.025); optimizer-vs-formula error {max_err:.1e} \
             (exact, O(gamma^2) remainder vacuous); worst 2-agent fd mismatch {worst_fd:.1e}"
        ),
    );
}

/// A8: DSIC sanity. On 50 seeded random instances (n <= 4) the truthful bid
/// maximizes each bidder's utility over a 101-point misreport grid.
#[test]
fn a8_dsic_sanity() {
    let mut pass = 0usize;
    let mut total = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37));
        let n = 2 + (seed % 3) as usize;
        let cap = random_coverage(n, seed);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let mut all_ok = true;
        for i in 0..n {
            let truthful = {
                let x = greedy_allocation(&cap, &values);
                let p = at_payments(&cap, &values);
                values[i] * x[i] - p[i]
            };
            let mut best = f64::MIN;
            let mut best_k = 0usize;
            for k in 0..=100 {
                let mut bids = values.clone();
                bids[i] = k as f64 / 100.0;
                let x = greedy_allocation(&cap, &bids);
                let p = at_payments(&cap, &bids);
                let u = values[i] * x[i] - p[i];
                if u > best {
                    best = u;
                    best_k = k;
                }
            }
            // Utility dominance at the truthful bid, up to float noise;
            // stronger than the one-grid-step allowance.
            let _ = best_k;
            all_ok &= truthful >= best - 1e-9;
        }
        total += 1;
        if all_ok {
            pass += 1;
        }
    }
    criterion("A8", pass == total, format!("{pass}/{total} instances DSIC-clean"));
}

/// A9: Hoeffding detection. At the sample bound the empirical detection rate
/// clears 1 - alpha - 3 SE for all six (delta, alpha) combinations.
#[test]
fn a9_hoeffding_detection() {
    let mut ok = true;
    let mut detail = String::new();
    for &delta in &[0.05, 0.1, 0.2] {
        for &alpha in &[0.01, 0.05] {
            let k = hoeffding_sample_bound(delta, alpha);
            let spec = DetectionSpec::new(delta, alpha, 1.0, 2, 10_000, 1234).unwrap();
            let rate = simulate_detection(0.5, 0.5 + delta, k, &spec).unwrap();
            let se = (rate * (1.0 - rate) / spec.trials as f64).sqrt();
            let threshold = 1.0 - alpha - 3.0 * se;
            ok &= rate >= threshold;
            detail.push_str(&format!("(d={delta},a={alpha}): {rate:.4}>={threshold:.4}; "));
        }
    }
    criterion("A9", ok, detail);
}

/// A10: sealed-bid signal equality. On 20 seeded instances with one inflated
/// coordinate, every non-deviating agent's observation is bit-identical to
/// the counterfactual in which the inflated profile was genuine.
#[test]
fn a10_nt3_signal_equality() {
    let mut pass = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x51ab));
        let n = 2 + (seed % 3) as usize;
        let cap = random_coverage(n, seed + 100);
        let bids: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..0.8)).collect();
        let j = rng.gen_range(0..n);
        let mut inflated = bids.clone();
        inflated[j] += rng.gen_range(0.01..0.15);
        let flags = verify_nt3_signals(&cap, &bids, &inflated).unwrap();
        if flags.iter().all(|&b| b) {
            pass += 1;
        }
    }
    criterion("A10", pass == 20, format!("{pass}/20 instances signal-identical"));
}

/// A11: competition detection. Monte Carlo rates stay within 0.02 of the
/// closed form for six (delta/sigma, n) pairs at 1e5 trials, and the rate
/// rises toward 1 with n.
#[test]
fn a11_competition_detection() {
    let spec = DetectionSpec::new(0.1, 0.05, 1.0, 4, 100_000, 4321).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    let mut last = 0.0;
    for &ratio in &[0.5, 1.0] {
        for &n in &[2usize, 4, 16] {
            let cf = competition_detection_prob(ratio, 1.0, n);
            let mc = competition_mc(ratio, 1.0, n, &spec).unwrap();
            ok &= (mc - cf).abs() <= 0.02;
            detail.push_str(&format!("(r={ratio},n={n}): |{mc:.4}-{cf:.4}|; "));
        }
    }
    for &n in &[2usize, 4, 16, 64] {
        let p = competition_detection_prob(1.0, 1.0, n);
        ok &= p > last;
        last = p;
    }
    ok &= last > 0.999;
    criterion("A11", ok, detail + &format!("rate->1 trend tops at {last:.5}"));
}

/// A12: residual-type threshold. For the zero-gradient quadratic-well
/// approval the best response stays at p0 for gamma = 0.5 gamma_bar (up to
/// the tabulated grid's interpolation cell) and leaves it for
/// gamma = 1.5 gamma_bar.
#[test]
fn a12_residual_threshold() {
    let gen = Generator::brier();
    let n = 4001;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let r = i as f64 / (n - 1) as f64;
            ((r - 0.5) * (r - 0.5)).clamp(0.0, 1.0)
        })
        .collect();
    let q = ApprovalFunction::tabulated(values).unwrap();
    let th = residual_gamma_threshold(&gen, 1.0, 0.5, &q).unwrap();
    let bar = th.effective();
    let cell = 1.0 / (n - 1) as f64;

    let below = best_response(&gen, &q, &AgentParams::new(1.0, 0.5 * bar).unwrap(), 0.5).unwrap();
    let above = best_response(&gen, &q, &AgentParams::new(1.0, 1.5 * bar).unwrap(), 0.5).unwrap();
    let ok = (bar - 1.0).abs() < 1e-6 && (below - 0.5).abs() <= cell && (above - 0.5).abs() > 0.1;
    criterion(
        "A12",
        ok,
        format!(
            "gamma_bar {bar:.6}; below-threshold report {below:.6}, \
             above-threshold report {above:.6}"
        ),
    );
}

/// Consistency of the indifferent type's objective: the marginal type at the
/// optimal step is exactly indifferent between inflating and truth-telling.
#[test]
fn marginal_type_is_indifferent() {
    let game = canonical();
    let r0 = game.optimal_step_threshold().unwrap();
    let q = ApprovalFunction::step(r0).unwrap();
    let pr = game.agent;
    let v_truth = combined_objective(&game.gen, &q, &pr, 0.5, 0.5).unwrap();
    let v_jump = combined_objective(&game.gen, &q, &pr, r0, 0.5).unwrap();
    assert!((v_truth - v_jump).abs() < 1e-12);
}

/// Seeded random weighted-coverage capacity (duplicated from the market
/// module's test helpers; test crates cannot reach `#[cfg(test)]` items).
fn random_coverage(n: usize, seed: u64) -> SubmodularCapacity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let universe = 8;
    let weights: Vec<f64> = (0..universe).map(|_| rng.gen_range(0.05..0.3)).collect();
    let covers: Vec<u32> = (0..n)
        .map(|_| loop {
            let c = rng.gen_range(1u32..(1 << universe));
            if c.count_ones() >= 2 {
                break c;
            }
        })
        .collect();
    let weight_of = |set: u32| -> f64 {
        (0..universe)
            .filter(|u| set & (1 << u) != 0)
            .map(|u| weights[u])
            .sum()
    };
    let scale = 0.999
        / covers
            .iter()
            .map(|&c| weight_of(c))
            .fold(f64::MIN, f64::max);
    let table: Vec<f64> = (0..1u32 << n)
        .map(|mask| {
            let mut covered = 0u32;
            for (i, &c) in covers.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    covered |= c;
                }
            }
            weight_of(covered) * scale
        })
        .collect();
    SubmodularCapacity::new(n, table).unwrap()
}
