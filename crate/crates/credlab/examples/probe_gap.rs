use credlab::oversight::SigmoidSearchSpec;
use credlab::*;
use std::time::Instant;

fn game(gamma: f64) -> OversightGame {
    OversightGame::new(
        Generator::power(2.0).unwrap().with_domain(0.05, 0.95).unwrap(),
        PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
        AgentParams::new(1.0, gamma).unwrap(),
        TypeDistribution::uniform(0.05, 0.95).unwrap(),
    )
    .unwrap()
}

fn main() {
    let alphas = [2.0, 2.25, 2.5, 3.0];
    for tau_min in [1e-3, 1e-4, 1e-5] {
        let t0 = Instant::now();
        let spec = SigmoidSearchSpec::default_for(tau_min);
        let curve = game(0.04)
            .power_family_gap_curve(&alphas, tau_min, &spec)
            .unwrap();
        print!("tau_min={tau_min:.0e}:");
        for (a, est) in &curve {
            print!("  gap({a})={:.3e}", est.gap);
        }
        // gamma doubling at alpha = 3
        let g3 = game(0.08)
            .power_family_gap_curve(&[3.0], tau_min, &spec)
            .unwrap();
        let ratio = g3[0].1.gap / curve[3].1.gap;
        println!("  2g-ratio={ratio:.2}  ({:?})", t0.elapsed());
        for (a, est) in &curve {
            if let ApprovalFunction::Sigmoid { r_min, tau } = est.best {
                println!("    alpha {a}: best r_min={r_min:.6} tau={tau:.2e} u={:.9}", est.best_utility);
            }
        }
    }
}
