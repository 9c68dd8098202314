use credlab::*;
use std::time::Instant;

fn main() {
    let game = OversightGame::new(
        Generator::brier(),
        PrincipalParams::new(1.0, -1.0, 0.0).unwrap(),
        AgentParams::new(1.0, 0.04).unwrap(),
        TypeDistribution::uniform(0.0, 1.0).unwrap(),
    )
    .unwrap();

    let t0 = Instant::now();
    let u = game.first_best_utility().unwrap();
    println!("first_best {u:.9} in {:?}", t0.elapsed());

    let t0 = Instant::now();
    let q = ApprovalFunction::step(0.7).unwrap();
    let u = game.principal_utility(&q).unwrap();
    println!("step utility {u:.9} in {:?}", t0.elapsed());

    for tau in [0.2, 0.05, 0.01, 0.001] {
        let t0 = Instant::now();
        let q = ApprovalFunction::sigmoid(0.7, tau).unwrap();
        let u = game.principal_utility(&q).unwrap();
        println!("sigmoid tau={tau} utility {u:.9} in {:?}", t0.elapsed());
    }

    let t0 = Instant::now();
    let q = ApprovalFunction::affine(0.0, 1.0).unwrap();
    let u = game.principal_utility(&q).unwrap();
    println!("affine utility {u:.9} in {:?}", t0.elapsed());

    let t0 = Instant::now();
    let q = ApprovalFunction::tabulated(vec![0.1, 0.3, 0.2, 0.8, 0.9]).unwrap();
    let u = game.principal_utility(&q).unwrap();
    println!("tabulated utility {u:.9} in {:?}", t0.elapsed());
}
