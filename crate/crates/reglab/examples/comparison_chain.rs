//! The comparison chain u -> u1 -> u2 -> v -> V: one-obstacle, two
//! Dirichlet problems, and the frozen-coefficient problem, with the
//! feasibility facts, reverse Hölder constants, and the
//! coefficient-freezing ratio against the partial BMO seminorm.
//!
//! Run: cargo run --release --example comparison_chain

use reglab::experiments::{
    run_comparison_chain, ChainBall, CoeffKind, DataKind, InstanceSpec, ObstacleKind,
};
use reglab::solver::SolverConfig;

fn main() -> Result<(), reglab::Error> {
    let config = SolverConfig { tol: 1e-7, ..Default::default() };

    // a coefficient depending on x1 alone freezes exactly
    let x1 = InstanceSpec::new(
        "x1-only",
        2.0,
        CoeffKind::StepsX1,
        ObstacleKind::LowerBump,
        DataKind::SourceOne,
    );
    let res = run_comparison_chain(&x1, ChainBall::Interior, 32, &config)?;
    println!(
        "x1-only coefficient: BMO seminorm = {}, |grad v - grad V| = {:.2e}",
        res.delta_emp, res.grad_vv_diff
    );
    assert_eq!(res.delta_emp, 0.0);

    // a generic instance, interior and boundary ball placements
    let generic = InstanceSpec::new(
        "generic",
        2.0,
        CoeffKind::SinX2,
        ObstacleKind::UpperCap,
        DataKind::SourceOne,
    );
    for placement in [ChainBall::Interior, ChainBall::Boundary] {
        let res = run_comparison_chain(&generic, placement, 32, &config)?;
        println!("--- {placement:?} ball ---");
        for (eps, c) in &res.comparison {
            println!("  comparison constant at eps = {eps}: {c:.4}");
        }
        for (gamma, c) in &res.reverse_hoelder {
            println!("  reverse Hölder constant at gamma = {gamma}: {c:.4}");
        }
        println!(
            "  BMO seminorm {:.5}, freeze ratio {:?}",
            res.delta_emp, res.freeze_ratio
        );
        println!(
            "  facts: max(u1 - psi2) = {:.2e}, max(psi1 - u2) = {:.2e}, feasible = {}",
            res.u1_above_psi2, res.u2_below_psi1, res.feasible
        );
        assert!(res.feasible);
    }
    Ok(())
}
