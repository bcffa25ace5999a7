//! Solve double-obstacle instances: the Poisson benchmark, active
//! constraint sets, and the p-Laplacian with continuation. Writes the
//! solution in field format v1.
//!
//! Run: cargo run --release --example solve_obstacle

use reglab::experiments::{CoeffKind, DataKind, InstanceSpec, ObstacleKind};
use reglab::field::field_to_text;
use reglab::solver::{assemble, kkt_residual, solve_double_obstacle, SolverConfig};

fn main() -> Result<(), reglab::Error> {
    let config = SolverConfig::default();

    // unconstrained Poisson: -div grad u = 1, u = 0 on the boundary
    let poisson = InstanceSpec::new(
        "poisson",
        2.0,
        CoeffKind::Const,
        ObstacleKind::Inactive,
        DataKind::SourceOne,
    );
    let problem = assemble(poisson.realize(33)?)?;
    let sol = solve_double_obstacle(&problem, &config)?;
    println!(
        "poisson 33x33: {} iterations, residual {:.2e}, max u = {:.5} (continuum 0.07367)",
        sol.iterations,
        sol.kkt_residual,
        sol.u.values().iter().cloned().fold(0.0f64, f64::max)
    );
    println!("independent optimality check: {:.2e}", kkt_residual(&sol, &problem, &config));

    // upper cap engages: the source pushes the membrane into the obstacle
    let capped = InstanceSpec::new(
        "capped",
        2.0,
        CoeffKind::Const,
        ObstacleKind::UpperCap,
        DataKind::SourceOne,
    );
    let problem = assemble(capped.realize(33)?)?;
    let sol = solve_double_obstacle(&problem, &config)?;
    println!(
        "capped 33x33: {} nodes on the upper obstacle, {} on the lower",
        sol.active_upper.len(),
        sol.active_lower.len()
    );
    assert!(!sol.active_upper.is_empty());

    // degenerate p = 3 with mixed data and a measurable-in-x1 coefficient
    let plap = InstanceSpec::new(
        "plap",
        3.0,
        CoeffKind::StepsX1,
        ObstacleKind::LowerBump,
        DataKind::Swirl,
    );
    let problem = assemble(plap.realize(33)?)?;
    let cfg3 = SolverConfig { tol: 1e-7, ..config };
    let sol = solve_double_obstacle(&problem, &cfg3)?;
    println!(
        "p = 3 solve: {} iterations (with mu-continuation), residual {:.2e}, converged {}",
        sol.iterations, sol.kkt_residual, sol.converged
    );
    // the energy trace is non-increasing
    assert!(sol.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-14));

    let out = std::env::temp_dir().join("reglab_example_u.field");
    std::fs::write(&out, field_to_text(&sol.u))?;
    println!("wrote solution field to {}", out.display());
    Ok(())
}
