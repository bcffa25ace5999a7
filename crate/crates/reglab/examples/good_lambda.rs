//! The good-lambda level-set experiment: empirical constants of the
//! weighted distribution inequality for M_alpha(|grad u|^p) against the
//! composite datum, across a refinement step.
//!
//! Run: cargo run --release --example good_lambda

use reglab::experiments::{run_good_lambda, CoeffKind, DataKind, InstanceSpec, ObstacleKind};
use reglab::solver::SolverConfig;

fn main() -> Result<(), reglab::Error> {
    let inst = InstanceSpec::new(
        "demo",
        2.0,
        CoeffKind::Mixed,
        ObstacleKind::LowerBump,
        DataKind::SourceOne,
    );
    let config = SolverConfig { tol: 1e-7, ..Default::default() };
    let report = run_good_lambda(&inst, 1.0, 0.5, &[16, 32], 11, &config)?;
    println!("verdict: {}", report.verdict.as_str());
    for (key, value) in &report.summary {
        println!("  {key} = {value}");
    }
    let dir = std::env::temp_dir().join("reglab_goodlambda_demo");
    let path = report.write_to(&dir)?;
    println!("CSV written to {}", path.display());
    Ok(())
}
