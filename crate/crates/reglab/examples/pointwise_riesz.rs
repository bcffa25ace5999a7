//! Pointwise Riesz-potential domination: I_beta of the masked maximal
//! field of |grad u|^p against the datum side, sampled at seeded nodes
//! inside and outside the domain.
//!
//! Run: cargo run --release --example pointwise_riesz

use reglab::experiments::{run_pointwise_riesz, CoeffKind, DataKind, InstanceSpec, ObstacleKind};
use reglab::solver::SolverConfig;

fn main() -> Result<(), reglab::Error> {
    let config = SolverConfig { tol: 1e-7, ..Default::default() };
    let instances = [
        InstanceSpec::new("pinched", 2.0, CoeffKind::Const, ObstacleKind::Pinched, DataKind::SourceOne),
        InstanceSpec::new("generic", 2.0, CoeffKind::Mixed, ObstacleKind::LowerBump, DataKind::Mixed(21)),
    ];
    for inst in &instances {
        let report = run_pointwise_riesz(inst, 0.0, 0.5, 1.0, 1.0, 32, &[16, 32], 7, &config)?;
        println!("{}: verdict {}", inst.id, report.verdict.as_str());
        for (key, value) in &report.summary {
            println!("  {key} = {value}");
        }
    }
    Ok(())
}
