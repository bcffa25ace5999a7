//! Norm-domination ratios: Lorentz and Orlicz-Lorentz norms of
//! M_alpha(|grad u|^p) against M_alpha(|F|^p), and the alpha = 0
//! gradient corollary, on a small suite.
//!
//! Run: cargo run --release --example norm_domination

use reglab::experiments::{run_norm_ratio, CoeffKind, DataKind, InstanceSpec, ObstacleKind};
use reglab::norms::{LorentzParams, YoungFamily, YoungFunction};
use reglab::solver::SolverConfig;

fn main() -> Result<(), reglab::Error> {
    let suite = vec![
        InstanceSpec::new("pinched", 2.0, CoeffKind::Const, ObstacleKind::Pinched, DataKind::SourceOne),
        InstanceSpec::new("generic", 2.0, CoeffKind::Mixed, ObstacleKind::LowerBump, DataKind::Mixed(3)),
        InstanceSpec::new("plap", 3.0, CoeffKind::SinX2, ObstacleKind::UpperCap, DataKind::SourceOne),
    ];
    let params = LorentzParams::new(1.5, 2.0)?;
    let phi = YoungFunction::new(YoungFamily::PowerLog(2.0))?;
    let config = SolverConfig { tol: 1e-7, ..Default::default() };
    let report = run_norm_ratio(&suite, 1.0, 0.5, params, Some(&phi), &[16, 32], 5, &config, 1)?;
    println!("verdict: {}", report.verdict.as_str());
    for (key, value) in &report.summary {
        println!("  {key} = {value}");
    }
    Ok(())
}
