//! Weighted Lorentz quasi-norms, Orlicz-Lorentz Luxemburg norms, and the
//! fundamental-inequality constant estimator.
//!
//! Run: cargo run --release --example lorentz_orlicz_norms

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reglab::field::ScalarField;
use reglab::geometry::{build_grid, Vec2};
use reglab::norms::{
    estimate_fund_constant, lorentz_norm, luxemburg_norm, LorentzParams, YoungFamily,
    YoungFunction,
};
use reglab::weights::{power_weight, Weight};

fn main() -> Result<(), reglab::Error> {
    let grid = build_grid(32, 1.0)?;
    let flat = Weight::constant(grid, 1.0)?;
    let weighted = power_weight(grid, Vec2::new(0.5, 0.5), 1.0)?;

    // exact values on simple fields
    let one = ScalarField::constant(grid, 1.0);
    let params22 = LorentzParams::new(2.0, 2.0)?;
    println!("||1||_{{2,2}} = {:.8} (exact 1)", lorentz_norm(&one, &flat, params22, 64)?);
    let ramp = ScalarField::sample(grid, |x, _| x);
    let params11 = LorentzParams::new(1.0, 1.0)?;
    println!("||x||_{{1,1}} = {:.6} (integral 1/2)", lorentz_norm(&ramp, &flat, params11, 64)?);

    // L^{q,q} coincides with weighted L^q
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = ScalarField::from_values(
        grid,
        (0..grid.node_count()).map(|_| rng.random_range(-1.0..1.0f64)).collect(),
    )?;
    let q = 1.7;
    let lorentz = lorentz_norm(&f, &weighted, LorentzParams::new(q, q)?, 64)?;
    let mut direct = 0.0;
    for i in grid.owner_indices() {
        direct += f.get(i).abs().powf(q) * weighted.get(i) * grid.cell_area();
    }
    println!(
        "L^{{q,q}} coincidence at q = {q}: {lorentz:.6} vs direct {:.6}",
        direct.powf(1.0 / q)
    );

    // weak norm (s = infinity)
    let weak = LorentzParams::new_weak(2.0)?;
    println!("||f||_{{2,inf}} = {:.6}", lorentz_norm(&f, &weighted, weak, 64)?);

    // Luxemburg norm and the power identity
    let phi = YoungFunction::new(YoungFamily::Power(2.5))?;
    let params = LorentzParams::new(1.5, 2.0)?;
    let lux = luxemburg_norm(&f, &weighted, &phi, params)?;
    let identity = lorentz_norm(&f.map(|v| v.abs().powf(2.5)), &weighted, params, 64)?.powf(1.0 / 2.5);
    println!("Luxemburg (power 2.5): {lux:.8} vs identity {identity:.8}");

    let philog = YoungFunction::new(YoungFamily::PowerLog(2.0))?;
    println!(
        "power-log family: doubling exponent p1 = {}, measured doubling constant {:.3}",
        philog.delta2_p1(),
        philog.delta2_c()
    );
    println!(
        "Luxemburg (power-log): {:.6}",
        luxemburg_norm(&f, &weighted, &philog, params)?
    );

    // fundamental inequality constant across p
    for p in [1.5, 2.0, 3.0] {
        let c = estimate_fund_constant(p, 0.1, 100_000, 9)?;
        println!("fundamental inequality: p = {p}, eps = 0.1 -> C_emp = {c:.4}");
    }
    Ok(())
}
