//! Riesz potentials by direct summation, checked against the closed
//! form I_1(chi_{B_1})(center) = 2 pi.
//!
//! Run: cargo run --release --example riesz_potential

use reglab::field::ScalarField;
use reglab::geometry::build_grid;
use reglab::operators::{riesz_at, riesz_potential};

fn main() -> Result<(), reglab::Error> {
    // unit disk indicator centered in a [0,2]^2 grid
    let grid = build_grid(128, 2.0)?;
    let disk = ScalarField::sample(grid, |x, y| {
        if (x - 1.0).powi(2) + (y - 1.0).powi(2) <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    let center = grid.index(64, 64);
    let expect = 2.0 * std::f64::consts::PI;
    for beta in [0.5, 1.0, 1.5] {
        let got = riesz_at(&disk, beta, &[center])?[0];
        // closed form for the disk at its center: 2 pi / beta
        let exact = 2.0 * std::f64::consts::PI / beta;
        println!(
            "I_{beta}(chi_B1)(center) = {got:.5}, closed form {exact:.5}, rel err {:.3}%",
            100.0 * (got - exact).abs() / exact
        );
    }
    let got = riesz_at(&disk, 1.0, &[center])?[0];
    assert!((got - expect).abs() / expect < 0.03);

    // full-field potential of a small bump on a coarser grid
    let grid = build_grid(48, 1.0)?;
    let bump = ScalarField::sample(grid, |x, y| {
        let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
        (0.04 - r2).max(0.0) * 25.0
    });
    let pot = riesz_potential(&bump, 1.0)?;
    let center_val = pot.get(grid.index(24, 24));
    let corner_val = pot.get(grid.index(2, 2));
    println!(
        "bump potential: center {center_val:.5} > far corner {corner_val:.5} (decay with distance)"
    );
    assert!(center_val > corner_val);
    Ok(())
}
