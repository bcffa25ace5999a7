//! Muckenhoupt weights: A_p products over a dyadic ball family and the
//! A_infinity envelope fit (c0, nu).
//!
//! Run: cargo run --release --example fit_weight

use reglab::geometry::{build_grid, make_domain, DomainKind, Vec2};
use reglab::weights::{dyadic_ball_family, power_weight, Weight};

fn main() -> Result<(), reglab::Error> {
    let grid = build_grid(64, 1.0)?;
    let domain = make_domain(grid, DomainKind::Square, 0.0, 1.0, 0)?;
    let center = Vec2::new(0.5, 0.5);
    let balls = dyadic_ball_family(&grid, &[center]);
    println!("ball family: {} balls, radii from {} up", balls.len(), 4.0 * grid.spacing());

    let flat = Weight::constant(grid, 1.0)?;
    println!("constant weight: [w]_A2 = {:.4}", flat.estimate_a_p(&domain, 2.0, &balls)?);

    for gamma in [1.0, -1.0, -2.0] {
        let mut w = power_weight(grid, center, gamma)?;
        let ap = w.estimate_a_p(&domain, 2.0, &balls)?;
        let (c0, nu) = w.estimate_a_inf(&domain, &balls, 32, 42)?;
        let fresh = w.a_inf_envelope_holds(&domain, &balls, 32, 4242)?;
        println!(
            "|x|^{gamma}: [w]_A2 = {ap:.4}, fitted (c0, nu) = ({c0:.3}, {nu:.3}), \
             fresh-sample envelope holds on {:.1}% of draws",
            100.0 * fresh
        );
    }
    Ok(())
}
