//! Fractional maximal operators (brute and prefix-sum paths), weighted
//! distribution functions, the weak-type bound and the localization
//! property.
//!
//! Run: cargo run --release --example maximal_and_distribution

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reglab::field::ScalarField;
use reglab::geometry::{build_grid, Vec2};
use reglab::operators::{
    distribution, frac_maximal, localization_check, weak_type_check, MaximalMode, RadiusFamily,
};
use reglab::weights::{power_weight, Weight};

fn main() -> Result<(), reglab::Error> {
    let grid = build_grid(32, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let field = ScalarField::from_values(
        grid,
        (0..grid.node_count()).map(|_| rng.random_range(-1.0..1.0f64)).collect(),
    )?;
    let radii = RadiusFamily::dyadic(&grid);

    // the two maximal paths agree to rounding
    let alpha = 0.5;
    let fast = frac_maximal(&field, alpha, &radii, MaximalMode::Fast)?;
    let brute = frac_maximal(&field, alpha, &radii, MaximalMode::Brute)?;
    let worst = (0..grid.node_count())
        .map(|i| (fast.get(i) - brute.get(i)).abs())
        .fold(0.0f64, f64::max)
        .max(0.0);
    println!("M_{alpha}: fast vs brute max deviation {worst:.2e}");

    // weighted distribution function of the maximal field
    let weight = power_weight(grid, Vec2::new(0.5, 0.5), 1.0)?;
    let flat = Weight::constant(grid, 1.0)?;
    for lambda in [0.2, 0.4, 0.8] {
        println!(
            "D_Mf(lambda = {lambda}): unweighted {:.4}, |x| weight {:.4}",
            distribution(&fast, &flat, None, lambda),
            distribution(&fast, &weight, None, lambda)
        );
    }

    // weak-type bound: lhs <= C rhs over a lambda sweep
    let mut sup = 0.0f64;
    for k in 1..=10 {
        let lambda = 0.1 * k as f64;
        let (lhs, rhs) = weak_type_check(&field, alpha, 1.0, lambda)?;
        if rhs > 0.0 {
            sup = sup.max(lhs / rhs);
        }
    }
    println!("weak-type sup over the sweep: {sup:.4}");

    // localization: the sup restricted to radii >= rho near a center is
    // controlled by the tripled maximal value there
    let abs = field.map(f64::abs);
    let xi2 = Vec2::new(0.5, 0.5);
    let zeta = Vec2::new(0.55, 0.47);
    let rho = 0.125;
    let (sup, bound) = localization_check(&abs, alpha, xi2, zeta, rho)?;
    println!(
        "localization: restricted sup {sup:.4} <= bound {bound:.4} (slack {:.4})",
        bound * (1.0 + 5.0 * grid.spacing() / rho) - sup
    );
    Ok(())
}
