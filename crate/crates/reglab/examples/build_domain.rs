//! Build grids and domains, measure boundary flatness, round-trip the
//! mask format.
//!
//! Run: cargo run --release --example build_domain

use reglab::geometry::{
    build_grid, cells_in_ball, make_domain, mask_from_text, mask_to_text, measure_flatness, Ball,
    DomainKind, Vec2,
};

fn main() -> Result<(), reglab::Error> {
    let grid = build_grid(64, 1.0)?;
    println!("grid: {} cells/side, spacing h = {}", grid.cells_per_side(), grid.spacing());

    // flat square domain
    let square = make_domain(grid, DomainKind::Square, 0.0, 0.5, 0)?;
    println!(
        "square domain: {} boundary nodes, flatness {:.4} (rasterization bound {:.4})",
        square.boundary_nodes().len(),
        measure_flatness(&square, 0.5)?,
        2.0 * grid.spacing() / 0.5
    );

    // rough lower boundary: lacunary sawtooth with flatness parameter delta
    for delta in [0.1, 0.3] {
        let rough = make_domain(grid, DomainKind::Reifenberg { seed: 7 }, delta, 0.5, 7)?;
        let measured = measure_flatness(&rough, 0.5)?;
        println!(
            "rough domain delta = {delta}: measured flatness {measured:.4} <= {:.4}",
            delta + 2.0 * grid.spacing() / 0.5
        );
        assert!(measured <= delta + 2.0 * grid.spacing() / 0.5 + 1e-12);
    }

    // ball rasterization: node count tracks the disk area
    let ball = Ball::new(Vec2::new(0.5, 0.5), 0.25);
    let cells = cells_in_ball(&square, &ball, false);
    println!(
        "disk radius 0.25: {} cells, measure {:.5} vs pi r^2 = {:.5}",
        cells.len(),
        cells.measure(&grid),
        std::f64::consts::PI * 0.25 * 0.25
    );

    // mask format round trip
    let rough = make_domain(grid, DomainKind::Reifenberg { seed: 3 }, 0.2, 0.5, 3)?;
    let text = mask_to_text(&rough);
    let back = mask_from_text(&text)?;
    assert_eq!(rough.interior_mask(), back.interior_mask());
    println!("mask format v1 round trip: ok ({} bytes)", text.len());
    Ok(())
}
