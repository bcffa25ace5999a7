//! Fractional maximal operators, Riesz potentials and weighted
//! distribution functions on grid fields.
//!
//! `frac_maximal` carries two paths: a brute-force loop over every
//! (node, radius) pair, and a production path built on per-row prefix
//! sums with exact disk row spans. Both paths enumerate identical cell
//! sets, so they agree to rounding error; the brute path is the
//! correctness anchor.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{Ball, Grid, Vec2};
use crate::weights::Weight;

/// Dyadic radii discretizing `sup_{ρ>0}`: from `2h` up to the first
/// radius at or beyond the grid diagonal.
#[derive(Clone, Debug)]
pub struct RadiusFamily {
    radii: Vec<f64>,
}

impl RadiusFamily {
    pub fn dyadic(grid: &Grid) -> Self {
        let h = grid.spacing();
        let mut radii = Vec::new();
        let mut r = 2.0 * h;
        loop {
            radii.push(r);
            if r >= grid.diagonal() {
                break;
            }
            r *= 2.0;
        }
        RadiusFamily { radii }
    }

    pub fn from_radii(grid: &Grid, radii: Vec<f64>) -> Result<Self> {
        let h = grid.spacing();
        if radii.is_empty() {
            return Err(Error::EmptyInput("radius family is empty".into()));
        }
        if radii[0] < 2.0 * h {
            return Err(Error::ScaleBelowResolution(format!(
                "radius {} below 2h = {}",
                radii[0],
                2.0 * h
            )));
        }
        if !radii.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadParameter("radii must be strictly increasing".into()));
        }
        Ok(RadiusFamily { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaximalMode {
    Brute,
    Fast,
}

/// Largest integer column offset `w ≥ 0` with `(w·h)² + dy² ≤ ρ²`, or
/// `None` when the row misses the disk. Shared by both maximal paths so
/// their cell sets agree exactly; a fixup loop absorbs sqrt rounding.
fn row_halfspan(rho: f64, dy: f64, h: f64) -> Option<i64> {
    let rem = rho * rho - dy * dy;
    if rem < 0.0 {
        return None;
    }
    let mut w = (rem.sqrt() / h).floor() as i64;
    while ((w + 1) as f64 * h).powi(2) + dy * dy <= rho * rho {
        w += 1;
    }
    while w > 0 && (w as f64 * h).powi(2) + dy * dy > rho * rho {
        w -= 1;
    }
    if w >= 0 && (w as f64 * h).powi(2) + dy * dy <= rho * rho {
        Some(w)
    } else {
        None
    }
}

struct RowPrefix {
    owners: usize,
    /// prefix[r][c] = Σ_{c' < c} |f(r, c')| over owner columns
    prefix: Vec<Vec<f64>>,
}

impl RowPrefix {
    fn build(field: &ScalarField) -> Self {
        let grid = field.grid();
        let owners = grid.cells_per_side();
        let mut prefix = Vec::with_capacity(owners);
        for r in 0..owners {
            let mut row = Vec::with_capacity(owners + 1);
            let mut acc = 0.0;
            row.push(0.0);
            for c in 0..owners {
                acc += field.get(grid.index(r, c)).abs();
                row.push(acc);
            }
            prefix.push(row);
        }
        RowPrefix { owners, prefix }
    }

    fn range_sum(&self, r: usize, c_lo: i64, c_hi: i64) -> (f64, usize) {
        let lo = c_lo.max(0) as usize;
        let hi = (c_hi.min(self.owners as i64 - 1)) as usize;
        if c_hi < 0 || lo > hi {
            return (0.0, 0);
        }
        (self.prefix[r][hi + 1] - self.prefix[r][lo], hi - lo + 1)
    }
}

/// Cell count of the full rasterized disk of radius `rho` (position
/// independent): the discrete `|B_ρ|/h²` that normalizes ball averages.
/// Fields are zero outside the grid, so sums run over in-grid cells while
/// the measure counts the whole disk.
pub fn disk_cell_count(rho: f64, h: f64) -> u64 {
    let span_rows = (rho / h).floor() as i64 + 1;
    let mut count = 0u64;
    for dr in -span_rows..=span_rows {
        if let Some(w) = row_halfspan(rho, dr as f64 * h, h) {
            count += (2 * w + 1) as u64;
        }
    }
    count
}

/// `M_α f(y) = max_ρ ρ^α ⨍_{B_ρ(y)} |f|` over the radius family; `f` is
/// extended by zero outside the grid and the average divides by the full
/// disk measure, so large-radius averages decay like `ρ^{α-2}`.
pub fn frac_maximal(
    field: &ScalarField,
    alpha: f64,
    radii: &RadiusFamily,
    mode: MaximalMode,
) -> Result<ScalarField> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::BadParameter(format!("need alpha in [0, 2), got {alpha}")));
    }
    let grid = *field.grid();
    let h = grid.spacing();
    let owners = grid.cells_per_side() as i64;
    let disk_counts: Vec<f64> =
        radii.radii().iter().map(|&rho| disk_cell_count(rho, h) as f64).collect();
    let mut out = vec![0.0f64; grid.node_count()];
    match mode {
        MaximalMode::Brute => {
            for idx in 0..grid.node_count() {
                let (yr, yc) = grid.row_col(idx);
                let mut best = 0.0f64;
                for (k, &rho) in radii.radii().iter().enumerate() {
                    let span_rows = (rho / h).floor() as i64 + 1;
                    let mut sum = 0.0;
                    for dr in -span_rows..=span_rows {
                        let r = yr as i64 + dr;
                        if r < 0 || r >= owners {
                            continue;
                        }
                        let dy = dr as f64 * h;
                        let Some(w) = row_halfspan(rho, dy, h) else { continue };
                        for c in (yc as i64 - w)..=(yc as i64 + w) {
                            if c < 0 || c >= owners {
                                continue;
                            }
                            sum += field.get(grid.index(r as usize, c as usize)).abs();
                        }
                    }
                    best = best.max(rho.powf(alpha) * sum / disk_counts[k]);
                }
                out[idx] = best;
            }
        }
        MaximalMode::Fast => {
            let rows = RowPrefix::build(field);
            for idx in 0..grid.node_count() {
                let (yr, yc) = grid.row_col(idx);
                let mut best = 0.0f64;
                for (k, &rho) in radii.radii().iter().enumerate() {
                    let span_rows = (rho / h).floor() as i64 + 1;
                    let mut sum = 0.0;
                    for dr in -span_rows..=span_rows {
                        let r = yr as i64 + dr;
                        if r < 0 || r >= owners {
                            continue;
                        }
                        let dy = dr as f64 * h;
                        let Some(w) = row_halfspan(rho, dy, h) else { continue };
                        let (s, _) = rows.range_sum(r as usize, yc as i64 - w, yc as i64 + w);
                        sum += s;
                    }
                    best = best.max(rho.powf(alpha) * sum / disk_counts[k]);
                }
                out[idx] = best;
            }
        }
    }
    ScalarField::from_values(grid, out)
}

/// Riesz potential by direct summation: `I_β f(x) = Σ_ξ f(ξ) h² / |x-ξ|^{2-β}`
/// with the self-cell distance mollified at `h/2`.
pub fn riesz_potential(field: &ScalarField, beta: f64) -> Result<ScalarField> {
    let grid = *field.grid();
    let nodes: Vec<usize> = (0..grid.node_count()).collect();
    let vals = riesz_at(field, beta, &nodes)?;
    ScalarField::from_values(grid, vals)
}

/// Riesz potential evaluated at selected node indices only.
pub fn riesz_at(field: &ScalarField, beta: f64, at: &[usize]) -> Result<Vec<f64>> {
    if !(0.0 < beta && beta < 2.0) {
        return Err(Error::BadParameter(format!("need beta in (0, 2), got {beta}")));
    }
    let grid = field.grid();
    let h = grid.spacing();
    let h2 = grid.cell_area();
    let kernel_pow = beta - 2.0;
    // gather nonzero sources in fixed node order
    let sources: Vec<(Vec2, f64)> = grid
        .owner_indices()
        .filter_map(|i| {
            let v = field.get(i);
            (v != 0.0).then(|| (grid.coords(i), v))
        })
        .collect();
    let mut out = Vec::with_capacity(at.len());
    for &idx in at {
        let x = grid.coords(idx);
        // compensated summation keeps the result independent of source
        // ordering to well below 1e-12
        let mut acc = 0.0;
        let mut carry = 0.0;
        for &(xi, v) in &sources {
            let r = x.dist(xi).max(h / 2.0);
            let term = v * h2 * r.powf(kernel_pow) - carry;
            let next = acc + term;
            carry = (next - acc) - term;
            acc = next;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Weighted distribution function `D^ω_f(λ) = ω({|f| > λ} ∩ B)`, a
/// fixed-order weighted cell sum; with no ball the whole grid counts.
pub fn distribution(field: &ScalarField, weight: &Weight, localize: Option<&Ball>, lambda: f64) -> f64 {
    let grid = field.grid();
    let h2 = grid.cell_area();
    let mut acc = 0.0;
    for i in grid.owner_indices() {
        if field.get(i).abs() <= lambda {
            continue;
        }
        if let Some(ball) = localize {
            if !ball.contains(grid.coords(i)) {
                continue;
            }
        }
        acc += weight.get(i) * h2;
    }
    acc
}

/// Both sides of the weak-type bound for `M_α`: the Lebesgue measure of
/// the super-level set of `M_α f` against `(λ^{-s} ∫ |f|^s)^{n/(n-αs)}`
/// with n = 2. The harness bounds their ratio over instance suites.
pub fn weak_type_check(
    field: &ScalarField,
    alpha: f64,
    s: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if s < 1.0 {
        return Err(Error::BadParameter(format!("need s >= 1, got {s}")));
    }
    if alpha * s >= 2.0 {
        return Err(Error::BadParameter(format!(
            "need alpha*s < 2, got {}",
            alpha * s
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::BadParameter(format!("need lambda > 0, got {lambda}")));
    }
    let grid = field.grid();
    let radii = RadiusFamily::dyadic(grid);
    let maximal = frac_maximal(field, alpha, &radii, MaximalMode::Fast)?;
    let h2 = grid.cell_area();
    let mut lhs = 0.0;
    for i in grid.owner_indices() {
        if maximal.get(i) > lambda {
            lhs += h2;
        }
    }
    let mut int_s = 0.0;
    for i in grid.owner_indices() {
        int_s += field.get(i).abs().powf(s) * h2;
    }
    let rhs_base = (int_s / lambda.powf(s)).powf(2.0 / (2.0 - alpha * s));
    Ok((lhs, rhs_base))
}

/// Localization property of the maximal operator: the sup restricted to
/// radii `r ≥ ρ` at a center `ζ` near `ξ₂` is controlled by
/// `3^{2-α} M_α f(ξ₂)`. Returns `(restricted_sup, bound)`; the contract is
/// `restricted_sup ≤ bound · (1 + 5h/ρ)`.
pub fn localization_check(
    field: &ScalarField,
    alpha: f64,
    xi2: Vec2,
    zeta: Vec2,
    rho: f64,
) -> Result<(f64, f64)> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(Error::BadParameter(format!("need alpha in [0, 2), got {alpha}")));
    }
    if zeta.dist(xi2) >= rho {
        return Err(Error::BadParameter(format!(
            "need |zeta - xi2| < rho, got {} >= {rho}",
            zeta.dist(xi2)
        )));
    }
    let grid = field.grid();
    let family = RadiusFamily::dyadic(grid);
    let avg = |center: Vec2, r: f64| -> Option<f64> {
        let h = grid.spacing();
        let owners = grid.cells_per_side() as i64;
        let cr = (center.y / h).round() as i64;
        let cc = (center.x / h).round() as i64;
        let span = (r / h).ceil() as i64 + 1;
        let mut sum = 0.0;
        for rr in (cr - span)..=(cr + span) {
            if rr < 0 || rr >= owners {
                continue;
            }
            for c in (cc - span)..=(cc + span) {
                if c < 0 || c >= owners {
                    continue;
                }
                let p = grid.coords(grid.index(rr as usize, c as usize)) - center;
                if p.dot(p) <= r * r {
                    sum += field.get(grid.index(rr as usize, c as usize)).abs();
                }
            }
        }
        let count = disk_cell_count(r, h);
        (count > 0).then(|| sum / count as f64)
    };
    let mut restricted = 0.0f64;
    for &r in family.radii() {
        if r < rho {
            continue;
        }
        if let Some(a) = avg(zeta, r) {
            restricted = restricted.max(r.powf(alpha) * a);
        }
    }
    // discrete sup at ξ₂ over the family plus the tripled radii it needs
    let mut m = 0.0f64;
    for &r in family.radii() {
        if let Some(a) = avg(xi2, r) {
            m = m.max(r.powf(alpha) * a);
        }
        if r >= rho {
            if let Some(a) = avg(xi2, 3.0 * r) {
                m = m.max((3.0 * r).powf(alpha) * a);
            }
        }
    }
    Ok((restricted, 3.0f64.powf(2.0 - alpha) * m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::geometry::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ScalarField {
        let grid = build_grid(n, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, values).unwrap()
    }

    #[test]
    fn maximal_of_constant_is_constant() {
        let grid = build_grid(32, 1.0).unwrap();
        let f = ScalarField::constant(grid, 2.5);
        let radii = RadiusFamily::dyadic(&grid);
        let m = frac_maximal(&f, 0.0, &radii, MaximalMode::Fast).unwrap();
        // far from the extent boundary every ball average is exactly c
        let q = grid.diagonal() / 4.0;
        for idx in 0..grid.node_count() {
            let p = grid.coords(idx);
            if p.x >= q && p.x <= 1.0 - q && p.y >= q && p.y <= 1.0 - q {
                assert!((m.get(idx) - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximal_single_node_indicator_matches_direct_loop() {
        let grid = build_grid(16, 1.0).unwrap();
        let mut f = ScalarField::zeros(grid);
        f.set(grid.index(7, 9), 1.0);
        let radii = RadiusFamily::dyadic(&grid);
        let alpha = 0.5;
        let m = frac_maximal(&f, alpha, &radii, MaximalMode::Brute).unwrap();
        let h = grid.spacing();
        for idx in 0..grid.node_count() {
            let y = grid.coords(idx);
            let src = grid.coords(grid.index(7, 9));
            let mut expect = 0.0f64;
            for &rho in radii.radii() {
                // indicator mass over the discrete full-disk measure
                let hit = (src - y).dot(src - y) <= rho * rho;
                if hit {
                    expect = expect.max(rho.powf(alpha) / disk_cell_count(rho, h) as f64);
                }
            }
            assert!((m.get(idx) - expect).abs() <= 1e-12, "node {idx}");
        }
    }

    #[test]
    fn fast_equals_brute_on_random_fields() {
        for n in [16usize, 32] {
            for seed in 0..3u64 {
                let f = random_field(n, seed);
                let radii = RadiusFamily::dyadic(f.grid());
                for alpha in [0.0, 0.5, 1.0] {
                    let fast = frac_maximal(&f, alpha, &radii, MaximalMode::Fast).unwrap();
                    let brute = frac_maximal(&f, alpha, &radii, MaximalMode::Brute).unwrap();
                    for i in 0..f.grid().node_count() {
                        assert!(
                            (fast.get(i) - brute.get(i)).abs() <= 1e-12,
                            "n {n} seed {seed} alpha {alpha} node {i}: {} vs {}",
                            fast.get(i),
                            brute.get(i)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn maximal_monotone_and_homogeneous() {
        let f = random_field(16, 5).map(f64::abs);
        let g = f.map(|v| v + 0.3);
        let radii = RadiusFamily::dyadic(f.grid());
        let mf = frac_maximal(&f, 0.5, &radii, MaximalMode::Fast).unwrap();
        let mg = frac_maximal(&g, 0.5, &radii, MaximalMode::Fast).unwrap();
        for i in 0..f.grid().node_count() {
            assert!(mf.get(i) <= mg.get(i) + 1e-12);
        }
        let m2 = frac_maximal(&f.scaled(2.0), 0.5, &radii, MaximalMode::Fast).unwrap();
        for i in 0..f.grid().node_count() {
            assert!((m2.get(i) - 2.0 * mf.get(i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn maximal_dominates_ball_averages() {
        let f = random_field(16, 11).map(f64::abs);
        let grid = *f.grid();
        let radii = RadiusFamily::dyadic(&grid);
        let m = frac_maximal(&f, 0.0, &radii, MaximalMode::Fast).unwrap();
        let h = grid.spacing();
        for idx in [grid.index(8, 8), grid.index(3, 12), grid.index(14, 2)] {
            let y = grid.coords(idx);
            for &rho in radii.radii() {
                let mut sum = 0.0;
                for j in grid.owner_indices() {
                    let p = grid.coords(j) - y;
                    if p.dot(p) <= rho * rho {
                        sum += f.get(j);
                    }
                }
                assert!(m.get(idx) >= sum / disk_cell_count(rho, h) as f64 - 1e-12);
            }
        }
    }

    #[test]
    fn riesz_zero_and_rotation_symmetry() {
        let grid = build_grid(32, 2.0).unwrap();
        let zero = ScalarField::zeros(grid);
        let out = riesz_potential(&zero, 1.0).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));

        // compactly supported radial bump about the grid center, so the
        // asymmetric owner strip at the far edges carries exactly zero
        let c = 1.0;
        let f = ScalarField::sample(grid, |x, y| {
            let r2 = (x - c).powi(2) + (y - c).powi(2);
            (0.16 - r2).max(0.0).powi(2)
        });
        let out = riesz_potential(&f, 0.7).unwrap();
        let nps = grid.nodes_per_side();
        // 90° rotation about the center maps node (r, c) to (c, n-r)
        for r in 0..nps {
            for cc in 0..nps {
                let a = out.get(grid.index(r, cc));
                let b = out.get(grid.index(cc, nps - 1 - r));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn riesz_unit_disk_closed_form() {
        // I_1(χ_{B_1})(center) = 2π in the plane
        let grid = build_grid(128, 2.0).unwrap();
        let f = ScalarField::sample(grid, |x, y| {
            let r2 = (x - 1.0).powi(2) + (y - 1.0).powi(2);
            if r2 <= 1.0 {
                1.0
            } else {
                0.0
            }
        });
        let center = grid.index(64, 64);
        let got = riesz_at(&f, 1.0, &[center]).unwrap()[0];
        let expect = 2.0 * std::f64::consts::PI;
        assert!((got - expect).abs() / expect < 0.03, "got {got} expect {expect}");
    }

    #[test]
    fn distribution_basics() {
        let grid = build_grid(32, 1.0).unwrap();
        let f = ScalarField::sample(grid, |x, _| x);
        let w = Weight::constant(grid, 1.0).unwrap();
        let d = distribution(&f, &w, None, 0.25);
        assert!((d - 0.75).abs() <= 2.0 * grid.spacing(), "got {d}");
        assert_eq!(distribution(&f, &w, None, 2.0), 0.0);
    }

    #[test]
    fn distribution_matches_filter_sum_oracle() {
        let f = random_field(24, 3);
        let grid = *f.grid();
        let w = crate::weights::power_weight(grid, Vec2::new(0.3, 0.6), 1.0).unwrap();
        let lambda = 0.4;
        let got = distribution(&f, &w, None, lambda);
        // independent oracle: explicit filter over row-major owner nodes
        let mut expect = 0.0;
        for r in 0..grid.cells_per_side() {
            for c in 0..grid.cells_per_side() {
                let i = grid.index(r, c);
                if f.get(i).abs() > lambda {
                    expect += w.get(i) * grid.cell_area();
                }
            }
        }
        assert!((got - expect).abs() <= 1e-12);
        // ball-localized variant
        let ball = Ball::new(Vec2::new(0.5, 0.5), 0.3);
        let got = distribution(&f, &w, Some(&ball), lambda);
        let mut expect = 0.0;
        for r in 0..grid.cells_per_side() {
            for c in 0..grid.cells_per_side() {
                let i = grid.index(r, c);
                if f.get(i).abs() > lambda && ball.contains(grid.coords(i)) {
                    expect += w.get(i) * grid.cell_area();
                }
            }
        }
        assert!((got - expect).abs() <= 1e-12);
    }

    #[test]
    fn distribution_monotone_and_subadditive() {
        let f = random_field(16, 21);
        let g = random_field(16, 22);
        let grid = *f.grid();
        let w = Weight::constant(grid, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let d = distribution(&f, &w, None, 0.05 * k as f64);
            assert!(d <= prev + 1e-15);
            prev = d;
        }
        let sum = ScalarField::from_values(
            grid,
            f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        for k in 0..10 {
            let lam = 0.08 * k as f64;
            let lhs = distribution(&sum, &w, None, 2.0 * lam);
            let rhs = distribution(&f, &w, None, lam) + distribution(&g, &w, None, lam);
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn weak_type_zero_field_and_scaling() {
        let grid = build_grid(16, 1.0).unwrap();
        let zero = ScalarField::zeros(grid);
        let (lhs, _) = weak_type_check(&zero, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(lhs, 0.0);

        let f = random_field(16, 9);
        let (l1, r1) = weak_type_check(&f, 0.0, 1.0, 0.3).unwrap();
        let (l2, r2) = weak_type_check(&f.scaled(2.0), 0.0, 1.0, 0.6).unwrap();
        assert!((l1 - l2).abs() <= 1e-12);
        assert!((r1 - r2).abs() <= 1e-9 * r1.max(1.0));
    }

    #[test]
    fn weak_type_bounded_over_sweep() {
        let grid = build_grid(16, 1.0).unwrap();
        let mut f = ScalarField::zeros(grid);
        f.set(grid.index(8, 8), 1.0);
        let mut sup = 0.0f64;
        for k in 1..=12 {
            let lambda = 0.002 * 1.7f64.powi(k);
            let (lhs, rhs) = weak_type_check(&f, 0.0, 1.0, lambda).unwrap();
            if rhs > 0.0 && lhs > 0.0 {
                sup = sup.max(lhs / rhs);
            }
        }
        assert!(sup.is_finite() && sup > 0.0);
        assert!(sup < 100.0, "weak-type constant blew up: {sup}");
    }

    #[test]
    fn localization_same_center_and_zero_field() {
        let grid = build_grid(24, 1.0).unwrap();
        let zero = ScalarField::zeros(grid);
        let p = Vec2::new(0.5, 0.5);
        let (sup, bound) = localization_check(&zero, 0.5, p, p, 0.1).unwrap();
        assert_eq!(sup, 0.0);
        assert_eq!(bound, 0.0);

        let f = random_field(24, 30).map(f64::abs);
        let (sup, bound) = localization_check(&f, 0.5, p, p, 0.1).unwrap();
        assert!(sup <= bound * (1.0 + 5.0 * grid.spacing() / 0.1));
    }

    #[test]
    fn localization_random_offsets() {
        let f = random_field(32, 77).map(f64::abs);
        let grid = *f.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let xi2 = Vec2::new(rng.random_range(0.2..0.8), rng.random_range(0.2..0.8));
            let rho = rng.random_range(0.05..0.2);
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            let dist = rng.random_range(0.0..rho * 0.99);
            let zeta = Vec2::new(xi2.x + dist * ang.cos(), xi2.y + dist * ang.sin());
            let (sup, bound) = localization_check(&f, 0.5, xi2, zeta, rho).unwrap();
            assert!(
                sup <= bound * (1.0 + 5.0 * grid.spacing() / rho) + 1e-12,
                "sup {sup} bound {bound} rho {rho}"
            );
        }
    }

    #[test]
    fn localization_rejects_far_centers() {
        let grid = build_grid(16, 1.0).unwrap();
        let f = ScalarField::constant(grid, 1.0);
        let r = localization_check(&f, 0.0, Vec2::new(0.2, 0.2), Vec2::new(0.6, 0.6), 0.1);
        assert!(r.is_err());
    }
}
