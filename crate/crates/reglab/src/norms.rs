//! Weighted Lorentz quasi-norms, Orlicz-Lorentz Luxemburg norms with
//! doubling Young functions, and the scalar fundamental-inequality
//! constant estimator.
//!
//! The Lorentz norm uses the distribution-integral form
//! `[q ∫₀^∞ λ^{s-1} ω({|f|>λ})^{s/q} dλ]^{1/s}` (prefactor `q`, matching
//! the definition this crate works against, even though the change of
//! variables would more conventionally put `s` there). On a finite grid
//! the distribution function is a right-continuous step function of λ
//! whose jumps sit exactly at the distinct field values, so with every
//! distinct value as a knot the λ-integral is evaluated in closed form
//! piece by piece; quantile knots take over past 4096 distinct values.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::weights::Weight;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_EXACT_KNOTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LorentzSecondary {
    Finite(f64),
    Infinity,
}

/// Exponent pair `(q, s)` of `L^{q,s}_ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzParams {
    pub q: f64,
    pub s: LorentzSecondary,
}

impl LorentzParams {
    pub fn new(q: f64, s: f64) -> Result<Self> {
        if !(q > 0.0) || !(s > 0.0) {
            return Err(Error::BadParameter(format!("need q, s > 0, got q={q}, s={s}")));
        }
        Ok(LorentzParams { q, s: LorentzSecondary::Finite(s) })
    }

    pub fn new_weak(q: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::BadParameter(format!("need q > 0, got {q}")));
        }
        Ok(LorentzParams { q, s: LorentzSecondary::Infinity })
    }
}

/// Sorted (value, weight·h²) pairs with the suffix weights needed to read
/// off `ω({|f| ≥ v})` at each distinct value.
struct LevelProfile {
    /// ascending distinct |f| values, zeros excluded
    values: Vec<f64>,
    /// suffix[k] = ω({|f| ≥ values[k]})
    suffix: Vec<f64>,
}

fn level_profile(samples: &mut Vec<(f64, f64)>) -> LevelProfile {
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut values = Vec::new();
    let mut masses = Vec::new();
    for &(v, w) in samples.iter() {
        if v <= 0.0 {
            continue;
        }
        if values.last().map_or(true, |&last| v > last) {
            values.push(v);
            masses.push(w);
        } else {
            *masses.last_mut().unwrap() += w;
        }
    }
    // collapse to quantile knots when the level set count explodes
    if values.len() > MAX_EXACT_KNOTS {
        let stride = values.len() as f64 / MAX_EXACT_KNOTS as f64;
        let mut qvalues = Vec::with_capacity(MAX_EXACT_KNOTS);
        let mut qmasses = Vec::with_capacity(MAX_EXACT_KNOTS);
        let mut next = 0usize;
        for k in 0..MAX_EXACT_KNOTS {
            let end = (((k + 1) as f64 * stride).round() as usize).clamp(next + 1, values.len());
            let mut mass = 0.0;
            for i in next..end {
                mass += masses[i];
            }
            qvalues.push(values[end - 1]);
            qmasses.push(mass);
            next = end;
            if next >= values.len() {
                break;
            }
        }
        values = qvalues;
        masses = qmasses;
    }
    let mut suffix = vec![0.0; values.len()];
    let mut acc = 0.0;
    for k in (0..values.len()).rev() {
        acc += masses[k];
        suffix[k] = acc;
    }
    LevelProfile { values, suffix }
}

fn lorentz_from_profile(profile: &LevelProfile, params: LorentzParams) -> f64 {
    if profile.values.is_empty() {
        return 0.0;
    }
    let q = params.q;
    match params.s {
        LorentzSecondary::Finite(s) => {
            // D is constant on [v_{k-1}, v_k): equal to ω({|f| ≥ v_k})
            let mut acc = 0.0;
            let mut prev = 0.0f64;
            for k in 0..profile.values.len() {
                let v = profile.values[k];
                let d = profile.suffix[k];
                if d > 0.0 {
                    acc += d.powf(s / q) * (v.powf(s) - prev.powf(s));
                }
                prev = v;
            }
            (q / s * acc).powf(1.0 / s)
        }
        LorentzSecondary::Infinity => {
            // sup λ·D(λ)^{1/q} is approached from below at each jump
            let mut best = 0.0f64;
            for k in 0..profile.values.len() {
                best = best.max(profile.values[k] * profile.suffix[k].powf(1.0 / q));
            }
            best
        }
    }
}

/// Weighted Lorentz quasi-norm of a field. `lambda_quadrature` bounds the
/// resolution of the λ-grid; with at most [`MAX_EXACT_KNOTS`] distinct
/// values the evaluation is exact regardless.
pub fn lorentz_norm(
    field: &ScalarField,
    weight: &Weight,
    params: LorentzParams,
    lambda_quadrature: usize,
) -> Result<f64> {
    if lambda_quadrature < 64 {
        return Err(Error::BadParameter(format!(
            "need at least 64 lambda knots, got {lambda_quadrature}"
        )));
    }
    let grid = field.grid();
    let h2 = grid.cell_area();
    let mut samples: Vec<(f64, f64)> = grid
        .owner_indices()
        .map(|i| (field.get(i).abs(), weight.get(i) * h2))
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyInput("field has no owner cells".into()));
    }
    let profile = level_profile(&mut samples);
    Ok(lorentz_from_profile(&profile, params))
}

// ---------------------------------------------------------------------------
// Young functions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum YoungFamily {
    /// Φ(t) = t^p
    Power(f64),
    /// Φ(t) = t^p log(e + t)
    PowerLog(f64),
}

/// A doubling Young function with evaluator, inverse and the doubling
/// exponent p₁ satisfying `Φ(tλ) ≤ C t^{p₁} Φ(λ)` for t ≥ 1.
#[derive(Clone, Copy, Debug)]
pub struct YoungFunction {
    family: YoungFamily,
    delta2_p1: f64,
    delta2_c: f64,
}

impl YoungFunction {
    pub fn new(family: YoungFamily) -> Result<Self> {
        let p = match family {
            YoungFamily::Power(p) | YoungFamily::PowerLog(p) => p,
        };
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::BadParameter(format!("Young exponent needs p >= 1, got {p}")));
        }
        let delta2_p1 = match family {
            YoungFamily::Power(p) => p,
            YoungFamily::PowerLog(p) => p + 1.0,
        };
        let mut probe = YoungFunction { family, delta2_p1, delta2_c: 0.0 };
        // record the doubling constant on a log-spaced sample
        let mut c = 0.0f64;
        for k in -24..=24 {
            let t = 10f64.powf(k as f64 / 4.0);
            c = c.max(probe.eval(2.0 * t) / probe.eval(t));
        }
        probe.delta2_c = c;
        Ok(probe)
    }

    pub fn family(&self) -> YoungFamily {
        self.family
    }
    pub fn delta2_p1(&self) -> f64 {
        self.delta2_p1
    }
    /// Measured doubling constant `sup Φ(2t)/Φ(t)` over the sample grid.
    pub fn delta2_c(&self) -> f64 {
        self.delta2_c
    }

    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match self.family {
            YoungFamily::Power(p) => t.powf(p),
            YoungFamily::PowerLog(p) => t.powf(p) * (std::f64::consts::E + t).ln(),
        }
    }

    /// Inverse on [0, ∞); closed form for powers, monotone bisection for
    /// the power-log family.
    pub fn inverse(&self, y: f64) -> f64 {
        debug_assert!(y >= 0.0);
        match self.family {
            YoungFamily::Power(p) => y.powf(1.0 / p),
            YoungFamily::PowerLog(p) => {
                if y == 0.0 {
                    return 0.0;
                }
                // Φ(t) ≥ t^p, so t* ≤ y^{1/p}; bisect down from there
                let mut hi = y.powf(1.0 / p);
                let mut lo = 0.0;
                if self.eval(hi) < y {
                    // only possible through rounding; widen a touch
                    hi *= 1.0 + 1e-12;
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Luxemburg norm `inf{t > 0 : ‖Φ(|f|/t)‖_{L^{q,s}_ω} ≤ 1}` by bracketed
/// bisection on the monotone map `t ↦ ‖Φ(|f|/t)‖`.
pub fn luxemburg_norm(
    field: &ScalarField,
    weight: &Weight,
    phi: &YoungFunction,
    params: LorentzParams,
) -> Result<f64> {
    let grid = field.grid();
    let h2 = grid.cell_area();
    let mut samples: Vec<(f64, f64)> = grid
        .owner_indices()
        .map(|i| (field.get(i).abs(), weight.get(i) * h2))
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyInput("field has no owner cells".into()));
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let max_abs = samples.last().unwrap().0;
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let norm_at = |t: f64| -> f64 {
        let mut transformed: Vec<(f64, f64)> =
            samples.iter().map(|&(v, w)| (phi.eval(v / t), w)).collect();
        let profile = level_profile(&mut transformed);
        lorentz_from_profile(&profile, params)
    };
    // bracket around t0 = max|f|
    let mut t_hi = max_abs;
    let mut expand = 0;
    while norm_at(t_hi) > 1.0 {
        t_hi *= 2.0;
        expand += 1;
        if expand > 60 {
            return Err(Error::BracketFailure(
                "no upper bracket for the Luxemburg norm after 60 doublings".into(),
            ));
        }
    }
    let mut t_lo = t_hi;
    expand = 0;
    while norm_at(t_lo) <= 1.0 {
        t_lo *= 0.5;
        expand += 1;
        if expand > 120 {
            // norm stays ≤ 1 down to numerical zero: the norm is 0
            return Ok(0.0);
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (t_lo + t_hi);
        if norm_at(mid) <= 1.0 {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok(0.5 * (t_lo + t_hi))
}

/// Empirical constant `C(p, ε)` in the vector inequality
/// `|γ₁-γ₂|^p ≤ ε|γ₁|^p + C (|γ₁|+|γ₂|)^{p-2} |γ₁-γ₂|²`: the maximum of
/// the defect ratio over seeded pairs with magnitude ratio spanning
/// `[1e-6, 1e6]`. Both sides are p-homogeneous, so |γ₁| is pinned to 1.
pub fn estimate_fund_constant(p: f64, epsilon: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::BadParameter(format!("need p > 1, got {p}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadParameter(format!("need epsilon in (0,1), got {epsilon}")));
    }
    if samples < 10_000 {
        return Err(Error::BadParameter(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut drawn = 0usize;
    while drawn < samples {
        let a1 = rng.random_range(0.0..std::f64::consts::TAU);
        let g1 = (a1.cos(), a1.sin());
        let mag = 10f64.powf(rng.random_range(-6.0..6.0));
        let a2 = rng.random_range(0.0..std::f64::consts::TAU);
        let g2 = (mag * a2.cos(), mag * a2.sin());
        let d = (g1.0 - g2.0, g1.1 - g2.1);
        let dn = (d.0 * d.0 + d.1 * d.1).sqrt();
        if dn == 0.0 {
            continue; // degenerate pair excluded by construction
        }
        drawn += 1;
        let numer = (dn.powf(p) - epsilon).max(0.0);
        let denom = (1.0 + mag).powf(p - 2.0) * dn * dn;
        worst = worst.max(numer / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Vec2};
    use crate::weights::{power_weight, Weight};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ScalarField {
        let grid = build_grid(n, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, values).unwrap()
    }

    #[test]
    fn constant_function_unit_norm() {
        let grid = build_grid(32, 1.0).unwrap();
        let f = ScalarField::constant(grid, 1.0);
        let w = Weight::constant(grid, 1.0).unwrap();
        let params = LorentzParams::new(2.0, 2.0).unwrap();
        let norm = lorentz_norm(&f, &w, params, 64).unwrap();
        assert!((norm - 1.0).abs() < 1e-6, "norm {norm}");
    }

    #[test]
    fn linear_ramp_l1_norm() {
        let grid = build_grid(64, 1.0).unwrap();
        let f = ScalarField::sample(grid, |x, _| x);
        let w = Weight::constant(grid, 1.0).unwrap();
        let params = LorentzParams::new(1.0, 1.0).unwrap();
        let norm = lorentz_norm(&f, &w, params, 64).unwrap();
        // exact integral ∫₀¹ (1-λ) dλ = 1/2
        assert!((norm - 0.5).abs() <= 2.0 * grid.spacing(), "norm {norm}");
    }

    #[test]
    fn lorentz_homogeneity() {
        let f = random_field(24, 8);
        let grid = *f.grid();
        let w = power_weight(grid, Vec2::new(0.4, 0.4), 0.5).unwrap();
        for (q, s) in [(2.0, 2.0), (1.5, 3.0), (3.0, 0.7)] {
            let params = LorentzParams::new(q, s).unwrap();
            let n1 = lorentz_norm(&f, &w, params, 64).unwrap();
            let n2 = lorentz_norm(&f.scaled(2.0), &w, params, 64).unwrap();
            assert!((n2 - 2.0 * n1).abs() <= 1e-10 * n1.max(1.0), "{n2} vs {}", 2.0 * n1);
        }
        let weak = LorentzParams::new_weak(2.0).unwrap();
        let n1 = lorentz_norm(&f, &w, weak, 64).unwrap();
        let n2 = lorentz_norm(&f.scaled(2.0), &w, weak, 64).unwrap();
        assert!((n2 - 2.0 * n1).abs() <= 1e-10 * n1.max(1.0));
    }

    #[test]
    fn lorentz_monotone_in_field() {
        let f = random_field(16, 3).map(f64::abs);
        let g = f.map(|v| v + 0.2);
        let grid = *f.grid();
        let w = Weight::constant(grid, 1.0).unwrap();
        let params = LorentzParams::new(2.0, 1.5).unwrap();
        let nf = lorentz_norm(&f, &w, params, 64).unwrap();
        let ng = lorentz_norm(&g, &w, params, 64).unwrap();
        assert!(nf <= ng + 1e-12);
    }

    #[test]
    fn lorentz_qq_matches_weighted_lebesgue() {
        // L^{q,q}_ω coincides with weighted L^q
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let f = random_field(16, 100 + trial);
            let grid = *f.grid();
            let w = if trial % 2 == 0 {
                Weight::constant(grid, 1.0).unwrap()
            } else {
                power_weight(grid, Vec2::new(0.5, 0.5), 1.0).unwrap()
            };
            let q = rng.random_range(0.7..3.5);
            let params = LorentzParams::new(q, q).unwrap();
            let lorentz = lorentz_norm(&f, &w, params, 64).unwrap();
            let mut direct = 0.0;
            for i in grid.owner_indices() {
                direct += f.get(i).abs().powf(q) * w.get(i) * grid.cell_area();
            }
            let direct = direct.powf(1.0 / q);
            assert!(
                (lorentz - direct).abs() <= 0.01 * direct.max(1e-12),
                "trial {trial}: {lorentz} vs {direct}"
            );
        }
    }

    #[test]
    fn lorentz_quasi_triangle_envelope() {
        let grid = build_grid(16, 1.0).unwrap();
        let w = Weight::constant(grid, 1.0).unwrap();
        let params = LorentzParams::new(0.8, 1.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let seed_a = rng.random_range(0..10_000u64);
            let seed_b = rng.random_range(0..10_000u64);
            let f = random_field(16, seed_a);
            let g = random_field(16, seed_b);
            let sum = ScalarField::from_values(
                grid,
                f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
            )
            .unwrap();
            let nf = lorentz_norm(&f, &w, params, 64).unwrap();
            let ng = lorentz_norm(&g, &w, params, 64).unwrap();
            let ns = lorentz_norm(&sum, &w, params, 64).unwrap();
            let cap = 2f64.powf(1.0 / params.q + 1.0) * (nf + ng);
            assert!(ns <= cap, "quasi-triangle envelope violated: {ns} > {cap}");
        }
    }

    #[test]
    fn young_function_inverse_round_trip() {
        for fam in [
            YoungFamily::Power(1.8),
            YoungFamily::Power(3.0),
            YoungFamily::PowerLog(2.0),
            YoungFamily::PowerLog(1.3),
        ] {
            let phi = YoungFunction::new(fam).unwrap();
            for k in -20..=20 {
                let y = 10f64.powf(k as f64 / 4.0);
                let t = phi.inverse(y);
                assert!(
                    (phi.eval(t) - y).abs() <= 1e-10 * y.max(1.0),
                    "{fam:?}: inverse broke at y={y}"
                );
            }
            assert!(phi.delta2_c() >= 1.0 && phi.delta2_c().is_finite());
        }
    }

    #[test]
    fn luxemburg_zero_field() {
        let grid = build_grid(16, 1.0).unwrap();
        let f = ScalarField::zeros(grid);
        let w = Weight::constant(grid, 1.0).unwrap();
        let phi = YoungFunction::new(YoungFamily::Power(2.0)).unwrap();
        let params = LorentzParams::new(2.0, 2.0).unwrap();
        assert_eq!(luxemburg_norm(&f, &w, &phi, params).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_power_identity() {
        // for Φ = t^p: ‖f‖_Φ = (‖|f|^p‖_{q,s})^{1/p}
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let f = random_field(16, 300 + trial);
            let grid = *f.grid();
            let w = power_weight(grid, Vec2::new(0.6, 0.3), 0.8).unwrap();
            let p = rng.random_range(1.2..3.0);
            let q = rng.random_range(0.8..2.5);
            let s = rng.random_range(0.8..2.5);
            let phi = YoungFunction::new(YoungFamily::Power(p)).unwrap();
            let params = LorentzParams::new(q, s).unwrap();
            let lux = luxemburg_norm(&f, &w, &phi, params).unwrap();
            let powered = f.map(|v| v.abs().powf(p));
            let expect = lorentz_norm(&powered, &w, params, 64).unwrap().powf(1.0 / p);
            assert!(
                (lux - expect).abs() <= 1e-6 * expect.max(1e-9),
                "trial {trial}: {lux} vs {expect}"
            );
        }
    }

    #[test]
    fn luxemburg_homogeneity_and_unit_ball() {
        let f = random_field(16, 41);
        let grid = *f.grid();
        let w = Weight::constant(grid, 1.0).unwrap();
        let phi = YoungFunction::new(YoungFamily::PowerLog(2.0)).unwrap();
        let params = LorentzParams::new(1.5, 2.0).unwrap();
        let n1 = luxemburg_norm(&f, &w, &phi, params).unwrap();
        let c = 3.7;
        let n2 = luxemburg_norm(&f.scaled(c), &w, &phi, params).unwrap();
        assert!((n2 - c * n1).abs() <= 1e-8 * (c * n1), "{n2} vs {}", c * n1);
        // at the returned t the transformed norm sits on the unit sphere
        let transformed = f.map(|v| phi.eval(v.abs() / n1));
        let check = lorentz_norm(&transformed, &w, params, 64).unwrap();
        assert!((0.99..=1.01).contains(&check), "unit ball check: {check}");
    }

    #[test]
    fn luxemburg_power_one_is_the_lorentz_norm() {
        // Φ(t) = t makes the Luxemburg norm the Lorentz norm itself, so the
        // Orlicz path and the Lorentz path agree
        let f = random_field(16, 61).map(f64::abs);
        let grid = *f.grid();
        let w = power_weight(grid, Vec2::new(0.5, 0.5), 1.0).unwrap();
        let phi = YoungFunction::new(YoungFamily::Power(1.0)).unwrap();
        for (q, s) in [(2.0, 2.0), (1.3, 1.3)] {
            let params = LorentzParams::new(q, s).unwrap();
            let lux = luxemburg_norm(&f, &w, &phi, params).unwrap();
            let lor = lorentz_norm(&f, &w, params, 64).unwrap();
            assert!((lux - lor).abs() <= 1e-6 * lor.max(1e-12), "{lux} vs {lor}");
        }
    }

    #[test]
    fn fund_constant_p2_below_one() {
        let c = estimate_fund_constant(2.0, 0.3, 20_000, 1).unwrap();
        assert!(c <= 1.0 + 1e-12, "p=2 constant {c}");
    }

    #[test]
    fn fund_constant_seed_stability() {
        let a = estimate_fund_constant(3.0, 0.1, 200_000, 11).unwrap();
        let b = estimate_fund_constant(3.0, 0.1, 200_000, 12).unwrap();
        assert!((a - b).abs() <= 0.05 * a.max(b), "{a} vs {b}");
        // and the estimate certifies the inequality on its own sample by construction
        assert!(a.is_finite() && a > 0.0);
    }
}
