//! Uniform 2-D grids, domains with flat or rough lower boundaries, and
//! ball/cell-set utilities for localized integrals.
//!
//! Conventions. Nodes sit at cell corners, row-major, `(row, col)` with
//! coordinates `(col·h, row·h)`. A node with `row < cells_per_side` and
//! `col < cells_per_side` "owns" the half-open cell `[x, x+h)×[y, y+h)`;
//! every integral in the crate is a sum of nodal values times `h²` over
//! owner nodes, so the full extent has measure exactly `extent²`.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Plane point / vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
    pub fn dist(self, o: Vec2) -> f64 {
        Vec2::new(self.x - o.x, self.y - o.y).norm()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Uniform grid on `[0, extent]²` with `cells_per_side ≥ 4` cells per side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    cells: usize,
    extent: f64,
    spacing: f64,
}

impl Grid {
    pub fn cells_per_side(&self) -> usize {
        self.cells
    }
    pub fn extent(&self) -> f64 {
        self.extent
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    /// Nodes per side (`cells_per_side + 1`).
    pub fn nodes_per_side(&self) -> usize {
        self.cells + 1
    }
    pub fn node_count(&self) -> usize {
        self.nodes_per_side() * self.nodes_per_side()
    }
    pub fn diagonal(&self) -> f64 {
        self.extent * std::f64::consts::SQRT_2
    }
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nodes_per_side() + col
    }
    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        (idx / self.nodes_per_side(), idx % self.nodes_per_side())
    }
    pub fn coords(&self, idx: usize) -> Vec2 {
        let (r, c) = self.row_col(idx);
        Vec2::new(c as f64 * self.spacing, r as f64 * self.spacing)
    }
    /// Owner nodes carry the quadrature cell `[x, x+h)×[y, y+h)`.
    pub fn is_owner(&self, idx: usize) -> bool {
        let (r, c) = self.row_col(idx);
        r < self.cells && c < self.cells
    }
    pub fn owner_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&i| self.is_owner(i))
    }
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }
}

/// Builds a uniform grid; rejects fewer than 4 cells per side (too coarse
/// for any gradient stencil).
pub fn build_grid(cells_per_side: usize, extent: f64) -> Result<Grid> {
    if cells_per_side < 4 {
        return Err(Error::GridTooCoarse(cells_per_side));
    }
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::BadParameter(format!("extent must be positive, got {extent}")));
    }
    Ok(Grid {
        cells: cells_per_side,
        extent,
        spacing: extent / cells_per_side as f64,
    })
}

/// Open ball `B_ρ(ξ)`.
#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub center: Vec2,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec2, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius }
    }
    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        d.dot(d) <= self.radius * self.radius
    }
}

/// A set of owner-node indices in ascending order; all integral reductions
/// iterate it front to back, so sums are bit-deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellSet {
    indices: Vec<usize>,
}

impl CellSet {
    pub fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        CellSet { indices }
    }
    pub fn len(&self) -> usize {
        self.indices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }
    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }
    /// Lebesgue measure of the set: `count · h²`.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.len() as f64 * grid.cell_area()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    Square,
    Reifenberg { seed: u64 },
    /// Loaded from a mask file; no generator metadata.
    Masked,
}

/// A rasterized domain: interior mask, inferred boundary collar, and the
/// lower boundary chain on which flatness is measured.
#[derive(Clone, Debug)]
pub struct Domain {
    grid: Grid,
    interior: Vec<bool>,
    boundary: Vec<usize>,
    /// One node per column: the non-interior node directly under the
    /// lowest interior node. This is the "graph" part of the boundary,
    /// the one the rough-boundary generator perturbs.
    edge_chain: Vec<usize>,
    r0: f64,
    delta: f64,
    kind: DomainKind,
}

impl Domain {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn kind(&self) -> DomainKind {
        self.kind
    }
    pub fn is_interior(&self, idx: usize) -> bool {
        self.interior[idx]
    }
    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }
    pub fn edge_chain(&self) -> &[usize] {
        &self.edge_chain
    }

    /// All interior owner nodes, ascending.
    pub fn interior_cells(&self) -> CellSet {
        CellSet::from_sorted(
            (0..self.grid.node_count())
                .filter(|&i| self.interior[i] && self.grid.is_owner(i))
                .collect(),
        )
    }

    fn from_interior(grid: Grid, interior: Vec<bool>, r0: f64, delta: f64, kind: DomainKind) -> Self {
        let nps = grid.nodes_per_side();
        let neighbors = |idx: usize| -> [Option<usize>; 4] {
            let (r, c) = grid.row_col(idx);
            [
                (r > 0).then(|| grid.index(r - 1, c)),
                (r + 1 < nps).then(|| grid.index(r + 1, c)),
                (c > 0).then(|| grid.index(r, c - 1)),
                (c + 1 < nps).then(|| grid.index(r, c + 1)),
            ]
        };
        let mut boundary = Vec::new();
        for idx in 0..grid.node_count() {
            if interior[idx] {
                continue;
            }
            let adj = neighbors(idx).iter().flatten().any(|&n| interior[n]);
            if adj {
                boundary.push(idx);
            }
        }
        let mut edge_chain = Vec::new();
        for c in 0..nps {
            let first_interior = (0..nps).find(|&r| interior[grid.index(r, c)]);
            if let Some(r) = first_interior {
                if r > 0 {
                    edge_chain.push(grid.index(r - 1, c));
                }
            }
        }
        Domain { grid, interior, boundary, edge_chain, r0, delta, kind }
    }

    /// Rebuilds a domain from a raw interior mask (used by mask-format I/O
    /// and by tests with synthetic masks such as half-planes).
    pub fn from_mask(grid: Grid, interior: Vec<bool>, r0: f64) -> Result<Self> {
        if interior.len() != grid.node_count() {
            return Err(Error::BadParameter(format!(
                "mask length {} does not match node count {}",
                interior.len(),
                grid.node_count()
            )));
        }
        Ok(Domain::from_interior(grid, interior, r0, 0.0, DomainKind::Masked))
    }
}

/// Lacunary sawtooth profile for the rough lower boundary. Triangle wave
/// with unit amplitude and unit period.
fn triangle_wave(s: f64) -> f64 {
    let frac = s - s.floor();
    if frac < 0.5 {
        4.0 * frac - 1.0
    } else {
        3.0 - 4.0 * frac
    }
}

const ROUGH_LEVELS: usize = 8;

/// Height profile of the generated rough boundary. Amplitude at scale
/// `2^{-j}·r0` stays below `delta·2^{-j}·r0` and the total slope stays
/// below `delta`, which traps the graph in a `2·delta·ρ` slab around a
/// horizontal line at every center and every scale `ρ`.
fn rough_profile(delta: f64, r0: f64, seed: u64) -> impl Fn(f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // geometric slope budget: weights w_j ∝ u_j 2^{-j} normalized to Σ = 1
    // give slope 4 A_j / P_j = delta·w_j, so the total Lipschitz constant
    // is exactly delta and coarse scales carry visible amplitude
    let mut weights = Vec::with_capacity(ROUGH_LEVELS + 1);
    let mut phases = Vec::with_capacity(ROUGH_LEVELS + 1);
    for j in 0..=ROUGH_LEVELS {
        weights.push(rng.random_range(0.5..1.0) * 0.5f64.powi(j as i32));
        phases.push(rng.random_range(0.0..1.0));
    }
    let total: f64 = weights.iter().sum();
    let mut amps = Vec::with_capacity(ROUGH_LEVELS + 1);
    let mut total_amp = 0.0;
    for j in 0..=ROUGH_LEVELS {
        let period = r0 * 0.5f64.powi(j as i32);
        let amp = 0.25 * delta * (weights[j] / total) * period;
        total_amp += amp;
        amps.push(amp);
    }
    let base = 2.0 * total_amp;
    move |x: f64| {
        let mut y = base;
        for j in 0..=ROUGH_LEVELS {
            let period = r0 * 0.5f64.powi(j as i32);
            y += amps[j] * triangle_wave(x / period + phases[j]);
        }
        y
    }
}

/// Builds a domain on `grid`. The square kind takes the full grid
/// interior; the rough kind perturbs the bottom boundary by a seeded
/// lacunary sawtooth sum and rasterizes the region above it.
pub fn make_domain(grid: Grid, kind: DomainKind, delta: f64, r0: f64, seed: u64) -> Result<Domain> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::BadParameter(format!(
            "flatness parameter delta must lie in [0, 1/2), got {delta}"
        )));
    }
    if !(r0 > 0.0 && r0 <= grid.extent()) {
        return Err(Error::BadParameter(format!(
            "r0 must lie in (0, extent], got {r0}"
        )));
    }
    let nps = grid.nodes_per_side();
    let n = grid.cells_per_side();
    let h = grid.spacing();
    let interior = match kind {
        DomainKind::Square => {
            let mut mask = vec![false; grid.node_count()];
            for r in 1..n {
                for c in 1..n {
                    mask[grid.index(r, c)] = true;
                }
            }
            mask
        }
        DomainKind::Reifenberg { .. } => {
            let profile = rough_profile(delta, r0, seed);
            let mut mask = vec![false; grid.node_count()];
            for c in 1..n {
                let b = profile(c as f64 * h);
                if !(0.0..grid.extent()).contains(&b) {
                    return Err(Error::Infeasible(format!(
                        "boundary perturbation exits the grid extent: b({}) = {b}",
                        c as f64 * h
                    )));
                }
                for r in 1..n {
                    if r as f64 * h > b {
                        mask[grid.index(r, c)] = true;
                    }
                }
            }
            mask
        }
        DomainKind::Masked => {
            return Err(Error::BadParameter(
                "masked domains are built with Domain::from_mask".into(),
            ))
        }
    };
    let _ = nps;
    Ok(Domain::from_interior(grid, interior, r0, delta, kind))
}

/// Measures Reifenberg-type flatness of the lower boundary chain: the
/// supremum over chain nodes ξ and scales ρ ∈ {r0, r0/2, r0/4} of the
/// thinnest slab (over 180 line directions) containing the chain inside
/// `B_ρ(ξ)`, normalized by ρ. Scales stop at `r0/4` so rasterization
/// contributes at most `2h/r0`.
pub fn measure_flatness(domain: &Domain, r0: f64) -> Result<f64> {
    let grid = domain.grid();
    let h = grid.spacing();
    if r0 < 4.0 * h {
        return Err(Error::ScaleBelowResolution(format!(
            "flatness scale r0 = {r0} is below 4h = {}",
            4.0 * h
        )));
    }
    let scales: Vec<f64> = [r0, r0 / 2.0, r0 / 4.0]
        .into_iter()
        .filter(|&rho| rho >= 2.0 * h)
        .collect();
    let chain: Vec<Vec2> = domain.edge_chain().iter().map(|&i| grid.coords(i)).collect();
    let mut worst = 0.0f64;
    for &xi in &chain {
        for &rho in &scales {
            let pts: Vec<Vec2> = chain
                .iter()
                .copied()
                .filter(|p| p.dist(xi) <= rho)
                .collect();
            if pts.len() < 2 {
                continue;
            }
            let mut best = f64::INFINITY;
            for k in 0..180 {
                let theta = k as f64 * std::f64::consts::PI / 180.0;
                let normal = Vec2::new(theta.cos(), theta.sin());
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &p in &pts {
                    let t = (p - xi).dot(normal);
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
                best = best.min(0.5 * (hi - lo));
            }
            worst = worst.max(best / rho);
        }
    }
    Ok(worst)
}

/// Owner nodes whose coordinates lie in the ball, optionally intersected
/// with the domain interior. Node-center inclusion; empty sets allowed.
pub fn cells_in_ball(domain: &Domain, ball: &Ball, restrict_to_domain: bool) -> CellSet {
    let grid = domain.grid();
    let h = grid.spacing();
    let nps = grid.nodes_per_side();
    let r2 = ball.radius * ball.radius;
    let row_lo = ((ball.center.y - ball.radius) / h).floor().max(0.0) as usize;
    let row_hi = (((ball.center.y + ball.radius) / h).ceil() as usize).min(nps - 1);
    let col_lo = ((ball.center.x - ball.radius) / h).floor().max(0.0) as usize;
    let col_hi = (((ball.center.x + ball.radius) / h).ceil() as usize).min(nps - 1);
    let mut indices = Vec::new();
    for r in row_lo..=row_hi {
        for c in col_lo..=col_hi {
            let idx = grid.index(r, c);
            if !grid.is_owner(idx) {
                continue;
            }
            if restrict_to_domain && !domain.is_interior(idx) {
                continue;
            }
            let p = grid.coords(idx) - ball.center;
            if p.dot(p) <= r2 {
                indices.push(idx);
            }
        }
    }
    indices.sort_unstable();
    CellSet::from_sorted(indices)
}

// ---------------------------------------------------------------------------
// Mask format v1
// ---------------------------------------------------------------------------

/// Serializes the interior mask: header `MASK v1 <cells_per_side> <extent>`
/// then row-major 0/1 lines, one row of nodes per line.
pub fn mask_to_text(domain: &Domain) -> String {
    let grid = domain.grid();
    let nps = grid.nodes_per_side();
    let mut out = format!("MASK v1 {} {}\n", grid.cells_per_side(), grid.extent());
    for r in 0..nps {
        let row: Vec<&str> = (0..nps)
            .map(|c| if domain.is_interior(grid.index(r, c)) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses mask format v1 back into a domain (boundary inferred from the
/// mask; generator metadata is not stored in the format).
pub fn mask_from_text(text: &str) -> Result<Domain> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty mask file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "MASK" || parts[1] != "v1" {
        return Err(Error::Parse(format!("bad mask header: {header}")));
    }
    let cells: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad cells_per_side: {}", parts[2])))?;
    let extent: f64 = parts[3]
        .parse()
        .map_err(|_| Error::Parse(format!("bad extent: {}", parts[3])))?;
    let grid = build_grid(cells, extent)?;
    let mut interior = Vec::with_capacity(grid.node_count());
    for line in lines {
        for tok in line.split_whitespace() {
            match tok {
                "0" => interior.push(false),
                "1" => interior.push(true),
                _ => return Err(Error::Parse(format!("bad mask token: {tok}"))),
            }
        }
    }
    Domain::from_mask(grid, interior, extent / 4.0)
}
