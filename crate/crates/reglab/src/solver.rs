//! Discretization and solution of the double-obstacle variational
//! inequality and the auxiliary problems of its comparison chain.
//!
//! Discretization: P1 elements on the structured mesh that splits every
//! grid square into two right triangles. Gradients are constant per
//! triangle, the energy
//!
//! ```text
//! J(u) = Σ_T |T| [ a_T (|∇u|² + μ²)^{p/2} / p − d_T · ∇u ] − Σ_i h² g_i u_i
//! ```
//!
//! is convex for μ ≥ 0, and the admissible set is a nodewise box, so
//! projected gradient descent with Armijo backtracking converges
//! globally. The degenerate p ≠ 2 case runs μ-continuation from 1e-2
//! down to the configured floor.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{Ball, CellSet, Domain, Grid, Vec2};
use crate::weights::CoefficientField;

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// projected-gradient stopping tolerance (reference step h²)
    pub tol: f64,
    pub max_iter: usize,
    /// regularization floor; continuation starts at `mu_start` for p ≠ 2
    pub mu_final: f64,
    pub mu_start: f64,
    pub armijo_slope: f64,
    pub backtrack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 20_000,
            mu_final: 1e-8,
            mu_start: 1e-2,
            armijo_slope: 1e-4,
            backtrack: 0.5,
        }
    }
}

impl SolverConfig {
    fn mu_stages(&self, p: f64) -> Vec<f64> {
        if (p - 2.0).abs() < 1e-14 {
            // the regularization never enters the p = 2 energy
            return vec![self.mu_final];
        }
        let mut stages = Vec::new();
        let mut mu = self.mu_start;
        while mu > self.mu_final * (1.0 + 1e-12) {
            stages.push(mu);
            mu *= 1e-2;
        }
        stages.push(self.mu_final);
        stages
    }
}

/// One P1 triangle: `grad = sign · ((u[xn]-u[anchor])/h, (u[yn]-u[anchor])/h)`.
#[derive(Clone, Copy, Debug)]
struct Tri {
    anchor: usize,
    xn: usize,
    yn: usize,
    sign: f64,
}

#[inline]
fn tri_gradient(t: &Tri, values: &[f64], h: f64) -> Vec2 {
    Vec2::new(
        t.sign * (values[t.xn] - values[t.anchor]) / h,
        t.sign * (values[t.yn] - values[t.anchor]) / h,
    )
}

/// Right-hand-side selection for the auxiliary problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhsMode {
    Zero,
    /// divergence of `A(x, ∇ψ₁)`
    DivAPsi1,
    /// divergence of `A(x, ∇ψ₂)`
    DivAPsi2,
}

/// The double-obstacle instance: operator coefficients, datum pair
/// `(F, g)`, obstacles, and the composite datum field.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    domain: Domain,
    p: f64,
    coeff: CoefficientField,
    f_datum: VectorField,
    g: ScalarField,
    psi1: ScalarField,
    psi2: ScalarField,
    composite: ScalarField,
}

impl ProblemSpec {
    pub fn new(
        domain: Domain,
        coeff: CoefficientField,
        f_datum: VectorField,
        g: ScalarField,
        psi1: ScalarField,
        psi2: ScalarField,
    ) -> Result<Self> {
        let grid = *domain.grid();
        let p = coeff.p();
        for i in 0..grid.node_count() {
            if psi1.get(i) > psi2.get(i) {
                return Err(Error::Infeasible(format!(
                    "psi1 > psi2 at node {i}: {} > {}",
                    psi1.get(i),
                    psi2.get(i)
                )));
            }
        }
        // boundary compatibility up to rounding dust (sampled analytic
        // obstacles rarely vanish bit-exactly on the frame)
        for &b in domain.boundary_nodes() {
            if psi1.get(b) > 1e-12 || psi2.get(b) < -1e-12 {
                return Err(Error::Infeasible(format!(
                    "obstacles exclude zero boundary data at node {b}"
                )));
            }
        }
        let mut spec = ProblemSpec {
            domain,
            p,
            coeff,
            f_datum,
            g,
            psi1,
            psi2,
            composite: ScalarField::zeros(grid),
        };
        spec.composite = spec.compute_composite();
        Ok(spec)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn grid(&self) -> &Grid {
        self.domain.grid()
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn coeff(&self) -> &CoefficientField {
        &self.coeff
    }
    pub fn f_datum(&self) -> &VectorField {
        &self.f_datum
    }
    pub fn g(&self) -> &ScalarField {
        &self.g
    }
    pub fn psi1(&self) -> &ScalarField {
        &self.psi1
    }
    pub fn psi2(&self) -> &ScalarField {
        &self.psi2
    }
    /// `𝔽 = (|∇ψ₁|^p + |∇ψ₂|^p + |F|^p + |g|^{p/(p-1)})^{1/p}` nodewise,
    /// with node-averaged P1 gradients, zero outside the interior.
    pub fn composite(&self) -> &ScalarField {
        &self.composite
    }

    fn compute_composite(&self) -> ScalarField {
        let grid = *self.domain.grid();
        let mesh = outer_mesh(&self.domain);
        let g1 = node_averaged_gradient(&grid, self.psi1.values(), &mesh.tris);
        let g2 = node_averaged_gradient(&grid, self.psi2.values(), &mesh.tris);
        let p = self.p;
        let dual = p / (p - 1.0);
        let mut values = vec![0.0; grid.node_count()];
        for i in 0..grid.node_count() {
            if !self.domain.is_interior(i) {
                continue;
            }
            let s = g1.get(i).norm().powf(p)
                + g2.get(i).norm().powf(p)
                + self.f_datum.get(i).norm().powf(p)
                + self.g.get(i).abs().powf(dual);
            values[i] = s.powf(1.0 / p);
        }
        ScalarField::from_values(grid, values).expect("composite datum")
    }
}

struct Mesh {
    tris: Vec<Tri>,
    region: Vec<bool>,
    free: Vec<usize>,
}

/// All six mesh neighbors of a node (4-neighbors plus the two
/// anti-diagonal nodes the triangulation connects).
fn mesh_neighbors(grid: &Grid, idx: usize) -> [Option<usize>; 6] {
    let nps = grid.nodes_per_side();
    let (r, c) = grid.row_col(idx);
    let mk = |rr: i64, cc: i64| -> Option<usize> {
        (rr >= 0 && cc >= 0 && (rr as usize) < nps && (cc as usize) < nps)
            .then(|| grid.index(rr as usize, cc as usize))
    };
    let (r, c) = (r as i64, c as i64);
    [
        mk(r - 1, c),
        mk(r + 1, c),
        mk(r, c - 1),
        mk(r, c + 1),
        mk(r - 1, c + 1),
        mk(r + 1, c - 1),
    ]
}

fn build_mesh(grid: &Grid, region: Vec<bool>, free_candidate: impl Fn(usize) -> bool) -> Mesh {
    let n = grid.cells_per_side();
    let mut tris = Vec::with_capacity(2 * n * n);
    for r in 0..n {
        for c in 0..n {
            let a = grid.index(r, c);
            let b = grid.index(r, c + 1);
            let d = grid.index(r + 1, c);
            let e = grid.index(r + 1, c + 1);
            if region[a] && region[b] && region[d] {
                tris.push(Tri { anchor: a, xn: b, yn: d, sign: 1.0 });
            }
            if region[e] && region[d] && region[b] {
                tris.push(Tri { anchor: e, xn: d, yn: b, sign: -1.0 });
            }
        }
    }
    let mut free = Vec::new();
    for idx in 0..grid.node_count() {
        if !region[idx] || !free_candidate(idx) {
            continue;
        }
        let ok = mesh_neighbors(grid, idx)
            .iter()
            .all(|n| n.map(|j| region[j]).unwrap_or(false));
        if ok {
            free.push(idx);
        }
    }
    Mesh { tris, region, free }
}

/// Mesh for the full domain: interior nodes are degrees of freedom, the
/// one-node collar around them is pinned.
fn outer_mesh(domain: &Domain) -> Mesh {
    let grid = domain.grid();
    let nps = grid.nodes_per_side();
    let mut region = vec![false; grid.node_count()];
    for idx in 0..grid.node_count() {
        if domain.is_interior(idx) {
            region[idx] = true;
            let (r, c) = grid.row_col(idx);
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if rr >= 0 && cc >= 0 && (rr as usize) < nps && (cc as usize) < nps {
                        region[grid.index(rr as usize, cc as usize)] = true;
                    }
                }
            }
        }
    }
    build_mesh(grid, region, |idx| domain.is_interior(idx))
}

/// Mesh over a cell-set region: the member nodes are candidates for
/// degrees of freedom, their one-node collar is pinned to boundary data.
fn region_mesh(domain: &Domain, cells: &CellSet) -> Mesh {
    let grid = domain.grid();
    let nps = grid.nodes_per_side();
    let mut member = vec![false; grid.node_count()];
    for i in cells.iter() {
        member[i] = true;
    }
    let mut region = member.clone();
    for i in cells.iter() {
        let (r, c) = grid.row_col(i);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let rr = r as i64 + dr;
                let cc = c as i64 + dc;
                if rr >= 0 && cc >= 0 && (rr as usize) < nps && (cc as usize) < nps {
                    region[grid.index(rr as usize, cc as usize)] = true;
                }
            }
        }
    }
    build_mesh(grid, region, move |idx| member[idx])
}

fn node_averaged_gradient(grid: &Grid, values: &[f64], tris: &[Tri]) -> VectorField {
    let h = grid.spacing();
    let mut acc = vec![Vec2::new(0.0, 0.0); grid.node_count()];
    let mut cnt = vec![0u32; grid.node_count()];
    for t in tris {
        let g = tri_gradient(t, values, h);
        for idx in [t.anchor, t.xn, t.yn] {
            acc[idx] = acc[idx] + g;
            cnt[idx] += 1;
        }
    }
    for i in 0..acc.len() {
        if cnt[i] > 0 {
            acc[i] = acc[i] * (1.0 / cnt[i] as f64);
        }
    }
    VectorField::from_values(*grid, acc).expect("gradient field")
}

#[derive(Clone, Debug)]
enum DriftKind {
    None,
    /// `d_T = b_T (|F_T|² + μ²)^{(p-2)/2} F_T`
    Datum,
    /// `d_T = a_T (|∇ψ|² + μ²)^{(p-2)/2} ∇ψ_T` for the selected obstacle
    APsi(RhsMode),
}

/// A box-constrained convex program on a sub-mesh.
struct SubProblem<'a> {
    grid: Grid,
    p: f64,
    tris: &'a [Tri],
    a_t: Vec<f64>,
    b_t: Vec<f64>,
    f_t: Vec<Vec2>,
    psi_grad_t: Vec<Vec2>,
    drift_kind: DriftKind,
    g: Option<&'a ScalarField>,
    free: &'a [usize],
    lower: Option<&'a [f64]>,
    upper: Option<&'a [f64]>,
    fixed: Vec<f64>,
}

impl<'a> SubProblem<'a> {
    fn drift(&self, mu: f64) -> Vec<Vec2> {
        let e = (self.p - 2.0) / 2.0;
        match self.drift_kind {
            DriftKind::None => vec![Vec2::new(0.0, 0.0); self.tris.len()],
            DriftKind::Datum => self
                .f_t
                .iter()
                .zip(&self.b_t)
                .map(|(f, b)| *f * (b * (f.dot(*f) + mu * mu).powf(e)))
                .collect(),
            DriftKind::APsi(_) => self
                .psi_grad_t
                .iter()
                .zip(&self.a_t)
                .map(|(gp, a)| *gp * (a * (gp.dot(*gp) + mu * mu).powf(e)))
                .collect(),
        }
    }

    /// Energy and its rounding scale (the sum of absolute contributions,
    /// which bounds the evaluation noise at ~eps·scale).
    fn energy(&self, u: &[f64], mu: f64, drift: &[Vec2]) -> (f64, f64) {
        let h = self.grid.spacing();
        let area = 0.5 * h * h;
        let mut j = 0.0;
        let mut scale = 0.0;
        for (k, t) in self.tris.iter().enumerate() {
            let g = tri_gradient(t, u, h);
            let dens = self.a_t[k] * (g.dot(g) + mu * mu).powf(self.p / 2.0) / self.p
                - drift[k].dot(g);
            j += area * dens;
            scale += (area * dens).abs();
        }
        if let Some(g) = self.g {
            let h2 = h * h;
            for &i in self.free {
                j -= h2 * g.get(i) * u[i];
                scale += (h2 * g.get(i) * u[i]).abs();
            }
        }
        (j, scale)
    }

    fn gradient(&self, u: &[f64], mu: f64, drift: &[Vec2], out: &mut [f64]) {
        let h = self.grid.spacing();
        let area = 0.5 * h * h;
        for v in out.iter_mut() {
            *v = 0.0;
        }
        let e = (self.p - 2.0) / 2.0;
        for (k, t) in self.tris.iter().enumerate() {
            let g = tri_gradient(t, u, h);
            let s = self.a_t[k] * (g.dot(g) + mu * mu).powf(e);
            let w = Vec2::new(s * g.x - drift[k].x, s * g.y - drift[k].y) * area;
            let scale = t.sign / h;
            out[t.xn] += scale * w.x;
            out[t.yn] += scale * w.y;
            out[t.anchor] -= scale * (w.x + w.y);
        }
        if let Some(g) = self.g {
            let h2 = h * h;
            for &i in self.free {
                out[i] -= h2 * g.get(i);
            }
        }
    }

    fn project_node(&self, i: usize, v: f64) -> f64 {
        let mut v = v;
        if let Some(lo) = self.lower {
            v = v.max(lo[i]);
        }
        if let Some(hi) = self.upper {
            v = v.min(hi[i]);
        }
        v
    }
}

/// The solved state: iterate, node-averaged gradient, optimality
/// certificate, and the monotone energy trace.
#[derive(Clone, Debug)]
pub struct Solution {
    pub u: ScalarField,
    pub grad_u: VectorField,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub energy_trace: Vec<f64>,
    pub active_lower: Vec<usize>,
    pub active_upper: Vec<usize>,
    pub converged: bool,
}

fn descend(sub: &SubProblem, init: &[f64], config: &SolverConfig) -> Solution {
    let grid = sub.grid;
    let h = grid.spacing();
    let h2 = h * h;
    let stages = config.mu_stages(sub.p);
    let n = grid.node_count();

    let mut u = sub.fixed.clone();
    for &i in sub.free {
        u[i] = sub.project_node(i, init[i]);
    }

    let mut grad = vec![0.0; n];
    let mut iterations = 0usize;
    let mut energy_trace: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = true;
    let mut tau: f64 = 0.25;

    for (stage, &mu) in stages.iter().enumerate() {
        let last = stage + 1 == stages.len();
        let stage_tol = if last { config.tol } else { (config.tol * 100.0).max(1e-10) };
        let drift = sub.drift(mu);
        let (mut energy, mut noise) = sub.energy(&u, mu, &drift);
        // largest step that recently passed a measurable Armijo test;
        // reset per stage because the landscape changes with μ
        let mut tau_safe: f64 = 0.25;
        loop {
            sub.gradient(&u, mu, &drift, &mut grad);
            let mut sq = 0.0;
            for &i in sub.free {
                let d = u[i] - sub.project_node(i, u[i] - h2 * grad[i]);
                sq += d * d;
            }
            residual = sq.sqrt() / h2;
            if residual <= stage_tol {
                break;
            }
            if iterations >= config.max_iter {
                converged = false;
                break;
            }
            tau = (tau * 2.0).min(1e6);
            let allowance = 16.0 * f64::EPSILON * noise;
            let mut accepted = false;
            while tau >= 1e-18 {
                let mut cand = u.clone();
                let mut dec = 0.0;
                for &i in sub.free {
                    let v = sub.project_node(i, u[i] - tau * grad[i]);
                    dec += grad[i] * (v - u[i]);
                    cand[i] = v;
                }
                if dec >= 0.0 {
                    // projected point does not move: box-stationary
                    accepted = true;
                    break;
                }
                if config.armijo_slope * (-dec) <= allowance {
                    // the decrease is below the energy evaluation noise, so
                    // the Armijo test is blind; take a fixed safe step
                    if tau > tau_safe {
                        tau = tau_safe;
                        continue;
                    }
                    u = cand;
                    accepted = true;
                    break;
                }
                let (cand_energy, cand_noise) = sub.energy(&cand, mu, &drift);
                if cand_energy <= energy + config.armijo_slope * dec + allowance {
                    u = cand;
                    energy = cand_energy;
                    noise = cand_noise;
                    tau_safe = tau;
                    accepted = true;
                    break;
                }
                tau *= config.backtrack;
            }
            if !accepted {
                converged = false;
                break;
            }
            iterations += 1;
            energy_trace.push(match energy_trace.last() {
                Some(&prev) => energy.min(prev),
                None => energy,
            });
        }
        if !converged {
            break;
        }
    }

    let u_field = ScalarField::from_values(grid, u).expect("solution field");
    let grad_u = node_averaged_gradient(&grid, u_field.values(), sub.tris);
    let mut active_lower = Vec::new();
    let mut active_upper = Vec::new();
    for &i in sub.free {
        if let Some(lo) = sub.lower {
            if u_field.get(i) == lo[i] {
                active_lower.push(i);
            }
        }
        if let Some(hi) = sub.upper {
            if u_field.get(i) == hi[i] {
                active_upper.push(i);
            }
        }
    }
    Solution {
        u: u_field,
        grad_u,
        iterations,
        kkt_residual: residual,
        energy_trace,
        active_lower,
        active_upper,
        converged,
    }
}

/// The assembled outer problem: mesh, triangle coefficient samples, and
/// the nodal data of the instance.
pub struct DiscreteProblem {
    spec: ProblemSpec,
    mesh: Mesh,
    a_t: Vec<f64>,
    b_t: Vec<f64>,
    f_t: Vec<Vec2>,
}

fn tri_samples(tris: &[Tri], nodal: &[f64]) -> Vec<f64> {
    tris.iter()
        .map(|t| (nodal[t.anchor] + nodal[t.xn] + nodal[t.yn]) / 3.0)
        .collect()
}

fn tri_vec_samples(tris: &[Tri], nodal: &[Vec2]) -> Vec<Vec2> {
    tris.iter()
        .map(|t| (nodal[t.anchor] + nodal[t.xn] + nodal[t.yn]) * (1.0 / 3.0))
        .collect()
}

/// Triangulates the domain and samples coefficients at triangle
/// centroids. Validates the instance invariants.
pub fn assemble(spec: ProblemSpec) -> Result<DiscreteProblem> {
    let mesh = outer_mesh(spec.domain());
    let a_t = tri_samples(&mesh.tris, spec.coeff().a());
    let b_t = tri_samples(&mesh.tris, spec.coeff().b());
    let f_t = tri_vec_samples(&mesh.tris, spec.f_datum().values());
    Ok(DiscreteProblem { spec, mesh, a_t, b_t, f_t })
}

impl DiscreteProblem {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }
    pub fn grid(&self) -> &Grid {
        self.spec.grid()
    }
    pub fn domain(&self) -> &Domain {
        self.spec.domain()
    }

    fn outer_sub(&self) -> SubProblem<'_> {
        let grid = *self.spec.grid();
        SubProblem {
            grid,
            p: self.spec.p(),
            tris: &self.mesh.tris,
            a_t: self.a_t.clone(),
            b_t: self.b_t.clone(),
            f_t: self.f_t.clone(),
            psi_grad_t: Vec::new(),
            drift_kind: DriftKind::Datum,
            g: Some(self.spec.g()),
            free: &self.mesh.free,
            lower: Some(self.spec.psi1().values()),
            upper: Some(self.spec.psi2().values()),
            fixed: vec![0.0; grid.node_count()],
        }
    }

    /// Action of the assembled energy gradient at the given nodal vector
    /// (zero datum contribution), exposed for stencil verification.
    pub fn stiffness_action(&self, values: &[f64]) -> Vec<f64> {
        let sub = self.outer_sub();
        let drift = vec![Vec2::new(0.0, 0.0); self.mesh.tris.len()];
        let mut out = vec![0.0; self.spec.grid().node_count()];
        sub.gradient(values, 0.0, &drift, &mut out);
        // strip the datum term the outer subproblem adds
        let h2 = self.spec.grid().cell_area();
        for &i in &self.mesh.free {
            out[i] += h2 * self.spec.g().get(i);
        }
        out
    }

    /// Energy of an admissible nodal vector at the final regularization;
    /// exposed for the energy identities in tests and reports.
    pub fn energy(&self, values: &[f64], config: &SolverConfig) -> f64 {
        let sub = self.outer_sub();
        let mu = if (self.spec.p() - 2.0).abs() < 1e-14 { 0.0 } else { config.mu_final };
        let drift = sub.drift(mu);
        sub.energy(values, mu, &drift).0
    }

    /// Per-triangle gradients of a nodal field over the outer mesh,
    /// paired with triangle centroids, optionally filtered to a ball.
    pub fn tri_gradients(&self, values: &[f64], within: Option<&Ball>) -> Vec<(Vec2, Vec2)> {
        let grid = self.spec.grid();
        let h = grid.spacing();
        let mut out = Vec::new();
        for t in &self.mesh.tris {
            let centroid = (grid.coords(t.anchor) + grid.coords(t.xn) + grid.coords(t.yn))
                * (1.0 / 3.0);
            if let Some(b) = within {
                if !b.contains(centroid) {
                    continue;
                }
            }
            out.push((centroid, tri_gradient(t, values, h)));
        }
        out
    }

    fn region_sub<'a>(
        &'a self,
        mesh: &'a Mesh,
        boundary_data: &ScalarField,
        drift_kind: DriftKind,
        lower: Option<&'a [f64]>,
        upper: Option<&'a [f64]>,
        frozen_a: Option<&[f64]>,
    ) -> SubProblem<'a> {
        let a_nodal: &[f64] = frozen_a.unwrap_or_else(|| self.spec.coeff().a());
        let a_t = tri_samples(&mesh.tris, a_nodal);
        let b_t = tri_samples(&mesh.tris, self.spec.coeff().b());
        let f_t = tri_vec_samples(&mesh.tris, self.spec.f_datum().values());
        let h = self.spec.grid().spacing();
        let psi_grad_t = match drift_kind {
            DriftKind::APsi(RhsMode::DivAPsi1) => mesh
                .tris
                .iter()
                .map(|t| tri_gradient(t, self.spec.psi1().values(), h))
                .collect(),
            DriftKind::APsi(RhsMode::DivAPsi2) => mesh
                .tris
                .iter()
                .map(|t| tri_gradient(t, self.spec.psi2().values(), h))
                .collect(),
            _ => Vec::new(),
        };
        SubProblem {
            grid: *self.spec.grid(),
            p: self.spec.p(),
            tris: &mesh.tris,
            a_t,
            b_t,
            f_t,
            psi_grad_t,
            drift_kind,
            g: None,
            free: &mesh.free,
            lower,
            upper,
            fixed: boundary_data.values().to_vec(),
        }
    }
}

/// Solves the double-obstacle problem over the admissible box
/// `ψ₁ ≤ u ≤ ψ₂`, `u = 0` on the boundary collar. Non-convergence is
/// reported on the solution, not as an error.
pub fn solve_double_obstacle(problem: &DiscreteProblem, config: &SolverConfig) -> Result<Solution> {
    let sub = problem.outer_sub();
    let init = vec![0.0; problem.spec.grid().node_count()];
    Ok(descend(&sub, &init, config))
}

/// Solves the one-sided obstacle problem on a region: minimize the
/// energy whose optimality condition compares the operator at `∇u₁`
/// against `A(x, ∇ψ₂)`, over `u ≥ lower` with the given boundary data.
pub fn solve_one_obstacle(
    problem: &DiscreteProblem,
    region: &CellSet,
    boundary_data: &ScalarField,
    lower: &ScalarField,
    rhs_mode: RhsMode,
    config: &SolverConfig,
) -> Result<Solution> {
    if region.is_empty() {
        return Err(Error::EmptyInput("one-obstacle region is empty".into()));
    }
    if rhs_mode != RhsMode::DivAPsi2 {
        return Err(Error::BadParameter(
            "one-obstacle comparison uses the upper-obstacle operator datum".into(),
        ));
    }
    let mesh = region_mesh(problem.domain(), region);
    // pinned nodes must respect the constraint
    for idx in 0..problem.spec.grid().node_count() {
        if mesh.region[idx] && !mesh.free.contains(&idx) && boundary_data.get(idx) < lower.get(idx)
        {
            return Err(Error::Infeasible(format!(
                "boundary data below the obstacle at node {idx}"
            )));
        }
    }
    let sub = problem.region_sub(
        &mesh,
        boundary_data,
        DriftKind::APsi(RhsMode::DivAPsi2),
        Some(lower.values()),
        None,
        None,
    );
    Ok(descend(&sub, boundary_data.values(), config))
}

/// Solves the unconstrained Dirichlet problem on a region with the
/// selected right side.
pub fn solve_dirichlet(
    problem: &DiscreteProblem,
    region: &CellSet,
    boundary_data: &ScalarField,
    rhs: RhsMode,
    config: &SolverConfig,
) -> Result<Solution> {
    if region.is_empty() {
        return Err(Error::EmptyInput("Dirichlet region is empty".into()));
    }
    let mesh = region_mesh(problem.domain(), region);
    let drift = match rhs {
        RhsMode::Zero => DriftKind::None,
        mode => DriftKind::APsi(mode),
    };
    let sub = problem.region_sub(&mesh, boundary_data, drift, None, None, None);
    Ok(descend(&sub, boundary_data.values(), config))
}

/// Replaces the leading coefficient by its slice average over the
/// region's x₂-extent (exact for coefficients measurable in x₁ alone),
/// then solves the homogeneous Dirichlet problem.
pub fn solve_frozen(
    problem: &DiscreteProblem,
    region: &CellSet,
    boundary_data: &ScalarField,
    config: &SolverConfig,
) -> Result<Solution> {
    if region.is_empty() {
        return Err(Error::EmptyInput("frozen region is empty".into()));
    }
    let grid = problem.spec.grid();
    let mut rows: Vec<usize> = region.iter().map(|i| grid.row_col(i).0).collect();
    rows.sort_unstable();
    rows.dedup();
    if rows.len() < 2 {
        return Err(Error::BadParameter(
            "frozen slice needs x2-extent of at least two rows".into(),
        ));
    }
    let row_lo = rows[0];
    let row_hi = *rows.last().unwrap();
    let a = problem.spec.coeff().a();
    let mut frozen = a.to_vec();
    let nps = grid.nodes_per_side();
    let mut slice = Vec::with_capacity(row_hi - row_lo + 1);
    for c in 0..nps {
        slice.clear();
        for r in row_lo..=row_hi {
            let idx = grid.index(r, c);
            if problem.domain().is_interior(idx) {
                slice.push(a[idx]);
            }
        }
        if slice.is_empty() {
            for r in row_lo..=row_hi {
                slice.push(a[grid.index(r, c)]);
            }
        }
        let avg = {
            let first = slice[0];
            if slice.iter().all(|&v| v == first) {
                first
            } else {
                slice.iter().sum::<f64>() / slice.len() as f64
            }
        };
        for r in 0..nps {
            frozen[grid.index(r, c)] = avg;
        }
    }
    let mesh = region_mesh(problem.domain(), region);
    let sub = problem.region_sub(&mesh, boundary_data, DriftKind::None, None, None, Some(&frozen));
    Ok(descend(&sub, boundary_data.values(), config))
}

/// Recomputes the optimality certificate of the outer problem:
/// `‖u − Proj_K(u − h²∇J(u))‖₂ / h²`, zero exactly at the discrete
/// solution.
pub fn kkt_residual(solution: &Solution, problem: &DiscreteProblem, config: &SolverConfig) -> f64 {
    let sub = problem.outer_sub();
    let grid = problem.spec.grid();
    let h2 = grid.cell_area();
    let mu = if (problem.spec.p() - 2.0).abs() < 1e-14 { 0.0 } else { config.mu_final };
    let drift = sub.drift(mu);
    let mut grad = vec![0.0; grid.node_count()];
    sub.gradient(solution.u.values(), mu, &drift, &mut grad);
    let mut sq = 0.0;
    for &i in sub.free {
        let d = solution.u.get(i) - sub.project_node(i, solution.u.get(i) - h2 * grad[i]);
        sq += d * d;
    }
    sq.sqrt() / h2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, make_domain, DomainKind};
    use crate::weights::CoefficientField;

    fn square_domain(n: usize) -> Domain {
        let g = build_grid(n, 1.0).unwrap();
        make_domain(g, DomainKind::Square, 0.0, 1.0, 0).unwrap()
    }

    fn plain_problem(
        n: usize,
        p: f64,
        a_fn: impl Fn(f64, f64) -> f64,
        g_fn: impl Fn(f64, f64) -> f64,
        psi1: impl Fn(f64, f64) -> f64,
        psi2: impl Fn(f64, f64) -> f64,
    ) -> ProblemSpec {
        let dom = square_domain(n);
        let grid = *dom.grid();
        let coeff = CoefficientField::sample(grid, p, a_fn, |_, _| 1.0).unwrap();
        ProblemSpec::new(
            dom,
            coeff,
            VectorField::zeros(grid),
            ScalarField::sample(grid, g_fn),
            ScalarField::sample(grid, psi1),
            ScalarField::sample(grid, psi2),
        )
        .unwrap()
    }

    #[test]
    fn hat_function_tri_gradient_pattern() {
        let grid = build_grid(4, 1.0).unwrap();
        let h = grid.spacing();
        let mut hat = vec![0.0; grid.node_count()];
        hat[grid.index(1, 1)] = 1.0;
        let t = Tri { anchor: grid.index(1, 1), xn: grid.index(1, 2), yn: grid.index(2, 1), sign: 1.0 };
        let g = tri_gradient(&t, &hat, h);
        assert_eq!(g.x, -1.0 / h);
        assert_eq!(g.y, -1.0 / h);
    }

    #[test]
    fn stiffness_matches_five_point_stencil() {
        let spec = plain_problem(16, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| -10.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let grid = *problem.grid();
        let u: Vec<f64> = (0..grid.node_count())
            .map(|i| {
                let p = grid.coords(i);
                (3.1 * p.x).sin() * (1.7 + p.y).cos() + 0.3 * p.x * p.y
            })
            .collect();
        let action = problem.stiffness_action(&u);
        for r in 2..grid.cells_per_side() - 1 {
            for c in 2..grid.cells_per_side() - 1 {
                let i = grid.index(r, c);
                let five = 4.0 * u[i]
                    - u[grid.index(r - 1, c)]
                    - u[grid.index(r + 1, c)]
                    - u[grid.index(r, c - 1)]
                    - u[grid.index(r, c + 1)];
                assert!(
                    (action[i] - five).abs() <= 1e-12,
                    "node ({r},{c}): {} vs {five}",
                    action[i]
                );
            }
        }
    }

    #[test]
    fn energy_vanishes_at_zero() {
        let spec = plain_problem(
            8,
            2.0,
            |_, _| 1.0,
            |x, y| x + y,
            |_, _| -1.0,
            |_, _| 1.0,
        );
        let problem = assemble(spec).unwrap();
        let zero = vec![0.0; problem.grid().node_count()];
        assert_eq!(problem.energy(&zero, &SolverConfig::default()), 0.0);
    }

    #[test]
    fn zero_data_solves_instantly() {
        let spec = plain_problem(16, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| -1.0, |_, _| 2.0);
        let problem = assemble(spec).unwrap();
        let sol = solve_double_obstacle(&problem, &SolverConfig::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.u.values().iter().all(|&v| v == 0.0));
        assert_eq!(sol.kkt_residual, 0.0);
    }

    #[test]
    fn pinched_obstacles_return_the_pinch() {
        let psi = |x: f64, y: f64| {
            0.4 * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
        };
        let spec = plain_problem(16, 2.0, |_, _| 1.0, |x, y| x * y, psi, psi);
        let problem = assemble(spec).unwrap();
        let sol = solve_double_obstacle(&problem, &SolverConfig::default()).unwrap();
        let grid = problem.grid();
        for i in 0..grid.node_count() {
            if problem.domain().is_interior(i) {
                let p = grid.coords(i);
                assert_eq!(sol.u.get(i), psi(p.x, p.y));
            } else {
                assert_eq!(sol.u.get(i), 0.0);
            }
        }
        assert_eq!(kkt_residual(&sol, &problem, &SolverConfig::default()), 0.0);
    }

    #[test]
    fn poisson_matches_dense_direct_solve() {
        // p = 2, inactive obstacles, g = 1: compare against dense Gaussian
        // elimination of the 5-point system on a small grid
        let n = 17;
        let spec = plain_problem(n, 2.0, |_, _| 1.0, |_, _| 1.0, |_, _| -10.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let config = SolverConfig { tol: 1e-9, ..Default::default() };
        let sol = solve_double_obstacle(&problem, &config).unwrap();
        assert!(sol.converged, "residual {}", sol.kkt_residual);

        let grid = *problem.grid();
        let h2 = grid.cell_area();
        let interior: Vec<usize> = (0..grid.node_count())
            .filter(|&i| problem.domain().is_interior(i))
            .collect();
        let m = interior.len();
        let pos: std::collections::HashMap<usize, usize> =
            interior.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut a = vec![vec![0.0f64; m + 1]; m];
        for (k, &i) in interior.iter().enumerate() {
            let (r, c) = grid.row_col(i);
            a[k][k] = 4.0;
            for (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                let j = grid.index(nr, nc);
                if let Some(&kj) = pos.get(&j) {
                    a[k][kj] = -1.0;
                }
            }
            a[k][m] = h2 * 1.0;
        }
        // Gaussian elimination with partial pivoting
        for col in 0..m {
            let piv = (col..m).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()).unwrap();
            a.swap(col, piv);
            let d = a[col][col];
            for j in col..=m {
                a[col][j] /= d;
            }
            for row in 0..m {
                if row != col && a[row][col] != 0.0 {
                    let f = a[row][col];
                    for j in col..=m {
                        a[row][j] -= f * a[col][j];
                    }
                }
            }
        }
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for (k, &i) in interior.iter().enumerate() {
            let d = sol.u.get(i) - a[k][m];
            err2 += d * d;
            ref2 += a[k][m] * a[k][m];
        }
        let rel = (err2 / ref2).sqrt();
        assert!(rel <= 1e-7, "relative L2 error {rel}");
    }

    #[test]
    fn dirichlet_zero_data_gives_zero() {
        let spec = plain_problem(16, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| -1.0, |_, _| 1.0);
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let zero = ScalarField::zeros(*problem.grid());
        let sol = solve_dirichlet(&problem, &region, &zero, RhsMode::Zero, &SolverConfig::default())
            .unwrap();
        assert!(sol.u.values().iter().all(|&v| v == 0.0));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn dirichlet_psi1_datum_returns_psi1() {
        let spec = plain_problem(
            12,
            3.0,
            |x, y| 1.0 + 0.2 * (x + y),
            |_, _| 0.0,
            |x, y| 0.8 * x * (1.0 - x) * y * (1.0 - y) - 0.1,
            |_, _| 10.0,
        );
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let psi1 = problem.spec().psi1().clone();
        let sol =
            solve_dirichlet(&problem, &region, &psi1, RhsMode::DivAPsi1, &SolverConfig::default())
                .unwrap();
        assert_eq!(sol.iterations, 0, "psi1 solves its own equation");
        for i in 0..problem.grid().node_count() {
            assert_eq!(sol.u.get(i), psi1.get(i));
        }
    }

    #[test]
    fn dirichlet_harmonic_polynomial() {
        // x² - y² is exactly discrete harmonic for the 5-point stencil, so
        // the solver must reproduce the boundary interpolant to solver
        // tolerance (far below the C·h² the maximum principle allows)
        let spec = plain_problem(16, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| -10.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let grid = *problem.grid();
        let harmonic = ScalarField::sample(grid, |x, y| x * x - y * y);
        let config = SolverConfig { tol: 1e-9, ..Default::default() };
        let sol = solve_dirichlet(&problem, &region, &harmonic, RhsMode::Zero, &config).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.node_count() {
            worst = worst.max((sol.u.get(i) - harmonic.get(i)).abs());
        }
        let h = grid.spacing();
        assert!(worst <= 4.0 * h * h, "max error {worst}");
    }

    #[test]
    fn one_obstacle_inactive_constraint_matches_dirichlet() {
        let spec = plain_problem(
            12,
            2.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| -1e10,
            |x, y| 0.3 * (x + 0.2) * (1.3 - y),
        );
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let grid = *problem.grid();
        let bd = ScalarField::sample(grid, |x, y| 0.05 * x * (1.0 - y));
        let floor = ScalarField::constant(grid, -1e10);
        let config = SolverConfig { tol: 1e-9, ..Default::default() };
        let one = solve_one_obstacle(&problem, &region, &bd, &floor, RhsMode::DivAPsi2, &config)
            .unwrap();
        // same problem without the constraint: Dirichlet with the psi2 datum
        let two = solve_dirichlet(&problem, &region, &bd, RhsMode::DivAPsi2, &config).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.node_count() {
            worst = worst.max((one.u.get(i) - two.u.get(i)).abs());
        }
        assert!(worst <= 1e-7, "inactive obstacle deviates: {worst}");
        // feasibility is exact
        for &i in &region.iter().collect::<Vec<_>>() {
            assert!(one.u.get(i) >= floor.get(i));
        }
    }

    #[test]
    fn one_obstacle_boundary_at_floor_stays_feasible() {
        let spec = plain_problem(12, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| -0.1, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let grid = *problem.grid();
        let floor = ScalarField::constant(grid, -0.1);
        let bd = ScalarField::constant(grid, -0.1);
        let sol = solve_one_obstacle(
            &problem,
            &region,
            &bd,
            &floor,
            RhsMode::DivAPsi2,
            &SolverConfig::default(),
        )
        .unwrap();
        for i in region.iter() {
            assert!(sol.u.get(i) >= -0.1);
        }
    }

    #[test]
    fn one_obstacle_rejects_bad_boundary() {
        let spec = plain_problem(12, 2.0, |_, _| 1.0, |_, _| 0.0, |_, _| 0.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let region = problem.domain().interior_cells();
        let grid = *problem.grid();
        let floor = ScalarField::constant(grid, 0.0);
        let bd = ScalarField::constant(grid, -1.0);
        assert!(solve_one_obstacle(
            &problem,
            &region,
            &bd,
            &floor,
            RhsMode::DivAPsi2,
            &SolverConfig::default()
        )
        .is_err());
    }

    #[test]
    fn frozen_x1_coefficient_is_identity() {
        let a_fn = |x: f64, _: f64| if (4.0 * x).fract() < 0.5 { 1.4 } else { 0.8 };
        let spec = plain_problem(16, 2.0, a_fn, |_, _| 0.0, |_, _| -10.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let grid = *problem.grid();
        let ball = Ball::new(Vec2::new(0.5, 0.5), 0.3);
        let region = crate::geometry::cells_in_ball(problem.domain(), &ball, true);
        let bd = ScalarField::sample(grid, |x, y| 0.1 * x + 0.05 * y);
        let config = SolverConfig { tol: 1e-9, ..Default::default() };
        let frozen = solve_frozen(&problem, &region, &bd, &config).unwrap();
        let plain = solve_dirichlet(&problem, &region, &bd, RhsMode::Zero, &config).unwrap();
        for i in 0..grid.node_count() {
            assert!(
                (frozen.u.get(i) - plain.u.get(i)).abs() <= 1e-12,
                "node {i}: {} vs {}",
                frozen.u.get(i),
                plain.u.get(i)
            );
        }
    }

    #[test]
    fn energy_trace_is_monotone() {
        let spec = plain_problem(
            16,
            3.0,
            |x, _| 1.0 + 0.3 * x,
            |_, _| 1.0,
            |_, _| -0.005,
            |_, _| 0.02,
        );
        let problem = assemble(spec).unwrap();
        let config = SolverConfig { tol: 1e-6, max_iter: 4000, ..Default::default() };
        let sol = solve_double_obstacle(&problem, &config).unwrap();
        for w in sol.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-14, "energy increased: {} -> {}", w[0], w[1]);
        }
        // feasibility is bit-exact
        for i in 0..problem.grid().node_count() {
            let u = sol.u.get(i);
            assert!(u >= problem.spec().psi1().get(i) && u <= problem.spec().psi2().get(i));
        }
        for &b in problem.domain().boundary_nodes() {
            assert_eq!(sol.u.get(b), 0.0);
        }
    }

    #[test]
    fn kkt_residual_detects_perturbation() {
        let spec = plain_problem(12, 2.0, |_, _| 1.0, |_, _| 1.0, |_, _| -10.0, |_, _| 10.0);
        let problem = assemble(spec).unwrap();
        let config = SolverConfig::default();
        let sol = solve_double_obstacle(&problem, &config).unwrap();
        let base = kkt_residual(&sol, &problem, &config);
        assert!(base <= config.tol);
        let mut bumped = sol.clone();
        let grid = problem.grid();
        let mid = grid.index(6, 6);
        bumped.u.set(mid, bumped.u.get(mid) + grid.spacing());
        assert!(kkt_residual(&bumped, &problem, &config) > base);
    }

    #[test]
    fn variational_inequality_holds_for_random_competitors() {
        use rand::{Rng, SeedableRng};
        let spec = plain_problem(
            12,
            2.0,
            |x, y| 1.0 + 0.2 * (x * y),
            |_, _| 1.0,
            |_, _| -0.01,
            |_, _| 0.015,
        );
        let problem = assemble(spec).unwrap();
        let config = SolverConfig { tol: 1e-9, ..Default::default() };
        let sol = solve_double_obstacle(&problem, &config).unwrap();
        assert!(sol.converged);
        let grid = *problem.grid();
        let h = grid.spacing();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let sub = problem.outer_sub();
        let drift = sub.drift(0.0);
        let mut grad = vec![0.0; grid.node_count()];
        sub.gradient(sol.u.values(), 0.0, &drift, &mut grad);
        for _ in 0..50 {
            // random admissible competitor
            let mut phi = sol.u.values().to_vec();
            let mut dist2 = 0.0;
            for &i in &problem.mesh.free {
                let lo = problem.spec().psi1().get(i);
                let hi = problem.spec().psi2().get(i);
                let v = rng.random_range(lo..=hi);
                dist2 += (v - phi[i]) * (v - phi[i]);
                phi[i] = v;
            }
            // first-order convexity: ⟨∇J(u), φ − u⟩ ≥ −tol·‖φ−u‖ at the solution
            let mut pairing = 0.0;
            for &i in &problem.mesh.free {
                pairing += grad[i] * (phi[i] - sol.u.get(i));
            }
            assert!(
                pairing >= -config.tol * dist2.sqrt() / (h * h) - 1e-12,
                "VI violated: pairing {pairing}"
            );
        }
    }
}
