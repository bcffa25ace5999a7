//! Grid-sampled scalar and vector fields plus the text field format.
//!
//! Fields are extended by zero outside the domain mask when used under
//! integral operators; masking is applied explicitly via [`ScalarField::masked`].

use crate::error::{Error, Result};
use crate::geometry::{build_grid, Domain, Grid, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.node_count()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::BadParameter(format!(
                "field length {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("field contains non-finite values".into()));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.coords(i);
                f(p.x, p.y)
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }
    pub fn set(&mut self, idx: usize, v: f64) {
        self.values[idx] = v;
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Zero outside the domain interior (the χ_Ω convention).
    pub fn masked(&self, domain: &Domain) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if domain.is_interior(i) { v } else { 0.0 })
            .collect();
        ScalarField { grid: self.grid, values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    values: Vec<Vec2>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField { grid, values: vec![Vec2::new(0.0, 0.0); grid.node_count()] }
    }

    pub fn sample(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.coords(i);
                let (x, y) = f(p.x, p.y);
                Vec2::new(x, y)
            })
            .collect();
        VectorField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::BadParameter("vector field length mismatch".into()));
        }
        Ok(VectorField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[Vec2] {
        &self.values
    }
    pub fn get(&self, idx: usize) -> Vec2 {
        self.values[idx]
    }

    /// Nodewise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Field format v1
// ---------------------------------------------------------------------------

/// Serializes a field: header `FIELD v1 <cells_per_side> <extent>` then
/// row-major whitespace-separated values at 17 significant digits, which
/// round-trips every f64 bit-exactly.
pub fn field_to_text(field: &ScalarField) -> String {
    let grid = field.grid();
    let nps = grid.nodes_per_side();
    let mut out = format!("FIELD v1 {} {}\n", grid.cells_per_side(), grid.extent());
    for r in 0..nps {
        let row: Vec<String> = (0..nps)
            .map(|c| format!("{:.16e}", field.get(grid.index(r, c))))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn field_from_text(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "FIELD" || parts[1] != "v1" {
        return Err(Error::Parse(format!("bad field header: {header}")));
    }
    let cells: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad cells_per_side: {}", parts[2])))?;
    let extent: f64 = parts[3]
        .parse()
        .map_err(|_| Error::Parse(format!("bad extent: {}", parts[3])))?;
    let grid = build_grid(cells, extent)?;
    let mut values = Vec::with_capacity(grid.node_count());
    for line in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse(format!("bad value: {tok}")))?;
            values.push(v);
        }
    }
    ScalarField::from_values(grid, values)
}

pub fn write_field(path: &std::path::Path, field: &ScalarField) -> Result<()> {
    std::fs::write(path, field_to_text(field))?;
    Ok(())
}

pub fn read_field(path: &std::path::Path) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path)?;
    field_from_text(&text)
}
