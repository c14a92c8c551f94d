//! Rectangular lattices with interior/boundary masks, and values on them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// A lattice `origin + i ⊙ h` with `dims[k]` nodes on axis `k`, row-major
/// (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    origin: Vec<f64>,
    h: Vec<f64>,
    strides: Vec<usize>,
    kinds: Vec<NodeKind>,
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

impl Grid {
    /// The box `[lo, hi]` with `dims[k] ≥ 3` nodes per axis. Without a domain
    /// the interior is every node off the box faces; with one, nodes with
    /// `ρ < 0` off the faces. Boundary nodes are the remaining nodes in the
    /// `3ⁿ` stencil of some interior node.
    pub fn new(lo: &[f64], hi: &[f64], dims: &[usize], domain: Option<&DomainSpec>) -> Result<Self> {
        let n = dims.len();
        if lo.len() != n || hi.len() != n {
            return Err(Error::Grid(format!("{n} axes but box has {} / {} bounds", lo.len(), hi.len())));
        }
        if n == 0 || n > crate::jet::MAX_DIM {
            return Err(Error::Dimension(n));
        }
        if dims.iter().any(|&d| d < 3) {
            return Err(Error::Grid("every axis needs at least 3 nodes".into()));
        }
        let total: usize = dims.iter().product();
        if total > 50_000_000 {
            return Err(Error::Grid(format!("{total} nodes exceed the 5e7 limit")));
        }
        let h: Vec<f64> = (0..n).map(|k| (hi[k] - lo[k]) / (dims[k] - 1) as f64).collect();
        if h.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Grid("box must have hi > lo on every axis".into()));
        }
        let mut grid = Grid { dims: dims.to_vec(), origin: lo.to_vec(), h, strides: strides_of(dims), kinds: vec![NodeKind::Exterior; total] };
        let mut idx = vec![0usize; n];
        for node in 0..total {
            grid.unravel_into(node, &mut idx);
            let on_face = idx.iter().zip(dims).any(|(&i, &d)| i == 0 || i == d - 1);
            if on_face {
                continue;
            }
            let inside = match domain {
                None => true,
                Some(d) => d.rho(&grid.coords(node)) < 0.0,
            };
            if inside {
                grid.kinds[node] = NodeKind::Interior;
            }
        }
        let interior: Vec<usize> = grid.interior_nodes().collect();
        for node in interior {
            for nb in grid.stencil(node) {
                if grid.kinds[nb] == NodeKind::Exterior {
                    grid.kinds[nb] = NodeKind::Boundary;
                }
            }
        }
        if grid.interior_nodes().next().is_none() {
            return Err(Error::Grid("no interior nodes".into()));
        }
        Ok(grid)
    }

    /// A lattice with a caller-supplied mask; no stencil completeness is implied.
    pub fn with_mask(lo: &[f64], h: &[f64], dims: &[usize], kinds: Vec<NodeKind>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if kinds.len() != total || lo.len() != dims.len() || h.len() != dims.len() {
            return Err(Error::Grid("mask or spacing does not match the dimensions".into()));
        }
        Ok(Grid { dims: dims.to_vec(), origin: lo.to_vec(), h: h.to_vec(), strides: strides_of(dims), kinds })
    }

    /// Uniform `dims`-node lattice on the unit cube.
    pub fn unit_cube(n: usize, nodes: usize) -> Result<Self> {
        Grid::new(&vec![0.0; n], &vec![1.0; n], &vec![nodes; n], None)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds.iter().enumerate().filter(|(_, k)| **k == NodeKind::Interior).map(|(i, _)| i)
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds.iter().enumerate().filter(|(_, k)| **k == NodeKind::Boundary).map(|(i, _)| i)
    }

    fn unravel_into(&self, node: usize, out: &mut [usize]) {
        let mut rem = node;
        for k in 0..self.dims.len() {
            out[k] = rem / self.strides[k];
            rem %= self.strides[k];
        }
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.unravel_into(node, &mut out);
        out
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut rem = node;
        (0..self.dims.len())
            .map(|k| {
                let i = rem / self.strides[k];
                rem %= self.strides[k];
                self.origin[k] + i as f64 * self.h[k]
            })
            .collect()
    }

    /// The `3ⁿ − 1` lattice neighbors of `node` that exist.
    pub fn stencil(&self, node: usize) -> Vec<usize> {
        let n = self.dims.len();
        let base = self.multi_index(node);
        let mut out = Vec::new();
        let mut off = vec![-1i64; n];
        loop {
            if off.iter().any(|&o| o != 0) {
                let ok = (0..n).all(|k| {
                    let v = base[k] as i64 + off[k];
                    v >= 0 && v < self.dims[k] as i64
                });
                if ok {
                    out.push((0..n).map(|k| (base[k] as i64 + off[k]) as usize * self.strides[k]).sum());
                }
            }
            let mut k = 0;
            while k < n {
                off[k] += 1;
                if off[k] <= 1 {
                    break;
                }
                off[k] = -1;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        out
    }
}

/// One value per node, tagged with the lattice geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub dims: Vec<usize>,
    pub h: Vec<f64>,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(GridFunction { dims: grid.dims.clone(), h: grid.h.clone(), origin: grid.origin.clone(), values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        GridFunction { dims: grid.dims.clone(), h: grid.h.clone(), origin: grid.origin.clone(), values }
    }

    pub fn constant(grid: &Grid, v: f64) -> Self {
        GridFunction { dims: grid.dims.clone(), h: grid.h.clone(), origin: grid.origin.clone(), values: vec![v; grid.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.dims == grid.dims && self.values.len() == grid.len()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| f(*v)).collect(), ..self.clone() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Grid("grid functions on different lattices".into()));
        }
        Ok(GridFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(), ..self.clone() })
    }

    /// Header `dims,h,origin`, one line with those fields (entries separated by
    /// spaces), then one value per line in row-major order.
    pub fn to_csv(&self) -> String {
        let join = |v: &[String]| v.join(" ");
        let mut s = String::from("dims,h,origin\n");
        let _ = writeln!(
            s,
            "{},{},{}",
            join(&self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>()),
            join(&self.h.iter().map(|d| format!("{d:?}")).collect::<Vec<_>>()),
            join(&self.origin.iter().map(|d| format!("{d:?}")).collect::<Vec<_>>()),
        );
        for v in &self.values {
            let _ = writeln!(s, "{v:?}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Grid(format!("csv: {why}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("dims,h,origin") {
            return Err(bad("missing `dims,h,origin` header"));
        }
        let meta = lines.next().ok_or_else(|| bad("missing geometry line"))?;
        let fields: Vec<&str> = meta.split(',').collect();
        if fields.len() != 3 {
            return Err(bad("geometry line needs three fields"));
        }
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| bad("bad number"))).collect()
        };
        let dims: Vec<usize> =
            fields[0].split_whitespace().map(|t| t.parse::<usize>().map_err(|_| bad("bad dimension"))).collect::<Result<_>>()?;
        let h = nums(fields[1])?;
        let origin = nums(fields[2])?;
        if h.len() != dims.len() || origin.len() != dims.len() {
            return Err(bad("dims, h and origin lengths differ"));
        }
        let values: Vec<f64> = lines.map(|l| l.trim().parse::<f64>().map_err(|_| bad("bad value"))).collect::<Result<_>>()?;
        if values.len() != dims.iter().product::<usize>() {
            return Err(bad("value count does not match dims"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite value"));
        }
        Ok(GridFunction { dims, h, origin, values })
    }
}
