//! Value functions on a single arc `Q = (0,1) × (0,∞)` with data on the
//! parabolic boundary: `V` takes sources on `t = 0` and both lateral faces,
//! `W` only on `t = 0` and `s = 0`, its curves being constrained to `Q̄`.

use rayon::prelude::*;

use super::semi_lagrangian::{arc_update, SlTables};
use super::Grid;
use crate::error::SolverError;
use crate::hamiltonian::HamiltonianRef;

type Datum = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary values: `initial(s)` on `t = 0`, `left(t)` on `s = 0` and
/// `right(t)` on `s = 1`.
pub struct BoundaryDatum {
    pub initial: Datum,
    pub left: Datum,
    pub right: Datum,
}

impl BoundaryDatum {
    /// Restriction of a function `g(s, t)` to the boundary.
    pub fn from_fn(g: impl Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static) -> Self {
        let (g0, g1, g2) = (g.clone(), g.clone(), g);
        BoundaryDatum {
            initial: Box::new(move |s| g0(s, 0.0)),
            left: Box::new(move |t| g1(0.0, t)),
            right: Box::new(move |t| g2(1.0, t)),
        }
    }
}

/// Values on the `n_s × (layers + 1)` lattice of one arc.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcTable {
    grid: Grid,
    values: Vec<Vec<f64>>,
}

impl ArcTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn value(&self, layer: usize, i: usize) -> f64 {
        self.values[layer][i]
    }

    pub fn profile(&self, layer: usize) -> &[f64] {
        &self.values[layer]
    }

    pub fn layer_count(&self) -> usize {
        self.values.len()
    }
}

fn run(
    h: &HamiltonianRef,
    g: &BoundaryDatum,
    grid: Grid,
    right_face: bool,
) -> Result<ArcTable, SolverError> {
    let tables = SlTables::from_hamiltonians(std::slice::from_ref(h), &grid)?;
    let n_s = grid.n_s();
    let mut values = Vec::with_capacity(grid.layers() + 1);
    values.push(
        (0..n_s)
            .map(|i| (g.initial)(grid.param(i)))
            .collect::<Vec<f64>>(),
    );
    for k in 1..=grid.layers() {
        let prev = &values[k - 1];
        let mut next: Vec<f64> = (0..n_s)
            .into_par_iter()
            .map(|i| arc_update(&tables, 0, i, h.as_ref(), &grid, |j| prev[j], true))
            .collect();
        let t = k as f64 * grid.dt();
        next[0] = next[0].min((g.left)(t));
        if right_face {
            next[n_s - 1] = next[n_s - 1].min((g.right)(t));
        }
        values.push(next);
    }
    Ok(ArcTable { grid, values })
}

/// `V(s, t) = inf { g(s₀, t₀) + S_γ((s₀, t₀), (s, t)) : (s₀, t₀) ∈ ∂Q }`.
pub fn single_arc_value_v(
    h: &HamiltonianRef,
    g: &BoundaryDatum,
    grid: Grid,
) -> Result<ArcTable, SolverError> {
    run(h, g, grid, true)
}

/// As [`single_arc_value_v`] with sources on `∂⁻Q` only.
pub fn single_arc_value_w(
    h: &HamiltonianRef,
    g: &BoundaryDatum,
    grid: Grid,
) -> Result<ArcTable, SolverError> {
    run(h, g, grid, false)
}
