use rayon::prelude::*;

use super::{Grid, NodeLocation, Solver};
use crate::error::SolverError;
use crate::hamiltonian::{legendre, Hamiltonian, HamiltonianRef};
use crate::NetworkLagrangian;

/// `dt · L_γ(s_i, d·ds/dt)` for every arc, node and offset `|d| ≤ R`.
pub(crate) struct SlTables {
    hit: Vec<Vec<f64>>,
    width: usize,
}

impl SlTables {
    pub(crate) fn build(nl: &NetworkLagrangian, grid: &Grid) -> Result<Self, SolverError> {
        Self::from_hamiltonians(nl.hamiltonians(), grid)
    }

    pub(crate) fn from_hamiltonians(
        hams: &[HamiltonianRef],
        grid: &Grid,
    ) -> Result<Self, SolverError> {
        let r = grid.reach() as isize;
        let width = (2 * r + 1) as usize;
        let (ds, dt) = (grid.ds(), grid.dt());
        let hit = hams
            .par_iter()
            .map(|h| {
                (0..grid.n_s() * width)
                    .map(|idx| {
                        let i = idx / width;
                        let d = (idx % width) as isize - r;
                        let lambda = d as f64 * ds / dt;
                        legendre(h.as_ref(), grid.param(i), lambda).map(|l| dt * l)
                    })
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SlTables { hit, width })
    }

    pub(crate) fn update(&self, solver: &Solver<'_>, prev: &[f64], node: usize) -> f64 {
        let nodes = &solver.nodes;
        let nl = solver.nl;
        match nodes.location(node) {
            NodeLocation::Interior { arc, index } => {
                let a = arc.0;
                arc_update(
                    self,
                    a,
                    index,
                    nl.hamiltonian(arc).as_ref(),
                    &solver.grid,
                    |j| prev[nodes.global(a, j)],
                    true,
                )
            }
            NodeLocation::Vertex(v) => {
                let mut best = prev[node] + nl.limiter_at(v) * solver.grid.dt();
                for arr in nl.network().arrivals(v) {
                    let a = arr.arc.0;
                    let index = if arr.end.param() == 0.0 {
                        0
                    } else {
                        solver.grid.n_s() - 1
                    };
                    let cand = arc_update(
                        self,
                        a,
                        index,
                        nl.hamiltonian(arr.arc).as_ref(),
                        &solver.grid,
                        |j| prev[nodes.global(a, j)],
                        false,
                    );
                    best = best.min(cand);
                }
                best
            }
        }
    }
}

/// One-sided difference quotients of `H(s, ·)` at `g`.
#[inline]
fn slopes(h: &dyn Hamiltonian, s: f64, g: f64, hg: f64) -> (f64, f64) {
    let eps = 1e-7 * (1.0 + g.abs());
    let minus = (hg - h.eval(s, g - eps)) / eps;
    let plus = (h.eval(s, g + eps) - hg) / eps;
    (minus, plus)
}

/// Minimum over feet on arc `a` of `prev(foot) + dt L(s_i, (s_i - foot)/dt)`
/// with `prev` interpolated linearly between nodes.
///
/// Node-hitting feet use the tabulated cost. Inside a cell the objective is
/// `u_j + g (s_i - s_j) - λ g dt + dt L(λ)`, minimized over all `λ` by
/// `-dt H(s_i, g)`; that value is used when the optimal speed `∂H(s_i, g)`
/// falls in the speed range of the cell.
pub(crate) fn arc_update(
    tables: &SlTables,
    a: usize,
    i: usize,
    h: &dyn Hamiltonian,
    grid: &Grid,
    value: impl Fn(usize) -> f64,
    stay_allowed: bool,
) -> f64 {
    let n_s = grid.n_s();
    let r = grid.reach();
    let (ds, dt) = (grid.ds(), grid.dt());
    let s_i = grid.param(i);
    let row = &tables.hit[a][i * tables.width..(i + 1) * tables.width];
    let lo = i.saturating_sub(r);
    let hi = (i + r).min(n_s - 1);
    let mut best = f64::INFINITY;
    let vals: Vec<f64> = (lo..=hi).map(value).collect();
    for (k, j) in (lo..=hi).enumerate() {
        if j == i && !stay_allowed {
            continue;
        }
        let d = i as isize - j as isize;
        let cost = row[(d + r as isize) as usize];
        best = best.min(vals[k] + cost);
    }
    for (k, j) in (lo..hi).enumerate() {
        let (u0, u1) = (vals[k], vals[k + 1]);
        if !u0.is_finite() || !u1.is_finite() {
            continue;
        }
        let g = (u1 - u0) / ds;
        let hg = h.eval(s_i, g);
        if !hg.is_finite() {
            continue;
        }
        let (d_minus, d_plus) = slopes(h, s_i, g, hg);
        if !d_minus.is_finite() || !d_plus.is_finite() {
            continue;
        }
        let lambda_lo = (s_i - grid.param(j + 1)) / dt;
        let lambda_hi = (s_i - grid.param(j)) / dt;
        if d_minus <= lambda_hi && d_plus >= lambda_lo {
            best = best.min(u0 + g * (s_i - grid.param(j)) - dt * hg);
        }
    }
    best
}
