use rayon::prelude::*;

use super::{Grid, Link, NodeLocation, Solver};
use crate::error::SolverError;
use crate::hamiltonian::legendre;
use crate::NetworkLagrangian;

/// Edge costs of the time-expanded lattice.
///
/// `moves[a]` holds `h dt L_γ(s_mid, d ds/(h dt))` for span `h ≤ H`, arrival
/// index `i` and offset `d = i - j ≠ 0`; `stays[a][i]` is `dt L_γ(s_i, 0)`.
pub(crate) struct GraphTables {
    moves: Vec<Vec<f64>>,
    stays: Vec<Vec<f64>>,
    width: usize,
}

impl GraphTables {
    pub(crate) fn build(nl: &NetworkLagrangian, grid: &Grid) -> Result<Self, SolverError> {
        let n_s = grid.n_s();
        let r = grid.reach() as isize;
        let width = (2 * r + 1) as usize;
        let span = grid.span();
        let (ds, dt) = (grid.ds(), grid.dt());
        let moves = nl
            .hamiltonians()
            .par_iter()
            .map(|h| {
                (0..span * n_s * width)
                    .map(|idx| {
                        let d = (idx % width) as isize - r;
                        let i = (idx / width) % n_s;
                        let hops = idx / (width * n_s) + 1;
                        let j = i as isize - d;
                        if d == 0 || j < 0 || j >= n_s as isize {
                            return Ok(f64::INFINITY);
                        }
                        let mid = 0.5 * (grid.param(i) + grid.param(j as usize));
                        let tau = hops as f64 * dt;
                        legendre(h.as_ref(), mid, d as f64 * ds / tau).map(|l| tau * l)
                    })
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let stays = nl
            .hamiltonians()
            .iter()
            .map(|h| {
                (0..n_s)
                    .map(|i| legendre(h.as_ref(), grid.param(i), 0.0).map(|l| dt * l))
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GraphTables {
            moves,
            stays,
            width,
        })
    }

    /// Value and predecessor of `node` at layer `k`. Ties go to staying,
    /// then to the smallest arc id, predecessor node and span.
    pub(crate) fn update(
        &self,
        solver: &Solver<'_>,
        history: &[Vec<f64>],
        k: usize,
        node: usize,
    ) -> (f64, Link) {
        let nodes = &solver.nodes;
        let grid = &solver.grid;
        let prev = &history[k - 1];
        let mut best = Best {
            value: f64::INFINITY,
            key: (0, 0, 0, 0),
            link: Link::stay(node),
        };
        let consider_arc = |best: &mut Best, a: usize, i: usize| {
            let n_s = grid.n_s();
            let r = grid.reach() as isize;
            for hops in 1..=grid.span().min(k) {
                let layer = &history[k - hops];
                let base = ((hops - 1) * n_s + i) * self.width;
                for d in -r..=r {
                    let j = i as isize - d;
                    if d == 0 || j < 0 || j >= n_s as isize {
                        continue;
                    }
                    let pred = nodes.global(a, j as usize);
                    let v = layer[pred] + self.moves[a][base + (d + r) as usize];
                    let key = (1, a as u32, pred as u32, hops as u16);
                    if v < best.value || (v == best.value && key < best.key) {
                        *best = Best {
                            value: v,
                            key,
                            link: Link {
                                pred: pred as u32,
                                span: hops as u16,
                                arc: a as u32,
                            },
                        };
                    }
                }
            }
        };
        match nodes.location(node) {
            NodeLocation::Interior { arc, index } => {
                best.value = prev[node] + self.stays[arc.0][index];
                consider_arc(&mut best, arc.0, index);
            }
            NodeLocation::Vertex(v) => {
                let nl = solver.nl;
                best.value = prev[node] + nl.limiter_at(v) * grid.dt();
                for arr in nl.network().arrivals(v) {
                    let index = if arr.end.param() == 0.0 {
                        0
                    } else {
                        grid.n_s() - 1
                    };
                    consider_arc(&mut best, arr.arc.0, index);
                }
            }
        }
        (best.value, best.link)
    }
}

struct Best {
    value: f64,
    key: (u8, u32, u32, u16),
    link: Link,
}
