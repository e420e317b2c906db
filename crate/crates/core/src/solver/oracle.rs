use super::{Grid, NodeLocation, NodeMap};
use crate::error::SolverError;
use crate::hamiltonian::legendre;
use crate::network::NetworkPoint;
use crate::NetworkLagrangian;

/// Size limits of the exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_arcs: usize,
    pub max_breakpoints: usize,
    /// Bound on arcs × n_s² × layers, the size of the segment-cost table.
    pub max_table: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_arcs: 3,
            max_breakpoints: 4,
            max_table: 4_000_000,
        }
    }
}

/// Exhaustive minimum of the action over curves made of at most `k + 1`
/// pieces, each either a straight move in the parameter of one arc or a stay,
/// between points of the `(grid node, layer)` lattice.
///
/// Every such curve is admissible for the minimal-action problem, so the
/// result bounds `S(x, 0, y, T)` from above on this lattice.
pub fn brute_force_minimal_action(
    nl: &NetworkLagrangian,
    grid: &Grid,
    x: &NetworkPoint,
    y: &NetworkPoint,
    duration: f64,
    k: usize,
) -> Result<f64, SolverError> {
    let limits = OracleLimits::default();
    let net = nl.network();
    let arcs = net.arcs().len();
    if arcs > limits.max_arcs {
        return Err(SolverError::InstanceTooLarge(format!(
            "{arcs} arcs, at most {} supported",
            limits.max_arcs
        )));
    }
    if k > limits.max_breakpoints {
        return Err(SolverError::InstanceTooLarge(format!(
            "{k} breakpoints, at most {} supported",
            limits.max_breakpoints
        )));
    }
    if !(duration > 0.0) {
        return Err(SolverError::BadHorizon {
            t: 0.0,
            r: duration,
        });
    }
    let layers = (duration / grid.dt()).round() as usize;
    if layers == 0 {
        return Err(SolverError::BadGrid("duration below one time step".into()));
    }
    let n_s = grid.n_s();
    if arcs * n_s * n_s * layers > limits.max_table {
        return Err(SolverError::InstanceTooLarge(format!(
            "lattice of {n_s} nodes per arc and {layers} layers"
        )));
    }
    let nodes = NodeMap::new(net, n_s);
    let dt = grid.dt();

    // cost[a][(i * n_s + j) * layers + (h - 1)] for a segment j -> i over h layers
    let mut cost = vec![vec![f64::INFINITY; n_s * n_s * layers]; arcs];
    for (a, table) in cost.iter_mut().enumerate() {
        let h_ref = nl.hamiltonians()[a].as_ref();
        for i in 0..n_s {
            for j in 0..n_s {
                for h in 1..=layers {
                    let tau = h as f64 * dt;
                    let (si, sj) = (grid.param(i), grid.param(j));
                    let lambda = (si - sj) / tau;
                    table[(i * n_s + j) * layers + h - 1] =
                        tau * legendre(h_ref, 0.5 * (si + sj), lambda)?;
                }
            }
        }
    }
    let seg = |a: usize, j: usize, i: usize, h: usize| cost[a][(i * n_s + j) * layers + h - 1];

    let n = nodes.len();
    let source = nodes.snap(x);
    let target = nodes.snap(y);
    let idx = |l: usize, node: usize| l * n + node;
    let mut current = vec![f64::INFINITY; (layers + 1) * n];
    current[idx(0, source)] = 0.0;
    let mut answer = if source == target && layers == 0 {
        0.0
    } else {
        f64::INFINITY
    };
    for _piece in 0..=k {
        let mut next = vec![f64::INFINITY; (layers + 1) * n];
        for l in 0..layers {
            for node in 0..n {
                let base = current[idx(l, node)];
                if !base.is_finite() {
                    continue;
                }
                let mut relax = |l2: usize, to: usize, c: f64| {
                    let slot = &mut next[idx(l2, to)];
                    if base + c < *slot {
                        *slot = base + c;
                    }
                };
                match nodes.location(node) {
                    NodeLocation::Vertex(v) => {
                        let c = nl.limiter_at(v);
                        for l2 in l + 1..=layers {
                            relax(l2, node, c * (l2 - l) as f64 * dt);
                        }
                        for arr in net.arrivals(v) {
                            let a = arr.arc.0;
                            let j = if arr.end.param() == 0.0 { 0 } else { n_s - 1 };
                            for i in 0..n_s {
                                if i == j {
                                    continue;
                                }
                                let to = nodes.global(a, i);
                                for l2 in l + 1..=layers {
                                    relax(l2, to, seg(a, j, i, l2 - l));
                                }
                            }
                        }
                    }
                    NodeLocation::Interior { arc, index: j } => {
                        let a = arc.0;
                        for i in 0..n_s {
                            let to = nodes.global(a, i);
                            for l2 in l + 1..=layers {
                                relax(l2, to, seg(a, j, i, l2 - l));
                            }
                        }
                    }
                }
            }
        }
        answer = answer.min(next[idx(layers, target)]);
        // curves may also stop using pieces early only at the final layer,
        // so carry finished states forward unchanged
        for node in 0..n {
            let done = current[idx(layers, node)];
            if done < next[idx(layers, node)] {
                next[idx(layers, node)] = done;
            }
        }
        current = next;
    }
    if answer.is_finite() {
        Ok(answer)
    } else {
        Err(SolverError::Unreachable)
    }
}
