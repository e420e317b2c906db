//! Minimal action, the Lax-Oleinik value and the single-arc value tables.
//!
//! Two discretizations share one node layout: every vertex is a single node
//! and every arc contributes `n_s - 2` interior nodes at `s_i = i/(n_s - 1)`.
//!
//! * [`Scheme::SemiLagrangian`] steps one layer at a time, minimizing the
//!   foot value (linearly interpolated on the arc) plus the running cost over
//!   all speeds within the reach. It is monotone and first-order accurate,
//!   and is the default for values.
//! * [`Scheme::Graph`] is the min-plus shortest path on the time-expanded
//!   lattice with edges spanning up to `span` layers. Every path is an exact
//!   network curve whose action equals the path cost, so it provides minimal
//!   actions and backtracked minimizers.

mod graph;
mod oracle;
mod semi_lagrangian;
mod single_arc;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::action::{NetworkCurve, Piece};
use crate::error::SolverError;
use crate::hamiltonian::FluxLimiter;
use crate::network::{ArcId, Network, NetworkPoint, VertexId};
use crate::NetworkLagrangian;

pub use oracle::{brute_force_minimal_action, OracleLimits};
pub use single_arc::{single_arc_value_v, single_arc_value_w, ArcTable, BoundaryDatum};

use graph::GraphTables;
use semi_lagrangian::SlTables;

/// Tolerance for vertex agreement of the initial datum.
pub const DATUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    SemiLagrangian,
    Graph,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::SemiLagrangian => "semi-lagrangian",
            Scheme::Graph => "graph",
        })
    }
}

impl FromStr for Scheme {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "semi-lagrangian" | "sl" => Ok(Scheme::SemiLagrangian),
            "graph" => Ok(Scheme::Graph),
            other => Err(SolverError::BadGrid(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Space-time lattice: `n_s` parameter nodes per arc, `layers` steps of `dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n_s: usize,
    dt: f64,
    layers: usize,
    reach: usize,
    span: usize,
}

impl Grid {
    pub const DEFAULT_REACH: usize = 8;

    pub fn new(n_s: usize, dt: f64, horizon: f64) -> Result<Self, SolverError> {
        if n_s < 2 {
            return Err(SolverError::BadGrid(format!(
                "n_s = {n_s} must be at least 2"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::BadGrid(format!("dt = {dt} must be positive")));
        }
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(SolverError::BadGrid(format!(
                "horizon {horizon} must be non-negative"
            )));
        }
        let ratio = horizon / dt;
        let layers = ratio.round();
        if (ratio - layers).abs() > 1e-6 * (1.0 + ratio) {
            return Err(SolverError::BadGrid(format!(
                "horizon {horizon} is not a multiple of dt = {dt}"
            )));
        }
        Ok(Grid {
            n_s,
            dt,
            layers: layers as usize,
            reach: Self::DEFAULT_REACH,
            span: Self::default_span(dt),
        })
    }

    /// `⌈1/(2√dt)⌉`, so the slowest representable graph speed shrinks under
    /// refinement.
    pub fn default_span(dt: f64) -> usize {
        (0.5 / dt.sqrt()).ceil().max(1.0) as usize
    }

    pub fn with_reach(mut self, reach: usize) -> Self {
        self.reach = reach.clamp(1, self.n_s - 1);
        self
    }

    pub fn with_span(mut self, span: usize) -> Self {
        self.span = span.max(1);
        self
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn ds(&self) -> f64 {
        1.0 / (self.n_s - 1) as f64
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn reach(&self) -> usize {
        self.reach.min(self.n_s - 1)
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn horizon(&self) -> f64 {
        self.layers as f64 * self.dt
    }

    pub fn param(&self, i: usize) -> f64 {
        i as f64 * self.ds()
    }

    /// Largest parameter speed a single step can represent.
    pub fn max_speed(&self) -> f64 {
        self.reach() as f64 * self.ds() / self.dt
    }
}

/// Where a lattice node sits on the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeLocation {
    Vertex(VertexId),
    Interior { arc: ArcId, index: usize },
}

/// Numbering of lattice nodes: vertices first, then arc interiors.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMap {
    n_s: usize,
    vertices: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl NodeMap {
    pub fn new(net: &Network, n_s: usize) -> Self {
        let vertices = net.vertices().len();
        let mut offsets = Vec::with_capacity(net.arcs().len());
        let mut next = vertices;
        for _ in net.arcs() {
            offsets.push(next);
            next += n_s - 2;
        }
        NodeMap {
            n_s,
            vertices,
            tails: net.arcs().iter().map(|a| a.tail().0).collect(),
            heads: net.arcs().iter().map(|a| a.head().0).collect(),
            offsets,
            total: next,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn arc_count(&self) -> usize {
        self.offsets.len()
    }

    /// Node of arc `arc` at index `i ∈ [0, n_s)`.
    #[inline]
    pub fn global(&self, arc: usize, i: usize) -> usize {
        if i == 0 {
            self.tails[arc]
        } else if i == self.n_s - 1 {
            self.heads[arc]
        } else {
            self.offsets[arc] + i - 1
        }
    }

    pub fn vertex_node(&self, v: VertexId) -> usize {
        v.0
    }

    pub fn location(&self, node: usize) -> NodeLocation {
        if node < self.vertices {
            return NodeLocation::Vertex(VertexId(node));
        }
        let arc = self.offsets.partition_point(|&o| o <= node) - 1;
        NodeLocation::Interior {
            arc: ArcId(arc),
            index: node - self.offsets[arc] + 1,
        }
    }

    /// Index of `node` along `arc`, if the node lies on it.
    pub fn index_on(&self, node: usize, arc: usize) -> Option<usize> {
        if node == self.tails[arc] {
            Some(0)
        } else if node == self.heads[arc] {
            Some(self.n_s - 1)
        } else if node >= self.offsets[arc] && node < self.offsets[arc] + self.n_s - 2 {
            Some(node - self.offsets[arc] + 1)
        } else {
            None
        }
    }

    pub fn point(&self, node: usize) -> NetworkPoint {
        match self.location(node) {
            NodeLocation::Vertex(v) => NetworkPoint::Vertex(v),
            NodeLocation::Interior { arc, index } => NetworkPoint::OnArc {
                arc,
                s: index as f64 / (self.n_s - 1) as f64,
            },
        }
    }

    /// Nearest node to a network point.
    pub fn snap(&self, p: &NetworkPoint) -> usize {
        match *p {
            NetworkPoint::Vertex(v) => v.0,
            NetworkPoint::OnArc { arc, s } => {
                let i = (s * (self.n_s - 1) as f64).round() as usize;
                self.global(arc.0, i.min(self.n_s - 1))
            }
        }
    }
}

/// Predecessor of a graph-scheme node: `arc == NONE` marks a stay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub pred: u32,
    pub span: u16,
    pub arc: u32,
}

impl Link {
    pub const NONE: u32 = u32::MAX;

    fn stay(node: usize) -> Self {
        Link {
            pred: node as u32,
            span: 1,
            arc: Self::NONE,
        }
    }

    pub fn is_stay(&self) -> bool {
        self.arc == Self::NONE
    }
}

/// Values `u(node, layer)` of a solve, with predecessor links for the graph
/// scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueGrid {
    grid: Grid,
    nodes: NodeMap,
    scheme: Scheme,
    limiter: FluxLimiter,
    t0: f64,
    values: Vec<Vec<f64>>,
    links: Option<Vec<Vec<Link>>>,
}

impl ValueGrid {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &NodeMap {
        &self.nodes
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn limiter(&self) -> &FluxLimiter {
        &self.limiter
    }

    pub fn start_time(&self) -> f64 {
        self.t0
    }

    pub fn time(&self, layer: usize) -> f64 {
        self.t0 + layer as f64 * self.grid.dt
    }

    pub fn layer_count(&self) -> usize {
        self.values.len()
    }

    pub fn layer(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn value(&self, layer: usize, node: usize) -> f64 {
        self.values[layer][node]
    }

    /// Overwrites one value; used to inject faults in tests.
    pub fn set_value(&mut self, layer: usize, node: usize, v: f64) {
        self.values[layer][node] = v;
    }

    /// Value at the node nearest to `p`.
    pub fn value_at(&self, p: &NetworkPoint, layer: usize) -> f64 {
        self.values[layer][self.nodes.snap(p)]
    }

    /// `u` along `arc` at one layer, vertex ends included.
    pub fn arc_profile(&self, arc: ArcId, layer: usize) -> Vec<f64> {
        (0..self.nodes.n_s)
            .map(|i| self.values[layer][self.nodes.global(arc.0, i)])
            .collect()
    }

    pub fn links(&self) -> Option<&[Vec<Link>]> {
        self.links.as_deref()
    }

    /// CSV table `arc,s,t,u`, one row per arc node and layer.
    pub fn to_table(&self, net: &Network) -> String {
        let mut out = String::from("arc,s,t,u\n");
        for k in 0..self.values.len() {
            let t = fmt_sig(self.time(k));
            for (a, arc) in net.arcs().iter().enumerate() {
                for i in 0..self.nodes.n_s {
                    let u = self.values[k][self.nodes.global(a, i)];
                    out.push_str(arc.id());
                    out.push(',');
                    out.push_str(&fmt_sig(self.grid.param(i)));
                    out.push(',');
                    out.push_str(&t);
                    out.push(',');
                    out.push_str(&fmt_sig(u));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Twelve significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{:.11e}", x)
    }
}

/// Result of a minimal-action query.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalAction {
    pub value: f64,
    pub curve: NetworkCurve,
    /// Lattice points actually used for the endpoints.
    pub source: NetworkPoint,
    pub target: NetworkPoint,
    pub duration: f64,
}

/// A discretized problem ready to run: lattice, node layout and cost tables.
pub struct Solver<'a> {
    nl: &'a NetworkLagrangian,
    grid: Grid,
    nodes: NodeMap,
    scheme: Scheme,
    sl: Option<SlTables>,
    graph: Option<GraphTables>,
}

impl<'a> Solver<'a> {
    pub fn new(nl: &'a NetworkLagrangian, grid: Grid, scheme: Scheme) -> Result<Self, SolverError> {
        let nodes = NodeMap::new(nl.network(), grid.n_s());
        let (sl, graph) = match scheme {
            Scheme::SemiLagrangian => (Some(SlTables::build(nl, &grid)?), None),
            Scheme::Graph => (None, Some(GraphTables::build(nl, &grid)?)),
        };
        log::debug!(
            "{scheme} solver: {} nodes, {} layers, reach {}, span {}",
            nodes.len(),
            grid.layers(),
            grid.reach(),
            grid.span()
        );
        Ok(Solver {
            nl,
            grid,
            nodes,
            scheme,
            sl,
            graph,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &NodeMap {
        &self.nodes
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn lagrangian(&self) -> &NetworkLagrangian {
        self.nl
    }

    /// Samples an initial datum given per arc, checking vertex agreement.
    pub fn datum_layer(&self, u0: &dyn Fn(ArcId, f64) -> f64) -> Result<Vec<f64>, SolverError> {
        let net = self.nl.network();
        let n_s = self.grid.n_s();
        let mut layer = vec![f64::NAN; self.nodes.len()];
        for a in 0..net.arcs().len() {
            for i in 1..n_s - 1 {
                layer[self.nodes.global(a, i)] = u0(ArcId(a), self.grid.param(i));
            }
        }
        for v in net.vertex_ids() {
            let readings: Vec<f64> = net
                .arrivals(v)
                .iter()
                .map(|arr| u0(arr.arc, arr.end.param()))
                .collect();
            let lo = readings.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = readings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > DATUM_TOL {
                return Err(SolverError::InconsistentDatum {
                    vertex: net.vertex(v).id.clone(),
                    gap: hi - lo,
                });
            }
            layer[v.0] = readings[0];
        }
        Ok(layer)
    }

    /// `u(x, t) = inf { ∫ L + u0(ξ(0)) }` on every lattice node and layer.
    pub fn lax_oleinik(&self, u0: &dyn Fn(ArcId, f64) -> f64) -> Result<ValueGrid, SolverError> {
        let init = self.datum_layer(u0)?;
        Ok(self.propagate(init, self.grid.layers(), 0.0))
    }

    /// Runs the scheme from an arbitrary first layer.
    pub fn propagate(&self, init: Vec<f64>, layers: usize, t0: f64) -> ValueGrid {
        let mut values = Vec::with_capacity(layers + 1);
        values.push(init);
        let mut links = self.graph.as_ref().map(|_| {
            let mut l = Vec::with_capacity(layers + 1);
            l.push((0..self.nodes.len()).map(Link::stay).collect::<Vec<_>>());
            l
        });
        for k in 1..=layers {
            let (next, step_links) = self.step(&values, k);
            values.push(next);
            if let (Some(all), Some(sl)) = (links.as_mut(), step_links) {
                all.push(sl);
            }
        }
        ValueGrid {
            grid: self.grid.with_layers(layers),
            nodes: self.nodes.clone(),
            scheme: self.scheme,
            limiter: self.nl.limiter().clone(),
            t0,
            values,
            links,
        }
    }

    /// Layer `k` from layers `0..k`.
    pub fn step(&self, history: &[Vec<f64>], k: usize) -> (Vec<f64>, Option<Vec<Link>>) {
        let n = self.nodes.len();
        match (&self.sl, &self.graph) {
            (Some(sl), _) => {
                let prev = &history[k - 1];
                let next = (0..n)
                    .into_par_iter()
                    .map(|node| sl.update(self, prev, node))
                    .collect();
                (next, None)
            }
            (None, Some(g)) => {
                let (next, links): (Vec<f64>, Vec<Link>) = (0..n)
                    .into_par_iter()
                    .map(|node| g.update(self, history, k, node))
                    .unzip();
                (next, Some(links))
            }
            (None, None) => unreachable!("solver always holds one table set"),
        }
    }

    /// Largest `|u_k - step(u_0..u_{k-1})|` over all layers; zero when the
    /// grid is a fixed point of the recursion.
    pub fn dpp_defect(&self, vg: &ValueGrid) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..vg.values.len() {
            let (again, _) = self.step(&vg.values[..k], k);
            for (a, b) in again.iter().zip(&vg.values[k]) {
                let d = if a == b { 0.0 } else { (a - b).abs() };
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
        worst
    }

    /// Point-source run: `S(x, 0, ·, k dt)` for `k ≤ layers`.
    pub fn source_run(&self, x: &NetworkPoint, layers: usize) -> ValueGrid {
        let mut init = vec![f64::INFINITY; self.nodes.len()];
        init[self.nodes.snap(x)] = 0.0;
        self.propagate(init, layers, 0.0)
    }

    fn layers_between(&self, t: f64, r: f64) -> Result<usize, SolverError> {
        if !(r > t) {
            return Err(SolverError::BadHorizon { t, r });
        }
        let k = ((r - t) / self.grid.dt()).round() as usize;
        if k == 0 {
            return Err(SolverError::BadGrid(format!(
                "duration {} is shorter than half a time step",
                r - t
            )));
        }
        Ok(k)
    }

    /// `S(x, t, y, r)` and a minimizing curve. Needs the graph scheme.
    pub fn minimal_action(
        &self,
        x: &NetworkPoint,
        t: f64,
        y: &NetworkPoint,
        r: f64,
    ) -> Result<MinimalAction, SolverError> {
        if self.scheme != Scheme::Graph {
            return Err(SolverError::UnsupportedScheme("graph"));
        }
        let k = self.layers_between(t, r)?;
        let run = self.source_run(x, k);
        let target = self.nodes.snap(y);
        let value = run.value(k, target);
        if !value.is_finite() {
            return Err(SolverError::Unreachable);
        }
        let curve = self.minimizer(&run, target, k)?.shifted(t);
        Ok(MinimalAction {
            value,
            curve,
            source: self.nodes.point(self.nodes.snap(x)),
            target: self.nodes.point(target),
            duration: k as f64 * self.grid.dt(),
        })
    }

    /// Backtracks the links of a graph-scheme grid from `(node, layer)`.
    pub fn minimizer(
        &self,
        vg: &ValueGrid,
        node: usize,
        layer: usize,
    ) -> Result<NetworkCurve, SolverError> {
        let links = vg.links().ok_or(SolverError::UnsupportedScheme("graph"))?;
        if !vg.value(layer, node).is_finite() {
            return Err(SolverError::Unreachable);
        }
        let net = self.nl.network();
        let mut edges = Vec::new();
        let (mut n, mut k) = (node, layer);
        while k > 0 {
            let link = links[k][n];
            let h = link.span as usize;
            edges.push((link, n, k));
            n = link.pred as usize;
            k -= h;
        }
        edges.reverse();
        let dt = self.grid.dt();
        let mut pieces = Vec::with_capacity(edges.len().max(1));
        for (link, to, k) in edges {
            let (t0, t1) = (vg.time(k - link.span as usize), vg.time(k));
            let piece = if link.is_stay() {
                match self.nodes.location(to) {
                    NodeLocation::Vertex(v) => Piece::Dwell {
                        vertex: v,
                        start: t0,
                        end: t1,
                    },
                    NodeLocation::Interior { arc, index } => {
                        let s = self.grid.param(index);
                        Piece::Move {
                            arc,
                            knots: vec![(t0, s), (t1, s)],
                        }
                    }
                }
            } else {
                let arc = link.arc as usize;
                let from = self
                    .nodes
                    .index_on(link.pred as usize, arc)
                    .expect("edge on arc");
                let dest = self.nodes.index_on(to, arc).expect("edge on arc");
                Piece::Move {
                    arc: ArcId(arc),
                    knots: vec![(t0, self.grid.param(from)), (t1, self.grid.param(dest))],
                }
            };
            pieces.push(piece);
        }
        if pieces.is_empty() {
            let t = vg.time(layer);
            pieces.push(match self.nodes.location(node) {
                NodeLocation::Vertex(v) => Piece::Dwell {
                    vertex: v,
                    start: t,
                    end: t + dt,
                },
                NodeLocation::Interior { arc, index } => Piece::Move {
                    arc,
                    knots: vec![
                        (t, self.grid.param(index)),
                        (t + dt, self.grid.param(index)),
                    ],
                },
            });
        }
        Ok(NetworkCurve::new(net, pieces)?)
    }
}

/// Convenience wrapper building a graph solver for one query.
pub fn minimal_action(
    nl: &NetworkLagrangian,
    grid: Grid,
    x: &NetworkPoint,
    t: f64,
    y: &NetworkPoint,
    r: f64,
) -> Result<MinimalAction, SolverError> {
    Solver::new(nl, grid, Scheme::Graph)?.minimal_action(x, t, y, r)
}

/// Convenience wrapper for [`Solver::lax_oleinik`].
pub fn lax_oleinik(
    nl: &NetworkLagrangian,
    grid: Grid,
    scheme: Scheme,
    u0: &dyn Fn(ArcId, f64) -> f64,
) -> Result<ValueGrid, SolverError> {
    Solver::new(nl, grid, scheme)?.lax_oleinik(u0)
}

/// Observed order `log2(|e_coarse| / |e_fine|)` from two errors at a 2x
/// refinement.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse.abs() / fine.abs()).log2()
}

/// Richardson estimate of the order from values on three 2x-refined grids.
pub fn richardson_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).abs().log2()
}
