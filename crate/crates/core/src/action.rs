//! The Lagrangian on the tangent bundle of the network, network curves and
//! their action.

use std::fmt::Write as _;

use crate::error::{ActionError, HamiltonianError};
use crate::hamiltonian::{
    critical_constant, legendre, legendre_argmax, modified_lagrangian, stationary_solution,
    validate_flux_limiter, FluxLimiter, HamiltonianRef, StationarySolution, DEFAULT_S_NODES,
};
use crate::network::{pullback, ArcId, End, Network, NetworkPoint, VertexId, PARAM_EPS};

const TIME_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct NetworkLagrangian {
    net: Network,
    hams: Vec<HamiltonianRef>,
    limiter: FluxLimiter,
    m_l: f64,
    big_m: f64,
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const G: f64 = 0.618_033_988_749_894_8;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

impl NetworkLagrangian {
    /// Validates the limiter against the critical constants and precomputes
    /// `m_L` and `M`.
    pub fn new(
        net: Network,
        hams: Vec<HamiltonianRef>,
        limiter: FluxLimiter,
    ) -> Result<Self, ActionError> {
        validate_flux_limiter(&net, &hams, &limiter)?;
        let n = DEFAULT_S_NODES;
        let grid = |i: usize| i as f64 / (n - 1) as f64;

        let mut m_l = limiter
            .values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let mut big_m = f64::NEG_INFINITY;
        for h in &hams {
            // min over λ of L(s, λ) is -H(s, 0)
            let floor = |s: f64| -h.eval(s, 0.0);
            let (k, _) =
                (0..n)
                    .map(|i| (i, floor(grid(i))))
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                    );
            let lo = grid(k.saturating_sub(1));
            let hi = grid((k + 1).min(n - 1));
            let (_, refined) = golden_min(floor, lo, hi);
            m_l = m_l.min(refined).min(floor(grid(k)));
            for i in 0..n {
                for lambda in [1.0, -1.0] {
                    big_m = big_m.max(legendre(h.as_ref(), grid(i), lambda)?);
                }
            }
        }
        Ok(NetworkLagrangian {
            net,
            hams,
            limiter,
            m_l,
            big_m,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn hamiltonians(&self) -> &[HamiltonianRef] {
        &self.hams
    }

    pub fn hamiltonian(&self, arc: ArcId) -> &HamiltonianRef {
        &self.hams[arc.0]
    }

    pub fn limiter(&self) -> &FluxLimiter {
        &self.limiter
    }

    pub fn limiter_at(&self, x: VertexId) -> f64 {
        self.limiter.get(x)
    }

    /// `m_L`, the minimum of `L` over the tangent bundle.
    pub fn min_value(&self) -> f64 {
        self.m_l
    }

    /// `M = max L_γ(s, ±1)` over arcs and parameters.
    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    /// `ℓ = 2M/m`.
    pub fn ell(&self) -> f64 {
        2.0 * self.big_m / self.net.min_speed()
    }

    /// `2 (M - c_x)⁺ / m`, the constant the excursion estimate supports
    /// for any sign of `c_x`.
    pub fn robust_ell(&self, x: VertexId) -> f64 {
        2.0 * (self.big_m - self.limiter.get(x)).max(0.0) / self.net.min_speed()
    }

    pub fn arc_lagrangian(&self, arc: ArcId, s: f64, lambda: f64) -> Result<f64, HamiltonianError> {
        legendre(self.hams[arc.0].as_ref(), s, lambda)
    }

    /// `L̄_γ` with the limiters at the ends of `arc`.
    pub fn modified(&self, arc: ArcId, s: f64, lambda: f64) -> Result<f64, HamiltonianError> {
        let a = self.net.arc(arc);
        modified_lagrangian(
            self.hams[arc.0].as_ref(),
            self.limiter.get(a.tail()),
            self.limiter.get(a.head()),
            s,
            lambda,
        )
    }

    /// `L(x, q)` for a point of the network and a vector of `R^N`.
    pub fn eval(&self, x: &NetworkPoint, q: &[f64]) -> Result<f64, ActionError> {
        let not_tangent = || ActionError::NotInTangentBundle {
            point: x.to_string(),
        };
        match *x {
            NetworkPoint::OnArc { arc, s } => {
                let lambda = pullback(self.net.arc(arc), s, q).ok_or_else(not_tangent)?;
                Ok(self.arc_lagrangian(arc, s, lambda)?)
            }
            NetworkPoint::Vertex(v) => {
                if q.iter().all(|c| c.abs() <= 1e-300) {
                    return Ok(self.limiter.get(v));
                }
                let mut best: Option<f64> = None;
                for arr in self.net.arrivals(v) {
                    let a = self.net.arc(arr.arc);
                    let s = arr.end.param();
                    if let Some(lambda) = pullback(a, s, q) {
                        let value = self.arc_lagrangian(arr.arc, s, lambda)?;
                        best = Some(best.map_or(value, |b: f64| b.min(value)));
                    }
                }
                best.ok_or_else(not_tangent)
            }
        }
    }

    /// Samples `θ̂(r) = min { L(x, q) : |q| = r }` over arcs and vertices.
    pub fn coercivity_envelope(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>, ActionError> {
        let n = 65;
        radii
            .iter()
            .map(|&r| {
                let mut lowest = f64::INFINITY;
                for (k, a) in self.net.arcs().iter().enumerate() {
                    for i in 0..n {
                        let s = i as f64 / (n - 1) as f64;
                        let speed = a.tangent(s).iter().map(|x| x * x).sum::<f64>().sqrt();
                        for sign in [1.0, -1.0] {
                            let v = self.arc_lagrangian(ArcId(k), s, sign * r / speed)?;
                            lowest = lowest.min(v);
                        }
                    }
                }
                if r == 0.0 {
                    for &c in self.limiter.values() {
                        lowest = lowest.min(c);
                    }
                }
                Ok((r, lowest))
            })
            .collect()
    }
}

/// One piece of a network curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    /// Motion on one arc; knots are `(t, s)` pairs with increasing `t`, the
    /// parameter being linear in time between knots.
    Move { arc: ArcId, knots: Vec<(f64, f64)> },
    Dwell {
        vertex: VertexId,
        start: f64,
        end: f64,
    },
}

impl Piece {
    pub fn start_time(&self) -> f64 {
        match self {
            Piece::Move { knots, .. } => knots[0].0,
            Piece::Dwell { start, .. } => *start,
        }
    }

    pub fn end_time(&self) -> f64 {
        match self {
            Piece::Move { knots, .. } => knots[knots.len() - 1].0,
            Piece::Dwell { end, .. } => *end,
        }
    }

    fn start_point(&self, net: &Network) -> NetworkPoint {
        match self {
            Piece::Move { arc, knots } => canonical(net, *arc, knots[0].1),
            Piece::Dwell { vertex, .. } => NetworkPoint::Vertex(*vertex),
        }
    }

    fn end_point(&self, net: &Network) -> NetworkPoint {
        match self {
            Piece::Move { arc, knots } => canonical(net, *arc, knots[knots.len() - 1].1),
            Piece::Dwell { vertex, .. } => NetworkPoint::Vertex(*vertex),
        }
    }
}

fn canonical(net: &Network, arc: ArcId, s: f64) -> NetworkPoint {
    net.point(arc, s.clamp(0.0, 1.0))
        .expect("validated parameter")
}

fn at_vertex(s: f64) -> bool {
    s <= PARAM_EPS || s >= 1.0 - PARAM_EPS
}

/// A continuous curve on the network made of moves and vertex dwells.
///
/// Construction normalizes the pieces: moves are split wherever they touch a
/// vertex, moves sitting on a vertex become dwells, and neighbouring pieces
/// of the same kind on the same arc or vertex are merged. After that every
/// piece boundary is a vertex time.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkCurve {
    pieces: Vec<Piece>,
}

impl NetworkCurve {
    pub fn new(net: &Network, pieces: Vec<Piece>) -> Result<Self, ActionError> {
        if pieces.is_empty() {
            return Err(ActionError::OffNetwork("curve has no pieces".into()));
        }
        for p in &pieces {
            match p {
                Piece::Move { arc, knots } => {
                    if arc.0 >= net.arcs().len() {
                        return Err(ActionError::OffNetwork(format!("unknown arc #{}", arc.0)));
                    }
                    if knots.len() < 2 {
                        return Err(ActionError::OffNetwork("move needs two knots".into()));
                    }
                    for w in knots.windows(2) {
                        if !(w[1].0 > w[0].0) {
                            return Err(ActionError::Discontinuous(w[1].0));
                        }
                    }
                    if let Some(&(_, s)) = knots
                        .iter()
                        .find(|(_, s)| !(-PARAM_EPS..=1.0 + PARAM_EPS).contains(s))
                    {
                        return Err(ActionError::OffNetwork(format!(
                            "parameter {s} outside [0, 1] on arc #{}",
                            arc.0
                        )));
                    }
                }
                Piece::Dwell { vertex, start, end } => {
                    if vertex.0 >= net.vertices().len() {
                        return Err(ActionError::OffNetwork(format!(
                            "unknown vertex #{}",
                            vertex.0
                        )));
                    }
                    if !(end >= start) {
                        return Err(ActionError::Discontinuous(*start));
                    }
                }
            }
        }
        for w in pieces.windows(2) {
            let t = w[0].end_time();
            if (w[1].start_time() - t).abs() > TIME_EPS * (1.0 + t.abs())
                || w[0].end_point(net) != w[1].start_point(net)
            {
                return Err(ActionError::Discontinuous(t));
            }
        }
        Ok(NetworkCurve {
            pieces: normalize(net, pieces),
        })
    }

    /// Stays at `x` during `[start, end]`.
    pub fn dwell(net: &Network, x: VertexId, start: f64, end: f64) -> Result<Self, ActionError> {
        Self::new(
            net,
            vec![Piece::Dwell {
                vertex: x,
                start,
                end,
            }],
        )
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn start_time(&self) -> f64 {
        self.pieces[0].start_time()
    }

    pub fn end_time(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].end_time()
    }

    pub fn start(&self, net: &Network) -> NetworkPoint {
        self.pieces[0].start_point(net)
    }

    pub fn end(&self, net: &Network) -> NetworkPoint {
        self.pieces[self.pieces.len() - 1].end_point(net)
    }

    /// Position at time `t`, clamped to the time span.
    pub fn point_at(&self, net: &Network, t: f64) -> NetworkPoint {
        let t = t.clamp(self.start_time(), self.end_time());
        let piece = self
            .pieces
            .iter()
            .find(|p| t <= p.end_time())
            .unwrap_or(&self.pieces[self.pieces.len() - 1]);
        match piece {
            Piece::Dwell { vertex, .. } => NetworkPoint::Vertex(*vertex),
            Piece::Move { arc, knots } => {
                let k = knots
                    .windows(2)
                    .position(|w| t <= w[1].0)
                    .unwrap_or(knots.len() - 2);
                let (t0, s0) = knots[k];
                let (t1, s1) = knots[k + 1];
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                canonical(net, *arc, s0 + w * (s1 - s0))
            }
        }
    }

    /// Every knot and dwell boundary time.
    pub fn time_nodes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Move { knots, .. } => out.extend(knots.iter().map(|k| k.0)),
                Piece::Dwell { start, end, .. } => out.extend([*start, *end]),
            }
        }
        out.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);
        out
    }

    /// Largest time step between knots.
    pub fn max_step(&self) -> f64 {
        self.time_nodes()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Largest `|Δs/Δt|` over all move steps.
    pub fn max_parameter_speed(&self) -> f64 {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Move { knots, .. } => Some(
                    knots
                        .windows(2)
                        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                        .fold(0.0, f64::max),
                ),
                Piece::Dwell { .. } => None,
            })
            .fold(0.0, f64::max)
    }

    /// Times `t_1 < … < t_m` of the partition: the ends and every piece
    /// boundary.
    pub fn partition(&self) -> Vec<f64> {
        let mut out = vec![self.start_time()];
        out.extend(self.pieces.iter().map(Piece::end_time));
        out
    }

    /// Vertices visited, in order of first visit.
    pub fn vertices_visited(&self, net: &Network) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut push = |p: NetworkPoint| {
            if let Some(v) = p.vertex() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        for p in &self.pieces {
            push(p.start_point(net));
            push(p.end_point(net));
        }
        out
    }

    /// No move piece leaves a vertex and returns to it without meeting
    /// another vertex.
    pub fn is_admissible(&self, net: &Network) -> bool {
        self.pieces.iter().all(|p| match p {
            Piece::Move { .. } => {
                let (a, b) = (p.start_point(net), p.end_point(net));
                !(a.is_vertex() && a == b)
            }
            Piece::Dwell { .. } => true,
        })
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, net: &Network, other: &NetworkCurve) -> Result<Self, ActionError> {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self::new(net, pieces)
    }

    /// Shifts every time by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Move { arc, knots } => Piece::Move {
                    arc: *arc,
                    knots: knots.iter().map(|&(t, s)| (t + dt, s)).collect(),
                },
                Piece::Dwell { vertex, start, end } => Piece::Dwell {
                    vertex: *vertex,
                    start: start + dt,
                    end: end + dt,
                },
            })
            .collect();
        NetworkCurve { pieces }
    }

    /// Text form: `start <t0>` followed by one `move` or `dwell` line per
    /// piece.
    pub fn to_text(&self, net: &Network) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "start {}", fmt12(self.start_time()));
        for p in &self.pieces {
            match p {
                Piece::Move { arc, knots } => {
                    let _ = write!(out, "move {}", net.arc(*arc).id());
                    for (t, s) in knots {
                        let _ = write!(out, " {} {}", fmt12(*t), fmt12(*s));
                    }
                    out.push('\n');
                }
                Piece::Dwell { vertex, start, end } => {
                    let _ = writeln!(
                        out,
                        "dwell {} {}",
                        net.vertex(*vertex).id,
                        fmt12(end - start)
                    );
                }
            }
        }
        out
    }

    /// Parses the format written by [`NetworkCurve::to_text`].
    pub fn parse(net: &Network, text: &str) -> Result<Self, ActionError> {
        let bad = |line: usize, msg: &str| ActionError::OffNetwork(format!("line {line}: {msg}"));
        let mut pieces = Vec::new();
        let mut clock: Option<f64> = None;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let mut words = line.split_whitespace();
            let Some(head) = words.next() else { continue };
            let nums = |words: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>, ActionError> {
                words
                    .map(|w| w.parse::<f64>().map_err(|_| bad(line_no, "bad number")))
                    .collect()
            };
            match head {
                "curve" | "#" => {}
                "start" => {
                    let v = nums(words)?;
                    clock = Some(*v.first().ok_or_else(|| bad(line_no, "missing time"))?);
                }
                "move" => {
                    let name = words.next().ok_or_else(|| bad(line_no, "missing arc"))?;
                    let arc = net.arc_by_name(name)?;
                    let v = nums(words)?;
                    if v.len() < 4 || v.len() % 2 != 0 {
                        return Err(bad(line_no, "move needs (t, s) pairs"));
                    }
                    let knots: Vec<(f64, f64)> = v.chunks(2).map(|c| (c[0], c[1])).collect();
                    clock = Some(knots[knots.len() - 1].0);
                    pieces.push(Piece::Move { arc, knots });
                }
                "dwell" => {
                    let name = words.next().ok_or_else(|| bad(line_no, "missing vertex"))?;
                    let vertex = net
                        .vertex_by_name(name)
                        .ok_or_else(|| bad(line_no, "unknown vertex"))?;
                    let v = nums(words)?;
                    let start = clock.ok_or_else(|| bad(line_no, "dwell before start"))?;
                    let end = start + *v.first().ok_or_else(|| bad(line_no, "missing duration"))?;
                    clock = Some(end);
                    pieces.push(Piece::Dwell { vertex, start, end });
                }
                other => return Err(bad(line_no, &format!("unknown record `{other}`"))),
            }
        }
        Self::new(net, pieces)
    }
}

pub(crate) fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.11e}", x);
    // drop trailing zeros of the mantissa, then reparse to a short decimal
    let v: f64 = s.parse().unwrap_or(x);
    let plain = format!("{}", v);
    if plain.len() <= 20 {
        plain
    } else {
        s
    }
}

fn normalize(net: &Network, pieces: Vec<Piece>) -> Vec<Piece> {
    // split moves at vertex knots and turn vertex-constant steps into dwells
    let mut split: Vec<Piece> = Vec::new();
    for p in pieces {
        match p {
            Piece::Move { arc, knots } => {
                let snap = |s: f64| {
                    if s <= PARAM_EPS {
                        0.0
                    } else if s >= 1.0 - PARAM_EPS {
                        1.0
                    } else {
                        s
                    }
                };
                let knots: Vec<(f64, f64)> = knots.into_iter().map(|(t, s)| (t, snap(s))).collect();
                let mut current = vec![knots[0]];
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if at_vertex(a.1) && a.1 == b.1 {
                        if current.len() >= 2 {
                            split.push(Piece::Move {
                                arc,
                                knots: std::mem::take(&mut current),
                            });
                        }
                        split.push(Piece::Dwell {
                            vertex: if a.1 == 0.0 {
                                net.arc(arc).tail()
                            } else {
                                net.arc(arc).head()
                            },
                            start: a.0,
                            end: b.0,
                        });
                        current = vec![b];
                        continue;
                    }
                    current.push(b);
                    if at_vertex(b.1) {
                        split.push(Piece::Move {
                            arc,
                            knots: std::mem::take(&mut current),
                        });
                        current = vec![b];
                    }
                }
                if current.len() >= 2 {
                    split.push(Piece::Move {
                        arc,
                        knots: current,
                    });
                }
            }
            dwell => split.push(dwell),
        }
    }
    let mut merged: Vec<Piece> = Vec::new();
    for p in split {
        if p.end_time() - p.start_time() <= 0.0 && !merged.is_empty() {
            continue;
        }
        match (merged.last_mut(), p) {
            (
                Some(Piece::Dwell {
                    vertex: v0, end, ..
                }),
                Piece::Dwell {
                    vertex: v1,
                    end: e1,
                    ..
                },
            ) if *v0 == v1 => *end = e1,
            (Some(Piece::Move { arc: a0, knots: k0 }), Piece::Move { arc: a1, knots: k1 })
                if *a0 == a1 && !at_vertex(k1[0].1) =>
            {
                k0.extend_from_slice(&k1[1..]);
            }
            (_, p) => merged.push(p),
        }
    }
    merged
}

/// Action of a curve: midpoint rule per move step plus `c_x` times each
/// dwell duration.
pub fn action(nl: &NetworkLagrangian, curve: &NetworkCurve) -> Result<f64, ActionError> {
    let mut total = 0.0;
    for p in &curve.pieces {
        total += piece_action(nl, p)?;
    }
    Ok(total)
}

fn piece_action(nl: &NetworkLagrangian, p: &Piece) -> Result<f64, ActionError> {
    Ok(match p {
        Piece::Dwell { vertex, start, end } => nl.limiter_at(*vertex) * (end - start),
        Piece::Move { arc, knots } => {
            let mut sum = 0.0;
            for w in knots.windows(2) {
                let dt = w[1].0 - w[0].0;
                let mid = 0.5 * (w[0].1 + w[1].1);
                sum += dt * nl.arc_lagrangian(*arc, mid, (w[1].1 - w[0].1) / dt)?;
            }
            sum
        }
    })
}

/// Replaces every excursion leaving a vertex and returning to it without
/// meeting another vertex by a dwell at that vertex.
pub fn make_admissible(
    nl: &NetworkLagrangian,
    curve: &NetworkCurve,
) -> Result<NetworkCurve, ActionError> {
    let net = nl.network();
    let pieces = curve
        .pieces
        .iter()
        .map(|p| match p {
            Piece::Move { .. } => {
                let (a, b) = (p.start_point(net), p.end_point(net));
                match (a.vertex(), a == b) {
                    (Some(x), true) => Piece::Dwell {
                        vertex: x,
                        start: p.start_time(),
                        end: p.end_time(),
                    },
                    _ => p.clone(),
                }
            }
            dwell => dwell.clone(),
        })
        .collect();
    NetworkCurve::new(net, pieces)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemarkCheck {
    /// Sample times where `ξ_ad` is off the vertices but differs from `ξ`.
    pub off_vertex_mismatches: usize,
    /// Sample times where `ξ` is on a vertex but `ξ_ad` differs.
    pub on_vertex_mismatches: usize,
    /// Partition times of `ξ_ad` where the curves differ.
    pub partition_mismatches: usize,
    pub samples: usize,
}

impl RemarkCheck {
    pub fn passed(&self) -> bool {
        self.off_vertex_mismatches == 0
            && self.on_vertex_mismatches == 0
            && self.partition_mismatches == 0
    }
}

fn same_point(net: &Network, a: &NetworkPoint, b: &NetworkPoint) -> bool {
    match (a, b) {
        (NetworkPoint::Vertex(x), NetworkPoint::Vertex(y)) => x == y,
        (NetworkPoint::OnArc { arc: a0, s: s0 }, NetworkPoint::OnArc { arc: a1, s: s1 }) => {
            a0 == a1 && (s0 - s1).abs() <= 1e-9
        }
        _ => {
            let (pa, pb) = (net.position(a), net.position(b));
            pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() <= 1e-9)
        }
    }
}

/// Pointwise comparison of `ξ` and `ξ_ad` on the union of their time
/// nodes, midpoints and `samples` uniform times.
pub fn check_reduction_properties(
    net: &Network,
    original: &NetworkCurve,
    reduced: &NetworkCurve,
    samples: usize,
) -> RemarkCheck {
    let mut times = original.time_nodes();
    times.extend(reduced.time_nodes());
    let (t0, t1) = (original.start_time(), original.end_time());
    times.extend((0..=samples).map(|k| t0 + (t1 - t0) * k as f64 / samples.max(1) as f64));
    times.sort_by(f64::total_cmp);
    let mids: Vec<f64> = times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    times.extend(mids);

    let mut check = RemarkCheck {
        off_vertex_mismatches: 0,
        on_vertex_mismatches: 0,
        partition_mismatches: 0,
        samples: times.len(),
    };
    for &t in &times {
        let (x, z) = (original.point_at(net, t), reduced.point_at(net, t));
        let same = same_point(net, &x, &z);
        if !z.is_vertex() && !same {
            check.off_vertex_mismatches += 1;
        }
        if x.is_vertex() && !same {
            check.on_vertex_mismatches += 1;
        }
    }
    for t in reduced.partition() {
        let (x, z) = (original.point_at(net, t), reduced.point_at(net, t));
        if !same_point(net, &x, &z) {
            check.partition_mismatches += 1;
        }
    }
    check
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopBoundReport {
    pub integral: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub margin: f64,
    pub passed: bool,
    /// Stationary solution at level `-(c_tail ∧ c_head)` whose increments
    /// certify the bound.
    pub certificate: StationarySolution,
    /// `Σ [U(η_{k+1}) - U(η_k)] + (c_tail ∧ c_head)(b - a)`.
    pub certificate_bound: f64,
}

/// Checks `∫ L̄_γ(η, η̇) ≥ (c_tail ∧ c_head)(b - a)` for a closed parameter
/// curve given as `(t, s)` knots.
pub fn check_loop_lower_bound(
    nl: &NetworkLagrangian,
    arc: ArcId,
    eta: &[(f64, f64)],
) -> Result<LoopBoundReport, ActionError> {
    if eta.len() < 2 {
        return Err(ActionError::PreconditionViolated(
            "loop needs two knots".into(),
        ));
    }
    if eta.iter().any(|&(_, s)| !(0.0..=1.0).contains(&s)) {
        return Err(ActionError::OffNetwork("loop leaves [0, 1]".into()));
    }
    let (first, last) = (eta[0], eta[eta.len() - 1]);
    if (first.1 - last.1).abs() > PARAM_EPS {
        return Err(ActionError::PreconditionViolated(
            "loop must start and end at the same parameter".into(),
        ));
    }
    let a = nl.network().arc(arc);
    let c = nl.limiter_at(a.tail()).min(nl.limiter_at(a.head()));
    let h = nl.hamiltonian(arc);
    let duration = last.0 - first.0;
    let mut integral = 0.0;
    let mut max_dt: f64 = 0.0;
    for w in eta.windows(2) {
        let dt = w[1].0 - w[0].0;
        if !(dt > 0.0) {
            return Err(ActionError::Discontinuous(w[1].0));
        }
        max_dt = max_dt.max(dt);
        let mid = 0.5 * (w[0].1 + w[1].1);
        integral += dt * nl.modified(arc, mid, (w[1].1 - w[0].1) / dt)?;
    }
    let level = -c;
    // the level can sit a hair below -c_γ after rounding
    let floor = -critical_constant(h.as_ref())?.value;
    let certificate = stationary_solution(h.as_ref(), level.max(floor), DEFAULT_S_NODES)?;
    let increments: f64 = eta
        .windows(2)
        .map(|w| certificate.value(w[1].1) - certificate.value(w[0].1))
        .sum();
    let bound = c * duration;
    let tolerance = 1e-9 + 1e-6 * max_dt * duration;
    let margin = integral - bound;
    Ok(LoopBoundReport {
        integral,
        bound,
        tolerance,
        margin,
        passed: margin >= -tolerance,
        certificate,
        certificate_bound: increments + bound,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionReport {
    pub vertex: VertexId,
    pub action: f64,
    pub distance: f64,
    pub ell: f64,
    /// `c_x (b - a) - ℓ d`.
    pub bound: f64,
    pub robust_ell: f64,
    pub robust_bound: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub robust_passed: bool,
}

/// Checks the lower bound for admissible curves meeting at most one vertex.
pub fn check_excursion_bound(
    nl: &NetworkLagrangian,
    curve: &NetworkCurve,
) -> Result<ExcursionReport, ActionError> {
    let net = nl.network();
    if !curve.is_admissible(net) {
        return Err(ActionError::PreconditionViolated(
            "curve is not admissible".into(),
        ));
    }
    let visited = curve.vertices_visited(net);
    if visited.len() > 1 {
        return Err(ActionError::PreconditionViolated(format!(
            "curve meets {} vertices",
            visited.len()
        )));
    }
    let candidates: Vec<VertexId> = match visited.first() {
        Some(&x) => vec![x],
        None => match &curve.pieces[0] {
            Piece::Move { arc, .. } => {
                let a = net.arc(*arc);
                vec![a.tail(), a.head()]
            }
            Piece::Dwell { vertex, .. } => vec![*vertex],
        },
    };
    let value = action(nl, curve)?;
    let duration = curve.end_time() - curve.start_time();
    let (start, end) = (curve.start(net), curve.end(net));
    let tolerance = 1e-9 + 1e-6 * curve.max_step() * duration;
    let ell = nl.ell();
    let mut best: Option<ExcursionReport> = None;
    for x in candidates {
        let xp = NetworkPoint::Vertex(x);
        let d = net.distance(&xp, &start).max(net.distance(&xp, &end));
        let c = nl.limiter_at(x);
        let bound = c * duration - ell * d;
        let robust_ell = nl.robust_ell(x);
        let robust_bound = c * duration - robust_ell * d;
        let report = ExcursionReport {
            vertex: x,
            action: value,
            distance: d,
            ell,
            bound,
            robust_ell,
            robust_bound,
            tolerance,
            passed: value >= bound - tolerance,
            robust_passed: value >= robust_bound - tolerance,
        };
        if best.as_ref().is_none_or(|b| report.bound < b.bound) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one candidate vertex"))
}

/// Minimum of `μ ↦ H(s, μ)`, exposed for diagnostics.
pub fn hamiltonian_floor(h: &HamiltonianRef, s: f64) -> Result<(f64, f64), HamiltonianError> {
    let c = legendre_argmax(h.as_ref(), s, 0.0)?;
    Ok((c.maximizer, -c.value))
}

/// The end of `arc` lying at `x`, if any.
pub fn end_at(net: &Network, arc: ArcId, x: VertexId) -> Option<End> {
    let a = net.arc(arc);
    if a.tail() == x {
        Some(End::Tail)
    } else if a.head() == x {
        Some(End::Head)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{FnHamiltonian, PowerHamiltonian};
    use crate::network::{ArcSpec, VertexSpec};
    use std::sync::Arc as Shared;

    fn vs(id: &str, p: &[f64]) -> VertexSpec {
        VertexSpec {
            id: id.into(),
            position: p.to_vec(),
        }
    }

    fn star(c_center: f64) -> NetworkLagrangian {
        let net = Network::build(
            &[
                vs("c", &[0.0, 0.0]),
                vs("e", &[1.0, 0.0]),
                vs("n", &[0.0, 1.0]),
                vs("w", &[-1.0, 0.0]),
            ],
            &[
                ArcSpec::straight("ce", "c", "e", &[0.0, 0.0], &[1.0, 0.0], 11),
                ArcSpec::straight("cn", "c", "n", &[0.0, 0.0], &[0.0, 1.0], 11),
                ArcSpec::straight("cw", "c", "w", &[0.0, 0.0], &[-1.0, 0.0], 11),
            ],
        )
        .unwrap();
        let hams: Vec<HamiltonianRef> = (0..3)
            .map(|_| Shared::new(PowerHamiltonian::quadratic()) as HamiltonianRef)
            .collect();
        let fl = FluxLimiter::new(vec![c_center, 0.0, 0.0, 0.0]);
        NetworkLagrangian::new(net, hams, fl).unwrap()
    }

    fn mv(arc: usize, knots: &[(f64, f64)]) -> Piece {
        Piece::Move {
            arc: ArcId(arc),
            knots: knots.to_vec(),
        }
    }

    #[test]
    fn lagrangian_cases() {
        let nl = star(-1.0);
        let x = NetworkPoint::OnArc {
            arc: ArcId(0),
            s: 0.5,
        };
        assert!((nl.eval(&x, &[2.0, 0.0]).unwrap() - 2.0).abs() < 1e-9);
        let c = NetworkPoint::Vertex(VertexId(0));
        assert_eq!(nl.eval(&c, &[0.0, 0.0]).unwrap(), -1.0);
        assert!((nl.eval(&c, &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-9);
        assert!(matches!(
            nl.eval(&x, &[0.0, 1.0]),
            Err(ActionError::NotInTangentBundle { .. })
        ));
        assert!(matches!(
            nl.eval(&c, &[1.0, 1.0]),
            Err(ActionError::NotInTangentBundle { .. })
        ));
        assert_eq!(nl.min_value(), -1.0);
        assert!((nl.big_m() - 0.5).abs() < 1e-9);
        assert!((nl.ell() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parallel_arms_take_the_cheaper_lagrangian() {
        // east and west arms are parallel at the centre
        let base = star(0.0);
        let mut hams = base.hamiltonians().to_vec();
        hams[2] = Shared::new(PowerHamiltonian::constant(2.0, 2.0, 0.0).unwrap());
        let nl =
            NetworkLagrangian::new(base.network().clone(), hams, base.limiter().clone()).unwrap();
        let c = NetworkPoint::Vertex(VertexId(0));
        // λ = 2 along the east arm, -2 along the west arm
        assert!((nl.eval(&c, &[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn action_examples() {
        let nl = star(-1.0);
        let net = nl.network();
        let dwell = NetworkCurve::dwell(net, VertexId(0), 0.0, 3.0).unwrap();
        assert!((action(&nl, &dwell).unwrap() + 3.0).abs() < 1e-12);
        let run = NetworkCurve::new(net, vec![mv(0, &[(3.0, 0.0), (4.0, 1.0)])]).unwrap();
        assert!((action(&nl, &run).unwrap() - 0.5).abs() < 1e-9);
        let both = dwell.concat(net, &run).unwrap();
        assert!((action(&nl, &both).unwrap() + 2.5).abs() < 1e-9);
    }

    #[test]
    fn normalization_splits_and_merges() {
        let nl = star(-1.0);
        let net = nl.network();
        let c = NetworkCurve::new(
            net,
            vec![
                mv(0, &[(0.0, 0.5), (1.0, 0.0), (2.0, 0.0), (3.0, 0.3)]),
                mv(0, &[(3.0, 0.3), (4.0, 0.6)]),
            ],
        )
        .unwrap();
        assert_eq!(c.pieces().len(), 3);
        assert!(matches!(
            c.pieces()[1],
            Piece::Dwell {
                vertex: VertexId(0),
                ..
            }
        ));
        assert!(matches!(&c.pieces()[2], Piece::Move { knots, .. } if knots.len() == 3));
        assert!(NetworkCurve::new(
            net,
            vec![
                mv(0, &[(0.0, 0.5), (1.0, 0.0)]),
                mv(1, &[(1.5, 0.0), (2.0, 0.3)])
            ]
        )
        .is_err());
        assert!(matches!(
            NetworkCurve::new(net, vec![mv(0, &[(0.0, 0.5), (1.0, 1.5)])]),
            Err(ActionError::OffNetwork(_))
        ));
    }

    #[test]
    fn excursion_is_replaced_by_dwell() {
        let nl = star(-1.0);
        let net = nl.network();
        let loopy =
            NetworkCurve::new(net, vec![mv(1, &[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)])]).unwrap();
        assert!(!loopy.is_admissible(net));
        let before = action(&nl, &loopy).unwrap();
        let ad = make_admissible(&nl, &loopy).unwrap();
        assert!(ad.is_admissible(net));
        assert_eq!(ad.pieces().len(), 1);
        assert!((action(&nl, &ad).unwrap() + 1.0).abs() < 1e-12);
        assert!(before >= 0.0);
        assert!(check_reduction_properties(net, &loopy, &ad, 50).passed());

        let through = NetworkCurve::new(
            net,
            vec![
                mv(0, &[(0.0, 0.5), (0.5, 0.0)]),
                mv(1, &[(0.5, 0.0), (1.0, 0.5)]),
            ],
        )
        .unwrap();
        assert_eq!(make_admissible(&nl, &through).unwrap(), through);
    }

    #[test]
    fn loop_bound_examples() {
        let nl = star(-1.0);
        let still = check_loop_lower_bound(&nl, ArcId(0), &[(0.0, 0.0), (2.0, 0.0)]).unwrap();
        assert!((still.integral + 2.0).abs() < 1e-12 && still.passed);
        let tri =
            check_loop_lower_bound(&nl, ArcId(0), &[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]).unwrap();
        assert!((tri.integral - 0.25).abs() < 1e-9 && tri.passed);
        assert!(tri.certificate_bound <= tri.integral + 1e-9);
    }

    #[test]
    fn excursion_bound_examples() {
        let nl = star(-1.0);
        let net = nl.network();
        let dwell = NetworkCurve::dwell(net, VertexId(0), 0.0, 1.0).unwrap();
        let r = check_excursion_bound(&nl, &dwell).unwrap();
        assert!((r.action - r.bound).abs() < 1e-12 && r.passed);
        let across = NetworkCurve::new(
            net,
            vec![
                mv(0, &[(0.0, 0.9), (0.5, 0.0)]),
                mv(1, &[(0.5, 0.0), (1.0, 0.9)]),
            ],
        )
        .unwrap();
        let r = check_excursion_bound(&nl, &across).unwrap();
        assert!((r.bound - (-1.0 - 0.9)).abs() < 1e-9);
        assert!(r.passed);
        let long = NetworkCurve::new(net, vec![mv(0, &[(0.0, 0.0), (1.0, 1.0)])]).unwrap();
        assert!(matches!(
            check_excursion_bound(&nl, &long),
            Err(ActionError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn excursion_bound_gap_for_negative_limiter() {
        // H = (μ + 1/2)²/2 + 1 has M = 0, so ℓ = 0, while moving towards the
        // vertex at speed 1/2 costs less than c_x = -1 per unit time.
        let net = Network::build(
            &[vs("a", &[0.0]), vs("b", &[1.0])],
            &[ArcSpec::straight("ab", "a", "b", &[0.0], &[1.0], 3)],
        )
        .unwrap();
        let h: HamiltonianRef = Shared::new(FnHamiltonian::new("shifted", |_, mu: f64| {
            (mu + 0.5).powi(2) / 2.0 + 1.0
        }));
        let nl = NetworkLagrangian::new(net, vec![h], FluxLimiter::new(vec![-1.0, -1.0])).unwrap();
        assert!(nl.big_m().abs() < 1e-9);
        let net = nl.network();
        let approach = NetworkCurve::new(net, vec![mv(0, &[(0.0, 0.5), (1.0, 1.0)])]).unwrap();
        let r = check_excursion_bound(&nl, &approach).unwrap();
        assert!((r.action - (-1.0 - 0.25 * 0.5)).abs() < 1e-9);
        assert!(!r.passed);
        assert!(r.robust_passed);
    }

    #[test]
    fn curve_text_round_trip() {
        let nl = star(-1.0);
        let net = nl.network();
        let c = NetworkCurve::new(
            net,
            vec![
                mv(0, &[(0.0, 0.5), (0.25, 0.25), (0.5, 0.0)]),
                Piece::Dwell {
                    vertex: VertexId(0),
                    start: 0.5,
                    end: 0.75,
                },
                mv(1, &[(0.75, 0.0), (1.0, 0.125)]),
            ],
        )
        .unwrap();
        let text = c.to_text(net);
        assert!(text.starts_with("start 0\nmove ce"));
        assert_eq!(NetworkCurve::parse(net, &text).unwrap(), c);
    }

    #[test]
    fn coercivity_envelope_is_below_samples() {
        let nl = star(-1.0);
        let env = nl.coercivity_envelope(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(env[0].1, -1.0);
        assert!((env[2].1 - 2.0).abs() < 1e-9);
    }
}
