//! Embedded networks.
//!
//! A network is a finite union of arcs `γ: [0,1] → R^N`, each given as a
//! polyline sampled uniformly in the parameter. Per-sample tangents come from
//! central differences (one-sided at the endpoints), which is what the
//! pullback of velocities and the constant `m` are computed from. The
//! parametrization between samples is linear, so arclength is exact for the
//! stored polyline.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::NetworkError;

/// Arc endpoints closer than this to a declared vertex snap onto it.
pub const VERTEX_SNAP_TOL: f64 = 1e-9;
/// Relative tolerance used when testing a velocity for tangency.
pub const ANGULAR_TOL: f64 = 1e-8;
/// Parameters this close to 0 or 1 are identified with the vertex.
pub const PARAM_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

impl ArcId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Which end of an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum End {
    Tail,
    Head,
}

impl End {
    pub fn param(self) -> f64 {
        match self {
            End::Tail => 0.0,
            End::Head => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexSpec {
    pub id: String,
    pub position: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub points: Vec<Vec<f64>>,
}

impl ArcSpec {
    /// Straight arc between two positions, sampled with `samples` points.
    pub fn straight(
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        from: &[f64],
        to: &[f64],
        samples: usize,
    ) -> Self {
        let n = samples.max(2);
        let points = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect()
            })
            .collect();
        ArcSpec {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            points,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub position: Vec<f64>,
}

/// One arc of the network, or an inverse arc produced by [`Arc::reversed`].
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    id: String,
    tail: VertexId,
    head: VertexId,
    points: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
    speed_floor: f64,
    reversed: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (dot(&ap, &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let proj: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    dist(p, &proj)
}

impl Arc {
    fn from_points(
        id: String,
        tail: VertexId,
        head: VertexId,
        points: Vec<Vec<f64>>,
    ) -> Result<Self, NetworkError> {
        let n = points.len();
        let h = 1.0 / (n - 1) as f64;
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(0.0);
        let mut speed_floor = f64::INFINITY;
        for w in points.windows(2) {
            let len = dist(&w[0], &w[1]);
            if len <= 0.0 {
                return Err(NetworkError::DegenerateArc(id));
            }
            speed_floor = speed_floor.min(len / h);
            cumulative.push(cumulative.last().unwrap() + len);
        }
        let tangents: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let (lo, hi, span) = if i == 0 {
                    (0, 1, h)
                } else if i == n - 1 {
                    (n - 2, n - 1, h)
                } else {
                    (i - 1, i + 1, 2.0 * h)
                };
                points[hi]
                    .iter()
                    .zip(&points[lo])
                    .map(|(b, a)| (b - a) / span)
                    .collect()
            })
            .collect();
        for t in &tangents {
            speed_floor = speed_floor.min(norm(t));
        }
        if !(speed_floor > 0.0) {
            return Err(NetworkError::DegenerateArc(id));
        }
        Ok(Arc {
            id,
            tail,
            head,
            points,
            tangents,
            cumulative,
            speed_floor,
            reversed: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tail(&self) -> VertexId {
        self.tail
    }

    pub fn head(&self) -> VertexId {
        self.head
    }

    pub fn vertex_at(&self, end: End) -> VertexId {
        match end {
            End::Tail => self.tail,
            End::Head => self.head,
        }
    }

    /// `true` for an inverse arc `γ̃(s) = γ(1 - s)`.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn sample_tangents(&self) -> &[Vec<f64>] {
        &self.tangents
    }

    /// Minimum of `|γ̇|` over samples and segments.
    pub fn speed_floor(&self) -> f64 {
        self.speed_floor
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.points.len();
        let x = s.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        (i, x - i as f64)
    }

    pub fn point(&self, s: f64) -> Vec<f64> {
        let (i, w) = self.locate(s);
        self.points[i]
            .iter()
            .zip(&self.points[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Tangent `γ̇(s)`, linearly interpolated between sample tangents.
    pub fn tangent(&self, s: f64) -> Vec<f64> {
        let (i, w) = self.locate(s);
        self.tangents[i]
            .iter()
            .zip(&self.tangents[i + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Arclength from `γ(0)` to `γ(s)`.
    pub fn arclength(&self, s: f64) -> f64 {
        let (i, w) = self.locate(s);
        self.cumulative[i] + w * (self.cumulative[i + 1] - self.cumulative[i])
    }

    /// Inverse arc: `γ̃(s) = γ(1 - s)`, tangents negated, ends swapped.
    pub fn reversed(&self) -> Arc {
        let points: Vec<Vec<f64>> = self.points.iter().rev().cloned().collect();
        let tangents: Vec<Vec<f64>> = self
            .tangents
            .iter()
            .rev()
            .map(|t| t.iter().map(|x| -x).collect())
            .collect();
        let total = self.length();
        let cumulative = self.cumulative.iter().rev().map(|c| total - c).collect();
        Arc {
            id: self.id.clone(),
            tail: self.head,
            head: self.tail,
            points,
            tangents,
            cumulative,
            speed_floor: self.speed_floor,
            reversed: !self.reversed,
        }
    }
}

/// A point of the network. Points at `s ∈ {0, 1}` are always stored as
/// their vertex, so two descriptions of the same junction compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NetworkPoint {
    Vertex(VertexId),
    OnArc { arc: ArcId, s: f64 },
}

impl NetworkPoint {
    pub fn vertex(&self) -> Option<VertexId> {
        match self {
            NetworkPoint::Vertex(v) => Some(*v),
            NetworkPoint::OnArc { .. } => None,
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.vertex().is_some()
    }
}

impl fmt::Display for NetworkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkPoint::Vertex(v) => write!(f, "vertex#{}", v.0),
            NetworkPoint::OnArc { arc, s } => write!(f, "arc#{}@{}", arc.0, s),
        }
    }
}

/// An arc traversed from parameter `from` to parameter `to`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leg {
    pub arc: ArcId,
    pub from: f64,
    pub to: f64,
}

/// A shortest path, as arc legs without timing.
#[derive(Clone, Debug, PartialEq)]
pub struct Geodesic {
    pub length: f64,
    pub legs: Vec<Leg>,
}

/// An arc oriented so that it ends at a given vertex: an element of `Γ_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arrival {
    pub arc: ArcId,
    /// End of the underlying arc sitting at the vertex. `End::Tail` means the
    /// arrival is the inverse arc.
    pub end: End,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Proximity threshold for the interior intersection test, relative to
    /// the bounding-box diagonal.
    pub intersection_rel_tol: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            intersection_rel_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    arrivals: Vec<Vec<Arrival>>,
    min_speed: f64,
    vertex_dist: Vec<Vec<f64>>,
    // next arc on a shortest vertex path: next_hop[a][b] = (arc, neighbour)
    next_hop: Vec<Vec<Option<(ArcId, VertexId)>>>,
    dim: usize,
}

impl Network {
    pub fn build(vertices: &[VertexSpec], arcs: &[ArcSpec]) -> Result<Network, NetworkError> {
        Self::build_with(vertices, arcs, BuildOptions::default())
    }

    pub fn build_with(
        vertex_specs: &[VertexSpec],
        arc_specs: &[ArcSpec],
        options: BuildOptions,
    ) -> Result<Network, NetworkError> {
        if arc_specs.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut index: HashMap<&str, VertexId> = HashMap::new();
        let dim = vertex_specs
            .first()
            .map(|v| v.position.len())
            .unwrap_or_else(|| arc_specs[0].points.first().map_or(0, |p| p.len()));
        let mut vertices = Vec::with_capacity(vertex_specs.len());
        for (i, v) in vertex_specs.iter().enumerate() {
            if index.insert(v.id.as_str(), VertexId(i)).is_some() {
                return Err(NetworkError::DuplicateId(v.id.clone()));
            }
            if v.position.len() != dim {
                return Err(NetworkError::DimensionMismatch {
                    arc: v.id.clone(),
                    expected: dim,
                    found: v.position.len(),
                });
            }
            vertices.push(Vertex {
                id: v.id.clone(),
                position: v.position.clone(),
            });
        }

        let mut arcs = Vec::with_capacity(arc_specs.len());
        let mut seen_arcs: HashMap<&str, ()> = HashMap::new();
        for spec in arc_specs {
            if seen_arcs.insert(spec.id.as_str(), ()).is_some() {
                return Err(NetworkError::DuplicateId(spec.id.clone()));
            }
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| NetworkError::UnknownVertex {
                        arc: spec.id.clone(),
                        vertex: name.to_string(),
                    })
            };
            let tail = lookup(&spec.tail)?;
            let head = lookup(&spec.head)?;
            if tail == head {
                return Err(NetworkError::LoopArc(spec.id.clone()));
            }
            if spec.points.len() < 2 {
                return Err(NetworkError::TooFewPoints(spec.id.clone()));
            }
            if let Some(p) = spec.points.iter().find(|p| p.len() != dim) {
                return Err(NetworkError::DimensionMismatch {
                    arc: spec.id.clone(),
                    expected: dim,
                    found: p.len(),
                });
            }
            let mut points = spec.points.clone();
            let last = points.len() - 1;
            for (k, v) in [(0, tail), (last, head)] {
                let target = &vertices[v.0].position;
                let gap = dist(&points[k], target);
                if gap > VERTEX_SNAP_TOL {
                    return Err(NetworkError::EndpointMismatch {
                        arc: spec.id.clone(),
                        vertex: vertices[v.0].id.clone(),
                        distance: gap,
                    });
                }
                points[k] = target.clone();
            }
            arcs.push(Arc::from_points(spec.id.clone(), tail, head, points)?);
        }

        let mut arrivals = vec![Vec::new(); vertices.len()];
        for (i, arc) in arcs.iter().enumerate() {
            arrivals[arc.head.0].push(Arrival {
                arc: ArcId(i),
                end: End::Head,
            });
            arrivals[arc.tail.0].push(Arrival {
                arc: ArcId(i),
                end: End::Tail,
            });
        }
        for list in &mut arrivals {
            list.sort_by_key(|a| (a.arc, a.end == End::Head));
        }

        // connectivity
        let mut reached = vec![false; vertices.len()];
        let mut queue = VecDeque::from([VertexId(0)]);
        reached[0] = true;
        while let Some(v) = queue.pop_front() {
            for a in &arrivals[v.0] {
                let other = arcs[a.arc.0].vertex_at(match a.end {
                    End::Head => End::Tail,
                    End::Tail => End::Head,
                });
                if !reached[other.0] {
                    reached[other.0] = true;
                    queue.push_back(other);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(NetworkError::Disconnected(vertices[i].id.clone()));
        }

        let min_speed = arcs
            .iter()
            .map(|a| a.speed_floor)
            .fold(f64::INFINITY, f64::min);

        let threshold = options.intersection_rel_tol * bbox_diagonal(&arcs).max(f64::MIN_POSITIVE);
        check_intersections(&arcs, threshold)?;

        let (vertex_dist, next_hop) = all_pairs(&vertices, &arcs);

        Ok(Network {
            vertices,
            arcs,
            arrivals,
            min_speed,
            vertex_dist,
            next_hop,
            dim,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> {
        (0..self.arcs.len()).map(ArcId)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn arc_by_name(&self, name: &str) -> Result<ArcId, NetworkError> {
        self.arcs
            .iter()
            .position(|a| a.id == name)
            .map(ArcId)
            .ok_or_else(|| NetworkError::UnknownArc(name.to_string()))
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|v| v.id == name)
            .map(VertexId)
    }

    /// `Γ_x`: arcs ending at `x`, inverse arcs of those starting there included.
    pub fn arrivals(&self, x: VertexId) -> &[Arrival] {
        &self.arrivals[x.0]
    }

    /// The constant `m = min |γ̇|` over all arcs.
    pub fn min_speed(&self) -> f64 {
        self.min_speed
    }

    /// Canonical point at parameter `s` of `arc`.
    pub fn point(&self, arc: ArcId, s: f64) -> Result<NetworkPoint, NetworkError> {
        let a = self
            .arcs
            .get(arc.0)
            .ok_or_else(|| NetworkError::UnknownArc(format!("#{}", arc.0)))?;
        if !(-PARAM_EPS..=1.0 + PARAM_EPS).contains(&s) {
            return Err(NetworkError::OffArc(s));
        }
        Ok(if s <= PARAM_EPS {
            NetworkPoint::Vertex(a.tail)
        } else if s >= 1.0 - PARAM_EPS {
            NetworkPoint::Vertex(a.head)
        } else {
            NetworkPoint::OnArc { arc, s }
        })
    }

    /// Parameter of `p` on `arc`, if `p` lies on that arc.
    pub fn param_on(&self, p: &NetworkPoint, arc: ArcId) -> Option<f64> {
        match *p {
            NetworkPoint::OnArc { arc: a, s } => (a == arc).then_some(s),
            NetworkPoint::Vertex(v) => {
                let a = &self.arcs[arc.0];
                if a.tail == v {
                    Some(0.0)
                } else if a.head == v {
                    Some(1.0)
                } else {
                    None
                }
            }
        }
    }

    pub fn position(&self, p: &NetworkPoint) -> Vec<f64> {
        match *p {
            NetworkPoint::Vertex(v) => self.vertices[v.0].position.clone(),
            NetworkPoint::OnArc { arc, s } => self.arcs[arc.0].point(s),
        }
    }

    pub fn reverse_arc(&self, id: ArcId) -> Result<Arc, NetworkError> {
        self.arcs
            .get(id.0)
            .map(Arc::reversed)
            .ok_or_else(|| NetworkError::UnknownArc(format!("#{}", id.0)))
    }

    /// Arc-parameter velocity `λ = q·γ̇(s)/|γ̇(s)|²` of a tangent vector `q`.
    pub fn pullback_velocity(&self, arc: ArcId, s: f64, q: &[f64]) -> Result<f64, NetworkError> {
        let a = self
            .arcs
            .get(arc.0)
            .ok_or_else(|| NetworkError::UnknownArc(format!("#{}", arc.0)))?;
        pullback(a, s, q).ok_or_else(|| NetworkError::NotTangent {
            arc: a.id.clone(),
            s,
        })
    }

    /// Shortest-path distance between vertices.
    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> f64 {
        self.vertex_dist[a.0][b.0]
    }

    pub fn distance(&self, x: &NetworkPoint, y: &NetworkPoint) -> f64 {
        self.geodesic(x, y).length
    }

    /// `d_Γ(x, y)` together with a realizing path.
    pub fn geodesic(&self, x: &NetworkPoint, y: &NetworkPoint) -> Geodesic {
        if x == y {
            return Geodesic {
                length: 0.0,
                legs: Vec::new(),
            };
        }
        // (vertex, distance to it, leg from the point to the vertex)
        let anchors = |p: &NetworkPoint| -> Vec<(VertexId, f64, Option<Leg>)> {
            match *p {
                NetworkPoint::Vertex(v) => vec![(v, 0.0, None)],
                NetworkPoint::OnArc { arc, s } => {
                    let a = &self.arcs[arc.0];
                    let l = a.arclength(s);
                    vec![
                        (
                            a.tail,
                            l,
                            Some(Leg {
                                arc,
                                from: s,
                                to: 0.0,
                            }),
                        ),
                        (
                            a.head,
                            a.length() - l,
                            Some(Leg {
                                arc,
                                from: s,
                                to: 1.0,
                            }),
                        ),
                    ]
                }
            }
        };
        let mut best = Geodesic {
            length: f64::INFINITY,
            legs: Vec::new(),
        };
        if let (NetworkPoint::OnArc { arc: ax, s: sx }, NetworkPoint::OnArc { arc: ay, s: sy }) =
            (*x, *y)
        {
            if ax == ay {
                let a = &self.arcs[ax.0];
                best = Geodesic {
                    length: (a.arclength(sx) - a.arclength(sy)).abs(),
                    legs: vec![Leg {
                        arc: ax,
                        from: sx,
                        to: sy,
                    }],
                };
            }
        }
        for (vx, dx, lx) in anchors(x) {
            for (vy, dy, ly) in anchors(y) {
                let total = dx + self.vertex_dist[vx.0][vy.0] + dy;
                if total < best.length {
                    let mut legs = Vec::new();
                    legs.extend(lx);
                    legs.extend(self.vertex_path(vx, vy));
                    if let Some(l) = ly {
                        legs.push(Leg {
                            arc: l.arc,
                            from: l.to,
                            to: l.from,
                        });
                    }
                    best = Geodesic {
                        length: total,
                        legs,
                    };
                }
            }
        }
        best
    }

    fn vertex_path(&self, from: VertexId, to: VertexId) -> Vec<Leg> {
        let mut legs = Vec::new();
        let mut cur = from;
        while cur != to {
            let (arc, next) = self.next_hop[cur.0][to.0].expect("connected network");
            let a = &self.arcs[arc.0];
            let (f, t) = if a.tail == cur {
                (0.0, 1.0)
            } else {
                (1.0, 0.0)
            };
            legs.push(Leg {
                arc,
                from: f,
                to: t,
            });
            cur = next;
        }
        legs
    }

    /// Largest observed ratio `d_Γ(x, y) / |x - y|` over all pairs of the
    /// given points.
    pub fn euclidean_equivalence_constant(&self, points: &[NetworkPoint]) -> f64 {
        let mut worst: f64 = 1.0;
        for (i, p) in points.iter().enumerate() {
            let px = self.position(p);
            for q in &points[i + 1..] {
                let e = dist(&px, &self.position(q));
                if e > 1e-12 {
                    worst = worst.max(self.distance(p, q) / e);
                }
            }
        }
        worst
    }
}

pub(crate) fn pullback(a: &Arc, s: f64, q: &[f64]) -> Option<f64> {
    let t = a.tangent(s);
    let t2 = dot(&t, &t);
    let lambda = dot(q, &t) / t2;
    let residual: f64 = q
        .iter()
        .zip(&t)
        .map(|(qi, ti)| (qi - lambda * ti).powi(2))
        .sum::<f64>()
        .sqrt();
    (residual <= ANGULAR_TOL * norm(q) + 1e-300).then_some(lambda)
}

fn bbox_diagonal(arcs: &[Arc]) -> f64 {
    let dim = arcs[0].points[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in arcs.iter().flat_map(|a| a.points.iter()) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    dist(&lo, &hi)
}

fn check_intersections(arcs: &[Arc], threshold: f64) -> Result<(), NetworkError> {
    for (i, a) in arcs.iter().enumerate() {
        for (j, b) in arcs.iter().enumerate() {
            if i == j {
                continue;
            }
            let n = a.points.len();
            for p in &a.points[1..n - 1] {
                let d = b
                    .points
                    .windows(2)
                    .map(|w| point_segment_distance(p, &w[0], &w[1]))
                    .fold(f64::INFINITY, f64::min);
                if d <= threshold {
                    return Err(NetworkError::InteriorIntersection {
                        first: a.id.clone(),
                        second: b.id.clone(),
                        distance: d,
                    });
                }
            }
        }
    }
    Ok(())
}

type NextHop = Vec<Vec<Option<(ArcId, VertexId)>>>;

fn all_pairs(vertices: &[Vertex], arcs: &[Arc]) -> (Vec<Vec<f64>>, NextHop) {
    let n = vertices.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    let mut next: NextHop = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (k, a) in arcs.iter().enumerate() {
        let (u, v, l) = (a.tail.0, a.head.0, a.length());
        if l < d[u][v] {
            d[u][v] = l;
            d[v][u] = l;
            next[u][v] = Some((ArcId(k), a.head));
            next[v][u] = Some((ArcId(k), a.tail));
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    (d, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: &str, p: &[f64]) -> VertexSpec {
        VertexSpec {
            id: id.into(),
            position: p.to_vec(),
        }
    }

    pub(crate) fn star() -> Network {
        Network::build(
            &[
                v("c", &[0.0, 0.0]),
                v("e", &[1.0, 0.0]),
                v("n", &[0.0, 1.0]),
                v("w", &[-1.0, 0.0]),
            ],
            &[
                ArcSpec::straight("ce", "c", "e", &[0.0, 0.0], &[1.0, 0.0], 11),
                ArcSpec::straight("cn", "c", "n", &[0.0, 0.0], &[0.0, 1.0], 11),
                ArcSpec::straight("cw", "c", "w", &[0.0, 0.0], &[-1.0, 0.0], 11),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_straight_arc() {
        let net = Network::build(
            &[v("a", &[0.0, 0.0]), v("b", &[1.0, 0.0])],
            &[ArcSpec::straight(
                "ab",
                "a",
                "b",
                &[0.0, 0.0],
                &[1.0, 0.0],
                2,
            )],
        )
        .unwrap();
        assert_eq!(net.vertices().len(), 2);
        assert!((net.min_speed() - 1.0).abs() < 1e-12);
        let a = net.point(ArcId(0), 0.0).unwrap();
        let b = net.point(ArcId(0), 1.0).unwrap();
        assert!((net.distance(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(net.distance(&a, &a), 0.0);
    }

    #[test]
    fn loop_is_rejected() {
        let err = Network::build(
            &[v("a", &[0.0, 0.0])],
            &[ArcSpec {
                id: "l".into(),
                tail: "a".into(),
                head: "a".into(),
                points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]],
            }],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::LoopArc("l".into()));
    }

    #[test]
    fn star_structure() {
        let net = star();
        assert_eq!(net.vertices().len(), 4);
        assert!((net.min_speed() - 1.0).abs() < 1e-12);
        let c = net.vertex_by_name("c").unwrap();
        assert_eq!(net.arrivals(c).len(), 3);
        let e = NetworkPoint::Vertex(net.vertex_by_name("e").unwrap());
        let n = NetworkPoint::Vertex(net.vertex_by_name("n").unwrap());
        let g = net.geodesic(&e, &n);
        assert!((g.length - 2.0).abs() < 1e-12);
        assert_eq!(g.legs.len(), 2);
    }

    #[test]
    fn disconnected_and_intersections() {
        let err = Network::build(
            &[
                v("a", &[0.0, 0.0]),
                v("b", &[1.0, 0.0]),
                v("c", &[5.0, 5.0]),
            ],
            &[ArcSpec::straight(
                "ab",
                "a",
                "b",
                &[0.0, 0.0],
                &[1.0, 0.0],
                3,
            )],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::Disconnected("c".into()));

        let err = Network::build(
            &[
                v("a", &[0.0, 0.0]),
                v("b", &[1.0, 1.0]),
                v("c", &[1.0, 0.0]),
                v("d", &[0.0, 1.0]),
            ],
            &[
                ArcSpec::straight("ab", "a", "b", &[0.0, 0.0], &[1.0, 1.0], 5),
                ArcSpec::straight("cd", "c", "d", &[1.0, 0.0], &[0.0, 1.0], 5),
                ArcSpec::straight("ac", "a", "c", &[0.0, 0.0], &[1.0, 0.0], 5),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::InteriorIntersection { .. }));
    }

    #[test]
    fn degenerate_and_mismatched_endpoints() {
        let err = Network::build(
            &[v("a", &[0.0, 0.0]), v("b", &[1.0, 0.0])],
            &[ArcSpec {
                id: "ab".into(),
                tail: "a".into(),
                head: "b".into(),
                points: vec![
                    vec![0.0, 0.0],
                    vec![0.5, 0.0],
                    vec![0.5, 0.0],
                    vec![1.0, 0.0],
                ],
            }],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DegenerateArc("ab".into()));

        let err = Network::build(
            &[v("a", &[0.0, 0.0]), v("b", &[1.0, 0.0])],
            &[ArcSpec::straight(
                "ab",
                "a",
                "b",
                &[0.0, 0.0],
                &[1.0, 1e-6],
                2,
            )],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::EndpointMismatch { .. }));
    }

    #[test]
    fn reversal() {
        let net = star();
        let r = net.reverse_arc(ArcId(0)).unwrap();
        let p = r.point(0.25);
        assert!((p[0] - 0.75).abs() < 1e-12 && p[1].abs() < 1e-12);
        assert_eq!(r.tail(), net.arc(ArcId(0)).head());
        assert_eq!(r.speed_floor(), net.arc(ArcId(0)).speed_floor());
        let rr = r.reversed();
        for (a, b) in rr.samples().iter().zip(net.arc(ArcId(0)).samples()) {
            assert!(dist(a, b) < 1e-12);
        }
        for (a, b) in rr
            .sample_tangents()
            .iter()
            .zip(net.arc(ArcId(0)).sample_tangents())
        {
            assert!(dist(a, b) < 1e-12);
        }
        assert!(matches!(
            net.reverse_arc(ArcId(9)),
            Err(NetworkError::UnknownArc(_))
        ));
    }

    #[test]
    fn pullback_cases() {
        let net = star();
        assert!((net.pullback_velocity(ArcId(0), 0.5, &[2.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            net.pullback_velocity(ArcId(0), 0.5, &[0.0, 0.0]).unwrap(),
            0.0
        );
        assert!(matches!(
            net.pullback_velocity(ArcId(0), 0.5, &[0.0, 1.0]),
            Err(NetworkError::NotTangent { .. })
        ));
    }

    #[test]
    fn canonical_vertex_points() {
        let net = star();
        let a = net.point(ArcId(0), 0.0).unwrap();
        let b = net.point(ArcId(1), 0.0).unwrap();
        assert_eq!(a, b);
        assert!(net.point(ArcId(0), 1.5).is_err());
    }
}
