//! Grid-scale checks that a computed value grid behaves like a viscosity
//! solution with flux limiters.
//!
//! The continuum conditions quantify over test functions and cannot be
//! checked by a machine; every check here is a difference-quotient
//! surrogate, and each report says so in its header.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::VerifyError;
use crate::hamiltonian::{legendre, legendre_argmax, FluxLimiter, Hamiltonian, HamiltonianRef};
use crate::network::{Network, NetworkPoint};
use crate::solver::{fmt_sig, NodeLocation, ValueGrid};
use crate::NetworkLagrangian;

pub const REPORT_HEADER: &str = "# surrogate checks: grid difference quotients stand in for \
test-function conditions, which are not machine-checkable";

/// Sub-samples per cell for the feet of the one-step transition surrogate.
const FOOT_SUBSAMPLES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Interior residual tolerance is `interior · (Δt + Δs) · (1 + |u′|)`.
    pub interior: f64,
    /// Vertex quotient tolerance is `vertex · Δt` per unit time.
    pub vertex: f64,
    /// Nodes whose one-sided slopes differ by more than `kink · (Δt + Δs)`
    /// are treated as non-smooth.
    pub kink: f64,
    /// Multiplies every tolerance; kink detection is unaffected.
    pub scale: f64,
    /// Absolute tolerance of [`cross_check`].
    pub cross: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            interior: 5.0,
            vertex: 2.0,
            kink: 10.0,
            scale: 1.0,
            cross: 1e-9,
        }
    }
}

impl VerifyOptions {
    pub fn scaled(self, scale: f64) -> Self {
        VerifyOptions { scale, ..self }
    }
}

/// Node and layer of the worst violation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub node: usize,
    pub layer: usize,
    pub point: NetworkPoint,
    pub t: f64,
}

/// Outcome of one check. `max_violation` is the largest amount by which the
/// checked inequality exceeds its tolerance (negative when all hold with
/// room to spare).
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_violation: f64,
    pub location: Option<Location>,
    pub examined: usize,
    pub passed: bool,
}

impl CheckResult {
    fn empty(name: &str) -> Self {
        CheckResult {
            name: name.into(),
            max_violation: f64::NEG_INFINITY,
            location: None,
            examined: 0,
            passed: true,
        }
    }

    fn record(&mut self, excess: f64, at: impl FnOnce() -> Location) {
        self.examined += 1;
        let excess = if excess.is_nan() {
            f64::INFINITY
        } else {
            excess
        };
        if excess > self.max_violation {
            self.max_violation = excess;
            self.location = Some(at());
        }
        if excess > 0.0 {
            self.passed = false;
        }
    }

    fn merge(mut self, other: CheckResult) -> CheckResult {
        self.examined += other.examined;
        self.passed &= other.passed;
        if other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
            self.location = other.location;
        }
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends the checks of `other`, keeping them ordered by name.
    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    /// One line per check: name, worst violation, location, verdict.
    pub fn to_text(&self, net: &Network) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for c in &self.checks {
            let loc = match &c.location {
                Some(l) => format!("{}@t={}", describe(net, &l.point), fmt_sig(l.t)),
                None => "-".into(),
            };
            let verdict = if c.passed { "pass" } else { "FAIL" };
            let worst = if c.examined == 0 {
                "-".into()
            } else {
                fmt_sig(c.max_violation)
            };
            let _ = writeln!(out, "{} {} {} {}", c.name, worst, loc, verdict);
        }
        out
    }
}

fn describe(net: &Network, p: &NetworkPoint) -> String {
    match *p {
        NetworkPoint::Vertex(v) => net.vertex(v).id.clone(),
        NetworkPoint::OnArc { arc, s } => format!("{}:{}", net.arc(arc).id(), fmt_sig(s)),
    }
}

fn single(check: CheckResult) -> VerificationReport {
    VerificationReport {
        checks: vec![check],
    }
}

fn location(vg: &ValueGrid, node: usize, layer: usize) -> Location {
    Location {
        node,
        layer,
        point: vg.nodes().point(node),
        t: vg.time(layer),
    }
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Interior viscosity inequalities.
///
/// Smooth nodes must satisfy `|u_t + H(s, u′)| ≤ tol` with backward `u_t`
/// and central `u′`. At kinks both one-sided slopes disagree and the
/// value is instead compared with a fresh one-step transition from the
/// previous layer, feet sampled densely on the arc; the excess on either
/// side is scaled by `1/Δt` and held to the same tolerance.
pub fn check_interior(
    vg: &ValueGrid,
    hams: &[HamiltonianRef],
    opts: &VerifyOptions,
) -> VerificationReport {
    let grid = vg.grid();
    let nodes = vg.nodes();
    let (ds, dt) = (grid.ds(), grid.dt());
    let n_s = grid.n_s();
    let kink = opts.kink * (ds + dt);
    let jobs: Vec<(usize, usize)> = (1..vg.layer_count())
        .flat_map(|k| (nodes.vertex_count()..nodes.len()).map(move |n| (k, n)))
        .collect();
    let result = jobs
        .par_iter()
        .fold(
            || CheckResult::empty("interior"),
            |mut acc, &(k, node)| {
                let NodeLocation::Interior { arc, index: i } = nodes.location(node) else {
                    return acc;
                };
                let h = hams[arc.0].as_ref();
                let at = |layer: usize, j: usize| vg.value(layer, nodes.global(arc.0, j));
                let (l, c, r) = (at(k, i - 1), at(k, i), at(k, i + 1));
                let (pl, pc, pr) = (at(k - 1, i - 1), at(k - 1, i), at(k - 1, i + 1));
                if !finite(&[l, c, r, pl, pc, pr]) {
                    return acc;
                }
                let jump = ((r - c) - (c - l)).abs() / ds;
                let prev_jump = ((pr - pc) - (pc - pl)).abs() / ds;
                let s = grid.param(i);
                let slope = 0.5 * (r - l) / ds;
                let tol = opts.scale * opts.interior * (ds + dt) * (1.0 + slope.abs());
                if jump <= kink && prev_jump <= kink {
                    let residual = (c - pc) / dt + h.eval(s, slope);
                    acc.record(residual.abs() - tol, || location(vg, node, k));
                } else {
                    let reach = grid.reach();
                    let lo = i.saturating_sub(reach);
                    let hi = (i + reach).min(n_s - 1);
                    let best = one_step(h, s, dt, ds, lo, hi, |j| at(k - 1, j));
                    let excess = (c - best).abs() / dt;
                    acc.record(excess - tol, || location(vg, node, k));
                }
                acc
            },
        )
        .reduce(|| CheckResult::empty("interior"), CheckResult::merge);
    single(result)
}

/// `min_y [u(y) + Δt L(s, (s - y)/Δt)]` over feet `y` in `[s_lo, s_hi]`,
/// sampled at the nodes and inside every cell, `u` linear between nodes.
fn one_step(
    h: &dyn Hamiltonian,
    s: f64,
    dt: f64,
    ds: f64,
    lo: usize,
    hi: usize,
    u: impl Fn(usize) -> f64,
) -> f64 {
    let mut best = f64::INFINITY;
    for j in lo..=hi {
        let (u0, u1) = (u(j), if j < hi { u(j + 1) } else { f64::NAN });
        let steps = if j < hi { FOOT_SUBSAMPLES } else { 1 };
        for q in 0..steps {
            let frac = q as f64 / FOOT_SUBSAMPLES as f64;
            let foot_u = if q == 0 { u0 } else { u0 + frac * (u1 - u0) };
            if !foot_u.is_finite() {
                continue;
            }
            let y = (j as f64 + frac) * ds;
            if let Ok(cost) = legendre(h, s, (s - y) / dt) {
                best = best.min(foot_u + dt * cost);
            }
        }
    }
    best
}

/// Discrete supertangent bound at vertices:
/// `(u(x, t + Δt) - u(x, t))/Δt ≤ c_x + tol`.
pub fn check_vertex_subsolution(
    vg: &ValueGrid,
    limiter: &FluxLimiter,
    opts: &VerifyOptions,
) -> VerificationReport {
    let dt = vg.grid().dt();
    let tol = opts.scale * opts.vertex * dt;
    let mut result = CheckResult::empty("vertex-subsolution");
    for v in 0..vg.nodes().vertex_count() {
        let c = limiter.values()[v];
        for k in 0..vg.layer_count().saturating_sub(1) {
            let (a, b) = (vg.value(k, v), vg.value(k + 1, v));
            if !finite(&[a, b]) {
                continue;
            }
            result.record((b - a) / dt - c - tol, || location(vg, v, k + 1));
        }
    }
    single(result)
}

/// Where the backward quotient at a vertex falls below `c_x - tol`, some
/// incident arc must satisfy `u_t + H(end, μ) ≥ -tol` for every slope `μ` a
/// subtangent can have there. Those slopes form the half-line bounded by the
/// one-sided slope of `u` taken from inside the arc, so the check uses the
/// minimum of `H` over it.
pub fn check_vertex_supersolution(
    vg: &ValueGrid,
    nl: &NetworkLagrangian,
    opts: &VerifyOptions,
) -> VerificationReport {
    let grid = vg.grid();
    let nodes = vg.nodes();
    let (ds, dt) = (grid.ds(), grid.dt());
    let n_s = grid.n_s();
    let vtol = opts.scale * opts.vertex * dt;
    let net = nl.network();
    // (argmin, min) of H at each arc end, tail first
    let floors: Vec<[(f64, f64); 2]> = nl
        .hamiltonians()
        .iter()
        .map(|h| {
            let at = |s: f64| {
                legendre_argmax(h.as_ref(), s, 0.0)
                    .map(|c| (c.maximizer, -c.value))
                    .unwrap_or((0.0, f64::NEG_INFINITY))
            };
            [at(0.0), at(1.0)]
        })
        .collect();
    let mut result = CheckResult::empty("vertex-supersolution");
    for v in net.vertex_ids() {
        let node = v.0;
        let c = nl.limiter_at(v);
        for k in 1..vg.layer_count() {
            let (prev, cur) = (vg.value(k - 1, node), vg.value(k, node));
            if !finite(&[prev, cur]) {
                continue;
            }
            let ut = (cur - prev) / dt;
            if ut >= c - vtol {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for arr in net.arrivals(v) {
                let a = arr.arc.0;
                let h = nl.hamiltonian(arr.arc);
                let tail = arr.end.param() == 0.0;
                let inner = if tail { 1 } else { n_s - 2 };
                let inside = vg.value(k, nodes.global(a, inner));
                if !inside.is_finite() {
                    continue;
                }
                let (argmin, floor) = floors[a][usize::from(!tail)];
                // subtangent slopes: μ ≤ D⁺u at a tail, μ ≥ D⁻u at a head
                let (slope, h_min) = if tail {
                    let d = (inside - cur) / ds;
                    (d, if argmin <= d { floor } else { h.eval(0.0, d) })
                } else {
                    let d = (cur - inside) / ds;
                    (d, if argmin >= d { floor } else { h.eval(1.0, d) })
                };
                let tol = opts.scale * opts.interior * (ds + dt) * (1.0 + slope.abs());
                best = best.max(ut + h_min + tol);
            }
            result.record(-best, || location(vg, node, k));
        }
    }
    single(result)
}

/// Largest `|A - B|` over nodes and layers present in both grids.
pub fn cross_check(
    a: &ValueGrid,
    b: &ValueGrid,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let (na, nb) = (a.nodes(), b.nodes());
    if na.vertex_count() != nb.vertex_count() || na.arc_count() != nb.arc_count() {
        return Err(VerifyError::GridMismatch(format!(
            "{} vertices and {} arcs against {} and {}",
            na.vertex_count(),
            na.arc_count(),
            nb.vertex_count(),
            nb.arc_count()
        )));
    }
    let common = |ga: &crate::solver::Grid, gb: &crate::solver::Grid| -> Vec<(usize, usize)> {
        let ra = ga.n_s() - 1;
        let rb = gb.n_s() - 1;
        (0..=ra)
            .filter_map(|i| {
                let num = i * rb;
                num.is_multiple_of(ra).then(|| (i, num / ra))
            })
            .collect()
    };
    let space = common(a.grid(), b.grid());
    let times: Vec<(usize, usize)> = (0..a.layer_count())
        .filter_map(|k| {
            let t = a.time(k);
            let kb = ((t - b.start_time()) / b.grid().dt()).round();
            if kb < 0.0 || kb as usize >= b.layer_count() {
                return None;
            }
            let kb = kb as usize;
            ((b.time(kb) - t).abs() <= 1e-9 * (1.0 + t.abs())).then_some((k, kb))
        })
        .collect();
    if times.is_empty() {
        return Err(VerifyError::GridMismatch("no common time layers".into()));
    }
    let tol = opts.scale * opts.cross;
    let mut result = CheckResult::empty("cross-check");
    for &(ka, kb) in &times {
        for arc in 0..na.arc_count() {
            for &(ia, ib) in &space {
                let (node_a, node_b) = (na.global(arc, ia), nb.global(arc, ib));
                let (u, w) = (a.value(ka, node_a), b.value(kb, node_b));
                let diff = if u == w { 0.0 } else { (u - w).abs() };
                result.record(diff - tol, || location(a, node_a, ka));
            }
        }
    }
    Ok(single(result))
}

/// Interior and both vertex checks, ordered by name.
pub fn verify_all(
    vg: &ValueGrid,
    nl: &NetworkLagrangian,
    opts: &VerifyOptions,
) -> VerificationReport {
    let ((interior, sub), sup) = rayon::join(
        || {
            rayon::join(
                || check_interior(vg, nl.hamiltonians(), opts),
                || check_vertex_subsolution(vg, nl.limiter(), opts),
            )
        },
        || check_vertex_supersolution(vg, nl, opts),
    );
    let mut report = VerificationReport::default();
    report.extend(interior);
    report.extend(sub);
    report.extend(sup);
    report
}
