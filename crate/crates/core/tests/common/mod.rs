#![allow(dead_code)]

use std::sync::Arc;

use hjnet::{
    ArcSpec, FluxLimiter, HamiltonianRef, Network, NetworkLagrangian, NetworkPoint,
    PowerHamiltonian, VertexId, VertexSpec,
};

pub fn vs(id: &str, p: &[f64]) -> VertexSpec {
    VertexSpec {
        id: id.into(),
        position: p.to_vec(),
    }
}

pub fn quadratic() -> HamiltonianRef {
    Arc::new(PowerHamiltonian::quadratic())
}

/// Unit segment `[0, 1]` on the real line with `H = μ²/2`.
pub fn segment() -> NetworkLagrangian {
    let net = Network::build(
        &[vs("a", &[0.0]), vs("b", &[1.0])],
        &[ArcSpec::straight("ab", "a", "b", &[0.0], &[1.0], 11)],
    )
    .unwrap();
    NetworkLagrangian::new(net, vec![quadratic()], FluxLimiter::uniform(2, 0.0)).unwrap()
}

/// Three unit arms leaving the center `c`, `H = μ²/2` everywhere.
pub fn star(c_center: f64) -> NetworkLagrangian {
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
    let hams = (0..3).map(|_| quadratic()).collect();
    NetworkLagrangian::new(net, hams, FluxLimiter::new(vec![c_center, 0.0, 0.0, 0.0])).unwrap()
}

/// Two unit arcs `a → b → c` on a line with the given Hamiltonians.
pub fn two_arcs(h0: HamiltonianRef, h1: HamiltonianRef, limiter: Vec<f64>) -> NetworkLagrangian {
    let net = Network::build(
        &[vs("a", &[0.0]), vs("b", &[1.0]), vs("c", &[2.0])],
        &[
            ArcSpec::straight("ab", "a", "b", &[0.0], &[1.0], 11),
            ArcSpec::straight("bc", "b", "c", &[1.0], &[2.0], 11),
        ],
    )
    .unwrap();
    NetworkLagrangian::new(net, vec![h0, h1], FluxLimiter::new(limiter)).unwrap()
}

pub fn center() -> NetworkPoint {
    NetworkPoint::Vertex(VertexId(0))
}

pub fn on(arc: usize, s: f64) -> NetworkPoint {
    NetworkPoint::OnArc {
        arc: hjnet::ArcId(arc),
        s,
    }
}

/// `min_y |y - 0.5| + (s - y)²/(2t)` over `y ∈ [0, 1]` by dense sampling
/// refined around the best sample.
pub fn hopf_lax(s: f64, t: f64) -> f64 {
    let phi = |y: f64| (y - 0.5).abs() + (s - y) * (s - y) / (2.0 * t);
    let n = 2_000;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        best = best.min(phi(k as f64 / n as f64));
    }
    // the minimizer is either y = 0.5 or a critical point s ∓ t
    for y in [0.5, s - t, s + t] {
        if (0.0..=1.0).contains(&y) {
            best = best.min(phi(y));
        }
    }
    best
}

/// `min(0, min_τ [-τ + d²/(2(t - τ))])` over dwell times `τ ∈ [0, t)`.
pub fn dwell_oracle(d: f64, t: f64) -> f64 {
    let n = 20_000;
    let mut best: f64 = 0.0;
    for k in 0..n {
        let tau = t * k as f64 / n as f64;
        best = best.min(-tau + d * d / (2.0 * (t - tau)));
    }
    // stationary point t - τ = d/√2
    let tau = t - d / 2f64.sqrt();
    if tau >= 0.0 {
        best = best.min(-tau + d * d / (2.0 * (t - tau)));
    }
    best
}
