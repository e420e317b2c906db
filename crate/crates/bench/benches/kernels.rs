use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hjnet::hamiltonian::legendre;
use hjnet::solver::{Grid, Scheme, Solver};
use hjnet::{
    ArcSpec, FluxLimiter, HamiltonianRef, Network, NetworkLagrangian, NetworkPoint,
    PowerHamiltonian, VertexSpec,
};

fn star() -> NetworkLagrangian {
    let vertex = |id: &str, x: f64, y: f64| VertexSpec {
        id: id.into(),
        position: vec![x, y],
    };
    let arm = |id: &str, head: &str, x: f64, y: f64| ArcSpec {
        id: id.into(),
        tail: "c".into(),
        head: head.into(),
        points: vec![vec![0.0, 0.0], vec![x, y]],
    };
    let net = Network::build(
        &[
            vertex("c", 0.0, 0.0),
            vertex("e", 1.0, 0.0),
            vertex("n", 0.0, 1.0),
            vertex("w", -1.0, 0.0),
        ],
        &[
            arm("ce", "e", 1.0, 0.0),
            arm("cn", "n", 0.0, 1.0),
            arm("cw", "w", -1.0, 0.0),
        ],
    )
    .unwrap();
    let hams: Vec<HamiltonianRef> = (0..3)
        .map(|_| Arc::new(PowerHamiltonian::quadratic()) as HamiltonianRef)
        .collect();
    let mut limiter = FluxLimiter::maximal(&net, &hams).unwrap();
    limiter.set(net.vertex_by_name("c").unwrap(), -1.0);
    NetworkLagrangian::new(net, hams, limiter).unwrap()
}

fn bench_legendre(c: &mut Criterion) {
    let h = PowerHamiltonian::new(3.0, |s| 1.0 + s, |s| (6.0 * s).cos(), "bench").unwrap();
    c.bench_function("legendre power p=3", |b| {
        b.iter(|| legendre(&h, black_box(0.3), black_box(1.7)).unwrap())
    });
}

fn bench_lax_oleinik(c: &mut Criterion) {
    let nl = star();
    let grid = Grid::new(101, 0.01, 0.5).unwrap();
    let u0 = |_: hjnet::ArcId, s: f64| (s - 0.5).abs();
    for scheme in [Scheme::SemiLagrangian, Scheme::Graph] {
        let solver = Solver::new(&nl, grid, scheme).unwrap();
        c.bench_function(&format!("lax_oleinik star {scheme}"), |b| {
            b.iter(|| solver.lax_oleinik(&u0).unwrap())
        });
    }
}

fn bench_minimal_action(c: &mut Criterion) {
    let nl = star();
    let net = nl.network();
    let solver = Solver::new(&nl, Grid::new(51, 0.02, 1.0).unwrap(), Scheme::Graph).unwrap();
    let x = net.point(net.arc_by_name("ce").unwrap(), 0.5).unwrap();
    let y: NetworkPoint = net.point(net.arc_by_name("cw").unwrap(), 0.5).unwrap();
    c.bench_function("minimal_action star", |b| {
        b.iter(|| solver.minimal_action(&x, 0.0, &y, 1.0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_legendre, bench_lax_oleinik, bench_minimal_action
}
criterion_main!(benches);
