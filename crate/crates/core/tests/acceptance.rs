//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use common::*;
use hjnet::action::{check_excursion_bound, check_loop_lower_bound, check_reduction_properties};
use hjnet::hamiltonian::{critical_constant, legendre, stationary_solution};
use hjnet::solver::{brute_force_minimal_action, Grid, Scheme, Solver, ValueGrid};
use hjnet::verify::{verify_all, VerifyOptions};
use hjnet::{
    action, make_admissible, ArcId, ArcSpec, FluxLimiter, Hamiltonian, HamiltonianError,
    HamiltonianRef, Network, NetworkCurve, NetworkLagrangian, NetworkPoint, Piece,
    PowerHamiltonian, VertexId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Every computed grid with a closure measuring its DPP defect.
#[derive(Default)]
struct Computed {
    grids: Vec<(String, Box<dyn Fn() -> f64>)>,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

type Profile = (&'static str, fn(f64) -> f64);
type Datum = Box<dyn Fn(ArcId, f64) -> f64>;

/// The power family `a|μ|^p/p - f(s)` over the pinned parameter sets.
fn power_family() -> Vec<PowerHamiltonian> {
    let mut out = Vec::new();
    for p in [2.0, 3.0, 4.0] {
        for a in [0.5, 1.0, 2.0] {
            let fs: [Profile; 3] = [
                ("0", |_| 0.0),
                ("s", |s| s),
                ("cos(2 pi s)", |s| (2.0 * PI * s).cos()),
            ];
            for (name, f) in fs {
                out.push(
                    PowerHamiltonian::new(p, move |_| a, f, format!("p={p} a={a} f={name}"))
                        .unwrap(),
                );
            }
        }
    }
    out
}

fn cosine_well() -> PowerHamiltonian {
    PowerHamiltonian::new(
        2.0,
        |_| 1.0,
        |s| (2.0 * PI * s).cos(),
        "mu^2/2 - cos(2 pi s)",
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for h in power_family() {
        for _ in 0..10_000 {
            let s: f64 = r.gen();
            let lambda: f64 = r.gen_range(-5.0..5.0);
            let num = legendre(&h, s, lambda).unwrap();
            worst = worst.max((num - h.conjugate_closed_form(s, lambda)).abs());
        }
    }
    outcome(
        worst <= 1e-7,
        format!("max error {worst:.3e} over 27 x 10^4 samples"),
    )
}

fn min_lagrangian_at_rest(h: &dyn Hamiltonian) -> f64 {
    (0..=1000)
        .map(|i| legendre(h, i as f64 / 1000.0, 0.0).unwrap())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_2() -> Outcome {
    let c = critical_constant(&cosine_well()).unwrap().value;
    let err = (c + 1.0).abs();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut hams: Vec<Box<dyn Hamiltonian>> = power_family()
        .into_iter()
        .map(|h| Box::new(h) as Box<dyn Hamiltonian>)
        .collect();
    hams.push(Box::new(cosine_well()));
    for h in &hams {
        let c = critical_constant(h.as_ref()).unwrap().value;
        worst_gap = worst_gap.max(c - min_lagrangian_at_rest(h.as_ref()));
    }
    outcome(
        err <= 1e-6 && worst_gap <= 1e-9,
        format!("|c + 1| = {err:.3e}; max c - min L(s,0) = {worst_gap:.3e}"),
    )
}

fn random_power(r: &mut ChaCha8Rng) -> PowerHamiltonian {
    let p = r.gen_range(1.5..4.0);
    let (a0, a1, k) = (
        r.gen_range(0.5..2.0),
        r.gen_range(0.0..0.4),
        r.gen_range(1..4) as f64,
    );
    let (b, c) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    PowerHamiltonian::new(
        p,
        move |s| a0 * (1.0 + a1 * (2.0 * PI * k * s).sin()),
        move |s| b * (2.0 * PI * s).cos() + c * s,
        "random",
    )
    .unwrap()
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    for case in 0..20 {
        let h = random_power(&mut r);
        let floor = -critical_constant(&h).unwrap().value;
        let level = if case % 5 == 0 {
            floor
        } else {
            floor + r.gen_range(0.0..2.0)
        };
        let sol = stationary_solution(&h, level, 257).unwrap();
        worst = worst.max(sol.max_residual);
        let below = stationary_solution(&h, floor - r.gen_range(1e-3..1.0), 257);
        if matches!(below, Err(HamiltonianError::LevelBelowMinimum { .. })) {
            rejected += 1;
        }
    }
    outcome(
        worst <= 1e-8 && rejected == 20,
        format!("max residual {worst:.3e}; {rejected}/20 sub-critical levels rejected"),
    )
}

fn single_arc(h: HamiltonianRef, limiter: [f64; 2]) -> NetworkLagrangian {
    let net = Network::build(
        &[vs("a", &[0.0]), vs("b", &[1.0])],
        &[ArcSpec::straight("ab", "a", "b", &[0.0], &[1.0], 11)],
    )
    .unwrap();
    NetworkLagrangian::new(net, vec![h], FluxLimiter::new(limiter.to_vec())).unwrap()
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut violations = 0;
    let mut total = 0;
    let mut worst = f64::INFINITY;
    for h in power_family() {
        let cap = critical_constant(&h).unwrap().value;
        let h: HamiltonianRef = Arc::new(h);
        let variants: Vec<NetworkLagrangian> = (0..4)
            .map(|_| {
                let limiter = [cap - r.gen_range(0.0..0.5), cap - r.gen_range(0.0..0.5)];
                single_arc(h.clone(), limiter)
            })
            .collect();
        for case in 0..200 {
            let nl = &variants[case % variants.len()];
            let n = r.gen_range(3..30);
            let mut t = 0.0;
            let pick = |r: &mut ChaCha8Rng| match r.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => r.gen::<f64>(),
            };
            let s0 = pick(&mut r);
            let mut eta = vec![(t, s0)];
            for k in 1..n {
                t += r.gen_range(0.01..0.2);
                eta.push((t, if k == n - 1 { s0 } else { pick(&mut r) }));
            }
            let rep = check_loop_lower_bound(nl, ArcId(0), &eta).unwrap();
            total += 1;
            worst = worst.min(rep.margin + rep.tolerance);
            if !rep.passed {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {total} loops; smallest slack {worst:.3e}"),
    )
}

/// Unit square with one diagonal.
fn square_network() -> NetworkLagrangian {
    let net = Network::build(
        &[
            vs("a", &[0.0, 0.0]),
            vs("b", &[1.0, 0.0]),
            vs("c", &[1.0, 1.0]),
            vs("d", &[0.0, 1.0]),
        ],
        &[
            ArcSpec::straight("ab", "a", "b", &[0.0, 0.0], &[1.0, 0.0], 11),
            ArcSpec::straight("bc", "b", "c", &[1.0, 0.0], &[1.0, 1.0], 11),
            ArcSpec::straight("cd", "c", "d", &[1.0, 1.0], &[0.0, 1.0], 11),
            ArcSpec::straight("da", "d", "a", &[0.0, 1.0], &[0.0, 0.0], 11),
            ArcSpec::straight("ac", "a", "c", &[0.0, 0.0], &[1.0, 1.0], 11),
        ],
    )
    .unwrap();
    let hams: Vec<HamiltonianRef> = vec![
        quadratic(),
        Arc::new(PowerHamiltonian::constant(3.0, 1.0, 0.5).unwrap()),
        Arc::new(
            PowerHamiltonian::new(2.0, |_| 1.0, |s| 0.5 * (2.0 * PI * s).cos(), "cos well")
                .unwrap(),
        ),
        Arc::new(PowerHamiltonian::new(4.0, |s| 1.0 + s, |s| s, "p=4").unwrap()),
        Arc::new(PowerHamiltonian::constant(2.0, 2.0, 0.2).unwrap()),
    ];
    let mut limiter = FluxLimiter::maximal(&net, &hams).unwrap();
    limiter.set(VertexId(1), limiter.get(VertexId(1)) - 0.3);
    NetworkLagrangian::new(net, hams, limiter).unwrap()
}

fn random_walk_knots(r: &mut ChaCha8Rng, t: &mut f64, from: f64, to: f64) -> Vec<(f64, f64)> {
    let steps = r.gen_range(2..12);
    let mut knots = vec![(*t, from)];
    for k in 1..steps {
        let base = from + (to - from) * k as f64 / steps as f64;
        let s = (base + r.gen_range(-0.15..0.15)).clamp(0.02, 0.98);
        *t += r.gen_range(0.01..0.08);
        knots.push((*t, s));
    }
    *t += r.gen_range(0.01..0.08);
    knots.push((*t, to));
    knots
}

/// Random curve on the square: dwells, excursions into arcs and back, and
/// traversals, optionally starting and ending inside an arc.
fn random_network_curve(r: &mut ChaCha8Rng, net: &Network) -> NetworkCurve {
    let mut t = 0.0;
    let mut pieces = Vec::new();
    let mut at = VertexId(r.gen_range(0..net.vertices().len()));
    if r.gen_bool(0.5) {
        let arr = net.arrivals(at)[r.gen_range(0..net.arrivals(at).len())];
        let s0 = r.gen_range(0.05..0.95);
        pieces.push(Piece::Move {
            arc: arr.arc,
            knots: random_walk_knots(r, &mut t, s0, arr.end.param()),
        });
    }
    for _ in 0..r.gen_range(1..7) {
        let arrivals = net.arrivals(at);
        let arr = arrivals[r.gen_range(0..arrivals.len())];
        let here = arr.end.param();
        match r.gen_range(0..3) {
            0 => {
                let d = r.gen_range(0.05..0.5);
                pieces.push(Piece::Dwell {
                    vertex: at,
                    start: t,
                    end: t + d,
                });
                t += d;
            }
            1 => {
                let depth = r.gen_range(0.05..0.95);
                let turn = if here == 0.0 { depth } else { 1.0 - depth };
                let mut knots = random_walk_knots(r, &mut t, here, turn);
                let back = random_walk_knots(r, &mut t, turn, here);
                knots.extend_from_slice(&back[1..]);
                pieces.push(Piece::Move {
                    arc: arr.arc,
                    knots,
                });
            }
            _ => {
                let there = 1.0 - here;
                pieces.push(Piece::Move {
                    arc: arr.arc,
                    knots: random_walk_knots(r, &mut t, here, there),
                });
                let a = net.arc(arr.arc);
                at = if there == 0.0 { a.tail() } else { a.head() };
            }
        }
    }
    if r.gen_bool(0.5) {
        let arrivals = net.arrivals(at);
        let arr = arrivals[r.gen_range(0..arrivals.len())];
        let s1 = r.gen_range(0.05..0.95);
        pieces.push(Piece::Move {
            arc: arr.arc,
            knots: random_walk_knots(r, &mut t, arr.end.param(), s1),
        });
    }
    NetworkCurve::new(net, pieces).unwrap()
}

fn criterion_5() -> Outcome {
    let nl = square_network();
    let net = nl.network();
    let mut r = rng(5);
    let (mut worse, mut inadmissible, mut remark) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let curve = random_network_curve(&mut r, net);
        let reduced = make_admissible(&nl, &curve).unwrap();
        let (before, after) = (action(&nl, &curve).unwrap(), action(&nl, &reduced).unwrap());
        let duration = curve.end_time() - curve.start_time();
        let tol = 1e-9 + 1e-6 * curve.max_step() * duration;
        worst = worst.max(after - before);
        if after > before + tol {
            worse += 1;
        }
        if !reduced.is_admissible(net) {
            inadmissible += 1;
        }
        if !check_reduction_properties(net, &curve, &reduced, 200).passed() {
            remark += 1;
        }
    }
    outcome(
        worse + inadmissible + remark == 0,
        format!(
            "action increases {worse}, inadmissible {inadmissible}, pointwise mismatches {remark}; \
             max change {worst:.3e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let family = power_family();
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for _ in 0..100 {
        let hams: Vec<HamiltonianRef> = (0..3)
            .map(|_| Arc::new(family[r.gen_range(0..family.len())].clone()) as HamiltonianRef)
            .collect();
        let base = star(0.0);
        let net = base.network().clone();
        let mut limiter = FluxLimiter::maximal(&net, &hams).unwrap();
        for v in net.vertex_ids() {
            limiter.set(v, limiter.get(v) - r.gen_range(0.0..0.5));
        }
        let nl = NetworkLagrangian::new(net, hams, limiter).unwrap();
        let net = nl.network();
        // arms leave the center at s = 0
        let (a, b) = (r.gen_range(0..3), r.gen_range(0..3));
        let mut t = 0.0;
        let mut pieces = vec![Piece::Move {
            arc: ArcId(a),
            knots: {
                let s0 = r.gen_range(0.05..0.95);
                random_walk_knots(&mut r, &mut t, s0, 0.0)
            },
        }];
        if r.gen_bool(0.5) {
            let d = r.gen_range(0.05..1.0);
            pieces.push(Piece::Dwell {
                vertex: VertexId(0),
                start: t,
                end: t + d,
            });
            t += d;
        }
        pieces.push(Piece::Move {
            arc: ArcId(b),
            knots: {
                let s1 = r.gen_range(0.05..0.95);
                random_walk_knots(&mut r, &mut t, 0.0, s1)
            },
        });
        let curve = NetworkCurve::new(net, pieces).unwrap();
        let rep = check_excursion_bound(&nl, &curve).unwrap();
        slack = slack.min(rep.action - rep.bound);
        if !rep.passed {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in 100 excursions; smallest slack {slack:.3e}"),
    )
}

fn hopf_lax_run(n_s: usize, dt: f64) -> (ValueGrid, f64) {
    let nl = segment();
    let g = Grid::new(n_s, dt, 0.5).unwrap();
    let solver = Solver::new(&nl, g, Scheme::SemiLagrangian).unwrap();
    let vg = solver.lax_oleinik(&|_, s| (s - 0.5).abs()).unwrap();
    let mut err: f64 = 0.0;
    for k in 0..vg.layer_count() {
        let t = vg.time(k);
        for (i, u) in vg.arc_profile(ArcId(0), k).iter().enumerate() {
            let s = g.param(i);
            let exact = if k == 0 {
                (s - 0.5).abs()
            } else {
                hopf_lax(s, t)
            };
            err = err.max((u - exact).abs());
        }
    }
    (vg, err)
}

fn criterion_7(done: &mut Computed) -> Outcome {
    let start = Instant::now();
    let (vg, coarse) = hopf_lax_run(201, 1.0 / 400.0);
    let (vg2, fine) = hopf_lax_run(401, 1.0 / 800.0);
    let ratio = coarse / fine;
    let secs = start.elapsed().as_secs_f64();
    register(done, "hopf-lax 201", segment(), vg);
    register(done, "hopf-lax 401", segment(), vg2);
    outcome(
        coarse <= 2e-2 && (1.4..=2.6).contains(&ratio) && secs < 60.0,
        format!("max error {coarse:.3e}, refined {fine:.3e}, ratio {ratio:.2}, {secs:.1}s"),
    )
}

fn star_run(c: f64) -> (NetworkLagrangian, ValueGrid) {
    let nl = star(c);
    let g = Grid::new(201, 1.0 / 400.0, 1.0).unwrap();
    let vg = Solver::new(&nl, g, Scheme::SemiLagrangian)
        .unwrap()
        .lax_oleinik(&|_, _| 0.0)
        .unwrap();
    (nl, vg)
}

fn criterion_8(done: &mut Computed) -> Outcome {
    let (nl0, zero) = star_run(0.0);
    let (nl1, neg) = star_run(-1.0);
    let mut center0: f64 = 0.0;
    let mut center1: f64 = 0.0;
    let mut arm: f64 = 0.0;
    let d = 0.5;
    for k in 0..neg.layer_count() {
        let t = neg.time(k);
        center0 = center0.max(zero.value(k, 0).abs());
        center1 = center1.max((neg.value(k, 0) + t).abs());
        if k > 0 {
            for a in 0..3 {
                let u = neg.value_at(&on(a, d), k);
                arm = arm.max((u - dwell_oracle(d, t)).abs());
            }
        }
    }
    register(done, "star c=0", nl0, zero);
    register(done, "star c=-1", nl1, neg);
    outcome(
        center0 == 0.0 && center1 <= 1e-9 && arm <= 2e-2,
        format!("c=0 center {center0:.1e}; c=-1 center {center1:.3e}; arm d=0.5 {arm:.3e}"),
    )
}

fn register(done: &mut Computed, name: &str, nl: NetworkLagrangian, vg: ValueGrid) {
    let scheme = vg.scheme();
    let g = *vg.grid();
    done.grids.push((
        name.into(),
        Box::new(move || Solver::new(&nl, g, scheme).unwrap().dpp_defect(&vg)),
    ));
}

fn criterion_9(done: &mut Computed) -> Outcome {
    let mut r = rng(9);
    let (mut above, mut below) = (0, 0);
    let mut max_gap: f64 = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for case in 0..20 {
        let pick = |r: &mut ChaCha8Rng| -> HamiltonianRef {
            let p = [2.0, 3.0][r.gen_range(0..2)];
            Arc::new(
                PowerHamiltonian::constant(p, r.gen_range(0.5..2.0), r.gen_range(-0.5..0.5))
                    .unwrap(),
            )
        };
        let (h0, h1) = (pick(&mut r), pick(&mut r));
        let caps = [
            critical_constant(h0.as_ref()).unwrap().value,
            critical_constant(h0.as_ref())
                .unwrap()
                .value
                .min(critical_constant(h1.as_ref()).unwrap().value),
            critical_constant(h1.as_ref()).unwrap().value,
        ];
        let limiter = caps.iter().map(|c| c - r.gen_range(0.0..0.8)).collect();
        let nl = two_arcs(h0, h1, limiter);
        let n_s = 9;
        let dt = 0.1;
        let layers = r.gen_range(3..9);
        let horizon = layers as f64 * dt;
        let g = Grid::new(n_s, dt, horizon).unwrap();
        let node = |r: &mut ChaCha8Rng| -> NetworkPoint {
            let i = r.gen_range(0..2 * (n_s - 1) + 1);
            if i == n_s - 1 {
                NetworkPoint::Vertex(VertexId(1))
            } else if i == 0 {
                NetworkPoint::Vertex(VertexId(0))
            } else if i == 2 * (n_s - 1) {
                NetworkPoint::Vertex(VertexId(2))
            } else if i < n_s - 1 {
                on(0, i as f64 / (n_s - 1) as f64)
            } else {
                on(1, (i - (n_s - 1)) as f64 / (n_s - 1) as f64)
            }
        };
        let (x, y) = (node(&mut r), node(&mut r));
        let full = g.with_reach(n_s - 1).with_span(layers);
        let solver = Solver::new(&nl, full, Scheme::Graph).unwrap();
        let dp = solver.minimal_action(&x, 0.0, &y, horizon).unwrap().value;
        let k4 = brute_force_minimal_action(&nl, &g, &x, &y, horizon, 4).unwrap();
        let k3 = brute_force_minimal_action(&nl, &g, &x, &y, horizon, 3).unwrap();
        let gap = k3 - k4;
        max_gap = max_gap.max(gap);
        worst = worst.max(dp - k4);
        if dp > k4 + 1e-9 {
            above += 1;
        }
        if dp < k4 - gap - 1e-12 {
            below += 1;
        }
        if case == 0 {
            let run = solver.source_run(&x, layers);
            register(done, "oracle instance", nl.clone(), run);
        }
    }
    outcome(
        above == 0 && below == 0,
        format!(
            "DP above oracle {above}, below oracle - gap {below}; max DP - oracle {worst:.3e}, \
             max gap {max_gap:.3e}"
        ),
    )
}

/// Max parameter speed of the graph minimizer ending at `target` at the
/// final layer, on grids refined twice by 2.
fn minimizer_speeds(
    nl: &NetworkLagrangian,
    base: (usize, f64),
    horizon: f64,
    u0: &dyn Fn(ArcId, f64) -> f64,
    target: &NetworkPoint,
    done: &mut Computed,
    name: &str,
) -> Vec<f64> {
    (0..3)
        .map(|level| {
            let f = 1usize << level;
            let g = Grid::new((base.0 - 1) * f + 1, base.1 / f as f64, horizon).unwrap();
            let solver = Solver::new(nl, g, Scheme::Graph).unwrap();
            let vg = solver.lax_oleinik(u0).unwrap();
            let k = vg.layer_count() - 1;
            let curve = solver.minimizer(&vg, vg.nodes().snap(target), k).unwrap();
            if level == 0 {
                register(done, name, nl.clone(), vg);
            }
            curve.max_parameter_speed()
        })
        .collect()
}

fn criterion_10(done: &mut Computed) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    let seg = segment();
    let star1 = star(-1.0);
    let cases: Vec<(&str, &NetworkLagrangian, f64, Datum, NetworkPoint)> = vec![
        (
            "segment",
            &seg,
            0.5,
            Box::new(|_, s| (s - 0.5).abs()),
            on(0, 0.8),
        ),
        ("star", &star1, 1.0, Box::new(|_, _| 0.0), on(0, 0.5)),
    ];
    for (name, nl, horizon, u0, target) in cases {
        let speeds = minimizer_speeds(nl, (201, 1.0 / 400.0), horizon, &*u0, &target, done, name);
        for w in speeds.windows(2) {
            worst = worst.max((w[1] - w[0]).abs() / w[0].abs().max(1e-12));
        }
        detail.push(format!(
            "{name} {}",
            speeds
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
                .join("/")
        ));
    }
    outcome(
        worst <= 0.1,
        format!(
            "speeds {}; max relative change {:.1}%",
            detail.join(", "),
            100.0 * worst
        ),
    )
}

fn criterion_11() -> Outcome {
    let nl = star(-1.0);
    let g = Grid::new(201, 1.0 / 400.0, 1.0).unwrap();
    let solver = Solver::new(&nl, g, Scheme::Graph).unwrap();
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    let point = |r: &mut ChaCha8Rng| {
        if r.gen_bool(0.1) {
            center()
        } else {
            on(r.gen_range(0..3), r.gen_range(0.002..0.998))
        }
    };
    let nudge = |r: &mut ChaCha8Rng, p: &NetworkPoint| match *p {
        NetworkPoint::OnArc { arc, s } => NetworkPoint::OnArc {
            arc,
            s: (s + r.gen_range(-1e-3..1e-3)).clamp(1e-3, 1.0 - 1e-3),
        },
        v => v,
    };
    for _ in 0..50 {
        let (x, y) = (point(&mut r), point(&mut r));
        let t = r.gen_range(0.0..0.4);
        let rr = t + r.gen_range(0.1..0.6);
        let (x2, y2) = (nudge(&mut r, &x), nudge(&mut r, &y));
        let t2 = (t + r.gen_range(-1e-3f64..1e-3)).max(0.0);
        let r2 = rr + r.gen_range(-1e-3..1e-3);
        let a = solver.minimal_action(&x, t, &y, rr).unwrap().value;
        let b = solver.minimal_action(&x2, t2, &y2, r2).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= 0.1,
        format!("max |dS| {worst:.3e} over 50 quadruples"),
    )
}

fn criterion_12() -> Outcome {
    let opts = VerifyOptions::default();
    let mut lines = Vec::new();
    let mut all = true;
    let (vg, _) = hopf_lax_run(201, 1.0 / 400.0);
    let seg = segment();
    let mut runs = vec![("hopf-lax", seg, vg)];
    for c in [0.0, -1.0] {
        let (nl, vg) = star_run(c);
        runs.push((if c == 0.0 { "star c=0" } else { "star c=-1" }, nl, vg));
    }
    let mut r = rng(12);
    for (name, nl, mut vg) in runs {
        let clean = verify_all(&vg, &nl, &opts);
        let node = r.gen_range(0..vg.nodes().len());
        let layer = r.gen_range(1..vg.layer_count());
        vg.set_value(layer, node, vg.value(layer, node) + 0.1);
        let faulty = verify_all(&vg, &nl, &opts);
        all &= clean.passed() && !faulty.passed();
        lines.push(format!(
            "{name}: clean {}, fault {}",
            if clean.passed() { "pass" } else { "fail" },
            if faulty.passed() { "missed" } else { "flagged" }
        ));
    }
    outcome(all, lines.join("; "))
}

fn criterion_13(done: &Computed) -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, defect) in &done.grids {
        worst = worst.max(defect());
    }
    outcome(
        worst <= 1e-12,
        format!("max defect {worst:.3e} over {} grids", done.grids.len()),
    )
}

fn main() {
    // cargo passes harness flags such as --nocapture; none apply here
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let mut done = Computed::default();
    let mut failed = 0;
    let mut clock = Instant::now();
    let mut report = |n: usize, o: Outcome| {
        println!(
            "criterion {n:>2}: {} {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            clock.elapsed().as_secs_f64()
        );
        clock = Instant::now();
        if !o.passed {
            failed += 1;
        }
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7(&mut done));
    report(8, criterion_8(&mut done));
    report(9, criterion_9(&mut done));
    report(10, criterion_10(&mut done));
    report(11, criterion_11());
    report(12, criterion_12());
    report(13, criterion_13(&done));
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
