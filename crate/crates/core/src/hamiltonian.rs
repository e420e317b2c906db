//! Arc Hamiltonians `H_γ(s, μ)`, their Fenchel conjugates and the constants
//! derived from them.

use std::fmt;
use std::sync::Arc as Shared;

use crate::error::HamiltonianError;
use crate::network::{Network, VertexId, PARAM_EPS};

/// Samples per bracket in the conjugate search.
const BRACKET_SAMPLES: usize = 33;
const MAX_DOUBLINGS: usize = 60;
const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Default s-grid for critical constants and stationary solutions.
pub const DEFAULT_S_NODES: usize = 257;
/// Tolerance used when comparing flux limiters with their caps.
pub const LIMITER_TOL: f64 = 1e-9;

pub trait Hamiltonian: Send + Sync + fmt::Debug {
    fn eval(&self, s: f64, mu: f64) -> f64;

    /// Momentum range in which `eval` is finite, used by the sampled checks.
    fn probe_range(&self) -> (f64, f64) {
        (-8.0, 8.0)
    }

    fn describe(&self) -> String;
}

pub type HamiltonianRef = Shared<dyn Hamiltonian>;

pub type Coefficient = Shared<dyn Fn(f64) -> f64 + Send + Sync>;

/// `H(s, μ) = a(s) |μ|^p / p - f(s)` with `p > 1` and `a > 0`.
#[derive(Clone)]
pub struct PowerHamiltonian {
    p: f64,
    a: Coefficient,
    f: Coefficient,
    label: String,
}

impl fmt::Debug for PowerHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerHamiltonian({})", self.label)
    }
}

impl PowerHamiltonian {
    pub fn new(
        p: f64,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Result<Self, HamiltonianError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(HamiltonianError::InvalidParameter(format!(
                "exponent p = {p} must exceed 1"
            )));
        }
        let a: Coefficient = Shared::new(a);
        for i in 0..=64 {
            let s = i as f64 / 64.0;
            let v = a(s);
            if !(v > 0.0) || !v.is_finite() {
                return Err(HamiltonianError::InvalidParameter(format!(
                    "coefficient a(s) = {v} at s = {s} must be positive"
                )));
            }
        }
        Ok(PowerHamiltonian {
            p,
            a,
            f: Shared::new(f),
            label: label.into(),
        })
    }

    /// Constant coefficients.
    pub fn constant(p: f64, a: f64, f: f64) -> Result<Self, HamiltonianError> {
        Self::new(
            p,
            move |_| a,
            move |_| f,
            format!("power{{p={p}, a={a}, f={f}}}"),
        )
    }

    /// `μ² / 2`.
    pub fn quadratic() -> Self {
        Self::constant(2.0, 1.0, 0.0).expect("valid parameters")
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn a(&self, s: f64) -> f64 {
        (self.a)(s)
    }

    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// `a^{1-q} |λ|^q / q + f` with `q = p / (p - 1)`.
    pub fn conjugate_closed_form(&self, s: f64, lambda: f64) -> f64 {
        let q = self.p / (self.p - 1.0);
        self.a(s).powf(1.0 - q) * lambda.abs().powf(q) / q + self.f(s)
    }
}

impl Hamiltonian for PowerHamiltonian {
    fn eval(&self, s: f64, mu: f64) -> f64 {
        self.a(s) * mu.abs().powf(self.p) / self.p - self.f(s)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Sampled Hamiltonian with bilinear interpolation, `+∞` outside its
/// momentum range.
#[derive(Clone, Debug, PartialEq)]
pub struct TableHamiltonian {
    s_nodes: Vec<f64>,
    mu_nodes: Vec<f64>,
    values: Vec<Vec<f64>>,
}

fn bracket_index(nodes: &[f64], x: f64) -> (usize, f64) {
    let k = nodes.partition_point(|&v| v <= x).clamp(1, nodes.len() - 1) - 1;
    let w = ((x - nodes[k]) / (nodes[k + 1] - nodes[k])).clamp(0.0, 1.0);
    (k, w)
}

impl TableHamiltonian {
    pub fn new(
        s_nodes: Vec<f64>,
        mu_nodes: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, HamiltonianError> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&s_nodes) || !increasing(&mu_nodes) {
            return Err(HamiltonianError::InvalidTable(
                "node lists need at least two strictly increasing entries".into(),
            ));
        }
        if s_nodes[0] > 0.0 || *s_nodes.last().unwrap() < 1.0 {
            return Err(HamiltonianError::InvalidTable(
                "s nodes must cover [0, 1]".into(),
            ));
        }
        if values.len() != s_nodes.len() || values.iter().any(|r| r.len() != mu_nodes.len()) {
            return Err(HamiltonianError::InvalidTable(format!(
                "expected a {}x{} value array",
                s_nodes.len(),
                mu_nodes.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HamiltonianError::InvalidTable("non-finite value".into()));
        }
        Ok(TableHamiltonian {
            s_nodes,
            mu_nodes,
            values,
        })
    }

    /// Tabulates `h` on the given nodes.
    pub fn sample(
        h: &dyn Hamiltonian,
        s_nodes: Vec<f64>,
        mu_nodes: Vec<f64>,
    ) -> Result<Self, HamiltonianError> {
        let values = s_nodes
            .iter()
            .map(|&s| mu_nodes.iter().map(|&m| h.eval(s, m)).collect())
            .collect();
        Self::new(s_nodes, mu_nodes, values)
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn mu_nodes(&self) -> &[f64] {
        &self.mu_nodes
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

impl Hamiltonian for TableHamiltonian {
    fn eval(&self, s: f64, mu: f64) -> f64 {
        let (lo, hi) = (self.mu_nodes[0], *self.mu_nodes.last().unwrap());
        if !(lo..=hi).contains(&mu) {
            return f64::INFINITY;
        }
        let (i, ws) = bracket_index(&self.s_nodes, s);
        let (j, wm) = bracket_index(&self.mu_nodes, mu);
        let v = &self.values;
        let row = |r: usize| v[r][j] + wm * (v[r][j + 1] - v[r][j]);
        row(i) + ws * (row(i + 1) - row(i))
    }

    fn probe_range(&self) -> (f64, f64) {
        (self.mu_nodes[0], *self.mu_nodes.last().unwrap())
    }

    fn describe(&self) -> String {
        format!(
            "table{{{}x{}, mu in [{}, {}]}}",
            self.s_nodes.len(),
            self.mu_nodes.len(),
            self.mu_nodes[0],
            self.mu_nodes.last().unwrap()
        )
    }
}

/// `H̃(s, μ) = H(1 - s, -μ)`, the Hamiltonian seen along the inverse arc.
#[derive(Clone, Debug)]
pub struct Reversed(pub HamiltonianRef);

impl Hamiltonian for Reversed {
    fn eval(&self, s: f64, mu: f64) -> f64 {
        self.0.eval(1.0 - s, -mu)
    }

    fn probe_range(&self) -> (f64, f64) {
        let (lo, hi) = self.0.probe_range();
        (-hi, -lo)
    }

    fn describe(&self) -> String {
        format!("reversed({})", self.0.describe())
    }
}

/// Wraps a closure.
pub struct FnHamiltonian<F> {
    f: F,
    label: String,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnHamiltonian {
            f,
            label: label.into(),
        }
    }
}

impl<F> fmt::Debug for FnHamiltonian<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnHamiltonian({})", self.label)
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, s: f64, mu: f64) -> f64 {
        (self.f)(s, mu)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Value and maximizer of `μ ↦ λμ - H(s, μ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub maximizer: f64,
}

fn golden_max(
    mut phi: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    best: (f64, f64),
) -> (f64, f64) {
    let (mut bx, mut bv) = best;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = phi(c);
    let mut fd = phi(d);
    for _ in 0..200 {
        if b - a <= 1e-11 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = phi(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v > bv {
                bx = x;
                bv = v;
            }
        }
    }
    (bx, bv)
}

/// `L(s, λ) = max_μ (λμ - H(s, μ))` together with its maximizer.
pub fn legendre_argmax(
    h: &dyn Hamiltonian,
    s: f64,
    lambda: f64,
) -> Result<Conjugate, HamiltonianError> {
    let phi = |mu: f64| {
        let v = lambda * mu - h.eval(s, mu);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut half = 1.0 + 2.0 * lambda.abs();
    for _ in 0..MAX_DOUBLINGS {
        let step = 2.0 * half / (BRACKET_SAMPLES - 1) as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        let samples: Vec<f64> = (0..BRACKET_SAMPLES)
            .map(|i| phi(-half + i as f64 * step))
            .collect();
        for (i, &v) in samples.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        let (i, v) = best;
        if v.is_finite() && i > 0 && i < BRACKET_SAMPLES - 1 {
            let x = -half + i as f64 * step;
            let (maximizer, value) = golden_max(phi, x - step, x + step, (x, v));
            return Ok(Conjugate { value, maximizer });
        }
        half *= 2.0;
    }
    Err(HamiltonianError::BracketFailure { s, lambda })
}

pub fn legendre(h: &dyn Hamiltonian, s: f64, lambda: f64) -> Result<f64, HamiltonianError> {
    legendre_argmax(h, s, lambda).map(|c| c.value)
}

/// An arc Lagrangian, evaluated as the conjugate of its Hamiltonian.
#[derive(Clone, Debug)]
pub struct ArcLagrangian {
    ham: HamiltonianRef,
}

impl ArcLagrangian {
    pub fn new(ham: HamiltonianRef) -> Self {
        ArcLagrangian { ham }
    }

    pub fn hamiltonian(&self) -> &HamiltonianRef {
        &self.ham
    }

    pub fn eval(&self, s: f64, lambda: f64) -> Result<f64, HamiltonianError> {
        legendre(self.ham.as_ref(), s, lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalConstant {
    pub value: f64,
    /// Where `min_μ H(s, ·)` is largest.
    pub at: f64,
    /// Spacing of the s-grid searched before refinement.
    pub resolution: f64,
}

/// `c_γ = -max_s min_μ H(s, μ) = min_s L(s, 0)`.
pub fn critical_constant(h: &dyn Hamiltonian) -> Result<CriticalConstant, HamiltonianError> {
    critical_constant_on(h, DEFAULT_S_NODES)
}

pub fn critical_constant_on(
    h: &dyn Hamiltonian,
    nodes: usize,
) -> Result<CriticalConstant, HamiltonianError> {
    let n = nodes.max(3);
    let ds = 1.0 / (n - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..n {
        let v = legendre(h, i as f64 * ds, 0.0)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, v) = best;
    let s0 = i as f64 * ds;
    let lo = (s0 - ds).max(0.0);
    let hi = (s0 + ds).min(1.0);
    // golden_max maximizes; negate and swallow conjugate failures as -inf
    let mut failure = None;
    let (at, neg) = golden_max(
        |s| match legendre(h, s, 0.0) {
            Ok(v) => -v,
            Err(e) => {
                failure = Some(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        (s0, -v),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CriticalConstant {
        value: -neg,
        at,
        resolution: ds,
    })
}

/// Crude estimate of `sup |∂H/∂μ|` on `[0,1] × [-big_m, big_m]`.
pub fn local_lipschitz_estimate(h: &dyn Hamiltonian, big_m: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let s = i as f64 / (n - 1) as f64;
        let mus: Vec<f64> = (0..n)
            .map(|k| -big_m + 2.0 * big_m * k as f64 / (n - 1) as f64)
            .collect();
        for w in mus.windows(2) {
            let slope = (h.eval(s, w[1]) - h.eval(s, w[0])).abs() / (w[1] - w[0]);
            if slope.is_finite() {
                worst = worst.max(slope);
            }
        }
    }
    worst
}

/// Flux limiter `c_x`, one value per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxLimiter(Vec<f64>);

impl FluxLimiter {
    pub fn new(values: Vec<f64>) -> Self {
        FluxLimiter(values)
    }

    pub fn uniform(vertices: usize, c: f64) -> Self {
        FluxLimiter(vec![c; vertices])
    }

    /// `c_x = min_{γ ∈ Γ_x} c_γ` at every vertex.
    pub fn maximal(net: &Network, hams: &[HamiltonianRef]) -> Result<Self, HamiltonianError> {
        let caps = vertex_caps(net, hams)?;
        Ok(FluxLimiter(caps))
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.0[v.0]
    }

    pub fn set(&mut self, v: VertexId, c: f64) {
        self.0[v.0] = c;
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_count(net: &Network, hams: &[HamiltonianRef]) -> Result<(), HamiltonianError> {
    if hams.len() != net.arcs().len() {
        return Err(HamiltonianError::CountMismatch {
            expected: net.arcs().len(),
            found: hams.len(),
        });
    }
    Ok(())
}

pub fn arc_critical_constants(hams: &[HamiltonianRef]) -> Result<Vec<f64>, HamiltonianError> {
    hams.iter()
        .map(|h| critical_constant(h.as_ref()).map(|c| c.value))
        .collect()
}

/// `min_{γ ∈ Γ_x} c_γ` for every vertex.
pub fn vertex_caps(net: &Network, hams: &[HamiltonianRef]) -> Result<Vec<f64>, HamiltonianError> {
    check_count(net, hams)?;
    let cs = arc_critical_constants(hams)?;
    Ok(net
        .vertex_ids()
        .map(|v| {
            net.arrivals(v)
                .iter()
                .map(|a| cs[a.arc.0])
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexMargin {
    pub vertex: VertexId,
    pub limiter: f64,
    /// `min_{γ ∈ Γ_x} c_γ`.
    pub cap: f64,
    /// `min_{γ ∈ Γ_x} min_s L_γ(s, 0)` on an independent grid.
    pub lagrangian_floor: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimiterReport {
    pub vertices: Vec<VertexMargin>,
}

impl LimiterReport {
    pub fn min_margin(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

fn lagrangian_floor(h: &dyn Hamiltonian, nodes: usize) -> Result<f64, HamiltonianError> {
    (0..nodes)
        .map(|i| legendre(h, i as f64 / (nodes - 1) as f64, 0.0))
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
}

pub fn validate_flux_limiter(
    net: &Network,
    hams: &[HamiltonianRef],
    fl: &FluxLimiter,
) -> Result<LimiterReport, HamiltonianError> {
    check_count(net, hams)?;
    if fl.len() != net.vertices().len() {
        let missing = net.vertices()[fl.len().min(net.vertices().len() - 1)]
            .id
            .clone();
        return Err(HamiltonianError::MissingLimiter(missing));
    }
    let caps = vertex_caps(net, hams)?;
    let floors: Vec<f64> = hams
        .iter()
        .map(|h| lagrangian_floor(h.as_ref(), 1001))
        .collect::<Result<_, _>>()?;
    let mut vertices = Vec::new();
    for v in net.vertex_ids() {
        let c = fl.get(v);
        let floor = net
            .arrivals(v)
            .iter()
            .map(|a| floors[a.arc.0])
            .fold(f64::INFINITY, f64::min);
        let margin = caps[v.0] - c;
        if margin < -LIMITER_TOL {
            return Err(HamiltonianError::LimiterTooLarge {
                vertex: net.vertex(v).id.clone(),
                excess: -margin,
            });
        }
        vertices.push(VertexMargin {
            vertex: v,
            limiter: c,
            cap: caps[v.0],
            lagrangian_floor: floor,
            margin,
        });
    }
    Ok(LimiterReport { vertices })
}

/// Solution of `H(s, U') = a` with `U(0) = 0` and `U' = σ_a⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationarySolution {
    pub level: f64,
    pub s: Vec<f64>,
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub max_residual: f64,
}

impl StationarySolution {
    /// Piecewise-linear interpolation of `U`.
    pub fn value(&self, s: f64) -> f64 {
        let (k, w) = bracket_index(&self.s, s);
        self.u[k] + w * (self.u[k + 1] - self.u[k])
    }
}

/// Largest root of `H(s, ·) = a`.
pub fn sigma_plus(h: &dyn Hamiltonian, s: f64, a: f64) -> Result<f64, HamiltonianError> {
    let bottom = legendre_argmax(h, s, 0.0)?;
    let mu_min = bottom.maximizer;
    if -bottom.value >= a {
        return Ok(mu_min);
    }
    let mut step = 1.0;
    let mut hi = mu_min + step;
    let mut guard = 0;
    while h.eval(s, hi) < a {
        step *= 2.0;
        hi = mu_min + step;
        guard += 1;
        if guard > MAX_DOUBLINGS {
            return Err(HamiltonianError::BracketFailure { s, lambda: 0.0 });
        }
    }
    let mut lo = mu_min;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h.eval(s, mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (h.eval(s, lo) - a).abs() < (h.eval(s, hi) - a).abs() {
        lo
    } else {
        hi
    })
}

pub fn stationary_solution(
    h: &dyn Hamiltonian,
    a: f64,
    nodes: usize,
) -> Result<StationarySolution, HamiltonianError> {
    let c = critical_constant(h)?;
    if a < -c.value - LIMITER_TOL {
        return Err(HamiltonianError::LevelBelowMinimum {
            level: a,
            minimum: 0.0 - c.value,
        });
    }
    let n = nodes.max(2);
    let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let sigma: Vec<f64> = s
        .iter()
        .map(|&si| sigma_plus(h, si, a))
        .collect::<Result<_, _>>()?;
    let mut u = Vec::with_capacity(n);
    u.push(0.0);
    for k in 1..n {
        u.push(u[k - 1] + 0.5 * (sigma[k - 1] + sigma[k]) * (s[k] - s[k - 1]));
    }
    let max_residual = s
        .iter()
        .zip(&sigma)
        .map(|(&si, &m)| (h.eval(si, m) - a).abs())
        .fold(0.0, f64::max);
    Ok(StationarySolution {
        level: a,
        s,
        sigma,
        u,
        max_residual,
    })
}

/// `L̄_γ`: equal to `L_γ` inside the arc, shifted at the endpoints so that
/// `L̄(0,0) = L̄(1,0) = c_tail ∧ c_head`.
pub fn modified_lagrangian(
    h: &dyn Hamiltonian,
    c_tail: f64,
    c_head: f64,
    s: f64,
    lambda: f64,
) -> Result<f64, HamiltonianError> {
    let l = legendre(h, s, lambda)?;
    if s <= PARAM_EPS || s >= 1.0 - PARAM_EPS {
        let end = if s <= PARAM_EPS { 0.0 } else { 1.0 };
        Ok(l + c_tail.min(c_head) - legendre(h, end, 0.0)?)
    } else {
        Ok(l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub max_mismatch: f64,
    pub at: (f64, f64),
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `H_rev(s, μ)` with `H_fwd(1 - s, -μ)` on a sample grid.
pub fn check_compatibility(
    fwd: &dyn Hamiltonian,
    rev: &dyn Hamiltonian,
    tolerance: f64,
) -> CompatibilityReport {
    let (lo, hi) = rev.probe_range();
    let mut report = CompatibilityReport {
        max_mismatch: 0.0,
        at: (0.0, 0.0),
        tolerance,
        passed: true,
    };
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        for k in 0..=40 {
            let mu = lo + (hi - lo) * k as f64 / 40.0;
            let (a, b) = (rev.eval(s, mu), fwd.eval(1.0 - s, -mu));
            let gap = if a == b { 0.0 } else { (a - b).abs() };
            if gap > report.max_mismatch || gap.is_nan() {
                report.max_mismatch = if gap.is_nan() { f64::INFINITY } else { gap };
                report.at = (s, mu);
            }
        }
    }
    report.passed = report.max_mismatch <= tolerance;
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// Largest jump between neighbouring s-samples on the coarse and the
    /// refined grid.
    pub continuity_jumps: (f64, f64),
    pub continuity_ok: bool,
    /// Largest excess of `H(μ₂)` over the chord through `H(μ₁), H(μ₃)`.
    pub convexity_defect: f64,
    pub convexity_ok: bool,
    /// Slopes for which `H(s, μ)/|μ|` was shown to exceed them.
    pub superlinear_slopes: Vec<f64>,
    pub superlinear_ok: bool,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.continuity_ok && self.convexity_ok && self.superlinear_ok
    }
}

/// Sampled checks of continuity, convexity in μ and superlinearity.
pub fn check_assumptions(h: &dyn Hamiltonian) -> AssumptionReport {
    let (lo, hi) = h.probe_range();
    let mus: Vec<f64> = (0..=64).map(|k| lo + (hi - lo) * k as f64 / 64.0).collect();
    let jump = |n: usize| {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            for &mu in &mus {
                let d = (h.eval(a, mu) - h.eval(b, mu)).abs();
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
        worst
    };
    let (coarse, fine) = (jump(32), jump(64));
    let continuity_ok = fine.is_finite() && (fine <= 0.75 * coarse || fine <= 1e-9);

    let mut convexity_defect: f64 = 0.0;
    for i in 0..=16 {
        let s = i as f64 / 16.0;
        let vals: Vec<f64> = mus.iter().map(|&m| h.eval(s, m)).collect();
        for w in vals.windows(3) {
            let chord = 0.5 * (w[0] + w[2]);
            let scale = 1e-9 * (1.0 + w[1].abs());
            convexity_defect = convexity_defect.max(w[1] - chord - scale);
        }
    }
    let convexity_ok = convexity_defect <= 0.0;

    let slopes = vec![1.0, 10.0, 100.0];
    let superlinear_ok = slopes.iter().all(|&k| {
        (0..=8).all(|i| {
            let s = i as f64 / 8.0;
            [1.0, -1.0].iter().all(|&sign| {
                let mut mu = 1.0;
                while mu <= 1e8 {
                    if h.eval(s, sign * mu) / mu > k {
                        return true;
                    }
                    mu *= 2.0;
                }
                false
            })
        })
    });
    AssumptionReport {
        continuity_jumps: (coarse, fine),
        continuity_ok,
        convexity_defect: convexity_defect.max(0.0),
        convexity_ok,
        superlinear_slopes: slopes,
        superlinear_ok,
    }
}
