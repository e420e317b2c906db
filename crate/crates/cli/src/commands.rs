//! The five verbs of the `hjnet` binary.
//!
//! Every command writes its results to the configured output paths, or to
//! stdout when none is given, and reports failure through [`CliError`], whose
//! [`CliError::exit_code`] is the process exit status.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use hjnet::hamiltonian::{
    arc_critical_constants, check_assumptions, check_compatibility, stationary_solution,
    validate_flux_limiter, vertex_caps,
};
use hjnet::solver::{brute_force_minimal_action, fmt_sig, Grid, Scheme, Solver, ValueGrid};
use hjnet::verify::{verify_all, VerifyOptions};
use hjnet::{FluxLimiter, HamiltonianRef, Network, NetworkLagrangian, Reversed};
use thiserror::Error;

use crate::config::{build_grid, parse_point, ConfigError, GridConfig, ProblemConfig};

const COMPATIBILITY_TOL: f64 = 1e-9;
const ORACLE_BREAKPOINTS: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io { .. } | CliError::Parse(_) => 3,
        }
    }

    fn validation(e: impl ToString) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Syntax(_) | ConfigError::Field { .. } => CliError::Parse(e.to_string()),
            ConfigError::Model { .. } => CliError::Validation(e.to_string()),
        }
    }
}

/// Settings shared by all commands; `None` keeps the value from the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<(usize, f64, f64)>,
    pub reach: Option<usize>,
    pub tol: Option<f64>,
}

impl Overrides {
    fn grid(&self, config: &ProblemConfig) -> Result<(Grid, Scheme), CliError> {
        let mut g = match self.grid {
            Some((n_s, dt, horizon)) => {
                let base = config.grid.clone();
                GridConfig {
                    n_s,
                    dt,
                    horizon,
                    reach: base.as_ref().and_then(|g| g.reach),
                    span: base.as_ref().and_then(|g| g.span),
                    scheme: base.and_then(|g| g.scheme),
                }
            }
            None => config.grid_config()?.clone(),
        };
        if self.reach.is_some() {
            g.reach = self.reach;
        }
        Ok(build_grid(&g)?)
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions::default().scaled(self.tol.unwrap_or(1.0))
    }
}

/// Parses `n_s,dt,T`.
pub fn parse_grid_flag(text: &str) -> Result<(usize, f64, f64), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n, dt, t] = parts[..] else {
        return Err(format!("expected `n_s,dt,T`, found `{text}`"));
    };
    let n = n.parse().map_err(|_| format!("bad n_s `{n}`"))?;
    let dt = dt.parse().map_err(|_| format!("bad dt `{dt}`"))?;
    let t = t.parse().map_err(|_| format!("bad T `{t}`"))?;
    Ok((n, dt, t))
}

pub fn load(path: &Path) -> Result<ProblemConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemConfig::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&str>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.into(),
            source,
        }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn lagrangian(config: &ProblemConfig) -> Result<NetworkLagrangian, CliError> {
    let net = config.network()?;
    let hams = config.hamiltonians(&net)?;
    let limiter = config.limiter(&net, &hams)?;
    NetworkLagrangian::new(net, hams, limiter).map_err(CliError::validation)
}

/// Runs every model check and prints one `ok`/`FAIL` line per check.
pub fn validate(config: &ProblemConfig, echo: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let mut lines = String::new();
    let mut failures = Vec::new();
    let mut record = |ok: bool, name: String, detail: String| {
        let _ = writeln!(lines, "{} {name}: {detail}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures.push(name);
        }
    };
    let finish = |lines: String, failures: Vec<String>, out: &mut dyn Write| {
        emit(None, &lines, out)?;
        if failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "failed: {}",
                failures.join(", ")
            )))
        }
    };

    let net = match config.network() {
        Ok(net) => net,
        Err(e @ ConfigError::Model { .. }) => {
            record(false, "network".into(), e.to_string());
            return finish(lines, failures, out);
        }
        Err(e) => return Err(e.into()),
    };
    record(
        true,
        "network".into(),
        format!(
            "{} vertices, {} arcs",
            net.vertices().len(),
            net.arcs().len()
        ),
    );

    let hams = match config.hamiltonians(&net) {
        Ok(h) => h,
        Err(e @ ConfigError::Model { .. }) => {
            record(false, "hamiltonians".into(), e.to_string());
            return finish(lines, failures, out);
        }
        Err(e) => return Err(e.into()),
    };
    for (arc, h) in net.arcs().iter().zip(&hams) {
        let a = check_assumptions(h.as_ref());
        record(
            a.passed(),
            format!("assumptions {}", arc.id()),
            format!(
                "continuity {}, convexity {}, superlinearity {}",
                verdict(a.continuity_ok),
                verdict(a.convexity_ok),
                verdict(a.superlinear_ok)
            ),
        );
        let c = check_compatibility(h.as_ref(), &Reversed(h.clone()), COMPATIBILITY_TOL);
        record(
            c.passed,
            format!("compatibility {}", arc.id()),
            format!("mismatch {}", fmt_sig(c.max_mismatch)),
        );
    }

    match limiter_report(config, &net, &hams) {
        Ok(min_margin) => record(
            true,
            "flux-limiter".into(),
            format!("margin {}", fmt_sig(min_margin)),
        ),
        Err(LimiterFailure::Config(e)) => return Err(e.into()),
        Err(LimiterFailure::Model(m)) => record(false, "flux-limiter".into(), m),
    }

    if !config.initial_datum.is_empty() {
        let datum = config.datum(&net)?;
        let gap = datum_gap(&net, &datum);
        record(
            gap.as_ref().is_none_or(|(_, g)| *g <= 1e-9),
            "initial-datum".into(),
            match gap {
                Some((v, g)) => format!("largest vertex disagreement {} at `{v}`", fmt_sig(g)),
                None => "consistent".into(),
            },
        );
    }
    if let Some(g) = &config.grid {
        match build_grid(g) {
            Ok((grid, scheme)) => record(
                true,
                "grid".into(),
                format!(
                    "{} nodes per arc, {} layers, {scheme}",
                    grid.n_s(),
                    grid.layers()
                ),
            ),
            Err(e @ ConfigError::Model { .. }) => record(false, "grid".into(), e.to_string()),
            Err(e) => return Err(e.into()),
        }
    }
    if echo {
        lines.push_str(&config.to_toml());
    }
    finish(lines, failures, out)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

enum LimiterFailure {
    Config(ConfigError),
    Model(String),
}

fn limiter_report(
    config: &ProblemConfig,
    net: &Network,
    hams: &[HamiltonianRef],
) -> Result<f64, LimiterFailure> {
    let limiter = config.limiter(net, hams).map_err(|e| match e {
        ConfigError::Model { .. } => LimiterFailure::Model(e.to_string()),
        e => LimiterFailure::Config(e),
    })?;
    validate_flux_limiter(net, hams, &limiter)
        .map(|r| r.min_margin())
        .map_err(|e| LimiterFailure::Model(e.to_string()))
}

fn datum_gap(net: &Network, datum: &[crate::expr::Expr]) -> Option<(String, f64)> {
    let mut worst: Option<(String, f64)> = None;
    for v in net.vertex_ids() {
        let values: Vec<f64> = net
            .arrivals(v)
            .iter()
            .map(|a| datum[a.arc.0].eval(a.end.param()))
            .collect();
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = hi - lo;
        if worst.as_ref().is_none_or(|(_, g)| gap > *g) {
            worst = Some((net.vertex(v).id.clone(), gap));
        }
    }
    worst
}

/// Critical constants per arc and caps per vertex, as two CSV blocks.
pub fn limits(config: &ProblemConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let net = config.network()?;
    let hams = config.hamiltonians(&net)?;
    let crit = arc_critical_constants(&hams).map_err(CliError::validation)?;
    let caps = vertex_caps(&net, &hams).map_err(CliError::validation)?;
    let limiter: Option<FluxLimiter> = if config.flux_limiters.is_empty() {
        None
    } else {
        Some(config.limiter(&net, &hams)?)
    };
    let mut text = String::from("arc,c_gamma\n");
    for (arc, c) in net.arcs().iter().zip(&crit) {
        let _ = writeln!(text, "{},{}", arc.id(), fmt_sig(*c));
    }
    text.push('\n');
    text.push_str(if limiter.is_some() {
        "vertex,cap,limiter\n"
    } else {
        "vertex,cap\n"
    });
    for v in net.vertex_ids() {
        let _ = write!(text, "{},{}", net.vertex(v).id, fmt_sig(caps[v.0]));
        if let Some(l) = &limiter {
            let _ = write!(text, ",{}", fmt_sig(l.get(v)));
        }
        text.push('\n');
    }
    emit(None, &text, out)
}

/// Solves, exports the table and requested minimizers, then verifies.
pub fn solve(
    config: &ProblemConfig,
    overrides: &Overrides,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), CliError> {
    let nl = lagrangian(config)?;
    let net = nl.network();
    let datum = config.datum(net)?;
    let (grid, scheme) = overrides.grid(config)?;
    let u0 = |arc: hjnet::ArcId, s: f64| datum[arc.0].eval(s);
    let solver = Solver::new(&nl, grid, scheme).map_err(CliError::validation)?;
    let vg = solver.lax_oleinik(&u0).map_err(CliError::validation)?;
    log::info!("solved {} layers with the {scheme} scheme", grid.layers());
    emit(config.outputs.table.as_deref(), &vg.to_table(net), out)?;

    if !config.outputs.targets.is_empty() {
        let graph_run: ValueGrid;
        let graph_solver;
        let (gs, gvg) = if scheme == Scheme::Graph {
            (&solver, &vg)
        } else {
            graph_solver = Solver::new(&nl, grid, Scheme::Graph).map_err(CliError::validation)?;
            graph_run = graph_solver
                .lax_oleinik(&u0)
                .map_err(CliError::validation)?;
            (&graph_solver, &graph_run)
        };
        let mut curves = String::new();
        for (i, target) in config.outputs.targets.iter().enumerate() {
            let field = format!("outputs.targets[{i}]");
            let p = parse_point(net, &target.point)
                .map_err(|m| CliError::Parse(format!("{field}.point: {m}")))?;
            let layer = (target.t / grid.dt()).round();
            if !(0.0..=grid.layers() as f64).contains(&layer) {
                return Err(CliError::Validation(format!(
                    "{field}.t: {} lies outside [0, {}]",
                    target.t,
                    grid.horizon()
                )));
            }
            let layer = layer as usize;
            let node = gs.nodes().snap(&p);
            let curve = gs
                .minimizer(gvg, node, layer)
                .map_err(CliError::validation)?;
            let _ = writeln!(
                curves,
                "# target {} t={} u={}",
                target.point,
                fmt_sig(gvg.time(layer)),
                fmt_sig(gvg.value(layer, node))
            );
            curves.push_str(&curve.to_text(net));
        }
        emit(config.outputs.curves.as_deref(), &curves, out)?;
    }

    let report = verify_all(&vg, &nl, &overrides.verify_options());
    emit(config.outputs.report.as_deref(), &report.to_text(net), diag)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Verification(format!(
            "verification failed: {}",
            failed.join(", ")
        )))
    }
}

pub struct MinimalActionArgs<'a> {
    pub x: &'a str,
    pub t: f64,
    pub y: &'a str,
    pub r: f64,
    pub oracle: bool,
    pub curve: Option<&'a str>,
}

/// Prints `S(x, t, y, r)`, optionally the oracle value, and writes the curve.
pub fn minimal_action(
    config: &ProblemConfig,
    overrides: &Overrides,
    args: &MinimalActionArgs<'_>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let nl = lagrangian(config)?;
    let net = nl.network();
    let x = parse_point(net, args.x).map_err(|m| CliError::Parse(format!("x: {m}")))?;
    let y = parse_point(net, args.y).map_err(|m| CliError::Parse(format!("y: {m}")))?;
    let (grid, _) = overrides.grid(config)?;
    let solver = Solver::new(&nl, grid, Scheme::Graph).map_err(CliError::validation)?;
    let m = solver
        .minimal_action(&x, args.t, &y, args.r)
        .map_err(CliError::validation)?;
    let mut text = String::new();
    let _ = writeln!(text, "S = {}", fmt_sig(m.value));
    let _ = writeln!(text, "duration = {}", fmt_sig(m.duration));
    if args.oracle {
        let o = brute_force_minimal_action(&nl, &grid, &x, &y, args.r - args.t, ORACLE_BREAKPOINTS)
            .map_err(CliError::validation)?;
        let _ = writeln!(text, "oracle = {}", fmt_sig(o));
        let _ = writeln!(text, "gap = {}", fmt_sig(o - m.value));
    }
    let curve = m.curve.to_text(net);
    let path = args.curve.or(config.outputs.curves.as_deref());
    if path.is_none() {
        text.push_str(&curve);
    }
    emit(None, &text, out)?;
    if let Some(p) = path {
        emit(Some(p), &curve, out)?;
    }
    Ok(())
}

/// Writes `s,sigma,u` for the stationary solution at `level` on one arc.
pub fn stationary(
    config: &ProblemConfig,
    arc: &str,
    level: f64,
    nodes: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let net = config.network()?;
    let hams = config.hamiltonians(&net)?;
    let id = net
        .arc_by_name(arc)
        .map_err(|e| CliError::Parse(format!("arc: {e}")))?;
    let sol =
        stationary_solution(hams[id.0].as_ref(), level, nodes).map_err(CliError::validation)?;
    log::info!("stationary residual {}", fmt_sig(sol.max_residual));
    let mut text = String::from("s,sigma,u\n");
    for ((s, sigma), u) in sol.s.iter().zip(&sol.sigma).zip(&sol.u) {
        let _ = writeln!(text, "{},{},{}", fmt_sig(*s), fmt_sig(*sigma), fmt_sig(*u));
    }
    emit(None, &text, out)
}
