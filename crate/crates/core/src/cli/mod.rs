//! Config-driven scenario runner: `sublinear-lab run --config <file>`.
//!
//! Exit codes: 0 completed (verdicts are data), 1 pipeline failure, 2
//! config error.

mod ini;
mod report;
mod scenario;

pub use ini::{parse_ini, Section};
pub use report::{ReportValue, RunReport};
pub use scenario::{
    parse_scenario, parse_scenario_str, BracketSpec, NonlinearityKind, NonlinearitySpec, Pipeline, Scenario,
    Tolerances, WeightSpec,
};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::constructions::{
    cnp, corollary33_certify, lemma22_bracket, theorem31_certify, theorem32_certify, ExistenceCertificate,
    ExistenceOptions, NonexistenceCertificate, Verdict, GRID_DIRECTION_NOTE,
};
use crate::elliptic::{
    green_operator_norm_with, morel_oswald_constant_with, principal_eigenpair_with, torsion,
    DiscreteOperator, EigenOptions,
};
use crate::error::{Error, Result};
use crate::field::{fmt17, FieldFunction};
use crate::geometry::{Domain, Grid, SubRegion, SubdomainPartition};
use crate::sublinear::{monotone_iterate, positivity_certificate, BracketPair};
use crate::weights::{lr_norm, validate_h1, NonlinearityH1, Sampling, WeightField};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const H1_SAMPLES: usize = 400;

#[derive(Debug, Parser)]
#[command(name = "sublinear-lab", version, about = "Sub/supersolution experiments for -Δu = m f(u)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario file.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "./out")]
    pub out_dir: PathBuf,
    /// Overrides `[grid] resolution`.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// `<param>=<v1,v2,...>` with param one of p, resolution, weight_scale, amplitude.
    #[arg(long)]
    pub sweep: Option<String>,
}

fn describe_domain(d: &Domain) -> String {
    match *d {
        Domain::Interval { a, b } => format!("interval({}, {})", fmt17(a), fmt17(b)),
        Domain::Rectangle { x0, x1, y0, y1 } => {
            format!("rectangle({}, {}, {}, {})", fmt17(x0), fmt17(x1), fmt17(y0), fmt17(y1))
        }
        Domain::Disk { cx, cy, radius } => format!("disk({}, {}, {})", fmt17(cx), fmt17(cy), fmt17(radius)),
    }
}

fn describe_region(r: &SubRegion) -> String {
    match *r {
        SubRegion::Interval { a, b } => format!("[{}, {}]", fmt17(a), fmt17(b)),
        SubRegion::Rectangle { x0, x1, y0, y1 } => {
            format!("[{}, {}]x[{}, {}]", fmt17(x0), fmt17(x1), fmt17(y0), fmt17(y1))
        }
    }
}

fn exponent(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        fmt17(r)
    }
}

struct Setup {
    grid: Grid,
    op: DiscreteOperator,
    m: WeightField,
    f: NonlinearityH1,
}

fn echo(s: &Scenario, rep: &mut RunReport, setup: &Setup) -> Result<()> {
    let Setup { grid, m, f, .. } = setup;
    rep.put("scenario", "name", s.name.as_str());
    if !s.description.is_empty() {
        rep.put("scenario", "description", s.description.as_str());
    }
    rep.put("scenario", "pipeline", s.pipeline.name());
    rep.put("scenario", "version", VERSION);

    rep.put("grid", "domain", describe_domain(&s.domain));
    rep.put("grid", "resolution", s.resolution);
    rep.put("grid", "spacing", grid.spacing());
    rep.put("grid", "nodes", grid.len());
    rep.put("grid", "interior_nodes", grid.interior().len());

    rep.put("weight", "r", exponent(s.weight.r));
    rep.put("weight", "sampling", if s.weight.sampling == Sampling::Nodal { "nodal" } else { "cell-average" });
    rep.put("weight", "scale", s.weight.scale);
    rep.put("weight", "amplitude", s.weight.amplitude);
    for (k, (region, expr)) in s.weight.sources.iter().enumerate() {
        rep.put("weight", &format!("piece.{}", k + 1), format!("{region} ; {expr}"));
    }
    let all: Vec<usize> = (0..grid.len()).collect();
    let (plus, minus) = m.split_pm();
    rep.put("weight", "m_plus_norm", lr_norm(plus.values(), grid, s.weight.r, &all).value);
    rep.put("weight", "m_minus_norm", lr_norm(minus.values(), grid, s.weight.r, &all).value);
    rep.put("weight", "min", m.values().iter().copied().fold(f64::INFINITY, f64::min));
    rep.put("weight", "max", m.values().iter().copied().fold(f64::NEG_INFINITY, f64::max));

    let kind = match s.nonlinearity.kind {
        NonlinearityKind::Power => "power",
        NonlinearityKind::PowerPlusMin => "power_plus_min",
    };
    rep.put("nonlinearity", "kind", kind);
    rep.put("nonlinearity", "p", f.p());
    rep.put("nonlinearity", "k1", f.k1());
    rep.put("nonlinearity", "k2", f.k2());
    if s.nonlinearity.kind == NonlinearityKind::Power {
        rep.put("nonlinearity", "kappa", s.nonlinearity.kappa);
    }
    rep.put("nonlinearity", "beta", f.beta());
    rep.put("nonlinearity", "cnp", cnp(grid.dim(), f.p())?);
    let h1 = validate_h1(f, H1_SAMPLES)?;
    rep.put("nonlinearity", "h1_pass", h1.pass);
    rep.put("nonlinearity", "h1_samples", h1.samples);
    rep.put("nonlinearity", "h1_lattice", format!("[{}, {}]", fmt17(h1.lattice.0), fmt17(h1.lattice.1)));
    if let Some((xi, msg)) = &h1.first_violation {
        rep.put("nonlinearity", "h1_first_violation", format!("{} : {msg}", fmt17(*xi)));
    }
    if let Some(r) = &s.omega0 {
        rep.put("regions", "omega0", describe_region(r));
    }
    if let Some(r) = &s.omega1 {
        rep.put("regions", "omega1", describe_region(r));
    }
    rep.field("weight", m.as_field());
    Ok(())
}

fn exact_error(grid: &Grid, u: &[f64], exact: &crate::weights::Expr) -> f64 {
    grid.coords()
        .iter()
        .enumerate()
        .map(|(i, p)| (u[i] - exact.eval(p[0], p[1])).abs())
        .fold(0.0, f64::max)
}

fn run_poisson(s: &Scenario, rep: &mut RunReport, setup: &Setup) -> Result<()> {
    let Pipeline::Poisson { rhs, boundary, exact } = &s.pipeline else { unreachable!() };
    let Setup { grid, op, .. } = setup;
    let rhs = FieldFunction::from_fn(grid, |p| rhs.eval(p[0], p[1]));
    let data = FieldFunction::from_fn(grid, |p| boundary.eval(p[0], p[1]));
    let u = crate::elliptic::solve_dirichlet(op, &rhs, &data)?;
    rep.headline("poisson", "solution_max", u.sup_norm());
    if let Some(e) = exact {
        rep.headline("poisson", "max_error", exact_error(grid, u.values(), e));
    }
    rep.field("solution", u);
    Ok(())
}

fn run_solve(s: &Scenario, rep: &mut RunReport, setup: &Setup) -> Result<()> {
    let Pipeline::Solve { bracket, exact } = &s.pipeline else { unreachable!() };
    let Setup { grid, op, m, f } = setup;
    let tol = &s.tolerances;
    let zeros = vec![0.0; grid.len()];
    let bracket = match bracket {
        BracketSpec::EigenTorsion => {
            let b = lemma22_bracket(op, m, f, tol.verify_tol)?;
            rep.put("bracket", "kind", "eigenfunction-torsion");
            rep.put("bracket", "lambda1", b.eigen.lambda);
            rep.put("bracket", "phi_e_norm", b.eigen.phi.sup_norm());
            rep.put("bracket", "phi_l_norm", b.phi_l_norm);
            rep.put("bracket", "epsilon", b.epsilon);
            rep.put("bracket", "k", b.k);
            rep.put("bracket", "sub_excess", b.sub_excess);
            rep.put("bracket", "super_excess", b.super_excess);
            b.bracket
        }
        BracketSpec::Expressions { sub, sup } => {
            rep.put("bracket", "kind", "expressions");
            let at = |e: &crate::weights::Expr| {
                let mut v: Vec<f64> = grid.coords().iter().map(|p| e.eval(p[0], p[1])).collect();
                for &b in grid.boundary() {
                    v[b] = 0.0;
                }
                FieldFunction::from_values(v)
            };
            BracketPair::new(at(sub), at(sup))
        }
    };
    let it = monotone_iterate(op, m, f, &bracket, &zeros, &tol.iteration())?;
    rep.headline("solve", "converged", it.converged);
    rep.headline("solve", "iterations", it.iterations);
    rep.put("solve", "residual", it.residual);
    rep.put("solve", "max_monotonicity_violation", it.max_monotonicity_violation());
    rep.put("solve", "max_sandwich_violation", it.max_sandwich_violation());
    rep.put("solve", "final_gap", it.log.last().map_or(0.0, |l| l.gap));
    rep.headline("solve", "solution_max", it.solution.sup_norm());
    let pos = positivity_certificate(it.solution.values(), grid.delta(), grid.interior());
    rep.put("solve", "min_u", pos.min_u);
    rep.headline("solve", "min_ratio", pos.min_ratio);
    rep.put("solve", "positivity_pass", pos.pass);
    if let Some(e) = exact {
        rep.headline("solve", "max_error", exact_error(grid, it.solution.values(), e));
    }
    let mut log = String::from("sweep,min_change,max_change,monotonicity_violation,sandwich_violation,gap,capped,residual\n");
    for (k, l) in it.log.iter().enumerate() {
        let _ = writeln!(
            log,
            "{},{},{},{},{},{},{},{}",
            k + 1,
            fmt17(l.min_change),
            fmt17(l.max_change),
            fmt17(l.monotonicity_violation),
            fmt17(l.sandwich_violation),
            fmt17(l.gap),
            l.capped,
            fmt17(l.residual)
        );
    }
    rep.tables.push(("sweeps".into(), log));
    rep.field("sub", bracket.sub);
    rep.field("super", bracket.sup);
    rep.field("solution", it.solution);
    Ok(())
}

fn run_constants(s: &Scenario, rep: &mut RunReport, setup: &Setup) -> Result<()> {
    let Setup { grid, op, m, .. } = setup;
    let t = torsion(op)?;
    rep.headline("constants", "torsion_max", t.iter().copied().fold(0.0, f64::max));
    if s.weight.r.is_finite() {
        let g = green_operator_norm_with(op, s.weight.r, s.tolerances.max_green_rows)?;
        rep.headline("constants", "green_norm", g.value);
        rep.put("constants", "green_norm_r", exponent(g.r));
        rep.put("constants", "green_norm_subsampled", g.subsampled);
    }
    let mo = morel_oswald_constant_with(op, grid.delta(), s.tolerances.max_green_rows)?;
    rep.headline("constants", "morel_oswald_c", mo.c);
    rep.put("constants", "morel_oswald_subsampled", mo.subsampled);
    if op.unknowns().iter().any(|&n| m.values()[n] > 0.0) {
        let opts = EigenOptions { tol: s.tolerances.eigen_tol, ..EigenOptions::default() };
        let e = principal_eigenpair_with(op, m, &opts)?;
        rep.headline("constants", "lambda1", e.lambda);
        rep.put("constants", "eigen_residual", e.residual);
        rep.put("constants", "phi_min_interior", op.unknowns().iter().map(|&n| e.phi.get(n)).fold(f64::INFINITY, f64::min));
        rep.field("phi", e.phi);
    } else {
        rep.put("constants", "lambda1", "none (m⁺ vanishes)");
    }
    rep.field("torsion", FieldFunction::from_values(t));
    Ok(())
}

fn put_existence(rep: &mut RunReport, grid: &Grid, partition: &SubdomainPartition, c: &ExistenceCertificate) {
    let sec = "existence";
    rep.put(sec, "omega0_snapped", partition.was_snapped());
    rep.put(sec, "omega0_used", describe_region(&partition.region()));
    rep.put(sec, "r", exponent(c.r));
    rep.put(sec, "m_minus_norm", c.m_minus_norm);
    rep.put(sec, "c1", c.c1);
    rep.put(sec, "c2", c.c2);
    rep.put(sec, "c3", c.c3);
    rep.put(sec, "c4", c.c4);
    rep.put(sec, "c5", c.c5.c);
    rep.put(sec, "c5_subsampled", c.c5.subsampled);
    rep.put(sec, "margin", c.margin);
    rep.headline(sec, "level_m", c.level);
    rep.put(sec, "w_iterations", c.w_problem.report.iterations);
    rep.put(sec, "w_residual", c.w_problem.report.residual);
    rep.put(sec, "w_positive", c.w_positive);
    rep.put(sec, "max_abs_flux_w", c.max_flux_w);
    rep.put(sec, "v_lambda1", c.v_bracket.eigen.lambda);
    rep.put(sec, "v_epsilon", c.v_bracket.epsilon);
    rep.put(sec, "v_k", c.v_bracket.k);
    rep.put(sec, "v_iterations", c.v_report.iterations);
    rep.put(sec, "integral_m_delta_p1", c.integral);
    rep.put(sec, "v_bound_coefficient", c.v_bound_coefficient);
    rep.put(sec, "v_bound_slack", c.v_bound_slack);
    rep.put(sec, "v_bound_holds", c.v_bound_holds);
    rep.put(sec, "interface_nodes", c.flux_u.len());
    let worst = c.flux_u.iter().zip(&c.flux_w).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    rep.put(sec, "max_flux_gap", worst);
    rep.headline(sec, "flux_pass", c.flux_pass);
    rep.put(sec, "omega_excess", c.omega_excess);
    rep.put(sec, "omega_subsolution", c.omega_subsolution);
    rep.put(sec, "inequality_lhs", c.inequality_lhs);
    rep.put(sec, "inequality_rhs", c.inequality_rhs);
    rep.put(sec, "inequality_pass", c.inequality_pass);
    match &c.final_solve {
        Some(fs) => {
            rep.put(sec, "final_k", fs.sup.k);
            rep.put(sec, "final_k_raised", fs.k_raised);
            rep.put(sec, "final_iterations", fs.report.iterations);
            rep.put(sec, "final_converged", fs.report.converged);
            rep.put(sec, "final_residual", fs.report.residual);
            rep.put(sec, "final_min_u", fs.positivity.min_u);
            rep.put(sec, "final_min_ratio", fs.positivity.min_ratio);
            rep.put(sec, "final_positivity_pass", fs.positivity.pass);
        }
        None => rep.put(sec, "final_skipped", c.final_note.clone().unwrap_or_default()),
    }
    rep.headline(sec, "certified", c.certified());
    rep.put(sec, "verdict", if c.certified() { "existence certified" } else { "no certificate" });
    rep.put(sec, "verdict_uses", "flux_pass, final_converged, final_positivity_pass");

    let two_d = grid.dim() == 2;
    let mut flux = String::from(if two_d { "x,y,flux_u,flux_w\n" } else { "x,flux_u,flux_w\n" });
    for ((node, a), b) in partition.interface().iter().zip(&c.flux_u).zip(&c.flux_w) {
        let p = grid.coord(node.node);
        if two_d {
            let _ = writeln!(flux, "{},{},{},{}", fmt17(p[0]), fmt17(p[1]), fmt17(*a), fmt17(*b));
        } else {
            let _ = writeln!(flux, "{},{},{}", fmt17(p[0]), fmt17(*a), fmt17(*b));
        }
    }
    rep.tables.push(("flux".into(), flux));
    rep.field("theta", c.w_problem.theta.clone());
    rep.field("psi", c.w_problem.psi.clone());
    rep.field("w", c.w_problem.w().clone());
    rep.field("v", c.v_report.solution.clone());
    rep.field("omega", c.omega.clone());
    if let Some(fs) = &c.final_solve {
        rep.field("final_u", fs.report.solution.clone());
    }
}

fn put_nonexistence(rep: &mut RunReport, c: &NonexistenceCertificate) {
    let sec = "nonexistence";
    rep.put(sec, "cnp", c.cnp);
    rep.put(sec, "r", exponent(c.r));
    rep.put(sec, "green_norm", c.green_norm.value);
    rep.put(sec, "green_norm_subsampled", c.green_norm.subsampled);
    rep.put(sec, "m_plus_norm", c.m_plus_norm);
    rep.put(sec, "balls_considered", c.balls_considered);
    if let Some(b) = &c.best {
        rep.put(sec, "best_center", format!("({}, {})", fmt17(b.ball.center[0]), fmt17(b.ball.center[1])));
        rep.put(sec, "best_radius", b.ball.radius);
        rep.put(sec, "best_m_r", b.m_r);
        rep.put(sec, "best_score", b.score);
    }
    rep.headline(sec, "lhs", c.lhs);
    rep.headline(sec, "rhs", c.rhs);
    if let Some((w, b)) = &c.barrier {
        rep.put(sec, "barrier_nodes_checked", b.nodes_checked);
        rep.put(sec, "barrier_identity_residual", b.max_identity_residual);
        rep.put(sec, "barrier_max_excess", b.max_excess);
        rep.put(sec, "barrier_pass", b.pass);
        rep.field("barrier", w.clone());
    }
    rep.headline(sec, "verdict", c.verdict);
    rep.put(sec, "verdict_uses", "lhs, rhs, m_plus_norm");
    rep.put(sec, "note", GRID_DIRECTION_NOTE);
}

fn run_certificates(s: &Scenario, rep: &mut RunReport, setup: &Setup) -> Result<()> {
    let Setup { grid, op, m, f } = setup;
    let tol = &s.tolerances;
    if matches!(s.pipeline, Pipeline::IntegralCriterion) {
        let region = s.omega1.as_ref().expect("validated");
        let c = corollary33_certify(grid, op, m, f, region, tol.max_green_rows)?;
        let sec = "integral_criterion";
        rep.put(sec, "convexity_pairs_checked", c.convexity.pairs_checked);
        rep.put(sec, "convexity_pass", c.convexity.pass());
        rep.put(sec, "cnp", c.cnp);
        rep.put(sec, "region_measure", c.region_measure);
        rep.put(sec, "green_norm", c.green_norm.value);
        rep.headline(sec, "weighted_sum", c.weighted_sum);
        rep.headline(sec, "lhs", c.lhs);
        rep.headline(sec, "rhs", c.rhs);
        rep.put(sec, "m_plus_norm_outside", c.m_plus_norm_outside);
        rep.put(sec, "m_plus_norm_full", c.m_plus_norm_full);
        rep.put(sec, "samples_checked", c.samples_checked);
        rep.put(sec, "ingredient_worst_margin", c.worst_margin);
        rep.put(sec, "ingredient_pass", c.ingredient_pass);
        rep.put(sec, "verdict", c.verdict);
        rep.put(sec, "verdict_uses", "lhs, rhs");
        if c.verdict == Verdict::NonexistenceCertified {
            rep.nonexistence = Some(Verdict::NonexistenceCertified);
        }
    }

    let non = theorem32_certify(grid, op, m, f, tol.max_green_rows)?;
    put_nonexistence(rep, &non);
    if rep.nonexistence != Some(Verdict::NonexistenceCertified) {
        rep.nonexistence = Some(non.verdict);
    }

    if let Some(region) = &s.omega0 {
        let attempt = SubdomainPartition::new(grid, *region).and_then(|partition| {
            let opts = ExistenceOptions {
                iteration: tol.iteration(),
                verify_tol: tol.verify_tol,
                max_green_rows: tol.max_green_rows,
                ..ExistenceOptions::default()
            };
            theorem31_certify(grid, op, m, f, &partition, &opts).map(|c| (partition, c))
        });
        match attempt {
            Ok((partition, c)) => {
                rep.existence_certified = Some(c.certified());
                put_existence(rep, grid, &partition, &c);
            }
            Err(e) if !matches!(s.pipeline, Pipeline::CertifyExistence) => {
                rep.put("existence", "skipped", e.to_string());
            }
            Err(e) => return Err(e),
        }
    }

    let existence = rep.existence_certified.unwrap_or(false);
    let nonexistence = rep.nonexistence == Some(Verdict::NonexistenceCertified);
    rep.put("consistency", "existence_certified", existence);
    rep.put("consistency", "nonexistence_certified", nonexistence);
    rep.headline("consistency", "alarm", existence && nonexistence);
    Ok(())
}

/// Runs the scenario's pipeline and collects the report (nothing is written).
pub fn run(s: &Scenario) -> Result<RunReport> {
    let start = Instant::now();
    let grid = Grid::new(s.domain, s.resolution)?;
    let op = DiscreteOperator::new(&grid)?;
    let m = s.weight.build(&grid)?;
    let f = s.nonlinearity.build()?;
    let setup = Setup { grid: grid.clone(), op, m, f };
    let mut rep = RunReport::new(&s.name, grid);
    echo(s, &mut rep, &setup)?;
    match &s.pipeline {
        Pipeline::Poisson { .. } => run_poisson(s, &mut rep, &setup)?,
        Pipeline::Solve { .. } => run_solve(s, &mut rep, &setup)?,
        Pipeline::Constants => run_constants(s, &mut rep, &setup)?,
        Pipeline::CertifyExistence | Pipeline::CertifyNonexistence | Pipeline::IntegralCriterion => {
            run_certificates(s, &mut rep, &setup)?
        }
    }
    rep.wall_time = start.elapsed();
    Ok(rep)
}

/// A sweep parameter and its values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

pub const SWEEP_PARAMS: &[&str] = &["p", "resolution", "weight_scale", "amplitude"];

pub fn parse_sweep(src: &str) -> Result<SweepSpec> {
    let (param, list) = src
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("sweep '{src}' must look like param=v1,v2")))?;
    let param = param.trim().to_string();
    if !SWEEP_PARAMS.contains(&param.as_str()) {
        return Err(Error::Config(format!("unknown sweep parameter '{param}' (expected one of {})", SWEEP_PARAMS.join(", "))));
    }
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("sweep value '{v}' is not a number"))))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    Ok(SweepSpec { param, values })
}

/// Applies one sweep value to a copy of the scenario.
pub fn with_param(s: &Scenario, param: &str, value: f64) -> Result<Scenario> {
    let mut t = s.clone();
    match param {
        "p" => {
            t.nonlinearity.p = value;
            t.nonlinearity.build().map_err(|e| Error::Config(e.to_string()))?;
        }
        "resolution" => {
            if value.fract() != 0.0 || value < 4.0 {
                return Err(Error::Config(format!("resolution {value} must be an integer >= 4")));
            }
            t.resolution = value as usize;
        }
        "weight_scale" => t.weight.scale = value,
        "amplitude" => t.weight.amplitude = value,
        other => return Err(Error::Config(format!("unknown sweep parameter '{other}'"))),
    }
    Ok(t)
}

/// One row per value: the parameter followed by the run's headline values.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub param: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<String>)>,
    pub reports: Vec<RunReport>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.param, self.columns.join(","));
        for (v, cells) in &self.rows {
            let _ = writeln!(out, "{},{}", fmt17(*v), cells.join(","));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, c)| c[k].as_str()).collect())
    }
}

pub fn sweep(s: &Scenario, param: &str, values: &[f64]) -> Result<SweepTable> {
    let mut table = SweepTable { param: param.to_string(), columns: Vec::new(), rows: Vec::new(), reports: Vec::new() };
    for &v in values {
        let mut t = with_param(s, param, v)?;
        t.name = format!("{}-{}", s.name, table.rows.len());
        let rep = run(&t)?;
        if table.columns.is_empty() {
            table.columns = rep.summary.iter().map(|(k, _)| k.clone()).collect();
        }
        let cells = table
            .columns
            .iter()
            .map(|c| rep.summary.iter().find(|(k, _)| k == c).map_or(String::new(), |(_, v)| v.clone()))
            .collect();
        table.rows.push((v, cells));
        table.reports.push(rep);
    }
    Ok(table)
}

fn load(args: &RunArgs) -> Result<(Scenario, Option<SweepSpec>)> {
    let mut s = parse_scenario(&args.config)?;
    if let Some(r) = args.resolution {
        s = with_param(&s, "resolution", r as f64)?;
    }
    let sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    Ok((s, sweep))
}

fn execute_run(args: &RunArgs) -> i32 {
    let (s, spec) = match load(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match spec {
        None => run(&s).and_then(|rep| {
            let dir = rep.write(&args.out_dir)?;
            println!("{}", dir.join("report.txt").display());
            Ok(())
        }),
        Some(spec) => sweep(&s, &spec.param, &spec.values).and_then(|table| write_sweep(&s, &table, &args.out_dir)),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn write_sweep(s: &Scenario, table: &SweepTable, out_dir: &Path) -> Result<()> {
    let base = out_dir.join(&s.name);
    std::fs::create_dir_all(&base)?;
    let sweep_dir = base.join(format!("sweep_{}", table.param));
    for rep in &table.reports {
        rep.write(&sweep_dir)?;
    }
    let path = base.join(format!("sweep_{}.csv", table.param));
    std::fs::write(&path, table.to_csv())?;
    print!("{}", table.to_csv());
    println!("{}", path.display());
    Ok(())
}

/// Parses command-line arguments and runs; returns the process exit code.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => match cli.command {
            Command::Run(a) => execute_run(&a),
        },
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
