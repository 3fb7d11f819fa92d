//! Scenario files: parsing, validation and the objects they describe.

use std::path::Path;

use super::ini::{parse_ini, Section};
use crate::elliptic::MAX_GREEN_ROWS;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Grid, SubRegion};
use crate::weights::{Evaluator, Expr, NonlinearityH1, PieceRegion, Sampling, WeightField, WeightPiece};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearityKind {
    Power,
    PowerPlusMin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub p: f64,
    pub kappa: f64,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<NonlinearityH1> {
        let (evaluator, k1, k2) = match self.kind {
            NonlinearityKind::Power => (Evaluator::Power { kappa: self.kappa }, self.kappa, self.kappa),
            NonlinearityKind::PowerPlusMin => (Evaluator::PowerPlusMin, 1.0, 2.0),
        };
        NonlinearityH1::new(self.p, self.k1.unwrap_or(k1), self.k2.unwrap_or(k2), evaluator)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    /// `(region, expression)` source text, in declaration order.
    pub sources: Vec<(String, String)>,
    pub pieces: Vec<WeightPiece>,
    pub r: f64,
    pub sampling: Sampling,
    /// Multiplies the whole weight.
    pub scale: f64,
    /// Multiplies the negative part only.
    pub amplitude: f64,
}

impl WeightSpec {
    /// `scale·(m⁺ − amplitude·m⁻)` on the grid.
    pub fn build(&self, grid: &Grid) -> Result<WeightField> {
        let base = WeightField::from_pieces(grid, &self.pieces, self.sampling, self.r)?;
        let (scale, amplitude) = (self.scale, self.amplitude);
        Ok(base.map(|v| scale * if v < 0.0 { amplitude * v } else { v }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BracketSpec {
    /// Eigenfunction / torsion bracket; needs `m ≥ 0`.
    EigenTorsion,
    Expressions { sub: Expr, sup: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pipeline {
    Solve { bracket: BracketSpec, exact: Option<Expr> },
    CertifyExistence,
    CertifyNonexistence,
    IntegralCriterion,
    Constants,
    Poisson { rhs: Expr, boundary: Expr, exact: Option<Expr> },
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Solve { .. } => "solve",
            Pipeline::CertifyExistence => "certify-existence",
            Pipeline::CertifyNonexistence => "certify-nonexistence",
            Pipeline::IntegralCriterion => "corollary33",
            Pipeline::Constants => "constants",
            Pipeline::Poisson { .. } => "poisson",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub max_sweeps: usize,
    pub change_tol: f64,
    pub residual_tol: f64,
    pub shift_max: f64,
    pub bracket_tol: f64,
    pub verify_tol: f64,
    pub eigen_tol: f64,
    pub max_green_rows: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let it = crate::sublinear::IterationOptions::default();
        Tolerances {
            max_sweeps: it.max_sweeps,
            change_tol: it.change_tol,
            residual_tol: it.residual_tol,
            shift_max: it.shift_max,
            bracket_tol: it.bracket_tol,
            verify_tol: crate::constructions::VERIFY_TOL,
            eigen_tol: crate::elliptic::EigenOptions::default().tol,
            max_green_rows: MAX_GREEN_ROWS,
        }
    }
}

impl Tolerances {
    pub fn iteration(&self) -> crate::sublinear::IterationOptions {
        crate::sublinear::IterationOptions {
            max_sweeps: self.max_sweeps,
            change_tol: self.change_tol,
            residual_tol: self.residual_tol,
            shift_max: self.shift_max,
            bracket_tol: self.bracket_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub domain: Domain,
    pub resolution: usize,
    pub weight: WeightSpec,
    pub nonlinearity: NonlinearitySpec,
    pub omega0: Option<SubRegion>,
    pub omega1: Option<SubRegion>,
    pub pipeline: Pipeline,
    pub tolerances: Tolerances,
}

/// Pulls keys out of the parsed sections and collects every problem.
struct Reader {
    sections: Vec<Section>,
    errors: Vec<String>,
}

impl Reader {
    fn has(&self, section: &str) -> bool {
        self.sections.iter().any(|s| s.name == section)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        let s = self.sections.iter_mut().find(|s| s.name == section)?;
        let i = s.entries.iter().position(|(k, _)| k == key)?;
        Some(s.entries.remove(i).1)
    }

    fn required(&mut self, section: &str, key: &str) -> Option<String> {
        let v = self.take(section, key);
        if v.is_none() {
            self.errors.push(format!("missing [{section}] {key}"));
        }
        v
    }

    fn number(&mut self, section: &str, key: &str, value: Option<String>) -> Option<f64> {
        let v = value?;
        match parse_number(&v) {
            Some(x) => Some(x),
            None => {
                self.errors.push(format!("[{section}] {key}: '{v}' is not a number"));
                None
            }
        }
    }

    fn req_number(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.required(section, key);
        self.number(section, key, v)
    }

    fn opt_number(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.take(section, key);
        self.number(section, key, v)
    }

    fn expr(&mut self, section: &str, key: &str, value: Option<String>) -> Option<Expr> {
        let v = value?;
        match Expr::parse(&v) {
            Ok(e) => Some(e),
            Err(e) => {
                self.errors.push(format!("[{section}] {key}: {e}"));
                None
            }
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn leftovers(&mut self) {
        for s in &self.sections {
            for (k, _) in &s.entries {
                self.errors.push(format!("unknown key '{k}' in [{}]", s.name));
            }
        }
    }
}

/// Numbers, `inf`, or constant expressions such as `1/3` or `-1e4`.
fn parse_number(src: &str) -> Option<f64> {
    let t = src.trim();
    if matches!(t, "inf" | "infinity" | "∞") {
        return Some(f64::INFINITY);
    }
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    Expr::parse(t).ok().map(|e| e.eval(0.0, 0.0)).filter(|v| v.is_finite())
}

fn sub_region(src: &str) -> Result<SubRegion> {
    match PieceRegion::parse(src)? {
        PieceRegion::Interval { a, b } => Ok(SubRegion::Interval { a, b }),
        PieceRegion::Rectangle { x0, x1, y0, y1 } => Ok(SubRegion::Rectangle { x0, x1, y0, y1 }),
        _ => Err(Error::Config(format!("region '{src}' must be an interval or a rectangle"))),
    }
}

const SECTIONS: &[&str] = &["scenario", "domain", "grid", "weight", "nonlinearity", "omega0", "omega1", "pipeline", "tolerances"];

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let sections = parse_ini(text)?;
    let mut rd = Reader { sections, errors: Vec::new() };
    for s in rd.sections.clone() {
        if !SECTIONS.contains(&s.name.as_str()) && !s.name.starts_with("weight.piece.") {
            rd.fail(format!("unknown section [{}]", s.name));
            rd.sections.retain(|t| t.name != s.name);
        }
    }

    let name = rd.required("scenario", "name").unwrap_or_default();
    if !name.is_empty() && !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        rd.fail(format!("scenario name '{name}' may only contain letters, digits, '_' and '-'"));
    }
    let description = rd.take("scenario", "description").unwrap_or_default();

    let kind = rd.required("domain", "kind").unwrap_or_default();
    let domain = match kind.as_str() {
        "interval" => {
            let a = rd.opt_number("domain", "a").unwrap_or(0.0);
            let b = rd.opt_number("domain", "b").unwrap_or(1.0);
            Domain::interval(a, b)
        }
        "rectangle" => {
            let x0 = rd.opt_number("domain", "x0").unwrap_or(0.0);
            let x1 = rd.opt_number("domain", "x1").unwrap_or(1.0);
            let y0 = rd.opt_number("domain", "y0").unwrap_or(0.0);
            let y1 = rd.opt_number("domain", "y1").unwrap_or(1.0);
            Domain::rectangle(x0, x1, y0, y1)
        }
        "disk" => {
            let cx = rd.opt_number("domain", "cx").unwrap_or(0.0);
            let cy = rd.opt_number("domain", "cy").unwrap_or(0.0);
            let radius = rd.opt_number("domain", "radius").unwrap_or(1.0);
            Domain::disk(cx, cy, radius)
        }
        "" => Err(Error::Config(String::new())),
        other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
    };
    let domain = match domain {
        Ok(d) => Some(d),
        Err(Error::Config(m)) if m.is_empty() => None,
        Err(e) => {
            rd.fail(e.to_string());
            None
        }
    };

    let resolution = rd.req_number("grid", "resolution").and_then(|r| {
        if r.fract() == 0.0 && r >= 4.0 {
            Some(r as usize)
        } else {
            None
        }
    });
    if resolution.is_none() && rd.errors.iter().all(|e| !e.contains("[grid]")) {
        rd.fail("[grid] resolution must be an integer >= 4");
    }

    let r = rd.opt_number("weight", "r").unwrap_or(f64::INFINITY);
    let sampling = match rd.take("weight", "sampling").as_deref() {
        None | Some("nodal") => Sampling::Nodal,
        Some("cell-average") => Sampling::CellAverage,
        Some(other) => {
            rd.fail(format!("[weight] sampling: unknown mode '{other}'"));
            Sampling::Nodal
        }
    };
    let scale = rd.opt_number("weight", "scale").unwrap_or(1.0);
    let amplitude = rd.opt_number("weight", "amplitude").unwrap_or(1.0);
    let mut piece_names: Vec<(u32, String)> = Vec::new();
    for s in &rd.sections {
        if let Some(idx) = s.name.strip_prefix("weight.piece.") {
            match idx.parse::<u32>() {
                Ok(i) => piece_names.push((i, s.name.clone())),
                Err(_) => rd.errors.push(format!("[{}]: piece index must be an integer", s.name)),
            }
        }
    }
    piece_names.sort();
    let mut sources = Vec::new();
    let mut pieces = Vec::new();
    for (_, sec) in &piece_names {
        let region_src = rd.required(sec, "region");
        let expr_src = rd.required(sec, "expr");
        let region = region_src.as_deref().and_then(|s| match PieceRegion::parse(s) {
            Ok(r) => Some(r),
            Err(e) => {
                rd.fail(format!("[{sec}] region: {e}"));
                None
            }
        });
        let expr = rd.expr(sec, "expr", expr_src.clone());
        if let (Some(region), Some(expr), Some(rs), Some(es)) = (region, expr, region_src, expr_src) {
            pieces.push(WeightPiece { region, expr });
            sources.push((rs, es));
        }
    }
    if piece_names.is_empty() {
        rd.fail("weight needs at least one [weight.piece.N] section");
    }
    if let Some(d) = &domain {
        if !(r > d.dim() as f64) {
            rd.fail(format!("[weight] r = {r} must exceed the dimension {}", d.dim()));
        }
    }

    let nl_kind = match rd.take("nonlinearity", "kind").as_deref() {
        None | Some("power") => NonlinearityKind::Power,
        Some("power_plus_min") => NonlinearityKind::PowerPlusMin,
        Some(other) => {
            rd.fail(format!("[nonlinearity] kind: unknown '{other}'"));
            NonlinearityKind::Power
        }
    };
    let p = rd.req_number("nonlinearity", "p").unwrap_or(f64::NAN);
    let kappa = rd.opt_number("nonlinearity", "kappa").unwrap_or(1.0);
    let k1 = rd.opt_number("nonlinearity", "k1");
    let k2 = rd.opt_number("nonlinearity", "k2");
    let nonlinearity = NonlinearitySpec { kind: nl_kind, p, kappa, k1, k2 };
    if !p.is_nan() {
        if let Err(e) = nonlinearity.build() {
            rd.fail(e.to_string());
        }
    }

    let region_of = |rd: &mut Reader, sec: &str| -> Option<SubRegion> {
        if !rd.has(sec) {
            return None;
        }
        let src = rd.required(sec, "region")?;
        match sub_region(&src) {
            Ok(r) => Some(r),
            Err(e) => {
                rd.fail(format!("[{sec}] {e}"));
                None
            }
        }
    };
    let omega0 = region_of(&mut rd, "omega0");
    let omega1 = region_of(&mut rd, "omega1");
    for (sec, reg) in [("omega0", &omega0), ("omega1", &omega1)] {
        if let (Some(reg), Some(d)) = (reg, &domain) {
            if reg.dim() != d.dim() {
                rd.fail(format!("[{sec}] region dimension does not match the domain"));
            }
        }
    }

    let kind = rd.required("pipeline", "kind").unwrap_or_default();
    let pipeline = match kind.as_str() {
        "solve" => {
            let bracket = match rd.take("pipeline", "bracket").as_deref() {
                None | Some("eigen-torsion") => {
                    if rd.has("pipeline") && (rd.take("pipeline", "sub_expr").is_some() | rd.take("pipeline", "super_expr").is_some()) {
                        rd.fail("[pipeline] sub_expr/super_expr need bracket = expressions");
                    }
                    Some(BracketSpec::EigenTorsion)
                }
                Some("expressions") => {
                    let s = rd.required("pipeline", "sub_expr");
                    let t = rd.required("pipeline", "super_expr");
                    let sub = rd.expr("pipeline", "sub_expr", s);
                    let sup = rd.expr("pipeline", "super_expr", t);
                    sub.zip(sup).map(|(sub, sup)| BracketSpec::Expressions { sub, sup })
                }
                Some(other) => {
                    rd.fail(format!("[pipeline] bracket: unknown '{other}'"));
                    None
                }
            };
            let e = rd.take("pipeline", "exact_expr");
            let exact = rd.expr("pipeline", "exact_expr", e);
            bracket.map(|bracket| Pipeline::Solve { bracket, exact })
        }
        "poisson" => {
            let r = rd.required("pipeline", "rhs_expr");
            let rhs = rd.expr("pipeline", "rhs_expr", r);
            let b = rd.take("pipeline", "boundary_expr").or(Some("0".into()));
            let boundary = rd.expr("pipeline", "boundary_expr", b);
            let e = rd.take("pipeline", "exact_expr");
            let exact = rd.expr("pipeline", "exact_expr", e);
            rhs.zip(boundary).map(|(rhs, boundary)| Pipeline::Poisson { rhs, boundary, exact })
        }
        "certify-existence" => {
            if omega0.is_none() {
                rd.fail("certify-existence requires an [omega0] region");
            }
            Some(Pipeline::CertifyExistence)
        }
        "certify-nonexistence" => Some(Pipeline::CertifyNonexistence),
        "corollary33" => {
            if omega1.is_none() {
                rd.fail("corollary33 requires an [omega1] region");
            }
            Some(Pipeline::IntegralCriterion)
        }
        "constants" => Some(Pipeline::Constants),
        "" => None,
        other => {
            rd.fail(format!("[pipeline] kind: unknown '{other}'"));
            None
        }
    };

    let mut tolerances = Tolerances::default();
    if rd.has("tolerances") {
        let count = |rd: &mut Reader, key: &str, slot: &mut usize| {
            if let Some(v) = rd.opt_number("tolerances", key) {
                if v.fract() == 0.0 && v >= 1.0 {
                    *slot = v as usize;
                } else {
                    rd.fail(format!("[tolerances] {key} must be a positive integer"));
                }
            }
        };
        count(&mut rd, "max_sweeps", &mut tolerances.max_sweeps);
        count(&mut rd, "max_green_rows", &mut tolerances.max_green_rows);
        for (key, slot) in [
            ("change_tol", &mut tolerances.change_tol),
            ("residual_tol", &mut tolerances.residual_tol),
            ("shift_max", &mut tolerances.shift_max),
            ("bracket_tol", &mut tolerances.bracket_tol),
            ("verify_tol", &mut tolerances.verify_tol),
            ("eigen_tol", &mut tolerances.eigen_tol),
        ] {
            if let Some(v) = rd.opt_number("tolerances", key) {
                if v > 0.0 {
                    *slot = v;
                } else {
                    rd.fail(format!("[tolerances] {key} must be positive"));
                }
            }
        }
    }

    rd.leftovers();
    if !rd.errors.is_empty() {
        return Err(Error::Config(rd.errors.join("; ")));
    }
    Ok(Scenario {
        name,
        description,
        domain: domain.expect("validated"),
        resolution: resolution.expect("validated"),
        weight: WeightSpec { sources, pieces, r, sampling, scale, amplitude },
        nonlinearity,
        omega0,
        omega1,
        pipeline: pipeline.expect("validated"),
        tolerances,
    })
}
