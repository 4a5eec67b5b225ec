//! Verification suite: configuration, the check registry, the runner and
//! the canonical JSON report.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::connect::{self, CanonicalTorsionPackage};
use crate::error::{Error, Result};
use crate::homog::{self, build_base, BaseModel, QuatBase};
use crate::linalg::{self, C64};
use crate::multilinear::{bianchi_b, pq_project, sigma_t, tensor_norm_sq, ComplexStructureData, MetricData, RTensor};
use crate::oracle;
use crate::repthy::{self, PqFilter, RhoVariant};
use crate::twistor::{self, Structure, Twistor};
use crate::{TOL_CMP, TOL_STRUCT};

pub const SCHEMA_VERSION: u64 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The parameter t: a number, or a multiple of t₀ or t₁ resolved from the
/// measured scalar curvature of the base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TSpec {
    Value(f64),
    T0(f64),
    T1(f64),
}

impl TSpec {
    pub fn resolve(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            TSpec::Value(v) => v,
            TSpec::T0(f) => f * t0,
            TSpec::T1(f) => f * t1,
        }
    }
}

impl FromStr for TSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("cannot parse t value {s:?}"));
        for (suffix, ctor) in [("t0", TSpec::T0 as fn(f64) -> TSpec), ("t1", TSpec::T1)] {
            if let Some(head) = s.strip_suffix(suffix) {
                let head = head.trim().trim_end_matches('*').trim();
                let f = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
                return Ok(ctor(f));
            }
        }
        s.parse::<f64>().map(TSpec::Value).map_err(|_| bad())
    }
}

impl fmt::Display for TSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TSpec::Value(v) => write!(f, "{v}"),
            TSpec::T0(k) if k == 1.0 => write!(f, "t0"),
            TSpec::T1(k) if k == 1.0 => write!(f, "t1"),
            TSpec::T0(k) => write!(f, "{k}*t0"),
            TSpec::T1(k) => write!(f, "{k}*t1"),
        }
    }
}

/// Which part of the registry a run covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Verify,
    Rep,
    Holonomy,
    Oracle,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Verify => "verify",
            Suite::Rep => "rep",
            Suite::Holonomy => "holonomy",
            Suite::Oracle => "oracle",
        }
    }

    fn groups(&self) -> &'static [Group] {
        match self {
            Suite::Verify => &[Group::Rep, Group::Base, Group::Twistor, Group::Connection, Group::Holonomy, Group::Submersion],
            Suite::Rep => &[Group::Rep],
            Suite::Holonomy => &[Group::Holonomy],
            Suite::Oracle => &[Group::Oracle],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub base: BaseModel,
    pub n: usize,
    pub scale: f64,
    pub t: TSpec,
    pub structure: Structure,
    pub tol: f64,
    pub tol_cmp: f64,
    /// Id prefixes; a leading '-' excludes. Empty means everything.
    pub checks: Vec<String>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            base: BaseModel::S4,
            n: 1,
            scale: 1.0,
            t: TSpec::T1(1.0),
            structure: Structure::J1,
            tol: TOL_STRUCT,
            tol_cmp: TOL_CMP,
            checks: Vec::new(),
            seed: 0,
        }
    }
}

impl SuiteConfig {
    /// Applies one `key=value` setting. Keys match the command-line flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |what: &str| value.parse::<f64>().map_err(|_| Error::Config(format!("{what}: not a number: {value:?}")));
        match key.trim().replace('_', "-").as_str() {
            "base" => self.base = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "n" => self.n = value.parse().map_err(|_| Error::Config(format!("n: not a positive integer: {value:?}")))?,
            "scale" => self.scale = num("scale")?,
            "t" => self.t = value.parse()?,
            "structure" => self.structure = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "tol" => self.tol = num("tol")?,
            "tol-cmp" => self.tol_cmp = num("tol-cmp")?,
            "seed" => self.seed = value.parse().map_err(|_| Error::Config(format!("seed: not an integer: {value:?}")))?,
            "checks" => {
                self.checks = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a plain-text `key=value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.tol) || !positive(self.tol_cmp) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !positive(self.scale) {
            return Err(Error::Config("scale must be positive".into()));
        }
        match self.t {
            TSpec::Value(v) | TSpec::T0(v) | TSpec::T1(v) if !positive(v) => {
                Err(Error::Config(format!("t must be positive, got {}", self.t)))
            }
            _ => match self.base {
                BaseModel::S4 | BaseModel::Cp2 if self.n != 1 => {
                    Err(Error::Config(format!("{} requires n = 1", self.base.name())))
                }
                _ if self.n == 0 => Err(Error::Config("n must be at least 1".into())),
                _ => Ok(()),
            },
        }
    }

    fn selected(&self, id: &str) -> bool {
        let (ex, inc): (Vec<&String>, Vec<&String>) = self.checks.iter().partition(|c| c.starts_with('-'));
        if ex.iter().any(|c| id.starts_with(&c[1..])) {
            return false;
        }
        inc.is_empty() || inc.iter().any(|c| id.starts_with(c.as_str()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Rep,
    Base,
    Twistor,
    Connection,
    Holonomy,
    Submersion,
    Oracle,
}

#[derive(Clone, Copy, Debug)]
enum Tol {
    Struct,
    Cmp,
    Fixed(f64),
}

/// Whether the residual must stay below the tolerance or exceed it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    Below,
    Above,
}

pub struct CheckSpec {
    pub id: &'static str,
    pub name: &'static str,
    pub paper_ref: &'static str,
    pub group: Group,
    tol: Tol,
    pub comparison: Comparison,
}

const fn spec(id: &'static str, name: &'static str, paper_ref: &'static str, group: Group, tol: Tol) -> CheckSpec {
    CheckSpec { id, name, paper_ref, group, tol, comparison: Comparison::Below }
}

const fn spec_above(id: &'static str, name: &'static str, paper_ref: &'static str, group: Group, tol: Tol) -> CheckSpec {
    CheckSpec { id, name, paper_ref, group, tol, comparison: Comparison::Above }
}

use Group::*;

/// Every check the suite knows, in execution order. Reports list them
/// sorted by id.
pub static REGISTRY: &[CheckSpec] = &[
    spec("r01.norm_identity", "|lambda T0 + conj| squared equals 12n|lambda|^2", "Eq. (101)", Rep, Tol::Struct),
    spec("r02.fixed_complex", "invariant (2,1)-forms are spanned by T0", "Prop. 1", Rep, Tol::Fixed(1e-9)),
    spec("r03.fixed_real", "invariant real (2,1)+(1,2)-forms have dimension 2", "Cor. 1", Rep, Tol::Fixed(1e-9)),
    spec("r04.stabilizer", "stabiliser of T0 in u(2n+1) equals rho(sp(n)+u(1))", "Prop. 2", Rep, Tol::Fixed(1e-9)),
    spec("r05.curvature_space", "algebraic curvature space has dimension 1 + dim S^4 E", "Prop. 7", Rep, Tol::Fixed(1e-9)),
    spec("r06.sigma_form", "sigma of T0 + conj is a 4-form", "Eq. (202)", Rep, Tol::Struct),
    spec("b01.homogeneous", "Jacobi, reductivity and isotropy invariance of the base", "Sec. 5", Base, Tol::Struct),
    spec("b02.quaternionic", "I', J', K' are orthogonal and satisfy the quaternion relations", "Sec. 5", Base, Tol::Struct),
    spec("b03.qk_shape", "hyper part of R' commutes with Q' and is Ricci-flat", "Eq. (300)", Base, Tol::Cmp),
    spec("b04.scalar", "scalar curvature of the base matches the model", "Sec. 5", Base, Tol::Cmp),
    spec("t01.construction", "h_t invariant, splitting orthogonal, linkage isometric", "Sec. 5", Twistor, Tol::Struct),
    spec("t02.torsion_closed_form", "torsion matches c(t)(omega^conj(alpha) + conj(omega)^alpha)", "Eq. (301)", Twistor, Tol::Cmp),
    spec("t03.torsion_norm", "|T|^2 matches (6/t)(2 - s't/(2(n+2)))^2", "Eq. (302)", Twistor, Tol::Cmp),
    spec("t04.torsion_type", "torsion type (2,1)+(1,2) for J1, (3,0)+(0,3) for J2", "Eqs. (303)-(304)", Twistor, Tol::Struct),
    spec("t05.kahler_torsion", "torsion vanishes at t0", "Sec. 5", Twistor, Tol::Struct),
    spec("t06.kahler_closed", "d Omega vanishes at t0", "Sec. 5", Twistor, Tol::Struct),
    spec("t07.integrable", "J1 is integrable", "Sec. 5", Twistor, Tol::Struct),
    spec("c01.g1_class", "Nijenhuis tensor is totally skew", "Sec. 2", Connection, Tol::Cmp),
    spec("c02.hermitian", "nabla^a g = 0, nabla^a J = 0, torsion = -d^c Omega + N", "Sec. 2", Connection, Tol::Cmp),
    spec("c03.torsion_solve", "independent Hermitian torsion solve agrees", "Sec. 2", Connection, Tol::Cmp),
    spec("c04.parallel_torsion", "torsion is parallel", "Prop. 6", Connection, Tol::Struct),
    spec("c05.curvature_general", "R^a - R with covariant-derivative terms of T", "Eq. (204)", Connection, Tol::Cmp),
    spec("c06.curvature_parallel", "R^a = R + T-quadratic terms", "Eq. (204)", Connection, Tol::Cmp),
    spec("c07.bianchi", "cyclic sum of R^a equals sigma_T", "Eq. (201)", Connection, Tol::Cmp),
    spec("c08.pair_symmetry", "R^a(X,Y,Z,W) = R^a(Z,W,X,Y)", "Eq. (201)", Connection, Tol::Cmp),
    spec("c09.torsion_annihilation", "cyclic sum R^a(U,V,X,T(Y,Z)) vanishes", "Eq. (203)", Connection, Tol::Cmp),
    spec("c10.ricci_trace", "Ric^a = Ric - r^a/4 and s^a = s - |T|^2/4", "Eq. (205)", Connection, Tol::Cmp),
    spec("c11.ricci_a", "Ric^a = |T|^2/(12n)((n+1)g_H + 2g_V)", "Eq. (211)", Connection, Tol::Cmp),
    spec("c12.ricci_lc", "Ric = |T|^2/(24n)((2n+3)g_H + (n+4)g_V)", "Eq. (212)", Connection, Tol::Cmp),
    spec("c13.einstein", "Einstein iff n = 1, H:V Ricci ratio (2n+3):(n+4)", "Cor. 3", Connection, Tol::Cmp),
    spec("c14.j_invariance", "R^a is J-invariant in both pairs", "Prop. 5", Connection, Tol::Cmp),
    spec("c15.decomposition", "R_hyper vanishes on vertical slots and commutes with I, J, K", "Eqs. (307)-(308)", Connection, Tol::Cmp),
    spec("c16.hyper_projects", "R_hyper is the horizontal lift of R'_hyper", "Lemma 5", Connection, Tol::Cmp),
    spec("c17.bianchi_model", "b(coef R0^a) = sigma_T", "Cor. 6", Connection, Tol::Cmp),
    spec("c18.curvature_space", "R^a lies in the algebraic curvature space", "Cor. 6", Connection, Tol::Fixed(1e-9)),
    spec("c19.type_swap", "torsion type flips under the structure swap", "Prop. 4", Connection, Tol::Struct),
    spec("c20.nearly_kahler", "(nabla_X J)X = 0 for J2", "Prop. 4", Connection, Tol::Cmp),
    spec_above("c21.nondegenerate", "X -> T(X,.,.) is injective", "Prop. 3", Connection, Tol::Fixed(1e-6)),
    spec("h01.closure", "holonomy algebra closes and preserves g and J", "Prop. 6", Holonomy, Tol::Fixed(1e-9)),
    spec("h02.contained", "holonomy lies in rho(sp(n)+u(1))", "Prop. 6", Holonomy, Tol::Fixed(1e-9)),
    spec("h03.dimension", "holonomy has dimension dim H + 1 for base holonomy H Sp(1)", "Prop. 6", Holonomy, Tol::Fixed(1e-9)),
    spec("h04.equality", "holonomy equals rho(sp(n)+u(1))", "Prop. 6", Holonomy, Tol::Fixed(1e-9)),
    spec("h05.u1_trace", "sum_k R^a(e_k, J e_k) is proportional to J_H + 2J_V", "Prop. 6", Holonomy, Tol::Cmp),
    spec("h06.fixed_forms", "holonomy-invariant real (2,1)+(1,2)-forms: dimension 2, containing T", "Prop. 3", Holonomy, Tol::Fixed(1e-9)),
    spec("h07.kahler_holonomy", "at t0 the holonomy lies in u(2n+1)", "Sec. 5", Holonomy, Tol::Fixed(1e-9)),
    spec("s01.oneill", "O'Neill formula reconstructs R' from R and A", "Lemma 5", Submersion, Tol::Cmp),
    spec("s02.lemma1", "splitting identities for nabla and nabla^a", "Lemma 1", Submersion, Tol::Cmp),
    spec("s03.a_tensor", "A_X Y = -T(X,Y)/2 vertically", "Lemma 1", Submersion, Tol::Cmp),
    spec("s04.projectable_metric", "g restricted to H is projectable", "Lemma 2", Submersion, Tol::Cmp),
    spec("s05.quaternionic_span", "Lie derivative along V preserves span(I, J, K) on H", "Lemma 3", Submersion, Tol::Cmp),
    spec("s06.base_reconstruction", "R' = R^a - g(T,T) on horizontal lifts", "Lemma 5", Submersion, Tol::Cmp),
    spec_above("s07.j_not_projectable", "J restricted to H is not projectable", "Prop. A6", Submersion, Tol::Fixed(1e-3)),
    spec("o01.s4_christoffel", "finite-difference Christoffels of S^4", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o02.s4_curvature", "S^4 chart curvature invariants match", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o03.cp1_curvature", "CP^1 fibre Gaussian curvature is 4", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o04.cp2_curvature", "CP^2 chart curvature invariants match", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o05.cp3_curvature", "CP^3 twistor chart curvature invariants match", "Eq. (212)", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o06.cp3_d_omega", "CP^3 chart |d Omega|^2 matches", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o07.cp3_nijenhuis", "CP^3 chart |N|^2 matches", "Sec. 5", Oracle, Tol::Fixed(oracle::ORACLE_TOL)),
    spec("o08.convergence", "finite-difference error ratio under step halving is 4", "Sec. 5", Oracle, Tol::Fixed(0.05)),
];

pub fn check_spec(id: &str) -> Option<&'static CheckSpec> {
    REGISTRY.iter().find(|c| c.id == id)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    #[serde(rename = "paperRef")]
    pub paper_ref: String,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub passed: u64,
    pub failed: u64,
    pub skipped: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportError {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportParams {
    pub suite: String,
    pub base: String,
    pub n: u64,
    pub scale: f64,
    pub t: String,
    pub t_resolved: f64,
    pub t0: f64,
    pub t1: f64,
    pub s_prime: f64,
    pub structure: String,
    pub tol: f64,
    pub tol_cmp: f64,
    pub seed: u64,
    pub checks: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub schema_version: u64,
    pub tool_version: String,
    pub timestamp: String,
    pub params: ReportParams,
    pub checks: Vec<CheckResult>,
    pub errors: Vec<ReportError>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0 && self.errors.is_empty()
    }

    /// 0 when everything passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    fn finish(&mut self) {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
        let mut s = Summary::default();
        for c in &self.checks {
            if c.skipped {
                s.skipped += 1;
            } else if c.pass {
                s.passed += 1;
            } else {
                s.failed += 1;
            }
        }
        self.summary = s;
    }

    pub fn to_canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serialises");
        let mut out = String::new();
        write_canonical(&v, 0, &mut out);
        out.push('\n');
        out
    }
}

fn write_canonical(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => out.push_str(&u.to_string()),
            (_, Some(i), _) => out.push_str(&i.to_string()),
            (_, _, Some(f)) => out.push_str(&format_f64(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_canonical(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            // serde_json's default map is ordered by key.
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_canonical(x, depth + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_f64(f: f64) -> String {
    if f == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{f:.16e}")
}

fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse::<i64>().ok()).unwrap_or(0);
    chrono::DateTime::from_timestamp(secs, 0)
        .unwrap_or_default()
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

/// Writes the canonical JSON form of the report.
pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_canonical_json())?;
    Ok(())
}

struct Outcome {
    residual: f64,
    detail: Option<String>,
}

impl From<f64> for Outcome {
    fn from(residual: f64) -> Self {
        Outcome { residual, detail: None }
    }
}

fn with_detail(residual: f64, detail: String) -> Outcome {
    Outcome { residual, detail: Some(detail) }
}

struct Runner<'a> {
    cfg: &'a SuiteConfig,
    groups: &'a [Group],
    checks: Vec<CheckResult>,
    errors: Vec<ReportError>,
}

impl Runner<'_> {
    fn entry(&self, spec: &CheckSpec) -> CheckResult {
        let tolerance = match spec.tol {
            Tol::Struct => self.cfg.tol,
            Tol::Cmp => self.cfg.tol_cmp,
            Tol::Fixed(v) => v,
        };
        CheckResult {
            id: spec.id.into(),
            name: spec.name.into(),
            paper_ref: spec.paper_ref.into(),
            residual: 0.0,
            tolerance,
            comparison: spec.comparison,
            pass: false,
            skipped: false,
            detail: None,
        }
    }

    fn wanted(&self, id: &str) -> Option<&'static CheckSpec> {
        let spec = check_spec(id).unwrap_or_else(|| panic!("unregistered check {id}"));
        (self.groups.contains(&spec.group) && self.cfg.selected(id)).then_some(spec)
    }

    /// Runs `f` unless the check is filtered out, or skipped because `gate`
    /// holds a reason.
    fn run(&mut self, id: &str, gate: Option<&str>, f: impl FnOnce() -> Result<Outcome>) {
        let Some(spec) = self.wanted(id) else { return };
        let mut e = self.entry(spec);
        if let Some(reason) = gate {
            e.skipped = true;
            e.detail = Some(reason.to_string());
            self.checks.push(e);
            return;
        }
        match f() {
            Ok(o) if o.residual.is_finite() => {
                e.residual = o.residual;
                e.pass = match spec.comparison {
                    Comparison::Below => o.residual < e.tolerance,
                    Comparison::Above => o.residual > e.tolerance,
                };
                e.detail = o.detail;
            }
            Ok(o) => {
                e.residual = f64::MAX;
                e.detail = Some(format!("non-finite residual {}", o.residual));
            }
            Err(err) => {
                e.residual = f64::MAX;
                e.detail = Some(err.to_string());
                self.errors.push(ReportError { stage: id.into(), message: err.to_string() });
            }
        }
        log::debug!("{} residual {:e} pass {}", e.id, e.residual, e.pass);
        self.checks.push(e);
    }

    fn any_in(&self, group: Group) -> bool {
        self.groups.contains(&group) && REGISTRY.iter().any(|c| c.group == group && self.cfg.selected(c.id))
    }
}

fn dim_residual(got: usize, want: usize) -> f64 {
    (got as f64 - want as f64).abs()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// |T − (projections onto the given types)|.
fn type_residual(t: &RTensor, j: &ComplexStructureData, types: &[(usize, usize)]) -> Result<f64> {
    let tc = t.to_complex();
    let mut rest = tc.clone();
    for &(p, q) in types {
        rest = rest.sub(&pq_project(&tc, j, p, q)?);
    }
    Ok(rest.max_abs())
}

/// R(x,y,Lz,Lw) − R(x,y,z,w) over L, together with the Ricci trace.
fn commutes_with(r: &RTensor, ls: &[&DMatrix<f64>], g: &MetricData) -> f64 {
    let mut worst: f64 = 0.0;
    for l in ls {
        let moved = r.pull_slot(2, l).pull_slot(3, l);
        worst = worst.max(moved.max_abs_diff(r));
    }
    let (ric, _) = homog::ricci_scalar(r, g);
    worst.max(ric.amax())
}

/// The state shared by the geometric groups.
struct Scenario {
    base: QuatBase,
    s_prime: f64,
    t0: f64,
    t1: f64,
    t: f64,
    twistor: Option<Twistor>,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

/// Resolves the configuration against the base. Fails on configuration
/// errors only.
fn scenario(cfg: &SuiteConfig) -> Result<Scenario> {
    cfg.validate()?;
    let base = build_base(cfg.base, cfg.n, cfg.scale).map_err(|e| Error::Config(e.to_string()))?;
    let s_prime = base.scalar_curvature();
    if !(s_prime > 0.0) {
        return Err(Error::Config(format!("base scalar curvature {s_prime} is not positive; t0/t1 unresolved")));
    }
    let (t0, t1) = twistor::t0_t1(s_prime, cfg.n);
    let t = cfg.t.resolve(t0, t1);
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("t resolves to {t}")));
    }
    Ok(Scenario { base, s_prime, t0, t1, t, twistor: None })
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run(cfg, Suite::Verify)
}

/// Runs the checks of `suite` for the configuration.
pub fn run(cfg: &SuiteConfig, suite: Suite) -> Result<VerificationReport> {
    let mut sc = scenario(cfg)?;
    log::info!(
        "{} suite: base {} n={} s'={} t={} ({}) structure {}",
        suite.name(),
        cfg.base.name(),
        cfg.n,
        sc.s_prime,
        sc.t,
        cfg.t,
        cfg.structure.name()
    );
    let mut runner = Runner { cfg, groups: suite.groups(), checks: Vec::new(), errors: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    if runner.any_in(Rep) {
        rep_checks(&mut runner, cfg.n, &mut rng);
    }
    if runner.any_in(Base) {
        base_checks(&mut runner, &sc);
    }
    let geometric = [Twistor, Connection, Holonomy, Submersion].iter().any(|&g| runner.any_in(g));
    if geometric {
        match twistor::build_twistor(&sc.base, sc.t, cfg.structure) {
            Ok(z) => sc.twistor = Some(z),
            Err(e) => runner.errors.push(ReportError { stage: "twistor".into(), message: e.to_string() }),
        }
    }
    if let Some(z) = &sc.twistor {
        twistor_and_connection_checks(&mut runner, &sc, z);
    }
    if runner.any_in(Oracle) {
        oracle_checks(&mut runner, &sc, &mut rng);
    }

    let params = ReportParams {
        suite: suite.name().into(),
        base: cfg.base.name().into(),
        n: cfg.n as u64,
        scale: cfg.scale,
        t: cfg.t.to_string(),
        t_resolved: sc.t,
        t0: sc.t0,
        t1: sc.t1,
        s_prime: sc.s_prime,
        structure: cfg.structure.name().into(),
        tol: cfg.tol,
        tol_cmp: cfg.tol_cmp,
        seed: cfg.seed,
        checks: cfg.checks.clone(),
    };
    let mut report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        timestamp: timestamp(),
        params,
        checks: runner.checks,
        errors: runner.errors,
        summary: Summary::default(),
    };
    report.finish();
    log::info!("summary: {:?}, {} errors", report.summary, report.errors.len());
    Ok(report)
}

fn rep_checks(rn: &mut Runner, n: usize, rng: &mut ChaCha8Rng) {
    let d = 4 * n + 2;
    let flat = MetricData::identity(d);
    rn.run("r01.norm_identity", None, || {
        let mut lams = vec![C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.3, -2.0)];
        for _ in 0..3 {
            lams.push(C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        }
        let mut worst: f64 = 0.0;
        for l in lams {
            let v = tensor_norm_sq(&repthy::torsion_family(n, l), &flat)?;
            worst = worst.max((v - 12.0 * n as f64 * l.norm_sqr()).abs());
        }
        Ok(worst.into())
    });
    let t0c = repthy::t0(n);
    let t0vec = |t: &crate::CTensor| t.to_dvector();
    let fixed = |filter: PqFilter, want: usize| -> Result<Outcome> {
        let rho = repthy::build_rho(n, RhoVariant::Rho)?;
        let fx = repthy::fixed_subspace(&repthy::induced_action(&rho, (0, 3), filter)?);
        let q: Vec<DVector<C64>> = fx.iter().map(t0vec).collect();
        let target = match filter {
            PqFilter::RealPair(..) => repthy::torsion_family(n, C64::new(1.0, 0.0)).to_complex(),
            _ => t0c.clone(),
        };
        let proj = linalg::projection_residual(&q, &t0vec(&target)) / target.frobenius_sq().sqrt();
        Ok(with_detail(dim_residual(fx.len(), want).max(proj), format!("dimension {}", fx.len())))
    };
    rn.run("r02.fixed_complex", None, || fixed(PqFilter::Complex(2, 1), 1));
    rn.run("r03.fixed_real", None, || fixed(PqFilter::RealPair(2, 1), 2));
    rn.run("r04.stabilizer", None, || {
        let rho = repthy::build_rho(n, RhoVariant::Rho)?;
        let stab = repthy::stabilizer_algebra(&t0c, &repthy::unitary_algebra(2 * n + 1))?;
        let dist = if stab.len() == rho.len() { stab.subspace_distance(&rho) } else { 1.0 };
        Ok(with_detail(dim_residual(stab.len(), n * (2 * n + 1) + 1).max(dist), format!("dimension {}", stab.len())))
    });
    rn.run("r05.curvature_space", None, || {
        let cs = repthy::curvature_space(n)?;
        let want = 1 + binomial(2 * n + 3, 4);
        Ok(with_detail(
            dim_residual(cs.dim(), want),
            format!("dimension {} (ker b on S^2: {}, S^2: {})", cs.dim(), cs.ker_b_dim, cs.s2_dim),
        ))
    });
    rn.run("r06.sigma_form", None, || {
        let s = sigma_t(&repthy::torsion_family(n, C64::new(1.0, 0.0)), &flat)?;
        Ok(with_detail(s.skew_residual(), format!("max component {}", s.max_abs())))
    });
}

fn base_checks(rn: &mut Runner, sc: &Scenario) {
    let b = &sc.base;
    rn.run("b01.homogeneous", None, || {
        let s = &b.space;
        Ok(s.jacobi_residual().max(s.reductivity_residual()).max(s.invariance_residual()).into())
    });
    rn.run("b02.quaternionic", None, || Ok(b.quat.residual(&b.space.metric).into()));
    rn.run("b03.qk_shape", None, || {
        let hyper = b.hyper_part();
        let r = commutes_with(&hyper, &b.quat.all(), &b.space.metric);
        Ok(with_detail(r, format!("hyper part max {}", hyper.max_abs())))
    });
    rn.run("b04.scalar", None, || {
        let n = b.n as f64;
        let model = match b.model {
            BaseModel::S4 => 12.0,
            BaseModel::Cp2 => 24.0,
            BaseModel::Hpn => 16.0 * n * (n + 2.0),
        } / b.scale;
        Ok(with_detail((sc.s_prime - model).abs() / model, format!("s' = {}", sc.s_prime)))
    });
}

struct Curvatures {
    r: RTensor,
    ra: RTensor,
}

fn twistor_and_connection_checks(rn: &mut Runner, sc: &Scenario, z: &Twistor) {
    let cfg = rn.cfg;
    let n = cfg.n;
    let nf = n as f64;
    let tot = &z.sub.total;
    let split = &z.split;
    let g = &split.g;
    let at_t0 = near(sc.t, sc.t0);
    let at_t1 = near(sc.t, sc.t1);
    let j1 = cfg.structure == Structure::J1;
    let only_t0 = (!at_t0).then_some("only at t = t0");
    let only_t1 = (!at_t1).then_some("only at t = t1");
    let parallel = (!(at_t0 || at_t1)).then_some("only where the torsion is parallel (t0, t1)");

    rn.run("t01.construction", None, || Ok(split.invariant_residual().max(z.sub.linkage_residual()).max(tot.invariance_residual()).into()));

    let pkg: std::result::Result<CanonicalTorsionPackage, String> =
        connect::canonical_connection(tot, &split.j).map_err(|e| e.to_string());
    rn.run("c01.g1_class", None, || {
        let nt = connect::nijenhuis(tot, &split.j);
        Ok(with_detail(nt.skew_residual() / (1.0 + nt.max_abs()), format!("|N| max {}", nt.max_abs())))
    });
    let pk = match &pkg {
        Ok(p) => p,
        Err(msg) => {
            rn.errors.push(ReportError { stage: "canonical_connection".into(), message: msg.clone() });
            let reason = format!("canonical connection unavailable: {msg}");
            for c in REGISTRY.iter().filter(|c| matches!(c.group, Twistor | Connection | Holonomy | Submersion)) {
                if !matches!(c.id, "t01.construction" | "c01.g1_class" | "t07.integrable")
                    && !c.id.starts_with('s')
                {
                    rn.run(c.id, Some(&reason), || unreachable!());
                }
            }
            submersion_checks(rn, sc, z, None);
            rn.run("t07.integrable", (!j1).then_some("J2 is never integrable"), || Ok(connect::nijenhuis(tot, &split.j).max_abs().into()));
            return;
        }
    };
    let ta = &pk.ta;

    rn.run("t02.torsion_closed_form", None, || {
        let (tf, im) = twistor::torsion_formula(split, sc.s_prime, n)?;
        Ok(tf.max_abs_diff(ta).max(im).into())
    });
    rn.run("t03.torsion_norm", None, || {
        let v = tensor_norm_sq(ta, g)?;
        let want = twistor::torsion_norm_sq_closed(sc.s_prime, n, sc.t);
        Ok(with_detail((v - want).abs() / want.max(1.0), format!("|T|^2 = {v}")))
    });
    rn.run("t04.torsion_type", None, || {
        let types: &[(usize, usize)] = if j1 { &[(2, 1), (1, 2)] } else { &[(3, 0), (0, 3)] };
        type_residual(ta, &split.j, types).map(Into::into)
    });
    rn.run("t05.kahler_torsion", only_t0, || Ok(ta.max_abs().into()));
    rn.run("t06.kahler_closed", only_t0.or((!j1).then_some("J2 is not Kaehler")), || {
        let om = connect::kahler_form(g, &split.j);
        Ok(homog::exterior_derivative(tot, &om).max_abs().into())
    });
    rn.run("t07.integrable", (!j1).then_some("J2 is never integrable"), || Ok(pk.n.max_abs().into()));

    rn.run("c02.hermitian", None, || Ok(pk.invariant_residual(tot, &split.j).into()));
    rn.run("c03.torsion_solve", None, || {
        Ok(with_detail(pk.solve_mismatch.max(pk.solve_residual), format!("least-squares residual {:e}", pk.solve_residual)))
    });
    let dt = homog::covariant_derivative_invariant(&pk.conn_a, ta);
    rn.run("c04.parallel_torsion", None, || {
        Ok(with_detail(dt.max_abs(), format!("|nabla T| / |T| = {:e}", dt.max_abs() / ta.max_abs().max(f64::MIN_POSITIVE))))
    });
    let curv = Curvatures { r: connect::curvature_of(tot, &pk.lc), ra: connect::curvature_of(tot, &pk.conn_a) };
    let (r, ra) = (&curv.r, &curv.ra);
    rn.run("c05.curvature_general", None, || connect::curvature_relation_general(r, ra, ta, &pk.lc, g).map(Into::into));
    rn.run("c06.curvature_parallel", parallel, || connect::curvature_relation_check(r, ra, ta, g).map(Into::into));
    rn.run("c07.bianchi", parallel, || Ok(bianchi_b(ra)?.max_abs_diff(&sigma_t(ta, g)?).into()));
    rn.run("c08.pair_symmetry", parallel, || Ok(ra.max_abs_diff(&ra.permuted(&[2, 3, 0, 1])).into()));
    rn.run("c09.torsion_annihilation", parallel, || Ok(connect::torsion_annihilation_residual(ra, ta, g).into()));
    let ricci = if at_t1 { connect::ricci_formulas_check(r, ra, ta, split).ok() } else { None };
    rn.run("c10.ricci_trace", None, || {
        let rr = connect::ricci_formulas_check(r, ra, ta, split)?;
        Ok(rr.ric_relation.max(rr.s_relation).into())
    });
    rn.run("c11.ricci_a", only_t1, || {
        let rr = ricci.as_ref().ok_or_else(|| Error::Structural("Ricci check failed".into()))?;
        Ok(rr.ric_a.max(rr.s_a).into())
    });
    rn.run("c12.ricci_lc", only_t1, || {
        let rr = ricci.as_ref().ok_or_else(|| Error::Structural("Ricci check failed".into()))?;
        Ok(rr.ric.max(rr.s).into())
    });
    rn.run("c13.einstein", only_t1, || {
        let rr = ricci.as_ref().ok_or_else(|| Error::Structural("Ricci check failed".into()))?;
        let ratio = rr.ric_h / rr.ric_v;
        let want = (2.0 * nf + 3.0) / (nf + 4.0);
        let res = if n == 1 { rr.einstein.max((ratio - 1.0).abs()) } else { (ratio - want).abs().max(if rr.einstein > 1e-6 { 0.0 } else { 1.0 }) };
        Ok(with_detail(res, format!("Ric eigenvalues H {} V {}, ratio {ratio}", rr.ric_h, rr.ric_v)))
    });
    rn.run("c14.j_invariance", parallel, || {
        let jm = split.j.j();
        let first = ra.pull_slot(0, jm).pull_slot(1, jm).max_abs_diff(ra);
        let second = ra.pull_slot(2, jm).pull_slot(3, jm).max_abs_diff(ra);
        Ok(first.max(second).into())
    });
    // R0^a is written with J1; for J2 the swapped structure is J1.
    let model_split = if j1 { split.clone() } else { connect::structure_swap(split).expect("valid structure") };
    let dec = if at_t1 { connect::decompose_curvature(ra, ta, &model_split).ok() } else { None };
    rn.run("c15.decomposition", only_t1, || {
        let dec = dec.as_ref().ok_or_else(|| Error::Structural("decomposition failed".into()))?;
        Ok(with_detail(
            dec.vertical_residual(split.hdim()).max(dec.quaternionic_residual(&model_split)),
            format!("coefficient {}, |R_hyper| max {}", dec.coefficient, dec.r_hyper.max_abs()),
        ))
    });
    rn.run("c16.hyper_projects", only_t1, || {
        let dec = dec.as_ref().ok_or_else(|| Error::Structural("decomposition failed".into()))?;
        let lifted = lift_horizontal(&sc.base.hyper_part(), &z.sub.linkage, g.g())?;
        Ok(dec.r_hyper.max_abs_diff(&lifted).into())
    });
    rn.run("c17.bianchi_model", only_t1, || {
        let dec = dec.as_ref().ok_or_else(|| Error::Structural("decomposition failed".into()))?;
        Ok(bianchi_b(&dec.r0a.scale(dec.coefficient))?.max_abs_diff(&sigma_t(ta, g)?).into())
    });
    let (frame, lam) = adapted(split, ta, j1);
    rn.run("c18.curvature_space", only_t1.or((!j1).then_some("model frame is fixed by J1")), || {
        let cs = repthy::curvature_space(n)?;
        let rm = ra.pull_all(&frame).scale(1.0 / lam.norm_sqr());
        Ok(with_detail(cs.projection_residual(&rm) / rm.max_abs(), format!("lambda before rotation {lam}")))
    });
    rn.run("c19.type_swap", only_t1, || {
        let sw = connect::structure_swap(split)?;
        let (here, there): (&[(usize, usize)], &[(usize, usize)]) =
            if j1 { (&[(2, 1), (1, 2)], &[(3, 0), (0, 3)]) } else { (&[(3, 0), (0, 3)], &[(2, 1), (1, 2)]) };
        let swapped_conn: f64 = pk.conn_a.maps.iter().map(|l| linalg::commutator(l, sw.j.j()).amax()).fold(0.0, f64::max);
        Ok(type_residual(ta, &split.j, here)?.max(type_residual(ta, &sw.j, there)?).max(swapped_conn).into())
    });
    rn.run("c20.nearly_kahler", (j1 || !at_t1).then_some("only for J2 at t = t1"), || {
        let nj = homog::covariant_derivative_endo(&pk.lc, split.j.j());
        let d = split.dim();
        let mut worst: f64 = 0.0;
        for x in 0..d {
            for y in 0..d {
                let sym = nj[x].column(y) + nj[y].column(x);
                worst = worst.max(sym.amax());
            }
        }
        Ok(worst.into())
    });
    rn.run("c21.nondegenerate", at_t0.then_some("torsion vanishes at t0"), || Ok(connect::torsion_nondegeneracy(ta, g).into()));

    holonomy_checks(rn, sc, z, pk, at_t0, at_t1);
    submersion_checks(rn, sc, z, Some((pk, &curv, at_t1)));
}

/// The J1-adapted model frame; for J2 the vertical orientation is reversed
/// so that J2 becomes the standard structure.
fn adapted(split: &twistor::SplitHermitianStructure, ta: &RTensor, j1: bool) -> (DMatrix<f64>, C64) {
    if j1 {
        return connect::adapted_frame(split, ta);
    }
    let sw = connect::structure_swap(split).expect("swap of a valid structure");
    let (mut e, lam) = connect::adapted_frame(&sw, ta);
    let last = e.ncols() - 1;
    e.column_mut(last).neg_mut();
    (e, lam)
}

/// Pulls a covariant base tensor back to the total space through the
/// linkage; vertical arguments give zero.
fn lift_horizontal(t: &RTensor, linkage: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<RTensor> {
    let (d, hd) = linkage.shape();
    let gram = (linkage.transpose() * g * linkage)
        .try_inverse()
        .ok_or_else(|| Error::Structural("degenerate linkage".into()))?;
    let p = gram * linkage.transpose() * g;
    let mut q = DMatrix::zeros(d, d);
    q.view_mut((0, 0), (hd, d)).copy_from(&p);
    let padded = RTensor::from_fn(d, t.valence(), |ix| if ix.iter().all(|&i| i < hd) { t.at(ix) } else { 0.0 });
    Ok(padded.pull_all(&q))
}

fn holonomy_checks(rn: &mut Runner, sc: &Scenario, z: &Twistor, pk: &CanonicalTorsionPackage, at_t0: bool, at_t1: bool) {
    if !rn.any_in(Holonomy) {
        return;
    }
    let cfg = rn.cfg;
    let n = cfg.n;
    let split = &z.split;
    let tot = &z.sub.total;
    let j1 = cfg.structure == Structure::J1;
    let parallel = (!(at_t0 || at_t1)).then_some("only where the torsion is parallel (t0, t1)");
    let only_t1 = (!at_t1).then_some("only at t = t1");
    let hol = if parallel.is_none() { Some(connect::holonomy_algebra(tot, &pk.conn_a)) } else { None };
    let hol = match hol {
        Some(Ok(h)) => Some(h),
        Some(Err(e)) => {
            rn.errors.push(ReportError { stage: "holonomy".into(), message: e.to_string() });
            None
        }
        None => None,
    };
    let missing = || Error::Structural("holonomy algebra unavailable".into());
    let variant = if j1 { RhoVariant::Rho } else { RhoVariant::Rho2 };
    let (frame, _) = adapted(split, &pk.ta, j1);
    let in_frame = || -> Result<repthy::MatrixLieAlgebra> { hol.as_ref().ok_or_else(missing)?.as_lie_algebra()?.conjugated(&frame) };

    rn.run("h01.closure", parallel, || {
        let h = hol.as_ref().ok_or_else(missing)?;
        let r = h.closure_residual().max(h.metric_residual(&split.g)).max(h.j_residual(split.j.j()));
        Ok(with_detail(r, format!("dimension {} after {} rounds", h.dim(), h.rounds)))
    });
    rn.run("h02.contained", only_t1, || {
        let rho = repthy::build_rho(n, variant)?;
        Ok(rho.containment_residual(&in_frame()?).into())
    });
    let base_hol = connect::holonomy_algebra(&sc.base.space, &sc.base.levi_civita()).map(|h| h.dim());
    let full = n * (2 * n + 1) + 3;
    rn.run("h03.dimension", only_t1, || {
        let h = hol.as_ref().ok_or_else(missing)?;
        let bh = *base_hol.as_ref().map_err(|e| Error::Structural(e.to_string()))?;
        let want = bh - 3 + 1;
        Ok(with_detail(dim_residual(h.dim(), want), format!("dimension {}, base holonomy dimension {bh}", h.dim())))
    });
    let generic = matches!(base_hol, Ok(bh) if bh == full);
    rn.run("h04.equality", only_t1.or((!generic).then_some("base holonomy is smaller than sp(n)+sp(1)")), || {
        let rho = repthy::build_rho(n, variant)?;
        let h = in_frame()?;
        let dist = if h.len() == rho.len() { h.subspace_distance(&rho) } else { 1.0 + dim_residual(h.len(), rho.len()) };
        Ok(dist.into())
    });
    rn.run("h05.u1_trace", only_t1.or((!j1).then_some("formula stated for J1")), || {
        let s = connect::u1_trace(tot, &pk.conn_a, split.j.j());
        let t2 = tensor_norm_sq(&pk.ta, &split.g)?;
        let nf = n as f64;
        let gen = split.j_h() + split.j_v() * 2.0;
        let corrected = (&gen + &s * (6.0 * nf / ((nf + 1.0) * t2))).amax();
        let stated = (&gen + &s * (12.0 * nf / ((2.0 * nf + 1.0) * t2))).amax();
        Ok(with_detail(corrected, format!("coefficient -6n/((n+1)|T|^2); with -12n/((2n+1)|T|^2) the residual is {stated:e}")))
    });
    rn.run("h06.fixed_forms", only_t1.or((!j1).then_some("model frame is fixed by J1")), || {
        let h = in_frame()?;
        let fx = repthy::fixed_subspace(&repthy::induced_action(&h, (0, 3), PqFilter::RealPair(2, 1))?);
        let q: Vec<DVector<C64>> = fx.iter().map(|t| t.to_dvector()).collect();
        let tm = pk.ta.pull_all(&frame).to_complex();
        let proj = linalg::projection_residual(&q, &tm.to_dvector()) / tm.frobenius_sq().sqrt();
        let want = if generic { 2 } else { fx.len().max(2) };
        Ok(with_detail(dim_residual(fx.len(), want).max(proj), format!("dimension {}", fx.len())))
    });
    rn.run("h07.kahler_holonomy", (!at_t0).then_some("only at t = t0").or((!j1).then_some("J2 is not Kaehler")), || {
        let u = repthy::unitary_algebra(2 * n + 1);
        let h = in_frame()?;
        Ok(with_detail(u.containment_residual(&h), format!("dimension {}", h.len())))
    });
}

fn submersion_checks(
    rn: &mut Runner,
    sc: &Scenario,
    z: &Twistor,
    conn: Option<(&CanonicalTorsionPackage, &Curvatures, bool)>,
) {
    if !rn.any_in(Submersion) {
        return;
    }
    let sub = &z.sub;
    let split = &z.split;
    let lc = homog::levi_civita(&sub.total);
    let r_base = sc.base.curvature();
    rn.run("s01.oneill", None, || {
        let r = connect::curvature_of(&sub.total, &lc);
        let a = twistor::oneill_a(sub, &lc);
        Ok(twistor::oneill_curvature(sub, &r, &a).max_abs_diff(&r_base).into())
    });
    let (pk, curv, at_t1) = match conn {
        Some((p, c, t)) => (Some(p), Some(c), t),
        None => (None, None, false),
    };
    let gate = if pk.is_none() {
        Some("canonical connection unavailable")
    } else if !at_t1 {
        Some("only at t = t1")
    } else {
        None
    };
    rn.run("s02.lemma1", gate, || {
        let pk = pk.expect("gated");
        let l = twistor::lemma1_checks(sub, &pk.lc, &pk.conn_a, &pk.ta);
        let worst = l.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("non-empty");
        Ok(with_detail(worst.value, format!("worst: {}", worst.name)))
    });
    rn.run("s03.a_tensor", gate, || {
        let pk = pk.expect("gated");
        let a = twistor::oneill_a(sub, &lc);
        let tv = pk.ta.pull_slot(2, split.g.ginv());
        let (hd, d) = (sub.hdim(), split.dim());
        let mut w: f64 = 0.0;
        for k in hd..d {
            for x in 0..hd {
                for y in 0..hd {
                    w = w.max((a.at(&[k, x, y]) + 0.5 * tv.at(&[x, y, k])).abs());
                }
            }
        }
        Ok(w.into())
    });
    rn.run("s04.projectable_metric", None, || {
        Ok(twistor::projectability_check(&RTensor::from_matrix(&split.g_h()), sub, &split.h_proj).into())
    });
    rn.run("s05.quaternionic_span", None, || {
        let (am, res) = twistor::quaternionic_rotation(sub, split);
        let fmt = |m: &DMatrix<f64>| {
            let rows: Vec<String> =
                m.row_iter().map(|r| r.iter().map(|v| format!("{:.6}", if v.abs() < 5e-7 { 0.0 } else { *v })).collect::<Vec<_>>().join(" ")).collect();
            format!("[{}]", rows.join("; "))
        };
        Ok(with_detail(res, format!("A(U1) = {}, A(U2) = {}", fmt(&am[0]), fmt(&am[1]))))
    });
    rn.run("s06.base_reconstruction", gate, || {
        let (pk, curv) = (pk.expect("gated"), curv.expect("gated"));
        Ok(twistor::project_curvature(sub, &curv.ra, &pk.ta)?.max_abs_diff(&r_base).into())
    });
    rn.run("s07.j_not_projectable", None, || {
        Ok(twistor::projectability_check(&RTensor::from_endo(split.j.j()), sub, &split.h_proj).into())
    });
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-r..r)).collect()
}

fn oracle_checks(rn: &mut Runner, sc: &Scenario, rng: &mut ChaCha8Rng) {
    let h = oracle::DEFAULT_STEP;
    let s4 = oracle::s4_stereographic();
    let p4 = random_point(rng, 4, 0.5);
    rn.run("o01.s4_christoffel", None, || {
        Ok(oracle::fd_christoffel(&s4, &p4, h)?.max_abs_diff(&oracle::s4_christoffel_closed(&p4)).into())
    });
    rn.run("o02.s4_curvature", None, || {
        let b = build_base(BaseModel::S4, 1, 1.0)?;
        let want = oracle::curvature_invariants(&b.curvature(), b.space.g())?;
        let got = oracle::curvature_invariants(&oracle::fd_curvature(&s4, &p4, h)?, &s4.metric(&p4))?;
        Ok(got.max_diff(&want).into())
    });
    rn.run("o03.cp1_curvature", None, || {
        let f1 = oracle::fubini_study(1);
        let p = random_point(rng, 2, 0.5);
        let r = oracle::fd_curvature(&f1, &p, h)?;
        let g = f1.metric(&p);
        let k = r.at(&[0, 1, 1, 0]) / (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(0, 1)]);
        Ok(with_detail((k - 4.0).abs() / 4.0, format!("Gaussian curvature {k}")))
    });
    rn.run("o04.cp2_curvature", None, || {
        let f2 = oracle::fubini_study(2);
        let p = random_point(rng, 4, 0.4);
        let b = build_base(BaseModel::Cp2, 1, 1.0)?;
        let want = oracle::curvature_invariants(&b.curvature(), b.space.g())?;
        let got = oracle::curvature_invariants(&oracle::fd_curvature(&f2, &p, h)?, &f2.metric(&p))?;
        Ok(got.max_diff(&want).into())
    });
    // The chart lives over S^4 of curvature 4 (the n = 1 quaternionic
    // projective line); t is transported as the ratio t/t1.
    let ratio = sc.t / sc.t1;
    let p6 = random_point(rng, 6, 0.25);
    let cp3 = || -> Result<(Twistor, f64)> {
        let hp = build_base(BaseModel::Hpn, 1, 1.0)?;
        let (_, t1) = twistor::t0_t1(hp.scalar_curvature(), 1);
        let t = ratio * t1;
        Ok((twistor::build_twistor(&hp, t, rn.cfg.structure)?, t))
    };
    let cp3 = cp3();
    let j1 = rn.cfg.structure == Structure::J1;
    let jf: &dyn Fn(&[f64]) -> DMatrix<f64> = if j1 { &oracle::chart_j1 } else { &oracle::chart_j2 };
    rn.run("o05.cp3_curvature", None, || {
        let (z, t) = cp3.as_ref().map_err(|e| Error::Structural(e.to_string()))?;
        let chart = oracle::cp3_twistor(*t);
        let want = oracle::curvature_invariants(&connect::curvature_of(&z.sub.total, &homog::levi_civita(&z.sub.total)), z.sub.total.g())?;
        let got = oracle::curvature_invariants(&oracle::fd_curvature(&chart, &p6, h)?, &chart.metric(&p6))?;
        Ok(with_detail(got.max_diff(&want), format!("Ricci eigenvalues {:?}", got.ricci)))
    });
    let norms = |which: &str| -> Result<Outcome> {
        let (z, t) = cp3.as_ref().map_err(|e| Error::Structural(e.to_string()))?;
        let chart = oracle::cp3_twistor(*t);
        let gc = chart.metric(&p6);
        let tot = &z.sub.total;
        let (fd, hom) = if which == "d" {
            let om = connect::kahler_form(&z.split.g, &z.split.j);
            (oracle::fd_d_omega(&chart, jf, &p6, h)?, homog::exterior_derivative(tot, &om))
        } else {
            (oracle::fd_nijenhuis(&chart, jf, &p6, h)?, connect::nijenhuis(tot, &z.split.j))
        };
        let a = oracle::chart_norm_sq(&fd, &gc)?;
        let b = oracle::chart_norm_sq(&hom, tot.g())?;
        Ok(with_detail((a - b).abs() / b.abs().max(1.0), format!("chart {a}, homogeneous {b}")))
    };
    rn.run("o06.cp3_d_omega", None, || norms("d"));
    rn.run("o07.cp3_nijenhuis", None, || norms("n"));
    rn.run("o08.convergence", None, || {
        let exact = oracle::constant_curvature(&s4.metric(&p4), 1.0);
        let (e1, e2, ratio) = oracle::richardson_ratio(&s4, &p4, 1e-2, &exact)?;
        Ok(with_detail((ratio - 4.0).abs() / 4.0, format!("errors {e1:e} and {e2:e}, ratio {ratio}")))
    });
}
