//! Force functions A(x) and the partner potentials A² ∓ A′ they generate.
//!
//! A force function is either one of the closed-form catalog entries, a
//! table loaded from CSV, or a profile manufactured by the
//! [`constructor`](crate::constructor) module.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::CubicHermite;

/// Tolerance on |A(±L) − 1| and on A ≤ 1 when classifying a well.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Default half-width for wells that flatten out at infinity.
pub const WELL_HALF_WIDTH: f64 = 20.0;
/// Default half-width for the linear (harmonic) force function.
pub const HARMONIC_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// A ≤ 1 everywhere and A → 1 at both ends.
    WellShaped,
    /// |A| → ∞ at both ends.
    Divergent,
    Other,
}

/// Closed-form catalog entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    /// A ≡ 1.
    Constant,
    /// Generated by the curve dα/dx = 2 sin α − 2λ̄; its potential is the
    /// single-level well 1 − 2(1−λ̄²) sech²(√(1−λ̄²) x).
    SechWell { lambda_bar: f64 },
    /// A = (√2 cosh 2x − 1) / (2 cosh x √cosh 2x), one level at E = 1/2.
    KinkWell,
    /// A = cosh(√2 x) / (cosh(√2 x) + √2), built from a curve joining the
    /// merged fixed points π/2 and 5π/2; one bound level.
    LadderWell,
    /// A = x, giving the shifted harmonic potential x² − 1.
    LinearHarmonic,
}

impl Catalog {
    pub fn id(&self) -> &'static str {
        match self {
            Catalog::Constant => "constant",
            Catalog::SechWell { .. } => "sech_well",
            Catalog::KinkWell => "kink_well",
            Catalog::LadderWell => "ladder_well",
            Catalog::LinearHarmonic => "linear_harmonic",
        }
    }

    fn boundary(&self) -> BoundaryClass {
        match self {
            Catalog::LinearHarmonic => BoundaryClass::Divergent,
            _ => BoundaryClass::WellShaped,
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Catalog::Constant => 1.0,
            Catalog::SechWell { lambda_bar } => {
                let k = (1.0 - lambda_bar * lambda_bar).sqrt();
                let t = (k * x).tanh();
                let sech2 = 1.0 - t * t;
                1.0 - k * k * sech2 / (1.0 + k * t)
            }
            Catalog::KinkWell => {
                // rewritten in u = e^{-2|x|} so it never overflows
                let u = (-2.0 * x.abs()).exp();
                let root = (1.0 + u * u).sqrt();
                (1.0 + u * u - SQRT_2 * u) / ((1.0 + u) * root)
            }
            Catalog::LadderWell => 1.0 / (1.0 + SQRT_2 * sech(SQRT_2 * x)),
            Catalog::LinearHarmonic => x,
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match *self {
            Catalog::Constant => 0.0,
            Catalog::SechWell { lambda_bar } => {
                let k = (1.0 - lambda_bar * lambda_bar).sqrt();
                let t = (k * x).tanh();
                let sech2 = 1.0 - t * t;
                let d = 1.0 + k * t;
                k.powi(3) * sech2 * (2.0 * t * d + k * sech2) / (d * d)
            }
            Catalog::KinkWell => {
                let u = (-2.0 * x.abs()).exp();
                let root = (1.0 + u * u).sqrt();
                let p = 1.0 + u * u - SQRT_2 * u;
                let dp = 2.0 * u - SQRT_2;
                let q = (1.0 + u) * root;
                let dq = (1.0 + u + 2.0 * u * u) / root;
                let da_du = (dp * q - p * dq) / (q * q);
                da_du * (-2.0 * x.signum() * u)
            }
            Catalog::LadderWell => {
                let s = SQRT_2 * x;
                let sh = sech(s);
                let denom = 1.0 + SQRT_2 * sh;
                2.0 * s.tanh() * sh / (denom * denom)
            }
            Catalog::LinearHarmonic => 1.0,
        }
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// A force function backed by some external profile, e.g. one manufactured
/// from a critical curve.
pub trait ForceProfile: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
    fn label(&self) -> String;
}

#[derive(Debug, Clone)]
pub enum ForceKind {
    ClosedForm(Catalog),
    /// Cubic interpolation of (x, A) samples, centered differences for A′.
    Sampled(CubicHermite),
    Constructed(Arc<dyn ForceProfile>),
}

/// The function A(x). Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct ForceFunction {
    kind: ForceKind,
    boundary: BoundaryClass,
}

impl ForceFunction {
    pub fn constant() -> Self {
        Self::closed(Catalog::Constant)
    }

    pub fn sech_well(lambda_bar: f64) -> Result<Self> {
        if !(lambda_bar > 0.0 && lambda_bar < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sech_well needs 0 < lambda_bar < 1, got {lambda_bar}"
            )));
        }
        Ok(Self::closed(Catalog::SechWell { lambda_bar }))
    }

    pub fn kink_well() -> Self {
        Self::closed(Catalog::KinkWell)
    }

    pub fn ladder_well() -> Self {
        Self::closed(Catalog::LadderWell)
    }

    pub fn linear_harmonic() -> Self {
        Self::closed(Catalog::LinearHarmonic)
    }

    fn closed(entry: Catalog) -> Self {
        Self {
            boundary: entry.boundary(),
            kind: ForceKind::ClosedForm(entry),
        }
    }

    /// Builds a tabulated force function. The boundary class is inferred
    /// from the table itself.
    pub fn from_samples(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} grid points but {} values",
                xs.len(),
                values.len()
            )));
        }
        if xs.len() < 3 {
            return Err(Error::GridTooCoarse(xs.len()));
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneGrid(i + 1));
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        let boundary = classify_samples(&values);
        Ok(Self {
            kind: ForceKind::Sampled(CubicHermite::with_centered_slopes(xs, values)),
            boundary,
        })
    }

    /// Two-column CSV (x, A); a non-numeric first row is treated as a header.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::InvalidParameter(format!("row {row} has fewer than 2 columns")));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(x), Ok(a)) => {
                    xs.push(x);
                    values.push(a);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "row {row}: cannot parse `{}`, `{}`",
                        &record[0], &record[1]
                    )))
                }
            }
        }
        Self::from_samples(xs, values)
    }

    pub fn constructed(profile: Arc<dyn ForceProfile>, boundary: BoundaryClass) -> Self {
        Self {
            kind: ForceKind::Constructed(profile),
            boundary,
        }
    }

    /// Resolves a catalog id plus string parameters.
    pub fn from_spec(spec: &ForceSpec) -> Result<Self> {
        match spec.id.as_str() {
            "constant" => Ok(Self::constant()),
            "sech_well" => Self::sech_well(spec.number("lambda_bar")?.unwrap_or(0.8)),
            "kink_well" => Ok(Self::kink_well()),
            "ladder_well" => Ok(Self::ladder_well()),
            "linear_harmonic" => Ok(Self::linear_harmonic()),
            "custom_sampled" => {
                let path = spec
                    .params
                    .get("path")
                    .ok_or_else(|| Error::InvalidParameter("custom_sampled needs param `path`".into()))?;
                Self::from_csv(path)
            }
            other => Err(Error::UnknownCatalog(other.to_string())),
        }
    }

    pub fn kind(&self) -> &ForceKind {
        &self.kind
    }

    pub fn boundary_class(&self) -> BoundaryClass {
        self.boundary
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, ForceKind::ClosedForm(_))
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ForceKind::ClosedForm(Catalog::SechWell { lambda_bar }) => format!("sech_well(lambda_bar={lambda_bar})"),
            ForceKind::ClosedForm(entry) => entry.id().to_string(),
            ForceKind::Sampled(table) => format!("custom_sampled({} points)", table.nodes().len()),
            ForceKind::Constructed(profile) => profile.label(),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            ForceKind::ClosedForm(entry) => entry.value(x),
            ForceKind::Sampled(table) => table.eval(x).0,
            ForceKind::Constructed(profile) => profile.value(x),
        }
    }

    /// dA/dx: analytic for closed forms, derivative of the interpolant
    /// (centered-difference nodal slopes) for tables.
    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        match &self.kind {
            ForceKind::ClosedForm(entry) => entry.slope(x),
            ForceKind::Sampled(table) => table.eval(x).1,
            ForceKind::Constructed(profile) => profile.slope(x),
        }
    }

    /// Truncation half-width used when the caller does not choose one.
    pub fn default_half_width(&self) -> f64 {
        match (&self.kind, self.boundary) {
            (ForceKind::Sampled(t), _) => {
                let xs = t.nodes();
                xs[0].abs().min(xs[xs.len() - 1].abs())
            }
            (_, BoundaryClass::Divergent) => HARMONIC_HALF_WIDTH,
            _ => WELL_HALF_WIDTH,
        }
    }

    /// Checks A ≤ 1 + tol on a uniform grid over [−L, L] and |A(±L) − 1| < tol.
    pub fn check_well_shaped(&self, half_width: f64) -> Result<()> {
        let n = 4001;
        for i in 0..n {
            let x = -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64;
            let a = self.value(x);
            if a > 1.0 + BOUNDARY_TOL {
                return Err(Error::NotWellShaped(format!("A({x}) = {a} exceeds 1")));
            }
        }
        for x in [-half_width, half_width] {
            let a = self.value(x);
            if (a - 1.0).abs() >= BOUNDARY_TOL {
                return Err(Error::NotWellShaped(format!(
                    "A({x}) = {a} is not within {BOUNDARY_TOL:e} of 1"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn classify_samples(values: &[f64]) -> BoundaryClass {
    let n = values.len();
    let (first, last) = (values[0], values[n - 1]);
    if values.iter().all(|&a| a <= 1.0 + BOUNDARY_TOL)
        && (first - 1.0).abs() < BOUNDARY_TOL
        && (last - 1.0).abs() < BOUNDARY_TOL
    {
        return BoundaryClass::WellShaped;
    }
    let interior_max = values[1..n - 1].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if first < -1.0 && last > 1.0 && first.abs() >= interior_max && last.abs() >= interior_max {
        return BoundaryClass::Divergent;
    }
    BoundaryClass::Other
}

/// Catalog id plus string-valued parameters, as written in configs and on
/// the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl ForceSpec {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.params
            .get(key)
            .map(|raw| {
                raw.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("`{key}` = `{raw}` is not a number")))
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partner {
    /// V = A² − A′.
    Minus,
    /// Ṽ = A² + A′.
    Plus,
}

/// One of the two potentials generated by a force function.
#[derive(Debug, Clone)]
pub struct Potential {
    force: ForceFunction,
    partner: Partner,
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        let a = self.force.value(x);
        let da = self.force.slope(x);
        match self.partner {
            Partner::Minus => a * a - da,
            Partner::Plus => a * a + da,
        }
    }

    pub fn partner(&self) -> Partner {
        self.partner
    }

    pub fn force(&self) -> &ForceFunction {
        &self.force
    }

    /// Lower of the two boundary values on [−L, L]: the continuum edge of
    /// a well that flattens out, `None` for divergent force functions.
    pub fn continuum_edge(&self, half_width: f64) -> Option<f64> {
        match self.force.boundary_class() {
            BoundaryClass::Divergent => None,
            _ => Some(self.eval(-half_width).min(self.eval(half_width))),
        }
    }
}

/// x ↦ A(x)² ∓ A′(x).
pub fn riccati_potential(force: &ForceFunction, partner: Partner) -> Potential {
    Potential {
        force: force.clone(),
        partner,
    }
}

#[derive(Debug, Clone)]
pub struct PotentialPair {
    pub v: Potential,
    pub v_tilde: Potential,
}

impl PotentialPair {
    pub fn new(force: &ForceFunction) -> Self {
        Self {
            v: riccati_potential(force, Partner::Minus),
            v_tilde: riccati_potential(force, Partner::Plus),
        }
    }
}
