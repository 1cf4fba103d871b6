//! Exactly solvable force functions manufactured from critical curves
//! dα/dx = f(α) that connect two fixed points.
//!
//! Solving the curve gives the critical solution α(x) directly; inverting
//! the pendulum equation then gives A(x) = (2λ − f(α)) / (2 sin α), whose
//! potential has λ² as an eigenvalue by construction.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcefields::{classify_samples, ForceFunction, ForceProfile, ForceSpec, WELL_HALF_WIDTH};
use crate::interp::QuinticHermite;
use crate::ode::{self, OdeOptions};
use crate::report::sig17;

/// Below this |sin α| the force is evaluated through its l'Hôpital limit.
const REMOVABLE_SIN: f64 = 1e-7;
/// Half-width of the tabulated part of α(x) around the anchor.
const TABLE_SPAN: f64 = 40.0;
const TABLE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum CurveKind {
    /// f(α) = sin(2α − π/2) at λ = 1/√2, from π/4 to 3π/4.
    Kink,
    /// f(α) = 2 sin α − 2λ̄ at λ = λ̄, from arcsin λ̄ to π − arcsin λ̄.
    Sech { lambda_bar: f64 },
    /// f(α) = 2 − 2 sin α / (1 + c sin((α − α₁)/2N)) at λ = 1, from α₁ to
    /// α₁ + 2πN. For N = 1 and c = √2 this is 2√2 sin(α/2 − π/4).
    Ladder { levels: u32, strength: f64 },
    /// f ≡ 0 at λ = 1, a single point at π/2.
    Flat,
    /// f(α) = a sin(π(α − α₁)/(α₂ − α₁)) at an arbitrary λ.
    Arch { amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCurve {
    pub kind: CurveKind,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub start: f64,
    #[serde(serialize_with = "sig17")]
    pub end: f64,
}

impl CriticalCurve {
    pub fn kink() -> Self {
        Self {
            kind: CurveKind::Kink,
            lambda: FRAC_1_SQRT_2,
            start: FRAC_PI_4,
            end: 3.0 * FRAC_PI_4,
        }
    }

    pub fn sech(lambda_bar: f64) -> Result<Self> {
        if !(lambda_bar > 0.0 && lambda_bar < 1.0) {
            return Err(Error::InvalidCurve(format!(
                "sech curve needs 0 < lambda_bar < 1, got {lambda_bar}"
            )));
        }
        let s = lambda_bar.asin();
        Ok(Self {
            kind: CurveKind::Sech { lambda_bar },
            lambda: lambda_bar,
            start: s,
            end: PI - s,
        })
    }

    /// Curve at λ = 1 from 2πN₁ + π/2 to 2πN₂ + π/2; the resulting well has
    /// N₂ − N₁ bound states.
    pub fn ladder(n1: i64, n2: i64, strength: f64) -> Result<Self> {
        if n2 < n1 {
            return Err(Error::InvalidCurve(format!("ladder needs N2 >= N1, got {n1} and {n2}")));
        }
        if n2 == n1 {
            return Ok(Self::flat());
        }
        if !(strength > 0.0) || !strength.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "ladder strength must be positive, got {strength}"
            )));
        }
        let levels = u32::try_from(n2 - n1).map_err(|_| Error::InvalidCurve("too many levels".into()))?;
        let start = TAU * n1 as f64 + FRAC_PI_2;
        Ok(Self {
            kind: CurveKind::Ladder { levels, strength },
            lambda: 1.0,
            start,
            end: start + TAU * levels as f64,
        })
    }

    /// Strength that keeps the endpoint approach rate f′(α₁) = c/N at √2.
    pub fn default_strength(levels: u32) -> f64 {
        SQRT_2 * levels.max(1) as f64
    }

    pub fn flat() -> Self {
        Self {
            kind: CurveKind::Flat,
            lambda: 1.0,
            start: FRAC_PI_2,
            end: FRAC_PI_2,
        }
    }

    pub fn arch(lambda: f64, start: f64, end: f64, amplitude: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && lambda.is_finite()) || start == end {
            return Err(Error::InvalidCurve(format!(
                "arch needs distinct finite endpoints, got {start} and {end}"
            )));
        }
        if amplitude == 0.0 || (amplitude > 0.0) != (end > start) {
            return Err(Error::InvalidCurve(
                "arch amplitude must point from start to end".into(),
            ));
        }
        Ok(Self {
            kind: CurveKind::Arch { amplitude },
            lambda,
            start,
            end,
        })
    }

    /// Curve ids: `kink`, `sech` (lambda_bar), `ladder` (levels, strength,
    /// n1), `flat`, `arch` (lambda, start, end, amplitude).
    pub fn from_spec(spec: &ForceSpec) -> Result<Self> {
        let num = |key: &str, default: f64| -> Result<f64> { Ok(spec.number(key)?.unwrap_or(default)) };
        let int = |key: &str, default: i64| -> Result<i64> {
            let v = num(key, default as f64)?;
            if v.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("`{key}` must be an integer, got {v}")));
            }
            Ok(v as i64)
        };
        match spec.id.as_str() {
            "kink" => Ok(Self::kink()),
            "sech" => Self::sech(num("lambda_bar", 0.8)?),
            "ladder" => {
                let n1 = int("n1", 0)?;
                let levels = int("levels", 1)?;
                if levels < 0 {
                    return Err(Error::InvalidCurve(format!("levels must be >= 0, got {levels}")));
                }
                let strength = num("strength", Self::default_strength(levels as u32))?;
                Self::ladder(n1, n1 + levels, strength)
            }
            "flat" => Ok(Self::flat()),
            "arch" => Self::arch(
                num("lambda", 0.5)?,
                num("start", FRAC_PI_4)?,
                num("end", 3.0 * FRAC_PI_4)?,
                num("amplitude", 1.0)?,
            ),
            other => Err(Error::UnknownCatalog(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            CurveKind::Kink => "kink",
            CurveKind::Sech { .. } => "sech",
            CurveKind::Ladder { .. } => "ladder",
            CurveKind::Flat => "flat",
            CurveKind::Arch { .. } => "arch",
        }
    }

    /// Number of bound states the manufactured well is designed to have.
    pub fn design_levels(&self) -> usize {
        match self.kind {
            CurveKind::Ladder { levels, .. } => levels as usize,
            CurveKind::Flat => 0,
            _ => 1,
        }
    }

    fn ladder_force(&self, alpha: f64, levels: u32, strength: f64) -> (f64, f64) {
        let m = 2.0 * levels as f64;
        let (s, c) = ((alpha - self.start) / m).sin_cos();
        let a = 1.0 / (1.0 + strength * s);
        (a, -a * a * strength * c / m)
    }

    /// dα/dx on the curve.
    pub fn f(&self, alpha: f64) -> f64 {
        match self.kind {
            CurveKind::Kink => (2.0 * alpha - FRAC_PI_2).sin(),
            CurveKind::Sech { lambda_bar } => 2.0 * alpha.sin() - 2.0 * lambda_bar,
            CurveKind::Ladder { levels, strength } => {
                2.0 - 2.0 * alpha.sin() * self.ladder_force(alpha, levels, strength).0
            }
            CurveKind::Flat => 0.0,
            CurveKind::Arch { amplitude } => amplitude * (PI * (alpha - self.start) / (self.end - self.start)).sin(),
        }
    }

    /// df/dα.
    pub fn df(&self, alpha: f64) -> f64 {
        match self.kind {
            CurveKind::Kink => 2.0 * (2.0 * alpha - FRAC_PI_2).cos(),
            CurveKind::Sech { .. } => 2.0 * alpha.cos(),
            CurveKind::Ladder { levels, strength } => {
                let (a, da) = self.ladder_force(alpha, levels, strength);
                let (s, c) = alpha.sin_cos();
                -2.0 * c * a - 2.0 * s * da
            }
            CurveKind::Flat => 0.0,
            CurveKind::Arch { amplitude } => {
                let k = PI / (self.end - self.start);
                amplitude * k * (k * (alpha - self.start)).cos()
            }
        }
    }

    fn d2f(&self, alpha: f64) -> f64 {
        let e = 1e-5;
        (self.df(alpha + e) - self.df(alpha - e)) / (2.0 * e)
    }

    /// Checks that f vanishes at both endpoints and keeps one sign in between.
    pub fn validate(&self) -> Result<()> {
        for a in [self.start, self.end] {
            if self.f(a).abs() > 1e-12 {
                return Err(Error::InvalidCurve(format!("f({a}) = {} is not zero", self.f(a))));
            }
        }
        if self.start == self.end {
            return Ok(());
        }
        let dir = (self.end - self.start).signum();
        let n = 2000;
        for i in 1..n {
            let a = self.start + (self.end - self.start) * i as f64 / n as f64;
            if self.f(a) * dir <= 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "f({a}) = {} does not point from start to end",
                    self.f(a)
                )));
            }
        }
        Ok(())
    }

    /// A as a function of α, with dA/dα.
    pub fn force_of_angle(&self, alpha: f64) -> Result<(f64, f64)> {
        if let CurveKind::Ladder { levels, strength } = self.kind {
            return Ok(self.ladder_force(alpha, levels, strength));
        }
        let numer = 2.0 * self.lambda - self.f(alpha);
        let (s, c) = alpha.sin_cos();
        if s.abs() < REMOVABLE_SIN {
            if numer.abs() > 1e-9 {
                return Err(Error::SingularConstruction { alpha });
            }
            return Ok((-self.df(alpha) / (2.0 * c), -self.d2f(alpha) / (4.0 * c)));
        }
        let g = numer / (2.0 * s);
        let dg = (-self.df(alpha) * s - numer * c) / (2.0 * s * s);
        Ok((g, dg))
    }

    /// Rejects curves that cross a multiple of π where 2λ − f ≠ 0.
    fn check_removable(&self) -> Result<()> {
        if matches!(self.kind, CurveKind::Ladder { .. }) {
            return Ok(());
        }
        let (lo, hi) = (self.start.min(self.end), self.start.max(self.end));
        let mut m = (lo / PI).ceil();
        while m * PI <= hi {
            let alpha = m * PI;
            if (2.0 * self.lambda - self.f(alpha)).abs() > 1e-9 {
                return Err(Error::SingularConstruction { alpha });
            }
            m += 1.0;
        }
        Ok(())
    }
}

/// α(x) for a critical curve, anchored at the midpoint of its endpoints.
#[derive(Debug, Clone)]
pub struct CurveSolution {
    pub curve: CriticalCurve,
    pub anchor: f64,
    table: QuinticHermite,
}

/// Integrates dα/dx = f(α) both ways from α(x0) = (α₁ + α₂)/2 and tabulates
/// the result; outside the table α follows the endpoint linearization.
pub fn solve_curve(curve: &CriticalCurve, x0: f64) -> Result<CurveSolution> {
    curve.validate()?;
    let mid = 0.5 * (curve.start + curve.end);
    let n = (TABLE_SPAN / TABLE_STEP).round() as usize;
    let opts = OdeOptions {
        atol: 1e-13,
        rtol: 1e-12,
        max_step: 0.05,
        ..OdeOptions::default()
    };
    let rhs = |_: f64, y: &[f64; 1]| [curve.f(y[0])];
    let forward: Vec<f64> = (1..=n).map(|i| x0 + i as f64 * TABLE_STEP).collect();
    let backward: Vec<f64> = (1..=n).map(|i| x0 - i as f64 * TABLE_STEP).collect();
    let (ahead, _) = ode::solve_sampled(rhs, x0, [mid], x0 + TABLE_SPAN, &forward, &opts)?;
    let (behind, _) = ode::solve_sampled(rhs, x0, [mid], x0 - TABLE_SPAN, &backward, &opts)?;

    let (lo, hi) = (curve.start.min(curve.end), curve.start.max(curve.end));
    let alpha: Vec<f64> = behind
        .iter()
        .rev()
        .map(|s| s[0])
        .chain(std::iter::once(mid))
        .chain(ahead.iter().map(|s| s[0]))
        .map(|a| a.clamp(lo, hi))
        .collect();
    let dy: Vec<f64> = alpha.iter().map(|&a| curve.f(a)).collect();
    let d2y: Vec<f64> = alpha.iter().map(|&a| curve.df(a) * curve.f(a)).collect();
    Ok(CurveSolution {
        curve: *curve,
        anchor: x0,
        table: QuinticHermite::new(x0 - TABLE_SPAN, TABLE_STEP, alpha, dy, d2y),
    })
}

impl CurveSolution {
    pub fn alpha(&self, x: f64) -> f64 {
        let (start, end) = (self.table.start(), self.table.end());
        if x >= start && x <= end {
            return self.table.eval(x);
        }
        let (edge, from, value) = if x < start {
            (self.curve.start, start, self.table.first())
        } else {
            (self.curve.end, end, self.table.last())
        };
        let delta = value - edge;
        if delta == 0.0 {
            return edge;
        }
        let rate = self.curve.df(edge);
        if rate.abs() > 1e-12 {
            edge + delta * (rate * (x - from)).exp()
        } else {
            // double zero: δ′ = ½ f″ δ²
            edge + delta / (1.0 - 0.5 * self.curve.d2f(edge) * delta * (x - from))
        }
    }
}

/// The force function manufactured from a solved curve.
#[derive(Debug, Clone)]
pub struct CurveProfile {
    solution: CurveSolution,
}

impl ForceProfile for CurveProfile {
    fn value(&self, x: f64) -> f64 {
        let alpha = self.solution.alpha(x);
        self.solution
            .curve
            .force_of_angle(alpha)
            .map(|(g, _)| g)
            .unwrap_or(f64::NAN)
    }

    fn slope(&self, x: f64) -> f64 {
        let alpha = self.solution.alpha(x);
        let curve = &self.solution.curve;
        curve
            .force_of_angle(alpha)
            .map(|(_, dg)| dg * curve.f(alpha))
            .unwrap_or(f64::NAN)
    }

    fn label(&self) -> String {
        let c = &self.solution.curve;
        match c.kind {
            CurveKind::Sech { lambda_bar } => format!("constructed(sech, lambda_bar={lambda_bar})"),
            CurveKind::Ladder { levels, strength } => {
                format!("constructed(ladder, levels={levels}, strength={strength})")
            }
            CurveKind::Arch { amplitude } => format!(
                "constructed(arch, lambda={}, start={}, end={}, amplitude={amplitude})",
                c.lambda, c.start, c.end
            ),
            _ => format!("constructed({})", c.id()),
        }
    }
}

/// A(x) = (2λ − f(α(x))) / (2 sin α(x)), classified on [−20, 20].
pub fn force_from_curve(solution: &CurveSolution) -> Result<ForceFunction> {
    solution.curve.check_removable()?;
    let profile = CurveProfile {
        solution: solution.clone(),
    };
    let n = 4001;
    let samples: Vec<f64> = (0..n)
        .map(|i| profile.value(-WELL_HALF_WIDTH + 2.0 * WELL_HALF_WIDTH * i as f64 / (n - 1) as f64))
        .collect();
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        let x = -WELL_HALF_WIDTH + 2.0 * WELL_HALF_WIDTH * bad as f64 / (n - 1) as f64;
        return Err(Error::SingularConstruction {
            alpha: solution.alpha(x),
        });
    }
    let boundary = classify_samples(&samples);
    Ok(ForceFunction::constructed(Arc::new(profile), boundary))
}

/// Solves the curve anchored at x = 0 and builds its force function.
pub fn construct(curve: &CriticalCurve) -> Result<ForceFunction> {
    force_from_curve(&solve_curve(curve, 0.0)?)
}

/// Well with exactly N₂ − N₁ bound states, from the ladder curve.
pub fn predetermined_spectrum(n1: i64, n2: i64, strength: Option<f64>) -> Result<ForceFunction> {
    let levels = u32::try_from(n2 - n1).map_err(|_| Error::InvalidCurve(format!("N2 < N1: {n2} < {n1}")))?;
    let strength = strength.unwrap_or_else(|| CriticalCurve::default_strength(levels));
    construct(&CriticalCurve::ladder(n1, n2, strength)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefields::{BoundaryClass, PotentialPair};
    use crate::pendulum::IntegrationOptions;
    use crate::spectrum::count_bound_states;

    #[test]
    fn curves_vanish_at_their_endpoints() {
        for curve in [
            CriticalCurve::kink(),
            CriticalCurve::sech(1.0 / SQRT_2).unwrap(),
            CriticalCurve::ladder(0, 1, SQRT_2).unwrap(),
            CriticalCurve::ladder(0, 3, 3.0).unwrap(),
            CriticalCurve::flat(),
        ] {
            curve.validate().unwrap();
        }
        // f(π/2) = 2 − √2 on the sech curve at 1/√2
        let sech = CriticalCurve::sech(1.0 / SQRT_2).unwrap();
        assert!((sech.f(FRAC_PI_2) - (2.0 - SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn single_level_ladder_is_the_half_angle_sine() {
        let curve = CriticalCurve::ladder(0, 1, SQRT_2).unwrap();
        for i in 0..50 {
            let a = FRAC_PI_2 + TAU * i as f64 / 49.0;
            let expected = 2.0 * SQRT_2 * (a / 2.0 - FRAC_PI_4).sin();
            assert!((curve.f(a) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn kink_curve_solution_is_the_arctan_phase() {
        let sol = solve_curve(&CriticalCurve::kink(), 0.0).unwrap();
        for i in 0..=160 {
            let x = -8.0 + 0.1 * i as f64;
            let exact = 0.5 * (PI + (2.0 * x).sinh().atan());
            assert!((sol.alpha(x) - exact).abs() < 1e-10, "x={x}");
        }
        assert!((sol.alpha(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((sol.alpha(60.0) - 3.0 * FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn kink_construction_matches_closed_form() {
        let built = construct(&CriticalCurve::kink()).unwrap();
        let closed = ForceFunction::kink_well();
        assert_eq!(built.boundary_class(), BoundaryClass::WellShaped);
        assert!((built.value(0.0) - (SQRT_2 - 1.0) / 2.0).abs() < 1e-12);
        for i in 0..=400 {
            let x = -20.0 + 0.1 * i as f64;
            assert!((built.value(x) - closed.value(x)).abs() < 1e-9, "A at x={x}");
            assert!((built.slope(x) - closed.slope(x)).abs() < 1e-8, "A' at x={x}");
        }
    }

    #[test]
    fn ladder_construction_matches_closed_form() {
        let built = construct(&CriticalCurve::ladder(0, 1, SQRT_2).unwrap()).unwrap();
        let closed = ForceFunction::ladder_well();
        let v = PotentialPair::new(&built).v;
        assert!((v.eval(0.0) - 2.0 / (6.0 + 4.0 * SQRT_2)).abs() < 1e-10);
        for i in 0..=400 {
            let x = -20.0 + 0.1 * i as f64;
            assert!((built.value(x) - closed.value(x)).abs() < 1e-9, "x={x}");
            assert!((built.slope(x) - closed.slope(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn sech_construction_is_a_translated_sech_well() {
        let lambda_bar: f64 = 0.5;
        let k: f64 = (1.0 - lambda_bar * lambda_bar).sqrt();
        let v = PotentialPair::new(&construct(&CriticalCurve::sech(lambda_bar).unwrap()).unwrap()).v;
        // locate the bottom of the well by golden-section search
        let (mut a, mut b) = (-5.0, 5.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if v.eval(c) < v.eval(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let centre = 0.5 * (a + b);
        for i in 0..=200 {
            let x = -10.0 + 0.1 * i as f64;
            let exact = 1.0 - 2.0 * k * k / (k * x).cosh().powi(2);
            assert!((v.eval(x + centre) - exact).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn flat_curve_gives_unit_force() {
        let built = construct(&CriticalCurve::flat()).unwrap();
        assert_eq!(built.boundary_class(), BoundaryClass::WellShaped);
        for x in [-30.0, -1.0, 0.0, 2.5, 41.0] {
            assert!((built.value(x) - 1.0).abs() < 1e-15);
            assert!(built.slope(x).abs() < 1e-15);
        }
    }

    #[test]
    fn ladders_have_the_designed_number_of_bound_states() {
        for levels in 0..=3 {
            let force = predetermined_spectrum(0, levels, None).unwrap();
            assert_eq!(force.boundary_class(), BoundaryClass::WellShaped, "levels={levels}");
            let opts = IntegrationOptions::for_force(&force);
            assert_eq!(count_bound_states(&force, &opts).unwrap(), levels as usize);
        }
    }

    #[test]
    fn crossing_a_multiple_of_pi_is_singular() {
        let curve = CriticalCurve::arch(0.5, 0.5, 3.5, 1.0).unwrap();
        assert!(matches!(construct(&curve), Err(Error::SingularConstruction { .. })));
    }

    #[test]
    fn invalid_curves_are_rejected() {
        assert!(CriticalCurve::sech(1.0).is_err());
        assert!(CriticalCurve::ladder(2, 1, 1.0).is_err());
        assert!(CriticalCurve::ladder(0, 1, -1.0).is_err());
        assert!(CriticalCurve::arch(0.5, 1.0, 2.0, -1.0).is_err());
        let bad = CriticalCurve {
            kind: CurveKind::Kink,
            lambda: FRAC_1_SQRT_2,
            start: 0.0,
            end: 3.0 * FRAC_PI_4,
        };
        assert!(matches!(solve_curve(&bad, 0.0), Err(Error::InvalidCurve(_))));
        let spec = ForceSpec::new("ladder").with("levels", 2).with("strength", "x");
        assert!(CriticalCurve::from_spec(&spec).is_err());
        assert!(CriticalCurve::from_spec(&ForceSpec::new("spiral")).is_err());
    }
}
