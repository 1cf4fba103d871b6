//! The Zakharov-Shabat system with a real force function and constant
//! phase, φ(x) = A(x) e^{iS}:
//!
//!   U1′ = −iλ U1 + iφ U2,    U2′ = iλ U2 − iφ* U1.
//!
//! On the bound-state branch |U1| = |U2| = √ρ and θ = arg U1 − arg U2
//! obeys the pendulum equation with α = π/2 − (θ − S).

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcefields::{ForceFunction, Partner};
use crate::ode::{self, OdeOptions};
use crate::pendulum::{self, IntegrationOptions};
use crate::report::{sig17, write_columns};
use crate::spectrum::{self, Level};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZsState {
    pub x: f64,
    pub u1: Complex64,
    pub u2: Complex64,
}

impl ZsState {
    fn pack(&self) -> [f64; 4] {
        [self.u1.re, self.u1.im, self.u2.re, self.u2.im]
    }
}

/// Bound-state seed matching a pendulum start: θ = π/2 − α + S, |U1| = |U2| = 1.
pub fn seed_from_pendulum(x: f64, alpha: f64, phase: f64) -> ZsState {
    let theta = FRAC_PI_2 - alpha + phase;
    ZsState {
        x,
        u1: Complex64::from_polar(1.0, 0.5 * theta),
        u2: Complex64::from_polar(1.0, -0.5 * theta),
    }
}

#[derive(Debug, Clone)]
pub struct ZsTrajectory {
    pub lambda: f64,
    pub phase: f64,
    pub xs: Vec<f64>,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
}

impl ZsTrajectory {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let re1: Vec<f64> = self.u1.iter().map(|u| u.re).collect();
        let im1: Vec<f64> = self.u1.iter().map(|u| u.im).collect();
        let re2: Vec<f64> = self.u2.iter().map(|u| u.re).collect();
        let im2: Vec<f64> = self.u2.iter().map(|u| u.im).collect();
        write_columns(
            out,
            &["x", "u1_re", "u1_im", "u2_re", "u2_im"],
            &[&self.xs, &re1, &im1, &re2, &im2],
        )
    }

    /// Largest ||U1|² − |U2|²| relative to |U1|² + |U2|².
    pub fn modulus_mismatch(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs() / (a.norm_sqr() + b.norm_sqr()))
            .fold(0.0, f64::max)
    }
}

/// Integrates from `init.x` through the increasing `grid`.
pub fn integrate_zs(
    force: &ForceFunction,
    phase: f64,
    lambda: f64,
    init: ZsState,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<ZsTrajectory> {
    if grid.is_empty() {
        return Err(Error::GridTooCoarse(0));
    }
    let e_is = Complex64::from_polar(1.0, phase);
    let rhs = |x: f64, y: &[f64; 4]| {
        let u1 = Complex64::new(y[0], y[1]);
        let u2 = Complex64::new(y[2], y[3]);
        let phi = e_is * force.value(x);
        let d1 = -I * lambda * u1 + I * phi * u2;
        let d2 = I * lambda * u2 - I * phi.conj() * u1;
        [d1.re, d1.im, d2.re, d2.im]
    };
    let x_end = grid[grid.len() - 1];
    let (states, _) = ode::solve_sampled(rhs, init.x, init.pack(), x_end, grid, opts)?;
    Ok(ZsTrajectory {
        lambda,
        phase,
        xs: grid.to_vec(),
        u1: states.iter().map(|s| Complex64::new(s[0], s[1])).collect(),
        u2: states.iter().map(|s| Complex64::new(s[2], s[3])).collect(),
    })
}

/// ψ± = (U1 e^{−iS/2} ± i U2 e^{iS/2}) / √(2λ). ψ− solves the Schrödinger
/// equation with V = A² − A′, ψ+ with Ṽ = A² + A′.
pub fn zs_to_schrodinger(traj: &ZsTrajectory) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if traj.lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let scale = Complex64::from((2.0 * traj.lambda).sqrt());
    let (left, right) = (
        Complex64::from_polar(1.0, -0.5 * traj.phase),
        Complex64::from_polar(1.0, 0.5 * traj.phase),
    );
    let plus = traj
        .u1
        .iter()
        .zip(&traj.u2)
        .map(|(a, b)| (a * left + I * b * right) / scale)
        .collect();
    let minus = traj
        .u1
        .iter()
        .zip(&traj.u2)
        .map(|(a, b)| (a * left - I * b * right) / scale)
        .collect();
    Ok((plus, minus))
}

/// α = π/2 − (θ − S) with θ unwrapped along x, and log ρ = ln |U1|².
pub fn zs_to_pendulum(traj: &ZsTrajectory, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mismatch = traj.modulus_mismatch();
    if mismatch > tol {
        return Err(Error::OffBoundBranch(mismatch));
    }
    let mut alpha = Vec::with_capacity(traj.xs.len());
    let mut prev: Option<f64> = None;
    for (a, b) in traj.u1.iter().zip(&traj.u2) {
        let mut theta = (a * b.conj()).arg();
        if let Some(p) = prev {
            theta += TAU * ((p - theta) / TAU).round();
        }
        prev = Some(theta);
        alpha.push(FRAC_PI_2 - (theta - traj.phase));
    }
    let log_rho = traj.u1.iter().map(|u| u.norm_sqr().ln()).collect();
    Ok((alpha, log_rho))
}

/// V± = |φ|² ± Re(φ′ e^{−iS}), evaluated from φ rather than from A.
pub fn zs_potential(force: &ForceFunction, phase: f64, partner: Partner, x: f64) -> f64 {
    let e_is = Complex64::from_polar(1.0, phase);
    let phi = e_is * force.value(x);
    let dphi = e_is * force.slope(x);
    let cross = (dphi * e_is.conj()).re;
    match partner {
        Partner::Minus => phi.norm_sqr() - cross,
        Partner::Plus => phi.norm_sqr() + cross,
    }
}

/// max |−ψ″ + Vψ − Eψ| / max|ψ| over `range` on a uniform grid, for complex ψ.
pub fn complex_residual(
    xs: &[f64],
    psi: &[Complex64],
    potential: impl Fn(f64) -> f64,
    energy: f64,
    range: Range<usize>,
) -> f64 {
    let re: Vec<f64> = psi.iter().map(|p| p.re).collect();
    let im: Vec<f64> = psi.iter().map(|p| p.im).collect();
    let scale = psi.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let abs_re = spectrum::schrodinger_residual(xs, &re, &potential, energy, range.clone())
        * re.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let abs_im = spectrum::schrodinger_residual(xs, &im, &potential, energy, range)
        * im.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    (abs_re.hypot(abs_im)) / scale
}

#[derive(Debug, Clone, Serialize)]
pub struct ZsCheckReport {
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub phase: f64,
    /// Samples compared: everything before the shot leaves the unstable point.
    #[serde(serialize_with = "sig17")]
    pub x_from: f64,
    #[serde(serialize_with = "sig17")]
    pub x_to: f64,
    #[serde(serialize_with = "sig17")]
    pub max_alpha_deviation: f64,
    #[serde(serialize_with = "sig17")]
    pub residual_plus: f64,
    #[serde(serialize_with = "sig17")]
    pub residual_minus: f64,
    #[serde(serialize_with = "sig17")]
    pub modulus_mismatch: f64,
}

/// Round trip for one level: pendulum shot vs. ZS shot seeded from it, then
/// the Schrödinger residuals of ψ± against V and Ṽ.
pub fn zs_check(
    force: &ForceFunction,
    level: &Level,
    phase: f64,
    grid: &[f64],
    opts: &IntegrationOptions,
) -> Result<ZsCheckReport> {
    let boundary = force.boundary_class();
    let lambda = level.lambda;
    let alpha0 = spectrum::start_angle(boundary, lambda)?;
    let pend = pendulum::integrate_on_grid(force, lambda, alpha0, opts, grid)?;
    let l = opts.half_width;
    let seed = seed_from_pendulum(-l, alpha0, phase);
    let zs = integrate_zs(force, phase, lambda, seed, grid, &opts.ode())?;
    let (alpha, _) = zs_to_pendulum(&zs, 1e-6)?;

    let cut = spectrum::departure_index(&pend.alpha, spectrum::critical_target(boundary, lambda, level.n));
    let max_alpha_deviation = alpha[..=cut]
        .iter()
        .zip(&pend.alpha[..=cut])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let (plus, minus) = zs_to_schrodinger(&zs)?;
    let energy = lambda * lambda;
    let interior = 1..cut;
    let residual_plus = complex_residual(
        grid,
        &plus[..=cut],
        |x| zs_potential(force, phase, Partner::Plus, x),
        energy,
        interior.clone(),
    );
    let residual_minus = complex_residual(
        grid,
        &minus[..=cut],
        |x| zs_potential(force, phase, Partner::Minus, x),
        energy,
        interior,
    );
    Ok(ZsCheckReport {
        n: level.n,
        lambda,
        phase,
        x_from: grid[0],
        x_to: grid[cut],
        max_alpha_deviation,
        residual_plus,
        residual_minus,
        modulus_mismatch: zs.modulus_mismatch(),
    })
}
