//! The angle equation dα/dx = 2λ − 2A(x) sin α and the magnitude equation
//! d(log ρ)/dx = 2A(x) cos α, integrated across a truncated domain [−L, L].
//!
//! α is never reduced modulo 2π; the winding number is a plain difference
//! of endpoint angles.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcefields::{BoundaryClass, ForceFunction};
use crate::ode::{self, OdeOptions};

/// Distance (radians) within which a terminal angle counts as having
/// reached a fixed point or a multiple of π.
pub const CLASS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoints {
    pub stable: f64,
    pub unstable: f64,
    pub branch: i64,
}

/// Fixed points of dα/dx = 2λ − 2 sin α on branch `branch`.
pub fn fixed_points(lambda: f64, branch: i64) -> Result<FixedPoints> {
    if lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    if !(lambda <= 1.0) {
        return Err(Error::NoFixedPoints(lambda));
    }
    let shift = lambda.asin();
    let n = branch as f64;
    Ok(FixedPoints {
        stable: 2.0 * n * PI + shift,
        unstable: (2.0 * n + 1.0) * PI - shift,
        branch,
    })
}

/// Maps λ to |λ|; `flip` tells the caller to negate the resulting angles.
pub fn symmetry_reduce(lambda: f64) -> (f64, bool) {
    if lambda < 0.0 {
        (-lambda, true)
    } else {
        (lambda, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    /// Near the stable fixed point 2Nπ + arcsin λ.
    AtStable(i64),
    /// Near the unstable fixed point (2N+1)π − arcsin λ.
    AtUnstable(i64),
    /// Near 2nπ (attractor of a divergent force function).
    AtEvenPi(i64),
    /// Near (2n+1)π (repulser of a divergent force function).
    AtOddPi(i64),
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerminalClass {
    pub kind: Terminal,
    /// α(L).
    pub angle: f64,
    /// Distance from `angle` to the nearest classification target.
    pub distance: f64,
}

/// Classifies the terminal angle reached at x = L.
pub fn classify(boundary: BoundaryClass, lambda: f64, angle: f64, class_tol: f64) -> TerminalClass {
    let (lambda, flip) = symmetry_reduce(lambda);
    let a = if flip { -angle } else { angle };
    let nearest = |offset: f64| {
        let n = ((a - offset) / TAU).round();
        (n as i64, (a - offset - n * TAU).abs())
    };
    let (kind, distance) = match boundary {
        BoundaryClass::WellShaped if lambda <= 1.0 => {
            let shift = lambda.asin();
            let (ns, ds) = nearest(shift);
            let (nu, du) = nearest(PI - shift);
            if ds <= du {
                (Terminal::AtStable(ns), ds)
            } else {
                (Terminal::AtUnstable(nu), du)
            }
        }
        BoundaryClass::Divergent => {
            let (ne, de) = nearest(0.0);
            let (no, d_odd) = nearest(PI);
            if de <= d_odd {
                (Terminal::AtEvenPi(ne), de)
            } else {
                (Terminal::AtOddPi(no), d_odd)
            }
        }
        _ => (Terminal::Unresolved, f64::INFINITY),
    };
    let kind = if distance <= class_tol {
        kind
    } else {
        Terminal::Unresolved
    };
    TerminalClass { kind, angle, distance }
}

/// Offsets of the divergent-force targets at finite x: the attractor sits at
/// 2nπ + asin(λ/A) plus the lag of a trajectory relaxing towards a moving
/// fixed point, the repulser at (2n+1)π − asin(λ/A). Both vanish as A → ∞.
pub fn divergent_shifts(force: &ForceFunction, lambda: f64, x: f64) -> (f64, f64) {
    let a = force.value(x);
    let r = (lambda / a).clamp(-1.0, 1.0);
    let s = r.asin();
    let c2 = 1.0 - r * r;
    let lag = if c2 > 1e-6 {
        lambda * force.slope(x) / (2.0 * a.powi(3) * c2)
    } else {
        0.0
    };
    (s + lag, s)
}

/// As [`classify`], but for divergent force functions the targets are the
/// finite-x fixed points from [`divergent_shifts`].
pub fn classify_at(force: &ForceFunction, lambda: f64, x: f64, angle: f64, class_tol: f64) -> TerminalClass {
    let boundary = force.boundary_class();
    if boundary != BoundaryClass::Divergent {
        return classify(boundary, lambda, angle, class_tol);
    }
    let (attract, repel) = divergent_shifts(force, lambda, x);
    let nearest = |offset: f64| {
        let n = ((angle - offset) / TAU).round();
        (n as i64, (angle - offset - n * TAU).abs())
    };
    let (ne, de) = nearest(attract);
    let (no, d_odd) = nearest(PI - repel);
    let (kind, distance) = if de <= d_odd {
        (Terminal::AtEvenPi(ne), de)
    } else {
        (Terminal::AtOddPi(no), d_odd)
    };
    let kind = if distance <= class_tol {
        kind
    } else {
        Terminal::Unresolved
    };
    TerminalClass { kind, angle, distance }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub half_width: f64,
    /// Absolute and relative local error tolerance per step.
    pub tol: f64,
    pub class_tol: f64,
}

impl IntegrationOptions {
    pub fn for_force(force: &ForceFunction) -> Self {
        Self {
            half_width: force.default_half_width(),
            tol: 1e-10,
            class_tol: CLASS_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half-width must be positive, got {}",
                self.half_width
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.class_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "classification tolerance must be positive, got {}",
                self.class_tol
            )));
        }
        Ok(())
    }

    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            atol: self.tol,
            rtol: self.tol,
            max_step: (self.half_width / 20.0).clamp(0.05, 0.5),
            ..OdeOptions::default()
        }
    }
}

/// Endpoint-only result of one shot across the domain.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    pub lambda: f64,
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub log_rho_end: f64,
    pub terminal: TerminalClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct PendulumTrajectory {
    pub lambda: f64,
    pub xs: Vec<f64>,
    pub alpha: Vec<f64>,
    pub log_rho: Vec<f64>,
    pub terminal: TerminalClass,
}

impl PendulumTrajectory {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::report::write_columns(out, &["x", "alpha", "log_rho"], &[&self.xs, &self.alpha, &self.log_rho])
    }
}

fn rhs<'a>(force: &'a ForceFunction, lambda: f64) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] + 'a {
    move |x, y| {
        let a = force.value(x);
        let (s, c) = y[0].sin_cos();
        [2.0 * lambda - 2.0 * a * s, 2.0 * a * c]
    }
}

/// Integrates across [−L, L] and keeps only the endpoint. Any real λ is
/// accepted; classification uses the symmetry reduction for λ < 0.
pub fn shoot(force: &ForceFunction, lambda: f64, alpha0: f64, opts: &IntegrationOptions) -> Result<Shot> {
    opts.validate()?;
    let l = opts.half_width;
    let (end, _) = ode::solve(rhs(force, lambda), -l, [alpha0, 0.0], l, &opts.ode(), |_| {})?;
    Ok(Shot {
        lambda,
        alpha_start: alpha0,
        alpha_end: end[0],
        log_rho_end: end[1],
        terminal: classify_at(force, lambda, l, end[0], opts.class_tol),
    })
}

/// Integrates across [−L, L] with α(−L) = `alpha0`, log ρ(−L) = 0, and
/// records every accepted step.
pub fn integrate(
    force: &ForceFunction,
    lambda: f64,
    alpha0: f64,
    opts: &IntegrationOptions,
) -> Result<PendulumTrajectory> {
    opts.validate()?;
    let l = opts.half_width;
    let mut xs = vec![-l];
    let mut alpha = vec![alpha0];
    let mut log_rho = vec![0.0];
    ode::solve(rhs(force, lambda), -l, [alpha0, 0.0], l, &opts.ode(), |step| {
        xs.push(step.x1);
        alpha.push(step.y1[0]);
        log_rho.push(step.y1[1]);
    })?;
    let terminal = classify_at(force, lambda, l, *alpha.last().unwrap(), opts.class_tol);
    Ok(PendulumTrajectory {
        lambda,
        xs,
        alpha,
        log_rho,
        terminal,
    })
}

/// As [`integrate`], but reports the solution on `grid` (strictly increasing,
/// inside [−L, L]) through the integrator's continuous extension.
pub fn integrate_on_grid(
    force: &ForceFunction,
    lambda: f64,
    alpha0: f64,
    opts: &IntegrationOptions,
    grid: &[f64],
) -> Result<PendulumTrajectory> {
    opts.validate()?;
    let l = opts.half_width;
    check_grid(grid, l)?;
    let (states, end) = ode::solve_sampled(rhs(force, lambda), -l, [alpha0, 0.0], l, grid, &opts.ode())?;
    Ok(PendulumTrajectory {
        lambda,
        xs: grid.to_vec(),
        alpha: states.iter().map(|s| s[0]).collect(),
        log_rho: states.iter().map(|s| s[1]).collect(),
        terminal: classify_at(force, lambda, l, end[0], opts.class_tol),
    })
}

pub(crate) fn check_grid(grid: &[f64], half_width: f64) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse(grid.len()));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid(i + 1));
    }
    let slack = 1e-12 * half_width;
    if grid[0] < -half_width - slack || grid[grid.len() - 1] > half_width + slack {
        return Err(Error::InvalidParameter(format!(
            "grid [{}, {}] exceeds the domain [-{half_width}, {half_width}]",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    Ok(())
}

/// Uniform grid with `points` samples covering [−L, L].
pub fn uniform_grid(half_width: f64, points: usize) -> Vec<f64> {
    let h = 2.0 * half_width / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                half_width
            } else {
                -half_width + i as f64 * h
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefields::ForceFunction;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn fixed_point_examples() {
        let fp = fixed_points(0.0, 0).unwrap();
        assert_eq!((fp.stable, fp.unstable), (0.0, PI));
        let fp = fixed_points(FRAC_1_SQRT_2, 0).unwrap();
        assert!((fp.stable - FRAC_PI_4).abs() < 1e-15);
        assert!((fp.unstable - 3.0 * FRAC_PI_4).abs() < 1e-15);
        let fp = fixed_points(1.0, 0).unwrap();
        assert_eq!(fp.stable, FRAC_PI_2);
        assert!((fp.unstable - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn fixed_points_reject_out_of_range() {
        assert!(matches!(fixed_points(1.01, 0), Err(Error::NoFixedPoints(_))));
        assert!(matches!(fixed_points(-0.2, 0), Err(Error::NegativeLambda(_))));
    }

    #[test]
    fn symmetry_reduce_examples() {
        assert_eq!(symmetry_reduce(0.5), (0.5, false));
        assert_eq!(symmetry_reduce(-0.5), (0.5, true));
        assert_eq!(symmetry_reduce(0.0), (0.0, false));
    }

    #[test]
    fn pinned_at_stable_point_with_linear_log_rho() {
        let force = ForceFunction::constant();
        let opts = IntegrationOptions::for_force(&force);
        let traj = integrate(&force, FRAC_1_SQRT_2, FRAC_PI_4, &opts).unwrap();
        for ((x, a), lr) in traj.xs.iter().zip(&traj.alpha).zip(&traj.log_rho) {
            assert!((a - FRAC_PI_4).abs() < 1e-14);
            assert!((lr - SQRT_2 * (x + opts.half_width)).abs() < 1e-9 * (1.0 + lr.abs()));
        }
        assert_eq!(traj.terminal.kind, Terminal::AtStable(0));
    }

    #[test]
    fn harmonic_ground_state_is_constant_angle_gaussian_magnitude() {
        // fl(π) is not an exact zero of sin, and for x > 0 the offset grows
        // like exp(x²), so the domain is kept short.
        let force = ForceFunction::linear_harmonic();
        let opts = IntegrationOptions {
            half_width: 4.0,
            ..IntegrationOptions::for_force(&force)
        };
        let grid = uniform_grid(opts.half_width, 161);
        let traj = integrate_on_grid(&force, 0.0, PI, &opts, &grid).unwrap();
        let mid = traj.log_rho[80];
        for i in 0..grid.len() {
            assert!((traj.alpha[i] - PI).abs() < 1e-8);
            let x = grid[i];
            assert!((traj.log_rho[i] - mid + x * x).abs() < 1e-8, "x = {x}");
        }
        assert_eq!(traj.terminal.kind, Terminal::AtOddPi(0));
    }

    #[test]
    fn critical_solution_of_the_sech_well_ends_at_unstable_point() {
        // A shorter domain keeps the amplification of round-off near the
        // repulser well below the classification tolerance.
        let force = ForceFunction::sech_well(FRAC_1_SQRT_2).unwrap();
        let opts = IntegrationOptions {
            half_width: 10.0,
            ..IntegrationOptions::for_force(&force)
        };
        let shot = shoot(&force, FRAC_1_SQRT_2, FRAC_PI_4, &opts).unwrap();
        assert_eq!(shot.terminal.kind, Terminal::AtUnstable(0));
        assert!((shot.alpha_end - 3.0 * FRAC_PI_4).abs() < 1e-4);
    }

    #[test]
    fn stable_point_attracts_and_unstable_point_repels() {
        let force = ForceFunction::sech_well(0.8).unwrap();
        let opts = IntegrationOptions::for_force(&force);
        let lambda = 0.5;
        let fp = fixed_points(lambda, 0).unwrap();
        for eps in [1e-6, -1e-6] {
            let shot = shoot(&force, lambda, fp.stable + eps, &opts).unwrap();
            assert_eq!(shot.terminal.kind, Terminal::AtStable(0));

            let short = IntegrationOptions {
                half_width: 20.0,
                ..opts
            };
            let grid = uniform_grid(short.half_width, 401);
            let traj = integrate_on_grid(&force, lambda, fp.unstable + eps, &short, &grid).unwrap();
            let early = (traj.alpha[10] - fp.unstable).abs();
            assert!(early > 1e-6 * 2.0, "departure from the repulser, eps = {eps}");
        }
    }

    #[test]
    fn stored_trajectory_satisfies_both_equations() {
        let force = ForceFunction::kink_well();
        let opts = IntegrationOptions::for_force(&force);
        let grid = uniform_grid(8.0, 3201);
        let lambda = 0.6;
        let traj = integrate_on_grid(
            &force,
            lambda,
            lambda.asin(),
            &IntegrationOptions {
                half_width: 8.0,
                ..opts
            },
            &grid,
        )
        .unwrap();
        let h = grid[1] - grid[0];
        for i in 1..grid.len() - 1 {
            let x = grid[i];
            let a = force.value(x);
            let da = (traj.alpha[i + 1] - traj.alpha[i - 1]) / (2.0 * h);
            let dl = (traj.log_rho[i + 1] - traj.log_rho[i - 1]) / (2.0 * h);
            assert!((da - (2.0 * lambda - 2.0 * a * traj.alpha[i].sin())).abs() < 1e-4);
            assert!((dl - 2.0 * a * traj.alpha[i].cos()).abs() < 1e-4);
            assert!((traj.alpha[i + 1] - traj.alpha[i]).abs() < PI);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let force = ForceFunction::constant();
        let mut opts = IntegrationOptions::for_force(&force);
        opts.tol = 0.0;
        assert!(shoot(&force, 0.5, 0.5, &opts).is_err());
        opts.tol = 1e-10;
        opts.half_width = -1.0;
        assert!(shoot(&force, 0.5, 0.5, &opts).is_err());
    }

    proptest! {
        #[test]
        fn fixed_point_residual(lambda in 0.0f64..=1.0, branch in -3i64..=3) {
            let fp = fixed_points(lambda, branch).unwrap();
            prop_assert!((lambda - fp.stable.sin()).abs() < 1e-14);
            prop_assert!((lambda - fp.unstable.sin()).abs() < 1e-14);
        }

        #[test]
        fn negated_drive_mirrors_the_trajectory(lambda in 0.05f64..0.99, alpha0 in -3.0f64..3.0) {
            let force = ForceFunction::kink_well();
            let opts = IntegrationOptions { half_width: 10.0, ..IntegrationOptions::for_force(&force) };
            let grid = uniform_grid(10.0, 201);
            let forward = integrate_on_grid(&force, lambda, alpha0, &opts, &grid).unwrap();
            let (reduced, flip) = symmetry_reduce(-lambda);
            prop_assert!(flip && reduced == lambda);
            let mirrored = integrate_on_grid(&force, -lambda, -alpha0, &opts, &grid).unwrap();
            let worst = forward.alpha.iter().zip(&mirrored.alpha).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            prop_assert!(worst < 1e-8);
            prop_assert_eq!(forward.terminal.kind, mirrored.terminal.kind);
        }
    }
}
