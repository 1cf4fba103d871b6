//! Winding numbers, bound-state counting, eigenvalue bisection and
//! eigenfunction reconstruction.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcefields::{BoundaryClass, ForceFunction, PotentialPair};
use crate::ode;
use crate::oracle;
use crate::pendulum::{self, IntegrationOptions, Terminal, TerminalClass};
use crate::report::{sig17, write_columns};

/// From here on a well-shaped force is treated as having merged fixed points.
const MERGED: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindingResult {
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    /// (α(L) − α(−L))/2π. Divergent force functions start on the repulser
    /// at π and count from the finite-L attractor, so W = (α(L) − shift)/2π.
    #[serde(serialize_with = "sig17")]
    pub winding: f64,
    /// Number of eigenvalues strictly below λ.
    pub index: i64,
    pub terminal: TerminalClass,
}

/// Whether α ≡ π is a bounded critical solution at λ = 0, i.e. whether
/// ρ = exp(−2∫A) decays at both ends.
pub fn critical_at_zero(force: &ForceFunction, half_width: f64) -> bool {
    force.boundary_class() == BoundaryClass::Divergent
        && force.value(-half_width) < 0.0
        && force.value(half_width) > 0.0
}

/// α(−L) for winding numbers: the stable fixed point, π/2 once the fixed
/// points merge, or the repulser π for divergent force functions.
pub fn start_angle(boundary: BoundaryClass, lambda: f64) -> Result<f64> {
    match boundary {
        BoundaryClass::WellShaped if lambda >= MERGED => Ok(FRAC_PI_2),
        BoundaryClass::WellShaped => Ok(lambda.asin()),
        BoundaryClass::Divergent => Ok(PI),
        BoundaryClass::Other => Err(Error::NotWellShaped(
            "winding numbers need a well-shaped or divergent force function".into(),
        )),
    }
}

/// Angle a critical solution of level `n` approaches at x = +L.
pub fn critical_target(boundary: BoundaryClass, lambda: f64, n: usize) -> f64 {
    let n = n as f64;
    match boundary {
        BoundaryClass::WellShaped if lambda >= MERGED => FRAC_PI_2 + TAU * n,
        BoundaryClass::WellShaped => PI - lambda.asin() + TAU * n,
        _ => PI * (2.0 * n + 1.0),
    }
}

pub fn winding_number(force: &ForceFunction, lambda: f64, opts: &IntegrationOptions) -> Result<WindingResult> {
    if lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    let boundary = force.boundary_class();
    if lambda == 0.0 && critical_at_zero(force, opts.half_width) {
        // fl(π) is not an exact zero of sin, so integrating would only
        // measure how fast round-off escapes the repulser.
        return Ok(WindingResult {
            lambda,
            winding: 0.5,
            index: 0,
            terminal: TerminalClass {
                kind: Terminal::AtOddPi(0),
                angle: PI,
                distance: 0.0,
            },
        });
    }
    let alpha0 = start_angle(boundary, lambda)?;
    let shot = pendulum::shoot(force, lambda, alpha0, opts)?;
    let end = shot.alpha_end;
    let (winding, index) = match boundary {
        BoundaryClass::WellShaped if lambda >= MERGED => {
            ((end - alpha0) / TAU, ((end - FRAC_PI_2) / TAU - 1e-9).ceil() as i64)
        }
        BoundaryClass::WellShaped => {
            let unstable = PI - lambda.asin();
            ((end - alpha0) / TAU, ((end - unstable) / TAU).floor() as i64 + 1)
        }
        _ => {
            let (attract, _) = pendulum::divergent_shifts(force, lambda, opts.half_width);
            ((end - attract) / TAU, ((end - PI) / TAU).floor() as i64 + 1)
        }
    };
    Ok(WindingResult {
        lambda,
        winding,
        index,
        terminal: shot.terminal,
    })
}

/// Winding numbers for every λ in `lambdas`, computed in parallel and
/// returned in input order.
pub fn winding_scan(force: &ForceFunction, lambdas: &[f64], opts: &IntegrationOptions) -> Result<Vec<WindingResult>> {
    lambdas.par_iter().map(|&l| winding_number(force, l, opts)).collect()
}

pub fn write_winding_csv<W: Write>(out: W, scan: &[WindingResult]) -> Result<()> {
    let lambdas: Vec<f64> = scan.iter().map(|w| w.lambda).collect();
    let windings: Vec<f64> = scan.iter().map(|w| w.winding).collect();
    let index: Vec<f64> = scan.iter().map(|w| w.index as f64).collect();
    write_columns(out, &["lambda", "W", "index"], &[&lambdas, &windings, &index])
}

/// One integration at λ = 1 from α(−L) = π/2.
pub fn count_bound_states(force: &ForceFunction, opts: &IntegrationOptions) -> Result<usize> {
    if force.boundary_class() != BoundaryClass::WellShaped {
        return Err(Error::NotWellShaped(format!(
            "{} has boundary class {:?}",
            force.label(),
            force.boundary_class()
        )));
    }
    Ok(winding_number(force, 1.0, opts)?.index.max(0) as usize)
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub integration: IntegrationOptions,
    pub tol_lambda: f64,
    pub scan_points: usize,
    pub max_bisections: usize,
}

impl SpectrumOptions {
    pub fn for_force(force: &ForceFunction) -> Self {
        Self {
            integration: IntegrationOptions::for_force(force),
            tol_lambda: 1e-10,
            scan_points: 1000,
            max_bisections: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.integration.validate()?;
        if !(self.tol_lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol_lambda must be positive, got {}",
                self.tol_lambda
            )));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidParameter("a scan needs at least 2 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Level {
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub energy: f64,
    #[serde(serialize_with = "sig17")]
    pub bracket_width: f64,
    pub winding_below: i64,
    pub winding_above: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuspectInterval {
    #[serde(serialize_with = "sig17")]
    pub lo: f64,
    #[serde(serialize_with = "sig17")]
    pub hi: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EigenvalueSearch {
    pub levels: Vec<Level>,
    pub suspects: Vec<SuspectInterval>,
}

/// Brackets every jump of the winding index on a coarse scan of `range`,
/// then bisects each level separately on the predicate index(λ) ≥ n + 1.
pub fn find_eigenvalues(force: &ForceFunction, range: (f64, f64), opts: &SpectrumOptions) -> Result<EigenvalueSearch> {
    opts.validate()?;
    let (lo, hi) = range;
    if lo < 0.0 {
        return Err(Error::NegativeLambda(lo));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty lambda range [{lo}, {hi}]")));
    }
    let boundary = force.boundary_class();
    start_angle(boundary, lo)?;
    if boundary == BoundaryClass::WellShaped && hi > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "well-shaped search range must end at or below 1, got {hi}"
        )));
    }

    let points = opts.scan_points;
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let scan: Vec<Result<WindingResult>> = grid
        .par_iter()
        .map(|&l| winding_number(force, l, &opts.integration))
        .collect();

    let mut search = EigenvalueSearch::default();
    let zero_level = lo == 0.0 && critical_at_zero(force, opts.integration.half_width);
    if zero_level {
        search.levels.push(Level {
            n: 0,
            lambda: 0.0,
            energy: 0.0,
            bracket_width: 0.0,
            winding_below: 0,
            winding_above: 1,
        });
    }

    let mut prev: Option<(f64, i64)> = None;
    for (i, result) in scan.into_iter().enumerate() {
        let lambda = grid[i];
        let w = match result {
            Ok(w) => w,
            Err(e) => {
                search.suspects.push(SuspectInterval {
                    lo: grid[i.saturating_sub(1)],
                    hi: grid[(i + 1).min(points - 1)],
                    reason: format!("integration failed: {e}"),
                });
                continue;
            }
        };
        // the level at exactly zero was reported above; continue from its right limit
        let index = if zero_level && lambda == 0.0 { 1 } else { w.index };
        if let Some((prev_lambda, prev_index)) = prev {
            if index < prev_index {
                search.suspects.push(SuspectInterval {
                    lo: prev_lambda,
                    hi: lambda,
                    reason: format!("winding index decreases from {prev_index} to {index}"),
                });
            }
            for k in prev_index..index {
                match bisect_level(force, k, prev_lambda, lambda, opts) {
                    Ok(level) => search.levels.push(level),
                    Err(suspect) => search.suspects.push(suspect),
                }
            }
        }
        prev = Some((lambda, index));
    }
    search.levels.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(search)
}

fn bisect_level(
    force: &ForceFunction,
    k: i64,
    lo: f64,
    hi: f64,
    opts: &SpectrumOptions,
) -> std::result::Result<Level, SuspectInterval> {
    let suspect = |a: f64, b: f64, reason: String| SuspectInterval { lo: a, hi: b, reason };
    let index = |l: f64| winding_number(force, l, &opts.integration).map(|w| w.index);
    let (mut a, mut b) = (lo, hi);
    let mut steps = 0;
    while b - a > opts.tol_lambda {
        if steps == opts.max_bisections {
            return Err(suspect(
                a,
                b,
                format!("level {k} not resolved after {steps} bisections"),
            ));
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        match index(mid) {
            Ok(i) if i > k => b = mid,
            Ok(_) => a = mid,
            Err(e) => return Err(suspect(a, b, format!("integration failed: {e}"))),
        }
        steps += 1;
    }
    let lambda = 0.5 * (a + b);
    let delta = 10.0 * opts.tol_lambda;
    let below = index((lambda - delta).max(lo));
    let above = index((lambda + delta).min(hi));
    let (below, above) = match (below, above) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Err(suspect(a, b, format!("integration failed: {e}"))),
    };
    if above - below != 1 || below != k {
        return Err(suspect(
            a,
            b,
            format!("expected a unit jump from {k}, found {below} -> {above}"),
        ));
    }
    Ok(Level {
        n: k as usize,
        lambda,
        energy: lambda * lambda,
        bracket_width: b - a,
        winding_below: below,
        winding_above: above,
    })
}

/// Normalized eigenfunction on a caller-supplied grid.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub energy: f64,
    pub nodes: usize,
    pub winding_below: i64,
    pub winding_above: i64,
    /// Samples after this index come from the analytic tail, not the shot.
    pub cut: usize,
    #[serde(skip)]
    pub xs: Vec<f64>,
    #[serde(skip)]
    pub psi: Vec<f64>,
}

impl Eigenpair {
    /// Indices where the second difference uses only integrated samples.
    pub fn interior(&self) -> Range<usize> {
        1..self.cut.min(self.xs.len() - 1)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_columns(out, &["x", "psi"], &[&self.xs, &self.psi])
    }
}

/// Integrates at the level's λ, forms ψ = √ρ sin(α/2), and replaces the part
/// of the shot that has left the unstable point by the asymptotic decay
/// d ln ψ/dx = A(x) cos α∞.
pub fn reconstruct_eigenfunction(
    force: &ForceFunction,
    level: &Level,
    grid: &[f64],
    opts: &IntegrationOptions,
) -> Result<Eigenpair> {
    opts.validate()?;
    pendulum::check_grid(grid, opts.half_width)?;
    let boundary = force.boundary_class();
    let lambda = level.lambda;
    let (alpha, log_rho) = if lambda == 0.0 && critical_at_zero(force, opts.half_width) {
        let rhs = |x: f64, _: &[f64; 1]| [-2.0 * force.value(x)];
        let (states, _) = ode::solve_sampled(rhs, -opts.half_width, [0.0], opts.half_width, grid, &opts.ode())?;
        (vec![PI; grid.len()], states.iter().map(|s| s[0]).collect::<Vec<_>>())
    } else {
        let traj = pendulum::integrate_on_grid(force, lambda, start_angle(boundary, lambda)?, opts, grid)?;
        (traj.alpha, traj.log_rho)
    };

    let target = critical_target(boundary, lambda, level.n);
    let cut = departure_index(&alpha, target);

    let peak = log_rho[..=cut].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut psi: Vec<f64> = (0..=cut)
        .map(|i| (0.5 * (log_rho[i] - peak)).exp() * (0.5 * alpha[i]).sin())
        .collect();
    let rate = target.cos();
    let mut log_tail = 0.0;
    let mut prev = force.value(grid[cut]);
    for i in cut + 1..grid.len() {
        let a = force.value(grid[i]);
        log_tail += 0.5 * (prev + a) * rate * (grid[i] - grid[i - 1]);
        prev = a;
        psi.push(psi[cut] * log_tail.exp());
    }

    let norm = trapezoid(grid, &psi.iter().map(|p| p * p).collect::<Vec<_>>()).sqrt();
    let biggest = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let sign = psi
        .iter()
        .find(|p| p.abs() > 1e-6 * biggest)
        .map(|p| p.signum())
        .unwrap_or(1.0);
    psi.iter_mut().for_each(|p| *p *= sign / norm);

    let nodes = oracle::count_sign_changes(&psi);
    if nodes != level.n {
        return Err(Error::NodeMismatch {
            expected: level.n,
            found: nodes,
        });
    }
    Ok(Eigenpair {
        n: level.n,
        lambda,
        energy: lambda * lambda,
        nodes,
        winding_below: level.winding_below,
        winding_above: level.winding_above,
        cut,
        xs: grid.to_vec(),
        psi,
    })
}

/// Last sample before a near-critical shot leaves `target` for good: the
/// final index within twice the closest approach.
pub fn departure_index(alpha: &[f64], target: f64) -> usize {
    let dist: Vec<f64> = alpha.iter().map(|a| (a - target).abs()).collect();
    let closest = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = (2.0 * closest).max(1e-10);
    dist.iter().rposition(|&d| d <= threshold).unwrap_or(alpha.len() - 1)
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

/// max |−ψ″ + Vψ − Eψ| / max|ψ| over `range`, with ψ″ from three-point
/// differences on a possibly non-uniform grid.
pub fn schrodinger_residual(
    xs: &[f64],
    psi: &[f64],
    potential: impl Fn(f64) -> f64,
    energy: f64,
    range: Range<usize>,
) -> f64 {
    let scale = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let start = range.start.max(1);
    let end = range.end.min(xs.len() - 1);
    let mut worst = 0.0f64;
    for i in start..end {
        let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        let d2 = 2.0 * (h0 * psi[i + 1] - (h0 + h1) * psi[i] + h1 * psi[i - 1]) / (h0 * h1 * (h0 + h1));
        let r = -d2 + (potential(xs[i]) - energy) * psi[i];
        worst = worst.max(r.abs());
    }
    worst / scale
}

/// One row of the eigenvalue report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenRecord {
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(rename = "E", serialize_with = "sig17")]
    pub energy: f64,
    pub nodes: Option<usize>,
    #[serde(serialize_with = "sig17")]
    pub bracket_width: f64,
}

impl EigenRecord {
    pub fn new(level: &Level, nodes: Option<usize>) -> Self {
        Self {
            n: level.n,
            lambda: level.lambda,
            energy: level.energy,
            nodes,
            bracket_width: level.bracket_width,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsospectralLevel {
    pub index: usize,
    #[serde(serialize_with = "sig17")]
    pub v: f64,
    #[serde(serialize_with = "sig17")]
    pub v_tilde: f64,
    #[serde(serialize_with = "sig17")]
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsospectralReport {
    #[serde(serialize_with = "sig17")]
    pub half_width: f64,
    pub interior: usize,
    pub v_count: usize,
    pub v_tilde_count: usize,
    /// Ṽ level i is paired with V level i + offset.
    pub offset: i64,
    pub levels: Vec<IsospectralLevel>,
    #[serde(serialize_with = "sig17")]
    pub max_difference: f64,
}

/// Richardson-extrapolated oracle spectra of V = A² − A′ and Ṽ = A² + A′,
/// paired level by level. A zero mode present in only one partner shifts
/// the pairing by one; the shift with the smallest mismatch is used.
pub fn isospectral_check(
    force: &ForceFunction,
    half_width: f64,
    interior: usize,
    max_levels: usize,
) -> Result<IsospectralReport> {
    let pair = PotentialPair::new(force);
    let v = oracle::richardson(
        |x| pair.v.eval(x),
        half_width,
        interior,
        max_levels,
        pair.v.continuum_edge(half_width),
    )?;
    let vt = oracle::richardson(
        |x| pair.v_tilde.eval(x),
        half_width,
        interior,
        max_levels,
        pair.v_tilde.continuum_edge(half_width),
    )?;
    let pairing = |offset: i64| -> Vec<IsospectralLevel> {
        vt.iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let j = i as i64 + offset;
                let s = v.get(usize::try_from(j).ok()?)?;
                Some(IsospectralLevel {
                    index: j as usize,
                    v: s.extrapolated,
                    v_tilde: t.extrapolated,
                    difference: (s.extrapolated - t.extrapolated).abs(),
                })
            })
            .collect()
    };
    let worst = |levels: &[IsospectralLevel]| levels.iter().fold(0.0f64, |m, l| m.max(l.difference));
    let (offset, levels) = [0i64, 1, -1]
        .into_iter()
        .map(|o| (o, pairing(o)))
        .filter(|(o, l)| *o == 0 || !l.is_empty())
        .min_by(|a, b| worst(&a.1).total_cmp(&worst(&b.1)))
        .expect("offset zero is always present");
    Ok(IsospectralReport {
        half_width,
        interior,
        v_count: v.len(),
        v_tilde_count: vt.len(),
        offset,
        max_difference: worst(&levels),
        levels,
    })
}
