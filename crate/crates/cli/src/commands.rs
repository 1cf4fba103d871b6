use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use pendulum_core::oracle::{self, OracleSpectrum, RichardsonLevel};
use pendulum_core::pendulum::uniform_grid;
use pendulum_core::report::{sig17, sig17_opt, sig17_vec, to_json_pretty, write_columns};
use pendulum_core::spectrum::{start_angle, write_winding_csv, EigenRecord, SuspectInterval};
use pendulum_core::zs::{integrate_zs, seed_from_pendulum, ZsCheckReport};
use pendulum_core::{
    count_bound_states, find_eigenvalues, force_from_curve, reconstruct_eigenfunction, solve_curve, BoundaryClass,
    CriticalCurve, Error, ForceFunction, ForceSpec, IntegrationOptions, Level, PotentialPair, SpectrumOptions,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// Output directory, created on first use.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.out_dir();
        fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    pub fn file(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))?;
        Ok(BufWriter::new(file))
    }

    /// Writes the report and echoes it on stdout.
    pub fn json<T: Serialize>(&self, name: &str, report: &T) -> Result<(), CliError> {
        let text = to_json_pretty(report)?;
        fs::write(self.dir.join(name), &text)?;
        print!("{text}");
        Ok(())
    }
}

#[derive(Serialize)]
struct SearchReport {
    potential: ForceSpec,
    label: String,
    boundary: BoundaryClass,
    #[serde(serialize_with = "sig17")]
    half_width: f64,
    #[serde(serialize_with = "sig17_vec")]
    lambda_range: Vec<f64>,
    #[serde(serialize_with = "sig17")]
    tol_lambda: f64,
    levels: Vec<EigenRecord>,
    suspects: Vec<SuspectInterval>,
    warnings: Vec<String>,
}

pub struct Search {
    pub force: ForceFunction,
    pub opts: SpectrumOptions,
    pub range: (f64, f64),
    pub levels: Vec<Level>,
    pub suspects: Vec<SuspectInterval>,
}

pub fn search(cfg: &RunConfig) -> Result<Search, CliError> {
    let force = cfg.force()?;
    let opts = cfg.spectrum(&force);
    let range = cfg.lambda_range(&force)?;
    let found = find_eigenvalues(&force, range, &opts)?;
    Ok(Search {
        force,
        opts,
        range,
        levels: found.levels,
        suspects: found.suspects,
    })
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let found = search(cfg)?;
    let out = Output::new(cfg)?;
    let grid = uniform_grid(found.opts.integration.half_width, cfg.grid_points());
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for level in &found.levels {
        match reconstruct_eigenfunction(&found.force, level, &grid, &found.opts.integration) {
            Ok(pair) => {
                pair.write_csv(out.file(&format!("psi_{}.csv", level.n))?)?;
                records.push(EigenRecord::new(level, Some(pair.nodes)));
            }
            Err(Error::NodeMismatch { expected, found }) => {
                warnings.push(format!("level {expected}: eigenfunction has {found} nodes"));
                records.push(EigenRecord::new(level, Some(found)));
            }
            Err(e) => {
                warnings.push(format!("level {}: {e}", level.n));
                records.push(EigenRecord::new(level, None));
            }
        }
    }
    let report = SearchReport {
        potential: cfg.potential_spec()?,
        label: found.force.label(),
        boundary: found.force.boundary_class(),
        half_width: found.opts.integration.half_width,
        lambda_range: vec![found.range.0, found.range.1],
        tol_lambda: found.opts.tol_lambda,
        levels: records,
        suspects: found.suspects.clone(),
        warnings,
    };
    out.json("spectrum.json", &report)?;
    if found.suspects.is_empty() {
        Ok(())
    } else {
        Err(CliError::Suspects(found.suspects.len()))
    }
}

/// `points` λ values at the midpoints of equal cells of the range.
fn scan_lambdas(range: (f64, f64), points: usize) -> Vec<f64> {
    let (lo, hi) = range;
    (0..points)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / points as f64)
        .collect()
}

pub fn winding_scan(cfg: &RunConfig) -> Result<(), CliError> {
    let force = cfg.force()?;
    let opts = cfg.integration(&force);
    let lambdas = scan_lambdas(cfg.lambda_range(&force)?, cfg.points.unwrap_or(200));
    let scan = pendulum_core::winding_scan(&force, &lambdas, &opts)?;
    let out = Output::new(cfg)?;
    write_winding_csv(out.file("winding.csv")?, &scan)?;
    let steps = scan.windows(2).filter(|w| w[1].index != w[0].index).count();
    println!("{}: {} samples, {steps} step(s)", force.label(), scan.len());
    Ok(())
}

#[derive(Serialize)]
struct CountReport {
    potential: ForceSpec,
    #[serde(serialize_with = "sig17")]
    half_width: f64,
    count: usize,
}

pub fn count(cfg: &RunConfig) -> Result<(), CliError> {
    let force = cfg.force()?;
    let opts = cfg.integration(&force);
    let count = count_bound_states(&force, &opts)?;
    Output::new(cfg)?.json(
        "count.json",
        &CountReport {
            potential: cfg.potential_spec()?,
            half_width: opts.half_width,
            count,
        },
    )
}

/// Level `n` of a solver spectrum against the Richardson-extrapolated
/// oracle value. Agreement means within max(1e-6, 10 × the extrapolation
/// correction).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleComparison {
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub solver: f64,
    #[serde(serialize_with = "sig17")]
    pub oracle: f64,
    #[serde(serialize_with = "sig17")]
    pub difference: f64,
    #[serde(serialize_with = "sig17")]
    pub allowed: f64,
}

impl OracleComparison {
    pub fn agrees(&self) -> bool {
        self.difference <= self.allowed
    }
}

pub fn compare_with_oracle(
    force: &ForceFunction,
    levels: &[Level],
    half_width: f64,
    interior: usize,
) -> Result<Vec<OracleComparison>, CliError> {
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let v = PotentialPair::new(force).v;
    let reference = oracle::richardson(
        |x| v.eval(x),
        half_width,
        interior,
        levels.len(),
        v.continuum_edge(half_width),
    )?;
    Ok(levels
        .iter()
        .map(|level| {
            let (oracle, allowed) = match reference.get(level.n) {
                Some(r) => (r.extrapolated, (10.0 * r.uncertainty).max(1e-6)),
                None => (f64::NAN, 0.0),
            };
            OracleComparison {
                n: level.n,
                solver: level.energy,
                oracle,
                difference: (level.energy - oracle).abs(),
                allowed,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct ConstructReport {
    curve: ForceSpec,
    #[serde(serialize_with = "sig17")]
    curve_lambda: f64,
    design_levels: usize,
    boundary: BoundaryClass,
    #[serde(serialize_with = "sig17")]
    half_width: f64,
    levels: Vec<EigenRecord>,
    suspects: Vec<SuspectInterval>,
    oracle: Vec<OracleComparison>,
    passed: bool,
}

pub fn construct(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg
        .curve
        .as_ref()
        .map(|c| c.to_spec())
        .ok_or_else(|| CliError::Config("no curve given (use --curve or the `curve` config field)".into()))?;
    let curve = CriticalCurve::from_spec(&spec)?;
    let solution = solve_curve(&curve, 0.0)?;
    let force = force_from_curve(&solution)?;
    let mut opts = SpectrumOptions::for_force(&force);
    opts.integration = cfg.integration(&force);
    if let Some(t) = cfg.tol_lambda {
        opts.tol_lambda = t;
    }
    let l = opts.integration.half_width;
    let out = Output::new(cfg)?;

    let grid = uniform_grid(l, cfg.grid_points());
    let pair = PotentialPair::new(&force);
    let alpha: Vec<f64> = grid.iter().map(|&x| solution.alpha(x)).collect();
    let a: Vec<f64> = grid.iter().map(|&x| force.value(x)).collect();
    let v: Vec<f64> = grid.iter().map(|&x| pair.v.eval(x)).collect();
    let vt: Vec<f64> = grid.iter().map(|&x| pair.v_tilde.eval(x)).collect();
    write_columns(
        out.file("constructed.csv")?,
        &["x", "alpha", "A", "V", "V_tilde"],
        &[&grid, &alpha, &a, &v, &vt],
    )?;

    let range = match (force.boundary_class(), cfg.lambda_max) {
        (_, Some(hi)) => (cfg.lambda_min.unwrap_or(0.0), hi),
        (BoundaryClass::WellShaped, None) => (0.0, 1.0),
        (class, None) => {
            return Err(CliError::Config(format!(
                "constructed force has boundary class {class:?}; give --lambda-max"
            )))
        }
    };
    let found = find_eigenvalues(&force, range, &opts)?;
    let oracle = compare_with_oracle(&force, &found.levels, l, cfg.oracle_points())?;
    let passed = found.suspects.is_empty()
        && found.levels.len() == curve.design_levels()
        && oracle.iter().all(OracleComparison::agrees);
    let report = ConstructReport {
        curve: spec,
        curve_lambda: curve.lambda,
        design_levels: curve.design_levels(),
        boundary: force.boundary_class(),
        half_width: l,
        levels: found.levels.iter().map(|lv| EigenRecord::new(lv, None)).collect(),
        suspects: found.suspects.clone(),
        oracle,
        passed,
    };
    out.json("construct.json", &report)?;
    if !found.suspects.is_empty() {
        Err(CliError::Suspects(found.suspects.len()))
    } else if !passed {
        Err(CliError::VerifyFailed(1))
    } else {
        Ok(())
    }
}

/// ZS checks default to a tighter integrator than the pendulum solve.
pub fn zs_integration(cfg: &RunConfig, force: &ForceFunction) -> IntegrationOptions {
    let mut opts = cfg.integration(force);
    opts.tol = cfg.tol.unwrap_or(1e-12);
    opts
}

#[derive(Serialize)]
struct ZsReport {
    potential: ForceSpec,
    checks: Vec<ZsCheckReport>,
    /// Levels at λ = 0, where the ZS transformation is undefined.
    skipped: Vec<usize>,
}

pub fn zs_check(cfg: &RunConfig) -> Result<(), CliError> {
    let found = search(cfg)?;
    let opts = zs_integration(cfg, &found.force);
    let phase = cfg.phase.unwrap_or(0.0);
    let grid = uniform_grid(opts.half_width, cfg.grid_points());
    let out = Output::new(cfg)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for level in &found.levels {
        if level.lambda == 0.0 {
            skipped.push(level.n);
            continue;
        }
        checks.push(pendulum_core::zs::zs_check(&found.force, level, phase, &grid, &opts)?);
        let alpha0 = start_angle(found.force.boundary_class(), level.lambda)?;
        let seed = seed_from_pendulum(-opts.half_width, alpha0, phase);
        let traj = integrate_zs(&found.force, phase, level.lambda, seed, &grid, &opts.ode())?;
        traj.write_csv(out.file(&format!("zs_{}.csv", level.n))?)?;
    }
    out.json(
        "zs_check.json",
        &ZsReport {
            potential: cfg.potential_spec()?,
            checks,
            skipped,
        },
    )?;
    if found.suspects.is_empty() {
        Ok(())
    } else {
        Err(CliError::Suspects(found.suspects.len()))
    }
}

#[derive(Serialize)]
struct OracleReport {
    potential: ForceSpec,
    #[serde(serialize_with = "sig17_opt")]
    continuum_edge: Option<f64>,
    spectrum: OracleSpectrum,
    richardson: Vec<RichardsonLevel>,
}

pub fn oracle(cfg: &RunConfig) -> Result<(), CliError> {
    let force = cfg.force()?;
    let l = cfg.half_width.unwrap_or_else(|| force.default_half_width());
    let m = cfg.oracle_points();
    let k = cfg.levels.unwrap_or(5);
    let v = PotentialPair::new(&force).v;
    let edge = v.continuum_edge(l);
    let spectrum = oracle::lowest_eigenvalues(|x| v.eval(x), l, m, k, edge)?;
    let richardson = oracle::richardson(|x| v.eval(x), l, m, k, edge)?;
    Output::new(cfg)?.json(
        "oracle.json",
        &OracleReport {
            potential: cfg.potential_spec()?,
            continuum_edge: edge,
            spectrum,
            richardson,
        },
    )
}
