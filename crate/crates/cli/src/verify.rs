use pendulum_core::pendulum::uniform_grid;
use pendulum_core::report::sig17;
use pendulum_core::spectrum::schrodinger_residual;
use pendulum_core::zs::zs_check;
use pendulum_core::{
    find_eigenvalues, isospectral_check, reconstruct_eigenfunction, winding_number, BoundaryClass, ForceFunction,
    ForceSpec, Level, PotentialPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{compare_with_oracle, zs_integration, Output};
use crate::config::{RunConfig, SpecConfig};
use crate::CliError;

const RESIDUAL_LIMIT: f64 = 1e-3;
const ZS_ALPHA_LIMIT: f64 = 1e-6;
const ZS_RESIDUAL_LIMIT: f64 = 1e-5;
const ISOSPECTRAL_LIMIT: f64 = 1e-5;

#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    passed: bool,
    /// Worst value of the checked quantity, when there is one.
    #[serde(serialize_with = "sig17")]
    worst: f64,
    detail: String,
}

impl Check {
    fn new(suite: &'static str, passed: bool, worst: f64, detail: impl Into<String>) -> Self {
        Self {
            suite,
            passed,
            worst,
            detail: detail.into(),
        }
    }

    fn error(suite: &'static str, err: impl std::fmt::Display) -> Self {
        Self::new(suite, false, f64::NAN, err.to_string())
    }
}

#[derive(Debug, Serialize)]
struct EntryReport {
    potential: ForceSpec,
    levels: usize,
    checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    seed: u64,
    passed: bool,
    failures: usize,
    warnings: Vec<String>,
    entries: Vec<EntryReport>,
}

fn default_catalog() -> Vec<SpecConfig> {
    let mut harmonic = SpecConfig::new("linear_harmonic");
    harmonic.lambda_max = Some(3.1);
    let mut sech = SpecConfig::new("sech_well");
    sech.params.insert("lambda_bar".into(), 0.8.into());
    vec![
        SpecConfig::new("constant"),
        sech,
        SpecConfig::new("kink_well"),
        SpecConfig::new("ladder_well"),
        harmonic,
    ]
}

fn selection(cfg: &RunConfig) -> Vec<SpecConfig> {
    if let Some(catalog) = &cfg.catalog {
        return catalog.clone();
    }
    match &cfg.potential {
        Some(p) => vec![p.clone()],
        None => default_catalog(),
    }
}

/// Runs every property suite over the selected catalog entries. Exits 0
/// iff all checks pass.
pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let entries = selection(cfg);
    let mut warnings = Vec::new();
    if entries.is_empty() {
        let msg = "empty catalog selection; nothing to verify".to_string();
        eprintln!("pendulum: warning: {msg}");
        warnings.push(msg);
    }
    let mut reports = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let mut entry_cfg = cfg.clone();
        entry_cfg.potential = Some(entry.clone());
        if entry.lambda_max.is_some() {
            entry_cfg.lambda_max = entry.lambda_max;
        }
        entry_cfg.validate()?;
        reports.push(verify_entry(&entry_cfg, cfg.seed().wrapping_add(i as u64))?);
    }
    let failures = reports.iter().flat_map(|r| &r.checks).filter(|c| !c.passed).count();
    let report = VerifyReport {
        seed: cfg.seed(),
        passed: failures == 0,
        failures,
        warnings,
        entries: reports,
    };
    Output::new(cfg)?.json("verify.json", &report)?;
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failures))
    }
}

fn verify_entry(cfg: &RunConfig, seed: u64) -> Result<EntryReport, CliError> {
    let force = cfg.force()?;
    let opts = cfg.spectrum(&force);
    let range = cfg.lambda_range(&force)?;
    let mut checks = vec![monotonicity(&force, cfg, range, seed)];

    let found = match find_eigenvalues(&force, range, &opts) {
        Ok(found) => found,
        Err(e) => {
            checks.push(Check::error("staircase", e));
            return Ok(EntryReport {
                potential: cfg.potential_spec()?,
                levels: 0,
                checks,
            });
        }
    };
    let bad_jumps = found
        .levels
        .iter()
        .filter(|l| l.winding_above - l.winding_below != 1)
        .count();
    checks.push(Check::new(
        "staircase",
        found.suspects.is_empty() && bad_jumps == 0,
        (found.suspects.len() + bad_jumps) as f64,
        format!(
            "{} level(s), {} suspect interval(s), {bad_jumps} non-unit jump(s)",
            found.levels.len(),
            found.suspects.len()
        ),
    ));

    checks.push(residuals(&force, cfg, &found.levels));
    let l = opts.integration.half_width;
    checks.push(
        match compare_with_oracle(&force, &found.levels, l, cfg.oracle_points()) {
            Ok(cmp) => {
                let worst = cmp.iter().map(|c| c.difference).fold(0.0, f64::max);
                let passed = cmp.iter().all(|c| c.agrees());
                Check::new("oracle", passed, worst, format!("{} level(s) compared", cmp.len()))
            }
            Err(e) => Check::error("oracle", e.message()),
        },
    );
    checks.push(zs_round_trip(&force, cfg, &found.levels));
    checks.push(isospectrality(&force, l, cfg.oracle_points(), found.levels.len()));
    Ok(EntryReport {
        potential: cfg.potential_spec()?,
        levels: found.levels.len(),
        checks,
    })
}

/// Seeded random λ pairs: the winding index may not decrease.
fn monotonicity(force: &ForceFunction, cfg: &RunConfig, range: (f64, f64), seed: u64) -> Check {
    let opts = cfg.integration(force);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = cfg.pairs.unwrap_or(50);
    let mut violations = 0;
    for _ in 0..pairs {
        let a = rng.gen_range(range.0..=range.1);
        let b = rng.gen_range(range.0..=range.1);
        let (lo, hi) = (a.min(b), a.max(b));
        match (winding_number(force, lo, &opts), winding_number(force, hi, &opts)) {
            (Ok(wl), Ok(wh)) => {
                if wh.index < wl.index {
                    violations += 1;
                }
            }
            (Err(e), _) | (_, Err(e)) => return Check::error("monotonicity", e),
        }
    }
    Check::new(
        "monotonicity",
        violations == 0,
        violations as f64,
        format!("{pairs} pair(s), {violations} violation(s)"),
    )
}

/// Reconstructed eigenfunctions: node count and −ψ″ + Vψ − Eψ.
fn residuals(force: &ForceFunction, cfg: &RunConfig, levels: &[Level]) -> Check {
    let opts = cfg.integration(force);
    let grid = uniform_grid(opts.half_width, cfg.grid_points());
    let v = PotentialPair::new(force).v;
    let mut worst = 0.0f64;
    for level in levels {
        match reconstruct_eigenfunction(force, level, &grid, &opts) {
            Ok(pair) => {
                let r = schrodinger_residual(&pair.xs, &pair.psi, |x| v.eval(x), pair.energy, pair.interior());
                worst = worst.max(r);
            }
            Err(e) => return Check::error("residual", format!("level {}: {e}", level.n)),
        }
    }
    Check::new(
        "residual",
        worst < RESIDUAL_LIMIT,
        worst,
        format!("{} eigenfunction(s), limit {RESIDUAL_LIMIT:e}", levels.len()),
    )
}

/// Grid spacing for the ZS residuals, which are second differences.
const ZS_GRID_STEP: f64 = 0.0025;

fn zs_round_trip(force: &ForceFunction, cfg: &RunConfig, levels: &[Level]) -> Check {
    if force.boundary_class() != BoundaryClass::WellShaped {
        return Check::new("zs", true, 0.0, "skipped: only well-shaped forces are checked");
    }
    let opts = zs_integration(cfg, force);
    let points = ((2.0 * opts.half_width / ZS_GRID_STEP).round() as usize + 1).max(cfg.grid_points());
    let grid = uniform_grid(opts.half_width, points);
    let phase = cfg.phase.unwrap_or(0.0);
    let (mut alpha_dev, mut residual, mut checked) = (0.0f64, 0.0f64, 0);
    for level in levels.iter().filter(|l| l.lambda > 0.0) {
        match zs_check(force, level, phase, &grid, &opts) {
            Ok(r) => {
                alpha_dev = alpha_dev.max(r.max_alpha_deviation);
                residual = residual.max(r.residual_plus).max(r.residual_minus);
                checked += 1;
            }
            Err(e) => return Check::error("zs", format!("level {}: {e}", level.n)),
        }
    }
    Check::new(
        "zs",
        alpha_dev < ZS_ALPHA_LIMIT && residual < ZS_RESIDUAL_LIMIT,
        residual,
        format!("{checked} level(s), max alpha deviation {alpha_dev:.3e}, max residual {residual:.3e}"),
    )
}

fn isospectrality(force: &ForceFunction, half_width: f64, interior: usize, levels: usize) -> Check {
    match isospectral_check(force, half_width, interior, levels.max(1) + 1) {
        Ok(r) => Check::new(
            "isospectral",
            r.max_difference < ISOSPECTRAL_LIMIT,
            r.max_difference,
            format!("{} paired level(s), offset {}", r.levels.len(), r.offset),
        ),
        Err(e) => Check::error("isospectral", e),
    }
}
