//! Reference eigenvalues from a second-order finite-difference discretization
//! of −ψ″ + Vψ = Eψ on [−L, L] with Dirichlet ends.
//!
//! The matrix is symmetric tridiagonal: eigenvalues come from Sturm-sequence
//! bisection, eigenvectors from inverse iteration. Nothing here touches the
//! pendulum equations, so the results are an independent check on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{sig17, sig17_opt};

/// Tridiagonal discretization with diagonal 2/h² + V(xᵢ) and constant
/// off-diagonal −1/h².
#[derive(Debug, Clone)]
pub struct Discretization {
    pub half_width: f64,
    pub h: f64,
    pub xs: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: f64,
    /// Gershgorin enclosure of the spectrum.
    pub bounds: (f64, f64),
}

impl Discretization {
    pub fn new(potential: impl Fn(f64) -> f64, half_width: f64, interior: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if interior < 2 {
            return Err(Error::GridTooCoarse(interior));
        }
        let h = 2.0 * half_width / (interior + 1) as f64;
        let xs: Vec<f64> = (1..=interior).map(|i| -half_width + i as f64 * h).collect();
        let inv_h2 = 1.0 / (h * h);
        let diag: Vec<f64> = xs.iter().map(|&x| 2.0 * inv_h2 + potential(x)).collect();
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("potential is not finite on the grid".into()));
        }
        let off = -inv_h2;
        let n = diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, d) in diag.iter().enumerate() {
            let radius = off.abs() * (if i > 0 { 1.0 } else { 0.0 } + if i + 1 < n { 1.0 } else { 0.0 });
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        Ok(Self {
            half_width,
            h,
            xs,
            diag,
            off,
            bounds: (lo, hi),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Index-`k` eigenvalue (0-based, ascending) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut a, mut b) = (self.bounds.0 - 1.0, self.bounds.1 + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if b - a <= 2.0 * f64::EPSILON * mid.abs().max(1e-300) || mid == a || mid == b {
                break;
            }
            if sturm_count(self, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Eigenvector for a converged eigenvalue, normalized so that Σ vᵢ² h = 1
    /// and the first significant entry is positive.
    pub fn eigenvector(&self, energy: f64) -> Vec<f64> {
        let n = self.len();
        let scale = self.bounds.1.abs().max(self.bounds.0.abs());
        let shift = energy + 64.0 * f64::EPSILON * scale;
        let mut v = vec![1.0; n];
        for (i, x) in v.iter_mut().enumerate() {
            // avoid starting orthogonal to the target vector
            *x += 1e-3 * (i as f64 * 0.7).sin();
        }
        for _ in 0..4 {
            v = solve_shifted(&self.diag, self.off, shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * self.h).sqrt();
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-6 * peak)
            .map(|x| x.signum())
            .unwrap_or(1.0);
        v.iter_mut().for_each(|x| *x *= sign / norm);
        v
    }
}

/// Number of eigenvalues strictly below `energy`.
pub fn sturm_count(disc: &Discretization, energy: f64) -> usize {
    let e2 = disc.off * disc.off;
    let guard = f64::EPSILON * (disc.off.abs() + 1.0);
    let mut count = 0;
    let mut q = disc.diag[0] - energy;
    if q < 0.0 {
        count += 1;
    }
    for d in &disc.diag[1..] {
        let safe = if q.abs() < guard { guard.copysign(q) } else { q };
        q = (d - energy) - e2 / safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves (T − σI) y = b for symmetric tridiagonal T with constant
/// off-diagonal, by Gaussian elimination with partial pivoting.
fn solve_shifted(diag: &[f64], off: f64, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    // du[i] is entry (i, i+1), du2[i] is entry (i, i+2) created by pivoting
    let mut du = vec![off; n];
    du[n - 1] = 0.0;
    let mut du2 = vec![0.0; n];
    let mut r = b.to_vec();
    let tiny = f64::EPSILON * (off.abs() + diag.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    for i in 0..n - 1 {
        // row i+1 still holds its original sub-diagonal entry `off`
        if off.abs() > d[i].abs() {
            let fact = d[i] / off;
            let next_d = d[i + 1];
            let next_du = du[i + 1];
            let old_du = du[i];
            d[i] = off;
            du[i] = next_d;
            du2[i] = next_du;
            d[i + 1] = old_du - fact * next_d;
            du[i + 1] = -fact * next_du;
            r.swap(i, i + 1);
            r[i + 1] -= fact * r[i];
        } else {
            if d[i].abs() < tiny {
                d[i] = tiny.copysign(d[i]);
            }
            let fact = off / d[i];
            d[i + 1] -= fact * du[i];
            r[i + 1] -= fact * r[i];
        }
    }
    if d[n - 1].abs() < tiny {
        d[n - 1] = tiny.copysign(d[n - 1]);
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = r[i];
        if i + 1 < n {
            acc -= du[i] * y[i + 1];
        }
        if i + 2 < n {
            acc -= du2[i] * y[i + 2];
        }
        y[i] = acc / d[i];
    }
    y
}

/// Interior sign changes, ignoring entries below `1e-8 · max|v|`.
pub fn count_sign_changes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-8 * peak;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleLevel {
    pub index: usize,
    #[serde(serialize_with = "sig17")]
    pub energy: f64,
    pub nodes: usize,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSpectrum {
    #[serde(serialize_with = "sig17")]
    pub half_width: f64,
    pub interior: usize,
    #[serde(serialize_with = "sig17")]
    pub h: f64,
    pub levels: Vec<OracleLevel>,
    /// Fewer than the requested levels lie below the continuum edge.
    pub truncated: bool,
    #[serde(serialize_with = "sig17_opt")]
    pub continuum_edge: Option<f64>,
    #[serde(skip)]
    pub xs: Vec<f64>,
}

impl OracleSpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// The `k` lowest eigenvalues with eigenvectors. With a continuum edge, only
/// levels strictly below it are kept and `truncated` reports a shortfall.
pub fn lowest_eigenvalues(
    potential: impl Fn(f64) -> f64,
    half_width: f64,
    interior: usize,
    k: usize,
    continuum_edge: Option<f64>,
) -> Result<OracleSpectrum> {
    if k > interior {
        return Err(Error::InvalidParameter(format!(
            "asked for {k} levels of a {interior}-point grid"
        )));
    }
    let disc = Discretization::new(potential, half_width, interior)?;
    let available = match continuum_edge {
        Some(edge) => sturm_count(&disc, edge),
        None => disc.len(),
    };
    let take = k.min(available);
    let levels = (0..take)
        .map(|index| {
            let energy = disc.eigenvalue(index);
            let vector = disc.eigenvector(energy);
            OracleLevel {
                index,
                energy,
                nodes: count_sign_changes(&vector),
                vector,
            }
        })
        .collect();
    Ok(OracleSpectrum {
        half_width,
        interior,
        h: disc.h,
        levels,
        truncated: take < k,
        continuum_edge,
        xs: disc.xs,
    })
}

/// Eigenvalue estimate from grids of M and 2M interior points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RichardsonLevel {
    pub index: usize,
    #[serde(serialize_with = "sig17")]
    pub coarse: f64,
    #[serde(serialize_with = "sig17")]
    pub fine: f64,
    #[serde(serialize_with = "sig17")]
    pub extrapolated: f64,
    /// |extrapolated − fine|: the size of the second-order correction.
    #[serde(serialize_with = "sig17")]
    pub uncertainty: f64,
}

/// Second-order Richardson extrapolation of the lowest levels.
pub fn richardson(
    potential: impl Fn(f64) -> f64,
    half_width: f64,
    interior: usize,
    k: usize,
    continuum_edge: Option<f64>,
) -> Result<Vec<RichardsonLevel>> {
    let coarse = Discretization::new(&potential, half_width, interior)?;
    let fine = Discretization::new(&potential, half_width, 2 * interior)?;
    let available = match continuum_edge {
        Some(edge) => sturm_count(&fine, edge).min(sturm_count(&coarse, edge)),
        None => interior,
    };
    let ratio = (coarse.h / fine.h).powi(2);
    Ok((0..k.min(available))
        .map(|index| {
            let (ec, ef) = (coarse.eigenvalue(index), fine.eigenvalue(index));
            let extrapolated = ef + (ef - ec) / (ratio - 1.0);
            RichardsonLevel {
                index,
                coarse: ec,
                fine: ef,
                extrapolated,
                uncertainty: (extrapolated - ef).abs(),
            }
        })
        .collect())
}

/// |E(M) − E(2M)| / |E(2M) − E(4M)| for level `index`; ≈ 4 for a
/// second-order scheme.
pub fn convergence_ratio(
    potential: impl Fn(f64) -> f64,
    half_width: f64,
    interior: usize,
    index: usize,
) -> Result<f64> {
    let e = |m: usize| Discretization::new(&potential, half_width, m).map(|d| d.eigenvalue(index));
    let (e1, e2, e4) = (e(interior)?, e(2 * interior)?, e(4 * interior)?);
    Ok((e1 - e2).abs() / (e2 - e4).abs())
}

/// Widens L until e^{−2√(edge − E)·L} < 1e-10 for the given level energy.
pub fn dirichlet_safe_half_width(half_width: f64, edge: f64, energy: f64) -> f64 {
    let gap = edge - energy;
    if gap <= 0.0 {
        return half_width;
    }
    // eigenvalue shift from the wall scales like ψ(L)² ~ exp(−2√gap·L)
    let needed = 5.0 * std::f64::consts::LN_10 / gap.sqrt();
    half_width.max(needed)
}
