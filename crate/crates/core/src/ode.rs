//! Dormand-Prince 5(4) with the fourth-order continuous extension.
//!
//! States are fixed-size arrays; every system in this crate is two or four
//! dimensional. Integration may run in either direction along x.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Largest allowed |h|.
    pub max_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            max_step: 0.5,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluates the continuous extension at `x` (between `x0` and `x1`).
    pub fn interpolate(&self, x: f64) -> [f64; N] {
        let h = self.x1 - self.x0;
        let theta = (x - self.x0) / h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + theta
                    * (self.cont[0][i]
                        + theta1 * (self.cont[1][i] + theta * (self.cont[2][i] + theta1 * self.cont[3][i])));
        }
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = if self.x0 <= self.x1 {
            (self.x0, self.x1)
        } else {
            (self.x1, self.x0)
        };
        x >= lo && x <= hi
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(x, y)` from `x0` to `x_end`, calling `on_step` for
/// every accepted step. Returns the state at `x_end`.
pub fn solve<const N: usize, F, S>(
    mut rhs: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &OdeOptions,
    mut on_step: S,
) -> Result<([f64; N], OdeStats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&DenseStep<N>),
{
    let mut stats = OdeStats {
        accepted: 0,
        rejected: 0,
    };
    if x_end == x0 {
        return Ok((y0, stats));
    }
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();

    let mut x = x0;
    let mut y = y0;
    let mut k1 = rhs(x, &y);
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(Error::IntegrationFailure {
            x,
            reason: "non-finite derivative at the initial point".into(),
        });
    }

    let mut h = initial_step(&k1, &y, opts).min(opts.max_step).min(span);
    let mut last_rejected = false;

    loop {
        let remaining = (x_end - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                x,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < 1e-14 * x.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                x,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let hs = h * dir;

        let k2 = rhs(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            x + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let x_new = if last { x_end } else { x + hs };
        let k6 = rhs(
            x_new,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(x_new, &y_new);

        let mut err = 0.0;
        let mut finite = true;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale).powi(2);
            finite &= y_new[i].is_finite() && k7[i].is_finite();
        }
        let err = (err / N as f64).sqrt();

        if !finite || !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 4];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                cont[0][i] = ydiff;
                cont[1][i] = bspl;
                cont[2][i] = ydiff - hs * k7[i] - bspl;
                cont[3][i] = hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            on_step(&DenseStep {
                x0: x,
                x1: x_new,
                y0: y,
                y1: y_new,
                cont,
            });
            stats.accepted += 1;
            x = x_new;
            y = y_new;
            k1 = k7;
            if last {
                break;
            }
            let mut fac = 0.9 * err.powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h = (h * fac).min(opts.max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok((y, stats))
}

fn initial_step<const N: usize>(k1: &[f64; N], y: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    let d0 = (d0 / N as f64).sqrt();
    let d1 = (d1 / N as f64).sqrt();
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-4
    } else {
        (0.01 * d0 / d1).clamp(1e-6, 0.1)
    }
}

/// Integrates from `x0` through every point of `samples` (monotone in the
/// direction of integration) and returns the interpolated states there.
pub fn solve_sampled<const N: usize, F>(
    rhs: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<[f64; N]>, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let dir = (x_end - x0).signum();
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0;
    while next < samples.len() && (samples[next] - x0) * dir <= 0.0 {
        out.push(y0);
        next += 1;
    }
    let (end, _) = solve(rhs, x0, y0, x_end, opts, |step| {
        while next < samples.len() && step.contains(samples[next]) {
            out.push(if samples[next] == step.x1 {
                step.y1
            } else {
                step.interpolate(samples[next])
            });
            next += 1;
        }
    })?;
    while out.len() < samples.len() {
        out.push(end);
    }
    Ok((out, end))
}
