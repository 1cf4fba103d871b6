//! Piecewise Hermite interpolation.

/// Cubic Hermite interpolant on a strictly increasing grid with nodal slopes
/// from three-point centered differences (one-sided at the ends).
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicHermite {
    /// Caller guarantees `xs` strictly increasing and `xs.len() >= 3`.
    pub fn with_centered_slopes(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            // second-order on non-uniform grids
            slopes[i] =
                (h0 * h0 * ys[i + 1] - h1 * h1 * ys[i - 1] + (h1 * h1 - h0 * h0) * ys[i]) / (h0 * h1 * (h0 + h1));
        }
        let (h0, h1) = (xs[1] - xs[0], xs[2] - xs[1]);
        slopes[0] =
            -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * ys[0] + (h0 + h1) / (h0 * h1) * ys[1] - h0 / (h1 * (h0 + h1)) * ys[2];
        let (h0, h1) = (xs[n - 2] - xs[n - 3], xs[n - 1] - xs[n - 2]);
        slopes[n - 1] = h1 / (h0 * (h0 + h1)) * ys[n - 3] - (h0 + h1) / (h0 * h1) * ys[n - 2]
            + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * ys[n - 1];
        Self { xs, ys, slopes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Value and first derivative; constant extrapolation outside the grid.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return (self.ys[0], 0.0);
        }
        if x >= self.xs[n - 1] {
            return (self.ys[n - 1], 0.0);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value =
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, deriv)
    }
}

/// Quintic Hermite interpolant on a uniform grid, using value, first and
/// second derivative at every node.
#[derive(Debug, Clone)]
pub struct QuinticHermite {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
    d2y: Vec<f64>,
}

impl QuinticHermite {
    pub fn new(x0: f64, h: f64, y: Vec<f64>, dy: Vec<f64>, d2y: Vec<f64>) -> Self {
        debug_assert!(y.len() >= 2 && y.len() == dy.len() && y.len() == d2y.len());
        Self { x0, h, y, dy, d2y }
    }

    pub fn start(&self) -> f64 {
        self.x0
    }

    pub fn end(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn first(&self) -> f64 {
        self.y[0]
    }

    pub fn last(&self) -> f64 {
        self.y[self.y.len() - 1]
    }

    /// Value at `x`, which must lie inside `[start, end]`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let s = ((x - self.x0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let h = self.h;
        let (p0, p1) = (self.y[i], self.y[i + 1]);
        let (v0, v1) = (self.dy[i] * h, self.dy[i + 1] * h);
        let (a0, a1) = (self.d2y[i] * h * h, self.d2y[i + 1] * h * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        h00 * p0 + h10 * v0 + h20 * a0 + h21 * a1 + h11 * v1 + h01 * p1
    }
}
