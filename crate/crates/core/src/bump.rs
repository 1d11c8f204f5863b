//! The smooth compactly supported bump `exp(-1/(1-|y|²))` and its exact
//! derivatives. Used as mollification kernel, as weak-test function and as
//! the envelope of the vector fields in the BV check.

/// Profile `g(s) = exp(-1/(1-s))` for `s = |y|² < 1`, with `g'` and `g''`.
#[inline]
pub fn profile(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 / (1.0 - s);
    let g = (-w).exp();
    let g1 = -g * w * w;
    let g2 = g * (w.powi(4) - 2.0 * w.powi(3));
    (g, g1, g2)
}

/// Bump of a given radius centred at a point, `φ(x) = g(|x-c|²/ρ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    fn local(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| (a - c) / self.radius).collect();
        let s = y.iter().map(|v| v * v).sum();
        (y, s)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        profile(self.local(x).1).0
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (y, s) = self.local(x);
        let (_, g1, _) = profile(s);
        y.iter().map(|yi| 2.0 * g1 * yi / self.radius).collect()
    }

    /// Exact Hessian, row-major `n x n`:
    /// `∂_ij φ = (4 g'' y_i y_j + 2 g' δ_ij) / ρ²`.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let (y, s) = self.local(x);
        let n = y.len();
        let (_, g1, g2) = profile(s);
        let r2 = self.radius * self.radius;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { 2.0 * g1 } else { 0.0 };
                h[i * n + j] = (4.0 * g2 * y[i] * y[j] + d) / r2;
            }
        }
        h
    }
}
