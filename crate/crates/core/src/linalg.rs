//! Small dense symmetric linear algebra.
//!
//! Everything here is sized for the ambient dimension of a k-Hessian
//! problem (n <= 16): cyclic Jacobi eigenvalues, elementary symmetric
//! polynomials of a spectrum and sums of principal minors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 16;

/// Sweep limit for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 50;

/// Largest dimension for which principal-minor enumeration is offered.
pub const MAX_MINOR_DIM: usize = 8;

/// Dense real symmetric matrix with packed upper-triangular storage.
/// Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row i starts after i rows of lengths n, n-1, ...
    i * n - i * (i + 1) / 2 + j
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, upper: vec![0.0; n * (n + 1) / 2] })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(d.len())?;
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from full rows; the lower triangle must mirror the upper one
    /// to within `1e-12` relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for j in i..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidSpec(format!("matrix not symmetric at ({i},{j})")));
                }
                m.set(i, j, a);
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from the packed upper triangle (row-major, `n(n+1)/2` entries).
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch { expected: n * (n + 1) / 2, got: upper.len() });
        }
        let m = Self { n, upper };
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        match self.upper.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFiniteValue(format!("matrix entry {p}"))),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = packed(self.n, i, j);
        self.upper[p] = v;
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, upper })
    }

    /// Adds `s` to every diagonal entry.
    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let v = m.get(i, i);
            m.set(i, i, v + s);
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    /// `<M x, x>`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `Q^T M Q` for a square orthogonal (or arbitrary) `Q` given by rows.
    pub fn congruence(&self, q: &[Vec<f64>]) -> Result<Self> {
        let n = self.n;
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        let mut out = Self::zeros(n)?;
        for a in 0..n {
            for b in a..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += q[i][a] * self.get(i, j) * q[j][b];
                    }
                }
                out.set(a, b, s);
            }
        }
        Ok(out)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        let spec = eigenvalues_default(self)?;
        Ok(spec.values().iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }
}

/// Eigenvalues in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` non-increasingly.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_dim(values.len())?;
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("spectrum entry {p}")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * s).collect())
    }
}

/// Cyclic Jacobi eigenvalues of `m`.
///
/// Iterates full sweeps over all off-diagonal pairs until the off-diagonal
/// Frobenius norm of the rotated matrix drops to `tol`.
pub fn eigenvalues(m: &SymMatrix, tol: f64) -> Result<Spectrum> {
    jacobi(m, tol, MAX_SWEEPS)
}

fn jacobi(m: &SymMatrix, tol: f64, max_sweeps: usize) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = m.dim();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = m.get(i, j);
        }
    }
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > tol {
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // rotation angle annihilating a[p][q]
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    Spectrum::new((0..n).map(|i| a[i * n + i]).collect())
}

/// Eigenvalues with a tolerance relative to the Frobenius norm of `m`.
pub fn eigenvalues_default(m: &SymMatrix) -> Result<Spectrum> {
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    eigenvalues(m, 1e-14 * scale)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// All elementary symmetric polynomials `S_0..=S_k` of `values`, via the
/// one-pass product expansion `e_j <- e_j + x * e_{j-1}`.
pub fn elementary_symmetric_all(values: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (m, &x) in values.iter().enumerate() {
        for j in (1..=k.min(m + 1)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `S_k(lambda)`.
pub fn elementary_symmetric(spectrum: &Spectrum, k: usize) -> Result<f64> {
    check_k(k, spectrum.dim())?;
    Ok(elementary_symmetric_all(spectrum.values(), k)[k])
}

/// Sum of all `k x k` principal minors, computed from the eigenvalues.
pub fn k_trace(m: &SymMatrix, k: usize) -> Result<f64> {
    check_k(k, m.dim())?;
    let spec = eigenvalues_default(m)?;
    Ok(elementary_symmetric_all(spec.values(), k)[k])
}

/// Sum of all `k x k` principal minors by direct enumeration (n <= 8).
pub fn k_trace_minors(m: &SymMatrix, k: usize) -> Result<f64> {
    let n = m.dim();
    check_k(k, n)?;
    if n > MAX_MINOR_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut sub = vec![0.0; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[a * k + b] = m.get(i, j);
            }
        }
        total += lu_det(&mut sub, k);
    }
    Ok(total)
}

/// Determinant by Gaussian elimination with partial pivoting (destroys `a`).
fn lu_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap_or(col);
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
