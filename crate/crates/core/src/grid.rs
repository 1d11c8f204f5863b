//! Functions sampled on uniform box grids.
//!
//! A [`GridFunction`] holds finite values at the lattice points
//! `origin + h * idx`, row-major with the last index fastest. Derivatives
//! are centred second-order differences; mollification is a discrete
//! convolution with the normalised bump kernel and only produces values at
//! points whose kernel footprint fits inside the grid.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump;
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{SymMatrix, MAX_DIM};

/// Smallest allowed extent along any axis.
pub const MIN_EXTENT: usize = 5;

/// Mollification radius must cover at least this many cells.
pub const MIN_EPS_CELLS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    values: Vec<f64>,
    strides: Vec<usize>,
}

fn strides_for(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for d in (0..dims.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * dims[d + 1];
    }
    s
}

fn check_lattice(origin: &[f64], spacing: f64, dims: &[usize]) -> Result<()> {
    let n = dims.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if origin.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: origin.len() });
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidSpec(format!("spacing must be positive, got {spacing}")));
    }
    if origin.iter().any(|o| !o.is_finite()) {
        return Err(Error::NonFiniteValue("origin".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < MIN_EXTENT) {
        return Err(Error::GridTooSmall(format!("extent {d} < {MIN_EXTENT}")));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(origin: Vec<f64>, spacing: f64, dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_lattice(&origin, spacing, &dims)?;
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: values.len() });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(format!("grid value {p}")));
        }
        let strides = strides_for(&dims);
        Ok(Self { dims, origin, spacing, values, strides })
    }

    /// Evaluates `f` at every lattice point (in parallel).
    pub fn from_fn<F>(origin: Vec<f64>, spacing: f64, dims: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        check_lattice(&origin, spacing, &dims)?;
        let strides = strides_for(&dims);
        let len: usize = dims.iter().product();
        let values: Vec<f64> = (0..len)
            .into_par_iter()
            .map(|flat| {
                let mut x = vec![0.0; dims.len()];
                let mut rem = flat;
                for d in 0..dims.len() {
                    x[d] = origin[d] + spacing * (rem / strides[d]) as f64;
                    rem %= strides[d];
                }
                f(&x)
            })
            .collect();
        Self::new(origin, spacing, dims, values)
    }

    /// Cube `[-half, half]^n` with `m` points per side.
    pub fn centered_cube<F>(n: usize, half: f64, m: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if m < 2 {
            return Err(Error::GridTooSmall(format!("{m} points per side")));
        }
        Self::from_fn(vec![-half; n], 2.0 * half / (m - 1) as f64, vec![m; n], f)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// `h^n`
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.n() as i32)
    }

    #[inline]
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for d in 0..self.n() {
            idx[d] = flat / self.strides[d];
            flat %= self.strides[d];
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.origin).map(|(&i, o)| o + self.spacing * i as f64).collect()
    }

    #[inline]
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> Vec<f64> {
        self.dims.iter().zip(&self.origin).map(|(&d, o)| o + self.spacing * (d - 1) as f64).collect()
    }

    /// Lattice index nearest to `x`, if `x` is inside the box.
    pub fn nearest_index(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.n() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.n());
        for d in 0..self.n() {
            let t = ((x[d] - self.origin[d]) / self.spacing).round();
            if t < 0.0 || t > (self.dims[d] - 1) as f64 {
                return None;
            }
            idx.push(t as usize);
        }
        Some(idx)
    }

    /// Index range `[lo, hi]` (inclusive) of lattice points within sup-distance
    /// `radius` of `center`, or `None` if that box sticks out of the grid by
    /// more than `margin` cells on any side.
    pub fn index_box(&self, center: &[f64], radius: f64, margin: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut lo = Vec::with_capacity(self.n());
        let mut hi = Vec::with_capacity(self.n());
        for d in 0..self.n() {
            let a = ((center[d] - radius - self.origin[d]) / self.spacing - 1e-9).floor() as i64;
            let b = ((center[d] + radius - self.origin[d]) / self.spacing + 1e-9).ceil() as i64;
            let a = a - margin as i64;
            let b = b + margin as i64;
            if a < 0 || b > self.dims[d] as i64 - 1 {
                return None;
            }
            lo.push(a as usize);
            hi.push(b as usize);
        }
        Some((lo, hi))
    }

    /// Flat indices of lattice points in the closed ball `|x - center| <= radius`
    /// (a relative slack of 1e-12 admits points exactly on the sphere), in
    /// lattice order.
    pub fn ball_indices(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let r2 = radius * radius * (1.0 + 1e-12);
        let Some((lo, hi)) = self.index_box(center, radius, 0).or_else(|| self.clamped_box(center, radius)) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for_each_in_box(&lo, &hi, |idx| {
            let x = self.point(idx);
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                out.push(self.flat(idx));
            }
        });
        out
    }

    fn clamped_box(&self, center: &[f64], radius: f64) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut lo = Vec::with_capacity(self.n());
        let mut hi = Vec::with_capacity(self.n());
        for d in 0..self.n() {
            let a = ((center[d] - radius - self.origin[d]) / self.spacing).floor().max(0.0);
            let b = ((center[d] + radius - self.origin[d]) / self.spacing).ceil().min((self.dims[d] - 1) as f64);
            if a > b {
                return None;
            }
            lo.push(a as usize);
            hi.push(b as usize);
        }
        Some((lo, hi))
    }

    /// True if `idx` is at least `margin` cells from every face.
    pub fn is_interior(&self, idx: &[usize], margin: usize) -> bool {
        idx.len() == self.n()
            && idx.iter().zip(&self.dims).all(|(&i, &d)| i >= margin && i + margin < d)
    }

    /// Flat indices of all points at least one cell from every face.
    pub fn interior_indices(&self) -> Vec<usize> {
        let lo = vec![1; self.n()];
        let hi: Vec<usize> = self.dims.iter().map(|d| d - 2).collect();
        let mut out = Vec::new();
        for_each_in_box(&lo, &hi, |idx| out.push(self.flat(idx)));
        out
    }

    /// Same lattice check (dims, origin, spacing).
    pub fn same_lattice(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.spacing == other.spacing
            && self.origin.iter().zip(&other.origin).all(|(a, b)| a == b)
    }

    pub fn map<F: Fn(&[f64], f64) -> f64 + Sync>(&self, f: F) -> Result<Self> {
        let values: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|flat| f(&self.point(&self.unflat(flat)), self.values[flat]))
            .collect();
        Self::new(self.origin.clone(), self.spacing, self.dims.clone(), values)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.map(|_, v| s * v)
    }

    /// `u + <b, x> + c`
    pub fn plus_affine(&self, b: &[f64], c: f64) -> Result<Self> {
        if b.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: b.len() });
        }
        self.map(|x, v| v + x.iter().zip(b).map(|(xi, bi)| xi * bi).sum::<f64>() + c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_lattice(other) {
            return Err(Error::InvalidSpec("grids do not share a lattice".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.origin.clone(), self.spacing, self.dims.clone(), values)
    }

    /// Sub-grid on the inclusive index box `[lo, hi]`.
    pub fn window(&self, lo: &[usize], hi: &[usize]) -> Result<Self> {
        if lo.len() != self.n() || hi.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: lo.len().min(hi.len()) });
        }
        if lo.iter().zip(hi).zip(&self.dims).any(|((a, b), d)| a > b || b >= d) {
            return Err(Error::GridTooSmall(format!("window {lo:?}..={hi:?} outside dims {:?}", self.dims)));
        }
        let dims: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| b - a + 1).collect();
        let mut values = Vec::with_capacity(dims.iter().product());
        for_each_in_box(lo, hi, |idx| values.push(self.value(idx)));
        Self::new(self.point(lo), self.spacing, dims, values)
    }

    /// Index of the point `x` of this grid inside `other`, when both share
    /// spacing and `x` is a lattice point of `other` up to rounding.
    pub fn index_in(&self, idx: &[usize], other: &Self) -> Option<Vec<usize>> {
        let x = self.point(idx);
        let j = other.nearest_index(&x)?;
        let y = other.point(&j);
        let close = x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-9 * other.spacing);
        close.then_some(j)
    }
}

/// Calls `f` for every multi-index in the inclusive box `[lo, hi]`, last
/// index fastest.
pub fn for_each_in_box<F: FnMut(&[usize])>(lo: &[usize], hi: &[usize], mut f: F) {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut idx = lo.to_vec();
    loop {
        f(&idx);
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if idx[d] < hi[d] {
                idx[d] += 1;
                for e in (d + 1)..n {
                    idx[e] = lo[e];
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// function specs

/// `q(x) = ½<Qx, x> + <b, x> + c`, so that `∇q = Qx + b` and `∇²q = Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPolynomial {
    pub q: SymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
}

impl QuadraticPolynomial {
    pub fn new(q: SymMatrix, b: Vec<f64>, c: f64) -> Result<Self> {
        if b.len() != q.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), got: b.len() });
        }
        Ok(Self { q, b, c })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x) + x.iter().zip(&self.b).map(|(a, b)| a * b).sum::<f64>() + self.c
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q.mul_vec(x).iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `σ |x|^β`
    RadialPower { sigma: f64, beta: f64 },
    /// `½<Qx, x> + <b, x> + c`
    Quadratic { q: Vec<Vec<f64>>, b: Vec<f64>, c: f64 },
    Sum { terms: Vec<FunctionSpec> },
    GridFile { path: PathBuf },
}

enum Compiled {
    Radial { sigma: f64, beta: f64 },
    Quadratic(QuadraticPolynomial),
    Sum(Vec<Compiled>),
    Grid(GridFunction),
}

impl Compiled {
    fn eval(&self, x: &[f64], flat: usize) -> f64 {
        match self {
            Compiled::Radial { sigma, beta } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r == 0.0 {
                    0.0
                } else {
                    sigma * r.powf(*beta)
                }
            }
            Compiled::Quadratic(q) => q.eval(x),
            Compiled::Sum(terms) => terms.iter().map(|t| t.eval(x, flat)).sum(),
            Compiled::Grid(g) => g.values[flat],
        }
    }
}

impl FunctionSpec {
    pub fn radial(sigma: f64, beta: f64) -> Self {
        FunctionSpec::RadialPower { sigma, beta }
    }

    pub fn quadratic(q: &SymMatrix, b: &[f64], c: f64) -> Self {
        FunctionSpec::Quadratic { q: q.to_rows(), b: b.to_vec(), c }
    }

    fn compile(&self, origin: &[f64], spacing: f64, dims: &[usize]) -> Result<Compiled> {
        let n = dims.len();
        Ok(match self {
            FunctionSpec::RadialPower { sigma, beta } => {
                if !(*beta > 0.0) || !beta.is_finite() || !sigma.is_finite() {
                    return Err(Error::InvalidSpec(format!("radial power needs finite σ and β > 0, got σ={sigma}, β={beta}")));
                }
                Compiled::Radial { sigma: *sigma, beta: *beta }
            }
            FunctionSpec::Quadratic { q, b, c } => {
                let q = SymMatrix::from_rows(q).map_err(|e| Error::InvalidSpec(format!("quadratic Q: {e}")))?;
                if q.dim() != n {
                    return Err(Error::InvalidSpec(format!("quadratic is {}-dimensional, grid is {n}", q.dim())));
                }
                Compiled::Quadratic(
                    QuadraticPolynomial::new(q, b.clone(), *c).map_err(|e| Error::InvalidSpec(e.to_string()))?,
                )
            }
            FunctionSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidSpec("empty sum".into()));
                }
                Compiled::Sum(terms.iter().map(|t| t.compile(origin, spacing, dims)).collect::<Result<_>>()?)
            }
            FunctionSpec::GridFile { path } => {
                let g = load_grid(path)?;
                let probe = GridFunction { dims: dims.to_vec(), origin: origin.to_vec(), spacing, values: vec![], strides: vec![] };
                if !g.same_lattice(&probe) {
                    return Err(Error::InvalidSpec(format!("grid file {} does not match the sampling lattice", path.display())));
                }
                Compiled::Grid(g)
            }
        })
    }
}

/// Exact pointwise evaluation of `spec` at the lattice points.
pub fn sample(spec: &FunctionSpec, origin: &[f64], spacing: f64, dims: &[usize]) -> Result<GridFunction> {
    check_lattice(origin, spacing, dims)?;
    let compiled = spec.compile(origin, spacing, dims)?;
    let strides = strides_for(dims);
    let len: usize = dims.iter().product();
    let values: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|flat| {
            let mut x = vec![0.0; dims.len()];
            let mut rem = flat;
            for d in 0..dims.len() {
                x[d] = origin[d] + spacing * (rem / strides[d]) as f64;
                rem %= strides[d];
            }
            compiled.eval(&x, flat)
        })
        .collect();
    if let Some(p) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(format!("sampled value at flat index {p}")));
    }
    GridFunction::new(origin.to_vec(), spacing, dims.to_vec(), values)
}

// ---------------------------------------------------------------------------
// mollification

/// Discrete bump kernel: flat offsets into a source grid and weights summing
/// to one.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub reach: usize,
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn new(u: &GridFunction, eps: f64) -> Result<Self> {
        let h = u.spacing;
        if !(eps >= MIN_EPS_CELLS * h * (1.0 - 1e-12)) {
            return Err(Error::EpsilonTooSmall { eps, min: MIN_EPS_CELLS * h });
        }
        let reach = (eps / h - 1e-9).ceil() as usize;
        let n = u.n();
        let lo = vec![0usize; n];
        let hi = vec![2 * reach; n];
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for_each_in_box(&lo, &hi, |m| {
            let mut s = 0.0;
            let mut off = 0isize;
            for d in 0..n {
                let k = m[d] as isize - reach as isize;
                let y = k as f64 * h / eps;
                s += y * y;
                off += k * u.strides[d] as isize;
            }
            let w = bump::profile(s).0;
            if w > 0.0 {
                offsets.push(off);
                weights.push(w);
            }
        });
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { reach, offsets, weights })
    }
}

/// Mollification on the inclusive index box `[lo, hi]` of `u`.
pub fn mollify_window(u: &GridFunction, eps: f64, lo: &[usize], hi: &[usize]) -> Result<GridFunction> {
    let kernel = Kernel::new(u, eps)?;
    let r = kernel.reach;
    let n = u.n();
    for d in 0..n {
        if lo[d] < r || hi[d] + r >= u.dims[d] || lo[d] > hi[d] {
            return Err(Error::GridTooSmall(format!(
                "mollification window {lo:?}..={hi:?} needs {r} cells of margin inside {:?}",
                u.dims
            )));
        }
    }
    let dims: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| b - a + 1).collect();
    if dims.iter().any(|&d| d < MIN_EXTENT) {
        return Err(Error::GridTooSmall(format!("mollified grid {dims:?} below extent {MIN_EXTENT}")));
    }
    let out_strides = strides_for(&dims);
    let len: usize = dims.iter().product();
    let values: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut src = 0usize;
            for d in 0..n {
                let i = rem / out_strides[d];
                rem %= out_strides[d];
                src += (lo[d] + i) * u.strides[d];
            }
            let base = src as isize;
            kernel
                .offsets
                .iter()
                .zip(&kernel.weights)
                .map(|(&o, &w)| w * u.values[(base + o) as usize])
                .sum()
        })
        .collect();
    GridFunction::new(u.point(lo), u.spacing, dims, values)
}

/// Mollification on the largest sub-grid whose kernel footprint fits.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<GridFunction> {
    let kernel = Kernel::new(u, eps)?;
    let r = kernel.reach;
    if u.dims.iter().any(|&d| d < 2 * r + MIN_EXTENT) {
        return Err(Error::GridTooSmall(format!("kernel reach {r} leaves no interior in {:?}", u.dims)));
    }
    let lo = vec![r; u.n()];
    let hi: Vec<usize> = u.dims.iter().map(|d| d - 1 - r).collect();
    mollify_window(u, eps, &lo, &hi)
}

// ---------------------------------------------------------------------------
// finite differences

fn check_stencil(u: &GridFunction, idx: &[usize]) -> Result<()> {
    if !u.is_interior(idx, 1) {
        return Err(Error::BoundaryViolation(idx.to_vec()));
    }
    Ok(())
}

/// Centred first differences at a flat index (no bounds check).
pub(crate) fn gradient_at_flat(u: &GridFunction, flat: usize) -> Vec<f64> {
    let h2 = 2.0 * u.spacing;
    u.strides.iter().map(|&s| (u.values[flat + s] - u.values[flat - s]) / h2).collect()
}

/// Centred second differences at a flat index (no bounds check).
pub(crate) fn hessian_at_flat(u: &GridFunction, flat: usize) -> SymMatrix {
    let n = u.n();
    let h = u.spacing;
    let v = &u.values;
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        let si = u.strides[i];
        for j in i..n {
            let e = if i == j {
                (v[flat + si] - 2.0 * v[flat] + v[flat - si]) / (h * h)
            } else {
                let sj = u.strides[j];
                (v[flat + si + sj] - v[flat + si - sj] - v[flat - si + sj] + v[flat - si - sj]) / (4.0 * h * h)
            };
            upper.push(e);
        }
    }
    SymMatrix::from_upper(n, upper).expect("finite grid values give finite differences")
}

pub fn gradient_fd(u: &GridFunction, idx: &[usize]) -> Result<Vec<f64>> {
    check_stencil(u, idx)?;
    Ok(gradient_at_flat(u, u.flat(idx)))
}

pub fn hessian_fd(u: &GridFunction, idx: &[usize]) -> Result<SymMatrix> {
    check_stencil(u, idx)?;
    Ok(hessian_at_flat(u, u.flat(idx)))
}

// ---------------------------------------------------------------------------
// file format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    n: usize,
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn to_json(&self) -> String {
        let file = GridFile {
            n: self.n(),
            dims: self.dims.clone(),
            origin: self.origin.clone(),
            spacing: self.spacing,
            values: self.values.clone(),
        };
        json::to_string(&file).expect("grid serialisation cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFile = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("grid file: {e}")))?;
        if file.n != file.dims.len() {
            return Err(Error::DimensionMismatch { expected: file.n, got: file.dims.len() });
        }
        Self::new(file.origin, file.spacing, file.dims, file.values)
    }
}

pub fn load_grid(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    GridFunction::from_json(&text)
}

pub fn save_grid(u: &GridFunction, path: &Path) -> Result<()> {
    std::fs::write(path, u.to_json())?;
    Ok(())
}
