//! Periodic grid on the flat 3-torus `[0, 2π)³` with central finite-difference
//! operators.
//!
//! Storage is row-major in `(i, j, k)` (`i` along `x¹`); vector fields store
//! their three components as separate scalar fields.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy of the central-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

impl TryFrom<u8> for StencilOrder {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(format!("stencil order must be 2 or 4, got {other}")),
        }
    }
}

impl From<StencilOrder> for u8 {
    fn from(o: StencilOrder) -> u8 {
        o.as_u8()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    order: StencilOrder,
}

impl Grid {
    pub const LENGTH: f64 = 2.0 * PI;

    pub fn new(n: usize, order: StencilOrder) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Config(format!("grid size must be even and >= 8, got {n}")));
        }
        Ok(Self {
            n,
            h: Self::LENGTH / n as f64,
            order,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn order(&self) -> StencilOrder {
        self.order
    }
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same resolution with a different stencil.
    pub fn with_order(&self, order: StencilOrder) -> Self {
        Self { order, ..*self }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.ijk(idx);
        [i as f64 * self.h, j as f64 * self.h, k as f64 * self.h]
    }

    pub fn zeros(&self) -> ScalarField {
        ScalarField::zeros(*self)
    }

    pub fn scalar_from_fn<F: Fn([f64; 3]) -> f64 + Sync>(&self, f: F) -> ScalarField {
        let values = (0..self.len()).into_par_iter().map(|idx| f(self.coords(idx))).collect();
        ScalarField { grid: *self, values }
    }

    pub fn vector_from_fn<F: Fn([f64; 3]) -> [f64; 3] + Sync>(&self, f: F) -> VectorField {
        let vals: Vec<[f64; 3]> = (0..self.len()).into_par_iter().map(|idx| f(self.coords(idx))).collect();
        VectorField::from_fn(*self, |idx| vals[idx])
    }

    /// `∂_axis f` for `axis ∈ {0, 1, 2}` (zero-based `x¹, x², x³`).
    pub fn partial(&self, f: &ScalarField, axis: usize) -> ScalarField {
        assert!(axis < 3, "axis must be 0, 1 or 2");
        assert_eq!(f.grid.n, self.n);
        let n = self.n;
        let h = self.h;
        let src = &f.values;
        let mut out = vec![0.0; self.len()];
        let stride = match axis {
            0 => n * n,
            1 => n,
            _ => 1,
        };
        let order = self.order;
        out.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
            for j in 0..n {
                for k in 0..n {
                    let pos = [i, j, k][axis];
                    let base = (i * n + j) * n + k;
                    let at = |off: isize| {
                        let p = (pos as isize + off).rem_euclid(n as isize) as usize;
                        src[base - pos * stride + p * stride]
                    };
                    plane[j * n + k] = match order {
                        StencilOrder::Second => (at(1) - at(-1)) / (2.0 * h),
                        StencilOrder::Fourth => {
                            (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
                        }
                    };
                }
            }
        });
        ScalarField { grid: *self, values: out }
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        VectorField {
            comps: [self.partial(f, 0), self.partial(f, 1), self.partial(f, 2)],
        }
    }

    /// `∂_a V^a`.
    pub fn flat_div(&self, v: &VectorField) -> ScalarField {
        let mut d = self.partial(&v.comps[0], 0);
        d.add_assign(&self.partial(&v.comps[1], 1));
        d.add_assign(&self.partial(&v.comps[2], 2));
        d
    }

    /// `(∇×V)^i = ε_{iab} ∂_a V^b`.
    pub fn flat_curl(&self, v: &VectorField) -> VectorField {
        let c0 = self.partial(&v.comps[2], 1).sub(&self.partial(&v.comps[1], 2));
        let c1 = self.partial(&v.comps[0], 2).sub(&self.partial(&v.comps[2], 0));
        let c2 = self.partial(&v.comps[1], 0).sub(&self.partial(&v.comps[0], 1));
        VectorField { comps: [c0, c1, c2] }
    }

    /// Jacobian `J[i][a] = ∂_a V^i`.
    pub fn jacobian(&self, v: &VectorField) -> [[ScalarField; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|a| self.partial(&v.comps[i], a)))
    }

    /// `δ^{ab} ∂_a ∂_b f`, composed from first-derivative stencils so that it
    /// commutes exactly with the other discrete operators.
    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let mut out = self.zeros();
        for a in 0..3 {
            out.add_assign(&self.partial(&self.partial(f, a), a));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "scalar field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.par_iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64 + Sync>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| s * a)
    }
    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(a, &b)| *a += b);
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    /// Discrete `L²(T³)` norm `sqrt(h³ Σ f²)`.
    pub fn l2_norm(&self) -> f64 {
        let h3 = self.grid.h.powi(3);
        (h3 * pairwise_sum_sq(&self.values)).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_field_csv(path, &self.grid, &["value"], |idx| vec![self.values[idx]])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub comps: [ScalarField; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            comps: std::array::from_fn(|_| ScalarField::zeros(grid)),
        }
    }

    pub fn constant(grid: Grid, value: [f64; 3]) -> Self {
        Self {
            comps: std::array::from_fn(|i| ScalarField::constant(grid, value[i])),
        }
    }

    pub fn from_components(comps: [ScalarField; 3]) -> Self {
        Self { comps }
    }

    pub fn from_fn<F: Fn(usize) -> [f64; 3]>(grid: Grid, f: F) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let v = f(idx);
            for (c, val) in out.comps.iter_mut().zip(v) {
                c.values[idx] = val;
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0].values[idx], self.comps[1].values[idx], self.comps[2].values[idx]]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].add(&other.comps[i])),
        }
    }
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].sub(&other.comps[i])),
        }
    }
    pub fn scale(&self, s: f64) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].scale(s)),
        }
    }
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].axpy(s, &other.comps[i])),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    /// Max over cells and components.
    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }

    /// `sqrt(h³ Σ_cells |V|²)`.
    pub fn l2_norm(&self) -> f64 {
        let h3 = self.grid().h.powi(3);
        let total: f64 = self.comps.iter().map(|c| pairwise_sum_sq(&c.values)).sum();
        (h3 * total).sqrt()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_field_csv(path, self.grid(), &["v1", "v2", "v3"], |idx| self.at(idx).to_vec())
    }
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, x| {
        if x.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

/// Pairwise (tree) summation of squares; the order of additions depends only
/// on the length of the slice.
pub fn pairwise_sum_sq(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        values.iter().map(|x| x * x).sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum_sq(&values[..mid]) + pairwise_sum_sq(&values[mid..])
    }
}

/// Write `i,j,k,<columns...>` rows for every cell.
fn write_field_csv<F: Fn(usize) -> Vec<f64>>(
    path: &Path,
    grid: &Grid,
    columns: &[&str],
    row: F,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "i,j,k,{}", columns.join(","))?;
    for idx in 0..grid.len() {
        let (i, j, k) = grid.ijk(idx);
        write!(out, "{i},{j},{k}")?;
        for v in row(idx) {
            write!(out, ",{v:e}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize, order: StencilOrder) -> Grid {
        Grid::new(n, order).unwrap()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(6, StencilOrder::Fourth).is_err());
        assert!(Grid::new(9, StencilOrder::Fourth).is_err());
        let g = grid(16, StencilOrder::Second);
        assert!((g.h() * 16.0 - Grid::LENGTH).abs() < 1e-15);
    }

    #[test]
    fn sine_derivative_fourth_order_n64() {
        let g = grid(64, StencilOrder::Fourth);
        let f = g.scalar_from_fn(|x| x[0].sin());
        let d = g.partial(&f, 0);
        let exact = g.scalar_from_fn(|x| x[0].cos());
        assert!(d.sub(&exact).sup_norm() <= 1e-5);
    }

    #[test]
    fn constant_has_zero_derivative_exactly() {
        let g = grid(16, StencilOrder::Fourth);
        let f = ScalarField::constant(g, 3.7);
        for a in 0..3 {
            assert!(g.partial(&f, a).values().iter().all(|&x| x == 0.0));
        }
    }

    fn derivative_error(n: usize, order: StencilOrder, axis: usize) -> f64 {
        let g = grid(n, order);
        let f = g.scalar_from_fn(|x| (x[axis] + 0.3).sin() * (1.0 + 0.2 * x[(axis + 1) % 3].cos()));
        let exact = g.scalar_from_fn(|x| (x[axis] + 0.3).cos() * (1.0 + 0.2 * x[(axis + 1) % 3].cos()));
        g.partial(&f, axis).sub(&exact).sup_norm()
    }

    #[test]
    fn derivative_convergence_ratios() {
        for axis in 0..3 {
            let r2 = derivative_error(16, StencilOrder::Second, axis) / derivative_error(32, StencilOrder::Second, axis);
            assert!((r2 - 4.0).abs() < 0.2, "order-2 ratio {r2}");
            let r4 = derivative_error(16, StencilOrder::Fourth, axis) / derivative_error(32, StencilOrder::Fourth, axis);
            assert!((r4 - 16.0).abs() < 1.0, "order-4 ratio {r4}");
        }
    }

    #[test]
    fn curl_of_shear_flow() {
        // V = (sin x², 0, 0): (∇×V)³ = ε₃₂₁ ∂₂V¹ = −cos x².
        let g = grid(32, StencilOrder::Fourth);
        let v = g.vector_from_fn(|x| [x[1].sin(), 0.0, 0.0]);
        let c = g.flat_curl(&v);
        assert_eq!(c.comps[0].sup_norm(), 0.0);
        assert_eq!(c.comps[1].sup_norm(), 0.0);
        let exact = g.scalar_from_fn(|x| -x[1].cos());
        assert!(c.comps[2].sub(&exact).sup_norm() < 1e-4);
    }

    fn random_field(g: Grid, seed: u64) -> ScalarField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(g, vals).unwrap()
    }

    #[test]
    fn discrete_identities_on_random_fields() {
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            let g = grid(16, order);
            let f = random_field(g, 1);
            let cg = g.flat_curl(&g.gradient(&f));
            assert!(cg.sup_norm() <= 1e-13, "curl grad {}", cg.sup_norm());
            let v = VectorField::from_components([random_field(g, 2), random_field(g, 3), random_field(g, 4)]);
            let dc = g.flat_div(&g.flat_curl(&v));
            assert!(dc.sup_norm() <= 1e-13, "div curl {}", dc.sup_norm());
        }
    }

    #[test]
    fn csv_layout() {
        let dir = tempdir();
        let g = grid(8, StencilOrder::Fourth);
        let f = g.scalar_from_fn(|x| x[0] + 10.0 * x[2]);
        let p = dir.join("run/rho_0.csv");
        f.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,k,value"));
        assert!(lines.next().unwrap().starts_with("0,0,0,"));
        assert!(lines.next().unwrap().starts_with("0,0,1,"));
        assert_eq!(text.lines().count(), 1 + 512);
        let v = VectorField::constant(g, [1.0, 2.0, 3.0]);
        let pv = dir.join("run/v_0.csv");
        v.write_csv(&pv).unwrap();
        let t2 = std::fs::read_to_string(&pv).unwrap();
        assert!(t2.starts_with("i,j,k,v1,v2,v3\n0,0,0,1e0,2e0,3e0\n"));
        std::fs::remove_dir_all(dir).ok();
    }

    fn tempdir() -> std::path::PathBuf {
        let p = std::env::temp_dir().join(format!("euler-geom-grid-{}", std::process::id()));
        std::fs::create_dir_all(&p).unwrap();
        p
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn operators_are_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, seed in 0u64..1000) {
            let g = grid(8, StencilOrder::Fourth);
            let f = random_field(g, seed);
            let h = random_field(g, seed + 7);
            let combo = f.scale(alpha).add(&h.scale(beta));
            for axis in 0..3 {
                let lhs = g.partial(&combo, axis);
                let rhs = g.partial(&f, axis).scale(alpha).add(&g.partial(&h, axis).scale(beta));
                prop_assert!(lhs.sub(&rhs).sup_norm() <= 1e-12);
            }
        }
    }
}
