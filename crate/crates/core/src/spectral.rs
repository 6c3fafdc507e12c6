//! Fourier representation of `E`-valued fields on the d-torus `R^d / 2 pi Z^d`.
//!
//! A field is stored by its Fourier coefficients `f^a_k = <f^a, e_k>` with
//! `e_k = exp(i <k, x>)` and the torus carrying normalized Lebesgue measure.
//! Wavenumbers live in the cube `{-K..K}^d`, `K = (M - 1) / 2`, stored
//! row-major with every axis ordered `-K..K`. Physical values are taken on a
//! uniform `G^d` grid with `G >= M`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Tolerance used when checking the reality condition `f_{-k} = conj(f_k)`.
pub const REALITY_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    modes: usize,
    points: usize,
}

impl TorusGrid {
    /// Grid with `modes` (odd) wavenumbers per axis. The physical grid
    /// defaults to the smallest FFT-friendly size with room for cubic
    /// products.
    pub fn new(dim: usize, modes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if modes % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be odd, got {modes}"
            )));
        }
        Ok(Self {
            dim,
            modes,
            points: fft::fast_len(2 * modes),
        })
    }

    /// Grid holding every wavenumber with `|k_i| <= radius`.
    pub fn for_radius(dim: usize, radius: usize) -> Result<Self> {
        Self::new(dim, 2 * radius + 1)
    }

    pub fn with_points(self, points: usize) -> Result<Self> {
        if points < self.modes {
            return Err(Error::InvalidGrid(format!(
                "{points} physical points cannot hold {} modes",
                self.modes
            )));
        }
        Ok(Self { points, ..self })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `K` such that the stored band is `{-K..K}^d`.
    pub fn half_width(&self) -> i64 {
        (self.modes as i64 - 1) / 2
    }

    /// Number of stored wavenumbers, `M^d`.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn physical_len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    /// Physical points needed so that products of `degree` band-limited
    /// factors are exact on the stored band.
    pub fn required_points(&self, degree: usize) -> usize {
        ((degree + 1) * self.modes).div_ceil(2)
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let kk = self.half_width();
        let mut idx = 0usize;
        for &c in k {
            if c < -kk || c > kk {
                return None;
            }
            idx = idx * self.modes + (c + kk) as usize;
        }
        Some(idx)
    }

    /// Index of `-k` given the index of `k`.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn wavenumber(&self, idx: usize) -> Vec<i64> {
        let mut k = vec![0; self.dim];
        self.fill_wavenumber(idx, &mut k);
        k
    }

    fn fill_wavenumber(&self, mut idx: usize, k: &mut [i64]) {
        let kk = self.half_width();
        for c in k.iter_mut().rev() {
            *c = (idx % self.modes) as i64 - kk;
            idx /= self.modes;
        }
    }

    /// Calls `f(index, k)` for every stored wavenumber in storage order.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[i64])) {
        let kk = self.half_width();
        let mut k = vec![-kk; self.dim];
        for idx in 0..self.len() {
            f(idx, &k);
            for c in k.iter_mut().rev() {
                if *c < kk {
                    *c += 1;
                    break;
                }
                *c = -kk;
            }
        }
    }

    /// `|k|^2` for every stored wavenumber.
    pub fn squared_norms(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_mode(|_, k| out.push(k.iter().map(|c| c * c).sum()));
        out
    }

    /// `k_axis` for every stored wavenumber.
    pub fn axis_wavenumbers(&self, axis: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_mode(|_, k| out.push(k[axis]));
        out
    }

    /// Position of each stored wavenumber in a `points^d` FFT array.
    fn fft_positions(&self, points: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let p = points as i64;
        self.for_each_mode(|_, k| {
            let mut pos = 0usize;
            for &c in k {
                pos = pos * points + c.rem_euclid(p) as usize;
            }
            out.push(pos);
        });
        out
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

/// `E`-valued field stored as Fourier coefficients, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    components: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid, components: usize) -> Self {
        Self {
            grid,
            components,
            coeffs: vec![Complex64::default(); grid.len() * components],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter("field needs at least one component".into()));
        }
        if coeffs.len() != grid.len() * components {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len() * components,
                coeffs.len()
            )));
        }
        Ok(Self {
            grid,
            components,
            coeffs,
        })
    }

    /// Spatially constant field with the given component values.
    pub fn constant(grid: TorusGrid, values: &[f64]) -> Self {
        let mut f = Self::zeros(grid, values.len());
        let zero = grid.len() / 2;
        for (a, &v) in values.iter().enumerate() {
            f.component_mut(a)[zero] = Complex64::new(v, 0.0);
        }
        f
    }

    /// Scalar real field `c e_k + conj(c) e_{-k}` (just `Re c` when `k = 0`).
    pub fn real_mode(grid: TorusGrid, k: &[i64], c: Complex64) -> Result<Self> {
        let idx = grid
            .index_of(k)
            .ok_or_else(|| Error::GridMismatch(format!("wavenumber {k:?} outside band")))?;
        let mut f = Self::zeros(grid, 1);
        let neg = grid.neg_index(idx);
        if neg == idx {
            f.coeffs[idx] = Complex64::new(c.re, 0.0);
        } else {
            f.coeffs[idx] = c;
            f.coeffs[neg] = c.conj();
        }
        Ok(f)
    }

    /// Stacks scalar fields into one `E`-valued field.
    pub fn from_components(parts: &[SpectralField]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("no components given".into()))?;
        let grid = first.grid;
        let mut coeffs = Vec::with_capacity(grid.len() * parts.len());
        for p in parts {
            check_same_grid(first, p)?;
            coeffs.extend_from_slice(&p.coeffs);
        }
        let components = coeffs.len() / grid.len();
        Self::from_coeffs(grid, components, coeffs)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, a: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.coeffs[a * n..(a + 1) * n]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.coeffs[a * n..(a + 1) * n]
    }

    /// Scalar field holding component `a`.
    pub fn component_field(&self, a: usize) -> Result<SpectralField> {
        if a >= self.components {
            return Err(Error::ComponentOutOfRange {
                component: a,
                components: self.components,
            });
        }
        Ok(Self {
            grid: self.grid,
            components: 1,
            coeffs: self.component(a).to_vec(),
        })
    }

    pub fn set_component(&mut self, a: usize, scalar: &SpectralField) -> Result<()> {
        if a >= self.components {
            return Err(Error::ComponentOutOfRange {
                component: a,
                components: self.components,
            });
        }
        if scalar.components != 1 || scalar.grid != self.grid {
            return Err(Error::GridMismatch("component must be a scalar field on the same grid".into()));
        }
        self.component_mut(a).copy_from_slice(&scalar.coeffs);
        Ok(())
    }

    pub fn coeff(&self, a: usize, k: &[i64]) -> Option<Complex64> {
        self.grid.index_of(k).map(|idx| self.component(a)[idx])
    }

    /// Largest `|f_{-k} - conj(f_k)|` over all components and modes.
    pub fn reality_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for a in 0..self.components {
            let c = self.component(a);
            for idx in 0..n {
                worst = worst.max((c[n - 1 - idx] - c[idx].conj()).norm());
            }
        }
        worst
    }

    pub fn ensure_real(&self) -> Result<()> {
        let scale = self.max_abs().max(1.0);
        let defect = self.reality_defect();
        if defect > REALITY_TOL * scale {
            return Err(Error::NotReal { defect });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid);
        assert_eq!(self.components, other.components);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Re-embeds the field into a cube of `modes` wavenumbers per axis,
    /// truncating or zero-padding as needed.
    pub fn resized(&self, modes: usize) -> Result<SpectralField> {
        let grid = TorusGrid::new(self.grid.dim, modes)?;
        let mut out = SpectralField::zeros(grid, self.components);
        let src_grid = self.grid;
        for a in 0..self.components {
            let src = self.component(a);
            let dst = out.component_mut(a);
            src_grid.for_each_mode(|idx, k| {
                if let Some(j) = grid.index_of(k) {
                    dst[j] = src[idx];
                }
            });
        }
        Ok(out)
    }

    pub fn with_grid_points(mut self, points: usize) -> Result<SpectralField> {
        self.grid = self.grid.with_points(points)?;
        Ok(self)
    }

    pub fn map_modes(&self, mut f: impl FnMut(&[i64], Complex64) -> Complex64) -> SpectralField {
        let mut out = self.clone();
        let n = self.grid.len();
        let mut ks = Vec::with_capacity(n);
        self.grid.for_each_mode(|_, k| ks.push(k.to_vec()));
        for a in 0..self.components {
            for (c, k) in out.component_mut(a).iter_mut().zip(&ks) {
                *c = f(k, *c);
            }
        }
        out
    }

    fn zip_with(&self, other: &SpectralField, f: impl Fn(Complex64, Complex64) -> Complex64) -> SpectralField {
        assert_eq!(self.grid.modes, other.grid.modes, "band mismatch");
        assert_eq!(self.grid.dim, other.grid.dim, "dimension mismatch");
        assert_eq!(self.components, other.components, "component mismatch");
        SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs: self.coeffs.iter().map(|c| c * rhs).collect(),
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// Point values of a field on the uniform `points^dim` grid,
/// component-major and row-major within each component.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub dim: usize,
    pub points: usize,
    pub components: usize,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn len_per_component(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn component(&self, a: usize) -> &[f64] {
        let n = self.len_per_component();
        &self.values[a * n..(a + 1) * n]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [f64] {
        let n = self.len_per_component();
        &mut self.values[a * n..(a + 1) * n]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinates of grid point `j` along one axis, `2 pi j / points`.
    pub fn coordinate(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.points as f64
    }
}

fn check_same_grid(f: &SpectralField, g: &SpectralField) -> Result<()> {
    if f.grid.dim != g.grid.dim || f.grid.modes != g.grid.modes {
        return Err(Error::GridMismatch(format!(
            "bands differ: {:?} vs {:?}",
            f.grid, g.grid
        )));
    }
    Ok(())
}

/// Complex point values of one component on a `points^d` grid.
pub(crate) fn synthesize_component_complex(
    coeffs: &[Complex64],
    grid: TorusGrid,
    points: usize,
) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); points.pow(grid.dim as u32)];
    for (c, pos) in coeffs.iter().zip(grid.fft_positions(points)) {
        buf[pos] = *c;
    }
    fft::inverse(&mut buf, points, grid.dim);
    buf
}

/// Real point values of one component (imaginary residue dropped).
pub(crate) fn synthesize_component(coeffs: &[Complex64], grid: TorusGrid, points: usize) -> Vec<f64> {
    synthesize_component_complex(coeffs, grid, points)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Band-limited coefficients of real point values on a `points^d` grid.
pub(crate) fn analyze_component(values: &[f64], grid: TorusGrid, points: usize) -> Vec<Complex64> {
    analyze_component_complex(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), grid, points)
}

pub(crate) fn analyze_component_complex(mut buf: Vec<Complex64>, grid: TorusGrid, points: usize) -> Vec<Complex64> {
    fft::forward(&mut buf, points, grid.dim);
    let scale = 1.0 / buf.len() as f64;
    grid.fft_positions(points)
        .into_iter()
        .map(|pos| buf[pos] * scale)
        .collect()
}

/// Cached transform between a band and a `points^d` grid for real fields.
/// Two real fields share one complex FFT.
#[derive(Clone, Debug)]
pub struct BandTransform {
    grid: TorusGrid,
    points: usize,
    positions: Vec<usize>,
}

impl BandTransform {
    pub fn new(grid: TorusGrid, points: usize) -> Result<Self> {
        if points < grid.modes {
            return Err(Error::InsufficientOversampling {
                required: grid.modes,
                actual: points,
            });
        }
        Ok(Self {
            grid,
            points,
            positions: grid.fft_positions(points),
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn physical_len(&self) -> usize {
        self.points.pow(self.grid.dim as u32)
    }

    /// Point values of real fields given by Hermitian coefficient slices.
    pub fn synthesize_reals(&self, coeffs: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(coeffs.len());
        for pair in coeffs.chunks(2) {
            let mut buf = vec![Complex64::default(); self.physical_len()];
            for (j, pos) in self.positions.iter().enumerate() {
                let im = pair.get(1).map_or(Complex64::default(), |g| g[j] * I);
                buf[*pos] = pair[0][j] + im;
            }
            fft::inverse(&mut buf, self.points, self.grid.dim);
            out.push(buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }

    /// Band coefficients of real point values.
    pub fn analyze_reals(&self, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let n = self.grid.len();
        let scale = 1.0 / self.physical_len() as f64;
        let mut out = Vec::with_capacity(values.len());
        for pair in values.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(x, y)| Complex64::new(*x, *y)).collect(),
                _ => pair[0].iter().map(|x| Complex64::new(*x, 0.0)).collect(),
            };
            fft::forward(&mut buf, self.points, self.grid.dim);
            let band: Vec<Complex64> = self.positions.iter().map(|p| buf[*p] * scale).collect();
            if pair.len() == 1 {
                out.push(band);
                continue;
            }
            let mut f = Vec::with_capacity(n);
            let mut g = Vec::with_capacity(n);
            for idx in 0..n {
                let h = band[idx];
                let hn = band[n - 1 - idx].conj();
                f.push((h + hn) * 0.5);
                g.push((h - hn) * Complex64::new(0.0, -0.5));
            }
            out.push(f);
            out.push(g);
        }
        out
    }
}

/// Point values on the field's own physical grid.
pub fn synthesize(field: &SpectralField) -> PhysicalField {
    synthesize_on(field, field.grid.points).expect("grid invariant guarantees points >= modes")
}

/// Point values `sum_k f^a_k exp(i <k, x_j>)` on a uniform `points^d` grid.
pub fn synthesize_on(field: &SpectralField, points: usize) -> Result<PhysicalField> {
    if points < field.grid.modes {
        return Err(Error::InsufficientOversampling {
            required: field.grid.modes,
            actual: points,
        });
    }
    let mut values = Vec::with_capacity(points.pow(field.grid.dim as u32) * field.components);
    for a in 0..field.components {
        values.extend(synthesize_component(field.component(a), field.grid, points));
    }
    Ok(PhysicalField {
        dim: field.grid.dim,
        points,
        components: field.components,
        values,
    })
}

/// Largest imaginary part of the synthesized values; zero up to rounding
/// for real fields.
pub fn imaginary_residue(field: &SpectralField) -> f64 {
    (0..field.components)
        .flat_map(|a| synthesize_component_complex(field.component(a), field.grid, field.grid.points))
        .fold(0.0, |m, z| m.max(z.im.abs()))
}

/// Fourier coefficients on `grid`'s band of the given point values.
pub fn analyze(values: &PhysicalField, grid: TorusGrid) -> Result<SpectralField> {
    if values.dim != grid.dim {
        return Err(Error::GridMismatch(format!(
            "values are {}-dimensional, grid is {}-dimensional",
            values.dim, grid.dim
        )));
    }
    if values.points < grid.modes {
        return Err(Error::GridMismatch(format!(
            "{} points cannot resolve {} modes",
            values.points, grid.modes
        )));
    }
    if values.values.len() != values.len_per_component() * values.components {
        return Err(Error::GridMismatch("value array has the wrong length".into()));
    }
    let mut coeffs = Vec::with_capacity(grid.len() * values.components);
    for a in 0..values.components {
        coeffs.extend(analyze_component(values.component(a), grid, values.points));
    }
    SpectralField::from_coeffs(grid, values.components, coeffs)
}

/// Heat flow `P_t`: multiplies `f_k` by `exp(-|k|^2 t)`.
pub fn heat_semigroup(field: &SpectralField, t: f64) -> Result<SpectralField> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(field.clone());
    }
    let factors: Vec<f64> = field
        .grid
        .squared_norms()
        .into_iter()
        .map(|k2| (-(k2 as f64) * t).exp())
        .collect();
    let mut out = field.clone();
    for a in 0..field.components {
        for (c, m) in out.component_mut(a).iter_mut().zip(&factors) {
            *c *= *m;
        }
    }
    Ok(out)
}

/// Spectral derivative along `axis` (0-based): `f_k -> i k_axis f_k`.
pub fn partial_derivative(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    field.grid.check_axis(axis)?;
    let ks = field.grid.axis_wavenumbers(axis);
    let mut out = field.clone();
    for a in 0..field.components {
        for (c, &k) in out.component_mut(a).iter_mut().zip(&ks) {
            *c *= I * k as f64;
        }
    }
    Ok(out)
}

/// Fourier truncation to the Euclidean ball `|k| <= radius`.
pub fn project_band(field: &SpectralField, radius: f64) -> SpectralField {
    let r2 = radius * radius;
    let k2 = field.grid.squared_norms();
    let mut out = field.clone();
    for a in 0..field.components {
        for (c, &n) in out.component_mut(a).iter_mut().zip(&k2) {
            if n as f64 > r2 {
                *c = Complex64::default();
            }
        }
    }
    out
}

/// Spatial mean of each component. Fails if the mean has a non-negligible
/// imaginary part.
pub fn zero_mode(field: &SpectralField) -> Result<Vec<f64>> {
    let zero = field.grid.len() / 2;
    (0..field.components)
        .map(|a| {
            let c = field.component(a)[zero];
            if c.im.abs() > REALITY_TOL * c.re.abs().max(1.0) {
                Err(Error::NotReal { defect: c.im.abs() })
            } else {
                Ok(c.re)
            }
        })
        .collect()
}

/// `xi - Pi_0 xi`.
pub fn remove_mean(field: &SpectralField) -> SpectralField {
    let zero = field.grid.len() / 2;
    let mut out = field.clone();
    for a in 0..field.components {
        out.component_mut(a)[zero] = Complex64::default();
    }
    out
}

/// Phase rotation on the first axis: `i xi_k` for `k_1 > 0`, `-i xi_k` for
/// `k_1 < 0`, unchanged for `k_1 = 0`. Applied to every component.
pub fn rotate(field: &SpectralField) -> SpectralField {
    rotate_about(field, 0).expect("axis 0 always exists")
}

/// Phase rotation keyed on the sign of `k_axis`.
pub fn rotate_about(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    field.grid.check_axis(axis)?;
    let ks = field.grid.axis_wavenumbers(axis);
    let mut out = field.clone();
    for a in 0..field.components {
        for (c, &k) in out.component_mut(a).iter_mut().zip(&ks) {
            *c = match k.signum() {
                1 => *c * I,
                -1 => *c * -I,
                _ => *c,
            };
        }
    }
    Ok(out)
}

/// Dealiased product of two scalar fields, truncated to the shared band.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    check_same_grid(f, g)?;
    if f.components != 1 || g.components != 1 {
        return Err(Error::InvalidParameter("pointwise_product takes scalar fields".into()));
    }
    let grid = f.grid;
    let required = grid.required_points(2);
    if grid.points < required {
        return Err(Error::InsufficientOversampling {
            required,
            actual: grid.points,
        });
    }
    let a = synthesize_component_complex(&f.coeffs, grid, grid.points);
    let b = synthesize_component_complex(&g.coeffs, grid, grid.points);
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    SpectralField::from_coeffs(grid, 1, analyze_component_complex(prod, grid, grid.points))
}
