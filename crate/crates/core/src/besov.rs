//! Littlewood-Paley blocks and Besov norms of band-limited fields.
//!
//! The partition is built from one radial bump `chi_{-1}` equal to 1 on
//! `|xi| <= 3/4` and vanishing for `|xi| >= 4/3`; the annulus bump is
//! `chi(xi) = chi_{-1}(xi / 2) - chi_{-1}(xi)`, so partial sums telescope and
//! the blocks add up to the identity exactly.
//!
//! `L^p` norms of `E`-valued blocks use the pointwise Euclidean norm in `E`
//! and are taken on an oversampled physical grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::{synthesize_component, SpectralField, TorusGrid};

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

fn phi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 1 for `x <= 1`, 0 for `x >= 2`.
pub fn smooth_step(x: f64) -> f64 {
    let a = phi(2.0 - x);
    let b = phi(x - 1.0);
    a / (a + b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DyadicPartition;

impl DyadicPartition {
    /// `chi_{-1}` at radius `r`.
    pub fn chi_low(&self, r: f64) -> f64 {
        smooth_step(1.0 + (r - INNER) / (OUTER - INNER))
    }

    /// `chi` at radius `r`.
    pub fn chi(&self, r: f64) -> f64 {
        self.chi_low(r / 2.0) - self.chi_low(r)
    }

    /// `chi_ell` at radius `r`, `ell >= -1`.
    pub fn chi_l(&self, ell: i32, r: f64) -> f64 {
        if ell < 0 {
            self.chi_low(r)
        } else {
            self.chi(r / 2f64.powi(ell))
        }
    }

    /// Largest `ell` whose block can meet the band of `grid`.
    pub fn max_block(&self, grid: TorusGrid) -> i32 {
        let rmax = grid.half_width() as f64 * (grid.dim() as f64).sqrt();
        let mut ell = -1;
        while INNER * 2f64.powi(ell + 1) < rmax {
            ell += 1;
        }
        ell
    }
}

/// `Delta_ell f`.
pub fn lp_block(field: &SpectralField, ell: i32) -> SpectralField {
    assert!(ell >= -1, "blocks start at -1");
    let partition = DyadicPartition;
    let weights: Vec<f64> = field
        .grid()
        .squared_norms()
        .into_iter()
        .map(|k2| partition.chi_l(ell, (k2 as f64).sqrt()))
        .collect();
    let mut out = field.clone();
    for a in 0..field.components() {
        for (c, w) in out.component_mut(a).iter_mut().zip(&weights) {
            *c *= *w;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        let s = Self { alpha, p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn holder(alpha: f64) -> Self {
        Self {
            alpha,
            p: f64::INFINITY,
            q: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !(self.q >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Besov exponents need p, q >= 1 and finite alpha (got p={}, q={}, alpha={})",
                self.p, self.q, self.alpha
            )));
        }
        Ok(())
    }
}

/// `|Delta_ell f|_{L^p}` for one block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub ell: i32,
    pub lp: f64,
}

impl BlockNorm {
    pub fn weighted(&self, alpha: f64) -> f64 {
        2f64.powf(alpha * self.ell as f64) * self.lp
    }
}

/// Physical grid used for block norms: four-fold oversampling in d <= 2,
/// two-fold above, where a `4M` grid would not fit in memory.
pub fn default_points(grid: TorusGrid) -> usize {
    let factor = if grid.dim() <= 2 { 4 } else { 2 };
    fft::fast_len(factor * grid.modes())
}

/// `L^p` norms of every nonzero-capable block, on a `points^d` grid.
pub fn block_norms_on(field: &SpectralField, p: f64, points: usize) -> Result<Vec<BlockNorm>> {
    let grid = field.grid();
    if points < grid.modes() {
        return Err(Error::InsufficientOversampling {
            required: grid.modes(),
            actual: points,
        });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
    }
    let partition = DyadicPartition;
    let radii: Vec<f64> = grid.squared_norms().into_iter().map(|k2| (k2 as f64).sqrt()).collect();
    let mut out = Vec::new();
    let mut block = vec![Complex64::default(); grid.len()];
    for ell in -1..=partition.max_block(grid) {
        let weights: Vec<f64> = radii.iter().map(|&r| partition.chi_l(ell, r)).collect();
        let mut magnitude_sq = vec![0.0; points.pow(grid.dim() as u32)];
        let mut any = false;
        for a in 0..field.components() {
            let src = field.component(a);
            let mut nonzero = false;
            for ((b, c), w) in block.iter_mut().zip(src).zip(&weights) {
                *b = c * w;
                nonzero |= *w != 0.0 && c.norm_sqr() > 0.0;
            }
            if !nonzero {
                continue;
            }
            any = true;
            for (m, v) in magnitude_sq.iter_mut().zip(synthesize_component(&block, grid, points)) {
                *m += v * v;
            }
        }
        let lp = if any { lp_norm(&magnitude_sq, p) } else { 0.0 };
        out.push(BlockNorm { ell, lp });
    }
    Ok(out)
}

pub fn block_norms(field: &SpectralField, p: f64) -> Result<Vec<BlockNorm>> {
    block_norms_on(field, p, default_points(field.grid()))
}

/// `L^p` norm under normalized measure, from squared pointwise magnitudes.
fn lp_norm(magnitude_sq: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return magnitude_sq.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt();
    }
    let n = magnitude_sq.len() as f64;
    (magnitude_sq.iter().map(|v| v.powf(p / 2.0)).sum::<f64>() / n).powf(1.0 / p)
}

/// `(sum_ell (2^{alpha ell} b_ell)^q)^{1/q}`, or the supremum for `q = inf`.
pub fn aggregate(blocks: &[BlockNorm], alpha: f64, q: f64) -> f64 {
    let weighted = blocks.iter().map(|b| b.weighted(alpha));
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|w| w.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

pub fn besov_norm(field: &SpectralField, params: &BesovParams) -> Result<f64> {
    params.validate()?;
    Ok(aggregate(&block_norms(field, params.p)?, params.alpha, params.q))
}

pub fn besov_norm_on(field: &SpectralField, params: &BesovParams, points: usize) -> Result<f64> {
    params.validate()?;
    Ok(aggregate(&block_norms_on(field, params.p, points)?, params.alpha, params.q))
}

/// `|f|_{C^alpha} = |f|_{B^alpha_{inf,inf}}`.
pub fn holder_norm(field: &SpectralField, alpha: f64) -> Result<f64> {
    besov_norm(field, &BesovParams::holder(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::remove_mean;

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(0.5), 1.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 0.0);
        assert!((smooth_step(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn supports() {
        let p = DyadicPartition;
        for i in 0..4000 {
            let r = i as f64 * 1e-3;
            let low = p.chi_low(r);
            let ann = p.chi(r);
            assert!((0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&ann));
            if r >= 4.0 / 3.0 {
                assert_eq!(low, 0.0);
            }
            if r <= 0.75 {
                assert_eq!(low, 1.0);
                assert_eq!(ann, 0.0);
            }
            if r >= 8.0 / 3.0 {
                assert_eq!(ann, 0.0);
            }
        }
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let p = DyadicPartition;
        let g = TorusGrid::new(3, 41).unwrap();
        let top = p.max_block(g);
        for k2 in g.squared_norms() {
            let r = (k2 as f64).sqrt();
            let vals: Vec<f64> = (-1..=top).map(|l| p.chi_l(l, r)).collect();
            assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let nz: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] != 0.0).collect();
            assert!(nz.len() <= 2);
            if nz.len() == 2 {
                assert_eq!(nz[1], nz[0] + 1);
            }
        }
    }

    #[test]
    fn blocks_of_constant_and_single_mode() {
        let g = TorusGrid::new(2, 33).unwrap();
        let c = SpectralField::constant(g, &[2.0]);
        assert_eq!(lp_block(&c, -1), c);
        for ell in 0..4 {
            assert_eq!(lp_block(&c, ell).max_abs(), 0.0);
        }
        let k = [5, 3];
        let e = SpectralField::real_mode(g, &k, Complex64::new(1.0, 0.0)).unwrap();
        let r = 34f64.sqrt();
        for ell in -1..6 {
            let b = lp_block(&e, ell);
            let expected = DyadicPartition.chi_l(ell, r);
            assert!((b.coeff(0, &k).unwrap().re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn blocks_sum_to_field() {
        let g = TorusGrid::new(2, 21).unwrap();
        let f = SpectralField::from_coeffs(
            g,
            1,
            (0..g.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect(),
        )
        .unwrap();
        let mut sum = SpectralField::zeros(g, 1);
        for ell in -1..=DyadicPartition.max_block(g) {
            sum = &sum + &lp_block(&f, ell);
        }
        assert!(sum.max_abs_diff(&f) < 1e-10);
        assert_eq!(lp_block(&f, DyadicPartition.max_block(g) + 1).max_abs(), 0.0);
    }

    #[test]
    fn constant_norm_is_weighted_low_block() {
        let g = TorusGrid::new(1, 33).unwrap();
        let c = SpectralField::constant(g, &[-3.0]);
        for &(alpha, p, q) in &[(0.0, 1.0, 1.0), (0.5, 2.0, f64::INFINITY), (-0.7, f64::INFINITY, 3.0)] {
            let n = besov_norm(&c, &BesovParams::new(alpha, p, q).unwrap()).unwrap();
            assert!((n - 3.0 * 2f64.powf(-alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cosine_closed_form() {
        let g = TorusGrid::new(1, 65).unwrap();
        let c = 1.7;
        for k in [1i64, 3, 6, 11, 23] {
            let f = SpectralField::real_mode(g, &[k], Complex64::new(c / 2.0, 0.0)).unwrap();
            for &(alpha, q) in &[(-0.5, f64::INFINITY), (0.3, 2.0), (-1.0, 1.0)] {
                let weighted: Vec<f64> = (-1..=DyadicPartition.max_block(g))
                    .map(|l| 2f64.powf(alpha * l as f64) * DyadicPartition.chi_l(l, k as f64))
                    .collect();
                let expected = c * if q.is_infinite() {
                    weighted.iter().cloned().fold(0.0, f64::max)
                } else {
                    weighted.iter().map(|w| w.powf(q)).sum::<f64>().powf(1.0 / q)
                };
                let n = besov_norm(&f, &BesovParams::new(alpha, f64::INFINITY, q).unwrap()).unwrap();
                assert!((n - expected).abs() < 1e-12 * expected.max(1.0), "k={k} alpha={alpha}");
            }
        }
    }

    #[test]
    fn invalid_exponents_rejected() {
        assert!(BesovParams::new(0.0, 0.5, 1.0).is_err());
        assert!(BesovParams::new(0.0, 1.0, 0.0).is_err());
        assert!(BesovParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn holder_is_infinite_exponent_besov() {
        let g = TorusGrid::new(1, 33).unwrap();
        let f = remove_mean(&SpectralField::real_mode(g, &[7], Complex64::new(0.4, 0.2)).unwrap());
        let h = holder_norm(&f, -0.5).unwrap();
        let b = besov_norm(&f, &BesovParams::new(-0.5, f64::INFINITY, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(h, b);
    }
}
