//! Mild-form integrator for `du/dt = Laplace u + B(u, Du) + P(u)`.
//!
//! `B(u, Du) = sum_i B_i(u, d_i u)` with bilinear `B_i: E x E -> E` and `P` a
//! polynomial of degree at most 3, both given as coefficient tensors in a
//! fixed basis `{T^a}` of `E`. Products are formed pointwise on a grid large
//! enough that nothing aliases back into the band.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::holder_norm;
use crate::error::{Error, Result};
use crate::spectral::{heat_semigroup, BandTransform, SpectralField, TorusGrid};

/// Coefficient tensors of `B` and `P` for a `components`-dimensional `E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub name: String,
    /// Spatial dimension `d`, the number of `B_i`.
    pub dim: usize,
    pub components: usize,
    /// `b[((i * n + a) * n + b) * n + c]` is coordinate `c` of `B_i(T^a, T^b)`.
    pub b: Vec<f64>,
    pub p0: Vec<f64>,
    /// `p1[c * n + a]`.
    pub p1: Vec<f64>,
    /// `p2[(c * n + a) * n + b]`, symmetric in `(a, b)`.
    pub p2: Vec<f64>,
    /// `p3[((c * n + a) * n + b) * n + e]`, symmetric in `(a, b, e)`.
    pub p3: Vec<f64>,
}

impl NonlinearitySpec {
    pub fn zero(name: &str, dim: usize, components: usize) -> Self {
        let n = components;
        Self {
            name: name.to_string(),
            dim,
            components,
            b: vec![0.0; dim * n * n * n],
            p0: vec![0.0; n],
            p1: vec![0.0; n * n],
            p2: vec![0.0; n * n * n],
            p3: vec![0.0; n * n * n * n],
        }
    }

    fn bi(&self, i: usize, a: usize, b: usize, c: usize) -> usize {
        let n = self.components;
        ((i * n + a) * n + b) * n + c
    }

    pub fn b_coeff(&self, i: usize, a: usize, b: usize, c: usize) -> f64 {
        self.b[self.bi(i, a, b, c)]
    }

    pub fn add_b(&mut self, i: usize, a: usize, b: usize, c: usize, v: f64) {
        let idx = self.bi(i, a, b, c);
        self.b[idx] += v;
    }

    /// Adds `v * x_a x_b T^c` to `P`, keeping the tensor symmetric.
    pub fn add_p2(&mut self, c: usize, a: usize, b: usize, v: f64) {
        let n = self.components;
        self.p2[(c * n + a) * n + b] += v / 2.0;
        self.p2[(c * n + b) * n + a] += v / 2.0;
    }

    /// Adds `v * x_a x_b x_e T^c` to `P`, keeping the tensor symmetric.
    pub fn add_p3(&mut self, c: usize, a: usize, b: usize, e: usize, v: f64) {
        let n = self.components;
        for [x, y, z] in [[a, b, e], [a, e, b], [b, a, e], [b, e, a], [e, a, b], [e, b, a]] {
            self.p3[((c * n + x) * n + y) * n + z] += v / 6.0;
        }
    }

    /// `B_i(x, y)`.
    pub fn apply_b(&self, i: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.components;
        let mut out = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += self.b_coeff(i, a, b, c) * xy;
                }
            }
        }
        out
    }

    /// `P(x)`.
    pub fn apply_p(&self, x: &[f64]) -> Vec<f64> {
        let n = self.components;
        let mut out = self.p0.clone();
        for (c, o) in out.iter_mut().enumerate() {
            for a in 0..n {
                *o += self.p1[c * n + a] * x[a];
                for b in 0..n {
                    *o += self.p2[(c * n + a) * n + b] * x[a] * x[b];
                    for e in 0..n {
                        *o += self.p3[((c * n + a) * n + b) * n + e] * x[a] * x[b] * x[e];
                    }
                }
            }
        }
        out
    }

    /// Highest degree of the nonlinearity that must be dealiased.
    pub fn degree(&self) -> usize {
        if self.p3.iter().any(|v| *v != 0.0) {
            3
        } else if self.b.iter().chain(&self.p2).any(|v| *v != 0.0) {
            2
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.components;
        if n == 0 || self.dim == 0 {
            return Err(Error::InvalidParameter("nonlinearity needs d >= 1 and dim E >= 1".into()));
        }
        let lens = [
            (self.b.len(), self.dim * n * n * n),
            (self.p0.len(), n),
            (self.p1.len(), n * n),
            (self.p2.len(), n * n * n),
            (self.p3.len(), n * n * n * n),
        ];
        if lens.iter().any(|(a, b)| a != b) {
            return Err(Error::InvalidParameter("tensor sizes do not match d and dim E".into()));
        }
        let all = self.b.iter().chain(&self.p0).chain(&self.p1).chain(&self.p2).chain(&self.p3);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tensor entries must be finite".into()));
        }
        Ok(())
    }

    /// The same equation written in the basis `T'^{perm[a]} = T^a`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.components;
        let mut out = Self::zero(&self.name, self.dim, n);
        for i in 0..self.dim {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let v = self.b_coeff(i, a, b, c);
                        let idx = out.bi(i, perm[a], perm[b], perm[c]);
                        out.b[idx] = v;
                    }
                }
            }
        }
        for c in 0..n {
            out.p0[perm[c]] = self.p0[c];
            for a in 0..n {
                out.p1[perm[c] * n + perm[a]] = self.p1[c * n + a];
                for b in 0..n {
                    out.p2[(perm[c] * n + perm[a]) * n + perm[b]] = self.p2[(c * n + a) * n + b];
                    for e in 0..n {
                        out.p3[((perm[c] * n + perm[a]) * n + perm[b]) * n + perm[e]] =
                            self.p3[((c * n + a) * n + b) * n + e];
                    }
                }
            }
        }
        out
    }
}

/// Lie algebra used by the Yang-Mills presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    So3,
    Su2,
    Abelian(usize),
}

impl Algebra {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "so3" | "so(3)" => Ok(Algebra::So3),
            "su2" | "su(2)" => Ok(Algebra::Su2),
            _ => {
                if let Some(n) = s.strip_prefix("abelian") {
                    let n = n.trim_start_matches([':', '(']).trim_end_matches(')');
                    let n = if n.is_empty() { 1 } else { n.parse().map_err(|_| Error::InvalidParameter(format!("bad algebra `{s}`")))? };
                    return Ok(Algebra::Abelian(n));
                }
                Err(Error::InvalidParameter(format!("unknown Lie algebra `{s}`")))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Algebra::So3 | Algebra::Su2 => 3,
            Algebra::Abelian(n) => *n,
        }
    }

    /// `f[(alpha * n + beta) * n + gamma]` with `[e_alpha, e_beta] = f_{alpha beta gamma} e_gamma`.
    /// so(3) and su(2) share the basis with `[e_i, e_j] = eps_{ijk} e_k`.
    pub fn structure_constants(&self) -> Vec<f64> {
        let n = self.dim();
        let mut f = vec![0.0; n * n * n];
        if let Algebra::So3 | Algebra::Su2 = self {
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                f[(a * n + b) * n + c] = 1.0;
                f[(b * n + a) * n + c] = -1.0;
            }
        }
        f
    }

    pub fn is_abelian(&self) -> bool {
        self.structure_constants().iter().all(|v| *v == 0.0)
    }
}

/// Two-component equation with `B_1(x, y) = (x_1 y_2 - x_2 y_1) T^1` and
/// every other term zero.
pub fn antisym2(dim: usize) -> NonlinearitySpec {
    let mut s = NonlinearitySpec::zero("antisym2", dim, 2);
    s.add_b(0, 0, 1, 0, 1.0);
    s.add_b(0, 1, 0, 0, -1.0);
    s
}

/// `B_i(x, y) = x . y` componentwise: every `B_i` symmetric.
pub fn componentwise_product(dim: usize, components: usize) -> NonlinearitySpec {
    let mut s = NonlinearitySpec::zero("componentwise", dim, components);
    for i in 0..dim {
        for a in 0..components {
            s.add_b(i, a, a, a, 1.0);
        }
    }
    s
}

/// Yang-Mills heat flow with DeTurck term for `X = sum_j X^j dx^j`,
/// `X^j` in the algebra; basis index `j * dim_g + alpha`:
/// `dX^j/dt = Laplace X^j + sum_i [X^i, 2 d_i X^j - d_j X^i + [X^i, X^j]]`.
pub fn dym(dim: usize, algebra: Algebra) -> Result<NonlinearitySpec> {
    if algebra.is_abelian() {
        return Err(Error::InvalidParameter(
            "abelian algebra: every bracket vanishes and B is symmetric".into(),
        ));
    }
    let g = algebra.dim();
    let mut s = NonlinearitySpec::zero("dym", dim, dim * g);
    add_ym_terms(&mut s, dim, algebra);
    Ok(s)
}

fn add_ym_terms(s: &mut NonlinearitySpec, dim: usize, algebra: Algebra) {
    let g = algebra.dim();
    let f = algebra.structure_constants();
    let fc = |a: usize, b: usize, c: usize| f[(a * g + b) * g + c];
    let idx = |j: usize, alpha: usize| j * g + alpha;
    for m in 0..dim {
        for al in 0..g {
            for be in 0..g {
                for ga in 0..g {
                    let v = fc(al, be, ga);
                    if v == 0.0 {
                        continue;
                    }
                    // 2 [X^m, d_m X^j] dx^j
                    for j in 0..dim {
                        s.add_b(m, idx(m, al), idx(j, be), idx(j, ga), 2.0 * v);
                    }
                    // -[X^i, d_m X^i] dx^m
                    for i in 0..dim {
                        s.add_b(m, idx(i, al), idx(i, be), idx(m, ga), -v);
                    }
                }
            }
        }
    }
    // [X^i, [X^i, X^j]]^gamma = f_{alpha mu gamma} f_{beta nu mu} X^i_alpha X^i_beta X^j_nu
    for i in 0..dim {
        for j in 0..dim {
            for al in 0..g {
                for be in 0..g {
                    for nu in 0..g {
                        for mu in 0..g {
                            let inner = fc(be, nu, mu);
                            if inner == 0.0 {
                                continue;
                            }
                            for ga in 0..g {
                                let v = fc(al, mu, ga) * inner;
                                if v != 0.0 {
                                    s.add_p3(idx(j, ga), idx(i, al), idx(i, be), idx(j, nu), v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Yang-Mills-Higgs variant: `E = g^d + g` with an adjoint Higgs field `Phi`
/// at basis indices `d * dim_g + alpha`. Adds `2 [X^i, d_i Phi] + [X^i, [X^i, Phi]]`
/// to the Higgs equation, `-[Phi, d_j Phi] - [Phi, [X^j, Phi]]` to the `X^j`
/// equation and, when `higgs_cubic`, `-|Phi|^2 Phi`.
pub fn dymh(dim: usize, algebra: Algebra, higgs_cubic: bool) -> Result<NonlinearitySpec> {
    if algebra.is_abelian() {
        return Err(Error::InvalidParameter(
            "abelian algebra: every bracket vanishes and B is symmetric".into(),
        ));
    }
    let g = algebra.dim();
    let mut s = NonlinearitySpec::zero("dymh", dim, (dim + 1) * g);
    add_ym_terms(&mut s, dim, algebra);
    let f = algebra.structure_constants();
    let fc = |a: usize, b: usize, c: usize| f[(a * g + b) * g + c];
    let x = |j: usize, alpha: usize| j * g + alpha;
    let phi = |alpha: usize| dim * g + alpha;
    for al in 0..g {
        for be in 0..g {
            for ga in 0..g {
                let v = fc(al, be, ga);
                if v == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    s.add_b(i, x(i, al), phi(be), phi(ga), 2.0 * v);
                    s.add_b(i, phi(al), phi(be), x(i, ga), -v);
                }
            }
        }
    }
    for al in 0..g {
        for be in 0..g {
            for nu in 0..g {
                for mu in 0..g {
                    let inner = fc(be, nu, mu);
                    if inner == 0.0 {
                        continue;
                    }
                    for ga in 0..g {
                        let v = fc(al, mu, ga) * inner;
                        if v == 0.0 {
                            continue;
                        }
                        for i in 0..dim {
                            // [X^i, [X^i, Phi]]
                            s.add_p3(phi(ga), x(i, al), x(i, be), phi(nu), v);
                            // -[Phi, [X^j, Phi]]
                            s.add_p3(x(i, ga), phi(al), x(i, be), phi(nu), -v);
                        }
                    }
                }
            }
        }
    }
    if higgs_cubic {
        for ga in 0..g {
            for be in 0..g {
                s.add_p3(phi(ga), phi(be), phi(be), phi(ga), -1.0);
            }
        }
    }
    Ok(s)
}

/// Builds a named preset: `antisym2`, `dym` or `dymh` (`dymh` includes the
/// cubic Higgs term).
pub fn preset(name: &str, dim: usize, algebra: Algebra) -> Result<NonlinearitySpec> {
    match name {
        "antisym2" => Ok(antisym2(dim)),
        "product" => Ok(componentwise_product(dim, 2)),
        "zero" => Ok(NonlinearitySpec::zero("zero", dim, 2)),
        "dym" => dym(dim, algebra),
        "dymh" => dymh(dim, algebra, true),
        "dymh_noquartic" | "dymh-no-cubic" => dymh(dim, algebra, false),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Index triple with `B_axis(T^a, T^b) != B_axis(T^b, T^a)`, all 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub axis: usize,
    pub a: usize,
    pub b: usize,
}

/// First asymmetric triple in lexicographic `(axis, a, b)` order with
/// `a < b`, compared exactly.
pub fn asymmetry_witness(spec: &NonlinearitySpec) -> Option<Witness> {
    let n = spec.components;
    for axis in 0..spec.dim {
        for a in 0..n {
            for b in a + 1..n {
                if (0..n).any(|c| spec.b_coeff(axis, a, b, c) != spec.b_coeff(axis, b, a, c)) {
                    return Some(Witness { axis, a, b });
                }
            }
        }
    }
    None
}

/// First witness on a given axis.
pub fn asymmetry_witness_on(spec: &NonlinearitySpec, axis: usize) -> Option<Witness> {
    let n = spec.components;
    for a in 0..n {
        for b in a + 1..n {
            if (0..n).any(|c| spec.b_coeff(axis, a, b, c) != spec.b_coeff(axis, b, a, c)) {
                return Some(Witness { axis, a, b });
            }
        }
    }
    None
}

/// `B_axis(T^a, T^b) - B_axis(T^b, T^a)`.
pub fn drift_direction(spec: &NonlinearitySpec, w: Witness) -> Vec<f64> {
    (0..spec.components)
        .map(|c| spec.b_coeff(w.axis, w.a, w.b, c) - spec.b_coeff(w.axis, w.b, w.a, c))
        .collect()
}

/// Pointwise evaluation of `B(u, Du) + P(u)` on one band.
#[derive(Clone, Debug)]
pub struct Evaluator {
    grid: TorusGrid,
    components: usize,
    transform: BandTransform,
    axis_k: Vec<Vec<f64>>,
    derivs: Vec<(usize, usize)>,
    b_terms: Vec<(usize, usize, usize, f64)>,
    p0: Vec<f64>,
    p1_terms: Vec<(usize, usize, f64)>,
    p2_terms: Vec<(usize, usize, usize, f64)>,
    p3_terms: Vec<(usize, usize, usize, usize, f64)>,
}

impl Evaluator {
    /// Evaluator for `B(u, Du) + P(u)`, or just `B(u, Du)` when `include_p`
    /// is false. Fails if the grid cannot hold the products without aliasing.
    pub fn new(spec: &NonlinearitySpec, grid: TorusGrid, include_p: bool) -> Result<Self> {
        spec.validate()?;
        if spec.dim != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "nonlinearity is {}-dimensional, grid is {}-dimensional",
                spec.dim,
                grid.dim()
            )));
        }
        let n = spec.components;
        let degree = if include_p { spec.degree() } else { spec.degree().min(2) };
        let required = grid.required_points(degree);
        if grid.points() < required {
            return Err(Error::InsufficientOversampling {
                required,
                actual: grid.points(),
            });
        }
        let mut derivs = Vec::new();
        let mut b_terms = Vec::new();
        for i in 0..spec.dim {
            for b in 0..n {
                let mut used = false;
                for a in 0..n {
                    for c in 0..n {
                        let v = spec.b_coeff(i, a, b, c);
                        if v != 0.0 {
                            if !used {
                                derivs.push((i, b));
                                used = true;
                            }
                            b_terms.push((a, derivs.len() - 1, c, v));
                        }
                    }
                }
            }
        }
        let (mut p1_terms, mut p2_terms, mut p3_terms) = (Vec::new(), Vec::new(), Vec::new());
        let mut p0 = vec![0.0; n];
        if include_p {
            p0.clone_from(&spec.p0);
            for c in 0..n {
                for a in 0..n {
                    let v = spec.p1[c * n + a];
                    if v != 0.0 {
                        p1_terms.push((c, a, v));
                    }
                    for b in a..n {
                        let v = spec.p2[(c * n + a) * n + b] * if a == b { 1.0 } else { 2.0 };
                        if v != 0.0 {
                            p2_terms.push((c, a, b, v));
                        }
                        for e in b..n {
                            let mult = match (a == b, b == e) {
                                (true, true) => 1.0,
                                (false, false) => 6.0,
                                _ => 3.0,
                            };
                            let v = spec.p3[((c * n + a) * n + b) * n + e] * mult;
                            if v != 0.0 {
                                p3_terms.push((c, a, b, e, v));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            grid,
            components: n,
            transform: BandTransform::new(grid, grid.points())?,
            axis_k: (0..grid.dim())
                .map(|i| grid.axis_wavenumbers(i).into_iter().map(|k| k as f64).collect())
                .collect(),
            derivs,
            b_terms,
            p0,
            p1_terms,
            p2_terms,
            p3_terms,
        })
    }

    /// Returns the band coefficients of the nonlinearity (component-major)
    /// and the sup norm of `u` over the grid.
    pub fn eval_coeffs(&self, u: &[Complex64]) -> (Vec<Complex64>, f64) {
        let len = self.grid.len();
        let n = self.components;
        let comps: Vec<&[Complex64]> = (0..n).map(|a| &u[a * len..(a + 1) * len]).collect();
        let phys = self.transform.synthesize_reals(&comps);
        let sup = sup_euclidean(&phys);

        let deriv_coeffs: Vec<Vec<Complex64>> = self
            .derivs
            .iter()
            .map(|&(i, b)| {
                comps[b]
                    .iter()
                    .zip(&self.axis_k[i])
                    .map(|(c, k)| c * Complex64::new(0.0, *k))
                    .collect()
            })
            .collect();
        let refs: Vec<&[Complex64]> = deriv_coeffs.iter().map(|v| v.as_slice()).collect();
        let dphys = self.transform.synthesize_reals(&refs);

        let m = self.transform.physical_len();
        let mut out = vec![vec![0.0; m]; n];
        let mut touched = vec![false; n];
        for &(a, d, c, v) in &self.b_terms {
            touched[c] = true;
            for ((o, x), y) in out[c].iter_mut().zip(&phys[a]).zip(&dphys[d]) {
                *o += v * x * y;
            }
        }
        for (c, &v) in self.p0.iter().enumerate() {
            if v != 0.0 {
                touched[c] = true;
                out[c].iter_mut().for_each(|o| *o += v);
            }
        }
        for &(c, a, v) in &self.p1_terms {
            touched[c] = true;
            for (o, x) in out[c].iter_mut().zip(&phys[a]) {
                *o += v * x;
            }
        }
        for &(c, a, b, v) in &self.p2_terms {
            touched[c] = true;
            for ((o, x), y) in out[c].iter_mut().zip(&phys[a]).zip(&phys[b]) {
                *o += v * x * y;
            }
        }
        for &(c, a, b, e, v) in &self.p3_terms {
            touched[c] = true;
            for (((o, x), y), z) in out[c].iter_mut().zip(&phys[a]).zip(&phys[b]).zip(&phys[e]) {
                *o += v * x * y * z;
            }
        }

        let live: Vec<usize> = (0..n).filter(|&c| touched[c]).collect();
        let vals: Vec<&[f64]> = live.iter().map(|&c| out[c].as_slice()).collect();
        let spectra = self.transform.analyze_reals(&vals);
        let mut coeffs = vec![Complex64::default(); n * len];
        for (c, s) in live.iter().zip(spectra) {
            coeffs[c * len..(c + 1) * len].copy_from_slice(&s);
        }
        (coeffs, sup)
    }

    pub fn eval(&self, u: &SpectralField) -> Result<SpectralField> {
        if u.components() != self.components || u.grid().modes() != self.grid.modes() {
            return Err(Error::GridMismatch("field does not match the evaluator".into()));
        }
        let (c, _) = self.eval_coeffs(u.coeffs());
        SpectralField::from_coeffs(self.grid, self.components, c)
    }
}

fn sup_euclidean(phys: &[Vec<f64>]) -> f64 {
    let m = phys.first().map_or(0, |v| v.len());
    let mut sup = 0.0f64;
    for x in 0..m {
        let s: f64 = phys.iter().map(|p| p[x] * p[x]).sum();
        if s.is_nan() {
            return f64::NAN;
        }
        sup = sup.max(s);
    }
    sup.sqrt()
}

/// `B(u, Du) + P(u)` for a real field with enough oversampling.
pub fn evaluate_rhs_nonlinear(u: &SpectralField, spec: &NonlinearitySpec) -> Result<SpectralField> {
    Evaluator::new(spec, u.grid(), true)?.eval(u)
}

/// `N_t = B(P_t u0, D P_t u0)`.
pub fn picard_nonlinearity(u0: &SpectralField, t: f64, spec: &NonlinearitySpec) -> Result<SpectralField> {
    Evaluator::new(spec, u0.grid(), false)?.eval(&heat_semigroup(u0, t)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExponentialEuler,
    EtdRk2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub t_end: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub blowup_threshold: f64,
    /// Requested output times; each is rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
}

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e8;
pub const DEFAULT_STEP_CONSTANT: f64 = 0.5;

impl SolveConfig {
    pub fn new(t_end: f64, steps: usize) -> Self {
        Self {
            t_end,
            steps,
            scheme: Scheme::EtdRk2,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            snapshot_times: vec![t_end],
        }
    }

    /// Uniform steps of size at most `c / N^2` for data with energy at radius `N`.
    pub fn for_cutoff(t_end: f64, cutoff: f64, c: f64) -> Self {
        let h = c / (cutoff * cutoff).max(1.0);
        Self::new(t_end, (t_end / h).ceil().max(1.0) as usize)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("t_end = {} must be positive", self.t_end)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be positive".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidParameter("blow-up threshold must be positive".into()));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0) || *t > self.t_end * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter("snapshot times must lie in [0, t_end]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    BlewUp { t: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Snapshot times, strictly increasing.
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub status: Status,
    pub step: f64,
    /// `t_j = j h` for every step reached.
    pub path_times: Vec<f64>,
    /// `Pi_0 u_{t_j}`.
    pub zero_mode_path: Vec<Vec<f64>>,
    /// `Pi_0 (B(u, Du) + P(u))` at `t_j`.
    pub rhs_zero_mode: Vec<Vec<f64>>,
    /// Grid sup norm of `u_{t_j}`.
    pub sup_path: Vec<f64>,
}

impl Trajectory {
    /// `sup_t |Pi_0 u_t|` (Euclidean norm in `E`) over the recorded path.
    pub fn max_zero_mode(&self) -> f64 {
        self.zero_mode_path.iter().map(|z| norm(z)).fold(0.0, f64::max)
    }

    pub fn final_zero_mode(&self) -> &[f64] {
        self.zero_mode_path.last().map_or(&[], |v| v.as_slice())
    }

    pub fn completed(&self) -> bool {
        self.status == Status::Completed
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Integrates from `u0` to `config.t_end`.
pub fn solve(u0: &SpectralField, spec: &NonlinearitySpec, config: &SolveConfig) -> Result<Trajectory> {
    config.validate()?;
    if u0.components() != spec.components {
        return Err(Error::GridMismatch(format!(
            "initial data has {} components, nonlinearity expects {}",
            u0.components(),
            spec.components
        )));
    }
    u0.ensure_real()?;
    let grid = u0.grid();
    let evaluator = Evaluator::new(spec, grid, true)?;
    let h = config.step();
    let len = grid.len();
    let n = spec.components;
    let k2 = grid.squared_norms();
    let mut e = Vec::with_capacity(len);
    let mut f1 = Vec::with_capacity(len);
    let mut f2 = Vec::with_capacity(len);
    for &q in &k2 {
        let z = -(q as f64) * h;
        e.push(z.exp());
        f1.push(h * phi1(z));
        f2.push(h * phi2(z));
    }

    let mut snap_steps: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|t| ((t / h).round() as usize).min(config.steps))
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();
    let mut next_snap = 0;

    let zero = len / 2;
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        status: Status::Completed,
        step: h,
        path_times: Vec::with_capacity(config.steps + 1),
        zero_mode_path: Vec::with_capacity(config.steps + 1),
        rhs_zero_mode: Vec::with_capacity(config.steps + 1),
        sup_path: Vec::with_capacity(config.steps + 1),
    };
    let mut u = u0.coeffs().to_vec();
    for j in 0..=config.steps {
        let t = j as f64 * h;
        let (nu, sup) = evaluator.eval_coeffs(&u);
        if !sup.is_finite() || sup > config.blowup_threshold {
            traj.status = Status::BlewUp { t };
            break;
        }
        traj.path_times.push(t);
        traj.zero_mode_path.push((0..n).map(|a| u[a * len + zero].re).collect());
        traj.rhs_zero_mode.push((0..n).map(|a| nu[a * len + zero].re).collect());
        traj.sup_path.push(sup);
        if next_snap < snap_steps.len() && snap_steps[next_snap] == j {
            traj.times.push(t);
            traj.snapshots.push(SpectralField::from_coeffs(grid, n, u.clone())?);
            next_snap += 1;
        }
        if j == config.steps {
            break;
        }
        match config.scheme {
            Scheme::ExponentialEuler => {
                for (i, (x, nx)) in u.iter_mut().zip(&nu).enumerate() {
                    let m = i % len;
                    *x = e[m] * (*x + h * nx);
                }
            }
            Scheme::EtdRk2 => {
                let a: Vec<Complex64> = u
                    .iter()
                    .zip(&nu)
                    .enumerate()
                    .map(|(i, (x, nx))| {
                        let m = i % len;
                        e[m] * x + f1[m] * nx
                    })
                    .collect();
                let (na, _) = evaluator.eval_coeffs(&a);
                for (i, x) in u.iter_mut().enumerate() {
                    let m = i % len;
                    *x = a[i] + f2[m] * (na[i] - nu[i]);
                }
            }
        }
    }
    Ok(traj)
}

/// `|u_t - P_t u0 - I_t|_{C^beta_hat}` at every snapshot, with the spatially
/// constant drift `I_t` supplied by `drift`.
pub fn remainder(
    traj: &Trajectory,
    u0: &SpectralField,
    drift: impl Fn(f64) -> Vec<f64>,
    beta_hat: f64,
) -> Result<Vec<(f64, f64)>> {
    let zero = u0.grid().len() / 2;
    traj.times
        .iter()
        .zip(&traj.snapshots)
        .map(|(&t, u)| {
            let mut r = u - &heat_semigroup(u0, t)?;
            let i_t = drift(t);
            for (a, v) in i_t.iter().enumerate() {
                r.component_mut(a)[zero] -= Complex64::new(*v, 0.0);
            }
            Ok((t, holder_norm(&r, beta_hat)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize, zero_mode};

    fn grid1(modes: usize) -> TorusGrid {
        TorusGrid::new(1, modes).unwrap()
    }

    #[test]
    fn antisym2_tensor_values() {
        let s = antisym2(1);
        assert_eq!(s.apply_b(0, &[1.0, 0.0], &[0.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(s.apply_b(0, &[0.0, 1.0], &[1.0, 0.0]), vec![-1.0, 0.0]);
        assert_eq!(asymmetry_witness(&s), Some(Witness { axis: 0, a: 0, b: 1 }));
        assert_eq!(drift_direction(&s, Witness { axis: 0, a: 0, b: 1 }), vec![2.0, 0.0]);
        assert_eq!(asymmetry_witness(&antisym2(3)).unwrap().axis, 0);
        assert!(asymmetry_witness_on(&antisym2(3), 1).is_none());
    }

    #[test]
    fn symmetric_spec_has_no_witness() {
        assert_eq!(asymmetry_witness(&componentwise_product(3, 4)), None);
    }

    #[test]
    fn dym_has_witness_on_every_axis() {
        let s = dym(3, Algebra::So3).unwrap();
        assert_eq!(s.components, 9);
        for i in 0..3 {
            assert!(asymmetry_witness_on(&s, i).is_some(), "axis {i}");
        }
        let h = dymh(3, Algebra::So3, true).unwrap();
        assert_eq!(h.components, 12);
        for i in 0..3 {
            assert!(asymmetry_witness_on(&h, i).is_some());
        }
    }

    #[test]
    fn abelian_algebra_and_unknown_preset_rejected() {
        assert!(dym(3, Algebra::Abelian(2)).is_err());
        assert!(dymh(2, Algebra::Abelian(1), false).is_err());
        assert!(matches!(preset("nope", 1, Algebra::So3), Err(Error::UnknownPreset(_))));
        assert_eq!(Algebra::parse("abelian:4").unwrap(), Algebra::Abelian(4));
        assert_eq!(Algebra::parse("so3").unwrap(), Algebra::So3);
    }

    #[test]
    fn dym_b_matches_bracket_formula() {
        // B_m(X, Y) = sum_j 2 [X^m, Y^j] dx^j - sum_i [X^i, Y^i] dx^m, with so(3) brackets as cross products.
        let d = 3;
        let s = dym(d, Algebra::So3).unwrap();
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..9).map(|i| (i as f64 * 0.71 + 0.2).cos()).collect();
        let cross = |a: &[f64], b: &[f64]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        for m in 0..d {
            let got = s.apply_b(m, &x, &y);
            let mut want = vec![0.0; 9];
            for j in 0..d {
                let c = cross(&x[3 * m..3 * m + 3], &y[3 * j..3 * j + 3]);
                for g in 0..3 {
                    want[3 * j + g] += 2.0 * c[g];
                }
            }
            for i in 0..d {
                let c = cross(&x[3 * i..3 * i + 3], &y[3 * i..3 * i + 3]);
                for g in 0..3 {
                    want[3 * m + g] -= c[g];
                }
            }
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rhs_of_constant_is_zero_for_antisym2() {
        let g = grid1(9);
        let u = SpectralField::constant(g, &[1.5, -0.3]);
        assert_eq!(evaluate_rhs_nonlinear(&u, &antisym2(1)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rhs_of_cos_sin_is_unit_constant() {
        let g = grid1(9);
        let c = SpectralField::real_mode(g, &[1], Complex64::new(0.5, 0.0)).unwrap();
        let s = SpectralField::real_mode(g, &[1], Complex64::new(0.0, -0.5)).unwrap();
        let u = SpectralField::from_components(&[c, s]).unwrap();
        let v = synthesize(&u);
        for (j, x) in v.component(1).iter().enumerate() {
            assert!((x - v.coordinate(j).sin()).abs() < 1e-14);
        }
        let r = evaluate_rhs_nonlinear(&u, &antisym2(1)).unwrap();
        let expected = SpectralField::constant(g, &[1.0, 0.0]);
        assert!(r.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn antisym2_rhs_is_linear_in_second_component() {
        // B_1(u, d_1 u)^1 = u_1 d u_2 - u_2 d u_1 is linear in u_2 for fixed u_1.
        let g = grid1(15);
        let s = antisym2(1);
        let mk = |k: i64, c: f64| SpectralField::real_mode(g, &[k], Complex64::new(c, 0.3 * c)).unwrap();
        let u1 = mk(2, 0.4);
        let (v, w) = (mk(3, 0.2), mk(1, -0.7));
        let rhs = |second: SpectralField| {
            evaluate_rhs_nonlinear(&SpectralField::from_components(&[u1.clone(), second]).unwrap(), &s).unwrap()
        };
        let sum = &rhs(v.clone()) + &rhs(w.clone());
        assert!(rhs(&v + &w).max_abs_diff(&sum) < 1e-12);
    }

    #[test]
    fn evaluator_rejects_aliasing_grid() {
        let g = grid1(9).with_points(12).unwrap();
        assert!(matches!(
            Evaluator::new(&antisym2(1), g, true),
            Err(Error::InsufficientOversampling { .. })
        ));
        let cubic = dym(2, Algebra::So3).unwrap();
        assert_eq!(cubic.degree(), 3);
        let g = TorusGrid::new(2, 9).unwrap().with_points(15).unwrap();
        assert!(Evaluator::new(&cubic, g, true).is_err());
        assert!(Evaluator::new(&cubic, g, false).is_ok());
    }

    #[test]
    fn linear_flow_is_exact() {
        let g = TorusGrid::new(2, 9).unwrap();
        let mut u0 = SpectralField::real_mode(g, &[2, -1], Complex64::new(0.3, 0.4)).unwrap();
        u0 = &u0 + &SpectralField::real_mode(g, &[0, 3], Complex64::new(-0.2, 0.1)).unwrap();
        let spec = NonlinearitySpec::zero("zero", 2, 1);
        for steps in [1, 7, 50] {
            for scheme in [Scheme::ExponentialEuler, Scheme::EtdRk2] {
                let cfg = SolveConfig::new(0.3, steps).with_scheme(scheme);
                let tr = solve(&u0, &spec, &cfg).unwrap();
                let exact = heat_semigroup(&u0, 0.3).unwrap();
                assert!(tr.snapshots[0].max_abs_diff(&exact) < 1e-10);
            }
        }
    }

    #[test]
    fn blowup_is_detected() {
        // du/dt = u^2 from u = 1 blows up at t = 1.
        let g = grid1(3);
        let mut spec = NonlinearitySpec::zero("riccati", 1, 1);
        spec.add_p2(0, 0, 0, 1.0);
        let u0 = SpectralField::constant(g, &[1.0]);
        let cfg = SolveConfig::new(2.0, 20000);
        let tr = solve(&u0, &spec, &cfg).unwrap();
        match tr.status {
            Status::BlewUp { t } => assert!(t > 0.99 && t < 1.01, "t = {t}"),
            Status::Completed => panic!("expected blow-up"),
        }
        assert!(tr.snapshots.is_empty());
    }

    #[test]
    fn snapshots_round_to_steps() {
        let g = grid1(5);
        let spec = NonlinearitySpec::zero("zero", 1, 1);
        let u0 = SpectralField::constant(g, &[1.0]);
        let cfg = SolveConfig::new(1.0, 10).with_snapshots(vec![0.0, 0.26, 0.31, 1.0]);
        let tr = solve(&u0, &spec, &cfg).unwrap();
        assert_eq!(tr.times.len(), 3);
        assert!((tr.times[1] - 0.3).abs() < 1e-15);
        assert_eq!(tr.path_times.len(), 11);
        assert!(solve(&u0, &spec, &SolveConfig::new(-1.0, 10)).is_err());
    }

    #[test]
    fn picard_term_of_zero_spec_vanishes_and_matches_rhs() {
        let g = grid1(17);
        let c = SpectralField::real_mode(g, &[3], Complex64::new(0.5, 0.1)).unwrap();
        let s = SpectralField::real_mode(g, &[2], Complex64::new(-0.2, 0.4)).unwrap();
        let u0 = SpectralField::from_components(&[c, s]).unwrap();
        let zero = NonlinearitySpec::zero("zero", 1, 2);
        assert_eq!(picard_nonlinearity(&u0, 0.1, &zero).unwrap().max_abs(), 0.0);
        let n = picard_nonlinearity(&u0, 0.1, &antisym2(1)).unwrap();
        let direct = evaluate_rhs_nonlinear(&heat_semigroup(&u0, 0.1).unwrap(), &antisym2(1)).unwrap();
        assert!(n.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn picard_term_two_mode_closed_form() {
        // u0 = (cos 3x, sin 2x): N_t^1 = u1 d u2 - u2 d u1
        //   = e^{-13t} (2 cos 3x cos 2x + 3 sin 2x sin 3x)
        //   = e^{-13t} (5/2 cos x - 1/2 cos 5x).
        let g = grid1(17);
        let c = SpectralField::real_mode(g, &[3], Complex64::new(0.5, 0.0)).unwrap();
        let s = SpectralField::real_mode(g, &[2], Complex64::new(0.0, -0.5)).unwrap();
        let u0 = SpectralField::from_components(&[c, s]).unwrap();
        let t = 0.05;
        let n = picard_nonlinearity(&u0, t, &antisym2(1)).unwrap();
        let e = (-13.0 * t).exp();
        assert!((n.coeff(0, &[1]).unwrap() - 1.25 * e).norm() < 1e-13);
        assert!((n.coeff(0, &[5]).unwrap() + 0.25 * e).norm() < 1e-13);
        assert!(n.component(1).iter().all(|z| z.norm() == 0.0));
        assert!(zero_mode(&n).unwrap().iter().all(|z| z.abs() < 1e-15));
    }

    #[test]
    fn remainder_vanishes_for_linear_flow() {
        let g = grid1(17);
        let u0 = SpectralField::real_mode(g, &[4], Complex64::new(0.5, 0.2)).unwrap();
        let spec = NonlinearitySpec::zero("zero", 1, 1);
        let cfg = SolveConfig::new(0.1, 10).with_snapshots(vec![0.0, 0.05, 0.1]);
        let tr = solve(&u0, &spec, &cfg).unwrap();
        let r = remainder(&tr, &u0, |_| vec![0.0], -0.3).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|(_, v)| *v < 1e-12));
    }
}
