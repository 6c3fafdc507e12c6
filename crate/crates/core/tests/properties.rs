use normflate::besov::{besov_norm, holder_norm, BesovParams};
use normflate::correlation::{compute_zt, compute_zt_many};
use normflate::gfs::{sample_real_gfs, StreamKey, VarianceProfile};
use normflate::solver::{self, antisym2, SolveConfig};
use normflate::spectral::{
    analyze, heat_semigroup, partial_derivative, pointwise_product, project_band, rotate, synthesize, SpectralField,
    TorusGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(dim: usize, radius: usize, seed: u64) -> SpectralField {
    let grid = TorusGrid::for_radius(dim, radius).unwrap();
    sample_real_gfs(&VarianceProfile::power(-1.0, radius as f64), grid, StreamKey::new(seed, 0)).unwrap()
}

/// Translation by `shift` grid cells of `2 pi / points` along the first axis.
fn translate(f: &SpectralField, shift: usize) -> SpectralField {
    let a = 2.0 * std::f64::consts::PI * shift as f64 / f.grid().points() as f64;
    f.map_modes(|k, c| c * Complex64::from_polar(1.0, -(k[0] as f64) * a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn heat_semigroup_composes_and_contracts(seed in any::<u64>(), s in 0.0..0.5f64, t in 0.0..0.5f64) {
        let f = field(2, 6, seed);
        let two = heat_semigroup(&heat_semigroup(&f, s).unwrap(), t).unwrap();
        let one = heat_semigroup(&f, s + t).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-13);
        prop_assert!(one.max_abs() <= f.max_abs() + 1e-15);
    }

    #[test]
    fn rotation_preserves_moduli_and_squares_to_minus_one(seed in any::<u64>()) {
        let f = field(2, 5, seed);
        let r = rotate(&f);
        r.ensure_real().unwrap();
        for (a, b) in f.coeffs().iter().zip(r.coeffs()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let rr = rotate(&r);
        let expected = f.map_modes(|k, c| if k[0] == 0 { c } else { -c });
        prop_assert!(rr.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn product_commutes_and_matches_point_values(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, g) = (field(1, 8, s1), field(1, 8, s2));
        let fg = pointwise_product(&f, &g).unwrap();
        prop_assert!(fg.max_abs_diff(&pointwise_product(&g, &f).unwrap()) < 1e-13);
        // The product of two radius-8 fields lives at radius 16.
        let wide = TorusGrid::for_radius(1, 16).unwrap();
        let (fw, gw) = (f.resized(wide.modes()).unwrap(), g.resized(wide.modes()).unwrap());
        let (pf, pg) = (synthesize(&fw), synthesize(&gw));
        let mut prod = pf.clone();
        for (p, q) in prod.component_mut(0).iter_mut().zip(pg.component(0)) {
            *p *= q;
        }
        let exact = analyze(&prod, wide).unwrap();
        let banded = project_band(&exact, 8.0).resized(f.grid().modes()).unwrap();
        prop_assert!(fg.max_abs_diff(&banded) < 1e-12);
    }

    #[test]
    fn derivative_satisfies_leibniz_on_band(s1 in any::<u64>(), s2 in any::<u64>()) {
        let wide = TorusGrid::for_radius(1, 12).unwrap();
        let f = field(1, 6, s1).resized(wide.modes()).unwrap();
        let g = field(1, 6, s2).resized(wide.modes()).unwrap();
        let lhs = partial_derivative(&pointwise_product(&f, &g).unwrap(), 0).unwrap();
        let rhs = &pointwise_product(&partial_derivative(&f, 0).unwrap(), &g).unwrap()
            + &pointwise_product(&f, &partial_derivative(&g, 0).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn besov_norm_is_a_norm(s1 in any::<u64>(), s2 in any::<u64>(), c in -3.0..3.0f64, alpha in -1.5..0.5f64) {
        let (f, g) = (field(1, 20, s1), field(1, 20, s2));
        for q in [1.0, 2.0, 4.0, f64::INFINITY] {
            let p = BesovParams::new(alpha, f64::INFINITY, q).unwrap();
            let (nf, ng) = (besov_norm(&f, &p).unwrap(), besov_norm(&g, &p).unwrap());
            let nsum = besov_norm(&(&f + &g), &p).unwrap();
            prop_assert!(nsum <= (nf + ng) * (1.0 + 1e-12));
            let scaled = besov_norm(&(&f * c), &p).unwrap();
            prop_assert!((scaled - c.abs() * nf).abs() <= 1e-12 * nf.max(1.0));
        }
    }

    #[test]
    fn besov_norm_decreases_in_q(seed in any::<u64>(), alpha in -1.0..0.5f64) {
        let f = field(2, 6, seed);
        let mut prev = f64::INFINITY;
        for q in [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY] {
            let n = besov_norm(&f, &BesovParams::new(alpha, f64::INFINITY, q).unwrap()).unwrap();
            prop_assert!(n <= prev * (1.0 + 1e-12));
            prev = n;
        }
    }

    #[test]
    fn gfs_samples_are_real_and_nested(seed in any::<u64>(), n in 2usize..16) {
        let big = field(2, 16, seed);
        big.ensure_real().unwrap();
        let grid = TorusGrid::for_radius(2, 16).unwrap();
        let small = sample_real_gfs(&VarianceProfile::power(-1.0, n as f64), grid, StreamKey::new(seed, 0)).unwrap();
        let cut = project_band(&big, n as f64);
        prop_assert_eq!(small.coeffs(), cut.coeffs());
    }

    #[test]
    fn zt_batch_matches_single(seed in any::<u64>(), t in 0.0..0.2f64) {
        let f = field(2, 7, seed);
        let many = compute_zt_many(&f, &[0.0, t]);
        prop_assert!((many[0] - compute_zt(&f, 0.0)).abs() <= 1e-12 * many[0].abs().max(1.0));
        prop_assert!((many[1] - compute_zt(&f, t)).abs() <= 1e-12 * many[1].abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solver_commutes_with_translations(seed in any::<u64>(), shift in 0usize..40) {
        let grid = TorusGrid::for_radius(1, 8).unwrap();
        let p = VarianceProfile::power(-2.0, 8.0);
        let u0 = SpectralField::from_components(&[
            sample_real_gfs(&p, grid, StreamKey::new(seed, 0)).unwrap(),
            sample_real_gfs(&p, grid, StreamKey::new(seed, 1)).unwrap(),
        ]).unwrap();
        let cfg = SolveConfig::new(0.05, 40);
        let a = solver::solve(&translate(&u0, shift), &antisym2(1), &cfg).unwrap();
        let b = solver::solve(&u0, &antisym2(1), &cfg).unwrap();
        prop_assert!(a.snapshots[0].max_abs_diff(&translate(&b.snapshots[0], shift)) < 1e-12);
    }

    #[test]
    fn holder_norm_of_heat_flow_does_not_grow(seed in any::<u64>(), t in 0.0..1.0f64) {
        // Exact contraction in the continuum; the slack covers sampling the sup on a grid.
        let f = field(1, 30, seed);
        let before = holder_norm(&f, -0.5).unwrap();
        let after = holder_norm(&heat_semigroup(&f, t).unwrap(), -0.5).unwrap();
        prop_assert!(after <= 1.1 * before);
    }
}
