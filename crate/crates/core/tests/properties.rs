use grading_lab::dense::{op_norm, realize, realize_monomial, sector_decompose, gauge_unitary, ChainSpec, DenseOperator, GaugeProject};
use grading_lab::dressing::{dressed_matrix_unit, dressed_weyl};
use grading_lab::dynamics::{build_hamiltonian, heisenberg_evolve, QuadraticModel};
use grading_lab::one_particle::{evolve, fractional_shift, Hopping, OneParticleVector};
use grading_lab::{AlgebraElement, GradingParams, WeylMonomial, C64};
use proptest::prelude::*;
use std::sync::OnceLock;

fn monomial(d: u32, len: i64) -> impl Strategy<Value = WeylMonomial> {
    (
        prop::collection::vec((0..len, 0..d as i64, 0..d as i64), 0..=len as usize),
        0..2 * d as i64,
    )
        .prop_map(move |(labels, q)| {
            let mut sites: Vec<(i64, i64, i64)> = Vec::new();
            for (x, k, l) in labels {
                if !sites.iter().any(|s| s.0 == x) {
                    sites.push((x, k, l));
                }
            }
            WeylMonomial::from_labels(d, sites, q).unwrap()
        })
}

fn any_d_monomial(len: i64) -> impl Strategy<Value = (u32, WeylMonomial, WeylMonomial)> {
    (2u32..=5).prop_flat_map(move |d| (Just(d), monomial(d, len), monomial(d, len)))
}

fn element(d: u32, len: i64) -> impl Strategy<Value = AlgebraElement> {
    prop::collection::vec((monomial(d, len), -1.0..1.0f64, -1.0..1.0f64), 1..4).prop_map(move |terms| {
        terms.into_iter().fold(AlgebraElement::zero(d), |acc, (m, re, im)| {
            acc.add(&AlgebraElement::from_scaled(&m, C64::new(re, im))).unwrap()
        })
    })
}

fn chain35() -> ChainSpec {
    ChainSpec::new(3, 5).unwrap()
}

fn model35() -> &'static QuadraticModel {
    static M: OnceLock<QuadraticModel> = OnceLock::new();
    M.get_or_init(|| {
        let chain = chain35();
        let p = GradingParams::new(3, 1, 0).unwrap();
        let h = Hopping::new([(-1, C64::new(0.4, -0.2)), (1, C64::new(0.4, 0.2)), (2, C64::new(0.1, 0.0)), (-2, C64::new(0.1, 0.0))]).unwrap();
        build_hamiltonian(&h, &p, &chain).unwrap()
    })
}

fn vector(d: u32, n: usize) -> impl Strategy<Value = OneParticleVector> {
    prop::collection::vec((0..n as i64, 0..d as i64, -1.0..1.0f64, -1.0..1.0f64), 1..6).prop_map(move |e| {
        OneParticleVector::from_entries(d, n, e.into_iter().map(|(x, j, re, im)| (x, j, C64::new(re, im)))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn monomial_product_is_associative((d, a, b, c) in (2u32..=5).prop_flat_map(|d| (Just(d), monomial(d, 6), monomial(d, 6), monomial(d, 6)))) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(a.d(), d);
    }
}

proptest! {
    #[test]
    fn commutation_phase_is_antisymmetric((d, a, b) in any_d_monomial(6)) {
        let ab = a.commutation_phase(&b).unwrap();
        let ba = b.commutation_phase(&a).unwrap();
        prop_assert_eq!((ab + ba) % d, 0);
    }

    #[test]
    fn commutation_phase_is_shift_invariant((_d, a, b) in any_d_monomial(6), n in -4i64..4) {
        prop_assert_eq!(a.commutation_phase(&b).unwrap(), a.shifted(n).commutation_phase(&b.shifted(n)).unwrap());
    }

    #[test]
    fn scalar_phases_add_in_z2d((d, a, _b) in any_d_monomial(4), q in 0i64..10) {
        let scalar = WeylMonomial::identity(d).with_phase(q);
        let prod = a.mul(&scalar).unwrap();
        prop_assert_eq!(prod.phase().q() as i64, (a.phase().q() as i64 + q).rem_euclid(2 * d as i64));
        prop_assert_eq!(prod.stripped(), a.stripped());
    }

    #[test]
    fn realization_is_multiplicative(a in monomial(3, 5), b in monomial(3, 5)) {
        let chain = chain35();
        let sym = realize_monomial(&a.mul(&b).unwrap(), &chain).unwrap();
        let dense = realize_monomial(&a, &chain).unwrap().mul(&realize_monomial(&b, &chain).unwrap()).unwrap();
        prop_assert!(sym.max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn realization_respects_commutators(a in element(3, 5), b in element(3, 5)) {
        let chain = chain35();
        let sym = realize(&a.commutator(&b).unwrap(), &chain).unwrap();
        let dense = realize(&a, &chain).unwrap().commutator(&realize(&b, &chain).unwrap()).unwrap();
        prop_assert!(sym.max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn gauge_projection_is_idempotent(a in element(3, 4)) {
        let chain = ChainSpec::new(3, 4).unwrap();
        let once = a.gauge_project();
        prop_assert_eq!(once.gauge_project(), once.clone());
        let dense = realize(&a, &chain).unwrap().gauge_project();
        prop_assert!(dense.gauge_project().max_abs_diff(&dense) < 1e-12);
        prop_assert!(realize(&once, &chain).unwrap().max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn unitary_monomials_have_unit_norm(a in monomial(3, 5)) {
        let n = op_norm(&realize_monomial(&a, &chain35()).unwrap()).unwrap();
        prop_assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dressed_units_form_matrix_units(d in 2u32..=4, x in 0i64..4, r in 0u32..4, s in 0u32..4, u in 0u32..4, v in 0u32..4) {
        let (r, s, u, v) = (r % d, s % d, u % d, v % d);
        let chain = ChainSpec::with_cap(d, 4, usize::MAX).unwrap();
        let p = GradingParams::new(d, 1, 0).unwrap();
        let prod = dressed_matrix_unit(x, r, s, &p, &chain).unwrap().mul(&dressed_matrix_unit(x, u, v, &p, &chain).unwrap()).unwrap();
        let want = if s == u { dressed_matrix_unit(x, r, v, &p, &chain).unwrap() } else { AlgebraElement::zero(d) };
        prop_assert!(prod.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn dressed_bilinears_are_gauge_invariant(x in 1i64..4, y in 1i64..4, jp in 0i64..3, jm in 0i64..3) {
        let chain = chain35();
        let p = GradingParams::new(3, jp, jm).unwrap();
        let bil = dressed_weyl(x, 1, &p, &chain).unwrap().mul(&dressed_weyl(y, 1, &p, &chain).unwrap().adjoint()).unwrap();
        let dense = realize_monomial(&bil, &chain).unwrap();
        let g = gauge_unitary(&chain);
        prop_assert!(dense.commutator(&g).unwrap().max_abs_diff(&DenseOperator::zeros(chain)) < 1e-12);
    }

    #[test]
    fn heisenberg_evolution_is_unitary_and_a_group(a in element(3, 5), t in -2.0..2.0f64, s in -2.0..2.0f64) {
        let m = model35();
        let at = heisenberg_evolve(&a, m, t).unwrap();
        let before = op_norm(&realize(&a, m.chain()).unwrap()).unwrap();
        prop_assert!((op_norm(&at).unwrap() - before).abs() < 1e-10);
        let two = m.evolve_dense(&at, s).unwrap();
        prop_assert!(two.max_abs_diff(&heisenberg_evolve(&a, m, t + s).unwrap()) < 1e-10);
    }

    #[test]
    fn evolution_commutes_with_gauge_projection(a in element(3, 5), t in -3.0..3.0f64) {
        let m = model35();
        let lhs = heisenberg_evolve(&a, m, t).unwrap().gauge_project();
        let rhs = heisenberg_evolve(&a.gauge_project(), m, t).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn one_particle_flow_commutes_with_translation(f in vector(3, 48), n in -60i64..60, t in -4.0..4.0f64) {
        let h = Hopping::cosine(0.7);
        let a = evolve(&f.lattice_shift(n), &h, t).unwrap();
        let b = evolve(&f, &h, t).unwrap().lattice_shift(n);
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn twisted_fractional_shifts_form_a_group(f in vector(2, 32), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let two = fractional_shift(&fractional_shift(&f, a, 1), b, 1);
        prop_assert!(two.max_abs_diff(&fractional_shift(&f, a + b, 1)) < 1e-12);
    }

    #[test]
    fn parseval(f in vector(3, 48)) {
        let mom: f64 = f.momentum().iter().flatten().map(|z| z.norm_sqr()).sum();
        prop_assert!(((mom / 48.0).sqrt() - f.l2_norm()).abs() < 1e-12);
    }
}

#[test]
fn sector_projectors_are_orthogonal_and_complete() {
    for (d, len) in [(2, 4), (3, 3), (4, 2)] {
        let chain = ChainSpec::new(d, len).unwrap();
        let ps = sector_decompose(&chain);
        let mut sum = DenseOperator::zeros(chain);
        for (i, p) in ps.iter().enumerate() {
            sum = sum.add(p).unwrap();
            for (j, q) in ps.iter().enumerate() {
                let prod = p.mul(q).unwrap();
                let want = if i == j { p.clone() } else { DenseOperator::zeros(chain) };
                assert!(prod.max_abs_diff(&want) < 1e-12);
            }
        }
        assert!(sum.max_abs_diff(&DenseOperator::identity(chain)) < 1e-12);
    }
}
