//! Property tests for the algebraic invariants of vectors, norms and operators.

use num_complex::Complex64;
use proptest::prelude::*;

use rlab::dynamics::orbit_scan;
use rlab::operators::{j_join, j_split};
use rlab::seqspace::{axpy, complexification_norm};
use rlab::{CTypeData, NormMode, OperatorSpec, PairVec, TruncVec};

const D: usize = 24;

fn norm_mode() -> impl Strategy<Value = NormMode> {
    prop_oneof![(1.0f64..8.0).prop_map(NormMode::Lp), Just(NormMode::Sup)]
}

fn reals(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, d)
}

fn complexes(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0).prop_map(|(a, b)| Complex64::new(a, b)), d)
}

fn scalar() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b))
}

// Specs of dimension D covering every operator kind except C-type, whose
// dimension is fixed by its blocks.
fn spec(norm: NormMode) -> impl Strategy<Value = OperatorSpec> {
    let d = D;
    prop_oneof![
        Just(OperatorSpec::identity(d, norm).unwrap()),
        scalar().prop_map(move |l| OperatorSpec::scalar(l, d, norm).unwrap()),
        scalar().prop_map(move |m| OperatorSpec::rolewicz(m, d, norm).unwrap()),
        (scalar(), scalar()).prop_map(move |(a, b)| {
            OperatorSpec::direct_sum(
                OperatorSpec::rolewicz(a, d / 2, norm).unwrap(),
                OperatorSpec::scalar(b, d / 2, norm).unwrap(),
            )
            .unwrap()
        }),
    ]
}

fn close(a: &TruncVec, b: &TruncVec, scale: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= 1e-9 * scale.max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearity(norm in norm_mode(), x in complexes(D), y in complexes(D), a in scalar(), b in scalar()) {
        for s in [OperatorSpec::rolewicz(a, D, norm).unwrap(), OperatorSpec::scalar(b, D, norm).unwrap()] {
            let x = TruncVec::complex(x.clone(), norm).unwrap();
            let y = TruncVec::complex(y.clone(), norm).unwrap();
            let lhs = s.apply(&axpy(a, &x, &y.scale(b)).unwrap()).unwrap();
            let rhs = axpy(a, &s.apply(&x).unwrap(), &s.apply(&y).unwrap().scale(b)).unwrap();
            prop_assert!(close(&lhs, &rhs, 100.0 * (x.norm() + y.norm())));
        }
    }

    #[test]
    fn semigroup(norm in norm_mode(), s in spec(NormMode::Lp(2.0)), x in complexes(D), j in 0u64..12, k in 0u64..12) {
        let s = OperatorSpec::from_toml(&s.to_toml()).unwrap();
        let x = TruncVec::complex(x, norm).unwrap().with_norm_mode(s.norm_mode());
        let lhs = s.apply_power(&x, j + k).unwrap();
        let rhs = s.apply_power(&s.apply_power(&x, j).unwrap(), k).unwrap();
        let scale = lhs.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(close(&lhs, &rhs, scale));
    }

    #[test]
    fn ctype_semigroup(blocks in 2usize..7, j in 0u64..80, k in 0u64..80, idx in 0usize..63) {
        let ct = CTypeData::default_config(blocks).unwrap();
        let s = OperatorSpec::ctype_full(ct, NormMode::Lp(2.0)).unwrap();
        let x = TruncVec::basis(s.dim(), idx % s.dim(), rlab::FieldMode::Real, NormMode::Lp(2.0)).unwrap();
        let lhs = s.apply_power(&x, j + k).unwrap();
        let rhs = s.apply_power(&s.apply_power(&x, j).unwrap(), k).unwrap();
        let scale = lhs.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(close(&lhs, &rhs, scale));
    }

    #[test]
    fn homogeneity(norm in norm_mode(), x in complexes(D), a in scalar()) {
        let x = TruncVec::complex(x, norm).unwrap();
        let lhs = x.scale(a).norm();
        let rhs = a.norm() * x.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn triangle_inequality(norm in norm_mode(), x in complexes(D), y in complexes(D)) {
        let x = TruncVec::complex(x, norm).unwrap();
        let y = TruncVec::complex(y, norm).unwrap();
        let sum = axpy(Complex64::new(1.0, 0.0), &x, &y).unwrap();
        prop_assert!(sum.norm() <= x.norm() + y.norm() + 1e-12 * (x.norm() + y.norm()).max(1.0));
    }

    #[test]
    fn complexification_sandwich(norm in norm_mode(), x in reals(D), y in reals(D)) {
        let x = TruncVec::real(&x, norm).unwrap();
        let y = TruncVec::real(&y, norm).unwrap();
        let c = complexification_norm(&x, &y).unwrap();
        let tol = 1e-12 * (x.norm() + y.norm()).max(1.0);
        prop_assert!(x.norm().max(y.norm()) <= c + tol);
        prop_assert!(c <= x.norm() + y.norm() + tol);
    }

    #[test]
    fn complexification_rotation(norm in norm_mode(), x in reals(D), y in reals(D)) {
        let x = TruncVec::real(&x, norm).unwrap();
        let y = TruncVec::real(&y, norm).unwrap();
        let c = complexification_norm(&x, &y).unwrap();
        let r = complexification_norm(&y.scale(Complex64::new(-1.0, 0.0)), &x).unwrap();
        prop_assert!((c - r).abs() <= 1e-9 * c.max(1.0));
    }

    #[test]
    fn j_conjugacy(x in reals(D), y in reals(D), mu in -3.0f64..3.0) {
        let s = OperatorSpec::rolewicz(Complex64::new(mu, 0.0), D, NormMode::Lp(2.0)).unwrap();
        let pair = PairVec::new(TruncVec::real(&x, NormMode::Lp(2.0)).unwrap(), TruncVec::real(&y, NormMode::Lp(2.0)).unwrap()).unwrap();
        let z = j_join(&pair);
        prop_assert_eq!(j_split(&z), pair.clone());
        let lhs = j_split(&s.complexify().unwrap().apply(&z).unwrap());
        prop_assert_eq!(lhs, s.apply_pair(&pair).unwrap());
    }

    #[test]
    fn half_shift_orbits_stay_bounded(norm in norm_mode(), x in complexes(D), steps in 1u64..64) {
        let s = OperatorSpec::rolewicz(Complex64::new(0.5, 0.0), D, norm).unwrap();
        let x = TruncVec::complex(x, norm).unwrap();
        let rec = orbit_scan(&s, &x, steps).unwrap();
        let n0 = x.norm();
        prop_assert!(rec.norms.iter().all(|&n| n <= n0 * (1.0 + 1e-12)));
        prop_assert!(rec.norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
