use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::operators::{CTypePreset, ShiftWeights};
use crate::seqspace::NormMode;

fn l2() -> NormMode {
    NormMode::Lp(2.0)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Eigenvalues of a Hermitian H through its real symmetric embedding
// [[Re H, -Im H], [Im H, Re H]] and cyclic Jacobi; each eigenvalue shows up twice.
fn hermitian_eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.into_iter().step_by(2).collect()
}

fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    m
}

#[test]
fn jacobi_matches_hermitian_oracle() {
    for (n, seed) in [(1, 1), (3, 2), (5, 3), (8, 4)] {
        let a = random_matrix(n, seed);
        let got = jacobi_singular_values(&a);
        let want: Vec<f64> = hermitian_eigenvalues(&a.adjoint().mul(&a)).into_iter().map(|e| e.max(0.0).sqrt()).collect();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9 * want[0], "n={n}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn inverse_iteration_agrees_with_jacobi() {
    let mut a = DenseMatrix::zeros(40, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for j in 0..40usize {
        for i in j.saturating_sub(1)..(j + 3).min(40) {
            a[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let mu = c(0.1, -0.2);
    let want = *jacobi_singular_values(&a.shifted(mu)).last().unwrap();
    let r = grid::inverse_iteration(&a.shifted(mu));
    assert!(r.converged);
    assert!((r.sigma - want).abs() < 1e-6 * want.max(1e-12), "{} vs {want}", r.sigma);
}

#[test]
fn identity_grid_is_distance_to_one() {
    let id = OperatorSpec::identity(6, l2()).unwrap();
    let s = finite_section(&id, 6).unwrap();
    let g = GridSpec { re_min: -1.0, re_max: 2.0, im_min: -1.0, im_max: 1.0, n_re: 7, n_im: 5 };
    let r = pseudospectrum_grid(&s, &g).unwrap();
    assert_eq!(r.points.len(), 35);
    for p in &r.points {
        let d = (c(p[0], p[1]) - 1.0).norm();
        assert!((p[2] - d).abs() < 1e-12, "{p:?}");
    }
    assert!(r.to_csv().starts_with("re,im,sigma_min\n"));
    assert_eq!(r.singular, 1);
    assert!((smallest_singular(&s, c(0.0, 2.0)).unwrap() - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn backward_shift_section() {
    let b = OperatorSpec::backward_shift(ShiftWeights::Constant(c(1.0, 0.0)), 5, l2()).unwrap();
    let s = finite_section(&b, 5).unwrap();
    for k in 1..5 {
        assert_eq!(s[(k - 1, k)], c(1.0, 0.0));
    }
    // A nilpotent Jordan block has exactly one zero singular value.
    let sv = jacobi_singular_values(&s);
    assert_eq!(sv.iter().filter(|x| **x < 1e-12).count(), 1);
    assert!(finite_section(&b, 6).is_err());
}

#[test]
fn descriptors_and_gate() {
    let d = |s: OperatorSpec| essential_spectrum_analytic(&s).unwrap();
    let id = d(OperatorSpec::identity(4, l2()).unwrap());
    assert!(unit_disc_gate(&id).unwrap());
    let twob = d(OperatorSpec::rolewicz(c(2.0, 0.0), 4, l2()).unwrap());
    assert_eq!(twob.set, SpectrumSet::Circle { radius: 2.0 });
    assert!(!unit_disc_gate(&twob).unwrap());
    let half = OperatorSpec::scalar(c(0.5, 0.0), 4, l2()).unwrap();
    let sum = d(OperatorSpec::direct_sum(OperatorSpec::rolewicz(c(2.0, 0.0), 4, l2()).unwrap(), half).unwrap());
    assert!(unit_disc_gate(&sum).unwrap());
    let cx = d(OperatorSpec::rolewicz(c(2.0, 0.0), 4, l2()).unwrap().complexify().unwrap());
    assert_eq!(cx.set, SpectrumSet::Circle { radius: 2.0 });
    let table = OperatorSpec::backward_shift(ShiftWeights::Table(vec![c(1.0, 0.0); 3]), 4, l2()).unwrap();
    assert!(matches!(essential_spectrum_analytic(&table), Err(SpectraError::UnsupportedClass(_))));
    let ct = CTypeData::default_config(4).unwrap();
    let wb = d(OperatorSpec::ctype_wb(ct.clone(), l2()).unwrap());
    assert_eq!(unit_disc_gate(&wb), Err(SpectraError::UnknownAnalytic));
    let k = d(OperatorSpec::compact_k(ct, l2()).unwrap());
    assert!(unit_disc_gate(&k).unwrap());
}

#[test]
fn point_spectrum_counts() {
    let ct = CTypeData::default_config(12).unwrap();
    // λ = e^{iπ/2^k} solves λ^{L_n} = −1 exactly when L_n = 2^k.
    for k in 0..12 {
        let lam = Complex64::from_polar(1.0, PI / 2f64.powi(k));
        assert_eq!(point_spectrum_blocks(&ct, lam, 12).unwrap(), 1, "k={k}");
    }
    assert_eq!(point_spectrum_blocks(&ct, c(1.0, 0.0), 12).unwrap(), 0);
    assert!(matches!(point_spectrum_blocks(&ct, c(1.1, 0.0), 3), Err(SpectraError::OffCircle(_))));
    assert!(matches!(point_spectrum_blocks(&ct, c(-1.0, 0.0), 13), Err(SpectraError::BlocksNotStored { .. })));
}

#[test]
fn inverse_witness_default() {
    let ct = CTypeData::default_config(12).unwrap();
    let w = inverse_unboundedness_witness(&ct, DEFAULT_WITNESS_THRESHOLD);
    assert!(w.witnessed && w.inverse_consistent, "{w:?}");
    assert_eq!(w.max_block, 11);
    // Independent count: weight 2 sits on ⌊(2^n − 1)/2⌋ interior indices.
    assert_eq!(w.max_product, 2f64.powi((2i32.pow(11) - 1) / 2));
    let blocks: Vec<usize> = w.table.iter().map(|r| r.block).collect();
    // P_0 = P_1 = 1, so block 1 is not a new running maximum.
    assert_eq!(blocks, [0].into_iter().chain(2..12).collect::<Vec<_>>());
    let small = CTypeData::default_config(4).unwrap();
    assert!(!inverse_unboundedness_witness(&small, DEFAULT_WITNESS_THRESHOLD).witnessed);
}

#[test]
fn chaos_growth_along_fibers() {
    let ct = CTypeData::preset(CTypePreset::ChaosWitness, 12).unwrap();
    let rows = chaos_growth_witness(&ct, 2);
    for (_, fiber) in &rows {
        for pair in fiber.windows(2) {
            assert!(pair[1].1 > pair[0].1, "{fiber:?}");
        }
    }
    assert!(rows[0].1.len() >= 2);
}
