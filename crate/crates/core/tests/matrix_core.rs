mod common;

use cocycle_core::linalg::{
    eval_svf, exterior_power, gap_report, log_svd, oplus, realify, singular_values, svd_full, CMatrix, Matrix, ScaledProduct, Signature,
    SvFormula,
};
use cocycle_core::random::{gaussian_cmatrix, gaussian_matrix, random_orthogonal, rng};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn reconstruct(u: &Matrix, s: &[f64], v: &Matrix) -> Matrix {
    &(u * &Matrix::from_diag(s)) * &v.transpose()
}

#[test]
fn diagonal_and_rotation_svd() {
    let d = svd_full(&Matrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
    for (a, b) in d.s.iter().zip([3.0, 2.0, 1.0]) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!(d.u.sub(&Matrix::identity(3)).max_abs() < 1e-15);
    assert!(d.v.sub(&Matrix::identity(3)).max_abs() < 1e-15);
    let t: f64 = 0.7;
    let r = Matrix::from_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
    for s in singular_values(&r).unwrap() {
        assert!((s - 1.0).abs() < 1e-15);
    }
}

#[test]
fn exterior_power_examples() {
    let mut r = rng(3);
    let g = gaussian_matrix(&mut r, 2, 2);
    let w = exterior_power(&g, 2);
    assert_eq!((w.rows(), w.cols()), (1, 1));
    assert!((w[(0, 0)] - g.det()).abs() < 1e-14);
    let w = exterior_power(&Matrix::from_diag(&[3.0, 2.0, 1.0]), 2);
    assert!(w.sub(&Matrix::from_diag(&[6.0, 3.0, 2.0])).max_abs() < 1e-15);
}

#[test]
fn formula_examples() {
    let g = Matrix::from_diag(&[4.0, 2.0, 2.0, 1.0]);
    let tau = Signature::new(&[1, 3], 4).unwrap();
    let val = |f: SvFormula| eval_svf(&f, &g).unwrap();
    assert!((val(SvFormula::BlockProduct(tau.clone(), 1)) - 4.0).abs() < 1e-14);
    assert!((val(SvFormula::BlockProduct(tau.clone(), 2)) - 4.0).abs() < 1e-14);
    assert!((val(SvFormula::RatioRho(1)) - 2.0).abs() < 1e-14);
    assert!((val(SvFormula::RatioRho(3)) - 2.0).abs() < 1e-14);
    let rep = gap_report(&g, &tau, 1e-8).unwrap();
    assert!(rep.has_gap && (rep.rho_min - 2.0).abs() < 1e-14);
    let rep = gap_report(&Matrix::from_diag(&[2.0, 2.0, 1.0]), &Signature::new(&[1], 3).unwrap(), 1e-8).unwrap();
    assert!(!rep.has_gap);
    let rep = gap_report(&Matrix::identity(3), &Signature::new(&[1, 2], 3).unwrap(), 1e-8).unwrap();
    assert!(!rep.has_gap && (rep.rho_min - 1.0).abs() < 1e-15);
}

#[test]
fn hyperbolic_sl2_sigma() {
    // U diag(5, 1/5) Vᵀ has norm 5 and σ = 1/25
    let mut r = rng(11);
    let g = &(&random_orthogonal(&mut r, 2) * &Matrix::from_diag(&[5.0, 0.2])) * &random_orthogonal(&mut r, 2);
    let s = eval_svf(&SvFormula::RatioSigma(1), &g).unwrap();
    assert!((s - 1.0 / 25.0).abs() < 1e-13);
}

#[test]
fn realify_examples() {
    let i1 = CMatrix::from_vec(1, 1, vec![Complex64::new(0.0, 1.0)]);
    let r = realify(&i1);
    assert!(r.sub(&Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]])).max_abs() == 0.0);
    let g = CMatrix::from_vec(
        2,
        2,
        vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)],
    );
    let s = singular_values(&realify(&g)).unwrap();
    let want = [2.0, 2.0, 2f64.sqrt(), 2f64.sqrt()];
    for (a, b) in s.iter().zip(want) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn oplus_examples() {
    assert_eq!(oplus(0.0, 0.37).unwrap(), 0.37);
    assert_eq!(oplus(1.0, 0.3).unwrap(), 1.0);
    assert_eq!(oplus(0.5, 0.5).unwrap(), 0.75);
    assert!(oplus(1.5, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), m in 2usize..6) {
        let g = gaussian_matrix(&mut rng(seed), m, m);
        let d = svd_full(&g).unwrap();
        let back = reconstruct(&d.u, &d.s, &d.v);
        prop_assert!(back.sub(&g).max_abs() <= 1e-12 * d.s[0]);
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn singular_values_match_gram_oracle(seed in any::<u64>(), m in 2usize..6) {
        let g = gaussian_matrix(&mut rng(seed), m, m);
        let s = singular_values(&g).unwrap();
        let o = sv_oracle(&to_rows(&g));
        // the Gram route loses relative accuracy in the small values
        for (a, b) in s.iter().zip(&o) {
            prop_assert!((a - b).abs() <= 1e-9 * s[0]);
        }
    }

    #[test]
    fn exterior_norm_is_top_product(seed in any::<u64>(), m in 2usize..6, jr in 0usize..5) {
        let j = 1 + jr % m;
        let g = gaussian_matrix(&mut rng(seed), m, m);
        let s = singular_values(&g).unwrap();
        let want: f64 = s[..j].iter().product();
        let oracle = sv_oracle(&minors(&to_rows(&g), j))[0];
        let via_crate = singular_values(&exterior_power(&g, j)).unwrap()[0];
        prop_assert!(rel_close(oracle, want, 1e-9));
        prop_assert!(rel_close(via_crate, want, 1e-9));
    }

    #[test]
    fn top_product_is_abs_det(seed in any::<u64>(), m in 2usize..6) {
        let g = gaussian_matrix(&mut rng(seed), m, m);
        let p = eval_svf(&SvFormula::TopProduct(m), &g).unwrap();
        prop_assert!(rel_close(p, leibniz_det(&to_rows(&g)).abs(), 1e-10));
    }

    #[test]
    fn singular_values_orthogonally_invariant(seed in any::<u64>(), m in 2usize..6) {
        let mut r = rng(seed);
        let g = gaussian_matrix(&mut r, m, m);
        let h = &(&random_orthogonal(&mut r, m) * &g) * &random_orthogonal(&mut r, m);
        let (a, b) = (singular_values(&g).unwrap(), singular_values(&h).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * a[0]);
        }
    }

    #[test]
    fn realified_values_come_in_pairs(seed in any::<u64>(), m in 1usize..5) {
        let g = gaussian_cmatrix(&mut rng(seed), m, m);
        let s = singular_values(&realify(&g)).unwrap();
        let c = g.singular_values().unwrap();
        for i in 0..m {
            prop_assert!((s[2 * i] - c[i]).abs() <= 1e-10 * c[0]);
            prop_assert!((s[2 * i + 1] - c[i]).abs() <= 1e-10 * c[0]);
        }
        // Σ s² is the Frobenius norm of g counted twice
        let fro: f64 = g.data().iter().map(|z| z.norm_sqr()).sum();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        prop_assert!(rel_close(ss, 2.0 * fro, 1e-12));
    }

    #[test]
    fn scaled_product_matches_direct(seed in any::<u64>(), m in 2usize..5, n in 1usize..8) {
        let mut r = rng(seed);
        let mats: Vec<Matrix> = (0..n).map(|_| gaussian_matrix(&mut r, m, m)).collect();
        let mut direct = to_rows(&Matrix::identity(m));
        for g in &mats {
            direct = matmul(&to_rows(g), &direct);
        }
        let p = ScaledProduct::from_matrices(m, mats.iter());
        let l = p.log_svd().unwrap();
        let o = sv_oracle(&direct);
        prop_assert!(rel_close(l.log_s[0].exp(), o[0], 1e-9));
        // det of the product expanded directly loses digits to cancellation; use multiplicativity
        let log_det: f64 = mats.iter().map(|g| leibniz_det(&to_rows(g)).abs().ln()).sum();
        prop_assert!((p.log_abs_det() - log_det).abs() <= 1e-9 * log_det.abs().max(1.0));
        let direct_l = log_svd(&Matrix::from_rows(&direct.iter().map(|v| v.as_slice()).collect::<Vec<_>>())).unwrap();
        for (a, b) in l.log_s.iter().zip(&direct_l.log_s) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn oplus_properties(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let ab = oplus(a, b).unwrap();
        prop_assert!((1.0 - ab - (1.0 - a) * (1.0 - b)).abs() <= 1e-15);
        prop_assert!((oplus(0.0, a).unwrap() - a).abs() <= 1e-15);
        prop_assert_eq!(oplus(1.0, a).unwrap(), 1.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(oplus(lo, c).unwrap() <= oplus(hi, c).unwrap() + 1e-12);
        if hi > 0.0 {
            prop_assert!(oplus(lo / hi, c).unwrap() * hi <= oplus(lo, c).unwrap() + 1e-12);
        }
        let lhs = a * c + b * (1.0 - a * a).sqrt() * (1.0 - c * c).sqrt();
        prop_assert!(lhs <= oplus(a * a, b * b).unwrap().sqrt() + 1e-12);
    }
}
