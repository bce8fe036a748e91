//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the crate's own decompositions.
#![allow(dead_code)]

/// Determinant by Leibniz expansion; fine for the tiny sizes used here.
pub fn leibniz_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, a, &mut total);
    total
}

fn permute(p: &mut Vec<usize>, k: usize, a: &[Vec<f64>], total: &mut f64) {
    if k == p.len() {
        let mut sign = 1.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    sign = -sign;
                }
            }
        }
        *total += sign * (0..p.len()).map(|i| a[i][p[i]]).product::<f64>();
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, a, total);
        p.swap(k, i);
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn sym_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

pub fn gram(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|i| (0..c).map(|j| (0..r).map(|k| a[k][i] * a[k][j]).sum()).collect()).collect()
}

/// Singular values from the eigenvalues of the Gram matrix; accurate for
/// well-conditioned inputs only.
pub fn sv_oracle(a: &[Vec<f64>]) -> Vec<f64> {
    sym_eigenvalues(gram(a)).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

/// Increasing j-subsets of 0..m in lexicographic order.
pub fn subsets(m: usize, j: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, j, &mut Vec::new(), &mut out);
    out
}

/// Matrix of all j×j minors.
pub fn minors(a: &[Vec<f64>], j: usize) -> Vec<Vec<f64>> {
    let s = subsets(a.len(), j);
    s.iter()
        .map(|rows| {
            s.iter().map(|cols| leibniz_det(&rows.iter().map(|&r| cols.iter().map(|&c| a[r][c]).collect()).collect::<Vec<_>>())).collect()
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn to_rows(a: &cocycle_core::linalg::Matrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}
