//! Exterior powers (compound matrices).

use alloc::vec::Vec;

use super::matrix::Matrix;

/// All `k`-subsets of `0..m` in colexicographic order.
pub fn colex_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance: find the first position that can move up without hitting its successor
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { cur[i + 1] } else { m };
            if cur[i] + 1 < limit {
                cur[i] += 1;
                for (t, c) in cur.iter_mut().enumerate().take(i) {
                    *c = t;
                }
                break;
            }
            i += 1;
        }
        if i == k {
            break;
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn minor(g: &Matrix, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => g[(rows[0], cols[0])],
        2 => g[(rows[0], cols[0])] * g[(rows[1], cols[1])] - g[(rows[0], cols[1])] * g[(rows[1], cols[0])],
        _ => {
            let mut sub = Matrix::zeros(k, k);
            for (a, &r) in rows.iter().enumerate() {
                for (b, &c) in cols.iter().enumerate() {
                    sub[(a, b)] = g[(r, c)];
                }
            }
            sub.det()
        }
    }
}

/// The `j`-th exterior power of a square matrix, indexed by colex-ordered subsets.
pub fn exterior_power(g: &Matrix, j: usize) -> Matrix {
    assert!(g.is_square(), "exterior power of a non-square matrix");
    let m = g.rows();
    assert!(j <= m, "exterior degree exceeds dimension");
    let subsets = colex_subsets(m, j);
    let n = subsets.len();
    let mut out = Matrix::zeros(n, n);
    for (a, rs) in subsets.iter().enumerate() {
        for (b, cs) in subsets.iter().enumerate() {
            out[(a, b)] = minor(g, rs, cs);
        }
    }
    out
}
