use num_traits::Num;

/// Solves `a x = b` by Gaussian elimination over an exact field. Returns
/// `None` for a singular or non-square system.
///
/// Pivots are the first nonzero entry in each column, which is exact for
/// rationals but not numerically stable for floats.
pub fn solve_linear<S: Num + Clone>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return None;
    }
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}

/// The matrix with rows `(1, t, t², …, t^(n-1))` for `n` nodes `t`.
pub fn vandermonde<S: Num + Clone>(nodes: &[S]) -> Vec<Vec<S>> {
    nodes
        .iter()
        .map(|t| {
            let mut row = Vec::with_capacity(nodes.len());
            let mut p = S::one();
            for _ in 0..nodes.len() {
                row.push(p.clone());
                p = p * t.clone();
            }
            row
        })
        .collect()
}

/// Coefficients `c` with `Σ_r c_r t^r = y` at every node `t`.
pub fn solve_vandermonde<S: Num + Clone>(nodes: &[S], values: &[S]) -> Option<Vec<S>> {
    solve_linear(vandermonde(nodes), values.to_vec())
}

/// `a x - b`.
pub fn residual<S: Num + Clone>(a: &[Vec<S>], x: &[S], b: &[S]) -> Vec<S> {
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            row.iter()
                .zip(x)
                .fold(S::zero(), |acc, (aij, xj)| acc + aij.clone() * xj.clone())
                - bi.clone()
        })
        .collect()
}
