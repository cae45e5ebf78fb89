//! Minimum-cost perfect assignment (Kuhn-Munkres with potentials, O(n³)).

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `columns[r]` is the column matched to row `r`.
    pub columns: Vec<usize>,
    pub cost: f64,
}

pub fn hungarian(cost: &Matrix) -> Result<Assignment> {
    let (n, cols) = cost.shape();
    if n != cols {
        return Err(Error::Contract(format!(
            "assignment needs a square matrix, got {n}x{cols}; pad it first"
        )));
    }
    if !cost.is_finite() {
        return Err(Error::Contract("assignment cost matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Assignment {
            columns: Vec::new(),
            cost: 0.0,
        });
    }
    // 1-based arrays; index 0 is a virtual column
    let inf = f64::INFINITY;
    let mut row_pot = vec![0.0; n + 1];
    let mut col_pot = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for r in 1..=n {
        owner[0] = r;
        let mut col = 0;
        let mut min_v = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col] = true;
            let row = owner[col];
            let mut delta = inf;
            let mut next = 0;
            for c in 1..=n {
                if !used[c] {
                    let reduced = cost.get(row - 1, c - 1) - row_pot[row] - col_pot[c];
                    if reduced < min_v[c] {
                        min_v[c] = reduced;
                        way[c] = col;
                    }
                    if min_v[c] < delta {
                        delta = min_v[c];
                        next = c;
                    }
                }
            }
            for c in 0..=n {
                if used[c] {
                    row_pot[owner[c]] += delta;
                    col_pot[c] -= delta;
                } else {
                    min_v[c] -= delta;
                }
            }
            col = next;
            if owner[col] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col];
            owner[col] = owner[prev];
            col = prev;
            if col == 0 {
                break;
            }
        }
    }
    let mut columns = vec![0; n];
    for c in 1..=n {
        columns[owner[c] - 1] = c - 1;
    }
    let total = columns.iter().enumerate().map(|(r, &c)| cost.get(r, c)).sum();
    Ok(Assignment { columns, cost: total })
}

/// Pads a rectangular matrix to square with `1 + max|entry|`.
pub fn pad_square(cost: &Matrix) -> Result<Matrix> {
    if !cost.is_finite() {
        return Err(Error::Contract("assignment cost matrix has non-finite entries".into()));
    }
    let (r, c) = cost.shape();
    let n = r.max(c);
    let sentinel = 1.0 + cost.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Matrix::zeros(n, n);
    out.fill(sentinel);
    for i in 0..r {
        out.row_mut(i)[..c].copy_from_slice(cost.row(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_force(cost: &Matrix) -> f64 {
        permutations(cost.rows())
            .iter()
            .map(|p| p.iter().enumerate().map(|(r, &c)| cost.get(r, c)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn examples() {
        let a = hungarian(&Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(a.columns, vec![0, 1]);
        assert_eq!(a.cost, 2.0);
        let b = hungarian(&Matrix::from_rows(&[[4.0, 1.0], [2.0, 3.0]]).unwrap()).unwrap();
        assert_eq!(b.columns, vec![1, 0]);
        assert_eq!(b.cost, 3.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 1, f64::NAN);
        assert!(matches!(hungarian(&m), Err(Error::Contract(_))));
        assert!(matches!(hungarian(&Matrix::zeros(2, 3)), Err(Error::Contract(_))));
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = Rng::new(13, 0);
        for _ in 0..60 {
            let n = rng.range_inclusive(1, 6);
            let data = (0..n * n).map(|_| rng.range_inclusive(0, 20) as f64 - 10.0).collect();
            let m = Matrix::from_vec(n, n, data).unwrap();
            let a = hungarian(&m).unwrap();
            let mut seen = a.columns.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
            assert_eq!(a.cost, brute_force(&m));
        }
    }

    #[test]
    fn padding_keeps_real_optimum() {
        let m = Matrix::from_rows(&[[-5.0, 0.0, -1.0], [0.0, -3.0, -4.0]]).unwrap();
        let p = pad_square(&m).unwrap();
        assert_eq!(p.row(2), &[6.0, 6.0, 6.0]);
        let a = hungarian(&p).unwrap();
        assert_eq!(&a.columns[..2], &[0, 2]);
    }
}
