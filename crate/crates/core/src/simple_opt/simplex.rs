//! Dense tableau simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The origin is feasible, so no phase one is needed. Bland's rule keeps the
//! method from cycling on the degenerate vertices that 0/1 constraint rows
//! produce.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
}

/// Solves the LP. `a` is row-major with one row per constraint.
pub fn maximize<T: Scalar>(c: &[T], a: &[Vec<T>], b: &[T]) -> Result<LpSolution<T>> {
    let nv = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != nv) {
        return Err(Error::InvalidParams("LP dimensions disagree".into()));
    }
    if b.iter().any(|&x| !(x >= T::zero())) {
        return Err(Error::InvalidParams("LP right-hand side must be non-negative".into()));
    }
    let tol = T::epsilon() * T::of(1024.0);
    let width = nv + m + 1;
    // rows 0..m are constraints, row m is the objective (reduced costs)
    let mut tab = vec![T::zero(); (m + 1) * width];
    for i in 0..m {
        for j in 0..nv {
            tab[i * width + j] = a[i][j];
        }
        tab[i * width + nv + i] = T::one();
        tab[i * width + width - 1] = b[i];
    }
    for j in 0..nv {
        tab[m * width + j] = c[j];
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();

    let max_iter = 50_000;
    for _ in 0..max_iter {
        let Some(enter) = (0..nv + m).find(|&j| tab[m * width + j] > tol) else {
            let mut x = vec![T::zero(); nv];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < nv {
                    x[bv] = tab[i * width + width - 1].max(T::zero());
                }
            }
            let value = c.iter().zip(&x).fold(T::zero(), |acc, (ci, xi)| acc + *ci * *xi);
            return Ok(LpSolution { value, x });
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            let coef = tab[i * width + enter];
            if coef > tol {
                let ratio = tab[i * width + width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let (row, _) = leave.ok_or(Error::Unbounded)?;
        pivot(&mut tab, width, m + 1, row, enter);
        basis[row] = enter;
    }
    Err(Error::InvalidParams("simplex iteration cap reached".into()))
}

fn pivot<T: Scalar>(tab: &mut [T], width: usize, rows: usize, row: usize, col: usize) {
    let p = tab[row * width + col];
    for j in 0..width {
        tab[row * width + j] = tab[row * width + j] / p;
    }
    for i in 0..rows {
        if i == row {
            continue;
        }
        let f = tab[i * width + col];
        if f == T::zero() {
            continue;
        }
        for j in 0..width {
            let delta = f * tab[row * width + j];
            tab[i * width + j] = tab[i * width + j] - delta;
        }
        tab[i * width + col] = T::zero();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Solves a square system by Gaussian elimination with partial pivoting.
    fn solve(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
        let n = r.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
            if m[piv][col].abs() < 1e-12 {
                return None;
            }
            m.swap(col, piv);
            r.swap(col, piv);
            for i in 0..n {
                if i != col {
                    let f = m[i][col] / m[col][col];
                    for j in 0..n {
                        m[i][j] -= f * m[col][j];
                    }
                    r[i] -= f * r[col];
                }
            }
        }
        Some((0..n).map(|i| r[i] / m[i][i]).collect())
    }

    /// Best feasible basic solution over every choice of `nv` tight rows
    /// among the constraints and the non-negativity bounds.
    fn vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
        let nv = c.len();
        let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
        for j in 0..nv {
            let mut e = vec![0.0; nv];
            e[j] = 1.0;
            rows.push((e, 0.0));
        }
        let total = rows.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..1 << total {
            if mask.count_ones() as usize != nv {
                continue;
            }
            let chosen: Vec<_> = (0..total).filter(|k| mask >> k & 1 == 1).collect();
            let m = chosen.iter().map(|&k| rows[k].0.clone()).collect();
            let r = chosen.iter().map(|&k| rows[k].1).collect();
            let Some(x) = solve(m, r) else { continue };
            let feasible = x.iter().all(|&v| v >= -1e-9)
                && a.iter().zip(b).all(|(row, &bi)| {
                    row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9
                });
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
            }
        }
        best
    }

    #[test]
    fn small_example() {
        // max x + y  s.t.  x ≤ 1, x + y ≤ 3
        let sol = maximize(&[1.0, 1.0], &[vec![1.0, 0.0], vec![1.0, 1.0]], &[1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(sol.value, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let err = maximize(&[1.0, 1.0], &[vec![1.0, 0.0]], &[1.0]).unwrap_err();
        assert_eq!(err, Error::Unbounded);
    }

    #[test]
    fn matches_vertex_enumeration_on_zero_one_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let nv = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=4);
            let mut a = Vec::new();
            for _ in 0..m {
                a.push((0..nv).map(|_| f64::from(rng.gen_range(0..2u8))).collect::<Vec<_>>());
            }
            // every variable must be bounded by some row
            for j in 0..nv {
                if a.iter().all(|row| row[j] == 0.0) {
                    a[rng.gen_range(0..m)][j] = 1.0;
                }
            }
            let b: Vec<f64> = (0..m).map(|_| f64::from(rng.gen_range(0..10u8))).collect();
            let c: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.0..3.0)).collect();
            let sol = maximize(&c, &a, &b).unwrap();
            assert_abs_diff_eq!(sol.value, vertex_enumeration(&c, &a, &b), epsilon = 1e-9);
        }
    }
}
