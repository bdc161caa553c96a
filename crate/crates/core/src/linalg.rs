//! Periodic tridiagonal systems with a few dense border rows and columns.

use crate::error::{MfgError, Result};

/// Row `i` reads `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1]`,
/// indices taken modulo `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.lower[i] * x[(i + n - 1) % n] + self.diag[i] * x[i] + self.upper[i] * x[(i + 1) % n]
            })
            .collect()
    }
}

/// LU factors of a tridiagonal matrix with partial pivoting.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<Self> {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d.iter().any(|&x| x == 0.0 || !x.is_finite()) {
            return Err(MfgError::NonFiniteStep { iteration: 0 });
        }
        Ok(Self { dl, d, du, du2, swap })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Dense Gaussian elimination with partial pivoting; `a` is row-major `k×k`.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap_or(col);
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return Err(MfgError::NonFiniteStep { iteration: 0 });
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..k {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * b[c]).sum();
        b[r] = (b[r] - s) / a[r][r];
    }
    Ok(b)
}

/// Solves `[A B; C D] [x; y] = [r; t]` with `A` cyclic tridiagonal (`n ≥ 3`),
/// `B` given by columns, `C` by rows.
///
/// The last unknown of `A` joins the border so the leading block is a plain
/// tridiagonal matrix, and the small Schur complement is solved densely.
pub fn solve_bordered(
    a: &CyclicTridiagonal,
    b_cols: &[Vec<f64>],
    c_rows: &[Vec<f64>],
    d: &[Vec<f64>],
    r: &[f64],
    t: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.len();
    if n < 3 {
        return Err(MfgError::InvalidInput("cyclic system needs at least 3 unknowns".into()));
    }
    let k = b_cols.len();
    let m = n - 1;
    let lu = TridiagonalLu::factor(
        a.lower[1..m].to_vec(),
        a.diag[..m].to_vec(),
        a.upper[..m - 1].to_vec(),
    )?;

    // Border columns: the wrapped column of x[n−1], then B restricted.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut e = vec![0.0; m];
    e[0] += a.lower[0];
    e[m - 1] += a.upper[m - 1];
    cols.push(e);
    for col in b_cols {
        cols.push(col[..m].to_vec());
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut f = vec![0.0; m];
    f[0] += a.upper[n - 1];
    f[m - 1] += a.lower[n - 1];
    rows.push(f);
    for row in c_rows {
        rows.push(row[..m].to_vec());
    }
    let mut corner = vec![vec![0.0; k + 1]; k + 1];
    corner[0][0] = a.diag[n - 1];
    for l in 0..k {
        corner[0][1 + l] = b_cols[l][n - 1];
        corner[1 + l][0] = c_rows[l][n - 1];
        for q in 0..k {
            corner[1 + l][1 + q] = d[l][q];
        }
    }
    let mut rhs_border = Vec::with_capacity(k + 1);
    rhs_border.push(r[n - 1]);
    rhs_border.extend_from_slice(t);

    let mut y_r = r[..m].to_vec();
    lu.solve(&mut y_r);
    let y_cols: Vec<Vec<f64>> = cols
        .into_iter()
        .map(|mut c| {
            lu.solve(&mut c);
            c
        })
        .collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut schur = corner;
    let mut rhs = rhs_border;
    for (l, row) in rows.iter().enumerate() {
        for (q, yc) in y_cols.iter().enumerate() {
            schur[l][q] -= dot(row, yc);
        }
        rhs[l] -= dot(row, &y_r);
    }
    let z = solve_dense(schur, rhs)?;
    let mut x = y_r;
    for (q, yc) in y_cols.iter().enumerate() {
        for (xi, yi) in x.iter_mut().zip(yc) {
            *xi -= z[q] * yi;
        }
    }
    x.push(z[0]);
    let y = z[1..].to_vec();
    if x.iter().chain(&y).any(|v| !v.is_finite()) {
        return Err(MfgError::NonFiniteStep { iteration: 0 });
    }
    Ok((x, y))
}

/// Solves the cyclic system `A x = r`.
pub fn solve_cyclic(a: &CyclicTridiagonal, r: &[f64]) -> Result<Vec<f64>> {
    Ok(solve_bordered(a, &[], &[], &[], r, &[])?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &CyclicTridiagonal) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][(i + n - 1) % n] += a.lower[i];
            m[i][i] += a.diag[i];
            m[i][(i + 1) % n] += a.upper[i];
        }
        m
    }

    fn pseudo(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn cyclic_matches_dense_with_tiny_diagonal() {
        let n = 9;
        let mut diag = pseudo(3, n);
        diag[0] = 0.0;
        diag[4] = 1e-14;
        let a = CyclicTridiagonal {
            lower: pseudo(1, n),
            diag,
            upper: pseudo(2, n),
        };
        let r = pseudo(4, n);
        let x = solve_cyclic(&a, &r).unwrap();
        let oracle = solve_dense(dense(&a), r.clone()).unwrap();
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()));
        }
        let back = a.apply(&x);
        for (u, v) in back.iter().zip(&r) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn bordered_matches_dense() {
        let n = 12;
        let a = CyclicTridiagonal {
            lower: pseudo(5, n),
            diag: pseudo(6, n),
            upper: pseudo(7, n),
        };
        let bcol = pseudo(8, n);
        let crow = pseudo(9, n);
        let r = pseudo(10, n);
        let (x, y) = solve_bordered(&a, &[bcol.clone()], &[crow.clone()], &[vec![0.0]], &r, &[0.3]).unwrap();
        let mut full = dense(&a);
        for (i, row) in full.iter_mut().enumerate() {
            row.push(bcol[i]);
        }
        let mut last = crow.clone();
        last.push(0.0);
        full.push(last);
        let mut rhs = r.clone();
        rhs.push(0.3);
        let oracle = solve_dense(full, rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-9 * (1.0 + oracle[i].abs()));
        }
        assert!((y[0] - oracle[n]).abs() < 1e-9 * (1.0 + oracle[n].abs()));
    }
}
