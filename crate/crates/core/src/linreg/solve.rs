//! Dense least-squares solver via Householder QR.
//!
//! Sized for regression problems (a handful of terms, at most a few
//! thousand rows); everything is plain `Vec<f64>` column storage. Indexed
//! loops mirror the factorization math.
#![allow(clippy::needless_range_loop, clippy::manual_memcpy)]

use crate::error::{Error, Result};

/// Output of one least-squares solve on a full design matrix.
#[derive(Debug)]
pub(crate) struct LeastSquares {
    pub beta: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sse: f64,
    /// Diagonal of the hat matrix.
    pub leverage: Vec<f64>,
    /// (X^T X)^{-1}, m x m.
    pub xtx_inv: Vec<Vec<f64>>,
}

/// Solve min ||X b - y|| for a design given as columns. `col_names` is used
/// to report the offending column when X is rank deficient. Rank tolerance
/// is 1e-10 times the largest column norm.
pub(crate) fn least_squares(
    columns: &[Vec<f64>],
    y: &[f64],
    col_names: &[String],
) -> Result<LeastSquares> {
    let m = columns.len();
    let n = y.len();
    assert!(m >= 1 && columns.iter().all(|c| c.len() == n));

    // Working copy, column-major, reduced in place to R.
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    // Householder vectors for reconstructing Q1.
    let mut hh: Vec<Vec<f64>> = Vec::with_capacity(m);

    let max_col_norm = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let rank_tol = 1e-10 * max_col_norm;

    for j in 0..m {
        // Build the reflector that zeroes column j below the diagonal.
        let norm: f64 = (j..n).map(|i| a[j][i] * a[j][i]).sum::<f64>().sqrt();
        if norm <= rank_tol {
            return Err(Error::RankDeficient(col_names[j].clone()));
        }
        let alpha = if a[j][j] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - j];
        for i in j..n {
            v[i - j] = a[j][i];
        }
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            for col in a.iter_mut().skip(j) {
                let dot: f64 = (j..n).map(|i| v[i - j] * col[i]).sum();
                let scale = 2.0 * dot / vtv;
                for i in j..n {
                    col[i] -= scale * v[i - j];
                }
            }
            let dot: f64 = (j..n).map(|i| v[i - j] * qty[i]).sum();
            let scale = 2.0 * dot / vtv;
            for i in j..n {
                qty[i] -= scale * v[i - j];
            }
        }
        a[j][j] = alpha;
        hh.push(v);

        if a[j][j].abs() <= rank_tol {
            return Err(Error::RankDeficient(col_names[j].clone()));
        }
    }

    // Back-substitute R b = (Q^T y)[..m].
    let mut beta = vec![0.0; m];
    for j in (0..m).rev() {
        let mut acc = qty[j];
        for l in (j + 1)..m {
            acc -= a[l][j] * beta[l];
        }
        beta[j] = acc / a[j][j];
    }

    // Fitted values from the original columns.
    let mut fitted = vec![0.0; n];
    for (b, col) in beta.iter().zip(columns) {
        for (f, v) in fitted.iter_mut().zip(col) {
            *f += b * v;
        }
    }
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let sse = residuals.iter().map(|e| e * e).sum();

    // R^{-1} by back substitution on the identity, then (X^T X)^{-1} = R^{-1} R^{-T}.
    let mut rinv = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        for i in (0..=j).rev() {
            let mut acc = e[i];
            for l in (i + 1)..=j {
                acc -= a[l][i] * rinv[l][j];
            }
            rinv[i][j] = acc / a[i][i];
        }
    }
    let mut xtx_inv = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for l in j.max(i)..m {
                acc += rinv[i][l] * rinv[j][l];
            }
            xtx_inv[i][j] = acc;
        }
    }

    // Leverage: h_ii = ||row i of Q1||^2, with Q1 e_j built by applying the
    // reflectors in reverse.
    let mut leverage = vec![0.0; n];
    for j in 0..m {
        let mut q = vec![0.0; n];
        q[j] = 1.0;
        for (jj, v) in hh.iter().enumerate().rev() {
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let dot: f64 = (jj..n).map(|i| v[i - jj] * q[i]).sum();
            let scale = 2.0 * dot / vtv;
            for i in jj..n {
                q[i] -= scale * v[i - jj];
            }
        }
        for i in 0..n {
            leverage[i] += q[i] * q[i];
        }
    }

    Ok(LeastSquares {
        beta,
        fitted,
        residuals,
        sse,
        leverage,
        xtx_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line_recovered() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let ones = vec![1.0; 4];
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
        let names = vec!["Constant".to_string(), "x".to_string()];
        let sol = least_squares(&[ones, x], &y, &names).unwrap();
        assert_abs_diff_eq!(sol.beta[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.beta[1], 2.0, epsilon = 1e-12);
        assert!(sol.sse < 1e-24);
    }

    #[test]
    fn hand_solved_normal_equations() {
        // x = 1..4, y = [2,1,4,3]: beta1 = 0.6, beta0 = 1.0
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let ones = vec![1.0; 4];
        let y = vec![2.0, 1.0, 4.0, 3.0];
        let names = vec!["Constant".to_string(), "x".to_string()];
        let sol = least_squares(&[ones, x], &y, &names).unwrap();
        assert_abs_diff_eq!(sol.beta[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.beta[1], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_column_names_dependent() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let ones = vec![1.0; 4];
        let names = vec![
            "Constant".to_string(),
            "x".to_string(),
            "x_copy".to_string(),
        ];
        let err = least_squares(&[ones, x.clone(), x], &[1.0, 2.0, 3.0, 4.0], &names)
            .unwrap_err();
        match err {
            Error::RankDeficient(name) => assert_eq!(name, "x_copy"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn leverage_sums_to_number_of_terms() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let ones = vec![1.0; 6];
        let y = vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0];
        let names: Vec<String> = ["c", "x1", "x2"].iter().map(|s| s.to_string()).collect();
        let sol = least_squares(&[ones, x1, x2], &y, &names).unwrap();
        let trace: f64 = sol.leverage.iter().sum();
        assert_abs_diff_eq!(trace, 3.0, epsilon = 1e-10);
        for &h in &sol.leverage {
            assert!(h > 0.0 && h < 1.0 + 1e-12);
        }
    }
}
