//! Small dense least squares with parameter covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct LsqFit {
    pub coef: Vec<f64>,
    /// Standard errors from the residual variance (0 when exactly determined).
    pub stderr: Vec<f64>,
}

/// Minimizes `Σ w_i (rows_i · c - y_i)²`. Columns are normalized before an
/// SVD solve, so poorly scaled bases are fine.
pub(crate) fn lstsq(rows: &[Vec<f64>], y: &[f64], weights: Option<&[f64]>) -> Result<LsqFit> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n < p || p == 0 {
        return Err(Error::InvalidArgument(format!("least squares needs n >= p > 0, got n = {n}, p = {p}")));
    }
    let sw: Vec<f64> = (0..n).map(|i| weights.map_or(1.0, |w| w[i].sqrt())).collect();
    let mut x = DMatrix::from_fn(n, p, |i, j| rows[i][j] * sw[i]);
    let b = DVector::from_fn(n, |i, _| y[i] * sw[i]);
    let mut norms = vec![1.0; p];
    for j in 0..p {
        let nj = x.column(j).norm();
        if nj > 0.0 {
            norms[j] = nj;
            x.column_mut(j).scale_mut(1.0 / nj);
        }
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-14 * (n.max(p) as f64);
    let sol = svd
        .solve(&b, eps)
        .map_err(|e| Error::InvalidArgument(format!("least squares failed: {e}")))?;
    let resid = &x * &sol - &b;
    let rss = resid.norm_squared();
    let dof = n.saturating_sub(p);
    let sigma2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let v_t = svd.v_t.as_ref().expect("v_t computed");
    let mut stderr = vec![0.0; p];
    for (j, se) in stderr.iter_mut().enumerate() {
        let mut var = 0.0;
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > eps {
                var += (v_t[(k, j)] / s).powi(2);
            }
        }
        *se = (sigma2 * var).sqrt() / norms[j];
    }
    let coef = (0..p).map(|j| sol[j] / norms[j]).collect();
    Ok(LsqFit { coef, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 - 3.0 * i as f64).collect();
        let f = lstsq(&rows, &y, None).unwrap();
        assert!((f.coef[0] - 2.0).abs() < 1e-13 && (f.coef[1] + 3.0).abs() < 1e-13);
        assert!(f.stderr[1] < 1e-12);
    }

    #[test]
    fn badly_scaled_columns() {
        let rows: Vec<Vec<f64>> = (1..10).map(|i| vec![1.0, 1e-8 * i as f64, 1e6 * (i * i) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.0 + 2.0 * r[1] / 1e-8 * 1e-8 + 3.0 * r[2]).collect();
        let f = lstsq(&rows, &y, None).unwrap();
        assert!((f.coef[2] - 3.0).abs() < 1e-10);
    }
}
