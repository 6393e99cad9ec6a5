//! Least-squares helpers for the reconstruction fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition estimates above this are rejected when no ridge is given.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct LsSolution {
    pub x: DVector<f64>,
    /// Condition number `λmax/λmin` of the (regularized) normal matrix.
    pub cond: f64,
}

fn normal_condition(n: &DMatrix<f64>) -> f64 {
    let eig = n.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 || max <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimizes `‖A x − b‖² + ridge ‖x‖²`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> Result<LsSolution> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge {ridge} must be finite and nonnegative")));
    }
    let k = a.ncols();
    if ridge == 0.0 && a.nrows() < k {
        return Err(Error::Underdetermined { rows: a.nrows(), unknowns: k });
    }
    let mut normal = a.transpose() * a;
    for i in 0..k {
        normal[(i, i)] += ridge;
    }
    let cond = normal_condition(&normal);
    if ridge == 0.0 && (cond.is_nan() || cond > MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    let rhs = a.transpose() * b;
    let x = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => normal.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::InvalidParameter(e.to_string()))?,
    };
    Ok(LsSolution { x, cond })
}

/// Lawson–Hanson nonnegative least squares for `‖A x − b‖² + ridge ‖x‖²`
/// subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> Result<LsSolution> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge {ridge} must be finite and nonnegative")));
    }
    let (m, k) = a.shape();
    let (a, b) = if ridge > 0.0 {
        let mut aa = DMatrix::zeros(m + k, k);
        aa.view_mut((0, 0), (m, k)).copy_from(a);
        for i in 0..k {
            aa[(m + i, i)] = ridge.sqrt();
        }
        let mut bb = DVector::zeros(m + k);
        bb.rows_mut(0, m).copy_from(b);
        (aa, bb)
    } else {
        (a.clone(), b.clone())
    };
    let cond = normal_condition(&(a.transpose() * &a));

    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    for _outer in 0..(3 * k + 10) {
        let w = a.transpose() * (&b - &a * &x);
        let candidate = (0..k).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        for _inner in 0..(3 * k + 10) {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = sub.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            if z_sub.iter().all(|&v| v > 0.0) {
                for (p, &i) in idx.iter().enumerate() {
                    x[i] = z_sub[p];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (p, &i) in idx.iter().enumerate() {
                if z_sub[p] <= 0.0 {
                    let denom = x[i] - z_sub[p];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (p, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z_sub[p] - x[i]);
                if x[i] <= tol.min(1e-15) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    Ok(LsSolution { x, cond })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let s = least_squares(&a, &b, 0.0).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 2.0).abs() < 1e-14);
        assert!((s.cond - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular_without_ridge() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(matches!(least_squares(&a, &b, 0.0), Err(Error::IllConditioned { .. })));
        let s = least_squares(&a, &b, 1e-6).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-5);
        let wide = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(least_squares(&wide, &DVector::from_vec(vec![1.0]), 0.0), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn nnls_clamps_negative_component() {
        // unconstrained solution is (2, -1)
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, -1.0, 1.0]);
        let s = nnls(&a, &b, 0.0).unwrap();
        assert!(s.x.iter().all(|&v| v >= 0.0));
        assert!((s.x[0] - 1.5).abs() < 1e-12 && s.x[1] == 0.0);
        let pos = nnls(&a, &DVector::from_vec(vec![1.0, 2.0, 3.0]), 0.0).unwrap();
        assert!((pos.x[0] - 1.0).abs() < 1e-12 && (pos.x[1] - 2.0).abs() < 1e-12);
    }
}
