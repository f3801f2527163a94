//! Dense symmetric positive-definite solves used by the kernel learner and
//! the truss assembler. Matrices are row-major `Vec<f64>` squares; sizes
//! here stay in the hundreds, so a straightforward Cholesky is the right
//! tool.

/// In-place lower Cholesky factorization of a symmetric matrix. On failure
/// returns the row index of the first non-positive pivot, leaving the
/// buffer in an unspecified state.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<(), usize> {
    assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(j);
        }
        let root = diag.sqrt();
        a[j * n + j] = root;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / root;
        }
    }
    // Zero the strict upper triangle so the factor is self-describing.
    for i in 0..n {
        for j in (i + 1)..n {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` given the lower factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    assert_eq!(l.len(), n * n);
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Convenience: solves a symmetric positive-definite system, consuming the
/// matrix buffer. Returns the failing pivot row when not SPD.
pub fn solve_spd(mut a: Vec<f64>, n: usize, b: &[f64]) -> Result<Vec<f64>, usize> {
    cholesky(&mut a, n)?;
    Ok(cholesky_solve(&a, n, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent check: plain Gaussian elimination with partial pivoting.
    fn gauss_solve(mut a: Vec<f64>, n: usize, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                x.swap(col, pivot);
            }
            let d = a[col * n + col];
            for row in (col + 1)..n {
                let f = a[row * n + col] / d;
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
        for row in (0..n).rev() {
            for k in (row + 1)..n {
                x[row] -= a[row * n + k] * x[k];
            }
            x[row] /= a[row * n + row];
        }
        x
    }

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = crate::util::seeded_rng(seed, 0);
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() - 0.5).collect();
        // A = M M^T + n * I is comfortably positive definite.
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m[i * n + k] * m[j * n + k];
                }
                a[i * n + j] = s + if i == j { n as f64 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn cholesky_matches_gaussian_elimination() {
        use rand::Rng;
        for n in [1usize, 2, 5, 20, 40] {
            let a = random_spd(n, n as u64);
            let mut rng = crate::util::seeded_rng(n as u64 + 100, 0);
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let x1 = solve_spd(a.clone(), n, &b).unwrap();
            let x2 = gauss_solve(a.clone(), n, &b);
            for (u, v) in x1.iter().zip(&x2) {
                assert!((u - v).abs() < 1e-10, "n={n}: {u} vs {v}");
            }
            // Residual check against the original matrix.
            for i in 0..n {
                let mut r = -b[i];
                for j in 0..n {
                    r += a[i * n + j] * x1[j];
                }
                assert!(r.abs() < 1e-9, "residual {r} at row {i}");
            }
        }
    }

    #[test]
    fn cholesky_reports_first_bad_pivot() {
        // diag(1, -1): fails at row 1.
        let mut a = vec![1.0, 0.0, 0.0, -1.0];
        assert_eq!(cholesky(&mut a, 2), Err(1));
        // Rank-one ones matrix: fails at row 1 (zero pivot).
        let mut b = vec![1.0; 9];
        assert_eq!(cholesky(&mut b, 3), Err(1));
    }
}
