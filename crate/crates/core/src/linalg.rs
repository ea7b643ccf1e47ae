//! Tridiagonal solves for the Crank-Nicolson step.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A x = rhs` for tridiagonal `A` given by its `lower` (length n−1),
/// `diag` (n) and `upper` (n−1) bands. `scratch` must hold n values and is
/// overwritten. The solution replaces `rhs`.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    debug_assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let tiny = 1e-300;
    let mut pivot = diag[0];
    if pivot.norm() < tiny {
        return Err(singular(0));
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i];
        if pivot.norm() < tiny {
            return Err(singular(i));
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i + 1] * next;
    }
    Ok(())
}

fn singular(row: usize) -> Error {
    Error::Numeric {
        context: "tridiagonal solve",
        detail: format!("zero pivot at row {row}"),
        residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let lower = [c(1.0, 0.5), c(-1.0, 0.0)];
        let diag = [c(4.0, 1.0), c(3.0, -1.0), c(5.0, 0.0)];
        let upper = [c(1.0, -0.5), c(0.0, 2.0)];
        let x = [c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -1.0)];
        let mut rhs = [
            diag[0] * x[0] + upper[0] * x[1],
            lower[0] * x[0] + diag[1] * x[1] + upper[1] * x[2],
            lower[1] * x[1] + diag[2] * x[2],
        ];
        let mut scratch = [Complex64::default(); 3];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch).unwrap();
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
