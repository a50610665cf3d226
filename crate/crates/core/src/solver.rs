//! Dense linear algebra for the collocation systems and the structural
//! diagnostics (sign pattern, row slack, Gershgorin bound, SPD checks).

use std::ops::{Index, IndexMut};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{sum_compensated, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a function of `(row, col)`.
    pub fn from_fn<F: Fn(usize, usize) -> T>(rows: usize, cols: usize, f: F) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    /// As [`DenseMatrix::from_fn`], filling rows in parallel.
    pub fn from_fn_par<F: Fn(usize, usize) -> T + Sync>(rows: usize, cols: usize, f: F) -> Self {
        let mut data = vec![T::zero(); rows * cols];
        if cols > 0 {
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = f(i, j);
                }
            });
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| sum_compensated(self.row(i).iter().zip(x).map(|(&a, &b)| a * b)))
            .collect()
    }

    /// `b - A x`.
    pub fn residual(&self, x: &[T], b: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                let dot = self.row(i).iter().zip(x).map(|(&a, &v)| -(a * v));
                sum_compensated(std::iter::once(b[i]).chain(dot))
            })
            .collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).fold(T::zero(), |a, b| a + b))
            .fold(T::zero(), T::max)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for i in 0..self.rows {
            for j in 0..i {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `P A P^T` for the permutation `new[k] = old[perm[k]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(perm[i], perm[j])])
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

fn pivot_floor<T: Scalar>() -> T {
    T::from_f64(1e-300)
        .filter(|v| *v > T::zero())
        .unwrap_or_else(T::min_positive_value)
}

/// LU factors with row pivoting: `P A = L U`, unit lower `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    /// Partial-pivoting factorization; fails when a pivot underflows `1e-300`.
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        a.require_square()?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = pivot_floor::<T>();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::zero()), |best, c| if c.1 > best.1 { c } else { best });
            if !(pivot > floor) {
                return Err(Error::SingularMatrix {
                    column: k,
                    pivot: pivot.to_f64_lossy(),
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - f * v;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = (0..i).fold(x[i], |s, j| s - self.lu[(i, j)] * x[j]);
            x[i] = s;
        }
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(x[i], |s, j| s - self.lu[(i, j)] * x[j]);
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

/// `A x = b` by LU with partial pivoting and one step of iterative refinement.
pub fn lu_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    a.require_square()?;
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            what: "right-hand side",
            expected: a.rows(),
            found: b.len(),
        });
    }
    let f = LuFactors::new(a)?;
    let mut x = f.solve(b);
    let r = a.residual(&x, b);
    let dx = f.solve(&r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi = *xi + di;
    }
    Ok(x)
}

/// Lower Cholesky factor `A = L L^T`, or `None` if a pivot is not positive.
pub fn cholesky<T: Scalar>(a: &DenseMatrix<T>) -> Result<Option<DenseMatrix<T>>> {
    a.require_square()?;
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let s = (0..j).fold(a[(j, j)], |s, k| s - l[(j, k)] * l[(j, k)]);
        if !(s > T::zero()) {
            return Ok(None);
        }
        let d = s.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = (0..j).fold(a[(i, j)], |s, k| s - l[(i, k)] * l[(j, k)]);
            l[(i, j)] = s / d;
        }
    }
    Ok(Some(l))
}

fn cholesky_solve<T: Scalar>(l: &DenseMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let s = (0..i).fold(y[i], |s, k| s - l[(i, k)] * y[k]);
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(y[i], |s, k| s - l[(k, i)] * y[k]);
        y[i] = s / l[(i, i)];
    }
    y
}

/// Conjugate gradients for symmetric positive-definite `A`.
///
/// Stops when `||r|| <= rel_tol ||b||`; returns the iterate and the iteration count.
pub fn conjugate_gradient<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, usize)> {
    a.require_square()?;
    let dot = |u: &[T], v: &[T]| sum_compensated(u.iter().zip(v).map(|(&x, &y)| x * y));
    let n = a.rows();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rel_tol * dot(b, b).sqrt();
    for it in 0..max_iter {
        if rr.sqrt() <= target {
            return Ok((x, it));
        }
        let ap = a.mul_vec(&p);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Ok((x, max_iter))
}

/// Smallest eigenvalue of a symmetric positive-definite matrix by inverse
/// power iteration on its Cholesky factor. `None` if the matrix is not SPD.
pub fn lambda_min_estimate<T: Scalar>(a: &DenseMatrix<T>, iterations: usize) -> Result<Option<T>> {
    let Some(l) = cholesky(a)? else {
        return Ok(None);
    };
    let n = a.rows();
    let norm = |v: &[T]| sum_compensated(v.iter().map(|&x| x * x)).sqrt();
    // deterministic start with components of both signs
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.37) * T::from_count(i % 7) - T::lit(0.11) * T::from_count(i % 3))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x = *x / nv);
    let mut lambda = T::zero();
    for _ in 0..iterations.max(1) {
        let w = cholesky_solve(&l, &v);
        let nw = norm(&w);
        let next = T::one() / nw;
        v = w.into_iter().map(|x| x / nw).collect();
        let settled = (next - lambda).abs() <= T::epsilon() * T::lit(16.0) * next;
        lambda = next;
        if settled {
            break;
        }
    }
    // Rayleigh quotient of the final vector
    let av = a.mul_vec(&v);
    let rq = sum_compensated(v.iter().zip(&av).map(|(&x, &y)| x * y));
    Ok(Some(rq.min(lambda)))
}

/// `true` if `A - shift I` admits a Cholesky factorization, which certifies
/// `lambda_min(A) > shift` for symmetric `A`.
pub fn certify_lower_bound<T: Scalar>(a: &DenseMatrix<T>, shift: T) -> Result<bool> {
    let mut s = a.clone();
    for i in 0..s.rows() {
        s[(i, i)] = s[(i, i)] - shift;
    }
    Ok(cholesky(&s)?.is_some())
}

/// Sign pattern, row slack and eigenvalue diagnostics of a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport<T> {
    pub diag_positive: bool,
    pub off_diag_negative: bool,
    /// Row sums `sum_j a_ij` (PLC) or slack `a_ii - sum_{j != i} |a_ij|` (PQC).
    pub row_sums: Vec<T>,
    pub min_row_slack: T,
    /// `min_i (a_ii - r_i)` with `r_i` the absolute off-diagonal row sum.
    pub gershgorin_lower_bound: T,
    pub symmetric: bool,
    /// Cholesky succeeded; only attempted for symmetric matrices.
    pub spd_factorization_ok: Option<bool>,
    /// Smallest eigenvalue by inverse iteration, when SPD.
    pub lambda_min_estimate: Option<T>,
}

/// Which row quantity to report in [`StructureReport::row_sums`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMeasure {
    /// Signed row sum.
    Sum,
    /// Diagonal minus absolute off-diagonal sum.
    Slack,
}

/// Computes the structure report of `a`.
pub fn structure_report<T: Scalar>(a: &DenseMatrix<T>, measure: RowMeasure) -> Result<StructureReport<T>> {
    a.require_square()?;
    let n = a.rows();
    let mut diag_positive = true;
    let mut off_diag_negative = true;
    let mut row_sums = Vec::with_capacity(n);
    let mut min_slack = T::infinity();
    for i in 0..n {
        let row = a.row(i);
        let d = row[i];
        diag_positive &= d > T::zero();
        let off_abs = sum_compensated(row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.abs()));
        off_diag_negative &= row.iter().enumerate().all(|(j, &v)| j == i || v < T::zero());
        let slack = d - off_abs;
        min_slack = min_slack.min(slack);
        row_sums.push(match measure {
            RowMeasure::Sum => sum_compensated(row.iter().copied()),
            RowMeasure::Slack => slack,
        });
    }
    let symmetric = a.is_symmetric(T::epsilon() * T::lit(16.0));
    let (spd, lambda) = if symmetric {
        let lam = lambda_min_estimate(a, 500)?;
        (Some(lam.is_some()), lam)
    } else {
        (None, None)
    };
    Ok(StructureReport {
        diag_positive,
        off_diag_negative,
        row_sums,
        min_row_slack: min_slack,
        gershgorin_lower_bound: min_slack,
        symmetric,
        spd_factorization_ok: spd,
        lambda_min_estimate: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dominant(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = DenseMatrix::from_fn(n, n, |_, _| 0.0);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = next();
            }
            m[(i, i)] = n as f64;
        }
        m
    }

    #[test]
    fn identity_solve() {
        let a = DenseMatrix::<f64>::identity(4);
        let b = vec![1.0, -2.0, 3.5, 0.0];
        assert_eq!(lu_solve(&a, &b).unwrap(), b);
    }

    #[test]
    fn random_dominant_residual() {
        let a = dominant(50, 7);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x = lu_solve(&a, &b).unwrap();
        let r = a.residual(&x, &b);
        let rmax = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(rmax <= 1e-10 * a.norm_inf() * xmax);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(lu_solve(&a, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
        let r = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(lu_solve(&r, &[1.0, 1.0]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn cg_agrees_with_lu_on_spd() {
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = lu_solve(&a, &b).unwrap();
        let (y, _) = conjugate_gradient(&a, &b, 1e-14, 500).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert_relative_eq!(u, v, max_relative = 1e-12);
        }
    }

    #[test]
    fn lambda_min_of_laplacian() {
        let n = 20;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let lam = lambda_min_estimate(&a, 2000).unwrap().unwrap();
        assert_relative_eq!(lam, exact, max_relative = 1e-9);
        assert!(certify_lower_bound(&a, exact * 0.999).unwrap());
        assert!(!certify_lower_bound(&a, exact * 1.001).unwrap());
    }

    #[test]
    fn report_on_m_matrix() {
        let a = DenseMatrix::from_vec(2, 2, vec![3.0, -1.0, -1.0, 3.0]).unwrap();
        let r = structure_report(&a, RowMeasure::Sum).unwrap();
        assert!(r.diag_positive && r.off_diag_negative && r.symmetric);
        assert_eq!(r.row_sums, vec![2.0, 2.0]);
        assert_eq!(r.min_row_slack, 2.0);
        assert_eq!(r.spd_factorization_ok, Some(true));
        assert_relative_eq!(r.lambda_min_estimate.unwrap(), 2.0, max_relative = 1e-12);
    }
}
