//! Assembled collocation systems shared by both schemes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{lu_solve, structure_report, DenseMatrix, RowMeasure, StructureReport};

/// Collocation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Piecewise linear.
    Plc,
    /// Piecewise quadratic.
    Pqc,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Plc => "plc",
            Scheme::Pqc => "pqc",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plc" => Ok(Scheme::Plc),
            "pqc" => Ok(Scheme::Pqc),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Unknown ordering of a PQC system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PqcNodeOrdering {
    /// `u_1, ..., u_{N-1}` then `u_{1/2}, ..., u_{N-1/2}`.
    Blocked,
    /// `u_{1/2}, u_1, u_{3/2}, ..., u_{N-1/2}`.
    Interleaved,
}

impl PqcNodeOrdering {
    /// Doubled node index of unknown `k` for a grid with `n` cells.
    pub fn doubled_index(self, n: usize, k: usize) -> usize {
        match self {
            PqcNodeOrdering::Interleaved => k + 1,
            PqcNodeOrdering::Blocked if k < n - 1 => 2 * (k + 1),
            PqcNodeOrdering::Blocked => 2 * (k - (n - 1)) + 1,
        }
    }

    /// Unknown index of doubled node `i`, `1 <= i <= 2N-1`.
    pub fn position_of(self, n: usize, i: usize) -> usize {
        match self {
            PqcNodeOrdering::Interleaved => i - 1,
            PqcNodeOrdering::Blocked if i % 2 == 0 => i / 2 - 1,
            PqcNodeOrdering::Blocked => (n - 1) + (i - 1) / 2,
        }
    }

    /// `perm[k]` is the index in `from` of unknown `k` in `self`.
    pub fn permutation_from(self, from: PqcNodeOrdering, n: usize) -> Vec<usize> {
        (0..2 * n - 1)
            .map(|k| from.position_of(n, self.doubled_index(n, k)))
            .collect()
    }
}

/// Row and unknown ordering of an assembled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemOrdering {
    /// Interior junctions `x_1, ..., x_{N-1}`.
    Plc,
    Pqc(PqcNodeOrdering),
}

impl SystemOrdering {
    pub fn scheme(self) -> Scheme {
        match self {
            SystemOrdering::Plc => Scheme::Plc,
            SystemOrdering::Pqc(_) => Scheme::Pqc,
        }
    }
}

/// Dense collocation system `matrix * u = rhs`.
///
/// `matrix` already carries the scheme's scaling (`sigma` or `eta`), which is
/// recorded in `scaling`; `positions[k]` is the node of unknown `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSystem<T> {
    pub matrix: DenseMatrix<T>,
    pub rhs: Vec<T>,
    pub ordering: SystemOrdering,
    pub scaling: T,
    pub positions: Vec<T>,
    /// Cell count of the underlying grid.
    pub cells: usize,
}

impl<T: Scalar> CollocationSystem<T> {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn scheme(&self) -> Scheme {
        self.ordering.scheme()
    }

    /// The matrix with the scaling divided out.
    pub fn unscaled_matrix(&self) -> DenseMatrix<T> {
        self.matrix.scaled(T::one() / self.scaling)
    }

    /// Nodal values in the system's own unknown order.
    pub fn solve(&self) -> Result<Vec<T>> {
        lu_solve(&self.matrix, &self.rhs)
    }

    /// Nodal values paired with their positions, sorted by position.
    pub fn solve_sorted(&self) -> Result<Vec<(T, T)>> {
        let u = self.solve()?;
        let mut pairs: Vec<(T, T)> = self.positions.iter().copied().zip(u).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        Ok(pairs)
    }

    /// Matrix and right-hand side as CSV: one row per equation, the last column is the rhs.
    pub fn to_csv(&self) -> String {
        let n = self.len();
        let mut out = String::new();
        let header: Vec<String> = (0..n).map(|j| format!("a{j}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",rhs\n");
        for i in 0..n {
            let row: Vec<String> = self
                .matrix
                .row(i)
                .iter()
                .map(|v| format!("{:.16e}", v.to_f64_lossy()))
                .collect();
            out.push_str(&row.join(","));
            out.push_str(&format!(",{:.16e}\n", self.rhs[i].to_f64_lossy()));
        }
        out
    }
}

/// Solves a system densely (LU with partial pivoting plus one refinement step).
pub fn solve_dense<T: Scalar>(system: &CollocationSystem<T>) -> Result<Vec<T>> {
    system.solve()
}

/// Structural diagnostics of the unscaled matrix.
///
/// PLC reports signed row sums; PQC reports the row slack
/// `a_ii - sum_{j != i} |a_ij|`.
pub fn check_structure<T: Scalar>(system: &CollocationSystem<T>) -> Result<StructureReport<T>> {
    let measure = match system.scheme() {
        Scheme::Plc => RowMeasure::Sum,
        Scheme::Pqc => RowMeasure::Slack,
    };
    structure_report(&system.unscaled_matrix(), measure)
}

/// Re-orders a PQC system; PLC systems and same-order requests are returned unchanged.
pub fn reorder_system<T: Scalar>(
    system: &CollocationSystem<T>,
    target: PqcNodeOrdering,
) -> CollocationSystem<T> {
    let SystemOrdering::Pqc(from) = system.ordering else {
        return system.clone();
    };
    if from == target {
        return system.clone();
    }
    let perm = target.permutation_from(from, system.cells);
    CollocationSystem {
        matrix: system.matrix.permute_symmetric(&perm),
        rhs: perm.iter().map(|&p| system.rhs[p]).collect(),
        ordering: SystemOrdering::Pqc(target),
        scaling: system.scaling,
        positions: perm.iter().map(|&p| system.positions[p]).collect(),
        cells: system.cells,
    }
}
