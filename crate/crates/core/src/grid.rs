//! Kernel exponent and uniform partitions of `[a, b]`.
//!
//! Half-integer nodes are addressed through doubled indices: position `i`
//! in doubled numbering is the node `x_{i/2} = a + i h / 2`, so even `i`
//! are cell junctions and odd `i` are cell midpoints.

use crate::error::{Error, Result};
use crate::scalar::{pow_pos, Scalar};

/// Largest supported number of cells.
pub const MAX_CELLS: usize = 8192;

/// Exponent of the kernel `|x - y|^(-gamma)`, `0 <= gamma < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<T> {
    gamma: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma < T::one()) {
            return Err(Error::InvalidGamma(gamma.to_f64_lossy()));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `|x - y|^(-gamma)`.
    #[inline]
    pub fn kernel(&self, x: T, y: T) -> T {
        (x - y).abs().powf(-self.gamma)
    }

    /// `int_a^b |x - y|^(-gamma) dy = [(x-a)^(1-gamma) + (b-x)^(1-gamma)] / (1-gamma)`.
    pub fn kernel_mass(&self, a: T, b: T, x: T) -> T {
        let s = T::one() - self.gamma;
        (pow_pos(x - a, s) + pow_pos(b - x, s)) / s
    }
}

/// Which collocation nodes a problem lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeSet {
    /// Interior junctions `x_1, ..., x_{N-1}`.
    PlcInterior,
    /// Every interior junction and midpoint `x_{1/2}, x_1, ..., x_{N-1/2}`, in increasing order.
    PqcAll,
}

impl NodeSet {
    pub fn len(self, n: usize) -> usize {
        match self {
            NodeSet::PlcInterior => n - 1,
            NodeSet::PqcAll => 2 * n - 1,
        }
    }

    /// Doubled index of the `k`-th node of the set.
    pub fn doubled_index(self, k: usize) -> usize {
        match self {
            NodeSet::PlcInterior => 2 * (k + 1),
            NodeSet::PqcAll => k + 1,
        }
    }
}

/// Uniform partition of `[a, b]` into `n` cells of width `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid<T> {
    a: T,
    b: T,
    n: usize,
    h: T,
}

impl<T: Scalar> UniformGrid<T> {
    /// Requires `a < b` and `2 <= n <= MAX_CELLS`.
    pub fn new(a: T, b: T, n: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
            });
        }
        if !(2..=MAX_CELLS).contains(&n) {
            return Err(Error::CellCount {
                n,
                min: 2,
                max: MAX_CELLS,
            });
        }
        let h = (b - a) / T::from_count(n);
        Ok(Self { a, b, n, h })
    }

    /// Unit interval with `n` cells.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(T::zero(), T::one(), n)
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }
    #[inline]
    pub fn b(&self) -> T {
        self.b
    }
    #[inline]
    pub fn cells(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    /// Junction `x_j = a + j h`, `0 <= j <= N`.
    #[inline]
    pub fn node(&self, j: usize) -> T {
        if j == self.n {
            self.b
        } else {
            self.a + T::from_count(j) * self.h
        }
    }

    /// Midpoint `x_{j+1/2} = a + (j + 1/2) h`, `0 <= j < N`.
    #[inline]
    pub fn half_node(&self, j: usize) -> T {
        self.a + (T::from_count(j) + T::lit(0.5)) * self.h
    }

    /// `x_{i/2}` for doubled index `0 <= i <= 2N`.
    #[inline]
    pub fn doubled_node(&self, i: usize) -> T {
        if i % 2 == 0 {
            self.node(i / 2)
        } else {
            self.half_node(i / 2)
        }
    }

    /// Positions of a node set in its natural order.
    pub fn positions(&self, set: NodeSet) -> Vec<T> {
        (0..set.len(self.n))
            .map(|k| self.doubled_node(set.doubled_index(k)))
            .collect()
    }

    /// Samples of `f` at `x_0, ..., x_N`.
    pub fn sample_nodes<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        (0..=self.n).map(|j| f(self.node(j))).collect()
    }

    /// Samples of `f` at `x_{1/2}, ..., x_{N-1/2}`.
    pub fn sample_half_nodes<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        (0..self.n).map(|j| f(self.half_node(j))).collect()
    }

    /// Index of the cell containing `x` (the right cell at interior junctions).
    pub fn cell_of(&self, x: T) -> usize {
        let t = ((x - self.a) / self.h).floor();
        t.to_usize().unwrap_or(0).min(self.n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_gamma() {
        assert!(KernelParams::new(1.0_f64).is_err());
        assert!(KernelParams::new(-0.1_f64).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
        assert!(KernelParams::new(0.0_f64).is_ok());
        assert!(KernelParams::new(0.999_f64).is_ok());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(UniformGrid::new(1.0_f64, 0.0, 4).is_err());
        assert!(UniformGrid::new(0.0_f64, 1.0, 1).is_err());
        assert!(UniformGrid::new(0.0_f64, 1.0, MAX_CELLS + 1).is_err());
        assert!(UniformGrid::new(0.0_f64, 1.0, MAX_CELLS).is_ok());
    }

    #[test]
    fn nodes_and_half_nodes() {
        let g = UniformGrid::new(-1.0_f64, 3.0, 8).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(8), 3.0);
        assert_eq!(g.half_node(0), -0.75);
        assert_eq!(g.doubled_node(3), g.half_node(1));
        assert_eq!(g.doubled_node(4), g.node(2));
        assert_eq!(g.positions(NodeSet::PlcInterior).len(), 7);
        assert_eq!(g.positions(NodeSet::PqcAll).len(), 15);
        assert_eq!(g.cell_of(-1.0), 0);
        assert_eq!(g.cell_of(3.0), 7);
        assert_eq!(g.cell_of(0.1), 2);
    }

    #[test]
    fn kernel_mass_constant_case() {
        let p = KernelParams::new(0.5_f64).unwrap();
        let m = p.kernel_mass(0.0, 1.0, 0.25);
        assert!((m - 2.0 * (0.5 + 0.75_f64.sqrt())).abs() < 1e-15);
    }
}
