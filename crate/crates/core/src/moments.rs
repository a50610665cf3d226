//! Kernel moments over one reference cell and the exact integral of a
//! piecewise linear or quadratic interpolant at an arbitrary point.
//!
//! `M_k(z) = int_{-1/2}^{1/2} t^k |z - t|^(-gamma) dt` for `k = 0, 1, 2`.
//! A cell `[c - h/2, c + h/2]` contributes `h^(1-gamma) sum_k c_k M_k((x - c)/h)`
//! when the local polynomial is written as `sum_k c_k t^k` in `t = (y - c)/h`.

use crate::error::{Error, Result};
use crate::grid::{KernelParams, UniformGrid};
use crate::scalar::{pow_pos, CompensatedSum, Scalar};

const SERIES_START: f64 = 2.0;

/// `int_{-1/2}^{1/2} t^m dt`.
fn even_moment<T: Scalar>(m: usize) -> T {
    if m % 2 == 1 {
        T::zero()
    } else {
        T::lit(0.5).powi(m as i32) / T::from_count(m + 1)
    }
}

/// `M_k(z)` for `z >= 2` by expanding `(1 - t/z)^(-gamma)`.
fn far<T: Scalar>(k: usize, z: T, gamma: T) -> T {
    let mut coef = T::one(); // (gamma)_n / n!
    let mut zpow = T::one();
    let mut acc = T::zero();
    for n in 0..200 {
        let mu = even_moment::<T>(n + k);
        if mu != T::zero() {
            let term = coef * zpow * mu;
            acc = acc + term;
            if term.abs() <= acc.abs() * T::epsilon() * T::lit(0.0625) {
                break;
            }
        }
        let nf = T::from_count(n);
        coef = coef * (gamma + nf) / (nf + T::one());
        zpow = zpow / z;
    }
    z.powf(-gamma) * acc
}

/// `M_k(z)` through power differences, given the scaled distances
/// `zl = z + 1/2` and `zr = 1/2 - z` to the cell ends (one may be negative).
fn near<T: Scalar>(k: usize, zl: T, zr: T, gamma: T) -> T {
    let z = zl - T::lit(0.5);
    let mut acc = CompensatedSum::new();
    let mut binom = T::one();
    for j in 0..=k {
        let e = T::from_count(j) + T::one() - gamma;
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        // t = z - w on the left of z, t = z + w on the right
        let side = if zr <= T::zero() {
            sign * (pow_pos(zl, e) - pow_pos(-zr, e))
        } else if zl <= T::zero() {
            pow_pos(zr, e) - pow_pos(-zl, e)
        } else {
            sign * pow_pos(zl, e) + pow_pos(zr, e)
        };
        acc.add(binom * z.powi((k - j) as i32) * side / e);
        binom = binom * T::from_count(k - j) / T::from_count(j + 1);
    }
    acc.value()
}

/// `int_{-1/2}^{1/2} t^k |z - t|^(-gamma) dt`, `k <= 2`.
pub fn cell_moment<T: Scalar>(k: usize, z: T, gamma: T) -> T {
    let half = T::lit(0.5);
    cell_moment_split(k, z + half, half - z, gamma)
}

/// [`cell_moment`] from the scaled distances `zl = (x - y_left)/h` and
/// `zr = (y_right - x)/h`; stays accurate when `x` sits on or next to a cell end.
pub fn cell_moment_split<T: Scalar>(k: usize, zl: T, zr: T, gamma: T) -> T {
    debug_assert!(k <= 2);
    let z = zl - T::lit(0.5);
    if z.abs() >= T::lit(SERIES_START) {
        let v = far(k, z.abs(), gamma);
        if z < T::zero() && k % 2 == 1 {
            -v
        } else {
            v
        }
    } else {
        near(k, zl, zr, gamma)
    }
}

/// `int_a^b u_h(y) |x - y|^(-gamma) dy` for the piecewise linear interpolant of
/// `nodes = u(x_0), ..., u(x_N)`.
pub fn linear_interpolant_integral<T: Scalar>(
    params: &KernelParams<T>,
    grid: &UniformGrid<T>,
    nodes: &[T],
    x: T,
) -> Result<T> {
    let n = grid.cells();
    expect_len("node samples", n + 1, nodes.len())?;
    let gamma = params.gamma();
    let h = grid.h();
    let half = T::lit(0.5);
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        let (ul, ur) = (nodes[j], nodes[j + 1]);
        let (zl, zr) = ((x - grid.node(j)) / h, (grid.node(j + 1) - x) / h);
        let c0 = half * (ul + ur);
        let c1 = ur - ul;
        acc.add(c0 * cell_moment_split(0, zl, zr, gamma));
        acc.add(c1 * cell_moment_split(1, zl, zr, gamma));
    }
    Ok(h.powf(T::one() - gamma) * acc.value())
}

/// As [`linear_interpolant_integral`] for the piecewise quadratic interpolant
/// through junction samples `nodes` (length `N+1`) and midpoint samples `mids` (length `N`).
pub fn quadratic_interpolant_integral<T: Scalar>(
    params: &KernelParams<T>,
    grid: &UniformGrid<T>,
    nodes: &[T],
    mids: &[T],
    x: T,
) -> Result<T> {
    let n = grid.cells();
    expect_len("node samples", n + 1, nodes.len())?;
    expect_len("half-node samples", n, mids.len())?;
    let gamma = params.gamma();
    let h = grid.h();
    let two = T::lit(2.0);
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        let (ul, um, ur) = (nodes[j], mids[j], nodes[j + 1]);
        let (zl, zr) = ((x - grid.node(j)) / h, (grid.node(j + 1) - x) / h);
        let c1 = ur - ul;
        let c2 = two * (ul - two * um + ur);
        acc.add(um * cell_moment_split(0, zl, zr, gamma));
        acc.add(c1 * cell_moment_split(1, zl, zr, gamma));
        acc.add(c2 * cell_moment_split(2, zl, zr, gamma));
    }
    Ok(h.powf(T::one() - gamma) * acc.value())
}

pub(crate) fn expect_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}
