//! Reference values that do not go through the product-integration weights:
//! exact singular integrals of the test functions and manufactured right-hand
//! sides of the nonlocal problem.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{KernelParams, NodeSet, UniformGrid};
use crate::jacobi::SingularQuadrature;
use crate::scalar::{pow_pos, sum_compensated, Scalar};

/// Smallest accepted oracle tolerance.
pub const MIN_TOLERANCE: f64 = 1e-14;

/// Default absolute tolerance of the oracle.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Exact solutions used by the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction<T> {
    Constant(T),
    /// `y^p`, `0 <= p <= 4`.
    Monomial(u32),
    /// `e^y`.
    Exp,
}

impl<T: Scalar> TestFunction<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TestFunction::Monomial(p) if p > 4 => Err(Error::MonomialDegree(p)),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, y: T) -> T {
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::Monomial(p) => y.powi(p as i32),
            TestFunction::Exp => y.exp(),
        }
    }

    /// Polynomial degree, `None` for the exponential.
    pub fn degree(&self) -> Option<u32> {
        match *self {
            TestFunction::Constant(_) => Some(0),
            TestFunction::Monomial(p) => Some(p),
            TestFunction::Exp => None,
        }
    }
}

impl<T: Scalar> fmt::Display for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "const({c})"),
            TestFunction::Monomial(0) => write!(f, "1"),
            TestFunction::Monomial(1) => write!(f, "y"),
            TestFunction::Monomial(p) => write!(f, "y^{p}"),
            TestFunction::Exp => write!(f, "exp(y)"),
        }
    }
}

fn check_tolerance<T: Scalar>(tol: T) -> Result<()> {
    if !(tol.to_f64_lossy() >= MIN_TOLERANCE) {
        return Err(Error::InvalidTolerance(tol.to_f64_lossy()));
    }
    Ok(())
}

fn check_point<T: Scalar>(a: T, b: T, x: T) -> Result<()> {
    if !(a < b) {
        return Err(Error::InvalidInterval {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    if !(x >= a && x <= b) {
        return Err(Error::PointOutside {
            x: x.to_f64_lossy(),
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `int_a^b y^p |x - y|^(-gamma) dy` in closed form, `a <= x <= b`.
///
/// Expands `y^p = (x - (x - y))^p` on each side of `x`.
pub fn monomial_singular_integral<T: Scalar>(p: u32, a: T, b: T, x: T, gamma: T) -> T {
    let left = x - a;
    let right = b - x;
    let mut binom = T::one();
    let mut terms = Vec::with_capacity(p as usize + 1);
    for j in 0..=p {
        let e = T::from_count(j as usize) + T::one() - gamma;
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        let side = sign * pow_pos(left, e) + pow_pos(right, e);
        terms.push(binom * x.powi((p - j) as i32) * side / e);
        binom = binom * T::from_count((p - j) as usize) / T::from_count(j as usize + 1);
    }
    sum_compensated(terms)
}

/// `int_0^len e^(-t) t^(s-1) dt` through the positive-term series
/// `len^s e^(-len) sum_k len^k / (s (s+1) ... (s+k))`.
fn lower_gamma_series<T: Scalar>(s: T, len: T) -> T {
    if len <= T::zero() {
        return T::zero();
    }
    let mut term = T::one() / s;
    let mut acc = term;
    for k in 1..100_000 {
        term = term * len / (s + T::from_count(k));
        acc = acc + term;
        if term <= acc * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    pow_pos(len, s) * (-len).exp() * acc
}

/// `int_0^len e^t t^(s-1) dt = sum_k len^(k+s) / (k! (k+s))`.
fn growth_series<T: Scalar>(s: T, len: T) -> T {
    if len <= T::zero() {
        return T::zero();
    }
    let mut fact_pow = T::one(); // len^k / k!
    let mut acc = T::one() / s;
    for k in 1..100_000 {
        fact_pow = fact_pow * len / T::from_count(k);
        let term = fact_pow / (s + T::from_count(k));
        acc = acc + term;
        if term <= acc * T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    pow_pos(len, s) * acc
}

/// `int_a^b e^y |x - y|^(-gamma) dy` by series, `a <= x <= b`.
pub fn exp_singular_integral_series<T: Scalar>(a: T, b: T, x: T, gamma: T) -> T {
    let s = T::one() - gamma;
    x.exp() * (lower_gamma_series(s, x - a) + growth_series(s, b - x))
}

/// Singular-integral oracle for one kernel exponent.
///
/// Holds the lazily built Gauss-Jacobi ladder, so reuse one instance across
/// many evaluation points.
#[derive(Debug)]
pub struct Oracle<T> {
    params: KernelParams<T>,
    quad: SingularQuadrature<T>,
    tol: T,
}

impl<T: Scalar> Oracle<T> {
    /// `tol` is the absolute accuracy target, at least `1e-14`.
    pub fn new(params: KernelParams<T>, tol: T) -> Result<Self> {
        check_tolerance(tol)?;
        Ok(Self {
            params,
            quad: SingularQuadrature::new(params.gamma())?,
            tol,
        })
    }

    pub fn params(&self) -> &KernelParams<T> {
        &self.params
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    /// `int_lo^hi f(y) |x - y|^(-gamma) dy` for any `x` by Gauss-Jacobi doubling.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, lo: T, hi: T, x: T) -> Result<T> {
        self.quad.integrate(f, lo, hi, x, self.tol).map(|(v, _)| v)
    }

    /// `int_a^b u(y) |x - y|^(-gamma) dy`, `a <= x <= b`.
    ///
    /// Always evaluated by quadrature; for the exponential the result is
    /// cross-checked against the series and a disagreement is an error.
    pub fn singular_integral(&self, u: &TestFunction<T>, a: T, b: T, x: T) -> Result<T> {
        u.validate()?;
        check_point(a, b, x)?;
        let quad = self.integrate(|y| u.eval(y), a, b, x)?;
        if let TestFunction::Exp = u {
            let series = exp_singular_integral_series(a, b, x, self.params.gamma());
            let slack = T::lit(4.0) * self.tol + T::lit(64.0) * T::epsilon() * series.abs();
            if (quad - series).abs() > slack {
                return Err(Error::OracleMismatch {
                    x: x.to_f64_lossy(),
                    quadrature: quad.to_f64_lossy(),
                    series: series.to_f64_lossy(),
                });
            }
        }
        Ok(quad)
    }

    /// Right-hand side `f(x) = u(x) int_a^b |x-y|^(-gamma) dy - int_a^b u(y) |x-y|^(-gamma) dy`.
    pub fn nonlocal_rhs(&self, u: &TestFunction<T>, a: T, b: T, x: T) -> Result<T> {
        let integral = self.singular_integral(u, a, b, x)?;
        Ok(u.eval(x) * self.params.kernel_mass(a, b, x) - integral)
    }
}

/// `int_a^b u(y) |x - y|^(-gamma) dy` with a one-off oracle.
pub fn exact_singular_integral<T: Scalar>(
    u: &TestFunction<T>,
    (a, b): (T, T),
    params: &KernelParams<T>,
    x: T,
    tol: T,
) -> Result<T> {
    Oracle::new(*params, tol)?.singular_integral(u, a, b, x)
}

/// Nonlocal problem with a known solution, sampled at the collocation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedProblem<T> {
    pub function: TestFunction<T>,
    pub grid: UniformGrid<T>,
    pub params: KernelParams<T>,
    pub node_set: NodeSet,
    /// Collocation nodes in increasing order.
    pub positions: Vec<T>,
    /// `f` at each entry of `positions`.
    pub f_values: Vec<T>,
    /// Dirichlet data `(u(a), u(b))`.
    pub boundary: (T, T),
    pub oracle_tolerance: T,
}

impl<T: Scalar> ManufacturedProblem<T> {
    /// Exact solution at the collocation nodes.
    pub fn exact_solution(&self) -> Vec<T> {
        self.positions.iter().map(|&x| self.function.eval(x)).collect()
    }

    /// CSV with header `node,f_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,f_value\n");
        for (x, f) in self.positions.iter().zip(&self.f_values) {
            out.push_str(&format!("{:.16e},{:.16e}\n", x.to_f64_lossy(), f.to_f64_lossy()));
        }
        out
    }
}

/// Manufactured right-hand side for `u` on every node of `node_set`.
pub fn exact_nonlocal_rhs<T: Scalar>(
    u: &TestFunction<T>,
    grid: &UniformGrid<T>,
    params: &KernelParams<T>,
    node_set: NodeSet,
    tol: T,
) -> Result<ManufacturedProblem<T>> {
    let oracle = Oracle::new(*params, tol)?;
    oracle_problem(&oracle, u, grid, node_set)
}

/// As [`exact_nonlocal_rhs`] with a caller-owned oracle.
pub fn oracle_problem<T: Scalar>(
    oracle: &Oracle<T>,
    u: &TestFunction<T>,
    grid: &UniformGrid<T>,
    node_set: NodeSet,
) -> Result<ManufacturedProblem<T>> {
    u.validate()?;
    let (a, b) = (grid.a(), grid.b());
    let positions = grid.positions(node_set);
    let f_values = positions
        .par_iter()
        .map(|&x| oracle.nonlocal_rhs(u, a, b, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ManufacturedProblem {
        function: *u,
        grid: *grid,
        params: *oracle.params(),
        node_set,
        positions,
        f_values,
        boundary: (u.eval(a), u.eval(b)),
        oracle_tolerance: oracle.tolerance(),
    })
}

/// Interpolation degree of a piecewise basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisDegree {
    Linear,
    Quadratic,
}

/// `(int phi_0(y) |x-y|^(-gamma) dy, int phi_N(y) |x-y|^(-gamma) dy)` for the
/// end-node basis functions, supported on the first and last cell.
pub fn boundary_basis_integrals<T: Scalar>(
    oracle: &Oracle<T>,
    grid: &UniformGrid<T>,
    degree: BasisDegree,
    x: T,
) -> Result<(T, T)> {
    let h = grid.h();
    let (a, b) = (grid.a(), grid.b());
    let (x1, xn1) = (grid.node(1), grid.node(grid.cells() - 1));
    let two = T::lit(2.0);
    let (left, right) = match degree {
        BasisDegree::Linear => (
            oracle.integrate(|y| (x1 - y) / h, a, x1, x)?,
            oracle.integrate(|y| (y - xn1) / h, xn1, b, x)?,
        ),
        BasisDegree::Quadratic => {
            let (m0, mn) = (grid.half_node(0), grid.half_node(grid.cells() - 1));
            (
                oracle.integrate(|y| two * (y - m0) * (y - x1) / (h * h), a, x1, x)?,
                oracle.integrate(|y| two * (y - mn) * (y - xn1) / (h * h), xn1, b, x)?,
            )
        }
    };
    Ok((left, right))
}
