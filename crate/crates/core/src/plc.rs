//! Piecewise linear product integration and the PLC collocation system.

use crate::coeffs::{plc_weights, PlcCoeffs};
use crate::error::{Error, Result};
use crate::grid::{KernelParams, NodeSet, UniformGrid};
use crate::moments::{expect_len, linear_interpolant_integral};
use crate::oracle::{ManufacturedProblem, Oracle, TestFunction};
use crate::scalar::{CompensatedSum, Scalar};
use crate::solver::DenseMatrix;
use crate::system::{CollocationSystem, SystemOrdering};

/// Product-integration rule for the piecewise linear interpolant on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlcIntegralRule<T> {
    pub coeffs: PlcCoeffs<T>,
    pub grid: UniformGrid<T>,
    pub params: KernelParams<T>,
}

impl<T: Scalar> PlcIntegralRule<T> {
    pub fn new(params: KernelParams<T>, grid: UniformGrid<T>) -> Self {
        Self {
            coeffs: plc_weights(&params, &grid),
            grid,
            params,
        }
    }

    /// `I_1(x_i)` from samples `u(x_0), ..., u(x_N)`, `1 <= i <= N-1`.
    pub fn integral(&self, samples: &[T], i: usize) -> Result<T> {
        let n = self.grid.cells();
        expect_len("node samples", n + 1, samples.len())?;
        if !(1..n).contains(&i) {
            return Err(Error::IndexOutOfRange {
                index: i,
                min: 1,
                max: n - 1,
            });
        }
        let c = &self.coeffs;
        let mut acc: CompensatedSum<T> = (1..n).map(|j| c.g[i.abs_diff(j)] * samples[j]).collect();
        acc.add(c.alpha(i) * samples[0]);
        acc.add(c.alpha(n - i) * samples[n]);
        Ok(c.sigma * acc.value())
    }

    /// `I_1` at an arbitrary `x` in `[a, b]`: the weight tables at interior
    /// junctions, per-cell moments elsewhere.
    pub fn integral_at(&self, samples: &[T], x: T) -> Result<T> {
        match junction_index(&self.grid, x) {
            Some(i) => self.integral(samples, i),
            None => linear_interpolant_integral(&self.params, &self.grid, samples, x),
        }
    }
}

/// Interior junction index `i` with `x == x_i` up to rounding.
pub(crate) fn junction_index<T: Scalar>(grid: &UniformGrid<T>, x: T) -> Option<usize> {
    doubled_index(grid, x).filter(|i| i % 2 == 0).map(|i| i / 2)
}

/// Interior doubled index `i` with `x == x_{i/2}` up to rounding.
pub(crate) fn doubled_index<T: Scalar>(grid: &UniformGrid<T>, x: T) -> Option<usize> {
    let t = (x - grid.a()) * T::lit(2.0) / grid.h();
    let r = t.round();
    let i = r.to_usize()?;
    let close = (x - grid.doubled_node(i)).abs() <= T::lit(8.0) * T::epsilon() * (grid.b() - grid.a());
    (close && i >= 1 && i < 2 * grid.cells()).then_some(i)
}

/// `sigma [sum_j g_{|i-j|} u_j + alpha_i u_0 + alpha_{N-i} u_N]`.
pub fn plc_integral<T: Scalar>(rule: &PlcIntegralRule<T>, samples: &[T], i: usize) -> Result<T> {
    rule.integral(samples, i)
}

/// `|I(x) - I_1(x)|` for the interpolant of `u` on the rule's grid.
pub fn plc_truncation_at<T: Scalar>(
    rule: &PlcIntegralRule<T>,
    oracle: &Oracle<T>,
    u: &TestFunction<T>,
    x: T,
) -> Result<T> {
    let (a, b) = (rule.grid.a(), rule.grid.b());
    let exact = oracle.singular_integral(u, a, b, x)?;
    let samples = rule.grid.sample_nodes(|y| u.eval(y));
    let approx = rule.integral_at(&samples, x)?;
    Ok((exact - approx).abs())
}

/// Unscaled PLC matrix `D - G`.
pub fn plc_matrix<T: Scalar>(coeffs: &PlcCoeffs<T>) -> DenseMatrix<T> {
    let m = coeffs.cells() - 1;
    DenseMatrix::from_fn_par(m, m, |r, c| {
        let g = coeffs.g[r.abs_diff(c)];
        if r == c {
            coeffs.d(r + 1) - g
        } else {
            -g
        }
    })
}

pub(crate) fn check_problem<T: Scalar>(
    params: &KernelParams<T>,
    grid: &UniformGrid<T>,
    problem: &ManufacturedProblem<T>,
    set: NodeSet,
) -> Result<()> {
    if problem.node_set != set {
        return Err(Error::SchemeMismatch("right-hand side sampled on the wrong node set"));
    }
    if problem.grid != *grid || problem.params != *params {
        return Err(Error::SchemeMismatch("problem built for a different grid or exponent"));
    }
    expect_len("right-hand side", set.len(grid.cells()), problem.f_values.len())
}

/// `sigma (D - G) U = F + sigma H` with `H_i = alpha_i u_0 + alpha_{N-i} u_N`.
pub fn assemble_plc_system<T: Scalar>(
    params: &KernelParams<T>,
    grid: &UniformGrid<T>,
    problem: &ManufacturedProblem<T>,
) -> Result<CollocationSystem<T>> {
    check_problem(params, grid, problem, NodeSet::PlcInterior)?;
    let coeffs = plc_weights(params, grid);
    let n = grid.cells();
    let sigma = coeffs.sigma;
    let (u0, un) = problem.boundary;
    let rhs = (1..n)
        .map(|i| problem.f_values[i - 1] + sigma * (coeffs.alpha(i) * u0 + coeffs.alpha(n - i) * un))
        .collect();
    Ok(CollocationSystem {
        matrix: plc_matrix(&coeffs).scaled(sigma),
        rhs,
        ordering: SystemOrdering::Plc,
        scaling: sigma,
        positions: grid.positions(NodeSet::PlcInterior),
        cells: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_nonlocal_rhs;
    use crate::system::check_structure;
    use approx::assert_relative_eq;

    fn rule(gamma: f64, n: usize) -> PlcIntegralRule<f64> {
        PlcIntegralRule::new(KernelParams::new(gamma).unwrap(), UniformGrid::unit(n).unwrap())
    }

    #[test]
    fn constant_reproduces_kernel_mass() {
        let r = rule(0.3, 16);
        let ones = vec![1.0; 17];
        for i in 1..16 {
            let x = r.grid.node(i);
            let exact = r.params.kernel_mass(0.0, 1.0, x);
            assert_relative_eq!(r.integral(&ones, i).unwrap(), exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn table_route_matches_cell_route() {
        let r = rule(0.7, 32);
        let s = r.grid.sample_nodes(f64::exp);
        for i in [1, 5, 16, 31] {
            let a = r.integral(&s, i).unwrap();
            let b = linear_interpolant_integral(&r.params, &r.grid, &s, r.grid.node(i)).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn index_and_length_errors() {
        let r = rule(0.3, 4);
        assert!(matches!(r.integral(&[0.0; 5], 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(r.integral(&[0.0; 5], 4), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(r.integral(&[0.0; 4], 1), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn junction_detection() {
        let g = UniformGrid::<f64>::unit(64).unwrap();
        assert_eq!(junction_index(&g, 0.5), Some(32));
        assert_eq!(junction_index(&g, 1.0 / 64.0), Some(1));
        assert_eq!(junction_index(&g, 1.0 / 3.0), None);
        assert_eq!(junction_index(&g, 0.0), None);
        assert_eq!(doubled_index(&g, 1.0 / 128.0), Some(1));
    }

    #[test]
    fn smallest_system() {
        let p = KernelParams::new(0.4).unwrap();
        let g = UniformGrid::unit(2).unwrap();
        let prob = exact_nonlocal_rhs(&TestFunction::Exp, &g, &p, NodeSet::PlcInterior, 1e-14).unwrap();
        let sys = assemble_plc_system(&p, &g, &prob).unwrap();
        let c = plc_weights(&p, &g);
        assert_eq!(sys.len(), 1);
        assert_relative_eq!(sys.matrix[(0, 0)], c.sigma * (c.d(1) - 2.0), max_relative = 1e-15);
        let expected = prob.f_values[0] + c.sigma * c.alpha(1) * (1.0 + 1f64.exp());
        assert_relative_eq!(sys.rhs[0], expected, max_relative = 1e-15);
        let u = sys.solve().unwrap();
        assert_relative_eq!(u[0], sys.rhs[0] / sys.matrix[(0, 0)], max_relative = 1e-15);
    }

    #[test]
    fn structure_of_plc_matrix() {
        let p = KernelParams::new(0.5).unwrap();
        let g = UniformGrid::unit(16).unwrap();
        let prob = exact_nonlocal_rhs(&TestFunction::Constant(1.0), &g, &p, NodeSet::PlcInterior, 1e-12).unwrap();
        let sys = assemble_plc_system(&p, &g, &prob).unwrap();
        let rep = check_structure(&sys).unwrap();
        assert!(rep.diag_positive && rep.off_diag_negative && rep.symmetric);
        assert!(rep.min_row_slack > 0.0);
        assert_eq!(rep.spd_factorization_ok, Some(true));
        let c = plc_weights(&p, &g);
        for i in 1..16 {
            let want = c.alpha(i) + c.alpha(16 - i);
            assert_relative_eq!(rep.row_sums[i - 1], want, max_relative = 1e-10);
        }
    }

    #[test]
    fn wrong_node_set_is_rejected() {
        let p = KernelParams::new(0.4).unwrap();
        let g = UniformGrid::unit(4).unwrap();
        let prob = exact_nonlocal_rhs(&TestFunction::Exp, &g, &p, NodeSet::PqcAll, 1e-12).unwrap();
        assert!(matches!(assemble_plc_system(&p, &g, &prob), Err(Error::SchemeMismatch(_))));
    }
}
