//! Piecewise quadratic product integration and the PQC collocation system.
//!
//! Nodes are addressed by doubled index `i` (node `x_{i/2}`), so the
//! half-integer subscripts of the weights become integer arithmetic.

use crate::coeffs::{pqc_weights, PqcCoeffs};
use crate::error::{Error, Result};
use crate::grid::{KernelParams, NodeSet, UniformGrid};
use crate::moments::{expect_len, quadratic_interpolant_integral};
use crate::oracle::{ManufacturedProblem, Oracle, TestFunction};
use crate::plc::{check_problem, doubled_index};
use crate::scalar::{CompensatedSum, Scalar};
use crate::solver::DenseMatrix;
use crate::system::{CollocationSystem, PqcNodeOrdering, SystemOrdering};

/// Product-integration rule for the piecewise quadratic interpolant on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcIntegralRule<T> {
    pub coeffs: PqcCoeffs<T>,
    pub grid: UniformGrid<T>,
    pub params: KernelParams<T>,
}

/// Weight coupling target node `i` to unknown node `k` (both doubled, interior).
#[inline]
fn coupling<T: Scalar>(c: &PqcCoeffs<T>, i: usize, k: usize) -> T {
    let dist = i.abs_diff(k);
    if k % 2 == 0 {
        c.junction_weight(dist)
    } else {
        c.midpoint_weight(dist)
    }
}

impl<T: Scalar> PqcIntegralRule<T> {
    pub fn new(params: KernelParams<T>, grid: UniformGrid<T>) -> Self {
        Self {
            coeffs: pqc_weights(&params, &grid),
            grid,
            params,
        }
    }

    /// `I_2(x_{i/2})` from junction samples `u(x_0..x_N)` and midpoint samples
    /// `u(x_{1/2}..x_{N-1/2})`, `1 <= i <= 2N-1`.
    pub fn integral(&self, nodes: &[T], mids: &[T], i: usize) -> Result<T> {
        let n = self.grid.cells();
        expect_len("node samples", n + 1, nodes.len())?;
        expect_len("half-node samples", n, mids.len())?;
        if !(1..2 * n).contains(&i) {
            return Err(Error::IndexOutOfRange {
                index: i,
                min: 1,
                max: 2 * n - 1,
            });
        }
        let c = &self.coeffs;
        let mut acc = CompensatedSum::new();
        for j in 1..n {
            acc.add(coupling(c, i, 2 * j) * nodes[j]);
        }
        for (j, &um) in mids.iter().enumerate() {
            acc.add(coupling(c, i, 2 * j + 1) * um);
        }
        acc.add(c.boundary_weight(i) * nodes[0]);
        acc.add(c.boundary_weight(2 * n - i) * nodes[n]);
        Ok(c.eta * acc.value())
    }

    /// `I_2` at an arbitrary `x` in `[a, b]`: the weight tables at collocation
    /// nodes, per-cell moments elsewhere.
    pub fn integral_at(&self, nodes: &[T], mids: &[T], x: T) -> Result<T> {
        match doubled_index(&self.grid, x) {
            Some(i) => self.integral(nodes, mids, i),
            None => quadratic_interpolant_integral(&self.params, &self.grid, nodes, mids, x),
        }
    }
}

/// `eta [sum m/q u + p/n u + boundary terms]` at doubled node `i`.
pub fn pqc_integral<T: Scalar>(rule: &PqcIntegralRule<T>, nodes: &[T], mids: &[T], i: usize) -> Result<T> {
    rule.integral(nodes, mids, i)
}

/// `|I(x) - I_2(x)|` for the interpolant of `u` on the rule's grid.
pub fn pqc_truncation_at<T: Scalar>(
    rule: &PqcIntegralRule<T>,
    oracle: &Oracle<T>,
    u: &TestFunction<T>,
    x: T,
) -> Result<T> {
    let (a, b) = (rule.grid.a(), rule.grid.b());
    let exact = oracle.singular_integral(u, a, b, x)?;
    let nodes = rule.grid.sample_nodes(|y| u.eval(y));
    let mids = rule.grid.sample_half_nodes(|y| u.eval(y));
    let approx = rule.integral_at(&nodes, &mids, x)?;
    Ok((exact - approx).abs())
}

/// Weight matrix `[M Q; P N]` in the given ordering (all entries positive).
pub fn pqc_weight_matrix<T: Scalar>(coeffs: &PqcCoeffs<T>, ordering: PqcNodeOrdering) -> DenseMatrix<T> {
    let n = coeffs.cells();
    let m = 2 * n - 1;
    DenseMatrix::from_fn_par(m, m, |r, col| {
        coupling(
            coeffs,
            ordering.doubled_index(n, r),
            ordering.doubled_index(n, col),
        )
    })
}

/// Unscaled PQC matrix `diag(d) - [M Q; P N]` in the given ordering.
pub fn pqc_matrix<T: Scalar>(coeffs: &PqcCoeffs<T>, ordering: PqcNodeOrdering) -> DenseMatrix<T> {
    let n = coeffs.cells();
    let m = 2 * n - 1;
    DenseMatrix::from_fn_par(m, m, |r, col| {
        let (i, k) = (ordering.doubled_index(n, r), ordering.doubled_index(n, col));
        let w = coupling(coeffs, i, k);
        if r == col {
            coeffs.d_doubled(i) - w
        } else {
            -w
        }
    })
}

/// The four blocks `(M, Q, P, N)` of the blocked weight matrix.
pub fn pqc_blocks<T: Scalar>(coeffs: &PqcCoeffs<T>) -> [DenseMatrix<T>; 4] {
    let n = coeffs.cells();
    let junction = |r: usize| 2 * (r + 1); // rows/cols over x_1..x_{N-1}
    let half = |r: usize| 2 * r + 1; // over x_{1/2}..x_{N-1/2}
    [
        DenseMatrix::from_fn(n - 1, n - 1, |r, c| coupling(coeffs, junction(r), junction(c))),
        DenseMatrix::from_fn(n - 1, n, |r, c| coupling(coeffs, junction(r), half(c))),
        DenseMatrix::from_fn(n, n - 1, |r, c| coupling(coeffs, half(r), junction(c))),
        DenseMatrix::from_fn(n, n, |r, c| coupling(coeffs, half(r), half(c))),
    ]
}

/// `eta (D - W) U = F + eta K` in the blocked ordering.
pub fn assemble_pqc_system<T: Scalar>(
    params: &KernelParams<T>,
    grid: &UniformGrid<T>,
    problem: &ManufacturedProblem<T>,
) -> Result<CollocationSystem<T>> {
    check_problem(params, grid, problem, NodeSet::PqcAll)?;
    let coeffs = pqc_weights(params, grid);
    let n = grid.cells();
    let ordering = PqcNodeOrdering::Blocked;
    let eta = coeffs.eta;
    let (u0, un) = problem.boundary;
    let (rhs, positions) = (0..2 * n - 1)
        .map(|r| {
            let i = ordering.doubled_index(n, r);
            let k = coeffs.boundary_weight(i) * u0 + coeffs.boundary_weight(2 * n - i) * un;
            (problem.f_values[i - 1] + eta * k, grid.doubled_node(i))
        })
        .unzip();
    Ok(CollocationSystem {
        matrix: pqc_matrix(&coeffs, ordering).scaled(eta),
        rhs,
        ordering: SystemOrdering::Pqc(ordering),
        scaling: eta,
        positions,
        cells: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_nonlocal_rhs, monomial_singular_integral};
    use crate::system::{check_structure, reorder_system};
    use approx::assert_relative_eq;

    fn rule(gamma: f64, n: usize) -> PqcIntegralRule<f64> {
        PqcIntegralRule::new(KernelParams::new(gamma).unwrap(), UniformGrid::unit(n).unwrap())
    }

    #[test]
    fn quadratics_are_exact() {
        let r = rule(0.45, 12);
        for p in 0..=2 {
            let f = |y: f64| y.powi(p as i32);
            let nodes = r.grid.sample_nodes(f);
            let mids = r.grid.sample_half_nodes(f);
            for i in 1..24 {
                let x = r.grid.doubled_node(i);
                let exact = monomial_singular_integral(p, 0.0, 1.0, x, 0.45);
                assert_relative_eq!(r.integral(&nodes, &mids, i).unwrap(), exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn table_route_matches_cell_route() {
        let r = rule(0.3, 20);
        let nodes = r.grid.sample_nodes(f64::exp);
        let mids = r.grid.sample_half_nodes(f64::exp);
        for i in [1, 2, 7, 20, 39] {
            let a = r.integral(&nodes, &mids, i).unwrap();
            let b = quadratic_interpolant_integral(&r.params, &r.grid, &nodes, &mids, r.grid.doubled_node(i)).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn two_cell_system_by_hand() {
        let p = KernelParams::new(0.3).unwrap();
        let g = UniformGrid::unit(2).unwrap();
        let c = pqc_weights(&p, &g);
        let a = pqc_matrix(&c, PqcNodeOrdering::Blocked);
        // unknowns: u_1, u_{1/2}, u_{3/2}
        assert_eq!(a[(0, 0)], c.d_doubled(2) - c.m[0]);
        assert_eq!(a[(0, 1)], -c.q[0]);
        assert_eq!(a[(0, 2)], -c.q[0]);
        assert_eq!(a[(1, 0)], -c.p[0]);
        assert_eq!(a[(1, 1)], c.d_doubled(1) - c.n[0]);
        assert_eq!(a[(1, 2)], -c.n[1]);
        assert_eq!(a[(2, 0)], -c.p[0]);
        assert_eq!(a[(2, 1)], -c.n[1]);
        assert_eq!(a[(2, 2)], c.d_doubled(3) - c.n[0]);
    }

    #[test]
    fn constants_solve_exactly_in_both_orderings() {
        let p = KernelParams::new(0.6_f64).unwrap();
        let g = UniformGrid::unit(8).unwrap();
        let prob = exact_nonlocal_rhs(&TestFunction::Constant(1.0), &g, &p, NodeSet::PqcAll, 1e-14).unwrap();
        let sys = assemble_pqc_system(&p, &g, &prob).unwrap();
        for v in sys.solve().unwrap() {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let inter = reorder_system(&sys, PqcNodeOrdering::Interleaved);
        let back = reorder_system(&inter, PqcNodeOrdering::Blocked);
        assert_eq!(back, sys);
        let a = sys.solve_sorted().unwrap();
        let b = inter.solve_sorted().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.0, y.0);
            assert!((x.1 - y.1).abs() < 1e-13);
        }
    }

    #[test]
    fn structure_of_pqc_matrix() {
        let p = KernelParams::new(0.7).unwrap();
        let g = UniformGrid::unit(32).unwrap();
        let prob = exact_nonlocal_rhs(&TestFunction::Exp, &g, &p, NodeSet::PqcAll, 1e-12).unwrap();
        let sys = assemble_pqc_system(&p, &g, &prob).unwrap();
        let rep = check_structure(&sys).unwrap();
        assert!(!rep.symmetric);
        assert!(rep.diag_positive && rep.off_diag_negative);
        assert!(rep.min_row_slack > 0.0);
        assert_eq!(rep.spd_factorization_ok, None);
    }

    #[test]
    fn blocks_have_expected_shapes() {
        let c = pqc_weights(&KernelParams::new(0.2).unwrap(), &UniformGrid::unit(5).unwrap());
        let [m, q, pb, nb] = pqc_blocks(&c);
        assert_eq!((m.rows(), m.cols()), (4, 4));
        assert_eq!((q.rows(), q.cols()), (4, 5));
        assert_eq!((pb.rows(), pb.cols()), (5, 4));
        assert_eq!((nb.rows(), nb.cols()), (5, 5));
        // p_0 appears in rows 0 and 1 of the first column
        assert_eq!(pb[(0, 0)], c.p[0]);
        assert_eq!(pb[(1, 0)], c.p[0]);
    }
}
