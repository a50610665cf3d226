//! Gauss-Jacobi rules for `int_0^1 f(s) s^(-gamma) ds`.
//!
//! Nodes are the zeros of the Jacobi polynomial `P_n^(0, -gamma)` on `[-1, 1]`,
//! found by Newton's method on the three-term recurrence and mapped to `[0, 1]`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{sum_compensated, Scalar};

/// Smallest and largest rule sizes used by the doubling ladder.
pub const MIN_NODES: usize = 4;
pub const MAX_NODES: usize = 4096;
const LADDER: usize = 11; // 4, 8, ..., 4096

/// One rule: `int_0^1 f(s) s^(-gamma) ds ~ sum w_k f(s_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// Error-free sum: `a + b = hi + lo` exactly.
#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let hi = a + b;
    let bb = hi - a;
    let lo = (a - (hi - bb)) + (b - bb);
    (hi, lo)
}

/// Orthonormal recurrence for the weight `(1+t)^beta` on `[-1, 1]`, evaluated at
/// `t = 2s - 1 = 1 - 2c` where `c = 1 - s` is carried separately so that both
/// ends keep full relative precision.
///
/// Returns `p_n(t)`, `p_n'(t)` and `sum_{k<n} p_k(t)^2`.
fn orthonormal_eval<T: Scalar>(n: usize, beta: T, s: T, c: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let off = |k: usize| -> T {
        let k = T::from_count(k);
        let q = two * k + beta;
        (four * k * k * (k + beta) * (k + beta) / (q * q * (q + one) * (q - one))).sqrt()
    };
    // t exactly as an unevaluated pair hi + lo
    let (t_hi, t_lo) = if s <= c {
        two_sum(two * s, -one)
    } else {
        two_sum(one, -two * c)
    };
    let shifted = |diag: T| -> T { t_hi + (t_lo - diag) };
    let mu0 = two.powf(beta + one) / (beta + one);
    let (mut prev, mut dprev) = (T::zero(), T::zero());
    let (mut cur, mut dcur) = (one / mu0.sqrt(), T::zero());
    let mut acc = T::zero();
    for k in 0..n {
        acc = acc + cur * cur;
        let diag = if k == 0 {
            beta / (beta + two)
        } else {
            let q = two * T::from_count(k) + beta;
            beta * beta / (q * (q + two))
        };
        let b_k = if k == 0 { T::zero() } else { off(k) };
        let b_next = off(k + 1);
        let x = shifted(diag);
        let next = (x * cur - b_k * prev) / b_next;
        let dnext = (cur + x * dcur - b_k * dprev) / b_next;
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
    }
    (cur, dcur, acc)
}

impl<T: Scalar> JacobiRule<T> {
    /// `n`-point rule for the weight `s^(-gamma)` on `[0, 1]`, `0 <= gamma < 1`.
    pub fn new(n: usize, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma < T::one()) {
            return Err(Error::InvalidGamma(gamma.to_f64_lossy()));
        }
        if n == 0 {
            return Err(Error::CellCount {
                n,
                min: 1,
                max: MAX_NODES,
            });
        }
        let beta = -gamma;
        let one = T::one();
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let pi = T::PI();
        let nf = T::from_count(n);
        let tol = T::epsilon() * T::lit(4.0);
        let to_unit = two.powf(-(beta + one));

        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            let fi = T::from_count(i);
            let theta = pi * (T::lit(4.0) * fi - one) / (T::lit(4.0) * nf + two * beta + two);
            // t = cos(theta): s = cos^2(theta/2), c = sin^2(theta/2)
            let mut s = (half * theta).cos().powi(2);
            let mut c = (half * theta).sin().powi(2);
            let mut polish = 2;
            for _ in 0..100 {
                let (p, dp, _) = orthonormal_eval(n, beta, s, c);
                let dt = p / dp;
                s = s - half * dt;
                c = c + half * dt;
                if (half * dt).abs() <= tol * s.min(c) {
                    if polish == 0 {
                        break;
                    }
                    polish -= 1;
                }
            }
            let (_, _, acc) = orthonormal_eval(n, beta, s, c);
            nodes.push(s);
            weights.push(to_unit / acc);
        }
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum w_k f(s_k)`.
    pub fn apply<F: Fn(T) -> T>(&self, f: F) -> T {
        sum_compensated(self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * f(s)))
    }
}

/// Lazily built ladder of rules `4, 8, ..., 4096` for a fixed exponent.
#[derive(Debug)]
pub struct SingularQuadrature<T> {
    gamma: T,
    rules: [OnceLock<JacobiRule<T>>; LADDER],
    // Gauss-Legendre ladder for points well separated from the interval
    regular: [OnceLock<JacobiRule<T>>; LADDER],
}

impl<T: Scalar> SingularQuadrature<T> {
    pub fn new(gamma: T) -> Result<Self> {
        // validates gamma
        JacobiRule::new(1, gamma)?;
        Ok(Self {
            gamma,
            rules: std::array::from_fn(|_| OnceLock::new()),
            regular: std::array::from_fn(|_| OnceLock::new()),
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Rule number `level` of the ladder (`4 * 2^level` nodes).
    pub fn rule(&self, level: usize) -> &JacobiRule<T> {
        self.rules[level].get_or_init(|| {
            JacobiRule::new(MIN_NODES << level, self.gamma).expect("validated exponent")
        })
    }

    fn regular_rule(&self, level: usize) -> &JacobiRule<T> {
        self.regular[level]
            .get_or_init(|| JacobiRule::new(MIN_NODES << level, T::zero()).expect("gamma = 0"))
    }

    /// `int_0^len f(s) s^(-gamma) ds` at one ladder level.
    fn one_side<F: Fn(T) -> T>(&self, level: usize, len: T, f: &F) -> T {
        if len <= T::zero() {
            return T::zero();
        }
        len.powf(T::one() - self.gamma) * self.rule(level).apply(|s| f(len * s))
    }

    /// `int_A^B f(y) |x - y|^(-gamma) dy` for arbitrary `x`, doubling the node
    /// count until successive estimates differ by less than `tol / 4` (or by a
    /// few ulps of the pieces summed into the estimate when that is larger).
    ///
    /// Returns the estimate and the node count per side that achieved it.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, lo: T, hi: T, x: T, tol: T) -> Result<(T, usize)> {
        let gap = (hi - lo) / T::lit(16.0);
        let separated = x <= lo - gap || x >= hi + gap;
        // (estimate, magnitude of the pieces combined into it)
        let eval = |level: usize| -> (T, T) {
            let (p, q) = if separated {
                let len = hi - lo;
                let g = self.gamma;
                let v = len
                    * self.regular_rule(level).apply(|s| {
                        let y = lo + len * s;
                        f(y) * (x - y).abs().powf(-g)
                    });
                (v, T::zero())
            } else if x <= lo {
                // int_x^hi - int_x^lo, both singular at their left end
                (
                    self.one_side(level, hi - x, &|s| f(x + s)),
                    -self.one_side(level, lo - x, &|s| f(x + s)),
                )
            } else if x >= hi {
                (
                    self.one_side(level, x - lo, &|s| f(x - s)),
                    -self.one_side(level, x - hi, &|s| f(x - s)),
                )
            } else {
                (
                    self.one_side(level, x - lo, &|s| f(x - s)),
                    self.one_side(level, hi - x, &|s| f(x + s)),
                )
            };
            (p + q, p.abs() + q.abs())
        };
        let (mut prev, _) = eval(0);
        for level in 1..LADDER {
            let (next, scale) = eval(level);
            let floor = T::lit(32.0) * T::epsilon() * scale;
            if (next - prev).abs() < (tol / T::lit(4.0)).max(floor) {
                return Ok((next, MIN_NODES << level));
            }
            prev = next;
        }
        Err(Error::OracleNonConvergence {
            x: x.to_f64_lossy(),
            nodes: MAX_NODES,
        })
    }
}
