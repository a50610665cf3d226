//! Product-integration weights for piecewise linear (PLC) and piecewise
//! quadratic (PQC) interpolation against `|x - y|^(-gamma)` on a uniform grid.
//!
//! Every weight is the integral of one nodal basis function against the
//! kernel, measured in units of `h^(1-gamma)` and multiplied by the scheme's
//! normalising constant (`(2-g)(1-g)` for PLC, `(3-g)(2-g)(1-g)` for PQC).
//! The weights are therefore functions of the distance `z` (in cells) between
//! the collocation point and the basis node, and are exposed as such.
//!
//! The closed forms in [`closed`] are short sums of powers `(z + c)^(k-gamma)`
//! that nearly cancel: the third differences in `m` lose about `z^3` relative
//! accuracy. For distances a few supports away from the basis node the
//! weights are instead summed from the far-field expansion
//!
//! ```text
//! w(z) = S z^(-gamma) sum_n (gamma)_n / n! * mu_n * z^(-n)
//! ```
//!
//! where `mu_n` are the exact moments of the basis function. Both forms agree
//! where they overlap (see the tests).

use crate::error::{Error, Result};
use crate::grid::{KernelParams, UniformGrid};
use crate::scalar::{pow_pos, Scalar};

/// Direct closed forms. Accurate for small arguments only.
pub mod closed {
    use crate::scalar::{pow_pos, Scalar};

    /// `g(z) = (z+1)^(2-g) - 2 z^(2-g) + (z-1)^(2-g)`, `z >= 1`.
    pub fn g<T: Scalar>(z: T, gamma: T) -> T {
        let s = T::lit(2.0) - gamma;
        pow_pos(z + T::one(), s) - T::lit(2.0) * pow_pos(z, s) + pow_pos(z - T::one(), s)
    }

    /// `alpha(z) = (z-1)^(2-g) - z^(2-g) + (2-g) z^(1-g)`, `z >= 1`.
    pub fn alpha<T: Scalar>(z: T, gamma: T) -> T {
        let s = T::lit(2.0) - gamma;
        pow_pos(z - T::one(), s) - pow_pos(z, s) + s * pow_pos(z, T::one() - gamma)
    }

    /// `m(z) = 4[(z+1)^(3-g) - (z-1)^(3-g)] - (3-g)[(z+1)^(2-g) + 6 z^(2-g) + (z-1)^(2-g)]`, `z >= 1`.
    pub fn m<T: Scalar>(z: T, gamma: T) -> T {
        let s3 = T::lit(3.0) - gamma;
        let s2 = T::lit(2.0) - gamma;
        let one = T::one();
        T::lit(4.0) * (pow_pos(z + one, s3) - pow_pos(z - one, s3))
            - s3 * (pow_pos(z + one, s2) + T::lit(6.0) * pow_pos(z, s2) + pow_pos(z - one, s2))
    }

    /// Weight of an integer node seen from a midpoint half a cell away.
    ///
    /// `p_0 = 4[(3/2)^(3-g) + (1/2)^(3-g)] - (3-g)[(3/2)^(2-g) + 7 (1/2)^(2-g)]`.
    /// The singular point sits inside the basis support, so this is not `m(1/2)`.
    pub fn p0<T: Scalar>(gamma: T) -> T {
        let s3 = T::lit(3.0) - gamma;
        let s2 = T::lit(2.0) - gamma;
        let half = T::lit(0.5);
        let three_half = T::lit(1.5);
        T::lit(4.0) * (three_half.powf(s3) + half.powf(s3))
            - s3 * (three_half.powf(s2) + T::lit(7.0) * half.powf(s2))
    }

    /// `q(z) = -8[(z+1)^(3-g) - z^(3-g)] + 4(3-g)[(z+1)^(2-g) + z^(2-g)]`, `z >= 0`.
    pub fn q<T: Scalar>(z: T, gamma: T) -> T {
        let s3 = T::lit(3.0) - gamma;
        let s2 = T::lit(2.0) - gamma;
        let one = T::one();
        T::lit(-8.0) * (pow_pos(z + one, s3) - pow_pos(z, s3))
            + T::lit(4.0) * s3 * (pow_pos(z + one, s2) + pow_pos(z, s2))
    }

    /// `beta(z) = 4[z^(3-g) - (z-1)^(3-g)] - (3-g)[3 z^(2-g) + (z-1)^(2-g)] + (3-g)(2-g) z^(1-g)`, `z >= 1`.
    pub fn beta<T: Scalar>(z: T, gamma: T) -> T {
        let s3 = T::lit(3.0) - gamma;
        let s2 = T::lit(2.0) - gamma;
        let s1 = T::one() - gamma;
        let one = T::one();
        T::lit(4.0) * (pow_pos(z, s3) - pow_pos(z - one, s3))
            - s3 * (T::lit(3.0) * pow_pos(z, s2) + pow_pos(z - one, s2))
            + s3 * s2 * pow_pos(z, s1)
    }
}

/// Basis shapes whose far-field moments are known exactly.
#[derive(Debug, Clone, Copy)]
enum Basis {
    /// `1 - |t|` on `[-1, 1]`.
    Hat,
    /// `1 - t` on `[0, 1]`.
    LinearEnd,
    /// `(1 - |t|)(1 - 2|t|)` on `[-1, 1]`.
    QuadraticJunction,
    /// `1 - 4 t^2` on `[-1/2, 1/2]`.
    QuadraticMidpoint,
    /// `(1 - t)(1 - 2t)` on `[0, 1]`.
    QuadraticEnd,
}

impl Basis {
    /// `int t^n phi(t) dt` over the support.
    fn moment<T: Scalar>(self, n: usize) -> T {
        let nf = T::from_count(n);
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let even = n % 2 == 0;
        match self {
            Basis::Hat if even => two / ((nf + one) * (nf + two)),
            Basis::LinearEnd => one / ((nf + one) * (nf + two)),
            Basis::QuadraticJunction if even => {
                two * (one - nf) / ((nf + one) * (nf + two) * (nf + three))
            }
            Basis::QuadraticMidpoint if even => {
                two * T::lit(0.5).powi(n as i32) / ((nf + one) * (nf + three))
            }
            Basis::QuadraticEnd => (one - nf) / ((nf + one) * (nf + two) * (nf + three)),
            _ => T::zero(),
        }
    }

    /// Sum of `(gamma)_n / n! * mu_n * z^(-n)`; needs `z` beyond the support.
    fn far_field<T: Scalar>(self, z: T, gamma: T) -> T {
        let inv = z.recip();
        let mut rising = T::one();
        let mut zpow = T::one();
        let mut sum = self.moment::<T>(0);
        for n in 1..400 {
            rising = rising * (gamma + T::from_count(n - 1)) / T::from_count(n);
            zpow = zpow * inv;
            let mu = self.moment::<T>(n);
            if mu == T::zero() {
                continue;
            }
            let term = rising * mu * zpow;
            sum = sum + term;
            if term.abs() <= T::epsilon() * T::lit(0.0625) * sum.abs() {
                break;
            }
        }
        z.powf(-gamma) * sum
    }
}

/// Distance (in cells) beyond which weights come from the far-field series.
const FAR_FIELD_START: f64 = 3.0;

#[inline]
fn plc_scale<T: Scalar>(gamma: T) -> T {
    (T::lit(2.0) - gamma) * (T::one() - gamma)
}

#[inline]
fn pqc_scale<T: Scalar>(gamma: T) -> T {
    (T::lit(3.0) - gamma) * (T::lit(2.0) - gamma) * (T::one() - gamma)
}

/// PLC interior weight at real distance `z >= 1`; `g(0) = 2`.
pub fn plc_g_at<T: Scalar>(z: T, gamma: T) -> T {
    if z == T::zero() {
        T::lit(2.0)
    } else if z < T::lit(FAR_FIELD_START) {
        closed::g(z, gamma)
    } else {
        plc_scale(gamma) * Basis::Hat.far_field(z, gamma)
    }
}

/// PLC boundary weight at real distance `z >= 1` from the end node.
pub fn plc_alpha_at<T: Scalar>(z: T, gamma: T) -> T {
    if z < T::lit(FAR_FIELD_START) {
        closed::alpha(z, gamma)
    } else {
        plc_scale(gamma) * Basis::LinearEnd.far_field(z, gamma)
    }
}

/// PQC junction-to-junction weight `m(z)`, `z >= 1`; `m(0) = 2(1 + gamma)`.
pub fn pqc_m_at<T: Scalar>(z: T, gamma: T) -> T {
    if z == T::zero() {
        T::lit(2.0) * (T::one() + gamma)
    } else if z < T::lit(FAR_FIELD_START) {
        closed::m(z, gamma)
    } else {
        pqc_scale(gamma) * Basis::QuadraticJunction.far_field(z, gamma)
    }
}

/// PQC midpoint basis seen from distance `z + 1/2`, `z >= 0`.
pub fn pqc_q_at<T: Scalar>(z: T, gamma: T) -> T {
    let dist = z + T::lit(0.5);
    if dist < T::lit(FAR_FIELD_START / 2.0) {
        closed::q(z, gamma)
    } else {
        pqc_scale(gamma) * Basis::QuadraticMidpoint.far_field(dist, gamma)
    }
}

/// PQC boundary weight at real distance `z >= 1` from the end node.
pub fn pqc_beta_at<T: Scalar>(z: T, gamma: T) -> T {
    if z < T::lit(FAR_FIELD_START) {
        closed::beta(z, gamma)
    } else {
        pqc_scale(gamma) * Basis::QuadraticEnd.far_field(z, gamma)
    }
}

/// `p_0` from its dedicated formula, `p_k = m(k + 1/2)` for `k >= 1`.
pub fn pqc_p<T: Scalar>(k: usize, gamma: T) -> T {
    if k == 0 {
        closed::p0(gamma)
    } else {
        pqc_m_at(T::from_count(k) + T::lit(0.5), gamma)
    }
}

/// `n_0 = (2-g) 2^(g+1)`, `n_k = q(k - 1/2)` for `k >= 1`.
pub fn pqc_n<T: Scalar>(k: usize, gamma: T) -> T {
    if k == 0 {
        (T::lit(2.0) - gamma) * T::lit(2.0).powf(gamma + T::one())
    } else {
        pqc_q_at(T::from_count(k) - T::lit(0.5), gamma)
    }
}

/// `gamma_0 = (2-g)(1-g) 2^(g-1)`, `gamma_i = beta(i + 1/2)` for `i >= 1`.
pub fn pqc_gamma_boundary<T: Scalar>(i: usize, gamma: T) -> T {
    if i == 0 {
        (T::lit(2.0) - gamma) * (T::one() - gamma) * T::lit(2.0).powf(gamma - T::one())
    } else {
        pqc_beta_at(T::from_count(i) + T::lit(0.5), gamma)
    }
}

/// PLC weight table for one `(gamma, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlcCoeffs<T> {
    pub sigma: T,
    /// `g_0 .. g_{N-2}`.
    pub g: Vec<T>,
    /// `alpha_1 .. alpha_{N-1}` (stored from index 0).
    pub alpha: Vec<T>,
    /// `d_1 .. d_{N-1}` (stored from index 0).
    pub d: Vec<T>,
}

impl<T: Scalar> PlcCoeffs<T> {
    /// `alpha_i`, `1 <= i <= N-1`.
    #[inline]
    pub fn alpha(&self, i: usize) -> T {
        self.alpha[i - 1]
    }

    /// `d_i`, `1 <= i <= N-1`.
    #[inline]
    pub fn d(&self, i: usize) -> T {
        self.d[i - 1]
    }

    pub fn cells(&self) -> usize {
        self.d.len() + 1
    }

    /// Named table with the index of its first entry.
    pub fn table(&self, name: &str) -> Option<(usize, &[T])> {
        match name {
            "g" => Some((0, &self.g)),
            "alpha" => Some((1, &self.alpha)),
            "d" => Some((1, &self.d)),
            _ => None,
        }
    }

    pub const TABLES: &'static [&'static str] = &["g", "alpha", "d"];
}

/// PQC weight table for one `(gamma, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcCoeffs<T> {
    pub eta: T,
    /// `m_0 .. m_{N-2}`.
    pub m: Vec<T>,
    /// `p_0 .. p_{N-2}`.
    pub p: Vec<T>,
    /// `q_0 .. q_{N-2}`.
    pub q: Vec<T>,
    /// `n_0 .. n_{N-1}`.
    pub n: Vec<T>,
    /// `beta_1 .. beta_{N-1}` (stored from index 0).
    pub beta: Vec<T>,
    /// `gamma_0 .. gamma_{N-1}`.
    pub gamma_b: Vec<T>,
    /// `d_{1/2}, d_1, ..., d_{N-1/2}`: entry `i-1` holds `d_{i/2}`.
    pub d_half: Vec<T>,
}

impl<T: Scalar> PqcCoeffs<T> {
    pub fn cells(&self) -> usize {
        self.n.len()
    }

    #[inline]
    pub fn beta(&self, i: usize) -> T {
        self.beta[i - 1]
    }

    /// `d_{i/2}`, `1 <= i <= 2N-1`.
    #[inline]
    pub fn d_doubled(&self, i: usize) -> T {
        self.d_half[i - 1]
    }

    /// Weight of a junction basis at doubled distance `dist` from the collocation point.
    #[inline]
    pub fn junction_weight(&self, dist: usize) -> T {
        if dist % 2 == 0 {
            self.m[dist / 2]
        } else {
            self.p[dist / 2]
        }
    }

    /// Weight of a midpoint basis at doubled distance `dist`.
    #[inline]
    pub fn midpoint_weight(&self, dist: usize) -> T {
        if dist % 2 == 0 {
            self.n[dist / 2]
        } else {
            self.q[dist / 2]
        }
    }

    /// Weight of an end-node basis at doubled distance `dist >= 1`.
    #[inline]
    pub fn boundary_weight(&self, dist: usize) -> T {
        if dist % 2 == 0 {
            self.beta(dist / 2)
        } else {
            self.gamma_b[dist / 2]
        }
    }

    pub fn table(&self, name: &str) -> Option<(usize, &[T])> {
        match name {
            "m" => Some((0, &self.m)),
            "p" => Some((0, &self.p)),
            "q" => Some((0, &self.q)),
            "n" => Some((0, &self.n)),
            "beta" => Some((1, &self.beta)),
            "gamma" => Some((0, &self.gamma_b)),
            "d" => Some((1, &self.d_half)),
            _ => None,
        }
    }

    pub const TABLES: &'static [&'static str] = &["m", "p", "q", "n", "beta", "gamma", "d"];
}

/// `sigma_{h,gamma} = h^(1-g) / ((2-g)(1-g))`.
pub fn plc_sigma<T: Scalar>(h: T, gamma: T) -> T {
    h.powf(T::one() - gamma) / plc_scale(gamma)
}

/// `eta_{h,gamma} = h^(1-g) / ((3-g)(2-g)(1-g))`.
pub fn pqc_eta<T: Scalar>(h: T, gamma: T) -> T {
    h.powf(T::one() - gamma) / pqc_scale(gamma)
}

/// PLC weights for `params` on `grid`.
pub fn plc_weights<T: Scalar>(params: &KernelParams<T>, grid: &UniformGrid<T>) -> PlcCoeffs<T> {
    let gamma = params.gamma();
    let n = grid.cells();
    let s = T::lit(2.0) - gamma;
    let s1 = T::one() - gamma;
    let nf = T::from_count(n);
    PlcCoeffs {
        sigma: plc_sigma(grid.h(), gamma),
        g: (0..n - 1).map(|k| plc_g_at(T::from_count(k), gamma)).collect(),
        alpha: (1..n).map(|i| plc_alpha_at(T::from_count(i), gamma)).collect(),
        d: (1..n)
            .map(|i| {
                let fi = T::from_count(i);
                s * (pow_pos(fi, s1) + pow_pos(nf - fi, s1))
            })
            .collect(),
    }
}

/// PQC weights for `params` on `grid`.
pub fn pqc_weights<T: Scalar>(params: &KernelParams<T>, grid: &UniformGrid<T>) -> PqcCoeffs<T> {
    let gamma = params.gamma();
    let n = grid.cells();
    let s1 = T::one() - gamma;
    let nf = T::from_count(n);
    let c = (T::lit(3.0) - gamma) * (T::lit(2.0) - gamma);
    PqcCoeffs {
        eta: pqc_eta(grid.h(), gamma),
        m: (0..n - 1).map(|k| pqc_m_at(T::from_count(k), gamma)).collect(),
        p: (0..n - 1).map(|k| pqc_p(k, gamma)).collect(),
        q: (0..n - 1).map(|k| pqc_q_at(T::from_count(k), gamma)).collect(),
        n: (0..n).map(|k| pqc_n(k, gamma)).collect(),
        beta: (1..n).map(|i| pqc_beta_at(T::from_count(i), gamma)).collect(),
        gamma_b: (0..n).map(|i| pqc_gamma_boundary(i, gamma)).collect(),
        d_half: (1..2 * n)
            .map(|i| {
                let z = T::from_count(i) * T::lit(0.5);
                c * (pow_pos(z, s1) + pow_pos(nf - z, s1))
            })
            .collect(),
    }
}

/// Fallible constructor variant that re-validates its inputs.
pub fn try_plc_weights<T: Scalar>(gamma: T, grid: &UniformGrid<T>) -> Result<PlcCoeffs<T>> {
    let params = KernelParams::new(gamma)?;
    Ok(plc_weights(&params, grid))
}

/// Fallible constructor variant that re-validates its inputs.
pub fn try_pqc_weights<T: Scalar>(gamma: T, grid: &UniformGrid<T>) -> Result<PqcCoeffs<T>> {
    let params = KernelParams::new(gamma)?;
    Ok(pqc_weights(&params, grid))
}

/// One coefficient table as CSV: header `index,value`, 17 significant digits.
pub fn table_csv<T: Scalar>(first_index: usize, values: &[T]) -> String {
    let mut out = String::from("index,value\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{:.16e}\n", first_index + k, v.to_f64_lossy()));
    }
    out
}

/// Parses a table written by [`table_csv`].
pub fn parse_table_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("index,value") => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (i, v) = l
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("missing comma in {l:?}")))?;
            let i = i.parse().map_err(|_| Error::Parse(format!("bad index {i:?}")))?;
            let v = v.parse().map_err(|_| Error::Parse(format!("bad value {v:?}")))?;
            Ok((i, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> UniformGrid<f64> {
        UniformGrid::unit(n).unwrap()
    }

    fn params(g: f64) -> KernelParams<f64> {
        KernelParams::new(g).unwrap()
    }

    // Reference values computed with 40-digit arithmetic from the closed forms.
    #[test]
    fn closed_forms_against_extended_precision() {
        assert_relative_eq!(closed::g(1.0, 0.5), 0.82842712474619009760, max_relative = 1e-15);
        assert_relative_eq!(pqc_p(1, 0.3), 0.93750198623626097488, max_relative = 1e-14);
        assert_relative_eq!(closed::p0(0.3), 1.3730109913372328586, max_relative = 1e-14);
        assert_relative_eq!(closed::m(1.0, 0.3), 1.0197508027521930793, max_relative = 1e-14);
        assert_relative_eq!(closed::q(1.0, 0.3), 1.9051501557903011297, max_relative = 1e-14);
        assert_relative_eq!(pqc_n(1, 0.3), 2.1644720974781887397, max_relative = 1e-14);
        assert_relative_eq!(closed::beta(2.0, 0.3), 0.43157604000774788851, max_relative = 1e-14);
        assert_relative_eq!(pqc_gamma_boundary(1, 0.3), 0.46601509983812457605, max_relative = 1e-14);
        assert_relative_eq!(pqc_gamma_boundary(0, 0.3), 0.73253092594022518928, max_relative = 1e-14);
    }

    #[test]
    fn large_argument_weights_against_extended_precision() {
        // k = 1000, gamma = 0.3; naive evaluation loses ~9 digits here.
        assert_relative_eq!(plc_g_at(1000.0, 0.3), 0.14981212887240115999, max_relative = 1e-13);
        assert_relative_eq!(pqc_m_at(1000.0, 0.3), 0.13483090897395110657, max_relative = 1e-13);
        assert_relative_eq!(pqc_q_at(1000.0, 0.3), 0.26962138969998818722, max_relative = 1e-13);
        assert_relative_eq!(pqc_beta_at(1000.0, 0.3), 0.067415454485967691710, max_relative = 1e-13);
        assert_relative_eq!(plc_alpha_at(1000.0, 0.3), 0.074913555043520601293, max_relative = 1e-13);
    }

    #[test]
    fn far_field_matches_closed_form_where_both_are_accurate() {
        for &gamma in &[0.0, 0.1, 0.35, 0.7, 0.95] {
            for &z in &[3.0_f64, 3.5, 4.0, 5.0, 7.5, 10.0] {
                let s1 = plc_scale(gamma);
                let s2 = pqc_scale(gamma);
                // closed forms lose about z^3 ulps of absolute accuracy
                let tol = 1e-12;
                let eps = 2e-15 * z * z * z;
                assert_relative_eq!(
                    s1 * Basis::Hat.far_field(z, gamma),
                    closed::g(z, gamma),
                    epsilon = eps,
                    max_relative = tol
                );
                assert_relative_eq!(
                    s1 * Basis::LinearEnd.far_field(z, gamma),
                    closed::alpha(z, gamma),
                    epsilon = eps,
                    max_relative = tol
                );
                assert_relative_eq!(
                    s2 * Basis::QuadraticJunction.far_field(z, gamma),
                    closed::m(z, gamma),
                    epsilon = eps,
                    max_relative = tol
                );
                assert_relative_eq!(
                    s2 * Basis::QuadraticMidpoint.far_field(z, gamma),
                    closed::q(z - 0.5, gamma),
                    epsilon = eps,
                    max_relative = tol
                );
                assert_relative_eq!(
                    s2 * Basis::QuadraticEnd.far_field(z, gamma),
                    closed::beta(z, gamma),
                    epsilon = eps,
                    max_relative = tol
                );
            }
        }
    }

    #[test]
    fn plc_special_values() {
        for &gamma in &[0.0, 0.2, 0.5, 0.9] {
            let c = plc_weights(&params(gamma), &grid(32));
            assert_eq!(c.g[0], 2.0);
            assert_relative_eq!(c.alpha(1), 1.0 - gamma, max_relative = 1e-15);
        }
        let c = plc_weights(&params(0.0), &grid(64));
        for g in &c.g {
            assert_relative_eq!(*g, 2.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn pqc_special_values() {
        for &gamma in &[0.0, 0.3, 0.8] {
            let c = pqc_weights(&params(gamma), &grid(16));
            assert_relative_eq!(c.m[0], 2.0 * (1.0 + gamma), max_relative = 1e-15);
            assert_relative_eq!(c.n[0], (2.0 - gamma) * 2f64.powf(gamma + 1.0), max_relative = 1e-15);
            assert_relative_eq!(
                c.gamma_b[0],
                (2.0 - gamma) * (1.0 - gamma) * 2f64.powf(gamma - 1.0),
                max_relative = 1e-15
            );
        }
        let c = pqc_weights(&params(0.0), &grid(16));
        assert_eq!(c.n[0], 4.0);
        assert_eq!(c.gamma_b[0], 1.0);
        assert_eq!(c.q[0], 4.0);
        assert_relative_eq!(c.p[0], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn half_integer_relations() {
        let gamma = 0.45;
        let c = pqc_weights(&params(gamma), &grid(40));
        for k in 1..39 {
            assert_relative_eq!(c.p[k], pqc_m_at(k as f64 + 0.5, gamma), max_relative = 1e-15);
            assert_relative_eq!(c.n[k], pqc_q_at(k as f64 - 0.5, gamma), max_relative = 1e-15);
            assert_relative_eq!(
                c.gamma_b[k],
                pqc_beta_at(k as f64 + 0.5, gamma),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn diagonal_matches_kernel_mass() {
        for &gamma in &[0.0, 0.3, 0.7] {
            let p = params(gamma);
            let g = UniformGrid::new(-0.5, 2.0, 50).unwrap();
            let plc = plc_weights(&p, &g);
            for i in 1..50 {
                let exact = p.kernel_mass(g.a(), g.b(), g.node(i));
                assert_relative_eq!(plc.sigma * plc.d(i), exact, max_relative = 1e-13);
            }
            let pqc = pqc_weights(&p, &g);
            for i in 1..100 {
                let exact = p.kernel_mass(g.a(), g.b(), g.doubled_node(i));
                assert_relative_eq!(pqc.eta * pqc.d_doubled(i), exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn row_identity_plc() {
        for &gamma in &[0.0, 0.25, 0.5, 0.75, 0.95] {
            let n = 200;
            let c = plc_weights(&params(gamma), &grid(n));
            for i in 1..n {
                let off: f64 = (1..n).map(|j| c.g[i.abs_diff(j)]).sum();
                let lhs = c.d(i) - off;
                let rhs = c.alpha(i) + c.alpha(n - i);
                assert!((lhs - rhs).abs() <= 1e-10 * c.d(i), "i={i} {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn decay_of_interior_weights() {
        for &gamma in &[0.1, 0.5, 0.9] {
            for k in [100.0_f64, 1000.0, 8000.0] {
                let ratio = plc_g_at(k, gamma) / (plc_scale(gamma) * k.powf(-gamma));
                assert!((0.9..=1.1).contains(&ratio));
            }
        }
    }

    #[test]
    fn positivity_up_to_4096() {
        for step in 0..10 {
            let gamma = step as f64 / 10.0;
            let n = 4096;
            let plc = plc_weights(&params(gamma), &grid(n));
            assert!(plc.g.iter().chain(&plc.alpha).all(|&v| v > 0.0));
            let pqc = pqc_weights(&params(gamma), &grid(n));
            for arr in [&pqc.m, &pqc.p, &pqc.q, &pqc.n, &pqc.beta, &pqc.gamma_b] {
                assert!(arr.iter().all(|&v| v > 0.0), "gamma = {gamma}");
            }
        }
    }

    #[test]
    fn single_precision_tables() {
        let g = UniformGrid::<f32>::unit(16).unwrap();
        let p = KernelParams::new(0.3_f32).unwrap();
        let c = pqc_weights(&p, &g);
        assert!((c.p[0] - closed::p0(0.3_f32)).abs() < 1e-6);
        assert!(c.m.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn csv_dump_round_trip() {
        let c = plc_weights(&params(0.3), &grid(8));
        let text = table_csv(1, &c.alpha);
        assert!(text.starts_with("index,value\n1,"));
        let parsed = parse_table_csv(&text).unwrap();
        assert_eq!(parsed.len(), 7);
        for (k, (i, v)) in parsed.iter().enumerate() {
            assert_eq!(*i, k + 1);
            assert_eq!(*v, c.alpha[k]);
        }
    }
}
