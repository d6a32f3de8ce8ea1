//! Calculus of matrix exponential-polynomial functions on the half line.
//!
//! Functions of the form `F(y) = sum_t C_t y^{p_t} e^{-a_t y}` with matrix
//! coefficients and positive rates are closed under the operations the
//! Marchenko machinery needs: shifting the argument (`F(z + y)` expands over
//! the same rates with split powers via the binomial theorem), integration
//! against the scalar basis `y^q e^{-a y}` (incomplete-gamma tail integrals,
//! evaluated as explicit finite sums), differentiation, and one-sided
//! Fourier transforms.  Working in this algebra turns the Marchenko
//! integral equation into a small dense linear system that is exact up to
//! rounding, with no quadrature involved.

use crate::linalg::{cx, CMat};
use crate::model::ExpPolyTerm;
use num_complex::Complex64;

/// Two rates closer than this merge into one basis slot.
pub const RATE_MERGE_TOL: f64 = 1e-10;

/// Scalar basis function `y^power e^{-rate y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFn {
    pub rate: f64,
    pub power: u32,
}

impl BasisFn {
    /// Value at `y`.
    pub fn eval(&self, y: f64) -> f64 {
        y.powi(self.power as i32) * (-self.rate * y).exp()
    }
}

/// Exact factorial as a float; powers in this crate stay far below the
/// 170! overflow threshold.
pub fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

/// Binomial coefficient as a float.
pub fn binom(p: u32, q: u32) -> f64 {
    if q > p {
        return 0.0;
    }
    factorial(p) / (factorial(q) * factorial(p - q))
}

/// Tail integral `int_x^inf z^m e^{-s z} dz` for `Re s > 0`, evaluated as
/// the explicit finite sum `e^{-s x} sum_{i=0}^m (m!/i!) x^i / s^{m-i+1}`.
pub fn tail_integral_cx(m: u32, s: Complex64, x: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut coeff = factorial(m);
    let mut x_pow = 1.0;
    for i in 0..=m {
        if i > 0 {
            coeff /= i as f64;
            x_pow *= x;
        }
        sum += coeff * x_pow / s.powu(m - i + 1);
    }
    (-s * x).exp() * sum
}

/// Real-rate specialization of [`tail_integral_cx`].
pub fn tail_integral(m: u32, s: f64, x: f64) -> f64 {
    tail_integral_cx(m, cx(s), x).re
}

/// Value of `sum_t C_t y^{p_t} e^{-a_t y}` at `y`.
pub fn eval_terms(terms: &[ExpPolyTerm], n: usize, y: f64) -> CMat {
    let mut acc = CMat::zeros(n, n);
    for t in terms {
        acc += &t.c * cx(y.powi(t.power as i32) * (-t.rate * y).exp());
    }
    acc
}

/// Termwise derivative: `d/dy [C y^p e^{-a y}]` contributes
/// `p C y^{p-1} e^{-a y} - a C y^p e^{-a y}`.
pub fn derivative_terms(terms: &[ExpPolyTerm]) -> Vec<ExpPolyTerm> {
    let mut out = Vec::new();
    for t in terms {
        if t.power > 0 {
            out.push(ExpPolyTerm {
                c: &t.c * cx(t.power as f64),
                rate: t.rate,
                power: t.power - 1,
            });
        }
        out.push(ExpPolyTerm { c: &t.c * cx(-t.rate), rate: t.rate, power: t.power });
    }
    out
}

/// One-sided transform `int_x^inf` of a term list against `e^{i k y}`:
/// each term contributes `C * int_x^inf y^p e^{-(a - ik) y} dy`.
/// Requires `Im k > -min rate`, which covers the closed upper half plane.
pub fn transform_terms(terms: &[ExpPolyTerm], n: usize, k: Complex64, x: f64) -> CMat {
    let mut acc = CMat::zeros(n, n);
    for t in terms {
        let s = cx(t.rate) - Complex64::i() * k;
        acc += &t.c * tail_integral_cx(t.power, s, x);
    }
    acc
}

/// Shift expansion of a term list: the coefficients `G_beta(z)` (again
/// exponential-polynomial) such that `F(z + y) = sum_beta G_beta(z)
/// h_beta(y)` over the scalar basis, together with the basis itself.
#[derive(Debug, Clone)]
pub struct ShiftExpansion {
    /// Scalar basis `h_beta(y) = y^{q_beta} e^{-a_beta y}`, sorted by rate
    /// then power.
    pub basis: Vec<BasisFn>,
    /// `g[beta]` holds the terms of `G_beta(z)`.
    pub g: Vec<Vec<ExpPolyTerm>>,
    /// Channel count of the coefficients.
    pub n: usize,
    /// Notes about merged near-duplicate rates.
    pub warnings: Vec<String>,
}

impl ShiftExpansion {
    /// Builds the expansion of `F(z+y)`.  The basis keeps, per distinct
    /// rate, all powers up to the largest power seen plus `extra_powers`
    /// padding slots; padding changes nothing analytically but keeps null
    /// spaces honest in degenerate situations.
    pub fn new(terms: &[ExpPolyTerm], n: usize, extra_powers: u32) -> Self {
        let mut warnings = Vec::new();
        // Collect distinct rates with their largest power.
        let mut rates: Vec<(f64, u32)> = Vec::new();
        for t in terms {
            match rates.iter_mut().find(|(r, _)| (*r - t.rate).abs() <= RATE_MERGE_TOL) {
                Some((r, p)) => {
                    if (*r - t.rate).abs() > 0.0 {
                        warnings.push(format!(
                            "rates {r} and {} merged (closer than {RATE_MERGE_TOL:.0e})",
                            t.rate
                        ));
                    }
                    *p = (*p).max(t.power);
                }
                None => rates.push((t.rate, t.power)),
            }
        }
        rates.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut basis = Vec::new();
        for &(rate, max_power) in &rates {
            for power in 0..=max_power + extra_powers {
                basis.push(BasisFn { rate, power });
            }
        }
        let mut exp = Self::over_basis(terms, n, basis);
        exp.warnings = warnings;
        exp
    }

    /// Expands a term list over an externally supplied basis, which must
    /// contain a slot for every (rate, power up to the term's power) pair.
    /// Used to expand the derivative of a function over the basis of the
    /// function itself.
    pub fn over_basis(terms: &[ExpPolyTerm], n: usize, basis: Vec<BasisFn>) -> Self {
        // (z+y)^p e^{-a(z+y)} = sum_q binom(p,q) z^{p-q} e^{-a z} y^q e^{-a y}.
        let mut g: Vec<Vec<ExpPolyTerm>> = vec![Vec::new(); basis.len()];
        for t in terms {
            for q in 0..=t.power {
                let slot = basis
                    .iter()
                    .position(|b| (b.rate - t.rate).abs() <= RATE_MERGE_TOL && b.power == q)
                    .expect("basis contains every (rate, power <= max) pair");
                g[slot].push(ExpPolyTerm {
                    c: &t.c * cx(binom(t.power, q)),
                    rate: t.rate,
                    power: t.power - q,
                });
            }
        }
        ShiftExpansion { basis, g, n, warnings: Vec::new() }
    }

    /// Number of scalar basis functions.
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// The block row `G(x) = [G_1(x) ... G_B(x)]` as an `n x Bn` matrix.
    pub fn g_row(&self, x: f64) -> CMat {
        let b = self.basis_len();
        let mut row = CMat::zeros(self.n, b * self.n);
        for (beta, terms) in self.g.iter().enumerate() {
            row.view_mut((0, beta * self.n), (self.n, self.n))
                .copy_from(&eval_terms(terms, self.n, x));
        }
        row
    }

    /// The Gram block matrix `T(x)` with `n x n` blocks
    /// `T_{gamma beta}(x) = int_x^inf h_gamma(z) G_beta(z) dz`,
    /// assembled as a `Bn x Bn` matrix in (gamma, beta) block order.
    pub fn gram(&self, x: f64) -> CMat {
        let b = self.basis_len();
        let n = self.n;
        let mut t_mat = CMat::zeros(b * n, b * n);
        for (gamma, h) in self.basis.iter().enumerate() {
            for (beta, terms) in self.g.iter().enumerate() {
                let mut block = CMat::zeros(n, n);
                for term in terms {
                    let weight =
                        tail_integral(h.power + term.power, h.rate + term.rate, x);
                    block += &term.c * cx(weight);
                }
                t_mat.view_mut((gamma * n, beta * n), (n, n)).copy_from(&block);
            }
        }
        t_mat
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_re, max_abs};
    use approx::assert_relative_eq;

    fn term(c: f64, rate: f64, power: u32) -> ExpPolyTerm {
        ExpPolyTerm::new(mat_re(1, 1, &[c]), rate, power).unwrap()
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        // Independent check by fine trapezoid quadrature.
        for &(m, s, x) in &[(0u32, 1.0, 0.0), (2, 0.5, 1.3), (3, 2.0, 0.7), (1, 1.5, 0.0)] {
            let h = 1e-4;
            let upper = x + 60.0 / s;
            let steps = ((upper - x) / h) as usize;
            let mut quad = 0.0;
            for i in 0..=steps {
                let z = x + i as f64 * h;
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                quad += w * z.powi(m as i32) * (-s * z).exp();
            }
            quad *= h;
            let exact = tail_integral(m, s, x);
            assert_relative_eq!(exact, quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn tail_integral_complex_rate_matches_quadrature() {
        let s = Complex64::new(1.0, -0.7);
        let m = 2;
        let x = 0.4;
        let h = 1e-4;
        let steps = ((x + 80.0 - x) / h) as usize;
        let mut quad = Complex64::new(0.0, 0.0);
        for i in 0..=steps {
            let z = x + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            quad += w * z.powi(m as i32) * (-s * z).exp();
        }
        quad *= h;
        let exact = tail_integral_cx(m, s, x);
        assert!((exact - quad).norm() < 1e-6 * exact.norm());
    }

    #[test]
    fn shift_expansion_reconstructs_shifted_values() {
        let terms = vec![term(2.0, 1.0, 0), term(-0.5, 0.5, 2), term(1.0, 1.0, 1)];
        let exp = ShiftExpansion::new(&terms, 1, 0);
        for &(z, y) in &[(0.3, 0.9), (1.2, 0.1), (0.0, 2.0), (2.5, 1.7)] {
            let direct = eval_terms(&terms, 1, z + y);
            let mut via_expansion = CMat::zeros(1, 1);
            for (beta, h) in exp.basis.iter().enumerate() {
                via_expansion += eval_terms(&exp.g[beta], 1, z) * cx(h.eval(y));
            }
            assert!(max_abs(&(direct - via_expansion)) < 1e-14);
        }
    }

    #[test]
    fn near_duplicate_rates_merge_with_warning() {
        let terms = vec![term(1.0, 1.0, 0), term(2.0, 1.0 + 1e-12, 0)];
        let exp = ShiftExpansion::new(&terms, 1, 0);
        assert_eq!(exp.basis_len(), 1);
        assert_eq!(exp.warnings.len(), 1);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let terms = vec![term(1.5, 0.8, 3), term(-2.0, 1.2, 0)];
        let deriv = derivative_terms(&terms);
        let h = 1e-6;
        for &y in &[0.5, 1.0, 3.3] {
            let numeric =
                (eval_terms(&terms, 1, y + h) - eval_terms(&terms, 1, y - h)) / cx(2.0 * h);
            let exact = eval_terms(&deriv, 1, y);
            assert!(max_abs(&(numeric - exact)) < 1e-8);
        }
    }

    #[test]
    fn transform_of_plain_exponential_is_a_simple_pole() {
        // int_0^inf 2 e^{-y} e^{iky} dy = 2/(1 - ik).
        let terms = vec![term(2.0, 1.0, 0)];
        let k = Complex64::new(0.7, 0.0);
        let got = transform_terms(&terms, 1, k, 0.0)[(0, 0)];
        let expected = cx(2.0) / (cx(1.0) - Complex64::i() * k);
        assert!((got - expected).norm() < 1e-15);
    }

    #[test]
    fn gram_entry_matches_direct_integral() {
        // Single term C e^{-y}: T(x) = int_x^inf e^{-z} C e^{-z} dz
        //                             = C e^{-2x} / 2.
        let terms = vec![term(-2.0, 1.0, 0)];
        let exp = ShiftExpansion::new(&terms, 1, 0);
        let x = 0.6;
        let t_mat = exp.gram(x);
        assert_relative_eq!(t_mat[(0, 0)].re, -(-2.0 * x).exp(), epsilon = 1e-14);
        assert_relative_eq!(t_mat[(0, 0)].im, 0.0, epsilon = 1e-16);
    }
}
