//! Dense complex linear-algebra kernels shared by the scattering solvers.
//!
//! Everything operates on heap-allocated `DMatrix<Complex64>` values; the
//! matrices that arise in half-line scattering are tiny (the channel count
//! `n` rarely exceeds a handful, and the largest dense systems are the
//! Kronecker-lifted Sylvester and Marchenko collocation systems).  The
//! routines here favour explicit decompositions with checkable residuals
//! over black-box calls: matrix exponentials go through an eigendecomposition
//! whenever one is trustworthy, Sylvester systems are solved by Kronecker
//! vectorization, and null spaces come from singular value thresholds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Largest n-by-n size accepted by the dense kernels.
pub const MAX_DIM: usize = 64;
/// Largest operand size accepted by the Kronecker-lifted Sylvester solver.
pub const MAX_SYLVESTER_DIM: usize = 16;
/// Eigenvector-matrix condition number beyond which `mat_exp` abandons the
/// eigendecomposition route and falls back to scaling and squaring.
pub const EXP_EIGEN_COND_LIMIT: f64 = 1e8;
/// A consecutive phase increment this close to a half turn makes the
/// branch choice ambiguous, so `arg_det_unwrap` refuses to guess.
pub const PHASE_JUMP_LIMIT: f64 = std::f64::consts::PI - 0.1;

/// Errors produced by the dense kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("operand shapes are incompatible: {context}")]
    ShapeMismatch { context: String },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not hermitian: max |M - M^*| entry = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error(
        "Sylvester system is singular (spectra of A and -B overlap): \
         smallest singular value {min_singular:.3e}"
    )]
    SpectralCollision { min_singular: f64 },
    #[error(
        "Sylvester residual {residual:.3e} exceeds the bound {bound:.3e}; \
         the system is too ill-conditioned to certify"
    )]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("determinant vanished at path index {index}; phase is undefined there")]
    SingularOnPath { index: usize },
    #[error(
        "phase increment {jump:.3} at path step {index} is too close to a half \
         turn; refine the path before unwrapping"
    )]
    PhaseJumpTooLarge { index: usize, jump: f64 },
    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
}

type Result<T> = std::result::Result<T, LinalgError>;

/// Real scalar promoted to a complex entry.
#[inline]
pub fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Complex entry from its parts.
#[inline]
pub fn cxi(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major real entries promoted to a complex matrix.
pub fn mat_re(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    assert_eq!(rows * cols, entries.len(), "entry count must match the shape");
    CMat::from_row_iterator(rows, cols, entries.iter().map(|&x| cx(x)))
}

/// Row-major complex entries collected into a matrix.
pub fn mat_cx(rows: usize, cols: usize, entries: &[Complex64]) -> CMat {
    assert_eq!(rows * cols, entries.len(), "entry count must match the shape");
    CMat::from_row_iterator(rows, cols, entries.iter().copied())
}

/// Identity of the given size.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest entry magnitude; zero for an empty matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Hermitian part (M + M^*)/2.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * cx(0.5)
}

fn check_finite(m: &CMat) -> Result<()> {
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let z = m[(row, col)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

fn check_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() > MAX_DIM {
        return Err(LinalgError::TooLarge { dim: m.nrows(), max: MAX_DIM });
    }
    Ok(m.nrows())
}

/// Whether `M` equals its conjugate transpose up to `tol` in max-entry norm.
pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    hermitian_defect(m) <= tol
}

/// Max-entry norm of M - M^*.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Matrix exponential `exp(-M t)`.
///
/// Hermitian input is handled by a unitary eigendecomposition and is exact to
/// rounding.  Other diagonalizable input goes through a Schur eigenvalue
/// sweep with eigenvectors recovered from singular-value null spaces; the
/// route is only trusted while the eigenvector matrix has condition number
/// below [`EXP_EIGEN_COND_LIMIT`].  Everything else (defective or
/// ill-conditioned input) falls back to Pade scaling and squaring, which is
/// backward stable but not exact.
///
/// # Errors
///
/// Returns an error for non-square, oversized, or non-finite input.
pub fn mat_exp(m: &CMat, t: f64) -> Result<CMat> {
    let n = check_square(m)?;
    check_finite(m)?;
    if n == 0 {
        return Ok(m.clone());
    }
    let scale = max_abs(m).max(1.0);
    if hermitian_defect(m) <= 1e-12 * scale {
        let se = hermitize(m).symmetric_eigen();
        let d = CMat::from_diagonal(&se.eigenvalues.map(|lam| cx((-lam * t).exp())));
        return Ok(&se.eigenvectors * d * se.eigenvectors.adjoint());
    }
    if let Some(result) = try_eigen_exp(m, t) {
        return Ok(result);
    }
    Ok(pade_exp(&(m * cx(-t))))
}

/// Eigenvalues of a general square complex matrix, by Schur iteration.
///
/// # Errors
///
/// Returns an error for non-square or non-finite input, or when the QR
/// iteration fails to converge.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = check_square(m)?;
    check_finite(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = max_abs(m).max(1.0);
    if hermitian_defect(m) <= 1e-12 * scale {
        let se = hermitize(m).symmetric_eigen();
        let mut eigs: Vec<Complex64> = se.eigenvalues.iter().map(|&l| cx(l)).collect();
        eigs.sort_by(|a, b| a.re.total_cmp(&b.re));
        return Ok(eigs);
    }
    let schur = m.clone().try_schur(1e-13, 2000).ok_or(LinalgError::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

fn try_eigen_exp(m: &CMat, t: f64) -> Option<CMat> {
    let n = m.nrows();
    let eigs = eigenvalues(m).ok()?;
    let scale = max_abs(m).max(1.0);

    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for lam in eigs {
        match groups.iter_mut().find(|(rep, _)| (*rep - lam).norm() <= 1e-9 * scale) {
            Some((_, count)) => *count += 1,
            None => groups.push((lam, 1)),
        }
    }

    let mut columns: Vec<CVec> = Vec::new();
    let mut column_eigs: Vec<Complex64> = Vec::new();
    for &(lam, count) in &groups {
        let shifted = m - eye(n) * lam;
        let ns = nullspace(&shifted, 1e-9);
        if ns.basis.len() != count {
            return None;
        }
        for v in ns.basis {
            columns.push(v);
            column_eigs.push(lam);
        }
    }
    if columns.len() != n {
        return None;
    }

    let p = CMat::from_columns(&columns);
    let sv = p.clone().singular_values();
    let cond = sv.max() / sv.min().max(f64::MIN_POSITIVE);
    if !cond.is_finite() || cond > EXP_EIGEN_COND_LIMIT {
        return None;
    }
    let p_inv = p.clone().lu().try_inverse()?;
    let d = CMat::from_diagonal(&CVec::from_iterator(
        n,
        column_eigs.iter().map(|lam| (-lam * t).exp()),
    ));
    Some(&p * d * p_inv)
}

/// Pade [6/6] scaling-and-squaring evaluation of `exp(X)`.
fn pade_exp(x: &CMat) -> CMat {
    const PADE6: [f64; 7] =
        [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
    let n = x.nrows();
    let norm1: f64 = (0..n)
        .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.25 { (norm1 / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = x / cx(2f64.powi(squarings as i32));

    let mut num = eye(n) * cx(PADE6[6]);
    let mut den = eye(n) * cx(PADE6[6]);
    for j in (0..6).rev() {
        num = num * &scaled + eye(n) * cx(PADE6[j]);
        den = den * (-&scaled) + eye(n) * cx(PADE6[j]);
    }
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is nonsingular for a scaled matrix");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Solves the Sylvester equation `A X + X B = C` by Kronecker vectorization.
///
/// Requires the spectra of `A` and `-B` to be disjoint; overlap makes the
/// lifted system singular and is reported as a spectral collision.  The
/// solution is certified a posteriori: the residual must satisfy
/// `|A X + X B - C| <= 1e-12 (|A| + |B|) |X| + 1e-12 |C|` in Frobenius norm.
///
/// # Errors
///
/// Returns an error for incompatible shapes, operands larger than
/// [`MAX_SYLVESTER_DIM`], a singular lifted system, or an uncertifiable
/// residual.
pub fn sylvester_solve(a: &CMat, b: &CMat, c: &CMat) -> Result<CMat> {
    let p = check_square(a)?;
    let q = check_square(b)?;
    if c.nrows() != p || c.ncols() != q {
        return Err(LinalgError::ShapeMismatch {
            context: format!(
                "A is {p}x{p}, B is {q}x{q}, C is {}x{}; C must be {p}x{q}",
                c.nrows(),
                c.ncols()
            ),
        });
    }
    for (dim, max) in [(p, MAX_SYLVESTER_DIM), (q, MAX_SYLVESTER_DIM)] {
        if dim > max {
            return Err(LinalgError::TooLarge { dim, max });
        }
    }
    check_finite(a)?;
    check_finite(b)?;
    check_finite(c)?;

    // vec(AX) = (I kron A) vec(X), vec(XB) = (B^T kron I) vec(X), column-major.
    let system = eye(q).kronecker(a) + b.transpose().kronecker(&eye(p));
    let rhs = CVec::from_iterator(p * q, c.iter().copied());
    let lu = system.clone().lu();
    let solution = match lu.solve(&rhs) {
        Some(sol) if sol.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => sol,
        _ => {
            let min_singular = system.singular_values().min();
            return Err(LinalgError::SpectralCollision { min_singular });
        }
    };
    let x = CMat::from_iterator(p, q, solution.iter().copied());

    let residual = (a * &x + &x * b - c).norm();
    let bound = 1e-12 * (a.norm() + b.norm()) * x.norm() + 1e-12 * c.norm();
    if residual > bound {
        let min_singular = system.singular_values().min();
        if min_singular <= 1e-12 * op_norm(&system) {
            return Err(LinalgError::SpectralCollision { min_singular });
        }
        return Err(LinalgError::ResidualTooLarge { residual, bound });
    }
    Ok(x)
}

/// Orthonormal null-space basis found by singular-value thresholding.
pub struct Nullspace {
    /// Orthonormal basis of the detected null space (right singular vectors).
    pub basis: Vec<CVec>,
    /// Singular values of the input, descending.
    pub singular_values: Vec<f64>,
}

impl Nullspace {
    /// Number of basis vectors.
    pub fn nullity(&self) -> usize {
        self.basis.len()
    }

    /// Basis assembled into a matrix with one column per vector.
    pub fn basis_matrix(&self) -> Option<CMat> {
        if self.basis.is_empty() {
            None
        } else {
            Some(CMat::from_columns(&self.basis))
        }
    }
}

/// Null space of `M` relative to the tolerance `tol`.
///
/// A right singular vector belongs to the null space when its singular value
/// is at most `tol` times the largest singular value.  The returned basis is
/// orthonormal to rounding accuracy.  The zero matrix has a full null space.
pub fn nullspace(m: &CMat, tol: f64) -> Nullspace {
    // A thin SVD of a wide matrix omits the trailing right singular vectors,
    // so pad with zero rows to square; the null space is unchanged.
    let work = if m.nrows() < m.ncols() {
        let mut padded = CMat::zeros(m.ncols(), m.ncols());
        padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("SVD with v_t requested");
    let singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol * sigma_max;

    let mut basis = Vec::new();
    for (i, &sigma) in singular_values.iter().enumerate() {
        if sigma <= cutoff {
            basis.push(v_t.row(i).adjoint());
        }
    }
    Nullspace { basis, singular_values }
}

/// Inverse square root of a hermitian positive definite matrix.
///
/// # Errors
///
/// Returns an error when the input is not hermitian (relative max-entry
/// defect above `1e-10`) or has an eigenvalue at or below `1e-14` times the
/// largest one.
pub fn inv_sqrt_psd(m: &CMat) -> Result<CMat> {
    let n = check_square(m)?;
    check_finite(m)?;
    let scale = max_abs(m).max(1.0);
    let defect = hermitian_defect(m);
    if defect > 1e-10 * scale {
        return Err(LinalgError::NotHermitian { defect });
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let se = hermitize(m).symmetric_eigen();
    let max_eig = se.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l));
    let min_eig = se.eigenvalues.min();
    if min_eig <= 1e-14 * max_eig.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    let d = CMat::from_diagonal(&se.eigenvalues.map(|lam| cx(1.0 / lam.sqrt())));
    Ok(hermitize(&(&se.eigenvectors * d * se.eigenvectors.adjoint())))
}

/// Accumulated continuous change of `arg det M` along an ordered path.
///
/// Phases are unwrapped to the nearest branch between consecutive entries and
/// the total increment from the first entry to the last is returned.
///
/// # Errors
///
/// Returns an error when a determinant on the path vanishes or a consecutive
/// increment reaches [`PHASE_JUMP_LIMIT`], which means the path is sampled
/// too coarsely to unwrap reliably.
pub fn arg_det_unwrap(path: &[CMat]) -> Result<f64> {
    let mut total = 0.0;
    let mut previous: Option<f64> = None;
    for (index, m) in path.iter().enumerate() {
        check_square(m)?;
        check_finite(m)?;
        let det = m.determinant();
        if det.norm() == 0.0 {
            return Err(LinalgError::SingularOnPath { index });
        }
        let phase = det.arg();
        if let Some(prev) = previous {
            let mut delta = phase - prev;
            while delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
            }
            while delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
            }
            if delta.abs() >= PHASE_JUMP_LIMIT {
                return Err(LinalgError::PhaseJumpTooLarge { index, jump: delta });
            }
            total += delta;
        }
        previous = Some(phase);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn assert_close(a: &CMat, b: &CMat, tol: f64) {
        assert!(
            max_abs(&(a - b)) <= tol,
            "matrices differ by {:.3e} > {:.3e}\nleft = {a}\nright = {b}",
            max_abs(&(a - b)),
            tol
        );
    }

    #[test]
    fn hermitian_detection_exact_and_perturbed() {
        let c = mat_re(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 1.0, 0.0, 1.0, 1.0]);
        assert!(is_hermitian(&c, 0.0));
        let skew = mat_cx(2, 2, &[cx(1.0), cxi(0.0, 1.0), cxi(0.0, 1.0), cx(1.0)]);
        assert!(!is_hermitian(&skew, 1e-8));
        assert_relative_eq!(hermitian_defect(&skew), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mat_exp_diagonal_matches_scalar_exponentials() {
        let m = mat_re(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let e = mat_exp(&m, 1.0).unwrap();
        let expected =
            mat_re(2, 2, &[(-1.0f64).exp(), 0.0, 0.0, (-2.0f64).exp()]);
        assert_close(&e, &expected, 1e-15);
    }

    #[test]
    fn mat_exp_defective_matrix_uses_stable_fallback() {
        // exp(-Mt) for the Jordan block [[1,1],[0,1]] is e^{-t} [[1,-t],[0,1]].
        let m = mat_re(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let t = 0.7;
        let e = mat_exp(&m, t).unwrap();
        let s = (-t).exp();
        let expected = mat_re(2, 2, &[s, -t * s, 0.0, s]);
        assert_close(&e, &expected, 1e-14);
    }

    #[test]
    fn mat_exp_diagonalizable_nonhermitian_matches_partial_fractions() {
        // M = [[0,1],[-2,-3]] has eigenvalues -1 and -2, so
        // exp(-Mt) = A e^{t} + B e^{2t} with A = M + 2I, B = -(M + I).
        let m = mat_re(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let t = 0.4;
        let e = mat_exp(&m, t).unwrap();
        let a = &m + eye(2) * cx(2.0);
        let b = -(&m + eye(2));
        let expected = a * cx(t.exp()) + b * cx((2.0 * t).exp());
        assert_close(&e, &expected, 1e-12);
    }

    #[test]
    fn mat_exp_rejects_non_square() {
        let m = CMat::zeros(2, 3);
        assert!(matches!(mat_exp(&m, 1.0), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn sylvester_recovers_planted_solution() {
        let a = mat_re(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let b = mat_re(2, 2, &[4.0, 0.0, 0.0, 5.0]);
        let planted = mat_cx(2, 2, &[cx(1.0), cxi(0.0, 1.0), cx(-2.0), cx(0.5)]);
        let c = &a * &planted + &planted * &b;
        let x = sylvester_solve(&a, &b, &c).unwrap();
        assert_close(&x, &planted, 1e-12);
    }

    #[test]
    fn sylvester_reports_spectral_collision() {
        // A = 1, B = -1 puts the spectra of A and -B on top of each other.
        let a = mat_re(1, 1, &[1.0]);
        let b = mat_re(1, 1, &[-1.0]);
        let c = mat_re(1, 1, &[1.0]);
        assert!(matches!(
            sylvester_solve(&a, &b, &c),
            Err(LinalgError::SpectralCollision { .. })
        ));
    }

    #[test]
    fn nullspace_of_all_ones_matrix() {
        let m = mat_re(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ns = nullspace(&m, 1e-8);
        assert_eq!(ns.nullity(), 1);
        let v = &ns.basis[0];
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        assert!((&m * v).norm() <= 1e-12);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let m = CMat::zeros(3, 3);
        let ns = nullspace(&m, 1e-8);
        assert_eq!(ns.nullity(), 3);
        for (i, v) in ns.basis.iter().enumerate() {
            for (j, w) in ns.basis.iter().enumerate() {
                let dot = v.dotc(w).norm();
                if i == j {
                    assert_relative_eq!(dot, 1.0, epsilon = 1e-12);
                } else {
                    assert!(dot <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn nullspace_of_wide_map_includes_trailing_directions() {
        // [-I | 0] as a 1x2 block row: kernel is the second coordinate axis.
        let m = mat_re(1, 2, &[-1.0, 0.0]);
        let ns = nullspace(&m, 1e-10);
        assert_eq!(ns.nullity(), 1);
        assert!(ns.basis[0][0].norm() <= 1e-14);
        assert_relative_eq!(ns.basis[0][1].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inv_sqrt_of_diagonal() {
        let m = mat_re(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let r = inv_sqrt_psd(&m).unwrap();
        assert_close(&r, &mat_re(2, 2, &[0.5, 0.0, 0.0, 1.0 / 3.0]), 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite_and_nonhermitian() {
        let indefinite = mat_re(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            inv_sqrt_psd(&indefinite),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
        let skew = mat_cx(2, 2, &[cx(1.0), cxi(0.0, 1.0), cxi(0.0, 1.0), cx(1.0)]);
        assert!(matches!(inv_sqrt_psd(&skew), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn inv_sqrt_commutes_with_commuting_projector() {
        // M = 2 P + 5 (I - P) for an orthogonal projector P commutes with P,
        // and so must M^{-1/2}.
        let p = mat_re(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let m = &p * cx(2.0) + (eye(2) - &p) * cx(5.0);
        let r = inv_sqrt_psd(&m).unwrap();
        assert_close(&(&r * &p), &(&p * &r), 1e-10);
        assert_close(&(&r * &r * &m), &eye(2), 1e-12);
    }

    #[test]
    fn unwrap_accumulates_a_full_half_turn() {
        // det(t) = exp(i pi t) walked from t = 0 to t = 1 gains phase pi.
        let path: Vec<CMat> = (0..=100)
            .map(|i| {
                let t = i as f64 / 100.0;
                mat_cx(1, 1, &[Complex64::from_polar(1.0, std::f64::consts::PI * t)])
            })
            .collect();
        let total = arg_det_unwrap(&path).unwrap();
        assert_relative_eq!(total, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn unwrap_crosses_branch_cut_without_jumping() {
        // Phase ramps continuously through +pi into the next sheet.
        let path: Vec<CMat> = (0..=200)
            .map(|i| {
                let t = i as f64 / 200.0 * 3.0;
                mat_cx(1, 1, &[Complex64::from_polar(2.0, 2.5 + t)])
            })
            .collect();
        let total = arg_det_unwrap(&path).unwrap();
        assert_relative_eq!(total, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn unwrap_refuses_half_turn_steps() {
        let path = vec![
            mat_cx(1, 1, &[cx(1.0)]),
            mat_cx(1, 1, &[cx(-1.0)]),
        ];
        assert!(matches!(
            arg_det_unwrap(&path),
            Err(LinalgError::PhaseJumpTooLarge { .. })
        ));
    }

    #[test]
    fn unwrap_rejects_singular_point() {
        let path = vec![mat_cx(1, 1, &[cx(1.0)]), mat_cx(1, 1, &[cx(0.0)])];
        assert!(matches!(
            arg_det_unwrap(&path),
            Err(LinalgError::SingularOnPath { index: 1 })
        ));
    }
}
