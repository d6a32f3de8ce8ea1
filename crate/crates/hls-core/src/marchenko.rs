//! Inverse scattering via the Marchenko integral equation.
//!
//! The scattering data determine a matrix kernel `F` on the positive half
//! line; for each `x >= 0` the Marchenko equation
//!
//! ```text
//! K(x,y) + F(x+y) + int_x^inf K(x,z) F(z+y) dz = 0,     y >= x,
//! ```
//!
//! is solved for `K(x,y)`, from which the potential is read off the
//! diagonal as `V(x) = -2 d/dx K(x,x)` and the boundary matrices follow
//! from the large-`k` expansion of the scattering matrix together with
//! `K(0,0)`.  Two independent solvers are provided: an exact separable
//! solver for exponential-polynomial data, and a Nystrom discretization
//! that works from pointwise values of `F` alone.

use crate::expoly::{
    derivative_terms, eval_terms, tail_integral_cx, BasisFn, ShiftExpansion,
};
use crate::linalg::{self, cx, eye, max_abs, CMat, LinalgError};
use crate::model::{
    BoundState, BoundaryPair, ExpPolyTerm, FsRepresentation, Grid, ModelError, Potential,
    PotentialEval, ScatteringData, ScatteringVariant,
};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative singular-value threshold below which the separable Marchenko
/// system is reported singular.
pub const SEPARABLE_SINGULAR_TOL: f64 = 1e-12;

/// Relative threshold on the estimated smallest singular value below which
/// the Nystrom system is reported singular.  Discretization error keeps an
/// exactly singular operator's smallest singular value near the quadrature
/// accuracy, so this sits well above it.
pub const NYSTROM_SINGULAR_TOL: f64 = 1e-5;

/// Relative tolerance for counting zero singular values of the finite-rank
/// Fredholm operators behind the solvability conditions.
pub const NULLITY_TOL: f64 = 1e-8;

/// Step used for the finite-difference verification of the derivative
/// kernel solver.
pub const DERIVATIVE_CHECK_STEP: f64 = 1e-4;

/// Allowed mismatch between the derivative kernel and centered differences
/// of the kernel itself.
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-5;

/// Errors from the inverse-problem solvers.
#[derive(Debug, thiserror::Error)]
pub enum MarchenkoError {
    #[error("Marchenko operator singular at x = {x} (smallest singular value {min_singular:.3e})")]
    SingularAtX { x: f64, min_singular: f64 },
    #[error("derivative kernel disagrees with finite differences at x = {x} (defect {defect:.3e})")]
    DerivativeCheckFailed { x: f64, defect: f64 },
    #[error("boundary matrices not determined: null space of the boundary system has dimension {nullity}, expected {expected}")]
    BoundaryUndetermined { nullity: usize, expected: usize },
    #[error("boundary matrices inconsistent: {0}")]
    BoundaryInconsistent(String),
    #[error("potential recovery failed at x = {x}: {message}")]
    PotentialRecovery { x: f64, message: String },
    #[error("analytic scattering data required: {0}")]
    AnalyticDataRequired(String),
    #[error("sampled scattering data invalid: {0}")]
    SampledDataInvalid(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type Result<T> = std::result::Result<T, MarchenkoError>;

/// Value of `F_s` at `y`; positive `y` uses the right-decaying terms,
/// negative `y` the left-decaying ones, and `y = 0` takes the limit from
/// the right.
pub fn fs_eval(fs: &FsRepresentation, y: f64) -> CMat {
    let n = fs.n();
    if y >= 0.0 {
        eval_terms(&fs.right, n, y)
    } else {
        let mut acc = CMat::zeros(n, n);
        for t in &fs.left {
            acc += &t.c * cx(y.powi(t.power as i32) * (t.rate * y).exp());
        }
        acc
    }
}

/// Terms of the Marchenko kernel function
/// `F(y) = F_s(y) + sum_j M_j^2 e^{-kappa_j y}` on the positive half line.
pub fn f_terms(fs: &FsRepresentation, bound_states: &[BoundState]) -> Vec<ExpPolyTerm> {
    let mut terms = fs.right.clone();
    for b in bound_states {
        let c = &b.m * &b.m;
        terms.push(ExpPolyTerm { c, rate: b.kappa, power: 0 });
    }
    terms
}

/// Value of the Marchenko kernel function `F` at `y >= 0`.
pub fn f_eval(fs: &FsRepresentation, bound_states: &[BoundState], y: f64) -> CMat {
    eval_terms(&f_terms(fs, bound_states), fs.n(), y)
}

/// Scattering matrix reconstructed from an analytic representation:
/// the Fourier transform of `F_s` plus the high-frequency limit.  Right
/// terms contribute `C p! / (a + ik)^{p+1}`, left terms
/// `C (-1)^p p! / (a - ik)^{p+1}`.
pub fn s_from_terms(fs: &FsRepresentation, k: f64) -> CMat {
    let ik = Complex64::i() * cx(k);
    let mut s = fs.s_inf.clone();
    for t in &fs.right {
        s += &t.c * tail_integral_cx(t.power, cx(t.rate) + ik, 0.0);
    }
    for t in &fs.left {
        let sign = if t.power % 2 == 0 { 1.0 } else { -1.0 };
        s += &t.c * (cx(sign) * tail_integral_cx(t.power, cx(t.rate) - ik, 0.0));
    }
    s
}

/// Scattering matrix at real `k` from either data representation; sampled
/// data are interpolated linearly on the stored grid.
pub fn s_from_data(data: &ScatteringData, k: f64) -> Result<CMat> {
    match &data.variant {
        ScatteringVariant::Analytic(fs) => Ok(s_from_terms(fs, k)),
        ScatteringVariant::Sampled { k_grid, s_values, .. } => {
            let (k_abs, conjugate) = if k < 0.0 { (-k, true) } else { (k, false) };
            let s = sample_interp(k_grid, s_values, k_abs)?;
            Ok(if conjugate { s.adjoint() } else { s })
        }
    }
}

fn sample_interp(k_grid: &Grid, s_values: &[CMat], k: f64) -> Result<CMat> {
    if k_grid.count < 2 || k_grid.count != s_values.len() {
        return Err(MarchenkoError::SampledDataInvalid(
            "scattering samples need at least two grid points".into(),
        ));
    }
    if k >= k_grid.end() {
        return Ok(s_values.last().unwrap().clone());
    }
    if k <= k_grid.start {
        return Ok(s_values[0].clone());
    }
    let t = (k - k_grid.start) / k_grid.step;
    let i = (t.floor() as usize).min(k_grid.count - 2);
    let frac = t - i as f64;
    Ok(&s_values[i] * cx(1.0 - frac) + &s_values[i + 1] * cx(frac))
}

/// High-frequency coefficient `G_1 = lim ik [S(k) - S_inf]` from an
/// analytic representation: only the polynomial-degree-zero terms survive
/// the limit, right terms with `+C` and left terms with `-C`.
pub fn g1_from_terms(fs: &FsRepresentation) -> CMat {
    let n = fs.n();
    let mut g1 = CMat::zeros(n, n);
    for t in fs.right.iter().filter(|t| t.power == 0) {
        g1 += &t.c;
    }
    for t in fs.left.iter().filter(|t| t.power == 0) {
        g1 -= &t.c;
    }
    g1
}

/// `G_1` from either data representation.  Sampled data use Richardson
/// extrapolation of `ik [S(k) - S_inf]` at the top of the grid.
pub fn g1_from_data(data: &ScatteringData) -> Result<CMat> {
    match &data.variant {
        ScatteringVariant::Analytic(fs) => Ok(g1_from_terms(fs)),
        ScatteringVariant::Sampled { k_grid, s_values, s_inf } => {
            if k_grid.count < 4 {
                return Err(MarchenkoError::SampledDataInvalid(
                    "not enough samples to extrapolate the 1/k coefficient".into(),
                ));
            }
            let top = k_grid.end();
            let g_at = |k: f64| -> Result<CMat> {
                let s = sample_interp(k_grid, s_values, k)?;
                Ok((s - s_inf) * (Complex64::i() * cx(k)))
            };
            let g_half = g_at(top / 2.0)?;
            let g_top = g_at(top)?;
            // With g(k) = G_1 + c/k + ..., 2 g(2k) - g(k) cancels the 1/k term.
            Ok(g_top * cx(2.0) - g_half)
        }
    }
}

/// Exact solution of the Marchenko equation at one `x` for separable data:
/// the kernel in the form `K(x,y) = sum_beta W_beta h_beta(y)` over scalar
/// basis functions `h_beta(y) = y^q e^{-a y}`.
#[derive(Debug, Clone)]
pub struct KernelSlice {
    pub x: f64,
    pub basis: Vec<BasisFn>,
    /// Block row `[W_1 ... W_B]`, an `n x Bn` matrix.
    pub w: CMat,
    pub n: usize,
    /// Smallest singular value of the solved system, relative to the largest.
    pub min_singular: f64,
}

impl KernelSlice {
    /// Kernel value; meaningful for `y >= x` but defined everywhere by the
    /// analytic formula.
    pub fn eval(&self, y: f64) -> CMat {
        let n = self.n;
        let mut acc = CMat::zeros(n, n);
        for (beta, h) in self.basis.iter().enumerate() {
            acc += self.w.view((0, beta * n), (n, n)) * cx(h.eval(y));
        }
        acc
    }

    /// Diagonal value `K(x,x)`.
    pub fn diagonal(&self) -> CMat {
        self.eval(self.x)
    }

    /// One-sided transform `int_x^inf K(x,y) e^{iky} dy`, valid for
    /// `Im k > -min rate`.
    pub fn transform(&self, k: Complex64) -> CMat {
        let n = self.n;
        let mut acc = CMat::zeros(n, n);
        for (beta, h) in self.basis.iter().enumerate() {
            let s = cx(h.rate) - Complex64::i() * k;
            acc += self.w.view((0, beta * n), (n, n)) * tail_integral_cx(h.power, s, self.x);
        }
        acc
    }
}

fn solve_block_system(system: &CMat, rhs_row: &CMat, x: f64) -> Result<(CMat, f64)> {
    let dim = system.nrows();
    let svals = system.clone().svd(false, false).singular_values;
    let smax = svals.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = svals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(smin > SEPARABLE_SINGULAR_TOL * smax.max(1.0)) {
        return Err(MarchenkoError::SingularAtX { x, min_singular: smin });
    }
    let lu = system.transpose().lu();
    let wt = lu
        .solve(&rhs_row.transpose())
        .ok_or(MarchenkoError::SingularAtX { x, min_singular: smin })?;
    debug_assert_eq!(wt.nrows(), dim);
    Ok((wt.transpose(), smin / smax.max(1.0)))
}

fn solve_at(exp: &ShiftExpansion, x: f64) -> Result<KernelSlice> {
    let n = exp.n;
    let b = exp.basis_len();
    if b == 0 {
        return Ok(KernelSlice {
            x,
            basis: Vec::new(),
            w: CMat::zeros(n, 0),
            n,
            min_singular: f64::INFINITY,
        });
    }
    let system = eye(b * n) + exp.gram(x);
    let rhs = -exp.g_row(x);
    let (w, rel_min) = solve_block_system(&system, &rhs, x)?;
    Ok(KernelSlice { x, basis: exp.basis.clone(), w, n, min_singular: rel_min })
}

/// Solves the Marchenko equation at `x` for exponential-polynomial data.
///
/// # Errors
///
/// Returns [`MarchenkoError::SingularAtX`] when the finite-rank system
/// `I + T(x)` is singular, with the offending singular value attached.
pub fn solve_marchenko_separable(
    terms: &[ExpPolyTerm],
    n: usize,
    x: f64,
) -> Result<KernelSlice> {
    let exp = ShiftExpansion::new(terms, n, 0);
    solve_at(&exp, x)
}

fn solve_derivative_at(
    exp: &ShiftExpansion,
    deriv: &ShiftExpansion,
    x: f64,
) -> Result<KernelSlice> {
    let n = exp.n;
    let b = exp.basis_len();
    if b == 0 {
        return Ok(KernelSlice {
            x,
            basis: Vec::new(),
            w: CMat::zeros(n, 0),
            n,
            min_singular: f64::INFINITY,
        });
    }
    let plain = solve_at(exp, x)?;
    let k_diag = plain.diagonal();
    let system = eye(b * n) + exp.gram(x);
    let rhs = k_diag * exp.g_row(x) - deriv.g_row(x);
    let (w, rel_min) = solve_block_system(&system, &rhs, x)?;
    Ok(KernelSlice { x, basis: exp.basis.clone(), w, n, min_singular: rel_min })
}

/// Solves for the `x`-derivative kernel `K_x(x,y)`.  Differentiating the
/// Marchenko equation in `x` gives
///
/// ```text
/// K_x(x,y) + F'(x+y) - K(x,x) F(x+y) + int_x^inf K_x(x,z) F(z+y) dz = 0,
/// ```
///
/// the same linear system with a modified right-hand side.  The result is
/// verified against centered differences of the kernel itself.
///
/// # Errors
///
/// [`MarchenkoError::SingularAtX`] if the system is singular, and
/// [`MarchenkoError::DerivativeCheckFailed`] if the finite-difference
/// verification misses the analytic derivative.
pub fn solve_derivative_marchenko(
    terms: &[ExpPolyTerm],
    n: usize,
    x: f64,
) -> Result<KernelSlice> {
    let exp = ShiftExpansion::new(terms, n, 0);
    let deriv = ShiftExpansion::over_basis(&derivative_terms(terms), n, exp.basis.clone());
    let slice = solve_derivative_at(&exp, &deriv, x)?;
    let h = DERIVATIVE_CHECK_STEP;
    if x >= h && exp.basis_len() > 0 {
        let upper = solve_at(&exp, x + h)?;
        let lower = solve_at(&exp, x - h)?;
        let mut defect = 0.0f64;
        for dy in [0.0, 1.0, 2.5] {
            let y = x + dy;
            let numeric = (upper.eval(y) - lower.eval(y)) / cx(2.0 * h);
            let exact = slice.eval(y);
            let scale = 1.0 + max_abs(&exact);
            defect = defect.max(max_abs(&(numeric - exact)) / scale);
        }
        if defect > DERIVATIVE_CHECK_TOL {
            return Err(MarchenkoError::DerivativeCheckFailed { x, defect });
        }
    }
    Ok(slice)
}

/// Mirrors left-decaying terms onto the positive half line:
/// `F_s(-w) = sum C (-1)^p w^p e^{-a w}` for `w > 0`.
pub fn mirror_left_terms(left: &[ExpPolyTerm]) -> Vec<ExpPolyTerm> {
    left.iter()
        .map(|t| ExpPolyTerm {
            c: &t.c * cx(if t.power % 2 == 0 { 1.0 } else { -1.0 }),
            rate: t.rate,
            power: t.power,
        })
        .collect()
}

/// Null-space data for a finite-rank Fredholm operator
/// `shift * I + (integral against F(z+y) on the half line)` acting on row
/// vector functions.
#[derive(Debug, Clone)]
pub struct OperatorNullity {
    pub nullity: usize,
    /// Smallest singular value relative to the largest, infinite when the
    /// operator reduces to a nonzero multiple of the identity.
    pub smallest: f64,
    pub dim: usize,
}

/// Counts independent solutions of
/// `shift * X(y) + int_0^inf X(z) F(z+y) dz = 0` over the positive half
/// line.  Any integrable solution lies in the span of the basis functions
/// generated by the terms, so the count is the null-space dimension of the
/// finite matrix `shift * I + T(0)`; `extra_powers` pads the basis with
/// higher polynomial powers as a safeguard.
pub fn fredholm_nullity(
    terms: &[ExpPolyTerm],
    n: usize,
    shift: f64,
    extra_powers: u32,
) -> OperatorNullity {
    let exp = ShiftExpansion::new(terms, n, extra_powers);
    let b = exp.basis_len();
    if b == 0 {
        return OperatorNullity { nullity: 0, smallest: f64::INFINITY, dim: 0 };
    }
    let m = eye(b * n) * cx(shift) + exp.gram(0.0);
    let ns = linalg::nullspace(&m, NULLITY_TOL);
    let smax = ns.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = ns.singular_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    OperatorNullity {
        nullity: ns.nullity(),
        smallest: if smax > 0.0 { smin / smax } else { 0.0 },
        dim: b * n,
    }
}

/// Quadrature grid and weights for the Nystrom solver.
#[derive(Debug, Clone, Copy)]
pub struct NystromConfig {
    /// Length of the finely resolved part of the integration interval.
    pub core_len: f64,
    pub core_step: f64,
    /// Length of the coarsely resolved tail appended after the core.
    pub tail_len: f64,
    pub tail_step: f64,
}

impl Default for NystromConfig {
    fn default() -> Self {
        NystromConfig { core_len: 12.0, core_step: 0.1, tail_len: 30.0, tail_step: 0.5 }
    }
}

/// Marchenko kernel values on the Nystrom grid.
#[derive(Debug, Clone)]
pub struct NystromKernel {
    pub x: f64,
    /// Quadrature nodes in `y`, starting at `x`.
    pub nodes: Vec<f64>,
    /// `K(x, nodes[i])`.
    pub values: Vec<CMat>,
    pub n: usize,
    /// Estimated smallest singular value of the discretized system,
    /// relative to its scale.
    pub min_singular: f64,
}

fn simpson_nodes_weights(start: f64, len: f64, target_step: f64) -> (Vec<f64>, Vec<f64>) {
    let mut m = (len / target_step).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    m = m.max(2);
    let h = len / m as f64;
    let nodes: Vec<f64> = (0..=m).map(|i| start + i as f64 * h).collect();
    let weights: Vec<f64> = (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Solves the Marchenko equation at `x` by Simpson-rule collocation on a
/// graded grid, using only pointwise values of `F`.  Serves as an
/// independent cross-check of the separable solver and as the solver for
/// sampled scattering data.
///
/// # Errors
///
/// [`MarchenkoError::SingularAtX`] when the discretized system is singular
/// to within the quadrature accuracy.
pub fn solve_marchenko_nystrom(
    f: &dyn Fn(f64) -> CMat,
    n: usize,
    x: f64,
    cfg: &NystromConfig,
) -> Result<NystromKernel> {
    let (mut nodes, mut weights) = simpson_nodes_weights(x, cfg.core_len, cfg.core_step);
    if cfg.tail_len > 0.0 {
        let (tail_nodes, tail_weights) =
            simpson_nodes_weights(x + cfg.core_len, cfg.tail_len, cfg.tail_step);
        *weights.last_mut().unwrap() += tail_weights[0];
        nodes.extend_from_slice(&tail_nodes[1..]);
        weights.extend_from_slice(&tail_weights[1..]);
    }
    let m = nodes.len();
    let dim = m * n;

    let mut system = CMat::zeros(dim, dim);
    for j in 0..m {
        for i in 0..m {
            let block = f(nodes[j] + nodes[i]) * cx(weights[j]);
            system.view_mut((j * n, i * n), (n, n)).copy_from(&block);
        }
    }
    for d in 0..dim {
        system[(d, d)] += cx(1.0);
    }

    let mut rhs = CMat::zeros(n, dim);
    for i in 0..m {
        rhs.view_mut((0, i * n), (n, n)).copy_from(&(-f(x + nodes[i])));
    }

    let system_t = system.transpose();
    let lu = system_t.clone().lu();
    let scale = system.norm() / (dim as f64).sqrt();
    let xt = match lu.solve(&rhs.transpose()) {
        Some(sol) => sol,
        None => {
            return Err(MarchenkoError::SingularAtX { x, min_singular: 0.0 })
        }
    };

    // Probe the inverse to estimate the smallest singular value: the
    // right-hand side itself plus a fixed oscillating vector.
    let mut inv_amp = if rhs.norm() > 0.0 { xt.norm() / rhs.norm() } else { 0.0 };
    let probe = nalgebra::DVector::<Complex64>::from_iterator(
        dim,
        (0..dim).map(|i| {
            Complex64::new(
                if i % 2 == 0 { 1.0 } else { -1.0 },
                ((i % 5) as f64 - 2.0) / 3.0,
            )
        }),
    );
    if let Some(z) = lu.solve(&probe) {
        inv_amp = inv_amp.max(z.norm() / probe.norm());
    }
    let min_singular = if inv_amp > 0.0 { 1.0 / inv_amp } else { f64::INFINITY };
    if min_singular < NYSTROM_SINGULAR_TOL * scale {
        return Err(MarchenkoError::SingularAtX { x, min_singular });
    }

    let xrow = xt.transpose();
    let values: Vec<CMat> =
        (0..m).map(|i| xrow.view((0, i * n), (n, n)).clone_owned()).collect();
    Ok(NystromKernel { x, nodes, values, n, min_singular })
}

/// Potential values recovered on a grid by differentiating the kernel
/// diagonal.
#[derive(Debug, Clone)]
pub struct PotentialRecovery {
    pub grid: Grid,
    /// Index of the first grid point with a value; earlier points failed
    /// because the Marchenko system is singular there.
    pub first_valid: usize,
    /// Hermitized values for grid indices `first_valid..`.
    pub values: Vec<CMat>,
    /// Largest deviation from hermiticity removed by symmetrization.
    pub hermiticity_defect: f64,
    /// Messages for the skipped leading points.
    pub failures: Vec<String>,
}

fn kernel_diagonal(exp: &ShiftExpansion, x: f64) -> Result<CMat> {
    Ok(solve_at(exp, x)?.diagonal())
}

fn potential_from_diagonal(
    exp: &ShiftExpansion,
    x: f64,
    h: f64,
) -> Result<CMat> {
    let d = if x >= 2.0 * h {
        let f_m2 = kernel_diagonal(exp, x - 2.0 * h)?;
        let f_m1 = kernel_diagonal(exp, x - h)?;
        let f_p1 = kernel_diagonal(exp, x + h)?;
        let f_p2 = kernel_diagonal(exp, x + 2.0 * h)?;
        (f_m2 - f_m1 * cx(8.0) + f_p1 * cx(8.0) - f_p2) / cx(12.0 * h)
    } else {
        let f0 = kernel_diagonal(exp, x)?;
        let f1 = kernel_diagonal(exp, x + h)?;
        let f2 = kernel_diagonal(exp, x + 2.0 * h)?;
        let f3 = kernel_diagonal(exp, x + 3.0 * h)?;
        let f4 = kernel_diagonal(exp, x + 4.0 * h)?;
        (f0 * cx(-25.0) + f1 * cx(48.0) - f2 * cx(36.0) + f3 * cx(16.0) - f4 * cx(3.0))
            / cx(12.0 * h)
    };
    Ok(d * cx(-2.0))
}

/// Step bound for the finite-difference stencils in potential recovery.
pub const STENCIL_STEP_CAP: f64 = 1e-3;

/// Recovers `V = -2 d/dx K(x,x)` on a grid from separable data, using
/// fourth-order finite differences on a refined step.  Points at the start
/// of the grid where the Marchenko system is singular are skipped and
/// reported; a singularity after recovery has begun is an error.
///
/// # Errors
///
/// [`MarchenkoError::SingularAtX`] when the kernel solve fails beyond the
/// leading skipped points.
pub fn recover_potential(
    terms: &[ExpPolyTerm],
    n: usize,
    grid: Grid,
) -> Result<PotentialRecovery> {
    grid.validate().map_err(MarchenkoError::Model)?;
    let exp = ShiftExpansion::new(terms, n, 0);
    let h = grid.step.min(STENCIL_STEP_CAP);
    let mut values = Vec::new();
    let mut failures = Vec::new();
    let mut first_valid = 0usize;
    let mut defect = 0.0f64;
    for i in 0..grid.count {
        let x = grid.point(i);
        match potential_from_diagonal(&exp, x, h) {
            Ok(v) => {
                let herm = (&v + v.adjoint()) * cx(0.5);
                defect = defect.max(max_abs(&(&v - v.adjoint())) / (1.0 + max_abs(&v)));
                values.push(herm);
            }
            Err(err) => {
                if values.is_empty() {
                    failures.push(format!("x = {x}: {err}"));
                    first_valid = i + 1;
                } else {
                    return Err(err);
                }
            }
        }
    }
    Ok(PotentialRecovery {
        grid,
        first_valid,
        values,
        hermiticity_defect: defect,
        failures,
    })
}

/// Kernel data at the origin needed for the Jost solution and the boundary
/// matrices.
#[derive(Debug, Clone)]
pub struct KernelOrigin {
    pub slice: KernelSlice,
    pub derivative: KernelSlice,
    pub k00: CMat,
}

/// Solves the Marchenko and derivative equations at `x = 0`.
///
/// # Errors
///
/// Propagates solver failures; in particular a singular system at the
/// origin.
pub fn kernel_at_origin(terms: &[ExpPolyTerm], n: usize) -> Result<KernelOrigin> {
    let slice = solve_marchenko_separable(terms, n, 0.0)?;
    let derivative = solve_derivative_marchenko(terms, n, 0.0)?;
    let k00 = slice.diagonal();
    Ok(KernelOrigin { slice, derivative, k00 })
}

/// Jost solution boundary values from the kernel at the origin:
/// `f(k,0) = I + int_0^inf K(0,y) e^{iky} dy` and
/// `f'(k,0) = ik I - K(0,0) + int_0^inf K_x(0,y) e^{iky} dy`.
/// Valid for `Im k > -min rate`, covering the closed upper half plane.
pub fn jost_from_kernel(origin: &KernelOrigin, k: Complex64) -> (CMat, CMat) {
    let n = origin.slice.n;
    let f0 = eye(n) + origin.slice.transform(k);
    let fp0 = eye(n) * (Complex64::i() * k) - &origin.k00 + origin.derivative.transform(k);
    (f0, fp0)
}

/// Jost matrix `J(k) = f(-conj k, 0)^dagger B - f'(-conj k, 0)^dagger A`
/// built from recovered kernel data and a boundary pair.
pub fn jost_matrix_from_kernel(
    origin: &KernelOrigin,
    pair: &BoundaryPair,
    k: Complex64,
) -> CMat {
    let km = -k.conj();
    let (f0, fp0) = jost_from_kernel(origin, km);
    f0.adjoint() * pair.b() - fp0.adjoint() * pair.a()
}

/// Tolerance for the null-space computation in boundary recovery.
pub const BOUNDARY_NULLSPACE_TOL: f64 = 1e-8;

/// Recovers the boundary matrices from `S_inf`, `G_1`, and `K(0,0)` via
/// the linear system
///
/// ```text
/// (I - S_inf) A = 0,
/// (I + S_inf) B = [G_1 - S_inf K(0,0) - K(0,0) S_inf] A.
/// ```
///
/// The stacked null space must have dimension exactly `n`; its orthonormal
/// basis yields a pair with `A^dagger A + B^dagger B = I`.
///
/// # Errors
///
/// [`MarchenkoError::BoundaryUndetermined`] when the null space dimension
/// differs from `n`, and [`MarchenkoError::BoundaryInconsistent`] when the
/// resulting pair violates selfadjointness.
pub fn recover_boundary(s_inf: &CMat, g1: &CMat, k00: &CMat) -> Result<BoundaryPair> {
    let n = s_inf.nrows();
    let id = eye(n);
    let mut lam = CMat::zeros(2 * n, 2 * n);
    lam.view_mut((0, 0), (n, n)).copy_from(&(&id - s_inf));
    lam.view_mut((n, 0), (n, n))
        .copy_from(&(s_inf * k00 + k00 * s_inf - g1));
    lam.view_mut((n, n), (n, n)).copy_from(&(&id + s_inf));
    let ns = linalg::nullspace(&lam, BOUNDARY_NULLSPACE_TOL);
    if ns.nullity() != n {
        return Err(MarchenkoError::BoundaryUndetermined { nullity: ns.nullity(), expected: n });
    }
    let basis = ns.basis_matrix().expect("nonzero nullity");
    let a = basis.view((0, 0), (n, n)).clone_owned();
    let b = basis.view((n, 0), (n, n)).clone_owned();
    let pair = BoundaryPair::new(a, b)
        .map_err(|e| MarchenkoError::BoundaryInconsistent(e.to_string()))?;
    Ok(pair.normalized())
}

/// Options for the full inversion pipeline.
#[derive(Debug, Clone)]
pub struct InvertOptions {
    pub x_grid: Grid,
    pub nystrom: NystromConfig,
    /// Fraction of the top of a sampled `k` grid over which the Fourier
    /// integrand is tapered to zero.
    pub taper_fraction: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            x_grid: Grid::new(0.0, 0.02, 601).expect("valid default grid"),
            nystrom: NystromConfig::default(),
            taper_fraction: 0.1,
        }
    }
}

/// Output of the inversion pipeline.
pub struct InverseResult {
    pub n: usize,
    pub recovery: PotentialRecovery,
    /// Sampled potential starting at the first recoverable grid point.
    pub potential: Potential,
    /// On-demand evaluator; backed by the separable solver for analytic
    /// data and by interpolation of the recovered samples otherwise.
    pub evaluator: PotentialEval,
    pub boundary: Option<BoundaryPair>,
    /// Reason the boundary matrices could not be recovered, when absent.
    pub boundary_error: Option<String>,
    pub s_inf: CMat,
    pub g1: CMat,
    pub k00: Option<CMat>,
    /// Kernel transforms at the origin; analytic data only.
    pub origin: Option<KernelOrigin>,
    pub warnings: Vec<String>,
}

fn sampled_potential(recovery: &PotentialRecovery, x_cut: f64) -> Result<(Potential, Grid)> {
    let sub_grid = Grid::new(
        recovery.grid.point(recovery.first_valid),
        recovery.grid.step,
        recovery.grid.count - recovery.first_valid,
    )?;
    let potential = Potential::sampled(sub_grid, recovery.values.clone(), x_cut)?;
    Ok((potential, sub_grid))
}

/// Full inversion: scattering data to potential and boundary matrices.
/// Failure to determine the boundary matrices leaves the potential intact
/// and is reported in `boundary_error`; failures in earlier stages abort.
///
/// # Errors
///
/// Stage-labeled errors from kernel solving or potential recovery, and
/// validation errors for malformed data.
pub fn invert(data: &ScatteringData, opts: &InvertOptions) -> Result<InverseResult> {
    match &data.variant {
        ScatteringVariant::Analytic(_) => invert_analytic(data, opts),
        ScatteringVariant::Sampled { .. } => invert_sampled(data, opts),
    }
}

fn invert_analytic(data: &ScatteringData, opts: &InvertOptions) -> Result<InverseResult> {
    let fs = match &data.variant {
        ScatteringVariant::Analytic(fs) => fs,
        _ => {
            return Err(MarchenkoError::AnalyticDataRequired(
                "sampled data dispatched to the wrong path".into(),
            ))
        }
    };
    let n = data.n;
    let terms = f_terms(fs, &data.bound_states);
    let s_inf = fs.s_inf.clone();
    let g1 = g1_from_terms(fs);

    let mut warnings = Vec::new();
    let expansion = ShiftExpansion::new(&terms, n, 0);
    warnings.extend(expansion.warnings.iter().cloned());

    let recovery = recover_potential(&terms, n, opts.x_grid).map_err(|e| match e {
        MarchenkoError::SingularAtX { x, min_singular } => {
            MarchenkoError::SingularAtX { x, min_singular }
        }
        other => MarchenkoError::Stage {
            stage: "potential recovery",
            message: other.to_string(),
        },
    })?;
    for f in &recovery.failures {
        warnings.push(format!("potential recovery skipped {f}"));
    }

    let x_cut = recovery.grid.end();
    let (potential, _) = sampled_potential(&recovery, x_cut)?;

    let h = recovery.grid.step.min(STENCIL_STEP_CAP);
    let eval_expansion = Arc::new(ShiftExpansion::new(&terms, n, 0));
    let evaluator = PotentialEval::from_closure(n, x_cut, move |x| {
        match potential_from_diagonal(&eval_expansion, x, h) {
            Ok(v) => (&v + v.adjoint()) * cx(0.5),
            Err(_) => match potential_from_diagonal(&eval_expansion, x + 2.0 * h, h) {
                Ok(v) => (&v + v.adjoint()) * cx(0.5),
                Err(_) => CMat::zeros(n, n),
            },
        }
    });

    let (origin, k00, boundary, boundary_error) = match kernel_at_origin(&terms, n) {
        Ok(origin) => {
            let k00 = origin.k00.clone();
            match recover_boundary(&s_inf, &g1, &k00) {
                Ok(pair) => (Some(origin), Some(k00), Some(pair), None),
                Err(err) => (
                    Some(origin),
                    Some(k00),
                    None,
                    Some(format!("boundary recovery: {err}")),
                ),
            }
        }
        Err(err) => (
            None,
            None,
            None,
            Some(format!("kernel at origin: {err}")),
        ),
    };

    Ok(InverseResult {
        n,
        recovery,
        potential,
        evaluator,
        boundary,
        boundary_error,
        s_inf,
        g1,
        k00,
        origin,
        warnings,
    })
}

/// Fourier synthesis of `F_s` from sampled scattering data on `y >= 0`,
/// assuming the real-line symmetry `S(-k) = S(k)^dagger` to extend the
/// grid to negative `k`; the top `taper_fraction` of the grid is rolled
/// off with a raised cosine to suppress truncation ringing.
pub fn fs_from_samples(
    k_grid: &Grid,
    s_values: &[CMat],
    s_inf: &CMat,
    taper_fraction: f64,
    y: f64,
) -> Result<CMat> {
    let n = s_inf.nrows();
    if k_grid.count < 2 || k_grid.count != s_values.len() {
        return Err(MarchenkoError::SampledDataInvalid(
            "scattering samples need at least two grid points".into(),
        ));
    }
    let k_max = k_grid.end();
    let ramp_start = k_max * (1.0 - taper_fraction);
    let mut acc = CMat::zeros(n, n);
    for i in 0..k_grid.count {
        let k = k_grid.point(i);
        let dk = if i == 0 || i == k_grid.count - 1 {
            k_grid.step / 2.0
        } else {
            k_grid.step
        };
        let taper = if k <= ramp_start || taper_fraction <= 0.0 {
            1.0
        } else {
            let t = (k - ramp_start) / (k_max - ramp_start);
            0.5 * (1.0 + (std::f64::consts::PI * t).cos())
        };
        let g = (&s_values[i] - s_inf) * cx(taper * dk);
        let phase = Complex64::from_polar(1.0, k * y);
        // Contribution of +k and, via the symmetry, of -k.
        let m = &g * phase;
        acc += &m + m.adjoint();
    }
    Ok(acc / cx(2.0 * std::f64::consts::PI))
}

fn invert_sampled(data: &ScatteringData, opts: &InvertOptions) -> Result<InverseResult> {
    let (k_grid, s_values, s_inf) = match &data.variant {
        ScatteringVariant::Sampled { k_grid, s_values, s_inf } => (k_grid, s_values, s_inf),
        _ => unreachable!("dispatched on variant"),
    };
    let n = data.n;
    let s_inf = s_inf.clone();
    let g1 = g1_from_data(data)?;
    let mut warnings =
        vec!["sampled data: F_s synthesized by tapered Fourier quadrature".to_string()];

    // Precompute F_s on a fine y grid covering every pairwise node sum the
    // Nystrom solver can request.
    let grid = opts.x_grid;
    let reach = 2.0 * (grid.end() + opts.nystrom.core_len + opts.nystrom.tail_len) + 1.0;
    let k_max = k_grid.end();
    let dy = (std::f64::consts::PI / (8.0 * k_max)).min(0.01);
    let m_fs = (reach / dy).ceil() as usize + 1;
    let mut fs_samples = Vec::with_capacity(m_fs);
    for i in 0..m_fs {
        fs_samples.push(fs_from_samples(
            k_grid,
            s_values,
            &s_inf,
            opts.taper_fraction,
            i as f64 * dy,
        )?);
    }
    let bound: Vec<(CMat, f64)> =
        data.bound_states.iter().map(|b| (&b.m * &b.m, b.kappa)).collect();
    let zero = CMat::zeros(n, n);
    let f_fn = move |y: f64| -> CMat {
        let mut acc = if y < 0.0 {
            zero.clone()
        } else {
            let t = y / dy;
            let i = (t.floor() as usize).min(m_fs - 2);
            let frac = t - i as f64;
            if i + 1 < m_fs {
                &fs_samples[i] * cx(1.0 - frac) + &fs_samples[i + 1] * cx(frac)
            } else {
                fs_samples[m_fs - 1].clone()
            }
        };
        for (m2, kappa) in &bound {
            acc += m2 * cx((-kappa * y).exp());
        }
        acc
    };

    // Kernel diagonal on the grid, then a fourth-order grid-step stencil.
    let mut diag = Vec::with_capacity(grid.count);
    let mut failures = Vec::new();
    let mut first_valid = 0usize;
    for i in 0..grid.count {
        let x = grid.point(i);
        match solve_marchenko_nystrom(&f_fn, n, x, &opts.nystrom) {
            Ok(kernel) => diag.push(Some(kernel.values[0].clone())),
            Err(err) => {
                if diag.iter().all(Option::is_none) {
                    failures.push(format!("x = {x}: {err}"));
                    first_valid = i + 1;
                    diag.push(None);
                } else {
                    return Err(err);
                }
            }
        }
    }
    let take = |i: isize| -> CMat {
        let idx = i.clamp(first_valid as isize, grid.count as isize - 1) as usize;
        diag[idx].clone().expect("valid past first_valid")
    };
    let mut values = Vec::new();
    let mut defect = 0.0f64;
    let h = grid.step;
    for i in first_valid..grid.count {
        let ii = i as isize;
        let last = grid.count as isize - 1;
        let d = if ii - first_valid as isize >= 2 && ii + 2 <= last {
            (take(ii - 2) - take(ii - 1) * cx(8.0) + take(ii + 1) * cx(8.0) - take(ii + 2))
                / cx(12.0 * h)
        } else if ii + 4 <= last {
            (take(ii) * cx(-25.0) + take(ii + 1) * cx(48.0) - take(ii + 2) * cx(36.0)
                + take(ii + 3) * cx(16.0)
                - take(ii + 4))
                / cx(12.0 * h)
        } else {
            (take(ii - 4) * cx(3.0) - take(ii - 3) * cx(16.0) + take(ii - 2) * cx(36.0)
                - take(ii - 1) * cx(48.0)
                + take(ii) * cx(25.0))
                / cx(12.0 * h)
        };
        let v = d * cx(-2.0);
        let herm = (&v + v.adjoint()) * cx(0.5);
        defect = defect.max(max_abs(&(&v - v.adjoint())) / (1.0 + max_abs(&v)));
        values.push(herm);
    }
    let recovery = PotentialRecovery {
        grid,
        first_valid,
        values,
        hermiticity_defect: defect,
        failures: failures.clone(),
    };
    for f in &failures {
        warnings.push(format!("potential recovery skipped {f}"));
    }
    let x_cut = grid.end();
    let (potential, _) = sampled_potential(&recovery, x_cut)?;
    let evaluator = potential.evaluator()?;

    let (k00, boundary, boundary_error) = if first_valid == 0 {
        let k00 = diag[0].clone().expect("index 0 valid");
        match recover_boundary(&s_inf, &g1, &k00) {
            Ok(pair) => (Some(k00), Some(pair), None),
            Err(err) => (Some(k00), None, Some(format!("boundary recovery: {err}"))),
        }
    } else {
        (
            None,
            None,
            Some("kernel at origin: Marchenko system singular at x = 0".to_string()),
        )
    };

    Ok(InverseResult {
        n,
        recovery,
        potential,
        evaluator,
        boundary,
        boundary_error,
        s_inf,
        g1,
        k00,
        origin: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_re;
    use approx::assert_relative_eq;

    fn scalar_term(c: f64, rate: f64, power: u32) -> ExpPolyTerm {
        ExpPolyTerm::new(mat_re(1, 1, &[c]), rate, power).unwrap()
    }

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn separable_solver_reproduces_sech_kernel() {
        // F(y) = 2 e^{-y} has the closed-form kernel
        // K(x,y) = -sech(x) e^{-y}.
        let terms = vec![scalar_term(2.0, 1.0, 0)];
        for &x in &[0.0, 0.4, 1.0, 2.7] {
            let slice = solve_marchenko_separable(&terms, 1, x).unwrap();
            for &dy in &[0.0, 0.5, 1.8] {
                let y = x + dy;
                let got = slice.eval(y)[(0, 0)].re;
                assert_relative_eq!(got, -sech(x) * (-y).exp(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn separable_solver_detects_exact_singularity() {
        // F(y) = -2 e^{-y}: the operator I + T(0) vanishes identically.
        let terms = vec![scalar_term(-2.0, 1.0, 0)];
        let err = solve_marchenko_separable(&terms, 1, 0.0).unwrap_err();
        match err {
            MarchenkoError::SingularAtX { x, min_singular } => {
                assert_eq!(x, 0.0);
                assert!(min_singular < 1e-12);
            }
            other => panic!("unexpected error {other}"),
        }
        // Away from the origin the kernel exists: K(x,y) = e^{-y}/sinh(x).
        let slice = solve_marchenko_separable(&terms, 1, 0.5).unwrap();
        let got = slice.eval(1.3)[(0, 0)].re;
        assert_relative_eq!(got, (-1.3f64).exp() / 0.5f64.sinh(), epsilon = 1e-12);
    }

    #[test]
    fn derivative_solver_matches_closed_form() {
        // For F(y) = 2 e^{-y}: K_x(x,y) = tanh(x) sech(x) e^{-y}.
        let terms = vec![scalar_term(2.0, 1.0, 0)];
        for &x in &[0.3, 1.0, 2.2] {
            let slice = solve_derivative_marchenko(&terms, 1, x).unwrap();
            let y = x + 0.7;
            let got = slice.eval(y)[(0, 0)].re;
            assert_relative_eq!(
                got,
                x.tanh() * sech(x) * (-y).exp(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn fredholm_nullity_counts_singular_directions() {
        // I + T(0) for F = -2 e^{-y} is singular with a one-dimensional
        // null space, visible also with padded basis powers.
        let singular = vec![scalar_term(-2.0, 1.0, 0)];
        assert_eq!(fredholm_nullity(&singular, 1, 1.0, 1).nullity, 1);
        // F = 2 e^{-y} gives an invertible operator.
        let regular = vec![scalar_term(2.0, 1.0, 0)];
        assert_eq!(fredholm_nullity(&regular, 1, 1.0, 1).nullity, 0);
        // Empty data: the operator is the identity.
        assert_eq!(fredholm_nullity(&[], 1, 1.0, 1).nullity, 0);
    }

    #[test]
    fn mirrored_left_operator_is_regular_for_one_sided_data() {
        // F_s(y) = -e^{y} on the left half line; the mirrored operator
        // -I + T~(0) evaluates to -3/2, hence trivial null space.
        let left = vec![scalar_term(-1.0, 1.0, 0)];
        let mirrored = mirror_left_terms(&left);
        let report = fredholm_nullity(&mirrored, 1, -1.0, 1);
        assert_eq!(report.nullity, 0);
    }

    #[test]
    fn nystrom_agrees_with_separable_solver() {
        let terms = vec![scalar_term(2.0, 1.0, 0)];
        let f = |y: f64| eval_terms(&terms, 1, y);
        let cfg = NystromConfig::default();
        for &x in &[0.0, 0.5, 1.5] {
            let sep = solve_marchenko_separable(&terms, 1, x).unwrap();
            let nys = solve_marchenko_nystrom(&f, 1, x, &cfg).unwrap();
            for (i, &y) in nys.nodes.iter().enumerate().step_by(17) {
                let diff = (nys.values[i][(0, 0)] - sep.eval(y)[(0, 0)]).norm();
                assert!(diff < 1e-4, "x={x} y={y} diff={diff:.2e}");
            }
        }
    }

    #[test]
    fn nystrom_flags_the_exactly_singular_operator() {
        let terms = vec![scalar_term(-2.0, 1.0, 0)];
        let f = |y: f64| eval_terms(&terms, 1, y);
        let cfg = NystromConfig::default();
        match solve_marchenko_nystrom(&f, 1, 0.0, &cfg) {
            Err(MarchenkoError::SingularAtX { .. }) => {}
            Ok(k) => panic!(
                "expected singular system, got solution with min singular {:.2e}",
                k.min_singular
            ),
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn potential_recovery_matches_closed_form() {
        // F(y) = 2 e^{-y} recovers V(x) = -2 sech^2(x).
        let terms = vec![scalar_term(2.0, 1.0, 0)];
        let grid = Grid::new(0.0, 0.25, 17).unwrap();
        let rec = recover_potential(&terms, 1, grid).unwrap();
        assert_eq!(rec.first_valid, 0);
        for (i, v) in rec.values.iter().enumerate() {
            let x = grid.point(i);
            assert_relative_eq!(
                v[(0, 0)].re,
                -2.0 * sech(x) * sech(x),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn potential_recovery_skips_a_singular_origin() {
        let terms = vec![scalar_term(-2.0, 1.0, 0)];
        let grid = Grid::new(0.0, 0.25, 9).unwrap();
        let rec = recover_potential(&terms, 1, grid).unwrap();
        assert_eq!(rec.first_valid, 1);
        assert_eq!(rec.failures.len(), 1);
        // V(x) = 8 e^{2x} / (e^{2x} - 1)^2 away from the origin.
        for (i, v) in rec.values.iter().enumerate() {
            let x = grid.point(i + rec.first_valid);
            let e = (2.0 * x).exp();
            assert_relative_eq!(v[(0, 0)].re, 8.0 * e / ((e - 1.0) * (e - 1.0)), epsilon = 1e-7);
        }
    }

    #[test]
    fn jost_route_reproduces_the_scattering_matrix() {
        // For F(y) = 2 e^{-y} with the Dirichlet pair, the chain
        // kernel -> Jost matrix -> -J(-k) J(k)^{-1} must reproduce
        // S(k) = -(k+i)/(k-i).
        let terms = vec![scalar_term(2.0, 1.0, 0)];
        let origin = kernel_at_origin(&terms, 1).unwrap();
        let pair = BoundaryPair::dirichlet(1);
        for &k in &[0.3, 1.0, 4.2] {
            let j_plus = jost_matrix_from_kernel(&origin, &pair, cx(k));
            let j_minus = jost_matrix_from_kernel(&origin, &pair, cx(-k));
            let s = -(j_minus * j_plus.try_inverse().unwrap());
            let kc = Complex64::new(k, 0.0);
            let expected = -(kc + Complex64::i()) / (kc - Complex64::i());
            assert!((s[(0, 0)] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_recovery_reproduces_known_pairs() {
        // Dirichlet case: S_inf = -1, G_1 = 2, K(0,0) = -1.
        let pair = recover_boundary(
            &mat_re(1, 1, &[-1.0]),
            &mat_re(1, 1, &[2.0]),
            &mat_re(1, 1, &[-1.0]),
        )
        .unwrap();
        let dirichlet = crate::model::BoundarySubspace::from_pair(&BoundaryPair::dirichlet(1));
        let got = crate::model::BoundarySubspace::from_pair(&pair);
        assert!(got.distance(&dirichlet) < 1e-10);

        // Free case with one bound state: S_inf = 1, G_1 = -2, K(0,0) = 0
        // gives B = -A.
        let pair = recover_boundary(
            &mat_re(1, 1, &[1.0]),
            &mat_re(1, 1, &[-2.0]),
            &mat_re(1, 1, &[0.0]),
        )
        .unwrap();
        let ratio = pair.b()[(0, 0)] / pair.a()[(0, 0)];
        assert!((ratio - cx(-1.0)).norm() < 1e-10);
    }

    #[test]
    fn boundary_recovery_rejects_undetermined_systems() {
        // S_inf = i is not an involution; neither block of the system
        // degenerates and the null space is empty.
        let s_inf = CMat::from_row_slice(1, 1, &[Complex64::new(0.0, 1.0)]);
        let err = recover_boundary(
            &s_inf,
            &CMat::from_row_slice(1, 1, &[Complex64::new(0.0, 2.0)]),
            &mat_re(1, 1, &[0.0]),
        )
        .unwrap_err();
        match err {
            MarchenkoError::BoundaryUndetermined { nullity, expected } => {
                assert_eq!(nullity, 0);
                assert_eq!(expected, 1);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn invert_runs_end_to_end_on_separable_data() {
        let fs = FsRepresentation {
            s_inf: mat_re(1, 1, &[-1.0]),
            right: vec![scalar_term(2.0, 1.0, 0)],
            left: Vec::new(),
        };
        let data = ScatteringData::analytic(fs, Vec::new()).unwrap();
        let opts = InvertOptions {
            x_grid: Grid::new(0.0, 0.05, 81).unwrap(),
            ..Default::default()
        };
        let result = invert(&data, &opts).unwrap();
        assert_eq!(result.recovery.first_valid, 0);
        let v0 = result.evaluator.at(1.0)[(0, 0)].re;
        assert_relative_eq!(v0, -2.0 * sech(1.0) * sech(1.0), epsilon = 1e-8);
        let pair = result.boundary.expect("boundary recovered");
        let dirichlet = crate::model::BoundarySubspace::from_pair(&BoundaryPair::dirichlet(1));
        let got = crate::model::BoundarySubspace::from_pair(&pair);
        assert!(got.distance(&dirichlet) < 1e-8);
    }
}
