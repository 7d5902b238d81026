//! Minimizer of the population risk over the 2x2 PSD cone.
//!
//! The primary route is projected gradient descent with backtracking. The result is then
//! refined (a Newton polish on the rank-one factorization when the iterate is rank
//! deficient, or the closed form where one exists) and certified with a KKT certificate.
//! A refinement is only accepted when its certificate is valid, so the closed forms never
//! substitute for an uncertified answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{classify, logit, sigmoid, sigmoid_prime, EmbeddingGram, RegionTag, SbmGraphon};
use crate::risk::{matrix_gradient, pair_loss, project_psd, risk, risk_gradient};
use crate::scalar::Scalar;

/// Iterates whose eigenvalues fall below this (relative to the largest) are treated as
/// rank deficient.
const RANK_TOL: f64 = 1e-6;
/// Entries below this are treated as exact zeros by the dual recovery.
const ZERO_TOL: f64 = 1e-12;
/// Initial iterate is clamped to this box before projection.
const INIT_CLAMP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions<T> {
    /// First trial step of every backtracking search.
    pub initial_step: T,
    /// Step shrink factor, in (0, 1).
    pub backtracking: T,
    pub max_iterations: usize,
    /// Stop when the projected-gradient mapping falls below this.
    pub tolerance: T,
    /// A certificate is accepted when every residual is at most this.
    pub certificate_tol: T,
    /// Replace the iterative answer by a certified closed form when one exists.
    pub analytic_shortcut: bool,
    /// Newton refinement of rank-deficient iterates.
    pub polish: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            initial_step: T::one(),
            backtracking: T::half(),
            max_iterations: 100_000,
            tolerance: T::lit(1e-9).max(T::tolerance_floor()),
            certificate_tol: T::lit(1e-6).max(T::tolerance_floor() * T::lit(100.0)),
            analytic_shortcut: true,
            polish: true,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    /// Plain projected gradient: no closed-form shortcut and no Newton refinement.
    pub fn projected_gradient_only() -> Self {
        Self {
            analytic_shortcut: false,
            polish: false,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |name, value: T, reason| {
            Err(Error::InvalidParameter {
                name,
                value: value.as_f64(),
                reason,
            })
        };
        if !(self.initial_step > T::zero()) {
            return bad("initial_step", self.initial_step, "must be positive");
        }
        if !(self.backtracking > T::zero() && self.backtracking < T::one()) {
            return bad("backtracking", self.backtracking, "must lie in (0, 1)");
        }
        if !(self.tolerance > T::zero()) {
            return bad("tolerance", self.tolerance, "must be positive");
        }
        if !(self.certificate_tol > T::zero()) {
            return bad("certificate_tol", self.certificate_tol, "must be positive");
        }
        Ok(())
    }
}

/// How the dual variables of a [`KktCertificate`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateForm {
    /// Multipliers of `K1 >= 0`, `K3 >= 0`, `K1 K3 - K2^2 >= 0`; residuals are the three
    /// stationarity rows followed by the three complementary-slackness products.
    Lagrangian,
    /// At `K = 0` every constraint gradient above vanishes and the Lagrangian system has
    /// no solution unless `q = 1/2`. Optimality there is certified by the cone dual
    /// `Z = grad R` being PSD: residuals are the violations of `Z11 >= 0`, `Z33 >= 0`,
    /// `Z12^2 <= Z11 Z33`, followed by the slackness products `K1 Z11`, `K3 Z33`, `<Z, K>`.
    /// `mu1`, `mu2` hold the diagonal of `Z`.
    ConeVertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate<T> {
    /// Multiplier of `K1 >= 0`.
    pub mu1: T,
    /// Multiplier of `K3 >= 0`.
    pub mu2: T,
    /// Multiplier of `K1 K3 - K2^2 >= 0`.
    pub mu3: T,
    pub residuals: [T; 6],
    pub form: CertificateForm,
}

impl<T: Scalar> KktCertificate<T> {
    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .fold(T::zero(), |m, r| if r.is_nan() { T::infinity() } else { m.max(r.abs()) })
    }

    pub fn is_valid(&self, tol: T) -> bool {
        self.mu1 >= T::zero() && self.mu2 >= T::zero() && self.mu3 >= T::zero() && self.max_residual() <= tol
    }

    pub fn duals(&self) -> [T; 3] {
        [self.mu1, self.mu2, self.mu3]
    }
}

/// Signed Lagrangian KKT residuals of `(K, mu)`:
///
/// ```text
/// a^2 (s(K1) - p)      - mu1 - mu3 K3
/// (1-a)^2 (s(K3) - r)  - mu2 - mu3 K1
/// 2a(1-a)(s(K2) - q)   + 2 mu3 K2
/// mu1 K1,  mu2 K3,  mu3 (K1 K3 - K2^2)
/// ```
pub fn kkt_residuals<T: Scalar>(k: &EmbeddingGram<T>, duals: [T; 3], g: &SbmGraphon<T>) -> [T; 6] {
    let [g1, g2, g3] = risk_gradient(k, g);
    let [mu1, mu2, mu3] = duals;
    [
        g1 - mu1 - mu3 * k.k3,
        g3 - mu2 - mu3 * k.k1,
        g2 + T::two() * mu3 * k.k2,
        mu1 * k.k1,
        mu2 * k.k3,
        mu3 * k.det(),
    ]
}

/// Recovers dual variables for `K` and evaluates the certificate residuals.
///
/// For rank-one `K` with `K2 != 0` the cone multiplier comes from the cross-block
/// stationarity row and the diagonal multipliers absorb what remains of rows one and two.
/// When `K2 = 0` the cone multiplier is set to zero and the diagonal multipliers take
/// rows one and two whole. At `K = 0` the cone-vertex form is used.
pub fn certify<T: Scalar>(k: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> KktCertificate<T> {
    let zero_tol = T::lit(ZERO_TOL);
    let [g1, g2, g3] = risk_gradient(k, g);
    if k.max_abs() <= zero_tol {
        let z = matrix_gradient(k, g);
        return KktCertificate {
            mu1: z.k1.max(T::zero()),
            mu2: z.k3.max(T::zero()),
            mu3: T::zero(),
            residuals: [
                (-z.k1).max(T::zero()),
                (-z.k3).max(T::zero()),
                (z.k2 * z.k2 - z.k1 * z.k3).max(T::zero()),
                k.k1 * z.k1,
                k.k3 * z.k3,
                k.k1 * z.k1 + T::two() * k.k2 * z.k2 + k.k3 * z.k3,
            ],
            form: CertificateForm::ConeVertex,
        };
    }
    let mu3 = if k.k2.abs() > zero_tol {
        (-g2 / (T::two() * k.k2)).max(T::zero())
    } else {
        T::zero()
    };
    let mu1 = (g1 - mu3 * k.k3).max(T::zero());
    let mu2 = (g3 - mu3 * k.k1).max(T::zero());
    let duals = [mu1, mu2, mu3];
    KktCertificate {
        mu1,
        mu2,
        mu3,
        residuals: kkt_residuals(k, duals, g),
        form: CertificateForm::Lagrangian,
    }
}

/// Closed-form gram where one exists: the dense regime (logits), the sparse regime
/// (zero), and the `q = 1/2` edge cases where one diagonal block collapses to zero.
/// Returns `None` in the interior of the middle regime.
pub fn analytic_gram<T: Scalar>(g: &SbmGraphon<T>) -> Result<Option<EmbeddingGram<T>>> {
    g.require_open()?;
    let tol = T::lit(crate::graphon::CLASSIFY_TOL).max(T::tolerance_floor());
    let half = T::half();
    let region = classify(g.p, g.q, g.r, tol)?;
    let k = match region.tag {
        RegionTag::Dense => Some(EmbeddingGram::new(logit(g.p)?, logit(g.q)?, logit(g.r)?)),
        RegionTag::Sparse => Some(EmbeddingGram::zero()),
        RegionTag::Middle if (g.q - half).abs() <= tol => {
            if g.p <= half && g.r > half {
                Some(EmbeddingGram::new(T::zero(), T::zero(), logit(g.r)?))
            } else if g.r <= half && g.p > half {
                Some(EmbeddingGram::new(logit(g.p)?, T::zero(), T::zero()))
            } else {
                None
            }
        }
        RegionTag::Middle => None,
    };
    Ok(k)
}

/// Which refinement produced a [`GramSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionSource {
    ProjectedGradient,
    RankOnePolish,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramSolution<T> {
    pub gram: EmbeddingGram<T>,
    pub certificate: KktCertificate<T>,
    /// Projected-gradient iterations run.
    pub iterations: usize,
    pub risk: T,
    pub source: SolutionSource,
}

/// Frobenius inner product of two symmetric 2x2 matrices stored as `(k1, k2, k3)`.
#[inline]
fn frob_dot<T: Scalar>(x: &EmbeddingGram<T>, y: &EmbeddingGram<T>) -> T {
    x.k1 * y.k1 + T::two() * x.k2 * y.k2 + x.k3 * y.k3
}

fn sub<T: Scalar>(x: &EmbeddingGram<T>, y: &EmbeddingGram<T>) -> EmbeddingGram<T> {
    EmbeddingGram::new(x.k1 - y.k1, x.k2 - y.k2, x.k3 - y.k3)
}

/// Initial iterate: PSD projection of the clamped logits. Exact in the dense regime.
pub fn initial_gram<T: Scalar>(g: &SbmGraphon<T>) -> EmbeddingGram<T> {
    let c = T::lit(INIT_CLAMP);
    let lg = |x: T| logit(x).unwrap_or(T::zero()).max(-c).min(c);
    project_psd(lg(g.p), lg(g.q), lg(g.r))
}

struct PgOutcome<T> {
    gram: EmbeddingGram<T>,
    iterations: usize,
    converged: bool,
    mapping_norm: T,
}

fn projected_gradient<T: Scalar>(g: &SbmGraphon<T>, opts: &SolverOptions<T>) -> PgOutcome<T> {
    let mut k = initial_gram(g);
    let mut f = risk(&k, g);
    let min_step = T::epsilon() * T::epsilon();
    let mut mapping_norm = T::infinity();
    for it in 0..opts.max_iterations {
        let grad = matrix_gradient(&k, g);
        let mut step = opts.initial_step;
        let (next, f_next, d) = loop {
            let trial = project_psd(k.k1 - step * grad.k1, k.k2 - step * grad.k2, k.k3 - step * grad.k3);
            let d = sub(&trial, &k);
            let f_trial = risk(&trial, g);
            let model = f + frob_dot(&grad, &d) + frob_dot(&d, &d) / (T::two() * step);
            if f_trial <= model || step <= min_step {
                break (trial, f_trial, d);
            }
            step = step * opts.backtracking;
        };
        mapping_norm = frob_dot(&d, &d).sqrt() / step;
        k = next;
        f = f_next;
        if mapping_norm <= opts.tolerance {
            return PgOutcome {
                gram: k,
                iterations: it + 1,
                converged: true,
                mapping_norm,
            };
        }
    }
    PgOutcome {
        gram: k,
        iterations: opts.max_iterations,
        converged: false,
        mapping_norm,
    }
}

/// Newton's method on `K = v v^T`, `v = (x, y)`: an unconstrained smooth problem whose
/// minimizers are the rank-one minimizers of the risk.
pub fn polish_rank_one<T: Scalar>(start: &EmbeddingGram<T>, g: &SbmGraphon<T>) -> EmbeddingGram<T> {
    let e = start.eigen();
    if e.values[0] <= T::zero() {
        return EmbeddingGram::zero();
    }
    let s = e.values[0].sqrt();
    let mut x = s * e.vectors[0][0];
    let mut y = s * e.vectors[0][1];
    let [w1, w2, w3] = g.block_weights();
    let two = T::two();
    let objective = |x: T, y: T| w1 * pair_loss(x * x, g.p) + w2 * pair_loss(x * y, g.q) + w3 * pair_loss(y * y, g.r);
    let mut f = objective(x, y);
    for _ in 0..100 {
        let (k1, k2, k3) = (x * x, x * y, y * y);
        let (r1, r2, r3) = (sigmoid(k1) - g.p, sigmoid(k2) - g.q, sigmoid(k3) - g.r);
        let (h1, h2, h3) = (sigmoid_prime(k1), sigmoid_prime(k2), sigmoid_prime(k3));
        let gx = w1 * r1 * two * x + w2 * r2 * y;
        let gy = w2 * r2 * x + w3 * r3 * two * y;
        if gx.abs().max(gy.abs()) <= T::epsilon() {
            break;
        }
        let hxx = w1 * (h1 * two * two * x * x + two * r1) + w2 * h2 * y * y;
        let hyy = w3 * (h3 * two * two * y * y + two * r3) + w2 * h2 * x * x;
        let hxy = w2 * (h2 * x * y + r2);
        let det = hxx * hyy - hxy * hxy;
        let (dx, dy) = if hxx > T::zero() && det > T::zero() {
            (-(hyy * gx - hxy * gy) / det, -(hxx * gy - hxy * gx) / det)
        } else {
            (-gx, -gy)
        };
        let slope = gx * dx + gy * dy;
        let mut t = T::one();
        let mut accepted = false;
        while t > T::epsilon() {
            let (nx, ny) = (x + t * dx, y + t * dy);
            let nf = objective(nx, ny);
            if nf <= f + T::lit(1e-4) * t * slope {
                x = nx;
                y = ny;
                f = nf;
                accepted = true;
                break;
            }
            t = t * T::half();
        }
        if !accepted {
            break;
        }
    }
    EmbeddingGram::new(x * x, x * y, y * y)
}

fn is_rank_deficient<T: Scalar>(k: &EmbeddingGram<T>) -> bool {
    let e = k.eigen();
    e.values[1] <= T::lit(RANK_TOL) * e.values[0].max(T::one())
}

/// Minimizes the risk over PSD grams for a graphon with `p, q, r` in `(0, 1)`.
pub fn solve_gram<T: Scalar>(g: &SbmGraphon<T>, opts: &SolverOptions<T>) -> Result<GramSolution<T>> {
    g.require_open()?;
    opts.validate()?;
    let pg = projected_gradient(g, opts);
    let tol = opts.certificate_tol;

    let mut candidates: Vec<(EmbeddingGram<T>, SolutionSource)> = Vec::with_capacity(3);
    if opts.analytic_shortcut {
        if let Some(k) = analytic_gram(g)? {
            candidates.push((k, SolutionSource::ClosedForm));
        }
    }
    if opts.polish && is_rank_deficient(&pg.gram) {
        candidates.push((polish_rank_one(&pg.gram, g), SolutionSource::RankOnePolish));
    }
    candidates.push((pg.gram, SolutionSource::ProjectedGradient));

    for (gram, source) in candidates {
        if !gram.is_finite() {
            continue;
        }
        let certificate = certify(&gram, g);
        if certificate.is_valid(tol) {
            return Ok(GramSolution {
                gram,
                certificate,
                iterations: pg.iterations,
                risk: risk(&gram, g),
                source,
            });
        }
    }
    let best = pg.gram;
    Err(Error::NonConvergence {
        iterations: pg.iterations,
        best: [best.k1.as_f64(), best.k2.as_f64(), best.k3.as_f64()],
        gradient_norm: if pg.converged {
            certify(&best, g).max_residual().as_f64()
        } else {
            pg.mapping_norm.as_f64()
        },
    })
}

/// [`solve_gram`] with default options.
pub fn embed<T: Scalar>(g: &SbmGraphon<T>) -> Result<GramSolution<T>> {
    solve_gram(g, &SolverOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(a: f64, p: f64, q: f64, r: f64) -> SbmGraphon<f64> {
        SbmGraphon::new(a, p, q, r).unwrap()
    }

    const LOGIT_09: f64 = 2.197_224_577_336_219_4;
    const LOGIT_07: f64 = 0.847_297_860_387_203_6;

    #[test]
    fn dense_example_closed_form_and_iterative() {
        let gr = g(0.5, 0.9, 0.5, 0.9);
        let expect = EmbeddingGram::new(LOGIT_09, 0.0, LOGIT_09);
        let a = analytic_gram(&gr).unwrap().unwrap();
        assert!(a.max_abs_diff(&expect) < 1e-14);
        let s = solve_gram(&gr, &SolverOptions::projected_gradient_only()).unwrap();
        assert!(s.gram.max_abs_diff(&expect) < 1e-9);
        assert!(s.certificate.is_valid(1e-6));
        assert_eq!(s.certificate.duals(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn sparse_example_is_zero() {
        let gr = g(0.6, 0.3, 0.3, 0.3);
        assert_eq!(analytic_gram(&gr).unwrap(), Some(EmbeddingGram::zero()));
        let s = solve_gram(&gr, &SolverOptions::projected_gradient_only()).unwrap();
        assert!(s.gram.max_abs() < 1e-9);
        assert_eq!(s.certificate.form, CertificateForm::ConeVertex);
        let s = embed(&gr).unwrap();
        assert_eq!(s.gram, EmbeddingGram::zero());
    }

    #[test]
    fn sparse_off_half_cross_density_needs_cone_certificate() {
        // q != 1/2 at the origin: no Lagrangian multipliers exist.
        let gr = g(0.5, 0.3, 0.4, 0.3);
        let z = EmbeddingGram::zero();
        let best = certify(&z, &gr);
        assert!(best.is_valid(1e-12));
        let lagrangian = kkt_residuals(&z, [best.mu1, best.mu2, 0.0], &gr);
        assert!(lagrangian[2].abs() > 1e-3);
    }

    #[test]
    fn half_cross_density_edge_case() {
        let gr = g(0.5, 0.3, 0.5, 0.7);
        let expect = EmbeddingGram::new(0.0, 0.0, LOGIT_07);
        assert!(analytic_gram(&gr).unwrap().unwrap().max_abs_diff(&expect) < 1e-15);
        let s = solve_gram(&gr, &SolverOptions::projected_gradient_only()).unwrap();
        assert!(s.gram.max_abs_diff(&expect) < 1e-6, "{:?}", s.gram);
        let s = embed(&gr).unwrap();
        assert!(s.gram.max_abs_diff(&expect) < 1e-12);
        // mirrored edge case
        let gr = g(0.5, 0.7, 0.5, 0.3);
        let k = analytic_gram(&gr).unwrap().unwrap();
        assert!(k.max_abs_diff(&EmbeddingGram::new(LOGIT_07, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn middle_interior_has_no_closed_form() {
        assert_eq!(analytic_gram(&g(0.66, 0.9, 0.1, 0.4)).unwrap(), None);
    }

    #[test]
    fn middle_solution_structure() {
        for (gr, sign) in [(g(0.66, 0.9, 0.1, 0.4), -1.0), (g(0.4, 0.3, 0.8, 0.2), 1.0)] {
            let s = embed(&gr).unwrap();
            let k = s.gram;
            assert_abs_diff_eq!(k.k2.abs(), (k.k1 * k.k3).sqrt(), epsilon = 1e-9);
            assert_eq!(k.k2.signum(), sign);
            assert!(s.certificate.mu3 > 0.0);
            assert!(s.certificate.max_residual() < 1e-12);
            // polished answer agrees with plain projected gradient
            let pg = solve_gram(&gr, &SolverOptions::projected_gradient_only()).unwrap();
            assert!(pg.gram.max_abs_diff(&k) < 1e-6);
        }
    }

    #[test]
    fn kkt_residual_examples() {
        let gr = g(0.5, 0.9, 0.5, 0.9);
        let k = EmbeddingGram::new(LOGIT_09, 0.0, LOGIT_09);
        for r in kkt_residuals(&k, [0.0; 3], &gr) {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-15);
        }
        let (a, p, r) = (0.3, 0.2, 0.4);
        let gr = g(a, p, 0.5, r);
        let duals = [a * a * (0.5 - p), (1.0 - a) * (1.0 - a) * (0.5 - r), 0.0];
        for res in kkt_residuals(&EmbeddingGram::zero(), duals, &gr) {
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kkt_residual_first_order_in_k1() {
        let gr = g(0.6, 0.7, 0.3, 0.8);
        let k = EmbeddingGram::new(0.9, -0.2, 1.1);
        let duals = [0.01, 0.02, 0.03];
        let base = kkt_residuals(&k, duals, &gr)[0];
        for delta in [1e-3, 1e-4] {
            let kp = EmbeddingGram::new(k.k1 + delta, k.k2, k.k3);
            let moved = kkt_residuals(&kp, duals, &gr)[0] - base;
            let predicted = gr.a * gr.a * sigmoid_prime(k.k1) * delta;
            assert!((moved - predicted).abs() < delta * delta);
        }
    }

    #[test]
    fn rejects_degenerate_and_bad_options() {
        assert!(matches!(embed(&g(0.5, 1.0, 0.5, 0.5)), Err(Error::Degenerate(_))));
        let opts = SolverOptions { initial_step: 0.0, ..SolverOptions::default() };
        assert!(solve_gram(&g(0.5, 0.6, 0.5, 0.5), &opts).is_err());
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        let opts = SolverOptions { max_iterations: 2, ..SolverOptions::projected_gradient_only() };
        match solve_gram(&g(0.75, 0.9, 0.1, 0.4), &opts) {
            Err(Error::NonConvergence { iterations, best, .. }) => {
                assert_eq!(iterations, 2);
                assert!(best.iter().all(|v| v.is_finite()));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn solves_in_f32() {
        let gr = SbmGraphon::new(0.66_f32, 0.9, 0.1, 0.4).unwrap();
        let s = embed(&gr).unwrap();
        let d = embed(&g(0.66, 0.9, 0.1, 0.4)).unwrap().gram;
        assert!((s.gram.k1 as f64 - d.k1).abs() < 1e-3);
        assert!((s.gram.k3 as f64 - d.k3).abs() < 1e-3);
    }
}
