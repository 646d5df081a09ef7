//! Zeta-regularized and graded determinants of finite, optionally tailed,
//! non-self-adjoint spectra, with Agmon-angle branch bookkeeping.
//!
//! # Finite regularized determinants
//!
//! For a finite spectrum `{(lambda_k, m_k)}` with no zero modes and an
//! admissible angle `theta`, the zeta function is
//! `zeta_theta(s) = sum m_k exp(-s log_theta lambda_k)`, so
//! `zeta_theta'(0) = -sum m_k log_theta(lambda_k)` and
//!
//! ```text
//! det_theta = exp(-zeta_theta'(0)) = exp(sum m_k log_theta(lambda_k)).
//! ```
//!
//! Since `exp(log_theta lambda) = lambda` for every branch, the finite
//! determinant equals `prod lambda_k^{m_k}` exactly; admissible angles can
//! only move the exponent by integer multiples of `2 pi i`, which is why
//! the value is theta-independent.
//!
//! # Tailed spectra
//!
//! With a [`TailModel`] describing the small-time expansion
//! `Tr exp(-tP) ~ sum_j a_j t^{(j-d)/2}` of the full heat trace, the
//! derivative at zero is recovered from the split Mellin representation
//! `zeta(s) = 1/Gamma(s) int_0^inf Tr(exp(-tP)) t^{s-1} dt`:
//! the `(0, 1)` piece is integrated after subtracting the expansion
//! analytically, the `(1, inf)` piece directly (the trace decays like
//! `exp(-delta t)` when every eigenvalue has real part at least
//! `delta > 0`), and the expansion itself integrates in closed form.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::linalg::{c64, sort_complex, C64};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, PartialEq)]
pub enum RegdetError {
    #[error("spectrum contains a zero mode; remove zero modes first")]
    ZeroEigenvalue,
    #[error("lambda lies on the branch cut at angle {theta}")]
    OnCut { theta: f64 },
    #[error("no admissible Agmon angle: the sector at {theta} meets the spectrum")]
    SectorOccupied { theta: f64 },
    #[error("the Mellin form needs Re(lambda) >= delta > 0; found min Re = {min_re}")]
    SpectrumNotPositive { min_re: f64 },
    #[error("spectrum items are empty and no tail model is present")]
    MissingTail,
    #[error("r = {r} lies on the spectrum (Re(lambda) = r)")]
    ROnSpectrum { r: f64 },
}

/// Asymptotic model of the omitted part of a spectrum: Weyl dimension and
/// the small-time heat coefficients `a_j` for `t^{(j-d)/2}`, `j = 0, 1, ...`
/// of the full trace. `tail_start` marks the eigenvalue magnitude up to
/// which the listed items are complete; it defaults to the largest listed
/// real part.
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel {
    pub weyl_dim: u32,
    pub heat_coeffs: Vec<f64>,
    pub tail_start: Option<f64>,
}

/// A finite list of complex eigenvalues with algebraic multiplicities,
/// sorted by `(Re, Im)` ascending, plus an optional tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    items: Vec<(C64, u32)>,
    pub tail: Option<TailModel>,
}

impl SpectralData {
    pub fn new(mut items: Vec<(C64, u32)>) -> Self {
        items.retain(|(_, m)| *m > 0);
        items.sort_by(|a, b| {
            (a.0.re, a.0.im)
                .partial_cmp(&(b.0.re, b.0.im))
                .expect("finite eigenvalues")
        });
        Self { items, tail: None }
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Cluster raw eigenvalues into multiplicities first.
    pub fn from_eigenvalues(eigs: &[C64], tol: f64) -> Self {
        Self::new(crate::linalg::cluster_multiplicities(eigs, tol))
    }

    pub fn items(&self) -> &[(C64, u32)] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.items.iter().map(|(_, m)| m).sum()
    }

    pub fn min_re(&self) -> Option<f64> {
        self.items.iter().map(|(l, _)| l.re).reduce(f64::min)
    }

    pub fn max_re(&self) -> Option<f64> {
        self.items.iter().map(|(l, _)| l.re).reduce(f64::max)
    }

    fn scale(&self) -> f64 {
        self.items
            .iter()
            .map(|(l, _)| l.norm())
            .fold(0.0, f64::max)
            .max(1.0)
    }

    /// Split off zero modes: `(h, nonzero part)` where `h` counts the total
    /// multiplicity of eigenvalues with `|lambda| <= tol * scale`.
    pub fn split_zero(&self, tol: f64) -> (u32, SpectralData) {
        let scale = self.scale();
        let mut zero = 0;
        let mut rest = Vec::new();
        for &(l, m) in &self.items {
            if l.norm() <= tol * scale {
                zero += m;
            } else {
                rest.push((l, m));
            }
        }
        let mut out = SpectralData::new(rest);
        out.tail = self.tail.clone();
        (zero, out)
    }

    /// Expanded eigenvalue list with multiplicities repeated.
    pub fn expanded(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for &(l, m) in &self.items {
            for _ in 0..m {
                out.push(l);
            }
        }
        sort_complex(&mut out);
        out
    }

    /// Disjoint union of two spectra.
    pub fn union(&self, other: &SpectralData) -> SpectralData {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        SpectralData::new(items)
    }

    fn has_zero(&self) -> bool {
        let scale = self.scale();
        self.items
            .iter()
            .any(|(l, _)| l.norm() <= 1e-12 * scale)
    }
}

/// An Agmon angle for a given spectrum: the closed sector
/// `[theta - epsilon, theta + epsilon]` contains no spectrum point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgmonAngle {
    pub theta: f64,
    pub epsilon: f64,
}

impl AgmonAngle {
    pub fn new(theta: f64, epsilon: f64, spec: &SpectralData) -> Result<Self, RegdetError> {
        if !sector_check(spec, theta, epsilon) {
            return Err(RegdetError::SectorOccupied { theta });
        }
        Ok(Self {
            theta: crate::model::normalize_angle(theta),
            epsilon,
        })
    }
}

/// True iff no nonzero eigenvalue has its argument within
/// `[theta - epsilon, theta + epsilon]` mod `2 pi`.
pub fn sector_check(spec: &SpectralData, theta: f64, epsilon: f64) -> bool {
    for &(l, _) in spec.items() {
        if l.norm() == 0.0 {
            continue;
        }
        let gap = angle_gap(l.arg(), theta);
        if gap <= epsilon {
            return false;
        }
    }
    true
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = crate::model::normalize_angle(a - b);
    d.min(TAU - d)
}

/// The branch of the logarithm with cut along the ray at angle `theta`:
/// `log|lambda| + i phi` with `phi = arg(lambda) mod 2 pi` and
/// `theta < phi < theta + 2 pi`.
pub fn log_branch(lambda: C64, theta: f64) -> Result<C64, RegdetError> {
    if lambda.norm() == 0.0 {
        return Err(RegdetError::ZeroEigenvalue);
    }
    let theta = crate::model::normalize_angle(theta);
    if angle_gap(lambda.arg(), theta) <= 1e-13 {
        return Err(RegdetError::OnCut { theta });
    }
    let mut phi = crate::model::normalize_angle(lambda.arg());
    if phi <= theta {
        phi += TAU;
    }
    Ok(c64(lambda.norm().ln(), phi))
}

/// Spectral zeta function of a finite spectrum:
/// `sum m_k exp(-s log_theta(lambda_k))`.
pub fn zeta_function(spec: &SpectralData, theta: f64, s: C64) -> Result<C64, RegdetError> {
    if spec.has_zero() {
        return Err(RegdetError::ZeroEigenvalue);
    }
    let mut acc = c64(0.0, 0.0);
    for &(l, m) in spec.items() {
        let lb = log_branch(l, theta)?;
        acc += c64(m as f64, 0.0) * (-s * lb).exp();
    }
    Ok(acc)
}

/// Heat trace `sum m_k exp(-t lambda_k)` of a finite spectrum.
pub fn heat_trace(spec: &SpectralData, t: f64) -> C64 {
    let mut acc = c64(0.0, 0.0);
    for &(l, m) in spec.items() {
        acc += c64(m as f64, 0.0) * (-l * t).exp();
    }
    acc
}

/// Regularized determinant of a finite spectrum without zero modes:
/// `exp(sum m_k log_theta(lambda_k)) = exp(-zeta_theta'(0))`.
pub fn reg_det_finite(spec: &SpectralData, theta: f64) -> Result<C64, RegdetError> {
    if spec.has_zero() {
        return Err(RegdetError::ZeroEigenvalue);
    }
    let mut acc = c64(0.0, 0.0);
    for &(l, m) in spec.items() {
        acc += c64(m as f64, 0.0) * log_branch(l, theta)?;
    }
    Ok(acc.exp())
}

/// Graded determinant `det(P+) / det(P-)`.
pub fn graded_det(
    plus: &SpectralData,
    minus: &SpectralData,
    theta: f64,
) -> Result<C64, RegdetError> {
    Ok(reg_det_finite(plus, theta)? / reg_det_finite(minus, theta)?)
}

/// `prod lambda^{m(lambda)}` over the nonzero eigenvalues with real part
/// below `r`. Integer exponents; branch-free.
pub fn prime_det_product(spec: &SpectralData, r: f64) -> Result<C64, RegdetError> {
    let scale = spec.scale();
    for &(l, _) in spec.items() {
        if (l.re - r).abs() <= 1e-12 * scale.max(r.abs()) {
            return Err(RegdetError::ROnSpectrum { r });
        }
    }
    let mut acc = c64(1.0, 0.0);
    for &(l, m) in spec.items() {
        if l.norm() <= 1e-12 * scale {
            continue; // zero modes are excluded by definition
        }
        if l.re < r {
            acc *= l.powi(m as i32);
        }
    }
    Ok(acc)
}

/// Zeta-regularized determinant of a spectrum with a small-time tail model.
/// Returns the determinant and a quadrature error estimate.
///
/// Without a tail model the finite computation applies unchanged. With one,
/// `zeta'(0)` is assembled from the split Mellin representation at the
/// fixed angle `theta = pi` (spectrum in the right half plane), using the
/// principal value on each eigenvalue:
///
/// ```text
/// zeta'(0) = gamma_E a_d + sum_{j != d} 2 a_j / (j - d)
///          + int_{0}^{1} (Tr exp(-tP) - asympt(t)) dt/t
///          + int_{1}^{inf} Tr exp(-tP) dt/t
/// ```
///
/// where `a_d` is the coefficient of `t^0`. The first integral is taken
/// from a crossover `t_min` chosen so that both the listed items represent
/// the full trace and the expansion represents it below; the neglected
/// strip enters the error estimate through the mismatch at `t_min`.
pub fn reg_det_with_tail(spec: &SpectralData) -> Result<(C64, f64), RegdetError> {
    let Some(tail) = spec.tail.clone() else {
        if spec.is_empty() {
            return Err(RegdetError::MissingTail);
        }
        return Ok((reg_det_finite(spec, PI)?, 0.0));
    };
    if spec.is_empty() {
        return Err(RegdetError::MissingTail);
    }
    let min_re = spec.min_re().expect("non-empty spectrum");
    if min_re <= 0.0 {
        return Err(RegdetError::SpectrumNotPositive { min_re });
    }
    let delta = min_re;
    let m_tot = spec.total_multiplicity() as f64;
    let d = tail.weyl_dim as i32;

    let asympt = |t: f64| -> f64 {
        tail.heat_coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * t.powf((j as i32 - d) as f64 / 2.0))
            .sum()
    };
    let a_d = tail
        .heat_coeffs
        .get(d as usize)
        .copied()
        .unwrap_or(0.0);

    // crossover below which the expansion stands in for the listed items
    let lambda_star = tail.tail_start.unwrap_or_else(|| spec.max_re().unwrap());
    let t_min = (34.5 / lambda_star).min(0.5);

    // analytic part: sum_{j != d} a_j / ((j - d)/2)
    let mut analytic = 0.0;
    for (j, a) in tail.heat_coeffs.iter().enumerate() {
        let num = j as i32 - d;
        if num != 0 {
            analytic += 2.0 * a / num as f64;
        }
    }

    // (t_min, 1): subtracted remainder, integrated in u = log t
    let f1 = |u: f64| -> C64 {
        let t = u.exp();
        heat_trace(spec, t) - c64(asympt(t), 0.0)
    };
    let (i1, e1) = adaptive_simpson_complex(&f1, t_min.ln(), 0.0, 1e-12, 40);

    // (1, T): direct heat trace, integrated in u = log t;
    // T chosen so the dropped tail is below 1e-15 relative to m_tot
    let t_max = ((m_tot / 1e-15).ln() / delta).max(2.0);
    let f2 = |u: f64| -> C64 {
        let t = u.exp();
        heat_trace(spec, t)
    };
    let (i2, e2) = adaptive_simpson_complex(&f2, 0.0, t_max.ln(), 1e-12, 40);

    let zeta_prime = c64(EULER_GAMMA * a_d + analytic, 0.0) + i1 + i2;
    let det = (-zeta_prime).exp();

    // error estimate: quadrature + matching mismatch at the crossover +
    // the dropped exponential tail of the upper integral
    let mismatch = (heat_trace(spec, t_min) - c64(asympt(t_min), 0.0)).norm();
    let strip = mismatch * (1.0 / t_min).ln().max(1.0);
    let upper_tail = m_tot * (-delta * t_max).exp() / delta;
    let zeta_err = e1 + e2 + strip + upper_tail;
    // first-order propagation through exp(-zeta')
    let det_err = det.norm() * zeta_err;
    Ok((det, det_err))
}

/// Adaptive Simpson quadrature of a complex-valued integrand on `[a, b]`.
/// Returns the integral and an error estimate.
fn adaptive_simpson_complex<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (C64, f64) {
    fn simpson(fa: C64, fm: C64, fb: C64, h: f64) -> C64 {
        (fa + fm * 4.0 + fb) * (h / 6.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> C64>(
        f: &F,
        a: f64,
        b: f64,
        fa: C64,
        fm: C64,
        fb: C64,
        whole: C64,
        tol: f64,
        depth: u32,
    ) -> (C64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = (left + right - whole).norm() / 15.0;
        if depth == 0 || err <= tol {
            return (left + right + (left + right - whole) / 15.0, err);
        }
        let (vl, el) = recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1);
        let (vr, er) = recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
        (vl + vr, el + er)
    }
    if a == b {
        return (c64(0.0, 0.0), 0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(items: &[(f64, f64, u32)]) -> SpectralData {
        SpectralData::new(items.iter().map(|&(re, im, m)| (c64(re, im), m)).collect())
    }

    #[test]
    fn sector_check_examples() {
        assert!(sector_check(
            &spec(&[(1.0, 0.0, 1), (2.0, 0.0, 1), (3.0, 0.0, 1)]),
            PI,
            0.1
        ));
        assert!(!sector_check(&spec(&[(-1.0, 0.0, 1)]), PI, 0.1));
        let e = spec(&[((PI / 4.0).cos(), (PI / 4.0).sin(), 1)]);
        assert!(!sector_check(&e, PI / 4.0, 0.01));
    }

    #[test]
    fn log_branch_windows() {
        let l1 = log_branch(c64(1.0, 0.0), PI).unwrap();
        assert!((l1 - c64(0.0, TAU)).norm() < 1e-12);
        let li = log_branch(c64(0.0, 1.0), PI).unwrap();
        assert!((li - c64(0.0, 2.5 * PI)).norm() < 1e-12);
        let lm = log_branch(c64(-1.0, 0.0), 0.0).unwrap();
        assert!((lm - c64(0.0, PI)).norm() < 1e-12);
    }

    #[test]
    fn log_branch_rejects_cut() {
        assert!(matches!(
            log_branch(c64(-2.0, 0.0), PI),
            Err(RegdetError::OnCut { .. })
        ));
    }

    #[test]
    fn zeta_function_values() {
        // the branch window (pi, 3pi) puts log 4 at ln 4 + 2 pi i, so
        // s = 1/2 picks up the phase exp(-i pi) = -1
        let z = zeta_function(&spec(&[(4.0, 0.0, 1)]), PI, c64(0.5, 0.0)).unwrap();
        assert!((z - c64(-0.5, 0.0)).norm() < 1e-12);

        let s = c64(0.7, 0.3);
        let z = zeta_function(&spec(&[(1.0, 0.0, 2)]), PI, s).unwrap();
        let expected = (-s * c64(0.0, TAU)).exp() * 2.0;
        assert!((z - expected).norm() < 1e-12);

        let z = zeta_function(&spec(&[(2.0, 0.0, 1), (3.0, 0.0, 1)]), PI, c64(1.0, 0.0)).unwrap();
        assert!((z - c64(5.0 / 6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zeta_function_rejects_zero_modes() {
        assert!(matches!(
            zeta_function(&spec(&[(0.0, 0.0, 1), (1.0, 0.0, 1)]), PI, c64(1.0, 0.0)),
            Err(RegdetError::ZeroEigenvalue)
        ));
    }

    #[test]
    fn heat_trace_values() {
        let h = heat_trace(&spec(&[(1.0, 0.0, 2), (4.0, 0.0, 1)]), 1.0);
        assert!((h.re - 0.7540745).abs() < 1e-7);
        let h0 = heat_trace(&spec(&[(1.0, 0.0, 2), (4.0, 0.0, 1)]), 1e-12);
        assert!((h0.re - 3.0).abs() < 1e-9);
        let l = c64(0.3, 0.8);
        let h1 = heat_trace(&SpectralData::new(vec![(l, 1)]), 2.0);
        assert!((h1 - (-l * 2.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn heat_trace_derivative_sanity() {
        let sp = spec(&[(0.5, 0.2, 1), (2.0, -0.3, 2)]);
        let t = 1.0;
        let eps = 1e-6;
        let fd = (heat_trace(&sp, t + eps) - heat_trace(&sp, t - eps)) / (2.0 * eps);
        let exact: C64 = sp
            .items()
            .iter()
            .map(|&(l, m)| -l * c64(m as f64, 0.0) * (-l * t).exp())
            .sum();
        assert!((fd - exact).norm() < 1e-6);
    }

    #[test]
    fn finite_det_golden_values() {
        let d = reg_det_finite(&spec(&[(2.0, 0.0, 1)]), PI).unwrap();
        assert!((d - c64(2.0, 0.0)).norm() < 1e-12);

        let s = spec(&[(1.0, 0.0, 1), (0.0, 1.0, 1)]);
        let d1 = reg_det_finite(&s, PI).unwrap();
        assert!((d1 - c64(0.0, 1.0)).norm() < 1e-12);
        let d2 = reg_det_finite(&s, 1.5 * PI).unwrap();
        assert!((d2 - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn finite_det_multiplicative() {
        let a = spec(&[(2.0, 1.0, 1), (0.5, -0.3, 2)]);
        let b = spec(&[(3.0, -2.0, 1)]);
        let du = reg_det_finite(&a.union(&b), PI).unwrap();
        let dp = reg_det_finite(&a, PI).unwrap() * reg_det_finite(&b, PI).unwrap();
        assert!((du - dp).norm() < 1e-12 * dp.norm());
    }

    #[test]
    fn graded_det_examples() {
        let g = graded_det(&spec(&[(2.0, 0.0, 1)]), &spec(&[(4.0, 0.0, 1)]), PI).unwrap();
        assert!((g - c64(0.5, 0.0)).norm() < 1e-12);
        let s = spec(&[(1.3, 0.4, 2)]);
        let g = graded_det(&s, &s, PI).unwrap();
        assert!((g - c64(1.0, 0.0)).norm() < 1e-12);
        let g = graded_det(&spec(&[(0.0, 1.0, 1)]), &spec(&[(1.0, 0.0, 1)]), PI).unwrap();
        assert!((g - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn prime_product_examples() {
        let p = prime_det_product(&spec(&[(1.0, 0.0, 1), (3.0, 0.0, 1)]), 2.0).unwrap();
        assert!((p - c64(1.0, 0.0)).norm() < 1e-14);
        let p = prime_det_product(&spec(&[(2.0, 0.0, 1), (3.0, 0.0, 1)]), 10.0).unwrap();
        assert!((p - c64(6.0, 0.0)).norm() < 1e-14);
        let p = prime_det_product(&spec(&[(0.0, 0.0, 2), (2.0, 0.0, 1)]), 1.0).unwrap();
        assert!((p - c64(1.0, 0.0)).norm() < 1e-14);
        assert!(matches!(
            prime_det_product(&spec(&[(2.0, 0.0, 1)]), 2.0),
            Err(RegdetError::ROnSpectrum { .. })
        ));
    }

    #[test]
    fn r_stability_of_split_product() {
        // det restricted to Re >= r times the prime product below r is
        // independent of admissible r
        let sp = spec(&[(0.5, 0.1, 1), (1.5, -0.7, 2), (3.0, 0.2, 1), (5.0, 0.0, 1)]);
        let mut values = Vec::new();
        for r in [1.0, 2.0, 4.0, 10.0] {
            let above = SpectralData::new(
                sp.items()
                    .iter()
                    .cloned()
                    .filter(|(l, _)| l.re >= r)
                    .collect(),
            );
            let det_above = if above.is_empty() {
                c64(1.0, 0.0)
            } else {
                reg_det_finite(&above, PI).unwrap()
            };
            let below = prime_det_product(&sp, r).unwrap();
            values.push(det_above * below);
        }
        for v in &values[1..] {
            assert!((v - values[0]).norm() < 1e-10 * values[0].norm());
        }
    }

    #[test]
    fn tailless_matches_finite() {
        let sp = spec(&[(1.0, 0.5, 1), (2.0, -0.25, 3)]);
        let (d, err) = reg_det_with_tail(&sp).unwrap();
        let f = reg_det_finite(&sp, PI).unwrap();
        assert_eq!(err, 0.0);
        assert!((d - f).norm() < 1e-10 * f.norm());
    }

    #[test]
    fn circle_model_recovers_two_pi_squared() {
        // lambda_k = k^2 with multiplicity 2: zeta(s) = 2 zeta_R(2s),
        // det = exp(-4 zeta_R'(0)) = (2 pi)^2
        let k_max = 200;
        let items: Vec<(C64, u32)> = (1..=k_max)
            .map(|k| (c64((k * k) as f64, 0.0), 2))
            .collect();
        let sp = SpectralData::new(items).with_tail(TailModel {
            weyl_dim: 1,
            heat_coeffs: vec![PI.sqrt(), -1.0],
            tail_start: None,
        });
        let (d, err) = reg_det_with_tail(&sp).unwrap();
        let expected = TAU * TAU;
        assert!(
            (d.re - expected).abs() < 1e-3,
            "det = {d}, expected {expected}, err estimate {err}"
        );
        assert!(d.im.abs() < 1e-6);
    }

    #[test]
    fn circle_model_error_shrinks_with_k() {
        let run = |k_max: i64| -> f64 {
            let items: Vec<(C64, u32)> = (1..=k_max)
                .map(|k| (c64((k * k) as f64, 0.0), 2))
                .collect();
            let sp = SpectralData::new(items).with_tail(TailModel {
                weyl_dim: 1,
                heat_coeffs: vec![PI.sqrt(), -1.0],
                tail_start: None,
            });
            let (d, _) = reg_det_with_tail(&sp).unwrap();
            (d.re - TAU * TAU).abs()
        };
        let e50 = run(50);
        let e200 = run(200);
        // observed order >= 1 in 1/K
        assert!(
            e200 < e50 / 2.0,
            "error did not shrink: e50 = {e50}, e200 = {e200}"
        );
    }

    #[test]
    fn scaled_spectrum_shifts_by_zeta_zero() {
        // scaling lambda -> c lambda multiplies det by c^{zeta(0)};
        // zeta(0) = a_d here, with coefficients scaled accordingly
        let k_max = 200;
        let c_scale = 2.0;
        let base: Vec<(C64, u32)> = (1..=k_max)
            .map(|k| (c64((k * k) as f64, 0.0), 2))
            .collect();
        let scaled: Vec<(C64, u32)> = base
            .iter()
            .map(|&(l, m)| (l * c_scale, m))
            .collect();
        let sp = SpectralData::new(scaled).with_tail(TailModel {
            weyl_dim: 1,
            // a_j -> a_j c^{-(j-d)/2}: sqrt(pi)/sqrt(2), -1
            heat_coeffs: vec![PI.sqrt() / c_scale.sqrt(), -1.0],
            tail_start: None,
        });
        let (d, _) = reg_det_with_tail(&sp).unwrap();
        let expected = TAU * TAU * c_scale.powf(-1.0); // zeta(0) = a_d = -1
        assert!(
            (d.re - expected).abs() < 1e-3,
            "det = {d}, expected {expected}"
        );
    }

    #[test]
    fn theta_independence_on_random_spectra() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = 1 + rng.gen_range(0..6);
            let items: Vec<(C64, u32)> = (0..n)
                .map(|_| {
                    (
                        c64(rng.gen_range(0.2..4.0), rng.gen_range(-2.0..2.0)),
                        rng.gen_range(1..3),
                    )
                })
                .collect();
            let sp = SpectralData::new(items);
            // both angles lie in the spectrum-free left half plane sector
            let d1 = reg_det_finite(&sp, PI).unwrap();
            let d2 = reg_det_finite(&sp, PI * 0.9).unwrap();
            assert!((d1 - d2).norm() <= 1e-12 * d1.norm().max(1.0));
        }
    }
}
