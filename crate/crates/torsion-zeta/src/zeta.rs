//! Truncated Euler products for the Ruelle and Selberg zeta functions with
//! certified truncation errors, plus the exponent bookkeeping behind the
//! determinant formula: the re-indexed double product, the restriction
//! branching coefficients, and the Casimir shifts.

use rayon::prelude::*;
use thiserror::Error;

use crate::geodesics::ad_restricted_eigenvalues;
use crate::linalg::{c64, kahan_sum, C64};
use crate::model::{GeodesicClass, LengthSpectrum, RepresentationSpec};
use crate::reps::{det_one_minus, evaluate_word, symmetric_power_trace, trace_growth_constants, RepValue};

#[derive(Debug, Error, PartialEq)]
pub enum ZetaError {
    #[error("spectrum carries no growth metadata and no constants were supplied")]
    NoGrowthConstants,
    #[error("class {class_id} has no stored word; matrix representations need enumerated spectra")]
    MissingWord { class_id: String },
    #[error("Re(s) + shift = {sigma_re} is not above the abscissa {abscissa}")]
    NotConvergent { sigma_re: f64, abscissa: f64 },
    #[error("weight vector must have length {expected}, found {found}")]
    BadWeight { expected: usize, found: usize },
    #[error("d = {d} must be an odd integer >= 3")]
    BadDimension { d: u32 },
    #[error("character twists by an integer index are only defined for d = 3")]
    SigmaRequiresD3,
    #[error(transparent)]
    Rep(#[from] crate::reps::RepError),
}

/// A truncated Euler product value with a certified bound on the truncation
/// error of its logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedValue {
    pub value: C64,
    /// Certified bound on `|log(true) - log(value)|` under the supplied
    /// growth constants; `infinity` flags an evaluation outside the
    /// certified convergence region.
    pub abs_log_error: f64,
    pub cutoff_used: f64,
    pub classes_used: usize,
}

/// How the representation is evaluated on classes.
#[derive(Debug, Clone, Copy)]
pub enum RepAssignment<'a> {
    /// One-dimensional trivial representation.
    Trivial,
    /// Explicit generator images; classes must carry words.
    Matrix(&'a RepresentationSpec),
    /// m-th symmetric power of the standard representation, evaluated from
    /// the complex length alone via the canonical lift
    /// `lambda = exp((ell + i theta) / 2)`.
    SymPower(u32),
}

impl<'a> RepAssignment<'a> {
    pub fn dim(&self) -> usize {
        match self {
            RepAssignment::Trivial => 1,
            RepAssignment::Matrix(rep) => rep.dim_rep,
            RepAssignment::SymPower(m) => *m as usize + 1,
        }
    }

    fn value_for(&self, class: &GeodesicClass) -> Result<RepValue, ZetaError> {
        match self {
            RepAssignment::Trivial => Ok(RepValue::Eigenvalues(vec![c64(1.0, 0.0)])),
            RepAssignment::Matrix(rep) => {
                let word = class.word.as_ref().ok_or_else(|| ZetaError::MissingWord {
                    class_id: class.id.clone(),
                })?;
                Ok(RepValue::Matrix(evaluate_word(rep, word)?))
            }
            RepAssignment::SymPower(m) => {
                let lambda = sl2_eigenvalue(class);
                let eigs: Vec<C64> = (0..=*m)
                    .map(|j| lambda.powi(*m as i32 - 2 * j as i32))
                    .collect();
                Ok(RepValue::Eigenvalues(eigs))
            }
        }
    }

    fn trace_for(&self, class: &GeodesicClass) -> Result<C64, ZetaError> {
        match self {
            RepAssignment::Trivial => Ok(c64(1.0, 0.0)),
            RepAssignment::Matrix(rep) => {
                let word = class.word.as_ref().ok_or_else(|| ZetaError::MissingWord {
                    class_id: class.id.clone(),
                })?;
                Ok(evaluate_word(rep, word)?.trace())
            }
            RepAssignment::SymPower(m) => Ok(symmetric_power_trace(sl2_eigenvalue(class), *m)),
        }
    }

    /// Certified trace growth `(C, c)` for this assignment.
    fn growth(&self, spectrum: &LengthSpectrum) -> Result<(f64, f64), ZetaError> {
        match self {
            RepAssignment::Trivial => Ok((1.0, 0.0)),
            RepAssignment::SymPower(m) => Ok((*m as f64 + 1.0, *m as f64 / 2.0)),
            RepAssignment::Matrix(rep) => match rep.growth_constants {
                Some(gc) => Ok(gc),
                None => Ok(trace_growth_constants(rep, spectrum)?),
            },
        }
    }
}

/// Canonical `SL(2, C)` eigenvalue of a class from its complex length.
fn sl2_eigenvalue(class: &GeodesicClass) -> C64 {
    ((c64(class.clen.ell(), class.clen.theta())) / c64(2.0, 0.0)).exp()
}

fn sigma_value(class: &GeodesicClass, sigma: Option<i64>) -> C64 {
    match sigma {
        None => c64(1.0, 0.0),
        Some(l) => c64(0.0, l as f64 * class.clen.theta()).exp(),
    }
}

fn growth_or_err(spectrum: &LengthSpectrum) -> Result<(f64, f64), ZetaError> {
    spectrum.growth.ok_or(ZetaError::NoGrowthConstants)
}

fn check_sigma_dim(spectrum: &LengthSpectrum, sigma: Option<i64>) -> Result<(), ZetaError> {
    if sigma.is_some() && spectrum.dim != 3 {
        return Err(ZetaError::SigmaRequiresD3);
    }
    Ok(())
}

/// Certified bound on the dropped log-tail of a truncated Euler product,
/// by integral comparison over the counting measure:
/// `C * C_gamma * exp(-(Re(s) + shift - c - g) * cutoff) / (Re(s) + shift - c - g)`.
pub fn truncation_error_bound(
    s: C64,
    shift: f64,
    cutoff: f64,
    growth: (f64, f64),
    trace_growth: (f64, f64),
) -> Result<f64, ZetaError> {
    let (c_gamma, g) = growth;
    let (c_big, c_small) = trace_growth;
    let margin = s.re + shift - c_small - g;
    if margin <= 0.0 {
        return Err(ZetaError::NotConvergent {
            sigma_re: s.re + shift,
            abscissa: c_small + g,
        });
    }
    Ok(c_big * c_gamma * (-margin * cutoff).exp() / margin)
}

/// Twisted Ruelle zeta function as a truncated Euler product over the
/// primitive classes:
/// `prod det(Id - sigma(m) chi(gamma) exp(-(s + shift) ell))`.
///
/// Outside the certified convergence region the value is still returned but
/// `abs_log_error` is infinite.
pub fn ruelle_zeta(
    spectrum: &LengthSpectrum,
    rep: &RepAssignment,
    sigma: Option<i64>,
    s: C64,
    shift: f64,
) -> Result<TruncatedValue, ZetaError> {
    check_sigma_dim(spectrum, sigma)?;
    let growth = growth_or_err(spectrum)?;
    let tg = rep.growth(spectrum)?;
    let primitives: Vec<&GeodesicClass> = spectrum.primitives().collect();
    let logs: Vec<C64> = primitives
        .par_iter()
        .map(|class| {
            let rv = rep.value_for(class)?;
            let scale =
                sigma_value(class, sigma) * (-(s + c64(shift, 0.0)) * class.clen.ell()).exp();
            Ok(det_one_minus(scale, &rv).ln())
        })
        .collect::<Result<_, ZetaError>>()?;
    let log_sum = kahan_sum(logs);
    let err = truncation_error_bound(s, shift, spectrum.cutoff, growth, tg)
        .unwrap_or(f64::INFINITY);
    Ok(TruncatedValue {
        value: log_sum.exp(),
        abs_log_error: err,
        cutoff_used: spectrum.cutoff,
        classes_used: primitives.len(),
    })
}

/// The same product through its logarithmic expansion over all classes
/// (primitives and powers):
/// `exp(-sum tr((chi ox sigma)(gamma)) exp(-(s + shift) ell) / n(gamma))`.
///
/// Identical to [`ruelle_zeta`] on power-complete spectra; the two routes
/// form an independent check of one another.
pub fn log_euler_sum(
    spectrum: &LengthSpectrum,
    rep: &RepAssignment,
    sigma: Option<i64>,
    s: C64,
    shift: f64,
) -> Result<TruncatedValue, ZetaError> {
    check_sigma_dim(spectrum, sigma)?;
    let growth = growth_or_err(spectrum)?;
    let tg = rep.growth(spectrum)?;
    let terms: Vec<C64> = spectrum
        .classes
        .par_iter()
        .map(|class| {
            let tr = rep.trace_for(class)? * sigma_value(class, sigma);
            let weight = (-(s + c64(shift, 0.0)) * class.clen.ell()).exp();
            Ok(tr * weight / c64(class.power as f64, 0.0))
        })
        .collect::<Result<_, ZetaError>>()?;
    let sum = kahan_sum(terms);
    let err = truncation_error_bound(s, shift, spectrum.cutoff, growth, tg)
        .unwrap_or(f64::INFINITY);
    Ok(TruncatedValue {
        value: (-sum).exp(),
        abs_log_error: err,
        cutoff_used: spectrum.cutoff,
        classes_used: spectrum.classes.len(),
    })
}

/// All degree-k monomials in the base values (the eigenvalue multiset of
/// the k-th symmetric power), generated by the complete homogeneous
/// recursion over the variables.
pub fn sym_power_eigenvalues(base: &[C64], k: u32) -> Vec<C64> {
    let k = k as usize;
    let mut by_degree: Vec<Vec<C64>> = vec![Vec::new(); k + 1];
    by_degree[0].push(c64(1.0, 0.0));
    for &u in base {
        for deg in 1..=k {
            // uses the already-updated previous degree: monomials may repeat u
            let prev: Vec<C64> = by_degree[deg - 1].iter().map(|m| m * u).collect();
            by_degree[deg].extend(prev);
        }
    }
    by_degree.pop().expect("k + 1 degree buckets")
}

/// Twisted Selberg zeta function: double product over primitive classes and
/// symmetric-power weights `k = 0..k_max`, at the fixed shift `n`.
/// The dropped `k > k_max` tail is folded into `abs_log_error`.
pub fn selberg_zeta(
    spectrum: &LengthSpectrum,
    rep: &RepAssignment,
    sigma: Option<i64>,
    s: C64,
    k_max: u32,
) -> Result<TruncatedValue, ZetaError> {
    check_sigma_dim(spectrum, sigma)?;
    let growth = growth_or_err(spectrum)?;
    let tg = rep.growth(spectrum)?;
    let n = spectrum.n() as f64;
    let d = spectrum.dim;
    let primitives: Vec<&GeodesicClass> = spectrum.primitives().collect();

    let per_class: Vec<(C64, f64)> = primitives
        .par_iter()
        .map(|class| {
            let rv = rep.value_for(class)?;
            let base = ad_restricted_eigenvalues(class, d).map_err(|_| ZetaError::BadDimension { d })?;
            let sv = sigma_value(class, sigma);
            let weight = (-(s + c64(n, 0.0)) * class.clen.ell()).exp();
            let mut log_acc = c64(0.0, 0.0);
            for k in 0..=k_max {
                for nu in sym_power_eigenvalues(&base, k) {
                    log_acc += det_one_minus(sv * nu * weight, &rv).ln();
                }
            }
            let tail = sym_tail_bound(&rv, class.clen.ell(), s.re + n, d, k_max);
            Ok((log_acc, tail))
        })
        .collect::<Result<_, ZetaError>>()?;

    let log_sum = kahan_sum(per_class.iter().map(|(l, _)| *l));
    let k_tail: f64 = per_class.iter().map(|(_, t)| *t).sum();
    let trunc = truncation_error_bound(s, n, spectrum.cutoff, growth, tg)
        .unwrap_or(f64::INFINITY);
    Ok(TruncatedValue {
        value: log_sum.exp(),
        abs_log_error: trunc + k_tail,
        cutoff_used: spectrum.cutoff,
        classes_used: primitives.len(),
    })
}

/// Bound on the dropped `k > k_max` log-tail for one class: the k-th weight
/// contributes at most `dim S^k(C^{d-1}) = C(k + d - 2, d - 2)` eigenvalues
/// of modulus `exp(-k ell)`.
fn sym_tail_bound(rv: &RepValue, ell: f64, sigma_re: f64, d: u32, k_max: u32) -> f64 {
    let mu_max = match rv {
        RepValue::Eigenvalues(e) => e.iter().map(|z| z.norm()).fold(0.0, f64::max),
        // operator norm bounds the spectral radius
        RepValue::Matrix(m) => m
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max),
    };
    let x = (-ell).exp();
    let m = (d - 2) as usize;
    let outer = mu_max * (-sigma_re * ell).exp();
    let z_next = outer * x.powi(k_max as i32 + 1);
    if z_next >= 0.5 {
        return f64::INFINITY;
    }
    // exact geometric tail: sum_{k > K} C(k+m, m) x^k
    let full = (1.0 - x).powi(-(m as i32) - 1);
    let mut partial = 0.0;
    let mut coeff = 1.0_f64; // C(k+m, m) at k = 0
    for k in 0..=k_max as usize {
        partial += coeff * x.powi(k as i32);
        coeff = coeff * (k + m + 1) as f64 / (k + 1) as f64;
    }
    let tail = (full - partial).max(0.0);
    let n_dim = rv.dim() as f64;
    // |log(1 - z)| <= |z| / (1 - |z_max|), and z decreases in k
    n_dim * outer * tail / (1.0 - z_next)
}

/// One factor of the re-indexed determinant formula: degree `k`, shift
/// index `p`, and the sign `(-1)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentEntry {
    pub k: u32,
    pub p: u32,
    pub sign: i32,
}

/// The exponent table of the determinant formula for `R(s, chi)`:
/// entries `{(k, p) : 0 <= k <= p <= d-1}` with sign `(-1)^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentTable {
    pub d: u32,
    pub entries: Vec<ExponentEntry>,
}

/// Build the exponent table by the re-indexing
/// `prod_p prod_{k <= p} -> prod_k prod_{p >= k}`.
pub fn det_formula_exponents(d: u32) -> Result<ExponentTable, ZetaError> {
    if d < 3 || d % 2 == 0 {
        return Err(ZetaError::BadDimension { d });
    }
    let mut entries = Vec::new();
    for k in 0..d {
        for p in k..d {
            entries.push(ExponentEntry {
                k,
                p,
                sign: if k % 2 == 0 { 1 } else { -1 },
            });
        }
    }
    Ok(ExponentTable { d, entries })
}

/// Direct expansion of the `(p, k)`-ordered double product
/// `prod_{p=0}^{d-1} prod_{j=0}^{p} det(. + s(s + 2(n-p)))^{(-1)^{p+j}}`,
/// collected as `(degree, p, sign)` entries. Independent route used to
/// verify [`det_formula_exponents`].
pub fn det_formula_exponents_by_expansion(d: u32) -> Result<ExponentTable, ZetaError> {
    if d < 3 || d % 2 == 0 {
        return Err(ZetaError::BadDimension { d });
    }
    let mut entries = Vec::new();
    for p in 0..d {
        for j in 0..=p {
            entries.push(ExponentEntry {
                k: p - j,
                p,
                sign: if (p + j) % 2 == 0 { 1 } else { -1 },
            });
        }
    }
    entries.sort();
    Ok(ExponentTable { d, entries })
}

/// Branching coefficients of the virtual representation
/// `tau_p = sum_{k=0}^{p} (-1)^k lambda_{p-k}`: pairs
/// `(exterior power index, sign)`.
pub fn branching_sigma_p(p: u32) -> Vec<(u32, i32)> {
    (0..=p)
        .map(|k| (p - k, if k % 2 == 0 { 1 } else { -1 }))
        .collect()
}

/// Formal check of the telescoping identity `i*(tau_p) = sigma_p`:
/// expands every `i*(lambda_j) = sigma_j + sigma_{j-1}` and returns the
/// resulting integer coefficient vector over `sigma_0..sigma_p`.
pub fn branching_telescope(p: u32) -> Vec<i64> {
    let mut coeffs = vec![0i64; p as usize + 1];
    for (j, sign) in branching_sigma_p(p) {
        coeffs[j as usize] += sign as i64;
        if j > 0 {
            coeffs[j as usize - 1] += sign as i64;
        }
    }
    coeffs
}

/// Casimir shift of the p-th exterior-power character: `-(n - p)^2`
/// for `d = 2n + 1`. Exact integers.
pub fn casimir_shift(d: u32, p: u32) -> Result<i64, ZetaError> {
    if d < 3 || d % 2 == 0 || p >= d {
        return Err(ZetaError::BadDimension { d });
    }
    let n = ((d - 1) / 2) as i64;
    let diff = n - p as i64;
    Ok(-diff * diff)
}

/// General Casimir shift from a highest weight, in coordinates on
/// `e_2..e_{n+1}`: `-|rho|^2 - |rho_m|^2 + |nu + rho_m|^2` with
/// `rho_m = sum_j (n + 1 - j) e_j` and `|rho| = n`. Exact integers.
pub fn casimir_shift_general(d: u32, highest_weight: &[i64]) -> Result<i64, ZetaError> {
    if d < 3 || d % 2 == 0 {
        return Err(ZetaError::BadDimension { d });
    }
    let n = ((d - 1) / 2) as usize;
    if highest_weight.len() != n {
        return Err(ZetaError::BadWeight {
            expected: n,
            found: highest_weight.len(),
        });
    }
    let rho_m: Vec<i64> = (0..n).map(|i| (n - 1 - i) as i64).collect();
    let norm2 = |v: &[i64]| -> i64 { v.iter().map(|x| x * x).sum() };
    let shifted: Vec<i64> = highest_weight
        .iter()
        .zip(rho_m.iter())
        .map(|(a, b)| a + b)
        .collect();
    let n_i = n as i64;
    Ok(-n_i * n_i - norm2(&rho_m) + norm2(&shifted))
}

/// The highest weight of the p-th exterior power `sigma_p` in the
/// coordinates used by [`casimir_shift_general`].
pub fn sigma_p_weight(d: u32, p: u32) -> Result<Vec<i64>, ZetaError> {
    if d < 3 || d % 2 == 0 || p >= d {
        return Err(ZetaError::BadDimension { d });
    }
    let n = ((d - 1) / 2) as usize;
    let ones = if (p as usize) <= n {
        p as usize
    } else {
        // nu_p = e_2 + ... + e_{2n+1-p}
        (d - 1 - p) as usize
    };
    let mut w = vec![0i64; n];
    for slot in w.iter_mut().take(ones) {
        *slot = 1;
    }
    Ok(w)
}
