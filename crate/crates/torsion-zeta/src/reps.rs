//! Representation evaluation: words, symmetric powers of the standard
//! `SL(2, C)` representation, the Cartan twist, certified trace growth
//! constants, and local Euler factors.

use thiserror::Error;

use crate::linalg::{c64, det, C64, CMatrix};
use crate::model::{GroupPresentation, LengthSpectrum, RepresentationSpec};
use crate::tolerances;

#[derive(Debug, Error, PartialEq)]
pub enum RepError {
    #[error("word letter {letter} is out of range for {generators} generators")]
    IndexOutOfRange { letter: i32, generators: usize },
    #[error("trace growth constants need a spectrum with at least one primitive")]
    NeedsSpectrum,
    #[error("symmetric powers require the d = 3 matrix front end")]
    WrongDimension,
}

/// Evaluate a representation on a generator word. Negative letters denote
/// inverses. The empty word is the identity.
pub fn evaluate_word(rep: &RepresentationSpec, word: &[i32]) -> Result<CMatrix, RepError> {
    let n = rep.dim_rep;
    let mut acc = CMatrix::identity(n, n);
    for &letter in word {
        let idx = letter.unsigned_abs() as usize;
        if letter == 0 || idx > rep.generator_images.len() {
            return Err(RepError::IndexOutOfRange {
                letter,
                generators: rep.generator_images.len(),
            });
        }
        let image = &rep.generator_images[idx - 1];
        if letter > 0 {
            acc = acc * image;
        } else {
            let inv = image
                .clone()
                .try_inverse()
                .expect("generator images are invertible");
            acc = acc * inv;
        }
    }
    Ok(acc)
}

/// Trace of the m-th symmetric power of an `SL(2, C)` element with
/// eigenvalues `lambda`, `1/lambda`:
/// `sum_{j=0}^{m} lambda^{m-2j} = (lambda^{m+1} - lambda^{-(m+1)}) / (lambda - 1/lambda)`.
///
/// Near-degenerate eigenvalues (`|lambda - 1/lambda|` tiny) switch to the
/// direct summation form automatically.
pub fn symmetric_power_trace(lambda: C64, m: u32) -> C64 {
    let inv = c64(1.0, 0.0) / lambda;
    let denom = lambda - inv;
    if denom.norm() < tolerances::SYM_TRACE_DEGENERATE {
        let mut sum = c64(0.0, 0.0);
        for j in 0..=m {
            sum += lambda.powi(m as i32 - 2 * j as i32);
        }
        sum
    } else {
        (lambda.powi(m as i32 + 1) - inv.powi(m as i32 + 1)) / denom
    }
}

/// The m-th symmetric power of the standard representation, acting on
/// degree-m monomials `e1^(m-j) e2^j` in two variables.
pub fn symmetric_power_rep(pres: &GroupPresentation, m: u32) -> RepresentationSpec {
    let images = pres
        .generators
        .iter()
        .map(|g| {
            symmetric_power_matrix(
                g[(0, 0)],
                g[(0, 1)],
                g[(1, 0)],
                g[(1, 1)],
                m,
            )
        })
        .collect();
    RepresentationSpec::new(m as usize + 1, images, false)
}

/// Matrix of `S^m(g)` in the monomial basis, for `g = [[a, b], [c, d]]`
/// acting by `e1 -> a e1 + c e2`, `e2 -> b e1 + d e2`.
pub fn symmetric_power_matrix(a: C64, b: C64, c: C64, d: C64, m: u32) -> CMatrix {
    let size = m as usize + 1;
    let mut out = CMatrix::zeros(size, size);
    for j in 0..=m as usize {
        // (a e1 + c e2)^(m-j) (b e1 + d e2)^j, coefficient of e1^(m-i) e2^i
        for p in 0..=(m as usize - j) {
            for q in 0..=j {
                let i = p + q;
                let coeff = binom(m as usize - j, p) * binom(j, q);
                let term = a.powi((m as usize - j - p) as i32)
                    * c.powi(p as i32)
                    * b.powi((j - q) as i32)
                    * d.powi(q as i32);
                out[(i, j)] += term * c64(coeff as f64, 0.0);
            }
        }
    }
    out
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Compose a representation with the Cartan involution
/// `theta(g) = (g^*)^{-1}`: each generator image is replaced by the inverse
/// of its conjugate transpose. For functorial constructions this transforms
/// the images directly, which agrees with the functorial twist up to a
/// fixed change of basis, so traces and Euler factors are unaffected.
pub fn cartan_twist(rep: &RepresentationSpec) -> RepresentationSpec {
    let images = rep
        .generator_images
        .iter()
        .map(|g| {
            g.adjoint()
                .try_inverse()
                .expect("generator images are invertible")
        })
        .collect();
    RepresentationSpec::new(rep.dim_rep, images, rep.unitary)
}

/// Constants `(C, c)` with `|tr chi(gamma)| <= C exp(c ell(gamma))`.
///
/// `c` is the largest generator log-operator-norm per unit of the shortest
/// enumerated primitive length; `C` starts at `dim` and is raised until the
/// bound holds on every class of the supplied spectrum that carries a word.
/// Certified for enumerated classes, heuristic beyond the cutoff.
pub fn trace_growth_constants(
    rep: &RepresentationSpec,
    spectrum: &LengthSpectrum,
) -> Result<(f64, f64), RepError> {
    let ell_min = spectrum.ell_min().ok_or(RepError::NeedsSpectrum)?;
    let mut max_log_norm = 0.0_f64;
    for img in &rep.generator_images {
        let inv = img
            .clone()
            .try_inverse()
            .expect("generator images are invertible");
        for m in [img, &inv] {
            let op = operator_norm(m);
            if op > 1.0 {
                max_log_norm = max_log_norm.max(op.ln());
            }
        }
    }
    let c_exp = if max_log_norm > 0.0 {
        max_log_norm / ell_min
    } else {
        0.0
    };
    let mut c_big = rep.dim_rep as f64;
    for class in &spectrum.classes {
        if let Some(word) = &class.word {
            let tr = evaluate_word(rep, word)?.trace().norm();
            let needed = tr / (c_exp * class.clen.ell()).exp();
            if needed > c_big {
                c_big = needed;
            }
        }
    }
    Ok((c_big, c_exp))
}

fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// The representation datum entering one Euler factor: either the full
/// matrix `chi(gamma)` or its eigenvalue multiset (the symmetric-power
/// shortcut that avoids materializing large matrices).
#[derive(Debug, Clone)]
pub enum RepValue {
    Matrix(CMatrix),
    Eigenvalues(Vec<C64>),
}

impl RepValue {
    pub fn dim(&self) -> usize {
        match self {
            RepValue::Matrix(m) => m.nrows(),
            RepValue::Eigenvalues(e) => e.len(),
        }
    }

    pub fn trace(&self) -> C64 {
        match self {
            RepValue::Matrix(m) => m.trace(),
            RepValue::Eigenvalues(e) => e.iter().sum(),
        }
    }
}

/// Inputs of one local factor of a twisted Euler product.
///
/// `shift = 0` reproduces the plain Ruelle normalization; `shift = n`
/// is the twisted normalization with the half-sum of positive roots.
#[derive(Debug, Clone)]
pub struct LocalFactorInput {
    pub rep_value: RepValue,
    /// Value of a character of the holonomy group; modulus 1, or exactly 1
    /// for the untwisted case.
    pub sigma_value: C64,
    pub ell: f64,
    pub s: C64,
    pub shift: f64,
}

impl LocalFactorInput {
    pub fn sigma_is_unit(&self) -> bool {
        (self.sigma_value.norm() - 1.0).abs() <= tolerances::UNIT_MODULUS_TOL
    }
}

/// `det(Id - sigma * chi(gamma) * exp(-(s + shift) * ell))`, or the product
/// over the eigenvalue multiset when the matrix is not materialized.
pub fn euler_factor(inp: &LocalFactorInput) -> C64 {
    let scale = inp.sigma_value * (-(inp.s + c64(inp.shift, 0.0)) * inp.ell).exp();
    det_one_minus(scale, &inp.rep_value)
}

/// `det(Id - scale * rep)`; the shared core of the Ruelle and Selberg
/// factors.
pub fn det_one_minus(scale: C64, rep_value: &RepValue) -> C64 {
    match rep_value {
        RepValue::Matrix(m) => {
            let n = m.nrows();
            let scaled = CMatrix::identity(n, n) - m * scale;
            det(&scaled)
        }
        RepValue::Eigenvalues(eigs) => {
            let mut acc = c64(1.0, 0.0);
            for mu in eigs {
                acc *= c64(1.0, 0.0) - scale * mu;
            }
            acc
        }
    }
}
