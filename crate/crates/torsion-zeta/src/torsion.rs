//! Chain-level torsion stack: complex Reidemeister torsion of based cochain
//! complexes, flat Laplacians from a star structure, generalized zero
//! eigenspaces, Cappell-Miller torsion, the order and constant of the zeta
//! function at the origin, and the finite-model limit verifier.
//!
//! # Orientation convention
//!
//! The alternating product uses the exponent `(-1)^(q+1)`:
//!
//! ```text
//! tau(C*) = prod_q [b_q, h_q, b_{q+1} / c_q]^{(-1)^(q+1)},
//! ```
//!
//! the chain-style orientation. With this convention the determinant
//! identity `T = tau^2` holds on acyclic complexes whose star structure is
//! unitary, matching the weights `(-1)^(k+1) k` of the analytic side; the
//! opposite orientation would produce `1/tau^2`.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{
    c64, det, eigenvalues, express_in_basis, matrix_power, multisets_match, null_space,
    rank_by_svd, rank_revealing_columns, scale_of, C64, CMatrix, CVector,
};
use crate::regdet::{prime_det_product, reg_det_finite, RegdetError, SpectralData};
use crate::tolerances;

#[derive(Debug, Error)]
pub enum TorsionError {
    #[error("malformed complex: {0}")]
    BadComplex(String),
    #[error("invalid star structure: {0}")]
    StarInvalid(String),
    #[error("transition matrix is singular; the vectors are not a basis")]
    Singular,
    #[error("complex is not acyclic in degree {degree}; cohomology bases are required")]
    NotAcyclicWithoutBases { degree: usize },
    #[error("supplied bases are inconsistent in degree {degree}: {detail}")]
    InconsistentBases { degree: usize, detail: String },
    #[error("restricted map does not close on the zero modes in degree {degree} (residual {residual})")]
    NotClosed { degree: usize, residual: f64 },
    #[error("per-degree spectra violate duality in degree {degree}")]
    DualityViolated { degree: usize },
    #[error("h vector must have length {expected}, found {found}")]
    BadLength { expected: usize, found: usize },
    #[error("integer overflow while forming the constant")]
    Overflow,
    #[error(transparent)]
    Regdet(#[from] RegdetError),
}

/// A finite cochain complex with preferred bases: ranks `r_0..r_d` and
/// differentials `delta_q : C^q -> C^{q+1}` expressed in those bases.
#[derive(Debug, Clone, PartialEq)]
pub struct CochainComplex {
    pub dims: Vec<usize>,
    pub deltas: Vec<CMatrix>,
}

impl CochainComplex {
    pub fn new(dims: Vec<usize>, deltas: Vec<CMatrix>) -> Result<Self, TorsionError> {
        let cx = Self { dims, deltas };
        cx.validate()?;
        Ok(cx)
    }

    /// Top degree `d`.
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn validate(&self) -> Result<(), TorsionError> {
        if self.dims.is_empty() {
            return Err(TorsionError::BadComplex("no degrees".into()));
        }
        if self.deltas.len() + 1 != self.dims.len() {
            return Err(TorsionError::BadComplex(format!(
                "{} ranks need {} differentials, found {}",
                self.dims.len(),
                self.dims.len() - 1,
                self.deltas.len()
            )));
        }
        for (q, delta) in self.deltas.iter().enumerate() {
            if delta.nrows() != self.dims[q + 1] || delta.ncols() != self.dims[q] {
                return Err(TorsionError::BadComplex(format!(
                    "delta_{q} must be {}x{}, found {}x{}",
                    self.dims[q + 1],
                    self.dims[q],
                    delta.nrows(),
                    delta.ncols()
                )));
            }
        }
        for q in 0..self.deltas.len().saturating_sub(1) {
            let comp = &self.deltas[q + 1] * &self.deltas[q];
            let scale = scale_of(&self.deltas[q + 1]) * scale_of(&self.deltas[q]);
            if comp.norm() > tolerances::COMPLEX_NILPOTENCY_TOL * scale.max(1.0) {
                return Err(TorsionError::BadComplex(format!(
                    "delta_{} . delta_{} is not zero (norm {})",
                    q + 1,
                    q,
                    comp.norm()
                )));
            }
        }
        Ok(())
    }

    /// `delta_q`, with zero-shaped maps beyond the ends.
    pub fn delta(&self, q: isize) -> CMatrix {
        if q < 0 {
            return CMatrix::zeros(self.dims[0], 0);
        }
        let q = q as usize;
        if q >= self.deltas.len() {
            return CMatrix::zeros(0, *self.dims.last().expect("non-empty dims"));
        }
        self.deltas[q].clone()
    }
}

/// Invertible duality maps `star_q : C^q -> C^{d-q}` with
/// `star_{d-q} . star_q = (-1)^{q(d-q)} id`, mimicking the Hodge star.
#[derive(Debug, Clone, PartialEq)]
pub struct StarStructure {
    pub stars: Vec<CMatrix>,
}

impl StarStructure {
    pub fn new(stars: Vec<CMatrix>) -> Self {
        Self { stars }
    }

    pub fn validate(&self, cx: &CochainComplex) -> Result<(), TorsionError> {
        let d = cx.top();
        if self.stars.len() != d + 1 {
            return Err(TorsionError::StarInvalid(format!(
                "need {} star maps, found {}",
                d + 1,
                self.stars.len()
            )));
        }
        for q in 0..=d {
            let s = &self.stars[q];
            if s.nrows() != cx.dims[d - q] || s.ncols() != cx.dims[q] {
                return Err(TorsionError::StarInvalid(format!(
                    "star_{q} must be {}x{}, found {}x{}",
                    cx.dims[d - q],
                    cx.dims[q],
                    s.nrows(),
                    s.ncols()
                )));
            }
            let comp = &self.stars[d - q] * s;
            let sign = if (q * (d - q)) % 2 == 0 { 1.0 } else { -1.0 };
            let expected = CMatrix::identity(cx.dims[q], cx.dims[q]) * c64(sign, 0.0);
            let scale = scale_of(&self.stars[d - q]) * scale_of(s);
            if (comp - expected).norm() > tolerances::STAR_INVOLUTION_TOL * scale.max(1.0) {
                return Err(TorsionError::StarInvalid(format!(
                    "star_{} . star_{} is not (-1)^(q(d-q)) id",
                    d - q,
                    q
                )));
            }
        }
        Ok(())
    }
}

/// Determinant of the transition matrix `T` with `w_i = sum_j t_ij v_j`,
/// for two bases given as matrix columns.
pub fn base_change_det(v: &CMatrix, w: &CMatrix) -> Result<C64, TorsionError> {
    if v.nrows() != w.nrows() || v.ncols() != w.ncols() || v.nrows() != v.ncols() {
        return Err(TorsionError::Singular);
    }
    if v.ncols() == 0 {
        return Ok(c64(1.0, 0.0));
    }
    let solved = v
        .clone()
        .lu()
        .solve(w)
        .ok_or(TorsionError::Singular)?;
    let d = det(&solved);
    if d.norm() == 0.0 {
        return Err(TorsionError::Singular);
    }
    Ok(d)
}

/// A torsion value: a nonzero coefficient against the named reference
/// bases, with the sign ambiguity of basis orderings tracked explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionValue {
    pub coeff: C64,
    pub sign_ambiguous: bool,
    pub reference_bases: Vec<String>,
}

/// Complex Reidemeister torsion of a based cochain complex.
///
/// Bases `b_{q+1}` of the coboundary spaces are chosen by column-pivoted
/// elimination on `delta_q`; their lifts are the corresponding standard
/// basis vectors, so each `[b_q, h_q, b_{q+1} / c_q]` is the determinant of
/// an explicit matrix in the preferred coordinates. The result does not
/// depend on the pivot choice or the lifts.
///
/// Without cohomology bases the complex must be acyclic. With bases, the
/// given columns must be cocycles spanning complements of the coboundaries.
pub fn reidemeister_torsion(
    cx: &CochainComplex,
    cohom_bases: Option<&[CMatrix]>,
) -> Result<TorsionValue, TorsionError> {
    cx.validate()?;
    let d = cx.top();
    // pivot columns of each delta_q
    let mut pivots: Vec<Vec<usize>> = Vec::with_capacity(d);
    for q in 0..d {
        let (_, mut piv) = rank_revealing_columns(&cx.deltas[q], tolerances::RANK_GAP_TOL);
        piv.sort_unstable();
        pivots.push(piv);
    }

    let mut log_factors: Vec<(usize, C64)> = Vec::with_capacity(d + 1);
    let mut refs = Vec::new();
    for q in 0..=d {
        let r_q = cx.dims[q];
        let b_cols = if q == 0 { 0 } else { pivots[q - 1].len() };
        let lift_cols = if q == d { 0 } else { pivots[q].len() };
        let h_cols = r_q - b_cols.min(r_q) - lift_cols.min(r_q - b_cols.min(r_q));

        let mut m = CMatrix::zeros(r_q, r_q);
        let mut col = 0;
        // b_q: images of the selected pivot columns under delta_{q-1}
        if q > 0 {
            for &j in &pivots[q - 1] {
                m.set_column(col, &cx.deltas[q - 1].column(j).into_owned());
                col += 1;
            }
        }
        // h_q: supplied cocycle representatives
        match cohom_bases {
            Some(bases) => {
                let hq = &bases[q];
                if hq.ncols() != h_cols {
                    return Err(TorsionError::InconsistentBases {
                        degree: q,
                        detail: format!(
                            "expected {} cohomology vectors, found {}",
                            h_cols,
                            hq.ncols()
                        ),
                    });
                }
                if hq.ncols() > 0 {
                    let dq = cx.delta(q as isize);
                    let resid = (&dq * hq).norm();
                    if resid > tolerances::DEFAULT_TOL * scale_of(hq).max(1.0) * scale_of(&dq).max(1.0)
                    {
                        return Err(TorsionError::InconsistentBases {
                            degree: q,
                            detail: format!("representatives are not cocycles (residual {resid})"),
                        });
                    }
                    for j in 0..hq.ncols() {
                        m.set_column(col, &hq.column(j).into_owned());
                        col += 1;
                    }
                    refs.push(format!("h{q}: supplied"));
                }
            }
            None => {
                if h_cols != 0 {
                    return Err(TorsionError::NotAcyclicWithoutBases { degree: q });
                }
            }
        }
        // lifted b_{q+1}: standard basis vectors at the pivot columns
        if q < d {
            for &j in &pivots[q] {
                let mut e = CVector::zeros(r_q);
                e[j] = c64(1.0, 0.0);
                m.set_column(col, &e);
                col += 1;
            }
        }
        if col != r_q {
            return Err(TorsionError::NotAcyclicWithoutBases { degree: q });
        }
        let dm = det(&m);
        if dm.norm() == 0.0 {
            return Err(TorsionError::Singular);
        }
        log_factors.push((q, dm));
    }

    let mut coeff = c64(1.0, 0.0);
    for (q, dm) in log_factors {
        if q % 2 == 1 {
            coeff *= dm;
        } else {
            coeff /= dm;
        }
    }
    Ok(TorsionValue {
        coeff,
        sign_ambiguous: true,
        reference_bases: refs,
    })
}

/// Flat codifferentials `d*_q = (-1)^(dq + d + 1) star_{d-q+1} . delta_{d-q} . star_q`
/// for `q = 0..=d`, with the empty map in degree 0. Satisfies
/// `d* . d* = 0` whenever the star involution identity holds.
pub fn flat_codifferential(
    cx: &CochainComplex,
    star: &StarStructure,
) -> Result<Vec<CMatrix>, TorsionError> {
    cx.validate()?;
    star.validate(cx)?;
    let d = cx.top();
    let mut out = Vec::with_capacity(d + 1);
    out.push(CMatrix::zeros(0, cx.dims[0]));
    for q in 1..=d {
        let sign = if (d * q + d + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let m = &star.stars[d - q + 1] * &cx.deltas[d - q] * &star.stars[q];
        out.push(m * c64(sign, 0.0));
    }
    Ok(out)
}

/// Flat Laplacians `Delta_q = d*_{q+1} delta_q + delta_{q-1} d*_q` per
/// degree; generally not self-adjoint.
pub fn flat_laplacian(
    cx: &CochainComplex,
    star: &StarStructure,
) -> Result<Vec<CMatrix>, TorsionError> {
    let codiff = flat_codifferential(cx, star)?;
    Ok(flat_laplacian_from_parts(cx, &codiff))
}

fn flat_laplacian_from_parts(cx: &CochainComplex, codiff: &[CMatrix]) -> Vec<CMatrix> {
    let d = cx.top();
    let mut out = Vec::with_capacity(d + 1);
    for q in 0..=d {
        let mut lap = CMatrix::zeros(cx.dims[q], cx.dims[q]);
        if q < d {
            lap += &codiff[q + 1] * &cx.deltas[q];
        }
        if q > 0 {
            lap += &cx.deltas[q - 1] * &codiff[q];
        }
        out.push(lap);
    }
    out
}

/// Generalized zero eigenspaces and the nonzero spectra, per degree.
#[derive(Debug, Clone)]
pub struct ZeroModeData {
    /// `h_k = dim V_0^k`.
    pub h: Vec<usize>,
    /// Orthonormal basis of `V_0^k`, as columns.
    pub bases: Vec<CMatrix>,
    /// `d` restricted to the zero modes, in the `bases` coordinates.
    pub d_restricted: Vec<CMatrix>,
    /// `d*` restricted to the zero modes, in the `bases` coordinates.
    pub codiff_restricted: Vec<CMatrix>,
    /// Nonzero generalized eigenvalues with algebraic multiplicities.
    pub nonzero: Vec<SpectralData>,
    /// Degrees whose rank decision had a margin below
    /// `ILL_CONDITION_FACTOR * eps`; results are returned but flagged.
    pub ill_conditioned: Vec<usize>,
}

impl ZeroModeData {
    pub fn top(&self) -> usize {
        self.h.len() - 1
    }
}

/// Generalized kernel of one square matrix: `ker(M^n)` by rank-revealing
/// SVD, plus the nonzero eigenvalues with algebraic multiplicities.
/// Returns `(h, kernel basis, nonzero spectrum, margin_ok)`.
pub fn generalized_kernel(m: &CMatrix) -> (usize, CMatrix, SpectralData, bool) {
    let n = m.nrows();
    if n == 0 {
        return (0, CMatrix::zeros(0, 0), SpectralData::new(Vec::new()), true);
    }
    let scale = scale_of(m);
    let normalized = m / c64(scale, 0.0);
    let powered = matrix_power(&normalized, n);
    let (rank, kept, dropped) = rank_by_svd(&powered, tolerances::RANK_GAP_TOL);
    let h = n - rank;
    let margin = if rank == 0 || rank == n {
        1.0
    } else {
        (kept - dropped) / kept.max(f64::MIN_POSITIVE)
    };
    let margin_ok = margin >= tolerances::ILL_CONDITION_FACTOR * f64::EPSILON;
    let basis = null_space(&powered, tolerances::RANK_GAP_TOL);
    // eigenvalues: the h of smallest magnitude are the zero group
    let mut eigs = eigenvalues(m);
    eigs.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"));
    let nonzero: Vec<C64> = eigs.into_iter().skip(h).collect();
    let spectral = SpectralData::from_eigenvalues(&nonzero, tolerances::SPECTRUM_MATCH_TOL);
    (h, basis, spectral, margin_ok)
}

/// Compute the zero-mode data of the flat Laplacians of `(cx, star)`:
/// generalized kernels, their `d` and `d*` restrictions, and the nonzero
/// spectra with zero modes removed.
pub fn zero_modes(cx: &CochainComplex, star: &StarStructure) -> Result<ZeroModeData, TorsionError> {
    let codiff = flat_codifferential(cx, star)?;
    let laplacians = flat_laplacian_from_parts(cx, &codiff);
    let d = cx.top();

    let per_degree: Vec<(usize, CMatrix, SpectralData, bool)> = laplacians
        .par_iter()
        .map(generalized_kernel)
        .collect();

    let mut h = Vec::with_capacity(d + 1);
    let mut bases = Vec::with_capacity(d + 1);
    let mut nonzero = Vec::with_capacity(d + 1);
    let mut ill = Vec::new();
    for (q, (hq, basis, spec, ok)) in per_degree.into_iter().enumerate() {
        h.push(hq);
        bases.push(basis);
        nonzero.push(spec);
        if !ok {
            ill.push(q);
        }
    }

    // restrict d and d* to the zero modes; they commute with the
    // Laplacians, so the restrictions must close
    let mut d_restricted = Vec::with_capacity(d + 1);
    let mut codiff_restricted = Vec::with_capacity(d + 1);
    for q in 0..=d {
        // d: V_0^q -> V_0^{q+1}
        if q < d {
            let image = &cx.deltas[q] * &bases[q];
            let (coeff, resid) = express_in_basis(&bases[q + 1], &image);
            let scale = scale_of(&image).max(1.0);
            if resid > tolerances::POWER_LINK_TOL * scale {
                return Err(TorsionError::NotClosed {
                    degree: q,
                    residual: resid,
                });
            }
            d_restricted.push(coeff);
        } else {
            d_restricted.push(CMatrix::zeros(0, h[d]));
        }
        // d*: V_0^q -> V_0^{q-1}
        if q > 0 {
            let image = &codiff[q] * &bases[q];
            let (coeff, resid) = express_in_basis(&bases[q - 1], &image);
            let scale = scale_of(&image).max(1.0);
            if resid > tolerances::POWER_LINK_TOL * scale {
                return Err(TorsionError::NotClosed {
                    degree: q,
                    residual: resid,
                });
            }
            codiff_restricted.push(coeff);
        } else {
            codiff_restricted.push(CMatrix::zeros(0, h[0]));
        }
    }

    Ok(ZeroModeData {
        h,
        bases,
        d_restricted,
        codiff_restricted,
        nonzero,
        ill_conditioned: ill,
    })
}

/// True iff `h_p = h_{d-p}` for all degrees and the nonzero spectra in dual
/// degrees agree as multisets within the spectrum tolerance.
pub fn duality_check(zero: &ZeroModeData) -> bool {
    let d = zero.top();
    for p in 0..=d {
        if zero.h[p] != zero.h[d - p] {
            return false;
        }
        let a = zero.nonzero[p].expanded();
        let b = zero.nonzero[d - p].expanded();
        if !multisets_match(&a, &b, tolerances::SPECTRUM_MATCH_TOL) {
            return false;
        }
    }
    true
}

/// Torsion of the zero-mode double complex `(V_0^*, d, d*)`, reported as a
/// coefficient against the supplied reference bases.
///
/// The value is assembled from the two one-sided torsions: the cochain side
/// `(V_0^*, d)` and the chain side `(V_0^*, d*)` read as a cochain complex
/// in reversed grading, the latter entering inversely (it represents the
/// homology determinant line, which appears dualized):
///
/// ```text
/// T_0 = tau(V_0, d) / tau(reversed V_0, d*).
/// ```
///
/// When `V_0 = 0` the torsion is 1. When the restriction of `d` is acyclic
/// both sides are plain numbers. Otherwise cohomology/homology bases must
/// be supplied for both sides.
pub fn t0_torsion(zero: &ZeroModeData) -> Result<TorsionValue, TorsionError> {
    t0_torsion_with_bases(zero, None, None)
}

/// As [`t0_torsion`], with explicit cohomology bases for the `d` side and
/// homology bases for the `d*` side (needed when the restricted complexes
/// are not acyclic). Bases are given per degree of `V_0^*`.
pub fn t0_torsion_with_bases(
    zero: &ZeroModeData,
    cohom_bases: Option<&[CMatrix]>,
    homol_bases: Option<&[CMatrix]>,
) -> Result<TorsionValue, TorsionError> {
    let d = zero.top();
    if zero.h.iter().all(|&h| h == 0) {
        return Ok(TorsionValue {
            coeff: c64(1.0, 0.0),
            sign_ambiguous: true,
            reference_bases: Vec::new(),
        });
    }
    // cochain side (V_0, d)
    let d_side = CochainComplex::new(zero.h.clone(), zero.d_restricted[..d].to_vec())?;
    let tau_d = reidemeister_torsion(&d_side, cohom_bases)?;
    // chain side (V_0, d*), reverse-graded into a cochain complex:
    // W^q = V_0^{d-q}, differential codiff_{d-q} : V^{d-q} -> V^{d-q-1}
    let w_dims: Vec<usize> = (0..=d).map(|q| zero.h[d - q]).collect();
    let w_deltas: Vec<CMatrix> = (0..d).map(|q| zero.codiff_restricted[d - q].clone()).collect();
    let w_side = CochainComplex::new(w_dims, w_deltas)?;
    let reversed_homol: Option<Vec<CMatrix>> =
        homol_bases.map(|bs| (0..=d).map(|q| bs[d - q].clone()).collect());
    let tau_delta = reidemeister_torsion(&w_side, reversed_homol.as_deref())?;

    let mut refs = vec!["V0 bases from zero_modes".to_string()];
    refs.extend(tau_d.reference_bases.iter().map(|r| format!("d-side {r}")));
    refs.extend(
        tau_delta
            .reference_bases
            .iter()
            .map(|r| format!("d*-side {r}")),
    );
    Ok(TorsionValue {
        coeff: tau_d.coeff / tau_delta.coeff,
        sign_ambiguous: true,
        reference_bases: refs,
    })
}

/// Where to split the spectrum in the Cappell-Miller product.
#[derive(Debug, Clone, Copy)]
pub enum Cut {
    /// `r > 0` with no eigenvalue real part equal to `r`: determinants of
    /// the `Re > r` parts times the finite products below `r`.
    Radius(f64),
    /// Agmon angle form: determinants of all nonzero eigenvalues at once.
    Angle(f64),
}

/// Cappell-Miller torsion
/// `prod_p det'(Delta_p)^{(-1)^(p+1) p} * T_0`, computed through the given
/// cut. The radius and angle forms agree on finite models.
pub fn cappell_miller_torsion(
    cx: &CochainComplex,
    star: &StarStructure,
    cut: Cut,
) -> Result<TorsionValue, TorsionError> {
    let zero = zero_modes(cx, star)?;
    let t0 = t0_torsion(&zero)?;
    let d = zero.top();
    let mut coeff = t0.coeff;
    for p in 1..=d {
        let spec = &zero.nonzero[p];
        let detp = match cut {
            Cut::Angle(theta) => {
                if spec.is_empty() {
                    c64(1.0, 0.0)
                } else {
                    reg_det_finite(spec, theta)?
                }
            }
            Cut::Radius(r) => {
                let above = SpectralData::new(
                    spec.items()
                        .iter()
                        .cloned()
                        .filter(|(l, _)| l.re > r)
                        .collect(),
                );
                let det_above = if above.is_empty() {
                    c64(1.0, 0.0)
                } else {
                    reg_det_finite(&above, std::f64::consts::PI)?
                };
                // guard: r must not meet the spectrum
                prime_det_product(spec, r)? * det_above
            }
        };
        let exp_sign = if (p + 1) % 2 == 0 { 1 } else { -1 };
        coeff *= detp.powi(exp_sign * p as i32);
    }
    Ok(TorsionValue {
        coeff,
        sign_ambiguous: t0.sign_ambiguous,
        reference_bases: t0.reference_bases,
    })
}

/// Order of the zeta function at the origin from the zero-mode dimensions
/// `h_0..h_n`: `sum_k (d + 1 - 2k) (-1)^k h_k`.
pub fn order_h(d: u32, h: &[usize]) -> Result<i64, TorsionError> {
    let n = ((d - 1) / 2) as usize;
    if h.len() != n + 1 {
        return Err(TorsionError::BadLength {
            expected: n + 1,
            found: h.len(),
        });
    }
    let mut acc = 0i64;
    for (k, &hk) in h.iter().enumerate() {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        acc += sign * (d as i64 + 1 - 2 * k as i64) * hk as i64;
    }
    Ok(acc)
}

/// Duality consistency of a full `h_0..h_{d-1}` vector.
pub fn h_duality_consistent(d: u32, h: &[usize]) -> bool {
    let d = d as usize;
    (1..d).all(|k| h[k] == h[d - k])
}

/// Leading-coefficient constant
/// `C(d, chi) = prod_{k=0}^{d-1} prod_{p=k, p != n}^{d-1} (2(n-p))^{(-1)^k h_k}`.
///
/// The factor at `p = n` is excluded: it is handled separately by the
/// limit laws and would contribute `2(n-p) = 0`. Exact integer arithmetic.
pub fn fried_constant(d: u32, h: &[usize]) -> Result<C64, TorsionError> {
    if h.len() != d as usize {
        return Err(TorsionError::BadLength {
            expected: d as usize,
            found: h.len(),
        });
    }
    let n = ((d - 1) / 2) as i64;
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for (k, &hk) in h.iter().enumerate() {
        for p in k as i64..d as i64 {
            if p == n {
                continue;
            }
            let base = 2 * (n - p);
            let mag = (base as i128).checked_pow(hk as u32).ok_or(TorsionError::Overflow)?;
            if k % 2 == 0 {
                num = num.checked_mul(mag).ok_or(TorsionError::Overflow)?;
            } else {
                den = den.checked_mul(mag).ok_or(TorsionError::Overflow)?;
            }
        }
    }
    Ok(c64(num as f64 / den as f64, 0.0))
}

/// Result of the finite-model verification of the limit identity at the
/// origin.
#[derive(Debug, Clone)]
pub struct FriedReport {
    pub h: Vec<usize>,
    pub order: i64,
    pub constant: C64,
    /// `C * prod_k det'(Delta_k)^{(-1)^(k+1) k}`.
    pub rhs: C64,
    /// `(s, s^{-h} * product over the exponent table)` per sample.
    pub lhs_samples: Vec<(C64, C64)>,
    /// Richardson (Neville) extrapolation of the samples to `s = 0`.
    pub lhs_extrapolated: C64,
    pub max_rel_deviation: f64,
    pub rel_deviation_extrapolated: f64,
}

/// Verify the limit identity on per-degree spectra: for each sample `s`,
///
/// ```text
/// LHS(s) = s^{-h} prod_{k=0}^{d-1} prod_{p=k}^{d-1}
///          det(Delta_k + s(s + 2(n-p)))^{(-1)^k}
/// ```
///
/// against `RHS = C(d, h) * prod_{k=1}^{d} det'(Delta_k)^{(-1)^(k+1) k}`,
/// with the extrapolated limit and the worst per-sample deviation reported.
/// The spectra must satisfy duality degree by degree.
pub fn fried_limit_check(
    spectra: &[SpectralData],
    d: u32,
    s_samples: &[C64],
) -> Result<FriedReport, TorsionError> {
    let du = d as usize;
    if spectra.len() != du + 1 {
        return Err(TorsionError::BadLength {
            expected: du + 1,
            found: spectra.len(),
        });
    }
    for k in 0..=du {
        let a = spectra[k].expanded();
        let b = spectra[du - k].expanded();
        if !multisets_match(&a, &b, tolerances::SPECTRUM_MATCH_TOL) {
            return Err(TorsionError::DualityViolated { degree: k });
        }
    }
    let n = ((d - 1) / 2) as i64;

    // zero modes and primed parts
    let mut h = Vec::with_capacity(du + 1);
    let mut primed = Vec::with_capacity(du + 1);
    for spec in spectra {
        let (hk, rest) = spec.split_zero(1e-12);
        h.push(hk as usize);
        primed.push(rest);
    }
    let order = order_h(d, &h[..=n as usize])?;
    let constant = fried_constant(d, &h[..du])?;

    let mut rhs = constant;
    for k in 1..=du {
        let detk = if primed[k].is_empty() {
            c64(1.0, 0.0)
        } else {
            reg_det_finite(&primed[k], std::f64::consts::PI)?
        };
        let sign = if (k + 1) % 2 == 0 { 1i32 } else { -1i32 };
        rhs *= detk.powi(sign * k as i32);
    }

    let lhs_at = |s: C64| -> C64 {
        let mut acc = s.powi(-(order as i32));
        for k in 0..du {
            for p in k as i64..d as i64 {
                let z = s * (s + c64(2.0 * (n - p) as f64, 0.0));
                let mut dtv = c64(1.0, 0.0);
                for &(l, m) in spectra[k].items() {
                    dtv *= (l + z).powi(m as i32);
                }
                if k % 2 == 0 {
                    acc *= dtv;
                } else {
                    acc /= dtv;
                }
            }
        }
        acc
    };

    let lhs_samples: Vec<(C64, C64)> = s_samples.iter().map(|&s| (s, lhs_at(s))).collect();
    let lhs_extrapolated = neville_at_zero(&lhs_samples);
    let max_rel_deviation = lhs_samples
        .iter()
        .map(|(_, v)| (v - rhs).norm() / rhs.norm().max(tolerances::ABS_FLOOR))
        .fold(0.0, f64::max);
    let rel_deviation_extrapolated =
        (lhs_extrapolated - rhs).norm() / rhs.norm().max(tolerances::ABS_FLOOR);

    Ok(FriedReport {
        h,
        order,
        constant,
        rhs,
        lhs_samples,
        lhs_extrapolated,
        max_rel_deviation,
        rel_deviation_extrapolated,
    })
}

/// Neville polynomial extrapolation of `(x_i, y_i)` samples to `x = 0`.
pub fn neville_at_zero(samples: &[(C64, C64)]) -> C64 {
    let n = samples.len();
    if n == 0 {
        return c64(f64::NAN, f64::NAN);
    }
    let xs: Vec<C64> = samples.iter().map(|(x, _)| *x).collect();
    let mut p: Vec<C64> = samples.iter().map(|(_, y)| *y).collect();
    for j in 1..n {
        for i in 0..(n - j) {
            // evaluated at x = 0
            p[i] = (xs[i] * p[i + 1] - xs[i + j] * p[i]) / (xs[i] - xs[i + j]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(
            rows,
            cols,
            &entries.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>(),
        )
    }

    /// d = 1 pair with the unit-phase star that makes the Laplacians
    /// positive: star_1 = [i], star_0 = [-i].
    fn two_term(starred_entry: f64) -> (CochainComplex, StarStructure) {
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[starred_entry])]).unwrap();
        let star = StarStructure::new(vec![
            CMatrix::from_row_slice(1, 1, &[c64(0.0, -1.0)]),
            CMatrix::from_row_slice(1, 1, &[c64(0.0, 1.0)]),
        ]);
        (cx, star)
    }

    #[test]
    fn base_change_examples() {
        let v = m(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((base_change_det(&v, &v).unwrap() - c64(1.0, 0.0)).norm() < 1e-14);
        let w = &v * c64(2.0, 0.0);
        assert!((base_change_det(&v, &w).unwrap() - c64(8.0, 0.0)).norm() < 1e-12);
        let mut sw = v.clone();
        sw.swap_columns(0, 1);
        assert!((base_change_det(&v, &sw).unwrap() + c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn base_change_rejects_singular() {
        let v = m(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let w = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            base_change_det(&v, &w),
            Err(TorsionError::Singular)
        ));
    }

    #[test]
    fn reidemeister_identity_complex() {
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[1.0])]).unwrap();
        let tau = reidemeister_torsion(&cx, None).unwrap();
        assert!((tau.coeff - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(tau.sign_ambiguous);
    }

    #[test]
    fn reidemeister_two_term_scaling() {
        // chain-style orientation: delta = [2] gives 2
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[2.0])]).unwrap();
        let tau = reidemeister_torsion(&cx, None).unwrap();
        assert!((tau.coeff - c64(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reidemeister_direct_sum_multiplies() {
        let a = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[2.0])]).unwrap();
        let b = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[3.0])]).unwrap();
        let sum = CochainComplex::new(
            vec![2, 2],
            vec![m(2, 2, &[2.0, 0.0, 0.0, 3.0])],
        )
        .unwrap();
        let ta = reidemeister_torsion(&a, None).unwrap().coeff;
        let tb = reidemeister_torsion(&b, None).unwrap().coeff;
        let ts = reidemeister_torsion(&sum, None).unwrap().coeff;
        assert!((ts - ta * tb).norm() < 1e-12);
    }

    #[test]
    fn reidemeister_four_term_acyclic() {
        // 0 -> C -> C^2 -> C -> 0 acyclic: delta_0 = [1, 0]^T,
        // delta_1 = [0, 3]
        let cx = CochainComplex::new(
            vec![1, 2, 1],
            vec![m(2, 1, &[1.0, 0.0]), m(1, 2, &[0.0, 3.0])],
        )
        .unwrap();
        let tau = reidemeister_torsion(&cx, None).unwrap();
        // factors: q0: det[1] = 1 (exp -1), q1: det[b_1 | e_2] = 1 (exp +1),
        // q2: det[3] = 3 (exp -1)
        assert!((tau.coeff - c64(1.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reidemeister_requires_bases_when_not_acyclic() {
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[0.0])]).unwrap();
        assert!(matches!(
            reidemeister_torsion(&cx, None),
            Err(TorsionError::NotAcyclicWithoutBases { .. })
        ));
    }

    #[test]
    fn reidemeister_with_cohomology_bases() {
        // zero differential: H^0 = C^0, H^1 = C^1; matching bases give 1
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[0.0])]).unwrap();
        let bases = vec![m(1, 1, &[1.0]), m(1, 1, &[1.0])];
        let tau = reidemeister_torsion(&cx, Some(&bases)).unwrap();
        assert!((tau.coeff - c64(1.0, 0.0)).norm() < 1e-12);
        // scaling the degree-1 basis by 5 scales tau by 5 (odd degree)
        let bases = vec![m(1, 1, &[1.0]), m(1, 1, &[5.0])];
        let tau = reidemeister_torsion(&cx, Some(&bases)).unwrap();
        assert!((tau.coeff - c64(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn codifferential_signs_on_two_term() {
        let (cx, star) = two_term(2.0);
        let codiff = flat_codifferential(&cx, &star).unwrap();
        // d*_1 = (-1)^{1*1+1+1} star_1 delta_0 star_1 = -(i)(2)(i) = 2
        assert!((codiff[1][(0, 0)] - c64(2.0, 0.0)).norm() < 1e-12);
        let lap = flat_laplacian(&cx, &star).unwrap();
        assert!((lap[0][(0, 0)] - c64(4.0, 0.0)).norm() < 1e-12);
        assert!((lap[1][(0, 0)] - c64(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn codifferential_of_zero_differential_is_zero() {
        let cx = CochainComplex::new(vec![1, 1], vec![m(1, 1, &[0.0])]).unwrap();
        let star = StarStructure::new(vec![m(1, 1, &[1.0]), m(1, 1, &[1.0])]);
        let codiff = flat_codifferential(&cx, &star).unwrap();
        assert_eq!(codiff[1].norm(), 0.0);
    }

    #[test]
    fn codifferential_squares_to_zero() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let harmonics = 1 + rng.gen_range(0..2);
            let (cx, star) = crate::fixtures::random_starred_complex(&mut rng, 6, harmonics);
            let codiff = flat_codifferential(&cx, &star).unwrap();
            for q in 2..=cx.top() {
                let comp = &codiff[q - 1] * &codiff[q];
                assert!(
                    comp.norm() <= 1e-10 * (scale_of(&codiff[q - 1]) * scale_of(&codiff[q])).max(1.0),
                    "d* . d* != 0 in degree {q}"
                );
            }
            // Laplacian commutes with delta
            let lap = flat_laplacian(&cx, &star).unwrap();
            for q in 0..cx.top() {
                let a = &lap[q + 1] * &cx.deltas[q];
                let b = &cx.deltas[q] * &lap[q];
                assert!((a - b).norm() <= 1e-9 * scale_of(&lap[q]).max(1.0) * scale_of(&cx.deltas[q]).max(1.0));
            }
        }
    }

    #[test]
    fn zero_modes_of_invertible_laplacian_vanish() {
        let (cx, star) = two_term(2.0);
        let zm = zero_modes(&cx, &star).unwrap();
        assert_eq!(zm.h, vec![0, 0]);
        assert!(duality_check(&zm));
    }

    #[test]
    fn generalized_kernel_sees_nilpotent_block() {
        let j = m(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let (h, basis, spec, _) = generalized_kernel(&j);
        assert_eq!(h, 2);
        assert_eq!(basis.ncols(), 2);
        assert!(spec.is_empty());
    }

    #[test]
    fn t0_is_one_when_no_zero_modes() {
        let (cx, star) = two_term(3.0);
        let zm = zero_modes(&cx, &star).unwrap();
        let t0 = t0_torsion(&zm).unwrap();
        assert!((t0.coeff - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(t0.reference_bases.is_empty());
    }

    #[test]
    fn cappell_miller_two_term() {
        // det'(Delta_1)^{(-1)^2 * 1} = 4, V_0 = 0
        let (cx, star) = two_term(2.0);
        let t = cappell_miller_torsion(&cx, &star, Cut::Angle(PI)).unwrap();
        assert!((t.coeff - c64(4.0, 0.0)).norm() < 1e-10);
        // matches the squared Reidemeister torsion (tau = 2)
        let tau = reidemeister_torsion(&cx, None).unwrap().coeff;
        assert!((t.coeff - tau * tau).norm() < 1e-10);
    }

    #[test]
    fn order_h_examples() {
        assert_eq!(order_h(3, &[1, 2]).unwrap(), 0);
        assert_eq!(order_h(3, &[0, 0]).unwrap(), 0);
        assert_eq!(order_h(5, &[1, 0, 0]).unwrap(), 6);
        assert!(matches!(
            order_h(3, &[1, 2, 3]),
            Err(TorsionError::BadLength { .. })
        ));
    }

    #[test]
    fn fried_constant_examples() {
        let c = fried_constant(3, &[1, 2, 2]).unwrap();
        assert_eq!(c, c64(-4.0, 0.0));
        let c = fried_constant(3, &[0, 0, 0]).unwrap();
        assert_eq!(c, c64(1.0, 0.0));
        let c = fried_constant(5, &[1, 0, 0, 0, 0]).unwrap();
        assert_eq!(c, c64(64.0, 0.0));
    }

    #[test]
    fn duality_consistency_helper() {
        assert!(h_duality_consistent(3, &[1, 2, 2]));
        assert!(!h_duality_consistent(3, &[1, 2, 1]));
    }

    #[test]
    fn fried_limit_on_park_spectra() {
        let spectra = crate::fixtures::park_spectra();
        let samples: Vec<C64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4]
            .iter()
            .map(|&x| c64(x, 0.0))
            .collect();
        let report = fried_limit_check(&spectra, 3, &samples).unwrap();
        assert_eq!(report.h, vec![1, 2, 2, 1]);
        assert_eq!(report.order, 0);
        assert_eq!(report.constant, c64(-4.0, 0.0));
        // hand value: RHS = -4 * 15 * 15^{-2} * 27 = -36/5
        assert!((report.rhs - c64(-7.2, 0.0)).norm() < 1e-10);
        assert!(
            report.rel_deviation_extrapolated <= 1e-8,
            "extrapolated deviation {}",
            report.rel_deviation_extrapolated
        );
    }

    #[test]
    fn fried_limit_zero_mode_free_is_exact_at_zero() {
        // strictly positive spectra, mirrored; h = 0, C = 1: LHS(0) = RHS
        let sp = SpectralData::new(vec![(c64(2.0, 0.0), 1), (c64(5.0, 0.5), 1)]);
        let spectra = vec![sp.clone(), sp.clone(), sp.clone(), sp.clone()];
        let report = fried_limit_check(&spectra, 3, &[c64(0.0, 0.0)]).unwrap();
        assert_eq!(report.order, 0);
        assert!(
            report.max_rel_deviation <= 1e-10,
            "deviation {}",
            report.max_rel_deviation
        );
    }

    #[test]
    fn fried_limit_guards_duality() {
        let a = SpectralData::new(vec![(c64(0.0, 0.0), 1), (c64(3.0, 0.0), 1)]);
        let b = SpectralData::new(vec![(c64(3.0, 0.0), 1)]);
        let spectra = vec![a, b.clone(), b.clone(), b];
        let r = fried_limit_check(&spectra, 3, &[c64(1e-3, 0.0)]);
        assert!(matches!(r, Err(TorsionError::DualityViolated { .. })));
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        // f(s) = 7 - 3s + 2s^2
        let f = |s: f64| c64(7.0 - 3.0 * s + 2.0 * s * s, 0.0);
        let samples: Vec<(C64, C64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&x| (c64(x, 0.0), f(x)))
            .collect();
        let v = neville_at_zero(&samples);
        assert!((v - c64(7.0, 0.0)).norm() < 1e-12);
    }
}
