//! Centralized numeric tolerances.
//!
//! Every threshold used across the crate is named here. The defaults assume
//! f64 arithmetic on desk-scale inputs (matrix dimensions well below 100,
//! products of at most a few hundred generator matrices).

/// Default relative tolerance for invariant checks: double precision with
/// headroom for matrix products over long words.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Unit-modulus check for holonomy eigenvalues and character values.
pub const UNIT_MODULUS_TOL: f64 = 1e-10;

/// Complex-length arithmetic across powers of a class (`ell`, `theta` mod 2pi).
pub const POWER_LINK_TOL: f64 = 1e-8;

/// Holonomy eigenvalues of a power vs. powers of the primitive's eigenvalues.
pub const HOLONOMY_POWER_TOL: f64 = 1e-9;

/// Margin above 1 in `|lambda|` below which a word counts as non-loxodromic.
pub const LOXODROMIC_MARGIN: f64 = 1e-8;

/// Conjugacy bucketing of enumerated words by `(trace, ell, theta)`.
pub const TRACE_BUCKET_TOL: f64 = 1e-8;

/// Switch from the ratio form of the symmetric-power trace to direct
/// summation when `|lambda - 1/lambda|` falls below this.
pub const SYM_TRACE_DEGENERATE: f64 = 1e-12;

/// `delta . delta = 0` check on cochain complexes (exact for integer input).
pub const COMPLEX_NILPOTENCY_TOL: f64 = 1e-12;

/// Star involution check `star . star = (-1)^{q(d-q)} id`.
pub const STAR_INVOLUTION_TOL: f64 = 1e-10;

/// Relative gap threshold on singular values when deciding ranks of
/// powered Laplacians (generalized kernels are rank-sensitive).
pub const RANK_GAP_TOL: f64 = 1e-8;

/// Rank decisions with margin below `ILL_CONDITION_FACTOR * machine epsilon`
/// are flagged, not rejected.
pub const ILL_CONDITION_FACTOR: f64 = 1e6;

/// Treat an eigenvalue as a zero mode when `|lambda| <= ZERO_MODE_TOL * scale`.
pub const ZERO_MODE_TOL: f64 = 1e-6;

/// Multiset comparison of nonzero spectra across dual degrees.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;

/// Absolute floor used when a relative tolerance meets a zero reference.
pub const ABS_FLOOR: f64 = 1e-14;
