//! Shared domain types: complex lengths, geodesic conjugacy classes, length
//! spectra, matrix-group presentations, and representation data.
//!
//! All types are immutable values after construction and safe to share
//! across threads. Construction is permissive; [`validate_spectrum`] reports
//! every invariant violation instead of aborting, so that files produced by
//! other tools can be loaded and diagnosed.

use std::collections::HashSet;
use std::f64::consts::TAU;

use nalgebra::Matrix2;

use crate::linalg::{c64, C64, CMatrix};
use crate::tolerances;

/// 2x2 complex matrix of an `SL(2, C)` group element (d = 3 front end).
pub type Sl2 = Matrix2<C64>;

/// A complex length: geodesic length together with the holonomy angle.
///
/// `theta` is normalized into `[0, 2*pi)` at construction so that equality,
/// deduplication and power checks have a canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLength {
    ell: f64,
    theta: f64,
}

impl ComplexLength {
    pub fn new(ell: f64, theta: f64) -> Self {
        Self {
            ell,
            theta: normalize_angle(theta),
        }
    }

    /// Geodesic length, in units of hyperbolic length.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Holonomy angle in `[0, 2*pi)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Reduce an angle into `[0, 2*pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // `-1e-300 % tau` can round up to tau itself.
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// One conjugacy class of the group: a closed geodesic with its length,
/// holonomy data and power structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicClass {
    /// Opaque identifier, unique within a spectrum.
    pub id: String,
    /// Complex length of the class.
    pub clen: ComplexLength,
    /// `n(gamma)`: the class is the `power`-th power of its primitive.
    pub power: u32,
    /// Identifier of the underlying primitive class.
    pub primitive_id: String,
    /// Eigenvalues of the holonomy acting on the negative root space,
    /// before the `exp(-ell)` scaling; `d - 1` unit-modulus values.
    pub holonomy: Vec<C64>,
    /// Generator word when the class came out of enumeration; `None` for
    /// spectra built by hand or loaded from plain files.
    pub word: Option<Vec<i32>>,
}

impl GeodesicClass {
    pub fn new(
        id: impl Into<String>,
        clen: ComplexLength,
        power: u32,
        primitive_id: impl Into<String>,
        holonomy: Vec<C64>,
    ) -> Self {
        Self {
            id: id.into(),
            clen,
            power,
            primitive_id: primitive_id.into(),
            holonomy,
            word: None,
        }
    }

    pub fn with_word(mut self, word: Vec<i32>) -> Self {
        self.word = Some(word);
        self
    }

    pub fn is_primitive(&self) -> bool {
        self.power == 1
    }
}

/// A finite window of the length spectrum: every class with `ell <= cutoff`,
/// sorted by `ell` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    pub classes: Vec<GeodesicClass>,
    pub cutoff: f64,
    /// Odd dimension `d = 2n + 1` of the underlying space.
    pub dim: u32,
    /// Optional counting metadata `(C, g)` asserting
    /// `#{ell <= R} <= C * exp(g * R)`. Stored explicitly; never guessed.
    pub growth: Option<(f64, f64)>,
    /// Word length used by enumeration, when the spectrum came from one.
    pub max_word_len: Option<u32>,
}

impl LengthSpectrum {
    pub fn new(dim: u32, cutoff: f64, mut classes: Vec<GeodesicClass>) -> Self {
        classes.sort_by(|a, b| {
            (a.clen.ell(), a.clen.theta(), a.id.clone())
                .partial_cmp(&(b.clen.ell(), b.clen.theta(), b.id.clone()))
                .expect("finite lengths")
        });
        Self {
            classes,
            cutoff,
            dim,
            growth: None,
            max_word_len: None,
        }
    }

    pub fn with_growth(mut self, c: f64, exponent: f64) -> Self {
        self.growth = Some((c, exponent));
        self
    }

    pub fn n(&self) -> u32 {
        (self.dim - 1) / 2
    }

    pub fn primitives(&self) -> impl Iterator<Item = &GeodesicClass> {
        self.classes.iter().filter(|c| c.is_primitive())
    }

    /// Shortest primitive length, if any classes are present.
    pub fn ell_min(&self) -> Option<f64> {
        self.primitives()
            .map(|c| c.clen.ell())
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.min(x))))
    }

    pub fn class_by_id(&self, id: &str) -> Option<&GeodesicClass> {
        self.classes.iter().find(|c| c.id == id)
    }
}

/// A marked generating set of a discrete subgroup of `SL(2, C)`.
/// Only d = 3 gets a matrix-group front end; other odd dimensions are
/// served through explicit spectrum files.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    pub generators: Vec<Sl2>,
    pub relators: Option<Vec<Vec<i32>>>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<Sl2>) -> Self {
        Self {
            generators,
            relators: None,
        }
    }

    pub fn dim(&self) -> u32 {
        3
    }

    /// `|det(g) - 1|` for the worst generator.
    pub fn max_det_defect(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| (g.determinant() - c64(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// A finite dimensional complex representation given on the generators of a
/// [`GroupPresentation`], aligned by index.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSpec {
    pub dim_rep: usize,
    pub generator_images: Vec<CMatrix>,
    pub unitary: bool,
    /// Optional certified trace growth `(C, c)`:
    /// `|tr chi(gamma)| <= C * exp(c * ell(gamma))`.
    pub growth_constants: Option<(f64, f64)>,
}

impl RepresentationSpec {
    pub fn new(dim_rep: usize, generator_images: Vec<CMatrix>, unitary: bool) -> Self {
        Self {
            dim_rep,
            generator_images,
            unitary,
            growth_constants: None,
        }
    }

    pub fn trivial() -> Self {
        Self::new(1, Vec::new(), true)
    }

    pub fn with_growth(mut self, c_big: f64, c_small: f64) -> Self {
        self.growth_constants = Some((c_big, c_small));
        self
    }
}

/// Which spectrum invariant a class violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositiveLength,
    NonUnitHolonomy,
    WrongHolonomyCount,
    DuplicateId,
    NotSorted,
    MissingPrimitive,
    PowerLengthMismatch,
    PowerAngleMismatch,
    HolonomyPowerMismatch,
    MissingPower,
    OverCutoff,
}

/// One invariant violation, naming the offending class.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub class_id: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(class_id: &str, kind: ViolationKind, detail: String) -> Self {
        Self {
            class_id: class_id.to_string(),
            kind,
            detail,
        }
    }
}

/// Check every spectrum invariant and report each violation. Never aborts;
/// an empty report means the spectrum is valid. The report set does not
/// depend on the input order of equal-length classes.
pub fn validate_spectrum(spectrum: &LengthSpectrum) -> Vec<Violation> {
    validate_spectrum_with_tol(spectrum, tolerances::DEFAULT_TOL)
}

/// As [`validate_spectrum`] with an explicit base tolerance.
pub fn validate_spectrum_with_tol(spectrum: &LengthSpectrum, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let unit_tol = tol.max(tolerances::UNIT_MODULUS_TOL);
    let d = spectrum.dim as usize;

    let mut seen: HashSet<&str> = HashSet::new();
    let mut prev_ell = f64::NEG_INFINITY;
    for class in &spectrum.classes {
        if !seen.insert(class.id.as_str()) {
            out.push(Violation::new(
                &class.id,
                ViolationKind::DuplicateId,
                "class id appears more than once".into(),
            ));
        }
        if class.clen.ell() <= 0.0 {
            out.push(Violation::new(
                &class.id,
                ViolationKind::NonPositiveLength,
                format!("ell = {} must be positive", class.clen.ell()),
            ));
        }
        if class.clen.ell() < prev_ell - tolerances::ABS_FLOOR {
            out.push(Violation::new(
                &class.id,
                ViolationKind::NotSorted,
                "classes are not sorted by ell".into(),
            ));
        }
        prev_ell = class.clen.ell();
        if class.clen.ell() > spectrum.cutoff + tolerances::ABS_FLOOR {
            out.push(Violation::new(
                &class.id,
                ViolationKind::OverCutoff,
                format!(
                    "ell = {} exceeds cutoff {}",
                    class.clen.ell(),
                    spectrum.cutoff
                ),
            ));
        }
        if class.holonomy.len() != d - 1 {
            out.push(Violation::new(
                &class.id,
                ViolationKind::WrongHolonomyCount,
                format!(
                    "expected {} holonomy eigenvalues, found {}",
                    d - 1,
                    class.holonomy.len()
                ),
            ));
        }
        for (i, u) in class.holonomy.iter().enumerate() {
            if (u.norm() - 1.0).abs() > unit_tol {
                out.push(Violation::new(
                    &class.id,
                    ViolationKind::NonUnitHolonomy,
                    format!("holonomy eigenvalue {i} has modulus {}", u.norm()),
                ));
            }
        }
    }

    // Power linkage and power-completeness relative to the cutoff.
    for class in &spectrum.classes {
        let Some(prim) = spectrum.class_by_id(&class.primitive_id) else {
            out.push(Violation::new(
                &class.id,
                ViolationKind::MissingPrimitive,
                format!("primitive id {:?} not present", class.primitive_id),
            ));
            continue;
        };
        let k = class.power as f64;
        if (class.clen.ell() - k * prim.clen.ell()).abs() > tolerances::POWER_LINK_TOL {
            out.push(Violation::new(
                &class.id,
                ViolationKind::PowerLengthMismatch,
                format!(
                    "ell = {} but power {} of primitive with ell = {}",
                    class.clen.ell(),
                    class.power,
                    prim.clen.ell()
                ),
            ));
        }
        let expected_theta = normalize_angle(k * prim.clen.theta());
        if angle_distance(class.clen.theta(), expected_theta) > tolerances::POWER_LINK_TOL {
            out.push(Violation::new(
                &class.id,
                ViolationKind::PowerAngleMismatch,
                format!(
                    "theta = {} but power {} of primitive with theta = {}",
                    class.clen.theta(),
                    class.power,
                    prim.clen.theta()
                ),
            ));
        }
        if class.holonomy.len() == prim.holonomy.len()
            && !holonomy_powers_match(&class.holonomy, &prim.holonomy, class.power)
        {
            out.push(Violation::new(
                &class.id,
                ViolationKind::HolonomyPowerMismatch,
                format!(
                    "holonomy eigenvalues are not the {}-th powers of the primitive's",
                    class.power
                ),
            ));
        }
    }

    // Every power of a stored primitive with k * ell <= cutoff must be present.
    for prim in spectrum.primitives() {
        let ell0 = prim.clen.ell();
        if ell0 <= 0.0 {
            continue;
        }
        let mut k = 2u32;
        while (k as f64) * ell0 <= spectrum.cutoff + tolerances::ABS_FLOOR {
            let found = spectrum.classes.iter().any(|c| {
                c.primitive_id == prim.id
                    && c.power == k
                    && (c.clen.ell() - k as f64 * ell0).abs() <= tolerances::POWER_LINK_TOL
            });
            if !found {
                out.push(Violation::new(
                    &prim.id,
                    ViolationKind::MissingPower,
                    format!(
                        "power {k} (ell = {}) missing below cutoff {}",
                        k as f64 * ell0,
                        spectrum.cutoff
                    ),
                ));
            }
            k += 1;
        }
    }

    // Deterministic report order, independent of incidental iteration order.
    out.sort_by(|a, b| {
        (&a.class_id, format!("{:?}", a.kind), &a.detail)
            .cmp(&(&b.class_id, format!("{:?}", b.kind), &b.detail))
    });
    out
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

fn holonomy_powers_match(class: &[C64], prim: &[C64], power: u32) -> bool {
    let powered: Vec<C64> = prim.iter().map(|u| u.powi(power as i32)).collect();
    crate::linalg::multisets_match(class, &powered, tolerances::HOLONOMY_POWER_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d3_class(id: &str, ell: f64, theta: f64, power: u32, prim: &str) -> GeodesicClass {
        let hol = vec![
            c64(theta.cos(), theta.sin()),
            c64(theta.cos(), -theta.sin()),
        ];
        GeodesicClass::new(id, ComplexLength::new(ell, theta), power, prim, hol)
    }

    #[test]
    fn theta_is_normalized() {
        let cl = ComplexLength::new(1.0, -std::f64::consts::PI);
        assert!((cl.theta() - std::f64::consts::PI).abs() < 1e-15);
        let cl2 = ComplexLength::new(1.0, 3.0 * TAU + 0.5);
        assert!((cl2.theta() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn consistent_powers_validate_clean() {
        let spectrum = LengthSpectrum::new(
            3,
            5.0,
            vec![
                d3_class("g", 2.0, 0.0, 1, "g"),
                d3_class("g2", 4.0, 0.0, 2, "g"),
            ],
        );
        assert!(validate_spectrum(&spectrum).is_empty());
    }

    #[test]
    fn missing_power_is_reported() {
        let spectrum = LengthSpectrum::new(3, 5.0, vec![d3_class("g", 2.0, 0.0, 1, "g")]);
        let report = validate_spectrum(&spectrum);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::MissingPower);
        assert_eq!(report[0].class_id, "g");
    }

    #[test]
    fn non_unit_holonomy_is_reported() {
        let mut class = d3_class("g", 2.0, 0.0, 1, "g");
        class.holonomy[0] = c64(1.1, 0.0);
        let spectrum = LengthSpectrum::new(3, 2.5, vec![class]);
        let report = validate_spectrum(&spectrum);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kind, ViolationKind::NonUnitHolonomy);
    }

    #[test]
    fn validation_is_order_insensitive_and_idempotent() {
        let a = d3_class("a", 2.0, 1.0, 1, "a");
        let b = d3_class("b", 2.0, 2.0, 1, "b");
        let s1 = LengthSpectrum::new(3, 3.0, vec![a.clone(), b.clone()]);
        let s2 = LengthSpectrum::new(3, 3.0, vec![b, a]);
        let r1 = validate_spectrum(&s1);
        let r2 = validate_spectrum(&s2);
        assert_eq!(r1, r2);
        assert_eq!(r1, validate_spectrum(&s1));
    }
}
