//! Length-spectrum production for d = 3: breadth-first word enumeration in a
//! marked subgroup of `SL(2, C)`, conjugacy bucketing by trace and complex
//! length, and power linkage.
//!
//! Enumeration is deterministic: identical inputs produce identical class
//! ids and ordering. Completeness relative to the cutoff is not guaranteed
//! unless the word length budget is large enough; the resulting spectrum
//! records the word length that was used, and [`crate::model::validate_spectrum`]
//! reports missing powers.

use std::f64::consts::TAU;

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{c64, C64};
use crate::model::{
    normalize_angle, ComplexLength, GeodesicClass, GroupPresentation, LengthSpectrum, Sl2,
};
use crate::tolerances;

#[derive(Debug, Error, PartialEq)]
pub enum GeodesicError {
    /// The matrix is elliptic, parabolic or the identity; the word must be
    /// discarded, not treated as a geodesic.
    #[error("matrix is not loxodromic: |lambda| = {modulus}")]
    NotLoxodromic { modulus: f64 },
    /// The reduced-word queue outgrew the configured node limit; lower the
    /// word length or raise the budget.
    #[error("enumeration exceeded the node budget of {budget} words")]
    BudgetExceeded { budget: usize },
    #[error("R = {r} exceeds the spectrum cutoff {cutoff}")]
    CutoffExceeded { r: f64, cutoff: f64 },
    #[error("expected {expected} holonomy eigenvalues, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A freely and cyclically reduced word with its product matrix and the
/// conjugacy-invariant trace used for bucketing.
#[derive(Debug, Clone)]
pub struct WordClass {
    /// Generator indices; negative index `-i` means the inverse of
    /// generator `i - 1`.
    pub word: Vec<i32>,
    pub canonical_trace: C64,
    pub matrix: Sl2,
}

/// Options for [`enumerate_classes`].
#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub max_word_len: u32,
    pub cutoff: f64,
    /// Merge `[gamma]` and `[gamma^{-1}]` into one class. Off by default:
    /// the Euler products run over all conjugacy classes.
    pub merge_inverses: bool,
    /// Hard limit on the number of reduced words examined.
    pub node_budget: usize,
}

impl EnumerateOptions {
    pub fn new(max_word_len: u32, cutoff: f64) -> Self {
        Self {
            max_word_len,
            cutoff,
            merge_inverses: false,
            node_budget: 5_000_000,
        }
    }

    pub fn merge_inverses(mut self, yes: bool) -> Self {
        self.merge_inverses = yes;
        self
    }
}

/// Extract the complex length of a loxodromic element: `ell = 2 log|lambda|`
/// and `theta = 2 arg(lambda) mod 2pi`, where `lambda` is the eigenvalue
/// with `|lambda| > 1`.
pub fn complex_length_of(g: &Sl2) -> Result<ComplexLength, GeodesicError> {
    let lambda = large_eigenvalue(g);
    if lambda.norm() <= 1.0 + tolerances::LOXODROMIC_MARGIN {
        return Err(GeodesicError::NotLoxodromic {
            modulus: lambda.norm(),
        });
    }
    Ok(ComplexLength::new(
        2.0 * lambda.norm().ln(),
        normalize_angle(2.0 * lambda.arg()),
    ))
}

/// Eigenvalue of larger modulus, from the characteristic polynomial
/// `lambda^2 - tr * lambda + det = 0`.
fn large_eigenvalue(g: &Sl2) -> C64 {
    let tr = g.trace();
    let dt = g.determinant();
    let disc = (tr * tr - c64(4.0, 0.0) * dt).sqrt();
    let r1 = (tr + disc) / c64(2.0, 0.0);
    let r2 = (tr - disc) / c64(2.0, 0.0);
    if r1.norm() >= r2.norm() {
        r1
    } else {
        r2
    }
}

fn sl2_inverse(g: &Sl2) -> Sl2 {
    // adjugate over determinant; generators are only approximately unimodular
    let dt = g.determinant();
    Sl2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]).map(|z| z / dt)
}

fn is_cyclically_reduced(word: &[i32]) -> bool {
    match (word.first(), word.last()) {
        (Some(a), Some(b)) => *a != -*b,
        _ => true,
    }
}

/// Enumerate conjugacy classes by breadth-first search over freely reduced
/// words up to `max_word_len`, drop classes longer than the cutoff, and link
/// powers via [`primitive_decompose`].
pub fn enumerate_classes(
    pres: &GroupPresentation,
    opts: &EnumerateOptions,
) -> Result<LengthSpectrum, GeodesicError> {
    let m = pres.generators.len();
    if m == 0 {
        return Ok(LengthSpectrum::new(3, opts.cutoff, Vec::new()));
    }
    let mut inverses: Vec<Sl2> = Vec::with_capacity(m);
    for g in &pres.generators {
        inverses.push(sl2_inverse(g));
    }
    let letter = |i: i32| -> &Sl2 {
        if i > 0 {
            &pres.generators[(i - 1) as usize]
        } else {
            &inverses[(-i - 1) as usize]
        }
    };

    // Breadth-first generation of freely reduced words.
    let mut frontier: Vec<(Vec<i32>, Sl2)> = vec![(Vec::new(), Sl2::identity())];
    let mut words: Vec<(Vec<i32>, Sl2)> = Vec::new();
    let mut examined = 0usize;
    for _ in 0..opts.max_word_len {
        let mut next = Vec::new();
        for (word, mat) in &frontier {
            for i in (1..=m as i32).flat_map(|k| [k, -k]) {
                if word.last() == Some(&-i) {
                    continue;
                }
                examined += 1;
                if examined > opts.node_budget {
                    return Err(GeodesicError::BudgetExceeded {
                        budget: opts.node_budget,
                    });
                }
                let mut w = word.clone();
                w.push(i);
                let mw = mat * letter(i);
                next.push((w, mw));
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }

    // Keep cyclically reduced loxodromic words; each conjugacy class with a
    // representative of length <= max_word_len appears among them.
    let candidates: Vec<(WordClass, ComplexLength)> = words
        .par_iter()
        .filter(|(w, _)| is_cyclically_reduced(w))
        .filter_map(|(w, mat)| {
            complex_length_of(mat).ok().map(|clen| {
                (
                    WordClass {
                        word: w.clone(),
                        canonical_trace: mat.trace(),
                        matrix: *mat,
                    },
                    clen,
                )
            })
        })
        .filter(|(_, clen)| clen.ell() <= opts.cutoff)
        .collect();

    // Conjugacy bucketing by (trace, ell, theta) with tolerance; inverse
    // classes fold together only when merging is requested.
    let mut keyed: Vec<(f64, f64, f64, f64, WordClass)> = candidates
        .into_iter()
        .map(|(wc, clen)| {
            let theta = if opts.merge_inverses {
                clen.theta().min(TAU - clen.theta())
            } else {
                clen.theta()
            };
            let tr = if opts.merge_inverses {
                // trace is inverse-invariant in SL(2); nothing to adjust
                wc.canonical_trace
            } else {
                wc.canonical_trace
            };
            (clen.ell(), theta, tr.re, tr.im, wc)
        })
        .collect();
    keyed.sort_by(|a, b| {
        (a.0, a.1, a.2, a.3, a.4.word.len(), a.4.word.clone())
            .partial_cmp(&(b.0, b.1, b.2, b.3, b.4.word.len(), b.4.word.clone()))
            .expect("finite keys")
    });

    let mut reps: Vec<(f64, f64, C64, WordClass)> = Vec::new();
    'outer: for (ell, theta, tre, tim, wc) in keyed {
        for (e0, t0, tr0, _) in &reps {
            let angle_gap = {
                let d = normalize_angle(theta - t0);
                d.min(TAU - d)
            };
            if (ell - e0).abs() <= tolerances::TRACE_BUCKET_TOL
                && angle_gap <= tolerances::TRACE_BUCKET_TOL
                && (c64(tre, tim) - tr0).norm() <= tolerances::TRACE_BUCKET_TOL
            {
                continue 'outer;
            }
        }
        reps.push((ell, theta, c64(tre, tim), wc));
    }

    let classes: Vec<GeodesicClass> = reps
        .into_iter()
        .enumerate()
        .map(|(i, (_, _, _, wc))| {
            let clen = complex_length_of(&wc.matrix).expect("kept words are loxodromic");
            let id = format!("c{i:04}");
            let holonomy = vec![
                c64(clen.theta().cos(), clen.theta().sin()),
                c64(clen.theta().cos(), -clen.theta().sin()),
            ];
            GeodesicClass::new(&id, clen, 1, &id, holonomy).with_word(wc.word)
        })
        .collect();

    let mut spectrum = LengthSpectrum::new(3, opts.cutoff, classes);
    spectrum.max_word_len = Some(opts.max_word_len);
    let (spectrum, _reports) = primitive_decompose(spectrum);
    Ok(spectrum)
}

/// A decomposition that matched more than one primitive within tolerance;
/// the smaller primitive length was kept.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityReport {
    pub class_id: String,
    pub kept_primitive: String,
    pub kept_power: u32,
    pub also_matched: Vec<(String, u32)>,
}

/// Assign to each class the primitive and power such that
/// `ell = k * ell0` and `theta = k * theta0 (mod 2pi)` within tolerance.
/// Classes with no proper divisor become their own primitive with power 1.
pub fn primitive_decompose(spectrum: LengthSpectrum) -> (LengthSpectrum, Vec<AmbiguityReport>) {
    let mut classes = spectrum.classes.clone();
    let mut reports = Vec::new();
    // ascending ell: candidates for a class's primitive are already decided
    for i in 0..classes.len() {
        let ell = classes[i].clen.ell();
        let theta = classes[i].clen.theta();
        let mut matches: Vec<(usize, u32)> = Vec::new();
        for (j, cand) in classes.iter().enumerate().take(i) {
            if !cand.is_primitive() {
                continue;
            }
            let ell0 = cand.clen.ell();
            if ell0 <= 0.0 {
                continue;
            }
            let k = (ell / ell0).round();
            if k < 2.0 {
                continue;
            }
            let k_u = k as u32;
            let length_ok = (ell - k * ell0).abs() <= tolerances::POWER_LINK_TOL;
            let target = normalize_angle(k * cand.clen.theta());
            let gap = {
                let d = normalize_angle(theta - target);
                d.min(TAU - d)
            };
            if length_ok && gap <= tolerances::POWER_LINK_TOL {
                matches.push((j, k_u));
            }
        }
        // prefer the smallest primitive length, i.e. the largest power
        matches.sort_by(|a, b| b.1.cmp(&a.1));
        if let Some(&(j, k)) = matches.first() {
            classes[i].power = k;
            classes[i].primitive_id = classes[j].id.clone();
            if matches.len() > 1 {
                reports.push(AmbiguityReport {
                    class_id: classes[i].id.clone(),
                    kept_primitive: classes[j].id.clone(),
                    kept_power: k,
                    also_matched: matches[1..]
                        .iter()
                        .map(|&(j2, k2)| (classes[j2].id.clone(), k2))
                        .collect(),
                });
            }
        } else {
            classes[i].power = 1;
            classes[i].primitive_id = classes[i].id.clone();
        }
    }
    let mut out = LengthSpectrum::new(spectrum.dim, spectrum.cutoff, classes);
    out.growth = spectrum.growth;
    out.max_word_len = spectrum.max_word_len;
    (out, reports)
}

/// Number of classes (all, not only primitive) with `ell <= R`.
pub fn counting_function(spectrum: &LengthSpectrum, r: f64) -> Result<usize, GeodesicError> {
    if r > spectrum.cutoff {
        return Err(GeodesicError::CutoffExceeded {
            r,
            cutoff: spectrum.cutoff,
        });
    }
    Ok(spectrum
        .classes
        .iter()
        .filter(|c| c.clen.ell() <= r + tolerances::ABS_FLOOR)
        .count())
}

/// Eigenvalues of the holonomy-scaled adjoint action on the negative root
/// space: `{exp(-ell) * u_i}` over the stored holonomy eigenvalues. For
/// d = 3 this is `{exp(-ell + i theta), exp(-ell - i theta)}`.
pub fn ad_restricted_eigenvalues(
    class: &GeodesicClass,
    d: u32,
) -> Result<Vec<C64>, GeodesicError> {
    let expected = (d - 1) as usize;
    if class.holonomy.len() != expected {
        return Err(GeodesicError::DimensionMismatch {
            expected,
            found: class.holonomy.len(),
        });
    }
    let scale = (-class.clen.ell()).exp();
    Ok(class.holonomy.iter().map(|u| u * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn diag(a: C64) -> Sl2 {
        Sl2::new(a, c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0) / a)
    }

    #[test]
    fn diagonal_real_eigenvalue() {
        let clen = complex_length_of(&diag(c64(E, 0.0))).unwrap();
        assert!((clen.ell() - 2.0).abs() < 1e-12);
        assert!(clen.theta().abs() < 1e-12);
    }

    #[test]
    fn diagonal_imaginary_eigenvalue() {
        let clen = complex_length_of(&diag(c64(0.0, 2.0))).unwrap();
        assert!((clen.ell() - 2.0 * 2.0_f64.ln()).abs() < 1e-12);
        assert!((clen.theta() - PI).abs() < 1e-12);
    }

    #[test]
    fn trace_three_integer_matrix() {
        let g = Sl2::new(
            c64(2.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
        );
        let clen = complex_length_of(&g).unwrap();
        let expected = 2.0 * ((3.0 + 5.0_f64.sqrt()) / 2.0).ln();
        assert!((clen.ell() - expected).abs() < 1e-12);
        assert!(clen.theta().abs() < 1e-12);
    }

    #[test]
    fn elliptic_is_rejected() {
        let g = Sl2::new(
            c64(0.0, 0.0),
            c64(1.0, 0.0),
            c64(-1.0, 0.0),
            c64(0.0, 0.0),
        );
        assert!(matches!(
            complex_length_of(&g),
            Err(GeodesicError::NotLoxodromic { .. })
        ));
    }

    #[test]
    fn cyclic_group_enumerates_powers() {
        let pres = GroupPresentation::new(vec![diag(c64(E, 0.0))]);
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(3, 10.0)).unwrap();
        let ells: Vec<f64> = spectrum.classes.iter().map(|c| c.clen.ell()).collect();
        assert_eq!(ells.len(), 3);
        for (i, target) in [2.0, 4.0, 6.0].iter().enumerate() {
            assert!((ells[i] - target).abs() < 1e-10);
        }
        assert_eq!(spectrum.classes[0].power, 1);
        assert_eq!(spectrum.classes[1].power, 2);
        assert_eq!(spectrum.classes[2].power, 3);
        let prim = spectrum.classes[0].id.clone();
        assert!(spectrum.classes.iter().all(|c| c.primitive_id == prim));
    }

    #[test]
    fn empty_presentation_gives_empty_spectrum() {
        let pres = GroupPresentation::new(Vec::new());
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(4, 10.0)).unwrap();
        assert!(spectrum.classes.is_empty());
    }

    #[test]
    fn cutoff_filters_long_classes() {
        let pres = GroupPresentation::new(vec![diag(c64(E, 0.0))]);
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(3, 3.0)).unwrap();
        assert_eq!(spectrum.classes.len(), 1);
        assert!((spectrum.classes[0].clen.ell() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn budget_overflow_is_an_error() {
        let pres = GroupPresentation::new(vec![diag(c64(E, 0.0)), diag(c64(2.0, 1.0))]);
        let mut opts = EnumerateOptions::new(8, 100.0);
        opts.node_budget = 10;
        assert!(matches!(
            enumerate_classes(&pres, &opts),
            Err(GeodesicError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn angle_power_decomposition_wraps_mod_tau() {
        // primitive with theta = pi; square has theta = 0
        let base = GeodesicClass::new(
            "a",
            ComplexLength::new(2.0, PI),
            1,
            "a",
            vec![c64(-1.0, 0.0), c64(-1.0, 0.0)],
        );
        let sq = GeodesicClass::new(
            "b",
            ComplexLength::new(4.0, 0.0),
            1,
            "b",
            vec![c64(1.0, 0.0), c64(1.0, 0.0)],
        );
        let spectrum = LengthSpectrum::new(3, 5.0, vec![base, sq]);
        let (out, reports) = primitive_decompose(spectrum);
        assert!(reports.is_empty());
        assert_eq!(out.classes[1].power, 2);
        assert_eq!(out.classes[1].primitive_id, out.classes[0].id);
    }

    #[test]
    fn single_class_is_self_primitive() {
        let g = GeodesicClass::new(
            "a",
            ComplexLength::new(2.0, 0.3),
            1,
            "a",
            vec![c64(0.3_f64.cos(), 0.3_f64.sin()), c64(0.3_f64.cos(), -0.3_f64.sin())],
        );
        let (out, _) = primitive_decompose(LengthSpectrum::new(3, 3.0, vec![g]));
        assert_eq!(out.classes[0].power, 1);
        assert_eq!(out.classes[0].primitive_id, "a");
    }

    #[test]
    fn counting_function_counts_all_classes() {
        let pres = GroupPresentation::new(vec![diag(c64(E, 0.0))]);
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(4, 10.0)).unwrap();
        assert_eq!(counting_function(&spectrum, 5.0).unwrap(), 2);
        assert_eq!(counting_function(&spectrum, 0.0).unwrap(), 0);
        assert_eq!(
            counting_function(&spectrum, 10.0).unwrap(),
            spectrum.classes.len()
        );
        assert!(counting_function(&spectrum, 11.0).is_err());
    }

    #[test]
    fn counting_function_is_monotone() {
        let pres = GroupPresentation::new(vec![diag(c64(E, 0.0)), diag(c64(0.0, E))]);
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(4, 9.0)).unwrap();
        let mut prev = 0;
        for step in 0..30 {
            let r = 0.3 * step as f64;
            let n = counting_function(&spectrum, r).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn ad_eigenvalues_scale_and_rotate() {
        let class = GeodesicClass::new(
            "a",
            ComplexLength::new(2.0_f64.ln(), PI / 2.0),
            1,
            "a",
            vec![c64(0.0, 1.0), c64(0.0, -1.0)],
        );
        let eig = ad_restricted_eigenvalues(&class, 3).unwrap();
        assert!((eig[0] - c64(0.0, 0.5)).norm() < 1e-12);
        assert!((eig[1] - c64(0.0, -0.5)).norm() < 1e-12);

        let bad = ad_restricted_eigenvalues(&class, 5);
        assert!(matches!(
            bad,
            Err(GeodesicError::DimensionMismatch {
                expected: 4,
                found: 2
            })
        ));
    }

    #[test]
    fn enumerated_lengths_match_their_words() {
        let g = Sl2::new(
            c64(2.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
        );
        let h = diag(c64(0.0, 2.0));
        let pres = GroupPresentation::new(vec![g, h]);
        let spectrum = enumerate_classes(&pres, &EnumerateOptions::new(4, 8.0)).unwrap();
        assert!(!spectrum.classes.is_empty());
        for class in &spectrum.classes {
            let word = class.word.as_ref().expect("enumerated classes carry words");
            let mut mat = Sl2::identity();
            for &i in word {
                let base = if i > 0 {
                    pres.generators[(i - 1) as usize]
                } else {
                    sl2_inverse(&pres.generators[(-i - 1) as usize])
                };
                mat *= base;
            }
            let clen = complex_length_of(&mat).unwrap();
            assert!((clen.ell() - class.clen.ell()).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let g = Sl2::new(
            c64(2.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
        );
        let h = diag(c64(0.0, 2.0));
        let pres = GroupPresentation::new(vec![g, h]);
        let a = enumerate_classes(&pres, &EnumerateOptions::new(4, 8.0)).unwrap();
        let b = enumerate_classes(&pres, &EnumerateOptions::new(4, 8.0)).unwrap();
        assert_eq!(a, b);
    }
}
