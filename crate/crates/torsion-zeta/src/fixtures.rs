//! Deterministic fixture builders used by the verification suites and the
//! integration tests: the Park-style zero-mode fixture, random starred
//! complexes assembled from elementary blocks, planted generalized kernels,
//! and small group presentations.
//!
//! Starred complexes are direct sums of three block types, conjugated by
//! random changes of basis:
//!
//! - a mirrored pair of two-term pieces in degrees (0,1) and (2,3) with
//!   coupling values `s01`, `s23`;
//! - a self-dual two-term piece in degrees (1,2);
//! - a harmonic pair: one star-paired basis vector in degrees `q` and
//!   `d - q` killed by both differentials.
//!
//! With unitary changes of basis and equal real couplings on mirrored
//! pairs, the flat Laplacians are exactly the Hodge Laplacians of an inner
//! product structure: self-adjoint with positive spectrum off the harmonic
//! part. With invertible non-unitary conjugations and complex couplings the
//! Laplacians are genuinely non-self-adjoint while duality still holds.

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, C64, CMatrix};
use crate::model::{GroupPresentation, Sl2};
use crate::regdet::SpectralData;
use crate::torsion::{CochainComplex, StarStructure, ZeroModeData};

/// Per-degree spectra of the d = 3 verification fixture with
/// `h = (1, 2, 2, 1)`: `{0, 3}` in degrees 0 and 3, `{0, 0, 3, 5}` in
/// degrees 1 and 2.
pub fn park_spectra() -> Vec<SpectralData> {
    let edge = SpectralData::new(vec![(c64(0.0, 0.0), 1), (c64(3.0, 0.0), 1)]);
    let mid = SpectralData::new(vec![
        (c64(0.0, 0.0), 2),
        (c64(3.0, 0.0), 1),
        (c64(5.0, 0.0), 1),
    ]);
    vec![edge.clone(), mid.clone(), mid, edge]
}

/// The zero-mode double complex of the d = 3 fixture: dimensions
/// `(1, 2, 2, 1)`, the restriction of `d` acyclic, the restriction of `d*`
/// acyclic, and `(d + d*)^2` nilpotent degreewise. Its double-complex
/// torsion has absolute value 2.
pub fn park_zero_modes() -> ZeroModeData {
    let z = |r: usize, c: usize| CMatrix::zeros(r, c);
    let m = |r: usize, c: usize, e: &[f64]| {
        CMatrix::from_row_slice(r, c, &e.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
    };
    ZeroModeData {
        h: vec![1, 2, 2, 1],
        bases: vec![
            CMatrix::identity(1, 1),
            CMatrix::identity(2, 2),
            CMatrix::identity(2, 2),
            CMatrix::identity(1, 1),
        ],
        d_restricted: vec![
            m(2, 1, &[1.0, 0.0]),
            m(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            m(1, 2, &[0.0, 1.0]),
            z(0, 1),
        ],
        codiff_restricted: vec![
            z(0, 1),
            m(1, 2, &[0.0, 1.0]),
            m(2, 2, &[0.0, 2.0, 0.0, 0.0]),
            m(2, 1, &[1.0, 0.0]),
        ],
        nonzero: vec![
            SpectralData::new(Vec::new()),
            SpectralData::new(Vec::new()),
            SpectralData::new(Vec::new()),
            SpectralData::new(Vec::new()),
        ],
        ill_conditioned: Vec::new(),
    }
}

fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// Haar-ish random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_c64(rng));
    g.qr().q()
}

/// Random invertible matrix with bounded condition number:
/// `U diag(radial phases) V` with radii in `[0.6, 1.6]`.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let d = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let r = rng.gen_range(0.6..1.6);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            c64(r * phi.cos(), r * phi.sin())
        } else {
            c64(0.0, 0.0)
        }
    });
    u * d * v
}

struct Blocks {
    mirror: Vec<(C64, C64)>,
    selfdual: Vec<C64>,
    harmonic0: usize,
    harmonic1: usize,
}

fn assemble_d3(blocks: &Blocks) -> (CochainComplex, StarStructure) {
    let a = blocks.mirror.len();
    let b = blocks.selfdual.len();
    let dims = [
        a + blocks.harmonic0,
        a + b + blocks.harmonic1,
        b + a + blocks.harmonic1,
        a + blocks.harmonic0,
    ];
    let mut deltas: Vec<CMatrix> = (0..3)
        .map(|q| CMatrix::zeros(dims[q + 1], dims[q]))
        .collect();
    let mut stars: Vec<CMatrix> = (0..4).map(|q| CMatrix::zeros(dims[3 - q], dims[q])).collect();

    // index layout per degree:
    // deg0: [mirror u0 | harmonic0]
    // deg1: [mirror v1 | selfdual u1 | harmonic1]
    // deg2: [selfdual v2 | mirror u2 | harmonic1]
    // deg3: [mirror v3 | harmonic0]
    for (i, &(s01, s23)) in blocks.mirror.iter().enumerate() {
        let (u0, v1, u2, v3) = (i, i, b + i, i);
        deltas[0][(v1, u0)] = s01;
        deltas[2][(v3, u2)] = s23;
        stars[0][(v3, u0)] = c64(-1.0, 0.0);
        stars[1][(u2, v1)] = c64(1.0, 0.0);
        stars[2][(v1, u2)] = c64(1.0, 0.0);
        stars[3][(u0, v3)] = c64(-1.0, 0.0);
    }
    for (j, &s) in blocks.selfdual.iter().enumerate() {
        let (u1, v2) = (a + j, j);
        deltas[1][(v2, u1)] = s;
        stars[1][(v2, u1)] = c64(1.0, 0.0);
        stars[2][(u1, v2)] = c64(1.0, 0.0);
    }
    for k in 0..blocks.harmonic0 {
        let (w0, w3) = (a + k, a + k);
        stars[0][(w3, w0)] = c64(1.0, 0.0);
        stars[3][(w0, w3)] = c64(1.0, 0.0);
    }
    for k in 0..blocks.harmonic1 {
        let (w1, w2) = (a + b + k, b + a + k);
        stars[1][(w2, w1)] = c64(1.0, 0.0);
        stars[2][(w1, w2)] = c64(1.0, 0.0);
    }

    let cx = CochainComplex::new(dims.to_vec(), deltas).expect("block complex is valid");
    let star = StarStructure::new(stars);
    star.validate(&cx).expect("block star is valid");
    (cx, star)
}

fn conjugate(
    cx: &CochainComplex,
    star: &StarStructure,
    x: &[CMatrix],
) -> (CochainComplex, StarStructure) {
    let d = cx.top();
    let xinv: Vec<CMatrix> = x
        .iter()
        .map(|m| {
            if m.nrows() == 0 {
                m.clone()
            } else {
                m.clone().try_inverse().expect("conjugators are invertible")
            }
        })
        .collect();
    let deltas: Vec<CMatrix> = (0..d)
        .map(|q| &x[q + 1] * &cx.deltas[q] * &xinv[q])
        .collect();
    let stars: Vec<CMatrix> = (0..=d)
        .map(|q| &x[d - q] * &star.stars[q] * &xinv[q])
        .collect();
    let out = CochainComplex::new(cx.dims.clone(), deltas).expect("conjugated complex is valid");
    let outstar = StarStructure::new(stars);
    outstar.validate(&out).expect("conjugated star is valid");
    (out, outstar)
}

/// Random acyclic d = 3 complex with a unitary star structure: the flat
/// Laplacians equal the self-adjoint Hodge Laplacians of the standard
/// inner products. Ranks stay at or below `max_rank`.
pub fn random_unitary_star_complex<R: Rng>(
    rng: &mut R,
    max_rank: usize,
) -> (CochainComplex, StarStructure) {
    let half = (max_rank / 2).max(1);
    let a = rng.gen_range(0..=half);
    let b_min = usize::from(a == 0);
    let b = rng.gen_range(b_min..=half);
    let blocks = Blocks {
        mirror: (0..a)
            .map(|_| {
                let s = rng.gen_range(0.4..2.5);
                (c64(s, 0.0), c64(s, 0.0))
            })
            .collect(),
        selfdual: (0..b).map(|_| c64(rng.gen_range(0.4..2.5), 0.0)).collect(),
        harmonic0: 0,
        harmonic1: 0,
    };
    let (cx, star) = assemble_d3(&blocks);
    let x: Vec<CMatrix> = cx.dims.iter().map(|&n| random_unitary(rng, n)).collect();
    conjugate(&cx, &star, &x)
}

/// Random d = 3 complex with an invertible (generally non-unitary) star:
/// complex couplings, optionally harmonic blocks, and a random invertible
/// change of basis in every degree. Laplacians are non-self-adjoint;
/// duality holds exactly.
pub fn random_starred_complex<R: Rng>(
    rng: &mut R,
    max_rank: usize,
    harmonics: usize,
) -> (CochainComplex, StarStructure) {
    let half = (max_rank / 2).max(1);
    let a = rng.gen_range(0..=half);
    let b_min = usize::from(a == 0);
    let b = rng.gen_range(b_min..=half);
    let coupling = |rng: &mut R| {
        let r = rng.gen_range(0.5..2.0);
        let phi: f64 = rng.gen_range(-1.2..1.2);
        c64(r * phi.cos(), r * phi.sin())
    };
    let blocks = Blocks {
        mirror: (0..a).map(|_| (coupling(rng), coupling(rng))).collect(),
        selfdual: (0..b).map(|_| coupling(rng)).collect(),
        harmonic0: rng.gen_range(0..=harmonics),
        harmonic1: rng.gen_range(0..=harmonics),
    };
    let (cx, star) = assemble_d3(&blocks);
    let x: Vec<CMatrix> = cx.dims.iter().map(|&n| random_invertible(rng, n)).collect();
    conjugate(&cx, &star, &x)
}

/// Matrix with a planted generalized kernel: `X (N + D) X^{-1}` where `N`
/// is a Jordan-type nilpotent block of size `h` and `D` a diagonal of
/// nonzero eigenvalues. Returns the matrix, the kernel dimension, and the
/// product of the nonzero eigenvalues (the primed determinant).
pub fn planted_kernel_matrix<R: Rng>(rng: &mut R, n: usize, h: usize) -> (CMatrix, usize, C64) {
    assert!(h <= n);
    let mut core = CMatrix::zeros(n, n);
    for i in 0..h.saturating_sub(1) {
        core[(i, i + 1)] = c64(1.0, 0.0);
    }
    let mut det_prime = c64(1.0, 0.0);
    for i in h..n {
        let r = rng.gen_range(0.5..3.0);
        let phi: f64 = rng.gen_range(-1.0..1.0);
        let lam = c64(r * phi.cos(), r * phi.sin());
        core[(i, i)] = lam;
        det_prime *= lam;
    }
    let x = random_invertible(rng, n);
    let xinv = x.clone().try_inverse().expect("invertible");
    (&x * core * xinv, h, det_prime)
}

/// One-generator cyclic presentation `diag(e, 1/e)` with `ell_0 = 2`.
pub fn cyclic_presentation() -> GroupPresentation {
    let e = std::f64::consts::E;
    GroupPresentation::new(vec![Sl2::new(
        c64(e, 0.0),
        c64(0.0, 0.0),
        c64(0.0, 0.0),
        c64(1.0 / e, 0.0),
    )])
}

/// Two-generator presentation with integer unimodular matrices of traces 3
/// and 4.
pub fn two_generator_presentation() -> GroupPresentation {
    let g = Matrix2::new(c64(2.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0));
    let h = Matrix2::new(c64(3.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.0));
    GroupPresentation::new(vec![g, h])
}
