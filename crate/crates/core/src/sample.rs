//! Seeded random test data: matrices, domain points and positive functionals.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::error::Result;
use crate::functional::MomentFunctional;
use crate::linalg::{self, CMat, CVec, C};
use crate::opeval::{cayley, OperatorTuple, Region};
use crate::words;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Entries uniform in the square `[−1,1] + i[−1,1]`.
pub fn complex(rng: &mut StdRng) -> C {
    C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix(rng: &mut StdRng, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| complex(rng))
}

pub fn hermitian(rng: &mut StdRng, d: usize) -> CMat {
    linalg::hermitian_part(&matrix(rng, d))
}

pub fn unit_vector(rng: &mut StdRng, d: usize) -> CVec {
    loop {
        let v = CVec::from_fn(d, |_, _| complex(rng));
        let n = v.norm();
        if n > 1e-3 {
            return v.unscale(n);
        }
    }
}

/// Ball point with `‖(Z|Z)‖^{1/2} = radius`, so `λ_min(I − (Z|Z)) = 1 − radius²`.
pub fn ball_point(rng: &mut StdRng, n: usize, d: usize, radius: f64) -> OperatorTuple {
    let mats: Vec<CMat> = (0..n).map(|_| matrix(rng, d)).collect();
    let raw = OperatorTuple::new(mats.clone()).expect("square matrices");
    let size = linalg::spectral_norm(&raw.row_gramian()).sqrt();
    let scaled = mats.into_iter().map(|m| m * C::new(radius / size, 0.0)).collect();
    OperatorTuple::new(scaled)
        .and_then(|t| t.tagged(Region::Ball, 0.0))
        .expect("radius below one")
}

/// Cayley image of a ball point of the given radius.
pub fn siegel_point(rng: &mut StdRng, n: usize, d: usize, radius: f64) -> OperatorTuple {
    cayley(&ball_point(rng, n, d, radius)).expect("ball points map into the Siegel domain")
}

/// Moments `<X_σ v, v>` of random Hermitian `X_1..X_n` on `C^d`, scaled by
/// `1/√d` so the spectra stay of order one.
pub fn representation_functional(rng: &mut StdRng, n: usize, d: usize, max_degree: usize) -> Result<MomentFunctional> {
    let scale = C::new(1.0 / (d as f64).sqrt(), 0.0);
    let xs: Vec<CMat> = (0..n).map(|_| hermitian(rng, d) * scale).collect();
    let v = unit_vector(rng, d);
    MomentFunctional::from_representation(&xs, &v, max_degree)
}

/// Random toeplitz data `c_α`, `|α| <= level`, shrunk until the Gram matrix at
/// `level` has `λ_min >= floor`.
pub fn toeplitz_functional(rng: &mut StdRng, n: usize, level: usize, floor: f64) -> Result<MomentFunctional> {
    let raw: BTreeMap<_, _> = words::words_up_to(level, n)
        .into_iter()
        .map(|w| {
            let v = if w.is_empty() { C::new(1.0, 0.0) } else { complex(rng) };
            (w, v)
        })
        .collect();
    let mut t = 1.0;
    loop {
        let moments = raw
            .iter()
            .map(|(w, &v)| (w.clone(), if w.is_empty() { v } else { v * t }))
            .collect();
        let f = MomentFunctional::toeplitz(n, level, moments)?;
        if f.gram(level)?.positivity(0.0).min_eigenvalue() >= floor {
            return Ok(f);
        }
        t *= 0.7;
    }
}
