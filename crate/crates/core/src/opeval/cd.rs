//! Christoffel–Darboux kernel `K_n(W,W′) = Σ_{|σ|<=n} φ_σ(W) φ_σ(W′)*` and the
//! identities it satisfies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::GramMatrix;
use crate::linalg::{self, CMat, CVec, C, I};
use crate::orthopoly::OrthoBasis;
use crate::recurrence::RecurrenceCoeffs;
use crate::words;

use super::kernel::{siegel_sandwich, KernelOptions};
use super::tuple::{OperatorTuple, Region, DEFAULT_MARGIN};

fn require_siegel(w: &OperatorTuple) -> Result<()> {
    let m = w.membership(Region::Siegel, DEFAULT_MARGIN);
    if !m.inside {
        return Err(Error::Membership {
            region: "Siegel upper half-space",
            lambda_min: m.lambda_min,
        });
    }
    Ok(())
}

fn check_points(basis: &OrthoBasis, w: &OperatorTuple, wp: &OperatorTuple) -> Result<()> {
    if w.d() != wp.d() || w.n() != wp.n() {
        return Err(Error::Dimension("the two points have different shapes".into()));
    }
    if w.n() != basis.n_generators() {
        return Err(Error::Dimension(format!(
            "points have {} matrices, basis has {} generators",
            w.n(),
            basis.n_generators()
        )));
    }
    require_siegel(w)?;
    require_siegel(wp)
}

fn kernel_from(values: &[CMat], values_p: &[CMat], count: usize) -> CMat {
    let d = values[0].nrows();
    (0..count).fold(CMat::zeros(d, d), |acc, i| acc + &values[i] * values_p[i].adjoint())
}

pub fn cd_kernel(basis: &OrthoBasis, n: usize, w: &OperatorTuple, wp: &OperatorTuple) -> Result<CMat> {
    check_points(basis, w, wp)?;
    let vals = basis.evaluate_all(n, w)?;
    let vals_p = basis.evaluate_all(n, wp)?;
    Ok(kernel_from(&vals, &vals_p, vals.len()))
}

/// `Φ_{n+1}(W) B_{n,N} Φ_n(W′)* − Φ_n(W) B*_{n,N} Φ_{n+1}(W′)*`.
fn boundary_term(vals: &[CMat], vals_p: &[CMat], b: &CMat, n: usize, gens: usize) -> CMat {
    let here = words::level_offset(n, gens);
    let next = words::level_offset(n + 1, gens);
    let d = vals[0].nrows();
    let mut out = CMat::zeros(d, d);
    for t in 0..b.nrows() {
        for s in 0..b.ncols() {
            let v = b[(t, s)];
            if v == C::new(0.0, 0.0) {
                continue;
            }
            out += &vals[next + t] * vals_p[here + s].adjoint() * v;
            out -= &vals[here + s] * vals_p[next + t].adjoint() * v.conj();
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Residual {
    /// `‖lhs − rhs‖₂`.
    pub absolute: f64,
    /// `absolute / max(1, ‖lhs‖₂)`.
    pub relative: f64,
}

impl Residual {
    fn between(lhs: &CMat, rhs: &CMat) -> Self {
        let absolute = linalg::spectral_norm(&(lhs - rhs));
        Residual {
            absolute,
            relative: absolute / linalg::spectral_norm(lhs).max(1.0),
        }
    }
}

struct Parts {
    kn: CMat,
    boundary: CMat,
}

fn parts(
    basis: &OrthoBasis,
    coeffs: &RecurrenceCoeffs,
    n: usize,
    w: &OperatorTuple,
    wp: &OperatorTuple,
) -> Result<Parts> {
    check_points(basis, w, wp)?;
    if coeffs.n_generators() != basis.n_generators() {
        return Err(Error::Dimension("basis and coefficients disagree on N".into()));
    }
    coeffs.require_levels(n + 1)?;
    let gens = basis.n_generators();
    let vals = basis.evaluate_all(n + 1, w)?;
    let vals_p = basis.evaluate_all(n + 1, wp)?;
    let kn = kernel_from(&vals, &vals_p, words::count_up_to(n, gens));
    let boundary = boundary_term(&vals, &vals_p, coeffs.b(n, gens), n, gens);
    Ok(Parts { kn, boundary })
}

/// Residual of `W_N K_n − K_n W′_N* = Φ_{n+1}(W) B_{n,N} Φ_n(W′)* − Φ_n(W) B*_{n,N} Φ_{n+1}(W′)*`.
/// Needs the basis to level `n+1` and `B_n`.
pub fn cd_inner_identity(
    basis: &OrthoBasis,
    coeffs: &RecurrenceCoeffs,
    n: usize,
    w: &OperatorTuple,
    wp: &OperatorTuple,
) -> Result<Residual> {
    let Parts { kn, boundary } = parts(basis, coeffs, n, w, wp)?;
    let big = w.n();
    let lhs = w.mat(big) * &kn - &kn * wp.mat(big).adjoint();
    Ok(Residual::between(&lhs, &boundary))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CdFull {
    /// `‖F(W) M^{⊕∞} F(W′)* − K_n‖₂` with the sum truncated.
    pub residual: f64,
    pub truncation_length: usize,
    pub tail_bound: f64,
}

/// `K_n = F(W) M^{⊕∞} F(W′)*` with
/// `M = (1/2i)(Φ_{n+1}B_{n,N}Φ_n* − Φ_nB*_{n,N}Φ_{n+1}*) − Σ_{k<N} W_k K_n W′_k*`.
pub fn cd_full_check(
    basis: &OrthoBasis,
    coeffs: &RecurrenceCoeffs,
    n: usize,
    w: &OperatorTuple,
    wp: &OperatorTuple,
    opts: KernelOptions,
) -> Result<CdFull> {
    let Parts { kn, boundary } = parts(basis, coeffs, n, w, wp)?;
    let big = w.n();
    let inner = w.mats()[..big - 1]
        .iter()
        .zip(&wp.mats()[..big - 1])
        .fold(boundary / (I * 2.0), |acc, (a, b)| acc - a * &kn * b.adjoint());
    let sum = siegel_sandwich(w, wp, &inner, opts)?;
    Ok(CdFull {
        residual: linalg::spectral_norm(&(&sum.value - &kn)),
        truncation_length: sum.truncation_length,
        tail_bound: sum.tail_bound,
    })
}

/// For `P = Σ p_τ Y_τ` (`|τ| <= n`): `max |Σ_σ <P, φ_σ> φ_σ(W′) − P(W′)|`.
pub fn reproducing_residual(
    basis: &OrthoBasis,
    gram: &GramMatrix,
    n: usize,
    p: &CVec,
    wp: &OperatorTuple,
) -> Result<f64> {
    let gens = basis.n_generators();
    let m = words::count_up_to(n, gens);
    if p.len() != m {
        return Err(Error::Dimension(format!("polynomial needs {m} coefficients, got {}", p.len())));
    }
    if gram.size() < m || gram.n_generators != gens {
        return Err(Error::LevelShortfall {
            needed: n,
            available: gram.level,
        });
    }
    let basis = basis.truncate(n)?;
    let gram = gram.truncate(n);
    let vals = basis.evaluate_all(n, wp)?;
    let powers = wp.word_powers(n);
    let d = wp.d();
    let mut expanded = CMat::zeros(d, d);
    for (i, val) in vals.iter().enumerate() {
        let phi = basis.polynomial(&words::Word::from_index(i, gens));
        expanded += val * gram.inner(p, &phi);
    }
    let direct = powers.iter().zip(p.iter()).fold(CMat::zeros(d, d), |acc, (z, c)| acc + z * *c);
    Ok(linalg::max_abs(&(expanded - direct)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::MomentFunctional;
    use crate::linalg::real;
    use crate::orthopoly::orthogonalize;
    use crate::recurrence::extract;

    fn hermite(level: usize) -> (MomentFunctional, OrthoBasis, RecurrenceCoeffs) {
        let f = MomentFunctional::univariate(&[1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0].map(real)).unwrap();
        let basis = orthogonalize(&f, level).unwrap();
        let coeffs = extract(&f, &basis, level).unwrap();
        (f, basis, coeffs)
    }

    #[test]
    fn kernel_examples() {
        let (_, basis, _) = hermite(2);
        let w = OperatorTuple::scalars(&[I]).unwrap();
        assert_eq!(cd_kernel(&basis, 0, &w, &w).unwrap()[(0, 0)], real(1.0));
        assert!((cd_kernel(&basis, 1, &w, &w).unwrap()[(0, 0)] - real(2.0)).norm() < 1e-14);
    }

    #[test]
    fn inner_identity_scalar() {
        let (_, basis, coeffs) = hermite(2);
        let w = OperatorTuple::scalars(&[I]).unwrap();
        let wp = OperatorTuple::scalars(&[I * 2.0]).unwrap();
        for n in 0..2 {
            let r = cd_inner_identity(&basis, &coeffs, n, &w, &wp).unwrap();
            assert!(r.absolute < 1e-12, "n={n}: {r:?}");
        }
    }

    #[test]
    fn full_identity_scalar() {
        let (_, basis, coeffs) = hermite(2);
        let w = OperatorTuple::scalars(&[C::new(0.2, 1.5)]).unwrap();
        let wp = OperatorTuple::scalars(&[C::new(-0.4, 0.8)]).unwrap();
        let r = cd_full_check(&basis, &coeffs, 1, &w, &wp, KernelOptions::default()).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn reproducing_scalar() {
        let (f, basis, _) = hermite(3);
        let gram = f.gram(3).unwrap();
        let p = CVec::from_vec(vec![real(1.0), C::new(0.0, 2.0), real(-3.0)]);
        let w = OperatorTuple::scalars(&[C::new(0.5, 1.0)]).unwrap();
        assert!(reproducing_residual(&basis, &gram, 2, &p, &w).unwrap() < 1e-12);
    }
}
