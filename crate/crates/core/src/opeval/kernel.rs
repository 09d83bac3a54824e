//! Truncated diagonal sandwiches `Σ_σ Z_σ T Z′_σ*` and the Szegő kernels
//! built from them.
//!
//! The level-`m` part `Σ_{|σ|=m} Z_σ T Z′_σ*` is computed from the previous
//! one as `Σ_k Z_k (·) Z′_k*`, and its norm is at most `‖T‖ r^m` with
//! `r = ‖(Z|Z)‖^{1/2} ‖(Z′|Z′)‖^{1/2}`. Summing through level `L` therefore
//! leaves a tail of at most `‖T‖ r^{L+1} / (1 − r)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C, I};

use super::tuple::{cayley_inverse, siegel_resolvent, OperatorTuple, Region, DEFAULT_MARGIN};

#[derive(Clone, Copy, Debug)]
pub struct KernelOptions {
    /// Target bound on the discarded tail.
    pub tol: f64,
    /// Longest word length summed before giving up.
    pub max_length: usize,
    /// Membership margin on `λ_min`.
    pub margin: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            tol: 1e-10,
            max_length: 64,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelResult {
    #[serde(with = "linalg::json::matrix")]
    pub value: CMat,
    pub truncation_length: usize,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Reproduction {
    /// `‖Σ_{|σ|<=L} Z_σ M Z′_σ* − T‖₂`.
    pub residual: f64,
    pub truncation_length: usize,
    pub tail_bound: f64,
}

fn require(t: &OperatorTuple, region: Region, margin: f64) -> Result<()> {
    let m = t.membership(region, margin);
    if !m.inside {
        let name = match region {
            Region::Ball => "noncommutative unit ball",
            _ => "Siegel upper half-space",
        };
        return Err(Error::Membership {
            region: name,
            lambda_min: m.lambda_min,
        });
    }
    Ok(())
}

fn compatible(z: &OperatorTuple, zp: &OperatorTuple) -> Result<()> {
    if z.n() != zp.n() || z.d() != zp.d() {
        return Err(Error::Dimension(format!(
            "points have shapes (N={}, d={}) and (N={}, d={})",
            z.n(),
            z.d(),
            zp.n(),
            zp.d()
        )));
    }
    Ok(())
}

/// `r = ‖(Z|Z)‖^{1/2} ‖(Z′|Z′)‖^{1/2}`.
pub fn contraction_ratio(z: &OperatorTuple, zp: &OperatorTuple) -> f64 {
    (linalg::spectral_norm(&z.row_gramian()) * linalg::spectral_norm(&zp.row_gramian())).sqrt()
}

/// Smallest `L` with `scale · r^{L+1} / (1 − r) < tol`, and the bound itself.
fn series_length(r: f64, scale: f64, opts: &KernelOptions) -> Result<(usize, f64)> {
    if scale == 0.0 || r == 0.0 {
        return Ok((0, 0.0));
    }
    let fail = Error::Convergence {
        tol: opts.tol,
        cap: opts.max_length,
        ratio: r,
    };
    if r >= 1.0 {
        return Err(fail);
    }
    let mut power = r;
    for l in 0..=opts.max_length {
        let bound = scale * power / (1.0 - r);
        if bound < opts.tol {
            return Ok((l, bound));
        }
        power *= r;
    }
    Err(fail)
}

/// `Σ_{|σ|<=L} Z_σ T Z′_σ*`.
pub fn diagonal_sandwich(z: &OperatorTuple, zp: &OperatorTuple, t: &CMat, length: usize) -> CMat {
    let mut term = t.clone();
    let mut sum = t.clone();
    for _ in 0..length {
        term = z
            .mats()
            .iter()
            .zip(zp.mats())
            .fold(CMat::zeros(t.nrows(), t.ncols()), |acc, (a, b)| acc + a * &term * b.adjoint());
        sum += &term;
    }
    sum
}

/// Truncated sandwich with the length chosen from the tail bound.
fn sandwich(z: &OperatorTuple, zp: &OperatorTuple, t: &CMat, opts: &KernelOptions) -> Result<KernelResult> {
    let r = contraction_ratio(z, zp);
    let (length, tail_bound) = series_length(r, linalg::spectral_norm(t), opts)?;
    Ok(KernelResult {
        value: diagonal_sandwich(z, zp, t, length),
        truncation_length: length,
        tail_bound,
    })
}

/// `K_B(Z,Z′) = Σ_σ Z_σ Z′_σ*`.
pub fn szego_ball(z: &OperatorTuple, zp: &OperatorTuple, opts: KernelOptions) -> Result<KernelResult> {
    compatible(z, zp)?;
    require(z, Region::Ball, opts.margin)?;
    require(zp, Region::Ball, opts.margin)?;
    sandwich(z, zp, &linalg::identity(z.d()), &opts)
}

/// `K_G(W,W′) = 4 Σ_σ Z_σ (i+W_N)⁻¹ ((i+W′_N)⁻¹)* Z′_σ*` with `Z = C⁻¹(W)`,
/// i.e. `F(W) F(W′)*` for `F(W) = 2 E(C⁻¹W) ((i+W_N)⁻¹)^{⊕∞}`.
pub fn szego_siegel(w: &OperatorTuple, wp: &OperatorTuple, opts: KernelOptions) -> Result<KernelResult> {
    compatible(w, wp)?;
    require(w, Region::Siegel, opts.margin)?;
    require(wp, Region::Siegel, opts.margin)?;
    let (z, zp) = (cayley_inverse(w)?, cayley_inverse(wp)?);
    let middle = siegel_resolvent(w)? * siegel_resolvent(wp)?.adjoint() * C::new(4.0, 0.0);
    sandwich(&z, &zp, &middle, &opts)
}

fn residual_against(result: KernelResult, t: &CMat) -> Reproduction {
    Reproduction {
        residual: linalg::spectral_norm(&(result.value - t)),
        truncation_length: result.truncation_length,
        tail_bound: result.tail_bound,
    }
}

/// `E(Z) (T − Σ_k Z_k T Z′_k*)^{⊕∞} E(Z′)* = T`, checked by truncation.
pub fn reproduction_check_ball(
    z: &OperatorTuple,
    zp: &OperatorTuple,
    t: &CMat,
    opts: KernelOptions,
) -> Result<Reproduction> {
    compatible(z, zp)?;
    check_square(t, z.d())?;
    require(z, Region::Ball, opts.margin)?;
    require(zp, Region::Ball, opts.margin)?;
    let middle = ball_middle(z, zp, t);
    Ok(residual_against(sandwich(z, zp, &middle, &opts)?, t))
}

/// `T − Σ_k Z_k T Z′_k*`.
pub fn ball_middle(z: &OperatorTuple, zp: &OperatorTuple, t: &CMat) -> CMat {
    z.mats()
        .iter()
        .zip(zp.mats())
        .fold(t.clone(), |acc, (a, b)| acc - a * t * b.adjoint())
}

/// `(1/2i)(W_N T − T W′_N*) − Σ_{k<N} W_k T W′_k*`.
pub fn siegel_inner(w: &OperatorTuple, wp: &OperatorTuple, t: &CMat) -> CMat {
    let n = w.n();
    let lead = (w.mat(n) * t - t * wp.mat(n).adjoint()) / (I * 2.0);
    w.mats()[..n - 1]
        .iter()
        .zip(&wp.mats()[..n - 1])
        .fold(lead, |acc, (a, b)| acc - a * t * b.adjoint())
}

/// Pulls a Siegel-side middle term back to the ball:
/// `4 (i+W_N)⁻¹ M ((i+W′_N)⁻¹)*`.
pub fn siegel_pullback(w: &OperatorTuple, wp: &OperatorTuple, m: &CMat) -> Result<CMat> {
    Ok(siegel_resolvent(w)? * m * siegel_resolvent(wp)?.adjoint() * C::new(4.0, 0.0))
}

/// `F(W) ((1/2i)(W_N T − T W′_N*) − Σ_{k<N} W_k T W′_k*)^{⊕∞} F(W′)* = T`.
pub fn reproduction_check_siegel(
    w: &OperatorTuple,
    wp: &OperatorTuple,
    t: &CMat,
    opts: KernelOptions,
) -> Result<Reproduction> {
    compatible(w, wp)?;
    check_square(t, w.d())?;
    require(w, Region::Siegel, opts.margin)?;
    require(wp, Region::Siegel, opts.margin)?;
    let middle = siegel_pullback(w, wp, &siegel_inner(w, wp, t))?;
    let (z, zp) = (cayley_inverse(w)?, cayley_inverse(wp)?);
    Ok(residual_against(sandwich(&z, &zp, &middle, &opts)?, t))
}

/// Sandwich of an arbitrary Siegel-side middle term, for callers that build
/// it themselves.
pub fn siegel_sandwich(
    w: &OperatorTuple,
    wp: &OperatorTuple,
    inner: &CMat,
    opts: KernelOptions,
) -> Result<KernelResult> {
    compatible(w, wp)?;
    require(w, Region::Siegel, opts.margin)?;
    require(wp, Region::Siegel, opts.margin)?;
    let middle = siegel_pullback(w, wp, inner)?;
    let (z, zp) = (cayley_inverse(w)?, cayley_inverse(wp)?);
    sandwich(&z, &zp, &middle, &opts)
}

fn check_square(t: &CMat, d: usize) -> Result<()> {
    if t.shape() != (d, d) {
        return Err(Error::Dimension(format!("T is {:?}, points act on C^{d}", t.shape())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};

    fn pt(v: &[C]) -> OperatorTuple {
        OperatorTuple::scalars(v).unwrap()
    }

    #[test]
    fn scalar_ball_kernel() {
        let z = pt(&[real(0.5), real(0.5)]);
        let k = szego_ball(&z, &z, KernelOptions::default()).unwrap();
        assert!((k.value[(0, 0)] - real(2.0)).norm() < 1e-10);
        assert!(k.tail_bound < 1e-10);
        let zero = pt(&[real(0.0), real(0.0)]);
        let k = szego_ball(&z, &zero, KernelOptions::default()).unwrap();
        assert_eq!(k.value[(0, 0)], real(1.0));
    }

    #[test]
    fn scalar_siegel_kernel() {
        let w = pt(&[I]);
        let k = szego_siegel(&w, &w, KernelOptions::default()).unwrap();
        assert!((k.value[(0, 0)] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_reproduction() {
        let z = pt(&[real(0.5)]);
        let one = CMat::from_element(1, 1, real(1.0));
        let r = reproduction_check_ball(&z, &z, &one, KernelOptions::default()).unwrap();
        assert!(r.residual <= r.tail_bound + 1e-15);
        let zero = CMat::zeros(1, 1);
        assert_eq!(reproduction_check_ball(&z, &z, &zero, KernelOptions::default()).unwrap().residual, 0.0);
        let w = pt(&[c(0.3, 2.0)]);
        let wp = pt(&[c(-1.0, 0.7)]);
        let r = reproduction_check_siegel(&w, &wp, &one, KernelOptions::default()).unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
    }

    #[test]
    fn convergence_cap() {
        let z = pt(&[real(0.999)]);
        let opts = KernelOptions {
            max_length: 64,
            ..KernelOptions::default()
        };
        assert!(matches!(szego_ball(&z, &z, opts), Err(Error::Convergence { .. })));
    }

    #[test]
    fn membership_enforced() {
        let z = pt(&[real(1.0)]);
        assert!(matches!(
            szego_ball(&z, &z, KernelOptions::default()),
            Err(Error::Membership { .. })
        ));
    }
}
