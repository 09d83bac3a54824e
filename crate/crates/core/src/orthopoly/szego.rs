//! Two-term recursion for toeplitz-kind functionals.
//!
//! For these functionals left multiplication by `Y_k` is isometric and the
//! ranges for different `k` are orthogonal, so `Y_k φ_σ` is already orthogonal
//! to every nonempty word preceding `kσ`. Only one direction has to be removed:
//! the reversed polynomial `φ♯_{kσ−1}`, the normalized part of `1` orthogonal
//! to the nonempty words `⪯ kσ−1`. With `γ_{kσ} = <Y_k φ_σ, φ♯_{kσ−1}>` and
//! `d = sqrt(1 − |γ|²)`:
//!
//! ```text
//! φ_{kσ}  = (Y_k φ_σ − γ φ♯_{kσ−1}) / d
//! φ♯_{kσ} = (−conj(γ) Y_k φ_σ + φ♯_{kσ−1}) / d
//! ```
//!
//! where `kσ−1` is the graded-lex predecessor of the word `kσ`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::functional::{Kind, MomentFunctional, DEFAULT_POSITIVITY_TOL};
use crate::linalg::{CMat, CVec, C};
use crate::orthopoly::determinant::det;
use crate::orthopoly::{orthogonalize_gram, OrthoBasis};
use crate::words::{self, Word};

/// Relative tolerance for agreement with the Cholesky route.
pub const ROUTE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SzegoData {
    pub n_generators: usize,
    pub level: usize,
    /// `γ_σ` for every nonempty `|σ| <= level`.
    pub gammas: BTreeMap<Word, C>,
    /// `d_σ = sqrt(1 − |γ_σ|²)`.
    pub ds: BTreeMap<Word, f64>,
    /// Row `σ` holds the coefficients of `φ♯_σ`.
    pub sharp: CMat,
}

impl SzegoData {
    pub fn sharp_polynomial(&self, sigma: &Word) -> CVec {
        self.sharp.row(sigma.index(self.n_generators)).transpose()
    }
}

/// Runs the recursion up to `level` and checks the result against the
/// triangular-factorization basis.
pub fn szego_recursion(f: &MomentFunctional, level: usize) -> Result<(OrthoBasis, SzegoData)> {
    if f.kind() != Kind::Toeplitz {
        return Err(Error::InvalidInput(
            "the two-term recursion needs a toeplitz-kind functional".into(),
        ));
    }
    let n = f.n_generators();
    let gram = f.gram(level)?;
    gram.positivity(DEFAULT_POSITIVITY_TOL).into_result()?;

    let m = words::count_up_to(level, n);
    let mut phi = CMat::zeros(m, m);
    let mut sharp = CMat::zeros(m, m);
    phi[(0, 0)] = C::new(1.0, 0.0);
    sharp[(0, 0)] = C::new(1.0, 0.0);
    let mut gammas = BTreeMap::new();
    let mut ds = BTreeMap::new();

    for idx in 1..m {
        let word = Word::from_index(idx, n);
        let (k, sigma) = word.split_first().unwrap();
        // Y_k φ_σ: move every coefficient from τ to kτ
        let mut shifted = CVec::zeros(m);
        for j in 0..=sigma.index(n) {
            shifted[words::shifted_index(k, j, n)] = phi[(sigma.index(n), j)];
        }
        let prev = sharp.row(idx - 1).transpose();
        let gamma = gram.inner(&shifted, &prev);
        let modulus = gamma.norm();
        if modulus >= 1.0 {
            return Err(Error::SzegoCoefficient {
                word: word.to_string(),
                modulus,
            });
        }
        let d = (1.0 - modulus * modulus).sqrt();
        let next = (&shifted - &prev * gamma).unscale(d);
        let next_sharp = (&prev - &shifted * gamma.conj()).unscale(d);
        phi.set_row(idx, &next.transpose());
        sharp.set_row(idx, &next_sharp.transpose());
        gammas.insert(word.clone(), gamma);
        ds.insert(word, d);
    }
    for i in 0..m {
        phi[(i, i)].im = 0.0;
    }

    let basis = OrthoBasis::from_matrix(n, level, phi)?;
    let reference = orthogonalize_gram(&gram)?;
    for (i, sigma) in basis.words().iter().enumerate() {
        let ours = basis.matrix().row(i);
        let theirs = reference.matrix().row(i);
        let diff = (ours - theirs).norm() / theirs.norm().max(1.0);
        if diff > ROUTE_TOL {
            return Err(Error::Consistency {
                what: format!("recursion and factorization disagree on phi_{sigma}"),
                residual: diff,
            });
        }
    }
    Ok((
        basis,
        SzegoData {
            n_generators: n,
            level,
            gammas,
            ds,
            sharp,
        },
    ))
}

/// `γ_σ = −sqrt(D_σ / D_{1,σ}) · a_{σ,∅}`, where `D_{1,σ}` is the Gram minor
/// over the nonempty words `⪯ σ`. Used to cross-check the recursion.
pub fn gamma_from_minors(f: &MomentFunctional, basis: &OrthoBasis, sigma: &Word) -> Result<C> {
    let n = f.n_generators();
    let m = sigma.index(n) + 1;
    let words: Vec<Word> = (0..m).map(|i| Word::from_index(i, n)).collect();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = f.kernel_entry(&words[i], &words[j])?;
        }
    }
    let d_full = det(&g).re;
    let d_tail = det(&g.view((1, 1), (m - 1, m - 1)).into_owned()).re;
    Ok(-basis.coefficient(sigma, &Word::empty()) * (d_full / d_tail).sqrt())
}
