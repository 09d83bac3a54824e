//! Orthonormal polynomials of a strictly positive functional.
//!
//! The main route factors the Gram matrix; [`determinant`] gives the closed
//! determinant formula as an independent cross-check and [`szego`] runs the
//! two-term recursion available for toeplitz-kind functionals.

pub mod determinant;
pub mod szego;

use std::collections::BTreeMap;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{GramMatrix, MomentFunctional, DEFAULT_POSITIVITY_TOL};
use crate::linalg::{self, CMat, CVec, C};
use crate::opeval::OperatorTuple;
use crate::words::{self, Word};

pub use determinant::determinant_formula;
pub use szego::{szego_recursion, SzegoData};

/// Coefficients `a_{σ,τ}` (`τ ⪯ σ`) of the orthonormal polynomials
/// `φ_σ = Σ a_{σ,τ} Y_τ` for all `|σ| <= level`.
///
/// Stored as a lower-triangular matrix whose row `σ` holds `φ_σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoBasis {
    n_generators: usize,
    level: usize,
    coeffs: CMat,
}

impl OrthoBasis {
    /// Wraps a coefficient matrix after checking the triangular shape and the
    /// positive diagonal.
    pub fn from_matrix(n_generators: usize, level: usize, coeffs: CMat) -> Result<Self> {
        let m = words::count_up_to(level, n_generators);
        if coeffs.nrows() != m || coeffs.ncols() != m {
            return Err(Error::Dimension(format!(
                "basis of level {level} over {n_generators} generators needs a {m}x{m} matrix"
            )));
        }
        let scale = linalg::max_abs(&coeffs).max(1.0);
        for i in 0..m {
            let d = coeffs[(i, i)];
            if d.re <= 0.0 || d.im.abs() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!(
                    "leading coefficient of phi_{} must be real and positive, got {d}",
                    Word::from_index(i, n_generators)
                )));
            }
            for j in i + 1..m {
                if coeffs[(i, j)].norm() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "phi_{} has a coefficient on the later word {}",
                        Word::from_index(i, n_generators),
                        Word::from_index(j, n_generators)
                    )));
                }
            }
        }
        Ok(OrthoBasis {
            n_generators,
            level,
            coeffs,
        })
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn size(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Row `σ` is the coefficient vector of `φ_σ`.
    pub fn matrix(&self) -> &CMat {
        &self.coeffs
    }

    pub fn words(&self) -> Vec<Word> {
        words::words_up_to(self.level, self.n_generators)
    }

    pub fn coefficient(&self, sigma: &Word, tau: &Word) -> C {
        let n = self.n_generators;
        self.coeffs[(sigma.index(n), tau.index(n))]
    }

    /// Coefficient vector of `φ_σ` over all words of length `<= level`.
    pub fn polynomial(&self, sigma: &Word) -> CVec {
        self.coeffs.row(sigma.index(self.n_generators)).transpose()
    }

    /// Coefficient vector of `φ_σ` padded to the words of length `<= len`.
    pub fn polynomial_padded(&self, sigma: &Word, len: usize) -> CVec {
        let mut v = CVec::zeros(words::count_up_to(len, self.n_generators));
        let p = self.polynomial(sigma);
        v.rows_mut(0, p.len()).copy_from(&p);
        v
    }

    pub fn truncate(&self, level: usize) -> Result<OrthoBasis> {
        self.require_level(level)?;
        let m = words::count_up_to(level, self.n_generators);
        Ok(OrthoBasis {
            n_generators: self.n_generators,
            level,
            coeffs: self.coeffs.view((0, 0), (m, m)).into_owned(),
        })
    }

    pub fn require_level(&self, needed: usize) -> Result<()> {
        if needed > self.level {
            return Err(Error::LevelShortfall {
                needed,
                available: self.level,
            });
        }
        Ok(())
    }

    /// `max |A·conj(K)·A* − I|`, the orthonormality defect under `gram`.
    pub fn orthonormality_residual(&self, gram: &GramMatrix) -> f64 {
        let m = self.size().min(gram.size());
        let a = self.coeffs.view((0, 0), (m, m));
        let k = gram.entries.view((0, 0), (m, m)).map(|z| z.conj());
        let prod = a * k * a.adjoint();
        linalg::max_abs(&(prod - CMat::identity(m, m)))
    }

    /// `φ_σ(Z) = Σ_τ a_{σ,τ} Z_τ` with `Z_∅ = I`.
    pub fn evaluate(&self, sigma: &Word, z: &OperatorTuple) -> Result<CMat> {
        self.check_tuple(z)?;
        sigma.check_generators(self.n_generators)?;
        self.require_level(sigma.len())?;
        let powers = z.word_powers(sigma.len());
        Ok(self.combine(sigma.index(self.n_generators), &powers))
    }

    /// `φ_σ(Z)` for every `|σ| <= level`, in graded-lex order.
    pub fn evaluate_all(&self, level: usize, z: &OperatorTuple) -> Result<Vec<CMat>> {
        self.check_tuple(z)?;
        self.require_level(level)?;
        let powers = z.word_powers(level);
        Ok((0..powers.len()).map(|i| self.combine(i, &powers)).collect())
    }

    fn combine(&self, row: usize, powers: &[CMat]) -> CMat {
        let d = powers[0].nrows();
        (0..=row).fold(CMat::zeros(d, d), |acc, j| acc + &powers[j] * self.coeffs[(row, j)])
    }

    fn check_tuple(&self, z: &OperatorTuple) -> Result<()> {
        if z.n() != self.n_generators {
            return Err(Error::Dimension(format!(
                "tuple has {} matrices, basis has {} generators",
                z.n(),
                self.n_generators
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BasisFile = serde_json::from_str(text)?;
        raw.into_basis()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BasisFile::from(self))?)
    }
}

#[derive(Serialize, Deserialize)]
struct BasisFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_generators: Option<usize>,
    level: usize,
    coeffs: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
}

impl BasisFile {
    fn into_basis(self) -> Result<OrthoBasis> {
        let parse = |s: &str| {
            s.parse::<Word>()
                .map_err(|e| Error::InvalidInput(format!("coeffs key {s:?}: {e}")))
        };
        let mut entries = Vec::new();
        let mut max_letter = 1;
        for (sigma, row) in &self.coeffs {
            let sigma = parse(sigma)?;
            max_letter = max_letter.max(sigma.max_letter());
            for (tau, pair) in row {
                let tau = parse(tau)?;
                max_letter = max_letter.max(tau.max_letter());
                entries.push((sigma.clone(), tau, linalg::json::from_pair(*pair)));
            }
        }
        let n = self.n_generators.unwrap_or(max_letter as usize);
        let m = words::count_up_to(self.level, n);
        let mut coeffs = CMat::zeros(m, m);
        for (sigma, tau, v) in entries {
            sigma.check_generators(n)?;
            tau.check_generators(n)?;
            if sigma.len() > self.level || tau.len() > self.level {
                return Err(Error::InvalidInput(format!(
                    "coeffs entry {sigma}/{tau} exceeds level {}",
                    self.level
                )));
            }
            coeffs[(sigma.index(n), tau.index(n))] = v;
        }
        OrthoBasis::from_matrix(n, self.level, coeffs)
    }
}

impl From<&OrthoBasis> for BasisFile {
    fn from(b: &OrthoBasis) -> Self {
        let words = b.words();
        let coeffs = words
            .iter()
            .enumerate()
            .map(|(i, sigma)| {
                let row = words[..=i]
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| b.coeffs[(i, *j)] != C::new(0.0, 0.0) || *j == i)
                    .map(|(j, tau)| (tau.to_string(), linalg::json::to_pair(b.coeffs[(i, j)])))
                    .collect();
                (sigma.to_string(), row)
            })
            .collect();
        BasisFile {
            n_generators: Some(b.n_generators),
            level: b.level,
            coeffs,
        }
    }
}

/// Orthonormalizes the monomials up to `level` under `f`.
pub fn orthogonalize(f: &MomentFunctional, level: usize) -> Result<OrthoBasis> {
    let gram = f.gram(level)?;
    gram.positivity(DEFAULT_POSITIVITY_TOL).into_result()?;
    orthogonalize_gram(&gram)
}

/// Triangular factorization route: with `conj(K) = L L*` (Cholesky, positive
/// diagonal), the coefficient matrix is `A = L⁻¹`, so that `A conj(K) A* = I`
/// and `a_{σ,σ} = 1 / L_{σσ} > 0`.
pub fn orthogonalize_gram(gram: &GramMatrix) -> Result<OrthoBasis> {
    let m = gram.size();
    let conj_k = gram.entries.map(|z| z.conj());
    let chol = Cholesky::new(conj_k).ok_or_else(|| {
        gram.positivity(f64::INFINITY)
            .into_result()
            .err()
            .expect("an infinite threshold always fails")
    })?;
    let l = chol.l();
    let mut a = l
        .solve_lower_triangular(&CMat::identity(m, m))
        .ok_or_else(|| Error::Consistency {
            what: "Cholesky factor is singular".into(),
            residual: f64::INFINITY,
        })?;
    for i in 0..m {
        a[(i, i)] = C::new(a[(i, i)].re, 0.0);
        for j in i + 1..m {
            a[(i, j)] = C::new(0.0, 0.0);
        }
    }
    OrthoBasis::from_matrix(gram.n_generators, gram.level, a)
}
