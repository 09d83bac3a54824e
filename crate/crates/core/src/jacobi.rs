//! Truncated block Jacobi matrices: `J_k` is multiplication by `Y_k` written
//! in the orthonormal basis `{e_σ = φ_σ}`, cut off at words of length `L`.
//!
//! Column `σ` (`|σ| = m`) of `J_k` carries `A_{m,k}` on level `m`, `B_{m,k}` on
//! level `m+1` and `B*_{m−1,k}` on level `m−1`. A product `J_σ e_∅` walks one
//! level per factor, so `<J_σ e_∅, e_∅>` only feels the cut once the walk can
//! reach level `L+1` and come back, i.e. for `|σ| > 2L + 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{Certificate, Kind, MomentFunctional, Positivity};
use crate::linalg::{self, CMat, CVec, C};
use crate::orthopoly::orthogonalize_gram;
use crate::recurrence::{extract, RecurrenceCoeffs};
use crate::words::{self, Word};

/// Default tolerance for [`hamburger_check`].
pub const DEFAULT_HAMBURGER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockJacobi {
    /// Generator index, 1-based.
    pub k: usize,
    pub n_generators: usize,
    pub truncation: usize,
    #[serde(with = "linalg::json::matrix")]
    pub matrix: CMat,
}

/// `J_1, …, J_N` truncated at level `L`. Uses `A_n` for `n <= L` and `B_n`
/// for `n < L`, so the coefficients must cover `L + 1` levels.
pub fn build(coeffs: &RecurrenceCoeffs, truncation: usize) -> Result<Vec<BlockJacobi>> {
    coeffs.require_levels(truncation + 1)?;
    let n = coeffs.n_generators();
    let size = words::count_up_to(truncation, n);
    let family = (1..=n)
        .map(|k| {
            let mut m = CMat::zeros(size, size);
            for level in 0..=truncation {
                let here = words::level_offset(level, n);
                let width = words::level_size(level, n);
                let a = linalg::hermitian_part(coeffs.a(level, k));
                m.view_mut((here, here), (width, width)).copy_from(&a);
                if level < truncation {
                    let next = words::level_offset(level + 1, n);
                    let b = coeffs.b(level, k);
                    m.view_mut((next, here), (width * n, width)).copy_from(b);
                    m.view_mut((here, next), (width, width * n)).copy_from(&b.adjoint());
                }
            }
            BlockJacobi {
                k,
                n_generators: n,
                truncation,
                matrix: m,
            }
        })
        .collect();
    Ok(family)
}

/// `J_σ v = J_{i_1} ⋯ J_{i_k} v`, rightmost factor first.
pub fn word_apply(family: &[BlockJacobi], sigma: &Word, v: &CVec) -> Result<CVec> {
    let Some(first) = family.first() else {
        return Err(Error::InvalidInput("empty Jacobi family".into()));
    };
    sigma.check_generators(family.len())?;
    if v.len() != first.matrix.nrows() {
        return Err(Error::Dimension(format!(
            "vector has length {}, matrices have order {}",
            v.len(),
            first.matrix.nrows()
        )));
    }
    Ok(sigma
        .letters()
        .iter()
        .rev()
        .fold(v.clone(), |acc, &l| &family[l as usize - 1].matrix * acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JacobiMoment {
    #[serde(with = "linalg::json::complex")]
    pub value: C,
    /// Set when the word is long enough for the truncation to matter.
    pub truncated: bool,
}

/// `<J_σ e_∅, e_∅>`.
pub fn moment(family: &[BlockJacobi], sigma: &Word) -> Result<JacobiMoment> {
    let Some(first) = family.first() else {
        return Err(Error::InvalidInput("empty Jacobi family".into()));
    };
    let mut e0 = CVec::zeros(first.matrix.nrows());
    e0[0] = C::new(1.0, 0.0);
    let image = word_apply(family, sigma, &e0)?;
    Ok(JacobiMoment {
        value: image[0],
        truncated: sigma.len() > 2 * first.truncation + 1,
    })
}

#[derive(Clone, Debug)]
pub enum Hamburger {
    /// The Hankel Gram matrix is positive semidefinite within tolerance. The
    /// witness is present when it is strictly positive.
    Yes {
        min_eigenvalue: f64,
        witness: Option<RecurrenceCoeffs>,
    },
    No {
        min_eigenvalue: f64,
        certificate: Certificate,
    },
}

impl Hamburger {
    pub fn is_yes(&self) -> bool {
        matches!(self, Hamburger::Yes { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Hamburger::Yes { min_eigenvalue, .. } | Hamburger::No { min_eigenvalue, .. } => *min_eigenvalue,
        }
    }
}

/// Decides whether `s` comes from a positive functional on words of length
/// `<= 2·level`: yes iff `λ_min > −tol·scale` for the Hankel Gram matrix,
/// with `scale = max(1, largest diagonal entry)`.
pub fn hamburger_check(s: &MomentFunctional, level: usize, tol: f64) -> Result<Hamburger> {
    if s.kind() != Kind::Hankel {
        return Err(Error::InvalidInput("the moment problem needs Hankel-kind data".into()));
    }
    let gram = s.gram(level)?;
    match gram.positivity(-tol) {
        Positivity::Fail {
            min_eigenvalue,
            certificate,
        } => Ok(Hamburger::No {
            min_eigenvalue,
            certificate,
        }),
        Positivity::Ok { min_eigenvalue } => {
            let witness = if gram.positivity(tol).is_ok() {
                let basis = orthogonalize_gram(&gram)?;
                Some(if level == 0 {
                    RecurrenceCoeffs::new(s.n_generators(), Vec::new(), Vec::new())?
                } else {
                    extract(s, &basis, level)?
                })
            } else {
                None
            };
            Ok(Hamburger::Yes {
                min_eigenvalue,
                witness,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::orthopoly::orthogonalize;

    fn hermite(levels: usize) -> RecurrenceCoeffs {
        let b: Vec<C> = (1..=levels).map(|n| real((n as f64).sqrt())).collect();
        RecurrenceCoeffs::univariate(&vec![real(0.0); levels], &b).unwrap()
    }

    #[test]
    fn hermite_matrix() {
        let j = build(&hermite(4), 3).unwrap();
        assert_eq!(j.len(), 1);
        let m = &j[0].matrix;
        assert_eq!(m.shape(), (4, 4));
        for i in 0..4 {
            assert_eq!(m[(i, i)], real(0.0));
        }
        for i in 0..3 {
            let b = ((i + 1) as f64).sqrt();
            assert_eq!(m[(i + 1, i)], real(b));
            assert_eq!(m[(i, i + 1)], real(b));
        }
        assert_eq!(m, &m.adjoint());
    }

    #[test]
    fn hermite_moments() {
        let j = build(&hermite(3), 2).unwrap();
        let s2 = moment(&j, &"1.1".parse().unwrap()).unwrap();
        assert_eq!(s2.value, real(1.0));
        assert!(!s2.truncated);
        assert_eq!(moment(&j, &Word::empty()).unwrap().value, real(1.0));
        // 2L+1 = 5 is still exact; 6 is not
        let s4 = moment(&j, &Word::from_letters(vec![1; 4]).unwrap()).unwrap();
        assert!((s4.value - real(3.0)).norm() < 1e-12);
        let s6 = moment(&j, &Word::from_letters(vec![1; 6]).unwrap()).unwrap();
        assert!(s6.truncated);
    }

    #[test]
    fn degenerate_blocks_still_assemble() {
        let zero = RecurrenceCoeffs::univariate(&[real(0.0); 2], &[real(0.0); 2]).unwrap();
        let j = build(&zero, 1).unwrap();
        assert_eq!(j[0].matrix, CMat::zeros(2, 2));
    }

    #[test]
    fn shortfall() {
        assert!(matches!(build(&hermite(2), 2), Err(Error::LevelShortfall { .. })));
    }

    #[test]
    fn hamburger_examples() {
        let bad = MomentFunctional::univariate(&[1.0, 0.0, -1.0].map(real)).unwrap();
        match hamburger_check(&bad, 1, DEFAULT_HAMBURGER_TOL).unwrap() {
            Hamburger::No { certificate, .. } => assert_eq!(certificate.dominant_word().to_string(), "1"),
            other => panic!("expected no, got {other:?}"),
        }
        let gauss = MomentFunctional::univariate(&[1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0].map(real)).unwrap();
        match hamburger_check(&gauss, 3, DEFAULT_HAMBURGER_TOL).unwrap() {
            Hamburger::Yes {
                witness: Some(w), ..
            } => {
                for n in 0..3 {
                    assert!(w.a(n, 1)[(0, 0)].norm() < 1e-10);
                    assert!((w.b(n, 1)[(0, 0)].re - ((n + 1) as f64).sqrt()).abs() < 1e-10);
                }
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn semidefinite_data_has_no_witness() {
        // point mass at 1: s_n = 1, Gram of rank one
        let f = MomentFunctional::univariate(&[1.0; 5].map(real)).unwrap();
        match hamburger_check(&f, 2, DEFAULT_HAMBURGER_TOL).unwrap() {
            Hamburger::Yes { witness, .. } => assert!(witness.is_none()),
            other => panic!("{other:?}"),
        }
        assert!(orthogonalize(&f, 2).is_err());
    }
}
