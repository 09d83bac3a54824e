//! Closed-form orthonormal polynomials from bordered Gram determinants.
//!
//! With `D_α = det[K(α',β')]_{α',β' ⪯ α}`, the polynomial `φ_σ` is the
//! determinant of the Gram rows `α' ≺ σ` bordered below by the monomial row
//! `F_∅ … F_σ`, divided by `sqrt(D_{σ−1} D_σ)`. Expanding along the monomial
//! row gives the coefficients as signed minors. The cost is factorial in
//! spirit and cubic per minor here, so this is only meant for small orders.

use crate::error::{Error, Result};
use crate::functional::{MomentFunctional, DEFAULT_POSITIVITY_TOL};
use crate::linalg::{CMat, CVec, C};
use crate::words::Word;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &CMat) -> C {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let mut result = C::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap();
        if a[(pivot, col)].norm() == 0.0 {
            return C::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            result = -result;
        }
        let p = a[(col, col)];
        result *= p;
        for row in col + 1..n {
            let factor = a[(row, col)] / p;
            if factor.norm() != 0.0 {
                for k in col..n {
                    let sub = factor * a[(col, k)];
                    a[(row, k)] -= sub;
                }
            }
        }
    }
    result
}

/// Gram matrix over the words `⪯ σ`.
fn leading_gram(f: &MomentFunctional, sigma: &Word) -> Result<CMat> {
    let n = f.n_generators();
    let m = sigma.index(n) + 1;
    let words: Vec<Word> = (0..m).map(|i| Word::from_index(i, n)).collect();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = f.kernel_entry(&words[i], &words[j])?;
        }
    }
    Ok(g)
}

/// `D_σ`, the leading principal minor of the Gram matrix through `σ`.
pub fn gram_minor(f: &MomentFunctional, sigma: &Word) -> Result<f64> {
    Ok(det(&leading_gram(f, sigma)?).re)
}

/// Coefficients of `φ_σ` on the words `⪯ σ`, computed from the bordered
/// determinant.
pub fn determinant_formula(f: &MomentFunctional, sigma: &Word) -> Result<CVec> {
    let n = f.n_generators();
    sigma.check_generators(n)?;
    if sigma.is_empty() {
        return Ok(CVec::from_element(1, C::new(1.0, 0.0)));
    }
    let g = leading_gram(f, sigma)?;
    let m = g.nrows();

    // strictness check on the same Gram block, so a failure yields a certificate
    let block = crate::functional::GramMatrix {
        n_generators: n,
        level: sigma.len(),
        entries: g.clone(),
    };
    let (lambda, v) = crate::linalg::min_eigenpair(&g);
    let scale = g.diagonal().iter().map(|z| z.re).fold(1.0, f64::max);
    if lambda <= DEFAULT_POSITIVITY_TOL * scale {
        let words: Vec<Word> = (0..m).map(|i| Word::from_index(i, n)).collect();
        return Err(Error::NotPositive {
            min_eigenvalue: lambda,
            certificate: Box::new(crate::functional::Certificate {
                coefficients: words.into_iter().zip(v.iter().copied()).collect(),
                norm_squared: block.inner(&v, &v).re,
            }),
        });
    }

    let d_sigma = det(&g).re;
    let d_prev = det(&g.view((0, 0), (m - 1, m - 1)).into_owned()).re;
    let norm = (d_prev * d_sigma).sqrt();
    let rows = g.rows(0, m - 1).into_owned();
    let last = m - 1;
    let coeffs = (0..m).map(|j| {
        let minor = rows.clone().remove_column(j);
        let sign = if (last + j) % 2 == 0 { 1.0 } else { -1.0 };
        det(&minor) * (sign / norm)
    });
    Ok(CVec::from_iterator(m, coeffs))
}
