//! Ball points that single out one word.
//!
//! For `σ = i_1…i_k` and `E = E_1^{⊕2k}` (`E_1 = C^u`) there are `2k` tuples
//! `Z^p` built from the block matrix units `E_{ij} = e_{ij} ⊗ I_u` such that
//! `Z^p_σ` is a single scaled matrix unit while `Z^p_τ = 0` for every other
//! word of length `>= k`. Stacking the adjoints `Z^{*p}_σ` side by side gives
//! an operator with range all of `E`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C};
use crate::words::{self, Word};

use super::tuple::{OperatorTuple, Region};

/// `E_{ij}` (1-based) of order `2k·u`.
fn unit(i: usize, j: usize, k: usize, u: usize) -> CMat {
    let mut m = CMat::zeros(2 * k * u, 2 * k * u);
    for t in 0..u {
        m[((i - 1) * u + t, (j - 1) * u + t)] = C::new(1.0, 0.0);
    }
    m
}

/// The `2|σ|` tuples over `n_generators` letters, acting on `C^{2|σ|·unit_dim}`.
///
/// For `p <= k`: `Z^{*p}_s = 2^{−1/2} Σ_{r ∈ J_s} E_{r+p−1, r+p}` with
/// `J_s = {l : i_{k+1−l} = s}`. For `p = k + q`:
/// `Z^{*p}_s = 2^{−1/2} Σ_{r ∈ K_s} E_{r+q, r+q−1}` with `K_s = {l : i_l = s}`.
pub fn separating_tuples(sigma: &Word, n_generators: usize, unit_dim: usize) -> Result<Vec<OperatorTuple>> {
    if sigma.is_empty() {
        return Err(Error::InvalidInput("separating tuples need a nonempty word".into()));
    }
    if unit_dim == 0 {
        return Err(Error::InvalidInput("unit dimension must be positive".into()));
    }
    sigma.check_generators(n_generators)?;
    let k = sigma.len();
    let letters = sigma.letters();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * k);
    for p in 1..=2 * k {
        let mats = (1..=n_generators as u32)
            .map(|s| {
                let mut adj = CMat::zeros(2 * k * unit_dim, 2 * k * unit_dim);
                for r in 1..=k {
                    if p <= k {
                        if letters[k - r] == s {
                            adj += unit(r + p - 1, r + p, k, unit_dim);
                        }
                    } else if letters[r - 1] == s {
                        let q = p - k;
                        adj += unit(r + q, r + q - 1, k, unit_dim);
                    }
                }
                (adj * C::new(h, 0.0)).adjoint()
            })
            .collect();
        out.push(OperatorTuple::new(mats)?.tagged(Region::Ball, 0.0)?);
    }
    Ok(out)
}

/// Outcome of checking the defining properties of [`separating_tuples`].
#[derive(Clone, Debug, Serialize)]
pub struct SeparatingReport {
    pub word: String,
    pub n_generators: usize,
    pub unit_dim: usize,
    /// `max_p ‖Z^{*p}_σ − 2^{−k/2} E_{target(p)}‖_max`.
    pub isolation_error: f64,
    /// Largest entry of `Z^p_τ` over all `τ ≠ σ` with `|τ| ∈ {k, k+1}`.
    pub leakage: f64,
    /// Words checked for leakage.
    pub words_checked: usize,
    /// Smallest `λ_min(I − Σ_s Z^p_s Z^{p*}_s)` over `p`.
    pub min_ball_margin: f64,
    pub stacked_rank: usize,
    pub dimension: usize,
}

impl SeparatingReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.isolation_error <= tol
            && self.leakage <= tol
            && (self.min_ball_margin - 0.5).abs() <= tol
            && self.stacked_rank == self.dimension
    }

    pub fn check(sigma: &Word, n_generators: usize, unit_dim: usize) -> Result<Self> {
        let tuples = separating_tuples(sigma, n_generators, unit_dim)?;
        let k = sigma.len();
        let dim = 2 * k * unit_dim;
        let scale = 2f64.powf(-(k as f64) / 2.0);
        let mut isolation_error = 0.0f64;
        let mut leakage = 0.0f64;
        let mut words_checked = 0;
        let mut min_ball_margin = f64::INFINITY;
        let mut stacked = CMat::zeros(dim, dim * 2 * k);
        for (idx, z) in tuples.iter().enumerate() {
            let p = idx + 1;
            let expected = if p <= k {
                unit(p, k + p, k, unit_dim)
            } else {
                unit(p, p - k, k, unit_dim)
            } * C::new(scale, 0.0);
            let adj = z.word_product(sigma).adjoint();
            isolation_error = isolation_error.max(linalg::max_abs(&(&adj - expected)));
            stacked.view_mut((0, idx * dim), (dim, dim)).copy_from(&adj);
            for len in [k, k + 1] {
                for tau in words::enumerate_level(len, n_generators) {
                    if tau == *sigma {
                        continue;
                    }
                    if idx == 0 {
                        words_checked += 1;
                    }
                    leakage = leakage.max(linalg::max_abs(&z.word_product(&tau)));
                }
            }
            min_ball_margin = min_ball_margin.min(z.membership(Region::Ball, 0.0).lambda_min);
        }
        Ok(SeparatingReport {
            word: sigma.to_string(),
            n_generators,
            unit_dim,
            isolation_error,
            leakage,
            words_checked,
            min_ball_margin,
            stacked_rank: linalg::rank(&stacked, 1e-10),
            dimension: dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn single_letter() {
        let t = separating_tuples(&w("1"), 1, 1).unwrap();
        assert_eq!(t.len(), 2);
        let adj = t[0].mat(1).adjoint();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(adj, unit(1, 2, 1, 1) * C::new(h, 0.0));
    }

    #[test]
    fn two_letters_isolate() {
        let t = separating_tuples(&w("1.2"), 2, 1).unwrap();
        let adj = t[0].word_product(&w("1.2")).adjoint();
        assert!(linalg::max_abs(&(adj - unit(1, 3, 2, 1) * C::new(0.5, 0.0))) < 1e-15);
        for other in ["1.1", "2.1", "2.2"] {
            assert_eq!(linalg::max_abs(&t[0].word_product(&w(other))), 0.0, "{other}");
        }
    }

    #[test]
    fn reports_pass() {
        for (word, n, u) in [("1", 1, 1), ("1.2", 2, 2), ("2.1.1", 2, 1), ("3.1.3", 3, 1)] {
            let r = SeparatingReport::check(&w(word), n, u).unwrap();
            assert!(r.passes(1e-15), "{r:?}");
        }
    }

    #[test]
    fn empty_word_rejected() {
        assert!(matches!(separating_tuples(&Word::empty(), 2, 1), Err(Error::InvalidInput(_))));
    }
}
