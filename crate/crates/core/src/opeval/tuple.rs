//! Operator tuples, the noncommutative ball and Siegel domains, and the
//! Cayley transform between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C, I};
use crate::words::{self, Word};

/// Default strictness margin on `λ_min` for membership gates.
pub const DEFAULT_MARGIN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Ball,
    Siegel,
    Unchecked,
}

impl Region {
    fn name(self) -> &'static str {
        match self {
            Region::Ball => "noncommutative unit ball",
            Region::Siegel => "Siegel upper half-space",
            Region::Unchecked => "unchecked region",
        }
    }
}

/// An `N`-tuple of `d×d` complex matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    mats: Vec<CMat>,
    region: Region,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub lambda_min: f64,
}

impl OperatorTuple {
    /// A tuple with no region claim. Matrices must be square and of equal size.
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::InvalidInput("an operator tuple needs at least one matrix".into()));
        };
        let d = first.nrows();
        for (k, m) in mats.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!(
                    "matrix {} is {}x{}, expected {d}x{d}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(OperatorTuple {
            mats,
            region: Region::Unchecked,
        })
    }

    /// A tuple that must lie in the ball with `λ_min(I − Σ Z_k Z_k*) > margin`.
    pub fn ball(mats: Vec<CMat>, margin: f64) -> Result<Self> {
        Self::new(mats)?.tagged(Region::Ball, margin)
    }

    /// A tuple that must lie in the Siegel domain with the given margin.
    pub fn siegel(mats: Vec<CMat>, margin: f64) -> Result<Self> {
        Self::new(mats)?.tagged(Region::Siegel, margin)
    }

    /// Checks membership and records the region.
    pub fn tagged(mut self, region: Region, margin: f64) -> Result<Self> {
        if region != Region::Unchecked {
            let m = self.membership(region, margin);
            if !m.inside {
                return Err(Error::Membership {
                    region: region.name(),
                    lambda_min: m.lambda_min,
                });
            }
        }
        self.region = region;
        Ok(self)
    }

    /// Scalar tuple (`d = 1`).
    pub fn scalars(values: &[C]) -> Result<Self> {
        Self::new(values.iter().map(|&z| CMat::from_element(1, 1, z)).collect())
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn d(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn mat(&self, k: usize) -> &CMat {
        &self.mats[k - 1]
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// `(Z|Z) = Σ_k Z_k Z_k*`.
    pub fn row_gramian(&self) -> CMat {
        self.mats
            .iter()
            .fold(CMat::zeros(self.d(), self.d()), |acc, z| acc + z * z.adjoint())
    }

    /// Smallest eigenvalue of the defining Hermitian matrix of `region`.
    pub fn membership(&self, region: Region, margin: f64) -> Membership {
        let lambda_min = match region {
            Region::Ball => linalg::min_eigenvalue(&(linalg::identity(self.d()) - self.row_gramian())),
            Region::Siegel => {
                let n = self.n();
                let wn = &self.mats[n - 1];
                let imag = (wn - wn.adjoint()) * (C::new(0.0, -0.5));
                let rest = self.mats[..n - 1]
                    .iter()
                    .fold(CMat::zeros(self.d(), self.d()), |acc, w| acc + w * w.adjoint());
                linalg::min_eigenvalue(&(imag - rest))
            }
            Region::Unchecked => f64::INFINITY,
        };
        Membership {
            inside: lambda_min > margin,
            lambda_min,
        }
    }

    /// `Z_σ = Z_{i1}⋯Z_{ik}`, identity for the empty word.
    pub fn word_product(&self, w: &Word) -> CMat {
        w.letters()
            .iter()
            .fold(linalg::identity(self.d()), |acc, &l| acc * &self.mats[l as usize - 1])
    }

    /// `Z_τ` for every word of length `<= level`, in graded-lex order.
    pub fn word_powers(&self, level: usize) -> Vec<CMat> {
        let n = self.n();
        let words = words::words_up_to(level, n);
        let mut out: Vec<CMat> = Vec::with_capacity(words.len());
        out.push(linalg::identity(self.d()));
        for w in &words[1..] {
            let (k, rest) = w.split_first().unwrap();
            out.push(&self.mats[k as usize - 1] * &out[rest.index(n)]);
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PointFile = serde_json::from_str(text)?;
        raw.into_tuple()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PointFile::from(self))?)
    }
}

/// On-disk layout of a point file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub region: Region,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl PointFile {
    pub fn into_tuple(self) -> Result<OperatorTuple> {
        if self.matrices.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "\"N\" is {} but {} matrices were given",
                self.n,
                self.matrices.len()
            )));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                let m = linalg::json::nested_to_matrix(rows)
                    .map_err(|e| Error::InvalidInput(format!("matrices[{k}]: {e}")))?;
                if m.nrows() != self.d || m.ncols() != self.d {
                    return Err(Error::InvalidInput(format!(
                        "matrices[{k}] is {}x{}, \"d\" is {}",
                        m.nrows(),
                        m.ncols(),
                        self.d
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorTuple::new(mats)?.tagged(self.region, DEFAULT_MARGIN)
    }
}

impl From<&OperatorTuple> for PointFile {
    fn from(t: &OperatorTuple) -> Self {
        PointFile {
            n: t.n(),
            d: t.d(),
            region: t.region,
            matrices: t.mats.iter().map(linalg::json::matrix_to_nested).collect(),
        }
    }
}

/// Cayley transform from the ball onto the Siegel domain:
/// `W_k = (I+Z_N)⁻¹Z_k` for `k < N`, `W_N = i(I+Z_N)⁻¹(I−Z_N)`.
pub fn cayley(z: &OperatorTuple) -> Result<OperatorTuple> {
    let m = z.membership(Region::Ball, DEFAULT_MARGIN);
    if !m.inside {
        return Err(Error::Membership {
            region: Region::Ball.name(),
            lambda_min: m.lambda_min,
        });
    }
    let n = z.n();
    let id = linalg::identity(z.d());
    let zn = &z.mats[n - 1];
    let inv = linalg::inverse(&(&id + zn)).ok_or_else(|| Error::Consistency {
        what: "I + Z_N is singular for a ball point".into(),
        residual: f64::INFINITY,
    })?;
    let mut mats: Vec<CMat> = z.mats[..n - 1].iter().map(|zk| &inv * zk).collect();
    mats.push((&inv * (&id - zn)) * I);
    OperatorTuple::new(mats)?.tagged(Region::Siegel, 0.0)
}

/// Inverse Cayley transform:
/// `Z_k = 2i(i+W_N)⁻¹W_k` for `k < N`, `Z_N = (i+W_N)⁻¹(i−W_N)`.
pub fn cayley_inverse(w: &OperatorTuple) -> Result<OperatorTuple> {
    let m = w.membership(Region::Siegel, DEFAULT_MARGIN);
    if !m.inside {
        return Err(Error::Membership {
            region: Region::Siegel.name(),
            lambda_min: m.lambda_min,
        });
    }
    let inv = siegel_resolvent(w)?;
    let n = w.n();
    let id = linalg::identity(w.d());
    let wn = &w.mats[n - 1];
    let mut mats: Vec<CMat> = w.mats[..n - 1]
        .iter()
        .map(|wk| (&inv * wk) * C::new(0.0, 2.0))
        .collect();
    mats.push(&inv * (id * I - wn));
    OperatorTuple::new(mats)?.tagged(Region::Ball, 0.0)
}

/// `(i + W_N)⁻¹`, invertible on the Siegel domain.
pub fn siegel_resolvent(w: &OperatorTuple) -> Result<CMat> {
    let wn = &w.mats[w.n() - 1];
    linalg::inverse(&(linalg::identity(w.d()) * I + wn)).ok_or_else(|| Error::Consistency {
        what: "i + W_N is singular".into(),
        residual: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};

    #[test]
    fn membership_examples() {
        let z = OperatorTuple::scalars(&[real(0.5), real(0.5)]).unwrap();
        let m = z.membership(Region::Ball, DEFAULT_MARGIN);
        assert!(m.inside);
        assert!((m.lambda_min - 0.5).abs() < 1e-15);

        let w = OperatorTuple::scalars(&[I]).unwrap();
        assert!(w.membership(Region::Siegel, DEFAULT_MARGIN).inside);

        let edge = OperatorTuple::scalars(&[real(1.0), real(0.0)]).unwrap();
        let m = edge.membership(Region::Ball, DEFAULT_MARGIN);
        assert!(!m.inside);
        assert!(m.lambda_min.abs() < 1e-15);
        assert!(OperatorTuple::ball(edge.mats().to_vec(), DEFAULT_MARGIN).is_err());
    }

    #[test]
    fn non_square_rejected() {
        let bad = OperatorTuple::new(vec![CMat::zeros(2, 3)]);
        assert!(matches!(bad, Err(Error::Dimension(_))));
        let mixed = OperatorTuple::new(vec![CMat::zeros(2, 2), CMat::zeros(3, 3)]);
        assert!(matches!(mixed, Err(Error::Dimension(_))));
    }

    #[test]
    fn cayley_of_zero_is_i() {
        let z = OperatorTuple::ball(vec![CMat::zeros(2, 2); 3], DEFAULT_MARGIN).unwrap();
        let w = cayley(&z).unwrap();
        assert_eq!(w.mat(1), &CMat::zeros(2, 2));
        assert_eq!(w.mat(2), &CMat::zeros(2, 2));
        assert_eq!(w.mat(3), &(linalg::identity(2) * I));
        assert_eq!(w.region(), Region::Siegel);
    }

    #[test]
    fn scalar_cayley() {
        let z = OperatorTuple::scalars(&[real(0.5)]).unwrap();
        let w = cayley(&z).unwrap();
        assert!((w.mat(1)[(0, 0)] - c(0.0, 1.0 / 3.0)).norm() < 1e-15);
        let back = cayley_inverse(&w).unwrap();
        assert!((back.mat(1)[(0, 0)] - real(0.5)).norm() < 1e-15);
    }

    #[test]
    fn point_file_roundtrip() {
        let z = OperatorTuple::ball(
            vec![
                CMat::from_row_slice(2, 2, &[c(0.1, 0.2), real(0.0), real(0.3), c(0.0, -0.1)]),
                CMat::from_row_slice(2, 2, &[real(0.2), c(0.1, 0.1), real(0.0), real(0.1)]),
            ],
            DEFAULT_MARGIN,
        )
        .unwrap();
        let text = z.to_json().unwrap();
        assert!(text.contains("\"N\": 2"));
        assert_eq!(OperatorTuple::from_json(&text).unwrap(), z);

        let outside = r#"{"N": 1, "d": 1, "region": "ball", "matrices": [[[[2.0, 0.0]]]]}"#;
        assert!(matches!(OperatorTuple::from_json(outside), Err(Error::Membership { .. })));
        let wrong_d = r#"{"N": 1, "d": 2, "region": "unchecked", "matrices": [[[[2.0, 0.0]]]]}"#;
        assert!(matches!(OperatorTuple::from_json(wrong_d), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn word_powers_match_products() {
        let z = OperatorTuple::new(vec![
            CMat::from_row_slice(2, 2, &[c(0.1, 0.2), real(1.0), real(0.3), c(0.0, -0.1)]),
            CMat::from_row_slice(2, 2, &[real(0.2), c(0.1, 0.1), real(-2.0), real(0.1)]),
        ])
        .unwrap();
        let powers = z.word_powers(3);
        for (w, p) in words::words_up_to(3, 2).iter().zip(&powers) {
            assert!((p - z.word_product(w)).norm() < 1e-14);
        }
    }
}
