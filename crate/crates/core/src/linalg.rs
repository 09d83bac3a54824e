//! Dense complex matrix helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C = Complex64;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

pub const I: C = C::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn real(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `m - m*` in modulus.
pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(m + m*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix; returns the smallest eigenvalue
/// and a unit eigenvector for it.
pub fn min_eigenpair(m: &CMat) -> (f64, CVec) {
    let eig = hermitian_part(m).symmetric_eigen();
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(idx).into_owned();
    let v = v.unscale(v.norm());
    (lambda, v)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Operator 2-norm.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max.max(1.0)).count()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Serde adapters for the `[re, im]` JSON encoding of complex numbers.
pub mod json {
    use super::{CMat, C};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_pair(z: C) -> [f64; 2] {
        [z.re, z.im]
    }

    pub fn from_pair(p: [f64; 2]) -> C {
        C::new(p[0], p[1])
    }

    pub fn matrix_to_nested(m: &CMat) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| to_pair(m[(i, j)])).collect())
            .collect()
    }

    pub fn nested_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMat, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMat::from_fn(nrows, ncols, |i, j| from_pair(rows[i][j])))
    }

    pub mod complex {
        use super::*;

        pub fn serialize<S: Serializer>(z: &C, s: S) -> Result<S::Ok, S::Error> {
            to_pair(*z).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C, D::Error> {
            <[f64; 2]>::deserialize(d).map(from_pair)
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
            matrix_to_nested(m).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
            let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
            nested_to_matrix(&rows).map_err(serde::de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_hermitian_eigen() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMat::from_row_slice(2, 2, &[real(2.0), I, -I, real(2.0)]);
        let (lambda, v) = min_eigenpair(&m);
        assert!((lambda - 1.0).abs() < 1e-12);
        let mv = &m * &v;
        assert!((mv - v.scale(lambda)).norm() < 1e-12);
        assert!((max_eigenvalue(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        let m = CMat::from_row_slice(2, 2, &[real(3.0), real(0.0), real(0.0), c(0.0, -4.0)]);
        assert!((spectral_norm(&m) - 4.0).abs() < 1e-12);
        assert!((condition_number(&m) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(rank(&m, 1e-12), 2);
    }
}
