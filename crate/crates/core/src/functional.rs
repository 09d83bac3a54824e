//! Moment functionals and their Gram kernels.
//!
//! A functional is stored through its moments. Three symmetry classes are
//! supported:
//!
//! * `hankel`: the self-adjoint case, `K(σ,τ) = s_{I(σ)τ}` with `s_σ = φ(Y_σ)`;
//! * `toeplitz`: the row-isometric case, `K(σ,σα) = c_α`, `K(σα,σ) = conj(c_α)`,
//!   and zero when neither word is a prefix of the other;
//! * `generic`: the kernel is stored entry by entry.
//!
//! `K(σ,τ)` is the inner product `<F_τ, F_σ>` of the monomials, so the
//! polynomial with coefficient vector `p` has squared norm `p* K p`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C};
use crate::words::{self, Word};

/// Default relative threshold for the strict-positivity test.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hankel,
    Toeplitz,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentFunctional {
    n_generators: usize,
    kind: Kind,
    max_degree: usize,
    moments: BTreeMap<Word, C>,
    kernel: BTreeMap<(Word, Word), C>,
}

impl MomentFunctional {
    /// Hankel-kind functional from `s_σ` for every word of length `<= max_degree`.
    pub fn hankel(
        n_generators: usize,
        max_degree: usize,
        moments: BTreeMap<Word, C>,
    ) -> Result<Self> {
        let f = MomentFunctional {
            n_generators,
            kind: Kind::Hankel,
            max_degree,
            moments,
            kernel: BTreeMap::new(),
        };
        f.validate()?;
        Ok(f)
    }

    /// Toeplitz-kind functional from `c_α = K(∅, α)` for every `|α| <= max_degree`.
    pub fn toeplitz(
        n_generators: usize,
        max_degree: usize,
        moments: BTreeMap<Word, C>,
    ) -> Result<Self> {
        let f = MomentFunctional {
            n_generators,
            kind: Kind::Toeplitz,
            max_degree,
            moments,
            kernel: BTreeMap::new(),
        };
        f.validate()?;
        Ok(f)
    }

    /// Generic functional given by kernel entries `K(σ,τ)` with `|σ|,|τ| <= level`.
    /// Only one of `(σ,τ)` and `(τ,σ)` needs to be present.
    pub fn generic(
        n_generators: usize,
        level: usize,
        kernel: BTreeMap<(Word, Word), C>,
    ) -> Result<Self> {
        let moments = kernel
            .iter()
            .filter(|((s, _), _)| s.is_empty())
            .map(|((_, t), v)| (t.clone(), *v))
            .collect();
        let f = MomentFunctional {
            n_generators,
            kind: Kind::Generic,
            max_degree: level,
            moments,
            kernel,
        };
        f.validate()?;
        Ok(f)
    }

    /// One-variable Hankel functional from the sequence `s_0, s_1, …`.
    pub fn univariate(moments: &[C]) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::InvalidInput("no moments given".into()));
        }
        let map = moments
            .iter()
            .enumerate()
            .map(|(j, &s)| (Word::from_letters(vec![1; j]).unwrap(), s))
            .collect();
        Self::hankel(1, moments.len() - 1, map)
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn moments(&self) -> &BTreeMap<Word, C> {
        &self.moments
    }

    /// Stored moment `s_σ` (or `c_α` for the toeplitz kind).
    pub fn moment(&self, w: &Word) -> Result<C> {
        self.moments
            .get(w)
            .copied()
            .ok_or_else(|| Error::DataIncomplete(format!("moment {w}")))
    }

    /// Largest level whose Gram matrix is fully determined by the stored data.
    pub fn max_level(&self) -> usize {
        match self.kind {
            Kind::Hankel => self.max_degree / 2,
            Kind::Toeplitz | Kind::Generic => self.max_degree,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_generators == 0 {
            return Err(Error::InvalidInput("n_generators must be at least 1".into()));
        }
        let n = self.n_generators;
        for w in self.moments.keys() {
            w.check_generators(n)?;
        }
        for (s, t) in self.kernel.keys() {
            s.check_generators(n)?;
            t.check_generators(n)?;
        }
        match self.kind {
            Kind::Hankel | Kind::Toeplitz => {
                for w in words::words_up_to(self.max_degree, n) {
                    if !self.moments.contains_key(&w) {
                        return Err(Error::DataIncomplete(format!("moment {w}")));
                    }
                }
                let unit = self.moments[&Word::empty()];
                if (unit - C::new(1.0, 0.0)).norm() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "functional must be unital: moment e is {unit}, expected 1"
                    )));
                }
            }
            Kind::Generic => {
                let unit = self.kernel_entry(&Word::empty(), &Word::empty())?;
                if (unit - C::new(1.0, 0.0)).norm() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "functional must be unital: kernel e|e is {unit}, expected 1"
                    )));
                }
            }
        }
        match self.kind {
            Kind::Hankel => {
                for (w, &s) in &self.moments {
                    let mirror = w.involution();
                    if let Some(&t) = self.moments.get(&mirror) {
                        if (t - s.conj()).norm() > SYMMETRY_TOL * s.norm().max(1.0) {
                            return Err(Error::InvalidInput(format!(
                                "moments {w} and {mirror} violate s(I(w)) = conj(s(w))"
                            )));
                        }
                    }
                }
            }
            Kind::Generic => {
                for ((s, t), &v) in &self.kernel {
                    if let Some(&u) = self.kernel.get(&(t.clone(), s.clone())) {
                        if (u - v.conj()).norm() > SYMMETRY_TOL * v.norm().max(1.0) {
                            return Err(Error::NotHermitian(format!("kernel entries {s}|{t} and {t}|{s}")));
                        }
                    }
                }
            }
            Kind::Toeplitz => {}
        }
        Ok(())
    }

    /// `K(σ,τ) = <F_τ, F_σ>`.
    pub fn kernel_entry(&self, sigma: &Word, tau: &Word) -> Result<C> {
        match self.kind {
            Kind::Hankel => self.moment(&sigma.involution().concat(tau)),
            Kind::Toeplitz => {
                if let Some(alpha) = tau.strip_prefix(sigma) {
                    self.moment(&alpha)
                } else if let Some(alpha) = sigma.strip_prefix(tau) {
                    self.moment(&alpha).map(|c| c.conj())
                } else {
                    Ok(C::new(0.0, 0.0))
                }
            }
            Kind::Generic => {
                if let Some(&v) = self.kernel.get(&(sigma.clone(), tau.clone())) {
                    Ok(v)
                } else if let Some(&v) = self.kernel.get(&(tau.clone(), sigma.clone())) {
                    Ok(v.conj())
                } else {
                    Err(Error::DataIncomplete(format!("kernel entry {sigma}|{tau}")))
                }
            }
        }
    }

    /// Gram matrix over all words of length `<= level`, graded-lex ordered.
    pub fn gram(&self, level: usize) -> Result<GramMatrix> {
        let words = words::words_up_to(level, self.n_generators);
        let m = words.len();
        let mut entries = CMat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.kernel_entry(&words[i], &words[j])?;
                entries[(i, j)] = v;
                entries[(j, i)] = v.conj();
            }
            entries[(i, i)].im = 0.0;
        }
        Ok(GramMatrix {
            n_generators: self.n_generators,
            level,
            entries,
        })
    }

    pub fn strict_positivity(&self, level: usize, tol: f64) -> Result<Positivity> {
        Ok(self.gram(level)?.positivity(tol))
    }

    /// Moments `s_σ = <X_σ v, v>` of a tuple of Hermitian matrices and a unit
    /// vector, where `X_σ = X_{i1}⋯X_{ik}`.
    pub fn from_representation(xs: &[CMat], v: &CVec, max_degree: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidInput("need at least one matrix".into()));
        }
        let d = v.len();
        for (k, x) in xs.iter().enumerate() {
            if x.nrows() != d || x.ncols() != d {
                return Err(Error::Dimension(format!(
                    "X_{} is {}x{}, vector has length {d}",
                    k + 1,
                    x.nrows(),
                    x.ncols()
                )));
            }
            if linalg::hermitian_defect(x) > 1e-12 * linalg::max_abs(x).max(1.0) {
                return Err(Error::NotHermitian(format!("X_{}", k + 1)));
            }
        }
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("vector must have unit norm, has {}", v.norm())));
        }
        let n = xs.len();
        let words = words::words_up_to(max_degree, n);
        // images[i] = X_{words[i]} v, built by left multiplication
        let mut images: Vec<CVec> = Vec::with_capacity(words.len());
        images.push(v.clone());
        for w in &words[1..] {
            let (k, rest) = w.split_first().unwrap();
            let prev = &images[rest.index(n)];
            images.push(&xs[k as usize - 1] * prev);
        }
        let mut moments = BTreeMap::new();
        for (w, img) in words.iter().zip(&images) {
            let mirror = w.involution();
            if mirror < *w {
                continue;
            }
            let mut s = v.dotc(img);
            if mirror == *w {
                s.im = 0.0;
            }
            moments.insert(mirror.clone(), s.conj());
            moments.insert(w.clone(), s);
        }
        moments.insert(Word::empty(), C::new(1.0, 0.0));
        Self::hankel(n, max_degree, moments)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MomentFile = serde_json::from_str(text)?;
        raw.into_functional()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MomentFile::from(self))?)
    }
}

/// On-disk layout of a moment file.
#[derive(Serialize, Deserialize)]
struct MomentFile {
    n_generators: usize,
    kind: Kind,
    max_degree: usize,
    #[serde(default)]
    moments: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel: Option<BTreeMap<String, [f64; 2]>>,
}

impl MomentFile {
    fn into_functional(self) -> Result<MomentFunctional> {
        let n = self.n_generators;
        let parse_key = |key: &str, what: &str| {
            Word::parse_for(key, n).map_err(|e| Error::InvalidInput(format!("{what} key {key:?}: {e}")))
        };
        let mut moments = BTreeMap::new();
        for (key, pair) in &self.moments {
            moments.insert(parse_key(key, "moments")?, linalg::json::from_pair(*pair));
        }
        match self.kind {
            Kind::Hankel => MomentFunctional::hankel(n, self.max_degree, moments),
            Kind::Toeplitz => MomentFunctional::toeplitz(n, self.max_degree, moments),
            Kind::Generic => {
                let entries = self.kernel.ok_or_else(|| {
                    Error::InvalidInput("generic moment file needs a \"kernel\" object".into())
                })?;
                let mut kernel = BTreeMap::new();
                for (key, pair) in &entries {
                    let (s, t) = key.split_once('|').ok_or_else(|| {
                        Error::InvalidInput(format!("kernel key {key:?} must have the form \"σ|τ\""))
                    })?;
                    kernel.insert(
                        (parse_key(s, "kernel")?, parse_key(t, "kernel")?),
                        linalg::json::from_pair(*pair),
                    );
                }
                MomentFunctional::generic(n, self.max_degree, kernel)
            }
        }
    }
}

impl From<&MomentFunctional> for MomentFile {
    fn from(f: &MomentFunctional) -> Self {
        let moments = f
            .moments
            .iter()
            .map(|(w, &s)| (w.to_string(), linalg::json::to_pair(s)))
            .collect();
        let kernel = (f.kind == Kind::Generic).then(|| {
            f.kernel
                .iter()
                .map(|((s, t), &v)| (format!("{s}|{t}"), linalg::json::to_pair(v)))
                .collect()
        });
        MomentFile {
            n_generators: f.n_generators,
            kind: f.kind,
            max_degree: f.max_degree,
            moments,
            kernel,
        }
    }
}

/// Hermitian Gram matrix `[K(σ,τ)]` over the words of length `<= level`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub n_generators: usize,
    pub level: usize,
    pub entries: CMat,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn words(&self) -> Vec<Word> {
        words::words_up_to(self.level, self.n_generators)
    }

    pub fn entry(&self, sigma: &Word, tau: &Word) -> C {
        let n = self.n_generators;
        self.entries[(sigma.index(n), tau.index(n))]
    }

    /// `<p, q>` for coefficient vectors over the same word range.
    pub fn inner(&self, p: &CVec, q: &CVec) -> C {
        q.dotc(&(&self.entries * p))
    }

    /// Restriction to a lower level.
    pub fn truncate(&self, level: usize) -> GramMatrix {
        let m = words::count_up_to(level, self.n_generators);
        GramMatrix {
            n_generators: self.n_generators,
            level,
            entries: self.entries.view((0, 0), (m, m)).into_owned(),
        }
    }

    /// Eigenvalue test for strict positivity: passes iff
    /// `λ_min > tol · max(1, largest diagonal entry)`.
    pub fn positivity(&self, tol: f64) -> Positivity {
        let (lambda, v) = linalg::min_eigenpair(&self.entries);
        let scale = self
            .entries
            .diagonal()
            .iter()
            .map(|z| z.re)
            .fold(1.0, f64::max);
        if lambda > tol * scale {
            Positivity::Ok {
                min_eigenvalue: lambda,
            }
        } else {
            Positivity::Fail {
                min_eigenvalue: lambda,
                certificate: Certificate::from_vector(&self.words(), &v, self.inner(&v, &v).re),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Positivity {
    Ok { min_eigenvalue: f64 },
    Fail { min_eigenvalue: f64, certificate: Certificate },
}

impl Positivity {
    pub fn is_ok(&self) -> bool {
        matches!(self, Positivity::Ok { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Positivity::Ok { min_eigenvalue } | Positivity::Fail { min_eigenvalue, .. } => *min_eigenvalue,
        }
    }

    /// Converts a failure into [`Error::NotPositive`].
    pub fn into_result(self) -> Result<f64> {
        match self {
            Positivity::Ok { min_eigenvalue } => Ok(min_eigenvalue),
            Positivity::Fail {
                min_eigenvalue,
                certificate,
            } => Err(Error::NotPositive {
                min_eigenvalue,
                certificate: Box::new(certificate),
            }),
        }
    }
}

/// A unit-norm polynomial with near-zero (or negative) norm under the functional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "serialize_coefficients")]
    pub coefficients: Vec<(Word, C)>,
    /// `<P, P>` for the certificate polynomial `P`.
    pub norm_squared: f64,
}

fn serialize_coefficients<S: serde::Serializer>(
    coeffs: &[(Word, C)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(coeffs.len()))?;
    for (w, z) in coeffs {
        map.serialize_entry(&w.to_string(), &linalg::json::to_pair(*z))?;
    }
    map.end()
}

impl Certificate {
    fn from_vector(words: &[Word], v: &CVec, norm_squared: f64) -> Self {
        Certificate {
            coefficients: words.iter().cloned().zip(v.iter().copied()).collect(),
            norm_squared,
        }
    }

    /// Word carrying the largest coefficient in modulus.
    pub fn dominant_word(&self) -> &Word {
        &self
            .coefficients
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty certificate")
            .0
    }

    pub fn vector(&self) -> CVec {
        DVector::from_iterator(self.coefficients.len(), self.coefficients.iter().map(|c| c.1))
    }
}
