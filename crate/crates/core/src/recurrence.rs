//! Three-term recurrence `Y_k Φ_n = Φ_{n+1} B_{n,k} + Φ_n A_{n,k} + Φ_{n−1} B*_{n−1,k}`
//! for Hankel-kind functionals, and its inverse: rebuilding the orthonormal
//! polynomials and the moments from the coefficient blocks.
//!
//! `Φ_n` is the row of `φ_σ`, `|σ| = n`, in graded-lex order. Block rows are
//! indexed by the target word `τ`, block columns by the source word `σ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{GramMatrix, MomentFunctional};
use crate::linalg::{self, CMat, C};
use crate::orthopoly::OrthoBasis;
use crate::words::{self, Word};

/// Tolerance on the Hermitian defect of extracted `A_{n,k}`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on the recurrence residual and on the structure of `B_n`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCoeffs {
    n_generators: usize,
    levels: usize,
    /// `a[n][k-1]`: `N^n × N^n`.
    a: Vec<Vec<CMat>>,
    /// `b[n][k-1]`: `N^{n+1} × N^n`.
    b: Vec<Vec<CMat>>,
}

impl RecurrenceCoeffs {
    /// Checks block shapes only; the structural conditions are in [`validate`](Self::validate).
    pub fn new(n_generators: usize, a: Vec<Vec<CMat>>, b: Vec<Vec<CMat>>) -> Result<Self> {
        if n_generators == 0 {
            return Err(Error::InvalidInput("n_generators must be at least 1".into()));
        }
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "{} levels of A blocks but {} of B blocks",
                a.len(),
                b.len()
            )));
        }
        let n = n_generators;
        for (level, (ar, br)) in a.iter().zip(&b).enumerate() {
            if ar.len() != n || br.len() != n {
                return Err(Error::Dimension(format!("level {level} needs {n} blocks of each kind")));
            }
            let rows = words::level_size(level, n);
            for k in 0..n {
                if ar[k].shape() != (rows, rows) {
                    return Err(Error::Dimension(format!(
                        "A_{{{level},{}}} is {:?}, expected {rows}x{rows}",
                        k + 1,
                        ar[k].shape()
                    )));
                }
                if br[k].shape() != (rows * n, rows) {
                    return Err(Error::Dimension(format!(
                        "B_{{{level},{}}} is {:?}, expected {}x{rows}",
                        k + 1,
                        br[k].shape(),
                        rows * n
                    )));
                }
            }
        }
        Ok(RecurrenceCoeffs {
            n_generators,
            levels: a.len(),
            a,
            b,
        })
    }

    /// One-variable coefficients: `Y φ_n = b_n φ_{n+1} + a_n φ_n + b_{n−1} φ_{n−1}`.
    pub fn univariate(a: &[C], b: &[C]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension("need as many diagonal as off-diagonal entries".into()));
        }
        let wrap = |z: &C| vec![CMat::from_element(1, 1, *z)];
        Self::new(1, a.iter().map(wrap).collect(), b.iter().map(wrap).collect())
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `A_{n,k}`, `k` 1-based.
    pub fn a(&self, n: usize, k: usize) -> &CMat {
        &self.a[n][k - 1]
    }

    /// `B_{n,k}`, `k` 1-based.
    pub fn b(&self, n: usize, k: usize) -> &CMat {
        &self.b[n][k - 1]
    }

    pub fn a_mut(&mut self, n: usize, k: usize) -> &mut CMat {
        &mut self.a[n][k - 1]
    }

    pub fn b_mut(&mut self, n: usize, k: usize) -> &mut CMat {
        &mut self.b[n][k - 1]
    }

    /// `B_n = [B_{n,1} … B_{n,N}]`, square of order `N^{n+1}`; column `kσ`
    /// holds the column `σ` of `B_{n,k}`.
    pub fn b_block(&self, n: usize) -> CMat {
        hstack(&self.b[n])
    }

    /// `[A_{n,1} … A_{n,N}]`.
    pub fn a_row(&self, n: usize) -> CMat {
        hstack(&self.a[n])
    }

    pub fn truncate(&self, levels: usize) -> Result<Self> {
        self.require_levels(levels)?;
        Ok(RecurrenceCoeffs {
            n_generators: self.n_generators,
            levels,
            a: self.a[..levels].to_vec(),
            b: self.b[..levels].to_vec(),
        })
    }

    pub fn require_levels(&self, needed: usize) -> Result<()> {
        if needed > self.levels {
            return Err(Error::LevelShortfall {
                needed,
                available: self.levels,
            });
        }
        Ok(())
    }

    /// Hermitian `A_{n,k}`; upper triangular `B_n` with real positive diagonal
    /// and condition number at most `cond_bound`.
    pub fn validate(&self, cond_bound: f64) -> Result<()> {
        let n = self.n_generators;
        for level in 0..self.levels {
            for k in 1..=n {
                let a = self.a(level, k);
                let scale = linalg::max_abs(a).max(1.0);
                if linalg::hermitian_defect(a) > HERMITIAN_TOL * scale {
                    return Err(Error::InvalidCoefficients {
                        n: level,
                        k,
                        reason: format!("A is not Hermitian (defect {:e})", linalg::hermitian_defect(a)),
                    });
                }
            }
            let block = self.b_block(level);
            let scale = linalg::max_abs(&block).max(1.0);
            let cols = words::level_size(level, n);
            for i in 0..block.nrows() {
                let k = i / cols + 1;
                let diag = block[(i, i)];
                if diag.re <= 0.0 || diag.im.abs() > RESIDUAL_TOL * scale {
                    return Err(Error::InvalidCoefficients {
                        n: level,
                        k,
                        reason: format!("diagonal entry {i} of B_n is {diag}, must be real and positive"),
                    });
                }
                for j in 0..i {
                    if block[(i, j)].norm() > RESIDUAL_TOL * scale {
                        return Err(Error::InvalidCoefficients {
                            n: level,
                            k: j / cols + 1,
                            reason: format!("B_n is not upper triangular: entry ({i},{j}) is {}", block[(i, j)]),
                        });
                    }
                }
            }
            let condition = linalg::condition_number(&block);
            if !(condition <= cond_bound) {
                return Err(Error::IllConditioned {
                    n: level,
                    condition,
                    bound: cond_bound,
                });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CoeffFile = serde_json::from_str(text)?;
        raw.into_coeffs()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CoeffFile::from(self))?)
    }
}

fn hstack(blocks: &[CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols = blocks[0].ncols();
    let mut out = CMat::zeros(rows, cols * blocks.len());
    for (k, blk) in blocks.iter().enumerate() {
        out.view_mut((0, k * cols), (rows, cols)).copy_from(blk);
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CoeffFile {
    n_generators: usize,
    levels: usize,
    #[serde(rename = "A")]
    a: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    #[serde(rename = "B")]
    b: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl CoeffFile {
    fn into_coeffs(self) -> Result<RecurrenceCoeffs> {
        let n = self.n_generators;
        let read = |map: &BTreeMap<String, Vec<Vec<[f64; 2]>>>, name: &str| -> Result<Vec<Vec<CMat>>> {
            for key in map.keys() {
                let ok = parse_key(key).is_some_and(|(l, k)| l < self.levels && (1..=n).contains(&k));
                if !ok {
                    return Err(Error::InvalidInput(format!(
                        "{name} key {key:?} is not \"n,k\" with n < {} and 1 <= k <= {n}",
                        self.levels
                    )));
                }
            }
            (0..self.levels)
                .map(|l| {
                    (1..=n)
                        .map(|k| {
                            let key = format!("{l},{k}");
                            let rows = map.get(&key).ok_or_else(|| {
                                Error::DataIncomplete(format!("{name} block \"{key}\""))
                            })?;
                            linalg::json::nested_to_matrix(rows)
                                .map_err(|e| Error::InvalidInput(format!("{name} key \"{key}\": {e}")))
                        })
                        .collect()
                })
                .collect()
        };
        let a = read(&self.a, "A")?;
        let b = read(&self.b, "B")?;
        RecurrenceCoeffs::new(n, a, b)
    }
}

fn parse_key(key: &str) -> Option<(usize, usize)> {
    let (l, k) = key.split_once(',')?;
    Some((l.trim().parse().ok()?, k.trim().parse().ok()?))
}

impl From<&RecurrenceCoeffs> for CoeffFile {
    fn from(c: &RecurrenceCoeffs) -> Self {
        let dump = |blocks: &Vec<Vec<CMat>>| {
            let mut map = BTreeMap::new();
            for (l, row) in blocks.iter().enumerate() {
                for (k, m) in row.iter().enumerate() {
                    map.insert(format!("{l},{}", k + 1), linalg::json::matrix_to_nested(m));
                }
            }
            map
        };
        CoeffFile {
            n_generators: c.n_generators,
            levels: c.levels,
            a: dump(&c.a),
            b: dump(&c.b),
        }
    }
}

/// Coefficient vectors of `Y_k φ_σ` for every `σ` of length `level`, as the
/// columns of a `size × N^level` matrix (`size` = words up to `level + 1`).
fn shifted_level(basis: &OrthoBasis, level: usize, k: u32, size: usize) -> CMat {
    let n = basis.n_generators();
    let first = words::level_offset(level, n);
    let width = words::level_size(level, n);
    let mut out = CMat::zeros(size, width);
    for s in 0..width {
        let row = first + s;
        for j in 0..=row {
            let v = basis.matrix()[(row, j)];
            if v != C::new(0.0, 0.0) {
                out[(words::shifted_index(k, j, n), s)] = v;
            }
        }
    }
    out
}

/// Columns `φ_σ` for `|σ| = level`, padded to `size` rows.
fn level_columns(basis: &OrthoBasis, level: usize, size: usize) -> CMat {
    let n = basis.n_generators();
    let first = words::level_offset(level, n);
    let width = words::level_size(level, n);
    let mut out = CMat::zeros(size, width);
    for s in 0..width {
        for j in 0..=first + s {
            out[(j, s)] = basis.matrix()[(first + s, j)];
        }
    }
    out
}

/// Recurrence blocks of `f` for levels `0..levels`, read off as
/// `A_{n,k}[τ,σ] = <Y_k φ_σ, φ_τ>` (`|τ| = n`) and `B_{n,k}[τ,σ]` likewise with
/// `|τ| = n + 1`. Needs the basis and the Gram matrix up to level `levels`.
pub fn extract(f: &MomentFunctional, basis: &OrthoBasis, levels: usize) -> Result<RecurrenceCoeffs> {
    let n = f.n_generators();
    if basis.n_generators() != n {
        return Err(Error::Dimension(format!(
            "basis has {} generators, functional has {n}",
            basis.n_generators()
        )));
    }
    if levels == 0 {
        return Err(Error::InvalidInput("levels must be at least 1".into()));
    }
    basis.require_level(levels)?;
    let gram = f.gram(levels)?;
    let basis = basis.truncate(levels)?;
    let defect = basis.orthonormality_residual(&gram);
    if defect > 1e-8 {
        return Err(Error::Consistency {
            what: "basis is not orthonormal under the functional".into(),
            residual: defect,
        });
    }

    let size = gram.size();
    // row τ of (conj(Acoef) K) is φ_τ^H K
    let left = basis.matrix().map(|z| z.conj()) * &gram.entries;
    let mut a_blocks = Vec::with_capacity(levels);
    let mut b_blocks = Vec::with_capacity(levels);
    for level in 0..levels {
        let here = words::level_offset(level, n);
        let width = words::level_size(level, n);
        let next = words::level_offset(level + 1, n);
        let mut a_row = Vec::with_capacity(n);
        let mut b_row = Vec::with_capacity(n);
        for k in 1..=n as u32 {
            let shifted = shifted_level(&basis, level, k, size);
            let a = left.rows(here, width) * &shifted;
            let b = left.rows(next, width * n) * &shifted;
            let scale = linalg::max_abs(&a).max(1.0);
            let defect = linalg::hermitian_defect(&a);
            if defect > HERMITIAN_TOL * scale {
                return Err(Error::Consistency {
                    what: format!("A_{{{level},{k}}} is not Hermitian"),
                    residual: defect,
                });
            }
            a_row.push(linalg::hermitian_part(&a));
            b_row.push(b);
        }
        a_blocks.push(a_row);
        b_blocks.push(b_row);
    }

    // clean the structurally zero part of B_n after checking it is negligible
    for level in 0..levels {
        let width = words::level_size(level, n);
        let scale = b_blocks[level].iter().map(linalg::max_abs).fold(1.0, f64::max);
        for k in 0..n {
            let blk = &mut b_blocks[level][k];
            for col in 0..width {
                let diag_row = k * width + col;
                for row in diag_row + 1..width * n {
                    let v = blk[(row, col)];
                    if v.norm() > RESIDUAL_TOL * scale {
                        return Err(Error::Consistency {
                            what: format!("B_{level} is not upper triangular at row {row}, column {diag_row}"),
                            residual: v.norm(),
                        });
                    }
                    blk[(row, col)] = C::new(0.0, 0.0);
                }
                // B_n[kσ,kσ] = a_{σσ} / a_{kσ,kσ}
                let sigma = words::level_offset(level, n) + col;
                let target = words::level_offset(level + 1, n) + diag_row;
                let expected = basis.matrix()[(sigma, sigma)].re / basis.matrix()[(target, target)].re;
                let got = blk[(diag_row, col)];
                let err = (got - C::new(expected, 0.0)).norm();
                if err > RESIDUAL_TOL * expected.max(1.0) {
                    return Err(Error::Consistency {
                        what: format!("diagonal entry ({diag_row},{diag_row}) of B_{level}"),
                        residual: err,
                    });
                }
                blk[(diag_row, col)] = C::new(got.re, 0.0);
            }
        }
    }

    let coeffs = RecurrenceCoeffs::new(n, a_blocks, b_blocks)?;
    let residual = residual_check(&basis, &coeffs)?;
    let scale = linalg::max_abs(basis.matrix()).max(1.0);
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::Consistency {
            what: "recurrence identity".into(),
            residual,
        });
    }
    Ok(coeffs)
}

/// Largest coefficient of `Y_kΦ_n − Φ_{n+1}B_{n,k} − Φ_nA_{n,k} − Φ_{n−1}B*_{n−1,k}`
/// over `n < levels`, `k <= N`, with `Φ_{−1} = 0`.
pub fn residual_check(basis: &OrthoBasis, coeffs: &RecurrenceCoeffs) -> Result<f64> {
    let n = coeffs.n_generators();
    if basis.n_generators() != n {
        return Err(Error::Dimension(format!(
            "basis has {} generators, coefficients have {n}",
            basis.n_generators()
        )));
    }
    let levels = coeffs.levels();
    basis.require_level(levels)?;
    let size = words::count_up_to(levels, n);
    let mut worst = 0.0f64;
    for level in 0..levels {
        let phi_here = level_columns(basis, level, size);
        let phi_next = level_columns(basis, level + 1, size);
        for k in 1..=n {
            let mut r = shifted_level(basis, level, k as u32, size)
                - &phi_next * coeffs.b(level, k)
                - &phi_here * coeffs.a(level, k);
            if level > 0 {
                r -= level_columns(basis, level - 1, size) * coeffs.b(level - 1, k).adjoint();
            }
            worst = worst.max(linalg::max_abs(&r));
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct FavardOptions {
    /// Largest admissible condition number of `B_n`.
    pub cond_bound: f64,
    /// Allowed disagreement between different factorizations `w = I(σ)τ`
    /// of the same moment.
    pub consistency_tol: f64,
}

impl Default for FavardOptions {
    fn default() -> Self {
        FavardOptions {
            cond_bound: 1e8,
            consistency_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Favard {
    pub basis: OrthoBasis,
    /// Hankel functional with moments up to degree `2·levels`.
    pub functional: MomentFunctional,
    /// Largest disagreement among the splits `I(σ)τ` of each moment.
    pub split_residual: f64,
    /// `max |φ(φ_σ) − δ_{σ,∅}|` over the rebuilt basis.
    pub definition_residual: f64,
    /// Orthonormality defect of the basis under the rebuilt moments.
    pub orthonormality_residual: f64,
}

/// Rebuilds `φ_σ` for `|σ| <= levels` from
/// `Φ_{l+1} B_l = [Y_1Φ_l … Y_NΦ_l] − Φ_l[A_{l,1} … A_{l,N}] − Φ_{l−1}[B*_{l−1,1} … B*_{l−1,N}]`
/// and the moments of the functional with `φ(1) = 1`, `φ(φ_σ) = 0`.
pub fn favard(coeffs: &RecurrenceCoeffs, levels: usize, opts: FavardOptions) -> Result<Favard> {
    coeffs.require_levels(levels)?;
    let coeffs = coeffs.truncate(levels)?;
    coeffs.validate(opts.cond_bound)?;
    let n = coeffs.n_generators();
    let size = words::count_up_to(levels, n);

    // columns of `cols` are the coefficient vectors of φ_σ, graded-lex
    let mut cols = CMat::zeros(size, size);
    cols[(0, 0)] = C::new(1.0, 0.0);
    for level in 0..levels {
        let here = words::level_offset(level, n);
        let width = words::level_size(level, n);
        let phi_here = cols.columns(here, width).into_owned();
        let mut rhs = CMat::zeros(size, width * n);
        for k in 1..=n {
            let shifted = shift_columns(&phi_here, k as u32, n);
            rhs.columns_mut((k - 1) * width, width).copy_from(&shifted);
        }
        rhs -= &phi_here * coeffs.a_row(level);
        if level > 0 {
            let prev = words::level_offset(level - 1, n);
            let prev_width = words::level_size(level - 1, n);
            let c_row = hstack(
                &(1..=n)
                    .map(|k| coeffs.b(level - 1, k).adjoint())
                    .collect::<Vec<_>>(),
            );
            rhs -= cols.columns(prev, prev_width) * c_row;
        }
        // X B = R  ⇔  Bᵀ Xᵀ = Rᵀ with Bᵀ lower triangular
        let bt = coeffs.b_block(level).transpose();
        let xt = bt
            .solve_lower_triangular(&rhs.transpose())
            .ok_or_else(|| Error::InvalidCoefficients {
                n: level,
                k: 1,
                reason: "B_n is singular".into(),
            })?;
        let next = words::level_offset(level + 1, n);
        cols.columns_mut(next, width * n).copy_from(&xt.transpose());
    }
    let mut matrix = cols.transpose();
    for i in 0..size {
        matrix[(i, i)].im = 0.0;
        for j in i + 1..size {
            matrix[(i, j)] = C::new(0.0, 0.0);
        }
    }
    let basis = OrthoBasis::from_matrix(n, levels, matrix)?;

    // A conj(K) A* = I  ⇒  K = conj(A⁻¹ A⁻*)
    let inv = basis
        .matrix()
        .solve_lower_triangular(&CMat::identity(size, size))
        .ok_or_else(|| Error::Consistency {
            what: "rebuilt coefficient matrix is singular".into(),
            residual: f64::INFINITY,
        })?;
    let kernel = (&inv * inv.adjoint()).map(|z| z.conj());
    let words_here = words::words_up_to(levels, n);

    let mut moments: BTreeMap<Word, C> = BTreeMap::new();
    for w in words::words_up_to(2 * levels, n) {
        let cut = w.len().saturating_sub(levels);
        let (head, tail) = w.split_at(cut);
        let sigma = head.involution();
        moments.insert(w, kernel[(sigma.index(n), tail.index(n))]);
    }
    // every kernel entry must agree with its moment
    let mut split_residual = 0.0f64;
    for (i, sigma) in words_here.iter().enumerate() {
        for (j, tau) in words_here.iter().enumerate() {
            let s = moments[&sigma.involution().concat(tau)];
            split_residual = split_residual.max((s - kernel[(i, j)]).norm());
        }
    }
    let scale = linalg::max_abs(&kernel).max(1.0);
    if split_residual > opts.consistency_tol * scale {
        return Err(Error::Consistency {
            what: "rebuilt Gram matrix is not of Hankel type".into(),
            residual: split_residual,
        });
    }
    // enforce the exact symmetry s(I(w)) = conj(s(w))
    let keys: Vec<Word> = moments.keys().cloned().collect();
    for w in keys {
        let mirror = w.involution();
        if mirror < w {
            continue;
        }
        let avg = (moments[&w] + moments[&mirror].conj()) * 0.5;
        moments.insert(w.clone(), avg);
        moments.insert(mirror.clone(), avg.conj());
        if mirror == w {
            moments.get_mut(&w).unwrap().im = 0.0;
        }
    }
    moments.insert(Word::empty(), C::new(1.0, 0.0));
    let functional = MomentFunctional::hankel(n, 2 * levels, moments)?;

    let definition_residual = words_here
        .iter()
        .enumerate()
        .map(|(i, sigma)| {
            let value: C = (0..=i)
                .map(|j| basis.matrix()[(i, j)] * functional.moments()[&words_here[j]])
                .sum();
            let target = if sigma.is_empty() { 1.0 } else { 0.0 };
            (value - C::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    let gram: GramMatrix = functional.gram(levels)?;
    let orthonormality_residual = basis.orthonormality_residual(&gram);
    Ok(Favard {
        basis,
        functional,
        split_residual,
        definition_residual,
        orthonormality_residual,
    })
}

/// Left multiplication by `Y_k` on each column.
fn shift_columns(cols: &CMat, k: u32, n: usize) -> CMat {
    let mut out = CMat::zeros(cols.nrows(), cols.ncols());
    for j in 0..cols.ncols() {
        for i in 0..cols.nrows() {
            let v = cols[(i, j)];
            if v != C::new(0.0, 0.0) {
                out[(words::shifted_index(k, i, n), j)] = v;
            }
        }
    }
    out
}
