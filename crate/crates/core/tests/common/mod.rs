//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ncortho::linalg::{real, CMat, C};
use ncortho::words::{self, Word};
use ncortho::MomentFunctional;

/// Number of non-crossing pairings of `letters` that only pair equal letters.
/// This is `<(l+l*)_σ Ω, Ω>` on the full Fock space.
pub fn noncrossing_pairings(letters: &[u32]) -> u64 {
    if letters.is_empty() {
        return 1;
    }
    if letters.len() % 2 == 1 {
        return 0;
    }
    let mut total = 0;
    // the first position pairs with some j; the inside and the outside are independent
    for j in (1..letters.len()).step_by(2) {
        if letters[j] == letters[0] {
            total += noncrossing_pairings(&letters[1..j]) * noncrossing_pairings(&letters[j + 1..]);
        }
    }
    total
}

pub fn free_fock_functional(n: usize, max_degree: usize) -> MomentFunctional {
    let moments: BTreeMap<Word, C> = words::words_up_to(max_degree, n)
        .into_iter()
        .map(|w| {
            let v = noncrossing_pairings(w.letters()) as f64;
            (w, real(v))
        })
        .collect();
    MomentFunctional::hankel(n, max_degree, moments).unwrap()
}

/// Creation operator `l_k e_σ = e_{kσ}` on the Fock space truncated at `level`.
pub fn creation(k: u32, n: usize, level: usize) -> CMat {
    let size = words::count_up_to(level, n);
    let mut m = CMat::zeros(size, size);
    for sigma in words::words_up_to(level.saturating_sub(1), n) {
        let target = sigma.prepend(k);
        m[(target.index(n), sigma.index(n))] = real(1.0);
    }
    m
}

/// Dyck paths of length `2m`, by dynamic programming over heights.
pub fn dyck_paths(m: usize) -> u64 {
    let len = 2 * m;
    let mut ways = vec![0u64; len + 2];
    ways[0] = 1;
    for _ in 0..len {
        let mut next = vec![0u64; len + 2];
        for h in 0..=len {
            if ways[h] == 0 {
                continue;
            }
            next[h + 1] += ways[h];
            if h > 0 {
                next[h - 1] += ways[h];
            }
        }
        ways = next;
    }
    ways[0]
}

/// Moments of the standard Gaussian: `s_{2m} = (2m−1)!!`, odd ones vanish.
pub fn gaussian_moments(max_degree: usize) -> Vec<f64> {
    let mut s = vec![0.0; max_degree + 1];
    s[0] = 1.0;
    for k in (2..=max_degree).step_by(2) {
        s[k] = s[k - 2] * (k - 1) as f64;
    }
    s
}

pub fn univariate(moments: &[f64]) -> MomentFunctional {
    MomentFunctional::univariate(&moments.iter().map(|&x| real(x)).collect::<Vec<_>>()).unwrap()
}

/// Classical Stieltjes procedure on real moments: returns `(a_n, b_n)` of the
/// orthonormal recurrence `x p_n = b_n p_{n+1} + a_n p_n + b_{n−1} p_{n−1}`
/// for `n < levels`.
pub fn stieltjes(moments: &[f64], levels: usize) -> (Vec<f64>, Vec<f64>) {
    let inner = |p: &[f64], q: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                s += a * b * moments[i + j];
            }
        }
        s
    };
    let times_x = |p: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0];
        out.extend_from_slice(p);
        out
    };
    // monic p_{n+1} = (x − α_n) p_n − β_n p_{n−1}
    let mut prev: Vec<f64> = vec![];
    let mut cur = vec![1.0];
    let mut norms = vec![inner(&cur, &cur)];
    let (mut a, mut b) = (vec![], vec![]);
    for n in 0..levels {
        let xp = times_x(&cur);
        let alpha = inner(&xp, &cur) / norms[n];
        let beta = if n == 0 { 0.0 } else { norms[n] / norms[n - 1] };
        let mut next = xp.clone();
        for (i, c) in cur.iter().enumerate() {
            next[i] -= alpha * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= beta * c;
        }
        norms.push(inner(&next, &next));
        a.push(alpha);
        b.push((norms[n + 1] / norms[n]).sqrt());
        prev = cur;
        cur = next;
    }
    (a, b)
}
