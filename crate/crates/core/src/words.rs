//! The free semigroup on `N` generators.
//!
//! Words are finite sequences of generator indices `1..=N`, ordered
//! graded-lexicographically: shorter words come first, words of equal length
//! compare letter by letter. Every initial segment of this order is finite,
//! which is what lets Gram matrices and determinants be indexed by "all words
//! up to σ".
//!
//! Words serialize as their letters joined by `.`, with `e` for the empty word.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A word in the free semigroup. Letters are 1-based generator indices.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(k: u32) -> Self {
        Word(vec![k])
    }

    /// Builds a word from letters, rejecting zero (letters are 1-based).
    pub fn from_letters(letters: impl Into<Vec<u32>>) -> Result<Self> {
        let letters = letters.into();
        if letters.contains(&0) {
            return Err(Error::BadWord {
                text: format!("{letters:?}"),
                reason: "letters are 1-based".into(),
            });
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest letter, or 0 for the empty word.
    pub fn max_letter(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Checks that every letter lies in `1..=n`.
    pub fn check_generators(&self, n: usize) -> Result<()> {
        if self.0.iter().any(|&l| l == 0 || l as usize > n) {
            return Err(Error::BadWord {
                text: self.to_string(),
                reason: format!("letters must lie in 1..={n}"),
            });
        }
        Ok(())
    }

    /// Parses a word and checks its letters against `n` generators.
    pub fn parse_for(text: &str, n: usize) -> Result<Self> {
        let w: Word = text.parse()?;
        w.check_generators(n)?;
        Ok(w)
    }

    /// Letter reversal `i1…ik ↦ ik…i1`.
    pub fn involution(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// The word `kσ`.
    pub fn prepend(&self, k: u32) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(k);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }

    /// Splits `kσ` into `(k, σ)`.
    pub fn split_first(&self) -> Option<(u32, Word)> {
        self.0.split_first().map(|(&k, rest)| (k, Word(rest.to_vec())))
    }

    /// If `self = prefix · α`, returns `α`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|rest| Word(rest.to_vec()))
    }

    pub fn split_at(&self, mid: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(mid);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    /// Next word in graded-lexicographic order over `n` generators.
    pub fn successor(&self, n: usize) -> Word {
        let n = n as u32;
        let mut letters = self.0.clone();
        for pos in (0..letters.len()).rev() {
            if letters[pos] < n {
                letters[pos] += 1;
                for l in &mut letters[pos + 1..] {
                    *l = 1;
                }
                return Word(letters);
            }
        }
        Word(vec![1; self.len() + 1])
    }

    /// Previous word in graded-lexicographic order; the empty word has none.
    pub fn predecessor(&self, n: usize) -> Result<Word> {
        if self.is_empty() {
            return Err(Error::Domain("the empty word has no predecessor".into()));
        }
        let n = n as u32;
        let mut letters = self.0.clone();
        for pos in (0..letters.len()).rev() {
            if letters[pos] > 1 {
                letters[pos] -= 1;
                for l in &mut letters[pos + 1..] {
                    *l = n;
                }
                return Ok(Word(letters));
            }
        }
        Ok(Word(vec![n; self.len() - 1]))
    }

    /// Rank of the word among the `n^|w|` words of its length.
    pub fn rank_in_level(&self, n: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * n + (l as usize - 1))
    }

    /// Position of the word in the graded-lexicographic enumeration from `∅`.
    pub fn index(&self, n: usize) -> usize {
        level_offset(self.len(), n) + self.rank_in_level(n)
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(mut index: usize, n: usize) -> Word {
        let mut len = 0;
        let mut size = 1usize;
        while index >= size {
            index -= size;
            len += 1;
            size *= n;
        }
        word_from_rank(index, len, n)
    }
}

fn word_from_rank(mut rank: usize, len: usize, n: usize) -> Word {
    let mut letters = vec![1u32; len];
    for slot in letters.iter_mut().rev() {
        *slot = (rank % n) as u32 + 1;
        rank /= n;
    }
    Word(letters)
}

/// Number of words of length exactly `len`.
pub fn level_size(len: usize, n: usize) -> usize {
    n.pow(len as u32)
}

/// Number of words of length `< len`, i.e. the index of the first word of that length.
pub fn level_offset(len: usize, n: usize) -> usize {
    (0..len).map(|j| level_size(j, n)).sum()
}

/// Number of words of length `<= level`.
pub fn count_up_to(level: usize, n: usize) -> usize {
    level_offset(level + 1, n)
}

/// All words of length `len`, in lexicographic order.
pub fn enumerate_level(len: usize, n: usize) -> Vec<Word> {
    (0..level_size(len, n))
        .map(|r| word_from_rank(r, len, n))
        .collect()
}

/// All words of length `<= level`, in graded-lexicographic order.
pub fn words_up_to(level: usize, n: usize) -> Vec<Word> {
    (0..=level).flat_map(|len| enumerate_level(len, n)).collect()
}

/// Index of `kτ` given the index of `τ`. This is left multiplication by `Y_k`
/// on the monomial basis.
pub fn shifted_index(k: u32, tau_index: usize, n: usize) -> usize {
    // locate the level of τ
    let mut len = 0;
    let mut start = 0usize;
    let mut size = 1usize;
    while tau_index >= start + size {
        start += size;
        len += 1;
        size *= n;
    }
    let rank = tau_index - start;
    level_offset(len + 1, n) + (k as usize - 1) * size + rank
}

/// Graded-lexicographic order on words over a fixed alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordOrder {
    pub n_generators: usize,
}

impl WordOrder {
    pub fn new(n_generators: usize) -> Self {
        WordOrder { n_generators }
    }

    pub fn compare(&self, a: &Word, b: &Word) -> Ordering {
        a.cmp(b)
    }

    pub fn successor(&self, w: &Word) -> Word {
        w.successor(self.n_generators)
    }

    pub fn predecessor(&self, w: &Word) -> Result<Word> {
        w.predecessor(self.n_generators)
    }

    /// Iterates over all words in increasing order, starting at `∅`.
    pub fn iter(&self) -> impl Iterator<Item = Word> + '_ {
        std::iter::successors(Some(Word::empty()), move |w| {
            Some(w.successor(self.n_generators))
        })
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s == "∅" {
            return Ok(Word::empty());
        }
        let bad = |reason: &str| Error::BadWord {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        if s.is_empty() {
            return Err(bad("empty string (use \"e\" for the empty word)"));
        }
        let letters = s
            .split('.')
            .map(|part| {
                part.parse::<u32>()
                    .map_err(|_| bad("letters must be positive integers separated by '.'"))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::from_letters(letters).map_err(|_| bad("letters are 1-based"))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
