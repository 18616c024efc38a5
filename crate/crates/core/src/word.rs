//! Words over the letters `z1..zd` and their adjoints `z1*..zd*`.
//!
//! Words are ordered graded-lexicographically: shorter words first, then
//! letter by letter with `z1 < z1* < z2 < z2* < ...`. Every indexed structure
//! in the crate (series storage, Gram matrix layouts, reports) uses this order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A single letter. `var` is zero-based; it prints as `z{var+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub var: u16,
    pub starred: bool,
}

impl Letter {
    pub const fn new(var: u16, starred: bool) -> Self {
        Letter { var, starred }
    }

    pub const fn z(var: u16) -> Self {
        Letter { var, starred: false }
    }

    pub const fn zstar(var: u16) -> Self {
        Letter { var, starred: true }
    }

    pub fn adjoint(self) -> Self {
        Letter { var: self.var, starred: !self.starred }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.var + 1)?;
        if self.starred {
            f.write_str("*")?;
        }
        Ok(())
    }
}

/// Classification of a word by the star flags of its letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordKind {
    Empty,
    Analytic,
    Coanalytic,
    Mixed,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Highest variable index used, plus one.
    pub fn var_bound(&self) -> usize {
        self.0.iter().map(|l| l.var as usize + 1).max().unwrap_or(0)
    }

    pub fn kind(&self) -> WordKind {
        if self.0.is_empty() {
            return WordKind::Empty;
        }
        let starred = self.0.iter().filter(|l| l.starred).count();
        if starred == 0 {
            WordKind::Analytic
        } else if starred == self.0.len() {
            WordKind::Coanalytic
        } else {
            WordKind::Mixed
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.0.iter().all(|l| !l.starred)
    }

    pub fn is_coanalytic(&self) -> bool {
        self.0.iter().all(|l| l.starred)
    }

    /// `w*`: reverse the letters and toggle every star.
    pub fn involution(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.adjoint()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Splits the word into maximal runs of analytic / coanalytic letters.
    pub fn blocks(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for &l in &self.0 {
            match out.last_mut() {
                Some(b) if b.0[0].starred == l.starred => b.0.push(l),
                _ => out.push(Word(vec![l])),
            }
        }
        out
    }

    /// All words of length exactly `len` over `nvars` letters with the given star flag,
    /// in lexicographic order.
    pub fn all_of_length(nvars: usize, len: usize, starred: bool) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * nvars);
            for w in &out {
                for v in 0..nvars {
                    let mut w2 = w.clone();
                    w2.push(Letter::new(v as u16, starred));
                    next.push(w2);
                }
            }
            out = next;
        }
        out
    }

    /// Analytic (or coanalytic) words with length in `1..=max_len`, graded-lex ordered.
    pub fn pure_words(nvars: usize, max_len: usize, starred: bool) -> Vec<Word> {
        (1..=max_len).flat_map(|len| Word::all_of_length(nvars, len, starred)).collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Space-separated letters such as `z1 z2* z1`. The empty string and `1`
    /// both denote the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (body, starred) = match tok.strip_suffix('*') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let idx = body
                .strip_prefix('z')
                .and_then(|n| n.parse::<u16>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::InvalidWord(s.to_string()))?;
            letters.push(Letter::new(idx - 1, starred));
        }
        Ok(Word(letters))
    }
}

/// Shorthand used heavily in tests: `w("z1 z2*")`.
pub fn w(s: &str) -> Word {
    s.parse().expect("valid word literal")
}
