//! Reduced words in the free group on two generators `a` and `b`.
//!
//! The product `u * v` is the concatenation `u` followed by `v`, read as
//! "apply `v` first, then `u`". This is the composition order of the
//! finger-pushing maps and the order in which the loop tracer assembles
//! crossing letters, so `γ(g₁g₂, x) = γ(g₁, g₂x)·γ(g₂, x)` holds verbatim.
//!
//! Textual syntax: `a`, `b` for the generators, `A`, `B` for their inverses.
//! The empty string and `e` both denote the identity.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A,
    B,
}

impl Generator {
    pub fn other(self) -> Generator {
        match self {
            Generator::A => Generator::B,
            Generator::B => Generator::A,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::A => f.write_str("a"),
            Generator::B => f.write_str("b"),
        }
    }
}

/// One of `a`, `a⁻¹`, `b`, `b⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn new(generator: Generator, positive: bool) -> Letter {
        match (generator, positive) {
            (Generator::A, true) => Letter::A,
            (Generator::A, false) => Letter::AInv,
            (Generator::B, true) => Letter::B,
            (Generator::B, false) => Letter::BInv,
        }
    }

    pub fn generator(self) -> Generator {
        match self {
            Letter::A | Letter::AInv => Generator::A,
            Letter::B | Letter::BInv => Generator::B,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Letter::A | Letter::B)
    }

    /// `+1` or `-1`.
    pub fn sign(self) -> i32 {
        if self.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseWordError {
    #[error("invalid letter {0:?} in word (expected one of a, A, b, B)")]
    InvalidLetter(char),
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word { letters: out }
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn generator(g: Generator) -> Word {
        Word {
            letters: vec![Letter::new(g, true)],
        }
    }

    pub fn letter(l: Letter) -> Word {
        Word { letters: vec![l] }
    }

    /// Reduces `raw`; equivalent to [`reduce`].
    pub fn from_letters<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
        reduce(raw)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        // Cancel at the seam only; both sides are already reduced.
        let mut k = 0;
        let (u, v) = (&self.letters, &other.letters);
        while k < u.len() && k < v.len() && u[u.len() - 1 - k] == v[k].inverse() {
            k += 1;
        }
        let mut letters = Vec::with_capacity(u.len() + v.len() - 2 * k);
        letters.extend_from_slice(&u[..u.len() - k]);
        letters.extend_from_slice(&v[k..]);
        Word { letters }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Word {
        let mut out = Word::identity();
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }

    /// `u · self · u⁻¹`.
    pub fn conjugate_by(&self, u: &Word) -> Word {
        u.multiply(self).multiply(&u.inverse())
    }

    /// The retraction `h_onto`: deletes every letter of the other generator.
    pub fn retract(&self, onto: Generator) -> Word {
        reduce(self.letters.iter().copied().filter(|l| l.generator() == onto))
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹`
    /// and `core` cyclically reduced.
    pub fn cyclically_reduce(&self) -> (Word, Word) {
        let l = &self.letters;
        let mut k = 0;
        while 2 * k + 1 < l.len() && l[k] == l[l.len() - 1 - k].inverse() {
            k += 1;
        }
        (
            Word {
                letters: l[k..l.len() - k].to_vec(),
            },
            Word {
                letters: l[..k].to_vec(),
            },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => self.letters.len() == 1 || *f != l.inverse(),
            _ => true,
        }
    }

    /// Exponent sum of one generator (the abelianization coordinate).
    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator() == g)
            .map(|l| l.sign() as i64)
            .sum()
    }

    /// Uniformly random reduced word of exactly `len` letters.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Word {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = Letter::ALL[rng.gen_range(0..4)];
            if letters.last() != Some(&l.inverse()) {
                letters.push(l);
            }
        }
        Word { letters }
    }

    /// Random reduced word with length uniform in `0..=max_len`.
    pub fn random_up_to<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> Word {
        let len = rng.gen_range(0..=max_len);
        Word::random(rng, len)
    }
}

impl Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        self.multiply(rhs)
    }
}

impl Mul for Word {
    type Output = Word;
    fn mul(self, rhs: Word) -> Word {
        self.multiply(&rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Word, ParseWordError> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        let mut raw = Vec::with_capacity(s.len());
        for c in s.chars() {
            raw.push(Letter::from_char(c).ok_or(ParseWordError::InvalidLetter(c))?);
        }
        Ok(reduce(raw))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Word, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
