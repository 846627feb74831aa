//! Words over the alphabet `0..|Λ|` and subsets of the alphabet.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// Largest supported alphabet: symbols print as single base-62 digits and
/// subsets fit in a `u64` mask.
pub const MAX_ALPHABET: usize = 62;

const DIGITS: &[u8; MAX_ALPHABET] =
    b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// A finite word `i_1 i_2 ... i_n`. Ordered lexicographically, prefixes first.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Self {
        Word(symbols.to_vec())
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn pop(&mut self) -> Option<Symbol> {
        self.0.pop()
    }

    pub fn concat(&self, other: &[Symbol]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        Word(v)
    }

    pub fn child(&self, s: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(s);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &[Symbol]) -> bool {
        other.len() >= self.0.len() && other[..self.0.len()] == self.0[..]
    }

    /// Errors if a symbol is outside `0..alphabet`.
    pub fn check(&self, alphabet: usize) -> Result<()> {
        check_symbols(&self.0, alphabet)
    }

    /// Base-|Λ| digit rendering, one character per symbol.
    pub fn to_digits(&self) -> String {
        self.0.iter().map(|&s| DIGITS[s as usize] as char).collect()
    }

    pub fn parse_digits(text: &str, alphabet: usize) -> Result<Word> {
        let mut out = Vec::with_capacity(text.len());
        for (position, c) in text.bytes().enumerate() {
            let symbol = DIGITS
                .iter()
                .position(|&d| d == c)
                .ok_or_else(|| Error::Parse {
                    path: format!("word {text:?}"),
                    message: format!("character {:?} is not a digit", c as char),
                })?;
            if symbol >= alphabet {
                return Err(Error::InvalidWord {
                    symbol,
                    position,
                    alphabet,
                });
            }
            out.push(symbol as Symbol);
        }
        Ok(Word(out))
    }
}

impl Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&self.to_digits())
        }
    }
}

pub(crate) fn check_symbols(symbols: &[Symbol], alphabet: usize) -> Result<()> {
    for (position, &s) in symbols.iter().enumerate() {
        if s as usize >= alphabet {
            return Err(Error::InvalidWord {
                symbol: s as usize,
                position,
                alphabet,
            });
        }
    }
    Ok(())
}

/// A subset of the alphabet as a bitmask; bit `i` set iff symbol `i` belongs.
///
/// The derived order compares masks as integers, which is the canonical order
/// used whenever ties between subsets are broken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(alphabet: usize) -> Subset {
        if alphabet >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << alphabet) - 1)
        }
    }

    pub fn singleton(s: Symbol) -> Subset {
        Subset(1u64 << s)
    }

    pub fn from_symbols(symbols: &[Symbol]) -> Subset {
        Subset(symbols.iter().fold(0u64, |m, &s| m | (1u64 << s)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, s: Symbol) -> bool {
        self.0 >> s & 1 == 1
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn fits(self, alphabet: usize) -> bool {
        self.is_subset_of(Subset::full(alphabet))
    }

    /// Symbols in increasing order.
    pub fn iter(self) -> SubsetIter {
        SubsetIter(self.0)
    }

    pub fn symbols(self) -> Vec<Symbol> {
        self.iter().collect()
    }

    /// All subsets of `self`, including `∅` and `self`, in increasing mask order.
    pub fn submasks(self) -> Vec<Subset> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut sub = 0u64;
        loop {
            out.push(Subset(sub));
            if sub == self.0 {
                break;
            }
            sub = (sub.wrapping_sub(self.0)) & self.0;
        }
        out
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.symbols().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let symbols = Vec::<usize>::deserialize(deserializer)?;
        let mut mask = 0u64;
        for s in symbols {
            if s >= MAX_ALPHABET {
                return Err(serde::de::Error::custom(format!(
                    "symbol {s} exceeds the maximum alphabet size {MAX_ALPHABET}"
                )));
            }
            mask |= 1u64 << s;
        }
        Ok(Subset(mask))
    }
}

pub struct SubsetIter(u64);

impl Iterator for SubsetIter {
    type Item = Symbol;
    fn next(&mut self) -> Option<Symbol> {
        if self.0 == 0 {
            return None;
        }
        let s = self.0.trailing_zeros() as Symbol;
        self.0 &= self.0 - 1;
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let w = Word(vec![0, 9, 10, 35, 36, 61]);
        let text = w.to_digits();
        assert_eq!(text, "09azAZ");
        assert_eq!(Word::parse_digits(&text, 62).unwrap(), w);
    }

    #[test]
    fn parse_rejects_out_of_alphabet() {
        assert!(matches!(
            Word::parse_digits("012", 2),
            Err(Error::InvalidWord {
                symbol: 2,
                position: 2,
                ..
            })
        ));
    }

    #[test]
    fn words_order_prefix_first() {
        let mut ws = vec![Word(vec![1]), Word(vec![0, 1]), Word(vec![]), Word(vec![0])];
        ws.sort();
        assert_eq!(
            ws,
            vec![Word(vec![]), Word(vec![0]), Word(vec![0, 1]), Word(vec![1])]
        );
    }

    #[test]
    fn submasks_enumerate_all() {
        let s = Subset::from_symbols(&[0, 2, 3]);
        let subs = s.submasks();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset_of(s)));
        assert_eq!(Subset::EMPTY.submasks(), vec![Subset::EMPTY]);
    }

    #[test]
    fn subset_basics() {
        let s = Subset::from_symbols(&[1, 3]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(3) && !s.contains(0));
        assert_eq!(s.symbols(), vec![1, 3]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(Subset::full(3), Subset(0b111));
    }
}
