//! Bit strings and subcubes. Coordinates are 1-based; index 1 is the
//! leftmost character of the textual form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    /// The string whose bit `j` (1-based) is bit `len - j` of `value`, so
    /// that `from_index(len, k)` enumerates strings in lexicographic order.
    pub fn from_index(len: usize, value: u64) -> Self {
        BitString((0..len).map(|j| (value >> (len - 1 - j)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit at 1-based coordinate `j`.
    pub fn bit(&self, j: usize) -> bool {
        self.0[j - 1]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        self.0[j - 1] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(Error::arity(self.len(), other.len()));
        }
        Ok(BitString(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Splits into consecutive blocks of `m` bits.
    pub fn blocks(&self, m: usize) -> Vec<BitString> {
        self.0.chunks(m).map(|c| BitString(c.to_vec())).collect()
    }

    pub fn concat(parts: &[BitString]) -> BitString {
        BitString(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << len).map(move |k| BitString::from_index(len, k))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("`{s}` is not a bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// A subcube of `{0,1}^m`: some coordinates fixed, the rest free.
///
/// Cells are stored as base-3 digits (0, 1, or 2 for free), which doubles as
/// the canonical memoization key.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subcube {
    cells: Vec<u8>,
}

const FREE: u8 = 2;

impl Subcube {
    pub fn full(m: usize) -> Self {
        Subcube { cells: vec![FREE; m] }
    }

    pub fn from_assignment(m: usize, fixed: &[(usize, bool)]) -> Result<Self> {
        let mut c = Subcube::full(m);
        for &(j, b) in fixed {
            if j == 0 || j > m {
                return Err(Error::Domain(format!("coordinate {j} outside 1..={m}")));
            }
            c.cells[j - 1] = b as u8;
        }
        Ok(c)
    }

    pub fn arity(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, j: usize) -> Option<bool> {
        match self.cells[j - 1] {
            FREE => None,
            b => Some(b == 1),
        }
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.cells[j - 1] == FREE
    }

    pub fn codim(&self) -> usize {
        self.cells.iter().filter(|c| **c != FREE).count()
    }

    pub fn with(&self, j: usize, value: bool) -> Subcube {
        let mut c = self.clone();
        c.cells[j - 1] = value as u8;
        c
    }

    pub fn free_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == FREE)
            .map(|(k, _)| k + 1)
    }

    pub fn fixed(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != FREE)
            .map(|(k, c)| (k + 1, *c == 1))
    }

    pub fn contains(&self, x: &BitString) -> bool {
        x.len() == self.cells.len()
            && self
                .cells
                .iter()
                .zip(x.bits())
                .all(|(c, b)| *c == FREE || (*c == 1) == *b)
    }

    /// Coordinates `offset+1 ..= offset+len` as a subcube of `{0,1}^len`.
    pub fn restrict(&self, offset: usize, len: usize) -> Subcube {
        Subcube {
            cells: self.cells[offset..offset + len].to_vec(),
        }
    }

    /// Base-3 digit string; `2` marks a free coordinate.
    pub fn key(&self) -> String {
        self.cells.iter().map(|c| (b'0' + c) as char).collect()
    }

    /// Points of the subcube in lexicographic order.
    pub fn points(&self) -> Vec<BitString> {
        let free: Vec<usize> = self.free_indices().collect();
        let mut base = BitString::zeros(self.arity());
        for (j, b) in self.fixed() {
            base.set(j, b);
        }
        (0..1u64 << free.len())
            .map(|k| {
                let mut x = base.clone();
                for (pos, j) in free.iter().enumerate() {
                    x.set(*j, (k >> (free.len() - 1 - pos)) & 1 == 1);
                }
                x
            })
            .collect()
    }
}

impl fmt::Display for Subcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            f.write_str(match *c {
                0 => "0",
                1 => "1",
                _ => "*",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Subcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subcube({self})")
    }
}
