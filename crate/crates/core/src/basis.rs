//! Computational-basis kets, operator-basis nodes and their vectorization
//! indices.
//!
//! Qubit 0 (the first qubit, written leftmost in `|q₁…q_n⟩`) is the most
//! significant bit of a ket index. A node `|q⟩⟨p|` is the matrix entry at
//! row `q`, column `p`; under column-major vectorization it sits at
//! `index(p)·2^n + index(q)`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, STRUCTURAL_CAP};

/// A computational-basis ket `|q₁…q_n⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KetBits {
    // field order matters for the derived Ord: equal n, then lexicographic bits
    n: u8,
    value: u32,
}

impl KetBits {
    /// Build a ket from its bits, first qubit first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_n(bits.len())?;
        let mut value = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidBits(format!("bit value {b}")));
            }
            value = (value << 1) | u32::from(b);
        }
        Ok(Self {
            n: bits.len() as u8,
            value,
        })
    }

    /// Build a ket from its index in `[0, 2^n)`.
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        if index >> n != 0 {
            return Err(Error::InvalidBits(format!(
                "ket index {index} out of range for n = {n}"
            )));
        }
        Ok(Self {
            n: n as u8,
            value: index as u32,
        })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// `Σ qᵢ·2^(n−i)`, qubit 1 most significant.
    pub fn index(&self) -> usize {
        self.value as usize
    }

    /// Bit held by qubit `pos` (0-based).
    pub fn bit(&self, pos: usize) -> u8 {
        ket_bit(self.value as usize, self.n(), pos)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n()).map(|i| self.bit(i)).collect()
    }

    /// Number of qubits in state `|1⟩`.
    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }
}

impl fmt::Display for KetBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

impl FromStr for KetBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidBits(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.is_empty() {
            return Err(Error::InvalidBits("empty bitstring".into()));
        }
        Self::from_bits(&bits)
    }
}

/// An element `|q⟩⟨p|` of the operator basis, i.e. one node of the induced
/// graph and one coordinate of `vec(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisNode {
    pub ket: KetBits,
    pub bra: KetBits,
}

impl BasisNode {
    pub fn new(ket: KetBits, bra: KetBits) -> Result<Self> {
        if ket.n != bra.n {
            return Err(Error::InvalidBits(format!(
                "ket has {} qubits, bra has {}",
                ket.n, bra.n
            )));
        }
        Ok(Self { ket, bra })
    }

    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        if index >> (2 * n) != 0 {
            return Err(Error::InvalidBits(format!(
                "node index {index} out of range for n = {n}"
            )));
        }
        let (ket, bra) = split_node_index(index, n);
        Ok(Self {
            ket: KetBits::from_index(n, ket)?,
            bra: KetBits::from_index(n, bra)?,
        })
    }

    pub fn n(&self) -> usize {
        self.ket.n()
    }

    /// Column-major position of entry (row = ket, column = bra).
    pub fn index(&self) -> usize {
        node_index(self.ket.index(), self.bra.index(), self.n())
    }

    pub fn type_counts(&self) -> TypeCounts {
        type_counts_of(self.ket.index(), self.bra.index(), self.n())
    }

    pub fn is_diagonal(&self) -> bool {
        self.ket == self.bra
    }
}

impl fmt::Display for BasisNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.ket, self.bra)
    }
}

impl FromStr for BasisNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (ket, bra) = s
            .split_once('|')
            .ok_or_else(|| Error::InvalidBits(format!("expected \"ket|bra\", got {s:?}")))?;
        Self::new(ket.parse()?, bra.parse()?)
    }
}

/// Counts of positions whose `(qᵢ, pᵢ)` pattern is `(0,0)`, `(0,1)`, `(1,0)`
/// and `(1,1)`. Invariant under any qubit permutation applied to ket and bra
/// together, and a complete orbit label for connected interaction graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl TypeCounts {
    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl fmt::Display for TypeCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > STRUCTURAL_CAP {
        return Err(Error::QubitCap {
            n,
            cap: STRUCTURAL_CAP,
        });
    }
    Ok(())
}

// Raw index helpers shared by the hot loops elsewhere in the crate.

#[inline]
pub(crate) fn ket_bit(ket: usize, n: usize, pos: usize) -> u8 {
    ((ket >> (n - 1 - pos)) & 1) as u8
}

#[inline]
pub(crate) fn node_index(ket: usize, bra: usize, n: usize) -> usize {
    (bra << n) | ket
}

#[inline]
pub(crate) fn split_node_index(index: usize, n: usize) -> (usize, usize) {
    (index & ((1 << n) - 1), index >> n)
}

/// Exchange the bits of qubits `j` and `k` in a ket index.
#[inline]
pub(crate) fn swap_ket_bits(ket: usize, n: usize, j: usize, k: usize) -> usize {
    let (sj, sk) = (n - 1 - j, n - 1 - k);
    if ((ket >> sj) ^ (ket >> sk)) & 1 == 1 {
        ket ^ ((1 << sj) | (1 << sk))
    } else {
        ket
    }
}

/// Exchange qubits `j` and `k` on both sides of a node index.
#[inline]
pub(crate) fn swap_node_bits(index: usize, n: usize, j: usize, k: usize) -> usize {
    let (ket, bra) = split_node_index(index, n);
    node_index(swap_ket_bits(ket, n, j, k), swap_ket_bits(bra, n, j, k), n)
}

pub(crate) fn type_counts_of(ket: usize, bra: usize, n: usize) -> TypeCounts {
    let mask = (1usize << n) - 1;
    let d = (ket & bra).count_ones() as usize;
    let c = (ket & !bra & mask).count_ones() as usize;
    let b = (!ket & bra & mask).count_ones() as usize;
    TypeCounts {
        a: n - b - c - d,
        b,
        c,
        d,
    }
}
