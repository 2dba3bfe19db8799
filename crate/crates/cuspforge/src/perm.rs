//! Permutations of the four vertices of a tetrahedron.

use std::fmt;

/// A permutation of `{0,1,2,3}` stored as its image table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm(pub [u8; 4]);

impl Perm {
    pub const IDENTITY: Perm = Perm([0, 1, 2, 3]);

    /// Builds a permutation, returning `None` unless the table is a bijection.
    pub fn new(images: [u8; 4]) -> Option<Perm> {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(Perm(images))
    }

    #[inline]
    pub fn apply(self, i: u8) -> u8 {
        self.0[i as usize]
    }

    pub fn inverse(self) -> Perm {
        let mut out = [0u8; 4];
        for i in 0..4u8 {
            out[self.0[i as usize] as usize] = i;
        }
        Perm(out)
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(self, other: Perm) -> Perm {
        let mut out = [0u8; 4];
        for i in 0..4 {
            out[i] = self.0[other.0[i] as usize];
        }
        Perm(out)
    }

    pub fn is_odd(self) -> bool {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 1
    }

    /// All 24 permutations in lexicographic order.
    pub fn all() -> Vec<Perm> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        if let Some(p) = Perm::new([a, b, c, d]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    /// Parses the four-digit form `σ(0)σ(1)σ(2)σ(3)`.
    pub fn parse(s: &str) -> Option<Perm> {
        let bytes = s.as_bytes();
        if bytes.len() != 4 {
            return None;
        }
        let mut images = [0u8; 4];
        for (i, b) in bytes.iter().enumerate() {
            if !(b'0'..=b'3').contains(b) {
                return None;
            }
            images[i] = b - b'0';
        }
        Perm::new(images)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}
