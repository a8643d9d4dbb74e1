//! The nucleotide alphabet `{a, t, c, g}`, its pyrimidine/purine split and
//! the eight admissible total orders used by the attractiveness machinery.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One of the four nucleotides.
///
/// The pyrimidines are `Y = {c, t}` and the purines `R = {a, g}`; the split
/// is total and disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nucleotide {
    A,
    T,
    C,
    G,
}

impl Nucleotide {
    /// All letters in display order `a, t, c, g`.
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::T, Nucleotide::C, Nucleotide::G];

    /// The pyrimidines, `Y`.
    pub const PYRIMIDINES: [Nucleotide; 2] = [Nucleotide::C, Nucleotide::T];

    /// The purines, `R`.
    pub const PURINES: [Nucleotide; 2] = [Nucleotide::A, Nucleotide::G];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Nucleotide::A => 0,
            Nucleotide::T => 1,
            Nucleotide::C => 2,
            Nucleotide::G => 3,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Nucleotide {
        Nucleotide::ALL[i]
    }

    #[inline]
    pub fn is_pyrimidine(self) -> bool {
        matches!(self, Nucleotide::C | Nucleotide::T)
    }

    #[inline]
    pub fn is_purine(self) -> bool {
        matches!(self, Nucleotide::A | Nucleotide::G)
    }

    /// Strand complement: `a <-> t`, `c <-> g`.
    #[inline]
    pub fn complement(self) -> Nucleotide {
        match self {
            Nucleotide::A => Nucleotide::T,
            Nucleotide::T => Nucleotide::A,
            Nucleotide::C => Nucleotide::G,
            Nucleotide::G => Nucleotide::C,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Nucleotide::A => 'a',
            Nucleotide::T => 't',
            Nucleotide::C => 'c',
            Nucleotide::G => 'g',
        }
    }

    pub fn from_char(c: char) -> Result<Nucleotide, Error> {
        match c.to_ascii_lowercase() {
            'a' => Ok(Nucleotide::A),
            't' => Ok(Nucleotide::T),
            'c' => Ok(Nucleotide::C),
            'g' => Ok(Nucleotide::G),
            other => Err(Error::InvalidLetter(other)),
        }
    }
}

impl std::fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Identifier of one of the eight admissible total orders on the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderId {
    O1,
    O2,
    O3,
    O4,
    O5,
    O6,
    O7,
    O8,
}

impl OrderId {
    pub const ALL: [OrderId; 8] = [
        OrderId::O1,
        OrderId::O2,
        OrderId::O3,
        OrderId::O4,
        OrderId::O5,
        OrderId::O6,
        OrderId::O7,
        OrderId::O8,
    ];

    pub fn parse(s: &str) -> Result<OrderId, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "O1" => Ok(OrderId::O1),
            "O2" => Ok(OrderId::O2),
            "O3" => Ok(OrderId::O3),
            "O4" => Ok(OrderId::O4),
            "O5" => Ok(OrderId::O5),
            "O6" => Ok(OrderId::O6),
            "O7" => Ok(OrderId::O7),
            "O8" => Ok(OrderId::O8),
            other => Err(Error::InvalidParameter(format!("unknown order {other:?}"))),
        }
    }
}

impl std::fmt::Display for OrderId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A total order on the alphabet, one of the eight that never separate the
/// pyrimidines from the purines: the two lowest ranks are either both in `Y`
/// or both in `R`.
///
/// Ranks run from 1 (minimal letter) to 4 (maximal letter).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphabetOrder {
    id: OrderId,
    ascending: [Nucleotide; 4],
}

impl AlphabetOrder {
    pub fn from_id(id: OrderId) -> AlphabetOrder {
        use Nucleotide::{A, C, G, T};
        let ascending = match id {
            OrderId::O1 => [C, T, A, G],
            OrderId::O2 => [G, A, T, C],
            OrderId::O3 => [T, C, A, G],
            OrderId::O4 => [T, C, G, A],
            OrderId::O5 => [C, T, G, A],
            OrderId::O6 => [A, G, C, T],
            OrderId::O7 => [A, G, T, C],
            OrderId::O8 => [G, A, C, T],
        };
        AlphabetOrder { id, ascending }
    }

    pub fn all() -> [AlphabetOrder; 8] {
        OrderId::ALL.map(AlphabetOrder::from_id)
    }

    pub fn id(&self) -> OrderId {
        self.id
    }

    /// Rank of a letter, in `1..=4`.
    #[inline]
    pub fn rank(&self, n: Nucleotide) -> u8 {
        // ascending holds the letters by increasing rank
        for (i, &m) in self.ascending.iter().enumerate() {
            if m == n {
                return (i + 1) as u8;
            }
        }
        unreachable!("rank is a bijection over the alphabet")
    }

    /// The letter holding a given rank in `1..=4`.
    #[inline]
    pub fn letter(&self, rank: u8) -> Nucleotide {
        self.ascending[(rank - 1) as usize]
    }

    /// Letters by increasing rank.
    pub fn ascending(&self) -> [Nucleotide; 4] {
        self.ascending
    }

    /// The minimal letter (rank 1).
    pub fn minimal(&self) -> Nucleotide {
        self.ascending[0]
    }

    /// The maximal letter (rank 4).
    pub fn maximal(&self) -> Nucleotide {
        self.ascending[3]
    }

    #[inline]
    pub fn leq(&self, x: Nucleotide, y: Nucleotide) -> bool {
        self.rank(x) <= self.rank(y)
    }

    /// Image of this order under the strand-complement relabeling of the
    /// alphabet; maps O1 to O2, O3 to O7, O4 to O6, O5 to O8 and back.
    pub fn mirror(&self) -> AlphabetOrder {
        let mirrored = self.ascending.map(Nucleotide::complement);
        for order in AlphabetOrder::all() {
            if order.ascending == mirrored {
                return order;
            }
        }
        unreachable!("the eight admissible orders are closed under complement")
    }
}
