//! Tensored Pauli operators in symplectic form.
//!
//! A [`PauliString`] on `n` qubits stores one X bit and one Z bit per qubit
//! together with a global phase `i^phase_exp`. The operator it denotes is
//!
//! ```text
//!     i^phase_exp · P_1 ⊗ P_2 ⊗ … ⊗ P_n
//! ```
//!
//! where `P_k` is the Hermitian Pauli matrix selected by `(x_k, z_k)`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. The letter `Y` is tied
//! to the bit pattern through the single convention `Y = i·X·Z`; every phase
//! computation in this module follows from it.
//!
//! Qubits are 1-based in labels (`"Z1 X2 Z3"`) and 0-based in the API. In the
//! compact form (`"XIZ"`) the first character acts on qubit 1.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register a single bit-mask word can hold.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x_bits: u64,
    z_bits: u64,
    phase_exp: u8,
}

/// `i^k` for `k mod 4`.
pub fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(
            (1..=MAX_QUBITS).contains(&n_qubits),
            "qubit count must be in 1..={MAX_QUBITS}"
        );
        Self {
            n_qubits,
            x_bits: 0,
            z_bits: 0,
            phase_exp: 0,
        }
    }

    /// Builds a string from raw bit masks (bit `k` is qubit `k`, 0-based).
    pub fn from_bits(n_qubits: usize, x_bits: u64, z_bits: u64, phase_exp: u8) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Contract(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let m = mask(n_qubits);
        if x_bits & !m != 0 || z_bits & !m != 0 {
            return Err(Error::Contract(format!(
                "bit mask has bits beyond qubit {n_qubits}"
            )));
        }
        Ok(Self {
            n_qubits,
            x_bits,
            z_bits,
            phase_exp: phase_exp % 4,
        })
    }

    /// Single-qubit Pauli `letter` acting on 0-based `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Result<Self> {
        let mut p = Self::identity(n_qubits);
        if qubit >= n_qubits {
            return Err(Error::Parse {
                token: format!("{letter}{}", qubit + 1),
                reason: format!("qubit index outside 1..={n_qubits}"),
            });
        }
        p.set_letter(qubit, letter)
            .map_err(|reason| Error::Parse {
                token: letter.to_string(),
                reason,
            })?;
        Ok(p)
    }

    /// Parses a label on `n_qubits` qubits.
    ///
    /// Two grammars are accepted: the compact form, one letter from
    /// `{I,X,Y,Z}` per qubit (`"XIZ"`), and the indexed form, whitespace
    /// separated `<letter><1-based index>` tokens (`"Z1 X2 Z3"`). Qubits not
    /// named in an indexed label carry the identity. The result is always
    /// phase free.
    pub fn parse(label: &str, n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Parse {
                token: label.to_string(),
                reason: format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"),
            });
        }
        let trimmed = label.trim();
        let compact = !trimmed.is_empty()
            && trimmed.chars().all(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z'));
        if compact {
            let len = trimmed.chars().count();
            if len != n_qubits {
                return Err(Error::Parse {
                    token: trimmed.to_string(),
                    reason: format!("compact label has {len} letters for {n_qubits} qubits"),
                });
            }
            let mut p = Self::identity(n_qubits);
            for (k, c) in trimmed.chars().enumerate() {
                p.set_letter(k, c).expect("letter already validated");
            }
            return Ok(p);
        }

        let mut p = Self::identity(n_qubits);
        let mut seen = 0u64;
        for token in trimmed.split_whitespace() {
            let mut chars = token.chars();
            let letter = chars.next().expect("split_whitespace yields non-empty tokens");
            if !matches!(letter, 'I' | 'X' | 'Y' | 'Z') {
                return Err(Error::Parse {
                    token: token.to_string(),
                    reason: "expected one of I, X, Y, Z".into(),
                });
            }
            let index: usize = chars.as_str().parse().map_err(|_| Error::Parse {
                token: token.to_string(),
                reason: "expected a 1-based qubit index after the letter".into(),
            })?;
            if index == 0 || index > n_qubits {
                return Err(Error::Parse {
                    token: token.to_string(),
                    reason: format!("qubit index outside 1..={n_qubits}"),
                });
            }
            let bit = 1u64 << (index - 1);
            if seen & bit != 0 {
                return Err(Error::Parse {
                    token: token.to_string(),
                    reason: "qubit named twice".into(),
                });
            }
            seen |= bit;
            p.set_letter(index - 1, letter).expect("letter already validated");
        }
        Ok(p)
    }

    fn set_letter(&mut self, qubit: usize, letter: char) -> std::result::Result<(), String> {
        let bit = 1u64 << qubit;
        let (x, z) = match letter {
            'I' => (false, false),
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            other => return Err(format!("unknown Pauli letter `{other}`")),
        };
        self.x_bits = if x { self.x_bits | bit } else { self.x_bits & !bit };
        self.z_bits = if z { self.z_bits | bit } else { self.z_bits & !bit };
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x_bits
    }

    pub fn z_bits(&self) -> u64 {
        self.z_bits
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// The global phase `i^phase_exp`.
    pub fn phase(&self) -> Complex64 {
        i_pow(self.phase_exp)
    }

    /// Letter on 0-based `qubit`.
    pub fn letter(&self, qubit: usize) -> char {
        let bit = 1u64 << qubit;
        match (self.x_bits & bit != 0, self.z_bits & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> u64 {
        self.x_bits | self.z_bits
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// True for the identity operator with no phase.
    pub fn is_identity(&self) -> bool {
        self.support() == 0 && self.phase_exp == 0
    }

    pub fn is_canonical(&self) -> bool {
        self.phase_exp == 0
    }

    /// Hermitian iff the global phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase_exp.is_multiple_of(2)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            phase_exp: (4 - self.phase_exp) % 4,
            ..*self
        }
    }

    /// Exact operator product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self.mul_same_size(other))
    }

    pub(crate) fn mul_same_size(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x_bits ^ other.x_bits;
        let z = self.z_bits ^ other.z_bits;
        // Each letter is i^(x·z) X^x Z^z; moving Z^b past X^c costs (-1)^(b·c).
        let exp = self.phase_exp as u32
            + other.phase_exp as u32
            + (self.x_bits & self.z_bits).count_ones()
            + (other.x_bits & other.z_bits).count_ones()
            + 2 * (self.z_bits & other.x_bits).count_ones()
            + 3 * (x & z).count_ones();
        Self {
            n_qubits: self.n_qubits,
            x_bits: x,
            z_bits: z,
            phase_exp: (exp % 4) as u8,
        }
    }

    /// Splits off the global phase: `phase · canonical == self` as operators.
    pub fn canonicalize(&self) -> (Self, Complex64) {
        (
            Self {
                phase_exp: 0,
                ..*self
            },
            self.phase(),
        )
    }

    /// Whether the two operators commute (even symplectic product).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let s = (self.x_bits & other.z_bits).count_ones() + (self.z_bits & other.x_bits).count_ones();
        Ok(s.is_multiple_of(2))
    }

    /// X and Z masks laid out on amplitude-index bits.
    ///
    /// Basis index `j` of an `n`-qubit register has qubit 1 as its most
    /// significant bit, so that `|10⟩` is index 2.
    pub fn index_masks(&self) -> (usize, usize) {
        let shift = 64 - self.n_qubits as u32;
        (
            (self.x_bits.reverse_bits() >> shift) as usize,
            (self.z_bits.reverse_bits() >> shift) as usize,
        )
    }

    /// Deterministic 64-bit digest of the operator, stable across runs and
    /// platforms. Used to derive per-string random streams.
    pub fn stable_hash(&self) -> u64 {
        let mut h = splitmix64(self.n_qubits as u64 ^ 0x5151_7ff0);
        h = splitmix64(h ^ self.x_bits);
        h = splitmix64(h ^ self.z_bits.rotate_left(32));
        splitmix64(h ^ self.phase_exp as u64)
    }

    /// Compact label without phase, e.g. `"XIZ"`.
    pub fn letters(&self) -> String {
        (0..self.n_qubits).map(|k| self.letter(k)).collect()
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase_exp {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letters())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(label: &str, n: usize) -> PauliString {
        PauliString::parse(label, n).unwrap()
    }

    #[test]
    fn parse_identity_and_compact() {
        let id = p("II", 2);
        assert!(id.is_identity());
        assert_eq!(id.phase_exp(), 0);

        let xx = p("XX", 2);
        assert_eq!(xx.x_bits(), 0b11);
        assert_eq!(xx.z_bits(), 0);
    }

    #[test]
    fn parse_indexed_three_body_term() {
        let t = p("Z1 X2 Z3", 5);
        assert_eq!(t.z_bits(), 0b101);
        assert_eq!(t.x_bits(), 0b010);
        assert_eq!(t.letters(), "ZXZII");
        assert!(t.is_canonical());
    }

    #[test]
    fn parse_errors_name_the_token() {
        match PauliString::parse("X1 Q2", 3) {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "Q2"),
            other => panic!("unexpected {other:?}"),
        }
        match PauliString::parse("X1 Z4", 3) {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "Z4"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PauliString::parse("XY", 3).is_err());
        assert!(PauliString::parse("X1 Z1", 3).is_err());
        assert!(PauliString::parse("X", 0).is_err());
    }

    #[test]
    fn single_qubit_table() {
        let x = p("X", 1);
        let y = p("Y", 1);
        let z = p("Z", 1);
        let xy = x.multiply(&y).unwrap();
        assert_eq!(xy.letters(), "Z");
        assert_eq!(xy.phase_exp(), 1);
        assert_eq!(y.multiply(&z).unwrap().to_string(), "iX");
        assert_eq!(z.multiply(&x).unwrap().to_string(), "iY");
        assert_eq!(y.multiply(&x).unwrap().to_string(), "-iZ");
        assert_eq!(x.multiply(&z).unwrap().to_string(), "-iY");
    }

    #[test]
    fn two_qubit_product_phase() {
        let r = p("XX", 2).multiply(&p("YY", 2)).unwrap();
        assert_eq!(r.letters(), "ZZ");
        assert_eq!(r.phase_exp(), 2);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        assert!(matches!(
            p("X", 1).multiply(&p("XX", 2)),
            Err(Error::Dimension { .. })
        ));
        assert!(p("X", 1).commutes(&p("XX", 2)).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let iz = PauliString::from_bits(1, 0, 1, 1).unwrap();
        let (c, ph) = iz.canonicalize();
        assert_eq!(c, p("Z", 1));
        assert_eq!(ph, Complex64::new(0.0, 1.0));

        let mzz = PauliString::from_bits(2, 0, 0b11, 2).unwrap();
        let (c, ph) = mzz.canonicalize();
        assert_eq!(c, p("ZZ", 2));
        assert_eq!(ph, Complex64::new(-1.0, 0.0));

        let (c, ph) = PauliString::identity(3).canonicalize();
        assert!(c.is_identity());
        assert_eq!(ph, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn commutation_examples() {
        assert!(p("X", 1).commutes(&p("X", 1)).unwrap());
        assert!(!p("X", 1).commutes(&p("Z", 1)).unwrap());
        assert!(p("XX", 2).commutes(&p("ZZ", 2)).unwrap());
    }

    #[test]
    fn index_masks_put_qubit_one_first() {
        let (x, z) = p("XIZ", 3).index_masks();
        assert_eq!(x, 0b100);
        assert_eq!(z, 0b001);
    }

    #[test]
    fn hermiticity_follows_phase() {
        assert!(p("Y", 1).is_hermitian());
        assert!(!PauliString::from_bits(1, 1, 1, 1).unwrap().is_hermitian());
        assert!(PauliString::from_bits(1, 1, 1, 2).unwrap().is_hermitian());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        let m = (1u64 << n) - 1;
        (0..=m, 0..=m, 0u8..4).prop_map(move |(x, z, ph)| PauliString::from_bits(n, x, z, ph).unwrap())
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(
            (a, b, c) in (1usize..=6).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
        ) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn canonical_strings_square_to_identity(a in (1usize..=6).prop_flat_map(arb_pauli)) {
            let (c, _) = a.canonicalize();
            prop_assert!(c.multiply(&c).unwrap().is_identity());
        }

        #[test]
        fn canonical_closure(
            (a, b) in (1usize..=6).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
        ) {
            let (ca, _) = a.canonicalize();
            let (cb, _) = b.canonicalize();
            let (prod, phase) = ca.multiply(&cb).unwrap().canonicalize();
            prop_assert!(prod.is_canonical());
            prop_assert!((phase.norm() - 1.0).abs() == 0.0);
        }

        #[test]
        fn commutation_matches_product_order(
            (a, b) in (1usize..=6).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))
        ) {
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            prop_assert_eq!(ab.x_bits(), ba.x_bits());
            let same = ab.phase_exp() == ba.phase_exp();
            prop_assert_eq!(a.commutes(&b).unwrap(), same);
        }
    }
}
