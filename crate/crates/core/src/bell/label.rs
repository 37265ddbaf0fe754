use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of one of the four Bell states as two classical bits.
///
/// `a` is the phase-error bit and `b` the amplitude-error bit:
/// `00 = Φ⁺`, `01 = Ψ⁺`, `10 = Φ⁻`, `11 = Ψ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel {
    pub a: bool,
    pub b: bool,
}

impl BellLabel {
    pub const PHI_PLUS: BellLabel = BellLabel { a: false, b: false };
    pub const PSI_PLUS: BellLabel = BellLabel { a: false, b: true };
    pub const PHI_MINUS: BellLabel = BellLabel { a: true, b: false };
    pub const PSI_MINUS: BellLabel = BellLabel { a: true, b: true };

    /// All labels in code order.
    pub const ALL: [BellLabel; 4] = [Self::PHI_PLUS, Self::PSI_PLUS, Self::PHI_MINUS, Self::PSI_MINUS];

    pub const fn new(a: bool, b: bool) -> Self {
        BellLabel { a, b }
    }

    /// Two-bit code `2a + b`.
    pub const fn code(self) -> usize {
        ((self.a as usize) << 1) | self.b as usize
    }

    pub const fn from_code(code: usize) -> Self {
        BellLabel {
            a: code & 2 != 0,
            b: code & 1 != 0,
        }
    }

    /// The bit revealed by comparing measurement results along `axis`.
    pub const fn revealed(self, axis: Axis) -> bool {
        match axis {
            Axis::Z => self.b,
            Axis::X => self.a,
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a as u8, self.b as u8)
    }
}

/// Measurement axis of a bilateral projective measurement.
///
/// Comparing Z outcomes reveals the amplitude bit `b` of the measured pair,
/// comparing X outcomes reveals the phase bit `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
}

impl Axis {
    pub const fn dual(self) -> Axis {
        match self {
            Axis::Z => Axis::X,
            Axis::X => Axis::Z,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Z => "Z",
            Axis::X => "X",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for code in 0..4 {
            assert_eq!(BellLabel::from_code(code).code(), code);
        }
        assert_eq!(BellLabel::PSI_PLUS.to_string(), "01");
        assert_eq!(BellLabel::PHI_MINUS.code(), 2);
    }

    #[test]
    fn axis_reveals_expected_bit() {
        let l = BellLabel::PSI_PLUS;
        assert!(l.revealed(Axis::Z));
        assert!(!l.revealed(Axis::X));
    }
}
