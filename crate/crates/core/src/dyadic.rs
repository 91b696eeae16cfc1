//! Exact dyadic radii `0` and `2^-m`.

use std::cmp::Ordering;
use std::fmt;

/// A radius that is either zero or a non-positive power of two, `2^-m`.
///
/// Ordered as real numbers: `Zero` is the least value and a larger
/// exponent means a smaller radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dyadic {
    Zero,
    /// `2^-m` for the contained `m`.
    InvPow2(u32),
}

impl Dyadic {
    pub fn is_zero(self) -> bool {
        matches!(self, Dyadic::Zero)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Dyadic::Zero => 0.0,
            Dyadic::InvPow2(m) => 2f64.powi(-(m as i32)),
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Dyadic::Zero, Dyadic::Zero) => Ordering::Equal,
            (Dyadic::Zero, _) => Ordering::Less,
            (_, Dyadic::Zero) => Ordering::Greater,
            (Dyadic::InvPow2(a), Dyadic::InvPow2(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dyadic::Zero => write!(f, "0"),
            Dyadic::InvPow2(0) => write!(f, "1"),
            Dyadic::InvPow2(m) => write!(f, "2^-{m}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_real_values() {
        let mut v = vec![
            Dyadic::InvPow2(3),
            Dyadic::Zero,
            Dyadic::InvPow2(0),
            Dyadic::InvPow2(1),
        ];
        v.sort();
        let reals: Vec<f64> = v.iter().map(|d| d.to_f64()).collect();
        assert_eq!(reals, vec![0.0, 0.125, 0.5, 1.0]);
    }

    #[test]
    fn display() {
        assert_eq!(Dyadic::Zero.to_string(), "0");
        assert_eq!(Dyadic::InvPow2(0).to_string(), "1");
        assert_eq!(Dyadic::InvPow2(2).to_string(), "2^-2");
    }
}
