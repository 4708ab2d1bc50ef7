//! Exact rational arithmetic for the weight calculus. All GIT weights and
//! parabolic degrees are computed over `Ratio<i128>`, so verdicts carry no
//! floating error. Serialization uses `{num, den}` integer pairs.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

pub fn rat_int(n: i128) -> Rat {
    Ratio::from_integer(n)
}

pub fn rat_sign(r: &Rat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Wire form of an exact rational: `{num, den}` with den > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatWire {
    pub num: i128,
    pub den: i128,
}

impl From<Rat> for RatWire {
    fn from(r: Rat) -> Self {
        RatWire {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<RatWire> for Rat {
    fn from(w: RatWire) -> Self {
        Ratio::new(w.num, w.den)
    }
}

impl fmt::Display for RatWire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_roundtrip() {
        let r = rat(-3, 6);
        let w: RatWire = r.into();
        assert_eq!(w, RatWire { num: -1, den: 2 });
        let back: Rat = w.into();
        assert_eq!(back, r);
    }
}
