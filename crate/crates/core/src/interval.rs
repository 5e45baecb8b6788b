//! Closed-interval arithmetic over f64 endpoints.
//!
//! Endpoints are computed in ordinary floating point, without directed
//! rounding: the certificate inequalities this feeds carry slacks orders
//! of magnitude above one ulp, so outward rounding would buy nothing and
//! would spoil exact comparisons against analytically derived constants.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(self, other: Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Monotone image under exp.
    pub fn exp(self) -> Self {
        Self {
            lo: self.lo.exp(),
            hi: self.hi.exp(),
        }
    }

    /// Integer power with the usual even/odd case split.
    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Self::point(1.0);
        }
        let (pl, ph) = (self.lo.powi(k as i32), self.hi.powi(k as i32));
        if k % 2 == 1 || self.lo >= 0.0 {
            Self { lo: pl, hi: ph }
        } else if self.hi <= 0.0 {
            Self { lo: ph, hi: pl }
        } else {
            Self {
                lo: 0.0,
                hi: pl.max(ph),
            }
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        Interval {
            lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-1.0, 3.0);
        assert_eq!(a + b, Interval::new(0.0, 5.0));
        assert_eq!(a - b, Interval::new(-2.0, 3.0));
        assert_eq!(a * b, Interval::new(-2.0, 6.0));
        assert_eq!((-a), Interval::new(-2.0, -1.0));
    }

    #[test]
    fn powers_across_zero() {
        let i = Interval::new(-2.0, 1.5);
        assert_eq!(i.powi(2), Interval::new(0.0, 4.0));
        assert_eq!(i.powi(3), Interval::new(-8.0, 3.375));
        assert_eq!(i.powi(0), Interval::point(1.0));
    }

    proptest! {
        /// Inclusion: f(x) lies in F([a,b]) for every x in [a,b], for a
        /// composite expression of the supported operations.
        #[test]
        fn inclusion_property(a in -3.0f64..3.0, w in 0.0f64..2.0, t in 0.0f64..1.0) {
            let (lo, hi) = (a, a + w);
            let x = lo + t * (hi - lo);
            let ix = Interval::new(lo, hi);
            let fx = (x * x - 2.0 * x).exp() + x * x * x;
            let fi = (ix * ix - Interval::point(2.0) * ix).exp() + ix.powi(3);
            // Allow a few ulps of slack: endpoint arithmetic is unrounded.
            let pad = 1e-9 * (1.0 + fi.hi.abs());
            prop_assert!(fi.lo - pad <= fx && fx <= fi.hi + pad);
        }
    }
}
