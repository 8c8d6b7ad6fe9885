//! Double-double arithmetic for evaluating closed-form metric entries on
//! finite-difference stencils. Second differences at `h = 1e-4` amplify the
//! rounding of an f64 evaluation by `1/h^2`; with about 32 significant digits
//! the stencil is limited by truncation instead.
//!
//! Accuracy is that of the classical double-double algorithms (about 1e-31
//! relative); `exp` is only used to polish logarithms.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::norm(s, e + f)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::norm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        Self::norm(q1, q2) + Self::new(q3)
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        self + Self::new(o)
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        self * Self::new(o)
    }
}

impl DoubleDouble {
    /// `exp` by Taylor series after halving the argument twelve times.
    fn exp(self) -> Self {
        const HALVINGS: i32 = 12;
        let r = self * 0.5f64.powi(HALVINGS);
        let mut term = Self::new(1.0);
        let mut sum = Self::new(1.0);
        for n in 1..=12 {
            term = term * r / Self::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..HALVINGS {
            sum = sum * sum;
        }
        sum
    }
}

impl Scalar for DoubleDouble {
    fn cst(v: f64) -> Self {
        Self::new(v)
    }

    fn value(self) -> f64 {
        self.to_f64()
    }

    /// One Newton step on `exp(y) = x` from the double logarithm.
    fn ln(self) -> Self {
        let y = Self::new(self.hi.ln());
        y + self * (-y).exp() - Self::new(1.0)
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(0.0);
        }
        let s = Self::new(self.hi.sqrt());
        s + (self - s * s) / (s * 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_lost_digits() {
        let a = DoubleDouble::sum(1.0, 1e-20);
        assert_eq!((a - DoubleDouble::new(1.0)).to_f64(), 1e-20);
        let third = DoubleDouble::new(1.0) / DoubleDouble::new(3.0);
        let back = third * 3.0 - DoubleDouble::new(1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn products_are_exact_to_working_precision() {
        let x = DoubleDouble::sum(1.0, 1e-17);
        let sq = x * x;
        // (1 + e)^2 = 1 + 2e + e^2
        assert!(((sq - DoubleDouble::new(1.0)).to_f64() - 2e-17).abs() < 1e-32);
    }

    #[test]
    fn log_and_root_are_double_double_accurate() {
        // ln(1 + 1e-20) = 1e-20 to working precision
        let x = DoubleDouble::sum(1.0, 1e-20);
        assert!((x.ln().to_f64() - 1e-20).abs() < 1e-30);
        let three = DoubleDouble::new(3.0);
        let back = three.ln().exp() - three;
        assert!(back.to_f64().abs() < 1e-26);
        let two = DoubleDouble::new(2.0);
        let root = two.sqrt();
        assert!((root * root - two).to_f64().abs() < 1e-31);
    }
}
