//! Forward-mode automatic differentiation.
//!
//! [`Jet`] carries value, gradient and Hessian in up to four variables over
//! any [`Scalar`]; [`Dual`] carries value and gradient. Closed-form metric
//! entries evaluated on `Jet<f64>` give exact first and second partials, and
//! on `Jet<Dual>` additionally the derivative of all of those with respect to
//! the base point, which is what the gradient of scalar curvature needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const JET_VARS: usize = 4;

/// Arithmetic needed by the closed-form metric and potential expressions.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Constant given as an unevaluated sum `hi + lo`.
    fn cst2(hi: f64, lo: f64) -> Self {
        Self::cst(hi) + lo
    }
    /// Plain value, dropping derivative or low-order parts.
    fn value(self) -> f64;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Value and gradient in up to four variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: [f64; JET_VARS],
}

impl Dual {
    pub fn var(v: f64, i: usize) -> Self {
        let mut d = [0.0; JET_VARS];
        d[i] = 1.0;
        Self { v, d }
    }

    fn chain(self, f0: f64, f1: f64) -> Self {
        Self {
            v: f0,
            d: self.d.map(|x| f1 * x),
        }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: std::array::from_fn(|i| self.d[i] + o.d[i]),
        }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: std::array::from_fn(|i| self.d[i] - o.d[i]),
        }
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: std::array::from_fn(|i| self.d[i] * o.v + self.v * o.d[i]),
        }
    }
}

impl Div for Dual {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Add<f64> for Dual {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            v: self.v * s,
            d: self.d.map(|x| x * s),
        }
    }
}

impl Scalar for Dual {
    fn cst(v: f64) -> Self {
        Self { v, d: [0.0; JET_VARS] }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn recip(self) -> Self {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x))
    }
}

/// Value, gradient and Hessian in up to four variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T = f64> {
    pub v: T,
    pub g: [T; JET_VARS],
    pub h: [[T; JET_VARS]; JET_VARS],
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        let z = T::cst(0.0);
        Self {
            v,
            g: [z; JET_VARS],
            h: [[z; JET_VARS]; JET_VARS],
        }
    }

    /// Independent variable number `i` at value `v`.
    pub fn var(v: T, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = T::cst(1.0);
        j
    }

    /// Composition with a scalar function given its value and first two derivatives.
    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..JET_VARS {
            out.g[i] = f1 * self.g[i];
            for j in 0..JET_VARS {
                out.h[i][j] = f2 * self.g[i] * self.g[j] + f1 * self.h[i][j];
            }
        }
        out
    }

    fn map(self, f: impl Fn(T) -> T) -> Self {
        Self {
            v: f(self.v),
            g: self.g.map(&f),
            h: self.h.map(|row| row.map(&f)),
        }
    }

    fn zip(self, o: Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            v: f(self.v, o.v),
            g: std::array::from_fn(|i| f(self.g[i], o.g[i])),
            h: std::array::from_fn(|i| std::array::from_fn(|j| f(self.h[i][j], o.h[i][j]))),
        }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..JET_VARS {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..JET_VARS {
                out.h[i][j] =
                    self.h[i][j] * o.v + self.g[i] * o.g[j] + self.g[j] * o.g[i] + self.v * o.h[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Add<f64> for Jet<T> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.v = self.v + o;
        self
    }
}

impl<T: Scalar> Mul<f64> for Jet<T> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|a| a * s)
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn cst(v: f64) -> Self {
        Jet::constant(T::cst(v))
    }
    fn value(self) -> f64 {
        self.v.value()
    }
    fn ln(self) -> Self {
        let x = self.v;
        let r = x.recip();
        self.chain(x.ln(), r, -(r * r))
    }
    fn sqrt(self) -> Self {
        let x = self.v;
        let s = x.sqrt();
        let d1 = (s * 2.0).recip();
        self.chain(s, d1, -(d1 / (x * 2.0)))
    }
    fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -(r * r), r * r * r * 2.0)
    }
}
