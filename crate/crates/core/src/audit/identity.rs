//! The two quadratic rearrangements behind the Ricci-cone estimates, written
//! once over a generic ring so the numeric campaigns and the exact symbolic
//! certificate evaluate the same expressions.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::algebra::SpectralSummary;

pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn rational(num: i64, den: i64) -> Self;
}

impl Ring for f64 {
    fn rational(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

/// Sorted block spectra. `b` is the signed B-spectrum.
#[derive(Debug, Clone)]
pub struct BlockSpectra<T> {
    pub a: [T; 3],
    pub b: [T; 3],
    pub c: [T; 3],
    pub scalar: T,
}

impl BlockSpectra<f64> {
    pub fn from_summary(s: &SpectralSummary) -> Self {
        Self {
            a: s.a_eigs,
            b: s.b_signed,
            c: s.c_eigs,
            scalar: s.scalar,
        }
    }
}

fn k<T: Ring>(n: i64) -> T {
    T::rational(n, 1)
}

/// Both sides of the rearrangement of the lower bound for `du/dt`, where
/// `u = R + 4 B1 - 4 (B2 + B3)`:
///
/// `R^2/2 + 8|B|^2 + 8(A1+C1)B1 + 16 B2 B3 - 8(A2+C2)B2 - 8(A3+C3)B3 - 16 B1(B2+B3)`
/// `= u^2/2 + 8(B2-B1)(A3+C3) + 8(B3-B1)(A2+C2) + 8(B2+B3)(A1+C1)`.
///
/// Holds identically once `R = 4 tr A = 4 tr C`.
pub fn u_rearrangement<T: Ring>(s: &BlockSpectra<T>) -> (T, T) {
    let [a1, a2, a3] = s.a.clone();
    let [b1, b2, b3] = s.b.clone();
    let [c1, c2, c3] = s.c.clone();
    let r = s.scalar.clone();
    let half = T::rational(1, 2);
    let b_sq = b1.clone() * b1.clone() + b2.clone() * b2.clone() + b3.clone() * b3.clone();
    let lhs = half.clone() * r.clone() * r.clone() + k::<T>(8) * b_sq
        + k::<T>(8) * (a1.clone() + c1.clone()) * b1.clone()
        + k::<T>(16) * b2.clone() * b3.clone()
        - k::<T>(8) * (a2.clone() + c2.clone()) * b2.clone()
        - k::<T>(8) * (a3.clone() + c3.clone()) * b3.clone()
        - k::<T>(16) * b1.clone() * (b2.clone() + b3.clone());
    let u = r + k::<T>(4) * b1.clone() - k::<T>(4) * (b2.clone() + b3.clone());
    let rhs = half * u.clone() * u
        + k::<T>(8) * (b2.clone() - b1.clone()) * (a3 + c3)
        + k::<T>(8) * (b3.clone() - b1.clone()) * (a2 + c2)
        + k::<T>(8) * (b2 + b3) * (a1 + c1);
    (lhs, rhs)
}

/// Both sides of the rearrangement of the lower bound for `dv/dt`, where
/// `v = R - 4 B3`:
///
/// `R^2/2 + 8|B|^2 - 8((A3+C3)B3 + 2 B1 B2)`
/// `= v^2/2 + 8(B2-B1)^2 + 8(A1+A2+C1+C2)B3`.
pub fn v_rearrangement<T: Ring>(s: &BlockSpectra<T>) -> (T, T) {
    let [a1, a2, a3] = s.a.clone();
    let [b1, b2, b3] = s.b.clone();
    let [c1, c2, c3] = s.c.clone();
    let r = s.scalar.clone();
    let half = T::rational(1, 2);
    let b_sq = b1.clone() * b1.clone() + b2.clone() * b2.clone() + b3.clone() * b3.clone();
    let lhs = half.clone() * r.clone() * r.clone() + k::<T>(8) * b_sq
        - k::<T>(8) * ((a3 + c3) * b3.clone() + k::<T>(2) * b1.clone() * b2.clone());
    let v = r - k::<T>(4) * b3.clone();
    let d = b2 - b1;
    let rhs = half * v.clone() * v + k::<T>(8) * d.clone() * d + k::<T>(8) * (a1 + a2 + c1 + c2) * b3;
    (lhs, rhs)
}

/// Polynomial with rational coefficients in nine variables
/// `A1 A2 A3 B1 B2 B3 C1 C2 C3` (in that order).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<[u8; 9], Rational64>,
}

impl Poly {
    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 9];
        e[i] = 1;
        Self::monomial(e, Rational64::from_integer(1))
    }

    fn monomial(e: [u8; 9], c: Rational64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Rational64::from_integer(0) {
            terms.insert(e, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, e: [u8; 9], c: Rational64) {
        let zero = Rational64::from_integer(0);
        let v = *self.terms.get(&e).unwrap_or(&zero) + c;
        if v == zero {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        for (e, c) in rhs.terms {
            self.add_term(e, -c);
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::default();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let mut e = [0u8; 9];
                for i in 0..9 {
                    e[i] = e1[i] + e2[i];
                }
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Ring for Poly {
    fn rational(num: i64, den: i64) -> Self {
        Poly::monomial([0; 9], Rational64::new(num, den))
    }
}

/// Result of expanding `lhs - rhs` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub identity: String,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub remainder_terms: usize,
    pub holds: bool,
}

/// Symbolic spectra with the trace condition eliminated:
/// `C3 = A1 + A2 + A3 - C1 - C2` and `R = 4 (A1 + A2 + A3)`.
pub fn symbolic_spectra() -> BlockSpectra<Poly> {
    let v = Poly::var;
    let tr_a = v(0) + v(1) + v(2);
    BlockSpectra {
        a: [v(0), v(1), v(2)],
        b: [v(3), v(4), v(5)],
        c: [v(6), v(7), tr_a.clone() - v(6) - v(7)],
        scalar: Poly::rational(4, 1) * tr_a,
    }
}

fn certify(name: &str, sides: (Poly, Poly)) -> Certificate {
    let (lhs, rhs) = sides;
    let rem = lhs.clone() - rhs.clone();
    Certificate {
        identity: name.to_string(),
        lhs_terms: lhs.term_count(),
        rhs_terms: rhs.term_count(),
        remainder_terms: rem.term_count(),
        holds: rem.is_zero(),
    }
}

/// Exact expansion of both rearrangements; `holds` means zero remainder.
pub fn symbolic_certificates() -> [Certificate; 2] {
    let s = symbolic_spectra();
    [
        certify("u_rearrangement", u_rearrangement(&s)),
        certify("v_rearrangement", v_rearrangement(&s)),
    ]
}
