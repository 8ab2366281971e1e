//! Truncated power series with exact rational coefficients, and the series
//! forms of the tau recurrence.
//!
//! A [`TruncatedSeries`] of order `N` stands for a series modulo `s^(N+1)`.
//! Binary operations return the smaller of the two orders; nothing is ever
//! zero-extended.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::constants::tau_sequence;
use crate::rational::{self, frac, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    /// A series of order `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs order >= 0");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    /// The monomial `c * s^k`, truncated at `order`.
    pub fn monomial(c: Rational, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `s^n`; `None` beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Option<&Rational> {
        self.coeffs.get(n)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        TruncatedSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplication by `s^k`. The product is known to order `N + k`; the
    /// result keeps order `N`.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        for i in k..=n {
            out.coeffs[i] = self.coeffs[i - k].clone();
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::monomial(Rational::one(), 0, self.order());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Applies `prod (a_i theta + b_i)` with `theta = s d/ds`, acting
    /// diagonally: the coefficient of `s^n` is multiplied by `prod (a_i n + b_i)`.
    pub fn theta_apply(&self, factors: &[(Rational, Rational)]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let nn = int(n as i64);
                factors
                    .iter()
                    .rev()
                    .fold(c.clone(), |acc, (a, b)| acc * (a * &nn + b))
            })
            .collect();
        TruncatedSeries { coeffs }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=n).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=n).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(rhs.order());
        let mut coeffs = vec![Rational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $m(self, rhs: TruncatedSeries) -> TruncatedSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A Laurent series `sum_{e >= start} c_e s^e` known modulo `s^prec`.
///
/// Used to evaluate differential polynomials with negative powers of `s`:
/// every operation tracks how much absolute precision survives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    start: i32,
    prec: i32,
    coeffs: Vec<Rational>,
}

impl LaurentSeries {
    pub fn from_truncated(t: &TruncatedSeries) -> Self {
        LaurentSeries {
            start: 0,
            prec: t.order() as i32 + 1,
            coeffs: t.coeffs.clone(),
        }
    }

    /// The exact monomial `c s^e`, known to precision `prec`.
    pub fn monomial(c: Rational, e: i32, prec: i32) -> Self {
        let mut out = LaurentSeries {
            start: e,
            prec: prec.max(e),
            coeffs: vec![Rational::zero(); (prec - e).max(0) as usize],
        };
        if e < prec {
            out.coeffs[0] = c;
        }
        out
    }

    pub fn zero(prec: i32) -> Self {
        LaurentSeries {
            start: prec,
            prec,
            coeffs: Vec::new(),
        }
    }

    /// Exponent up to which (exclusive) the coefficients are known.
    pub fn precision(&self) -> i32 {
        self.prec
    }

    pub fn coeff(&self, e: i32) -> Option<Rational> {
        if e >= self.prec {
            None
        } else if e < self.start {
            Some(Rational::zero())
        } else {
            Some(self.coeffs[(e - self.start) as usize].clone())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn first_nonzero(&self) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.start + i as i32)
    }

    pub fn add(&self, rhs: &LaurentSeries) -> LaurentSeries {
        let start = self.start.min(rhs.start);
        let prec = self.prec.min(rhs.prec);
        let len = (prec - start).max(0) as usize;
        let coeffs = (0..len)
            .map(|i| {
                let e = start + i as i32;
                self.coeff(e).unwrap() + rhs.coeff(e).unwrap()
            })
            .collect();
        LaurentSeries {
            start: start.min(prec),
            prec,
            coeffs,
        }
    }

    pub fn scale(&self, c: &Rational) -> LaurentSeries {
        LaurentSeries {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, rhs: &LaurentSeries) -> LaurentSeries {
        let start = self.start + rhs.start;
        let prec = (self.prec + rhs.start).min(rhs.prec + self.start);
        let len = (prec - start).max(0) as usize;
        let mut coeffs = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        LaurentSeries {
            start: start.min(prec),
            prec,
            coeffs,
        }
    }

    pub fn derivative(&self) -> LaurentSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * int(i64::from(self.start) + i as i64))
            .collect();
        LaurentSeries {
            start: self.start - 1,
            prec: self.prec - 1,
            coeffs,
        }
    }
}

/// `L_0(z) = sum Catalan(n) 3^n z^n`, the labelled plane trees.
pub fn l0_series(order: usize) -> TruncatedSeries {
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut c = Rational::one();
    for n in 0..=order {
        coeffs.push(c.clone());
        // Catalan(n+1) 3^(n+1) = Catalan(n) 3^n * 3 * 2(2n+1)/(n+2)
        let n = n as i64;
        c *= frac(3 * 2 * (2 * n + 1), n + 2);
    }
    TruncatedSeries::new(coeffs)
}

/// `(1 - 6z L_0)^2 - (1 - 12z)`, identically zero.
pub fn kernel_check(order: usize) -> TruncatedSeries {
    let one = TruncatedSeries::monomial(Rational::one(), 0, order);
    let kernel = &one - &l0_series(order).shift_up(1).scale(&int(6));
    let target = &one - &TruncatedSeries::monomial(int(12), 1, order);
    &(&kernel * &kernel) - &target
}

/// `U(s) = sum_{g >= 1} tau_g s^g` modulo `s^(order+1)`.
pub fn tau_series(order: usize) -> TruncatedSeries {
    let mut coeffs = tau_sequence(order);
    coeffs[0] = Rational::zero();
    TruncatedSeries::new(coeffs)
}

fn affine(a: i64, b: i64) -> (Rational, Rational) {
    (int(a), int(b))
}

/// `(5 theta - 3)(5 theta - 5)(5 theta - 7)(5 theta - 9)(5 theta - 11)`.
pub fn falling_five() -> Vec<(Rational, Rational)> {
    [3, 5, 7, 9, 11].iter().map(|&b| affine(5, -b)).collect()
}

/// Residual of `U = s/3 + U^2/2 + (s/3)(5 theta + 1)(5 theta - 1) U`.
pub fn verify_tau_ode(order: usize) -> TruncatedSeries {
    let u = tau_series(order);
    let third_s = TruncatedSeries::monomial(frac(1, 3), 1, order);
    let quadratic = (&u * &u).scale(&frac(1, 2));
    let linear = u
        .theta_apply(&[affine(5, 1), affine(5, -1)])
        .shift_up(1)
        .scale(&frac(1, 3));
    &(&(&u - &third_s) - &quadratic) - &linear
}

/// Residual of
/// `4/15 (5 theta - 3)_((5)) (s^2 U) + (5 theta - 3)(6U^2 - 2U^3) - 12 (theta - 1)(U - s/3) + 28 s^2`.
pub fn verify_eliminate_identity(order: usize) -> TruncatedSeries {
    let u = tau_series(order);
    let lhs = u.shift_up(2).theta_apply(&falling_five()).scale(&frac(4, 15));
    let nonlinear = &(&u * &u).scale(&int(6)) - &u.pow(3).scale(&int(2));
    let nonlinear = nonlinear.theta_apply(&[affine(5, -3)]);
    let third_s = TruncatedSeries::monomial(frac(1, 3), 1, order);
    let shifted = (&u - &third_s).theta_apply(&[affine(1, -1)]).scale(&int(12));
    let constant = TruncatedSeries::monomial(int(28), 2, order);
    &(&(&lhs + &nonlinear) - &shifted) + &constant
}

/// The constant of the third case, in its raw form and its simplified form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CPrime {
    pub g: usize,
    #[serde(with = "rational::pq")]
    pub raw: Rational,
    #[serde(with = "rational::pq")]
    pub simplified: Rational,
}

/// `raw = 12(g+1)/(5g+7) tau_{g+2} - (6 S2 - 2 S3)` with `S2`, `S3` the
/// positive-index sums over `g+2`; `simplified = 4/15 (5g+5)(5g+3)(5g+1)(5g-1) tau_g`.
pub fn cprime_check(g: usize) -> CPrime {
    let tau = tau_sequence(g + 2);
    cprime_from(&tau, g)
}

pub fn cprime_from(tau: &[Rational], g: usize) -> CPrime {
    let m = g + 2;
    let gi = g as i64;
    let mut s2 = Rational::zero();
    for a in 1..m {
        s2 += &tau[a] * &tau[m - a];
    }
    let mut s3 = Rational::zero();
    for a in 1..m {
        for b in 1..(m - a) {
            s3 += &tau[a] * &tau[b] * &tau[m - a - b];
        }
    }
    let raw = frac(12 * (gi + 1), 5 * gi + 7) * &tau[m] - (s2 * int(6) - s3 * int(2));
    let simplified =
        frac(4 * (5 * gi + 5) * (5 * gi + 3) * (5 * gi + 1) * (5 * gi - 1), 15) * &tau[g];
    CPrime { g, raw, simplified }
}

/// Report for the `series verify` checks.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub which: String,
    pub order: usize,
    pub zero: bool,
    pub first_nonzero: Option<usize>,
    pub first_nonzero_coeff: Option<String>,
}

impl ResidualReport {
    pub fn new(which: &str, residual: &TruncatedSeries) -> Self {
        let first = residual.first_nonzero();
        ResidualReport {
            which: which.to_string(),
            order: residual.order(),
            zero: first.is_none(),
            first_nonzero: first,
            first_nonzero_coeff: first.map(|i| rational::to_pq(&residual.coeffs()[i])),
        }
    }
}
