//! The tau numbers, the constants `t_g`, and the pair-moment identity they imply.
//!
//! `tau_{g+1} = (5g+1)(5g-1)/3 * tau_g + 1/2 * sum_{h=1}^{g} tau_h tau_{g+1-h}`, `tau_0 = -1`,
//! and `tau_g = 2^(5g-2) Gamma((5g-1)/2) t_g`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// A value `coeff * pi^(sqrt_pi_exp / 2)`.
///
/// At the `t_g` interface the exponent is 0 or -1; Gamma of a half-integer
/// carries +1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqrtPiRational {
    #[serde(with = "rational::pq")]
    pub coeff: Rational,
    pub sqrt_pi_exp: i8,
}

impl SqrtPiRational {
    pub fn rational(coeff: Rational) -> Self {
        SqrtPiRational {
            coeff,
            sqrt_pi_exp: 0,
        }
    }

    pub fn new(coeff: Rational, sqrt_pi_exp: i8) -> Self {
        debug_assert!((-1..=1).contains(&sqrt_pi_exp));
        SqrtPiRational { coeff, sqrt_pi_exp }
    }

    /// Display-only floating value.
    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.coeff) * std::f64::consts::PI.powf(f64::from(self.sqrt_pi_exp) / 2.0)
    }
}

impl fmt::Display for SqrtPiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sqrt_pi_exp {
            0 => write!(f, "{}", rational::to_pq(&self.coeff)),
            1 => write!(f, "{}*sqrt(pi)", rational::to_pq(&self.coeff)),
            e => write!(f, "{}*pi^({}/2)", rational::to_pq(&self.coeff), e),
        }
    }
}

/// `[tau_0, ..., tau_{g_max}]`.
///
/// Runs on the integers `a_g = 6^g tau_g`, for which the recurrence reads
/// `a_{g+1} = 2 (5g+1)(5g-1) a_g + 1/2 sum_{h=1}^{g} a_h a_{g+1-h}`; by
/// induction every `a_g` with `g >= 1` is even, so the halving is exact.
pub fn tau_sequence(g_max: usize) -> Vec<Rational> {
    let mut a: Vec<BigInt> = Vec::with_capacity(g_max + 1);
    a.push(BigInt::from(-1));
    for g in 0..g_max {
        let gi = g as i64;
        let conv = integer_convolution_half(&a, g + 1);
        a.push(BigInt::from(2 * (5 * gi + 1) * (5 * gi - 1)) * &a[g] + conv);
    }
    let six = BigInt::from(6);
    let mut power = BigInt::one();
    a.into_iter()
        .map(|x| {
            let t = Rational::new(x, power.clone());
            power *= &six;
            t
        })
        .collect()
}

/// `1/2 * sum_{h=1}^{m-1} a_h a_{m-h}` for integers whose sum is even.
fn integer_convolution_half(a: &[BigInt], m: usize) -> BigInt {
    let mut acc = BigInt::zero();
    let mut h = 1;
    while 2 * h < m {
        acc += &a[h] * &a[m - h];
        h += 1;
    }
    if 2 * h == m {
        let sq = &a[h] * &a[h];
        debug_assert!(sq.is_even());
        acc += sq / 2;
    }
    acc
}

/// `1/2 * sum_{h=1}^{m-1} tau_h tau_{m-h}`. Uses integer arithmetic over the
/// common denominator `6^m` when every `tau_h` has a denominator dividing
/// `6^h`, and plain rational sums otherwise.
fn convolution_half(tau: &[Rational], m: usize) -> Rational {
    let six = BigInt::from(6);
    let mut scaled = Vec::with_capacity(m);
    let mut power = BigInt::one();
    for t in &tau[..m] {
        let (q, r) = power.div_rem(t.denom());
        if !r.is_zero() {
            return rational_convolution_half(tau, m);
        }
        scaled.push(t.numer() * q);
        power *= &six;
    }
    let mut acc = BigInt::zero();
    for h in 1..m {
        acc += &scaled[h] * &scaled[m - h];
    }
    Rational::new(acc, power * 2)
}

fn rational_convolution_half(tau: &[Rational], m: usize) -> Rational {
    let mut acc = Rational::zero();
    for h in 1..m {
        acc += &tau[h] * &tau[m - h];
    }
    acc / int(2)
}

/// `Gamma(two_k / 2)` exactly.
pub fn gamma_half(two_k: i64) -> Result<SqrtPiRational> {
    if two_k % 2 == 0 {
        let m = two_k / 2;
        if m <= 0 {
            return Err(Error::GammaPole(two_k));
        }
        return Ok(SqrtPiRational::rational(Rational::from_integer(
            rational::factorial((m - 1) as u64),
        )));
    }
    // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi), Gamma(1/2 - k) = (-4)^k k! / (2k)! sqrt(pi)
    let k = (two_k.unsigned_abs() - 1) / 2 + u64::from(two_k < 0);
    let ratio = Rational::new(
        rational::factorial(2 * k),
        BigInt::from(4).pow(k as u32) * rational::factorial(k),
    );
    let coeff = if two_k > 0 {
        ratio
    } else if k.is_multiple_of(2) {
        ratio.recip()
    } else {
        -ratio.recip()
    };
    Ok(SqrtPiRational::new(coeff, 1))
}

/// `t_g = tau_g / (2^(5g-2) Gamma((5g-1)/2))`.
pub fn t_constant(g: usize) -> SqrtPiRational {
    let tau = tau_sequence(g);
    t_from_tau(g, &tau[g])
}

pub fn t_from_tau(g: usize, tau_g: &Rational) -> SqrtPiRational {
    let gi = g as i64;
    let gamma = gamma_half(5 * gi - 1).expect("(5g-1)/2 is never a pole");
    let e = 5 * gi - 2;
    let power = if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    };
    SqrtPiRational::new(tau_g / (power * gamma.coeff), -gamma.sqrt_pi_exp)
}

/// The value of `E[X_g (1 - X_g)]` forced by the recurrence:
/// `(tau_{g+1} - 1/2 sum tau tau) / (2 (5g+1)(5g-1) tau_g)`.
pub fn implied_pair_moment(g: usize) -> Rational {
    let tau = tau_sequence(g + 1);
    implied_pair_moment_from(&tau, g)
}

/// Same as [`implied_pair_moment`] but reusing a precomputed prefix (needs `tau.len() > g + 1`).
pub fn implied_pair_moment_from(tau: &[Rational], g: usize) -> Rational {
    let gi = g as i64;
    let numer = &tau[g + 1] - convolution_half(tau, g + 1);
    let denom = int(2 * (5 * gi + 1) * (5 * gi - 1)) * &tau[g];
    debug_assert!(!denom.is_zero());
    numer / denom
}

/// `tau_g > 0` for all `1 <= g <= g_max`.
pub fn tau_positive_from_one(tau: &[Rational]) -> bool {
    tau.iter().skip(1).all(|t| t.is_positive())
}
