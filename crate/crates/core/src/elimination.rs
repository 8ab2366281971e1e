//! Differential elimination behind the `(5 theta - 3)_((5))` identity.
//!
//! Polynomials live in `Q[s, 1/s, U_0, ..., U_5]` where `U_i` stands for the
//! i-th derivative of `U(s) = sum_{g >= 1} tau_g s^g`. Starting from the tau
//! ODE `E_0`, its derivatives `E_1..E_3` are linear and triangular in
//! `U_2..U_5`; solving them expresses every higher derivative through `U_0`,
//! `U_1` and Laurent monomials in `s`, after which the fifth-order operator
//! applied to `s^2 U` collapses to the claimed right-hand side.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, frac, int, Rational};
use crate::series::{tau_series, LaurentSeries, TruncatedSeries};

pub const N_DERIVATIVES: usize = 6;
pub const MIN_S_EXP: i32 = -12;
pub const MAX_S_EXP: i32 = 12;

/// `s^s_exp * prod U_i^u_exps[i]`. Ordered by `s_exp`, then the exponent
/// vector lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffMonomial {
    pub s_exp: i32,
    pub u_exps: [u8; N_DERIVATIVES],
}

impl DiffMonomial {
    pub fn new(s_exp: i32, u_exps: [u8; N_DERIVATIVES]) -> Result<Self> {
        if !(MIN_S_EXP..=MAX_S_EXP).contains(&s_exp) {
            return Err(Error::ExponentOverflow(s_exp));
        }
        Ok(DiffMonomial { s_exp, u_exps })
    }

    pub fn u_degree(&self) -> u32 {
        self.u_exps.iter().map(|&e| u32::from(e)).sum()
    }

    fn times(&self, other: &DiffMonomial) -> Result<DiffMonomial> {
        let mut u = self.u_exps;
        for (a, b) in u.iter_mut().zip(other.u_exps.iter()) {
            *a += *b;
        }
        DiffMonomial::new(self.s_exp + other.s_exp, u)
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.s_exp != 0 {
            parts.push(format!("s^{}", self.s_exp));
        }
        for (i, &e) in self.u_exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("U{i}")),
                _ => parts.push(format!("U{i}^{e}")),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Sparse polynomial with exact coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffPoly {
    terms: BTreeMap<DiffMonomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, 0, [0; N_DERIVATIVES]).expect("s^0 is in range")
    }

    pub fn term(c: Rational, s_exp: i32, u_exps: [u8; N_DERIVATIVES]) -> Result<Self> {
        let mut p = DiffPoly::zero();
        p.add_term(DiffMonomial::new(s_exp, u_exps)?, c);
        Ok(p)
    }

    /// `c * s^e`.
    pub fn s_pow(c: Rational, e: i32) -> Result<Self> {
        Self::term(c, e, [0; N_DERIVATIVES])
    }

    /// `c * s^e * U_i`.
    pub fn u(c: Rational, e: i32, i: usize) -> Result<Self> {
        let mut u = [0; N_DERIVATIVES];
        u[i] = 1;
        Self::term(c, e, u)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &DiffMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: DiffMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &DiffPoly) -> DiffPoly {
        self.add(&rhs.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &DiffPoly) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<DiffPoly> {
        let mut acc = DiffPoly::constant(Rational::one());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Largest `i` with `U_i` present.
    pub fn max_derivative(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|m| (0..N_DERIVATIVES).filter(move |&i| m.u_exps[i] > 0))
            .max()
    }

    pub fn degree_in(&self, i: usize) -> u8 {
        self.terms.keys().map(|m| m.u_exps[i]).max().unwrap_or(0)
    }

    /// Formal `d/ds`: power rule on `s`, `U_i -> U_{i+1}`, product rule.
    pub fn derive(&self) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if m.u_exps[N_DERIVATIVES - 1] > 0 {
                return Err(Error::DerivativeTooHigh(N_DERIVATIVES));
            }
            if m.s_exp != 0 {
                let mut d = *m;
                d.s_exp -= 1;
                let d = DiffMonomial::new(d.s_exp, d.u_exps)?;
                out.add_term(d, c * int(i64::from(m.s_exp)));
            }
            for i in 0..N_DERIVATIVES - 1 {
                let e = m.u_exps[i];
                if e == 0 {
                    continue;
                }
                let mut u = m.u_exps;
                u[i] -= 1;
                u[i + 1] += 1;
                out.add_term(DiffMonomial::new(m.s_exp, u)?, c * int(i64::from(e)));
            }
        }
        Ok(out)
    }

    /// `theta = s d/ds`.
    pub fn theta(&self) -> Result<DiffPoly> {
        DiffPoly::s_pow(Rational::one(), 1)?.mul(&self.derive()?)
    }

    /// Applies `prod (a theta + b)`, rightmost factor first.
    pub fn theta_apply(&self, factors: &[(Rational, Rational)]) -> Result<DiffPoly> {
        let mut acc = self.clone();
        for (a, b) in factors.iter().rev() {
            acc = acc.theta()?.scale(a).add(&acc.scale(b));
        }
        Ok(acc)
    }

    /// Replaces `U_i` by `value` everywhere.
    pub fn substitute(&self, i: usize, value: &DiffPoly) -> Result<DiffPoly> {
        let mut powers: Vec<DiffPoly> = vec![DiffPoly::constant(Rational::one())];
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let e = m.u_exps[i] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap().mul(value)?;
                powers.push(next);
            }
            let mut rest = *m;
            rest.u_exps[i] = 0;
            let rest = DiffPoly {
                terms: BTreeMap::from([(rest, c.clone())]),
            };
            out = out.add(&rest.mul(&powers[e])?);
        }
        Ok(out)
    }

    /// Writes `self = a * U_i + r` with `r` free of `U_i`; fails unless `self`
    /// has degree exactly one in `U_i`.
    pub fn split_linear(&self, i: usize) -> Result<(DiffPoly, DiffPoly)> {
        let mut a = DiffPoly::zero();
        let mut r = DiffPoly::zero();
        for (m, c) in &self.terms {
            match m.u_exps[i] {
                0 => r.add_term(*m, c.clone()),
                1 => {
                    let mut q = *m;
                    q.u_exps[i] = 0;
                    a.add_term(q, c.clone());
                }
                d => {
                    return Err(Error::Elimination(format!(
                        "degree {d} in U_{i}, expected a linear equation"
                    )))
                }
            }
        }
        if a.is_zero() {
            return Err(Error::Elimination(format!("U_{i} does not occur")));
        }
        Ok((a, r))
    }

    /// Inverse of a single monomial `c s^k` with no `U` factor.
    pub fn monomial_inverse(&self) -> Result<DiffPoly> {
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((m, c)), None) if m.u_degree() == 0 => DiffPoly::s_pow(c.recip(), -m.s_exp),
            _ => Err(Error::Elimination(format!(
                "cannot divide by the non-monomial coefficient {self}"
            ))),
        }
    }

    /// Evaluates with `U_i` replaced by the given Laurent series.
    pub fn evaluate(&self, u: &[LaurentSeries; N_DERIVATIVES], prec: i32) -> LaurentSeries {
        let mut acc = LaurentSeries::zero(prec);
        for (m, c) in &self.terms {
            let mut t = LaurentSeries::monomial(c.clone(), m.s_exp, prec);
            for (i, &e) in m.u_exps.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&u[i]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", rational::to_pq(c), m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `E_0 = U_0 - s/3 - U_0^2/2 - (s/3)(25 s U_1 + 25 s^2 U_2 - U_0)`.
pub fn build_e0() -> DiffPoly {
    let mut u0sq = [0; N_DERIVATIVES];
    u0sq[0] = 2;
    let parts = [
        DiffPoly::u(int(1), 0, 0),
        DiffPoly::s_pow(frac(-1, 3), 1),
        DiffPoly::term(frac(-1, 2), 0, u0sq),
        DiffPoly::u(frac(-25, 3), 2, 1),
        DiffPoly::u(frac(-25, 3), 3, 2),
        DiffPoly::u(frac(1, 3), 1, 0),
    ];
    parts
        .into_iter()
        .map(|p| p.expect("exponents are small"))
        .fold(DiffPoly::zero(), |acc, p| acc.add(&p))
}

/// `[E_0, E_1, E_2, E_3]`.
pub fn build_system() -> Result<Vec<DiffPoly>> {
    let mut eqs = vec![build_e0()];
    for _ in 1..4 {
        let next = eqs.last().unwrap().derive()?;
        eqs.push(next);
    }
    Ok(eqs)
}

/// `U_2..U_5` as polynomials in `s^(+-1)`, `U_0`, `U_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// `exprs[k]` is the expression of `U_{k+2}`.
    pub exprs: Vec<DiffPoly>,
}

impl Solution {
    pub fn expr(&self, i: usize) -> &DiffPoly {
        &self.exprs[i - 2]
    }

    /// Substitutes every solved derivative, highest first.
    pub fn reduce(&self, p: &DiffPoly) -> Result<DiffPoly> {
        let mut out = p.clone();
        for i in (2..N_DERIVATIVES).rev() {
            if out.degree_in(i) > 0 {
                out = out.substitute(i, self.expr(i))?;
            }
        }
        Ok(out)
    }
}

/// Solves `E_0..E_3` for `U_2..U_5`, substituting as it goes.
pub fn triangular_solve() -> Result<Solution> {
    let eqs = build_system()?;
    let mut exprs: Vec<DiffPoly> = Vec::new();
    for (k, eq) in eqs.iter().enumerate() {
        let target = k + 2;
        if eq.max_derivative() != Some(target) {
            return Err(Error::Elimination(format!(
                "E_{k} does not end at U_{target}"
            )));
        }
        let mut e = eq.clone();
        for (j, ex) in exprs.iter().enumerate() {
            e = e.substitute(j + 2, ex)?;
        }
        let (a, r) = e.split_linear(target)?;
        if r.max_derivative().is_some_and(|m| m > 1) {
            return Err(Error::Elimination(format!(
                "E_{k} is not triangular after substitution"
            )));
        }
        exprs.push(r.mul(&a.monomial_inverse()?)?.scale(&int(-1)));
    }
    Ok(Solution { exprs })
}

/// The same solution reached the other way round: each `E_k` is first solved
/// for `U_{k+2}` in terms of all lower derivatives, then lower expressions are
/// substituted from the top down.
pub fn triangular_solve_top_down() -> Result<Solution> {
    let eqs = build_system()?;
    let mut raw = Vec::new();
    for (k, eq) in eqs.iter().enumerate() {
        let (a, r) = eq.split_linear(k + 2)?;
        raw.push(r.mul(&a.monomial_inverse()?)?.scale(&int(-1)));
    }
    let mut exprs = Vec::new();
    for k in 0..raw.len() {
        let mut e = raw[k].clone();
        for j in (0..k).rev() {
            e = e.substitute(j + 2, &raw[j])?;
        }
        exprs.push(e);
    }
    Ok(Solution { exprs })
}

/// `(4/15)(5 theta - 3)_((5))(s^2 U_0)` before any reduction.
pub fn lhs_operator_expansion() -> Result<DiffPoly> {
    let s2u = DiffPoly::u(Rational::one(), 2, 0)?;
    Ok(s2u
        .theta_apply(&crate::series::falling_five())?
        .scale(&frac(4, 15)))
}

/// `-(5 theta - 3)(6 U_0^2 - 2 U_0^3) + 12 (theta - 1)(U_0 - s/3) - 28 s^2`.
pub fn rhs_expression() -> Result<DiffPoly> {
    let u0 = DiffPoly::u(Rational::one(), 0, 0)?;
    let cubic = u0.pow(2)?.scale(&int(6)).sub(&u0.pow(3)?.scale(&int(2)));
    let nonlinear = cubic.theta_apply(&[(int(5), int(-3))])?.scale(&int(-1));
    let shifted = u0
        .sub(&DiffPoly::s_pow(frac(1, 3), 1)?)
        .theta_apply(&[(int(1), int(-1))])?
        .scale(&int(12));
    Ok(nonlinear
        .add(&shifted)
        .add(&DiffPoly::s_pow(int(-28), 2)?))
}

/// The full derivation, with every intermediate kept for reporting.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub system: Vec<DiffPoly>,
    pub solution: Solution,
    pub lhs_reduced: DiffPoly,
    pub rhs: DiffPoly,
    pub residual: DiffPoly,
}

/// Reduces the left-hand side with the solved derivatives and subtracts the
/// right-hand side. The identity holds iff `residual` is the zero polynomial.
pub fn derive_rhs_identity() -> Result<Derivation> {
    let system = build_system()?;
    let solution = triangular_solve()?;
    let lhs_reduced = solution.reduce(&lhs_operator_expansion()?)?;
    let rhs = rhs_expression()?;
    let residual = lhs_reduced.sub(&rhs);
    Ok(Derivation {
        system,
        solution,
        lhs_reduced,
        rhs,
        residual,
    })
}

/// `U_0..U_5` as Laurent series: successive derivatives of the truncated tau series.
pub fn tau_derivatives(order: usize) -> [LaurentSeries; N_DERIVATIVES] {
    let u: TruncatedSeries = tau_series(order);
    let mut out = Vec::with_capacity(N_DERIVATIVES);
    let mut cur = LaurentSeries::from_truncated(&u);
    for _ in 0..N_DERIVATIVES {
        out.push(cur.clone());
        cur = cur.derivative();
    }
    out.try_into().expect("six derivatives")
}

/// Evaluates `p` on the tau series; returns the value and whether it vanishes
/// up to its surviving precision.
pub fn series_residual(p: &DiffPoly, order: usize) -> LaurentSeries {
    let u = tau_derivatives(order);
    p.evaluate(&u, order as i32 + 1)
}

/// Canonical text dump of the solved derivatives and the final residual.
pub fn dump_terms(d: &Derivation) -> String {
    let mut out = String::new();
    for (k, e) in d.solution.exprs.iter().enumerate() {
        out.push_str(&format!("U{} = {}\n", k + 2, e));
    }
    out.push_str(&format!("lhs_reduced = {}\n", d.lhs_reduced));
    out.push_str(&format!("rhs = {}\n", d.rhs));
    out.push_str(&format!("residual: {}\n", d.residual));
    out
}
