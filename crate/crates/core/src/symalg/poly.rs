use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Sym;
use crate::error::SymError;

pub type Rat = BigRational;
pub type CRat = Complex<Rat>;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Gaussian rational `num/den` (real).
pub fn cq(num: i64, den: i64) -> CRat {
    CRat::new(rat(num, den), Rat::zero())
}

/// Purely imaginary Gaussian rational `(num/den) i`.
pub fn cqi(num: i64, den: i64) -> CRat {
    CRat::new(Rat::zero(), rat(num, den))
}

fn crat_to_c64(c: &CRat) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// Exponent vector; maps symbols to nonzero integer exponents.
///
/// Ordered graded-lexicographically: total degree first, then the
/// exponents in the fixed symbol order of [`Sym::ALL`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Monomial(BTreeMap<Sym, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(s: Sym) -> Self {
        Self::var_pow(s, 1)
    }

    pub fn var_pow(s: Sym, k: i32) -> Self {
        let mut m = BTreeMap::new();
        if k != 0 {
            m.insert(s, k);
        }
        Monomial(m)
    }

    pub fn exp(&self, s: Sym) -> i32 {
        self.0.get(&s).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.0.values().map(|&e| e as i64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Sym, i32)> + '_ {
        self.0.iter().map(|(&s, &e)| (s, e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (&s, &e) in &other.0 {
            let v = out.entry(s).or_insert(0);
            *v += e;
            if *v == 0 {
                out.remove(&s);
            }
        }
        Monomial(out)
    }

    fn with_exp(&self, s: Sym, k: i32) -> Monomial {
        let mut out = self.0.clone();
        if k == 0 {
            out.remove(&s);
        } else {
            out.insert(s, k);
        }
        Monomial(out)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for s in Sym::ALL {
            match self.exp(s).cmp(&other.exp(s)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

/// Sparse multivariate (Laurent in the parameters) polynomial with
/// Gaussian rational coefficients. Canonical form: no zero coefficients,
/// term map keyed by exponent vector; equality is map equality.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, CRat>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(CRat::one())
    }

    pub fn constant(c: CRat) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Polynomial::constant(cq(n, 1))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Polynomial::constant(cq(num, den))
    }

    /// The imaginary unit as a constant polynomial.
    pub fn i() -> Self {
        Polynomial::constant(cqi(1, 1))
    }

    pub fn var(s: Sym) -> Self {
        Self::var_pow(s, 1)
    }

    pub fn var_pow(s: Sym, k: i32) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var_pow(s, k), CRat::one());
        p
    }

    pub fn pi() -> Self {
        Polynomial::var(Sym::Pi)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: CRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    e.insert(v);
                }
            }
        }
    }

    pub fn scale(&self, c: &CRat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        let mut out = Polynomial::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn contains_sym(&self, s: Sym) -> bool {
        self.terms.keys().any(|m| m.exp(s) != 0)
    }

    pub fn degree_in(&self, s: Sym) -> i32 {
        self.terms.keys().map(|m| m.exp(s)).max().unwrap_or(0)
    }

    /// Formal partial derivative. Valid for Laurent exponents as well.
    pub fn derivative(&self, s: Sym) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let k = m.exp(s);
            if k == 0 {
                continue;
            }
            out.add_term(m.with_exp(s, k - 1), c.clone() * cq(k as i64, 1));
        }
        out
    }

    /// Substitute bound symbols by exact constants; unbound symbols stay formal.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, CRat>) -> Result<Polynomial, SymError> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (s, e) in m.iter() {
                match bindings.get(&s) {
                    None => rest = rest.mul(&Monomial::var_pow(s, e)),
                    Some(v) => {
                        if v.is_zero() && e < 0 {
                            return Err(SymError::ZeroToNegativePower(s.name().into()));
                        }
                        let (base, n) = if e >= 0 {
                            (v.clone(), e as u32)
                        } else {
                            (CRat::one() / v.clone(), (-e) as u32)
                        };
                        for _ in 0..n {
                            coeff = coeff * base.clone();
                        }
                    }
                }
            }
            out.add_term(rest, coeff);
        }
        Ok(out)
    }

    /// Substitute a symbol by a polynomial. The symbol must occur with
    /// nonnegative exponents only.
    pub fn subst_sym_poly(&self, s: Sym, repl: &Polynomial) -> Result<Polynomial, SymError> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            if e < 0 {
                return Err(SymError::NegativePowerSubstitution(s.name().into()));
            }
            let rest = m.with_exp(s, 0);
            let mut base = Polynomial::zero();
            base.add_term(rest, c.clone());
            out = &out + &(&base * &repl.pow(e as u32));
        }
        Ok(out)
    }

    /// Numeric evaluation. Every symbol occurring in the polynomial must
    /// be bound; the error names the first unbound symbol.
    pub fn eval(&self, bindings: &Bindings) -> Result<Complex64, SymError> {
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut v = crat_to_c64(c);
            for (s, e) in m.iter() {
                let b = bindings
                    .get(s)
                    .ok_or_else(|| SymError::UnboundSymbol(s.name().into()))?;
                v *= b.powi(e);
            }
            parts.push(v);
        }
        Ok(crate::grid::pairwise_sum_c(&parts))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_crat(c: &CRat) -> String {
    if c.im.is_zero() {
        fmt_rat(&c.re)
    } else if c.re.is_zero() {
        if c.im.is_one() {
            "i".into()
        } else if (-c.im.clone()).is_one() {
            "-i".into()
        } else {
            format!("{}i", fmt_rat(&c.im))
        }
    } else {
        let sign = if c.im.is_negative() { "-" } else { "+" };
        format!("({}{}{}i)", fmt_rat(&c.re), sign, fmt_rat(&c.im.abs()))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Graded-lex order, highest term first.
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let coeff = fmt_crat(c);
            if m.is_one() {
                f.write_str(&coeff)?;
            } else {
                let vars: Vec<String> = m
                    .iter()
                    .map(|(s, e)| {
                        if e == 1 {
                            s.name().to_string()
                        } else {
                            format!("{}^{}", s.name(), e)
                        }
                    })
                    .collect();
                if coeff == "1" {
                    f.write_str(&vars.join("*"))?;
                } else if coeff == "-1" {
                    write!(f, "-{}", vars.join("*"))?;
                } else {
                    write!(f, "{}*{}", coeff, vars.join("*"))?;
                }
            }
        }
        Ok(())
    }
}

/// Numeric bindings for [`Polynomial::eval`].
#[derive(Clone, Debug, Default)]
pub struct Bindings(BTreeMap<Sym, Complex64>);

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn set(&mut self, s: Sym, v: Complex64) -> &mut Self {
        self.0.insert(s, v);
        self
    }

    pub fn set_re(&mut self, s: Sym, v: f64) -> &mut Self {
        self.set(s, Complex64::new(v, 0.0))
    }

    pub fn get(&self, s: Sym) -> Option<Complex64> {
        self.0.get(&s).copied()
    }
}
