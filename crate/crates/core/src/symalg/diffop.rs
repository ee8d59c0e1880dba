use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::poly::{CRat, Polynomial};
use super::Sym;
use crate::error::SymError;

/// Differentiation axes. The first three act on the group coordinates,
/// the last on the 1-D model variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    X1,
    X2,
    X3,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X1, Axis::X2, Axis::X3, Axis::Y];

    pub fn sym(self) -> Sym {
        match self {
            Axis::X1 => Sym::X1,
            Axis::X2 => Sym::X2,
            Axis::X3 => Sym::X3,
            Axis::Y => Sym::Y,
        }
    }

    pub fn idx(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
            Axis::Y => 3,
        }
    }

    fn marker(self) -> &'static str {
        match self {
            Axis::X1 => "d1",
            Axis::X2 => "d2",
            Axis::X3 => "d3",
            Axis::Y => "dy",
        }
    }
}

/// Derivative multi-index: orders of (d1, d2, d3, dy).
pub type MultiIdx = [u32; 4];

/// Finite sum of polynomial-coefficient derivative monomials, kept in the
/// normal form "all coefficients to the left of all derivatives".
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffOp {
    terms: BTreeMap<MultiIdx, Polynomial>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    pub fn identity() -> Self {
        DiffOp::from_poly(Polynomial::one())
    }

    /// Multiplication operator by `p`.
    pub fn from_poly(p: Polynomial) -> Self {
        let mut op = DiffOp::zero();
        op.add_term([0; 4], p);
        op
    }

    pub fn partial(axis: Axis) -> Self {
        let mut idx = [0u32; 4];
        idx[axis.idx()] = 1;
        let mut op = DiffOp::zero();
        op.add_term(idx, Polynomial::one());
        op
    }

    pub fn add_term(&mut self, idx: MultiIdx, p: Polynomial) {
        if p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(idx) {
            Entry::Vacant(e) => {
                e.insert(p);
            }
            Entry::Occupied(mut e) => {
                let v = e.get() + &p;
                if v.is_zero() {
                    e.remove();
                } else {
                    e.insert(v);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIdx, &Polynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: MultiIdx) -> Polynomial {
        self.terms.get(&idx).cloned().unwrap_or_else(Polynomial::zero)
    }

    /// Max total derivative degree; 0 for multiplication operators and
    /// for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms
            .keys()
            .map(|idx| idx.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn uses_axis(&self, axis: Axis) -> bool {
        self.terms.keys().any(|idx| idx[axis.idx()] > 0)
    }

    /// Left-multiply by a polynomial coefficient.
    pub fn mul_poly(&self, p: &Polynomial) -> DiffOp {
        let mut out = DiffOp::zero();
        for (idx, q) in &self.terms {
            out.add_term(*idx, p * q);
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> DiffOp {
        let mut out = DiffOp::zero();
        for (idx, q) in &self.terms {
            out.add_term(*idx, q.scale(c));
        }
        out
    }

    /// Left-compose a single derivative: `d_axis . self`, normal ordered
    /// by the Leibniz rule.
    fn diff_left(&self, axis: Axis) -> DiffOp {
        let mut out = DiffOp::zero();
        for (idx, q) in &self.terms {
            // d . (q d^idx) = (dq) d^idx + q d^(idx+e)
            out.add_term(*idx, q.derivative(axis.sym()));
            let mut up = *idx;
            up[axis.idx()] += 1;
            out.add_term(up, q.clone());
        }
        out
    }

    /// Operator product `self . other` in normal form.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (idx, p) in &self.terms {
            let mut part = other.clone();
            for axis in Axis::ALL {
                for _ in 0..idx[axis.idx()] {
                    part = part.diff_left(axis);
                }
            }
            for (jdx, q) in &part.terms {
                out.add_term(*jdx, p * q);
            }
        }
        out
    }

    /// `[self, other] = self.other - other.self`.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        &self.compose(other) - &other.compose(self)
    }

    /// Substitute bound symbols in every coefficient; unbound symbols
    /// remain formal.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, CRat>) -> Result<DiffOp, SymError> {
        let mut out = DiffOp::zero();
        for (idx, q) in &self.terms {
            out.add_term(*idx, q.substitute(bindings)?);
        }
        Ok(out)
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (idx, q) in &rhs.terms {
            out.add_term(*idx, q.clone());
        }
        out
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (idx, q) in &rhs.terms {
            out.add_term(*idx, -q);
        }
        out
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        let mut out = DiffOp::zero();
        for (idx, q) in &self.terms {
            out.add_term(*idx, -q);
        }
        out
    }
}

impl Add for DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: DiffOp) -> DiffOp {
        &self + &rhs
    }
}

impl Sub for DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: DiffOp) -> DiffOp {
        &self - &rhs
    }
}

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (idx, p) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mut derivs = Vec::new();
            for axis in Axis::ALL {
                let k = idx[axis.idx()];
                if k == 1 {
                    derivs.push(axis.marker().to_string());
                } else if k > 1 {
                    derivs.push(format!("{}^{}", axis.marker(), k));
                }
            }
            if derivs.is_empty() {
                write!(f, "({})", p)?;
            } else {
                write!(f, "({}) {}", p, derivs.join(" "))?;
            }
        }
        Ok(())
    }
}
