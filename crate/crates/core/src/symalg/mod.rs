//! Exact symbolic layer: sparse Laurent polynomials over the Gaussian
//! rationals and a normal-ordered differential operator algebra.

mod diffop;
mod poly;

pub use diffop::{Axis, DiffOp};
pub use poly::{cq, cqi, rat, Bindings, CRat, Monomial, Polynomial, Rat};

/// Formal symbols of the coefficient ring.
///
/// The first six are "grid" variables that differential operators act on;
/// the rest are model parameters carried formally so operator identities
/// hold exactly. Parameter symbols may occur with negative exponents
/// (the coefficient ring is a Laurent ring in the parameters), which is
/// how expressions like `a21/E` or `1/(4 pi^2 h4^2 m)` are represented.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Sym {
    X1,
    X2,
    X3,
    Y,
    U1,
    U2,
    D,
    E,
    H2,
    H4,
    M,
    A,
    A11,
    A12,
    A13,
    A21,
    A22,
    A23,
    A31,
    A32,
    A33,
    Pi,
    S,
}

impl Sym {
    pub const ALL: [Sym; 23] = [
        Sym::X1,
        Sym::X2,
        Sym::X3,
        Sym::Y,
        Sym::U1,
        Sym::U2,
        Sym::D,
        Sym::E,
        Sym::H2,
        Sym::H4,
        Sym::M,
        Sym::A,
        Sym::A11,
        Sym::A12,
        Sym::A13,
        Sym::A21,
        Sym::A22,
        Sym::A23,
        Sym::A31,
        Sym::A32,
        Sym::A33,
        Sym::Pi,
        Sym::S,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sym::X1 => "x1",
            Sym::X2 => "x2",
            Sym::X3 => "x3",
            Sym::Y => "y",
            Sym::U1 => "u1",
            Sym::U2 => "u2",
            Sym::D => "D",
            Sym::E => "E",
            Sym::H2 => "h2",
            Sym::H4 => "h4",
            Sym::M => "m",
            Sym::A => "a",
            Sym::A11 => "a11",
            Sym::A12 => "a12",
            Sym::A13 => "a13",
            Sym::A21 => "a21",
            Sym::A22 => "a22",
            Sym::A23 => "a23",
            Sym::A31 => "a31",
            Sym::A32 => "a32",
            Sym::A33 => "a33",
            Sym::Pi => "pi",
            Sym::S => "s",
        }
    }

    pub fn parse(s: &str) -> Option<Sym> {
        Sym::ALL.iter().copied().find(|v| v.name() == s)
    }

    /// Variables that derivatives act on, as opposed to formal parameters.
    pub fn is_grid_var(self) -> bool {
        matches!(
            self,
            Sym::X1 | Sym::X2 | Sym::X3 | Sym::Y | Sym::U1 | Sym::U2
        )
    }
}

impl std::fmt::Display for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
