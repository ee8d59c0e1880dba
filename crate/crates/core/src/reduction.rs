//! Classification of geometrisable quadratic Hamiltonians, construction
//! of the reduced first-order operator, and its pushforward to analytic
//! coordinates.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ReductionError;
use crate::group_reps::{analytic_operator, derived_rep2, structural_operator};
use crate::symalg::{Axis, CRat, DiffOp, Polynomial, Sym};

/// 3x3 coefficient matrix of a quadratic form on the Lie algebra,
/// indexed 0-based: `a[j][k]` is the coefficient of `X_{j+1} X_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub a: [[Polynomial; 3]; 3],
}

fn zero_row() -> [Polynomial; 3] {
    [Polynomial::zero(), Polynomial::zero(), Polynomial::zero()]
}

impl QuadraticForm {
    pub fn zero() -> Self {
        QuadraticForm {
            a: [zero_row(), zero_row(), zero_row()],
        }
    }

    /// The free-particle matrix `(1/m) [[1, D, 0], [D, D^2, 0], [0, 0, 0]]`
    /// with formal `m` and `D`.
    pub fn free_particle() -> Self {
        let minv = Polynomial::var_pow(Sym::M, -1);
        let d = Polynomial::var(Sym::D);
        let mut q = QuadraticForm::zero();
        q.a[0][0] = minv.clone();
        q.a[0][1] = &minv * &d;
        q.a[1][0] = &minv * &d;
        q.a[1][1] = &minv * &(&d * &d);
        q
    }

    /// Free-particle matrix plus `a33 = +a^2 / (4 pi^2 h4^2 m)`.
    ///
    /// This is the coefficient matrix of the *geometrised* generator,
    /// i.e. of minus the 1-D Hamiltonian (whose own X3^2 coefficient is
    /// `-a^2/(4 pi^2 h4^2 m)`, realizing the potential `(a^2/m) q^2`).
    /// The relative sign between the free block and the X3^2 entry is
    /// fixed by the intertwining of the two dynamics and validated by
    /// the Schrodinger-residual tests.
    pub fn harmonic() -> Self {
        let mut q = QuadraticForm::free_particle();
        q.a[2][2] = Polynomial::frac(1, 4)
            * Polynomial::var_pow(Sym::A, 2)
            * Polynomial::var_pow(Sym::Pi, -2)
            * Polynomial::var_pow(Sym::H4, -2)
            * Polynomial::var_pow(Sym::M, -1);
        q
    }

    pub fn substitute(&self, bindings: &BTreeMap<Sym, CRat>) -> Result<Self, ReductionError> {
        let mut out = QuadraticForm::zero();
        for j in 0..3 {
            for k in 0..3 {
                out.a[j][k] = self.a[j][k].substitute(bindings)?;
            }
        }
        Ok(out)
    }
}

/// The free entries of a geometrisable form; the dependent entries
/// `a12, a22, a23` follow from the classification constraints.
#[derive(Clone, Debug)]
pub struct FreeCoeffs {
    pub a11: Polynomial,
    pub a21: Polynomial,
    pub a13: Polynomial,
    pub a31: Polynomial,
    pub a32: Polynomial,
    pub a33: Polynomial,
}

impl FreeCoeffs {
    pub fn zero() -> Self {
        FreeCoeffs {
            a11: Polynomial::zero(),
            a21: Polynomial::zero(),
            a13: Polynomial::zero(),
            a31: Polynomial::zero(),
            a32: Polynomial::zero(),
            a33: Polynomial::zero(),
        }
    }

    /// All six free entries as formal symbols.
    pub fn symbolic() -> Self {
        FreeCoeffs {
            a11: Polynomial::var(Sym::A11),
            a21: Polynomial::var(Sym::A21),
            a13: Polynomial::var(Sym::A13),
            a31: Polynomial::var(Sym::A31),
            a32: Polynomial::var(Sym::A32),
            a33: Polynomial::var(Sym::A33),
        }
    }
}

/// One violated classification constraint with its residual polynomial.
#[derive(Clone, Debug)]
pub struct ConstraintViolation {
    pub constraint: &'static str,
    pub residual: Polynomial,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub geometrisable: bool,
    pub violations: Vec<ConstraintViolation>,
}

/// Check the three geometrisability constraints
/// `a12 = 2 D a11 - a21`, `a22 = D^2 a11`, `a23 = D (a13 + a31) - a32`
/// as exact polynomial identities.
pub fn classify(q: &QuadraticForm, d: &Polynomial) -> Classification {
    let two = Polynomial::int(2);
    let residuals = [
        (
            "a12 = 2*D*a11 - a21",
            &q.a[0][1] - &(&(&two * &(d * &q.a[0][0])) - &q.a[1][0]),
        ),
        ("a22 = D^2*a11", &q.a[1][1] - &(&(d * d) * &q.a[0][0])),
        (
            "a23 = D*(a13 + a31) - a32",
            &q.a[1][2] - &(&(d * &(&q.a[0][2] + &q.a[2][0])) - &q.a[2][1]),
        ),
    ];
    let violations: Vec<ConstraintViolation> = residuals
        .into_iter()
        .filter(|(_, r)| !r.is_zero())
        .map(|(constraint, residual)| ConstraintViolation {
            constraint,
            residual,
        })
        .collect();
    Classification {
        geometrisable: violations.is_empty(),
        violations,
    }
}

/// Fill the dependent entries from the free ones; the result passes
/// [`classify`] by construction.
pub fn complete_form(free: &FreeCoeffs, d: &Polynomial) -> QuadraticForm {
    let mut q = QuadraticForm::zero();
    q.a[0][0] = free.a11.clone();
    q.a[1][0] = free.a21.clone();
    q.a[0][2] = free.a13.clone();
    q.a[2][0] = free.a31.clone();
    q.a[2][1] = free.a32.clone();
    q.a[2][2] = free.a33.clone();
    q.a[0][1] = &(&Polynomial::int(2) * &(d * &free.a11)) - &free.a21;
    q.a[1][1] = &(d * d) * &free.a11;
    q.a[1][2] = &(d * &(&free.a13 + &free.a31)) - &free.a32;
    q
}

/// The multiplier coefficients that cancel every second-order derivative
/// in the reduced operator. `A`, `B` are constant in x; `C`, `K`, `F`
/// may depend on x1, x2. All expressed with formal `D`, `E`; `K` carries
/// `1/E` as a Laurent term.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCoeffs {
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub f: Polynomial,
    pub k: Polynomial,
}

pub fn reduction_coeffs(q: &QuadraticForm) -> ReductionCoeffs {
    let i = Polynomial::i();
    let d = Polynomial::var(Sym::D);
    let e = Polynomial::var(Sym::E);
    let einv = Polynomial::var_pow(Sym::E, -1);
    let x1 = Polynomial::var(Sym::X1);
    let x2 = Polynomial::var(Sym::X2);
    let pi = Polynomial::pi();
    let h4 = Polynomial::var(Sym::H4);
    let two = Polynomial::int(2);

    let a11 = &q.a[0][0];
    let a12 = &q.a[0][1];
    let a21 = &q.a[1][0];
    let a13 = &q.a[0][2];
    let a31 = &q.a[2][0];
    let a33 = &q.a[2][2];
    let a13p31 = a13 + a31;

    let coef_a = -(&i * a11);
    let coef_b = &(&i * &(&d * a11)) - &(&i * &(a21 + a12));
    let coef_c = &-(a11 * &(&(&(&two * &(&i * &x2)) - &(&i * &(&d * &x1))) + &e))
        - &(&i * &a13p31);

    // u2 = D x1 - x2 + i E
    let u2 = &(&(&d * &x1) - &x2) + &(&i * &e);
    let coef_f = &(&-(a11 * &(&u2 * &u2)) + &(&a13p31 * &u2)) - a33;

    // K = 2 pi h4 (a13+a31) x1
    //     - a11 (-2 pi i h4 E x1 + D/E + 5 pi h4 D x1^2 - 4 pi h4 x1 x2)
    //     + a21 / E
    let inner = &(&(&-(&(&two * &(&pi * &(&i * &(&h4 * &(&e * &x1))))))
        + &(&d * &einv))
        + &(&(&Polynomial::int(5) * &(&pi * &(&h4 * &d))) * &(&x1 * &x1)))
        - &(&(&Polynomial::int(4) * &(&pi * &h4)) * &(&x1 * &x2));
    let coef_k = &(&(&(&two * &(&pi * &h4)) * &(&a13p31 * &x1)) - &(a11 * &inner))
        + &(a21 * &einv);

    ReductionCoeffs {
        a: coef_a,
        b: coef_b,
        c: coef_c,
        f: coef_f,
        k: coef_k,
    }
}

/// `sum_{j,k} a_jk dpi2(X_j) dpi2(X_k)` in normal form.
pub fn quadratic_form_op(q: &QuadraticForm) -> DiffOp {
    let reps: Vec<DiffOp> = (1..=3).map(derived_rep2).collect();
    let mut op = DiffOp::zero();
    for j in 0..3 {
        for k in 0..3 {
            if q.a[j][k].is_zero() {
                continue;
            }
            op = &op + &reps[j].compose(&reps[k]).mul_poly(&q.a[j][k]);
        }
    }
    op
}

/// Reduced operator together with the ideal-membership certificate
/// (the multipliers of the analytic and structural conditions).
#[derive(Clone, Debug)]
pub struct ReducedOp {
    pub op: DiffOp,
    pub coeffs: ReductionCoeffs,
}

/// Assemble `H_r = Q + (A d1 + B d2 + C d3 + K) C_op + F S_op` without
/// any checks. Used by the sharpness tests.
pub fn reduce_unchecked(q: &QuadraticForm) -> ReducedOp {
    let coeffs = reduction_coeffs(q);
    let c_op = analytic_operator();
    let s_op = structural_operator();

    let mut multiplier = DiffOp::partial(Axis::X1).mul_poly(&coeffs.a);
    multiplier = &multiplier + &DiffOp::partial(Axis::X2).mul_poly(&coeffs.b);
    multiplier = &multiplier + &DiffOp::partial(Axis::X3).mul_poly(&coeffs.c);
    multiplier = &multiplier + &DiffOp::from_poly(coeffs.k.clone());

    let op = &(&quadratic_form_op(q) + &multiplier.compose(&c_op)) + &s_op.mul_poly(&coeffs.f);
    ReducedOp { op, coeffs }
}

/// Build the reduced first-order operator for a geometrisable form.
///
/// `d` is the fiducial cubic parameter as a polynomial (the formal symbol
/// for symbolic runs, an exact constant for numeric ones); it must be the
/// same value the matrix was completed with.
pub fn build_hr(q: &QuadraticForm, d: &Polynomial) -> Result<ReducedOp, ReductionError> {
    let cls = classify(q, d);
    if !cls.geometrisable {
        return Err(ReductionError::ClassificationFailed(
            cls.violations
                .iter()
                .map(|v| format!("{} (residual {})", v.constraint, v.residual))
                .collect(),
        ));
    }
    let reduced = reduce_unchecked(q);
    if reduced.op.order() > 1 {
        let bad = reduced
            .op
            .terms()
            .filter(|(idx, _)| idx.iter().sum::<u32>() > 1)
            .map(|(idx, p)| format!("{idx:?}: {p}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ReductionError::OrderNotReduced(bad));
    }
    Ok(reduced)
}

/// First-order operator on the analytic coordinates (u1, u2).
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticOp {
    pub du1: Polynomial,
    pub du2: Polynomial,
    pub id: Polynomial,
}

impl fmt::Display for AnalyticOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) du1 + ({}) du2 + ({}) I",
            self.du1, self.du2, self.id
        )
    }
}

/// Push a first-order operator in (x1, x2, x3) down to the analytic
/// fibration `u1 = D x1^2 + 2 i E x1 - 2 x3`, `u2 = D x1 - x2 + i E`,
/// after conjugating by the envelope `exp(pi h4 (-E x1^2 + i D x1^3/3))`.
///
/// Fails with the offending coefficient if the operator does not factor
/// through (u1, u2).
pub fn pushforward_to_analytic(h: &DiffOp) -> Result<AnalyticOp, ReductionError> {
    if h.order() > 1 {
        return Err(ReductionError::OrderTooHigh(h.order()));
    }
    if h.uses_axis(Axis::Y) {
        return Err(ReductionError::NotAPushforward("operator acts on y".into()));
    }
    let c1 = h.coeff([1, 0, 0, 0]);
    let c2 = h.coeff([0, 1, 0, 0]);
    let c3 = h.coeff([0, 0, 1, 0]);
    let c0 = h.coeff([0, 0, 0, 0]);

    let i = Polynomial::i();
    let d = Polynomial::var(Sym::D);
    let e = Polynomial::var(Sym::E);
    let x1 = Polynomial::var(Sym::X1);
    let two = Polynomial::int(2);

    // Conjugation by the envelope shifts only the zero-order part:
    // d1 -> d1 + d1(log envelope) = d1 + pi h4 (i D x1^2 - 2 E x1).
    let log_env_d1 = Polynomial::pi()
        * Polynomial::var(Sym::H4)
        * (&(&i * &(&d * &(&x1 * &x1))) - &(&two * &(&e * &x1)));
    let c0 = &c0 + &(&c1 * &log_env_d1);

    // Chain rule: d1 -> (2 D x1 + 2 i E) du1 + D du2, d2 -> -du2, d3 -> -2 du1.
    let du1_coeff = &(&c1 * &(&(&two * &(&d * &x1)) + &(&two * &(&i * &e)))) - &(&two * &c3);
    let du2_coeff = &(&c1 * &d) - &c2;

    // A coefficient factors through (u1, u2) iff, after substituting
    // x3 = (D x1^2 + 2 i E x1 - u1)/2 and x2 = D x1 - u2 + i E,
    // no x1 remains.
    let x3_repl = (&(&(&d * &(&x1 * &x1)) + &(&two * &(&i * &(&e * &x1))))
        - &Polynomial::var(Sym::U1))
        .scale(&crate::symalg::cq(1, 2));
    let x2_repl = &(&(&d * &x1) - &Polynomial::var(Sym::U2)) + &(&i * &e);

    let descend = |p: &Polynomial| -> Result<Polynomial, ReductionError> {
        let q = p
            .subst_sym_poly(Sym::X3, &x3_repl)?
            .subst_sym_poly(Sym::X2, &x2_repl)?;
        if q.contains_sym(Sym::X1) {
            return Err(ReductionError::NotAPushforward(format!("{p}")));
        }
        Ok(q)
    };

    Ok(AnalyticOp {
        du1: descend(&du1_coeff)?,
        du2: descend(&du2_coeff)?,
        id: descend(&c0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::cq;

    #[test]
    fn free_particle_classifies() {
        let q = QuadraticForm::free_particle();
        assert!(classify(&q, &Polynomial::var(Sym::D)).geometrisable);
        assert!(classify(&QuadraticForm::zero(), &Polynomial::var(Sym::D)).geometrisable);
    }

    #[test]
    fn violation_reported_with_residual() {
        let mut q = QuadraticForm::zero();
        q.a[1][1] = Polynomial::one();
        let cls = classify(&q, &Polynomial::var(Sym::D));
        assert!(!cls.geometrisable);
        assert_eq!(cls.violations.len(), 1);
        assert_eq!(cls.violations[0].constraint, "a22 = D^2*a11");
        assert_eq!(cls.violations[0].residual, Polynomial::one());
    }

    #[test]
    fn complete_form_reproduces_free_particle() {
        let minv = Polynomial::var_pow(Sym::M, -1);
        let mut free = FreeCoeffs::zero();
        free.a11 = minv.clone();
        free.a21 = &minv * &Polynomial::var(Sym::D);
        let q = complete_form(&free, &Polynomial::var(Sym::D));
        assert_eq!(q, QuadraticForm::free_particle());

        // a33 does not occur in the constraints
        free.a33 = Polynomial::var(Sym::A33);
        let q = complete_form(&free, &Polynomial::var(Sym::D));
        assert!(classify(&q, &Polynomial::var(Sym::D)).geometrisable);
    }

    #[test]
    fn reduction_coeffs_special_cases() {
        // a33 = 1 alone: A = B = C = 0, F = -1, K = 0
        let mut q = QuadraticForm::zero();
        q.a[2][2] = Polynomial::one();
        let c = reduction_coeffs(&q);
        assert!(c.a.is_zero() && c.b.is_zero() && c.c.is_zero() && c.k.is_zero());
        assert_eq!(c.f, Polynomial::int(-1));

        // free particle: A = -i/m, B = -i D/m
        let c = reduction_coeffs(&QuadraticForm::free_particle());
        let minv = Polynomial::var_pow(Sym::M, -1);
        assert_eq!(c.a, -(Polynomial::i() * minv.clone()));
        assert_eq!(
            c.b,
            -(Polynomial::i() * Polynomial::var(Sym::D) * minv)
        );
    }

    #[test]
    fn quadratic_form_op_diagonal_cases() {
        let mut q = QuadraticForm::zero();
        q.a[2][2] = Polynomial::one();
        let mut expect = DiffOp::zero();
        expect.add_term([0, 0, 2, 0], Polynomial::one());
        assert_eq!(quadratic_form_op(&q), expect);

        let mut q = QuadraticForm::zero();
        q.a[1][1] = Polynomial::one();
        let mut expect = DiffOp::zero();
        expect.add_term([0, 2, 0, 0], Polynomial::one());
        assert_eq!(quadratic_form_op(&q), expect);
    }

    #[test]
    fn free_particle_reduces_to_first_order() {
        let reduced = build_hr(&QuadraticForm::free_particle(), &Polynomial::var(Sym::D)).unwrap();
        assert_eq!(reduced.op.order(), 1);
        // d1 and d3 coefficients are purely imaginary polynomials
        for idx in [[1, 0, 0, 0], [0, 0, 1, 0]] {
            let p = reduced.op.coeff(idx);
            for (_, coef) in p.terms() {
                assert!(
                    num_traits::Zero::is_zero(&coef.re),
                    "expected purely imaginary coefficient, got {p}"
                );
            }
        }
    }

    #[test]
    fn harmonic_reduces_to_first_order() {
        let reduced = build_hr(&QuadraticForm::harmonic(), &Polynomial::var(Sym::D)).unwrap();
        assert_eq!(reduced.op.order(), 1);
    }

    #[test]
    fn zero_matrix_reduces_to_zero() {
        let reduced = build_hr(&QuadraticForm::zero(), &Polynomial::var(Sym::D)).unwrap();
        assert!(reduced.op.is_zero());
    }

    #[test]
    fn build_hr_rejects_nongeometrisable() {
        let mut q = QuadraticForm::zero();
        q.a[1][1] = Polynomial::one();
        match build_hr(&q, &Polynomial::var(Sym::D)) {
            Err(ReductionError::ClassificationFailed(v)) => assert_eq!(v.len(), 1),
            other => panic!("expected classification failure, got {other:?}"),
        }
    }

    #[test]
    fn pushforward_chain_rule_d3() {
        let pf = pushforward_to_analytic(&DiffOp::partial(Axis::X3)).unwrap();
        assert_eq!(pf.du1, Polynomial::int(-2));
        assert!(pf.du2.is_zero() && pf.id.is_zero());
    }

    #[test]
    fn pushforward_rejects_bare_x1() {
        let h = DiffOp::from_poly(Polynomial::var(Sym::X1));
        match pushforward_to_analytic(&h) {
            Err(ReductionError::NotAPushforward(_)) => {}
            other => panic!("expected not-a-pushforward, got {other:?}"),
        }
    }

    #[test]
    fn free_particle_pushforward_closed_form() {
        let reduced = build_hr(&QuadraticForm::free_particle(), &Polynomial::var(Sym::D)).unwrap();
        let pf = pushforward_to_analytic(&reduced.op).unwrap();

        let minv = Polynomial::var_pow(Sym::M, -1);
        let u1 = Polynomial::var(Sym::U1);
        let u2 = Polynomial::var(Sym::U2);
        let pih4 = Polynomial::pi() * Polynomial::var(Sym::H4);
        let four_i = Polynomial::i() * Polynomial::int(4);

        let du1 = &minv * &(&(&four_i * &pih4) * &(&u1 * &u2));
        let du2 = &minv * &(&(&four_i * &pih4) * &(&u2 * &u2));
        let id = &minv
            * &(&(&(Polynomial::int(8)
                * Polynomial::pi()
                * Polynomial::var(Sym::H2)
                * pih4.clone()
                * (&u2 * &u2))
                + &(Polynomial::int(2) * Polynomial::i() * pih4.clone() * u2.clone()))
                - &(&(&pih4 * &pih4) * &(&u1 * &u1)));

        assert_eq!(pf.du1, du1, "du1 mismatch: got {}", pf.du1);
        assert_eq!(pf.du2, du2, "du2 mismatch: got {}", pf.du2);
        assert_eq!(pf.id, id, "id mismatch: got {}", pf.id);
    }

    #[test]
    fn numeric_specialization_matches_symbolic() {
        // classify with numeric D on a numerically substituted matrix
        let mut bind = BTreeMap::new();
        bind.insert(Sym::D, cq(3, 10));
        bind.insert(Sym::M, cq(2, 1));
        let q = QuadraticForm::free_particle().substitute(&bind).unwrap();
        assert!(classify(&q, &Polynomial::constant(cq(3, 10))).geometrisable);
        assert!(!classify(&q, &Polynomial::constant(cq(1, 2))).geometrisable);
    }
}
