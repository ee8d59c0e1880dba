//! The step-3 nilpotent group, its 1-D irreducible representation, the
//! induced 3-D representation, both derived representations, and the
//! analytic / structural operators annihilating the transform image.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::NumericError;
use crate::grid::{Field3D, WaveFunction1D};
use crate::params::ModelParams;
use crate::symalg::{Axis, DiffOp, Polynomial, Sym};

/// Group element in the coordinates of
/// `exp(x4 X4) exp(x3 X3) exp(x2 X2) exp(x1 X1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl GroupElement {
    pub fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        GroupElement { x1, x2, x3, x4 }
    }

    pub fn identity() -> Self {
        GroupElement::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Group law consistent with the commutators [X1,X2]=X3, [X1,X3]=X4
    /// in these coordinates. Derived once from composing the 1-D
    /// representation twice; the representation-homomorphism test is the
    /// permanent guard.
    pub fn multiply(&self, h: &GroupElement) -> GroupElement {
        GroupElement {
            x1: self.x1 + h.x1,
            x2: self.x2 + h.x2,
            x3: self.x3 + h.x3 + self.x1 * h.x2,
            x4: self.x4 + h.x4 + self.x1 * h.x3 + 0.5 * self.x1 * self.x1 * h.x2,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            x1: -self.x1,
            x2: -self.x2,
            x3: -self.x3 + self.x1 * self.x2,
            x4: -self.x4 + self.x1 * self.x3 - 0.5 * self.x1 * self.x1 * self.x2,
        }
    }
}

/// Resample `values` at points shifted by `shift` (in y units).
/// Integer multiples of the step are circular shifts; other shifts use
/// band-limited (trigonometric) interpolation on the periodic grid.
fn shifted_samples(f: &WaveFunction1D, shift: f64) -> Vec<Complex64> {
    let n = f.grid.n;
    let s = shift / f.grid.step;
    let k = s.round();
    if (s - k).abs() < 1e-9 {
        let k = k as i64;
        (0..n as i64)
            .map(|j| {
                let src = (j - k).rem_euclid(n as i64) as usize;
                f.values[src]
            })
            .collect()
    } else {
        // Naive DFT; grids here are small enough that O(n^2) is fine.
        let nn = n as f64;
        let spectrum: Vec<Complex64> = (0..n)
            .map(|m| {
                let parts: Vec<Complex64> = (0..n)
                    .map(|j| {
                        f.values[j]
                            * Complex64::from_polar(1.0, -2.0 * PI * (m * j) as f64 / nn)
                    })
                    .collect();
                crate::grid::pairwise_sum_c(&parts)
            })
            .collect();
        (0..n)
            .map(|j| {
                let parts: Vec<Complex64> = (0..n)
                    .map(|m| {
                        let freq = if m <= n / 2 { m as f64 } else { m as f64 - nn };
                        spectrum[m]
                            * Complex64::from_polar(1.0, 2.0 * PI * freq * (j as f64 - s) / nn)
                    })
                    .collect();
                crate::grid::pairwise_sum_c(&parts) / nn
            })
            .collect()
    }
}

/// The 1-D unitary irreducible representation:
/// `[pi(g) f](y) = exp(2 pi i (h2 x2 + h4 (x4 - x3 y + x2 y^2 / 2))) f(y - x1)`.
pub fn rep1_apply(g: &GroupElement, f: &WaveFunction1D, params: &ModelParams) -> WaveFunction1D {
    let shifted = shifted_samples(f, g.x1);
    let values = f
        .grid
        .points()
        .zip(shifted)
        .map(|(y, v)| {
            let phase = 2.0
                * PI
                * (params.h2 * g.x2 + params.h4 * (g.x4 - g.x3 * y + 0.5 * g.x2 * y * y));
            Complex64::from_polar(1.0, phase) * v
        })
        .collect();
    WaveFunction1D {
        grid: f.grid,
        values,
    }
}

/// The induced 3-D representation intertwined with `rep1_apply` by the
/// coherent state transform. Shifts must land on grid nodes; values
/// displaced outside the grid read as zero.
pub fn rep2_apply(
    g: &GroupElement,
    field: &Field3D,
    params: &ModelParams,
) -> Result<Field3D, NumericError> {
    let grid = &field.grid;
    let align = |shift: f64, step: f64| -> Result<i64, NumericError> {
        let s = shift / step;
        let k = s.round();
        if (s - k).abs() < 1e-9 {
            Ok(k as i64)
        } else {
            Err(NumericError::NonAlignedShift(shift))
        }
    };
    let k1 = align(g.x1, grid.step[0])?;
    let k2 = align(g.x2, grid.step[1])?;
    let mut out = Field3D::zeros(*grid);
    for i2 in 0..grid.n[1] {
        let x2p = grid.coord(1, i2);
        // x3 displacement depends on the output x2' coordinate
        let shift3 = g.x3 + g.x1 * x2p - g.x1 * g.x2;
        let k3 = align(shift3, grid.step[2])?;
        for i1 in 0..grid.n[0] {
            for i3 in 0..grid.n[2] {
                let x3p = grid.coord(2, i3);
                let j1 = i1 as i64 - k1;
                let j2 = i2 as i64 - k2;
                let j3 = i3 as i64 - k3;
                let inside = j1 >= 0
                    && j2 >= 0
                    && j3 >= 0
                    && (j1 as usize) < grid.n[0]
                    && (j2 as usize) < grid.n[1]
                    && (j3 as usize) < grid.n[2];
                if !inside {
                    continue;
                }
                let phase = 2.0
                    * PI
                    * params.h4
                    * (g.x4 - g.x1 * g.x3 + 0.5 * g.x1 * g.x1 * g.x2 + g.x1 * x3p
                        - 0.5 * g.x1 * g.x1 * x2p);
                let idx = grid.index(i1, i2, i3);
                out.values[idx] = Complex64::from_polar(1.0, phase)
                    * field.at(j1 as usize, j2 as usize, j3 as usize);
            }
        }
    }
    Ok(out)
}

fn two_pi_i() -> Polynomial {
    Polynomial::int(2) * Polynomial::i() * Polynomial::pi()
}

/// Derived 1-D representation of the Lie algebra basis, `j` in 1..=4.
///
/// dpi(X1) = -d/dy, dpi(X2) = 2 pi i (h2 + h4 y^2 / 2) I,
/// dpi(X3) = -2 pi i h4 y I, dpi(X4) = 2 pi i h4 I.
pub fn derived_rep1(j: usize) -> DiffOp {
    match j {
        1 => -&DiffOp::partial(Axis::Y),
        2 => DiffOp::from_poly(
            two_pi_i()
                * (Polynomial::var(Sym::H2)
                    + Polynomial::frac(1, 2) * Polynomial::var(Sym::H4) * Polynomial::var_pow(Sym::Y, 2)),
        ),
        3 => DiffOp::from_poly(
            -(two_pi_i() * Polynomial::var(Sym::H4) * Polynomial::var(Sym::Y)),
        ),
        4 => DiffOp::from_poly(two_pi_i() * Polynomial::var(Sym::H4)),
        _ => panic!("Lie algebra basis index must be 1..=4"),
    }
}

/// Derived 3-D representation of the Lie algebra basis, `j` in 1..=4.
///
/// dpi2(X1) = -d1 - x2 d3 + 2 pi i h4 x3 I, dpi2(X2) = -d2,
/// dpi2(X3) = -d3, dpi2(X4) = 2 pi i h4 I. Certified by the commutator
/// and Casimir identities plus finite differences of `rep2_apply`.
pub fn derived_rep2(j: usize) -> DiffOp {
    match j {
        1 => {
            let mut op = -&DiffOp::partial(Axis::X1);
            op = &op - &DiffOp::partial(Axis::X3).mul_poly(&Polynomial::var(Sym::X2));
            &op + &DiffOp::from_poly(
                two_pi_i() * Polynomial::var(Sym::H4) * Polynomial::var(Sym::X3),
            )
        }
        2 => -&DiffOp::partial(Axis::X2),
        3 => -&DiffOp::partial(Axis::X3),
        4 => DiffOp::from_poly(two_pi_i() * Polynomial::var(Sym::H4)),
        _ => panic!("Lie algebra basis index must be 1..=4"),
    }
}

/// The analytic condition
/// `C = -i d1 - i D d2 + (E - i D x1) d3 - pi h4 (2 i E x1 + D x1^2) I`.
pub fn analytic_operator() -> DiffOp {
    let i = Polynomial::i();
    let d = Polynomial::var(Sym::D);
    let e = Polynomial::var(Sym::E);
    let x1 = Polynomial::var(Sym::X1);
    let mut op = DiffOp::partial(Axis::X1).mul_poly(&-&i);
    op = &op + &DiffOp::partial(Axis::X2).mul_poly(&-(&i * &d));
    op = &op + &DiffOp::partial(Axis::X3).mul_poly(&(&e - &(&i * &(&d * &x1))));
    let zero_order = -(Polynomial::pi()
        * Polynomial::var(Sym::H4)
        * (Polynomial::int(2) * i.clone() * e.clone() * x1.clone() + &d * &(&x1 * &x1)));
    &op + &DiffOp::from_poly(zero_order)
}

/// The structural condition from the Casimir element:
/// `S = d3^2 + 4 pi i h4 d2 - 8 pi^2 h2 h4 I`.
pub fn structural_operator() -> DiffOp {
    let mut op = DiffOp::zero();
    op.add_term([0, 0, 2, 0], Polynomial::one());
    op = &op
        + &DiffOp::partial(Axis::X2).mul_poly(
            &(Polynomial::int(4) * Polynomial::i() * Polynomial::pi() * Polynomial::var(Sym::H4)),
        );
    &op + &DiffOp::from_poly(
        -(Polynomial::int(8)
            * Polynomial::pi()
            * Polynomial::pi()
            * Polynomial::var(Sym::H2)
            * Polynomial::var(Sym::H4)),
    )
}

/// Casimir combination `X3^2 - 2 X2 X4` in a derived representation.
pub fn casimir(rep: impl Fn(usize) -> DiffOp) -> DiffOp {
    let x2 = rep(2);
    let x3 = rep(3);
    let x4 = rep(4);
    &x3.compose(&x3) - &x2.compose(&x4).scale(&crate::symalg::cq(2, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::symalg::cq;

    fn params() -> ModelParams {
        ModelParams {
            d: 0.3,
            e: 1.0,
            h2: 0.1,
            h4: 0.5,
            m: 1.0,
            a: 0.0,
        }
    }

    fn test_state(grid: Grid1D) -> WaveFunction1D {
        WaveFunction1D::from_fn(grid, |y| {
            Complex64::new((-1.3 * (y - 0.2) * (y - 0.2)).exp(), 0.0)
                * Complex64::from_polar(1.0, 0.7 * y)
        })
    }

    #[test]
    fn identity_laws() {
        let g = GroupElement::new(0.4, -1.2, 0.7, 2.0);
        let id = GroupElement::identity();
        assert_eq!(g.multiply(&id), g);
        assert_eq!(id.multiply(&g), g);
        let ginv = g.inverse();
        let prod = g.multiply(&ginv);
        assert!(prod.x1.abs() + prod.x2.abs() + prod.x3.abs() + prod.x4.abs() < 1e-12);
    }

    #[test]
    fn noncommutativity_in_x3_x4() {
        let a = GroupElement::new(0.5, 0.0, 0.0, 0.0);
        let b = GroupElement::new(0.0, 0.8, 0.0, 0.0);
        let ab = a.multiply(&b);
        let ba = b.multiply(&a);
        assert!((ab.x3 - ba.x3 - 0.5 * 0.8).abs() < 1e-12);
        assert!((ab.x4 - ba.x4 - 0.5 * 0.5 * 0.5 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn rep1_homomorphism_integer_shifts() {
        let p = params();
        let grid = Grid1D::symmetric(8.0, 321);
        let f = test_state(grid);
        let step = grid.step;
        let g = GroupElement::new(3.0 * step, 0.4, -0.6, 0.2);
        let h = GroupElement::new(-5.0 * step, 1.1, 0.3, -0.7);
        let lhs = rep1_apply(&g, &rep1_apply(&h, &f, &p), &p);
        let rhs = rep1_apply(&g.multiply(&h), &f, &p);
        let err: f64 = lhs
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "homomorphism defect {err}");
    }

    #[test]
    fn rep1_unitary_and_central_character() {
        let p = params();
        let grid = Grid1D::symmetric(8.0, 257);
        let f = test_state(grid);
        let g = GroupElement::new(4.0 * grid.step, 0.9, 1.3, 0.5);
        let gf = rep1_apply(&g, &f, &p);
        assert!((gf.norm() - f.norm()).abs() < 1e-12);

        let central = GroupElement::new(0.0, 0.0, 0.0, 0.37);
        let cf = rep1_apply(&central, &f, &p);
        let phase = Complex64::from_polar(1.0, 2.0 * PI * p.h4 * 0.37);
        for (a, b) in cf.values.iter().zip(&f.values) {
            assert!((a - phase * b).norm() < 1e-12);
        }
    }

    #[test]
    fn derived_rep1_matches_annihilator_combination() {
        // i dpi(X1) + i D dpi(X2) + E dpi(X3)
        let i = Polynomial::i();
        let comb = &(&derived_rep1(1).mul_poly(&i)
            + &derived_rep1(2).mul_poly(&(&i * &Polynomial::var(Sym::D))))
            + &derived_rep1(3).mul_poly(&Polynomial::var(Sym::E));

        // -i d/dy - pi h4 D y^2 - 2 pi i E h4 y - 2 pi h2 D
        let mut expect = DiffOp::partial(Axis::Y).mul_poly(&-&Polynomial::i());
        let z = -(Polynomial::pi()
            * Polynomial::var(Sym::H4)
            * Polynomial::var(Sym::D)
            * Polynomial::var_pow(Sym::Y, 2))
            - Polynomial::int(2)
                * Polynomial::pi()
                * Polynomial::i()
                * Polynomial::var(Sym::E)
                * Polynomial::var(Sym::H4)
                * Polynomial::var(Sym::Y)
            - Polynomial::int(2)
                * Polynomial::pi()
                * Polynomial::var(Sym::H2)
                * Polynomial::var(Sym::D);
        expect = &expect + &DiffOp::from_poly(z);
        assert_eq!(comb, expect);
    }

    #[test]
    fn commutators_match_structure_constants() {
        for rep in [derived_rep1 as fn(usize) -> DiffOp, derived_rep2] {
            assert_eq!(rep(1).commutator(&rep(2)), rep(3));
            assert_eq!(rep(1).commutator(&rep(3)), rep(4));
            for (j, k) in [(1, 4), (2, 3), (2, 4), (3, 4)] {
                assert!(rep(j).commutator(&rep(k)).is_zero(), "[X{j},X{k}] != 0");
            }
        }
    }

    #[test]
    fn casimir_scalar_in_rep1() {
        let c = casimir(derived_rep1);
        let scalar = DiffOp::from_poly(
            Polynomial::int(8)
                * Polynomial::pi()
                * Polynomial::pi()
                * Polynomial::var(Sym::H2)
                * Polynomial::var(Sym::H4),
        );
        assert_eq!(c, scalar);
    }

    #[test]
    fn structural_operator_is_casimir_minus_scalar() {
        let c = casimir(derived_rep2);
        let scalar = DiffOp::from_poly(
            Polynomial::int(8)
                * Polynomial::pi()
                * Polynomial::pi()
                * Polynomial::var(Sym::H2)
                * Polynomial::var(Sym::H4),
        );
        assert_eq!(&c - &scalar, structural_operator());
        assert_eq!(structural_operator().order(), 2);
        // independent of the fiducial parameters
        assert!(!structural_operator()
            .terms()
            .any(|(_, p)| p.contains_sym(Sym::D) || p.contains_sym(Sym::E)));
    }

    #[test]
    fn analytic_operator_shape() {
        let c = analytic_operator();
        assert_eq!(c.order(), 1);
        // D = 0 specialization: -i d1 + E d3 - 2 pi i E h4 x1 I
        let mut bind = std::collections::BTreeMap::new();
        bind.insert(Sym::D, cq(0, 1));
        let c0 = c.substitute(&bind).unwrap();
        let mut expect = DiffOp::partial(Axis::X1).mul_poly(&-&Polynomial::i());
        expect = &expect + &DiffOp::partial(Axis::X3).mul_poly(&Polynomial::var(Sym::E));
        expect = &expect
            + &DiffOp::from_poly(
                -(Polynomial::int(2)
                    * Polynomial::pi()
                    * Polynomial::i()
                    * Polynomial::var(Sym::E)
                    * Polynomial::var(Sym::H4)
                    * Polynomial::var(Sym::X1)),
            );
        assert_eq!(c0, expect);
    }

    #[test]
    fn fractional_shift_matches_exact_on_bandlimited_data() {
        let grid = Grid1D::new(0.0, 1.0 / 64.0, 64);
        let f = WaveFunction1D::from_fn(grid, |y| {
            Complex64::from_polar(1.0, 2.0 * PI * 3.0 * y) + Complex64::new(0.5, 0.0)
        });
        let shifted = shifted_samples(&f, 0.3 * grid.step);
        for (k, v) in shifted.iter().enumerate() {
            let y = grid.point(k) - 0.3 * grid.step;
            let exact = Complex64::from_polar(1.0, 2.0 * PI * 3.0 * y) + Complex64::new(0.5, 0.0);
            assert!((v - exact).norm() < 1e-9);
        }
    }
}
