//! Closed-form geometrised evolution: analytic coordinates, envelopes,
//! the free-type and harmonic-type solution families, field
//! reconstruction, and residual verification.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::NumericError;
use crate::grid::{Field3D, Grid1D, Grid3D};
use crate::params::ModelParams;
use crate::reduction::{build_hr, QuadraticForm};
use crate::symalg::{DiffOp, Polynomial, Sym};

/// Exponent sign in the heat-like kernel of the harmonic solution,
/// fixed once by the symbolic kernel-validation oracle: the displayed
/// kernel satisfies the heat-like equation only with the negative sign.
pub const HEAT_KERNEL_SIGN: f64 = -1.0;

/// Dynamical sign convention: the residual operator is
/// `i h4 d/dt + DYN_SIGN * H_r`, calibrated once by the negative-control
/// residual test shared with the oracle module.
pub const DYN_SIGN: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Free,
    Harmonic,
}

/// Point on the analytic fibration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPoint {
    pub u1: Complex64,
    pub u2: Complex64,
}

/// `u1 = D x1^2 + 2 i E x1 - 2 x3`, `u2 = D x1 - x2 + i E`.
pub fn analytic_coords(x1: f64, x2: f64, x3: f64, params: &ModelParams) -> AnalyticPoint {
    AnalyticPoint {
        u1: Complex64::new(params.d * x1 * x1 - 2.0 * x3, 2.0 * params.e * x1),
        u2: Complex64::new(params.d * x1 - x2, params.e),
    }
}

/// Envelope `exp(pi h4 (-E x1^2 + i D x1^3 / 3))`.
pub fn envelope(x1: f64, params: &ModelParams) -> Complex64 {
    Complex64::new(
        -PI * params.h4 * params.e * x1 * x1,
        PI * params.h4 * params.d * x1 * x1 * x1 / 3.0,
    )
    .exp()
}

/// Node/weight representation of the spectral density g(s) or k(s).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensity {
    pub nodes: Vec<f64>,
    pub weights: Vec<Complex64>,
}

impl SpectralDensity {
    pub fn new(nodes: Vec<f64>, weights: Vec<Complex64>) -> Result<Self, NumericError> {
        if nodes.len() != weights.len() {
            return Err(NumericError::InvalidParams(
                "density nodes and weights must have equal length".into(),
            ));
        }
        if nodes.iter().any(|s| !s.is_finite())
            || weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite())
        {
            return Err(NumericError::InvalidParams("density entries must be finite".into()));
        }
        Ok(SpectralDensity { nodes, weights })
    }

    pub fn scale(&self, c: Complex64) -> SpectralDensity {
        SpectralDensity {
            nodes: self.nodes.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// `psi(xi, eta) = sum_k g_k exp(-(4 pi i / h4) s_k^2 xi - 2 pi i s_k eta)`;
/// each plane wave solves `d_eta^2 psi + pi i h4 d_xi psi = 0`.
pub fn free_psi(
    xi: Complex64,
    eta: Complex64,
    g: &SpectralDensity,
    params: &ModelParams,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in g.nodes.iter().zip(&g.weights) {
        let exponent = Complex64::new(0.0, -4.0 * PI / params.h4) * (s * s) * xi
            + Complex64::new(0.0, -2.0 * PI) * s * eta;
        acc += w * exponent.exp();
    }
    acc
}

/// Rotation parameter of the harmonic analytic flow, `b = a / (2 pi h4)`.
///
/// The characteristics of the geometrised harmonic generator close only
/// with this rescaling of the oscillator strength; it also sets the
/// singular point `u2 = i b` and the branch condition `E > b`.
pub fn rotation_param(params: &ModelParams) -> f64 {
    params.a / (2.0 * PI * params.h4)
}

/// Heat-like kernel sum
/// `(b h4 / (2 eta))^{1/2} sum_j k_j exp(sign * (pi h4 b / 2) (xi - s_j)^2 / eta)`
/// with `b = a / (2 pi h4)` and the validated negative sign; each term
/// solves `d_eta psi = (1 / (2 pi h4 b)) d_xi^2 psi`.
pub fn harmonic_psi(
    xi: Complex64,
    eta: Complex64,
    k: &SpectralDensity,
    params: &ModelParams,
) -> Result<Complex64, NumericError> {
    if eta.norm() == 0.0 {
        return Err(NumericError::SingularPoint(vec![], "eta = 0 in heat kernel".into()));
    }
    let b = rotation_param(params);
    let c = 0.5 * PI * params.h4 * b;
    let prefactor = (Complex64::new(0.5 * b * params.h4, 0.0) / eta).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in k.nodes.iter().zip(&k.weights) {
        let d = xi - s;
        acc += w * (Complex64::new(HEAT_KERNEL_SIGN * c, 0.0) * d * d / eta).exp();
    }
    Ok(prefactor * acc)
}

/// Free-model solution on analytic coordinates:
/// `u2^{-1/2} exp(2 pi i h2 u2 - (pi i h4 / 4) u1^2 / u2)
///  psi(-4 pi t / m + 1/u2, u1 / u2)`, principal branch.
pub fn free_phi(
    t: f64,
    u: AnalyticPoint,
    g: &SpectralDensity,
    params: &ModelParams,
) -> Result<Complex64, NumericError> {
    if u.u2.norm() == 0.0 {
        return Err(NumericError::SingularPoint(vec![], "u2 = 0".into()));
    }
    let inv = u.u2.inv();
    let xi = Complex64::new(-4.0 * PI * t / params.m, 0.0) + inv;
    let eta = u.u1 * inv;
    let phase = Complex64::new(0.0, 2.0 * PI * params.h2) * u.u2
        - Complex64::new(0.0, 0.25 * PI * params.h4) * u.u1 * u.u1 * inv;
    Ok(inv.sqrt() * phase.exp() * free_psi(xi, eta, g, params))
}

/// Harmonic-model solution on analytic coordinates, with
/// `b = a / (2 pi h4)` and rotation rate `W = -4 pi b / m = -2a/(h4 m)`:
/// `e^{i W t / 2} (u2 - i b)^{-1/2}
///  exp(2 pi i h2 u2 - (pi i h4 / 4) u1^2 / (u2 - i b))
///  psi(e^{i W t} u1 / (u2 - i b),
///      e^{2 i W t} (u2 + i b) / (u2 - i b))`, principal branch.
pub fn harmonic_phi(
    t: f64,
    u: AnalyticPoint,
    k: &SpectralDensity,
    params: &ModelParams,
) -> Result<Complex64, NumericError> {
    let b = rotation_param(params);
    let shifted = u.u2 - Complex64::new(0.0, b);
    if shifted.norm() == 0.0 {
        return Err(NumericError::SingularPoint(vec![], "u2 = ib".into()));
    }
    let inv = shifted.inv();
    let omega = -4.0 * PI * b / params.m;
    let rot1 = Complex64::from_polar(1.0, 0.5 * omega * t);
    let rot2 = Complex64::from_polar(1.0, omega * t);
    let rot4 = Complex64::from_polar(1.0, 2.0 * omega * t);
    let xi = rot2 * u.u1 * inv;
    let eta = rot4 * (u.u2 + Complex64::new(0.0, b)) * inv;
    let phase = Complex64::new(0.0, 2.0 * PI * params.h2) * u.u2
        - Complex64::new(0.0, 0.25 * PI * params.h4) * u.u1 * u.u1 * inv;
    Ok(rot1 * inv.sqrt() * phase.exp() * harmonic_psi(xi, eta, k, params)?)
}

fn phi_value(
    model: Model,
    t: f64,
    u: AnalyticPoint,
    density: &SpectralDensity,
    params: &ModelParams,
) -> Result<Complex64, NumericError> {
    match model {
        Model::Free => free_phi(t, u, density, params),
        Model::Harmonic => harmonic_phi(t, u, density, params),
    }
}

/// `f(t; x) = envelope(x1) * phi_model(t; analytic_coords(x))` sampled on
/// the output grid; data-parallel over x2 rows.
pub fn reconstruct_field(
    t: f64,
    out: Grid3D,
    model: Model,
    density: &SpectralDensity,
    params: &ModelParams,
) -> Result<Field3D, NumericError> {
    let rows: Vec<Result<Vec<Complex64>, NumericError>> = (0..out.n[1])
        .into_par_iter()
        .map(|i2| {
            let x2 = out.coord(1, i2);
            let mut row = vec![Complex64::new(0.0, 0.0); out.n[0] * out.n[2]];
            for i1 in 0..out.n[0] {
                let x1 = out.coord(0, i1);
                let env = envelope(x1, params);
                for i3 in 0..out.n[2] {
                    let x3 = out.coord(2, i3);
                    let u = analytic_coords(x1, x2, x3, params);
                    let v = phi_value(model, t, u, density, params).map_err(|e| match e {
                        NumericError::SingularPoint(_, msg) => {
                            NumericError::SingularPoint(vec![i1, i2, i3], msg)
                        }
                        other => other,
                    })?;
                    row[i1 * out.n[2] + i3] = env * v;
                }
            }
            Ok(row)
        })
        .collect();
    let mut field = Field3D::zeros(out);
    for (i2, row) in rows.into_iter().enumerate() {
        let row = row?;
        for i1 in 0..out.n[0] {
            for i3 in 0..out.n[2] {
                field.values[out.index(i1, i2, i3)] = row[i1 * out.n[2] + i3];
            }
        }
    }
    Ok(field)
}

/// The reduced operator for a model, kept symbolic; coefficients are
/// evaluated against the parameter bindings at application time.
pub fn model_hr(model: Model) -> DiffOp {
    let q = match model {
        Model::Free => QuadraticForm::free_particle(),
        Model::Harmonic => QuadraticForm::harmonic(),
    };
    build_hr(&q, &Polynomial::var(Sym::D))
        .expect("model matrices are geometrisable by construction")
        .op
}

/// Relative residual of `i h4 d/dt + sign * H_r` on the reconstructed
/// field, central differences in t and space, interior `margin` norm.
pub fn schrodinger_residual_signed(
    model: Model,
    density: &SpectralDensity,
    params: &ModelParams,
    out: Grid3D,
    t: f64,
    dt: f64,
    margin: usize,
    sign: f64,
) -> Result<f64, NumericError> {
    if dt <= 0.0 {
        return Err(NumericError::InvalidParams("dt must be positive".into()));
    }
    let hr = model_hr(model);
    let f0 = reconstruct_field(t, out, model, density, params)?;
    let fm = reconstruct_field(t - dt, out, model, density, params)?;
    let fp = reconstruct_field(t + dt, out, model, density, params)?;
    let hrf = crate::cst::apply_diffop_fd(&hr, &f0, params)?;
    let mut res = Field3D::zeros(out);
    let ih4 = Complex64::new(0.0, params.h4);
    for idx in 0..out.len() {
        let dt_f = (fp.values[idx] - fm.values[idx]) / (2.0 * dt);
        res.values[idx] = ih4 * dt_f + sign * hrf.values[idx];
    }
    let denom = f0.interior_norm(margin);
    if denom == 0.0 {
        return Err(NumericError::GridTooSmall("zero field in residual".into()));
    }
    Ok(res.interior_norm(margin) / denom)
}

/// Residual with the calibrated dynamical sign.
pub fn schrodinger_residual(
    model: Model,
    density: &SpectralDensity,
    params: &ModelParams,
    out: Grid3D,
    t: f64,
    dt: f64,
    margin: usize,
) -> Result<f64, NumericError> {
    schrodinger_residual_signed(model, density, params, out, t, dt, margin, DYN_SIGN)
}

/// Samples of `|phi(y - delta) + phi(y + delta)|` for the interference
/// figure; the fiducial values are evaluated in closed form.
pub fn interference_profile(delta: f64, grid: Grid1D, params: &ModelParams) -> Vec<f64> {
    grid.points()
        .map(|y| {
            (crate::cst::fiducial_value(params, y - delta)
                + crate::cst::fiducial_value(params, y + delta))
            .norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams {
            d: 0.3,
            e: 1.0,
            h2: 0.1,
            h4: 0.25,
            m: 1.0,
            a: 0.0,
        }
    }

    fn density() -> SpectralDensity {
        SpectralDensity::new(
            vec![-0.4, 0.1, 0.5],
            vec![
                Complex64::new(0.8, 0.1),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.3, -0.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn analytic_coords_substitutions() {
        let p = ModelParams { d: 1.0, e: 2.0, ..params() };
        let u = analytic_coords(0.0, 0.0, 0.0, &p);
        assert_eq!(u.u1, Complex64::new(0.0, 0.0));
        assert_eq!(u.u2, Complex64::new(0.0, 2.0));
        let u = analytic_coords(0.0, 0.0, 1.0, &p);
        assert_eq!(u.u1, Complex64::new(-2.0, 0.0));
        let u = analytic_coords(1.0, 0.0, 0.0, &p);
        assert_eq!(u.u1, Complex64::new(1.0, 4.0));
        assert_eq!(u.u2, Complex64::new(1.0, 2.0));
    }

    #[test]
    fn envelope_modulus() {
        let p = params();
        assert_eq!(envelope(0.0, &p), Complex64::new(1.0, 0.0));
        for x1 in [-1.5, 0.3, 2.0] {
            assert_relative_eq!(
                envelope(x1, &p).norm(),
                (-PI * p.e * p.h4 * x1 * x1).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn free_psi_plane_wave_pde() {
        // d_eta^2 psi + pi i h4 d_xi psi = 0 for a single node, checked by
        // central differences in each complex direction.
        let p = params();
        let g = SpectralDensity::new(vec![0.7], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let xi = Complex64::new(0.2, 0.05);
        let eta = Complex64::new(-0.3, 0.4);
        let h = 1e-4;
        let d_eta2 = (free_psi(xi, eta + h, &g, &p) - 2.0 * free_psi(xi, eta, &g, &p)
            + free_psi(xi, eta - h, &g, &p))
            / (h * h);
        let d_xi = (free_psi(xi + h, eta, &g, &p) - free_psi(xi - h, eta, &g, &p)) / (2.0 * h);
        let res = d_eta2 + Complex64::new(0.0, PI * p.h4) * d_xi;
        assert!(res.norm() < 1e-4 * free_psi(xi, eta, &g, &p).norm().max(1.0));
    }

    #[test]
    fn harmonic_psi_heat_pde() {
        // d_eta psi = (1 / (2 pi h4 b)) d_xi^2 psi with the validated sign.
        let p = ModelParams { a: 0.4, ..params() };
        let b = rotation_param(&p);
        let k = SpectralDensity::new(vec![0.2], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let xi = Complex64::new(0.5, 0.1);
        let eta = Complex64::new(1.2, 0.3);
        let h = 1e-4;
        let at = |xi, eta| harmonic_psi(xi, eta, &k, &p).unwrap();
        let d_eta = (at(xi, eta + h) - at(xi, eta - h)) / (2.0 * h);
        let d_xi2 = (at(xi + h, eta) - 2.0 * at(xi, eta) + at(xi - h, eta)) / (h * h);
        let res = d_eta - d_xi2 / (2.0 * PI * p.h4 * b);
        assert!(
            res.norm() < 1e-5 * at(xi, eta).norm(),
            "heat residual {:.3e}",
            res.norm()
        );
    }

    #[test]
    fn density_linearity() {
        let p = params();
        let g = density();
        let c = Complex64::new(0.5, -1.5);
        let u = analytic_coords(0.4, -0.2, 0.3, &p);
        let a = free_phi(0.1, u, &g.scale(c), &p).unwrap();
        let b = c * free_phi(0.1, u, &g, &p).unwrap();
        assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
    }

    #[test]
    fn free_residual_second_order() {
        let p = params();
        let g = density();
        let coarse = Grid3D::cube(1.5, 21);
        let fine = Grid3D::cube(1.5, 41);
        // dt must resolve the fastest density phase (4 pi / h4) s^2 * 4 pi / m
        let r1 =
            schrodinger_residual(Model::Free, &g, &p, coarse, 0.05, 0.002, 2).unwrap();
        let r2 =
            schrodinger_residual(Model::Free, &g, &p, fine, 0.05, 0.001, 2).unwrap();
        let ratio = r1 / r2;
        assert!(r2 < r1, "no decay: {r1:.3e} -> {r2:.3e}");
        assert!(
            ratio > 2.5 && ratio < 6.5,
            "expected ~4x decay, got {ratio:.2} ({r1:.3e} -> {r2:.3e})"
        );
    }

    #[test]
    fn harmonic_residual_second_order() {
        let p = ModelParams { a: 0.4, ..params() };
        let g = density();
        let coarse = Grid3D::cube(1.0, 21);
        let fine = Grid3D::cube(1.0, 41);
        let r1 =
            schrodinger_residual(Model::Harmonic, &g, &p, coarse, 0.05, 0.002, 2).unwrap();
        let r2 =
            schrodinger_residual(Model::Harmonic, &g, &p, fine, 0.05, 0.001, 2).unwrap();
        let ratio = r1 / r2;
        assert!(
            ratio > 2.5 && ratio < 6.5,
            "expected ~4x decay, got {ratio:.2} ({r1:.3e} -> {r2:.3e})"
        );
    }

    #[test]
    fn wrong_sign_residual_is_large() {
        let p = params();
        let g = density();
        let grid = Grid3D::cube(1.5, 41);
        let good = schrodinger_residual(Model::Free, &g, &p, grid, 0.05, 0.001, 2).unwrap();
        let bad = schrodinger_residual_signed(
            Model::Free, &g, &p, grid, 0.05, 0.001, 2, -DYN_SIGN,
        )
        .unwrap();
        assert!(bad > 0.1, "negative control too small: {bad:.3e}");
        assert!(bad > 50.0 * good);
    }

    #[test]
    fn interference_profile_fringes() {
        let grid = Grid1D::symmetric(4.0, 201);
        let p = ModelParams { d: 0.0, e: 0.5, h4: 1.0, ..params() };
        // D = 0: no sub-additive dips
        let profile = interference_profile(1.0, grid, &p);
        for (j, y) in grid.points().enumerate() {
            let sum = crate::cst::fiducial_value(&p, y - 1.0).norm()
                + crate::cst::fiducial_value(&p, y + 1.0).norm();
            assert!(profile[j] >= sum - 1e-12);
        }
        // D != 0: at least one dip
        let pd = ModelParams { d: 1.2, ..p };
        let profile = interference_profile(1.0, grid, &pd);
        let dips = grid
            .points()
            .enumerate()
            .filter(|(j, y)| {
                let sum = crate::cst::fiducial_value(&pd, y - 1.0).norm()
                    + crate::cst::fiducial_value(&pd, y + 1.0).norm();
                profile[*j] < 0.9 * sum
            })
            .count();
        assert!(dips > 0, "expected interference dips for D != 0");
    }
}
