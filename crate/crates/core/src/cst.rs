//! Fiducial vector, the induced coherent state transform by Simpson
//! quadrature, and finite-difference application of symbolic operators.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::NumericError;
use crate::grid::{pairwise_sum_c, Field3D, Grid1D, Grid3D, WaveFunction1D};
use crate::params::ModelParams;
use crate::symalg::{Axis, DiffOp, Polynomial, Sym};

/// Pointwise value of the fiducial vector
/// `phi(y) = exp((pi i D h4 / 3) y^3 - pi E h4 y^2 + 2 pi i D h2 y)`.
pub fn fiducial_value(params: &ModelParams, y: f64) -> Complex64 {
    let re = -PI * params.e * params.h4 * y * y;
    let im = PI * params.d * params.h4 * y * y * y / 3.0 + 2.0 * PI * params.d * params.h2 * y;
    Complex64::new(re, im).exp()
}

/// Sampled fiducial vector; requires `E*h4 > 0` for square-integrability.
pub fn fiducial(params: &ModelParams, grid: Grid1D) -> Result<WaveFunction1D, NumericError> {
    params.validate_fiducial()?;
    Ok(WaveFunction1D::from_fn(grid, |y| fiducial_value(params, y)))
}

/// The first-order operator annihilating the fiducial vector exactly:
/// `L = -i d/dy - pi h4 D y^2 - 2 pi i E h4 y - 2 pi h2 D`.
pub fn fiducial_annihilator() -> DiffOp {
    let pi = Polynomial::pi();
    let i = Polynomial::i();
    let y = Polynomial::var(Sym::Y);
    let mut op = DiffOp::partial(Axis::Y).mul_poly(&-&i);
    op.add_term(
        [0; 4],
        -(pi.clone() * Polynomial::var(Sym::H4) * Polynomial::var(Sym::D) * (&y * &y))
            - Polynomial::int(2)
                * pi.clone()
                * i
                * Polynomial::var(Sym::E)
                * Polynomial::var(Sym::H4)
                * y
            - Polynomial::int(2) * pi * Polynomial::var(Sym::H2) * Polynomial::var(Sym::D),
    );
    op
}

fn stencil_1d(values: &[Complex64], h: f64, order: u32) -> Vec<Complex64> {
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    match order {
        1 => {
            for j in 1..n - 1 {
                out[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
            }
        }
        2 => {
            for j in 1..n - 1 {
                out[j] = (values[j + 1] - 2.0 * values[j] + values[j - 1]) / (h * h);
            }
        }
        _ => unreachable!("stencil order is 1 or 2"),
    }
    out
}

/// Apply a symbolic operator in `y` to 1-D samples by second-order
/// central differences. Valid on the interior; boundary entries are
/// zeroed, one node per derivative pass.
pub fn apply_diffop_fd_1d(
    op: &DiffOp,
    f: &WaveFunction1D,
    params: &ModelParams,
) -> Result<WaveFunction1D, NumericError> {
    for axis in [Axis::X1, Axis::X2, Axis::X3] {
        if op.uses_axis(axis) {
            return Err(NumericError::AxisMismatch(match axis {
                Axis::X1 => "x1",
                Axis::X2 => "x2",
                _ => "x3",
            }));
        }
    }
    if f.grid.n < 5 {
        return Err(NumericError::GridTooSmall("need at least 5 nodes".into()));
    }
    let mut out = WaveFunction1D::zeros(f.grid);
    for (idx, coeff) in op.terms() {
        let order = idx[Axis::Y.idx()];
        if order > 2 {
            return Err(NumericError::GridTooSmall(
                "finite differences support derivative order <= 2 per axis".into(),
            ));
        }
        let data = match order {
            0 => f.values.clone(),
            k => stencil_1d(&f.values, f.grid.step, k),
        };
        for (j, y) in f.grid.points().enumerate() {
            let mut b = params.bindings();
            b.set(Sym::Y, Complex64::new(y, 0.0));
            let c = coeff.eval(&b)?;
            out.values[j] += c * data[j];
        }
    }
    Ok(out)
}

/// `||L f|| / ||f||` over the interior, `margin` nodes from each end.
pub fn annihilation_residual_1d(
    op: &DiffOp,
    f: &WaveFunction1D,
    params: &ModelParams,
    margin: usize,
) -> Result<f64, NumericError> {
    let lf = apply_diffop_fd_1d(op, f, params)?;
    let interior = |w: &WaveFunction1D| -> f64 {
        let sq: Vec<f64> = w.values[margin..w.grid.n - margin]
            .iter()
            .map(|v| v.norm_sqr())
            .collect();
        (w.grid.step * crate::grid::pairwise_sum(&sq)).sqrt()
    };
    let denom = interior(f);
    if denom == 0.0 {
        return Err(NumericError::GridTooSmall("zero field in residual".into()));
    }
    Ok(interior(&lf) / denom)
}

fn axis_stride(grid: &Grid3D, axis: usize) -> usize {
    match axis {
        0 => grid.n[2],
        1 => grid.n[0] * grid.n[2],
        _ => 1,
    }
}

fn stencil_3d(grid: &Grid3D, values: &[Complex64], axis: usize, order: u32) -> Vec<Complex64> {
    let stride = axis_stride(grid, axis);
    let h = grid.step[axis];
    let n_axis = grid.n[axis];
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    let idx_on_axis = |flat: usize| -> usize {
        match axis {
            0 => (flat / grid.n[2]) % grid.n[0],
            1 => flat / (grid.n[0] * grid.n[2]),
            _ => flat % grid.n[2],
        }
    };
    for flat in 0..values.len() {
        let j = idx_on_axis(flat);
        if j == 0 || j == n_axis - 1 {
            continue;
        }
        out[flat] = match order {
            1 => (values[flat + stride] - values[flat - stride]) / (2.0 * h),
            2 => (values[flat + stride] - 2.0 * values[flat] + values[flat - stride]) / (h * h),
            _ => unreachable!("stencil order is 1 or 2"),
        };
    }
    out
}

/// Apply a symbolic operator in (x1, x2, x3) to a 3-D field by
/// second-order central differences; mixed derivatives by composition of
/// single-axis passes. Boundary layers (one node per pass) are zeroed.
pub fn apply_diffop_fd(
    op: &DiffOp,
    f: &Field3D,
    params: &ModelParams,
) -> Result<Field3D, NumericError> {
    if op.uses_axis(Axis::Y) {
        return Err(NumericError::AxisMismatch("y"));
    }
    let grid = f.grid;
    if grid.n.iter().any(|&n| n < 5) {
        return Err(NumericError::GridTooSmall("need at least 5 nodes per axis".into()));
    }
    let mut out = Field3D::zeros(grid);
    for (idx, coeff) in op.terms() {
        let mut data = f.values.clone();
        for axis in 0..3 {
            let e = idx[axis];
            if e > 2 {
                return Err(NumericError::GridTooSmall(
                    "finite differences support derivative order <= 2 per axis".into(),
                ));
            }
            if e > 0 {
                data = stencil_3d(&grid, &data, axis, e);
            }
        }
        // Evaluate the coefficient per node; parallel over x2 rows.
        let rows: Vec<Vec<Complex64>> = (0..grid.n[1])
            .into_par_iter()
            .map(|i2| {
                let x2 = grid.coord(1, i2);
                let mut row = vec![Complex64::new(0.0, 0.0); grid.n[0] * grid.n[2]];
                for i1 in 0..grid.n[0] {
                    let x1 = grid.coord(0, i1);
                    for i3 in 0..grid.n[2] {
                        let x3 = grid.coord(2, i3);
                        let b = params.bindings_at([x1, x2, x3]);
                        let c = coeff.eval(&b).expect("operator coefficient has unbound symbol");
                        row[i1 * grid.n[2] + i3] = c * data[grid.index(i1, i2, i3)];
                    }
                }
                row
            })
            .collect();
        for (i2, row) in rows.iter().enumerate() {
            for i1 in 0..grid.n[0] {
                for i3 in 0..grid.n[2] {
                    out.values[grid.index(i1, i2, i3)] += row[i1 * grid.n[2] + i3];
                }
            }
        }
    }
    Ok(out)
}

/// `||L F|| / ||F||` over the interior, `margin` nodes from each face.
pub fn annihilation_residual(
    op: &DiffOp,
    f: &Field3D,
    params: &ModelParams,
    margin: usize,
) -> Result<f64, NumericError> {
    let lf = apply_diffop_fd(op, f, params)?;
    let denom = f.interior_norm(margin);
    if denom == 0.0 {
        return Err(NumericError::GridTooSmall("zero field in residual".into()));
    }
    Ok(lf.interior_norm(margin) / denom)
}

/// Band-limited resampler: trigonometric interpolation on the periodic
/// extension of the sample grid, with an exact fast path for shifts that
/// are integer multiples of the step. The forward spectrum is computed
/// once and reused for every shift.
struct TrigShifter {
    grid: Grid1D,
    values: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl TrigShifter {
    fn new(f: &WaveFunction1D) -> Self {
        let n = f.grid.n;
        let nn = n as f64;
        let spectrum: Vec<Complex64> = (0..n)
            .map(|m| {
                let parts: Vec<Complex64> = (0..n)
                    .map(|j| {
                        f.values[j] * Complex64::from_polar(1.0, -2.0 * PI * (m * j) as f64 / nn)
                    })
                    .collect();
                pairwise_sum_c(&parts)
            })
            .collect();
        TrigShifter {
            grid: f.grid,
            values: f.values.clone(),
            spectrum,
        }
    }

    fn shifted(&self, shift: f64) -> Vec<Complex64> {
        let n = self.grid.n;
        let s = shift / self.grid.step;
        let k = s.round();
        if (s - k).abs() < 1e-9 {
            let k = k as i64;
            return (0..n as i64)
                .map(|j| self.values[(j - k).rem_euclid(n as i64) as usize])
                .collect();
        }
        let nn = n as f64;
        (0..n)
            .map(|j| {
                let parts: Vec<Complex64> = (0..n)
                    .map(|m| {
                        let freq = if m <= n / 2 { m as f64 } else { m as f64 - nn };
                        self.spectrum[m]
                            * Complex64::from_polar(1.0, 2.0 * PI * freq * (j as f64 - s) / nn)
                    })
                    .collect();
                pairwise_sum_c(&parts) / nn
            })
            .collect()
    }
}

fn simpson_weights(n: usize) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "composite Simpson needs an odd node count >= 3");
    let mut w = vec![0.0; n];
    w[0] = 1.0 / 3.0;
    w[n - 1] = 1.0 / 3.0;
    for (j, wj) in w.iter_mut().enumerate().take(n - 1).skip(1) {
        *wj = if j % 2 == 1 { 4.0 / 3.0 } else { 2.0 / 3.0 };
    }
    w
}

/// Induced coherent state transform
/// `f~(x1,x2,x3) = e^{-2 pi i h2 x2} Int f(y) e^{-2 pi i h4 (-x3 y + x2 y^2/2)} conj(phi(y-x1)) dy`
/// by composite Simpson quadrature on the shared (f, phi) grid.
///
/// For each fixed (x1, x2) the windowed integrand is formed once and the
/// x3-line evaluated by a phase recurrence. Rows are data-parallel.
pub fn icst(
    f: &WaveFunction1D,
    phi: &WaveFunction1D,
    out: Grid3D,
    params: &ModelParams,
) -> Result<Field3D, NumericError> {
    if f.grid != phi.grid {
        return Err(NumericError::InvalidParams(
            "f and phi must share a sample grid".into(),
        ));
    }
    if f.grid.n < 3 || f.grid.n % 2 == 0 {
        return Err(NumericError::InvalidParams(
            "Simpson quadrature needs an odd node count >= 3".into(),
        ));
    }
    // Boundary-decay precondition: warn, do not fail.
    let fmax = f.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let edge = f.values[0].norm().max(f.values[f.grid.n - 1].norm());
    if fmax > 0.0 && edge / fmax > 1e-12 {
        log::warn!(
            "icst: integrand boundary decay {:.2e} exceeds 1e-12; widen the y-grid",
            edge / fmax
        );
    }

    let n = f.grid.n;
    let weights = simpson_weights(n);
    let ys: Vec<f64> = f.grid.points().collect();
    let shifter = TrigShifter::new(phi);
    let h4 = params.h4;
    let h2 = params.h2;

    let mut field = Field3D::zeros(out);
    let slabs: Vec<Vec<Complex64>> = (0..out.n[0])
        .into_par_iter()
        .map(|i1| {
            let x1 = out.coord(0, i1);
            let phi_shift = shifter.shifted(x1);
            let mut slab = vec![Complex64::new(0.0, 0.0); out.n[1] * out.n[2]];
            let mut windowed = vec![Complex64::new(0.0, 0.0); n];
            let mut phase = vec![Complex64::new(0.0, 0.0); n];
            let mut parts = vec![Complex64::new(0.0, 0.0); n];
            for i2 in 0..out.n[1] {
                let x2 = out.coord(1, i2);
                let prefactor = Complex64::from_polar(1.0, -2.0 * PI * h2 * x2);
                for j in 0..n {
                    let y = ys[j];
                    let quad_phase = Complex64::from_polar(1.0, -PI * h4 * x2 * y * y);
                    windowed[j] =
                        f.values[j] * quad_phase * phi_shift[j].conj() * weights[j] * f.grid.step;
                    phase[j] = Complex64::from_polar(1.0, 2.0 * PI * h4 * out.origin[2] * y);
                }
                let step3: Vec<Complex64> = ys
                    .iter()
                    .map(|&y| Complex64::from_polar(1.0, 2.0 * PI * h4 * out.step[2] * y))
                    .collect();
                for i3 in 0..out.n[2] {
                    for j in 0..n {
                        parts[j] = windowed[j] * phase[j];
                    }
                    slab[i2 * out.n[2] + i3] = prefactor * pairwise_sum_c(&parts);
                    for j in 0..n {
                        phase[j] *= step3[j];
                    }
                }
            }
            slab
        })
        .collect();
    for (i1, slab) in slabs.iter().enumerate() {
        for i2 in 0..out.n[1] {
            for i3 in 0..out.n[2] {
                field.values[out.index(i1, i2, i3)] = slab[i2 * out.n[2] + i3];
            }
        }
    }
    Ok(field)
}
