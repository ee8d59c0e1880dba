use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::NumericError;
use crate::symalg::{Bindings, Sym};

/// Scalar model parameters shared by every module.
///
/// `d` is the cubic fiducial parameter, `e` the squeeze, `h2`/`h4` the
/// representation parameters, `m` the mass and `a = m*omega` the
/// oscillator strength (0 for the free model).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: f64,
    pub e: f64,
    pub h2: f64,
    pub h4: f64,
    pub m: f64,
    pub a: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), NumericError> {
        if self.h4 == 0.0 {
            return Err(NumericError::InvalidParams("h4 must be nonzero".into()));
        }
        if !(self.m > 0.0) {
            return Err(NumericError::InvalidParams("m must be positive".into()));
        }
        if self.a < 0.0 {
            return Err(NumericError::InvalidParams("a must be >= 0".into()));
        }
        Ok(())
    }

    /// Fiducial vectors additionally need `E*h4 > 0`.
    pub fn validate_fiducial(&self) -> Result<(), NumericError> {
        self.validate()?;
        if !(self.e * self.h4 > 0.0) {
            return Err(NumericError::InvalidParams(
                "E*h4 must be strictly positive for a square-integrable fiducial vector".into(),
            ));
        }
        Ok(())
    }

    /// Numeric bindings for all parameter symbols, with `pi` bound to the
    /// double-precision approximation.
    pub fn bindings(&self) -> Bindings {
        let mut b = Bindings::new();
        b.set_re(Sym::D, self.d)
            .set_re(Sym::E, self.e)
            .set_re(Sym::H2, self.h2)
            .set_re(Sym::H4, self.h4)
            .set_re(Sym::M, self.m)
            .set_re(Sym::A, self.a)
            .set_re(Sym::Pi, std::f64::consts::PI);
        b
    }

    /// Bindings extended with grid coordinates (x1, x2, x3).
    pub fn bindings_at(&self, x: [f64; 3]) -> Bindings {
        let mut b = self.bindings();
        b.set(Sym::X1, Complex64::new(x[0], 0.0))
            .set(Sym::X2, Complex64::new(x[1], 0.0))
            .set(Sym::X3, Complex64::new(x[2], 0.0));
        b
    }
}
