//! Constants of the three surface families and their constraint checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the algebraic constraints between constants.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Rotational surfaces in `L^4_1(f, 0)`: `4 H0^2 + c2^2 a^2 = a^2`, `c2 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsL4 {
    pub a: f64,
    pub h0: f64,
    pub c2: f64,
    /// `a^2 - 4 H0^2`
    pub b2: f64,
}

impl ConstantsL4 {
    /// Derives `c2 = sqrt(1 - 4 H0^2 / a^2)`.
    pub fn new(a: f64, h0: f64) -> Result<Self> {
        check_a_h0(a, h0)?;
        let b2 = a * a - 4.0 * h0 * h0;
        if !(b2 > 0.0) {
            return Err(Error::Constraint {
                equation: "a^2 - 4 H0^2 > 0",
                residual: -b2,
            });
        }
        Ok(Self {
            a,
            h0,
            c2: (b2).sqrt() / a,
            b2,
        })
    }

    /// Checks a supplied `c2` against `4 H0^2 + c2^2 a^2 = a^2`.
    pub fn with_c2(a: f64, h0: f64, c2: f64) -> Result<Self> {
        let k = Self::new(a, h0)?;
        if !(c2 > 0.0) {
            return Err(Error::Constraint {
                equation: "c2 > 0",
                residual: -c2,
            });
        }
        let r = 4.0 * h0 * h0 + c2 * c2 * a * a - a * a;
        if r.abs() > CONSTRAINT_TOL * (a * a).max(1.0) {
            return Err(Error::Constraint {
                equation: "4 H0^2 + c2^2 a^2 = a^2",
                residual: r.abs(),
            });
        }
        Ok(k)
    }

    pub fn b(&self) -> f64 {
        self.b2.sqrt()
    }
}

/// Surfaces in `L^5_1(f, 0)`: `c2^2 + c3^2 + 4 H0^2 / a^2 = 1`, `c2, c3 != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsL5 {
    pub a: f64,
    pub h0: f64,
    pub c2: f64,
    pub c3: f64,
    /// `a^2 c3^2 + 4 H0^2`
    pub c4: f64,
    /// `a^2 - 4 H0^2`
    pub b2: f64,
}

impl ConstantsL5 {
    pub fn new(a: f64, h0: f64, c2: f64, c3: f64) -> Result<Self> {
        check_a_h0(a, h0)?;
        if c2 == 0.0 || !c2.is_finite() {
            return Err(Error::Constraint {
                equation: "c2 != 0",
                residual: 0.0,
            });
        }
        if c3 == 0.0 || !c3.is_finite() {
            return Err(Error::Constraint {
                equation: "c3 != 0",
                residual: 0.0,
            });
        }
        let r = c2 * c2 + c3 * c3 + 4.0 * h0 * h0 / (a * a) - 1.0;
        if r.abs() > CONSTRAINT_TOL {
            return Err(Error::Constraint {
                equation: "c2^2 + c3^2 + 4 H0^2 / a^2 = 1",
                residual: r.abs(),
            });
        }
        let b2 = a * a - 4.0 * h0 * h0;
        if !(b2 > 0.0) {
            return Err(Error::Constraint {
                equation: "a^2 - 4 H0^2 > 0",
                residual: -b2,
            });
        }
        Ok(Self {
            a,
            h0,
            c2,
            c3,
            c4: a * a * c3 * c3 + 4.0 * h0 * h0,
            b2,
        })
    }

    /// Derives `c2 = +sqrt(1 - c3^2 - 4 H0^2 / a^2)`.
    pub fn from_c3(a: f64, h0: f64, c3: f64) -> Result<Self> {
        check_a_h0(a, h0)?;
        let rest = 1.0 - c3 * c3 - 4.0 * h0 * h0 / (a * a);
        if !(rest > 0.0) {
            return Err(Error::Constraint {
                equation: "c2^2 + c3^2 + 4 H0^2 / a^2 = 1",
                residual: -rest,
            });
        }
        Self::new(a, h0, rest.sqrt(), c3)
    }
}

/// Product surfaces in `E^1_1 x S^4`: `b2^2 + b3^2 = 1 / (b1^2 + 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsProduct {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// `asinh(b1)`
    pub theta0: f64,
}

impl ConstantsProduct {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        let k = Self::unchecked(b1, b2, b3)?;
        let r = b2 * b2 + b3 * b3 - 1.0 / (b1 * b1 + 2.0);
        if r.abs() > CONSTRAINT_TOL {
            return Err(Error::Constraint {
                equation: "b2^2 + b3^2 = 1/(b1^2 + 2)",
                residual: r.abs(),
            });
        }
        Ok(k)
    }

    /// Derives `b2 = +sqrt(1/(b1^2 + 2) - b3^2)`.
    pub fn from_b1_b3(b1: f64, b3: f64) -> Result<Self> {
        let rest = 1.0 / (b1 * b1 + 2.0) - b3 * b3;
        if !(rest > 0.0) {
            return Err(Error::Constraint {
                equation: "b2^2 + b3^2 = 1/(b1^2 + 2)",
                residual: -rest,
            });
        }
        Self::new(b1, rest.sqrt(), b3)
    }

    /// The general (not necessarily parallel) family: only requires the
    /// constants to be non-zero and the fiber circle to exist.
    pub fn unchecked(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        for (name, v) in [("b1 != 0", b1), ("b2 != 0", b2), ("b3 != 0", b3)] {
            if v == 0.0 || !v.is_finite() {
                return Err(Error::Constraint {
                    equation: name,
                    residual: 0.0,
                });
            }
        }
        let b0sq = 1.0 - b2 * b2 - b3 * b3;
        if !(b0sq > 0.0) {
            return Err(Error::Constraint {
                equation: "b2^2 + b3^2 < 1",
                residual: -b0sq,
            });
        }
        Ok(Self {
            b1,
            b2,
            b3,
            theta0: b1.asinh(),
        })
    }

    /// The family member with prescribed `b4`: solves for `b0`, then takes
    /// `b2 = +sqrt(1 - b0^2 - b3^2)`. `b4 = 0` recovers [`Self::from_b1_b3`].
    pub fn with_b4(b1: f64, b3: f64, b4: f64) -> Result<Self> {
        let ch2 = 1.0 + b1 * b1;
        // (ch2 + 1) b0^2 - 2 b4 b0 - ch2 = 0, positive root
        let b0 = (b4 + (b4 * b4 + (ch2 + 1.0) * ch2).sqrt()) / (ch2 + 1.0);
        let rest = 1.0 - b0 * b0 - b3 * b3;
        if !(rest > 0.0) {
            return Err(Error::Constraint {
                equation: "b0^2 + b3^2 < 1",
                residual: -rest,
            });
        }
        Self::unchecked(b1, rest.sqrt(), b3)
    }

    /// Radius of the first circle, `sqrt(1 - b2^2 - b3^2)`.
    pub fn b0(&self) -> f64 {
        (1.0 - self.b2 * self.b2 - self.b3 * self.b3).sqrt()
    }

    /// The coefficient whose vanishing is equivalent to a parallel mean curvature vector.
    pub fn b4(&self) -> f64 {
        let ch2 = 1.0 + self.b1 * self.b1;
        let b0 = self.b0();
        (b0 * b0 * (ch2 + 1.0) - ch2) / (2.0 * b0)
    }

    pub fn b5(&self) -> f64 {
        let ch2 = 1.0 + self.b1 * self.b1;
        (self.b3 * self.b3 * (ch2 + 1.0) - 1.0) / (2.0 * self.b3)
    }

    /// Closed-form `|H|` of the family.
    pub fn mean_curvature_norm(&self) -> f64 {
        let ch2 = 1.0 + self.b1 * self.b1;
        let m = 0.5 * self.b2 * (ch2 + 1.0);
        (self.b4().powi(2) + m * m + self.b5().powi(2)).sqrt()
    }
}

fn check_a_h0(a: f64, h0: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Constraint {
            equation: "a > 0",
            residual: if a.is_finite() { -a } else { f64::INFINITY },
        });
    }
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(Error::Constraint {
            equation: "H0 > 0",
            residual: 0.0,
        });
    }
    Ok(())
}

/// Raw constants as read from a configuration, before validation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RawConstants {
    L4 {
        a: f64,
        h0: f64,
        c2: Option<f64>,
    },
    L5 {
        a: f64,
        h0: f64,
        c2: Option<f64>,
        c3: f64,
    },
    Product {
        b1: f64,
        b2: Option<f64>,
        b3: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ValidatedConstants {
    L4(ConstantsL4),
    L5(ConstantsL5),
    Product(ConstantsProduct),
}

/// Checks each constraint and fills in derived constants.
pub fn validate_constants(raw: RawConstants) -> Result<ValidatedConstants> {
    Ok(match raw {
        RawConstants::L4 { a, h0, c2: None } => ValidatedConstants::L4(ConstantsL4::new(a, h0)?),
        RawConstants::L4 {
            a,
            h0,
            c2: Some(c2),
        } => ValidatedConstants::L4(ConstantsL4::with_c2(a, h0, c2)?),
        RawConstants::L5 {
            a,
            h0,
            c2: None,
            c3,
        } => ValidatedConstants::L5(ConstantsL5::from_c3(a, h0, c3)?),
        RawConstants::L5 {
            a,
            h0,
            c2: Some(c2),
            c3,
        } => ValidatedConstants::L5(ConstantsL5::new(a, h0, c2, c3)?),
        RawConstants::Product { b1, b2: None, b3 } => {
            ValidatedConstants::Product(ConstantsProduct::from_b1_b3(b1, b3)?)
        }
        RawConstants::Product {
            b1,
            b2: Some(b2),
            b3,
        } => ValidatedConstants::Product(ConstantsProduct::new(b1, b2, b3)?),
    })
}
