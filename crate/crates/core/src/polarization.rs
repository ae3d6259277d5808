//! Jones vectors and the four pump/signal polarization arrangements.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Normalized two-component polarization state on the (x̂, ŷ) basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JonesVector {
    pub cx: Complex64,
    pub cy: Complex64,
}

impl JonesVector {
    /// Normalizes `(cx, cy)`; the zero vector has no polarization.
    pub fn new(cx: Complex64, cy: Complex64) -> Result<Self> {
        let norm = (cx.norm_sqr() + cy.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("Jones vector must be nonzero and finite"));
        }
        Ok(Self {
            cx: cx / norm,
            cy: cy / norm,
        })
    }

    pub fn x() -> Self {
        Self {
            cx: Complex64::new(1.0, 0.0),
            cy: Complex64::new(0.0, 0.0),
        }
    }

    pub fn y() -> Self {
        Self {
            cx: Complex64::new(0.0, 0.0),
            cy: Complex64::new(1.0, 0.0),
        }
    }

    /// Linear polarization at `angle` radians from x̂.
    pub fn linear(angle: f64) -> Self {
        Self {
            cx: Complex64::new(angle.cos(), 0.0),
            cy: Complex64::new(angle.sin(), 0.0),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.cx.conj() * other.cx + self.cy.conj() * other.cy
    }

    /// |⟨self|other⟩|², the power fraction of `other` passed by an analyzer set to `self`.
    pub fn overlap(&self, other: &JonesVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.cx.norm_sqr() + self.cy.norm_sqr()
    }

    pub fn is_parallel(&self, other: &JonesVector) -> bool {
        (self.overlap(other) - 1.0).abs() < 1e-12
    }

    pub fn is_orthogonal(&self, other: &JonesVector) -> bool {
        self.overlap(other) < 1e-12
    }

    pub fn rotated(&self, u: &JonesMatrix) -> JonesVector {
        let (cx, cy) = u.apply(self.cx, self.cy);
        JonesVector { cx, cy }
    }
}

/// A 2×2 complex matrix acting on (x̂, ŷ) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

impl JonesMatrix {
    /// General SU(2) element from Euler-like angles.
    pub fn unitary(theta: f64, phi: f64, chi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let a = Complex64::from_polar(c, phi);
        let b = Complex64::from_polar(s, chi);
        JonesMatrix([[a, -b.conj()], [b, a.conj()]])
    }

    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y)
    }
}

/// Input polarization arrangement of (P1, P2, S).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PolarizationCase {
    /// Everything co-polarized.
    A,
    /// Crossed pumps, signal along P2.
    B,
    /// Parallel pumps, signal crossed.
    C,
    /// Crossed pumps, signal along P1.
    D,
}

impl PolarizationCase {
    pub const ALL: [PolarizationCase; 4] = [Self::A, Self::B, Self::C, Self::D];

    /// Jones triple `(P1, P2, S)`.
    pub fn jones(self) -> (JonesVector, JonesVector, JonesVector) {
        let (x, y) = (JonesVector::x(), JonesVector::y());
        match self {
            Self::A => (x, x, x),
            Self::B => (x, y, y),
            Self::C => (x, x, y),
            Self::D => (x, y, x),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
        }
    }
}

impl fmt::Display for PolarizationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolarizationCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            "D" => Ok(Self::D),
            other => Err(Error::Config(format!(
                "unknown polarization case `{other}` (expected A, B, C or D)"
            ))),
        }
    }
}
