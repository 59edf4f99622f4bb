//! Plane vectors and 2x2 stochastic integrand matrices.
//!
//! A `DirectionMatrix` holds the integrand of an R^2-valued stochastic
//! integral against two-dimensional Brownian motion: entry `(i, j)` is the
//! sensitivity of coordinate process `i` to Brownian coordinate `j`. Column
//! `j` is therefore the displacement produced by a unit increment of `dW^j`.

use std::ops::{Add, Mul, Neg, Sub};

/// A vector in R^2.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2(pub f64, pub f64);

impl Vec2 {
    pub const ZERO: Vec2 = Vec2(0.0, 0.0);

    pub fn new(a: f64, b: f64) -> Self {
        Vec2(a, b)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.0 * other.0 + self.1 * other.1
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        // hypot is slower but stays accurate for extreme magnitudes
        self.0.hypot(self.1)
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(Vec2(self.0 / n, self.1 / n))
        } else {
            None
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2(self.0 + rhs.0, self.1 + rhs.1)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2(self.0 - rhs.0, self.1 - rhs.1)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, c: f64) -> Vec2 {
        Vec2(self.0 * c, self.1 * c)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2(-self.0, -self.1)
    }
}

/// Relative tolerance for the conformality predicate.
///
/// Rotation matrices built from `sin`/`cos` satisfy the defining identities
/// to a few ulps; 1e-9 leaves ample headroom while still rejecting any
/// genuinely sheared matrix.
pub const CONFORMAL_TOL: f64 = 1e-9;

/// 2x2 integrand matrix; entry `(i, j)` drives coordinate `i` by `dW^j`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DirectionMatrix {
    rows: [[f64; 2]; 2],
}

impl DirectionMatrix {
    pub const ZERO: DirectionMatrix = DirectionMatrix {
        rows: [[0.0; 2]; 2],
    };

    pub fn new(rows: [[f64; 2]; 2]) -> Self {
        DirectionMatrix { rows }
    }

    pub fn identity() -> Self {
        DirectionMatrix {
            rows: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Rotation by `theta`; columns are (cos, sin) and (-sin, cos).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        DirectionMatrix {
            rows: [[c, -s], [s, c]],
        }
    }

    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        DirectionMatrix {
            rows: [[c1.0, c2.0], [c1.1, c2.1]],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2(self.rows[i][0], self.rows[i][1])
    }

    /// Column `j`: displacement produced by a unit `dW^j` increment.
    pub fn column(&self, j: usize) -> Vec2 {
        Vec2(self.rows[0][j], self.rows[1][j])
    }

    pub fn scaled(&self, c: f64) -> Self {
        DirectionMatrix {
            rows: [
                [self.rows[0][0] * c, self.rows[0][1] * c],
                [self.rows[1][0] * c, self.rows[1][1] * c],
            ],
        }
    }

    /// Matrix-vector product: the increment `H dW`.
    pub fn apply(&self, w: Vec2) -> Vec2 {
        Vec2(self.row(0).dot(w), self.row(1).dot(w))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.rows[0][0] * self.rows[0][0]
            + self.rows[0][1] * self.rows[0][1]
            + self.rows[1][0] * self.rows[1][0]
            + self.rows[1][1] * self.rows[1][1]
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.is_finite())
    }

    /// Orthogonal rows of equal norm: a scalar multiple of a rotation or
    /// reflection. Checked relative to the Frobenius scale with
    /// [`CONFORMAL_TOL`]; the zero matrix counts as conformal.
    pub fn is_conformal(&self) -> bool {
        self.is_conformal_within(CONFORMAL_TOL)
    }

    pub fn is_conformal_within(&self, tol: f64) -> bool {
        let scale = self.frobenius_sq();
        if scale == 0.0 {
            return true;
        }
        let cross = self.row(0).dot(self.row(1));
        let imbalance = self.row(0).norm_sq() - self.row(1).norm_sq();
        cross.abs() <= tol * scale && imbalance.abs() <= tol * scale
    }
}
