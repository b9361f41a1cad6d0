//! Small fixed-size linear algebra for the 2x2 setting.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A point (or tangent vector) in the two-dimensional state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u1: f64,
    pub u2: f64,
}

impl State {
    pub const ZERO: State = State { u1: 0.0, u2: 0.0 };

    pub fn new(u1: f64, u2: f64) -> Self {
        State { u1, u2 }
    }

    pub fn dot(self, other: State) -> f64 {
        self.u1 * other.u1 + self.u2 * other.u2
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    /// Unit vector in the same direction; panics on the zero vector.
    pub fn normalized(self) -> State {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize zero vector");
        self / n
    }
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.u1 + o.u1, self.u2 + o.u2)
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.u1 - o.u1, self.u2 - o.u2)
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State::new(-self.u1, -self.u2)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, s: f64) -> State {
        State::new(self.u1 * s, self.u2 * s)
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, v: State) -> State {
        v * self
    }
}

impl Div<f64> for State {
    type Output = State;
    fn div(self, s: f64) -> State {
        State::new(self.u1 / s, self.u2 / s)
    }
}

impl AddAssign for State {
    fn add_assign(&mut self, o: State) {
        *self = *self + o;
    }
}

impl SubAssign for State {
    fn sub_assign(&mut self, o: State) {
        *self = *self - o;
    }
}

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    pub fn mul_vec(self, v: State) -> State {
        State::new(self.a * v.u1 + self.b * v.u2, self.c * v.u1 + self.d * v.u2)
    }

    /// Row vector times matrix: `v^T M`.
    pub fn vec_mul(self, v: State) -> State {
        State::new(self.a * v.u1 + self.c * v.u2, self.b * v.u1 + self.d * v.u2)
    }

    /// Quadratic form `v^T M w`.
    pub fn quad(self, v: State, w: State) -> f64 {
        v.dot(self.mul_vec(w))
    }

    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Solve `M x = rhs`; `None` when the matrix is singular.
    pub fn solve(self, rhs: State) -> Option<State> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(State::new(
            (rhs.u1 * self.d - rhs.u2 * self.b) / det,
            (self.a * rhs.u2 - self.c * rhs.u1) / det,
        ))
    }

    /// Smallest and largest eigenvalue of a symmetric matrix.
    pub fn sym_eigenvalues(self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let h = (0.25 * (self.a - self.d).powi(2) + self.b * self.c).max(0.0).sqrt();
        (m - h, m + h)
    }

    pub fn is_positive_definite(self) -> bool {
        self.a > 0.0 && self.det() > 0.0
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul<Mat2> for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Solve a 3x3 linear system by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot collapses.
pub fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let (head, tail) = m.split_at_mut(row);
            for (k, v) in tail[0].iter_mut().enumerate().skip(col) {
                *v -= f * head[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}
