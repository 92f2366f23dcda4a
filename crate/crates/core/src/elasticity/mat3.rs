//! 3x3 matrices and rotations.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// `e_i (x) e_j`, zero-based.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Mat3::ZERO;
        m.0[i][j] = 1.0;
        m
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 9 {
            return Err(Error::Dimension { expected: 9, got: v.len() });
        }
        let mut m = Mat3::ZERO;
        for (k, x) in v.iter().enumerate() {
            m.0[k / 3][k % 3] = *x;
        }
        Ok(m)
    }

    pub fn flat(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (k, x) in out.iter_mut().enumerate() {
            *x = self.0[k / 3][k % 3];
        }
        out
    }

    pub fn det(&self) -> f64 {
        det3(self)
    }

    pub fn cof(&self) -> Mat3 {
        cof3(self)
    }

    pub fn transpose(&self) -> Mat3 {
        let a = &self.0;
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| a[j][i])))
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Frobenius norm squared.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3(self.0.map(|r| r.map(|x| s * x)))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let (a, b) = (&self.0, &o.0);
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j])
        }))
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        write!(
            f,
            "[[{}, {}, {}], [{}, {}, {}], [{}, {}, {}]]",
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]
        )
    }
}

/// Cofactor expansion along the first row.
pub fn det3(m: &Mat3) -> f64 {
    let a = &m.0;
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Matrix of signed 2x2 minors, so that `A cof(A)^T = det(A) 1`.
pub fn cof3(m: &Mat3) -> Mat3 {
    let a = &m.0;
    Mat3(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            // cyclic index choice absorbs the checkerboard sign
            a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]
        })
    }))
}

/// `max |R^T R - 1|` entrywise.
pub fn orthogonality_residual(m: &Mat3) -> f64 {
    (m.transpose() * *m - Mat3::IDENTITY).max_abs()
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const TOL: f64 = 1e-12;

    /// Accepts `m` when `R^T R = 1` and `det R = 1` within [`Rotation::TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        let res = orthogonality_residual(&m);
        let det = m.det();
        if res > Self::TOL || (det - 1.0).abs() > Self::TOL {
            return Err(Error::Domain(format!(
                "not a rotation: orthogonality residual {res:e}, det {det}"
            )));
        }
        Ok(Rotation(m))
    }

    /// Rotation of the unit quaternion `q / |q|`.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain("quaternion must be nonzero and finite".into()));
        }
        let [w, x, y, z] = q.map(|c| c / n);
        Rotation::new(Mat3([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]))
    }

    pub fn identity() -> Self {
        Rotation(Mat3::IDENTITY)
    }

    /// One Haar-distributed rotation: a normalized standard Gaussian
    /// quaternion is uniform on `S^3`, which double covers SO(3).
    pub fn random(rng: &mut impl Rng) -> Self {
        loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(r) = Rotation::from_quaternion(q) {
                return r;
            }
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn apply(&self, a: &Mat3) -> Mat3 {
        self.0 * *a
    }
}

/// `count` Haar-distributed rotations from `seed`.
pub fn haar_sample(seed: u64, count: usize) -> Result<Vec<Rotation>> {
    if count == 0 {
        return Err(Error::Precondition("count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| Rotation::random(&mut rng)).collect())
}

/// `Q1 diag(s) Q2` with Haar `Q1, Q2` and `ln s_i` uniform on
/// `[-spread, spread]`: det-positive with condition number at most
/// `exp(2 spread)`.
pub fn random_det_positive(rng: &mut impl Rng, spread: f64) -> Mat3 {
    let q1 = Rotation::random(rng);
    let q2 = Rotation::random(rng);
    let s: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-spread..=spread).exp());
    *q1.matrix() * Mat3::diag(s[0], s[1], s[2]) * *q2.matrix()
}
