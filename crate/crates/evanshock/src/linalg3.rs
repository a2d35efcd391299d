//! Fixed-size complex vectors and matrices for the 3x3 eigenvalue systems,
//! plus a closed-form cubic root solver.

use num_complex::Complex64;

/// Complex 3-vector. Used both for column states and for row (adjoint) states;
/// `dot` is the plain bilinear pairing, no conjugation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec3(pub [Complex64; 3]);

impl CVec3 {
    pub fn zero() -> Self {
        CVec3([Complex64::ZERO; 3])
    }

    pub fn dot(&self, other: &CVec3) -> Complex64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr() + self.0[2].norm_sqr()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> CVec3 {
        CVec3([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }

    pub fn add(&self, other: &CVec3) -> CVec3 {
        CVec3([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn sub(&self, other: &CVec3) -> CVec3 {
        CVec3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn conj(&self) -> CVec3 {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    pub fn normalized(&self) -> CVec3 {
        let n = self.norm();
        self.scale(Complex64::new(1.0 / n, 0.0))
    }
}

/// Row-major complex 3x3 matrix.
#[derive(Clone, Copy, Debug)]
pub struct CMat3(pub [[Complex64; 3]; 3]);

impl CMat3 {
    pub fn zero() -> Self {
        CMat3([[Complex64::ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = Complex64::ONE;
        }
        m
    }

    pub fn mul_vec(&self, v: &CVec3) -> CVec3 {
        let mut out = [Complex64::ZERO; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2];
        }
        CVec3(out)
    }

    /// transpose(self) * v, i.e. the row system v^T A read as a column operation.
    pub fn tr_mul_vec(&self, v: &CVec3) -> CVec3 {
        let mut out = [Complex64::ZERO; 3];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.0[0][j] * v.0[0] + self.0[1][j] * v.0[1] + self.0[2][j] * v.0[2];
        }
        CVec3(out)
    }

    pub fn sub(&self, other: &CMat3) -> CMat3 {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        m
    }

    pub fn add_scaled_identity(&self, c: Complex64) -> CMat3 {
        let mut m = *self;
        for i in 0..3 {
            m.0[i][i] += c;
        }
        m
    }

    /// Rank-1 projector r * l^T / (l . r) onto span(r) along ker(l . ).
    pub fn rank1_projector(r: &CVec3, l: &CVec3) -> CMat3 {
        let denom = l.dot(r);
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = r.0[i] * l.0[j] / denom;
            }
        }
        m
    }

    /// Euclidean (spectral) operator norm via the largest eigenvalue of A^H A.
    pub fn operator_norm(&self) -> f64 {
        // Gram matrix is Hermitian positive semidefinite; its characteristic
        // polynomial has real coefficients, so the cubic solver applies.
        let mut g = [[Complex64::ZERO; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let mut s = Complex64::ZERO;
                for k in 0..3 {
                    s += self.0[k][i].conj() * self.0[k][j];
                }
                *slot = s;
            }
        }
        let tr = g[0][0] + g[1][1] + g[2][2];
        let m01 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let m02 = g[0][0] * g[2][2] - g[0][2] * g[2][0];
        let m12 = g[1][1] * g[2][2] - g[1][2] * g[2][1];
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        let roots = cubic_roots(-tr, m01 + m02 + m12, -det);
        let max = roots.iter().map(|r| r.re).fold(0.0_f64, f64::max);
        max.max(0.0).sqrt()
    }
}

/// Roots of the monic cubic z^3 + c2 z^2 + c1 z + c0 with complex coefficients.
///
/// Cardano's formula with the cube-root branch chosen to avoid cancellation,
/// followed by one Newton polish per root.
pub fn cubic_roots(c2: Complex64, c1: Complex64, c0: Complex64) -> [Complex64; 3] {
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let shift = c2 * third;
    // depressed cubic t^3 + p t + q
    let p = c1 - c2 * c2 * third;
    let q = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0;

    let scale = p.norm().sqrt().max(q.norm().cbrt());
    let roots = if scale == 0.0 {
        [-shift; 3]
    } else {
        let s = (q * q * 0.25 + p * p * p / 27.0).sqrt();
        // pick the branch of -q/2 +/- s with larger magnitude
        let cand_a = -q * 0.5 + s;
        let cand_b = -q * 0.5 - s;
        let u3 = if cand_a.norm() >= cand_b.norm() {
            cand_a
        } else {
            cand_b
        };
        let u = u3.powf(1.0 / 3.0);
        let v = if u.norm() > 0.0 {
            -p / (u * 3.0)
        } else {
            Complex64::ZERO
        };
        let omega = Complex64::new(-0.5, 0.5 * 3.0_f64.sqrt());
        let omega_bar = omega.conj();
        [
            u + v - shift,
            omega * u + omega_bar * v - shift,
            omega_bar * u + omega * v - shift,
        ]
    };

    let mut out = roots;
    for r in out.iter_mut() {
        // single Newton step; skip if the derivative is degenerate
        let f = ((*r + c2) * *r + c1) * *r + c0;
        let df = (3.0 * *r + 2.0 * c2) * *r + c1;
        if df.norm() > 1e-300 {
            let step = f / df;
            if step.norm() < 0.5 * (r.norm() + 1.0) {
                *r -= step;
            }
        }
    }
    out
}
