//! Exact 2×2 matrix algebra for a single bath spin.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::dynamics::QubitPair;
use crate::environment::{NuclearSpin, Vector3};

pub type Complex2x2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn pauli() -> [Complex2x2; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// `a·σ/2`.
pub fn spin_half_operator(a: &Vector3) -> Complex2x2 {
    let [sx, sy, sz] = pauli();
    (sx * re(a.x) + sy * re(a.y) + sz * re(a.z)) * Complex64::new(0.5, 0.0)
}

/// `exp[−i t (axis·σ)/2] = cos(|a|t/2)𝟙 − i sin(|a|t/2)(â·σ)`.
pub fn su2_exponential(axis: &Vector3, t: f64) -> Complex2x2 {
    let rate = axis.norm();
    if rate == 0.0 {
        return Complex2x2::identity();
    }
    let n = axis / rate;
    let (s, c) = (0.5 * rate * t).sin_cos();
    let [sx, sy, sz] = pauli();
    let generator = sx * re(n.x) + sy * re(n.y) + sz * re(n.z);
    Complex2x2::identity() * Complex64::new(c, 0.0) - generator * Complex64::new(0.0, s)
}

/// `(𝟙 + b·σ)/2`.
pub fn density_from_bloch(b: &Vector3) -> Complex2x2 {
    let [sx, sy, sz] = pauli();
    (Complex2x2::identity() + sx * re(b.x) + sy * re(b.y) + sz * re(b.z)) * Complex64::new(0.5, 0.0)
}

pub fn bloch_from_density(rho: &Complex2x2) -> Vector3 {
    let [sx, sy, sz] = pauli();
    let c = |s: Complex2x2| (rho * s).trace().re;
    Vector3::new(c(sx), c(sy), c(sz))
}

/// Field seen by a bath spin while the qubit is in level `m`.
pub fn level_field(spin: &NuclearSpin, m: i8) -> Vector3 {
    let m = f64::from(m);
    Vector3::new(m * spin.a_x, m * spin.a_y, spin.omega + m * spin.a_z)
}

/// Propagator of one bath spin while the qubit is in level `m`.
pub fn conditional_propagator(spin: &NuclearSpin, m: i8, t: f64) -> Complex2x2 {
    su2_exponential(&level_field(spin, m), t)
}

pub fn initial_density(spin: &NuclearSpin) -> Complex2x2 {
    density_from_bloch(&Vector3::new(0.0, 0.0, spin.polarization))
}

/// `U_m ρ U_m†`.
pub fn conditional_density(spin: &NuclearSpin, m: i8, t: f64) -> Complex2x2 {
    let u = conditional_propagator(spin, m, t);
    u * initial_density(spin) * u.adjoint()
}

/// `Tr(U_m ρ U_{m'}†)` by explicit matrix products.
pub fn gamma_oracle(spin: &NuclearSpin, pair: QubitPair, t: f64) -> Complex64 {
    let u = conditional_propagator(spin, pair.m(), t);
    let v = conditional_propagator(spin, pair.m_prime(), t);
    (u * initial_density(spin) * v.adjoint()).trace()
}

/// Eigen-decomposition of a 2×2 Hermitian matrix by the quadratic formula.
/// Eigenvalues are returned in descending order with orthonormal vectors.
pub fn hermitian_eigen_2x2(m: &Complex2x2) -> ([f64; 2], [Vector2<Complex64>; 2]) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let h = 0.5 * (a - d);
    let r = h.hypot(b.norm());
    let mean = 0.5 * (a + d);
    let hi = mean + r;
    let det = a * d - b.norm_sqr();
    // the smaller root from the product avoids cancellation when mean ≈ r
    let lo = if mean > 0.0 && hi != 0.0 { det / hi } else { mean - r };

    let v = if r == 0.0 {
        Vector2::new(ONE, ZERO)
    } else if h >= 0.0 {
        Vector2::new(Complex64::new(h + r, 0.0), b.conj())
    } else {
        Vector2::new(b, Complex64::new(r - h, 0.0))
    };
    let v = v / Complex64::new(v.norm(), 0.0);
    let w = Vector2::new(-v[1].conj(), v[0].conj());
    ([hi, lo], [v, w])
}

/// Principal square root of a positive semidefinite 2×2 matrix.
pub fn sqrt_psd_2x2(m: &Complex2x2) -> Complex2x2 {
    let (vals, vecs) = hermitian_eigen_2x2(m);
    vals.iter().zip(&vecs).fold(Complex2x2::zeros(), |acc, (&l, v)| {
        acc + v * v.adjoint() * Complex64::new(l.max(0.0).sqrt(), 0.0)
    })
}

/// Squared Uhlmann fidelity `(Tr√(√ρ σ √ρ))² = ‖√ρ √σ‖₁²`.
///
/// Square roots come from the analytic eigen-decomposition. The trace norm
/// of the 2×2 product M is taken as `√(‖M‖_F² + 2|det M|)`, with det M from
/// the eigenvalues so that nearly pure states do not lose precision.
pub fn uhlmann_fidelity(rho: &Complex2x2, sigma: &Complex2x2) -> f64 {
    let (lr, _) = hermitian_eigen_2x2(rho);
    let (ls, _) = hermitian_eigen_2x2(sigma);
    let m = sqrt_psd_2x2(rho) * sqrt_psd_2x2(sigma);
    let det = (lr[0].max(0.0) * lr[1].max(0.0) * ls[0].max(0.0) * ls[1].max(0.0)).sqrt();
    (m.norm_squared() + 2.0 * det).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn exponential_limits() {
        let axis = Vector3::new(0.3, -0.4, 1.2);
        assert_eq!(su2_exponential(&axis, 0.0), Complex2x2::identity());
        let w = 0.7;
        let u = su2_exponential(&Vector3::new(0.0, 0.0, w), 2.0 * PI / w);
        assert!((u + Complex2x2::identity()).norm() < 1e-14);
    }

    #[test]
    fn exponential_is_unitary() {
        for (k, t) in [0.1, 2.0, 33.3, 280.0].iter().enumerate() {
            let axis = Vector3::new(0.3 * k as f64, -0.4, 1.2 - 0.5 * k as f64);
            let u = su2_exponential(&axis, *t);
            assert!((u * u.adjoint() - Complex2x2::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn exponential_matches_series() {
        // compare against a truncated Taylor series of exp(−iHt) for a short time
        let axis = Vector3::new(0.6, 0.2, -0.9);
        let t = 0.3;
        let h = spin_half_operator(&axis) * Complex64::new(0.0, -t);
        let mut term = Complex2x2::identity();
        let mut sum = Complex2x2::identity();
        for k in 1..30 {
            term = term * h / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        assert!((sum - su2_exponential(&axis, t)).norm() < 1e-15);
    }

    #[test]
    fn eigen_2x2() {
        let m = Complex2x2::new(
            Complex64::new(0.7, 0.0),
            Complex64::new(0.1, -0.2),
            Complex64::new(0.1, 0.2),
            Complex64::new(0.3, 0.0),
        );
        let (vals, vecs) = hermitian_eigen_2x2(&m);
        for (l, v) in vals.iter().zip(&vecs) {
            assert!((m * v - v * Complex64::new(*l, 0.0)).norm() < 1e-15);
        }
        assert!(vecs[0].dotc(&vecs[1]).norm() < 1e-15);
        let s = sqrt_psd_2x2(&m);
        assert!((s * s - m).norm() < 1e-15);
        // diagonal input, both orderings
        let (vals, _) = hermitian_eigen_2x2(&Complex2x2::new(ONE * 0.2, ZERO, ZERO, ONE * 0.8));
        assert_relative_eq!(vals[0], 0.8);
        assert_relative_eq!(vals[1], 0.2);
    }

    #[test]
    fn bloch_round_trip() {
        let b = Vector3::new(0.1, -0.5, 0.3);
        assert_relative_eq!(bloch_from_density(&density_from_bloch(&b)), b, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_limits() {
        let rho = density_from_bloch(&Vector3::new(0.2, 0.1, -0.4));
        assert_relative_eq!(uhlmann_fidelity(&rho, &rho), 1.0, epsilon = 1e-14);
        let b = Vector3::new(0.0, 0.6, 0.8);
        assert_relative_eq!(
            uhlmann_fidelity(&density_from_bloch(&b), &density_from_bloch(&-b)),
            0.0,
            epsilon = 1e-14
        );
    }
}
