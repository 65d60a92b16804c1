use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{PhysicalConstants, Vector3};
use crate::error::{invalid, Result};

/// Secular hyperfine components A^x, A^y, A^z of one nucleus in the NV
/// frame, rad/μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineCoupling {
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
}

impl HyperfineCoupling {
    pub fn perp(&self) -> f64 {
        self.a_x.hypot(self.a_y)
    }
}

/// Orthonormal NV frame (x̂, ŷ, ẑ) for the given symmetry axis.
///
/// x̂ is the normalized projection of (1, −1, 0) onto the plane normal to the
/// axis; (1, 0, 0) and then (0, 1, 0) are used if that projection vanishes.
pub fn nv_frame(axis: &Vector3) -> [Vector3; 3] {
    let z = axis.normalize();
    let candidates = [
        Vector3::new(1.0, -1.0, 0.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
    ];
    let x = candidates
        .iter()
        .map(|c| c - z * z.dot(c))
        .find(|p| p.norm() > 1e-8)
        .expect("some trial axis is not parallel to z")
        .normalize();
    let y = z.cross(&x);
    [x, y, z]
}

/// Full dipolar tensor prefactor·(𝟙/r³ − 3 r rᵀ/r⁵) in lattice coordinates.
pub fn dipolar_tensor(r: &Vector3, prefactor: f64) -> Result<Matrix3<f64>> {
    let d = r.norm();
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid("displacement must be a nonzero finite vector"));
    }
    let d3 = d * d * d;
    let d5 = d3 * d * d;
    Ok((Matrix3::identity() / d3 - r * r.transpose() * (3.0 / d5)) * prefactor)
}

/// A^j = prefactor·[(ẑ·ĵ)/|r|³ − 3(ẑ·r)(ĵ·r)/|r|⁵] for ĵ in the NV frame.
pub fn hyperfine_coupling(r: &Vector3, constants: &PhysicalConstants, nv_axis: &Vector3) -> Result<HyperfineCoupling> {
    let d = r.norm();
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid("displacement must be a nonzero finite vector"));
    }
    let [x, y, z] = nv_frame(nv_axis);
    let d3 = d * d * d;
    let d5 = d3 * d * d;
    let zr = z.dot(r);
    let c = constants.dipolar_prefactor;
    let comp = |j: &Vector3| c * (z.dot(j) / d3 - 3.0 * zr * j.dot(r) / d5);
    Ok(HyperfineCoupling {
        a_x: comp(&x),
        a_y: comp(&y),
        a_z: comp(&z),
    })
}
