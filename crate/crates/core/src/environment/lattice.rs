use super::{LatticeSpec, Vector3};
use crate::error::{invalid, Result};

/// The 8 carbon positions of the conventional diamond cell, in units of the
/// cell edge: FCC plus FCC shifted by (¼, ¼, ¼).
pub fn diamond_basis() -> [[f64; 3]; 8] {
    [
        [0.0, 0.0, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [0.5, 0.5, 0.0],
        [0.25, 0.25, 0.25],
        [0.25, 0.75, 0.75],
        [0.75, 0.25, 0.75],
        [0.75, 0.75, 0.25],
    ]
}

/// All diamond-lattice carbon sites with distance from the origin in
/// `(0, radius]`, sorted by distance (ties broken lexicographically).
///
/// The origin is the NV site and is never returned.
pub fn generate_lattice_sites(spec: &LatticeSpec, radius: f64) -> Result<Vec<Vector3>> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(invalid(format!("generation radius must be >= 0, got {radius}")));
    }
    if !(spec.lattice_constant.is_finite() && spec.lattice_constant > 0.0) {
        return Err(invalid("lattice constant must be positive"));
    }
    let a = spec.lattice_constant;
    let reach = (radius / a).ceil() as i64 + 1;
    // a few ulps of slack so a radius taken from a site's own norm includes it
    let r2 = radius * radius * (1.0 + 4.0 * f64::EPSILON);

    let mut sites: Vec<(f64, Vector3)> = Vec::new();
    for i in -reach..=reach {
        for j in -reach..=reach {
            for k in -reach..=reach {
                for b in diamond_basis() {
                    let p = Vector3::new((i as f64 + b[0]) * a, (j as f64 + b[1]) * a, (k as f64 + b[2]) * a);
                    let d2 = p.norm_squared();
                    if d2 > 0.0 && d2 <= r2 {
                        sites.push((d2, p));
                    }
                }
            }
        }
    }
    sites.sort_by(|(da, pa), (db, pb)| {
        da.total_cmp(db)
            .then(pa.x.total_cmp(&pb.x))
            .then(pa.y.total_cmp(&pb.y))
            .then(pa.z.total_cmp(&pb.z))
    });
    Ok(sites.into_iter().map(|(_, p)| p).collect())
}
