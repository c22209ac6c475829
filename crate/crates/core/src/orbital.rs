//! Clohessy-Wiltshire relative motion in the Hill frame.
//!
//! Axes: x radial, y along-track, z cross-track. The frame origin is the
//! debris's initial nominal circular-orbit position and does not follow the
//! debris once it moves.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DebrisState, NetState};
use crate::error::Result;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    /// Mean motion of the reference orbit (rad/s).
    pub omega: f64,
    /// Reference orbit radius (km); informational only.
    pub r0_km: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            omega: 0.0011,
            r0_km: 7171.0,
        }
    }
}

impl OrbitParams {
    pub fn validate(&self) -> Result<()> {
        crate::dynamics::positive("orbit.omega", self.omega)?;
        crate::dynamics::positive("orbit.r0_km", self.r0_km)
    }
}

/// Relative acceleration of an unforced chaser.
pub fn cw_acceleration(pos: &Vec3, vel: &Vec3, omega: f64) -> Vec3 {
    let w2 = omega * omega;
    Vec3::new(
        3.0 * w2 * pos.x + 2.0 * omega * vel.y,
        -2.0 * omega * vel.x,
        -w2 * pos.z,
    )
}

/// Orbital force `m * a_cw` on every node and on the debris, written into
/// `node_out` (overwritten) and returned for the debris.
pub fn orbital_forces(
    net: &NetState,
    debris: &DebrisState,
    origin: &Vec3,
    omega: f64,
    node_out: &mut [Vec3],
) -> Vec3 {
    for k in 0..net.len() {
        node_out[k] = cw_acceleration(&(net.pos[k] - origin), &net.vel[k], omega) * net.mass[k];
    }
    cw_acceleration(&(debris.position - origin), &debris.lin_vel, omega) * debris.mass
}

/// Exact unforced solution after time `t`.
pub fn cw_closed_form(pos: &Vec3, vel: &Vec3, omega: f64, t: f64) -> (Vec3, Vec3) {
    let w = omega;
    let (s, c) = (w * t).sin_cos();
    let (x0, y0, z0) = (pos.x, pos.y, pos.z);
    let (vx, vy, vz) = (vel.x, vel.y, vel.z);

    let x = (4.0 - 3.0 * c) * x0 + s / w * vx + 2.0 / w * (1.0 - c) * vy;
    let y = 6.0 * (s - w * t) * x0 + y0 - 2.0 / w * (1.0 - c) * vx + (4.0 * s - 3.0 * w * t) / w * vy;
    let z = c * z0 + s / w * vz;

    let dx = 3.0 * w * s * x0 + c * vx + 2.0 * s * vy;
    let dy = -6.0 * w * (1.0 - c) * x0 - 2.0 * s * vx + (4.0 * c - 3.0) * vy;
    let dz = -w * s * z0 + c * vz;

    (Vec3::new(x, y, z), Vec3::new(dx, dy, dz))
}

/// Semi-implicit Euler under CW acceleration only.
pub fn propagate(pos: &Vec3, vel: &Vec3, omega: f64, dt: f64, steps: usize) -> (Vec3, Vec3) {
    let (mut x, mut v) = (*pos, *vel);
    for _ in 0..steps {
        v += cw_acceleration(&x, &v, omega) * dt;
        x += v * dt;
    }
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const W: f64 = 0.0011;

    #[test]
    fn origin_is_equilibrium() {
        assert_eq!(cw_acceleration(&Vec3::zeros(), &Vec3::zeros(), W), Vec3::zeros());
    }

    #[test]
    fn radial_offset() {
        let a = cw_acceleration(&Vec3::new(1000.0, 0.0, 0.0), &Vec3::zeros(), W);
        assert_relative_eq!(a.x, 3.63e-3, max_relative = 1e-12);
        assert_eq!((a.y, a.z), (0.0, 0.0));
    }

    #[test]
    fn cross_track_offset() {
        let a = cw_acceleration(&Vec3::new(0.0, 0.0, 100.0), &Vec3::zeros(), W);
        assert_relative_eq!(a.z, -1.21e-4, max_relative = 1e-12);
        assert_eq!((a.x, a.y), (0.0, 0.0));
    }

    #[test]
    fn corner_satellite_force() {
        let mut net = NetState::flat_grid(2, 2, 1.0, Vec3::new(1000.0, 0.0, 0.0), Vec3::x(), 350.0, 350.0);
        net.pos[0] = Vec3::new(1000.0, 0.0, 0.0);
        let debris = DebrisState::new(
            1.0,
            nalgebra::Matrix3::identity(),
            crate::contact::CompositeShape::envisat_like(),
        )
        .unwrap();
        let mut out = vec![Vec3::zeros(); 4];
        let fd = orbital_forces(&net, &debris, &Vec3::zeros(), W, &mut out);
        assert_relative_eq!(out[0].x, 1.2705, max_relative = 1e-12);
        assert_eq!(fd, Vec3::zeros());
    }

    #[test]
    fn closed_form_identity_at_zero() {
        let p = Vec3::new(1.0, -2.0, 3.0);
        let v = Vec3::new(0.1, 0.2, -0.3);
        let (pt, vt) = cw_closed_form(&p, &v, W, 0.0);
        assert_relative_eq!(pt, p, epsilon = 1e-12);
        assert_relative_eq!(vt, v, epsilon = 1e-12);
    }

    #[test]
    fn along_track_offset_is_stationary() {
        let p = Vec3::new(0.0, 42.0, 0.0);
        for t in [10.0, 1000.0, 5000.0] {
            let (pt, vt) = cw_closed_form(&p, &Vec3::zeros(), W, t);
            assert_relative_eq!(pt, p, epsilon = 1e-12);
            assert_eq!(vt.norm(), 0.0);
        }
    }

    #[test]
    fn cross_track_is_harmonic() {
        let (z0, dz0, t) = (3.0, 0.02, 700.0);
        let (pt, _) = cw_closed_form(&Vec3::new(0.0, 0.0, z0), &Vec3::new(0.0, 0.0, dz0), W, t);
        let expect = z0 * (W * t).cos() + dz0 / W * (W * t).sin();
        assert_relative_eq!(pt.z, expect, max_relative = 1e-14);
    }

    // The closed form must satisfy the differential equation it solves.
    #[test]
    fn closed_form_satisfies_the_ode() {
        let p = Vec3::new(30.0, -10.0, 5.0);
        let v = Vec3::new(0.05, -0.02, 0.01);
        let t = 321.0;
        let h = 1e-3;
        let (_, vm) = cw_closed_form(&p, &v, W, t - h);
        let (x, vt) = cw_closed_form(&p, &v, W, t);
        let (_, vp) = cw_closed_form(&p, &v, W, t + h);
        let (xm, _) = cw_closed_form(&p, &v, W, t - h);
        let (xp, _) = cw_closed_form(&p, &v, W, t + h);
        assert_relative_eq!((xp - xm) / (2.0 * h), vt, epsilon = 1e-9);
        assert_relative_eq!((vp - vm) / (2.0 * h), cw_acceleration(&x, &vt, W), epsilon = 1e-9);
    }

    #[test]
    fn planar_motion_stays_planar() {
        let (p, _) = propagate(&Vec3::new(50.0, 20.0, 0.0), &Vec3::new(0.01, -0.03, 0.0), W, 1e-3, 100_000);
        assert!(p.z.abs() < 1e-12);
    }
}
