//! Corner-satellite control laws, thrust saturation and propellant use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Pid,
    Smc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 2] = [ControllerKind::Pid, ControllerKind::Smc];

    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::Pid => "pid",
            ControllerKind::Smc => "smc",
        }
    }
}

/// Which algebraic form of the sliding-mode law to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmcForm {
    /// `m q'' - m q''_tar - m lambda e' - K tanh((e' + lambda e) / sigma)`
    Printed,
    /// `m q''_tar + m lambda e' - K tanh(-(e' + lambda e) / sigma)`, obtained
    /// by imposing `s' = 0` on `s = -(e' + lambda e)`.
    Rederived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub lambda: f64,
    pub k_switch: f64,
    pub sigma: f64,
    pub smc_form: SmcForm,
    /// Thrust norm limit per satellite (N).
    pub thrust_limit: f64,
    /// Specific impulse (s).
    pub isp: f64,
    pub g0: f64,
    /// Satellite mass below which the episode stops as fuel-exhausted (kg).
    pub dry_mass: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self {
            kp: 1e-2,
            ki: 1e-4,
            kd: 1e-3,
            lambda: 1e-2,
            k_switch: 3e-2,
            sigma: 1e-2,
            smc_form: SmcForm::Rederived,
            thrust_limit: 20.0,
            isp: 250.0,
            g0: 9.80665,
            dry_mass: 250.0,
        }
    }
}

impl ControlGains {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("control.kp", self.kp),
            ("control.ki", self.ki),
            ("control.kd", self.kd),
            ("control.lambda", self.lambda),
            ("control.k_switch", self.k_switch),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("gain must be non-negative, got {v}")));
            }
        }
        crate::dynamics::positive("control.sigma", self.sigma)?;
        crate::dynamics::positive("control.thrust_limit", self.thrust_limit)?;
        crate::dynamics::positive("control.isp", self.isp)?;
        crate::dynamics::positive("control.g0", self.g0)?;
        if !(self.dry_mass.is_finite() && self.dry_mass >= 0.0) {
            return Err(Error::config("control.dry_mass", "must be non-negative"));
        }
        Ok(())
    }

    /// Effective exhaust velocity `Isp * g0` (m/s).
    pub fn exhaust_velocity(&self) -> f64 {
        self.isp * self.g0
    }
}

pub fn pid_force(e: &Vec3, e_dot: &Vec3, integral: &Vec3, gains: &ControlGains) -> Vec3 {
    e * gains.kp + integral * gains.ki + e_dot * gains.kd
}

pub fn smc_force(e: &Vec3, e_dot: &Vec3, q_ddot: &Vec3, q_tar_ddot: &Vec3, m: f64, gains: &ControlGains) -> Vec3 {
    let s = (e_dot + e * gains.lambda) / gains.sigma;
    let sw = s.map(f64::tanh) * gains.k_switch;
    match gains.smc_form {
        SmcForm::Printed => q_ddot * m - q_tar_ddot * m - e_dot * (m * gains.lambda) - sw,
        SmcForm::Rederived => q_tar_ddot * m + e_dot * (m * gains.lambda) + sw,
    }
}

/// Direction-preserving clamp of the force norm.
pub fn saturate(force: &Vec3, limit: f64) -> Vec3 {
    let n = force.norm();
    if n <= limit {
        return *force;
    }
    let clamped = force * (limit / n);
    // rounding can leave the norm an ulp above the limit
    if clamped.norm() > limit {
        clamped * (1.0 - f64::EPSILON)
    } else {
        clamped
    }
}

/// Per-corner controller memory and propellant bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerControllerState {
    pub integral: Vec3,
    pub initial_mass: f64,
    pub mass: f64,
    /// Running `sum |F| dt` (N s).
    pub impulse: f64,
}

impl CornerControllerState {
    pub fn new(initial_mass: f64) -> Self {
        Self {
            integral: Vec3::zeros(),
            initial_mass,
            mass: initial_mass,
            impulse: 0.0,
        }
    }

    pub fn fuel_used(&self) -> f64 {
        self.initial_mass - self.mass
    }
}

/// What the corner controller sees for one satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerInput {
    pub pos: Vec3,
    pub vel: Vec3,
    /// Acceleration estimate from the last substep's net force.
    pub acc: Vec3,
    pub target_pos: Vec3,
    pub target_vel: Vec3,
    pub target_acc: Vec3,
}

/// Saturated thrust command for one satellite. The PID integral advances by
/// `e dt` only when the unsaturated output stays inside the limit.
pub fn corner_command(
    kind: ControllerKind,
    gains: &ControlGains,
    state: &mut CornerControllerState,
    input: &CornerInput,
    dt: f64,
) -> Vec3 {
    let e = input.target_pos - input.pos;
    let e_dot = input.target_vel - input.vel;
    let raw = match kind {
        ControllerKind::Pid => {
            let candidate = state.integral + e * dt;
            let f = pid_force(&e, &e_dot, &candidate, gains);
            if f.norm() <= gains.thrust_limit {
                state.integral = candidate;
                f
            } else {
                pid_force(&e, &e_dot, &state.integral, gains)
            }
        }
        ControllerKind::Smc => smc_force(&e, &e_dot, &input.acc, &input.target_acc, state.mass, gains),
    };
    saturate(&raw, gains.thrust_limit)
}

/// Charges `|F| dt` of impulse against the satellite's propellant. Returns
/// `true` when the satellite has dropped below the dry-mass floor.
pub fn update_satellite_mass(state: &mut CornerControllerState, force_norm: f64, dt: f64, gains: &ControlGains) -> bool {
    state.impulse += force_norm * dt;
    state.mass = state.initial_mass - state.impulse / gains.exhaust_velocity();
    state.mass < gains.dry_mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn printed() -> ControlGains {
        ControlGains {
            smc_form: SmcForm::Printed,
            ..Default::default()
        }
    }

    #[test]
    fn pid_terms() {
        let g = ControlGains::default();
        let z = Vec3::zeros();
        assert_eq!(pid_force(&z, &z, &z, &g), z);
        assert_relative_eq!(pid_force(&Vec3::x(), &z, &z, &g), Vec3::new(0.01, 0.0, 0.0));
        assert_relative_eq!(pid_force(&z, &Vec3::x(), &z, &g), Vec3::new(0.001, 0.0, 0.0));
    }

    #[test]
    fn smc_at_equilibrium_is_zero() {
        let z = Vec3::zeros();
        for g in [printed(), ControlGains::default()] {
            assert_eq!(smc_force(&z, &z, &z, &z, 350.0, &g), z);
        }
    }

    #[test]
    fn smc_printed_worked_example() {
        let g = ControlGains {
            lambda: 1e-2,
            k_switch: 1e-2,
            sigma: 1e-2,
            ..printed()
        };
        let z = Vec3::zeros();
        let f = smc_force(&Vec3::x(), &z, &z, &z, 350.0, &g);
        assert_relative_eq!(f.x, -7.616e-3, epsilon = 1e-6);
        assert_relative_eq!(f.x, -0.01 * 1f64.tanh(), epsilon = 1e-15);
        assert_eq!((f.y, f.z), (0.0, 0.0));
    }

    #[test]
    fn smc_switching_term_saturates_at_k() {
        // with lambda = 0 only the switching term remains
        let z = Vec3::zeros();
        let e_dot = Vec3::new(1e3, 0.0, 0.0);
        for form in [SmcForm::Printed, SmcForm::Rederived] {
            let g = ControlGains {
                lambda: 0.0,
                smc_form: form,
                ..Default::default()
            };
            let f = smc_force(&z, &e_dot, &z, &z, 350.0, &g);
            assert_relative_eq!(f.x.abs(), 3e-2, epsilon = 1e-12);
        }
    }

    #[test]
    fn saturation_cases() {
        let f = Vec3::new(3.0, 4.0, 0.0);
        assert_eq!(saturate(&f, 20.0), f);
        assert_eq!(saturate(&Vec3::new(30.0, 0.0, 0.0), 20.0), Vec3::new(20.0, 0.0, 0.0));
        assert_relative_eq!(saturate(&Vec3::new(30.0, 40.0, 0.0), 20.0), Vec3::new(12.0, 16.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn fuel_for_constant_thrust() {
        let g = ControlGains::default();
        let mut s = CornerControllerState::new(350.0);
        for _ in 0..5000 {
            update_satellite_mass(&mut s, 20.0, 0.02, &g);
        }
        assert_relative_eq!(s.fuel_used(), 2000.0 / (250.0 * 9.80665), epsilon = 1e-9);
        assert!((s.fuel_used() - 0.8158).abs() < 1e-4);
    }

    #[test]
    fn zero_thrust_keeps_mass() {
        let g = ControlGains::default();
        let mut s = CornerControllerState::new(350.0);
        for _ in 0..100 {
            assert!(!update_satellite_mass(&mut s, 0.0, 0.02, &g));
        }
        assert_eq!(s.mass, 350.0);
    }

    #[test]
    fn dry_floor_flags_exhaustion() {
        let g = ControlGains::default();
        let mut s = CornerControllerState::new(251.0);
        let impulse_to_floor = 1.0 * g.exhaust_velocity();
        assert!(!update_satellite_mass(&mut s, impulse_to_floor * 0.99, 1.0, &g));
        assert!(update_satellite_mass(&mut s, impulse_to_floor * 0.02, 1.0, &g));
    }

    #[test]
    fn anti_windup_freezes_the_integral() {
        let g = ControlGains {
            kp: 10.0,
            ..Default::default()
        };
        let mut s = CornerControllerState::new(350.0);
        let input = CornerInput {
            pos: Vec3::zeros(),
            vel: Vec3::zeros(),
            acc: Vec3::zeros(),
            target_pos: Vec3::new(100.0, 0.0, 0.0),
            target_vel: Vec3::zeros(),
            target_acc: Vec3::zeros(),
        };
        let f = corner_command(ControllerKind::Pid, &g, &mut s, &input, 0.02);
        assert_relative_eq!(f.norm(), 20.0, epsilon = 1e-12);
        assert_eq!(s.integral, Vec3::zeros());

        let small = CornerInput {
            target_pos: Vec3::new(1.0, 0.0, 0.0),
            ..input
        };
        corner_command(ControllerKind::Pid, &g, &mut s, &small, 0.02);
        assert_relative_eq!(s.integral, Vec3::new(0.02, 0.0, 0.0), epsilon = 1e-15);
    }
}
