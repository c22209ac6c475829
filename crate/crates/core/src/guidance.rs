//! High-level guidance: the orienting / approaching / capture state machine,
//! its corner target generators and the capture detector.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::{plane_basis, DebrisState, NetState};
use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidancePhase {
    Orienting,
    Approaching,
    Capture,
}

impl GuidancePhase {
    pub fn label(self) -> &'static str {
        match self {
            GuidancePhase::Orienting => "orienting",
            GuidancePhase::Approaching => "approaching",
            GuidancePhase::Capture => "capture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceConfig {
    /// Maximum leftover angle to leave the orienting phase (rad).
    pub leftover_angle_threshold: f64,
    /// Required projected area as a fraction of the stretched area.
    pub area_fraction_threshold: f64,
    pub capture_corner_distance: f64,
    pub capture_velocity_tol: f64,
    pub capture_sustain_steps: u32,
    pub no_contact_retry_steps: u32,
    /// Multiplier on the centroid-to-target shift used while approaching.
    pub approach_scale: f64,
    /// Feed the differenced target acceleration forward. The targets are
    /// built from the net's own corners, so with SMC this closes a unit-gain
    /// loop on the common mode; off by default.
    pub accel_feedforward: bool,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            leftover_angle_threshold: 36f64.to_radians(),
            area_fraction_threshold: 0.8,
            capture_corner_distance: 8.0,
            capture_velocity_tol: 0.1,
            capture_sustain_steps: 200,
            no_contact_retry_steps: 100,
            approach_scale: 1.0,
            accel_feedforward: false,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        use crate::dynamics::positive;
        positive("guidance.leftover_angle_threshold", self.leftover_angle_threshold)?;
        positive("guidance.capture_corner_distance", self.capture_corner_distance)?;
        positive("guidance.capture_velocity_tol", self.capture_velocity_tol)?;
        positive("guidance.approach_scale", self.approach_scale)?;
        let f = self.area_fraction_threshold;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::config(
                "guidance.area_fraction_threshold",
                format!("must lie in (0, 1], got {f}"),
            ));
        }
        if self.capture_sustain_steps == 0 {
            return Err(Error::config("guidance.capture_sustain_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Desired corner positions with finite-differenced rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSet {
    pub pos: [Vec3; 4],
    pub vel: [Vec3; 4],
    pub acc: [Vec3; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub normal: Vec3,
    pub centroid: Vec3,
    /// Set when the corners do not span a plane and the normal fell back to
    /// the target direction.
    pub degenerate: bool,
}

fn mean4(p: &[Vec3; 4]) -> Vec3 {
    (p[0] + p[1] + p[2] + p[3]) / 4.0
}

/// Least-squares plane through the corners, normal oriented toward `target`.
pub fn fit_plane_pca(corners: &[Vec3; 4], target: &Vec3) -> PlaneFit {
    let centroid = mean4(corners);
    let mut cov = Matrix3::zeros();
    for c in corners {
        let d = c - centroid;
        cov += d * d.transpose();
    }
    cov /= 4.0;
    let to_target = target - centroid;
    let fallback = || {
        let n = if to_target.norm() > 0.0 {
            to_target.normalize()
        } else {
            Vec3::x()
        };
        PlaneFit {
            normal: n,
            centroid,
            degenerate: true,
        }
    };

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mid = eig.eigenvalues[order[1]];
    let scale = eig.eigenvalues[order[2]].max(f64::MIN_POSITIVE);
    // collinear or coincident corners leave two tiny eigenvalues
    if mid <= 1e-12 * scale || scale <= 1e-300 {
        return fallback();
    }
    let mut normal: Vec3 = eig.eigenvectors.column(order[0]).into_owned().normalize();
    if normal.dot(&to_target) < 0.0 {
        normal = -normal;
    }
    PlaneFit {
        normal,
        centroid,
        degenerate: false,
    }
}

/// Angle in [0, pi/2] between the normal line and the direction to the target.
pub fn leftover_angle(normal: &Vec3, net_centroid: &Vec3, target: &Vec3) -> f64 {
    let d = target - net_centroid;
    let cos = (normal.dot(&d) / (normal.norm() * d.norm())).abs();
    cos.min(1.0).acos()
}

/// Shoelace area of the corners projected onto the plane normal to `axis`.
pub fn projected_area(corners: &[Vec3; 4], axis: &Vec3) -> f64 {
    let (e1, e2) = plane_basis(*axis);
    let p: Vec<(f64, f64)> = corners.iter().map(|c| (c.dot(&e1), c.dot(&e2))).collect();
    let mut twice = 0.0;
    for k in 0..4 {
        let (x0, y0) = p[k];
        let (x1, y1) = p[(k + 1) % 4];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice.abs()
}

/// Unit vector from the net centroid to the target, or `fallback` when they
/// coincide.
fn approach_axis(centroid: &Vec3, target: &Vec3, fallback: &Vec3) -> Vec3 {
    let d = target - centroid;
    if d.norm() > 1e-12 {
        d.normalize()
    } else {
        *fallback
    }
}

/// Stretched square perpendicular to the approach axis, centred on the corner
/// centroid, rotated about the axis to best match the current corners.
pub fn orienting_targets(net: &NetState, target: &Vec3) -> [Vec3; 4] {
    let corners = net.corner_positions();
    let fit = fit_plane_pca(&corners, target);
    let axis = approach_axis(&fit.centroid, target, &fit.normal);
    let (e1, e2) = plane_basis(axis);
    let (w, h) = net.stretched_extents();
    let (hw, hh) = (0.5 * w, 0.5 * h);
    // perimeter order of the grid corners
    let template = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)];
    let proj: Vec<(f64, f64)> = corners
        .iter()
        .map(|c| {
            let d = c - fit.centroid;
            (d.dot(&e1), d.dot(&e2))
        })
        .collect();

    // 2D Procrustes fit for each handedness; keep the cheaper one
    let mut best: Option<(f64, [(f64, f64); 4])> = None;
    for mirror in [1.0, -1.0] {
        let tpl: Vec<(f64, f64)> = template.iter().map(|&(a, b)| (a, mirror * b)).collect();
        let (mut dot, mut cross) = (0.0, 0.0);
        for (t, p) in tpl.iter().zip(&proj) {
            dot += t.0 * p.0 + t.1 * p.1;
            cross += t.0 * p.1 - t.1 * p.0;
        }
        let (s, c) = cross.atan2(dot).sin_cos();
        let mut placed = [(0.0, 0.0); 4];
        let mut cost = 0.0;
        for k in 0..4 {
            let (a, b) = tpl[k];
            placed[k] = (c * a - s * b, s * a + c * b);
            cost += (placed[k].0 - proj[k].0).powi(2) + (placed[k].1 - proj[k].1).powi(2);
        }
        if best.is_none_or(|(bc, _)| cost < bc) {
            best = Some((cost, placed));
        }
    }
    let placed = best.expect("two candidates evaluated").1;
    placed.map(|(a, b)| fit.centroid + e1 * a + e2 * b)
}

/// Orienting targets shifted by `scale * (target - centroid)`.
pub fn approaching_targets(net: &NetState, target: &Vec3, scale: f64) -> [Vec3; 4] {
    let centroid = mean4(&net.corner_positions());
    let shift = (target - centroid) * scale;
    orienting_targets(net, target).map(|p| p + shift)
}

/// Every corner is sent to the mean corner position.
pub fn capture_targets(net: &NetState) -> [Vec3; 4] {
    [mean4(&net.corner_positions()); 4]
}

/// Largest pairwise distance between corner satellites.
pub fn max_corner_distance(corners: &[Vec3; 4]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            d = d.max((corners[i] - corners[j]).norm());
        }
    }
    d
}

/// The instantaneous capture condition.
pub fn capture_condition(net: &NetState, debris: &DebrisState, contact_count: usize, config: &GuidanceConfig) -> bool {
    contact_count > 0
        && max_corner_distance(&net.corner_positions()) <= config.capture_corner_distance
        && (net.barycenter_velocity() - debris.lin_vel).norm() <= config.capture_velocity_tol
}

/// Advances the sustain counter; captured once it reaches the configured count.
pub fn detect_capture(
    net: &NetState,
    debris: &DebrisState,
    contact_count: usize,
    counter: u32,
    config: &GuidanceConfig,
) -> (bool, u32) {
    let counter = if capture_condition(net, debris, contact_count, config) {
        counter + 1
    } else {
        0
    };
    (counter >= config.capture_sustain_steps, counter)
}

/// Quantities the transition guards were evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardValues {
    pub leftover_angle: f64,
    pub projected_area: f64,
    pub area_fraction: f64,
    pub contact_count: usize,
    pub no_contact_steps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    pub phase: GuidancePhase,
    pub targets: TargetSet,
    pub guards: GuardValues,
    pub transitioned: bool,
}

/// Mutable state of the state machine for one episode.
#[derive(Debug, Clone)]
pub struct Guidance {
    pub config: GuidanceConfig,
    pub phase: GuidancePhase,
    pub entry_time: f64,
    pub no_contact_steps: u32,
    prev: Option<([Vec3; 4], [Vec3; 4])>,
}

impl Guidance {
    pub fn new(config: GuidanceConfig) -> Self {
        Self {
            config,
            phase: GuidancePhase::Orienting,
            entry_time: 0.0,
            no_contact_steps: 0,
            prev: None,
        }
    }

    /// Next phase given the guards, without side effects beyond counters.
    fn next_phase(&mut self, guards: &GuardValues) -> GuidancePhase {
        match self.phase {
            GuidancePhase::Orienting => {
                if guards.leftover_angle <= self.config.leftover_angle_threshold
                    && guards.area_fraction >= self.config.area_fraction_threshold
                {
                    GuidancePhase::Approaching
                } else {
                    GuidancePhase::Orienting
                }
            }
            GuidancePhase::Approaching => {
                if guards.contact_count > 0 {
                    GuidancePhase::Capture
                } else {
                    GuidancePhase::Approaching
                }
            }
            GuidancePhase::Capture => {
                if guards.no_contact_steps >= self.config.no_contact_retry_steps {
                    GuidancePhase::Orienting
                } else {
                    GuidancePhase::Capture
                }
            }
        }
    }

    /// One outer-step update: evaluates the guards, switches phase and emits
    /// targets from the generator of the (possibly new) phase. Target rates
    /// are differenced over `dt`; they restart from zero on a phase change.
    pub fn update(
        &mut self,
        net: &NetState,
        debris: &DebrisState,
        contact_count: usize,
        t: f64,
        dt: f64,
    ) -> GuidanceOutput {
        let target = debris.position;
        let corners = net.corner_positions();
        let fit = fit_plane_pca(&corners, &target);
        let axis = approach_axis(&fit.centroid, &target, &fit.normal);
        let area = projected_area(&corners, &axis);

        if self.phase == GuidancePhase::Capture && contact_count == 0 {
            self.no_contact_steps += 1;
        } else {
            self.no_contact_steps = 0;
        }
        let guards = GuardValues {
            leftover_angle: leftover_angle(&fit.normal, &fit.centroid, &target),
            projected_area: area,
            area_fraction: area / net.stretched_area(),
            contact_count,
            no_contact_steps: self.no_contact_steps,
        };

        let next = self.next_phase(&guards);
        let transitioned = next != self.phase;
        if transitioned {
            self.phase = next;
            self.entry_time = t;
            self.no_contact_steps = 0;
            self.prev = None;
        }

        let pos = match self.phase {
            GuidancePhase::Orienting => orienting_targets(net, &target),
            GuidancePhase::Approaching => approaching_targets(net, &target, self.config.approach_scale),
            GuidancePhase::Capture => capture_targets(net),
        };
        let (vel, acc) = match self.prev {
            Some((p0, v0)) => {
                let vel: [Vec3; 4] = std::array::from_fn(|k| (pos[k] - p0[k]) / dt);
                let acc = if self.config.accel_feedforward {
                    std::array::from_fn(|k| (vel[k] - v0[k]) / dt)
                } else {
                    [Vec3::zeros(); 4]
                };
                (vel, acc)
            }
            None => ([Vec3::zeros(); 4], [Vec3::zeros(); 4]),
        };
        self.prev = Some((pos, vel));

        GuidanceOutput {
            phase: self.phase,
            targets: TargetSet { pos, vel, acc },
            guards,
            transitioned,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;

    fn square(center: Vec3, side: f64) -> [Vec3; 4] {
        let h = side / 2.0;
        [
            center + Vec3::new(-h, -h, 0.0),
            center + Vec3::new(h, -h, 0.0),
            center + Vec3::new(h, h, 0.0),
            center + Vec3::new(-h, h, 0.0),
        ]
    }

    #[test]
    fn plane_of_xy_square() {
        let fit = fit_plane_pca(&square(Vec3::zeros(), 2.0), &Vec3::new(0.0, 0.0, 10.0));
        assert_relative_eq!(fit.normal, Vec3::z(), epsilon = 1e-12);
        assert_relative_eq!(fit.centroid, Vec3::zeros(), epsilon = 1e-15);
        assert!(!fit.degenerate);
    }

    #[test]
    fn plane_fit_is_translation_invariant() {
        let shift = Vec3::new(5.0, 5.0, 5.0);
        let fit = fit_plane_pca(&square(shift, 2.0), &(shift + Vec3::z()));
        assert_relative_eq!(fit.normal, Vec3::z(), epsilon = 1e-12);
        assert_relative_eq!(fit.centroid, shift, epsilon = 1e-12);
    }

    #[test]
    fn plane_fit_rotates_with_the_square() {
        let rot = UnitQuaternion::from_scaled_axis(Vec3::new(0.3, -0.7, 0.2));
        let pts = square(Vec3::zeros(), 3.0).map(|p| rot * p);
        let fit = fit_plane_pca(&pts, &(rot * Vec3::z() * 4.0));
        assert_relative_eq!(fit.normal, rot * Vec3::z(), epsilon = 1e-10);
    }

    #[test]
    fn collinear_corners_fall_back_to_target_direction() {
        let pts = [0.0, 1.0, 2.0, 3.0].map(|x| Vec3::new(x, 0.0, 0.0));
        let fit = fit_plane_pca(&pts, &Vec3::new(1.5, 0.0, 7.0));
        assert!(fit.degenerate);
        assert_relative_eq!(fit.normal, Vec3::z(), epsilon = 1e-12);
    }

    #[test]
    fn leftover_angle_folds_the_line() {
        let c = Vec3::zeros();
        assert_eq!(leftover_angle(&Vec3::z(), &c, &Vec3::new(0.0, 0.0, 3.0)), 0.0);
        assert_relative_eq!(
            leftover_angle(&Vec3::z(), &c, &Vec3::x()),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-15
        );
        let a = 120f64.to_radians();
        let n = Vec3::new(a.sin(), 0.0, a.cos());
        assert_relative_eq!(
            leftover_angle(&n, &c, &Vec3::z()),
            std::f64::consts::FRAC_PI_3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn projected_area_cases() {
        let sq = square(Vec3::zeros(), 1.0);
        assert_relative_eq!(projected_area(&sq, &Vec3::z()), 1.0, epsilon = 1e-14);
        assert_relative_eq!(projected_area(&sq, &Vec3::x()), 0.0, epsilon = 1e-14);
        let tilt = UnitQuaternion::from_scaled_axis(Vec3::x() * 60f64.to_radians());
        let tilted = sq.map(|p| tilt * p);
        assert_relative_eq!(projected_area(&tilted, &Vec3::z()), 0.5, epsilon = 1e-12);
    }

    fn facing_net(center: Vec3) -> NetState {
        NetState::flat_grid(10, 10, 4.0 / 9.0, center, Vec3::x(), 0.1, 350.0)
    }

    #[test]
    fn orienting_fixed_point() {
        let net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        let targets = orienting_targets(&net, &Vec3::zeros());
        for (t, c) in targets.iter().zip(net.corner_positions()) {
            assert!((t - c).norm() <= 1e-6);
        }
    }

    #[test]
    fn orienting_targets_form_a_facing_square() {
        let mut net = facing_net(Vec3::new(3.0, 4.0, 0.0));
        // crumple a little so the targets differ from the corners
        for (k, p) in net.pos.iter_mut().enumerate() {
            *p += Vec3::new(0.3 * (k as f64).sin(), 0.2 * (k as f64).cos(), 0.0);
        }
        let target = Vec3::zeros();
        let t = orienting_targets(&net, &target);
        let side = 4.0;
        for k in 0..4 {
            assert_relative_eq!((t[k] - t[(k + 1) % 4]).norm(), side, epsilon = 1e-9);
        }
        assert_relative_eq!((t[0] - t[2]).norm(), side * 2f64.sqrt(), epsilon = 1e-9);
        let fit = fit_plane_pca(&t, &target);
        assert!(leftover_angle(&fit.normal, &fit.centroid, &target) < 1e-6);
    }

    #[test]
    fn approaching_shift_is_the_full_vector() {
        let net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        let o = orienting_targets(&net, &Vec3::zeros());
        let a = approaching_targets(&net, &Vec3::zeros(), 1.0);
        for k in 0..4 {
            assert_relative_eq!(a[k] - o[k], Vec3::new(-5.0, 0.0, 0.0), epsilon = 1e-12);
        }
        let same = approaching_targets(&net, &Vec3::new(5.0, 0.0, 0.0), 1.0);
        let o2 = orienting_targets(&net, &Vec3::new(5.0, 0.0, 0.0));
        assert_eq!(same, o2);
    }

    #[test]
    fn capture_targets_are_the_mean() {
        let mut net = facing_net(Vec3::zeros());
        let c = net.corners;
        net.pos[c[0]] = Vec3::new(1.0, 1.0, 0.0);
        net.pos[c[1]] = Vec3::new(-1.0, 1.0, 0.0);
        net.pos[c[2]] = Vec3::new(-1.0, -1.0, 0.0);
        net.pos[c[3]] = Vec3::new(1.0, -1.0, 0.0);
        assert_eq!(capture_targets(&net), [Vec3::zeros(); 4]);
    }

    fn debris() -> DebrisState {
        DebrisState::new(
            7821.0,
            Matrix3::identity() * 1e4,
            crate::contact::CompositeShape::envisat_like(),
        )
        .unwrap()
    }

    #[test]
    fn capture_counter_needs_continuity() {
        let cfg = GuidanceConfig::default();
        let net = facing_net(Vec3::new(3.0, 0.0, 0.0));
        let d = debris();
        let mut counter = 0;
        for _ in 0..199 {
            let (captured, c) = detect_capture(&net, &d, 5, counter, &cfg);
            assert!(!captured);
            counter = c;
        }
        let (captured, counter) = detect_capture(&net, &d, 0, counter, &cfg);
        assert!(!captured);
        assert_eq!(counter, 0);
        let mut counter = counter;
        let mut captured = false;
        for _ in 0..200 {
            (captured, counter) = detect_capture(&net, &d, 1, counter, &cfg);
        }
        assert!(captured);
    }

    #[test]
    fn spread_corners_block_capture() {
        let cfg = GuidanceConfig::default();
        // 9 m between adjacent corners
        let net = NetState::flat_grid(10, 10, 1.0, Vec3::zeros(), Vec3::x(), 0.1, 350.0);
        assert!(!capture_condition(&net, &debris(), 4, &cfg));
    }

    #[test]
    fn velocity_mismatch_blocks_capture() {
        let cfg = GuidanceConfig::default();
        let mut net = facing_net(Vec3::new(3.0, 0.0, 0.0));
        net.vel.iter_mut().for_each(|v| *v = Vec3::new(0.11, 0.0, 0.0));
        assert!(!capture_condition(&net, &debris(), 4, &cfg));
        net.vel.iter_mut().for_each(|v| *v = Vec3::new(0.09, 0.0, 0.0));
        assert!(capture_condition(&net, &debris(), 4, &cfg));
    }

    #[test]
    fn orienting_to_approaching_when_aligned_and_open() {
        let mut g = Guidance::new(GuidanceConfig::default());
        let net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        let out = g.update(&net, &debris(), 0, 0.0, 0.02);
        assert!(out.transitioned);
        assert_eq!(out.phase, GuidancePhase::Approaching);
    }

    #[test]
    fn misaligned_net_keeps_orienting() {
        let mut g = Guidance::new(GuidanceConfig::default());
        // plane normal x, target along y: leftover angle 90 degrees
        let net = facing_net(Vec3::new(0.0, 5.0, 0.0));
        let out = g.update(&net, &debris(), 0, 0.0, 0.02);
        assert_eq!(out.phase, GuidancePhase::Orienting);
        assert!(out.guards.leftover_angle > 1.5);
    }

    #[test]
    fn contact_starts_capture_and_loss_retries() {
        let cfg = GuidanceConfig::default();
        let mut g = Guidance::new(cfg);
        g.phase = GuidancePhase::Approaching;
        let net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        let d = debris();
        let out = g.update(&net, &d, 3, 0.0, 0.02);
        assert_eq!(out.phase, GuidancePhase::Capture);
        for k in 0..cfg.no_contact_retry_steps - 1 {
            let out = g.update(&net, &d, 0, 0.02 * k as f64, 0.02);
            assert_eq!(out.phase, GuidancePhase::Capture);
        }
        let out = g.update(&net, &d, 0, 10.0, 0.02);
        assert_eq!(out.phase, GuidancePhase::Orienting);
        assert!(out.transitioned);
    }

    #[test]
    fn target_rates_are_differenced() {
        let mut g = Guidance::new(GuidanceConfig {
            accel_feedforward: true,
            ..Default::default()
        });
        g.phase = GuidancePhase::Capture;
        let d = debris();
        let mut net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        let first = g.update(&net, &d, 1, 0.0, 0.5);
        assert_eq!(first.targets.vel, [Vec3::zeros(); 4]);
        net.pos.iter_mut().for_each(|p| *p += Vec3::new(0.0, 1.0, 0.0));
        let second = g.update(&net, &d, 1, 0.5, 0.5);
        assert_relative_eq!(second.targets.vel[0], Vec3::new(0.0, 2.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(second.targets.acc[0], Vec3::new(0.0, 4.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn acceleration_feedforward_off_by_default() {
        let mut g = Guidance::new(GuidanceConfig::default());
        g.phase = GuidancePhase::Capture;
        let d = debris();
        let mut net = facing_net(Vec3::new(5.0, 0.0, 0.0));
        g.update(&net, &d, 1, 0.0, 0.5);
        net.pos.iter_mut().for_each(|p| *p += Vec3::new(0.0, 1.0, 0.0));
        let out = g.update(&net, &d, 1, 0.5, 0.5);
        assert_relative_eq!(out.targets.vel[0], Vec3::new(0.0, 2.0, 0.0), epsilon = 1e-12);
        assert_eq!(out.targets.acc, [Vec3::zeros(); 4]);
    }
}
