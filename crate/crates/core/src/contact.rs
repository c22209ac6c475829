//! Debris geometry, net/debris penalty contact and net self-contact.

use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DebrisState, ForceBuffer, NetState};
use crate::error::{Error, Result};
use crate::net_models::grid_adjacent;
use crate::Vec3;

/// Oriented box in the debris body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxPrimitive {
    pub half_extents: [f64; 3],
    #[serde(default)]
    pub offset: [f64; 3],
    /// Rotation relative to the body frame as a scaled axis (rad).
    #[serde(default)]
    pub rotation: [f64; 3],
}

impl BoxPrimitive {
    pub fn new(half_extents: [f64; 3], offset: [f64; 3]) -> Self {
        Self {
            half_extents,
            offset,
            rotation: [0.0; 3],
        }
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_scaled_axis(Vec3::from(self.rotation))
    }

    /// Signed distance and outward normal for a point in the body frame.
    pub fn signed_distance(&self, p_body: &Vec3) -> (f64, Vec3) {
        let rot = self.rotation();
        let p = rot.inverse_transform_vector(&(p_body - Vec3::from(self.offset)));
        let h = Vec3::from(self.half_extents);
        let q = p.abs() - h;
        let outside = q.map(|c| c.max(0.0));
        let out_len = outside.norm();
        let (dist, local_normal) = if out_len > 0.0 {
            let n = Vec3::new(
                outside.x * p.x.signum(),
                outside.y * p.y.signum(),
                outside.z * p.z.signum(),
            ) / out_len;
            (out_len, n)
        } else {
            // inside: nearest face; ties resolve to the lowest axis
            let mut axis = 0;
            for k in 1..3 {
                if q[k] > q[axis] {
                    axis = k;
                }
            }
            let mut n = Vec3::zeros();
            n[axis] = if p[axis] < 0.0 { -1.0 } else { 1.0 };
            (q[axis], n)
        };
        (dist, rot.transform_vector(&local_normal))
    }
}

/// Union of boxes describing the debris.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeShape {
    pub primitives: Vec<BoxPrimitive>,
}

impl CompositeShape {
    pub fn new(primitives: Vec<BoxPrimitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::config("debris.boxes", "at least one box is required"));
        }
        for (i, b) in primitives.iter().enumerate() {
            if !b.half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
                return Err(Error::config(
                    format!("debris.boxes[{i}].half_extents"),
                    "half-extents must be positive",
                ));
            }
            if !b.offset.iter().chain(&b.rotation).all(|c| c.is_finite()) {
                return Err(Error::config(format!("debris.boxes[{i}]"), "pose must be finite"));
            }
        }
        Ok(Self { primitives })
    }

    /// Scaled-down Envisat-like composite: a main bus with a thin solar
    /// panel running along one of its long edges.
    pub fn envisat_like() -> Self {
        Self {
            primitives: vec![
                BoxPrimitive::new([1.0, 0.4, 0.4], [0.0, 0.0, 0.0]),
                BoxPrimitive::new([1.4, 0.5, 0.01], [0.0, 0.9, 0.0]),
            ],
        }
    }

    /// Minimum signed distance over primitives in the body frame. Ties keep
    /// the earlier primitive.
    pub fn signed_distance_body(&self, p_body: &Vec3) -> (f64, Vec3) {
        let mut best = self.primitives[0].signed_distance(p_body);
        for b in &self.primitives[1..] {
            let cand = b.signed_distance(p_body);
            if cand.0 < best.0 {
                best = cand;
            }
        }
        best
    }

    /// Radius of a body-frame sphere enclosing every primitive.
    pub fn bounding_radius(&self) -> f64 {
        self.primitives
            .iter()
            .map(|b| Vec3::from(b.offset).norm() + Vec3::from(b.half_extents).norm())
            .fold(0.0, f64::max)
    }
}

/// Signed distance (negative inside) and outward world-frame normal.
pub fn signed_distance(
    shape: &CompositeShape,
    world_point: &Vec3,
    position: &Vec3,
    orientation: &UnitQuaternion<f64>,
) -> (f64, Vec3) {
    let p = orientation.inverse_transform_vector(&(world_point - position));
    let (d, n) = shape.signed_distance_body(&p);
    (d, orientation.transform_vector(&n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    pub penalty_stiffness: f64,
    pub penalty_damping: f64,
    pub friction_coeff: f64,
    pub node_radius: f64,
    pub self_contact_enabled: bool,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            penalty_stiffness: 1e4,
            penalty_damping: 50.0,
            friction_coeff: 0.5,
            node_radius: 0.05,
            self_contact_enabled: true,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        crate::dynamics::positive("contact.penalty_stiffness", self.penalty_stiffness)?;
        crate::dynamics::positive("contact.node_radius", self.node_radius)?;
        for (field, v) in [
            ("contact.penalty_damping", self.penalty_damping),
            ("contact.friction_coeff", self.friction_coeff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Force exchanged at a single node/debris contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForce {
    pub node: usize,
    /// Force on the node; the debris receives the negation.
    pub force: Vec3,
    pub normal: Vec3,
    pub point: Vec3,
}

impl ContactForce {
    pub fn normal_component(&self) -> f64 {
        self.force.dot(&self.normal)
    }

    pub fn tangential(&self) -> Vec3 {
        self.force - self.normal * self.normal_component()
    }
}

/// Penalty response for one node, or `None` when the node is clear.
pub fn node_contact(
    node: usize,
    pos: &Vec3,
    vel: &Vec3,
    debris: &DebrisState,
    params: &ContactParams,
) -> Option<ContactForce> {
    let (dist, normal) = signed_distance(&debris.geometry, pos, &debris.position, &debris.orientation);
    if dist >= params.node_radius {
        return None;
    }
    let depth = params.node_radius - dist;
    let point = pos - normal * dist;
    let arm = point - debris.position;
    let surface_vel = debris.lin_vel + debris.ang_vel.cross(&arm);
    let rel = vel - surface_vel;
    let approach = rel.dot(&normal);

    let fn_mag = (params.penalty_stiffness * depth - params.penalty_damping * approach).max(0.0);
    let mut force = normal * fn_mag;

    let slip = rel - normal * approach;
    let slip_speed = slip.norm();
    if slip_speed > 0.0 && params.friction_coeff > 0.0 {
        // viscous-regularised Coulomb: stick is approximated by damping
        let ft = (params.friction_coeff * fn_mag).min(params.penalty_damping * slip_speed);
        force -= slip * (ft / slip_speed);
    }
    Some(ContactForce {
        node,
        force,
        normal,
        point,
    })
}

/// Applies net/debris contact forces and returns the number of nodes in
/// contact (signed distance below the node radius).
pub fn net_debris_contact(
    net: &NetState,
    debris: &DebrisState,
    params: &ContactParams,
    out: &mut ForceBuffer,
) -> usize {
    // cheap reject against the bounding sphere
    let reach = debris.geometry.bounding_radius() + params.node_radius;
    let reach2 = reach * reach;
    let mut count = 0;
    for k in 0..net.len() {
        if (net.pos[k] - debris.position).norm_squared() > reach2 {
            continue;
        }
        if let Some(c) = node_contact(k, &net.pos[k], &net.vel[k], debris, params) {
            count += 1;
            out.node[k] += c.force;
            out.debris_force -= c.force;
            out.debris_torque += (c.point - debris.position).cross(&(-c.force));
        }
    }
    count
}

/// Uniform-grid spatial hash over node positions.
///
/// Buckets are stored as intrusive linked lists in a power-of-two table so
/// rebuilding never allocates once capacity is reached. Hash collisions only
/// add candidates, so queries return a superset of the true neighbours.
#[derive(Debug, Clone)]
pub struct SpatialHash {
    cell: f64,
    head: Vec<u32>,
    next: Vec<u32>,
    keys: Vec<[i64; 3]>,
    mask: usize,
}

const EMPTY: u32 = u32::MAX;
const HASH_PRIMES: [u64; 3] = [0x9E37_79B9_7F4A_7C15, 0xC2B2_AE3D_27D4_EB4F, 0x1656_67B1_9E37_79F9];

impl SpatialHash {
    pub fn new(cell: f64) -> Self {
        Self {
            cell,
            head: Vec::new(),
            next: Vec::new(),
            keys: Vec::new(),
            mask: 0,
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        let cell = |x: f64| {
            let q = x / self.cell;
            let t = q as i64;
            if (t as f64) > q {
                t - 1
            } else {
                t
            }
        };
        [cell(p.x), cell(p.y), cell(p.z)]
    }

    /// Additive hash, so neighbouring cells are reached by adding a constant.
    fn hash(k: [i64; 3]) -> u64 {
        (k[0] as u64)
            .wrapping_mul(HASH_PRIMES[0])
            .wrapping_add((k[1] as u64).wrapping_mul(HASH_PRIMES[1]))
            .wrapping_add((k[2] as u64).wrapping_mul(HASH_PRIMES[2]))
    }

    fn slot(&self, k: [i64; 3]) -> usize {
        (Self::hash(k) >> 7) as usize & self.mask
    }

    pub fn rebuild(&mut self, points: &[Vec3]) {
        let size = (2 * points.len()).next_power_of_two().max(16);
        self.mask = size - 1;
        self.head.clear();
        self.head.resize(size, EMPTY);
        self.next.clear();
        self.next.resize(points.len(), EMPTY);
        self.keys.clear();
        for (i, p) in points.iter().enumerate() {
            let k = self.key(p);
            self.keys.push(k);
            let s = self.slot(k);
            self.next[i] = self.head[s];
            self.head[s] = i as u32;
        }
    }

    /// Calls `f(i, j)` with `i < j` for every pair sharing or neighbouring a
    /// cell. Each pair is reported exactly once.
    pub fn for_each_candidate(&self, mut f: impl FnMut(usize, usize)) {
        // own cell plus the 13 neighbours that are lexicographically ahead;
        // the other 13 are covered from the opposite side
        let mut forward = [([0i64; 3], 0u64); 14];
        let mut n = 0;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    if (dx, dy, dz) >= (0, 0, 0) {
                        let d = [dx, dy, dz];
                        forward[n] = (d, Self::hash(d));
                        n += 1;
                    }
                }
            }
        }
        for (i, k) in self.keys.iter().enumerate() {
            let base = Self::hash(*k);
            for (d, dh) in &forward {
                let cell = [k[0] + d[0], k[1] + d[1], k[2] + d[2]];
                let own = *d == [0, 0, 0];
                let mut j = self.head[(base.wrapping_add(*dh) >> 7) as usize & self.mask];
                while j != EMPTY {
                    let ju = j as usize;
                    // slots are shared between colliding cells; only accept
                    // members of the cell being visited
                    if self.keys[ju] == cell && (!own || ju > i) {
                        f(i.min(ju), i.max(ju));
                    }
                    j = self.next[ju];
                }
            }
        }
    }

    /// Candidate pairs as a sorted list.
    pub fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        self.for_each_candidate(|i, j| pairs.push((i, j)));
        pairs.sort_unstable();
        pairs
    }
}

/// Exact list of index pairs closer than `range`, by brute force.
pub fn brute_force_pairs(points: &[Vec3], range: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() < range {
                out.push((i, j));
            }
        }
    }
    out
}

/// Sphere-sphere repulsion between non-adjacent nodes closer than two radii.
pub fn self_contact(net: &NetState, params: &ContactParams, hash: &mut SpatialHash, out: &mut [Vec3]) {
    let reach = 2.0 * params.node_radius;
    hash.cell = reach;
    hash.rebuild(&net.pos);
    hash.for_each_candidate(|i, j| {
        if grid_adjacent(net.cols, i, j) {
            return;
        }
        let d = net.pos[i] - net.pos[j];
        let dist = d.norm();
        if dist >= reach || dist == 0.0 {
            return;
        }
        let n = d / dist;
        let approach = (net.vel[i] - net.vel[j]).dot(&n);
        let mag = (params.penalty_stiffness * (reach - dist) - params.penalty_damping * approach).max(0.0);
        out[i] += n * mag;
        out[j] -= n * mag;
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{composite_inertia, DebrisState};

    fn unit_box() -> CompositeShape {
        CompositeShape::new(vec![BoxPrimitive::new([1.0, 1.0, 1.0], [0.0; 3])]).unwrap()
    }

    fn debris_with(shape: CompositeShape) -> DebrisState {
        let inertia = composite_inertia(&shape, 1000.0);
        DebrisState::new(1000.0, inertia, shape).unwrap()
    }

    #[test]
    fn point_outside_face() {
        let (d, n) = signed_distance(
            &unit_box(),
            &Vec3::new(2.0, 0.0, 0.0),
            &Vec3::zeros(),
            &UnitQuaternion::identity(),
        );
        assert!((d - 1.0).abs() < 1e-15);
        assert!((n - Vec3::x()).norm() < 1e-15);
    }

    #[test]
    fn box_centre_is_inside_by_the_smallest_half_extent() {
        let shape = CompositeShape::new(vec![BoxPrimitive::new([3.0, 0.5, 2.0], [0.0; 3])]).unwrap();
        let (d, n) = shape.signed_distance_body(&Vec3::zeros());
        assert_eq!(d, -0.5);
        assert_eq!(n.y.abs(), 1.0);
    }

    #[test]
    fn equidistant_primitives_tie_to_first() {
        // two identical boxes mirrored about the origin; the origin is 1 m
        // outside both
        let a = BoxPrimitive::new([0.5, 0.5, 0.5], [-1.5, 0.0, 0.0]);
        let b = BoxPrimitive::new([0.5, 0.5, 0.5], [1.5, 0.0, 0.0]);
        let shape = CompositeShape::new(vec![a.clone(), b.clone()]).unwrap();
        let p = Vec3::zeros();
        let (da, na) = a.signed_distance(&p);
        let (db, _) = b.signed_distance(&p);
        assert_eq!(da, db);
        let (d, n) = shape.signed_distance_body(&p);
        assert_eq!(d, da);
        assert_eq!(n, na);
        assert!(n.x > 0.0);
    }

    #[test]
    fn rotated_pose_rotates_the_normal() {
        let rot = UnitQuaternion::from_scaled_axis(Vec3::z() * std::f64::consts::FRAC_PI_2);
        let (d, n) = signed_distance(&unit_box(), &Vec3::new(0.0, 3.0, 0.0), &Vec3::zeros(), &rot);
        assert!((d - 2.0).abs() < 1e-12);
        assert!((n - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn clear_nodes_produce_nothing() {
        let debris = debris_with(unit_box());
        let net = NetState::flat_grid(3, 3, 0.5, Vec3::new(5.0, 0.0, 0.0), Vec3::x(), 0.1, 0.1);
        let mut buf = ForceBuffer::new(net.len());
        let count = net_debris_contact(&net, &debris, &ContactParams::default(), &mut buf);
        assert_eq!(count, 0);
        assert_eq!(buf.total(), Vec3::zeros());
    }

    #[test]
    fn static_penetration_gives_penalty_force() {
        let debris = debris_with(unit_box());
        let params = ContactParams {
            friction_coeff: 0.0,
            ..Default::default()
        };
        let mut net = NetState::flat_grid(2, 2, 0.5, Vec3::new(10.0, 0.0, 0.0), Vec3::x(), 0.1, 0.1);
        let depth = 0.02;
        net.pos[0] = Vec3::new(1.0 + params.node_radius - depth, 0.0, 0.0);
        let mut buf = ForceBuffer::new(net.len());
        let count = net_debris_contact(&net, &debris, &params, &mut buf);
        assert_eq!(count, 1);
        let expect = params.penalty_stiffness * depth;
        assert!((buf.node[0] - Vec3::x() * expect).norm() < 1e-9);
        assert!((buf.debris_force + Vec3::x() * expect).norm() < 1e-9);
        // contact point on the face centre, torque-free
        assert!(buf.debris_torque.norm() < 1e-9);
    }

    #[test]
    fn separating_contact_is_not_adhesive() {
        let debris = debris_with(unit_box());
        let params = ContactParams::default();
        let depth = 0.001;
        // outward speed large enough that c * v exceeds k * depth
        let speed = 2.0 * params.penalty_stiffness * depth / params.penalty_damping;
        let c = node_contact(
            0,
            &Vec3::new(1.0 + params.node_radius - depth, 0.0, 0.0),
            &Vec3::new(speed, 0.0, 0.0),
            &debris,
            &params,
        )
        .unwrap();
        assert_eq!(c.normal_component(), 0.0);
        assert_eq!(c.force, Vec3::zeros());
    }

    #[test]
    fn friction_stays_inside_the_cone() {
        let debris = debris_with(unit_box());
        let params = ContactParams::default();
        let c = node_contact(
            0,
            &Vec3::new(1.03, 0.2, 0.0),
            &Vec3::new(-0.01, 5.0, 1.0),
            &debris,
            &params,
        )
        .unwrap();
        assert!(c.tangential().norm() <= params.friction_coeff * c.normal_component() + 1e-9);
        assert!(c.tangential().dot(&Vec3::new(0.0, 5.0, 1.0)) < 0.0);
    }

    #[test]
    fn self_contact_flat_net_is_quiet() {
        let net = NetState::flat_grid(5, 5, 0.5, Vec3::zeros(), Vec3::z(), 0.1, 0.1);
        let mut out = vec![Vec3::zeros(); net.len()];
        self_contact(&net, &ContactParams::default(), &mut SpatialHash::new(0.1), &mut out);
        assert!(out.iter().all(|f| *f == Vec3::zeros()));
    }

    #[test]
    fn overlapping_non_neighbours_repel() {
        let params = ContactParams {
            penalty_damping: 0.0,
            ..Default::default()
        };
        let mut net = NetState::flat_grid(5, 5, 0.5, Vec3::zeros(), Vec3::z(), 0.1, 0.1);
        let d = 0.06;
        net.pos[0] = Vec3::new(10.0, 0.0, 0.0);
        net.pos[24] = Vec3::new(10.0 + d, 0.0, 0.0);
        let mut out = vec![Vec3::zeros(); net.len()];
        self_contact(&net, &params, &mut SpatialHash::new(0.1), &mut out);
        let mag = params.penalty_stiffness * (2.0 * params.node_radius - d);
        assert!((out[0] + Vec3::x() * mag).norm() < 1e-9);
        assert!((out[24] - Vec3::x() * mag).norm() < 1e-9);
    }

    #[test]
    fn overlapping_grid_neighbours_are_ignored() {
        let mut net = NetState::flat_grid(5, 5, 0.5, Vec3::zeros(), Vec3::z(), 0.1, 0.1);
        net.pos[1] = net.pos[0] + Vec3::new(0.01, 0.0, 0.0);
        net.pos[6] = net.pos[0] + Vec3::new(0.0, 0.01, 0.0);
        let mut out = vec![Vec3::zeros(); net.len()];
        self_contact(&net, &ContactParams::default(), &mut SpatialHash::new(0.1), &mut out);
        assert!(out.iter().all(|f| *f == Vec3::zeros()));
    }

    #[test]
    fn empty_geometry_is_rejected() {
        assert!(CompositeShape::new(vec![]).is_err());
        assert!(CompositeShape::new(vec![BoxPrimitive::new([1.0, 0.0, 1.0], [0.0; 3])]).is_err());
    }
}
