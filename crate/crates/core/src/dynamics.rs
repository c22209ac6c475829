//! Simulation state and time integration.
//!
//! Net nodes are point masses advanced with semi-implicit (symplectic)
//! Euler. The debris is a single rigid body whose orientation is a unit
//! quaternion renormalised after every update.

use nalgebra::{Matrix3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::contact::{self, BoxPrimitive, CompositeShape, ContactParams, SpatialHash};
use crate::error::{Error, Result};
use crate::net_models::{self, ElasticParams, NetModelKind, NetTopology};
use crate::Vec3;

/// Any coordinate beyond this distance from the frame origin is treated as
/// a numerical blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Geometry and mass layout of the net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub rows: usize,
    pub cols: usize,
    /// Edge length of the fully stretched net along the column direction (m).
    pub side_length: f64,
    pub node_mass: f64,
    pub corner_mass: f64,
    /// Net centroid relative to the debris centre at t = 0 (m).
    pub offset: [f64; 3],
    pub initial_velocity: [f64; 3],
    /// Initial plane normal, fixed in the Hill frame.
    pub normal: [f64; 3],
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 10,
            side_length: 4.0,
            node_mass: 0.1,
            corner_mass: 350.0,
            offset: [5.0, 0.0, 0.0],
            initial_velocity: [0.0; 3],
            normal: [1.0, 0.0, 0.0],
        }
    }
}

impl NetConfig {
    pub fn spacing(&self) -> f64 {
        self.side_length / (self.cols.max(2) - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::config("net.rows/net.cols", "grid must be at least 2x2"));
        }
        positive("net.side_length", self.side_length)?;
        positive("net.node_mass", self.node_mass)?;
        positive("net.corner_mass", self.corner_mass)?;
        if self.corner_mass < self.node_mass {
            return Err(Error::config(
                "net.corner_mass",
                "corner mass must not be below the node mass",
            ));
        }
        finite3("net.offset", self.offset)?;
        finite3("net.initial_velocity", self.initial_velocity)?;
        if !(Vec3::from(self.normal).norm() > 0.0) {
            return Err(Error::config("net.normal", "must be a non-zero vector"));
        }
        Ok(())
    }
}

/// Rigid debris body description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DebrisConfig {
    pub mass: f64,
    pub initial_velocity: [f64; 3],
    pub initial_angular_velocity: [f64; 3],
    pub boxes: Vec<BoxPrimitive>,
}

impl Default for DebrisConfig {
    fn default() -> Self {
        Self {
            mass: 7821.0,
            initial_velocity: [0.0; 3],
            initial_angular_velocity: [0.0; 3],
            boxes: CompositeShape::envisat_like().primitives,
        }
    }
}

impl DebrisConfig {
    pub fn validate(&self) -> Result<()> {
        positive("debris.mass", self.mass)?;
        finite3("debris.initial_velocity", self.initial_velocity)?;
        finite3("debris.initial_angular_velocity", self.initial_angular_velocity)?;
        CompositeShape::new(self.boxes.clone())?;
        Ok(())
    }
}

pub(crate) fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive, got {value}")))
    }
}

pub(crate) fn finite3(field: &str, v: [f64; 3]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::config(field, "components must be finite"))
    }
}

/// Point-mass net laid out on a `rows x cols` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NetState {
    pub pos: Vec<Vec3>,
    pub vel: Vec<Vec3>,
    pub mass: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    /// Grid corners in perimeter order: (0,0), (0,last), (last,last), (last,0).
    pub corners: [usize; 4],
    pub rest_spacing: f64,
}

impl NetState {
    /// Flat grid centred on `center`, lying in the plane with normal `normal`.
    pub fn flat_grid(
        rows: usize,
        cols: usize,
        spacing: f64,
        center: Vec3,
        normal: Vec3,
        node_mass: f64,
        corner_mass: f64,
    ) -> Self {
        let (u, v) = plane_basis(normal);
        let mut pos = Vec::with_capacity(rows * cols);
        let mut mass = Vec::with_capacity(rows * cols);
        let cu = (cols - 1) as f64 / 2.0;
        let cv = (rows - 1) as f64 / 2.0;
        for r in 0..rows {
            for c in 0..cols {
                pos.push(center + u * ((c as f64 - cu) * spacing) + v * ((r as f64 - cv) * spacing));
                mass.push(node_mass);
            }
        }
        let corners = [0, cols - 1, rows * cols - 1, (rows - 1) * cols];
        for &k in &corners {
            mass[k] = corner_mass;
        }
        Self {
            vel: vec![Vec3::zeros(); pos.len()],
            pos,
            mass,
            rows,
            cols,
            corners,
            rest_spacing: spacing,
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Stretched extents (width along columns, height along rows).
    pub fn stretched_extents(&self) -> (f64, f64) {
        (
            (self.cols - 1) as f64 * self.rest_spacing,
            (self.rows - 1) as f64 * self.rest_spacing,
        )
    }

    pub fn stretched_area(&self) -> f64 {
        let (w, h) = self.stretched_extents();
        w * h
    }

    pub fn corner_positions(&self) -> [Vec3; 4] {
        self.corners.map(|k| self.pos[k])
    }

    pub fn corner_velocities(&self) -> [Vec3; 4] {
        self.corners.map(|k| self.vel[k])
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn momentum(&self) -> Vec3 {
        self.vel
            .iter()
            .zip(&self.mass)
            .fold(Vec3::zeros(), |acc, (v, m)| acc + v * *m)
    }

    /// Mass-weighted barycentre velocity.
    pub fn barycenter_velocity(&self) -> Vec3 {
        self.momentum() / self.total_mass()
    }

    pub fn is_corner(&self, k: usize) -> bool {
        self.corners.contains(&k)
    }
}

/// Orthonormal in-plane axes `(u, v)` with `u x v = normal`.
pub fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let n = normal.normalize();
    let seed = [Vec3::y(), Vec3::z(), Vec3::x()]
        .into_iter()
        .find(|e| e.cross(&n).norm() > 1e-6)
        .unwrap_or_else(Vec3::y);
    let u = (seed - n * seed.dot(&n)).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Rigid debris body.
#[derive(Debug, Clone, PartialEq)]
pub struct DebrisState {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
    pub lin_vel: Vec3,
    pub ang_vel: Vec3,
    pub mass: f64,
    pub inertia_body: Matrix3<f64>,
    inertia_body_inv: Matrix3<f64>,
    pub geometry: CompositeShape,
}

impl DebrisState {
    pub fn new(mass: f64, inertia_body: Matrix3<f64>, geometry: CompositeShape) -> Result<Self> {
        let inertia_body_inv = inertia_body
            .try_inverse()
            .ok_or_else(|| Error::config("debris.inertia", "inertia tensor is singular"))?;
        Ok(Self {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
            lin_vel: Vec3::zeros(),
            ang_vel: Vec3::zeros(),
            mass,
            inertia_body,
            inertia_body_inv,
            geometry,
        })
    }

    pub fn momentum(&self) -> Vec3 {
        self.lin_vel * self.mass
    }
}

/// Inertia of a uniform-density box composite about the body origin.
pub fn composite_inertia(shape: &CompositeShape, mass: f64) -> Matrix3<f64> {
    let volumes: Vec<f64> = shape
        .primitives
        .iter()
        .map(|b| 8.0 * b.half_extents[0] * b.half_extents[1] * b.half_extents[2])
        .collect();
    let total: f64 = volumes.iter().sum();
    let mut inertia = Matrix3::zeros();
    for (b, vol) in shape.primitives.iter().zip(volumes) {
        let m = mass * vol / total;
        let [hx, hy, hz] = b.half_extents.map(|h| 2.0 * h);
        let local = Matrix3::from_diagonal(&Vec3::new(
            m / 12.0 * (hy * hy + hz * hz),
            m / 12.0 * (hx * hx + hz * hz),
            m / 12.0 * (hx * hx + hy * hy),
        ));
        let r = b.rotation().to_rotation_matrix();
        let d = Vec3::from(b.offset);
        inertia += r.matrix() * local * r.matrix().transpose()
            + (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * m;
    }
    inertia
}

/// Per-step force accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceBuffer {
    pub node: Vec<Vec3>,
    pub debris_force: Vec3,
    pub debris_torque: Vec3,
}

impl ForceBuffer {
    pub fn new(nodes: usize) -> Self {
        Self {
            node: vec![Vec3::zeros(); nodes],
            debris_force: Vec3::zeros(),
            debris_torque: Vec3::zeros(),
        }
    }

    pub fn zero(&mut self) {
        self.node.iter_mut().for_each(|f| *f = Vec3::zeros());
        self.debris_force = Vec3::zeros();
        self.debris_torque = Vec3::zeros();
    }

    pub fn total(&self) -> Vec3 {
        self.node.iter().sum::<Vec3>() + self.debris_force
    }
}

/// Build the initial net and debris from a validated configuration.
///
/// The debris sits at the Hill-frame origin; the net is a flat stretched grid
/// centred at `net.offset` with zero velocity relative to the debris.
pub fn init_scene(net_cfg: &NetConfig, debris_cfg: &DebrisConfig) -> Result<(NetState, DebrisState)> {
    net_cfg.validate()?;
    debris_cfg.validate()?;
    let geometry = CompositeShape::new(debris_cfg.boxes.clone())?;
    let inertia = composite_inertia(&geometry, debris_cfg.mass);
    let mut debris = DebrisState::new(debris_cfg.mass, inertia, geometry)?;
    debris.lin_vel = Vec3::from(debris_cfg.initial_velocity);
    debris.ang_vel = Vec3::from(debris_cfg.initial_angular_velocity);

    let mut net = NetState::flat_grid(
        net_cfg.rows,
        net_cfg.cols,
        net_cfg.spacing(),
        debris.position + Vec3::from(net_cfg.offset),
        Vec3::from(net_cfg.normal),
        net_cfg.node_mass,
        net_cfg.corner_mass,
    );
    let v0 = debris.lin_vel + Vec3::from(net_cfg.initial_velocity);
    net.vel.iter_mut().for_each(|v| *v = v0);
    Ok((net, debris))
}

/// Semi-implicit Euler on every node: `v += F/m dt`, then `x += v dt`.
pub fn integrate_nodes(net: &mut NetState, force: &[Vec3], dt: f64) {
    for ((x, v), (f, m)) in net
        .pos
        .iter_mut()
        .zip(net.vel.iter_mut())
        .zip(force.iter().zip(&net.mass))
    {
        *v += f * (dt / m);
        *x += *v * dt;
    }
}

/// Semi-implicit rigid-body update. Angular velocity follows Euler's
/// equation in the body frame; the quaternion is renormalised afterwards.
pub fn integrate_debris(debris: &mut DebrisState, force: Vec3, torque: Vec3, dt: f64) {
    debris.lin_vel += force * (dt / debris.mass);
    debris.position += debris.lin_vel * dt;

    let rot = debris.orientation;
    let w_body = rot.inverse_transform_vector(&debris.ang_vel);
    let tau_body = rot.inverse_transform_vector(&torque);
    let gyro = w_body.cross(&(debris.inertia_body * w_body));
    let w_body = w_body + debris.inertia_body_inv * (tau_body - gyro) * dt;
    debris.ang_vel = rot.transform_vector(&w_body);

    let delta = UnitQuaternion::from_scaled_axis(debris.ang_vel * dt);
    debris.orientation = UnitQuaternion::new_normalize((delta * rot).into_inner());
}

/// Fails when any coordinate is non-finite or farther than [`DIVERGENCE_LIMIT`].
pub fn check_divergence(net: &NetState, debris: &DebrisState, step: u64) -> Result<()> {
    let bad = |v: &Vec3| !v.iter().all(|c| c.is_finite()) || v.amax() > DIVERGENCE_LIMIT;
    if net.pos.iter().chain(&net.vel).any(bad)
        || bad(&debris.position)
        || bad(&debris.lin_vel)
        || bad(&debris.ang_vel)
    {
        return Err(Error::Diverged { step });
    }
    Ok(())
}

/// External forces held constant over one control step (zero-order hold).
#[derive(Debug, Clone)]
pub struct HeldForces {
    pub node: Vec<Vec3>,
    pub debris: Vec3,
}

impl HeldForces {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            node: vec![Vec3::zeros(); nodes],
            debris: Vec3::zeros(),
        }
    }
}

/// What one physics substep observed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubstepReport {
    pub contact_count: usize,
    pub max_internal_force: f64,
    pub degenerate_triangles: usize,
}

/// Inner physics loop: internal, contact and held external forces.
#[derive(Debug, Clone)]
pub struct Physics {
    pub topology: NetTopology,
    pub model: NetModelKind,
    pub elastic: ElasticParams,
    pub contact: ContactParams,
    /// Total force on every node during the most recent substep.
    pub forces: ForceBuffer,
    internal: Vec<Vec3>,
    substep_start: Vec<Vec3>,
    hash: SpatialHash,
}

impl Physics {
    pub fn new(
        net: &NetState,
        model: NetModelKind,
        elastic: ElasticParams,
        contact: ContactParams,
    ) -> Result<Self> {
        let topology = NetTopology::build(net)?;
        Ok(Self {
            topology,
            model,
            elastic,
            contact,
            forces: ForceBuffer::new(net.len()),
            internal: vec![Vec3::zeros(); net.len()],
            substep_start: vec![Vec3::zeros(); net.len()],
            hash: SpatialHash::new(2.0 * contact.node_radius),
        })
    }

    /// Advance nodes and debris by one substep of length `dt`.
    pub fn substep(
        &mut self,
        net: &mut NetState,
        debris: &mut DebrisState,
        held: &HeldForces,
        dt: f64,
    ) -> SubstepReport {
        self.forces.zero();
        self.internal.iter_mut().for_each(|f| *f = Vec3::zeros());

        let diag = net_models::internal_forces(
            net,
            &self.topology,
            self.model,
            &self.elastic,
            &mut self.internal,
        );
        let contact_count = contact::net_debris_contact(net, debris, &self.contact, &mut self.forces);
        if self.contact.self_contact_enabled {
            contact::self_contact(net, &self.contact, &mut self.hash, &mut self.forces.node);
        }

        for (k, f) in self.forces.node.iter_mut().enumerate() {
            *f += self.internal[k] + held.node[k];
        }
        self.forces.debris_force += held.debris;

        let projecting = self.model == NetModelKind::InextensibleEdges;
        if projecting {
            self.substep_start.copy_from_slice(&net.pos);
        }
        integrate_nodes(net, &self.forces.node, dt);

        let mut max_internal = self
            .internal
            .iter()
            .map(|f| f.norm())
            .fold(0.0_f64, f64::max);
        if projecting {
            let tension = net_models::project_inextensible(
                net,
                &self.topology,
                self.elastic.constraint_iterations,
            );
            // velocities follow the corrected positions over the substep
            for k in 0..net.len() {
                let moved = net.pos[k] - self.substep_start[k];
                net.vel[k] = moved / dt;
            }
            max_internal = max_internal.max(tension / (dt * dt));
        }
        integrate_debris(debris, self.forces.debris_force, self.forces.debris_torque, dt);

        SubstepReport {
            contact_count,
            max_internal_force: max_internal,
            degenerate_triangles: diag.degenerate_triangles,
        }
    }

    /// Per-node internal force magnitudes from the most recent substep.
    pub fn internal_forces(&self) -> &[Vec3] {
        &self.internal
    }
}
