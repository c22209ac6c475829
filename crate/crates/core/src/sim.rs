//! Episode orchestration: guidance, control, orbital forces and physics
//! substeps wired into one outer control loop.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actuation::{self, ControlGains, ControllerKind, CornerControllerState, CornerInput};
use crate::contact::ContactParams;
use crate::dynamics::{self, DebrisConfig, DebrisState, HeldForces, NetConfig, NetState, Physics};
use crate::error::{Error, Result};
use crate::guidance::{self, Guidance, GuidanceConfig, GuidancePhase};
use crate::net_models::{ElasticParams, NetModelKind};
use crate::orbital::{self, OrbitParams};
use crate::Vec3;

/// Everything needed to run one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub controller: ControllerKind,
    pub net_model: NetModelKind,
    pub timeout_s: f64,
    pub control_step_s: f64,
    pub substeps: usize,
    pub net: NetConfig,
    pub debris: DebrisConfig,
    pub elastic: ElasticParams,
    pub contact: ContactParams,
    pub orbit: OrbitParams,
    pub guidance: GuidanceConfig,
    pub control: ControlGains,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            controller: ControllerKind::Smc,
            net_model: NetModelKind::SaintVenant,
            timeout_s: 600.0,
            control_step_s: 0.02,
            substeps: 20,
            net: NetConfig::default(),
            debris: DebrisConfig::default(),
            elastic: ElasticParams::default(),
            contact: ContactParams::default(),
            orbit: OrbitParams::default(),
            guidance: GuidanceConfig::default(),
            control: ControlGains::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        dynamics::positive("timeout_s", self.timeout_s)?;
        dynamics::positive("control_step_s", self.control_step_s)?;
        if self.substeps == 0 {
            return Err(Error::config("substeps", "must be at least 1"));
        }
        self.net.validate()?;
        self.debris.validate()?;
        self.elastic.validate()?;
        self.contact.validate()?;
        self.orbit.validate()?;
        self.guidance.validate()?;
        self.control.validate()?;
        if self.net.corner_mass <= self.control.dry_mass {
            return Err(Error::config(
                "control.dry_mass",
                "must be below the corner satellite mass",
            ));
        }
        Ok(())
    }

    pub fn substep_dt(&self) -> f64 {
        self.control_step_s / self.substeps as f64
    }

    pub fn max_steps(&self) -> u64 {
        (self.timeout_s / self.control_step_s).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Captured,
    Timeout,
    Diverged,
    FuelExhausted,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::Captured => "captured",
            Termination::Timeout => "timeout",
            Termination::Diverged => "diverged",
            Termination::FuelExhausted => "fuel_exhausted",
        }
    }
}

/// Log-spaced histogram of magnitudes: `BINS_PER_DECADE` bins per decade
/// from `10^LOG_MIN`, with explicit under- and overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHistogram {
    pub log10_min: f64,
    pub bins_per_decade: usize,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub max: f64,
}

impl LogHistogram {
    const LOG_MIN: f64 = -6.0;
    const DECADES: usize = 10;
    const BINS_PER_DECADE: usize = 4;

    pub fn new() -> Self {
        Self {
            log10_min: Self::LOG_MIN,
            bins_per_decade: Self::BINS_PER_DECADE,
            counts: vec![0; Self::DECADES * Self::BINS_PER_DECADE],
            underflow: 0,
            overflow: 0,
            max: 0.0,
        }
    }

    pub fn add(&mut self, value: f64) {
        self.max = self.max.max(value);
        if value <= 0.0 || value.log10() < self.log10_min {
            self.underflow += 1;
            return;
        }
        let idx = ((value.log10() - self.log10_min) * self.bins_per_decade as f64) as usize;
        match self.counts.get_mut(idx) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    pub fn merge(&mut self, other: &LogHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.max = self.max.max(other.max);
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

impl Default for LogHistogram {
    fn default() -> Self {
        Self::new()
    }
}

/// Magnitude distributions collected over an episode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    pub thrust_n: LogHistogram,
    pub internal_force_n: LogHistogram,
    pub node_speed_m_s: LogHistogram,
    pub node_accel_m_s2: LogHistogram,
}

impl Distributions {
    pub fn merge(&mut self, other: &Distributions) {
        self.thrust_n.merge(&other.thrust_n);
        self.internal_force_n.merge(&other.internal_force_n);
        self.node_speed_m_s.merge(&other.node_speed_m_s);
        self.node_accel_m_s2.merge(&other.node_accel_m_s2);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub captured: bool,
    pub capture_time_s: Option<f64>,
    pub fuel_total_kg: f64,
    pub fuel_per_satellite_kg: [f64; 4],
    pub contact_points_at_capture: Option<usize>,
    pub effective_area_at_first_contact_m2: Option<f64>,
    pub first_contact_time_s: Option<f64>,
    pub termination: Termination,
    pub steps: u64,
    pub max_thrust_n: f64,
    pub max_internal_force_n: f64,
    pub max_edge_strain: f64,
    pub distributions: Distributions,
}

/// One outer control step as logged.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub step: u64,
    pub time_s: f64,
    pub phase: GuidancePhase,
    pub contact_count: usize,
    pub leftover_angle: f64,
    pub projected_area: f64,
    pub area_fraction: f64,
    pub no_contact_steps: u32,
    pub capture_counter: u32,
    pub capture_condition: bool,
    pub max_corner_distance: f64,
    pub velocity_mismatch: f64,
    pub max_internal_force: f64,
    pub debris_pos: Vec3,
    pub debris_vel: Vec3,
    pub debris_quat: [f64; 4],
    pub corner_pos: [Vec3; 4],
    pub corner_vel: [Vec3; 4],
    pub thrust: [Vec3; 4],
    pub sat_mass: [f64; 4],
}

/// Per-step trajectory of an episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeRecord {
    pub rows: Vec<StepRow>,
}

impl EpisodeRecord {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = [
            "step",
            "time_s",
            "phase",
            "contact_count",
            "leftover_angle_rad",
            "projected_area_m2",
            "area_fraction",
            "no_contact_steps",
            "capture_counter",
            "capture_condition",
            "max_corner_distance_m",
            "velocity_mismatch_m_s",
            "max_internal_force_n",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for prefix in ["debris_", "debris_v"] {
            for axis in ["x", "y", "z"] {
                h.push(format!("{prefix}{axis}"));
            }
        }
        for q in ["w", "i", "j", "k"] {
            h.push(format!("debris_q{q}"));
        }
        for k in 0..4 {
            for (kind, prefix) in [("pos", ""), ("vel", "v"), ("thrust", "f")] {
                for axis in ["x", "y", "z"] {
                    h.push(format!("corner{k}_{kind}_{prefix}{axis}"));
                }
            }
        }
        for k in 0..4 {
            h.push(format!("corner{k}_mass_kg"));
        }
        h
    }

    fn row_fields(r: &StepRow) -> Vec<String> {
        let mut f = vec![
            r.step.to_string(),
            r.time_s.to_string(),
            r.phase.label().to_string(),
            r.contact_count.to_string(),
            r.leftover_angle.to_string(),
            r.projected_area.to_string(),
            r.area_fraction.to_string(),
            r.no_contact_steps.to_string(),
            r.capture_counter.to_string(),
            r.capture_condition.to_string(),
            r.max_corner_distance.to_string(),
            r.velocity_mismatch.to_string(),
            r.max_internal_force.to_string(),
        ];
        let push3 = |f: &mut Vec<String>, v: &Vec3| f.extend(v.iter().map(|c| c.to_string()));
        push3(&mut f, &r.debris_pos);
        push3(&mut f, &r.debris_vel);
        f.extend(r.debris_quat.iter().map(|c| c.to_string()));
        for k in 0..4 {
            push3(&mut f, &r.corner_pos[k]);
            push3(&mut f, &r.corner_vel[k]);
            push3(&mut f, &r.thrust[k]);
        }
        f.extend(r.sat_mass.iter().map(|m| m.to_string()));
        f
    }

    /// Writes one CSV row per outer step under [`EpisodeRecord::header`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header())?;
        for r in &self.rows {
            w.write_record(Self::row_fields(r))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Result of advancing one outer step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Running,
    Finished(Termination),
}

/// A running episode.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub net: NetState,
    pub debris: DebrisState,
    pub physics: Physics,
    pub guidance: Guidance,
    pub controllers: [CornerControllerState; 4],
    pub step: u64,
    pub time: f64,
    pub contact_count: usize,
    pub capture_counter: u32,
    pub thrust: [Vec3; 4],
    origin: Vec3,
    held: HeldForces,
    corner_acc: [Vec3; 4],
    first_contact: Option<(f64, f64)>,
    contacts_at_capture: Option<usize>,
    max_thrust: f64,
    max_internal: f64,
    max_strain: f64,
    distributions: Distributions,
    last_row: Option<StepRow>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let (net, debris) = dynamics::init_scene(&config.net, &config.debris)?;
        let physics = Physics::new(&net, config.net_model, config.elastic, config.contact)?;
        let controllers = net.corners.map(|k| CornerControllerState::new(net.mass[k]));
        let held = HeldForces::zeros(net.len());
        Ok(Self {
            origin: debris.position,
            guidance: Guidance::new(config.guidance),
            config,
            net,
            debris,
            physics,
            controllers,
            step: 0,
            time: 0.0,
            contact_count: 0,
            capture_counter: 0,
            thrust: [Vec3::zeros(); 4],
            held,
            corner_acc: [Vec3::zeros(); 4],
            first_contact: None,
            contacts_at_capture: None,
            max_thrust: 0.0,
            max_internal: 0.0,
            max_strain: 0.0,
            distributions: Distributions::default(),
            last_row: None,
        })
    }

    /// Advance one outer control step. Controller and orbital forces are held
    /// constant over the substeps that follow.
    pub fn advance(&mut self) -> StepOutcome {
        let cfg = &self.config;
        let dt = cfg.control_step_s;
        let h = cfg.substep_dt();

        // guidance and corner control from the state at step start
        let g = self
            .guidance
            .update(&self.net, &self.debris, self.contact_count, self.time, dt);
        let corners = self.net.corners;
        for k in 0..4 {
            let n = corners[k];
            let input = CornerInput {
                pos: self.net.pos[n],
                vel: self.net.vel[n],
                acc: self.corner_acc[k],
                target_pos: g.targets.pos[k],
                target_vel: g.targets.vel[k],
                target_acc: g.targets.acc[k],
            };
            self.thrust[k] = actuation::corner_command(cfg.controller, &cfg.control, &mut self.controllers[k], &input, dt);
        }

        self.held.debris = orbital::orbital_forces(
            &self.net,
            &self.debris,
            &self.origin,
            cfg.orbit.omega,
            &mut self.held.node,
        );
        for k in 0..4 {
            self.held.node[corners[k]] += self.thrust[k];
        }

        let mut step_internal: f64 = 0.0;
        for _ in 0..cfg.substeps {
            let report = self.physics.substep(&mut self.net, &mut self.debris, &self.held, h);
            self.contact_count = report.contact_count;
            step_internal = step_internal.max(report.max_internal_force);
        }
        for k in 0..4 {
            let n = corners[k];
            self.corner_acc[k] = self.physics.forces.node[n] / self.net.mass[n];
        }

        let mut exhausted = false;
        for k in 0..4 {
            let f = self.thrust[k].norm();
            self.max_thrust = self.max_thrust.max(f);
            self.distributions.thrust_n.add(f);
            exhausted |= actuation::update_satellite_mass(&mut self.controllers[k], f, dt, &cfg.control);
            self.net.mass[corners[k]] = self.controllers[k].mass;
        }
        self.max_internal = self.max_internal.max(step_internal);
        self.distributions.internal_force_n.add(step_internal);
        for n in 0..self.net.len() {
            self.distributions.node_speed_m_s.add((self.net.vel[n] - self.debris.lin_vel).norm());
            self.distributions
                .node_accel_m_s2
                .add(self.physics.forces.node[n].norm() / self.net.mass[n]);
        }
        if cfg.net_model == NetModelKind::InextensibleEdges {
            let strain = crate::net_models::max_edge_strain(&self.net, &self.physics.topology);
            self.max_strain = self.max_strain.max(strain);
        }

        self.step += 1;
        self.time = self.step as f64 * dt;

        if self.contact_count > 0 && self.first_contact.is_none() {
            let corners_now = self.net.corner_positions();
            let centroid = corners_now.iter().sum::<Vec3>() / 4.0;
            let axis = (self.debris.position - centroid).try_normalize(1e-12).unwrap_or_else(Vec3::x);
            let area = guidance::projected_area(&corners_now, &axis);
            self.first_contact = Some((self.time, area));
        }
        let condition = guidance::capture_condition(&self.net, &self.debris, self.contact_count, &cfg.guidance);
        let (captured, counter) = guidance::detect_capture(
            &self.net,
            &self.debris,
            self.contact_count,
            self.capture_counter,
            &cfg.guidance,
        );
        self.capture_counter = counter;

        let corner_pos = self.net.corner_positions();
        let q = self.debris.orientation.quaternion();
        self.last_row = Some(StepRow {
            step: self.step,
            time_s: self.time,
            phase: g.phase,
            contact_count: self.contact_count,
            leftover_angle: g.guards.leftover_angle,
            projected_area: g.guards.projected_area,
            area_fraction: g.guards.area_fraction,
            no_contact_steps: g.guards.no_contact_steps,
            capture_counter: counter,
            capture_condition: condition,
            max_corner_distance: guidance::max_corner_distance(&corner_pos),
            velocity_mismatch: (self.net.barycenter_velocity() - self.debris.lin_vel).norm(),
            max_internal_force: step_internal,
            debris_pos: self.debris.position,
            debris_vel: self.debris.lin_vel,
            debris_quat: [q.w, q.i, q.j, q.k],
            corner_pos,
            corner_vel: self.net.corner_velocities(),
            thrust: self.thrust,
            sat_mass: self.controllers.map(|c| c.mass),
        });

        if dynamics::check_divergence(&self.net, &self.debris, self.step).is_err() {
            return StepOutcome::Finished(Termination::Diverged);
        }
        if captured {
            self.contacts_at_capture = Some(self.contact_count);
            return StepOutcome::Finished(Termination::Captured);
        }
        if exhausted {
            return StepOutcome::Finished(Termination::FuelExhausted);
        }
        if self.step >= cfg.max_steps() {
            return StepOutcome::Finished(Termination::Timeout);
        }
        StepOutcome::Running
    }

    /// Row describing the most recent step, if any.
    pub fn last_row(&self) -> Option<&StepRow> {
        self.last_row.as_ref()
    }

    pub fn metrics(&self, termination: Termination) -> EpisodeMetrics {
        let fuel = self.controllers.map(|c| c.fuel_used());
        let captured = termination == Termination::Captured;
        EpisodeMetrics {
            captured,
            capture_time_s: captured.then_some(self.time),
            fuel_total_kg: fuel.iter().sum(),
            fuel_per_satellite_kg: fuel,
            contact_points_at_capture: self.contacts_at_capture,
            effective_area_at_first_contact_m2: self.first_contact.map(|(_, a)| a),
            first_contact_time_s: self.first_contact.map(|(t, _)| t),
            termination,
            steps: self.step,
            max_thrust_n: self.max_thrust,
            max_internal_force_n: self.max_internal,
            max_edge_strain: self.max_strain,
            distributions: self.distributions.clone(),
        }
    }
}

/// Runs an episode to termination. With `record` set, every outer step is
/// logged.
pub fn run_episode(config: &SimConfig, record: bool) -> Result<(EpisodeMetrics, Option<EpisodeRecord>)> {
    let mut sim = Simulation::new(config.clone())?;
    let mut rec = record.then(EpisodeRecord::default);
    loop {
        let outcome = sim.advance();
        if let (Some(rec), Some(row)) = (rec.as_mut(), sim.last_row()) {
            rec.rows.push(row.clone());
        }
        if let StepOutcome::Finished(t) = outcome {
            return Ok((sim.metrics(t), rec));
        }
    }
}
