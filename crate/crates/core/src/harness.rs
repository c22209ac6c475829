//! Batch experiments: start-point sampling, parallel episode execution,
//! aggregation and plotting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actuation::ControllerKind;
use crate::error::{Error, Result};
use crate::net_models::NetModelKind;
use crate::sim::{self, Distributions, EpisodeMetrics, SimConfig};
use crate::Vec3;

/// One controller / net-model pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Combination {
    pub controller: ControllerKind,
    pub net_model: NetModelKind,
}

impl Combination {
    pub fn all() -> Vec<Combination> {
        ControllerKind::ALL
            .iter()
            .flat_map(|&controller| {
                NetModelKind::ALL.iter().map(move |&net_model| Combination {
                    controller,
                    net_model,
                })
            })
            .collect()
    }

    pub fn label(&self) -> String {
        format!("{}+{}", self.controller.label(), self.net_model.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSpec {
    pub samples: usize,
    pub radius: f64,
    pub seed: u64,
    pub combinations: Vec<Combination>,
    /// Worker threads; `None` uses the pool default.
    pub workers: Option<usize>,
    /// Sample inside the ball rather than on the sphere surface.
    pub volume: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            samples: 200,
            radius: 5.0,
            seed: 2024,
            combinations: Combination::all(),
            workers: None,
            volume: false,
            out_dir: None,
        }
    }
}

impl BatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("batch.samples", "must be at least 1"));
        }
        crate::dynamics::positive("batch.radius", self.radius)?;
        if self.combinations.is_empty() {
            return Err(Error::config("batch.combinations", "must list at least one combination"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("batch.workers", "must be at least 1"));
        }
        Ok(())
    }
}

fn unit_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// `n` points uniformly distributed on the sphere surface of `radius`.
pub fn sample_sphere_uniform(n: usize, radius: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| unit_direction(&mut rng) * radius).collect()
}

/// `n` points uniformly distributed inside the ball of `radius`.
pub fn sample_ball_uniform(n: usize, radius: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let d = unit_direction(&mut rng);
            let u: f64 = rng.random();
            d * (radius * u.cbrt())
        })
        .collect()
}

pub fn sample_starts(spec: &BatchSpec) -> Vec<Vec3> {
    if spec.volume {
        sample_ball_uniform(spec.samples, spec.radius, spec.seed)
    } else {
        sample_sphere_uniform(spec.samples, spec.radius, spec.seed)
    }
}

/// One line of `episodes.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub combination: String,
    pub start_x: f64,
    pub start_y: f64,
    pub start_z: f64,
    pub captured: bool,
    pub capture_time_s: Option<f64>,
    pub fuel_kg: f64,
    pub contacts: Option<usize>,
    pub effective_area_m2: Option<f64>,
    pub termination_reason: String,
}

impl EpisodeRow {
    pub fn start(&self) -> Vec3 {
        Vec3::new(self.start_x, self.start_y, self.start_z)
    }
}

/// Full output of a batch, in combination-major, start-minor order.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub rows: Vec<EpisodeRow>,
    pub metrics: Vec<Option<EpisodeMetrics>>,
}

impl BatchResult {
    /// Distributions merged per combination label.
    pub fn distributions(&self) -> BTreeMap<String, Distributions> {
        let mut out: BTreeMap<String, Distributions> = BTreeMap::new();
        for (row, m) in self.rows.iter().zip(&self.metrics) {
            if let Some(m) = m {
                out.entry(row.combination.clone())
                    .or_default()
                    .merge(&m.distributions);
            }
        }
        out
    }

    pub fn max_thrust(&self) -> f64 {
        self.metrics
            .iter()
            .flatten()
            .map(|m| m.max_thrust_n)
            .fold(0.0, f64::max)
    }
}

fn episode_config(base: &SimConfig, combo: Combination, start: Vec3) -> SimConfig {
    let mut cfg = base.clone();
    cfg.controller = combo.controller;
    cfg.net_model = combo.net_model;
    cfg.net.offset = start.into();
    cfg
}

fn run_one(base: &SimConfig, combo: Combination, start: Vec3) -> (EpisodeRow, Option<EpisodeMetrics>) {
    let cfg = episode_config(base, combo, start);
    let mut row = EpisodeRow {
        combination: combo.label(),
        start_x: start.x,
        start_y: start.y,
        start_z: start.z,
        captured: false,
        capture_time_s: None,
        fuel_kg: 0.0,
        contacts: None,
        effective_area_m2: None,
        termination_reason: String::new(),
    };
    match sim::run_episode(&cfg, false) {
        Ok((m, _)) => {
            assert!(
                m.max_thrust_n <= cfg.control.thrust_limit,
                "thrust {} exceeded the limit",
                m.max_thrust_n
            );
            row.captured = m.captured;
            row.capture_time_s = m.capture_time_s;
            row.fuel_kg = m.fuel_total_kg;
            row.contacts = m.contact_points_at_capture;
            row.effective_area_m2 = m.effective_area_at_first_contact_m2;
            row.termination_reason = m.termination.label().to_string();
            (row, Some(m))
        }
        Err(e) => {
            row.termination_reason = format!("error: {e}");
            (row, None)
        }
    }
}

/// Runs every combination on the shared start set. Results are gathered by
/// index, so they do not depend on the worker count or scheduling.
pub fn run_batch(base: &SimConfig, spec: &BatchSpec) -> Result<BatchResult> {
    spec.validate()?;
    base.validate()?;
    let starts = sample_starts(spec);
    let jobs: Vec<(Combination, Vec3)> = spec
        .combinations
        .iter()
        .flat_map(|&c| starts.iter().map(move |&p| (c, p)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = spec.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("batch.workers", e.to_string()))?;
    let results: Vec<(EpisodeRow, Option<EpisodeMetrics>)> =
        pool.install(|| jobs.par_iter().map(|&(c, p)| run_one(base, c, p)).collect());
    let (rows, metrics) = results.into_iter().unzip();
    Ok(BatchResult { rows, metrics })
}

/// Order statistics of a sample; absent when the sample is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Stats {
            n: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationSummary {
    pub combination: String,
    pub episodes: usize,
    pub captured: usize,
    pub capture_percentage: f64,
    /// Over captured episodes.
    pub capture_time_s: Option<Stats>,
    /// Over all episodes.
    pub fuel_kg: Option<Stats>,
    /// Over captured episodes.
    pub contacts: Option<Stats>,
    /// Over episodes that touched the debris.
    pub effective_area_m2: Option<Stats>,
    pub terminations: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub combinations: Vec<CombinationSummary>,
}

impl BatchSummary {
    pub fn get(&self, label: &str) -> Option<&CombinationSummary> {
        self.combinations.iter().find(|c| c.combination == label)
    }
}

/// Aggregates rows per combination, in order of first appearance.
pub fn summarize(rows: &[EpisodeRow]) -> BatchSummary {
    let mut order: Vec<String> = Vec::new();
    for r in rows {
        if !order.contains(&r.combination) {
            order.push(r.combination.clone());
        }
    }
    let combinations = order
        .into_iter()
        .map(|label| {
            let group: Vec<&EpisodeRow> = rows.iter().filter(|r| r.combination == label).collect();
            let captured: Vec<&&EpisodeRow> = group.iter().filter(|r| r.captured).collect();
            let mut terminations = BTreeMap::new();
            for r in &group {
                *terminations.entry(r.termination_reason.clone()).or_insert(0) += 1;
            }
            let times: Vec<f64> = captured.iter().filter_map(|r| r.capture_time_s).collect();
            let contacts: Vec<f64> = captured.iter().filter_map(|r| r.contacts.map(|c| c as f64)).collect();
            let fuel: Vec<f64> = group.iter().map(|r| r.fuel_kg).collect();
            let area: Vec<f64> = group.iter().filter_map(|r| r.effective_area_m2).collect();
            CombinationSummary {
                episodes: group.len(),
                captured: captured.len(),
                capture_percentage: 100.0 * captured.len() as f64 / group.len() as f64,
                capture_time_s: Stats::from_values(&times),
                fuel_kg: Stats::from_values(&fuel),
                contacts: Stats::from_values(&contacts),
                effective_area_m2: Stats::from_values(&area),
                terminations,
                combination: label,
            }
        })
        .collect();
    BatchSummary { combinations }
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[EpisodeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_rows_csv<R: std::io::Read>(input: R) -> Result<Vec<EpisodeRow>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<EpisodeRow>, _>>()?;
    Ok(rows)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<EpisodeRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows_csv(std::io::BufReader::new(file))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `episodes.csv`, `summary.json` and `distributions.json` into `dir`.
pub fn write_batch_outputs(dir: &Path, result: &BatchResult) -> Result<BatchSummary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut csv_bytes = Vec::new();
    write_rows_csv(&result.rows, &mut csv_bytes)?;
    write_file(&dir.join("episodes.csv"), &csv_bytes)?;
    let summary = summarize(&result.rows);
    write_file(&dir.join("summary.json"), &serde_json::to_vec_pretty(&summary)?)?;
    write_file(
        &dir.join("distributions.json"),
        &serde_json::to_vec_pretty(&result.distributions())?,
    )?;
    Ok(summary)
}

/// Writes `summary.json` and the scatter plots for already stored rows.
pub fn write_report(dir: &Path, rows: &[EpisodeRow], svg: bool) -> Result<BatchSummary> {
    let summary = summarize(rows);
    write_file(&dir.join("summary.json"), &serde_json::to_vec_pretty(&summary)?)?;
    if svg && !rows.is_empty() {
        for metric in [ColorMetric::CaptureTime, ColorMetric::Fuel] {
            let doc = emit_scatter_svg(rows, &ScatterOptions::for_metric(metric));
            write_file(&dir.join(format!("scatter_{}.svg", metric.name())), doc.as_bytes())?;
        }
    }
    Ok(summary)
}

/// Plane onto which start positions are projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Xy,
    Xz,
    Yz,
}

impl Projection {
    fn apply(self, p: &Vec3) -> (f64, f64) {
        match self {
            Projection::Xy => (p.x, p.y),
            Projection::Xz => (p.x, p.z),
            Projection::Yz => (p.y, p.z),
        }
    }

    fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            Projection::Xy => ("x", "y"),
            Projection::Xz => ("x", "z"),
            Projection::Yz => ("y", "z"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMetric {
    CaptureTime,
    Fuel,
}

impl ColorMetric {
    pub fn name(self) -> &'static str {
        match self {
            ColorMetric::CaptureTime => "capture_time",
            ColorMetric::Fuel => "fuel",
        }
    }

    fn value(self, r: &EpisodeRow) -> Option<f64> {
        match self {
            ColorMetric::CaptureTime => r.capture_time_s,
            ColorMetric::Fuel => r.captured.then_some(r.fuel_kg),
        }
    }

    fn unit(self) -> &'static str {
        match self {
            ColorMetric::CaptureTime => "s",
            ColorMetric::Fuel => "kg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeMetric {
    EffectiveArea,
    Contacts,
}

impl SizeMetric {
    fn value(self, r: &EpisodeRow) -> Option<f64> {
        match self {
            SizeMetric::EffectiveArea => r.effective_area_m2,
            SizeMetric::Contacts => r.contacts.map(|c| c as f64),
        }
    }

    fn name(self) -> &'static str {
        match self {
            SizeMetric::EffectiveArea => "effective area",
            SizeMetric::Contacts => "contact points",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterOptions {
    pub projection: Projection,
    pub color: ColorMetric,
    pub size: SizeMetric,
    pub min_radius: f64,
    pub max_radius: f64,
}

impl ScatterOptions {
    /// Capture time is paired with effective area and fuel with contact
    /// points, as in the usual figures.
    pub fn for_metric(color: ColorMetric) -> Self {
        Self {
            projection: Projection::Xy,
            color,
            size: match color {
                ColorMetric::CaptureTime => SizeMetric::EffectiveArea,
                ColorMetric::Fuel => SizeMetric::Contacts,
            },
            min_radius: 1.5,
            max_radius: 9.0,
        }
    }

    /// Marker radius: proportional to the value, scaled so the largest value
    /// maps to `max_radius`, clamped below by `min_radius`.
    pub fn radius(&self, value: Option<f64>, largest: f64) -> f64 {
        match value {
            Some(v) if largest > 0.0 && v > 0.0 => (self.max_radius * v / largest).clamp(self.min_radius, self.max_radius),
            _ => self.min_radius,
        }
    }
}

fn ramp(t: f64) -> String {
    // dark blue to yellow
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Scatter of start positions, one panel per combination. Marker colour
/// encodes `opts.color`, marker radius `opts.size`; episodes that did not
/// capture are drawn as grey rings.
pub fn emit_scatter_svg(rows: &[EpisodeRow], opts: &ScatterOptions) -> String {
    let mut combos: Vec<&str> = Vec::new();
    for r in rows {
        if !combos.contains(&r.combination.as_str()) {
            combos.push(&r.combination);
        }
    }
    let extent = rows
        .iter()
        .map(|r| {
            let (a, b) = opts.projection.apply(&r.start());
            a.abs().max(b.abs())
        })
        .fold(0.0_f64, f64::max)
        .max(1e-9)
        * 1.1;
    let colors: Vec<f64> = rows.iter().filter_map(|r| opts.color.value(r)).collect();
    let (cmin, cmax) = colors
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let largest = rows
        .iter()
        .filter_map(|r| opts.size.value(r))
        .fold(0.0_f64, f64::max);

    let panel = 260.0;
    let margin = 40.0;
    let cols = combos.len().clamp(1, 3);
    let prow = combos.len().div_ceil(3).max(1);
    let width = cols as f64 * (panel + margin) + margin;
    let legend_h = 70.0;
    let height = prow as f64 * (panel + margin + 20.0) + margin + legend_h;
    let (ax, ay) = opts.projection.axis_names();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, combo) in combos.iter().enumerate() {
        let x0 = margin + (i % 3) as f64 * (panel + margin);
        let y0 = margin + (i / 3) as f64 * (panel + margin + 20.0);
        let map = |a: f64, b: f64| {
            (
                x0 + (a + extent) / (2.0 * extent) * panel,
                y0 + (extent - b) / (2.0 * extent) * panel,
            )
        };
        let _ = writeln!(s, r#"<g class="panel">"#);
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{y0}" width="{panel}" height="{panel}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-weight="bold">{}</text>"#,
            x0 + panel / 2.0,
            y0 - 8.0,
            escape(combo)
        );
        // axis ticks at -extent, 0, +extent
        for t in [-1.0, 0.0, 1.0] {
            let v = t * extent / 1.1;
            let (tx, _) = map(v, 0.0);
            let (_, ty) = map(0.0, v);
            let _ = writeln!(
                s,
                r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
                y0 + panel + 14.0
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, x0 - 4.0, ty + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{ax} (m)</text>"#,
            x0 + panel / 2.0,
            y0 + panel + 28.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{ay} (m)</text>"#,
            x0 - 28.0,
            y0 + panel / 2.0,
            x0 - 28.0,
            y0 + panel / 2.0
        );
        for r in rows.iter().filter(|r| r.combination == *combo) {
            let (a, b) = opts.projection.apply(&r.start());
            let (cx, cy) = map(a, b);
            let rad = opts.radius(opts.size.value(r), largest);
            match opts.color.value(r) {
                Some(v) => {
                    let t = if cmax > cmin { (v - cmin) / (cmax - cmin) } else { 0.5 };
                    let _ = writeln!(
                        s,
                        r#"<circle class="marker" cx="{cx:.3}" cy="{cy:.3}" r="{rad:.4}" fill="{}" fill-opacity="0.8"/>"#,
                        ramp(t)
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r##"<circle class="marker" cx="{cx:.3}" cy="{cy:.3}" r="{rad:.4}" fill="none" stroke="#999"/>"##
                    );
                }
            }
        }
        let _ = writeln!(s, "</g>");
    }

    // legend: colour bar and marker sizes
    let ly = height - legend_h + 10.0;
    let _ = writeln!(s, r#"<g class="legend">"#);
    let _ = writeln!(s, r#"<defs><linearGradient id="ramp">"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let _ = writeln!(s, r#"<stop offset="{t}" stop-color="{}"/>"#, ramp(t));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        r#"<rect x="{margin}" y="{ly}" width="200" height="12" fill="url(#ramp)"/>"#
    );
    let (lo, hi) = if colors.is_empty() { (0.0, 0.0) } else { (cmin, cmax) };
    let unit = opts.color.unit();
    let _ = writeln!(
        s,
        r#"<text x="{margin}" y="{:.1}">{lo:.3} {unit}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{hi:.3} {unit}</text>"#,
        ly + 26.0,
        margin + 200.0,
        ly + 26.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">colour: {}; size: {} (max {largest:.3}); grey ring: not captured</text>"#,
        margin + 220.0,
        ly + 10.0,
        opts.color.name().replace('_', " "),
        opts.size.name()
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(combo: &str, captured: bool) -> EpisodeRow {
        EpisodeRow {
            combination: combo.into(),
            start_x: 1.0,
            start_y: 2.0,
            start_z: 3.0,
            captured,
            capture_time_s: captured.then_some(100.0),
            fuel_kg: 0.5,
            contacts: captured.then_some(4),
            effective_area_m2: Some(9.0),
            termination_reason: if captured { "captured" } else { "timeout" }.into(),
        }
    }

    #[test]
    fn samples_lie_on_the_sphere() {
        for p in sample_sphere_uniform(1000, 5.0, 3) {
            assert!((p.norm() - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(sample_sphere_uniform(50, 5.0, 11), sample_sphere_uniform(50, 5.0, 11));
        assert_ne!(sample_sphere_uniform(50, 5.0, 11), sample_sphere_uniform(50, 5.0, 12));
    }

    #[test]
    fn ball_samples_stay_inside() {
        for p in sample_ball_uniform(500, 2.0, 1) {
            assert!(p.norm() <= 2.0);
        }
    }

    #[test]
    fn percentage_arithmetic() {
        let mut rows: Vec<EpisodeRow> = (0..187).map(|_| row("a", true)).collect();
        rows.extend((0..13).map(|_| row("a", false)));
        let s = summarize(&rows);
        assert_eq!(s.combinations[0].capture_percentage, 93.5);
        let all: Vec<EpisodeRow> = (0..5).map(|_| row("b", true)).collect();
        assert_eq!(summarize(&all).combinations[0].capture_percentage, 100.0);
    }

    #[test]
    fn empty_metrics_are_absent() {
        let rows: Vec<EpisodeRow> = (0..3).map(|_| row("a", false)).collect();
        let s = summarize(&rows);
        let c = &s.combinations[0];
        assert_eq!(c.capture_time_s, None);
        assert_eq!(c.contacts, None);
        assert_eq!(c.terminations["timeout"], 3);
    }

    #[test]
    fn quartiles_interpolate() {
        let s = Stats::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.median, s.max), (1.0, 2.5, 4.0));
        assert_eq!((s.q1, s.q3), (1.75, 3.25));
        assert_eq!(s.iqr(), 1.5);
    }

    #[test]
    fn marker_radius_is_proportional() {
        let o = ScatterOptions::for_metric(ColorMetric::CaptureTime);
        let a = o.radius(Some(4.0), 8.0);
        let b = o.radius(Some(8.0), 8.0);
        assert!((b / a - 2.0).abs() < 1e-12);
        assert_eq!(o.radius(Some(1e-6), 8.0), o.min_radius);
        assert_eq!(o.radius(None, 8.0), o.min_radius);
    }

    #[test]
    fn combination_labels_are_unique() {
        let labels: std::collections::HashSet<String> = Combination::all().iter().map(|c| c.label()).collect();
        assert_eq!(labels.len(), 6);
    }
}
