//! Internal mechanics of the net.
//!
//! Three formulations share one grid topology:
//!
//! * `InextensibleEdges`: structural edges are distance constraints enforced
//!   by mass-weighted position projection; only axial damping is a force.
//! * `Shell`: structural linear springs plus a collinear bending stencil.
//! * `SaintVenant`: constant-strain triangles with a St. Venant-Kirchhoff
//!   membrane energy.

use nalgebra::{Matrix2, Matrix3x2};
use serde::{Deserialize, Serialize};

use crate::dynamics::NetState;
use crate::error::{Error, Result};
use crate::Vec3;

/// Triangles with a current area below this are skipped.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetModelKind {
    InextensibleEdges,
    Shell,
    SaintVenant,
}

impl NetModelKind {
    pub const ALL: [NetModelKind; 3] = [
        NetModelKind::InextensibleEdges,
        NetModelKind::Shell,
        NetModelKind::SaintVenant,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NetModelKind::InextensibleEdges => "inextensible_edges",
            NetModelKind::Shell => "shell",
            NetModelKind::SaintVenant => "saint_venant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticParams {
    /// Young's modulus (Pa).
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    /// Axial dashpot coefficient applied on every structural edge (N s/m).
    pub damping: f64,
    /// Membrane thickness (m); scales membrane and derived spring stiffness.
    pub thickness: f64,
    /// Shell bending stiffness (N m).
    pub bending_stiffness: f64,
    /// Explicit structural spring stiffness (N/m). When absent it is derived
    /// as `E * thickness`, i.e. a strip of width equal to the grid spacing.
    pub edge_stiffness: Option<f64>,
    pub constraint_iterations: usize,
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self {
            young_modulus: 10e3,
            poisson_ratio: 0.3,
            damping: 1e-2,
            thickness: 1e-3,
            bending_stiffness: 1e-2,
            edge_stiffness: None,
            constraint_iterations: 10,
        }
    }
}

impl ElasticParams {
    pub fn validate(&self) -> Result<()> {
        crate::dynamics::positive("elastic.young_modulus", self.young_modulus)?;
        crate::dynamics::positive("elastic.thickness", self.thickness)?;
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::config(
                "elastic.poisson_ratio",
                format!("must lie in [0, 0.5), got {}", self.poisson_ratio),
            ));
        }
        for (field, v) in [
            ("elastic.damping", self.damping),
            ("elastic.bending_stiffness", self.bending_stiffness),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be non-negative, got {v}")));
            }
        }
        if let Some(k) = self.edge_stiffness {
            crate::dynamics::positive("elastic.edge_stiffness", k)?;
        }
        if self.constraint_iterations == 0 {
            return Err(Error::config("elastic.constraint_iterations", "must be at least 1"));
        }
        Ok(())
    }

    pub fn spring_stiffness(&self) -> f64 {
        self.edge_stiffness
            .unwrap_or(self.young_modulus * self.thickness)
    }

    /// Lamé parameters `(lambda, mu)`.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.young_modulus, self.poisson_ratio);
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        (lambda, mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub rest: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub nodes: [usize; 3],
    /// Inverse of the 2x2 rest edge matrix `[X1 - X0, X2 - X0]`.
    pub rest_inv: Matrix2<f64>,
    pub rest_area: f64,
}

/// Connectivity of a `rows x cols` net.
#[derive(Debug, Clone, PartialEq)]
pub struct NetTopology {
    pub rows: usize,
    pub cols: usize,
    pub edges: Vec<Edge>,
    /// Collinear `(a, b, c)` triples along rows and columns, `b` in the middle.
    pub bending: Vec<[usize; 3]>,
    pub triangles: Vec<Triangle>,
    pub rest_spacing: f64,
}

impl NetTopology {
    /// Topology of a flat grid at its rest spacing.
    pub fn build(net: &NetState) -> Result<Self> {
        let (rows, cols, s) = (net.rows, net.cols, net.rest_spacing);
        if rows * cols != net.len() {
            return Err(Error::config("net", "rows x cols does not match node count"));
        }
        if !(s > 0.0) {
            return Err(Error::config("net.side_length", "rest spacing must be positive"));
        }
        let idx = |r: usize, c: usize| r * cols + c;

        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push(Edge { a: idx(r, c), b: idx(r, c + 1), rest: s });
                }
                if r + 1 < rows {
                    edges.push(Edge { a: idx(r, c), b: idx(r + 1, c), rest: s });
                }
            }
        }

        let mut bending = Vec::new();
        for r in 0..rows {
            for c in 1..cols.saturating_sub(1) {
                bending.push([idx(r, c - 1), idx(r, c), idx(r, c + 1)]);
            }
        }
        for c in 0..cols {
            for r in 1..rows.saturating_sub(1) {
                bending.push([idx(r - 1, c), idx(r, c), idx(r + 1, c)]);
            }
        }

        let rest = |r: usize, c: usize| nalgebra::Vector2::new(c as f64 * s, r as f64 * s);
        let mut triangles = Vec::new();
        for r in 0..rows - 1 {
            for c in 0..cols - 1 {
                let cells = [
                    [(r, c), (r, c + 1), (r + 1, c + 1)],
                    [(r, c), (r + 1, c + 1), (r + 1, c)],
                ];
                for tri in cells {
                    let x = tri.map(|(r, c)| rest(r, c));
                    triangles.push(Triangle::from_rest(
                        tri.map(|(r, c)| idx(r, c)),
                        x[0],
                        x[1],
                        x[2],
                    )?);
                }
            }
        }

        Ok(Self {
            rows,
            cols,
            edges,
            bending,
            triangles,
            rest_spacing: s,
        })
    }

    /// Grid neighbours (including diagonals) are excluded from self-contact.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        grid_adjacent(self.cols, i, j)
    }
}

pub(crate) fn grid_adjacent(cols: usize, i: usize, j: usize) -> bool {
    let (ri, ci) = (i / cols, i % cols);
    let (rj, cj) = (j / cols, j % cols);
    ri.abs_diff(rj) <= 1 && ci.abs_diff(cj) <= 1
}

impl Triangle {
    pub fn from_rest(
        nodes: [usize; 3],
        x0: nalgebra::Vector2<f64>,
        x1: nalgebra::Vector2<f64>,
        x2: nalgebra::Vector2<f64>,
    ) -> Result<Self> {
        let dm = Matrix2::from_columns(&[x1 - x0, x2 - x0]);
        let det = dm.determinant();
        let rest_area = 0.5 * det;
        if !(rest_area > DEGENERATE_AREA) {
            return Err(Error::config(
                "net",
                format!("triangle {nodes:?} has inverted or degenerate rest shape"),
            ));
        }
        let rest_inv = dm.try_inverse().expect("non-zero determinant");
        Ok(Self {
            nodes,
            rest_inv,
            rest_area,
        })
    }

    fn deformation(&self, pos: &[Vec3]) -> Matrix3x2<f64> {
        let [i, j, k] = self.nodes;
        let ds = Matrix3x2::from_columns(&[pos[j] - pos[i], pos[k] - pos[i]]);
        ds * self.rest_inv
    }
}

/// Diagnostics produced alongside force evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ForceDiagnostics {
    pub degenerate_triangles: usize,
}

/// Internal elastic plus damping forces for the selected model, accumulated
/// into `out`.
pub fn internal_forces(
    net: &NetState,
    topo: &NetTopology,
    kind: NetModelKind,
    params: &ElasticParams,
    out: &mut [Vec3],
) -> ForceDiagnostics {
    let mut diag = ForceDiagnostics::default();
    match kind {
        NetModelKind::InextensibleEdges => {}
        NetModelKind::Shell => {
            spring_forces(net, topo, params.spring_stiffness(), out);
            bending_forces(net, topo, params.bending_stiffness, out);
        }
        NetModelKind::SaintVenant => {
            diag = stvk_membrane_forces(net, topo, params, out);
        }
    }
    damping_forces(net, topo, params.damping, out);
    diag
}

/// Hookean structural springs.
pub fn spring_forces(net: &NetState, topo: &NetTopology, stiffness: f64, out: &mut [Vec3]) {
    for e in &topo.edges {
        let d = net.pos[e.b] - net.pos[e.a];
        let len = d.norm();
        if len <= 0.0 {
            continue;
        }
        let f = d * (stiffness * (len - e.rest) / len);
        out[e.a] += f;
        out[e.b] -= f;
    }
}

pub fn spring_energy(net: &NetState, topo: &NetTopology, stiffness: f64) -> f64 {
    topo.edges
        .iter()
        .map(|e| {
            let s = (net.pos[e.b] - net.pos[e.a]).norm() - e.rest;
            0.5 * stiffness * s * s
        })
        .sum()
}

/// Discrete bending on collinear triples with energy
/// `k_b / (2 L0^2) * |a - 2b + c|^2`.
pub fn bending_forces(net: &NetState, topo: &NetTopology, bending_stiffness: f64, out: &mut [Vec3]) {
    let k = bending_stiffness / (topo.rest_spacing * topo.rest_spacing);
    for &[a, b, c] in &topo.bending {
        let d = (net.pos[a] - net.pos[b] * 2.0 + net.pos[c]) * k;
        out[a] -= d;
        out[b] += d * 2.0;
        out[c] -= d;
    }
}

pub fn bending_energy(net: &NetState, topo: &NetTopology, bending_stiffness: f64) -> f64 {
    let k = bending_stiffness / (topo.rest_spacing * topo.rest_spacing);
    topo.bending
        .iter()
        .map(|&[a, b, c]| 0.5 * k * (net.pos[a] - net.pos[b] * 2.0 + net.pos[c]).norm_squared())
        .sum()
}

fn stvk_density(f: &Matrix3x2<f64>, lambda: f64, mu: f64) -> (f64, Matrix2<f64>) {
    let green = (f.transpose() * f - Matrix2::identity()) * 0.5;
    let tr = green.trace();
    let energy = 0.5 * lambda * tr * tr + mu * (green * green).trace();
    let second_pk = Matrix2::identity() * (lambda * tr) + green * (2.0 * mu);
    (energy, second_pk)
}

fn current_area(f: &Matrix3x2<f64>, rest_area: f64) -> f64 {
    f.column(0).cross(&f.column(1)).norm() * rest_area
}

/// Constant-strain St. Venant-Kirchhoff membrane forces.
pub fn stvk_membrane_forces(
    net: &NetState,
    topo: &NetTopology,
    params: &ElasticParams,
    out: &mut [Vec3],
) -> ForceDiagnostics {
    let (lambda, mu) = params.lame();
    let mut diag = ForceDiagnostics::default();
    for tri in &topo.triangles {
        let f = tri.deformation(&net.pos);
        if current_area(&f, tri.rest_area) < DEGENERATE_AREA {
            diag.degenerate_triangles += 1;
            continue;
        }
        let (_, s) = stvk_density(&f, lambda, mu);
        let piola = f * s;
        let h: Matrix3x2<f64> = piola * tri.rest_inv.transpose() * (-tri.rest_area * params.thickness);
        let f1: Vec3 = h.column(0).into();
        let f2: Vec3 = h.column(1).into();
        let [i, j, k] = tri.nodes;
        out[i] -= f1 + f2;
        out[j] += f1;
        out[k] += f2;
    }
    diag
}

pub fn stvk_energy(net: &NetState, topo: &NetTopology, params: &ElasticParams) -> f64 {
    let (lambda, mu) = params.lame();
    topo.triangles
        .iter()
        .map(|tri| {
            let (w, _) = stvk_density(&tri.deformation(&net.pos), lambda, mu);
            w * tri.rest_area * params.thickness
        })
        .sum()
}

/// Axial dashpots on structural edges.
pub fn damping_forces(net: &NetState, topo: &NetTopology, damping: f64, out: &mut [Vec3]) {
    if damping == 0.0 {
        return;
    }
    for e in &topo.edges {
        let d = net.pos[e.b] - net.pos[e.a];
        let len = d.norm();
        if len <= 0.0 {
            continue;
        }
        let n = d / len;
        let rate = (net.vel[e.b] - net.vel[e.a]).dot(&n);
        let f = n * (damping * rate);
        out[e.a] += f;
        out[e.b] -= f;
    }
}

/// Gauss-Seidel mass-weighted distance projection over all structural edges.
///
/// Returns the largest per-edge accumulated correction expressed as
/// `mass * displacement` (kg m); divide by `dt^2` for an equivalent force.
pub fn project_inextensible(net: &mut NetState, topo: &NetTopology, iterations: usize) -> f64 {
    let mut largest = 0.0_f64;
    for _ in 0..iterations {
        for e in &topo.edges {
            let wa = 1.0 / net.mass[e.a];
            let wb = 1.0 / net.mass[e.b];
            let d = net.pos[e.b] - net.pos[e.a];
            let len = d.norm();
            if len <= 0.0 {
                continue;
            }
            let c = len - e.rest;
            let n = d / len;
            let step = c / (wa + wb);
            net.pos[e.a] += n * (wa * step);
            net.pos[e.b] -= n * (wb * step);
            largest = largest.max(step.abs());
        }
    }
    largest
}

/// Largest `|L - L0| / L0` over structural edges.
pub fn max_edge_strain(net: &NetState, topo: &NetTopology) -> f64 {
    topo.edges
        .iter()
        .map(|e| ((net.pos[e.b] - net.pos[e.a]).norm() - e.rest).abs() / e.rest)
        .fold(0.0, f64::max)
}
