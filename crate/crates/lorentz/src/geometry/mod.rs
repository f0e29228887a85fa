//! Exact specular billiard dynamics for `Z²`-periodic configurations of
//! circular scatterers.
//!
//! The fundamental cell is `[0,1)²`; every disk is translated by the whole
//! integer lattice. Phase points live on scatterer boundaries and are
//! coordinatized by `(obstacle, boundary_angle, reflection_angle)`, where the
//! reflection angle `φ ∈ (−π/2, π/2)` is measured between the outgoing
//! velocity and the inward normal. The invariant measure has density
//! proportional to `cos φ`.

mod ray;

pub use ray::{next_collision, Hit, DEFAULT_MAX_CELLS};

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

/// Discriminant tolerance for ray/circle intersections.
pub const EPS_HIT: f64 = 1e-12;
/// Roots below this parameter are treated as re-hits of the current obstacle.
pub const EPS_ROOT: f64 = 1e-9;
/// Samples with `|φ|` this close to `π/2` are rejected and redrawn.
pub const EPS_TANGENTIAL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("configuration has no disks")]
    EmptyConfig,
    #[error("disk {a} and translate of disk {b} by ({dx},{dy}) overlap (clearance {clearance:.3e})")]
    Overlap {
        a: usize,
        b: usize,
        dx: i64,
        dy: i64,
        clearance: f64,
    },
    #[error("disk {0} has non-positive radius")]
    BadRadius(usize),
    #[error("disk {0} center must lie in the fundamental cell [0,1)^2")]
    CenterOutOfCell(usize),
    #[error("input vector is not unit length within 1e-12")]
    NonUnitInput,
    #[error("no collision within {0} traversed cells")]
    HorizonOverflow(u64),
    #[error("ray tangent to a scatterer (discriminant within {EPS_HIT:.0e} of zero)")]
    TangentRay,
}

/// Spatial dimension of the lattice of cells: the planar gas (`Two`) or the
/// tubular quotient `Q/({0}×Z)` (`One`). Dynamics are identical; in the
/// tubular case the cell displacement is reported through its first
/// coordinate only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

/// One circular scatterer, given by its center in the fundamental cell and
/// its radius, both in lattice units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn new(cx: f64, cy: f64, r: f64) -> Self {
        Disk { center: [cx, cy], radius: r }
    }
}

/// A disk translate that can intersect the unit cell currently being
/// traversed, in cell-local coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub center: [f64; 2],
    pub radius: f64,
    pub disk: u32,
    pub offset: [i64; 2],
}

/// Validated periodic scatterer configuration.
///
/// `boundary_length` is `|∂Q̄| = Σ_j 2π r_j`, the total boundary length per
/// fundamental cell, which normalizes the invariant measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScattererConfig {
    pub dimension: Dimension,
    pub disks: Vec<Disk>,
    pub boundary_length: f64,
    /// Traversal budget per free flight before reporting `HorizonOverflow`.
    pub max_cells: u64,
    #[serde(skip)]
    pub(crate) candidates: Vec<Candidate>,
    #[serde(skip)]
    pub(crate) cum_radius: Vec<f64>,
}

/// Builds and validates a configuration.
///
/// Rejects empty disk lists, non-positive radii, centers outside the
/// fundamental cell, and any pair of lattice translates whose closures
/// intersect (minimal center distance over neighbor cells must exceed the
/// radius sum).
pub fn build_config(disks: Vec<Disk>, dimension: Dimension) -> Result<ScattererConfig, GeometryError> {
    if disks.is_empty() {
        return Err(GeometryError::EmptyConfig);
    }
    for (i, d) in disks.iter().enumerate() {
        if !(d.radius > 0.0) {
            return Err(GeometryError::BadRadius(i));
        }
        if !(0.0..1.0).contains(&d.center[0]) || !(0.0..1.0).contains(&d.center[1]) {
            return Err(GeometryError::CenterOutOfCell(i));
        }
    }
    // Translate offsets with |δ|∞ ≤ 2 cover every possible contact: radii are
    // below 1/2 once the self-translate test passes, so farther translates
    // keep clearance ≥ 1 − (r_i + r_j) > 0.
    for (i, a) in disks.iter().enumerate() {
        for (j, b) in disks.iter().enumerate() {
            for dx in -2i64..=2 {
                for dy in -2i64..=2 {
                    if i == j && dx == 0 && dy == 0 {
                        continue;
                    }
                    let ex = a.center[0] - b.center[0] - dx as f64;
                    let ey = a.center[1] - b.center[1] - dy as f64;
                    let clearance = (ex * ex + ey * ey).sqrt() - (a.radius + b.radius);
                    if clearance <= 0.0 {
                        return Err(GeometryError::Overlap { a: i, b: j, dx, dy, clearance });
                    }
                }
            }
        }
    }
    let boundary_length = disks.iter().map(|d| TAU * d.radius).sum();
    let mut cum = Vec::with_capacity(disks.len());
    let mut acc = 0.0;
    for d in &disks {
        acc += d.radius;
        cum.push(acc);
    }
    let candidates = build_candidates(&disks);
    Ok(ScattererConfig {
        dimension,
        disks,
        boundary_length,
        max_cells: DEFAULT_MAX_CELLS,
        candidates,
        cum_radius: cum,
    })
}

/// Disk translates that can intersect the closed unit cell `[0,1]²`.
fn build_candidates(disks: &[Disk]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (j, d) in disks.iter().enumerate() {
        for dx in -2i64..=2 {
            for dy in -2i64..=2 {
                let cx = d.center[0] + dx as f64;
                let cy = d.center[1] + dy as f64;
                let ex = (cx.clamp(0.0, 1.0) - cx).abs();
                let ey = (cy.clamp(0.0, 1.0) - cy).abs();
                if ex * ex + ey * ey <= d.radius * d.radius {
                    out.push(Candidate {
                        center: [cx, cy],
                        radius: d.radius,
                        disk: j as u32,
                        offset: [dx, dy],
                    });
                }
            }
        }
    }
    out
}

/// Boundary phase coordinate: position angle on the circle and signed
/// reflection angle of the outgoing velocity against the inward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub obstacle: usize,
    /// Angular position on the circle, in `[0, 2π)`.
    pub boundary_angle: f64,
    /// `φ ∈ (−π/2, π/2)`; the outgoing velocity is the inward normal rotated
    /// by `φ` toward the tangent.
    pub reflection_angle: f64,
}

impl PhasePoint {
    /// Cartesian position on the scatterer boundary (cell (0,0) lift).
    pub fn position(&self, cfg: &ScattererConfig) -> [f64; 2] {
        let d = &cfg.disks[self.obstacle];
        let (s, c) = self.boundary_angle.sin_cos();
        [d.center[0] + d.radius * c, d.center[1] + d.radius * s]
    }

    /// Unit outgoing velocity reconstructed from `(boundary_angle, φ)`.
    pub fn velocity(&self) -> [f64; 2] {
        let (sn, cn) = self.boundary_angle.sin_cos();
        let (sp, cp) = self.reflection_angle.sin_cos();
        // n = (cn, sn) inward normal, t = (−sn, cn) tangent.
        [cp * cn - sp * sn, cp * sn + sp * cn]
    }
}

/// One collision step: the lattice displacement of the hit scatterer, the
/// Euclidean flight length, and the post-collision phase point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlightEvent {
    pub kappa: [i64; 2],
    pub flight_length: f64,
    pub next: PhasePoint,
}

/// Running state of a sampled trajectory. `kappa_sum` is the Birkhoff sum
/// `κ_n = Σ_{k<n} κ∘T̄^k`, maintained in exact integer arithmetic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub current: PhasePoint,
    pub kappa_sum: [i64; 2],
    pub steps: u64,
    /// Provenance of the stream that produced the initial condition.
    pub stream: (u64, u64),
}

impl TrajectoryState {
    pub fn new(start: PhasePoint, stream: (u64, u64)) -> Self {
        TrajectoryState { current: start, kappa_sum: [0, 0], steps: 0, stream }
    }
}

/// Specular reflection `v′ = v − 2(v·n)n`. Both inputs must be unit vectors
/// within `1e−12`.
pub fn reflect(incoming: [f64; 2], normal: [f64; 2]) -> Result<[f64; 2], GeometryError> {
    for v in [incoming, normal] {
        let n2 = v[0] * v[0] + v[1] * v[1];
        if (n2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(GeometryError::NonUnitInput);
        }
    }
    let dot = incoming[0] * normal[0] + incoming[1] * normal[1];
    Ok([incoming[0] - 2.0 * dot * normal[0], incoming[1] - 2.0 * dot * normal[1]])
}

/// Advances a trajectory by one collision, updating `kappa_sum` and `steps`.
pub fn billiard_step(
    cfg: &ScattererConfig,
    state: &mut TrajectoryState,
) -> Result<FlightEvent, GeometryError> {
    let event = flight_from(cfg, &state.current)?;
    state.current = event.next;
    state.kappa_sum[0] += event.kappa[0];
    state.kappa_sum[1] += event.kappa[1];
    state.steps += 1;
    Ok(event)
}

/// One collision of the quotient map from a phase point, without trajectory
/// bookkeeping.
pub fn flight_from(cfg: &ScattererConfig, p: &PhasePoint) -> Result<FlightEvent, GeometryError> {
    let start = p.position(cfg);
    let v = p.velocity();
    let hit = next_collision(cfg, start, v, cfg.max_cells)?;
    let disk = &cfg.disks[hit.obstacle];
    // Hit-point angle on the target circle, from cell-local coordinates.
    let hx = hit.local[0] - (disk.center[0] + hit.offset_in_cell[0] as f64);
    let hy = hit.local[1] - (disk.center[1] + hit.offset_in_cell[1] as f64);
    let mut theta = hy.atan2(hx);
    if theta < 0.0 {
        theta += TAU;
    }
    let (sn, cn) = theta.sin_cos();
    let normal = [cn, sn];
    let out = reflect(v, normal)?;
    // φ′ from the outgoing velocity in the (normal, tangent) frame.
    let tangent = [-sn, cn];
    let phi = (out[0] * tangent[0] + out[1] * tangent[1]).atan2(out[0] * normal[0] + out[1] * normal[1]);
    Ok(FlightEvent {
        kappa: hit.cell,
        flight_length: hit.flight_length,
        next: PhasePoint { obstacle: hit.obstacle, boundary_angle: theta, reflection_angle: phi },
    })
}

/// Draws a phase point from the invariant measure: obstacle proportional to
/// circumference, boundary angle uniform, and `sin φ` uniform on `(−1,1)`
/// (density `cos φ / 2`). Tangential draws are rejected and redrawn.
pub fn sample_phase_point<R: Rng + ?Sized>(cfg: &ScattererConfig, rng: &mut R) -> PhasePoint {
    let total = *cfg.cum_radius.last().unwrap();
    let pick = rng.gen::<f64>() * total;
    let obstacle = cfg.cum_radius.partition_point(|&c| c <= pick).min(cfg.disks.len() - 1);
    let boundary_angle = rng.gen::<f64>() * TAU;
    let reflection_angle = loop {
        let s: f64 = rng.gen_range(-1.0..1.0);
        let phi = s.asin();
        if FRAC_PI_2 - phi.abs() > EPS_TANGENTIAL {
            break phi;
        }
    };
    PhasePoint { obstacle, boundary_angle, reflection_angle }
}

/// Time-reversal involution `τ`: keeps the base point, flips `φ ↦ −φ`.
pub fn time_reverse(p: PhasePoint) -> PhasePoint {
    PhasePoint { reflection_angle: -p.reflection_angle, ..p }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % TAU;
    if x < 0.0 {
        x += TAU;
    }
    x
}

/// Reference invariant densities, used by the measure-preservation tests.
pub mod invariant {
    /// CDF of the reflection angle, `P(φ ≤ x) = (1 + sin x)/2`.
    pub fn phi_cdf(x: f64) -> f64 {
        (1.0 + x.sin()) / 2.0
    }
    /// Variance of `φ` under the `cos φ / 2` density.
    pub const PHI_VARIANCE: f64 = std::f64::consts::PI * std::f64::consts::PI / 4.0 - 2.0;
}
