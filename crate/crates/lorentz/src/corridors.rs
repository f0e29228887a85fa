//! Corridor enumeration and the geometric constants of the infinite-horizon
//! configuration.
//!
//! A corridor is a maximal open strip of the billiard domain bounded by two
//! parallel lines tangent to scatterer translates. For a prime direction
//! `w ∈ Z²` the lattice projects onto the axis perpendicular to `w` with
//! period `1/|w|`, so corridors of direction `w` are exactly the gaps left by
//! the projected disk shadows on a circle of that circumference. All tangency
//! distances reduce to center projections plus or minus radii; no
//! root-finding is involved.
//!
//! From the corridors we evaluate
//!
//! * the diffusion matrix `Σ² = (1/2|∂Q̄|) Σ_C n_C d_C²/|w_C| · w_C ⊗ w_C`,
//! * the free-flight tail table `c_{L,w} = Σ_{(A,B)} d_A² 𝔞_{(A,B)} / (2|∂Q̄||w|)`
//!   governing `μ̄(κ = L + Nw) ≈ c_{L,w}/N³`.

use crate::geometry::{Dimension, ScattererConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Projection-gap tolerance: interval endpoints closer than this merge.
pub const EPS_GAP: f64 = 1e-12;
/// Corridor widths below this are rejected as numerically tangent.
pub const MIN_WIDTH: f64 = 1e-9;
/// Default direction cutoff: corridors are searched for all prime `w` with
/// `max(|w₁|,|w₂|)` up to this bound. A documented completeness bound, not a
/// physical one.
pub const DEFAULT_MAX_DIRECTION: i64 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorridorError {
    #[error("no corridor found up to max_direction {0}: configuration has finite horizon")]
    NoCorridor(i64),
    #[error("max_direction must be at least 1")]
    BadCutoff,
}

/// A tangency point class: the extreme point of one disk in the direction
/// perpendicular to the corridor, identified modulo `Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    pub obstacle: usize,
    /// +1 if the disk touches the corridor with its extreme point along
    /// `+w⊥`, −1 for the opposite side.
    pub side: i8,
    /// Representative point on the obstacle boundary (cell (0,0) lift).
    pub point: [f64; 2],
    /// Position along the corridor in `w`-period units, in `[0,1)`.
    pub along: f64,
    /// Signed perpendicular offset of the tangent line for this
    /// representative.
    pub offset: f64,
}

/// One corridor class: prime direction (canonical sign), width, the tangency
/// point classes on its two boundary lines, and the `𝔞` coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corridor {
    /// Prime integer direction, first nonzero coordinate positive.
    pub direction: [i64; 2],
    pub width: f64,
    /// Tangency classes on the lower boundary line (touching from below,
    /// `side = +1`).
    pub lower: Vec<Tangency>,
    /// Tangency classes on the upper boundary line (`side = −1`).
    pub upper: Vec<Tangency>,
    /// Perpendicular offsets of the two lines for the representative strip
    /// `(lo, lo + width)`.
    pub line_offsets: (f64, f64),
    /// All admissible pairs `(A, B, 𝔞_{(A,B)})`: `A` indexes one line's
    /// tangencies, `B` the other line's, and `𝔞` depends only on `B` and the
    /// traversal sign of `w`.
    pub coefficients: Vec<(Tangency, Tangency, f64)>,
}

impl Corridor {
    /// Number of distinct tangency point classes, both lines pooled.
    pub fn n_c(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    /// `Σ_i 𝔞_{(A,B_i)}` for each fixed `A`-line, which the tail lemma's
    /// ordering argument forces to equal 1.
    pub fn coefficient_sums(&self) -> Vec<f64> {
        let mut sums = Vec::new();
        for line in [&self.lower, &self.upper] {
            if !line.is_empty() {
                sums.push(line_coefficients(line, 1).iter().sum());
                sums.push(line_coefficients(line, -1).iter().sum());
            }
        }
        sums
    }
}

/// The diffusion matrix `Σ²` (d = 2) or the scalar `a₁₁` (d = 1), stored as a
/// symmetric 2×2 block with the active dimension recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaMatrix {
    pub entries: [[f64; 2]; 2],
    pub dimension: Dimension,
}

impl SigmaMatrix {
    pub fn diagonal(s: f64, dimension: Dimension) -> Self {
        SigmaMatrix { entries: [[s, 0.0], [0.0, s]], dimension }
    }

    pub fn det(&self) -> f64 {
        match self.dimension {
            Dimension::One => self.entries[0][0],
            Dimension::Two => {
                self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
            }
        }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.det() > 0.0
    }

    /// Quadratic form `Σ² t · t`.
    pub fn quad(&self, t: [f64; 2]) -> f64 {
        let m = &self.entries;
        m[0][0] * t[0] * t[0] + 2.0 * m[0][1] * t[0] * t[1] + m[1][1] * t[1] * t[1]
    }

    /// `Σ⁻² x` (inverse applied to a vector); the matrix must be
    /// nondegenerate.
    pub fn inv_apply(&self, x: [f64; 2]) -> [f64; 2] {
        match self.dimension {
            Dimension::One => [x[0] / self.entries[0][0], 0.0],
            Dimension::Two => {
                let d = self.det();
                let m = &self.entries;
                [
                    (m[1][1] * x[0] - m[0][1] * x[1]) / d,
                    (-m[1][0] * x[0] + m[0][0] * x[1]) / d,
                ]
            }
        }
    }

    /// `Σ⁻² x · x`.
    pub fn inv_quad(&self, x: [f64; 2]) -> f64 {
        let y = self.inv_apply(x);
        x[0] * y[0] + x[1] * y[1]
    }
}

/// One tail-table entry: `μ̄(κ = L + Nw) ≈ c/N³` for large `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub l: [i64; 2],
    pub w: [i64; 2],
    pub c: f64,
}

/// Free-flight tail coefficients, indexed by `(L, w)` with `w` ranging over
/// both signed representatives of each corridor direction and `L` in the
/// fundamental slab `L·w ∈ [0, |w|²)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailTable {
    pub entries: Vec<TailEntry>,
}

impl TailTable {
    /// `Σ_L c_{L,w}` for a fixed signed direction.
    pub fn direction_sum(&self, w: [i64; 2]) -> f64 {
        self.entries.iter().filter(|e| e.w == w).map(|e| e.c).sum()
    }
}

/// Enumerates all corridors with prime direction bounded by `max_direction`
/// in supremum norm. An empty result means no corridor was found up to the
/// cutoff (finite horizon as far as this bound can tell).
pub fn enumerate_corridors(
    cfg: &ScattererConfig,
    max_direction: i64,
) -> Result<Vec<Corridor>, CorridorError> {
    if max_direction < 1 {
        return Err(CorridorError::BadCutoff);
    }
    let mut out = Vec::new();
    for w in prime_directions(max_direction) {
        out.extend(corridors_in_direction(cfg, w));
    }
    Ok(out)
}

/// Canonical prime directions with `max(|w₁|,|w₂|) ≤ bound`: first nonzero
/// coordinate positive, coordinates coprime.
pub fn prime_directions(bound: i64) -> Vec<[i64; 2]> {
    let mut out = Vec::new();
    for w1 in 0..=bound {
        for w2 in -bound..=bound {
            if w1 == 0 && w2 <= 0 {
                continue;
            }
            if w1 > 0 || w2 > 0 {
                if gcd(w1.unsigned_abs(), w2.unsigned_abs()) == 1 {
                    out.push([w1, w2]);
                }
            }
        }
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn corridors_in_direction(cfg: &ScattererConfig, w: [i64; 2]) -> Vec<Corridor> {
    let wn = ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt();
    let period = 1.0 / wn;
    // Unit perpendicular; the lattice projects onto period·Z along it.
    let perp = [-w[1] as f64 / wn, w[0] as f64 / wn];

    // Shadow segments on the circle R/(period·Z), wrapping intervals split in
    // two so everything lives in [0, period].
    let mut segs: Vec<(f64, f64)> = Vec::new();
    for d in &cfg.disks {
        let len = 2.0 * d.radius;
        if len >= period - EPS_GAP {
            return Vec::new(); // one disk's shadow already covers the period
        }
        let proj = d.center[0] * perp[0] + d.center[1] * perp[1];
        let s = wrap(proj - d.radius, period);
        let e = s + len;
        if e <= period {
            segs.push((s, e));
        } else {
            segs.push((s, period));
            segs.push((0.0, e - period));
        }
    }
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    for &(s, e) in &segs {
        match blocks.last_mut() {
            Some(last) if s <= last.1 + EPS_GAP => last.1 = last.1.max(e),
            _ => blocks.push((s, e)),
        }
    }

    // Complement pieces in [0, period], then rejoin a gap straddling 0.
    let mut gaps: Vec<(f64, f64)> = Vec::new(); // (start, width), start may be negative
    if blocks[0].0 > MIN_WIDTH {
        gaps.push((0.0, blocks[0].0));
    }
    for pair in blocks.windows(2) {
        let width = pair[1].0 - pair[0].1;
        if width > MIN_WIDTH {
            gaps.push((pair[0].1, width));
        }
    }
    let tail_width = period - blocks.last().unwrap().1;
    if tail_width > MIN_WIDTH {
        let start = blocks.last().unwrap().1;
        match gaps.first() {
            // Leading and trailing pieces are two halves of one gap across 0.
            Some(&(s0, w0)) if s0 == 0.0 => {
                gaps[0] = (start - period, w0 + tail_width);
            }
            _ => gaps.push((start, tail_width)),
        }
    }

    gaps.iter()
        .map(|&(lo, width)| build_corridor(cfg, w, wn, perp, period, lo, width))
        .collect()
}

fn wrap(x: f64, period: f64) -> f64 {
    let mut y = x % period;
    if y < 0.0 {
        y += period;
    }
    y
}

fn build_corridor(
    cfg: &ScattererConfig,
    w: [i64; 2],
    _wn: f64,
    perp: [f64; 2],
    period: f64,
    gap_lo: f64,
    width: f64,
) -> Corridor {
    let w2 = (w[0] * w[0] + w[1] * w[1]) as f64;
    // Lattice vector advancing the perpendicular line offset by one period,
    // used to normalize each tangency representative onto the corridor's own
    // boundary line before measuring positions along w.
    let (g, x, y) = ext_gcd(-w[1], w[0]);
    let v0 = [x * g.signum(), y * g.signum()];
    let v0_dot_w = (v0[0] * w[0] + v0[1] * w[1]) as f64;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (j, d) in cfg.disks.iter().enumerate() {
        let proj = d.center[0] * perp[0] + d.center[1] * perp[1];
        // The extreme point sits radially above the center, so its
        // w-component equals the center's.
        let along_raw = (d.center[0] * w[0] as f64 + d.center[1] * w[1] as f64) / w2;
        for side in [1i8, -1i8] {
            let touch = proj + side as f64 * d.radius;
            let point = [
                d.center[0] + side as f64 * d.radius * perp[0],
                d.center[1] + side as f64 * d.radius * perp[1],
            ];
            let line_offset = if side == 1 { gap_lo } else { gap_lo + width };
            let k = ((touch - line_offset) / period).round();
            let along = wrap(along_raw - k * v0_dot_w / w2, 1.0);
            let t = Tangency { obstacle: j, side, point, along, offset: touch };
            if side == 1 && circ_eq(touch, gap_lo, period) {
                lower.push(t);
            } else if side == -1 && circ_eq(touch, gap_lo + width, period) {
                upper.push(t);
            }
        }
    }
    lower.sort_by(|a, b| a.along.total_cmp(&b.along));
    upper.sort_by(|a, b| a.along.total_cmp(&b.along));

    let mut coefficients = Vec::new();
    for (a_line, b_line) in [(&lower, &upper), (&upper, &lower)] {
        let coeffs = line_coefficients(b_line, 1);
        for a in a_line.iter() {
            for (b, &c) in b_line.iter().zip(coeffs.iter()) {
                coefficients.push((*a, *b, c));
            }
        }
    }
    Corridor {
        direction: w,
        width,
        lower,
        upper,
        line_offsets: (gap_lo, gap_lo + width),
        coefficients,
    }
}

fn circ_eq(a: f64, b: f64, period: f64) -> bool {
    let d = wrap(a - b, period);
    d < MIN_WIDTH || period - d < MIN_WIDTH
}

/// `𝔞` coefficients of one boundary line's tangencies for traversal sign
/// `sign` (±1 along `w`): the cyclic gaps between consecutive positions, in
/// `w`-period units. Their sum telescopes to 1.
fn line_coefficients(line: &[Tangency], sign: i8) -> Vec<f64> {
    let k = line.len();
    let mut out = vec![0.0; k];
    if k == 0 {
        return out;
    }
    for i in 0..k {
        let (cur, prev) = if sign > 0 {
            (line[i].along, line[(i + k - 1) % k].along)
        } else {
            (line[(i + 1) % k].along, line[i].along)
        };
        let mut gap = cur - prev;
        if gap <= 0.0 {
            gap += 1.0;
        }
        // A single class spans the whole period.
        if k == 1 {
            gap = 1.0;
        }
        out[i] = gap;
    }
    out
}

/// Evaluates `Σ²` from the corridor list. For `d = 1` only the first
/// coordinate block is meaningful (`a₁₁`).
pub fn sigma_squared(
    corridors: &[Corridor],
    boundary_length: f64,
    dimension: Dimension,
) -> Result<SigmaMatrix, CorridorError> {
    if corridors.is_empty() {
        return Err(CorridorError::NoCorridor(0));
    }
    let mut m = [[0.0f64; 2]; 2];
    for c in corridors {
        let w = [c.direction[0] as f64, c.direction[1] as f64];
        let wn = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let coef = c.n_c() as f64 * c.width * c.width / (2.0 * boundary_length * wn);
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += coef * w[i] * w[j];
            }
        }
    }
    if dimension == Dimension::One {
        m[0][1] = 0.0;
        m[1][0] = 0.0;
        m[1][1] = 0.0;
    }
    Ok(SigmaMatrix { entries: m, dimension })
}

/// The same matrix from the `(A, w)`-indexed sum
/// `(1/4|∂Q̄|) Σ_{(A,w)∈𝒜} d_A²/|w| · w ⊗ w`, where `𝒜` carries every
/// tangency class with both signed directions. Used as an independent route
/// in tests.
pub fn sigma_squared_pairs(
    corridors: &[Corridor],
    boundary_length: f64,
    dimension: Dimension,
) -> Result<SigmaMatrix, CorridorError> {
    if corridors.is_empty() {
        return Err(CorridorError::NoCorridor(0));
    }
    let mut m = [[0.0f64; 2]; 2];
    for c in corridors {
        for sign in [1.0f64, -1.0] {
            let w = [sign * c.direction[0] as f64, sign * c.direction[1] as f64];
            let wn = (w[0] * w[0] + w[1] * w[1]).sqrt();
            for _class in 0..c.n_c() {
                let coef = c.width * c.width / (4.0 * boundary_length * wn);
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] += coef * w[i] * w[j];
                    }
                }
            }
        }
    }
    if dimension == Dimension::One {
        m[0][1] = 0.0;
        m[1][0] = 0.0;
        m[1][1] = 0.0;
    }
    Ok(SigmaMatrix { entries: m, dimension })
}

/// Builds the tail table: every `(L, w, c_{L,w})` with `c > 0`, `w` running
/// over both signed corridor directions and `L` in the fundamental slab
/// `L·w ≥ 0 > (L−w)·w`.
pub fn tail_table(cfg: &ScattererConfig, corridors: &[Corridor]) -> TailTable {
    let mut acc: Vec<TailEntry> = Vec::new();
    for c in corridors {
        for sign in [1i64, -1] {
            let w = [sign * c.direction[0], sign * c.direction[1]];
            // 𝔞 coefficients follow the traversal order along the signed
            // direction.
            for (a_line, b_line, b_is_upper) in
                [(&c.lower, &c.upper, true), (&c.upper, &c.lower, false)]
            {
                let coeffs = line_coefficients(b_line, sign as i8);
                for a in a_line {
                    // The strip adjacent to A lies on the side away from A's
                    // disk; its far line carries the B classes.
                    let far_offset = if b_is_upper { a.offset + c.width } else { a.offset - c.width };
                    for (b, &coef) in b_line.iter().zip(coeffs.iter()) {
                        let l = solve_translate(w, far_offset - b.offset);
                        let contribution = c.width * c.width * coef
                            / (2.0 * cfg.boundary_length * length(w));
                        match acc.iter_mut().find(|e| e.l == l && e.w == w) {
                            Some(e) => e.c += contribution,
                            None => acc.push(TailEntry { l, w, c: contribution }),
                        }
                    }
                }
            }
        }
    }
    acc.retain(|e| e.c > 0.0);
    acc.sort_by_key(|e| (e.w, e.l));
    TailTable { entries: acc }
}

fn length(w: [i64; 2]) -> f64 {
    ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt()
}

/// Finds the unique integer `L` with `L·w⊥ = round(delta_perp·|w|)` and
/// `L·w ∈ [0, |w|²)`, where `delta_perp` is a perpendicular offset between
/// two parallel tangent lines (necessarily an integer multiple of `1/|w|`).
fn solve_translate(w: [i64; 2], delta_perp: f64) -> [i64; 2] {
    let wn = length(w);
    let m = (delta_perp * wn).round() as i64;
    debug_assert!(
        (delta_perp * wn - m as f64).abs() < 1e-6,
        "perpendicular offset {delta_perp} is not a lattice multiple for w={w:?}"
    );
    // L0 solving L0·(−w₂, w₁) = m via the extended Euclid relation.
    let (g, x, y) = ext_gcd(-w[1], w[0]);
    debug_assert_eq!(g.abs(), 1);
    let (x, y) = (x * g.signum() * m, y * g.signum() * m);
    let l0 = [x, y];
    let w2 = w[0] * w[0] + w[1] * w[1];
    let k = l0[0] * w[0] + l0[1] * w[1];
    let t = -(k.div_euclid(w2));
    [l0[0] + t * w[0], l0[1] + t * w[1]]
}

/// Returns `(g, x, y)` with `a·x + b·y = g = ±gcd`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Infinite-horizon certificate: a witness line through a corridor midline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonCertificate {
    pub direction: [i64; 2],
    /// A point on the witness line.
    pub point: [f64; 2],
}

/// True iff at least one corridor exists up to `max_direction`; on success
/// the certificate carries the midline of the first corridor found.
pub fn check_infinite_horizon(
    cfg: &ScattererConfig,
    max_direction: i64,
) -> Result<(bool, Option<HorizonCertificate>), CorridorError> {
    let cs = enumerate_corridors(cfg, max_direction)?;
    Ok(match cs.first() {
        Some(c) => {
            let w = c.direction;
            let wn = length(w);
            let perp = [-w[1] as f64 / wn, w[0] as f64 / wn];
            let mid = (c.line_offsets.0 + c.line_offsets.1) / 2.0;
            (
                true,
                Some(HorizonCertificate { direction: w, point: [mid * perp[0], mid * perp[1]] }),
            )
        }
        None => (false, None),
    })
}
