//! Reproducible large-scale sampling over the billiard: single-step `κ`
//! histograms, `κ_n` histograms, infinite-measure correlation estimators for
//! cell-supported observables, and the associated audits.
//!
//! Parallel execution is deterministic by construction: work is cut into
//! fixed-size chunks, chunk `i` draws from ChaCha stream `i` of the run seed,
//! and partial results are combined in chunk order. The merged result is
//! bitwise independent of the worker count, and two estimators sharing a seed
//! consume identical random streams (common random numbers).

use crate::geometry::{self, Dimension, GeometryError, PhasePoint, ScattererConfig, TrajectoryState};
use crate::stats;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Samples per chunk; one ChaCha stream per chunk.
pub const CHUNK: u64 = 1 << 16;
/// Abort threshold on the fraction of dropped (overflowed) samples.
pub const MAX_OVERFLOW_FRACTION: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("overflow fraction {frac:.3e} exceeds budget {MAX_OVERFLOW_FRACTION:.0e} ({overflow}/{total})")]
    OverflowBudget { overflow: u64, total: u64, frac: f64 },
    #[error("observable has empty support")]
    EmptySupport,
    #[error("duplicate stream id {0} in parallel job")]
    SeedCollision(u64),
    #[error("time-reversal audit failed on trajectory {trajectory} at step {step}")]
    ReversalMismatch { trajectory: u64, step: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Execution context: run seed and optional worker override (`Some(1)` gives
/// the single-threaded determinism-audit path).
#[derive(Debug, Clone, Copy)]
pub struct Exec {
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Exec {
    pub fn new(seed: u64) -> Self {
        Exec { seed, workers: None }
    }
    pub fn with_workers(seed: u64, workers: usize) -> Self {
        Exec { seed, workers: Some(workers) }
    }

    fn run<T: Send, F: Fn() -> T + Send>(&self, f: F) -> T {
        match self.workers {
            None => f(),
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("thread pool")
                .install(f),
        }
    }
}

/// Sparse integer-pair histogram with an explicit overflow tally.
/// `total = Σ counts + overflow`; merging is entrywise addition.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct SparseHistogram {
    pub counts: BTreeMap<[i64; 2], u64>,
    pub total: u64,
    pub overflow: u64,
}

impl SparseHistogram {
    pub fn merge(mut self, other: &SparseHistogram) -> SparseHistogram {
        for (k, v) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += v;
        }
        self.total += other.total;
        self.overflow += other.overflow;
        self
    }

    pub fn kept(&self) -> u64 {
        self.total - self.overflow
    }

    pub fn count(&self, k: [i64; 2]) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Proportion estimate with 95% Wilson parameters for a single bin.
    pub fn estimate(&self, k: [i64; 2]) -> EstimateWithCI {
        proportion(self.count(k), self.kept())
    }

    /// Proportion estimate for a set of bins pooled together.
    pub fn estimate_window(&self, bins: &[[i64; 2]]) -> EstimateWithCI {
        let k: u64 = bins.iter().map(|b| self.count(*b)).sum();
        proportion(k, self.kept())
    }
}

fn proportion(k: u64, n: u64) -> EstimateWithCI {
    let (wc, wh) = stats::wilson(k, n, stats::Z95);
    EstimateWithCI {
        value: k as f64 / n as f64,
        sigma: stats::binomial_sigma(k, n),
        count: n,
        wilson: Some((wc, wh)),
    }
}

/// Point estimate with one standard error; proportion estimates also carry
/// their Wilson interval `(center, half_width)` at 95%.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EstimateWithCI {
    pub value: f64,
    pub sigma: f64,
    pub count: u64,
    pub wilson: Option<(f64, f64)>,
}

/// Mean estimate of a complex-valued estimator with a pooled standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub value: Complex64,
    pub sigma: f64,
    pub count: u64,
}

/// Finitely supported observable on `M = M̄ × Z²`, constant on each obstacle
/// component of each cell — hence of zero local variation, which is the class
/// the sharp mixing expansions apply to without approximation machinery.
#[derive(Debug, Clone, Default)]
pub struct CellObservable {
    pub support: BTreeMap<([i64; 2], usize), Complex64>,
}

impl CellObservable {
    pub fn new(entries: impl IntoIterator<Item = (([i64; 2], usize), Complex64)>) -> Self {
        CellObservable { support: entries.into_iter().collect() }
    }

    /// Indicator of one lattice cell: value 1 on every obstacle there.
    pub fn cell_indicator(cell: [i64; 2], n_obstacles: usize) -> Self {
        CellObservable {
            support: (0..n_obstacles)
                .map(|j| ((cell, j), Complex64::new(1.0, 0.0)))
                .collect(),
        }
    }

    pub fn eval(&self, cell: [i64; 2], obstacle: usize) -> Complex64 {
        self.support.get(&(cell, obstacle)).copied().unwrap_or_default()
    }

    /// `∫ φ dμ`: each obstacle component weighs `r_j / Σ r`.
    pub fn integral(&self, cfg: &ScattererConfig) -> Complex64 {
        let total: f64 = cfg.disks.iter().map(|d| d.radius).sum();
        self.support
            .iter()
            .map(|(&(_, j), v)| v * (cfg.disks[j].radius / total))
            .sum()
    }

    /// Collapse onto the quotient `M̄`: `φ̄(x̄) = Σ_N φ(N, x̄)`.
    pub fn reduced(&self, _cfg: &ScattererConfig, obstacle: usize) -> Complex64 {
        self.support
            .iter()
            .filter(|(&(_, j), _)| j == obstacle)
            .map(|(_, v)| v)
            .sum()
    }

    fn grouped_by_obstacle(&self, n_obstacles: usize) -> Vec<Vec<([i64; 2], Complex64)>> {
        let mut out = vec![Vec::new(); n_obstacles];
        for (&(cell, j), &v) in &self.support {
            out[j].push((cell, v));
        }
        out
    }
}

fn chunk_list(total: u64) -> Vec<(u64, u64)> {
    // (stream id, samples in chunk)
    let mut out = Vec::new();
    let mut done = 0;
    let mut stream = 0;
    while done < total {
        let len = CHUNK.min(total - done);
        out.push((stream, len));
        done += len;
        stream += 1;
    }
    out
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn kappa_key(dim: Dimension, kappa: [i64; 2]) -> [i64; 2] {
    match dim {
        Dimension::One => [kappa[0], 0],
        Dimension::Two => kappa,
    }
}

/// Histogram of single-step `κ` from stationary starts. Overflowed flights
/// are tallied separately; the run aborts if their fraction exceeds the
/// budget.
pub fn estimate_tail(
    cfg: &ScattererConfig,
    samples: u64,
    exec: Exec,
) -> Result<SparseHistogram, McError> {
    let chunks = chunk_list(samples);
    let partials: Vec<SparseHistogram> = exec.run(|| {
        chunks
            .par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut counts: HashMap<[i64; 2], u64> = HashMap::new();
                let mut overflow = 0;
                for _ in 0..len {
                    let p = geometry::sample_phase_point(cfg, &mut rng);
                    match geometry::flight_from(cfg, &p) {
                        Ok(ev) => {
                            *counts.entry(kappa_key(cfg.dimension, ev.kappa)).or_insert(0) += 1
                        }
                        Err(_) => overflow += 1,
                    }
                }
                SparseHistogram {
                    counts: counts.into_iter().collect(),
                    total: len,
                    overflow,
                }
            })
            .collect()
    });
    let merged = partials
        .into_iter()
        .fold(SparseHistogram::default(), |acc, h| acc.merge(&h));
    check_overflow(&merged)?;
    Ok(merged)
}

fn check_overflow(h: &SparseHistogram) -> Result<(), McError> {
    let frac = h.overflow as f64 / h.total.max(1) as f64;
    if frac > MAX_OVERFLOW_FRACTION {
        return Err(McError::OverflowBudget { overflow: h.overflow, total: h.total, frac });
    }
    Ok(())
}

/// Runs one stationary trajectory for `n` collisions; returns the start
/// point and final state, or `Err` if any flight overflowed.
fn run_trajectory(
    cfg: &ScattererConfig,
    rng: &mut ChaCha8Rng,
    n: u64,
    stream: (u64, u64),
) -> Result<(PhasePoint, TrajectoryState), GeometryError> {
    let start = geometry::sample_phase_point(cfg, rng);
    let mut state = TrajectoryState::new(start, stream);
    for _ in 0..n {
        geometry::billiard_step(cfg, &mut state)?;
    }
    Ok((start, state))
}

/// Result of an LLT run: the full `κ_n` histogram plus per-target proportion
/// estimates. One trajectory of length `n` serves every target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LltRun {
    pub n: u64,
    pub histogram: SparseHistogram,
    pub estimates: BTreeMap<[i64; 2], EstimateWithCI>,
}

/// Estimates `μ̄(κ_n = N)` for each requested target.
pub fn estimate_llt(
    cfg: &ScattererConfig,
    n: u64,
    targets: &[[i64; 2]],
    trajectories: u64,
    exec: Exec,
) -> Result<LltRun, McError> {
    let chunks = chunk_list(trajectories);
    let partials: Vec<SparseHistogram> = exec.run(|| {
        chunks
            .par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut counts: HashMap<[i64; 2], u64> = HashMap::new();
                let mut overflow = 0;
                for _ in 0..len {
                    match run_trajectory(cfg, &mut rng, n, (exec.seed, stream)) {
                        Ok((_, state)) => {
                            *counts
                                .entry(kappa_key(cfg.dimension, state.kappa_sum))
                                .or_insert(0) += 1
                        }
                        Err(_) => overflow += 1,
                    }
                }
                SparseHistogram { counts: counts.into_iter().collect(), total: len, overflow }
            })
            .collect()
    });
    let histogram = partials
        .into_iter()
        .fold(SparseHistogram::default(), |acc, h| acc.merge(&h));
    check_overflow(&histogram)?;
    let estimates = targets
        .iter()
        .map(|&t| (t, histogram.estimate(kappa_key(cfg.dimension, t))))
        .collect();
    Ok(LltRun { n, histogram, estimates })
}

/// Estimates the infinite-measure correlation
/// `∫_M φ·ψ∘Tⁿ dμ = Σ_{N₁} E_μ̄[φ_{N₁}(x̄)·ψ_{N₁+κ_n}(T̄ⁿx̄)]`
/// by summing over the finite support of `φ` along stationary trajectories.
pub fn estimate_mixing(
    cfg: &ScattererConfig,
    phi: &CellObservable,
    psi: &CellObservable,
    n: u64,
    trajectories: u64,
    exec: Exec,
) -> Result<MixingEstimate, McError> {
    if phi.support.is_empty() || psi.support.is_empty() {
        return Err(McError::EmptySupport);
    }
    let grouped = phi.grouped_by_obstacle(cfg.disks.len());
    let chunks = chunk_list(trajectories);
    let partials: Vec<(Complex64, f64, u64, u64)> = exec.run(|| {
        chunks
            .par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut sum = Complex64::default();
                let mut sumsq = 0.0f64;
                let mut overflow = 0u64;
                for _ in 0..len {
                    match run_trajectory(cfg, &mut rng, n, (exec.seed, stream)) {
                        Ok((start, state)) => {
                            let v = mixing_sample(
                                cfg,
                                &grouped,
                                psi,
                                start.obstacle,
                                state.kappa_sum,
                                state.current.obstacle,
                            );
                            sum += v;
                            sumsq += v.norm_sqr();
                        }
                        Err(_) => overflow += 1,
                    }
                }
                (sum, sumsq, len, overflow)
            })
            .collect()
    });
    finish_mixing(partials)
}

fn mixing_sample(
    cfg: &ScattererConfig,
    phi_grouped: &[Vec<([i64; 2], Complex64)>],
    psi: &CellObservable,
    start_obstacle: usize,
    kappa: [i64; 2],
    end_obstacle: usize,
) -> Complex64 {
    let kap = kappa_key(cfg.dimension, kappa);
    let mut v = Complex64::default();
    for &(cell, pv) in &phi_grouped[start_obstacle] {
        let shifted = [cell[0] + kap[0], cell[1] + kap[1]];
        v += pv * psi.eval(shifted, end_obstacle);
    }
    v
}

fn finish_mixing(partials: Vec<(Complex64, f64, u64, u64)>) -> Result<MixingEstimate, McError> {
    let mut sum = Complex64::default();
    let mut sumsq = 0.0;
    let mut total = 0;
    let mut overflow = 0;
    for (s, sq, t, o) in partials {
        sum += s;
        sumsq += sq;
        total += t;
        overflow += o;
    }
    let h = SparseHistogram { counts: BTreeMap::new(), total, overflow };
    check_overflow(&h)?;
    let kept = (total - overflow).max(1);
    let mean = sum / kept as f64;
    let var = (sumsq / kept as f64 - mean.norm_sqr()).max(0.0);
    Ok(MixingEstimate {
        value: mean,
        sigma: (var / kept as f64).sqrt(),
        count: kept,
    })
}

/// Estimates `∫_M φ·ψ∘(id−T)^m∘Tⁿ dμ` as the m-th backward finite difference
/// of the mixing estimator across horizons `n−m..=n`, reusing one trajectory
/// set (exact telescoping, no fresh noise per term).
pub fn coboundary_estimate(
    cfg: &ScattererConfig,
    phi: &CellObservable,
    psi: &CellObservable,
    n: u64,
    m: u32,
    trajectories: u64,
    exec: Exec,
) -> Result<MixingEstimate, McError> {
    assert!(m >= 1 && n > m as u64);
    if phi.support.is_empty() || psi.support.is_empty() {
        return Err(McError::EmptySupport);
    }
    let grouped = phi.grouped_by_obstacle(cfg.disks.len());
    // Binomial weights of (id−T)^m: Σ_r (−1)^r C(m,r) at horizon n−r.
    let weights: Vec<f64> = (0..=m)
        .map(|r| {
            let c = binomial(m as u64, r as u64) as f64;
            if r % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    let chunks = chunk_list(trajectories);
    let partials: Vec<(Complex64, f64, u64, u64)> = exec.run(|| {
        chunks
            .par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut sum = Complex64::default();
                let mut sumsq = 0.0f64;
                let mut overflow = 0u64;
                for _ in 0..len {
                    let start = geometry::sample_phase_point(cfg, &mut rng);
                    let mut state = TrajectoryState::new(start, (exec.seed, stream));
                    let mut ok = true;
                    let mut v = Complex64::default();
                    for step in 1..=n {
                        if geometry::billiard_step(cfg, &mut state).is_err() {
                            ok = false;
                            break;
                        }
                        if step + (m as u64) >= n {
                            let r = (n - step) as usize;
                            if r <= m as usize {
                                v += weights[r]
                                    * mixing_sample(
                                        cfg,
                                        &grouped,
                                        psi,
                                        start.obstacle,
                                        state.kappa_sum,
                                        state.current.obstacle,
                                    );
                            }
                        }
                    }
                    if ok {
                        sum += v;
                        sumsq += v.norm_sqr();
                    } else {
                        overflow += 1;
                    }
                }
                (sum, sumsq, len, overflow)
            })
            .collect()
    });
    finish_mixing(partials)
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Explicit parallel-merge surface: runs single-step tail sampling over the
/// given `(stream, samples)` jobs and merges. Duplicate stream ids are a
/// `SeedCollision`.
pub fn run_parallel(
    cfg: &ScattererConfig,
    jobs: &[(u64, u64)],
    exec: Exec,
) -> Result<SparseHistogram, McError> {
    let mut seen = std::collections::BTreeSet::new();
    for &(stream, _) in jobs {
        if !seen.insert(stream) {
            return Err(McError::SeedCollision(stream));
        }
    }
    let partials: Vec<SparseHistogram> = exec.run(|| {
        jobs.par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut counts: HashMap<[i64; 2], u64> = HashMap::new();
                let mut overflow = 0;
                for _ in 0..len {
                    let p = geometry::sample_phase_point(cfg, &mut rng);
                    match geometry::flight_from(cfg, &p) {
                        Ok(ev) => {
                            *counts.entry(kappa_key(cfg.dimension, ev.kappa)).or_insert(0) += 1
                        }
                        Err(_) => overflow += 1,
                    }
                }
                SparseHistogram { counts: counts.into_iter().collect(), total: len, overflow }
            })
            .collect()
    });
    Ok(partials
        .into_iter()
        .fold(SparseHistogram::default(), |acc, h| acc.merge(&h)))
}

// ---------------------------------------------------------------------------
// Audits.
// ---------------------------------------------------------------------------

/// Verifies the integer identity `κ_n∘τ∘T̄ⁿ = −κ_n` dynamically: evolve `n`
/// steps, reverse, evolve `n` steps again, and require the reversed `κ`
/// sequence to retrace the forward one negated, step by step.
///
/// `n` must stay within the floating-point shadowing horizon of the dynamics
/// (deviations grow by the expansion factor per collision, so exact integer
/// retracing is only guaranteed for a couple of dozen steps); the identity
/// itself is exact for the ideal dynamics at every `n`.
pub fn audit_time_reversal(
    cfg: &ScattererConfig,
    trajectories: u64,
    n: usize,
    seed: u64,
) -> Result<(), McError> {
    for t in 0..trajectories {
        let mut rng = stream_rng(seed, t);
        let start = geometry::sample_phase_point(cfg, &mut rng);
        let mut state = TrajectoryState::new(start, (seed, t));
        let mut kappas = Vec::with_capacity(n);
        for _ in 0..n {
            kappas.push(geometry::billiard_step(cfg, &mut state)?.kappa);
        }
        let mut rev = TrajectoryState::new(geometry::time_reverse(state.current), (seed, t));
        for step in 0..n {
            let ev = geometry::billiard_step(cfg, &mut rev)?;
            let expect = kappas[n - 1 - step];
            if ev.kappa != [-expect[0], -expect[1]] {
                return Err(McError::ReversalMismatch { trajectory: t, step });
            }
        }
        debug_assert_eq!(rev.kappa_sum, [-state.kappa_sum[0], -state.kappa_sum[1]]);
    }
    Ok(())
}

/// One-step measure-preservation audit: Kolmogorov–Smirnov statistics of the
/// pushforward of `μ̄`-samples against the invariant marginals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsReport {
    /// KS statistic of `sin φ` against uniform on (−1,1) after one step.
    pub d_sin_phi: f64,
    /// Per-obstacle KS statistics of the boundary angle against uniform.
    pub d_theta: Vec<f64>,
    /// Per-obstacle sample counts.
    pub theta_counts: Vec<usize>,
    pub samples: u64,
}

impl KsReport {
    /// True when every statistic passes at significance `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        let n_phi = self.samples as usize;
        if self.d_sin_phi > stats::ks_critical(n_phi, alpha) {
            return false;
        }
        self.d_theta
            .iter()
            .zip(&self.theta_counts)
            .all(|(&d, &c)| c == 0 || d <= stats::ks_critical(c, alpha))
    }
}

/// Pushes `samples` stationary points through one collision and compares the
/// resulting `(boundary_angle, sin φ)` marginals with the invariant laws.
pub fn one_step_ks(cfg: &ScattererConfig, samples: u64, exec: Exec) -> Result<KsReport, McError> {
    let chunks = chunk_list(samples);
    let partials: Vec<(Vec<Vec<f64>>, Vec<f64>)> = exec.run(|| {
        chunks
            .par_iter()
            .map(|&(stream, len)| {
                let mut rng = stream_rng(exec.seed, stream);
                let mut thetas = vec![Vec::new(); cfg.disks.len()];
                let mut sins = Vec::with_capacity(len as usize);
                for _ in 0..len {
                    let p = geometry::sample_phase_point(cfg, &mut rng);
                    if let Ok(ev) = geometry::flight_from(cfg, &p) {
                        thetas[ev.next.obstacle].push(ev.next.boundary_angle);
                        sins.push(ev.next.reflection_angle.sin());
                    }
                }
                (thetas, sins)
            })
            .collect()
    });
    let mut thetas = vec![Vec::new(); cfg.disks.len()];
    let mut sins = Vec::new();
    for (t, s) in partials {
        for (acc, mut part) in thetas.iter_mut().zip(t) {
            acc.append(&mut part);
        }
        sins.extend(s);
    }
    let kept = sins.len() as u64;
    let d_sin_phi = stats::ks_statistic(&mut sins, |x| (x + 1.0) / 2.0);
    let mut d_theta = Vec::new();
    let mut theta_counts = Vec::new();
    for list in &mut thetas {
        theta_counts.push(list.len());
        if list.is_empty() {
            d_theta.push(0.0);
        } else {
            d_theta.push(stats::ks_statistic(list, |x| x / std::f64::consts::TAU));
        }
    }
    Ok(KsReport { d_sin_phi, d_theta, theta_counts, samples: kept })
}
