//! Exact i.i.d. surrogate walk: a mean-zero lattice step law carrying the
//! corridor `c/N³` tails, exact distributions of `S_n` by
//! characteristic-function exponentiation on an FFT grid, and the scans that
//! verify the `Ψ(t)` expansion and every predictor without dynamical noise.
//!
//! Two engines produce `P(S_n = N)`:
//!
//! * [`exact_distribution`] materializes a full periodized window (the FFT
//!   grid), suitable for windows that fit in memory;
//! * [`PointScanner`] evaluates single lattice points on arbitrarily large
//!   grids by summing the characteristic function only where `φ(t)ⁿ` is
//!   non-negligible, with a certified Lipschitz envelope bounding the
//!   discarded part. Differences (`second_diff`, `coboundary`) are formed
//!   inside the spectral sum, where they are numerically stable.
//!
//! Both engines share the same aliasing semantics: values are exact up to the
//! reported `wrap_bound` (a Chebyshev bound on the mass outside the window)
//! plus, for the scanner, a separately reported truncation bound.

use crate::corridors::SigmaMatrix;
use crate::geometry::Dimension;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Required bound on aliased (wrapped) probability mass.
pub const MAX_WRAP: f64 = 1e-8;
/// Largest dense grid (total entries) `exact_distribution` will materialize.
pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("tail mass {0} is not below 1")]
    MassOverflow(f64),
    #[error("direction {0:?} is not a canonical prime vector")]
    NonPrimeDirection([i64; 2]),
    #[error("tail directions overlap after canonicalization")]
    OverlappingTails,
    #[error("cutoff must be at least 8 (got {0})")]
    BadCutoff(u32),
    #[error("tail constants must be positive")]
    BadConstant,
    #[error("core pmf must be symmetric, nonnegative and disjoint from the tail rays")]
    BadCore,
    #[error("window {window} gives wrap bound {bound:.3e} > {MAX_WRAP:.0e}")]
    WrapBoundExceeded { window: usize, bound: f64 },
    #[error("window must be a power of two (got {0})")]
    NotPowerOfTwo(usize),
    #[error("dense grid of {0} entries exceeds the memory guard")]
    GridTooLarge(usize),
    #[error("operation only implemented for d = 1 laws")]
    UnsupportedDimension,
}

/// Mean-zero symmetric lattice step law with exact `c_w/N³` tails along the
/// rays `±Nw` up to `cutoff`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepLaw {
    pub dimension: Dimension,
    /// Sorted support: `(site, probability)`.
    pub entries: Vec<([i64; 2], f64)>,
    pub tail_spec: Vec<([i64; 2], f64)>,
    pub cutoff: u32,
}

fn is_canonical_prime(w: [i64; 2]) -> bool {
    if w == [0, 0] {
        return false;
    }
    let g = gcd(w[0].unsigned_abs(), w[1].unsigned_abs());
    if g != 1 {
        return false;
    }
    if w[0] != 0 {
        w[0] > 0
    } else {
        w[1] > 0
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Builds a step law from per-direction tail constants. Mass `c_w/N³` goes on
/// `±Nw` for `1 ≤ N ≤ cutoff`; whatever remains sits at the origin or is
/// spread proportionally over the optional symmetric `core`. The law is
/// mean-zero by symmetry, with no floating re-centering.
pub fn build_step_law(
    dimension: Dimension,
    tail_spec: &[([i64; 2], f64)],
    cutoff: u32,
    core: Option<&[([i64; 2], f64)]>,
) -> Result<StepLaw, OracleError> {
    if cutoff < 8 {
        return Err(OracleError::BadCutoff(cutoff));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(w, c) in tail_spec {
        if !(c > 0.0) {
            return Err(OracleError::BadConstant);
        }
        if !is_canonical_prime(w) {
            return Err(OracleError::NonPrimeDirection(w));
        }
        if dimension == Dimension::One && w != [1, 0] {
            return Err(OracleError::NonPrimeDirection(w));
        }
        if !seen.insert(w) {
            return Err(OracleError::OverlappingTails);
        }
    }
    let mut map: std::collections::BTreeMap<[i64; 2], f64> = std::collections::BTreeMap::new();
    let mut tail_mass = 0.0;
    for &(w, c) in tail_spec {
        for n in 1..=cutoff as i64 {
            let p = c / (n as f64).powi(3);
            for site in [[n * w[0], n * w[1]], [-n * w[0], -n * w[1]]] {
                if map.insert(site, p).is_some() {
                    return Err(OracleError::OverlappingTails);
                }
                tail_mass += p;
            }
        }
    }
    if tail_mass >= 1.0 {
        return Err(OracleError::MassOverflow(tail_mass));
    }
    let rest = 1.0 - tail_mass;
    match core {
        None => {
            map.insert([0, 0], rest);
        }
        Some(core) => {
            let total: f64 = core.iter().map(|&(_, v)| v).sum();
            if !(total > 0.0) {
                return Err(OracleError::BadCore);
            }
            let lookup: std::collections::BTreeMap<[i64; 2], f64> = core.iter().copied().collect();
            for &(site, v) in core {
                if v < 0.0 || map.contains_key(&site) {
                    return Err(OracleError::BadCore);
                }
                let mirrored = lookup.get(&[-site[0], -site[1]]).copied().unwrap_or(-1.0);
                if (mirrored - v).abs() > 1e-15 * (1.0 + v.abs()) {
                    return Err(OracleError::BadCore);
                }
                map.insert(site, rest * v / total);
            }
        }
    }
    Ok(StepLaw {
        dimension,
        entries: map.into_iter().collect(),
        tail_spec: tail_spec.to_vec(),
        cutoff,
    })
}

impl StepLaw {
    pub fn pmf(&self, site: [i64; 2]) -> f64 {
        self.entries
            .binary_search_by(|e| e.0.cmp(&site))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for &(k, p) in &self.entries {
            m[0] += k[0] as f64 * p;
            m[1] += k[1] as f64 * p;
        }
        m
    }

    /// Per-coordinate second moments (finite: the support is truncated).
    pub fn second_moment(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for &(k, p) in &self.entries {
            m[0] += (k[0] * k[0]) as f64 * p;
            m[1] += (k[1] * k[1]) as f64 * p;
        }
        m
    }

    /// The diffusion matrix implied by the tail constants:
    /// `Σ² t·t = ½ Σ_{(L,w) signed} c_w (t·w)² = Σ_{w canonical} c_w (t·w)²`.
    pub fn sigma2_from_tail(&self) -> SigmaMatrix {
        let mut m = [[0.0f64; 2]; 2];
        for &(w, c) in &self.tail_spec {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += c * w[i] as f64 * w[j] as f64;
                }
            }
        }
        SigmaMatrix { entries: m, dimension: self.dimension }
    }

    /// Cumulative table for sampling.
    pub fn sampler(&self) -> StepSampler {
        let mut cum = Vec::with_capacity(self.entries.len());
        let mut acc = 0.0;
        for &(_, p) in &self.entries {
            acc += p;
            cum.push(acc);
        }
        StepSampler { law: self.clone(), cum }
    }
}

/// Inverse-CDF sampler over the law's finite support.
#[derive(Debug, Clone)]
pub struct StepSampler {
    law: StepLaw,
    cum: Vec<f64>,
}

impl StepSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [i64; 2] {
        let u: f64 = rng.gen();
        let i = self.cum.partition_point(|&c| c < u).min(self.cum.len() - 1);
        self.law.entries[i].0
    }
}

/// `Ψ(t) = Σ_k (1 − e^{i t·k}) p_k`; real and nonnegative for symmetric laws.
pub fn psi_eval(law: &StepLaw, t: [f64; 2]) -> Complex64 {
    let mut acc = Complex64::default();
    for &(k, p) in &law.entries {
        let arg = t[0] * k[0] as f64 + t[1] * k[1] as f64;
        acc += p * (Complex64::new(1.0, 0.0) - Complex64::new(arg.cos(), arg.sin()));
    }
    acc
}

/// `λ_t = Σ_k e^{i t·k} p_k`, the characteristic function (so `1 − λ_t =
/// Ψ(t)` identically for i.i.d. steps).
pub fn lambda_eval(law: &StepLaw, t: [f64; 2]) -> Complex64 {
    Complex64::new(1.0, 0.0) - psi_eval(law, t)
}

/// Chebyshev bound on the probability mass wrapped by a periodized window of
/// the given side (per-coordinate union bound on `|S_n| ≥ side/2`).
pub fn wrap_bound(law: &StepLaw, n: u64, side: usize) -> f64 {
    let m2 = law.second_moment();
    let half = side as f64 / 2.0;
    let per = |m: f64| n as f64 * m / (half * half);
    match law.dimension {
        Dimension::One => per(m2[0]),
        Dimension::Two => per(m2[0]) + per(m2[1]),
    }
}

/// Smallest power-of-two window with Chebyshev wrap bound at most `MAX_WRAP`.
pub fn auto_window(law: &StepLaw, n: u64) -> usize {
    let mut side = 16usize;
    while wrap_bound(law, n, side) > MAX_WRAP {
        side *= 2;
    }
    side
}

/// Exact distribution of `S_n` over a periodized window.
#[derive(Debug, Clone)]
pub struct ConvolutionGrid {
    pub side: usize,
    pub dimension: Dimension,
    /// Row-major `side^d` array of `P(S_n ≡ N mod side)`.
    pub values: Vec<f64>,
    pub wrap_bound: f64,
}

impl ConvolutionGrid {
    fn index(&self, n: [i64; 2]) -> usize {
        let s = self.side as i64;
        let ix = n[0].rem_euclid(s) as usize;
        match self.dimension {
            Dimension::One => ix,
            Dimension::Two => ix * self.side + n[1].rem_euclid(s) as usize,
        }
    }

    pub fn value(&self, n: [i64; 2]) -> f64 {
        self.values[self.index(n)]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn validate_window(law: &StepLaw, n: u64, window: usize) -> Result<f64, OracleError> {
    if !window.is_power_of_two() {
        return Err(OracleError::NotPowerOfTwo(window));
    }
    let bound = wrap_bound(law, n, window);
    if bound > MAX_WRAP {
        return Err(OracleError::WrapBoundExceeded { window, bound });
    }
    Ok(bound)
}

/// Exact `P(S_n = N)` for all `N` in the window, by raising the forward
/// transform of the step pmf to the n-th power pointwise and transforming
/// back. Values are clipped at `−1e−15` from below.
pub fn exact_distribution(
    law: &StepLaw,
    n: u64,
    window: usize,
) -> Result<ConvolutionGrid, OracleError> {
    let bound = validate_window(law, n, window)?;
    let entries = match law.dimension {
        Dimension::One => window,
        Dimension::Two => window * window,
    };
    if entries > MAX_DENSE_ENTRIES {
        return Err(OracleError::GridTooLarge(entries));
    }
    let mut buf = vec![Complex64::default(); entries];
    let s = window as i64;
    for &(k, p) in &law.entries {
        let ix = k[0].rem_euclid(s) as usize;
        let idx = match law.dimension {
            Dimension::One => ix,
            Dimension::Two => ix * window + k[1].rem_euclid(s) as usize,
        };
        buf[idx] += p;
    }
    match law.dimension {
        Dimension::One => fft_1d(&mut buf, false),
        Dimension::Two => fft_2d(&mut buf, window, false),
    }
    for v in buf.iter_mut() {
        *v = pow_complex(*v, n);
    }
    match law.dimension {
        Dimension::One => fft_1d(&mut buf, true),
        Dimension::Two => fft_2d(&mut buf, window, true),
    }
    let scale = 1.0 / entries as f64;
    let values = buf
        .iter()
        .map(|v| {
            let x = v.re * scale;
            debug_assert!(x > -1e-12, "negative probability {x}");
            x.max(0.0)
        })
        .collect();
    Ok(ConvolutionGrid { side: window, dimension: law.dimension, values, wrap_bound: bound })
}

/// Same distribution computed by binary-exponentiation squaring of the grid
/// itself (a numerically distinct route used for cross-checks).
pub fn distribution_by_squaring(
    law: &StepLaw,
    n: u64,
    window: usize,
) -> Result<ConvolutionGrid, OracleError> {
    let bound = validate_window(law, n, window)?;
    if law.dimension != Dimension::One {
        return Err(OracleError::UnsupportedDimension);
    }
    let mut base = vec![Complex64::default(); window];
    let s = window as i64;
    for &(k, p) in &law.entries {
        base[k[0].rem_euclid(s) as usize] += p;
    }
    // result starts as δ_0
    let mut result = vec![Complex64::default(); window];
    result[0] = Complex64::new(1.0, 0.0);
    let mut exp = n;
    while exp > 0 {
        if exp & 1 == 1 {
            circular_convolve(&mut result, &base);
        }
        exp >>= 1;
        if exp > 0 {
            let copy = base.clone();
            circular_convolve(&mut base, &copy);
        }
    }
    let values = result.iter().map(|v| v.re.max(0.0)).collect();
    Ok(ConvolutionGrid { side: window, dimension: law.dimension, values, wrap_bound: bound })
}

fn circular_convolve(a: &mut [Complex64], b: &[Complex64]) {
    let mut bb = b.to_vec();
    fft_1d(a, false);
    fft_1d(&mut bb, false);
    for (x, y) in a.iter_mut().zip(bb.iter()) {
        *x *= y;
    }
    fft_1d(a, true);
    let scale = 1.0 / a.len() as f64;
    for x in a.iter_mut() {
        *x *= scale;
    }
}

fn fft_1d(buf: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

fn fft_2d(buf: &mut [Complex64], side: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(side)
    } else {
        planner.plan_fft_forward(side)
    };
    for row in buf.chunks_exact_mut(side) {
        fft.process(row);
    }
    // transpose, transform rows again, transpose back
    transpose(buf, side);
    for row in buf.chunks_exact_mut(side) {
        fft.process(row);
    }
    transpose(buf, side);
}

fn transpose(buf: &mut [Complex64], side: usize) {
    for i in 0..side {
        for j in (i + 1)..side {
            buf.swap(i * side + j, j * side + i);
        }
    }
}

fn pow_complex(z: Complex64, mut n: u64) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Large-window point evaluation (d = 1).
// ---------------------------------------------------------------------------

/// The step law's characteristic function as a cosine series, with the exact
/// Lipschitz constant and a certified envelope of `|φ|` away from 0.
struct CosSeries {
    atom: f64,
    /// `(k, 2 p_k)` over the positive support.
    terms: Vec<(i64, f64)>,
    /// Envelope grid step and running sup of `|φ|` on `[i·h, π]`.
    env_step: f64,
    env_sup: Vec<f64>,
}

impl CosSeries {
    fn new(law: &StepLaw) -> Result<Self, OracleError> {
        if law.dimension != Dimension::One {
            return Err(OracleError::UnsupportedDimension);
        }
        let atom = law.pmf([0, 0]);
        let mut terms = Vec::new();
        let mut lip = 0.0;
        for &(k, p) in &law.entries {
            if k[0] > 0 {
                terms.push((k[0], 2.0 * p));
            }
            lip += k[0].unsigned_abs() as f64 * p;
        }
        // Certified envelope: dense scan plus Lipschitz slack.
        let env_step = 2e-4;
        let count = (std::f64::consts::PI / env_step).ceil() as usize + 1;
        let mut vals = eval_series_grid(atom, &terms, 0.0, env_step, count);
        for v in vals.iter_mut() {
            *v = v.abs();
        }
        let slack = lip * env_step / 2.0;
        let mut env_sup = vals;
        for v in env_sup.iter_mut() {
            *v += slack;
        }
        for i in (0..env_sup.len() - 1).rev() {
            env_sup[i] = env_sup[i].max(env_sup[i + 1]);
        }
        Ok(CosSeries { atom, terms, env_step, env_sup })
    }

    /// Certified `sup |φ|` over `[t, π]`.
    fn sup_from(&self, t: f64) -> f64 {
        let i = (t / self.env_step).floor() as usize;
        self.env_sup
            .get(i.min(self.env_sup.len() - 1))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Evaluates `atom + Σ w_k cos(k t)` on the grid `t = t0 + i·step` with
/// per-term rotation recurrences (renormalized every 1024 steps).
fn eval_series_grid(atom: f64, terms: &[(i64, f64)], t0: f64, step: f64, count: usize) -> Vec<f64> {
    let mut out = vec![atom; count];
    for &(k, w) in terms {
        let kf = k as f64;
        let delta = step * kf;
        let (ds, dc) = delta.sin_cos();
        let mut i = 0;
        while i < count {
            let block = (i + 1024).min(count);
            let a0 = t0 * kf + i as f64 * delta;
            let (mut s, mut c) = a0.sin_cos();
            for slot in &mut out[i..block] {
                *slot += w * c;
                let c2 = c * dc - s * ds;
                s = s * dc + c * ds;
                c = c2;
            }
            i = block;
        }
    }
    out
}

/// Point evaluator for `P(S_n = N)` on a power-of-two grid too large to
/// materialize. `M` is chosen per `n` by the Chebyshev rule; the spectral sum
/// runs only over the certified-significant part of the grid and the
/// remainder is bounded by `M · supⁿ`.
pub struct PointScanner {
    series: CosSeries,
    law_m2: f64,
}

/// One evaluation's accuracy report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanBounds {
    pub window: usize,
    pub wrap_bound: f64,
    pub truncation_bound: f64,
}

impl PointScanner {
    pub fn new(law: &StepLaw) -> Result<Self, OracleError> {
        Ok(PointScanner { series: CosSeries::new(law)?, law_m2: law.second_moment()[0] })
    }

    fn window_for(&self, n: u64) -> usize {
        let mut side = 16usize;
        while (n as f64) * self.law_m2 / (side as f64 / 2.0).powi(2) > MAX_WRAP {
            side *= 2;
        }
        side
    }

    /// Spectrum values `φ(2πj/M)` for `j = 0..=j_max` plus the certified
    /// bound on `sup |φ|` beyond.
    fn significant(&self, n: u64, m: usize) -> (Vec<f64>, usize, f64) {
        // Beyond the significant range we need 2·supⁿ ≤ 1e−13.
        let need = ((1e-13f64 / 2.0).ln() / n as f64).exp();
        let step = TAU / m as f64;
        let mut t_star = std::f64::consts::PI;
        let mut lo = 0.0f64;
        // binary search the envelope for the first certified-negligible t
        for _ in 0..60 {
            let mid = (lo + t_star) / 2.0;
            if self.series.sup_from(mid) <= need {
                t_star = mid;
            } else {
                lo = mid;
            }
        }
        let j_max = ((t_star / step).ceil() as usize).min(m / 2);
        let spec = eval_series_grid(self.series.atom, &self.series.terms, 0.0, step, j_max + 1);
        let sup_tail = if j_max >= m / 2 { 0.0 } else { self.series.sup_from(t_star) };
        (spec, j_max, sup_tail)
    }

    /// `P(S_n = N)` (periodized at the automatic window).
    pub fn point(&self, n: u64, target: i64) -> (f64, ScanBounds) {
        self.sum(n, |phi, j, m| {
            phi.powi(n as i32) * (TAU * j as f64 * target as f64 / m as f64).cos()
        })
    }

    /// `P(S_n = N) + P(S_n = −N) − 2 P(S_n = 0)`, formed inside the spectral
    /// sum where the cancellation is exact.
    pub fn second_diff(&self, n: u64, target: i64) -> (f64, ScanBounds) {
        self.sum(n, |phi, j, m| {
            phi.powi(n as i32) * 2.0 * ((TAU * j as f64 * target as f64 / m as f64).cos() - 1.0)
        })
    }

    /// `Σ_r (−1)^r C(m,r) P(S_{n−r} = 0) = (1/M) Σ_j φⁿ⁻ᵐ (φ−1)ᵐ`.
    pub fn coboundary(&self, n: u64, m_order: u32) -> (f64, ScanBounds) {
        self.sum(n, |phi, _j, _m| {
            phi.powi((n - m_order as u64) as i32) * (phi - 1.0).powi(m_order as i32)
        })
    }

    fn sum<F: Fn(f64, usize, usize) -> f64>(&self, n: u64, kernel: F) -> (f64, ScanBounds) {
        let m = self.window_for(n);
        let (spec, _j_max, sup_tail) = self.significant(n, m);
        let mut acc = kernel(spec[0], 0, m);
        for (j, &phi) in spec.iter().enumerate().skip(1) {
            let w = if j == m / 2 { 1.0 } else { 2.0 };
            acc += w * kernel(phi, j, m);
        }
        // Discarded grid points contribute at most (Σ weights / M)·supⁿ ≤ 2·supⁿ.
        let trunc = 2.0 * sup_tail.powi(n as i32).abs();
        (
            acc / m as f64,
            ScanBounds {
                window: m,
                wrap_bound: (n as f64) * self.law_m2 / (m as f64 / 2.0).powi(2),
                truncation_bound: trunc,
            },
        )
    }
}

// ---------------------------------------------------------------------------
// Residual scans against the predictors.
// ---------------------------------------------------------------------------

/// One row of the LLT residual scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: u64,
    pub p0: f64,
    /// `|a_n^d p0 − I₀(0)|` — residual of the bare leading term.
    pub r0: f64,
    /// Residual of the loglog-corrected term `I₀(0)(1 − (d/2)·lll/ll)`.
    pub r1: f64,
    pub r1_log: f64,
}

/// Scans `P(S_n = 0)` against the leading and corrected LLT forms, with the
/// diffusion matrix derived from the law's tail constants.
pub fn llt_residual_scan(law: &StepLaw, n_list: &[u64]) -> Result<Vec<ResidualRow>, OracleError> {
    let scanner = PointScanner::new(law)?;
    let sigma2 = law.sigma2_from_tail();
    let d = law.dimension.as_usize() as f64;
    let i0_0 = 1.0 / ((2.0 * std::f64::consts::PI).powf(d) * sigma2.det()).sqrt();
    let mut rows = Vec::new();
    for &n in n_list {
        let (p0, _) = scanner.point(n, 0);
        let ll = (n as f64).ln();
        let lll = ll.ln();
        let an_d = (n as f64 * ll).powf(d / 2.0);
        let scaled = an_d * p0;
        let r0 = (scaled - i0_0).abs();
        let r1 = (scaled - i0_0 * (1.0 - d / 2.0 * lll / ll)).abs();
        rows.push(ResidualRow { n, p0, r0, r1, r1_log: r1 * ll });
    }
    Ok(rows)
}

/// Exact `P(S_n = N) + P(S_n = −N) − 2P(S_n = 0)`.
pub fn exact_second_difference(law: &StepLaw, n: u64, target: i64) -> Result<f64, OracleError> {
    Ok(PointScanner::new(law)?.second_diff(n, target).0)
}

/// Exact m-th backward finite difference of `n ↦ P(S_n = 0)`.
pub fn exact_coboundary(law: &StepLaw, n: u64, m: u32) -> Result<f64, OracleError> {
    assert!(m >= 1 && n >= m as u64 + 16, "need n - m >= 16");
    Ok(PointScanner::new(law)?.coboundary(n, m).0)
}
