//! Corridor enumeration against a brute-force lattice-patch oracle, plus the
//! analytic constants (Σ², tail table) on hand-evaluable configurations.

use lorentz::corridors::{
    check_infinite_horizon, enumerate_corridors, prime_directions, sigma_squared,
    sigma_squared_pairs, tail_table, CorridorError, SigmaMatrix,
};
use lorentz::geometry::{build_config, Dimension, Disk, ScattererConfig};

const S_RHO04: f64 = 0.015915494309189534; // (1−2ρ)²/(2πρ) at ρ = 0.4 = 1/(20π)

fn square_lattice(r: f64) -> ScattererConfig {
    build_config(vec![Disk::new(0.0, 0.0, r)], Dimension::Two).unwrap()
}

/// Brute-force corridor search: project every disk translate of a 17×17
/// lattice patch onto the perpendicular of each direction and look for gaps
/// in the central window, where the patch shadows coincide with the infinite
/// lattice's. Entirely independent of the modular-arithmetic implementation.
fn patch_oracle(cfg: &ScattererConfig, max_direction: i64) -> Vec<([i64; 2], Vec<f64>)> {
    let mut found = Vec::new();
    for w in prime_directions(max_direction) {
        let wn = ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt();
        let period = 1.0 / wn;
        let perp = [-w[1] as f64 / wn, w[0] as f64 / wn];
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for d in &cfg.disks {
            for cx in -8i64..=8 {
                for cy in -8i64..=8 {
                    let p = (d.center[0] + cx as f64) * perp[0] + (d.center[1] + cy as f64) * perp[1];
                    intervals.push((p - d.radius, p + d.radius));
                }
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut gaps = Vec::new();
        let mut cover_end = f64::NEG_INFINITY;
        for &(s, e) in &intervals {
            if s > cover_end + 1e-12 && cover_end.is_finite() {
                // keep gaps whose midpoint falls in the central window
                let mid = (cover_end + s) / 2.0;
                if mid.abs() <= 0.5 {
                    gaps.push(s - cover_end);
                }
            }
            cover_end = cover_end.max(e);
        }
        // deduplicate widths repeated across periods
        gaps.sort_by(|a, b| a.total_cmp(b));
        let mut unique: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for g in gaps {
            match unique.last() {
                Some(&u) if (g - u).abs() < 1e-9 => *counts.last_mut().unwrap() += 1,
                _ => {
                    unique.push(g);
                    counts.push(1);
                }
            }
        }
        // classes per period: number of repeats / periods visible ≈ distinct offsets
        let n_periods = (1.0 / period).max(1.0);
        let per_period: Vec<f64> = unique
            .iter()
            .zip(&counts)
            .flat_map(|(&g, &c)| {
                let reps = ((c as f64) / n_periods).round().max(1.0) as usize;
                std::iter::repeat(g).take(reps)
            })
            .collect();
        if !per_period.is_empty() {
            found.push((w, per_period));
        }
    }
    found
}

#[test]
fn rho04_has_exactly_the_axis_corridors() {
    let cfg = square_lattice(0.4);
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    assert_eq!(cs.len(), 2);
    let mut dirs: Vec<[i64; 2]> = cs.iter().map(|c| c.direction).collect();
    dirs.sort();
    assert_eq!(dirs, vec![[0, 1], [1, 0]]);
    for c in &cs {
        assert!((c.width - 0.2).abs() < 1e-12);
        assert_eq!(c.n_c(), 2);
    }
    // oracle confirms: the only directions with gaps are the axes
    let oracle = patch_oracle(&cfg, 8);
    let oracle_dirs: Vec<[i64; 2]> = oracle.iter().map(|x| x.0).collect();
    assert_eq!(oracle_dirs, vec![[0, 1], [1, 0]]);
    for (_, widths) in &oracle {
        for w in widths {
            assert!((w - 0.2).abs() < 1e-9);
        }
    }
}

#[test]
fn rho045_narrow_corridors() {
    let cfg = square_lattice(0.45);
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    assert_eq!(cs.len(), 2);
    for c in &cs {
        assert!((c.width - 0.1).abs() < 1e-12);
        assert_eq!(c.n_c(), 2);
    }
}

#[test]
fn rho025_adds_diagonals() {
    let cfg = square_lattice(0.25);
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    assert_eq!(cs.len(), 4);
    let expected_diag = std::f64::consts::FRAC_1_SQRT_2 - 0.5;
    for c in &cs {
        match c.direction {
            [1, 0] | [0, 1] => assert!((c.width - 0.5).abs() < 1e-12),
            [1, 1] | [1, -1] => assert!((c.width - expected_diag).abs() < 1e-12),
            other => panic!("unexpected corridor direction {other:?}"),
        }
        assert_eq!(c.n_c(), 2);
    }
    let oracle = patch_oracle(&cfg, 8);
    let oracle_dirs: Vec<[i64; 2]> = oracle.iter().map(|x| x.0).collect();
    assert_eq!(oracle_dirs, vec![[0, 1], [1, -1], [1, 0], [1, 1]]);
}

#[test]
fn width_scaling_is_exact() {
    for rho in [0.26, 0.3, 0.35, 0.4, 0.45, 0.49] {
        let cfg = square_lattice(rho);
        let cs = enumerate_corridors(&cfg, 8).unwrap();
        for c in &cs {
            // axis corridors scale as 1 − 2ρ; diagonals (present for
            // ρ < 1/(2√2)) as 1/√2 − 2ρ
            let expect = match c.direction {
                [1, 0] | [0, 1] => 1.0 - 2.0 * rho,
                _ => std::f64::consts::FRAC_1_SQRT_2 - 2.0 * rho,
            };
            assert!((c.width - expect).abs() < 1e-12, "rho={rho} dir={:?}", c.direction);
        }
    }
}

#[test]
fn coefficient_sums_are_one() {
    for cfg in [square_lattice(0.4), square_lattice(0.25), staggered()] {
        for c in enumerate_corridors(&cfg, 8).unwrap() {
            for s in c.coefficient_sums() {
                assert!((s - 1.0).abs() < 1e-12);
            }
            for &(_, _, a) in &c.coefficients {
                assert!(a > 0.0 && a <= 1.0 + 1e-15);
            }
        }
    }
}

#[test]
fn sigma_matches_hand_value() {
    let cfg = square_lattice(0.4);
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    let s = sigma_squared(&cs, cfg.boundary_length, Dimension::Two).unwrap();
    assert!((s.entries[0][0] - S_RHO04).abs() < 1e-12);
    assert!((s.entries[1][1] - S_RHO04).abs() < 1e-12);
    assert!(s.entries[0][1].abs() < 1e-15);
    assert!(s.is_nondegenerate());
    // (A,w)-pair form agrees with the corridor form
    let sp = sigma_squared_pairs(&cs, cfg.boundary_length, Dimension::Two).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((s.entries[i][j] - sp.entries[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn sigma_tubular_quotient() {
    let cfg = build_config(vec![Disk::new(0.0, 0.0, 0.4)], Dimension::One).unwrap();
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    let s = sigma_squared(&cs, cfg.boundary_length, Dimension::One).unwrap();
    // only the horizontal corridor contributes to a₁₁
    assert!((s.entries[0][0] - S_RHO04).abs() < 1e-12);
    assert!((s.det() - S_RHO04).abs() < 1e-12);
}

#[test]
fn single_direction_is_degenerate() {
    let cfg = square_lattice(0.4);
    let cs: Vec<_> = enumerate_corridors(&cfg, 8)
        .unwrap()
        .into_iter()
        .filter(|c| c.direction == [1, 0])
        .collect();
    let s = sigma_squared(&cs, cfg.boundary_length, Dimension::Two).unwrap();
    assert!(!s.is_nondegenerate());
    assert_eq!(s.det(), 0.0);
}

#[test]
fn sigma_errors_on_empty() {
    assert!(matches!(
        sigma_squared(&[], 1.0, Dimension::Two),
        Err(CorridorError::NoCorridor(_))
    ));
}

#[test]
fn tail_table_rho04() {
    let cfg = square_lattice(0.4);
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    let table = tail_table(&cfg, &cs);
    // For w = (1,0): entries L = (0,1) and (0,−1), each with 𝔞 = 1.
    let c_unit = 0.04 / (2.0 * cfg.boundary_length);
    let mut ls: Vec<[i64; 2]> = table
        .entries
        .iter()
        .filter(|e| e.w == [1, 0])
        .map(|e| e.l)
        .collect();
    ls.sort();
    assert_eq!(ls, vec![[0, -1], [0, 1]]);
    for e in table.entries.iter().filter(|e| e.w == [1, 0]) {
        assert!((e.c - c_unit).abs() < 1e-15);
        // slab constraint: L·w ∈ [0, |w|²)
        let dot = e.l[0] * e.w[0] + e.l[1] * e.w[1];
        assert!(dot >= 0 && dot < e.w[0] * e.w[0] + e.w[1] * e.w[1]);
    }
    assert!((table.direction_sum([1, 0]) - S_RHO04).abs() < 1e-12);
    assert!((table.direction_sum([-1, 0]) - S_RHO04).abs() < 1e-12);
    assert!((table.direction_sum([0, 1]) - S_RHO04).abs() < 1e-12);
}

#[test]
fn tail_table_direction_sums_match_closed_form() {
    for cfg in [square_lattice(0.25), staggered()] {
        let cs = enumerate_corridors(&cfg, 8).unwrap();
        let table = tail_table(&cfg, &cs);
        for c in &cs {
            for sign in [1i64, -1] {
                let w = [sign * c.direction[0], sign * c.direction[1]];
                // Σ_L c_{L,w} over corridors of this direction:
                let expect: f64 = cs
                    .iter()
                    .filter(|k| k.direction == c.direction)
                    .map(|k| {
                        k.n_c() as f64 * k.width * k.width
                            / (2.0
                                * cfg.boundary_length
                                * ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt())
                    })
                    .sum();
                assert!(
                    (table.direction_sum(w) - expect).abs() < 1e-12,
                    "w={w:?} got {} want {expect}",
                    table.direction_sum(w)
                );
            }
        }
    }
}

/// Two staggered disks per cell: two corridor classes per axis direction and
/// four-class diagonal corridors with split coefficients.
fn staggered() -> ScattererConfig {
    build_config(
        vec![Disk::new(0.0, 0.0, 0.2), Disk::new(0.5, 0.5, 0.2)],
        Dimension::Two,
    )
    .unwrap()
}

#[test]
fn staggered_lattice_structure() {
    let cfg = staggered();
    let cs = enumerate_corridors(&cfg, 8).unwrap();
    // two gaps per axis direction, one per diagonal
    let count = |d: [i64; 2]| cs.iter().filter(|c| c.direction == d).count();
    assert_eq!(count([1, 0]), 2);
    assert_eq!(count([0, 1]), 2);
    assert_eq!(count([1, 1]), 1);
    assert_eq!(count([1, -1]), 1);
    assert_eq!(cs.len(), 6);
    let diag_width = std::f64::consts::FRAC_1_SQRT_2 - 0.4;
    for c in &cs {
        match c.direction {
            [1, 0] | [0, 1] => {
                assert!((c.width - 0.1).abs() < 1e-12);
                assert_eq!(c.n_c(), 2);
            }
            _ => {
                assert!((c.width - diag_width).abs() < 1e-12);
                // both disks touch each diagonal line: 2 classes per line
                assert_eq!(c.n_c(), 4);
                assert_eq!(c.lower.len(), 2);
                // split coefficients: the two classes sit half a period apart
                for &(_, _, a) in &c.coefficients {
                    assert!((a - 0.5).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn infinite_horizon_certificates() {
    let (ok, cert) = check_infinite_horizon(&square_lattice(0.4), 8).unwrap();
    assert!(ok);
    let cert = cert.unwrap();
    // the witness line is a corridor midline: offset ≡ ±0.5 mod 1 here
    let w = cert.direction;
    let wn = ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt();
    let off = (-cert.point[0] * w[1] as f64 + cert.point[1] * w[0] as f64) / wn;
    assert!((off.abs() - 0.5).abs() < 1e-12);

    let (ok49, _) = check_infinite_horizon(&square_lattice(0.49), 8).unwrap();
    assert!(ok49);

    // dense two-disk config blocks every direction up to the cutoff
    let blocked = build_config(
        vec![Disk::new(0.0, 0.0, 0.4), Disk::new(0.5, 0.5, 0.3)],
        Dimension::Two,
    )
    .unwrap();
    let (ok_blocked, cert_blocked) = check_infinite_horizon(&blocked, 8).unwrap();
    assert!(!ok_blocked);
    assert!(cert_blocked.is_none());
    assert!(enumerate_corridors(&blocked, 8).unwrap().is_empty());
}

#[test]
fn sigma_quadratic_forms() {
    let s = SigmaMatrix::diagonal(S_RHO04, Dimension::Two);
    assert!((s.quad([1.0, 0.0]) - S_RHO04).abs() < 1e-18);
    assert!((s.inv_quad([1.0, 0.0]) - 1.0 / S_RHO04).abs() < 1e-9);
    let v = s.inv_apply([2.0, -3.0]);
    assert!((v[0] - 2.0 / S_RHO04).abs() < 1e-9);
    assert!((v[1] + 3.0 / S_RHO04).abs() < 1e-9);
}
