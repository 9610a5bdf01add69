//! Acceptance battery. Each test prints one `criterion N: PASS|FAIL` line
//! (run with `--nocapture` to see them) and fails on any violation.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use trimspec::anderson::{
    kappa_numeric, projected_gamma_min, pvp_check, sample, spectral_averaging_sweep, wegner_experiment,
    AndersonModel, KappaMode, SiteDistribution,
};
use trimspec::bounds::{delta_t_lower, kappa_lower, sandwich_t, ModelParams};
use trimspec::cheeger::{beta_bruteforce, CheegerMode};
use trimspec::hamiltonian::{assemble, LatticeOperator, Mode, Potential};
use trimspec::lattice::{check_relatively_dense, BoxRegion, Site, TrimPattern};
use trimspec::spectra::{count_eigs, energy_curve, ground_energy, ground_state_pf, PfOptions};

fn report(n: u32, ok: bool, started: Instant, detail: String) {
    println!(
        "criterion {n}: {} ({:.2}s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn dense_eigenvalues(op: &LatticeOperator) -> Vec<f64> {
    let mut v: Vec<f64> = op.to_dense().unwrap().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// All sites of `[0, k)^d`.
fn cube(d: usize, k: i64) -> Vec<Site> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Site| {
                (0..k).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

/// A random `K`-periodic pattern that is not all of `Z^d`, with the largest
/// `Q` for which it is `(K, Q)`-relatively dense.
fn random_pattern(rng: &mut ChaCha20Rng, d: usize, k: u64) -> Option<(TrimPattern, u64)> {
    let all = cube(d, k as i64);
    let keep: Vec<Site> = all.iter().filter(|_| rng.random::<f64>() < 0.45).cloned().collect();
    if keep.is_empty() || keep.len() == all.len() {
        return None;
    }
    let window = BoxRegion::centered(d, 4.0 * k as f64).unwrap();
    let mut best = None;
    for q in 1..=keep.len() as u64 {
        let g = TrimPattern::periodic(d, k, keep.clone(), q).unwrap();
        if check_relatively_dense(&g, k, q, &window).unwrap().dense {
            best = Some((g, q));
        } else {
            break;
        }
    }
    best
}

fn random_potential(rng: &mut ChaCha20Rng, region: &BoxRegion, spr: f64) -> Potential {
    let map: HashMap<Site, f64> = region.sites().into_iter().map(|x| (x, spr * rng.random::<f64>())).collect();
    Potential::explicit(map).unwrap()
}

#[test]
fn criterion_01_exact_trimmed_energies() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (k, expect) in [(2u64, 2.0), (3u64, 1.0)] {
        let g = TrimPattern::sublattice(1, k).unwrap();
        for side in 3..=41 {
            for center in -2..=2i64 {
                let region = BoxRegion::closed(vec![center], side as f64).unwrap();
                let op = assemble(&region, &Potential::Zero, Some(&g), Mode::Trimmed).unwrap();
                // Oracle: Γ^c splits into runs of length k-1; a run of length r
                // has lowest eigenvalue 2 - 2cos(π/(r+1)).
                let sites: HashSet<i64> = op.sites().iter().map(|s| s[0]).collect();
                let lo = *sites.iter().min().unwrap();
                let hi = *sites.iter().max().unwrap();
                let mut best = f64::INFINITY;
                let mut run = 0;
                let mut full_run = false;
                for x in lo..=hi + 1 {
                    if sites.contains(&x) {
                        run += 1;
                    } else if run > 0 {
                        best = best.min(2.0 - 2.0 * (std::f64::consts::PI / (run as f64 + 1.0)).cos());
                        full_run |= run == k as usize - 1;
                        run = 0;
                    }
                }
                if !full_run {
                    continue;
                }
                assert!((best - expect).abs() < 1e-14);
                let e = ground_energy(&op, 1e-12).unwrap();
                worst = worst.max((e - expect).abs());
                cases += 1;
            }
        }
    }
    let ok = worst <= 1e-10;
    report(1, ok, started, format!("{cases} boxes, max error {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_02_bound_hierarchy() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x0202);
    let tol = 1e-8;
    let t_grid = [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0];
    let mut instances = 0;
    let mut failures = Vec::new();
    while instances < 200 {
        let d = if rng.random::<f64>() < 0.5 { 1 } else { 2 };
        let k = rng.random_range(2..=4u64);
        let Some((g, q)) = random_pattern(&mut rng, d, k) else {
            continue;
        };
        let j = if d == 1 { [1u64, 3, 5][rng.random_range(0..3)] } else { [1u64, 3][rng.random_range(0..2)] };
        let region = BoxRegion::centered(d, (k * j) as f64).unwrap();
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(&mut rng, &region, spr);
        let Ok(trimmed) = assemble(&region, &v, Some(&g), Mode::Trimmed) else {
            continue;
        };
        instances += 1;
        let stats = v.stats(&region).unwrap();
        let spread = stats.spread();
        let p = ModelParams::new(d, k, q, spread, 0.0).unwrap();
        let e_gamma = ground_energy(&trimmed, 1e-12).unwrap();
        let energies: Vec<f64> = t_grid
            .iter()
            .map(|&t| ground_energy(&assemble(&region, &v, Some(&g), Mode::Penalized(t)).unwrap(), 1e-12).unwrap())
            .collect();
        let e = energies[0];
        let delta = e_gamma - e;
        for (i, &t) in t_grid.iter().enumerate() {
            let dt = energies[i] - e;
            let lower_17 = delta_t_lower(&p, t).unwrap();
            let s = sandwich_t(d, spread, t, delta).unwrap();
            let checks = [
                ("eq17", lower_17 <= dt + tol),
                ("lower_15", s.lower_15 <= dt + tol),
                ("lower_210", s.lower_210 <= dt + tol),
                ("upper", dt <= s.upper + tol),
                ("monotone", i == 0 || energies[i] >= energies[i - 1] - tol),
                ("below_trimmed", energies[i] <= e_gamma + tol),
            ];
            for (name, ok) in checks {
                if !ok {
                    failures.push(format!("{name} d={d} K={k} Q={q} L={} t={t}", region.side()));
                }
            }
        }
    }
    let ok = failures.is_empty();
    report(2, ok, started, format!("{instances} instances, {} violations {:?}", failures.len(), failures.first()));
    assert!(ok);
}

#[test]
fn criterion_03_derivative_bound() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x0303);
    let mut instances = 0;
    let mut failures = Vec::new();
    let grid: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).chain((1..=16).map(|i| 2.0 + 0.5 * i as f64)).collect();
    while instances < 50 {
        let d = if rng.random::<f64>() < 0.6 { 1 } else { 2 };
        let k = rng.random_range(2..=4u64);
        let Some((g, q)) = random_pattern(&mut rng, d, k) else {
            continue;
        };
        let j = if d == 1 { [1u64, 3, 5][rng.random_range(0..3)] } else { 1 };
        let region = BoxRegion::centered(d, (k * j) as f64).unwrap();
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(&mut rng, &region, spr);
        instances += 1;
        let curve = energy_curve(&region, &g, &v, &grid, 1e-12).unwrap();
        let spread = v.stats(&region).unwrap().spread();
        let y = 2.0 * d as f64 + 1.0 + spread;
        let m = (2 * d as u64 * k) as i32;
        for w in curve.points.windows(2) {
            let slope = (w[1].energy - w[0].energy) / (w[1].t - w[0].t);
            let bound = q as f64 * (y + w[0].t).powi(-m);
            if slope < bound - 1e-6 {
                failures.push(format!("d={d} K={k} Q={q} t={} slope={slope} bound={bound}", w[0].t));
            }
        }
    }
    let ok = failures.is_empty();
    report(3, ok, started, format!("{instances} instances, {} violations {:?}", failures.len(), failures.first()));
    assert!(ok);
}

fn l1(x: &[i64], y: &[i64]) -> i64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

#[test]
fn criterion_04_ucp() {
    let started = Instant::now();
    // Spot value on Λ₃.
    let op = assemble(&BoxRegion::centered(1, 3.0).unwrap(), &Potential::Zero, None, Mode::Full).unwrap();
    let gs = ground_state_pf(&op, &PfOptions::default()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let spot_ok = (gs.energy - (2.0 - 2f64.sqrt())).abs() < 1e-12
        && gs.vector.iter().zip([0.5, h, 0.5]).all(|(a, b)| (a - b).abs() < 1e-12);

    let mut rng = ChaCha20Rng::seed_from_u64(0x0404);
    let mut failures = Vec::new();
    for inst in 0..100 {
        let d = if inst % 2 == 0 { 1 } else { 2 };
        let side = rng.random_range(1..=11) as f64;
        let region = BoxRegion::centered(d, side).unwrap();
        let spr = 6.0 * rng.random::<f64>();
        let v = random_potential(&mut rng, &region, spr);
        let op = assemble(&region, &v, None, Mode::Full).unwrap();
        let gs = ground_state_pf(&op, &PfOptions::default()).unwrap();
        let psi = &gs.vector;
        let norm: f64 = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eig = dense_eigenvalues(&op);
        if (gs.energy - eig[0]).abs() > 1e-9 || (norm - 1.0).abs() > 1e-12 {
            failures.push(format!("solver mismatch at instance {inst}"));
        }
        if psi.iter().any(|&x| !(x > 0.0)) {
            failures.push(format!("nonpositive component at instance {inst}"));
            continue;
        }
        let stats = v.stats(&region).unwrap();
        let y = 2.0 * d as f64 + 1.0 + stats.spread();
        for m in [1i64, 2] {
            for (i, x) in op.sites().iter().enumerate() {
                let mass: f64 = op
                    .sites()
                    .iter()
                    .zip(psi)
                    .filter(|(s, _)| l1(s, x) <= m)
                    .map(|(_, p)| p)
                    .sum();
                if psi[i] < y.powi(-(m as i32)) * mass * (1.0 - 1e-12) {
                    failures.push(format!("local m={m} at {x:?}, instance {inst}"));
                }
            }
        }
        let min_psi = psi.iter().copied().fold(f64::INFINITY, f64::min);
        if min_psi.ln() < -(d as f64) * side * y.ln() {
            failures.push(format!("uniform bound at instance {inst}"));
        }
    }
    let ok = spot_ok && failures.is_empty();
    report(
        4,
        ok,
        started,
        format!("spot {}, 100 instances, {} violations {:?}", spot_ok, failures.len(), failures.first()),
    );
    assert!(ok);
}

/// Naive minimum of `β_A` over all nonempty subsets of `admissible`, with
/// boundaries counted in `Z^d` and `pen` added per site of `Γ` in `A`.
fn naive_beta(admissible: &[Site], gamma: &TrimPattern, pen: Option<f64>) -> f64 {
    let n = admissible.len();
    assert!(n <= 20);
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let a: Vec<&Site> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &admissible[i]).collect();
        let set: HashSet<&Site> = a.iter().copied().collect();
        let mut edges = 0usize;
        let mut on_gamma = 0usize;
        for x in &a {
            if gamma.contains(x) {
                on_gamma += 1;
            }
            for axis in 0..x.len() {
                for step in [-1, 1] {
                    let mut y = (*x).clone();
                    y[axis] += step;
                    if !set.contains(&y) {
                        edges += 1;
                    }
                }
            }
        }
        let val = (edges as f64 + pen.unwrap_or(0.0) * on_gamma as f64) / a.len() as f64;
        best = best.min(val);
    }
    best
}

#[test]
fn criterion_05_cheeger() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha20Rng::seed_from_u64(0x0505);
    let mut patterns: Vec<(String, TrimPattern, u64)> = vec![
        ("2Z".into(), TrimPattern::sublattice(1, 2).unwrap(), 2),
        ("3Z".into(), TrimPattern::sublattice(1, 3).unwrap(), 3),
        ("2Z^2".into(), TrimPattern::sublattice(2, 2).unwrap(), 2),
    ];
    while patterns.len() < 7 {
        let d = 1 + patterns.len() % 2;
        let k = rng.random_range(2..=3u64);
        if let Some((g, _)) = random_pattern(&mut rng, d, k) {
            patterns.push((format!("random d={d} K={k}"), g, k));
        }
    }
    for (name, g, k) in &patterns {
        let d = g.dim();
        let ks = if k % 2 == 1 { *k } else { k + 1 } as f64;
        let floor = ks.powi(-(d as i32));
        // Window minimum over Γ^c, checked against the naive enumeration.
        let wside = if d == 1 { 3.0 * *k as f64 } else { 2.0 * *k as f64 };
        let window = BoxRegion::centered(d, wside).unwrap();
        let adm: Vec<Site> = window.sites().into_iter().filter(|x| !g.contains(x)).collect();
        // Large windows are searched up to a cardinality cap; every set still obeys the floor.
        let cap = if adm.len() > 24 { Some(10) } else { None };
        let r = beta_bruteforce(&window, g, CheegerMode::Trimmed, cap).unwrap();
        if adm.len() <= 20 {
            let naive = naive_beta(&adm, g, None);
            if (naive - r.value).abs() > 1e-12 {
                failures.push(format!("{name}: window β {} vs naive {naive}", r.value));
            }
        }
        if r.value < floor {
            failures.push(format!("{name}: β = {} < K_*^-d = {floor}", r.value));
        }
        // Measured trimmed energy of -Δ against 1/(4d K_*^{2d}).
        let side = if d == 1 { 6.0 * *k as f64 + 1.0 } else { 4.0 * *k as f64 };
        let region = BoxRegion::centered(d, side).unwrap();
        let op = assemble(&region, &Potential::Zero, Some(g), Mode::Trimmed).unwrap();
        let e = ground_energy(&op, 1e-12).unwrap();
        let lower = 1.0 / (4.0 * d as f64 * ks.powi(2 * d as i32));
        if e < lower {
            failures.push(format!("{name}: E_Γ = {e} < {lower}"));
        }
        // β(t) on small exhaustive windows.
        let small = BoxRegion::centered(d, if d == 1 { 3.0 * *k as f64 } else { 3.0 }).unwrap();
        let beta_gamma = beta_bruteforce(&small, g, CheegerMode::Trimmed, None).unwrap().value;
        let mut prev = f64::NEG_INFINITY;
        let mut grid = vec![0.0, 0.25, 0.5, 1.0, 2.0 * d as f64 - 1.0, 3.0, 5.0, 10.0];
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for t in grid {
            let rt = beta_bruteforce(&small, g, CheegerMode::Penalized(t), None).unwrap();
            if !rt.exhaustive {
                failures.push(format!("{name}: window not exhaustive at t={t}"));
            }
            if small.len() <= 20 {
                let naive = naive_beta(&small.sites(), g, Some(t));
                if (naive - rt.value).abs() > 1e-12 {
                    failures.push(format!("{name}: β({t}) {} vs naive {naive}", rt.value));
                }
            }
            if rt.value < prev - 1e-12 {
                failures.push(format!("{name}: β(t) decreased at t={t}"));
            }
            prev = rt.value;
            if t >= 2.0 * d as f64 - 1.0 && rt.value < beta_gamma.min(1.0) - 1e-12 {
                failures.push(format!("{name}: β({t}) = {} < min(β, 1) = {}", rt.value, beta_gamma.min(1.0)));
            }
        }
    }
    let ok = failures.is_empty();
    report(5, ok, started, format!("{} patterns, {} violations {:?}", patterns.len(), failures.len(), failures));
    assert!(ok);
}

fn chain_model(side: f64, lambda: f64) -> AndersonModel {
    AndersonModel::new(
        Potential::Zero,
        TrimPattern::sublattice(1, 2).unwrap(),
        (2, 1),
        vec![SiteDistribution::Uniform { a: 0.0, b: 1.0 }],
        lambda,
        BoxRegion::centered(1, side).unwrap(),
    )
    .unwrap()
}

/// `E_Γ(H₀ + s χ_{2Z})` for `H₀ = -Δ` on `Z`: bottom of the two-band Bloch
/// spectrum at zero quasi-momentum.
fn bloch_2z(s: f64) -> f64 {
    2.0 + s / 2.0 - (s * s / 4.0 + 4.0).sqrt()
}

#[test]
fn criterion_06_wegner() {
    let started = Instant::now();
    let model = chain_model(50.0, 2.0);
    let (a, b, e1) = (0.0, 0.1, 0.5);
    let r = wegner_experiment(&model, (a, b), e1, 2000, 2024, KappaMode::Numeric).unwrap();
    // Independent right-hand side: S(t) = min(t, 1), |Γ ∩ Λ| counted here.
    let s = ((b - a) / 2.0f64).min(1.0);
    let gamma_count = (-25..=25).filter(|x: &i64| x.rem_euclid(2) == 0).count();
    let rhs = 8.0 / r.kappa_used * s * gamma_count as f64;
    // The box κ dominates the infinite-volume κ from the Bloch formula.
    let bloch_kappa = (0..60)
        .map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 59.0))
        .map(|s| (bloch_2z(s) - e1) / s)
        .fold(f64::NEG_INFINITY, f64::max);
    // Spot-recount the first samples with dense eigenvalues.
    let recount: usize = (0..20)
        .map(|i| {
            dense_eigenvalues(&sample(&model, 2024, i).unwrap())
                .into_iter()
                .filter(|&e| (a..=b).contains(&e))
                .count()
        })
        .sum();
    let first: usize = (0..20)
        .map(|i| count_eigs(&sample(&model, 2024, i).unwrap(), a, b).unwrap().count)
        .sum();
    let ok = (rhs - r.bound_rhs).abs() <= 1e-12 * rhs
        && r.kappa_used >= bloch_kappa - 1e-12
        && recount == first
        && r.empirical_mean <= rhs + 3.0 * r.std_error
        && r.passed;
    report(
        6,
        ok,
        started,
        format!(
            "mean {:.4} ± {:.4}, rhs {:.4}, kappa {:.5} (Bloch {:.5})",
            r.empirical_mean, r.std_error, rhs, r.kappa_used, bloch_kappa
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_projection_inequality() {
    let started = Instant::now();
    let model = chain_model(30.0, 0.002);
    let e1 = 0.9 / 81.0;
    // Analytic κ at d = 1, K = 2, Q = 1, V = 0, where δ_lower = 1/81.
    let kb = kappa_lower(&ModelParams::new(1, 2, 1, 0.0, 0.0).unwrap(), e1).unwrap();
    let r = pvp_check(&model, e1, 77, 100).unwrap();
    // Independent recomputation of P χ_Γ P on a few samples.
    let mut recheck_ok = true;
    for i in 0..5u64 {
        let op = sample(&model, 77, i).unwrap();
        let h: DMatrix<f64> = op.to_dense().unwrap();
        let eig = h.symmetric_eigen();
        let cols: Vec<usize> = (0..op.n()).filter(|&j| eig.eigenvalues[j] <= e1).collect();
        let (rank, lib) = projected_gamma_min(&op, e1).unwrap();
        recheck_ok &= rank == cols.len();
        if cols.is_empty() {
            continue;
        }
        let mut m = DMatrix::<f64>::zeros(cols.len(), cols.len());
        for (p, &ci) in cols.iter().enumerate() {
            for (q, &cj) in cols.iter().enumerate() {
                m[(p, q)] = (0..op.n())
                    .filter(|&s| op.sites()[s][0].rem_euclid(2) == 0)
                    .map(|s| eig.eigenvectors[(s, ci)] * eig.eigenvectors[(s, cj)])
                    .sum();
            }
        }
        let mine = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        recheck_ok &= (mine - lib.unwrap()).abs() < 1e-10;
    }
    let nonvacuous = r.rows.len() - r.vacuous;
    let ok = r.violations == 0 && (r.kappa_lb - kb.kappa_lb).abs() < 1e-15 && recheck_ok && nonvacuous > 0;
    let min_eig = r.rows.iter().filter_map(|x| x.min_eig).fold(f64::INFINITY, f64::min);
    report(
        7,
        ok,
        started,
        format!(
            "100 samples, {nonvacuous} nonvacuous, {} violations, min eig {min_eig:.4e} vs kappa_lb {:.4e}",
            r.violations, r.kappa_lb
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_spectral_averaging() {
    let started = Instant::now();
    let lambda = 1.0;
    let model = chain_model(15.0, lambda);
    let mut rng = ChaCha20Rng::seed_from_u64(0x0808);
    let intervals: Vec<(f64, f64)> = (0..50)
        .map(|_| {
            let a = 5.0 * rng.random::<f64>();
            (a, a + 0.5 * rng.random::<f64>())
        })
        .collect();
    let zeta = [0i64];
    let reports = spectral_averaging_sweep(&model, &zeta, &intervals, 512, 8).unwrap();
    let mut failures = Vec::new();
    for r in &reports {
        let bound = 8.0 * ((r.interval.1 - r.interval.0) / lambda).min(1.0);
        if (bound - r.bound).abs() > 1e-15 || r.integral > bound + r.quadrature_error {
            failures.push(format!("{:?}: {} > {bound}", r.interval, r.integral));
        }
    }
    // Independent integral on a finer grid for a few intervals.
    let base = model.base_operator().unwrap();
    let iz = base.index_of(&zeta).unwrap();
    let others: Vec<f64> = base
        .sites()
        .iter()
        .map(|x| if x[0].rem_euclid(2) == 0 && x[0] != 0 { lambda * model.omega(8, 0, x) } else { 0.0 })
        .collect();
    let n = 2048;
    for r in reports.iter().take(5) {
        let (a, b) = r.interval;
        let mut total = 0.0;
        for j in 0..n {
            let v = (j as f64 + 0.5) / n as f64;
            let mut add = others.clone();
            add[iz] = lambda * v;
            let eig = base.with_added_potential(&add).unwrap().to_dense().unwrap().symmetric_eigen();
            total += (0..base.n())
                .filter(|&k| (a..=b).contains(&eig.eigenvalues[k]))
                .map(|k| eig.eigenvectors[(iz, k)].powi(2))
                .sum::<f64>()
                / n as f64;
        }
        if (total - r.integral).abs() > r.quadrature_error + 2.0 / 512.0 {
            failures.push(format!("{:?}: quadrature {} vs fine {total}", r.interval, r.integral));
        }
    }
    let ok = failures.is_empty();
    report(8, ok, started, format!("50 intervals, {} violations {:?}", failures.len(), failures.first()));
    assert!(ok);
}

#[test]
fn criterion_09_kappa_arithmetic() {
    let started = Instant::now();
    let e1 = 1.0 / 162.0;
    let kb = kappa_lower(&ModelParams::new(1, 2, 1, 0.0, 0.0).unwrap(), e1).unwrap();
    let z = 1.25 * (2f64.cbrt() - 1.0);
    let kappa = 0.2 * ((1.0 + z) * 3.0).powi(-4);
    let scan = kappa_numeric(&chain_model(21.0, 1.0), e1).unwrap();
    let ok = (kb.z - z).abs() <= 1e-12 && (kb.kappa_lb - kappa).abs() <= 1e-12 && kb.kappa_lb <= scan.kappa;
    report(
        9,
        ok,
        started,
        format!("Z = {:.15}, kappa_lb = {:.6e}, numeric kappa = {:.6e}", kb.z, kb.kappa_lb, scan.kappa),
    );
    assert!(ok);
}

#[test]
fn criterion_10_counting_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0x1010);
    let mut mismatches = Vec::new();
    let mut max_n = 0;
    for inst in 0..100 {
        let d = 1 + inst % 2;
        let side = if d == 1 { rng.random_range(1..=199) } else { rng.random_range(1..=13) } as f64;
        let region = BoxRegion::centered(d, side).unwrap();
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(&mut rng, &region, spr);
        let k = rng.random_range(2..=4u64);
        let g = TrimPattern::sublattice(d, k).unwrap();
        let mode = match inst % 3 {
            0 => Mode::Full,
            1 => Mode::Trimmed,
            _ => Mode::Penalized(10.0 * rng.random::<f64>()),
        };
        let Ok(op) = assemble(&region, &v, Some(&g), mode) else {
            continue;
        };
        assert!(op.n() <= 200);
        max_n = max_n.max(op.n());
        let eig = dense_eigenvalues(&op);
        let top = eig[eig.len() - 1] + 0.5;
        for _ in 0..50 {
            let x = -0.5 + (top + 0.5) * rng.random::<f64>();
            let y = -0.5 + (top + 0.5) * rng.random::<f64>();
            let (a, b) = if x <= y { (x, y) } else { (y, x) };
            let expect = eig.iter().filter(|&&e| a <= e && e <= b).count();
            let got = count_eigs(&op, a, b).unwrap().count;
            if got != expect {
                mismatches.push(format!("instance {inst} [{a}, {b}]: {got} vs {expect}"));
            }
        }
    }
    let ok = mismatches.is_empty();
    report(
        10,
        ok,
        started,
        format!("100 instances (n <= {max_n}) x 50 intervals, {} mismatches {:?}", mismatches.len(), mismatches.first()),
    );
    assert!(ok);
}
