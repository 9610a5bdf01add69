//! Built-in verification battery behind `trimspec verify`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::anderson::{
    ground_energy_mc, pvp_check, spectral_averaging_sweep, wegner_experiment, AndersonModel, KappaMode,
    SiteDistribution,
};
use crate::bounds::{delta_lower, delta_t_lower, kappa_lower, sandwich_t, ModelParams};
use crate::cheeger::{beta_bruteforce, CheegerMode};
use crate::error::{invalid, Result};
use crate::hamiltonian::{assemble, Mode, Potential};
use crate::lattice::{check_relatively_dense, BoxRegion, Site, TrimPattern};
use crate::spectra::{count_eigs, energy_curve, ground_energy, ground_state_pf, PfOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => invalid(format!("level must be fast or full, got `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        // Timings stay out of the CSV so identical runs give identical files.
        let mut s = String::from("check,passed,detail\n");
        for c in &self.checks {
            s.push_str(&format!("{},{},\"{}\"\n", c.name, c.passed, c.detail.replace('"', "'")));
        }
        s
    }
}

type Check = fn(&mut ChaCha20Rng) -> Result<(bool, String)>;

pub fn verify_suite(level: Level, seed: u64) -> VerifySummary {
    let mut checks: Vec<(&str, Check)> = vec![
        ("trimmed_energies", trimmed_energies),
        ("lambda3_ground_state", lambda3_ground_state),
        ("delta_lower_arithmetic", delta_lower_arithmetic),
        ("kappa_arithmetic", kappa_arithmetic),
        ("cheeger_floor", cheeger_floor),
        ("counting_oracle", |r| counting_oracle(r, 20)),
        ("wegner_below_spectrum", wegner_below_spectrum),
        ("ucp_random", |r| ucp_random(r, 10)),
    ];
    if level == Level::Full {
        checks.extend::<[(&str, Check); 8]>([
            ("bound_hierarchy", |r| bound_hierarchy(r, 200)),
            ("derivative_bound", derivative_bound),
            ("ucp_random_full", |r| ucp_random(r, 100)),
            ("counting_oracle_full", |r| counting_oracle(r, 100)),
            ("wegner_monte_carlo", wegner_monte_carlo),
            ("projection_inequality", projection_inequality),
            ("spectral_averaging", spectral_averaging),
            ("ground_energy_convergence", ground_energy_convergence),
        ]);
    }
    let checks = checks
        .into_iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let started = Instant::now();
            let (passed, detail) = match f(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckRecord {
                name: name.to_string(),
                passed,
                detail,
                seconds: started.elapsed().as_secs_f64(),
            }
        })
        .collect();
    VerifySummary { level, seed, checks }
}

fn trimmed_energies(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (k, expect) in [(2, 2.0), (3, 1.0)] {
        let g = TrimPattern::sublattice(1, k)?;
        for side in [6.0, 11.0, 31.0] {
            let op = assemble(&BoxRegion::centered(1, side)?, &Potential::Zero, Some(&g), Mode::Trimmed)?;
            worst = worst.max((ground_energy(&op, 1e-12)? - expect).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max error {worst:.2e}")))
}

fn lambda3_ground_state(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let op = assemble(&BoxRegion::centered(1, 3.0)?, &Potential::Zero, None, Mode::Full)?;
    let gs = ground_state_pf(&op, &PfOptions::default())?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let err = gs
        .vector
        .iter()
        .zip([0.5, h, 0.5])
        .map(|(a, b)| (a - b).abs())
        .fold((gs.energy - (2.0 - 2f64.sqrt())).abs(), f64::max);
    Ok((err <= 1e-12 && gs.ucp.holds(), format!("max error {err:.2e}")))
}

fn delta_lower_arithmetic(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let p = ModelParams::new(1, 2, 1, 0.0, 0.0)?;
    let a = delta_lower(&p)?;
    let b = delta_t_lower(&p, 3.0)?;
    let ok = (a - 1.0 / 81.0).abs() < 1e-15 && (b - 7.0 / 648.0).abs() < 1e-15;
    Ok((ok, format!("delta_lower = {a:.17e}, delta_lower(t=3) = {b:.17e}")))
}

fn kappa_arithmetic(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let kb = kappa_lower(&ModelParams::new(1, 2, 1, 0.0, 0.0)?, 1.0 / 162.0)?;
    let z = 1.25 * (2f64.cbrt() - 1.0);
    let kappa = 0.2 * ((1.0 + z) * 3.0).powi(-4);
    let ok = (kb.z - z).abs() <= 1e-12 && (kb.kappa_lb - kappa).abs() <= 1e-12;
    Ok((ok, format!("Z = {:.15}, kappa_lb = {:.6e}", kb.z, kb.kappa_lb)))
}

fn cheeger_floor(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for (d, k, side) in [(1, 2u64, 6.0), (1, 3, 9.0), (2, 2, 4.0)] {
        let g = TrimPattern::sublattice(d, k)?;
        let ks = if k % 2 == 1 { k } else { k + 1 } as f64;
        let r = beta_bruteforce(&BoxRegion::centered(d, side)?, &g, CheegerMode::Trimmed, None)?;
        worst = worst.min(r.value - ks.powi(-(d as i32)));
    }
    Ok((worst >= 0.0, format!("min slack {worst:.4}")))
}

fn random_potential(rng: &mut ChaCha20Rng, region: &BoxRegion, spr: f64) -> Result<Potential> {
    Potential::explicit(region.sites().into_iter().map(|x| (x, spr * rng.random::<f64>())).collect())
}

fn counting_oracle(rng: &mut ChaCha20Rng, instances: usize) -> Result<(bool, String)> {
    let mut bad = 0;
    for i in 0..instances {
        let d = 1 + i % 2;
        let side = if d == 1 { rng.random_range(1..=150) } else { rng.random_range(1..=11) } as f64;
        let region = BoxRegion::centered(d, side)?;
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(rng, &region, spr)?;
        let op = assemble(&region, &v, None, Mode::Full)?;
        let eig = op.to_dense()?.symmetric_eigenvalues();
        for _ in 0..50 {
            let x = -0.5 + 13.0 * rng.random::<f64>();
            let y = -0.5 + 13.0 * rng.random::<f64>();
            let (a, b) = (x.min(y), x.max(y));
            let expect = eig.iter().filter(|&&e| a <= e && e <= b).count();
            if count_eigs(&op, a, b)?.count != expect {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{instances} instances x 50 intervals, {bad} mismatches")))
}

fn chain(side: f64, lambda: f64) -> Result<AndersonModel> {
    AndersonModel::new(
        Potential::Zero,
        TrimPattern::sublattice(1, 2)?,
        (2, 1),
        vec![SiteDistribution::Uniform { a: 0.0, b: 1.0 }],
        lambda,
        BoxRegion::centered(1, side)?,
    )
}

fn wegner_below_spectrum(_: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let r = wegner_experiment(&chain(21.0, 2.0)?, (-1.0, -0.01), 0.5, 50, 1, KappaMode::Numeric)?;
    Ok((r.empirical_mean == 0.0 && r.passed, format!("mean {}", r.empirical_mean)))
}

fn ucp_random(rng: &mut ChaCha20Rng, instances: usize) -> Result<(bool, String)> {
    let mut bad = 0;
    for i in 0..instances {
        let d = 1 + i % 2;
        let region = BoxRegion::centered(d, rng.random_range(1..=11) as f64)?;
        let spr = 6.0 * rng.random::<f64>();
        let v = random_potential(rng, &region, spr)?;
        let gs = ground_state_pf(&assemble(&region, &v, None, Mode::Full)?, &PfOptions::default())?;
        if !gs.ucp.holds() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{instances} instances, {bad} violations")))
}

fn random_pattern(rng: &mut ChaCha20Rng, d: usize, k: u64) -> Result<Option<(TrimPattern, u64)>> {
    let all: Vec<Site> = BoxRegion::new(vec![0; d], (2 * k) as f64, false)?
        .sites()
        .into_iter()
        .filter(|x| x.iter().all(|&c| (0..k as i64).contains(&c)))
        .collect();
    let keep: Vec<Site> = all.iter().filter(|_| rng.random::<f64>() < 0.45).cloned().collect();
    if keep.is_empty() || keep.len() == all.len() {
        return Ok(None);
    }
    let window = BoxRegion::centered(d, 4.0 * k as f64)?;
    let mut best = None;
    for q in 1..=keep.len() as u64 {
        let g = TrimPattern::periodic(d, k, keep.clone(), q)?;
        if !check_relatively_dense(&g, k, q, &window)?.dense {
            break;
        }
        best = Some((g, q));
    }
    Ok(best)
}

fn bound_hierarchy(rng: &mut ChaCha20Rng, instances: usize) -> Result<(bool, String)> {
    let t_grid = [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0];
    let tol = 1e-8;
    let (mut done, mut bad) = (0, 0);
    while done < instances {
        let d = 1 + rng.random_range(0..2usize);
        let k = rng.random_range(2..=4u64);
        let Some((g, q)) = random_pattern(rng, d, k)? else {
            continue;
        };
        let j = [1u64, 3][rng.random_range(0..2)];
        let region = BoxRegion::centered(d, (k * j) as f64)?;
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(rng, &region, spr)?;
        let Ok(trimmed) = assemble(&region, &v, Some(&g), Mode::Trimmed) else {
            continue;
        };
        done += 1;
        let spread = v.stats(&region)?.spread();
        let p = ModelParams::new(d, k, q, spread, 0.0)?;
        let eg = ground_energy(&trimmed, 1e-12)?;
        let curve = energy_curve(&region, &g, &v, &t_grid, 1e-12)?;
        let e = curve.points[0].energy;
        let mut prev = f64::NEG_INFINITY;
        for pt in &curve.points {
            let s = sandwich_t(d, spread, pt.t, eg - e)?;
            let dt = pt.energy - e;
            let ok = delta_t_lower(&p, pt.t)? <= dt + tol
                && s.lower_15 <= dt + tol
                && s.lower_210 <= dt + tol
                && dt <= s.upper + tol
                && pt.energy >= prev - tol
                && pt.energy <= eg + tol;
            bad += usize::from(!ok);
            prev = pt.energy;
        }
    }
    Ok((bad == 0, format!("{instances} instances, {bad} violations")))
}

fn derivative_bound(rng: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let grid: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).collect();
    let (mut done, mut bad) = (0, 0);
    while done < 50 {
        let k = rng.random_range(2..=4u64);
        let Some((g, q)) = random_pattern(rng, 1, k)? else {
            continue;
        };
        done += 1;
        let region = BoxRegion::centered(1, (k * 3) as f64)?;
        let spr = 4.0 * rng.random::<f64>();
        let v = random_potential(rng, &region, spr)?;
        let curve = energy_curve(&region, &g, &v, &grid, 1e-12)?;
        let y = curve.y();
        for (w, slope) in curve.points.windows(2).zip(&curve.fd_slopes) {
            if *slope < q as f64 * (y + w[0].t).powi(-(2 * k as i32)) - 1e-6 {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("50 instances, {bad} violations")))
}

fn wegner_monte_carlo(rng: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let r = wegner_experiment(&chain(50.0, 2.0)?, (0.0, 0.1), 0.5, 2000, rng.random(), KappaMode::Numeric)?;
    Ok((
        r.passed,
        format!("mean {:.4} ± {:.4}, rhs {:.4}", r.empirical_mean, r.std_error, r.bound_rhs),
    ))
}

fn projection_inequality(rng: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let r = pvp_check(&chain(30.0, 0.002)?, 0.9 / 81.0, rng.random(), 100)?;
    Ok((
        r.passed(),
        format!("{} vacuous, {} violations, kappa_lb {:.4e}", r.vacuous, r.violations, r.kappa_lb),
    ))
}

fn spectral_averaging(rng: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let intervals: Vec<(f64, f64)> = (0..50)
        .map(|_| {
            let a = 5.0 * rng.random::<f64>();
            (a, a + 0.5 * rng.random::<f64>())
        })
        .collect();
    let reports = spectral_averaging_sweep(&chain(15.0, 1.0)?, &[0], &intervals, 512, rng.random())?;
    let bad = reports.iter().filter(|r| !r.passed).count();
    Ok((bad == 0, format!("50 intervals, {bad} violations")))
}

fn ground_energy_convergence(rng: &mut ChaCha20Rng) -> Result<(bool, String)> {
    let t = ground_energy_mc(&chain(11.0, 1.0)?, &[11.0, 31.0, 101.0], 500, rng.random())?;
    let last = t.rows.last().map(|r| r.min).unwrap_or(f64::NAN);
    Ok((t.passed() && last < 0.05, format!("min at L=101: {last:.4e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_level_passes() {
        let s = verify_suite(Level::Fast, 7);
        assert!(s.passed(), "{:?}", s.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert!(s.to_csv().starts_with("check,passed"));
    }

    #[test]
    fn level_parsing() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert!("".parse::<Level>().is_err());
        assert!("medium".parse::<Level>().is_err());
    }
}
