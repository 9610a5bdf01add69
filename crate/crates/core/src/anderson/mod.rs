//! The Γ-trimmed Anderson model `H_{ω,λ} = H₀ + λ Σ_{ζ∈Γ} ω_ζ χ_ζ` and the
//! Monte Carlo experiments built on it.

mod distribution;
mod rng;

pub use distribution::SiteDistribution;
pub use rng::site_rng;

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{delta_lower, kappa_lower, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{assemble, LatticeOperator, Mode, Potential, DENSE_LIMIT};
use crate::lattice::{check_relatively_dense, BoxRegion, Site, TrimPattern};
use crate::spectra::{count_eigs, ground_energy, DEFAULT_TOL};

/// Grid of penalties scanned for the numeric κ.
pub const KAPPA_SCAN: (f64, f64, usize) = (-2.0, 3.0, 60);
/// Default number of quadrature cells for one-site averaging.
pub const DEFAULT_QUADRATURE: usize = 512;

/// Neumaier-compensated sum; callers feed values in a fixed order.
fn fsum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64))
        .collect()
}

#[derive(Clone, Debug)]
pub struct AndersonModel {
    background: Potential,
    gamma: TrimPattern,
    k: u64,
    q: u64,
    /// One distribution for every site, or one per residue class of `gamma`.
    dists: Vec<SiteDistribution>,
    lambda: f64,
    region: BoxRegion,
    allow_degenerate: bool,
}

impl AndersonModel {
    pub fn new(
        background: Potential,
        gamma: TrimPattern,
        (k, q): (u64, u64),
        dists: Vec<SiteDistribution>,
        lambda: f64,
        region: BoxRegion,
    ) -> Result<Self> {
        Self::build(background, gamma, (k, q), dists, lambda, region, false)
    }

    /// Like [`AndersonModel::new`] but accepts point masses; used to pin
    /// the disorder in tests.
    pub fn degenerate_for_tests(
        background: Potential,
        gamma: TrimPattern,
        (k, q): (u64, u64),
        dists: Vec<SiteDistribution>,
        lambda: f64,
        region: BoxRegion,
    ) -> Result<Self> {
        Self::build(background, gamma, (k, q), dists, lambda, region, true)
    }

    fn build(
        background: Potential,
        gamma: TrimPattern,
        (k, q): (u64, u64),
        dists: Vec<SiteDistribution>,
        lambda: f64,
        region: BoxRegion,
        allow_degenerate: bool,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("lambda must be finite and > 0, got {lambda}"));
        }
        if gamma.dim() != region.dim() {
            return invalid(format!(
                "pattern dimension {} does not match box dimension {}",
                gamma.dim(),
                region.dim()
            ));
        }
        let check = check_relatively_dense(&gamma, k, q, &region)?;
        if !check.dense {
            return invalid(format!(
                "Γ is not ({k}, {q})-relatively dense; first deficient cell at {:?}",
                check.violation
            ));
        }
        let classes = gamma.sites().len();
        if dists.len() != 1 && dists.len() != classes {
            return invalid(format!(
                "dists must hold one distribution or one per pattern site ({classes}), got {}",
                dists.len()
            ));
        }
        for d in &dists {
            d.validate()?;
            if d.is_degenerate() && !allow_degenerate {
                return invalid("point-mass site distributions are only allowed in test mode");
            }
        }
        background.stats(&region)?;
        Ok(Self {
            background,
            gamma,
            k,
            q,
            dists,
            lambda,
            region,
            allow_degenerate,
        })
    }

    pub fn background(&self) -> &Potential {
        &self.background
    }

    pub fn gamma(&self) -> &TrimPattern {
        &self.gamma
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dists(&self) -> &[SiteDistribution] {
        &self.dists
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// Same model on another box.
    pub fn with_region(&self, region: BoxRegion) -> Result<Self> {
        Self::build(
            self.background.clone(),
            self.gamma.clone(),
            (self.k, self.q),
            self.dists.clone(),
            self.lambda,
            region,
            self.allow_degenerate,
        )
    }

    /// Same model with another coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::build(
            self.background.clone(),
            self.gamma.clone(),
            (self.k, self.q),
            self.dists.clone(),
            lambda,
            self.region.clone(),
            self.allow_degenerate,
        )
    }

    /// `μ_ζ` for `ζ ∈ Γ`.
    pub fn dist_at(&self, site: &[i64]) -> Option<&SiteDistribution> {
        let class = self.gamma.class_of(site)?;
        Some(if self.dists.len() == 1 {
            &self.dists[0]
        } else {
            &self.dists[class]
        })
    }

    /// `ω_ζ` of sample `index`; zero off `Γ`.
    pub fn omega(&self, seed: u64, index: u64, site: &[i64]) -> f64 {
        match self.dist_at(site) {
            Some(d) => d.sample(&mut site_rng(seed, index, site)),
            None => 0.0,
        }
    }

    /// `H₀^Λ` on the model box.
    pub fn base_operator(&self) -> Result<LatticeOperator> {
        assemble(&self.region, &self.background, Some(&self.gamma), Mode::Full)
    }

    /// `λ ω` on each site of `base`.
    pub fn disorder_on(&self, base: &LatticeOperator, seed: u64, index: u64) -> Vec<f64> {
        base.sites()
            .iter()
            .zip(base.on_gamma())
            .map(|(x, &g)| if g { self.lambda * self.omega(seed, index, x) } else { 0.0 })
            .collect()
    }

    /// `S_Λ(t) = max_{ζ∈Γ∩Λ} S_{μ_ζ}(t)`.
    pub fn concentration_on_box(&self, t: f64) -> Result<f64> {
        let mut s = 0.0f64;
        for x in self.region.sites() {
            if let Some(d) = self.dist_at(&x) {
                s = s.max(d.concentration(t)?);
            }
        }
        Ok(s)
    }

    pub fn gamma_count(&self) -> usize {
        self.region
            .sites()
            .iter()
            .filter(|x| self.gamma.contains(x))
            .count()
    }
}

/// Sample `index` of `H_{ω,λ}^Λ` on the model box.
pub fn sample(model: &AndersonModel, seed: u64, index: u64) -> Result<LatticeOperator> {
    let base = model.base_operator()?;
    let add = model.disorder_on(&base, seed, index);
    base.with_added_potential(&add)
}

/// Sample `index` restricted to another box; shared sites carry the same `ω`.
pub fn sample_on(model: &AndersonModel, region: &BoxRegion, seed: u64, index: u64) -> Result<LatticeOperator> {
    sample(&model.with_region(region.clone())?, seed, index)
}

/// How `E_∅(H₀)` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E0Source {
    /// `V⁽⁰⁾ = 0`, so `E_∅(H₀) = 0`.
    Exact,
    /// Lowest eigenvalue of the periodic cell operator (zero quasi-momentum).
    PeriodicCell,
    /// Ground energy of `H₀^Λ`, an upper approximation.
    FiniteVolume,
}

/// `E_∅(H₀)` on all of `Z^d`, or a flagged finite-volume stand-in.
pub fn reference_e0(model: &AndersonModel) -> Result<(f64, E0Source)> {
    match model.background() {
        Potential::Zero => Ok((0.0, E0Source::Exact)),
        Potential::Periodic { dim, period, .. } => {
            let d = *dim;
            let p = *period as i64;
            let n = (p as usize).pow(d as u32);
            if n > DENSE_LIMIT {
                return Err(Error::Size(format!("periodic cell of {n} sites exceeds {DENSE_LIMIT}")));
            }
            let sites: Vec<Site> = (0..n)
                .map(|mut i| {
                    let mut x = vec![0i64; d];
                    for c in x.iter_mut().rev() {
                        *c = (i % p as usize) as i64;
                        i /= p as usize;
                    }
                    x
                })
                .collect();
            let index = |x: &[i64]| x.iter().fold(0usize, |acc, c| acc * p as usize + c.rem_euclid(p) as usize);
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (i, x) in sites.iter().enumerate() {
                m[(i, i)] += 2.0 * d as f64 + model.background().eval(x)?;
                for axis in 0..d {
                    for step in [-1i64, 1] {
                        let mut y = x.clone();
                        y[axis] += step;
                        m[(i, index(&y))] -= 1.0;
                    }
                }
            }
            let e = m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((e, E0Source::PeriodicCell))
        }
        _ => Ok((ground_energy(&model.base_operator()?, DEFAULT_TOL)?, E0Source::FiniteVolume)),
    }
}

fn model_params(model: &AndersonModel, e0: f64) -> Result<ModelParams> {
    let spread = model.background().stats(model.region())?.spread();
    ModelParams::new(model.dim(), model.k(), model.q(), spread, e0)
}

/// Which estimate placed `E1` below `E_Γ(H₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowBinding {
    /// `E1 < E0 + δ_lower`, a rigorous floor for `E_Γ(H₀)`.
    AnalyticFloor,
    /// Only the trimmed box energy `E^Λ_Γ(H₀) ≥ E_Γ(H₀)` exceeds `E1`.
    FiniteVolumeProxy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub e0: f64,
    pub e0_source: E0Source,
    pub analytic_floor: f64,
    pub trimmed_proxy: f64,
    pub binding: WindowBinding,
}

/// Check `E_∅(H₀) < E1 < E_Γ(H₀)` as far as it can be checked.
pub fn energy_window(model: &AndersonModel, e1: f64) -> Result<EnergyWindow> {
    let (e0, e0_source) = reference_e0(model)?;
    let floor = e0 + delta_lower(&model_params(model, e0)?)?;
    let trimmed = assemble(model.region(), model.background(), Some(model.gamma()), Mode::Trimmed)?;
    let proxy = ground_energy(&trimmed, DEFAULT_TOL)?;
    if !(e1 > e0) {
        return Err(Error::Domain(format!("need E1 > E_∅(H₀) = {e0}, got E1 = {e1}")));
    }
    let binding = if e1 < floor {
        WindowBinding::AnalyticFloor
    } else if e1 < proxy {
        WindowBinding::FiniteVolumeProxy
    } else {
        return Err(Error::Domain(format!(
            "need E1 < E_Γ(H₀); E1 = {e1} is not below the trimmed box energy {proxy}"
        )));
    };
    Ok(EnergyWindow {
        e0,
        e0_source,
        analytic_floor: floor,
        trimmed_proxy: proxy,
        binding,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaMode {
    /// Closed-form lower bound; needs `E1 < E0 + δ_lower`.
    Analytic,
    /// `max_s (E^Λ_Γ(H₀, s) - E1)/s` over a log grid of penalties.
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaScan {
    pub kappa: f64,
    pub argmax_s: f64,
    /// `(s, E^Λ(H₀ + s χ_Γ))` on the grid.
    pub points: Vec<(f64, f64)>,
}

/// Numeric κ on the model box.
pub fn kappa_numeric(model: &AndersonModel, e1: f64) -> Result<KappaScan> {
    let (lo, hi, n) = KAPPA_SCAN;
    let grid = logspace(lo, hi, n);
    let points = grid
        .par_iter()
        .map(|&s| {
            let op = assemble(model.region(), model.background(), Some(model.gamma()), Mode::Penalized(s))?;
            Ok((s, ground_energy(&op, 1e-12)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut kappa, mut argmax_s) = (f64::NEG_INFINITY, f64::NAN);
    for &(s, e) in &points {
        let k = (e - e1) / s;
        if k > kappa {
            kappa = k;
            argmax_s = s;
        }
    }
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!(
            "no penalty on the scan lifts the ground energy above E1 = {e1}"
        )));
    }
    Ok(KappaScan {
        kappa,
        argmax_s,
        points,
    })
}

/// Analytic κ lower bound with the reference `E_∅(H₀)` of the model.
pub fn kappa_analytic(model: &AndersonModel, e1: f64) -> Result<f64> {
    let (e0, _) = reference_e0(model)?;
    Ok(kappa_lower(&model_params(model, e0)?, e1)?.kappa_lb)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WegnerReport {
    pub interval: (f64, f64),
    pub e1: f64,
    pub lambda: f64,
    pub side: f64,
    pub kappa_mode: KappaMode,
    pub kappa_used: f64,
    /// Closed-form value as a cross-check, when `E1` is in its range.
    pub kappa_analytic: Option<f64>,
    pub window: EnergyWindow,
    pub n_samples: usize,
    pub seed: u64,
    pub empirical_mean: f64,
    pub std_error: f64,
    pub concentration: f64,
    pub gamma_count: usize,
    pub bound_rhs: f64,
    pub passed: bool,
}

impl WegnerReport {
    pub fn csv_header() -> &'static str {
        "a,b,E1,lambda,L,kappa_mode,kappa,kappa_analytic,n_samples,seed,mean,std_error,S_Lambda,gamma_count,bound_rhs,passed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
            self.interval.0,
            self.interval.1,
            self.e1,
            self.lambda,
            self.side,
            match self.kappa_mode {
                KappaMode::Analytic => "analytic",
                KappaMode::Numeric => "numeric",
            },
            self.kappa_used,
            self.kappa_analytic.map(|k| format!("{k:.16e}")).unwrap_or_default(),
            self.n_samples,
            self.seed,
            self.empirical_mean,
            self.std_error,
            self.concentration,
            self.gamma_count,
            self.bound_rhs,
            self.passed
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "wegner I=[{}, {}] E1={} lambda={}", self.interval.0, self.interval.1, self.e1, self.lambda);
        let _ = writeln!(
            s,
            "  E0={} ({:?}) floor={} trimmed_proxy={} binding={:?}",
            self.window.e0, self.window.e0_source, self.window.analytic_floor, self.window.trimmed_proxy, self.window.binding
        );
        let _ = writeln!(s, "  kappa={} ({:?}) analytic={:?}", self.kappa_used, self.kappa_mode, self.kappa_analytic);
        let _ = writeln!(
            s,
            "  mean={} se={} n={} seed={}",
            self.empirical_mean, self.std_error, self.n_samples, self.seed
        );
        let _ = writeln!(
            s,
            "  rhs=8/kappa*S({})*{}={} passed={}",
            self.concentration, self.gamma_count, self.bound_rhs, self.passed
        );
        s
    }
}

/// Monte Carlo `E tr χ_I(H_{ω,λ}^Λ)` against `8 κ⁻¹ S_Λ(|I|/λ) |Γ∩Λ|`.
pub fn wegner_experiment(
    model: &AndersonModel,
    interval: (f64, f64),
    e1: f64,
    n_samples: usize,
    seed: u64,
    kappa_mode: KappaMode,
) -> Result<WegnerReport> {
    let (a, b) = interval;
    if !(a <= b) {
        return invalid(format!("interval needs a <= b, got [{a}, {b}]"));
    }
    if !(b <= e1) {
        return Err(Error::Domain(format!("interval [{a}, {b}] is not inside (-inf, E1 = {e1}]")));
    }
    if n_samples == 0 {
        return invalid("n_samples must be at least 1");
    }
    let window = energy_window(model, e1)?;
    let analytic = kappa_analytic(model, e1).ok();
    let kappa_used = match kappa_mode {
        KappaMode::Analytic => kappa_analytic(model, e1)?,
        KappaMode::Numeric => kappa_numeric(model, e1)?.kappa,
    };
    let base = model.base_operator()?;
    let counts = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let op = base.with_added_potential(&model.disorder_on(&base, seed, i))?;
            Ok(count_eigs(&op, a, b)?.count as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    let n = n_samples as f64;
    let sum: u64 = counts.iter().sum();
    let sum_sq: u64 = counts.iter().map(|c| c * c).sum();
    let mean = sum as f64 / n;
    let std_error = if n_samples > 1 {
        let var = (sum_sq as f64 - n * mean * mean).max(0.0) / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let concentration = model.concentration_on_box((b - a) / model.lambda())?;
    let gamma_count = model.gamma_count();
    let bound_rhs = 8.0 / kappa_used * concentration * gamma_count as f64;
    Ok(WegnerReport {
        interval,
        e1,
        lambda: model.lambda(),
        side: model.region().side(),
        kappa_mode,
        kappa_used,
        kappa_analytic: analytic,
        window,
        n_samples,
        seed,
        empirical_mean: mean,
        std_error,
        concentration,
        gamma_count,
        bound_rhs,
        passed: mean <= bound_rhs + 3.0 * std_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvpRow {
    pub index: u64,
    pub rank: usize,
    /// Smallest eigenvalue of `P χ_Γ P` on `ran P`; `None` when `P = 0`.
    pub min_eig: Option<f64>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvpReport {
    pub e1: f64,
    pub kappa_lb: f64,
    pub seed: u64,
    pub rows: Vec<PvpRow>,
    pub vacuous: usize,
    pub violations: usize,
}

impl PvpReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,rank,min_eig,kappa_lb,ok\n");
        for r in &self.rows {
            let m = r.min_eig.map(|v| format!("{v:.16e}")).unwrap_or_default();
            let _ = writeln!(s, "{},{},{m},{:.16e},{}", r.index, r.rank, self.kappa_lb, r.ok);
        }
        s
    }
}

/// Tolerance on `min eig(P χ_Γ P) ≥ κ_lb`.
pub const PVP_TOL: f64 = 1e-8;

/// `min eig(P χ_Γ P |_{ran P})` for `P = χ_{(-∞, E1]}(H)`, with the rank of `P`.
pub fn projected_gamma_min(op: &LatticeOperator, e1: f64) -> Result<(usize, Option<f64>)> {
    let eig = op.to_dense()?.symmetric_eigen();
    let keep: Vec<usize> = (0..op.n()).filter(|&i| eig.eigenvalues[i] <= e1).collect();
    if keep.is_empty() {
        return Ok((0, None));
    }
    let u = eig.eigenvectors.select_columns(&keep);
    let mut weighted = u.clone();
    for (i, &g) in op.on_gamma().iter().enumerate() {
        if !g {
            weighted.row_mut(i).fill(0.0);
        }
    }
    let m = u.transpose() * weighted;
    let min = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok((keep.len(), Some(min)))
}

/// `P χ_Γ P ≥ κ_lb P` on `n_samples` samples, with the closed-form `κ_lb`.
pub fn pvp_check(model: &AndersonModel, e1: f64, seed: u64, n_samples: usize) -> Result<PvpReport> {
    energy_window(model, e1)?;
    let kappa_lb = kappa_analytic(model, e1)?;
    let base = model.base_operator()?;
    let rows = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let op = base.with_added_potential(&model.disorder_on(&base, seed, i))?;
            let (rank, min_eig) = projected_gamma_min(&op, e1)?;
            let ok = min_eig.is_none_or(|v| v >= kappa_lb - PVP_TOL);
            Ok(PvpRow {
                index: i,
                rank,
                min_eig,
                ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PvpReport {
        e1,
        kappa_lb,
        seed,
        vacuous: rows.iter().filter(|r| r.rank == 0).count(),
        violations: rows.iter().filter(|r| !r.ok).count(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAveragingReport {
    pub zeta: Site,
    pub interval: (f64, f64),
    pub integral: f64,
    /// Variation of the integrand across nodes divided by the cell count;
    /// zero for atomic distributions, where the quadrature is exact.
    pub quadrature_error: f64,
    pub concentration: f64,
    pub bound: f64,
    pub passed: bool,
}

impl SpectralAveragingReport {
    pub fn csv_header() -> &'static str {
        "a,b,integral,quadrature_error,S_mu,bound,passed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.interval.0, self.interval.1, self.integral, self.quadrature_error, self.concentration, self.bound, self.passed
        )
    }
}

/// `∫ dμ_ζ(ω_ζ) ⟨δ_ζ, χ_I(H_{ω,λ}^Λ) δ_ζ⟩ ≤ 8 S_{μ_ζ}(|I|/λ)` for each interval,
/// with the other `ω` drawn once from sample 0 of `seed`.
pub fn spectral_averaging_sweep(
    model: &AndersonModel,
    zeta: &[i64],
    intervals: &[(f64, f64)],
    quadrature_n: usize,
    seed: u64,
) -> Result<Vec<SpectralAveragingReport>> {
    let dist = model
        .dist_at(zeta)
        .ok_or_else(|| Error::InvalidArgument(format!("site {zeta:?} is not in Γ")))?
        .clone();
    let base = model.base_operator()?;
    let iz = base
        .index_of(zeta)
        .ok_or_else(|| Error::InvalidArgument(format!("site {zeta:?} is not in the box")))?;
    if let Some(&(a, b)) = intervals.iter().find(|(a, b)| !(a <= b)) {
        return invalid(format!("interval needs a <= b, got [{a}, {b}]"));
    }
    let mut others = model.disorder_on(&base, seed, 0);
    others[iz] = 0.0;
    let nodes = dist.quadrature(quadrature_n)?;
    // Per node: eigenvalues and |⟨δ_ζ, φ_k⟩|².
    let spectra = nodes
        .par_iter()
        .map(|&(v, _)| {
            let mut add = others.clone();
            add[iz] = model.lambda() * v;
            let eig = base.with_added_potential(&add)?.to_dense()?.symmetric_eigen();
            let weights: Vec<f64> = (0..base.n()).map(|k| eig.eigenvectors[(iz, k)].powi(2)).collect();
            Ok((eig.eigenvalues.as_slice().to_vec(), weights))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = base.matrix().norm_inf().max(1.0) + model.lambda() * dist.support().1;
    let eps = 1e-12 * scale;
    intervals
        .iter()
        .map(|&(a, b)| {
            let f: Vec<f64> = spectra
                .iter()
                .map(|(vals, w)| fsum(vals.iter().zip(w).filter(|(e, _)| **e >= a - eps && **e <= b + eps).map(|(_, w)| *w)))
                .collect();
            let integral = fsum(f.iter().zip(&nodes).map(|(fv, (_, w))| fv * w));
            let quadrature_error = if dist.is_atomic() {
                0.0
            } else {
                fsum(f.windows(2).map(|p| (p[1] - p[0]).abs())) / nodes.len() as f64
            };
            let concentration = dist.concentration((b - a) / model.lambda())?;
            let bound = 8.0 * concentration;
            Ok(SpectralAveragingReport {
                zeta: zeta.to_vec(),
                interval: (a, b),
                integral,
                quadrature_error,
                concentration,
                bound,
                passed: integral <= bound + quadrature_error,
            })
        })
        .collect()
}

pub fn spectral_averaging_check(
    model: &AndersonModel,
    zeta: &[i64],
    interval: (f64, f64),
    quadrature_n: usize,
    seed: u64,
) -> Result<SpectralAveragingReport> {
    Ok(spectral_averaging_sweep(model, zeta, &[interval], quadrature_n, seed)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GsmcRow {
    pub side: f64,
    pub n_sites: usize,
    /// `E_∅(H₀^{Λ_L})`.
    pub e0_box: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GsmcTable {
    pub e0: f64,
    pub e0_source: E0Source,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: Vec<GsmcRow>,
    pub median_monotone: bool,
    pub min_monotone: bool,
    pub min_above_e0: bool,
}

impl GsmcTable {
    pub fn passed(&self) -> bool {
        self.median_monotone && self.min_monotone && self.min_above_e0
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("L,n_sites,E0_box,min,q25,median,q75,max,mean,E0\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.side, r.n_sites, r.e0_box, r.min, r.q25, r.median, r.q75, r.max, r.mean, self.e0
            );
        }
        s
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Slack on comparisons between solver outputs.
const GS_TOL: f64 = 1e-9;

/// Sample quantiles of `E_∅(H_{ω,λ}^{Λ_L})` for each side in `sides`, all
/// boxes sharing the model's centre so samples are coupled across sides.
pub fn ground_energy_mc(model: &AndersonModel, sides: &[f64], n_samples: usize, seed: u64) -> Result<GsmcTable> {
    if n_samples == 0 || sides.is_empty() {
        return invalid("ground_energy_mc needs n_samples >= 1 and at least one side L");
    }
    if let Some(d) = model.dists().iter().find(|d| d.support().0 != 0.0) {
        return Err(Error::Domain(format!(
            "ground-state energy experiment needs inf supp μ = 0, got {}",
            d.support().0
        )));
    }
    if !matches!(model.background(), Potential::Zero | Potential::Periodic { .. }) {
        return invalid("ground-state energy experiment needs a zero or periodic background");
    }
    let (e0, e0_source) = reference_e0(model)?;
    let mut rows = Vec::with_capacity(sides.len());
    for &side in sides {
        let region = BoxRegion::new(model.region().center().to_vec(), side, model.region().is_open())?;
        let m = model.with_region(region)?;
        let base = m.base_operator()?;
        let e0_box = ground_energy(&base, DEFAULT_TOL)?;
        let mut energies = (0..n_samples as u64)
            .into_par_iter()
            .map(|i| ground_energy(&base.with_added_potential(&m.disorder_on(&base, seed, i))?, DEFAULT_TOL))
            .collect::<Result<Vec<f64>>>()?;
        let mean = fsum(energies.iter().copied()) / n_samples as f64;
        energies.sort_by(f64::total_cmp);
        rows.push(GsmcRow {
            side,
            n_sites: base.n(),
            e0_box,
            min: energies[0],
            q25: quantile(&energies, 0.25),
            median: quantile(&energies, 0.5),
            q75: quantile(&energies, 0.75),
            max: energies[n_samples - 1],
            mean,
        });
    }
    let mut order: Vec<&GsmcRow> = rows.iter().collect();
    order.sort_by(|a, b| a.side.total_cmp(&b.side));
    let median_monotone = order.windows(2).all(|w| w[1].median <= w[0].median + GS_TOL);
    let min_monotone = order.windows(2).all(|w| w[1].min <= w[0].min + GS_TOL);
    let min_above_e0 = rows.iter().all(|r| r.min >= e0 - GS_TOL);
    Ok(GsmcTable {
        e0,
        e0_source,
        n_samples,
        seed,
        rows,
        median_monotone,
        min_monotone,
        min_above_e0,
    })
}
