//! Batch experiments: a command plus a parameter map in, CSV and a JSON
//! summary out.

mod params;

pub use params::Params;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::anderson::{
    ground_energy_mc, pvp_check, spectral_averaging_sweep, wegner_experiment, KappaMode, WegnerReport,
    SpectralAveragingReport, DEFAULT_QUADRATURE,
};
use crate::bounds::{bounds_table, table_csv, ModelParams};
use crate::cheeger::{beta_bruteforce, default_window, CheegerMode};
use crate::error::Error;
use crate::hamiltonian::{assemble, Mode};
use crate::lattice::{k_star, l1_distance};
use crate::spectra::{
    derivative_check, energy_curve, ground_energy_with, ground_state_pf, uniform_grid, PfOptions, SolveOptions,
    DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bounds,
    Gsenergy,
    Curve,
    Cheeger,
    Wegner,
    Pvp,
    Specavg,
    Gsmc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Gsenergy => "gsenergy",
            Command::Curve => "curve",
            Command::Cheeger => "cheeger",
            Command::Wegner => "wegner",
            Command::Pvp => "pvp",
            Command::Specavg => "specavg",
            Command::Gsmc => "gsmc",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: Params,
}

#[derive(Debug)]
pub enum RunError {
    /// Bad or missing parameter; exit status 2.
    Config(String),
    /// The computation itself failed; exit status 1.
    Runtime(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "invalid config: {m}"),
            RunError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Domain(_) | Error::EmptyDomain(_) | Error::NotImplemented(_) => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Runtime(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, RunError>;

/// Read a config file: either `{"command": ..., "params": {...}}` or a bare
/// parameter object.
pub fn load_config(path: &Path) -> Res<(Option<Command>, Params)> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| RunError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut obj) = v else {
        return Err(RunError::Config("config must be a JSON object".into()));
    };
    let command = match obj.remove("command") {
        None => None,
        Some(c) => Some(
            serde_json::from_value(c).map_err(|e| RunError::Config(format!("parameter `command`: {e}")))?,
        ),
    };
    let params = match obj.remove("params") {
        Some(Value::Object(p)) => {
            if !obj.is_empty() {
                return Err(RunError::Config("config mixes `params` with top-level parameters".into()));
            }
            p
        }
        Some(_) => return Err(RunError::Config("parameter `params` must be an object".into())),
        None => obj,
    };
    Ok((command, Params(params)))
}

/// Result of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub summary: Value,
    /// A checked bound or invariant failed.
    pub violated: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.violated)
    }
}

pub fn run(config: &ExperimentConfig) -> Res<Outcome> {
    let p = &config.params;
    let mut out = match config.command {
        Command::Bounds => run_bounds(p),
        Command::Gsenergy => run_gsenergy(p),
        Command::Curve => run_curve(p),
        Command::Cheeger => run_cheeger(p),
        Command::Wegner => run_wegner(p),
        Command::Pvp => run_pvp(p),
        Command::Specavg => run_specavg(p),
        Command::Gsmc => run_gsmc(p),
    }?;
    if let Value::Object(m) = &mut out.summary {
        m.insert("command".into(), json!(config.command.name()));
        m.insert("params".into(), Value::Object(p.0.clone()));
        m.insert("violated".into(), json!(out.violated));
    }
    Ok(out)
}

/// Summary path next to a CSV path: `x.csv` → `x.json`, otherwise `x` → `x.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "csv") {
        csv.with_extension("json")
    } else {
        let mut s = csv.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }
}

/// Write the CSV (with an optional leading timestamp comment) and the summary.
pub fn write_outputs(outcome: &Outcome, csv_path: &Path, timestamp: Option<u64>) -> Res<PathBuf> {
    let mut csv = String::new();
    if let Some(ts) = timestamp {
        let _ = writeln!(csv, "# generated_unix={ts}");
    }
    csv.push_str(&outcome.csv);
    let io = |e: std::io::Error| RunError::Runtime(format!("cannot write output: {e}"));
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(csv_path, csv).map_err(io)?;
    let sp = summary_path(csv_path);
    let text = serde_json::to_string_pretty(&outcome.summary).map_err(|e| RunError::Runtime(e.to_string()))?;
    fs::write(&sp, text + "\n").map_err(io)?;
    Ok(sp)
}

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_bounds(p: &Params) -> Res<Outcome> {
    let d = p.dim()?;
    let k: u64 = p.req("K")?;
    let q: u64 = p.or("Q", 1)?;
    let spread = p.f64_or("spr", 0.0)?;
    let e0 = p.f64_or("E0", 0.0)?;
    let mp = ModelParams::new(d, k, q, spread, e0)?;
    let t: Vec<f64> = p.or("t_grid", Vec::new())?;
    let e1: Option<f64> = p.get("E1")?;
    let rows = bounds_table(&mp, &t, e1)?;
    let summary = json!({
        "rows": rows.iter().map(|r| json!({
            "name": r.name,
            "params": r.params,
            "value": r.value.map(|v| v.to_f64()),
            "value_text": r.value.map(|v| v.to_string()),
            "valid": r.valid,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        csv: table_csv(&rows),
        summary,
        violated: false,
    })
}

fn parse_mode(p: &Params) -> Res<Mode> {
    let mode: String = p.or("mode", "full".to_string())?;
    match mode.as_str() {
        "full" => Ok(Mode::Full),
        "trimmed" => Ok(Mode::Trimmed),
        "penalized" => Ok(Mode::Penalized(p.f64("t")?)),
        other => Err(RunError::Config(format!(
            "parameter `mode`: expected full, trimmed or penalized, got `{other}`"
        ))),
    }
}

fn run_gsenergy(p: &Params) -> Res<Outcome> {
    let region = p.region()?;
    let v = p.potential()?;
    let mode = parse_mode(p)?;
    let gamma = if p.has("gamma") || p.has("K") {
        Some(p.pattern()?.0)
    } else {
        None
    };
    let op = assemble(&region, &v, gamma.as_ref(), mode)?;
    let tol = p.positive("tol", Some(DEFAULT_TOL))?;
    let solve = ground_energy_with(&op, &SolveOptions::with_tol(tol))?;
    let energy = solve.values[0];
    let t = match mode {
        Mode::Penalized(t) => t,
        _ => 0.0,
    };
    let mode_name = match mode {
        Mode::Full => "full",
        Mode::Trimmed => "trimmed",
        Mode::Penalized(_) => "penalized",
    };
    let mut csv = String::from("L,mode,t,n,energy,solver,iterations,residual\n");
    let _ = writeln!(
        csv,
        "{},{mode_name},{},{},{},{:?},{},{}",
        region.side(),
        e17(t),
        op.n(),
        e17(energy),
        solve.meta.method,
        solve.meta.iterations,
        e17(solve.meta.residual)
    );
    let mut summary = json!({
        "energy": energy,
        "n": op.n(),
        "solver": format!("{:?}", solve.meta.method),
        "residual": solve.meta.residual,
    });
    let mut violated = false;
    if p.or("pf", false)? {
        let gs = ground_state_pf(&op, &PfOptions::default())?;
        violated |= !gs.ucp.holds();
        summary["ucp"] = serde_json::to_value(&gs.ucp).map_err(|e| RunError::Runtime(e.to_string()))?;
        summary["pf_energy"] = json!(gs.energy);
    }
    if let Some(expect) = p.get::<f64>("expect")? {
        let etol = p.positive("expect_tol", Some(1e-10))?;
        let ok = (energy - expect).abs() <= etol;
        violated |= !ok;
        summary["expect"] = json!({"value": expect, "tol": etol, "ok": ok});
    }
    Ok(Outcome { csv, summary, violated })
}

fn run_curve(p: &Params) -> Res<Outcome> {
    let region = p.region()?;
    let v = p.potential()?;
    let (g, k, q) = p.pattern()?;
    let grid: Vec<f64> = match p.get::<Vec<f64>>("t_grid")? {
        Some(g) => g,
        None => uniform_grid(p.positive("t_max", Some(10.0))?, p.positive("dt", Some(0.5))?)?,
    };
    let tol = p.positive("tol", Some(1e-12))?;
    let curve = energy_curve(&region, &g, &v, &grid, tol)?;
    let report = derivative_check(&curve, q, k, p.f64_or("extra_tol", 0.0)?)?;
    let energies = curve.energies();
    let monotone = energies.windows(2).all(|w| w[1] >= w[0] - 2.0 * tol);
    let below_trimmed = curve
        .trimmed_energy
        .is_none_or(|et| energies.iter().all(|&e| e <= et + 2.0 * tol));
    let summary = json!({
        "Y": curve.y(),
        "trimmed_energy": curve.trimmed_energy,
        "monotone": monotone,
        "below_trimmed": below_trimmed,
        "derivative_passed": report.passed(),
        "geometry_matches": report.geometry_matches,
        "counterexamples": report.counterexamples.iter().map(|r| json!({
            "t": r.t, "t_next": r.t_next, "slope": r.slope, "bound": r.bound, "tolerance": r.tolerance,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        csv: curve.to_csv(Some((q, k))),
        summary,
        violated: !(report.passed() && monotone && below_trimmed),
    })
}

fn run_cheeger(p: &Params) -> Res<Outcome> {
    let d = p.dim()?;
    let (g, k, _) = p.pattern()?;
    let window = match p.get::<f64>("window")? {
        Some(side) => p.region_with_side(side)?,
        None => default_window(d, k)?,
    };
    let mode: String = p.or("mode", "trimmed".to_string())?;
    let mode = match mode.as_str() {
        "trimmed" => CheegerMode::Trimmed,
        "penalized" => CheegerMode::Penalized(p.f64("t")?),
        other => {
            return Err(RunError::Config(format!(
                "parameter `mode`: expected trimmed or penalized, got `{other}`"
            )))
        }
    };
    let maxc: Option<usize> = p.get("max_cardinality")?;
    let r = beta_bruteforce(&window, &g, mode, maxc)?;
    let floor = (k_star(k)? as f64).powi(-(d as i32));
    let violated = matches!(mode, CheegerMode::Trimmed) && r.value < floor;
    let mut csv = String::from("mode,t,window,value,beta_one,floor,exhaustive,subsets,minimizer\n");
    let t = match mode {
        CheegerMode::Penalized(t) => t,
        CheegerMode::Trimmed => 0.0,
    };
    let minimizer = r
        .minimizer
        .iter()
        .map(|s| s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{},\"{minimizer}\"",
        if t == 0.0 && matches!(mode, CheegerMode::Trimmed) { "trimmed" } else { "penalized" },
        e17(t),
        window.side(),
        e17(r.value),
        e17(r.beta_one),
        e17(floor),
        r.exhaustive,
        r.subsets_examined
    );
    let summary = json!({
        "value": r.value,
        "floor": floor,
        "exhaustive": r.exhaustive,
        "upper_bound_only": r.upper_bound_only,
        "text": r.to_text(),
    });
    Ok(Outcome { csv, summary, violated })
}

fn kappa_mode(p: &Params) -> Res<KappaMode> {
    let m: String = p.or("kappa_mode", "numeric".to_string())?;
    match m.as_str() {
        "numeric" => Ok(KappaMode::Numeric),
        "analytic" => Ok(KappaMode::Analytic),
        other => Err(RunError::Config(format!(
            "parameter `kappa_mode`: expected numeric or analytic, got `{other}`"
        ))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Res<Value> {
    serde_json::to_value(v).map_err(|e| RunError::Runtime(e.to_string()))
}

fn run_wegner(p: &Params) -> Res<Outcome> {
    let model = p.model()?;
    let interval = p.interval("I")?;
    let e1 = p.f64("E1")?;
    let n = p.count("n_samples", 200)?;
    let r = wegner_experiment(&model, interval, e1, n, p.seed()?, kappa_mode(p)?)?;
    let csv = format!("{}\n{}\n", WegnerReport::csv_header(), r.csv_row());
    let mut summary = to_json(&r)?;
    summary["text"] = json!(r.to_text());
    Ok(Outcome {
        csv,
        summary,
        violated: !r.passed,
    })
}

fn run_pvp(p: &Params) -> Res<Outcome> {
    let model = p.model()?;
    let e1 = p.f64("E1")?;
    let n = p.count("n_samples", 100)?;
    let r = pvp_check(&model, e1, p.seed()?, n)?;
    let summary = json!({
        "kappa_lb": r.kappa_lb,
        "vacuous": r.vacuous,
        "violations": r.violations,
        "n_samples": n,
        "min_over_samples": r.rows.iter().filter_map(|x| x.min_eig).fold(f64::INFINITY, f64::min),
    });
    Ok(Outcome {
        csv: r.to_csv(),
        summary,
        violated: !r.passed(),
    })
}

fn run_specavg(p: &Params) -> Res<Outcome> {
    let model = p.model()?;
    let seed = p.seed()?;
    let zeta: Vec<i64> = match p.get("zeta")? {
        Some(z) => z,
        None => {
            let c = model.region().center().to_vec();
            model
                .region()
                .sites()
                .into_iter()
                .filter(|x| model.gamma().contains(x))
                .min_by_key(|x| l1_distance(x, &c))
                .ok_or_else(|| RunError::Config("parameter `L`: the box holds no site of Γ".into()))?
        }
    };
    let intervals: Vec<(f64, f64)> = if p.has("I") {
        vec![p.interval("I")?]
    } else {
        // Random intervals over [0, 4d + λ·M + sup V], seeded independently of ω.
        let n = p.count("n_intervals", 50)?;
        let d = model.dim() as f64;
        let m = model.dists().iter().map(|x| x.support().1).fold(0.0, f64::max);
        let vsup = model.background().stats(model.region())?.sup.max(0.0);
        let top = 4.0 * d + model.lambda() * m + vsup;
        let max_len = p.positive("max_len", Some(0.5))?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5EC7_A1E5);
        (0..n)
            .map(|_| {
                let a = top * rng.random::<f64>();
                (a, a + max_len * rng.random::<f64>())
            })
            .collect()
    };
    let qn = p.count("quadrature_n", DEFAULT_QUADRATURE)?;
    let reports = spectral_averaging_sweep(&model, &zeta, &intervals, qn, seed)?;
    let mut csv = String::from(SpectralAveragingReport::csv_header());
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let violations = reports.iter().filter(|r| !r.passed).count();
    let summary = json!({
        "zeta": zeta,
        "intervals": reports.len(),
        "violations": violations,
        "max_ratio": reports.iter().map(|r| r.integral / r.bound.max(f64::MIN_POSITIVE)).fold(0.0, f64::max),
    });
    Ok(Outcome {
        csv,
        summary,
        violated: violations > 0,
    })
}

fn run_gsmc(p: &Params) -> Res<Outcome> {
    let sides: Vec<f64> = p.req("L_list")?;
    if sides.is_empty() || sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(RunError::Config("parameter `L_list`: needs positive side lengths".into()));
    }
    let mut q = p.clone();
    if !q.has("L") {
        q.insert("L", json!(sides[0]));
    }
    let model = q.model()?;
    let n = p.count("n_samples", 100)?;
    let t = ground_energy_mc(&model, &sides, n, p.seed()?)?;
    Ok(Outcome {
        csv: t.to_csv(),
        summary: to_json(&t)?,
        violated: !t.passed(),
    })
}
