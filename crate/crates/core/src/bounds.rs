//! Closed-form lower and upper bounds on the spectral shift `δ_Γ(H, t)`,
//! the Cheeger-based bounds for `-Δ`, and the constant `κ` entering the
//! Wegner estimate. Each evaluator guards its validity domain.
//!
//! Powers with large exponents are evaluated through logarithms; [`Scaled`]
//! carries values that leave the `f64` range.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::y_from_spread;
use crate::lattice::k_star;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub k: u64,
    pub q: u64,
    /// Spread of the (background) potential.
    pub spread: f64,
    /// Reference ground energy `E_∅(H₀)`.
    #[serde(default)]
    pub e0: f64,
}

impl ModelParams {
    pub fn new(d: usize, k: u64, q: u64, spread: f64, e0: f64) -> Result<Self> {
        let p = Self { d, k, q, spread, e0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 {
            return invalid("need d >= 1 and K >= 1");
        }
        let cells = (self.k as f64).powi(self.d as i32);
        if self.q == 0 || self.q as f64 > cells {
            return invalid(format!("need 1 <= Q <= K^d = {cells}, got Q = {}", self.q));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return invalid(format!("spread must be finite and >= 0, got {}", self.spread));
        }
        if !self.e0.is_finite() {
            return invalid("E0 must be finite");
        }
        Ok(())
    }

    /// `Y = 2d + 1 + spr`.
    pub fn y(&self) -> f64 {
        y_from_spread(self.d, self.spread)
    }

    /// `2dK - 1`.
    fn n(&self) -> f64 {
        (2 * self.d as u64 * self.k - 1) as f64
    }
}

/// `mantissa · 10^exp10` with `1 <= |mantissa| < 10` (or zero).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp10: i64,
}

impl Scaled {
    /// From a natural logarithm of a positive value.
    pub fn from_ln(ln: f64) -> Self {
        let l10 = ln / std::f64::consts::LN_10;
        let e = l10.floor();
        Self {
            mantissa: 10f64.powf(l10 - e),
            exp10: e as i64,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self {
                mantissa: 0.0,
                exp10: 0,
            }
        } else {
            let s = Self::from_ln(v.abs().ln());
            Self {
                mantissa: s.mantissa.copysign(v),
                ..s
            }
        }
    }

    /// Nearest `f64`; zero or infinity outside the representable range.
    pub fn to_f64(self) -> f64 {
        self.mantissa * 10f64.powi(self.exp10.clamp(-400, 400) as i32)
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16}e{}", self.mantissa, self.exp10)
    }
}

/// `ln(Q / ((2dK-1) Y^{2dK-1}))`.
pub fn ln_delta_lower(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    Ok((p.q as f64).ln() - p.n().ln() - p.n() * p.y().ln())
}

/// `δ_Γ(H) >= Q / ((2dK-1) Y^{2dK-1})`.
pub fn delta_lower(p: &ModelParams) -> Result<f64> {
    Ok(ln_delta_lower(p)?.exp())
}

pub fn delta_lower_scaled(p: &ModelParams) -> Result<Scaled> {
    Ok(Scaled::from_ln(ln_delta_lower(p)?))
}

/// `δ_Γ(H, t) >= Q / ((2dK-1) Y^{2dK-1}) · (1 - (Y / (Y + t))^{2dK-1})`.
pub fn delta_t_lower(p: &ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("t must be >= 0, got {t}"));
    }
    let base = delta_lower(p)?;
    if t == f64::INFINITY {
        return Ok(base);
    }
    // 1 - (1 + t/Y)^{-n}, written to keep accuracy for small t.
    let factor = -(-p.n() * (t / p.y()).ln_1p()).exp_m1();
    Ok(base * factor)
}

/// `E_Γ(-Δ) >= 1 / (4d K_*^{2d})`.
pub fn cheeger_free_lower(d: usize, k: u64) -> Result<f64> {
    if d == 0 {
        return invalid("need d >= 1");
    }
    let ks = k_star(k)? as f64;
    Ok(1.0 / (4.0 * d as f64 * ks.powi(2 * d as i32)))
}

/// `E_Γ(-Δ, t) >= 1 / ((6d-1) K_*^{2d})`, valid for `t >= 2d - 1`.
pub fn t_large_lower(d: usize, k: u64, t: f64) -> Result<f64> {
    if d == 0 {
        return invalid("need d >= 1");
    }
    let t_min = 2.0 * d as f64 - 1.0;
    if !(t >= t_min) {
        return Err(Error::Domain(format!(
            "the large-t bound needs t >= 2d - 1 = {t_min}, got t = {t}"
        )));
    }
    let ks = k_star(k)? as f64;
    Ok(1.0 / ((6.0 * d as f64 - 1.0) * ks.powi(2 * d as i32)))
}

/// `E_Γ(-Δ, t) >= t / (4d K_*^{2d} (t + 4d) + 1)`.
pub fn combined_t_lower(d: usize, k: u64, t: f64) -> Result<f64> {
    if d == 0 {
        return invalid("need d >= 1");
    }
    if !(t >= 0.0) {
        return invalid(format!("t must be >= 0, got {t}"));
    }
    let ks = k_star(k)? as f64;
    let c = 4.0 * d as f64 * ks.powi(2 * d as i32);
    if t == f64::INFINITY {
        return Ok(1.0 / c);
    }
    Ok(t / (c * (t + 4.0 * d as f64) + 1.0))
}

/// Two-sided bounds on `δ_Γ(H, t)` given the measured `δ = δ_Γ(H)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// `t δ / (t + 6d + 2 spr)`.
    pub lower_15: f64,
    /// `δ t / (t + 4d + δ + spr)`.
    pub lower_210: f64,
    /// `(X - sqrt(X² - 4 δ t)) / 2` with `X = t + 4d + δ + spr`; the sharpest of the three.
    pub lower_schur: f64,
    /// `2d + spr`.
    pub upper: f64,
}

pub fn sandwich_t(d: usize, spread: f64, t: f64, delta: f64) -> Result<Sandwich> {
    if d == 0 || !(spread >= 0.0) || !(t >= 0.0) || !(delta >= 0.0) || !delta.is_finite() {
        return invalid("sandwich needs d >= 1, spread >= 0, t >= 0 and a finite δ >= 0");
    }
    let dd = d as f64;
    if t == f64::INFINITY {
        return Ok(Sandwich {
            lower_15: delta,
            lower_210: delta,
            lower_schur: delta,
            upper: 2.0 * dd + spread,
        });
    }
    let x = t + 4.0 * dd + delta + spread;
    let disc = (x * x - 4.0 * delta * t).max(0.0);
    Ok(Sandwich {
        lower_15: t * delta / (t + 6.0 * dd + 2.0 * spread),
        lower_210: delta * t / x,
        // Rationalized form of (X - sqrt(disc)) / 2, free of cancellation.
        lower_schur: if delta * t == 0.0 {
            0.0
        } else {
            2.0 * delta * t / (x + disc.sqrt())
        },
        upper: 2.0 * dd + spread,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaBound {
    pub s0: f64,
    pub z: f64,
    pub kappa_lb: f64,
    /// `s = (2dK+1)/(2dK) · s₀ = Z·Y`, where `kappa_lb` is attained.
    pub witness_s: f64,
    /// Maximizer of `(s - s₀)/s · Q (Y + s)^{-2dK}` and the value there.
    pub optimal_s: f64,
    pub kappa_opt: f64,
}

/// Lower bound on `κ(H₀, Γ, E₁)` for `E₀ < E₁ < E₀ + delta_lower`.
pub fn kappa_lower(p: &ModelParams, e1: f64) -> Result<KappaBound> {
    let ln_dl = ln_delta_lower(p)?;
    let dl = ln_dl.exp();
    let gap = e1 - p.e0;
    if !(gap > 0.0) {
        return Err(Error::Domain(format!(
            "need E1 > E0 = {}, got E1 = {e1}",
            p.e0
        )));
    }
    // Ratio gap / delta_lower, through logs when delta_lower underflows.
    let ratio = if dl > 0.0 { gap / dl } else { (gap.ln() - ln_dl).exp() };
    if !(ratio < 1.0) {
        return Err(Error::Domain(format!(
            "need E1 - E0 < delta_lower = {dl:.17e}, got {gap:.17e}"
        )));
    }
    let n = p.n();
    let m = n + 1.0; // 2dK
    let y = p.y();
    // (1 - gap/δ)^{-1/n} - 1, through logs to stay accurate for small gaps.
    let f_minus_1 = (-(-ratio).ln_1p() / n).exp_m1();
    let s0 = y * f_minus_1;
    let z = (m + 1.0) / m * f_minus_1;
    let ln_kappa = (p.q as f64).ln() - (m + 1.0).ln() - m * ((1.0 + z).ln() + y.ln());
    let witness_s = z * y;
    let optimal_s = if s0 == 0.0 {
        0.0
    } else {
        (m + 1.0) / (2.0 * m) * (1.0 + (1.0 + 4.0 * m * y / ((m + 1.0).powi(2) * s0)).sqrt()) * s0
    };
    let kappa_opt = if optimal_s == 0.0 {
        ln_kappa.exp()
    } else {
        (optimal_s - s0) / optimal_s * p.q as f64 * (-m * (y + optimal_s).ln()).exp()
    };
    Ok(KappaBound {
        s0,
        z,
        kappa_lb: ln_kappa.exp(),
        witness_s,
        optimal_s,
        kappa_opt,
    })
}

/// One row of the bounds table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub params: String,
    pub value: Option<Scaled>,
    pub valid: bool,
    pub note: String,
}

fn row(name: &str, params: String, r: Result<f64>) -> BoundRow {
    match r {
        Ok(v) => BoundRow {
            name: name.into(),
            params,
            value: Some(Scaled::from_f64(v)),
            valid: true,
            note: String::new(),
        },
        Err(e) => BoundRow {
            name: name.into(),
            params,
            value: None,
            valid: false,
            note: e.to_string(),
        },
    }
}

/// Every evaluator at the given parameters, penalties and energy `E1`.
pub fn bounds_table(p: &ModelParams, t_values: &[f64], e1: Option<f64>) -> Result<Vec<BoundRow>> {
    p.validate()?;
    let base = format!("d={};K={};Q={};spr={};E0={}", p.d, p.k, p.q, p.spread, p.e0);
    let mut rows = vec![BoundRow {
        name: "delta_lower".into(),
        params: base.clone(),
        value: Some(delta_lower_scaled(p)?),
        valid: true,
        note: String::new(),
    }];
    rows.push(row("cheeger_free_lower", base.clone(), cheeger_free_lower(p.d, p.k)));
    for &t in t_values {
        let pt = format!("{base};t={t}");
        rows.push(row("delta_t_lower", pt.clone(), delta_t_lower(p, t)));
        rows.push(row("t_large_lower", pt.clone(), t_large_lower(p.d, p.k, t)));
        rows.push(row("combined_t_lower", pt, combined_t_lower(p.d, p.k, t)));
    }
    if let Some(e1) = e1 {
        let pe = format!("{base};E1={e1}");
        match kappa_lower(p, e1) {
            Ok(kb) => {
                rows.push(row("kappa_s0", pe.clone(), Ok(kb.s0)));
                rows.push(row("kappa_z", pe.clone(), Ok(kb.z)));
                rows.push(row("kappa_lb", pe, Ok(kb.kappa_lb)));
            }
            Err(e) => rows.push(row("kappa_lb", pe, Err(e))),
        }
    }
    Ok(rows)
}

/// CSV with columns `name, params, value, valid, note`; values keep 17 significant digits.
pub fn table_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("name,params,value,valid,note\n");
    for r in rows {
        let v = r.value.map(|s| s.to_string()).unwrap_or_default();
        let note = r.note.replace('"', "'");
        out.push_str(&format!("{},{},{v},{},\"{note}\"\n", r.name, r.params, r.valid));
    }
    out
}
