//! Typed access to the free-form parameter map of an experiment config.

use std::collections::HashMap;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use super::RunError;
use crate::anderson::{AndersonModel, SiteDistribution};
use crate::hamiltonian::Potential;
use crate::lattice::{BoxRegion, Site, TrimPattern, TrimPatternRecord};

type Res<T> = std::result::Result<T, RunError>;

fn bad(name: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("parameter `{name}`: {msg}"))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub Map<String, Value>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.0.insert(key.to_string(), value);
    }

    /// Apply `key=value`; the value is read as JSON and falls back to a string.
    pub fn set_from_str(&mut self, assignment: &str) -> Res<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("--set expects key=value, got `{assignment}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(RunError::Config(format!("--set has an empty key in `{assignment}`")));
        }
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        self.insert(k, value);
        Ok(())
    }

    pub fn has(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn get<T: DeserializeOwned>(&self, name: &str) -> Res<Option<T>> {
        match self.0.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| bad(name, e)),
        }
    }

    pub fn req<T: DeserializeOwned>(&self, name: &str) -> Res<T> {
        self.get(name)?.ok_or_else(|| bad(name, "is required"))
    }

    pub fn or<T: DeserializeOwned>(&self, name: &str, default: T) -> Res<T> {
        Ok(self.get(name)?.unwrap_or(default))
    }

    pub fn f64(&self, name: &str) -> Res<f64> {
        let v: f64 = self.req(name)?;
        if !v.is_finite() {
            return Err(bad(name, "must be finite"));
        }
        Ok(v)
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Res<f64> {
        if self.has(name) {
            self.f64(name)
        } else {
            Ok(default)
        }
    }

    pub fn positive(&self, name: &str, default: Option<f64>) -> Res<f64> {
        let v = match default {
            Some(d) => self.f64_or(name, d)?,
            None => self.f64(name)?,
        };
        if v <= 0.0 {
            return Err(bad(name, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, name: &str, default: usize) -> Res<usize> {
        let v: usize = self.or(name, default)?;
        if v == 0 {
            return Err(bad(name, "must be >= 1"));
        }
        Ok(v)
    }

    pub fn dim(&self) -> Res<usize> {
        let d: usize = self.or("d", 1)?;
        if d == 0 {
            return Err(bad("d", "must be >= 1"));
        }
        Ok(d)
    }

    pub fn seed(&self) -> Res<u64> {
        self.or("seed", 0)
    }

    /// `Λ_L` around `center` (default the origin); `open` selects `Λ⁽⁰⁾`.
    pub fn region_with_side(&self, side: f64) -> Res<BoxRegion> {
        let d = self.dim()?;
        let center: Site = self.or("center", vec![0; d])?;
        if center.len() != d {
            return Err(bad("center", format!("needs {d} coordinates")));
        }
        let open: bool = self.or("open", false)?;
        BoxRegion::new(center, side, open).map_err(|e| bad("L", e))
    }

    pub fn region(&self) -> Res<BoxRegion> {
        let side = self.positive("L", None)?;
        self.region_with_side(side)
    }

    /// `(Γ, K, Q)`: an explicit `gamma` record, or `K Z^d` from `K` alone.
    pub fn pattern(&self) -> Res<(TrimPattern, u64, u64)> {
        let d = self.dim()?;
        if let Some(rec) = self.get::<TrimPatternRecord>("gamma")? {
            if rec.dim != d {
                return Err(bad("gamma", format!("has dimension {}, but d = {d}", rec.dim)));
            }
            let q = rec.q;
            let k: u64 = match self.get("K")? {
                Some(k) => k,
                None if rec.period > 0 => rec.period,
                None => return Err(bad("K", "is required with an explicit gamma")),
            };
            let q = self.or("Q", q)?;
            let g = TrimPattern::try_from(rec).map_err(|e| bad("gamma", e))?;
            return Ok((g, k, q));
        }
        let k: u64 = self.req("K")?;
        let g = TrimPattern::sublattice(d, k).map_err(|e| bad("K", e))?;
        let q = self.or("Q", 1)?;
        Ok((g, k, q))
    }

    /// `V` as `{"kind": "zero" | "periodic" | "explicit", ...}`.
    pub fn potential(&self) -> Res<Potential> {
        let d = self.dim()?;
        let Some(spec) = self.get::<Map<String, Value>>("V")? else {
            return Ok(Potential::Zero);
        };
        let sub = Params(spec);
        let kind: String = sub.req("kind").map_err(|e| RunError::Config(format!("V: {e}")))?;
        match kind.as_str() {
            "zero" => Ok(Potential::Zero),
            "periodic" => {
                let period: u64 = sub.req("period").map_err(|e| RunError::Config(format!("V: {e}")))?;
                let values: Vec<f64> = sub.req("values").map_err(|e| RunError::Config(format!("V: {e}")))?;
                Potential::periodic(d, period, values).map_err(|e| bad("V", e))
            }
            "explicit" => {
                let sites: Vec<Site> = sub.req("sites").map_err(|e| RunError::Config(format!("V: {e}")))?;
                let values: Vec<f64> = sub.req("values").map_err(|e| RunError::Config(format!("V: {e}")))?;
                if sites.len() != values.len() || sites.iter().any(|s| s.len() != d) {
                    return Err(bad("V", "explicit potential needs one value per d-dimensional site"));
                }
                Potential::explicit(sites.into_iter().zip(values).collect::<HashMap<_, _>>())
                    .map_err(|e| bad("V", e))
            }
            other => Err(bad("V", format!("unknown kind `{other}`"))),
        }
    }

    pub fn dists(&self) -> Res<Vec<SiteDistribution>> {
        if let Some(list) = self.get::<Vec<SiteDistribution>>("dists")? {
            return Ok(list);
        }
        Ok(vec![self.get::<SiteDistribution>("dist")?.unwrap_or(SiteDistribution::Uniform { a: 0.0, b: 1.0 })])
    }

    pub fn model(&self) -> Res<AndersonModel> {
        let (g, k, q) = self.pattern()?;
        let lambda = self.positive("lambda", Some(1.0))?;
        AndersonModel::new(self.potential()?, g, (k, q), self.dists()?, lambda, self.region()?)
            .map_err(|e| RunError::Config(format!("model: {e}")))
    }

    pub fn interval(&self, name: &str) -> Res<(f64, f64)> {
        let v: [f64; 2] = self.req(name)?;
        if !(v[0] <= v[1]) {
            return Err(bad(name, format!("needs a <= b, got [{}, {}]", v[0], v[1])));
        }
        Ok((v[0], v[1]))
    }
}
