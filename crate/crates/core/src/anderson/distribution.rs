//! Single-site distributions `μ_ζ` and their concentration functions
//! `S_μ(t) = sup_a μ([a, a + t])`.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteDistribution {
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// `v0` with probability `p`, `v1` with probability `1 - p`.
    TwoPoint { p: f64, v0: f64, v1: f64 },
    /// Atoms `values[i]` with weights `weights[i]` (normalized on use).
    Discrete { values: Vec<f64>, weights: Vec<f64> },
    /// `lo + (hi - lo) X` with `X ~ Beta(alpha, beta)`.
    BetaLike { alpha: f64, beta: f64, lo: f64, hi: f64 },
    /// Degenerate; only accepted by models built in test mode.
    PointMass { value: f64 },
}

impl SiteDistribution {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be finite, got {v}"))
            }
        };
        match self {
            SiteDistribution::Uniform { a, b } => {
                finite(*a, "a")?;
                finite(*b, "b")?;
                if !(a < b) {
                    return invalid(format!("uniform needs a < b, got [{a}, {b}]"));
                }
            }
            SiteDistribution::TwoPoint { p, v0, v1 } => {
                finite(*v0, "v0")?;
                finite(*v1, "v1")?;
                if !(v0 < v1) {
                    return invalid(format!("two-point needs v0 < v1, got {v0}, {v1}"));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return invalid(format!("two-point needs 0 < p < 1, got {p}"));
                }
            }
            SiteDistribution::Discrete { values, weights } => {
                if values.len() != weights.len() || values.len() < 2 {
                    return invalid("discrete needs at least two atoms and one weight per atom");
                }
                for &v in values {
                    finite(v, "atom")?;
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return invalid("discrete weights must be finite and >= 0");
                }
                let positive: Vec<f64> = values
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(v, _)| *v)
                    .collect();
                if positive.iter().all(|v| *v == positive[0]) {
                    return invalid("discrete distribution is a single point mass");
                }
            }
            SiteDistribution::BetaLike { alpha, beta, lo, hi } => {
                finite(*lo, "lo")?;
                finite(*hi, "hi")?;
                if !(alpha > &0.0 && beta > &0.0 && alpha.is_finite() && beta.is_finite()) {
                    return invalid("beta shape parameters must be finite and > 0");
                }
                if !(lo < hi) {
                    return invalid(format!("beta-like needs lo < hi, got [{lo}, {hi}]"));
                }
            }
            SiteDistribution::PointMass { value } => finite(*value, "value")?,
        }
        let (lo, _) = self.support();
        if lo < 0.0 {
            return invalid(format!("support must lie in [0, M], but starts at {lo}"));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, SiteDistribution::PointMass { .. })
    }

    /// Smallest closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            SiteDistribution::Uniform { a, b } => (*a, *b),
            SiteDistribution::TwoPoint { v0, v1, .. } => (*v0, *v1),
            SiteDistribution::Discrete { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (v, _)| (l.min(*v), h.max(*v))),
            SiteDistribution::BetaLike { lo, hi, .. } => (*lo, *hi),
            SiteDistribution::PointMass { value } => (*value, *value),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            SiteDistribution::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            SiteDistribution::TwoPoint { p, v0, v1 } => {
                if rng.random::<f64>() < *p {
                    *v0
                } else {
                    *v1
                }
            }
            SiteDistribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    if u < *w {
                        return *v;
                    }
                    u -= w;
                }
                // Rounding left u at the top edge; take the last atom with mass.
                values
                    .iter()
                    .zip(weights)
                    .rev()
                    .find(|(_, w)| **w > 0.0)
                    .map(|(v, _)| *v)
                    .unwrap_or(values[0])
            }
            SiteDistribution::BetaLike { alpha, beta, lo, hi } => {
                let x = Beta::new(*alpha, *beta)
                    .map(|b| b.sample(rng))
                    .unwrap_or(0.5);
                lo + (hi - lo) * x
            }
            SiteDistribution::PointMass { value } => *value,
        }
    }

    /// `S_μ(t) = sup_a μ([a, a + t])`.
    pub fn concentration(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return invalid(format!("concentration needs t >= 0, got {t}"));
        }
        match self {
            SiteDistribution::Uniform { a, b } => Ok((t / (b - a)).min(1.0)),
            SiteDistribution::TwoPoint { p, v0, v1 } => Ok(if t >= v1 - v0 { 1.0 } else { p.max(1.0 - p) }),
            SiteDistribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut atoms: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
                atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
                // Windows [v_i, v_i + t] starting at an atom attain the sup.
                let mut best = 0.0f64;
                let mut j = 0;
                let mut mass = 0.0;
                for i in 0..atoms.len() {
                    if j < i {
                        j = i;
                        mass = 0.0;
                    }
                    while j < atoms.len() && atoms[j].0 <= atoms[i].0 + t {
                        mass += atoms[j].1;
                        j += 1;
                    }
                    best = best.max(mass);
                    mass -= atoms[i].1;
                }
                Ok((best / total).min(1.0))
            }
            SiteDistribution::BetaLike { .. } => Err(Error::NotImplemented(
                "concentration function of beta-like distributions".into(),
            )),
            SiteDistribution::PointMass { .. } => Ok(1.0),
        }
    }

    /// Quadrature nodes and weights for `∫ f dμ`: exact for atomic measures,
    /// composite midpoint with `n` cells otherwise.
    pub fn quadrature(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        if n == 0 {
            return invalid("quadrature needs at least one node");
        }
        match self {
            SiteDistribution::Uniform { a, b } => {
                let h = (b - a) / n as f64;
                Ok((0..n).map(|i| (a + (i as f64 + 0.5) * h, 1.0 / n as f64)).collect())
            }
            SiteDistribution::TwoPoint { p, v0, v1 } => Ok(vec![(*v0, *p), (*v1, 1.0 - p)]),
            SiteDistribution::Discrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                Ok(values
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(v, w)| (*v, w / total))
                    .collect())
            }
            SiteDistribution::BetaLike { .. } => Err(Error::NotImplemented(
                "quadrature for beta-like distributions".into(),
            )),
            SiteDistribution::PointMass { value } => Ok(vec![(*value, 1.0)]),
        }
    }

    /// Whether quadrature with [`Self::quadrature`] is exact.
    pub fn is_atomic(&self) -> bool {
        !matches!(
            self,
            SiteDistribution::Uniform { .. } | SiteDistribution::BetaLike { .. }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn concentration_examples() {
        let u = SiteDistribution::Uniform { a: 0.0, b: 1.0 };
        assert_eq!(u.concentration(0.5).unwrap(), 0.5);
        assert_eq!(u.concentration(2.0).unwrap(), 1.0);
        let tp = SiteDistribution::TwoPoint {
            p: 0.3,
            v0: 0.0,
            v1: 4.0,
        };
        assert_eq!(tp.concentration(1.0).unwrap(), 0.7);
        assert_eq!(tp.concentration(4.0).unwrap(), 1.0);
        let d = SiteDistribution::Discrete {
            values: vec![0.0, 1.0, 1.5, 3.0],
            weights: vec![1.0, 1.0, 1.0, 1.0],
        };
        assert_eq!(d.concentration(0.0).unwrap(), 0.25);
        assert_eq!(d.concentration(0.5).unwrap(), 0.5);
        assert_eq!(d.concentration(1.5).unwrap(), 0.75);
        assert_eq!(d.concentration(3.0).unwrap(), 1.0);
        let b = SiteDistribution::BetaLike {
            alpha: 2.0,
            beta: 2.0,
            lo: 0.0,
            hi: 1.0,
        };
        assert!(matches!(b.concentration(0.1), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn validation() {
        assert!(SiteDistribution::Uniform { a: -1.0, b: 1.0 }.validate().is_err());
        assert!(SiteDistribution::Uniform { a: 1.0, b: 1.0 }.validate().is_err());
        assert!(SiteDistribution::TwoPoint {
            p: 1.0,
            v0: 0.0,
            v1: 1.0
        }
        .validate()
        .is_err());
        assert!(SiteDistribution::Discrete {
            values: vec![1.0, 1.0],
            weights: vec![0.5, 0.5]
        }
        .validate()
        .is_err());
        assert!(SiteDistribution::PointMass { value: 0.0 }.validate().is_ok());
    }

    #[test]
    fn samples_stay_in_support() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let ds = [
            SiteDistribution::Uniform { a: 0.5, b: 2.0 },
            SiteDistribution::TwoPoint {
                p: 0.5,
                v0: 0.0,
                v1: 3.0,
            },
            SiteDistribution::BetaLike {
                alpha: 0.5,
                beta: 3.0,
                lo: 1.0,
                hi: 2.0,
            },
        ];
        for d in &ds {
            let (lo, hi) = d.support();
            for _ in 0..1000 {
                let x = d.sample(&mut rng);
                assert!(x >= lo && x <= hi);
            }
        }
    }
}
