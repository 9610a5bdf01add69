//! Cheeger constants of finite sets: `β_A = |∂A| / |A|` for `A ⊂ Γ^c` and
//! `β_A(t) = (|∂A| + t |A ∩ Γ|) / |A|`, exhaustive window minima over
//! connected sets, and the isoperimetric bound `|∂A| >= K_*^{-d} |A|`.
//!
//! Boundaries are always taken in all of `Z^d`, so a window minimum is an
//! upper bound on the infimum over finite sets of `Z^d`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{boundary, k_star, neighbors, BoxRegion, Site, TrimPattern};

/// Largest number of admissible sites for an unrestricted enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 24;
/// Hard cap on window size, set by the bitset width.
pub const WINDOW_LIMIT: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "t", rename_all = "lowercase")]
pub enum CheegerMode {
    Trimmed,
    Penalized(f64),
}

impl CheegerMode {
    fn validate(&self) -> Result<()> {
        match self {
            CheegerMode::Penalized(t) if !(t.is_finite() && *t >= 0.0) => {
                invalid(format!("penalty t must be finite and >= 0, got {t}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheegerResult {
    pub value: f64,
    /// `min(value, 1)`.
    pub beta_one: f64,
    pub minimizer: Vec<Site>,
    pub window: BoxRegion,
    pub mode: CheegerMode,
    /// Every admissible connected subset of the window was examined.
    pub exhaustive: bool,
    pub max_cardinality: Option<usize>,
    pub subsets_examined: u64,
    /// Always true: the window minimum bounds the infimum over `Z^d` from above.
    pub upper_bound_only: bool,
}

impl CheegerResult {
    /// Plain-text record with the explicit minimizer.
    pub fn to_text(&self) -> String {
        let mode = match self.mode {
            CheegerMode::Trimmed => "trimmed".to_string(),
            CheegerMode::Penalized(t) => format!("penalized t={t}"),
        };
        let sites: Vec<String> = self
            .minimizer
            .iter()
            .map(|s| format!("({})", s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        format!(
            "beta_window_upper_bound {:.17e}\nbeta_one {:.17e}\nmode {mode}\nwindow_center {:?}\nwindow_side {}\nexhaustive {}\nsubsets_examined {}\nminimizer_size {}\nminimizer {}\n",
            self.value,
            self.beta_one,
            self.window.center(),
            self.window.side(),
            self.exhaustive,
            self.subsets_examined,
            self.minimizer.len(),
            sites.join(" ")
        )
    }
}

fn dedup(a: &[Site]) -> Vec<Site> {
    a.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// `β_A(Γ)` (trimmed) or `β_A(t)` (penalized).
pub fn beta_of_set(a: &[Site], gamma: &TrimPattern, mode: CheegerMode, d: usize) -> Result<f64> {
    mode.validate()?;
    let a = dedup(a);
    if a.is_empty() {
        return invalid("A must be nonempty");
    }
    if gamma.dim() != d {
        return invalid(format!("pattern dimension {} differs from d = {d}", gamma.dim()));
    }
    let on_gamma = a.iter().filter(|x| gamma.contains(x)).count();
    let b = boundary(&a, d)?.size() as f64;
    match mode {
        CheegerMode::Trimmed if on_gamma > 0 => {
            invalid(format!("trimmed mode needs A ⊂ Γ^c, but {on_gamma} sites of A lie in Γ"))
        }
        CheegerMode::Trimmed => Ok(b / a.len() as f64),
        CheegerMode::Penalized(t) => Ok((b + t * on_gamma as f64) / a.len() as f64),
    }
}

struct Graph {
    two_d: u32,
    nbr: Vec<u128>,
    gamma: Vec<bool>,
    t: f64,
    max_card: usize,
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    set: u128,
}

struct Search<'g> {
    g: &'g Graph,
    best: Option<Best>,
    count: u64,
}

impl Search<'_> {
    fn value(&self, size: u32, internal: u32, on_gamma: u32) -> f64 {
        let b = self.g.two_d * size - 2 * internal;
        (b as f64 + self.g.t * on_gamma as f64) / size as f64
    }

    /// Extend `set` by frontier vertices; earlier choices are forbidden in later
    /// branches so each connected set is produced once.
    fn grow(&mut self, set: u128, frontier: u128, forbidden: u128, size: u32, internal: u32, on_gamma: u32, above: u128) {
        self.count += 1;
        let v = self.value(size, internal, on_gamma);
        if self.best.is_none_or(|b| v < b.value) {
            self.best = Some(Best { value: v, set });
        }
        if size as usize >= self.g.max_card {
            return;
        }
        let mut rest = frontier;
        let mut banned = forbidden;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            let bit = 1u128 << u;
            rest &= !bit;
            let new_set = set | bit;
            let add_internal = (self.g.nbr[u] & set).count_ones();
            let new_frontier = (rest | (self.g.nbr[u] & above)) & !new_set & !banned & !bit;
            self.grow(
                new_set,
                new_frontier,
                banned,
                size + 1,
                internal + add_internal,
                on_gamma + u32::from(self.g.gamma[u]),
                above,
            );
            banned |= bit;
        }
    }
}

/// Minimum of `β_A` over nonempty connected admissible `A` in `window`.
///
/// A disconnected set is never better than its best component, so only
/// connected sets are enumerated, each once, rooted at its smallest index.
pub fn beta_bruteforce(
    window: &BoxRegion,
    gamma: &TrimPattern,
    mode: CheegerMode,
    max_cardinality: Option<usize>,
) -> Result<CheegerResult> {
    mode.validate()?;
    let d = window.dim();
    if gamma.dim() != d {
        return invalid(format!("pattern dimension {} differs from window dimension {d}", gamma.dim()));
    }
    if max_cardinality == Some(0) {
        return invalid("max_cardinality must be at least 1");
    }
    let sites: Vec<Site> = window
        .sites()
        .into_iter()
        .filter(|x| mode != CheegerMode::Trimmed || !gamma.contains(x))
        .collect();
    let n = sites.len();
    if n == 0 {
        return Err(Error::EmptyDomain("the window has no admissible sites".into()));
    }
    if n > WINDOW_LIMIT {
        return Err(Error::Size(format!(
            "window has {n} admissible sites; at most {WINDOW_LIMIT} are supported"
        )));
    }
    if n > EXHAUSTIVE_LIMIT && max_cardinality.is_none() {
        return Err(Error::Size(format!(
            "window has {n} admissible sites, more than {EXHAUSTIVE_LIMIT} for exhaustive search; pass max_cardinality"
        )));
    }
    let index: std::collections::HashMap<&[i64], usize> =
        sites.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let nbr: Vec<u128> = sites
        .iter()
        .map(|x| {
            neighbors(x)
                .filter_map(|y| index.get(y.as_slice()).map(|&j| 1u128 << j))
                .fold(0, |m, b| m | b)
        })
        .collect();
    let graph = Graph {
        two_d: 2 * d as u32,
        nbr,
        gamma: sites.iter().map(|x| gamma.contains(x)).collect(),
        t: match mode {
            CheegerMode::Trimmed => 0.0,
            CheegerMode::Penalized(t) => t,
        },
        max_card: max_cardinality.unwrap_or(n).min(n),
    };

    let per_root: Vec<(usize, Option<Best>, u64)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let above = if r + 1 >= 128 { 0 } else { !0u128 << (r + 1) };
            let mut s = Search {
                g: &graph,
                best: None,
                count: 0,
            };
            s.grow(
                1u128 << r,
                graph.nbr[r] & above,
                0,
                1,
                0,
                u32::from(graph.gamma[r]),
                above,
            );
            (r, s.best, s.count)
        })
        .collect();
    let examined = per_root.iter().map(|p| p.2).sum();
    let best = per_root
        .iter()
        .filter_map(|(r, b, _)| b.map(|b| (*r, b)))
        .min_by(|x, y| x.1.value.total_cmp(&y.1.value).then(x.0.cmp(&y.0)))
        .map(|(_, b)| b)
        .ok_or_else(|| Error::Internal("enumeration produced no set".into()))?;
    let minimizer: Vec<Site> = (0..n)
        .filter(|i| best.set >> i & 1 == 1)
        .map(|i| sites[i].clone())
        .collect();
    Ok(CheegerResult {
        value: best.value,
        beta_one: best.value.min(1.0),
        minimizer,
        window: window.clone(),
        mode,
        exhaustive: graph.max_card >= n,
        max_cardinality,
        subsets_examined: examined,
        upper_bound_only: true,
    })
}

/// `Λ_{3K}(0)`.
pub fn default_window(d: usize, k: u64) -> Result<BoxRegion> {
    BoxRegion::centered(d, 3.0 * k as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricCheck {
    pub boundary: usize,
    pub size: usize,
    /// `K_*^{-d} |A|`.
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `|∂A| >= K_*^{-d} |A|` for `A ⊂ Γ^c`.
pub fn isoperimetric_check(a: &[Site], gamma: &TrimPattern, k: u64) -> Result<IsoperimetricCheck> {
    let a = dedup(a);
    if a.is_empty() {
        return invalid("A must be nonempty");
    }
    let d = gamma.dim();
    if let Some(x) = a.iter().find(|x| gamma.contains(x)) {
        return invalid(format!("A must avoid Γ, but contains {x:?}"));
    }
    let ks = k_star(k)? as f64;
    let b = boundary(&a, d)?.size();
    let bound = a.len() as f64 / ks.powi(d as i32);
    Ok(IsoperimetricCheck {
        boundary: b,
        size: a.len(),
        bound,
        slack: b as f64 - bound,
        holds: b as f64 >= bound,
    })
}
