//! Boxes in `Z^d`, relatively dense trim patterns, boundaries of finite sets,
//! and graph distances on induced subgraphs.
//!
//! Sites are plain integer vectors. Boxes enumerate their sites in
//! lexicographic order (first coordinate most significant), which fixes the
//! row/column layout of every assembled operator.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A lattice point of `Z^d`.
pub type Site = Vec<i64>;

/// `K_*`: the number of integer points per axis of the closed box of side `K`.
pub fn k_star(k: u64) -> Result<u64> {
    match k {
        0 => invalid("K must be a positive integer"),
        k if k % 2 == 1 => Ok(k),
        k => Ok(k + 1),
    }
}

pub fn l1_distance(x: &[i64], y: &[i64]) -> u64 {
    x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).sum()
}

pub fn linf_distance(x: &[i64], y: &[i64]) -> u64 {
    x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0)
}

/// The `2d` nearest neighbours of `x`, in a fixed order
/// (axis 0 down, axis 0 up, axis 1 down, ...).
pub fn neighbors(x: &[i64]) -> impl Iterator<Item = Site> + '_ {
    (0..x.len()).flat_map(move |axis| {
        [-1i64, 1].into_iter().map(move |step| {
            let mut y = x.to_vec();
            y[axis] += step;
            y
        })
    })
}

/// Largest integer offset `r` with `r <= side/2` (closed) or `r < side/2` (open).
fn axis_radius(side: f64, open: bool) -> i64 {
    let half = side / 2.0;
    let floor = half.floor();
    if open && floor == half {
        floor as i64 - 1
    } else {
        floor as i64
    }
}

/// The box `{y : |y - center|_inf <= L/2}`, or its open variant with `<`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    center: Site,
    side: f64,
    open: bool,
}

impl BoxRegion {
    pub fn new(center: Site, side: f64, open: bool) -> Result<Self> {
        if center.is_empty() {
            return invalid("box dimension must be at least 1");
        }
        if !(side.is_finite() && side > 0.0) {
            return invalid(format!("box side must be a positive real, got {side}"));
        }
        Ok(Self { center, side, open })
    }

    pub fn closed(center: Site, side: f64) -> Result<Self> {
        Self::new(center, side, false)
    }

    pub fn open(center: Site, side: f64) -> Result<Self> {
        Self::new(center, side, true)
    }

    /// Closed box of side `side` centred at the origin of `Z^dim`.
    pub fn centered(dim: usize, side: f64) -> Result<Self> {
        Self::new(vec![0; dim], side, false)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn center(&self) -> &[i64] {
        &self.center
    }

    /// Per-axis offset of the outermost sites from the centre.
    pub fn radius(&self) -> i64 {
        axis_radius(self.side, self.open)
    }

    /// Number of sites per axis.
    pub fn width(&self) -> usize {
        (2 * self.radius() + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && linf_distance(x, &self.center) <= self.radius() as u64
    }

    /// Lexicographic index of `x`, if it lies in the box.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let r = self.radius();
        let w = self.width();
        Some(
            x.iter()
                .zip(&self.center)
                .fold(0usize, |acc, (xi, ci)| acc * w + (xi - ci + r) as usize),
        )
    }

    /// Site with lexicographic index `idx`.
    pub fn site(&self, mut idx: usize) -> Site {
        let r = self.radius();
        let w = self.width();
        let mut x = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            x[axis] = self.center[axis] - r + (idx % w) as i64;
            idx /= w;
        }
        x
    }

    /// All sites in lexicographic order.
    pub fn sites(&self) -> Vec<Site> {
        (0..self.len()).map(|i| self.site(i)).collect()
    }

    /// True when `other` is contained in `self` as a set of sites.
    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.dim() == self.dim()
            && other
                .center
                .iter()
                .zip(&self.center)
                .all(|(oc, sc)| oc.abs_diff(*sc) as i64 + other.radius() <= self.radius())
    }
}

/// Enumerate a box in lexicographic order.
pub fn enumerate_box(b: &BoxRegion) -> Vec<Site> {
    b.sites()
}

fn lexicographic_cube(dim: usize, lo: i64, hi: i64) -> Vec<Site> {
    let w = (hi - lo + 1).max(0) as usize;
    let total = w.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0i64; dim];
            for axis in (0..dim).rev() {
                x[axis] = lo + (idx % w) as i64;
                idx /= w;
            }
            x
        })
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A set `Gamma` of lattice sites: either a `K`-periodic pattern described by
/// its residues in the fundamental window `[0, K)^d`, or an explicit finite
/// list of sites.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TrimPatternRecord", into = "TrimPatternRecord")]
pub struct TrimPattern {
    dim: usize,
    period: u64,
    sites: Vec<Site>,
    claimed_q: u64,
    lookup: HashSet<Site>,
}

/// Serialized form: `{dim, period, sites, Q}`; `period = 0` marks an explicit set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimPatternRecord {
    pub dim: usize,
    pub period: u64,
    pub sites: Vec<Site>,
    #[serde(rename = "Q")]
    pub q: u64,
}

impl TryFrom<TrimPatternRecord> for TrimPattern {
    type Error = Error;

    fn try_from(r: TrimPatternRecord) -> Result<Self> {
        if r.period == 0 {
            TrimPattern::explicit(r.dim, r.sites, r.q)
        } else {
            TrimPattern::periodic(r.dim, r.period, r.sites, r.q)
        }
    }
}

impl From<TrimPattern> for TrimPatternRecord {
    fn from(p: TrimPattern) -> Self {
        TrimPatternRecord {
            dim: p.dim,
            period: p.period,
            sites: p.sites,
            q: p.claimed_q,
        }
    }
}

impl PartialEq for TrimPattern {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.period == other.period
            && self.sites == other.sites
            && self.claimed_q == other.claimed_q
    }
}

impl TrimPattern {
    /// `K`-periodic pattern whose residues mod `K` are `sites`.
    pub fn periodic(dim: usize, period: u64, sites: Vec<Site>, claimed_q: u64) -> Result<Self> {
        if dim == 0 {
            return invalid("pattern dimension must be at least 1");
        }
        if period == 0 {
            return invalid("periodic pattern needs period >= 1");
        }
        for s in &sites {
            if s.len() != dim {
                return invalid(format!("pattern site {s:?} does not have dimension {dim}"));
            }
            if s.iter().any(|&c| c < 0 || c >= period as i64) {
                return invalid(format!(
                    "pattern site {s:?} lies outside the fundamental window [0, {period})^{dim}"
                ));
            }
        }
        Ok(Self::build(dim, period, sites, claimed_q))
    }

    /// A finite explicit set of sites.
    pub fn explicit(dim: usize, sites: Vec<Site>, claimed_q: u64) -> Result<Self> {
        if dim == 0 {
            return invalid("pattern dimension must be at least 1");
        }
        if let Some(s) = sites.iter().find(|s| s.len() != dim) {
            return invalid(format!("pattern site {s:?} does not have dimension {dim}"));
        }
        Ok(Self::build(dim, 0, sites, claimed_q))
    }

    /// `K Z^d`, which is `(K, 1)`-relatively dense.
    pub fn sublattice(dim: usize, k: u64) -> Result<Self> {
        Self::periodic(dim, k, vec![vec![0; dim]], 1)
    }

    /// All of `Z^d`.
    pub fn full(dim: usize) -> Result<Self> {
        Self::sublattice(dim, 1)
    }

    fn build(dim: usize, period: u64, mut sites: Vec<Site>, claimed_q: u64) -> Self {
        sites.sort();
        sites.dedup();
        let lookup = sites.iter().cloned().collect();
        Self {
            dim,
            period,
            sites,
            claimed_q,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Period `K`, or 0 for an explicit set.
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.period > 0
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn claimed_q(&self) -> u64 {
        self.claimed_q
    }

    fn residue(&self, x: &[i64]) -> Site {
        let k = self.period as i64;
        x.iter().map(|c| c.rem_euclid(k)).collect()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        if self.is_periodic() {
            self.lookup.contains(&self.residue(x))
        } else {
            self.lookup.contains(x)
        }
    }

    /// Index of the residue class of `x` among the pattern sites (periodic) or
    /// of `x` itself (explicit). `None` when `x` is not in the pattern.
    pub fn class_of(&self, x: &[i64]) -> Option<usize> {
        let key = if self.is_periodic() {
            self.residue(x)
        } else {
            x.to_vec()
        };
        self.sites.binary_search(&key).ok()
    }

    pub fn to_record(&self) -> TrimPatternRecord {
        self.clone().into()
    }
}

/// Whether a relative-denseness verdict covers all of `Z^d` or only a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckScope {
    Exact,
    WindowLocal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub dense: bool,
    /// First cell centre `zeta` (in scan order) with too few pattern sites.
    pub violation: Option<Site>,
    pub scope: CheckScope,
    pub cells_checked: usize,
}

fn count_in_open_cell(p: &TrimPattern, zeta: &[i64], k: u64) -> usize {
    let r = axis_radius(k as f64, true);
    lexicographic_cube(zeta.len(), -r, r)
        .into_iter()
        .filter(|off| {
            let y: Site = off.iter().zip(zeta).map(|(o, z)| o + z).collect();
            p.contains(&y)
        })
        .count()
}

/// Decide `|Gamma ∩ Λ⁽⁰⁾_K(ζ)| >= Q` for cell centres `ζ ∈ K Z^d`.
///
/// Periodic patterns are decided exactly for all of `Z^d` by scanning one
/// common period `lcm(K, period)`; the window is then only checked for
/// consistency. Explicit sets are checked on the cells whose open cell fits
/// inside `window`, and the verdict is marked window-local.
pub fn check_relatively_dense(
    p: &TrimPattern,
    k: u64,
    q: u64,
    window: &BoxRegion,
) -> Result<DensityCheck> {
    if k == 0 || q == 0 {
        return invalid("K and Q must be positive integers");
    }
    if window.dim() != p.dim() {
        return invalid(format!(
            "window dimension {} does not match pattern dimension {}",
            window.dim(),
            p.dim()
        ));
    }
    let d = p.dim();
    let centers: Vec<Site> = if p.is_periodic() {
        let l = p.period() / gcd(p.period(), k) * k;
        let per_axis = (l / k) as i64;
        lexicographic_cube(d, 0, per_axis - 1)
            .into_iter()
            .map(|z| z.into_iter().map(|c| c * k as i64).collect())
            .collect()
    } else {
        let r0 = axis_radius(k as f64, true);
        let rw = window.radius();
        let ki = k as i64;
        let ranges: Vec<(i64, i64)> = window
            .center()
            .iter()
            .map(|&c| {
                let lo = c - rw + r0;
                let hi = c + rw - r0;
                (lo.div_euclid(ki) + i64::from(lo.rem_euclid(ki) != 0), hi.div_euclid(ki))
            })
            .collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            return invalid(format!(
                "window of side {} contains no full open cell of side {k}",
                window.side()
            ));
        }
        let mut out = vec![Vec::new()];
        for (lo, hi) in ranges {
            out = out
                .into_iter()
                .flat_map(|prefix: Site| {
                    (lo..=hi).map(move |m| {
                        let mut z = prefix.clone();
                        z.push(m * ki);
                        z
                    })
                })
                .collect();
        }
        out
    };
    let scope = if p.is_periodic() {
        CheckScope::Exact
    } else {
        CheckScope::WindowLocal
    };
    let violation = centers
        .iter()
        .find(|z| (count_in_open_cell(p, z, k) as u64) < q)
        .cloned();
    Ok(DensityCheck {
        dense: violation.is_none(),
        violation,
        scope,
        cells_checked: centers.len(),
    })
}

/// Edge boundary of a finite set together with its derived counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// Ordered pairs `(x, y)` with `x ∈ A`, `y ∉ A`, `|x - y|_1 = 1`.
    pub edges: Vec<(Site, Site)>,
    /// `eta_A(x)` for every `x ∈ A` (zero for interior points).
    pub eta: BTreeMap<Site, usize>,
    /// `∂₋A`: sites of `A` with at least one boundary edge.
    pub inner: BTreeSet<Site>,
    /// `∂₊A`: sites outside `A` adjacent to `A`.
    pub outer: BTreeSet<Site>,
}

impl BoundaryData {
    /// `|∂A|`.
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn eta_at(&self, x: &[i64]) -> usize {
        self.eta.get(x).copied().unwrap_or(0)
    }
}

/// Edge boundary of `a` in all of `Z^d`.
pub fn boundary(a: &[Site], d: usize) -> Result<BoundaryData> {
    if let Some(s) = a.iter().find(|s| s.len() != d) {
        return invalid(format!("site {s:?} does not have dimension {d}"));
    }
    let set: BTreeSet<Site> = a.iter().cloned().collect();
    let mut data = BoundaryData {
        edges: Vec::new(),
        eta: BTreeMap::new(),
        inner: BTreeSet::new(),
        outer: BTreeSet::new(),
    };
    for x in &set {
        let mut count = 0;
        for y in neighbors(x) {
            if !set.contains(&y) {
                count += 1;
                data.outer.insert(y.clone());
                data.edges.push((x.clone(), y));
            }
        }
        if count > 0 {
            data.inner.insert(x.clone());
        }
        data.eta.insert(x.clone(), count);
    }
    Ok(data)
}

fn bfs(index: &HashMap<&[i64], usize>, sites: &[Site], start: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; sites.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for y in neighbors(&sites[u]) {
            if let Some(&v) = index.get(y.as_slice()) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

fn unique_sites(b: &[Site]) -> Result<Vec<Site>> {
    let mut sites = b.to_vec();
    sites.sort();
    sites.dedup();
    if sites.is_empty() {
        return invalid("graph distance needs a nonempty site set");
    }
    let d = sites[0].len();
    if sites.iter().any(|s| s.len() != d) {
        return invalid("site set mixes dimensions");
    }
    Ok(sites)
}

/// Length of the shortest nearest-neighbour path from `x` to `y` inside `b`.
pub fn graph_distance(b: &[Site], x: &[i64], y: &[i64]) -> Result<u64> {
    let sites = unique_sites(b)?;
    let index: HashMap<&[i64], usize> =
        sites.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let (Some(&ix), Some(&iy)) = (index.get(x), index.get(y)) else {
        return invalid(format!("endpoints {x:?}, {y:?} must both lie in the set"));
    };
    let dist = bfs(&index, &sites, ix);
    if dist.iter().any(Option::is_none) {
        return invalid("site set is not connected");
    }
    dist[iy].ok_or_else(|| Error::Internal("BFS missed a reachable site".into()))
}

/// Graph diameter of a connected site set.
pub fn diameter(b: &[Site]) -> Result<u64> {
    let sites = unique_sites(b)?;
    let index: HashMap<&[i64], usize> =
        sites.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut best = 0;
    for start in 0..sites.len() {
        let dist = bfs(&index, &sites, start);
        for dv in dist {
            match dv {
                Some(v) => best = best.max(v),
                None => return invalid("site set is not connected"),
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_star_values() {
        assert_eq!(k_star(3), Ok(3));
        assert_eq!(k_star(2), Ok(3));
        assert_eq!(k_star(1), Ok(1));
        assert!(matches!(k_star(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn enumerate_small_boxes() {
        let b = BoxRegion::closed(vec![0], 2.0).unwrap();
        assert_eq!(enumerate_box(&b), vec![vec![-1], vec![0], vec![1]]);
        let b = BoxRegion::open(vec![0], 2.0).unwrap();
        assert_eq!(enumerate_box(&b), vec![vec![0]]);
        let b = BoxRegion::closed(vec![0, 0], 3.0).unwrap();
        let s = enumerate_box(&b);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], vec![-1, -1]);
        assert_eq!(s[1], vec![-1, 0]);
        assert_eq!(s[8], vec![1, 1]);
    }

    #[test]
    fn box_cardinality_is_k_star_power() {
        for d in 1..=3usize {
            for k in 1..=6u64 {
                let b = BoxRegion::closed(vec![2; d], k as f64).unwrap();
                assert_eq!(b.len() as u64, k_star(k).unwrap().pow(d as u32));
            }
        }
    }

    #[test]
    fn open_equals_closed_iff_side_not_even() {
        for side in [0.5, 1.0, 1.5, 2.0, 3.0, 3.7, 4.0, 5.0, 6.0] {
            let c = BoxRegion::closed(vec![0], side).unwrap();
            let o = BoxRegion::open(vec![0], side).unwrap();
            let even = side.fract() == 0.0 && (side as u64).is_multiple_of(2);
            assert_eq!(c.sites() == o.sites(), !even, "side {side}");
        }
    }

    #[test]
    fn non_integer_side_follows_sup_norm_definition() {
        let b = BoxRegion::closed(vec![0], 2.5).unwrap();
        assert_eq!(b.sites(), vec![vec![-1], vec![0], vec![1]]);
        let b = BoxRegion::closed(vec![0], 1.9).unwrap();
        assert_eq!(b.sites(), vec![vec![0]]);
    }

    #[test]
    fn index_round_trip() {
        let b = BoxRegion::closed(vec![3, -2], 4.0).unwrap();
        for (i, s) in b.sites().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
        assert_eq!(b.index_of(&[100, 0]), None);
    }

    #[test]
    fn bad_boxes_rejected() {
        assert!(BoxRegion::closed(vec![0], 0.0).is_err());
        assert!(BoxRegion::closed(vec![0], f64::NAN).is_err());
        assert!(BoxRegion::closed(vec![], 1.0).is_err());
    }

    #[test]
    fn relative_denseness_examples() {
        let w = BoxRegion::centered(1, 20.0).unwrap();
        let even = TrimPattern::sublattice(1, 2).unwrap();
        assert!(check_relatively_dense(&even, 2, 1, &w).unwrap().dense);
        let c = check_relatively_dense(&even, 2, 2, &w).unwrap();
        assert!(!c.dense);
        assert_eq!(c.violation, Some(vec![0]));
        assert_eq!(c.scope, CheckScope::Exact);

        let full = TrimPattern::full(2).unwrap();
        let w2 = BoxRegion::centered(2, 4.0).unwrap();
        assert!(check_relatively_dense(&full, 1, 1, &w2).unwrap().dense);
    }

    #[test]
    fn sublattice_always_dense() {
        for d in 1..=3 {
            for k in 1..=5 {
                let p = TrimPattern::sublattice(d, k).unwrap();
                let w = BoxRegion::centered(d, 2.0 * k as f64).unwrap();
                assert!(check_relatively_dense(&p, k, 1, &w).unwrap().dense);
            }
        }
    }

    #[test]
    fn periodic_check_with_mismatched_cell_size() {
        // 3Z is (3,1)-dense but not (2,1)-dense: the open 2-cell is a single site.
        let p = TrimPattern::sublattice(1, 3).unwrap();
        let w = BoxRegion::centered(1, 12.0).unwrap();
        assert!(check_relatively_dense(&p, 3, 1, &w).unwrap().dense);
        let c = check_relatively_dense(&p, 2, 1, &w).unwrap();
        assert!(!c.dense);
        assert_eq!(c.violation, Some(vec![2]));
    }

    #[test]
    fn explicit_pattern_is_window_local() {
        let sites: Vec<Site> = (-10..=10).filter(|x| x % 2 == 0).map(|x| vec![x]).collect();
        let p = TrimPattern::explicit(1, sites, 1).unwrap();
        let w = BoxRegion::centered(1, 16.0).unwrap();
        let c = check_relatively_dense(&p, 2, 1, &w).unwrap();
        assert!(c.dense);
        assert_eq!(c.scope, CheckScope::WindowLocal);
        let far = BoxRegion::closed(vec![40], 6.0).unwrap();
        assert!(!check_relatively_dense(&p, 2, 1, &far).unwrap().dense);
        let tiny = BoxRegion::closed(vec![0], 1.0).unwrap();
        assert!(check_relatively_dense(&p, 4, 1, &tiny).is_err());
    }

    #[test]
    fn periodic_sites_must_be_in_fundamental_window() {
        assert!(TrimPattern::periodic(1, 3, vec![vec![3]], 1).is_err());
        assert!(TrimPattern::periodic(1, 3, vec![vec![-1]], 1).is_err());
        let p = TrimPattern::periodic(2, 3, vec![vec![0, 1], vec![2, 2]], 2).unwrap();
        assert!(p.contains(&[3, 4]));
        assert!(p.contains(&[-1, -1]));
        assert!(!p.contains(&[0, 0]));
        assert_eq!(p.class_of(&[5, 5]), Some(1));
    }

    #[test]
    fn pattern_record_round_trip() {
        let p = TrimPattern::periodic(2, 3, vec![vec![0, 1], vec![2, 2]], 2).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"Q\":2"));
        let back: TrimPattern = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"dim":1,"period":2,"sites":[[5]],"Q":1}"#;
        assert!(serde_json::from_str::<TrimPattern>(bad).is_err());
    }

    #[test]
    fn boundary_examples() {
        let b = boundary(&[vec![0]], 1).unwrap();
        assert_eq!(b.size(), 2);
        assert_eq!(b.eta_at(&[0]), 2);
        let b = boundary(&[vec![0], vec![1]], 1).unwrap();
        assert_eq!(b.size(), 2);
        assert_eq!(b.outer, BTreeSet::from([vec![-1], vec![2]]));
        let square = [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let b = boundary(&square, 2).unwrap();
        assert_eq!(b.size(), 8);
        assert_eq!(b.inner.len(), 4);
        assert_eq!(b.eta.values().sum::<usize>(), b.size());
    }

    #[test]
    fn graph_distance_examples() {
        let b = BoxRegion::closed(vec![0, 0], 9.0).unwrap().sites();
        assert_eq!(graph_distance(&b, &[0, 0], &[1, 2]).unwrap(), 3);
        assert_eq!(graph_distance(&b, &[2, 2], &[2, 2]).unwrap(), 0);
        let line = BoxRegion::closed(vec![0], 3.0).unwrap().sites();
        assert_eq!(diameter(&line).unwrap(), 2);
    }

    #[test]
    fn graph_distance_detours_around_holes() {
        // A U-shaped set: going from (0,0) to (0,2) must go around (0,1).
        let u = vec![
            vec![0, 0],
            vec![1, 0],
            vec![1, 1],
            vec![1, 2],
            vec![0, 2],
        ];
        assert_eq!(graph_distance(&u, &[0, 0], &[0, 2]).unwrap(), 4);
        assert_eq!(diameter(&u).unwrap(), 4);
    }

    #[test]
    fn graph_distance_errors() {
        let split = vec![vec![0], vec![2]];
        assert!(graph_distance(&split, &[0], &[2]).is_err());
        assert!(diameter(&split).is_err());
        let line = vec![vec![0], vec![1]];
        assert!(graph_distance(&line, &[0], &[5]).is_err());
    }
}
