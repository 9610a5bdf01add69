//! Assembly of finite-volume operators `-Δ + V` on a box, their trimmed
//! restrictions to `Γ^c ∩ Λ`, and the penalized family `H + t χ_Γ`.
//!
//! The box boundary is a plain restriction: every retained site keeps the
//! full diagonal `2d + V(x)` no matter how many of its neighbours were
//! dropped, and only retained nearest neighbours are coupled (by `-1`).

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{neighbors, BoxRegion, Site, TrimPattern};

/// Largest operator that may be converted to a dense matrix.
pub const DENSE_LIMIT: usize = 4096;

/// A bounded real potential on `Z^d`.
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// `K`-periodic; `values` are listed lexicographically over `[0, K)^d`.
    Periodic {
        dim: usize,
        period: u64,
        values: Vec<f64>,
    },
    /// Finitely supported; sites missing from the map carry `V = 0`.
    Explicit(HashMap<Site, f64>),
    Callback(Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Periodic {
                dim,
                period,
                values,
            } => f
                .debug_struct("Periodic")
                .field("dim", dim)
                .field("period", period)
                .field("values", values)
                .finish(),
            Potential::Explicit(m) => write!(f, "Explicit({} sites)", m.len()),
            Potential::Callback(_) => write!(f, "Callback"),
        }
    }
}

/// Extremes of a potential over a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialStats {
    pub sup: f64,
    pub inf: f64,
    /// `sup |V|`.
    pub v_inf: f64,
}

impl PotentialStats {
    pub fn spread(&self) -> f64 {
        self.sup - self.inf
    }
}

impl Potential {
    pub fn periodic(dim: usize, period: u64, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || period == 0 {
            return invalid("periodic potential needs dim >= 1 and period >= 1");
        }
        let expected = (period as usize).pow(dim as u32);
        if values.len() != expected {
            return invalid(format!(
                "periodic potential with period {period} in dimension {dim} needs {expected} values, got {}",
                values.len()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("potential value {v} is not finite"));
        }
        Ok(Potential::Periodic {
            dim,
            period,
            values,
        })
    }

    pub fn explicit(values: HashMap<Site, f64>) -> Result<Self> {
        if let Some((s, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return invalid(format!("potential value {v} at {s:?} is not finite"));
        }
        Ok(Potential::Explicit(values))
    }

    pub fn callback(f: impl Fn(&[i64]) -> f64 + Send + Sync + 'static) -> Self {
        Potential::Callback(Arc::new(f))
    }

    /// `c · χ_{site}`.
    pub fn point(site: Site, c: f64) -> Result<Self> {
        Self::explicit(HashMap::from([(site, c)]))
    }

    pub fn eval(&self, x: &[i64]) -> Result<f64> {
        match self {
            Potential::Zero => Ok(0.0),
            Potential::Periodic {
                dim,
                period,
                values,
            } => {
                if x.len() != *dim {
                    return invalid(format!("site {x:?} does not have dimension {dim}"));
                }
                let k = *period as i64;
                let idx = x
                    .iter()
                    .fold(0usize, |acc, c| acc * k as usize + c.rem_euclid(k) as usize);
                Ok(values[idx])
            }
            Potential::Explicit(m) => Ok(m.get(x).copied().unwrap_or(0.0)),
            Potential::Callback(f) => {
                let v = f(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation(format!("V({x:?}) = {v}")))
                }
            }
        }
    }

    pub fn stats_on(&self, sites: &[Site]) -> Result<PotentialStats> {
        if sites.is_empty() {
            return invalid("potential statistics need a nonempty window");
        }
        let mut sup = f64::NEG_INFINITY;
        let mut inf = f64::INFINITY;
        for s in sites {
            let v = self.eval(s)?;
            sup = sup.max(v);
            inf = inf.min(v);
        }
        Ok(PotentialStats {
            sup,
            inf,
            v_inf: sup.abs().max(inf.abs()),
        })
    }

    pub fn stats(&self, window: &BoxRegion) -> Result<PotentialStats> {
        self.stats_on(&window.sites())
    }
}

/// `spr(V) = sup V - inf V` over the window.
pub fn spread(v: &Potential, window: &BoxRegion) -> Result<f64> {
    Ok(v.stats(window)?.spread())
}

/// `Y = 2d + 1 + spr`.
pub fn y_from_spread(d: usize, spread: f64) -> f64 {
    2.0 * d as f64 + 1.0 + spread
}

/// `Y_{d,V} = 2d + 1 + spr(V)` with the spread taken over the window.
pub fn y_const(d: usize, v: &Potential, window: &BoxRegion) -> Result<f64> {
    Ok(y_from_spread(d, spread(v, window)?))
}

/// Compressed-row symmetric matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists; columns are sorted here.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()).sum()
    }

    /// Max absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn with_added_diagonal(&self, add: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, a) in add.iter().enumerate() {
            let r = out.row_ptr[i]..out.row_ptr[i + 1];
            if let Ok(k) = out.col_idx[r.clone()].binary_search(&i) {
                out.values[r.start + k] += a;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n > DENSE_LIMIT {
            return Err(Error::Size(format!(
                "dense conversion limited to n <= {DENSE_LIMIT}, operator has n = {}",
                self.n
            )));
        }
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Coordinate dump: one `row col value` line per stored entry, 0-based.
    pub fn write_coo<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "t", rename_all = "lowercase")]
pub enum Mode {
    /// `H^Λ` on every site of the box.
    Full,
    /// `H_Γ^Λ` on `Γ^c ∩ Λ`.
    Trimmed,
    /// `H(t)^Λ = (H + t χ_Γ)^Λ` on the whole box.
    Penalized(f64),
}

/// A finite-volume operator with its site ↔ index maps.
#[derive(Clone, Debug)]
pub struct LatticeOperator {
    region: BoxRegion,
    dim: usize,
    mode: Mode,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    on_gamma: Vec<bool>,
    potential: Vec<f64>,
    matrix: CsrMatrix,
}

impl LatticeOperator {
    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The box the operator was assembled on.
    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Operators whose domain is the whole box (full or penalized).
    pub fn is_full_box(&self) -> bool {
        !matches!(self.mode, Mode::Trimmed)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Per-site membership in `Γ` (all false when no pattern was given).
    pub fn on_gamma(&self) -> &[bool] {
        &self.on_gamma
    }

    pub fn gamma_count(&self) -> usize {
        self.on_gamma.iter().filter(|&&g| g).count()
    }

    /// `V(x)` on each domain site, excluding the `2d` and `t χ_Γ` terms.
    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.matrix.to_dense()
    }

    pub fn write_coo<W: Write>(&self, w: W) -> io::Result<()> {
        self.matrix.write_coo(w)
    }

    /// Same operator with `add[i]` added to the potential at site `i`.
    pub fn with_added_potential(&self, add: &[f64]) -> Result<Self> {
        if add.len() != self.n() {
            return invalid(format!(
                "diagonal update has length {}, operator has n = {}",
                add.len(),
                self.n()
            ));
        }
        let mut out = self.clone();
        out.matrix = self.matrix.with_added_diagonal(add);
        for (p, a) in out.potential.iter_mut().zip(add) {
            *p += a;
        }
        Ok(out)
    }

    /// `⟨χ_A, M χ_A⟩` for a set of sites in the domain.
    pub fn indicator_form(&self, a: &[Site]) -> Result<f64> {
        let mut x = vec![0.0; self.n()];
        for s in a {
            let i = self
                .index_of(s)
                .ok_or_else(|| Error::InvalidArgument(format!("site {s:?} is not in the operator domain")))?;
            x[i] = 1.0;
        }
        Ok(self.matrix.quadratic_form(&x))
    }
}

/// Assemble `H^Λ`, `H_Γ^Λ` or `H(t)^Λ` for `H = -Δ + V`.
pub fn assemble(
    region: &BoxRegion,
    v: &Potential,
    gamma: Option<&TrimPattern>,
    mode: Mode,
) -> Result<LatticeOperator> {
    let d = region.dim();
    if let Some(g) = gamma {
        if g.dim() != d {
            return invalid(format!("pattern dimension {} does not match box dimension {d}", g.dim()));
        }
    }
    let t = match mode {
        Mode::Trimmed if gamma.is_none() => return invalid("trimmed mode requires a pattern Γ"),
        Mode::Penalized(_) if gamma.is_none() => return invalid("penalized mode requires a pattern Γ"),
        Mode::Penalized(t) if !(t.is_finite() && t >= 0.0) => {
            return invalid(format!("penalty t must be finite and nonnegative, got {t}"))
        }
        Mode::Penalized(t) => t,
        _ => 0.0,
    };
    let in_gamma = |x: &[i64]| gamma.is_some_and(|g| g.contains(x));

    let box_sites = region.sites();
    let mut local = vec![None; box_sites.len()];
    let mut sites = Vec::new();
    for (bi, x) in box_sites.into_iter().enumerate() {
        if matches!(mode, Mode::Trimmed) && in_gamma(&x) {
            continue;
        }
        local[bi] = Some(sites.len());
        sites.push(x);
    }
    if sites.is_empty() {
        return Err(Error::EmptyDomain(format!(
            "Γ^c ∩ Λ is empty for the box of side {} at {:?}",
            region.side(),
            region.center()
        )));
    }

    let two_d = 2.0 * d as f64;
    let mut rows = Vec::with_capacity(sites.len());
    let mut potential = Vec::with_capacity(sites.len());
    let mut on_gamma = Vec::with_capacity(sites.len());
    for x in &sites {
        let vx = v.eval(x)?;
        let g = in_gamma(x);
        let diag = two_d + vx + if g { t } else { 0.0 };
        let mut row = vec![(rows.len(), diag)];
        for y in neighbors(x) {
            if let Some(j) = region.index_of(&y).and_then(|bi| local[bi]) {
                row.push((j, -1.0));
            }
        }
        rows.push(row);
        potential.push(vx);
        on_gamma.push(g);
    }
    let index = sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(LatticeOperator {
        region: region.clone(),
        dim: d,
        mode,
        sites,
        index,
        on_gamma,
        potential,
        matrix: CsrMatrix::from_rows(rows),
    })
}

/// `T = (2d + 1 + V_∞) - (H - inf V)` on a full-box operator.
///
/// `T` is entrywise nonnegative with diagonal `>= 1`, so its top eigenvector is
/// the strictly positive ground state of `H`.
#[derive(Clone, Debug)]
pub struct PfCompanion {
    pub matrix: CsrMatrix,
    /// `inf V` over the box, subtracted before forming `T`.
    pub shift: f64,
    /// `Y = 2d + 1 + spr(V)`: the constant `T` is built from.
    pub top: f64,
}

impl PfCompanion {
    /// Convert an eigenvalue `mu` of `T` back to an energy of `H`.
    pub fn energy_from(&self, mu: f64) -> f64 {
        self.top - mu + self.shift
    }
}

pub fn pf_companion(op: &LatticeOperator) -> Result<PfCompanion> {
    if !op.is_full_box() {
        return invalid("Perron–Frobenius companion needs a full-box operator, not a trimmed one");
    }
    let d = op.dim();
    // The penalty t χ_Γ counts as potential here.
    let diag = op.matrix.diagonal();
    let eff: Vec<f64> = diag.iter().map(|a| a - 2.0 * d as f64).collect();
    let inf = eff.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = eff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = y_from_spread(d, sup - inf);
    let rows = (0..op.n())
        .map(|i| {
            op.matrix
                .row(i)
                .map(|(j, v)| {
                    if i == j {
                        (j, top - (v - inf))
                    } else {
                        (j, -v)
                    }
                })
                .collect()
        })
        .collect();
    Ok(PfCompanion {
        matrix: CsrMatrix::from_rows(rows),
        shift: inf,
        top,
    })
}
