//! `t ↦ E^Λ(t)` for the penalized family and the slope lower bound
//! `dE/dt >= Q (Y + t)^{-2dK}`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lowest_eigenpairs, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{assemble, y_from_spread, Mode, Potential};
use crate::lattice::{BoxRegion, TrimPattern};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub energy: f64,
    /// `⟨ψ, χ_Γ ψ⟩`, the exact derivative when the ground state is simple.
    pub gamma_weight: f64,
    /// Distance to the second eigenvalue; infinite on a single site.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub dim: usize,
    pub region: BoxRegion,
    /// `sup V - inf V` over the box.
    pub spread: f64,
    pub points: Vec<CurvePoint>,
    /// `(E_{i+1} - E_i) / (t_{i+1} - t_i)`, one shorter than `points`.
    pub fd_slopes: Vec<f64>,
    /// Ground energy of the trimmed operator; `None` when `Γ^c ∩ Λ` is empty.
    pub trimmed_energy: Option<f64>,
    pub solver_tol: f64,
}

impl EnergyCurve {
    pub fn t_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn y(&self) -> f64 {
        y_from_spread(self.dim, self.spread)
    }

    /// CSV with columns `t, energy, fd_slope, bound`; the bound column is
    /// filled when `(Q, K)` is given, the slope column is empty on the last row.
    pub fn to_csv(&self, qk: Option<(u64, u64)>) -> String {
        let mut out = String::from("t,energy,fd_slope,bound\n");
        for (i, p) in self.points.iter().enumerate() {
            let slope = self
                .fd_slopes
                .get(i)
                .map(|s| format!("{s:.16e}"))
                .unwrap_or_default();
            let bound = qk
                .map(|(q, k)| format!("{:.16e}", slope_bound(q, k, self.dim, self.y(), p.t)))
                .unwrap_or_default();
            let _ = writeln!(out, "{:.16e},{:.16e},{slope},{bound}", p.t, p.energy);
        }
        out
    }
}

/// `Q (Y + t)^{-2dK}`.
pub fn slope_bound(q: u64, k: u64, d: usize, y: f64, t: f64) -> f64 {
    let e = 2.0 * d as f64 * k as f64;
    q as f64 * (-e * (y + t).ln()).exp()
}

/// `E^Λ(t)` of `(H + t χ_Γ)^Λ` at each grid point.
pub fn energy_curve(
    region: &BoxRegion,
    gamma: &TrimPattern,
    v: &Potential,
    t_grid: &[f64],
    tol: f64,
) -> Result<EnergyCurve> {
    if t_grid.is_empty() {
        return invalid("t grid is empty");
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("t grid must hold finite nonnegative values");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("t grid must be strictly ascending");
    }
    let spread = v.stats(region)?.spread();
    let opts = SolveOptions::with_tol(tol);
    let points = t_grid
        .par_iter()
        .map(|&t| {
            let op = assemble(region, v, Some(gamma), Mode::Penalized(t))?;
            let k = op.n().min(2);
            let sol = lowest_eigenpairs(op.matrix(), k, &opts)?;
            let psi = &sol.vectors[0];
            let weight = psi
                .iter()
                .zip(op.on_gamma())
                .filter(|(_, g)| **g)
                .map(|(p, _)| p * p)
                .sum::<f64>()
                / psi.iter().map(|p| p * p).sum::<f64>();
            Ok(CurvePoint {
                t,
                energy: sol.values[0],
                gamma_weight: weight,
                gap: if k == 2 {
                    sol.values[1] - sol.values[0]
                } else {
                    f64::INFINITY
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fd_slopes = points
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / (w[1].t - w[0].t))
        .collect();
    let trimmed_energy = match assemble(region, v, Some(gamma), Mode::Trimmed) {
        Ok(op) => Some(lowest_eigenpairs(op.matrix(), 1, &opts)?.values[0]),
        Err(Error::EmptyDomain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EnergyCurve {
        dim: region.dim(),
        region: region.clone(),
        spread,
        points,
        fd_slopes,
        trimmed_energy,
        solver_tol: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub t: f64,
    pub t_next: f64,
    pub slope: f64,
    pub bound: f64,
    /// `bound(t) - bound(t_next)`: the slope dominates `E'(t_next)` by concavity.
    pub concavity_slack: f64,
    /// `Δt / gap`, from `|E''| <= 2 / gap`.
    pub curvature_slack: f64,
    /// `2 tol / Δt` for the two solver errors.
    pub solver_slack: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub q: u64,
    pub k: u64,
    pub dim: usize,
    pub side: f64,
    pub y: f64,
    /// Whether the box side is `K J` with `J` odd.
    pub geometry_matches: bool,
    pub rows: Vec<DerivativeRow>,
    pub counterexamples: Vec<DerivativeRow>,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Compare each forward slope with `Q (Y + t)^{-2dK}` at its left end.
pub fn derivative_check(curve: &EnergyCurve, q: u64, k: u64, extra_tol: f64) -> Result<DerivativeReport> {
    if k == 0 || q == 0 {
        return invalid("derivative check needs K >= 1 and Q >= 1");
    }
    let cells = (k as f64).powi(curve.dim as i32);
    if q as f64 > cells {
        return invalid(format!("Q = {q} exceeds K^d = {cells}"));
    }
    if !(extra_tol >= 0.0) {
        return invalid("extra tolerance must be nonnegative");
    }
    let y = curve.y();
    let side = curve.region.side();
    let j = side / k as f64;
    let geometry_matches = j.fract() == 0.0 && (j as u64) % 2 == 1;
    let rows: Vec<DerivativeRow> = curve
        .points
        .windows(2)
        .zip(&curve.fd_slopes)
        .map(|(w, &slope)| {
            let dt = w[1].t - w[0].t;
            let bound = slope_bound(q, k, curve.dim, y, w[0].t);
            let concavity_slack = bound - slope_bound(q, k, curve.dim, y, w[1].t);
            let gap = w[0].gap.min(w[1].gap);
            let curvature_slack = dt / gap;
            let solver_slack = 2.0 * curve.solver_tol / dt;
            let tolerance = concavity_slack.min(curvature_slack) + solver_slack + extra_tol;
            DerivativeRow {
                t: w[0].t,
                t_next: w[1].t,
                slope,
                bound,
                concavity_slack,
                curvature_slack,
                solver_slack,
                tolerance,
                ok: slope >= bound - tolerance,
            }
        })
        .collect();
    let counterexamples = rows.iter().filter(|r| !r.ok).cloned().collect();
    Ok(DerivativeReport {
        q,
        k,
        dim: curve.dim,
        side,
        y,
        geometry_matches,
        rows,
        counterexamples,
    })
}

/// `0, Δt, 2Δt, …` up to and including `t_max` (within rounding).
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return invalid("grid needs dt > 0 and a finite t_max >= 0");
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        assert!((slope_bound(1, 2, 1, 3.0, 0.0) - 1.0 / 81.0).abs() < 1e-15);
        assert!(slope_bound(1, 2, 1, 3.0, 1e6) < 1e-20);
    }

    #[test]
    fn full_pattern_shifts_energy_linearly() {
        let b = BoxRegion::centered(1, 6.0).unwrap();
        let g = TrimPattern::full(1).unwrap();
        let grid = uniform_grid(1.0, 0.25).unwrap();
        let c = energy_curve(&b, &g, &Potential::Zero, &grid, 1e-12).unwrap();
        for s in &c.fd_slopes {
            assert!((s - 1.0).abs() < 1e-9);
        }
        assert!(c.trimmed_energy.is_none());
        let r = derivative_check(&c, 1, 1, 0.0).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn half_lattice_curve() {
        let b = BoxRegion::centered(1, 10.0).unwrap();
        let g = TrimPattern::sublattice(1, 2).unwrap();
        let grid = uniform_grid(2.0, 0.05).unwrap();
        let c = energy_curve(&b, &g, &Potential::Zero, &grid, 1e-12).unwrap();
        let e = c.energies();
        assert!(e.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let te = c.trimmed_energy.unwrap();
        assert!((te - 2.0).abs() < 1e-12);
        assert!(e.iter().all(|x| *x <= te + 1e-12));
        let r = derivative_check(&c, 1, 2, 0.0).unwrap();
        assert!(r.passed(), "{:?}", r.counterexamples);
        // Side 10 = 2 · 5.
        assert!(r.geometry_matches);
        let csv = c.to_csv(Some((1, 2)));
        assert!(csv.starts_with("t,energy,fd_slope,bound\n"));
        assert_eq!(csv.lines().count(), grid.len() + 1);
    }

    #[test]
    fn rejects_bad_grids() {
        let b = BoxRegion::centered(1, 4.0).unwrap();
        let g = TrimPattern::sublattice(1, 2).unwrap();
        assert!(energy_curve(&b, &g, &Potential::Zero, &[], 1e-10).is_err());
        assert!(energy_curve(&b, &g, &Potential::Zero, &[1.0, 0.5], 1e-10).is_err());
        assert!(energy_curve(&b, &g, &Potential::Zero, &[-1.0], 1e-10).is_err());
    }
}
