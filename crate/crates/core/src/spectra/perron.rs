//! Strictly positive ground states through the nonnegative companion
//! `T = Y - (H - inf V)`, with the quantitative unique-continuation checks.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{lowest_eigenpairs, SolveOptions, SolverKind, SolverMeta};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{pf_companion, LatticeOperator};

#[derive(Clone, Debug)]
pub struct PfOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// A Rayleigh–Ritz step replaces every `accel_every`-th power step.
    pub accel_every: usize,
}

impl Default for PfOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200_000,
            accel_every: 2,
        }
    }
}

/// Lower bounds on the ground state, evaluated on the computed vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcpReport {
    /// `Y` of the effective potential (penalty included).
    pub y: f64,
    /// Box side `L`.
    pub side: f64,
    pub min_psi: f64,
    /// `Y^{-dL}`; may underflow to zero, `log_uniform_bound` does not.
    pub uniform_bound: f64,
    pub log_uniform_bound: f64,
    pub uniform_ok: bool,
    /// Sites violating `ψ(x) >= Y^{-m} Σ_{|x-y|_1 <= m} ψ(y)` for m = 1, 2.
    pub local_violations: [usize; 2],
    /// Smallest `ψ(x) / (Y^{-m} Σ ψ(y))` seen, for m = 1, 2.
    pub local_min_ratio: [f64; 2],
}

impl UcpReport {
    pub fn holds(&self) -> bool {
        self.uniform_ok && self.local_violations == [0, 0]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// Distance to the second eigenvalue; infinite on a single site.
    pub gap: f64,
    pub solver_meta: SolverMeta,
    pub ucp: UcpReport,
}

/// All offsets `z` with `|z|_1 <= m`.
fn l1_ball(d: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &out {
            let used: i64 = p.iter().map(|c: &i64| c.abs()).sum();
            for c in -(m - used)..=(m - used) {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Check the ground-state lower bounds for `psi` on a full-box operator.
pub fn ucp_check(op: &LatticeOperator, psi: &[f64]) -> Result<UcpReport> {
    if psi.len() != op.n() {
        return invalid(format!("vector has length {}, operator has n = {}", psi.len(), op.n()));
    }
    let y = pf_companion(op)?.top;
    let d = op.dim();
    let side = op.region().side();
    let min_psi = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let log_bound = -(d as f64) * side * y.ln();
    let uniform_ok = min_psi > 0.0 && min_psi.ln() >= log_bound;

    let mut violations = [0usize; 2];
    let mut ratios = [f64::INFINITY; 2];
    for m in 1..=2i64 {
        let ball = l1_ball(d, m);
        let w = y.powi(-(m as i32));
        for (i, x) in op.sites().iter().enumerate() {
            let sum: f64 = ball
                .iter()
                .filter_map(|z| {
                    let s: Vec<i64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
                    op.index_of(&s)
                })
                .map(|j| psi[j])
                .sum();
            let rhs = w * sum;
            let slot = (m - 1) as usize;
            ratios[slot] = ratios[slot].min(psi[i] / rhs);
            if psi[i] < rhs {
                violations[slot] += 1;
            }
        }
    }
    Ok(UcpReport {
        y,
        side,
        min_psi,
        uniform_bound: log_bound.exp(),
        log_uniform_bound: log_bound,
        uniform_ok,
        local_violations: violations,
        local_min_ratio: ratios,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(a: &mut [f64]) -> f64 {
    let n = dot(a, a).sqrt();
    a.iter_mut().for_each(|x| *x /= n);
    n
}

/// Orthonormalize `v` against `basis`; `None` if nothing is left of it.
fn fresh_direction(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let before = dot(&v, &v).sqrt();
    if !(before > 0.0) {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let after = normalize(&mut v);
    (after > 1e-12 * before).then_some(v)
}

/// Ground state of a full-box operator by power iteration on `T`.
pub fn ground_state_pf(op: &LatticeOperator, opts: &PfOptions) -> Result<GroundState> {
    if !(opts.tol > 0.0) || opts.accel_every == 0 {
        return invalid("power iteration needs tol > 0 and accel_every >= 1");
    }
    let comp = pf_companion(op)?;
    let t = &comp.matrix;
    let n = op.n();
    // T + c has a nonnegative spectrum, so plain power steps stay on the top mode.
    let c = (2 * op.dim()) as f64 - 1.0;

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut x_old: Option<Vec<f64>> = None;
    let mut res = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let tx = t.matvec(&x);
        let mu = dot(&x, &tx);
        let r: Vec<f64> = tx.iter().zip(&x).map(|(a, b)| a - mu * b).collect();
        res = dot(&r, &r).sqrt();
        if res <= opts.tol {
            break;
        }
        iterations += 1;
        let next = if iterations % opts.accel_every == 0 {
            let mut basis = vec![x.clone()];
            if let Some(q) = fresh_direction(r, &basis) {
                basis.push(q);
            }
            if let Some(p) = &x_old {
                let diff = x.iter().zip(p).map(|(a, b)| a - b).collect();
                if let Some(q) = fresh_direction(diff, &basis) {
                    basis.push(q);
                }
            }
            let images: Vec<Vec<f64>> = std::iter::once(tx.clone())
                .chain(basis[1..].iter().map(|b| t.matvec(b)))
                .collect();
            let k = basis.len();
            let g = DMatrix::from_fn(k, k, |i, j| {
                0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
            });
            let eig = SymmetricEigen::new(g);
            let top = (0..k)
                .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
                .unwrap_or(0);
            let coef = eig.eigenvectors.column(top);
            let mut y = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                y.iter_mut().zip(b).for_each(|(acc, v)| *acc += coef[i] * v);
            }
            if y.iter().sum::<f64>() < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
            y
        } else {
            tx.iter().zip(&x).map(|(a, b)| a + c * b).collect()
        };
        let mut next = next;
        normalize(&mut next);
        x_old = Some(std::mem::replace(&mut x, next));
    }
    if res > opts.tol {
        return Err(Error::Solver {
            context: format!("Perron–Frobenius power iteration, n = {n}"),
            iterations,
            residual: res,
        });
    }

    // The Perron vector is |x|; two nonnegative power steps remove sign noise
    // without leaving the converged eigenspace.
    x.iter_mut().for_each(|v| *v = v.abs());
    for _ in 0..2 {
        let mut y: Vec<f64> = t.matvec(&x).iter().zip(&x).map(|(a, b)| a + c * b).collect();
        normalize(&mut y);
        x = y;
    }
    let tx = t.matvec(&x);
    let mu = dot(&x, &tx);
    res = tx
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - mu * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Internal(format!(
            "ground state component {v} at site {:?} is not strictly positive",
            op.sites()[i]
        )));
    }

    let gap = if n == 1 {
        f64::INFINITY
    } else {
        let two = lowest_eigenpairs(op.matrix(), 2, &SolveOptions::with_tol(opts.tol))?;
        two.values[1] - two.values[0]
    };
    let ucp = ucp_check(op, &x)?;
    Ok(GroundState {
        energy: comp.energy_from(mu),
        vector: x,
        gap,
        solver_meta: SolverMeta {
            method: SolverKind::PowerRayleigh,
            iterations,
            residual: res,
        },
        ucp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, Mode, Potential};
    use crate::lattice::BoxRegion;

    #[test]
    fn three_site_chain() {
        let b = BoxRegion::centered(1, 3.0).unwrap();
        let op = assemble(&b, &Potential::Zero, None, Mode::Full).unwrap();
        let gs = ground_state_pf(&op, &PfOptions::default()).unwrap();
        assert!((gs.energy - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        let expect = [0.5, 0.5 * 2f64.sqrt(), 0.5];
        for (a, b) in gs.vector.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((gs.gap - 2f64.sqrt()).abs() < 1e-10);
        assert_eq!(gs.ucp.y, 3.0);
        assert!((gs.ucp.uniform_bound - 1.0 / 27.0).abs() < 1e-15);
        assert!(gs.ucp.holds());
    }

    #[test]
    fn single_site() {
        let b = BoxRegion::centered(2, 1.0).unwrap();
        let v = Potential::point(vec![0, 0], 0.75).unwrap();
        let op = assemble(&b, &v, None, Mode::Full).unwrap();
        let gs = ground_state_pf(&op, &PfOptions::default()).unwrap();
        assert_eq!(gs.vector, vec![1.0]);
        assert!((gs.energy - 4.75).abs() < 1e-14);
        assert!(gs.gap.is_infinite());
    }

    #[test]
    fn rough_potential_in_two_dimensions() {
        let b = BoxRegion::centered(2, 9.0).unwrap();
        let v = Potential::callback(|x| ((x[0] * 31 + x[1] * 17).rem_euclid(11)) as f64 * 0.7);
        let op = assemble(&b, &v, None, Mode::Full).unwrap();
        let gs = ground_state_pf(&op, &PfOptions::default()).unwrap();
        let e = super::super::ground_energy(&op, 1e-12).unwrap();
        assert!((gs.energy - e).abs() < 1e-9);
        assert!(gs.gap > 0.0);
        assert!(gs.ucp.holds());
        assert!((gs.vector.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(l1_ball(1, 2).len(), 5);
        assert_eq!(l1_ball(2, 1).len(), 5);
        assert_eq!(l1_ball(2, 2).len(), 13);
        assert_eq!(l1_ball(3, 1).len(), 7);
    }
}
