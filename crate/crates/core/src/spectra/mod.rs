//! Ground energies, positive ground states, eigenvalue counts and `E^Λ(t)`
//! curves of finite-volume operators.

mod curve;
pub mod inertia;
pub mod lanczos;
mod perron;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{CsrMatrix, LatticeOperator, DENSE_LIMIT};

pub use curve::{
    derivative_check, energy_curve, slope_bound, uniform_grid, CurvePoint, DerivativeReport, DerivativeRow,
    EnergyCurve,
};
pub use inertia::{inertia_dense, inertia_tridiagonal, Inertia};
pub use perron::{ground_state_pf, ucp_check, GroundState, PfOptions, UcpReport};

/// Operators up to this size go to the dense eigensolver under [`Method::Auto`].
pub const DENSE_CROSSOVER: usize = 512;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    Lanczos,
    PowerRayleigh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: SolverKind,
    pub iterations: usize,
    /// Largest `‖Hv - λv‖` over the returned pairs.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub method: Method,
    pub max_restarts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            method: Method::Auto,
            max_restarts: 5000,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Lowest eigenpairs in ascending order.
#[derive(Clone, Debug)]
pub struct EigenSolve {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub meta: SolverMeta,
}

fn residual(m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    m.matvec(v)
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn start_vector(n: usize, k: usize) -> Vec<f64> {
    if k <= 1 {
        return vec![1.0; n];
    }
    // Break the symmetry of the box so that odd eigenvectors are reachable.
    (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64) * 0.754_877_666 + 0.1).sin())
        .collect()
}

pub fn lowest_eigenpairs(m: &CsrMatrix, k: usize, opts: &SolveOptions) -> Result<EigenSolve> {
    let n = m.n();
    if n == 0 {
        return Err(Error::EmptyDomain("operator has no sites".into()));
    }
    if k == 0 || k > n {
        return invalid(format!("requested {k} eigenpairs of an operator with n = {n}"));
    }
    if !(opts.tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {}", opts.tol));
    }
    let dense = match opts.method {
        Method::Auto => n <= DENSE_CROSSOVER,
        Method::Dense => true,
        Method::Krylov => false,
    };
    if dense {
        let eig = SymmetricEigen::new(m.to_dense()?);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors: Vec<Vec<f64>> = order[..k]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        let res = values
            .iter()
            .zip(&vectors)
            .map(|(l, v)| residual(m, *l, v))
            .fold(0.0, f64::max);
        return Ok(EigenSolve {
            values,
            vectors,
            meta: SolverMeta {
                method: SolverKind::Dense,
                iterations: 1,
                residual: res,
            },
        });
    }
    let lopts = lanczos::LanczosOptions {
        k,
        tol: opts.tol,
        max_restarts: opts.max_restarts,
        ..Default::default()
    };
    let r = lanczos::lowest(m, &start_vector(n, k), &lopts)?;
    let res = r
        .values
        .iter()
        .zip(&r.vectors)
        .map(|(l, v)| residual(m, *l, v))
        .fold(0.0, f64::max);
    Ok(EigenSolve {
        values: r.values,
        vectors: r.vectors,
        meta: SolverMeta {
            method: SolverKind::Lanczos,
            iterations: r.matvecs,
            residual: res,
        },
    })
}

/// `inf σ(op)` to absolute tolerance `tol`.
pub fn ground_energy(op: &LatticeOperator, tol: f64) -> Result<f64> {
    Ok(lowest_eigenpairs(op.matrix(), 1, &SolveOptions::with_tol(tol))?.values[0])
}

pub fn ground_energy_with(op: &LatticeOperator, opts: &SolveOptions) -> Result<EigenSolve> {
    lowest_eigenpairs(op.matrix(), 1, opts)
}

/// A shift that had to be moved off a factorization breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftPerturbation {
    pub requested: f64,
    pub used: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCount {
    pub count: usize,
    /// Shifts actually factorized, lower then upper.
    pub shifts: [f64; 2],
    pub perturbations: Vec<ShiftPerturbation>,
}

fn is_tridiagonal(m: &CsrMatrix) -> bool {
    (0..m.n()).all(|i| m.row(i).all(|(j, _)| i.abs_diff(j) <= 1))
}

/// Number of eigenvalues strictly below `shift`, moving the shift by
/// `direction · 1e-12 · scale` steps while the factorization breaks down.
fn count_below(
    m: &CsrMatrix,
    shift: f64,
    direction: f64,
    scale: f64,
    tri: bool,
    log: &mut Vec<ShiftPerturbation>,
) -> Result<(usize, f64)> {
    let n = m.n();
    let zero_tol = 4.0 * f64::EPSILON * scale;
    let diag = m.diagonal();
    let off: Vec<f64> = if tri {
        (0..n.saturating_sub(1)).map(|i| m.get(i, i + 1)).collect()
    } else {
        Vec::new()
    };
    let dense = if tri { None } else { Some(m.to_dense()?) };
    let mut s = shift;
    for attempt in 0..64 {
        let inertia = if let Some(a) = &dense {
            let mut a = a.clone();
            for i in 0..n {
                a[(i, i)] -= s;
            }
            inertia_dense(a, zero_tol)
        } else {
            let d: Vec<f64> = diag.iter().map(|x| x - s).collect();
            inertia_tridiagonal(&d, &off, zero_tol)
        };
        if inertia.zero == 0 {
            if attempt > 0 {
                log.push(ShiftPerturbation {
                    requested: shift,
                    used: s,
                });
            }
            return Ok((inertia.negative, s));
        }
        s = shift + direction * 1e-12 * scale * (attempt + 1) as f64;
    }
    Err(Error::Solver {
        context: format!("LDLᵀ factorization kept breaking down near shift {shift}"),
        iterations: 64,
        residual: 0.0,
    })
}

/// Number of eigenvalues in the closed interval `[a, b]`.
pub fn count_eigs_matrix(m: &CsrMatrix, a: f64, b: f64) -> Result<EigenCount> {
    if a.is_nan() || b.is_nan() || a > b {
        return invalid(format!("count_eigs needs a <= b, got [{a}, {b}]"));
    }
    let n = m.n();
    let tri = is_tridiagonal(m);
    if !tri && n > DENSE_LIMIT {
        return Err(Error::Size(format!(
            "eigenvalue counting needs n <= {DENSE_LIMIT} unless the operator is tridiagonal, got n = {n}"
        )));
    }
    let scale = m.norm_inf().max(1.0);
    let eps = 1e-12 * scale;
    let mut log = Vec::new();
    let (below_a, sa) = if a == f64::NEG_INFINITY {
        (0, a)
    } else {
        count_below(m, a - eps, -1.0, scale, tri, &mut log)?
    };
    let (below_b, sb) = if b == f64::INFINITY {
        (n, b)
    } else {
        count_below(m, b + eps, 1.0, scale, tri, &mut log)?
    };
    Ok(EigenCount {
        count: below_b.saturating_sub(below_a),
        shifts: [sa, sb],
        perturbations: log,
    })
}

pub fn count_eigs(op: &LatticeOperator, a: f64, b: f64) -> Result<EigenCount> {
    count_eigs_matrix(op.matrix(), a, b)
}
