//! Thick-restart Lanczos for the lowest eigenpairs of a sparse symmetric matrix.
//!
//! Every new Krylov vector is orthogonalized twice against the whole current
//! basis, so the projected matrix is an exact Rayleigh quotient and the Ritz
//! residual is `β · |last component of the Ritz vector|`. When the basis is
//! full, the lowest Ritz vectors are kept and the iteration continues from the
//! last residual direction.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::CsrMatrix;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Number of lowest eigenpairs wanted.
    pub k: usize,
    /// Absolute eigenvalue tolerance.
    pub tol: f64,
    pub max_basis: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            k: 1,
            tol: 1e-10,
            max_basis: 120,
            max_restarts: 5000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Deterministic filler used after an invariant subspace is hit.
fn filler(n: usize, salt: u64) -> Vec<f64> {
    let mut s = 0x9E37_79B9_7F4A_7C15u64 ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    (0..n)
        .map(|_| {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

/// Lowest `opts.k` eigenpairs of `a`, starting from `start`.
pub fn lowest(a: &CsrMatrix, start: &[f64], opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = a.n();
    if n == 0 || opts.k == 0 || opts.k > n {
        return Err(Error::InvalidArgument(format!(
            "Lanczos needs 1 <= k <= n, got k = {}, n = {n}",
            opts.k
        )));
    }
    let m = opts.max_basis.max(opts.k + 2).min(n);
    let keep = (opts.k + (m / 3).max(2)).min(m.saturating_sub(1)).max(opts.k);
    let scale = a.norm_inf().max(1.0);
    let breakdown = 1e-13 * scale;

    let mut v0 = start.to_vec();
    let nv = norm(&v0);
    if !(nv > 0.0 && nv.is_finite()) {
        return Err(Error::InvalidArgument("Lanczos start vector must be nonzero".into()));
    }
    v0.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut locked = 0usize;
    let mut matvecs = 0usize;
    let mut w = vec![0.0; n];
    let mut salt = 1u64;

    for restart in 0..=opts.max_restarts {
        let mut beta_last = 0.0;
        let mut next: Option<Vec<f64>> = None;
        let mut j = locked;
        loop {
            a.matvec_into(&basis[j], &mut w);
            matvecs += 1;
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);
            let full = j + 1 == m;
            if beta <= breakdown {
                if basis.len() == n || full {
                    // Invariant subspace: the Ritz values are exact.
                    break;
                }
                let mut fresh = filler(n, salt);
                salt += 1;
                orthogonalize(&mut fresh, &basis);
                let nf = norm(&fresh);
                fresh.iter_mut().for_each(|x| *x /= nf);
                for i in 0..=j {
                    h[(i, j + 1)] = 0.0;
                    h[(j + 1, i)] = 0.0;
                }
                basis.push(fresh);
                j += 1;
                continue;
            }
            let v: Vec<f64> = w.iter().map(|x| x / beta).collect();
            if full {
                beta_last = beta;
                next = Some(v);
                break;
            }
            h[(j, j + 1)] = beta;
            h[(j + 1, j)] = beta;
            basis.push(v);
            j += 1;
        }

        let s = basis.len();
        let proj = h.view((0, 0), (s, s)).clone_owned();
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let res: Vec<f64> = order
            .iter()
            .map(|&i| (beta_last * eig.eigenvectors[(s - 1, i)]).abs())
            .collect();

        let want = opts.k.min(s);
        let converged = (0..want).all(|i| {
            if res[i] <= opts.tol || s == n && next.is_none() {
                return true;
            }
            let gap = theta.get(i + 1).map_or(f64::INFINITY, |t| t - theta[i]);
            res[i] <= 1e-6 * scale && gap > 0.0 && res[i] * res[i] / gap <= 0.1 * opts.tol
        });
        let exhausted = next.is_none();

        let ritz = |cols: usize| -> Vec<Vec<f64>> {
            (0..cols)
                .map(|c| {
                    let col = order[c];
                    let mut x = vec![0.0; n];
                    for (r, v) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(r, col)], v, &mut x);
                    }
                    x
                })
                .collect()
        };

        if (converged || exhausted) && want == opts.k {
            return Ok(LanczosResult {
                values: theta[..want].to_vec(),
                vectors: ritz(want),
                residuals: res[..want].to_vec(),
                matvecs,
                restarts: restart,
            });
        }
        if exhausted {
            return Err(Error::Internal(format!(
                "Krylov space of dimension {s} cannot hold {} eigenpairs",
                opts.k
            )));
        }
        if restart == opts.max_restarts {
            return Err(Error::Solver {
                context: format!("Lanczos for {} lowest eigenvalues, n = {n}", opts.k),
                iterations: matvecs,
                residual: res[..want].iter().copied().fold(0.0, f64::max),
            });
        }

        let p = keep.min(s - 1);
        let mut new_basis = ritz(p);
        h.fill(0.0);
        for (i, t) in theta.iter().take(p).enumerate() {
            h[(i, i)] = *t;
        }
        if let Some(v) = next {
            new_basis.push(v);
        }
        basis = new_basis;
        locked = p;
    }
    unreachable!("restart loop returns on its final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, diag: impl Fn(usize) -> f64) -> CsrMatrix {
        CsrMatrix::from_rows(
            (0..n)
                .map(|i| {
                    let mut r = vec![(i, diag(i))];
                    if i > 0 {
                        r.push((i - 1, -1.0));
                    }
                    if i + 1 < n {
                        r.push((i + 1, -1.0));
                    }
                    r
                })
                .collect(),
        )
    }

    #[test]
    fn free_chain_lowest_eigenvalue() {
        let n = 300;
        let a = chain(n, |_| 2.0);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let r = lowest(&a, &vec![1.0; n], &LanczosOptions::default()).unwrap();
        assert!((r.values[0] - exact).abs() < 1e-10, "{} vs {exact}", r.values[0]);
    }

    #[test]
    fn two_lowest_with_symmetric_start_needs_filler() {
        // The second eigenvector of a symmetric chain is odd, orthogonal to the
        // all-ones start; a small basis forces restarts.
        let n = 60;
        let a = chain(n, |_| 2.0);
        let exact = |k: f64| 2.0 - 2.0 * (k * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let mut start = vec![1.0; n];
        for (i, s) in start.iter_mut().enumerate() {
            *s += 1e-3 * (i as f64 - 29.5);
        }
        let opts = LanczosOptions {
            k: 2,
            max_basis: 20,
            ..Default::default()
        };
        let r = lowest(&a, &start, &opts).unwrap();
        assert!((r.values[0] - exact(1.0)).abs() < 1e-10);
        assert!((r.values[1] - exact(2.0)).abs() < 1e-10);
        assert!(r.restarts > 0);
    }

    #[test]
    fn tiny_matrix_is_solved_exactly() {
        let a = chain(3, |_| 2.0);
        let r = lowest(&a, &[1.0, 1.0, 1.0], &LanczosOptions::default()).unwrap();
        assert!((r.values[0] - (2.0 - 2f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn invalid_requests() {
        let a = chain(3, |_| 2.0);
        let bad = LanczosOptions {
            k: 4,
            ..Default::default()
        };
        assert!(lowest(&a, &[1.0; 3], &bad).is_err());
        assert!(lowest(&a, &[0.0; 3], &LanczosOptions::default()).is_err());
    }
}
