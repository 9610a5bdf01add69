//! Sylvester inertia of symmetric matrices.
//!
//! Dense matrices use an `L D Lᵀ` factorization with Bunch–Kaufman symmetric
//! pivoting (1×1 and 2×2 pivot blocks); tridiagonal matrices use the
//! equivalent unpivoted Sturm recurrence.

use nalgebra::DMatrix;

/// Counts of negative, zero and positive eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

// Growth-bounding constant for the pivot choice.
const ALPHA: f64 = 0.640_388_203_202_208_4; // (1 + sqrt(17)) / 8

/// A pivot whose magnitude is at or below `zero_tol` is counted as zero.
pub fn inertia_dense(mut a: DMatrix<f64>, zero_tol: f64) -> Inertia {
    let n = a.nrows();
    let mut out = Inertia::default();
    let mut k = 0;
    while k < n {
        let absakk = a[(k, k)].abs();
        let (imax, colmax) = ((k + 1)..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, 0.0), |best, c| if c.1 > best.1 { c } else { best });

        if absakk.max(colmax) <= zero_tol {
            // Column already eliminated: a zero eigenvalue of the trailing block.
            out.zero += 1;
            k += 1;
            continue;
        }

        let (kp, kstep) = if absakk >= ALPHA * colmax {
            (k, 1)
        } else {
            let rowmax = (k..n)
                .filter(|&j| j != imax)
                .map(|j| a[(imax, j)].abs())
                .fold(0.0, f64::max);
            if absakk * rowmax >= ALPHA * colmax * colmax {
                (k, 1)
            } else if a[(imax, imax)].abs() >= ALPHA * rowmax {
                (imax, 1)
            } else {
                (imax, 2)
            }
        };

        let kk = k + kstep - 1;
        if kp != kk {
            a.swap_rows(kk, kp);
            a.swap_columns(kk, kp);
        }

        if kstep == 1 {
            let d = a[(k, k)];
            if d.abs() <= zero_tol {
                out.zero += 1;
            } else if d < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
            if d != 0.0 {
                let data = a.as_mut_slice();
                for j in (k + 1)..n {
                    let f = data[j + k * n] / d;
                    if f == 0.0 {
                        continue;
                    }
                    let (left, right) = data.split_at_mut(j * n);
                    let ck = &left[k * n + k + 1..k * n + n];
                    for (x, y) in right[k + 1..n].iter_mut().zip(ck) {
                        *x -= f * y;
                    }
                }
            }
        } else {
            let (p, q, r) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
            let det = p * r - q * q;
            let scale = p.abs().max(q.abs()).max(r.abs());
            if det.abs() <= zero_tol * scale {
                out.zero += 1;
                let tr = p + r;
                if tr < 0.0 {
                    out.negative += 1;
                } else {
                    out.positive += 1;
                }
            } else if det < 0.0 {
                out.negative += 1;
                out.positive += 1;
            } else if p + r < 0.0 {
                out.negative += 2;
            } else {
                out.positive += 2;
            }
            if det != 0.0 {
                // Trailing update A22 -= W D⁻¹ Wᵀ with W = A[k+2.., k..k+2].
                let data = a.as_mut_slice();
                for j in (k + 2)..n {
                    let (wj1, wj2) = (data[j + k * n], data[j + (k + 1) * n]);
                    let c1 = (r * wj1 - q * wj2) / det;
                    let c2 = (p * wj2 - q * wj1) / det;
                    let (left, right) = data.split_at_mut(j * n);
                    let c0 = &left[k * n + k + 2..k * n + n];
                    let c1s = &left[(k + 1) * n + k + 2..(k + 1) * n + n];
                    for ((x, y0), y1) in right[k + 2..n].iter_mut().zip(c0).zip(c1s) {
                        *x -= y0 * c1 + y1 * c2;
                    }
                }
            }
        }
        k += kstep;
    }
    out
}

/// Inertia of the symmetric tridiagonal matrix with the given diagonal and
/// off-diagonal, via the Sturm recurrence `q_i = a_i - b_{i-1}^2 / q_{i-1}`.
pub fn inertia_tridiagonal(diag: &[f64], off: &[f64], zero_tol: f64) -> Inertia {
    let mut out = Inertia::default();
    let mut q_prev = 1.0;
    for (i, &a) in diag.iter().enumerate() {
        let q = if i == 0 {
            a
        } else if q_prev == 0.0 {
            // An exact zero pivot; the next pivot is infinite with the sign of -b².
            f64::NEG_INFINITY
        } else {
            a - off[i - 1] * off[i - 1] / q_prev
        };
        if q.abs() <= zero_tol {
            out.zero += 1;
            q_prev = 0.0;
        } else {
            if q < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
            q_prev = if q.is_infinite() { f64::MAX.copysign(q) } else { q };
        }
    }
    out
}
