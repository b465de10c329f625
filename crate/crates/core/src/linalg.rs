//! Dense symmetric eigenvalue decomposition by cyclic Jacobi rotations.
//!
//! Sized for the mode matrices of this crate (at most 40 x 40), where the
//! quadratic convergence and unconditional robustness of Jacobi beat any
//! speed argument. Results are fully deterministic: eigenvalues ascending,
//! eigenvectors orthonormal with the largest-magnitude component positive
//! (ties resolved by the lowest index).

use nalgebra::DMatrix;

/// Eigendecomposition of a symmetric matrix. Only the upper triangle is read.
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// columns.
pub fn symmetric_eigen(mat: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "matrix must be square");
    let mut a = mat.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0f64; n];

    for sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].abs();
            }
        }
        if off == 0.0 {
            break;
        }
        let thresh = if sweep < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let g = 100.0 * a[(p, q)].abs();
                if sweep >= 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[(p, q)] = 0.0;
                } else if a[(p, q)].abs() > thresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a[(p, q)] / h
                    } else {
                        let theta = 0.5 * h / a[(p, q)];
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * a[(p, q)];
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a[(p, q)] = 0.0;
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q, s, tau);
                    }
                    for j in (p + 1)..q {
                        rotate(&mut a, p, j, j, q, s, tau);
                    }
                    for j in (q + 1)..n {
                        rotate(&mut a, p, j, q, j, s, tau);
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q, s, tau);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }

    // ascending eigenvalues; stable order within exact ties
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        let mut col = v.column(old).clone_owned();
        fix_sign(col.as_mut_slice());
        vectors.set_column(new, &col);
    }
    (values, vectors)
}

/// Flip a vector so its largest-magnitude component (first on ties) is
/// positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut k = 0;
    let mut best = -1.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            k = i;
        }
    }
    if v[k] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

#[inline]
fn rotate(m: &mut DMatrix<f64>, i: usize, j: usize, k: usize, l: usize, s: f64, tau: f64) {
    let g = m[(i, j)];
    let h = m[(k, l)];
    m[(i, j)] = g - s * (h + g * tau);
    m[(k, l)] = h + s * (g - h * tau);
}
