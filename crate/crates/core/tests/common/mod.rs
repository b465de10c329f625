//! Shared helpers for the integration suites: an independently written
//! energy function, finite-difference derivatives of it, a configuration
//! sampler, and the one-line verdict printer used by the acceptance tests.
//!
//! The energy here is deliberately re-derived as plain loops rather than
//! calling into the library, so the derivative comparisons test two separate
//! implementations of the same definition. Differences are taken over the
//! terms that actually involve the perturbed ions; the omitted remainder is
//! exactly constant, and dropping it keeps the large-N cancellation error
//! out of the quotient.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Harmonic confinement plus pairwise Coulomb repulsion, in-plane.
pub fn planar_energy(beta1_sq: f64, pos: &[[f64; 2]]) -> f64 {
    let mut e = 0.0;
    for p in pos {
        e += 0.5 * beta1_sq * (p[0] * p[0] + p[1] * p[1]);
    }
    for m in 0..pos.len() {
        for n in (m + 1)..pos.len() {
            let dx = pos[m][0] - pos[n][0];
            let dy = pos[m][1] - pos[n][1];
            e += 1.0 / dx.hypot(dy);
        }
    }
    e
}

/// Terms of `planar_energy` that involve ion `m`.
fn ion_terms(beta1_sq: f64, pos: &[[f64; 2]], m: usize) -> f64 {
    let mut e = 0.5 * beta1_sq * (pos[m][0] * pos[m][0] + pos[m][1] * pos[m][1]);
    for n in 0..pos.len() {
        if n != m {
            let dx = pos[m][0] - pos[n][0];
            let dy = pos[m][1] - pos[n][1];
            e += 1.0 / dx.hypot(dy);
        }
    }
    e
}

/// Central-difference gradient of the planar energy.
pub fn fd_gradient(beta1_sq: f64, pos: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    let mut work = pos.to_vec();
    let mut g = Vec::with_capacity(pos.len());
    for m in 0..pos.len() {
        let mut gm = [0.0f64; 2];
        for axis in 0..2 {
            let saved = work[m][axis];
            work[m][axis] = saved + h;
            let plus = ion_terms(beta1_sq, &work, m);
            work[m][axis] = saved - h;
            let minus = ion_terms(beta1_sq, &work, m);
            work[m][axis] = saved;
            gm[axis] = (plus - minus) / (2.0 * h);
        }
        g.push(gm);
    }
    g
}

/// Energy of a full 3N configuration `[x.., y.., z..]`, restricted to the
/// confinement of the ions in `set` plus every pair touching them.
fn terms_3n(beta1_sq: f64, beta3_sq: f64, q: &[f64], n: usize, set: &[usize]) -> f64 {
    let mut e = 0.0;
    for &s in set {
        e += 0.5 * beta1_sq * (q[s] * q[s] + q[n + s] * q[n + s])
            + 0.5 * beta3_sq * q[2 * n + s] * q[2 * n + s];
    }
    for &s in set {
        for j in 0..n {
            if j == s || (set.contains(&j) && j < s) {
                continue;
            }
            let dx = q[s] - q[j];
            let dy = q[n + s] - q[n + j];
            let dz = q[2 * n + s] - q[2 * n + j];
            e += 1.0 / (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    e
}

fn ion_of(coord: usize, n: usize) -> usize {
    coord % n
}

/// One second-partial of the 3N energy by central differences at step `h`.
fn fd_second(beta1_sq: f64, beta3_sq: f64, q: &mut [f64], n: usize, ci: usize, cj: usize, h: f64) -> f64 {
    let a = ion_of(ci, n);
    let b = ion_of(cj, n);
    let set: &[usize] = if a == b { &[a][..] } else { &[a, b][..] };
    let f = |q: &[f64]| terms_3n(beta1_sq, beta3_sq, q, n, set);
    let (si, sj) = (q[ci], q[cj]);
    let out;
    if ci == cj {
        let f0 = f(q);
        q[ci] = si + h;
        let fp = f(q);
        q[ci] = si - h;
        let fm = f(q);
        out = (fp - 2.0 * f0 + fm) / (h * h);
    } else {
        q[ci] = si + h;
        q[cj] = sj + h;
        let fpp = f(q);
        q[cj] = sj - h;
        let fpm = f(q);
        q[ci] = si - h;
        let fmm = f(q);
        q[cj] = sj + h;
        let fmp = f(q);
        out = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
    q[ci] = si;
    q[cj] = sj;
    out
}

fn fd_hessian_at(beta1_sq: f64, beta3_sq: f64, q: &[f64], n: usize, h: f64) -> DMatrix<f64> {
    let dim = 3 * n;
    let mut work = q.to_vec();
    let mut hess = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = fd_second(beta1_sq, beta3_sq, &mut work, n, i, j, h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Hessian of the 3N energy with the leading O(h^2) truncation term removed
/// by step-halving extrapolation.
pub fn fd_hessian(beta1_sq: f64, beta3_sq: f64, q: &[f64], n: usize, h: f64) -> DMatrix<f64> {
    let coarse = fd_hessian_at(beta1_sq, beta3_sq, q, n, h);
    let fine = fd_hessian_at(beta1_sq, beta3_sq, q, n, 0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// Uniform positions in a centered square, kept at least `min_dist` apart.
pub fn sample_positions(
    rng: &mut ChaCha8Rng,
    n: usize,
    half_width: f64,
    min_dist: f64,
) -> Vec<[f64; 2]> {
    let mut pos: Vec<[f64; 2]> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while pos.len() < n {
        attempts += 1;
        if attempts > 100_000 {
            // unreachable for the densities used here; restart to stay total
            pos.clear();
            attempts = 0;
        }
        let cand = [
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        ];
        let ok = pos
            .iter()
            .all(|p| (p[0] - cand[0]).hypot(p[1] - cand[1]) >= min_dist);
        if ok {
            pos.push(cand);
        }
    }
    pos
}

/// Print the one-line verdict for an acceptance criterion, then panic with
/// the collected sub-check messages if any check failed.
pub fn verdict(label: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("acceptance {label}: PASS");
    } else {
        println!("acceptance {label}: FAIL");
        panic!(
            "{} sub-check(s) failed:\n  {}",
            failures.len(),
            failures.join("\n  ")
        );
    }
}
