//! Initial configurations for the equilibrium search.
//!
//! Three families, in deterministic order: concentric-ring layouts over the
//! plausible shell partitions of N (at most three rings, occupancies
//! nondecreasing outward), perturbed triangular-lattice patches, and uniform
//! random placements in a disk of radius sqrt(N). Every seed keeps a minimum
//! pairwise distance of 0.1 and carries a small random perturbation so exact
//! symmetries cannot pin the solver on a saddle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A labeled starting configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub id: String,
    pub positions: Vec<[f64; 2]>,
}

const MIN_SEPARATION: f64 = 0.1;
const PERTURBATION: f64 = 1e-3;

/// Default number of seeds for a crystal of `n_ions`.
pub fn default_seed_count(n_ions: usize) -> usize {
    if n_ions <= 10 {
        20
    } else {
        50
    }
}

/// Deterministic seed list: ring partitions first, then lattice patches, then
/// random disk fills, truncated or padded with random fills to exactly
/// `count` entries.
pub fn generate_seeds(n_ions: usize, count: usize, rng_seed: u64) -> Vec<Seed> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = (n_ions as f64).sqrt();
    let mut seeds = Vec::with_capacity(count);

    for parts in ring_partitions(n_ions) {
        if seeds.len() >= count {
            break;
        }
        if let Some(pos) = ring_layout(&parts, scale, &mut rng) {
            let id = format!(
                "rings:{}",
                parts
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join("+")
            );
            seeds.push(Seed { id, positions: pos });
        }
    }

    let mut lattice_i = 0;
    while seeds.len() < count && lattice_i < 3 && n_ions >= 3 {
        let pos = lattice_patch(n_ions, &mut rng);
        if min_distance(&pos) > MIN_SEPARATION {
            seeds.push(Seed {
                id: format!("lattice:{lattice_i}"),
                positions: pos,
            });
        }
        lattice_i += 1;
    }

    let mut random_i = 0;
    while seeds.len() < count {
        seeds.push(Seed {
            id: format!("random:{random_i}"),
            positions: random_disk(n_ions, scale, &mut rng),
        });
        random_i += 1;
    }

    seeds
}

/// Shell partitions of n into at most three rings with occupancies
/// nondecreasing outward, ordered by ring count then lexicographically.
fn ring_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![n]];
    for a in 1..=n / 2 {
        out.push(vec![a, n - a]);
    }
    for a in 1..=n / 3 {
        for b in a..=(n - a) / 2 {
            let c = n - a - b;
            if c >= b {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

fn ring_layout(parts: &[usize], scale: f64, rng: &mut ChaCha8Rng) -> Option<Vec<[f64; 2]>> {
    let mut pos = Vec::new();
    let (rings, center) = if parts[0] == 1 {
        pos.push([0.0, 0.0]);
        (&parts[1..], true)
    } else {
        (parts, false)
    };
    let k = rings.len();
    for (j, &occ) in rings.iter().enumerate() {
        let radius = if center && k == 0 {
            0.0
        } else {
            scale * (j + 1) as f64 / k.max(1) as f64
        };
        let phase = rng.gen::<f64>();
        for i in 0..occ {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + phase) / occ as f64;
            pos.push([radius * th.cos(), radius * th.sin()]);
        }
    }
    perturb(&mut pos, scale, rng);
    if min_distance(&pos) > MIN_SEPARATION {
        Some(pos)
    } else {
        None
    }
}

fn lattice_patch(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    // spacing chosen so the n nearest lattice sites fill a disk of radius sqrt(n)
    let a0 = (std::f64::consts::PI / (3.0f64.sqrt() / 2.0)).sqrt();
    let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let (c, s) = (th.cos(), th.sin());
    let range = (2.0 * (n as f64).sqrt() / a0).ceil() as i64 + 2;
    let mut sites: Vec<[f64; 2]> = Vec::new();
    for i in -range..=range {
        for j in -range..=range {
            let x = a0 * (i as f64 + 0.5 * j as f64);
            let y = a0 * 3.0f64.sqrt() / 2.0 * j as f64;
            sites.push([c * x - s * y, s * x + c * y]);
        }
    }
    sites.sort_by(|p, q| {
        let rp = p[0] * p[0] + p[1] * p[1];
        let rq = q[0] * q[0] + q[1] * q[1];
        rp.partial_cmp(&rq).unwrap()
    });
    sites.truncate(n);
    let cx = sites.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = sites.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let mut pos: Vec<[f64; 2]> = sites.iter().map(|p| [p[0] - cx, p[1] - cy]).collect();
    perturb(&mut pos, (n as f64).sqrt(), rng);
    pos
}

fn random_disk(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut radius = scale;
    let mut pos: Vec<[f64; 2]> = Vec::with_capacity(n);
    while pos.len() < n {
        let mut placed = false;
        for _ in 0..200 {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let p = [r * th.cos(), r * th.sin()];
            if pos
                .iter()
                .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) > MIN_SEPARATION)
            {
                pos.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            // disk too crowded for the separation floor; widen and restart
            radius *= 1.5;
            pos.clear();
        }
    }
    pos
}

fn perturb(pos: &mut [[f64; 2]], scale: f64, rng: &mut ChaCha8Rng) {
    let amp = PERTURBATION * scale;
    for p in pos.iter_mut() {
        p[0] += amp * (2.0 * rng.gen::<f64>() - 1.0);
        p[1] += amp * (2.0 * rng.gen::<f64>() - 1.0);
    }
}

fn min_distance(pos: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            best = best.min((pos[i][0] - pos[j][0]).hypot(pos[i][1] - pos[j][1]));
        }
    }
    best
}
