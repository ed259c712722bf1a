use crate::error::{Error, Result};
use crate::function::VertexFunction;

use super::WeightedGraph;

/// Lower bound for interpolated k-NN weights, so that the least similar of the
/// `k` neighbours keeps a (small) positive weight.
pub const KNN_WEIGHT_FLOOR: f64 = 1e-3;

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Patch similarity `PSM(i, j) = (Σ_{k,l=-s}^{s} d²(f(i+(k,l)), f(j+(k,l))))^{1/2}`
/// on a 2-D grid, with periodic continuation at the border. Pixel pairs
/// involving a masked pixel are skipped.
pub fn patch_distance(f: &VertexFunction, i: usize, j: usize, s: usize) -> Result<f64> {
    let (h, w) = f.grid_dims()?;
    if i >= f.len() || j >= f.len() {
        return Err(Error::Config(format!("pixel index out of range ({i}, {j})")));
    }
    let m = f.manifold();
    let (ri, ci) = ((i / w) as isize, (i % w) as isize);
    let (rj, cj) = ((j / w) as isize, (j % w) as isize);
    let s = s as isize;
    let mut acc = 0.0;
    for k in -s..=s {
        for l in -s..=s {
            let a = wrap(ri + k, h) * w + wrap(ci + l, w);
            let b = wrap(rj + k, h) * w + wrap(cj + l, w);
            if f.is_active(a) && f.is_active(b) {
                let d = m.dist(f.value(a), f.value(b));
                acc += d * d;
            }
        }
    }
    Ok(acc.sqrt())
}

/// Parameters of the patch-based k-nearest-neighbour construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnPatchOptions {
    pub k: usize,
    /// Patch radius `s`; patches are `(2s+1) x (2s+1)`.
    pub patch_radius: usize,
    /// Optional square search window radius; `None` searches the whole image.
    pub window: Option<usize>,
}

/// Periodic box sum of radius `s` over an `h x w` torus.
fn box_sum(g: &[f64], h: usize, w: usize, s: usize, tmp: &mut [f64], out: &mut [f64]) {
    let s = s as isize;
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for l in -s..=s {
                acc += g[r * w + wrap(c as isize + l, w)];
            }
            tmp[r * w + c] = acc;
        }
    }
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for k in -s..=s {
                acc += tmp[wrap(r as isize + k, h) * w + c];
            }
            out[r * w + c] = acc;
        }
    }
}

/// Inserts `(d, j)` into an ascending list holding the `k` best candidates,
/// ordered by distance and then by index.
fn offer(best: &mut Vec<(f64, usize)>, k: usize, d: f64, j: usize) {
    let key = |a: &(f64, usize)| (a.0, a.1);
    if best.len() == k {
        let worst = key(&best[k - 1]);
        if (d, j) >= worst {
            return;
        }
        best.pop();
    }
    let pos = best.partition_point(|b| key(b) < (d, j));
    best.insert(pos, (d, j));
}

/// Linear interpolation between the most similar (weight 1) and least similar
/// (weight [`KNN_WEIGHT_FLOOR`]) of the selected neighbours.
pub(crate) fn interpolated_weights(sorted_psm: &[f64]) -> Vec<f64> {
    let (first, last) = match (sorted_psm.first(), sorted_psm.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Vec::new(),
    };
    if last <= first {
        return vec![1.0; sorted_psm.len()];
    }
    sorted_psm
        .iter()
        .map(|&d| ((last - d) / (last - first)).clamp(KNN_WEIGHT_FLOOR, 1.0))
        .collect()
}

/// Patch-based k-NN graph on a 2-D grid function.
///
/// Every active pixel is linked to the `k` active pixels with the smallest
/// patch distance (ties go to the smaller index), weighted by linear
/// interpolation of the patch distances. The directed graph is then
/// symmetrized with `w(u,v) ← max(w(u,v), w(v,u))`. Masked pixels get no
/// edges and are never candidates.
pub fn knn_patch_graph(f: &VertexFunction, opts: KnnPatchOptions) -> Result<WeightedGraph> {
    let (h, w) = f.grid_dims()?;
    let n = h * w;
    let k = opts.k;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let active = f.active_count();
    if k >= active {
        return Err(Error::Domain(format!("k = {k} needs more than {active} active vertices")));
    }
    let m = f.manifold();
    let (ry, rx) = match opts.window {
        Some(r) => (r.min(h - 1) as isize, r.min(w - 1) as isize),
        None => ((h - 1) as isize, (w - 1) as isize),
    };

    let mut best: Vec<Vec<(f64, usize)>> = vec![Vec::with_capacity(k + 1); n];
    let mut g = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut sums = vec![0.0; n];
    for dy in -ry..=ry {
        for dx in -rx..=rx {
            if dy == 0 && dx == 0 {
                continue;
            }
            for r in 0..h {
                for c in 0..w {
                    let a = r * w + c;
                    let b = wrap(r as isize + dy, h) * w + wrap(c as isize + dx, w);
                    g[a] = if f.is_active(a) && f.is_active(b) {
                        let d = m.dist(f.value(a), f.value(b));
                        d * d
                    } else {
                        0.0
                    };
                }
            }
            box_sum(&g, h, w, opts.patch_radius, &mut tmp, &mut sums);
            for r in 0..h {
                let rj = r as isize + dy;
                if rj < 0 || rj >= h as isize {
                    continue;
                }
                for c in 0..w {
                    let cj = c as isize + dx;
                    if cj < 0 || cj >= w as isize {
                        continue;
                    }
                    let i = r * w + c;
                    let j = rj as usize * w + cj as usize;
                    if f.is_active(i) && f.is_active(j) {
                        offer(&mut best[i], k, sums[i].sqrt(), j);
                    }
                }
            }
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for (i, list) in best.iter().enumerate() {
        if !f.is_active(i) {
            continue;
        }
        if list.len() < k {
            return Err(Error::Domain(format!(
                "vertex {i} has only {} candidates inside the search window for k = {k}",
                list.len()
            )));
        }
        let psm: Vec<f64> = list.iter().map(|&(d, _)| d).collect();
        for (&(_, j), wt) in list.iter().zip(interpolated_weights(&psm)) {
            adjacency[i].push((j, wt));
        }
    }
    Ok(WeightedGraph::from_adjacency(n, adjacency)?.symmetrized_max())
}
