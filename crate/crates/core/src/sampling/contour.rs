use std::collections::HashMap;

use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::geometry::polygon_area;
use crate::sampling::IndicatorGrid;
use crate::scalar::{from_usize, lit, Real};

/// Level as a fraction of `max W`.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

type EdgeKey = (u8, usize, usize);

/// Closed components of `{W = level}` by marching squares. Cells with a
/// masked corner are skipped, so components running into the mask stay open
/// and are dropped.
pub fn marching_squares<T: Real>(grid: &IndicatorGrid<T>, level: T) -> Vec<Vec<Point2<T>>> {
    let n = grid.spec.resolution;
    if n < 2 {
        return Vec::new();
    }
    let mut points: HashMap<EdgeKey, Point2<T>> = HashMap::new();
    let mut adj: HashMap<EdgeKey, Vec<EdgeKey>> = HashMap::new();
    let half = lit::<T>(0.5);

    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let vals: Option<Vec<T>> = corners.iter().map(|&(a, b)| grid.get(a, b)).collect();
            let Some(v) = vals else { continue };
            let above: Vec<bool> = v.iter().map(|&x| x > level).collect();
            // edges: bottom, right, top, left, each as (corner a, corner b, key)
            let edges: [(usize, usize, EdgeKey); 4] =
                [(0, 1, (0, i, j)), (1, 2, (1, i + 1, j)), (3, 2, (0, i, j + 1)), (0, 3, (1, i, j))];
            let mut crossing = [false; 4];
            for (e, &(a, b, key)) in edges.iter().enumerate() {
                if above[a] != above[b] {
                    crossing[e] = true;
                    points.entry(key).or_insert_with(|| {
                        let pa = grid.spec.point(corners[a].0, corners[a].1);
                        let pb = grid.spec.point(corners[b].0, corners[b].1);
                        let t = (level - v[a]) / (v[b] - v[a]);
                        pa + (pb - pa) * t
                    });
                }
            }
            let idx: Vec<usize> = (0..4).filter(|&e| crossing[e]).collect();
            let segments: Vec<(usize, usize)> = match idx.len() {
                2 => vec![(idx[0], idx[1])],
                4 => {
                    let centre_above = (v[0] + v[1] + v[2] + v[3]) * half * half > level;
                    // pairs isolating corners 1 and 3, or corners 0 and 2
                    let iso13 = vec![(0, 1), (2, 3)];
                    let iso02 = vec![(3, 0), (1, 2)];
                    if above[0] == centre_above {
                        iso13
                    } else {
                        iso02
                    }
                }
                _ => Vec::new(),
            };
            for (a, b) in segments {
                let (ka, kb) = (edges[a].2, edges[b].2);
                adj.entry(ka).or_default().push(kb);
                adj.entry(kb).or_default().push(ka);
            }
        }
    }

    let mut loops = Vec::new();
    let mut seen: HashMap<EdgeKey, bool> = HashMap::new();
    let mut keys: Vec<EdgeKey> = adj.keys().copied().collect();
    keys.sort_unstable();
    for start in keys {
        if seen.contains_key(&start) {
            continue;
        }
        let mut chain = vec![start];
        seen.insert(start, true);
        let mut prev = start;
        let mut cur = adj[&start][0];
        let mut closed = adj[&start].len() == 2;
        loop {
            if cur == start {
                break;
            }
            if seen.contains_key(&cur) {
                closed = false;
                break;
            }
            seen.insert(cur, true);
            chain.push(cur);
            let nb = &adj[&cur];
            if nb.len() != 2 {
                closed = false;
                break;
            }
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        if closed && chain.len() >= 3 {
            loops.push(chain.iter().map(|k| points[k]).collect());
        }
    }
    loops
}

/// The largest closed component of `{W = threshold_rel · max W}`, ordered
/// counterclockwise by polar angle about its centroid.
pub fn extract_level_set<T: Real>(grid: &IndicatorGrid<T>, threshold_rel: T) -> Result<Vec<Point2<T>>> {
    if !(threshold_rel > T::zero()) {
        return Err(Error::InvalidConfig("threshold must be positive".into()));
    }
    if threshold_rel >= T::one() {
        return Err(Error::NoContour);
    }
    let max = grid.max().ok_or(Error::AllMasked)?;
    let loops = marching_squares(grid, threshold_rel * max);
    let mut best = loops
        .into_iter()
        .max_by(|a, b| polygon_area(a).abs().partial_cmp(&polygon_area(b).abs()).unwrap())
        .ok_or(Error::NoContour)?;
    let c = best.iter().fold(Point2::origin(), |acc: Point2<T>, p| acc + p.coords) / from_usize::<T>(best.len());
    best.sort_by(|p, q| {
        let a = (p.y - c.y).atan2(p.x - c.x);
        let b = (q.y - c.y).atan2(q.x - c.x);
        a.partial_cmp(&b).unwrap()
    });
    Ok(best)
}
