use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Greedy farthest point sampling.
///
/// Each step picks the point whose distance to the chosen set is largest,
/// preferring the lowest index on ties.
pub fn farthest_point_sample(points: &[Vec3], m: usize, start_index: usize) -> Result<Vec<usize>> {
    if m > points.len() {
        return Err(Error::invalid(format!(
            "cannot sample {m} points from {}",
            points.len()
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    if start_index >= points.len() {
        return Err(Error::invalid(format!(
            "start index {start_index} out of range for {} points",
            points.len()
        )));
    }
    let mut chosen = Vec::with_capacity(m);
    let mut min_dist = vec![f64::INFINITY; points.len()];
    let mut current = start_index;
    for _ in 0..m {
        chosen.push(current);
        min_dist[current] = f64::NEG_INFINITY;
        let anchor = points[current];
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            if min_dist[i] == f64::NEG_INFINITY {
                continue;
            }
            let d = (p - anchor).norm_squared();
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if min_dist[i] > best_d {
                best_d = min_dist[i];
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        current = best;
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_endpoints() {
        let pts: Vec<Vec3> = (0..=10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert_eq!(farthest_point_sample(&pts, 2, 0).unwrap(), vec![0, 10]);
        assert_eq!(farthest_point_sample(&pts, 3, 0).unwrap(), vec![0, 10, 5]);
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let pts: Vec<Vec3> = (0..9).map(|i| Vec3::new((i % 3) as f64, (i / 3) as f64, 0.0)).collect();
        let mut out = farthest_point_sample(&pts, 9, 4).unwrap();
        assert_eq!(out[0], 4);
        out.sort();
        assert_eq!(out, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn duplicates_never_repeat_an_index() {
        let pts = vec![Vec3::zeros(); 5];
        let out = farthest_point_sample(&pts, 5, 2).unwrap();
        assert_eq!(out, vec![2, 0, 1, 3, 4]);
    }

    #[test]
    fn too_many_requested() {
        let pts = vec![Vec3::zeros(); 3];
        assert!(farthest_point_sample(&pts, 4, 0).is_err());
        assert!(farthest_point_sample(&pts, 2, 3).is_err());
    }
}
