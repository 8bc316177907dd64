use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, PointCloud, UnitVec3, Vec3};

/// Indices of the `k` nearest points to `points[i]` (itself included),
/// ordered by distance then index.
fn knn(points: &[Vec3], i: usize, k: usize) -> Vec<usize> {
    let q = points[i];
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(j, p)| ((p - q).norm_squared(), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    d.select_nth_unstable_by(k - 1, cmp);
    d.truncate(k);
    d.sort_by(cmp);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Unoriented PCA normals: the smallest-eigenvalue eigenvector of each
/// point's k-neighborhood covariance.
pub fn pca_normals(points: &[Vec3], k: usize) -> Result<Vec<UnitVec3>> {
    if k < 3 {
        return Err(Error::invalid(format!("normal estimation needs k >= 3, got {k}")));
    }
    if points.len() < k {
        return Err(Error::invalid(format!(
            "normal estimation needs at least k = {k} points, got {}",
            points.len()
        )));
    }
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| {
            let nbrs = knn(points, i, k);
            let mean = nbrs.iter().map(|&j| points[j]).sum::<Vec3>() / k as f64;
            let mut cov = Mat3::zeros();
            for &j in &nbrs {
                let d = points[j] - mean;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let (idx, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            UnitVec3::new_normalize(eig.eigenvectors.column(idx).into_owned())
        })
        .collect())
}

/// PCA normals flipped to face `viewpoint`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, viewpoint: &Vec3) -> Result<PointCloud> {
    let normals = pca_normals(&cloud.points, k)?
        .into_iter()
        .zip(&cloud.points)
        .map(|(n, p)| if n.dot(&(viewpoint - p)) < 0.0 { -n } else { n })
        .collect();
    cloud.clone().with_normals(normals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_cloud_faces_viewpoint() {
        let pts: Vec<Vec3> = (0..100)
            .map(|i| Vec3::new((i % 10) as f64 * 0.1, (i / 10) as f64 * 0.1 + 0.003 * (i % 7) as f64, 0.0))
            .collect();
        let cloud = estimate_normals(&PointCloud::new(pts), 8, &Vec3::new(0.0, 0.0, 1.0)).unwrap();
        for n in cloud.normals.unwrap() {
            assert!((n.into_inner() - Vec3::z()).norm() < 1e-6);
        }
    }

    #[test]
    fn too_few_points() {
        let cloud = PointCloud::new(vec![Vec3::zeros(), Vec3::x()]);
        assert!(estimate_normals(&cloud, 3, &Vec3::z()).is_err());
        assert!(estimate_normals(&cloud, 2, &Vec3::z()).is_err());
    }
}
