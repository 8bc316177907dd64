use super::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let min = self.min.sup(&other.min);
        let max = self.max.inf(&other.max);
        (min.x <= max.x && min.y <= max.y && min.z <= max.z).then_some(Aabb { min, max })
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && self.max.x >= other.min.x
            && self.min.y <= other.max.y
            && self.max.y >= other.min.y
            && self.min.z <= other.max.z
            && self.max.z >= other.min.z
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x.max(0.0) * e.y.max(0.0) * e.z.max(0.0)
    }

    /// Slab test; returns the parametric entry distance if the ray meets the
    /// box within `[0, t_max]`.
    pub fn ray_entry(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0_f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let inv = inv_dir[a];
            let mut near = (self.min[a] - origin[a]) * inv;
            let mut far = (self.max[a] - origin[a]) * inv;
            // 0 * inf yields NaN for origins on a slab plane; treat as inside.
            if near.is_nan() {
                near = f64::NEG_INFINITY;
            }
            if far.is_nan() {
                far = f64::INFINITY;
            }
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    // Leaf: `count > 0`, items in `order[first..first + count]`.
    // Inner: children at `first` and `first + 1`.
    first: u32,
    count: u32,
}

/// Median-split bounding volume hierarchy over a fixed set of primitive boxes.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    prims: Vec<Aabb>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(bounds: &[Aabb]) -> Self {
        let mut order: Vec<u32> = (0..bounds.len() as u32).collect();
        let centroids: Vec<Vec3> = bounds.iter().map(|b| (b.min + b.max) * 0.5).collect();
        let mut nodes = vec![Node {
            bounds: Aabb::empty(),
            first: 0,
            count: 0,
        }];
        if bounds.is_empty() {
            return Self {
                nodes,
                order,
                prims: Vec::new(),
            };
        }
        let mut stack = vec![(0usize, 0usize, bounds.len())];
        while let Some((node, lo, hi)) = stack.pop() {
            let items = &mut order[lo..hi];
            let bb = items
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.union(&bounds[i as usize]));
            nodes[node].bounds = bb;
            if items.len() <= LEAF_SIZE {
                nodes[node].first = lo as u32;
                nodes[node].count = items.len() as u32;
                continue;
            }
            let cb = Aabb::from_points(items.iter().map(|&i| &centroids[i as usize]));
            let ext = cb.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = items.len() / 2;
            items.select_nth_unstable_by(mid, |&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node {
                bounds: Aabb::empty(),
                first: 0,
                count: 0,
            });
            nodes.push(Node {
                bounds: Aabb::empty(),
                first: 0,
                count: 0,
            });
            nodes[node].first = left as u32;
            nodes[node].count = 0;
            stack.push((left, lo, lo + mid));
            stack.push((left + 1, lo + mid, hi));
        }
        Self {
            nodes,
            order,
            prims: bounds.to_vec(),
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Visits every primitive whose box the ray segment `[0, t_max]` touches.
    /// The visitor may shrink the search range by returning a new `t_max`.
    pub fn traverse_ray(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        mut t_max: f64,
        mut visit: impl FnMut(usize) -> f64,
    ) {
        if self.order.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bounds.ray_entry(origin, &inv, t_max).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.first as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    if self.prims[prim as usize]
                        .ray_entry(origin, &inv, t_max)
                        .is_some()
                    {
                        t_max = t_max.min(visit(prim as usize));
                    }
                }
            } else {
                stack.push(node.first + 1);
                stack.push(node.first);
            }
        }
    }

    /// Visits every primitive whose box overlaps `query`; stops early when the
    /// visitor returns `false`.
    pub fn traverse_aabb(&self, query: &Aabb, mut visit: impl FnMut(usize) -> bool) {
        if self.order.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.bounds.overlaps(query) {
                continue;
            }
            if node.count > 0 {
                let s = node.first as usize;
                for &prim in &self.order[s..s + node.count as usize] {
                    if self.prims[prim as usize].overlaps(query) && !visit(prim as usize) {
                        return;
                    }
                }
            } else {
                stack.push(node.first + 1);
                stack.push(node.first);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_boxes(n: usize) -> Vec<Aabb> {
        (0..n)
            .map(|i| {
                let c = Vec3::new(i as f64, (i % 3) as f64, (i % 5) as f64);
                Aabb {
                    min: c,
                    max: c + Vec3::repeat(0.5),
                }
            })
            .collect()
    }

    #[test]
    fn aabb_query_matches_linear_scan() {
        let boxes = unit_boxes(57);
        let bvh = Bvh::build(&boxes);
        let q = Aabb {
            min: Vec3::new(10.2, 0.0, 0.0),
            max: Vec3::new(20.7, 1.2, 2.2),
        };
        let mut got = Vec::new();
        bvh.traverse_aabb(&q, |i| {
            got.push(i);
            true
        });
        got.sort();
        let want: Vec<usize> = (0..boxes.len()).filter(|&i| boxes[i].overlaps(&q)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn ray_visits_every_box_it_crosses() {
        let boxes = unit_boxes(40);
        let bvh = Bvh::build(&boxes);
        let origin = Vec3::new(-1.0, 0.25, 0.25);
        let dir = Vec3::new(1.0, 0.0, 0.0);
        let mut got = Vec::new();
        bvh.traverse_ray(&origin, &dir, f64::INFINITY, |i| {
            got.push(i);
            f64::INFINITY
        });
        got.sort();
        let inv = Vec3::new(1.0, f64::INFINITY, f64::INFINITY);
        let want: Vec<usize> = (0..boxes.len())
            .filter(|&i| boxes[i].ray_entry(&origin, &inv, f64::INFINITY).is_some())
            .collect();
        assert_eq!(got, want);
        assert!(!want.is_empty());
    }
}
