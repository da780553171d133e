//! Families of open polyhedral regions and exact counts along lines.
//!
//! Both the active regions of a polytope (in the space of the point `y`) and
//! the critical strata of a face cone (in normal coordinates) are finite
//! intersections of open halfspaces. Along a line each region is an open
//! interval, so the number of regions containing `a + t d` is a step function
//! of `t` that is computed exactly by sorting interval endpoints.

use crate::geometry::{FaceId, HalfSpace, Polytope};
use crate::linalg::Point;
use crate::normals::active_region;

#[derive(Clone, Debug)]
pub struct RegionSystem {
    dim: usize,
    /// Flattened unit normals, `dim` entries per row.
    normals: Vec<f64>,
    offsets: Vec<f64>,
    domain: std::ops::Range<usize>,
    regions: Vec<std::ops::Range<usize>>,
    /// What each region stands for (a face of the polytope).
    pub labels: Vec<FaceId>,
}

/// The longest stretch of a line carrying the largest count.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBest {
    pub count: usize,
    /// Midpoint parameter of the stretch.
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
}

impl LineBest {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl RegionSystem {
    pub fn new(dim: usize, domain: &[HalfSpace], regions: &[Vec<HalfSpace>], labels: Vec<FaceId>) -> Self {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        let mut push = |h: &HalfSpace| {
            let n = h.normal.norm();
            normals.extend(h.normal.iter().map(|x| x / n));
            offsets.push(h.offset / n);
        };
        domain.iter().for_each(&mut push);
        let domain_range = 0..domain.len();
        let mut ranges = Vec::with_capacity(regions.len());
        let mut start = domain.len();
        for r in regions {
            r.iter().for_each(&mut push);
            ranges.push(start..start + r.len());
            start += r.len();
        }
        RegionSystem {
            dim,
            normals,
            offsets,
            domain: domain_range,
            regions: ranges,
            labels,
        }
    }

    /// Active regions of every face, over the interior of the polytope.
    pub fn for_polytope(p: &Polytope) -> Self {
        let regions: Vec<Vec<HalfSpace>> = p.faces().iter().map(|f| active_region(p, f.id).halfspaces()).collect();
        let labels = p.faces().iter().map(|f| f.id).collect();
        Self::new(p.dim(), p.facets(), &regions, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Rows of region `i` as halfspaces.
    pub fn region(&self, i: usize) -> Vec<HalfSpace> {
        self.regions[i].clone().map(|r| self.row(r)).collect()
    }

    pub fn domain(&self) -> Vec<HalfSpace> {
        self.domain.clone().map(|r| self.row(r)).collect()
    }

    fn row(&self, r: usize) -> HalfSpace {
        HalfSpace {
            normal: Point::from_column_slice(&self.normals[r * self.dim..(r + 1) * self.dim]),
            offset: self.offsets[r],
        }
    }

    #[inline]
    fn slack(&self, r: usize, x: &[f64]) -> f64 {
        let n = &self.normals[r * self.dim..(r + 1) * self.dim];
        self.offsets[r] - n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    fn min_slack(&self, range: std::ops::Range<usize>, x: &[f64]) -> f64 {
        range.map(|r| self.slack(r, x)).fold(f64::INFINITY, f64::min)
    }

    pub fn domain_margin(&self, x: &Point) -> f64 {
        self.min_slack(self.domain.clone(), x.as_slice())
    }

    /// Signed membership margin of `x` in region `i`.
    pub fn region_margin(&self, i: usize, x: &Point) -> f64 {
        self.min_slack(self.regions[i].clone(), x.as_slice())
    }

    /// Regions strictly containing `x`.
    pub fn members(&self, x: &Point) -> Vec<usize> {
        (0..self.regions.len())
            .filter(|&i| self.region_margin(i, x) > 0.0)
            .collect()
    }

    pub fn count(&self, x: &Point) -> usize {
        let xs = x.as_slice();
        self.regions
            .iter()
            .filter(|r| self.min_slack((*r).clone(), xs) > 0.0)
            .count()
    }

    /// Best stretch of the line `a + t d` inside the domain (and inside
    /// `|t| <= t_cap`), or `None` if the line misses the domain.
    pub fn line_profile(&self, a: &Point, d: &Point, t_cap: f64) -> Option<LineBest> {
        let (a, d) = (a.as_slice(), d.as_slice());
        let interval = |range: std::ops::Range<usize>, lo0: f64, hi0: f64| -> Option<(f64, f64)> {
            let (mut lo, mut hi) = (lo0, hi0);
            for r in range {
                let n = &self.normals[r * self.dim..(r + 1) * self.dim];
                let s0 = self.offsets[r] - n.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
                let rate: f64 = n.iter().zip(d).map(|(x, y)| x * y).sum();
                // s0 - t * rate > 0
                if rate > 0.0 {
                    hi = hi.min(s0 / rate);
                } else if rate < 0.0 {
                    lo = lo.max(s0 / rate);
                } else if s0 <= 0.0 {
                    return None;
                }
                if lo >= hi {
                    return None;
                }
            }
            Some((lo, hi))
        };
        let (lo, hi) = interval(self.domain.clone(), -t_cap, t_cap)?;
        let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * self.regions.len());
        for r in &self.regions {
            if let Some((l, h)) = interval(r.clone(), lo, hi) {
                events.push((l, 1));
                events.push((h, -1));
            }
        }
        // ends before starts at equal parameters: the intervals are open
        events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut best = LineBest {
            count: 0,
            t: 0.5 * (lo + hi),
            lo,
            hi,
        };
        let mut count: i64 = 0;
        let mut prev = lo;
        let mut found = false;
        for (t, delta) in events {
            if t > prev && count >= 0 {
                let c = count as usize;
                if !found || c > best.count || (c == best.count && t - prev > best.width()) {
                    best = LineBest {
                        count: c,
                        t: 0.5 * (prev + t),
                        lo: prev,
                        hi: t,
                    };
                    found = true;
                }
            }
            count += delta as i64;
            prev = prev.max(t);
        }
        if hi > prev && (!found || count as usize > best.count) {
            best = LineBest {
                count: count.max(0) as usize,
                t: 0.5 * (prev + hi),
                lo: prev,
                hi,
            };
        }
        Some(best)
    }
}
