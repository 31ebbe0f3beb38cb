//! Boolean rasters of planar sets: polygon fills, painted point clouds,
//! topological boundaries, and connected components of the complement.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    lo: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    mask: Vec<bool>,
}

/// A 4-connected component of unset cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub cells: usize,
    pub touches_edge: bool,
    pub centroid: Complex64,
    /// Member cell whose centre is nearest the centroid.
    pub representative: Complex64,
}

impl Raster {
    /// Square cells of side `cell` covering the box `[lo, hi]`.
    pub fn new(lo: Complex64, hi: Complex64, cell: f64) -> Self {
        let nx = (((hi.re - lo.re) / cell).ceil() as usize).max(1);
        let ny = (((hi.im - lo.im) / cell).ceil() as usize).max(1);
        Self {
            lo,
            cell,
            nx,
            ny,
            mask: vec![false; nx * ny],
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx + i]
    }

    pub fn set_all(&mut self, value: bool) {
        self.mask.iter_mut().for_each(|m| *m = value);
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        self.lo + Complex64::new((i as f64 + 0.5) * self.cell, (j as f64 + 0.5) * self.cell)
    }

    pub fn locate(&self, z: Complex64) -> Option<(usize, usize)> {
        let x = ((z.re - self.lo.re) / self.cell).floor();
        let y = ((z.im - self.lo.im) / self.cell).floor();
        if x < 0.0 || y < 0.0 || x >= self.nx as f64 || y >= self.ny as f64 {
            return None;
        }
        Some((x as usize, y as usize))
    }

    pub fn paint(&mut self, z: Complex64) {
        if let Some((i, j)) = self.locate(z) {
            self.mask[j * self.nx + i] = true;
        }
    }

    /// Paints the segment `[a, b]` densely enough to leave no gaps.
    pub fn paint_segment(&mut self, a: Complex64, b: Complex64) {
        let steps = ((b - a).norm() / (0.5 * self.cell)).ceil().max(1.0) as usize;
        for s in 0..=steps {
            self.paint(a + (b - a) * (s as f64 / steps as f64));
        }
    }

    /// Mask of cell centres inside a closed polygon (even-odd scanline rule).
    pub fn polygon_mask(&self, polygon: &[Complex64]) -> Vec<bool> {
        let mut out = vec![false; self.nx * self.ny];
        let n = polygon.len();
        let mut xs = Vec::new();
        for j in 0..self.ny {
            let y = self.lo.im + (j as f64 + 0.5) * self.cell;
            xs.clear();
            for k in 0..n {
                let (a, b) = (polygon[k], polygon[(k + 1) % n]);
                if (a.im <= y) != (b.im <= y) {
                    xs.push(a.re + (y - a.im) / (b.im - a.im) * (b.re - a.re));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                if pair.len() < 2 {
                    break;
                }
                let i0 = ((pair[0] - self.lo.re) / self.cell - 0.5).ceil().max(0.0) as usize;
                let i1 = ((pair[1] - self.lo.re) / self.cell - 0.5).floor();
                if i1 < 0.0 {
                    continue;
                }
                let i1 = (i1 as usize).min(self.nx - 1);
                for i in i0..=i1 {
                    out[j * self.nx + i] = true;
                }
            }
        }
        out
    }

    pub fn fill_polygon(&mut self, polygon: &[Complex64]) {
        let m = self.polygon_mask(polygon);
        for (a, b) in self.mask.iter_mut().zip(m) {
            *a |= b;
        }
    }

    pub fn intersect(&mut self, other: &[bool]) {
        for (a, b) in self.mask.iter_mut().zip(other) {
            *a &= *b;
        }
    }

    /// Centres of set cells.
    pub fn set_cells(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.get(i, j) {
                    out.push(self.center(i, j));
                }
            }
        }
        out
    }

    /// Whether cell `(i, j)` is set and has an unset (or missing) 8-neighbour.
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        if !self.get(i, j) {
            return false;
        }
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
                    return true;
                }
                if !self.get(ii as usize, jj as usize) {
                    return true;
                }
            }
        }
        false
    }

    pub fn boundary_cells(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.is_boundary(i, j) {
                    out.push(self.center(i, j));
                }
            }
        }
        out
    }

    /// Whether some boundary cell centre lies within `dist` of `z`.
    pub fn near_boundary(&self, z: Complex64, dist: f64) -> bool {
        let reach = (dist / self.cell).ceil() as i64 + 1;
        let ci = ((z.re - self.lo.re) / self.cell).floor() as i64;
        let cj = ((z.im - self.lo.im) / self.cell).floor() as i64;
        for j in (cj - reach).max(0)..=(cj + reach).min(self.ny as i64 - 1) {
            for i in (ci - reach).max(0)..=(ci + reach).min(self.nx as i64 - 1) {
                let (i, j) = (i as usize, j as usize);
                if self.is_boundary(i, j) && (self.center(i, j) - z).norm() <= dist {
                    return true;
                }
            }
        }
        false
    }

    /// 4-connected components of the unset cells.
    pub fn complement_components(&self) -> Vec<Component> {
        let mut label = vec![usize::MAX; self.nx * self.ny];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.mask.len() {
            if self.mask[start] || label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = Vec::new();
            let mut touches_edge = false;
            label[start] = id;
            stack.push(start);
            while let Some(k) = stack.pop() {
                members.push(k);
                let (i, j) = (k % self.nx, k / self.nx);
                if i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1 {
                    touches_edge = true;
                }
                let mut visit = |kk: usize| {
                    if !self.mask[kk] && label[kk] == usize::MAX {
                        label[kk] = id;
                        stack.push(kk);
                    }
                };
                if i > 0 {
                    visit(k - 1);
                }
                if i + 1 < self.nx {
                    visit(k + 1);
                }
                if j > 0 {
                    visit(k - self.nx);
                }
                if j + 1 < self.ny {
                    visit(k + self.nx);
                }
            }
            let centers: Vec<Complex64> = members.iter().map(|k| self.center(k % self.nx, k / self.nx)).collect();
            let centroid = centers.iter().sum::<Complex64>() / centers.len() as f64;
            let representative = nearest(&centers, centroid).unwrap_or(centroid);
            out.push(Component {
                cells: members.len(),
                touches_edge,
                centroid,
                representative,
            });
        }
        out
    }
}

/// Point of `points` nearest to `target`.
pub fn nearest(points: &[Complex64], target: Complex64) -> Option<Complex64> {
    points
        .iter()
        .copied()
        .min_by(|a, b| (a - target).norm_sqr().total_cmp(&(b - target).norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disc_fill_area() {
        let mut r = Raster::new(Complex64::new(-2.0, -2.0), Complex64::new(2.0, 2.0), 0.01);
        let poly: Vec<Complex64> = (0..512).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 512.0)).collect();
        r.fill_polygon(&poly);
        let area = r.count() as f64 * 1e-4;
        assert!((area - PI).abs() < 0.01, "{area}");
    }

    #[test]
    fn annulus_complement_has_a_hole() {
        let mut r = Raster::new(Complex64::new(-4.0, -4.0), Complex64::new(4.0, 4.0), 0.05);
        for k in 0..400 {
            let angle = 2.0 * PI * k as f64 / 400.0;
            r.paint_segment(Complex64::from_polar(1.0, angle), Complex64::from_polar(3.0, angle));
            for m in 0..40 {
                let rad = 1.0 + 2.0 * m as f64 / 39.0;
                let next = 2.0 * PI * (k + 1) as f64 / 400.0;
                r.paint_segment(Complex64::from_polar(rad, angle), Complex64::from_polar(rad, next));
            }
        }
        let comps = r.complement_components();
        let bounded: Vec<_> = comps.iter().filter(|c| !c.touches_edge).collect();
        assert_eq!(bounded.len(), 1);
        assert!(bounded[0].centroid.norm() < 0.05);
    }
}
