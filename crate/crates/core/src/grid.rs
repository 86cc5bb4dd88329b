//! Radial cell grids over `[0, R]`, cell-centred fields, and the transform
//! to the mass accumulation function `w(s) = ∫₀^{s^{1/n}} ρ^{n−1} u dρ`
//! on the volume-like variable `s = r^n`.
//!
//! Fields are piecewise constant per cell, so `w` is exactly piecewise
//! linear in `s` and its cell slopes reproduce `u/n`.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::params::{sphere_area, Variant};

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    /// Cell widths shrink geometrically towards the origin; each cell is
    /// `ratio` times as wide as its outer neighbour.
    GradedToOrigin { ratio: f64 },
    /// Faces supplied directly (e.g. rebuilt from a snapshot).
    #[serde(skip)]
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub n: u32,
    pub radius: f64,
    pub kind: GridKind,
    /// `N + 1` faces, `faces[0] = 0`, `faces[N] = R`.
    pub faces: Vec<f64>,
    /// `N` cell centres (face midpoints).
    pub centers: Vec<f64>,
    /// `s_j = faces[j]^n`.
    pub s_faces: Vec<f64>,
    /// Face areas without the sphere factor: `faces[j]^{n−1}`.
    pub face_area: Vec<f64>,
    /// `V_i / ω_{n−1} = (s_{i+1} − s_i)/n`.
    pub reduced_volume: Vec<f64>,
    pub omega: f64,
}

impl RadialGrid {
    pub fn build(cells: usize, radius: f64, n: u32, kind: GridKind) -> Result<Self> {
        if cells < MIN_CELLS {
            return domain(format!("grid needs at least {MIN_CELLS} cells, got {cells}"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("radius must be positive, got {radius}"));
        }
        let widths: Vec<f64> = match kind {
            GridKind::Uniform => vec![1.0; cells],
            GridKind::Explicit => return domain("explicit grids are built with from_faces"),
            GridKind::GradedToOrigin { ratio } => {
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return domain(format!("grading ratio must lie in (0, 1], got {ratio}"));
                }
                (0..cells).map(|i| ratio.powi((cells - 1 - i) as i32)).collect()
            }
        };
        let total: f64 = widths.iter().sum();
        let mut faces = Vec::with_capacity(cells + 1);
        faces.push(0.0);
        let mut acc = 0.0;
        for (i, w) in widths.iter().enumerate() {
            acc += w;
            faces.push(if i + 1 == cells { radius } else { radius * acc / total });
        }
        Self::from_faces(n, faces, kind)
    }

    pub fn uniform(cells: usize, radius: f64, n: u32) -> Result<Self> {
        Self::build(cells, radius, n, GridKind::Uniform)
    }

    pub fn from_faces(n: u32, faces: Vec<f64>, kind: GridKind) -> Result<Self> {
        if faces.len() < MIN_CELLS + 1 || faces[0] != 0.0 {
            return domain("faces must start at 0 and bound at least 8 cells");
        }
        if faces.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("faces must be strictly increasing");
        }
        let omega = sphere_area(n)?;
        let radius = *faces.last().unwrap();
        let centers = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let s_faces: Vec<f64> = faces.iter().map(|r| r.powi(n as i32)).collect();
        let face_area = faces.iter().map(|r| r.powi(n as i32 - 1)).collect();
        let reduced_volume = s_faces.windows(2).map(|w| (w[1] - w[0]) / n as f64).collect();
        Ok(RadialGrid {
            n,
            radius,
            kind,
            faces,
            centers,
            s_faces,
            face_area,
            reduced_volume,
            omega,
        })
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn cell_volume(&self, i: usize) -> f64 {
        self.omega * self.reduced_volume[i]
    }

    pub fn total_volume(&self) -> f64 {
        self.omega * self.reduced_volume.iter().sum::<f64>()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.cells()).map(|i| self.width(i)).fold(f64::INFINITY, f64::min)
    }

    /// Index of the face whose `s` value is nearest to `s`.
    pub fn nearest_s_face(&self, s: f64) -> usize {
        let j = self.s_faces.partition_point(|&x| x < s);
        if j == 0 {
            return 0;
        }
        if j >= self.s_faces.len() {
            return self.s_faces.len() - 1;
        }
        if (s - self.s_faces[j - 1]) <= (self.s_faces[j] - s) {
            j - 1
        } else {
            j
        }
    }
}

/// Cell-centred samples of a nonnegative radial function at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.cells() {
            return domain(format!(
                "field has {} values for {} cells",
                values.len(),
                grid.cells()
            ));
        }
        if let Some(i) = values.iter().position(|u| !(u.is_finite() && *u >= 0.0)) {
            return domain(format!("field value {} at cell {i} is not finite and nonnegative", values[i]));
        }
        Ok(RadialField { grid, values, t })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.centers.iter().map(|&r| f(r)).collect();
        Self::new(grid, values, 0.0)
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Result<Self> {
        let values = vec![c; grid.cells()];
        Self::new(grid, values, 0.0)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `∫_Ω u = Σ u_i V_i`.
    pub fn mass(&self) -> f64 {
        mass(&self.grid, &self.values)
    }

    pub fn to_mass_function(&self) -> MassFunction {
        MassFunction {
            grid: Arc::clone(&self.grid),
            w: accumulate(&self.grid, &self.values),
            t: self.t,
        }
    }
}

pub fn mass(grid: &RadialGrid, u: &[f64]) -> f64 {
    grid.omega * u.iter().zip(&grid.reduced_volume).map(|(u, v)| u * v).sum::<f64>()
}

/// Prefix sums `w_{j+1} = w_j + u_j (s_{j+1} − s_j)/n`.
pub fn accumulate(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(u.len() + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for (ui, vi) in u.iter().zip(&grid.reduced_volume) {
        acc += ui * vi;
        w.push(acc);
    }
    w
}

/// `w(s_j, t)` at the `N + 1` faces of the `s`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    pub grid: Arc<RadialGrid>,
    pub w: Vec<f64>,
    pub t: f64,
}

impl MassFunction {
    pub fn s(&self) -> &[f64] {
        &self.grid.s_faces
    }

    /// Cell slope `w_s` (constant per cell).
    pub fn ws(&self, i: usize) -> f64 {
        let s = &self.grid.s_faces;
        (self.w[i + 1] - self.w[i]) / (s[i + 1] - s[i])
    }

    pub fn ws_all(&self) -> Vec<f64> {
        (0..self.grid.cells()).map(|i| self.ws(i)).collect()
    }

    /// Linear interpolation in `s`.
    pub fn eval(&self, s: f64) -> f64 {
        let faces = &self.grid.s_faces;
        if s <= 0.0 {
            return self.w[0];
        }
        let last = faces.len() - 1;
        if s >= faces[last] {
            return self.w[last];
        }
        let j = faces.partition_point(|&x| x <= s) - 1;
        self.w[j] + self.ws(j) * (s - faces[j])
    }

    /// `w(R^n) = mass / ω_{n−1}`.
    pub fn total(&self) -> f64 {
        *self.w.last().unwrap()
    }

    /// Recovers `u_i = n w_s` per cell.
    pub fn to_field(&self) -> Result<RadialField> {
        let n = self.grid.n as f64;
        let values = self.ws_all().into_iter().map(|x| (n * x).max(0.0)).collect();
        RadialField::new(Arc::clone(&self.grid), values, self.t)
    }
}

/// Header of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub n: u32,
    pub radius: f64,
    pub cells: usize,
    pub t: f64,
    pub variant: Variant,
}

/// Writes a CSV snapshot: a header line `n,R,N,t,variant`, its values,
/// then a column line `r,u` (or `r,u,v`) and one row per cell. Floats carry
/// 17 significant digits.
pub fn write_snapshot(
    out: &mut impl Write,
    field: &RadialField,
    variant: Variant,
    signal: Option<&[f64]>,
) -> Result<()> {
    let g = &field.grid;
    writeln!(out, "n,R,N,t,variant")?;
    writeln!(out, "{},{:.16e},{},{:.16e},{}", g.n, g.radius, g.cells(), field.t, variant)?;
    match signal {
        Some(v) => {
            writeln!(out, "r,u,v")?;
            for ((r, u), v) in g.centers.iter().zip(&field.values).zip(v) {
                writeln!(out, "{r:.16e},{u:.16e},{v:.16e}")?;
            }
        }
        None => {
            writeln!(out, "r,u")?;
            for (r, u) in g.centers.iter().zip(&field.values) {
                writeln!(out, "{r:.16e},{u:.16e}")?;
            }
        }
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]. The grid faces are
/// rebuilt from the centres (`r_{1/2} = 0`, centres are face midpoints).
pub fn read_snapshot(input: impl BufRead) -> Result<(SnapshotHeader, RadialField)> {
    let bad = |msg: &str| Error::Config(format!("snapshot: {msg}"));
    let mut lines = input.lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| bad("truncated file"))?.map_err(Error::from)
    };
    if next()?.trim() != "n,R,N,t,variant" {
        return Err(bad("unexpected header"));
    }
    let line = next()?;
    let cols: Vec<&str> = line.trim().split(',').collect();
    if cols.len() != 5 {
        return Err(bad("header needs five values"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
    let header = SnapshotHeader {
        n: cols[0].parse().map_err(|_| bad("bad n"))?,
        radius: num(cols[1])?,
        cells: cols[2].parse().map_err(|_| bad("bad N"))?,
        t: num(cols[3])?,
        variant: cols[4].parse()?,
    };
    next()?;
    let mut centers = Vec::with_capacity(header.cells);
    let mut values = Vec::with_capacity(header.cells);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        centers.push(num(it.next().ok_or_else(|| bad("missing r"))?)?);
        values.push(num(it.next().ok_or_else(|| bad("missing u"))?)?);
    }
    if centers.len() != header.cells {
        return Err(bad("row count does not match N"));
    }
    let mut faces = Vec::with_capacity(header.cells + 1);
    faces.push(0.0);
    for (i, c) in centers.iter().enumerate() {
        let f = 2.0 * c - faces[i];
        faces.push(if i + 1 == header.cells { header.radius } else { f });
    }
    let grid = RadialGrid::from_faces(header.n, faces, GridKind::Explicit)?;
    let field = RadialField::new(Arc::new(grid), values, header.t)?;
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(cells: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(cells, 1.0, 3).unwrap())
    }

    #[test]
    fn uniform_faces() {
        let g = RadialGrid::uniform(8, 1.0, 3).unwrap();
        for (i, f) in g.faces.iter().enumerate() {
            assert_relative_eq!(*f, i as f64 / 8.0, epsilon = 1e-15);
        }
        assert!(RadialGrid::uniform(7, 1.0, 3).is_err());
    }

    #[test]
    fn volumes_sum_to_ball() {
        let g = RadialGrid::uniform(128, 1.0, 3).unwrap();
        assert_relative_eq!(g.total_volume(), 4.0 * PI / 3.0, max_relative = 1e-12);
        let g = RadialGrid::build(200, 2.0, 5, GridKind::GradedToOrigin { ratio: 0.97 }).unwrap();
        assert_relative_eq!(g.total_volume(), g.omega * 32.0 / 5.0, max_relative = 1e-12);
    }

    #[test]
    fn graded_grid_clusters_at_origin() {
        let g = RadialGrid::build(64, 1.0, 3, GridKind::GradedToOrigin { ratio: 0.9 }).unwrap();
        let widths: Vec<f64> = (0..64).map(|i| g.width(i)).collect();
        assert!(widths.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.min_width(), widths[0]);
        assert_eq!(*g.faces.last().unwrap(), 1.0);
        assert!(RadialGrid::build(64, 1.0, 3, GridKind::GradedToOrigin { ratio: 1.5 }).is_err());
    }

    #[test]
    fn constant_field_transform() {
        let g = grid(64);
        let c = 2.5;
        let w = RadialField::constant(g.clone(), c).unwrap().to_mass_function();
        for (wj, sj) in w.w.iter().zip(&g.s_faces) {
            assert_relative_eq!(*wj, c * sj / 3.0, max_relative = 1e-13, epsilon = 1e-300);
        }
        let zero = RadialField::constant(g, 0.0).unwrap().to_mass_function();
        assert!(zero.w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn indicator_transform() {
        let g = grid(64);
        let u = RadialField::from_fn(g.clone(), |r| if r < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let w = u.to_mass_function();
        for (wj, sj) in w.w.iter().zip(&g.s_faces) {
            assert_relative_eq!(*wj, sj.min(0.125) / 3.0, max_relative = 1e-13, epsilon = 1e-300);
        }
        assert_relative_eq!(w.total() * g.omega, u.mass(), max_relative = 1e-12);
    }

    #[test]
    fn mass_examples() {
        let g = grid(256);
        assert_relative_eq!(RadialField::constant(g.clone(), 1.0).unwrap().mass(), 4.0 * PI / 3.0, max_relative = 1e-12);
        assert_eq!(RadialField::constant(g.clone(), 0.0).unwrap().mass(), 0.0);
        let lin = RadialField::from_fn(g, |r| r).unwrap();
        assert_relative_eq!(lin.mass(), PI, max_relative = 1e-3);
    }

    #[test]
    fn slopes_reproduce_field() {
        let g = Arc::new(RadialGrid::build(100, 1.3, 4, GridKind::GradedToOrigin { ratio: 0.95 }).unwrap());
        let u = RadialField::from_fn(g, |r| (1.0 + r * r).recip() + (7.0 * r).sin().abs()).unwrap();
        let back = u.to_mass_function().to_field().unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_negative_values() {
        assert!(RadialField::new(grid(8), vec![-1.0; 8], 0.0).is_err());
        assert!(RadialField::new(grid(8), vec![1.0; 7], 0.0).is_err());
    }

    #[test]
    fn interpolation_and_nearest_face() {
        let g = grid(16);
        let w = RadialField::constant(g.clone(), 3.0).unwrap().to_mass_function();
        assert_relative_eq!(w.eval(0.3), 0.3, max_relative = 1e-13);
        let j = g.nearest_s_face(0.126);
        assert_relative_eq!(g.s_faces[j], 0.125, max_relative = 1e-14);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Arc::new(RadialGrid::build(32, 1.0, 3, GridKind::GradedToOrigin { ratio: 0.9 }).unwrap());
        let mut u = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
        u.t = 0.125;
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &u, Variant::PE, None).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,R,N,t,variant\n3,"));
        let (header, back) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(header.variant, Variant::PE);
        assert_eq!(header.cells, 32);
        assert_eq!(back.values, u.values);
        assert_eq!(back.t, 0.125);
        for (a, b) in back.grid.faces.iter().zip(&u.grid.faces) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn transform_is_linear_and_monotone(
                a in proptest::collection::vec(0.0f64..10.0, 16),
                b in proptest::collection::vec(0.0f64..10.0, 16),
                c in 0.0f64..5.0,
            ) {
                let g = Arc::new(RadialGrid::uniform(16, 1.0, 3).unwrap());
                let wa = accumulate(&g, &a);
                let wb = accumulate(&g, &b);
                let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
                let ws = accumulate(&g, &sum);
                for j in 0..=16 {
                    prop_assert!((ws[j] - (wa[j] + c * wb[j])).abs() <= 1e-12 * (1.0 + ws[j].abs()));
                }
                let upper: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                let wu = accumulate(&g, &upper);
                prop_assert!(wa.iter().zip(&wu).all(|(x, y)| x <= y));
                prop_assert!(wa.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
