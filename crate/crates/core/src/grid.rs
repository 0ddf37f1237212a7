//! Search grids over the disk-shaped domain `Ω`.

use serde::Serialize;

use crate::error::{DsmError, Result};
use crate::geometry::Point2;

/// Lattice points `(i·step, j·step)` with `|r| ≤ radius`.
///
/// Points are ordered row-major over the bounding square, top row
/// (largest `y`) first and `x` increasing within a row, which is also
/// raster order for image output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGrid {
    pub radius: f64,
    pub step: f64,
    /// Lattice half-width `n`; the bounding square spans `[-n, n]²`.
    pub half_width: i32,
    pub points: Vec<Point2>,
    /// Integer lattice coordinates `(i, j)` of each point.
    pub lattice: Vec<(i32, i32)>,
}

pub fn build_disk_grid(radius: f64, step: f64) -> Result<DiskGrid> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DsmError::Config(format!("grid step must be positive, got {step}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DsmError::Config(format!("grid radius must be positive, got {radius}")));
    }
    if step > radius {
        return Err(DsmError::Config(format!("grid step {step} exceeds the radius {radius}")));
    }
    // Compare in lattice units so points lying exactly on the circle survive rounding.
    let reach = radius / step;
    let reach_sq = reach * reach * (1.0 + 1e-12);
    let half_width = (reach * (1.0 + 1e-12)).floor() as i32;

    let mut points = Vec::new();
    let mut lattice = Vec::new();
    for j in (-half_width..=half_width).rev() {
        for i in -half_width..=half_width {
            if ((i * i + j * j) as f64) <= reach_sq {
                let p = Point2::new(i as f64 * step, j as f64 * step);
                if p.norm() <= radius * (1.0 + 1e-15) {
                    points.push(p);
                    lattice.push((i, j));
                }
            }
        }
    }
    Ok(DiskGrid { radius, step, half_width, points, lattice })
}

impl DiskGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Side length of the bounding-square raster.
    pub fn raster_width(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    /// Raster cell `(row, col)` of a grid point, row 0 at the top.
    pub fn raster_cell(&self, index: usize) -> (usize, usize) {
        let (i, j) = self.lattice[index];
        ((self.half_width - j) as usize, (i + self.half_width) as usize)
    }

    /// Dense raster of grid indices, `None` outside the disk.
    pub fn raster_index(&self) -> Vec<Option<usize>> {
        let w = self.raster_width();
        let mut table = vec![None; w * w];
        for idx in 0..self.len() {
            let (row, col) = self.raster_cell(idx);
            table[row * w + col] = Some(idx);
        }
        table
    }

    /// Index of the grid point closest to `p`.
    pub fn nearest(&self, p: Point2) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(p).total_cmp(&b.1.distance(p)))
            .map(|(i, _)| i)
    }
}
