//! Feature-vector to image conversion: near-square row-major reshape with zero
//! padding, followed by corner-aligned bilinear resampling.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tabular::Dataset;

pub const DEFAULT_IMAGE_SIZE: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridPlan {
    pub rows: usize,
    pub cols: usize,
    pub pad: usize,
}

/// Dense row-major 2D grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "grid {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Grid { rows, cols, data })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// A single-channel square image built from one dataset row.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureImage {
    pub size: usize,
    pub pixels: Vec<f64>,
    pub source_index: usize,
}

impl FeatureImage {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.size + c]
    }

    /// Plain-text PGM (P2), pixels scaled by `round(p * 255)`.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n255\n", self.size, self.size);
        for row in self.pixels.chunks(self.size) {
            let line: Vec<String> = row
                .iter()
                .map(|p| ((p * 255.0).round() as i64).clamp(0, 255).to_string())
                .collect();
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
        s
    }
}

fn ceil_sqrt(d: usize) -> usize {
    let mut c = (d as f64).sqrt() as usize;
    while c * c < d {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) >= d {
        c -= 1;
    }
    c
}

pub fn plan_grid(d: usize) -> Result<GridPlan> {
    if d == 0 {
        return Err(Error::invalid("cannot plan a grid for zero features"));
    }
    let cols = ceil_sqrt(d);
    let rows = d.div_ceil(cols);
    Ok(GridPlan {
        rows,
        cols,
        pad: rows * cols - d,
    })
}

/// Row-major fill; the trailing `pad` cells are zero.
pub fn vector_to_grid(v: &[f64], plan: GridPlan) -> Result<Grid> {
    let d = plan.rows * plan.cols - plan.pad;
    if v.len() != d {
        return Err(Error::invalid(format!(
            "vector length {} does not match plan for {d} features",
            v.len()
        )));
    }
    let mut data = v.to_vec();
    data.resize(plan.rows * plan.cols, 0.0);
    Grid::new(plan.rows, plan.cols, data)
}

fn sample_coords(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|i| {
            let x = if dst == 1 || src == 1 {
                0.0
            } else {
                i as f64 * (src - 1) as f64 / (dst - 1) as f64
            };
            let x0 = (x.floor() as usize).min(src - 1);
            let x1 = (x0 + 1).min(src - 1);
            (x0, x1, x - x0 as f64)
        })
        .collect()
}

// a + (b - a) t is exact whenever a == b, so constant regions stay constant
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Corner-aligned bilinear resize: output pixel `(i, j)` samples input
/// coordinate `(i (r-1)/(h-1), j (c-1)/(w-1))`. Outputs are clamped to [0, 1].
pub fn resize_bilinear(grid: &Grid, height: usize, width: usize) -> Result<Grid> {
    if grid.rows == 0 || grid.cols == 0 || height == 0 || width == 0 {
        return Err(Error::invalid("resize requires non-empty grids"));
    }
    let ys = sample_coords(grid.rows, height);
    let xs = sample_coords(grid.cols, width);
    let mut data = Vec::with_capacity(height * width);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let top = lerp(grid.get(y0, x0), grid.get(y0, x1), fx);
            let bottom = lerp(grid.get(y1, x0), grid.get(y1, x1), fx);
            data.push(lerp(top, bottom, fy).clamp(0.0, 1.0));
        }
    }
    Grid::new(height, width, data)
}

pub fn vector_to_image(v: &[f64], size: usize, source_index: usize) -> Result<FeatureImage> {
    let plan = plan_grid(v.len())?;
    let grid = vector_to_grid(v, plan)?;
    let resized = resize_bilinear(&grid, size, size)?;
    Ok(FeatureImage {
        size,
        pixels: resized.data,
        source_index,
    })
}

/// Converts every row of a preprocessed (all-numeric) dataset to an image.
pub fn convert_dataset(ds: &Dataset, size: usize) -> Result<Vec<FeatureImage>> {
    ds.numeric_rows()?
        .iter()
        .enumerate()
        .map(|(i, row)| vector_to_image(row, size, i))
        .collect()
}
