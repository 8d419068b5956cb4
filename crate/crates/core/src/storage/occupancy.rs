//! Counting occupancy grid over the global GX/GY plane and its file format.
//!
//! Binary layout (all little-endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `LRFM`                            |
//! | 4     | format version (u32, currently 1)       |
//! | 24    | origin gx, gy, gz (f64)                 |
//! | 8     | resolution (f64, meters per cell)       |
//! | 8     | extent (f64, meters)                    |
//! | 4 + 4 | cols, rows (u32)                        |
//! | 8     | out-of-grid drop count (u64)            |
//! | 8 * n | per cell: hits (u32), misses (u32)      |
//!
//! Cells are row-major: `index = row * cols + col`, `col` along GX and `row`
//! along GY, starting at the origin corner. A JSON sidecar next to the binary
//! repeats the header fields.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StorageError;
use crate::lrf::ScanSample;
use crate::GlobalPoint;

pub const MAP_MAGIC: [u8; 4] = *b"LRFM";
pub const MAP_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 24 + 8 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellCounts {
    pub hits: u32,
    pub misses: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellCounts {
    /// Occupied: at least two hits and more hits than misses.
    /// Free: at least five misses and no hit. Otherwise unknown.
    pub fn state(&self) -> CellState {
        if self.hits >= 2 && self.hits > self.misses {
            CellState::Occupied
        } else if self.misses >= 5 && self.hits == 0 {
            CellState::Free
        } else {
            CellState::Unknown
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSummary {
    pub col: usize,
    pub row: usize,
    pub center: GlobalPoint,
    pub counts: CellCounts,
    pub state: CellState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    /// Corner of cell (0, 0).
    pub origin: GlobalPoint,
    pub resolution: f64,
    pub extent: f64,
    cols: usize,
    rows: usize,
    cells: Vec<CellCounts>,
    /// Hits dropped because they fell outside the grid.
    pub out_of_grid: u64,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    magic: String,
    version: u32,
    origin: GlobalPoint,
    resolution: f64,
    extent: f64,
    cols: usize,
    rows: usize,
    out_of_grid: u64,
    cell_layout: String,
}

impl OccupancyMap {
    /// Square grid of side `extent` with its corner at `origin`.
    pub fn new(origin: GlobalPoint, resolution: f64, extent: f64) -> Self {
        let n = (extent / resolution - 1e-9).ceil().max(1.0) as usize;
        Self {
            origin,
            resolution,
            extent,
            cols: n,
            rows: n,
            cells: vec![CellCounts::default(); n * n],
            out_of_grid: 0,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cells(&self) -> &[CellCounts] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [CellCounts] {
        &mut self.cells
    }

    fn in_grid(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.cols && (row as usize) < self.rows
    }

    pub fn cell(&self, col: usize, row: usize) -> CellCounts {
        self.cells[row * self.cols + col]
    }

    fn bump(&mut self, col: i64, row: i64, hit: bool) {
        if self.in_grid(col, row) {
            let c = &mut self.cells[row as usize * self.cols + col as usize];
            if hit {
                c.hits = c.hits.saturating_add(1);
            } else {
                c.misses = c.misses.saturating_add(1);
            }
        }
    }

    /// Continuous cell coordinates of a global point.
    fn grid_coords(&self, g: &GlobalPoint) -> (f64, f64) {
        ((g.gx - self.origin.gx) / self.resolution, (g.gy - self.origin.gy) / self.resolution)
    }

    pub fn cell_of(&self, g: &GlobalPoint) -> Option<(usize, usize)> {
        let (x, y) = self.grid_coords(g);
        let (c, r) = (x.floor() as i64, y.floor() as i64);
        self.in_grid(c, r).then_some((c as usize, r as usize))
    }

    /// Cells the segment passes through, in order from `from` to `to`
    /// (may include cells outside the grid).
    pub fn traverse(&self, from: &GlobalPoint, to: &GlobalPoint) -> Vec<(i64, i64)> {
        let (x0, y0) = self.grid_coords(from);
        let (x1, y1) = self.grid_coords(to);
        grid_line(x0, y0, x1, y1)
    }

    /// Traversed cells gain a miss, the terminal cell of a hit gains a hit.
    /// NoHit rays count misses all the way to their max-range end point.
    pub fn record(&mut self, sample: &ScanSample) -> Result<(), StorageError> {
        if sample.is_hit() && self.cell_of(&sample.global).is_none() {
            self.out_of_grid += 1;
            return Err(StorageError::OutOfGrid {
                gx: sample.global.gx,
                gy: sample.global.gy,
            });
        }
        let cells = self.traverse(&sample.ray_origin_global(), &sample.global);
        let last = cells.len() - 1;
        for (i, (c, r)) in cells.into_iter().enumerate() {
            self.bump(c, r, i == last && sample.is_hit());
        }
        Ok(())
    }

    /// Cells whose center lies within `radius` (planar) of `center`, in row-major order.
    pub fn query_region(&self, center: &GlobalPoint, radius: f64) -> Vec<CellSummary> {
        let mut out = Vec::new();
        for row in 0..self.rows {
            for col in 0..self.cols {
                let c = self.cell_center(col, row);
                if (c.gx - center.gx).hypot(c.gy - center.gy) <= radius {
                    let counts = self.cell(col, row);
                    out.push(CellSummary {
                        col,
                        row,
                        center: c,
                        counts,
                        state: counts.state(),
                    });
                }
            }
        }
        out
    }

    pub fn cell_center(&self, col: usize, row: usize) -> GlobalPoint {
        GlobalPoint::new(
            self.origin.gx + (col as f64 + 0.5) * self.resolution,
            self.origin.gy + (row as f64 + 0.5) * self.resolution,
            self.origin.gz,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(HEADER_LEN + 8 * self.cells.len());
        b.extend_from_slice(&MAP_MAGIC);
        b.extend_from_slice(&MAP_FORMAT_VERSION.to_le_bytes());
        for v in [self.origin.gx, self.origin.gy, self.origin.gz, self.resolution, self.extent] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&(self.cols as u32).to_le_bytes());
        b.extend_from_slice(&(self.rows as u32).to_le_bytes());
        b.extend_from_slice(&self.out_of_grid.to_le_bytes());
        for c in &self.cells {
            b.extend_from_slice(&c.hits.to_le_bytes());
            b.extend_from_slice(&c.misses.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, StorageError> {
        let bad = |m: &str| StorageError::FormatVersionMismatch(m.to_string());
        if b.len() < HEADER_LEN {
            return Err(bad("file shorter than header"));
        }
        if b[0..4] != MAP_MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != MAP_FORMAT_VERSION {
            return Err(StorageError::FormatVersionMismatch(format!(
                "version {version}, expected {MAP_FORMAT_VERSION}"
            )));
        }
        let origin = GlobalPoint::new(f64_at(8), f64_at(16), f64_at(24));
        let (resolution, extent) = (f64_at(32), f64_at(40));
        let (cols, rows) = (u32_at(48) as usize, u32_at(52) as usize);
        let out_of_grid = u64::from_le_bytes(b[56..64].try_into().unwrap());
        let n = cols
            .checked_mul(rows)
            .ok_or_else(|| bad("grid dimensions overflow"))?;
        if b.len() != HEADER_LEN + 8 * n {
            return Err(StorageError::FormatVersionMismatch(format!(
                "expected {} bytes of cell data, found {}",
                8 * n,
                b.len() - HEADER_LEN
            )));
        }
        let cells = (0..n)
            .map(|i| {
                let o = HEADER_LEN + 8 * i;
                CellCounts {
                    hits: u32_at(o),
                    misses: u32_at(o + 4),
                }
            })
            .collect();
        Ok(Self {
            origin,
            resolution,
            extent,
            cols,
            rows,
            cells,
            out_of_grid,
        })
    }
}

/// Sidecar path for a map file: same stem, `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the binary map and its JSON sidecar.
pub fn save_map(map: &OccupancyMap, path: &Path) -> Result<(), StorageError> {
    fs::write(path, map.to_bytes())?;
    let sidecar = Sidecar {
        magic: String::from_utf8_lossy(&MAP_MAGIC).into_owned(),
        version: MAP_FORMAT_VERSION,
        origin: map.origin,
        resolution: map.resolution,
        extent: map.extent,
        cols: map.cols,
        rows: map.rows,
        out_of_grid: map.out_of_grid,
        cell_layout: "row-major, col along GX, row along GY, (hits u32 LE, misses u32 LE)".into(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

pub fn load_map(path: &Path) -> Result<OccupancyMap, StorageError> {
    OccupancyMap::from_bytes(&fs::read(path)?)
}

/// Cells crossed by the segment (x0, y0) -> (x1, y1) in cell units.
fn grid_line(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(i64, i64)> {
    let (mut cx, mut cy) = (x0.floor() as i64, y0.floor() as i64);
    let (ex, ey) = (x1.floor() as i64, y1.floor() as i64);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let axis = |d: f64, p: f64, c: i64| -> (f64, f64) {
        if d > 0.0 {
            ((c as f64 + 1.0 - p) / d, 1.0 / d)
        } else if d < 0.0 {
            ((p - c as f64) / -d, -1.0 / d)
        } else {
            (f64::INFINITY, f64::INFINITY)
        }
    };
    let (mut t_x, dt_x) = axis(dx, x0, cx);
    let (mut t_y, dt_y) = axis(dy, y0, cy);
    let budget = (ex - cx).unsigned_abs() + (ey - cy).unsigned_abs();
    let mut out = Vec::with_capacity(budget as usize + 1);
    out.push((cx, cy));
    for _ in 0..budget {
        if t_x < t_y {
            cx += step_x;
            t_x += dt_x;
        } else {
            cy += step_y;
            t_y += dt_y;
        }
        out.push((cx, cy));
    }
    out
}
