//! Discrete terrain: grid geometry, zone membership and obstruction lookups.
//!
//! Positions are expressed in cell units. Cell `(i, j)` has its center at
//! `GridPos { x: i, y: j }`, so integer positions are cell centers and mobile
//! transmitters may sit anywhere in between.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Side length, in cells, of the coarse blocks used to skip flat terrain
/// during line-of-sight walks.
const BLOCK: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("grid dimensions must be positive (got {width}x{height}, cell size {cell_size})")]
    InvalidDimensions {
        width: usize,
        height: usize,
        cell_size: f64,
    },
    #[error("elevation raster has {got} entries, expected {expected}")]
    ElevationSize { expected: usize, got: usize },
    #[error("elevation at cell index {index} is negative or not finite")]
    BadElevation { index: usize },
    #[error("zone polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("zone vertex {index} ({x}, {y}) lies outside the grid")]
    VertexOutOfBounds { index: usize, x: f64, y: f64 },
    #[error("zone polygon is not simple (edges {0} and {1} intersect)")]
    SelfIntersecting(usize, usize),
    #[error("zone polygon has zero area")]
    Degenerate,
}

/// A position on the grid in (possibly fractional) cell units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPos {
    pub x: f64,
    pub y: f64,
}

impl GridPos {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Planar distance in cell units.
    pub fn cell_distance(self, other: GridPos) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// The terrain raster. Immutable once built.
#[derive(Debug, Clone)]
pub struct Grid {
    width: usize,
    height: usize,
    cell_size: f64,
    elevation: Vec<f64>,
    blocks_x: usize,
    block_max: Vec<f64>,
    max_elevation: f64,
    fingerprint: u64,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.cell_size == other.cell_size
            && self.elevation == other.elevation
    }
}

impl Grid {
    /// Flat terrain of the given size.
    pub fn flat(width: usize, height: usize, cell_size: f64) -> Result<Self, GeoError> {
        Self::with_elevation(width, height, cell_size, vec![0.0; width * height])
    }

    /// Terrain with a row-major elevation raster (`width` columns, `height` rows, meters).
    pub fn with_elevation(
        width: usize,
        height: usize,
        cell_size: f64,
        elevation: Vec<f64>,
    ) -> Result<Self, GeoError> {
        if width == 0 || height == 0 || !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(GeoError::InvalidDimensions {
                width,
                height,
                cell_size,
            });
        }
        if elevation.len() != width * height {
            return Err(GeoError::ElevationSize {
                expected: width * height,
                got: elevation.len(),
            });
        }
        if let Some(index) = elevation.iter().position(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(GeoError::BadElevation { index });
        }

        let blocks_x = width.div_ceil(BLOCK);
        let blocks_y = height.div_ceil(BLOCK);
        let mut block_max = vec![0.0f64; blocks_x * blocks_y];
        for y in 0..height {
            for x in 0..width {
                let b = &mut block_max[(y / BLOCK) * blocks_x + x / BLOCK];
                let e = elevation[y * width + x];
                if e > *b {
                    *b = e;
                }
            }
        }
        let max_elevation = block_max.iter().cloned().fold(0.0, f64::max);

        // FNV-1a over the defining contents; used to key cached fields.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(width as u64);
        eat(height as u64);
        eat(cell_size.to_bits());
        for e in &elevation {
            eat(e.to_bits());
        }

        Ok(Self {
            width,
            height,
            cell_size,
            elevation,
            blocks_x,
            block_max,
            max_elevation,
            fingerprint: h,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn elevation(&self) -> &[f64] {
        &self.elevation
    }

    pub fn max_elevation(&self) -> f64 {
        self.max_elevation
    }

    /// Content hash of dimensions, cell size and elevation.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn in_bounds(&self, pos: GridPos) -> bool {
        pos.x >= 0.0
            && pos.y >= 0.0
            && pos.x <= (self.width - 1) as f64
            && pos.y <= (self.height - 1) as f64
    }

    /// Clamp a position onto the span of cell centers.
    pub fn clamp(&self, pos: GridPos) -> GridPos {
        GridPos {
            x: pos.x.max(0.0).min((self.width - 1) as f64),
            y: pos.y.max(0.0).min((self.height - 1) as f64),
        }
    }

    /// The cell containing `pos` (nearest center), clamped into the grid.
    #[inline]
    pub fn cell_of(&self, pos: GridPos) -> (usize, usize) {
        let x = pos.x.round().max(0.0).min((self.width - 1) as f64) as usize;
        let y = pos.y.round().max(0.0).min((self.height - 1) as f64) as usize;
        (x, y)
    }

    /// Terrain height at the cell containing `pos`.
    pub fn elevation_at(&self, pos: GridPos) -> f64 {
        let (x, y) = self.cell_of(pos);
        self.elevation[self.index(x, y)]
    }

    /// Count the cells strictly between `a` and `b` whose elevation rises above
    /// the straight line joining the two absolute heights, stopping at `cap`.
    ///
    /// The walk samples the segment at unit steps along its major axis and
    /// rounds each sample to a cell; the end cells themselves never count.
    pub fn obstructed_cells(
        &self,
        a: GridPos,
        a_height: f64,
        b: GridPos,
        b_height: f64,
        cap: usize,
    ) -> usize {
        let floor_height = a_height.min(b_height);
        if cap == 0 || self.max_elevation <= floor_height {
            return 0;
        }
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let steps = dx.abs().max(dy.abs()).ceil() as usize;
        if steps < 2 {
            return 0;
        }
        let n = steps as f64;
        let (sx, sy) = (dx / n, dy / n);
        let start = self.cell_of(a);
        let end = self.cell_of(b);
        let mut last = start;
        let mut count = 0usize;
        let mut i = 1usize;
        while i < steps {
            let px = a.x + sx * i as f64;
            let py = a.y + sy * i as f64;
            let cell = self.cell_of(GridPos::new(px, py));
            let (bx, by) = (cell.0 / BLOCK, cell.1 / BLOCK);
            if self.block_max[by * self.blocks_x + bx] <= floor_height {
                // Nothing in this block can reach the line; jump to the first
                // sample that may have left it (one step early to absorb rounding).
                let exit_x = axis_exit(a.x, sx, bx);
                let exit_y = axis_exit(a.y, sy, by);
                let next = exit_x.min(exit_y).saturating_sub(1).max(i + 1);
                last = cell;
                i = next;
                continue;
            }
            if cell != last && cell != start && cell != end {
                let los = a_height + (b_height - a_height) * (i as f64 / n);
                if self.elevation[self.index(cell.0, cell.1)] > los {
                    count += 1;
                    if count >= cap {
                        return cap;
                    }
                }
            }
            last = cell;
            i += 1;
        }
        count
    }
}

/// Number of bearing buckets in a [`ShadowIndex`].
const BEARING_BINS: usize = 1024;

/// Blocks that can obstruct rays leaving one origin, bucketed by bearing.
///
/// Built once per transmitter position, it lets a whole raster of rays visit
/// only the raised blocks they can actually cross instead of walking the
/// flat ground between them. Counts equal [`Grid::obstructed_cells`].
#[derive(Debug, Clone)]
pub struct ShadowIndex {
    origin: GridPos,
    /// Blocks checked for every ray: the origin sits in or next to them.
    near: Vec<u32>,
    /// CSR offsets into `entries`, one run per bearing bin.
    bin_start: Vec<u32>,
    /// (block, squared distance in cells from the origin to the block).
    entries: Vec<(u32, f64)>,
}

fn bearing_bin(angle: f64) -> isize {
    ((angle + core::f64::consts::PI) / core::f64::consts::TAU * BEARING_BINS as f64).floor() as isize
}

impl Grid {
    /// Continuous extent `[x0, x1] x [y0, y1]` of the positions that round into block `b`.
    fn block_box(&self, b: usize) -> [f64; 4] {
        let (bx, by) = (b % self.blocks_x, b / self.blocks_x);
        let x0 = (bx * BLOCK) as f64 - 0.5;
        let y0 = (by * BLOCK) as f64 - 0.5;
        let x1 = (((bx + 1) * BLOCK).min(self.width)) as f64 - 0.5;
        let y1 = (((by + 1) * BLOCK).min(self.height)) as f64 - 0.5;
        [x0, y0, x1, y1]
    }

    /// Index for rays from `origin` (absolute height `origin_height`) to
    /// receivers no lower than `min_rx_height`.
    pub fn shadow_index(&self, origin: GridPos, origin_height: f64, min_rx_height: f64) -> ShadowIndex {
        let floor = origin_height.min(min_rx_height);
        let mut near = Vec::new();
        let mut binned: Vec<(usize, u32, f64)> = Vec::new();
        for (b, &top) in self.block_max.iter().enumerate() {
            if top <= floor {
                continue;
            }
            let [x0, y0, x1, y1] = self.block_box(b);
            let margin = 1.0;
            if origin.x >= x0 - margin && origin.x <= x1 + margin && origin.y >= y0 - margin && origin.y <= y1 + margin {
                near.push(b as u32);
                continue;
            }
            let dx = (x0 - origin.x).max(origin.x - x1).max(0.0);
            let dy = (y0 - origin.y).max(origin.y - y1).max(0.0);
            // Seen from outside, a box spans less than half a turn; measure
            // the corners relative to its center bearing to avoid the wrap.
            let center = ((y0 + y1) / 2.0 - origin.y).atan2((x0 + x1) / 2.0 - origin.x);
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for (cx, cy) in [(x0, y0), (x1, y0), (x0, y1), (x1, y1)] {
                let mut d = (cy - origin.y).atan2(cx - origin.x) - center;
                if d > core::f64::consts::PI {
                    d -= core::f64::consts::TAU;
                } else if d < -core::f64::consts::PI {
                    d += core::f64::consts::TAU;
                }
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let (first, last) = (bearing_bin(center + lo) - 1, bearing_bin(center + hi) + 1);
            for bin in first..=last {
                binned.push((bin.rem_euclid(BEARING_BINS as isize) as usize, b as u32, dx * dx + dy * dy));
            }
        }
        binned.sort_by_key(|&(bin, b, _)| (bin, b));
        let mut bin_start = vec![0u32; BEARING_BINS + 1];
        for &(bin, _, _) in &binned {
            bin_start[bin + 1] += 1;
        }
        for i in 0..BEARING_BINS {
            bin_start[i + 1] += bin_start[i];
        }
        ShadowIndex {
            origin,
            near,
            bin_start,
            entries: binned.into_iter().map(|(_, b, d)| (b, d)).collect(),
        }
    }

    /// [`obstructed_cells`](Self::obstructed_cells) from the indexed origin.
    /// `a_height` must be the height the index was built with and `b_height`
    /// no lower than its receiver floor.
    pub fn obstructed_cells_indexed(
        &self,
        index: &ShadowIndex,
        a_height: f64,
        b: GridPos,
        b_height: f64,
        cap: usize,
    ) -> usize {
        let a = index.origin;
        let floor_height = a_height.min(b_height);
        if cap == 0 || self.max_elevation <= floor_height {
            return 0;
        }
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let steps = dx.abs().max(dy.abs()).ceil() as usize;
        if steps < 2 {
            return 0;
        }
        let n = steps as f64;
        let (sx, sy) = (dx / n, dy / n);
        let start = self.cell_of(a);
        let end = self.cell_of(b);
        let reach = dx * dx + dy * dy;
        let bin = bearing_bin(dy.atan2(dx)).rem_euclid(BEARING_BINS as isize) as usize;
        let binned = &index.entries[index.bin_start[bin] as usize..index.bin_start[bin + 1] as usize];
        let sample = |i: usize| self.cell_of(GridPos::new(a.x + sx * i as f64, a.y + sy * i as f64));

        // Sample ranges that may fall in a raised block, merged so every
        // sample is visited once. Samples outside raised blocks sit at or
        // below the floor and can never count.
        const MAX_RANGES: usize = 48;
        let mut ranges = [(0usize, 0usize); MAX_RANGES];
        let mut len = 0;
        let candidates = index.near.iter().copied().chain(
            binned.iter().filter(|&&(_, d2)| d2 <= reach + 1.0).map(|&(blk, _)| blk),
        );
        for blk in candidates {
            let blk = blk as usize;
            if self.block_max[blk] <= floor_height {
                continue;
            }
            let [x0, y0, x1, y1] = self.block_box(blk);
            let (mut i0, mut i1) = (1.0f64, (steps - 1) as f64);
            for (o, s, lo, hi) in [(a.x, sx, x0, x1), (a.y, sy, y0, y1)] {
                if s == 0.0 {
                    if o < lo - 1e-9 || o > hi + 1e-9 {
                        i1 = -1.0;
                    }
                } else {
                    let (p, q) = ((lo - o) / s, (hi - o) / s);
                    i0 = i0.max(p.min(q).floor() - 1.0);
                    i1 = i1.min(p.max(q).ceil() + 1.0);
                }
            }
            if i1 < i0 {
                continue;
            }
            if len == MAX_RANGES {
                return self.obstructed_cells(a, a_height, b, b_height, cap);
            }
            ranges[len] = (i0 as usize, i1 as usize);
            len += 1;
        }
        let ranges = &mut ranges[..len];
        ranges.sort_unstable();

        let mut count = 0usize;
        let mut next = 1usize;
        for &(lo, hi) in ranges.iter() {
            let lo = lo.max(next);
            if lo > hi {
                continue;
            }
            let mut last = sample(lo - 1);
            for i in lo..=hi {
                let cell = sample(i);
                if cell != last && cell != start && cell != end {
                    let los = a_height + (b_height - a_height) * (i as f64 / n);
                    if self.elevation[self.index(cell.0, cell.1)] > los {
                        count += 1;
                        if count >= cap {
                            return cap;
                        }
                    }
                }
                last = cell;
            }
            next = hi + 1;
        }
        count
    }
}

/// First step index at which the rounded coordinate `origin + step * i`
/// leaves block `block` along one axis.
#[inline]
fn axis_exit(origin: f64, step: f64, block: usize) -> usize {
    if step > 0.0 {
        let edge = ((block + 1) * BLOCK) as f64 - 0.5;
        ((edge - origin) / step).ceil().max(0.0) as usize
    } else if step < 0.0 {
        let edge = (block * BLOCK) as f64 - 0.5;
        ((origin - edge) / -step).floor().max(0.0) as usize + 1
    } else {
        usize::MAX
    }
}

/// Euclidean distance in meters between two antennas given in cell units and
/// meters of height.
pub fn distance_3d(a: GridPos, a_height: f64, b: GridPos, b_height: f64, grid: &Grid) -> f64 {
    let dx = (b.x - a.x) * grid.cell_size;
    let dy = (b.y - a.y) * grid.cell_size;
    let dz = b_height - a_height;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// The zone boundary: a simple polygon in grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GridPos>", into = "Vec<GridPos>")]
pub struct ZoneBoundary {
    vertices: Vec<GridPos>,
}

impl TryFrom<Vec<GridPos>> for ZoneBoundary {
    type Error = GeoError;

    fn try_from(vertices: Vec<GridPos>) -> Result<Self, Self::Error> {
        validate_polygon(&vertices)?;
        Ok(Self { vertices })
    }
}

impl From<ZoneBoundary> for Vec<GridPos> {
    fn from(z: ZoneBoundary) -> Self {
        z.vertices
    }
}

impl ZoneBoundary {
    /// A polygon checked for simplicity and against the grid bounds.
    pub fn new(vertices: Vec<GridPos>, grid: &Grid) -> Result<Self, GeoError> {
        let zone = Self::try_from(vertices)?;
        zone.check_bounds(grid)?;
        Ok(zone)
    }

    /// Axis-aligned rectangle with inclusive corners.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64, grid: &Grid) -> Result<Self, GeoError> {
        Self::new(
            vec![
                GridPos::new(x0, y0),
                GridPos::new(x1, y0),
                GridPos::new(x1, y1),
                GridPos::new(x0, y1),
            ],
            grid,
        )
    }

    pub fn check_bounds(&self, grid: &Grid) -> Result<(), GeoError> {
        for (index, v) in self.vertices.iter().enumerate() {
            if !grid.in_bounds(*v) {
                return Err(GeoError::VertexOutOfBounds {
                    index,
                    x: v.x,
                    y: v.y,
                });
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[GridPos] {
        &self.vertices
    }

    /// Membership test; points on the boundary count as inside.
    pub fn contains(&self, pos: GridPos) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (a, b) = (v[j], v[i]);
            if on_segment(a, b, pos) {
                return true;
            }
            if (a.y > pos.y) != (b.y > pos.y) {
                let cross_x = a.x + (pos.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if pos.x < cross_x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    fn cell_bbox(&self, grid: &Grid) -> (usize, usize, usize, usize) {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in &self.vertices {
            x0 = x0.min(v.x);
            y0 = y0.min(v.y);
            x1 = x1.max(v.x);
            y1 = y1.max(v.y);
        }
        let lo = |v: f64| v.ceil().max(0.0) as usize;
        let hi = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        (lo(x0), lo(y0), hi(x1, grid.width), hi(y1, grid.height))
    }

    /// Number of cell centers inside the zone.
    pub fn area(&self, grid: &Grid) -> usize {
        let (x0, y0, x1, y1) = self.cell_bbox(grid);
        let mut n = 0;
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.contains(GridPos::new(x as f64, y as f64)) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Row-major membership mask over all cells.
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        let mut mask = vec![false; grid.cell_count()];
        let (x0, y0, x1, y1) = self.cell_bbox(grid);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.contains(GridPos::new(x as f64, y as f64)) {
                    mask[grid.index(x, y)] = true;
                }
            }
        }
        mask
    }

    /// Row-major indices of every cell whose center lies outside the zone.
    pub fn outside_cells(&self, grid: &Grid) -> Vec<u32> {
        self.mask(grid)
            .iter()
            .enumerate()
            .filter(|(_, inside)| !**inside)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// The in-zone cell center closest to `target` (ties broken by scan order).
    pub fn nearest_inside(&self, target: GridPos, grid: &Grid) -> Option<GridPos> {
        let (x0, y0, x1, y1) = self.cell_bbox(grid);
        let mut best: Option<(f64, GridPos)> = None;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let p = GridPos::new(x as f64, y as f64);
                if self.contains(p) {
                    let d = p.cell_distance(target);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Area centroid of the polygon.
    pub fn centroid(&self) -> GridPos {
        let v = &self.vertices;
        let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let cross = v[j].x * v[i].y - v[i].x * v[j].y;
            a2 += cross;
            cx += (v[j].x + v[i].x) * cross;
            cy += (v[j].y + v[i].y) * cross;
            j = i;
        }
        GridPos::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }
}

const EPS: f64 = 1e-9;

fn cross(o: GridPos, a: GridPos, b: GridPos) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(a: GridPos, b: GridPos, p: GridPos) -> bool {
    let len = a.cell_distance(b);
    if cross(a, b, p).abs() > EPS * len.max(1.0) {
        return false;
    }
    p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.y >= a.y.min(b.y) - EPS
        && p.y <= a.y.max(b.y) + EPS
}

fn segments_intersect(p1: GridPos, p2: GridPos, q1: GridPos, q2: GridPos) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    on_segment(q1, q2, p1) || on_segment(q1, q2, p2) || on_segment(p1, p2, q1) || on_segment(p1, p2, q2)
}

fn validate_polygon(v: &[GridPos]) -> Result<(), GeoError> {
    let n = v.len();
    if n < 3 {
        return Err(GeoError::TooFewVertices(n));
    }
    for (index, p) in v.iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GeoError::VertexOutOfBounds {
                index,
                x: p.x,
                y: p.y,
            });
        }
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a.cell_distance(b) < EPS {
            return Err(GeoError::Degenerate);
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (c, d) = (v[j], v[(j + 1) % n]);
            if adjacent {
                // Neighbours share one vertex; they may not fold back onto each other.
                let shared = if j == i + 1 { b } else { a };
                let (far_i, far_j) = if j == i + 1 { (a, d) } else { (b, c) };
                if on_segment(shared, far_i, far_j) || on_segment(shared, far_j, far_i) {
                    return Err(GeoError::SelfIntersecting(i, j));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(GeoError::SelfIntersecting(i, j));
            }
        }
    }
    let mut a2 = 0.0;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        a2 += a.x * b.y - b.x * a.y;
    }
    if a2.abs() < EPS {
        return Err(GeoError::Degenerate);
    }
    Ok(())
}
