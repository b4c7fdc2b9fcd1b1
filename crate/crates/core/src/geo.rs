//! Lon/lat points and rectangles, and the hierarchical tile grid.
//!
//! Grid arithmetic never rounds: a coordinate is decomposed into its exact
//! binary mantissa and exponent, so `floor(coord * 10^level)` is computed on
//! the true value of the float. Tile assignment is therefore identical at
//! every level (the level-`n` tile of a point is always the parent of its
//! level-`n+1` tile) and does not depend on the scalar width.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_traits::{Float, Num};
use thiserror::Error;

/// Scalar usable as a coordinate.
pub trait Coord: Float + fmt::Debug + fmt::Display + Send + Sync + 'static {}

impl Coord for f32 {}
impl Coord for f64 {}

/// Children per axis when descending one level.
pub const SPLIT: u32 = 10;
/// Children per tile (`SPLIT * SPLIT`).
pub const CHILDREN: usize = (SPLIT * SPLIT) as usize;
/// Deepest supported level count; `360 * 10^7` still fits a `u32` index.
pub const MAX_LEVELS: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeoError {
    #[error("longitude {0} outside [-180, 180)")]
    Longitude(String),
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(String),
    #[error("rectangle corners out of order (min {min} / max {max})")]
    Inverted { min: String, max: String },
    #[error("level {level} outside grid of {levels} levels")]
    Level { level: u8, levels: u8 },
    #[error("grid must have between 1 and {MAX_LEVELS} levels, got {0}")]
    Levels(u8),
    #[error("tile index ({ix}, {iy}) out of range for level {level}")]
    Index { level: u8, ix: u32, iy: u32 },
    #[error("malformed tile {0:?}")]
    TileSyntax(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<S = f64> {
    lon: S,
    lat: S,
}

impl<S: Coord> Point<S> {
    pub fn new(lon: S, lat: S) -> Result<Self, GeoError> {
        let lon_min = S::from(-180.0).unwrap();
        let lat_max = S::from(90.0).unwrap();
        if !(lon >= lon_min && lon < -lon_min) {
            return Err(GeoError::Longitude(lon.to_string()));
        }
        if !(lat >= -lat_max && lat <= lat_max) {
            return Err(GeoError::Latitude(lat.to_string()));
        }
        Ok(Self { lon, lat })
    }

    pub fn lon(&self) -> S {
        self.lon
    }

    pub fn lat(&self) -> S {
        self.lat
    }
}

impl<S: Coord> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lon, self.lat)
    }
}

/// Closed axis-aligned rectangle. Rectangles crossing the antimeridian are
/// not representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<S = f64> {
    min: Point<S>,
    max: Point<S>,
}

impl<S: Coord> Rect<S> {
    pub fn new(min: Point<S>, max: Point<S>) -> Result<Self, GeoError> {
        if min.lon > max.lon || min.lat > max.lat {
            return Err(GeoError::Inverted {
                min: min.to_string(),
                max: max.to_string(),
            });
        }
        Ok(Self { min, max })
    }

    pub fn from_bounds(min_lon: S, min_lat: S, max_lon: S, max_lat: S) -> Result<Self, GeoError> {
        Self::new(Point::new(min_lon, min_lat)?, Point::new(max_lon, max_lat)?)
    }

    /// Degenerate rectangle holding a single point.
    pub fn point(p: Point<S>) -> Self {
        Self { min: p, max: p }
    }

    pub fn min(&self) -> Point<S> {
        self.min
    }

    pub fn max(&self) -> Point<S> {
        self.max
    }

    pub fn intersects(&self, other: &Rect<S>) -> bool {
        self.min.lon <= other.max.lon
            && other.min.lon <= self.max.lon
            && self.min.lat <= other.max.lat
            && other.min.lat <= self.max.lat
    }

    pub fn contains_point(&self, p: &Point<S>) -> bool {
        self.min.lon <= p.lon && p.lon <= self.max.lon && self.min.lat <= p.lat && p.lat <= self.max.lat
    }
}

/// One cell of the grid: `level` 0 cells are 1 degree wide, each level down
/// divides by ten per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub level: u8,
    pub ix: u32,
    pub iy: u32,
}

fn pow10(exp: u32) -> u64 {
    10u64.pow(exp)
}

/// Cells per axis at `level`: (lon, lat).
pub fn cells_per_axis(level: u8) -> (u32, u32) {
    let s = pow10(level as u32);
    ((360 * s) as u32, (180 * s) as u32)
}

impl Tile {
    /// Validated constructor; the level bound is only `MAX_LEVELS` here, use
    /// [`Grid::tile`] to check against a concrete grid.
    pub fn new(level: u8, ix: u32, iy: u32) -> Result<Self, GeoError> {
        if level >= MAX_LEVELS {
            return Err(GeoError::Level { level, levels: MAX_LEVELS });
        }
        let (nx, ny) = cells_per_axis(level);
        if ix >= nx || iy >= ny {
            return Err(GeoError::Index { level, ix, iy });
        }
        Ok(Self { level, ix, iy })
    }

    pub fn parent(&self) -> Result<Tile, GeoError> {
        if self.level == 0 {
            return Err(GeoError::Level { level: 0, levels: 0 });
        }
        Ok(Tile {
            level: self.level - 1,
            ix: self.ix / SPLIT,
            iy: self.iy / SPLIT,
        })
    }

    /// The ancestor (or self) at `level`; `level` must not exceed `self.level`.
    pub fn ancestor_at(&self, level: u8) -> Tile {
        debug_assert!(level <= self.level);
        let f = pow10((self.level - level) as u32) as u32;
        Tile {
            level,
            ix: self.ix / f,
            iy: self.iy / f,
        }
    }

    /// True if `self` is a strict ancestor of `other`.
    pub fn is_ancestor_of(&self, other: &Tile) -> bool {
        other.level > self.level && other.ancestor_at(self.level) == *self
    }

    /// Children in row-major order (iy outer, ix inner).
    pub fn children_unchecked(&self) -> impl Iterator<Item = Tile> + '_ {
        let (bx, by) = (self.ix * SPLIT, self.iy * SPLIT);
        let level = self.level + 1;
        (0..SPLIT).flat_map(move |dy| (0..SPLIT).map(move |dx| Tile { level, ix: bx + dx, iy: by + dy }))
    }

    /// Degree extent; approximate (decimal edges are not representable).
    pub fn extent<S: Coord>(&self) -> Rect<S> {
        let size = 1.0 / pow10(self.level as u32) as f64;
        let min_lon = self.ix as f64 * size - 180.0;
        let min_lat = self.iy as f64 * size - 90.0;
        let conv = |v: f64| S::from(v).unwrap();
        Rect {
            min: Point { lon: conv(min_lon), lat: conv(min_lat) },
            max: Point {
                lon: conv(min_lon + size),
                lat: conv(min_lat + size),
            },
        }
    }

    /// Exact closed-extent intersection test against a rectangle.
    pub fn intersects_rect<S: Coord>(&self, r: &Rect<S>) -> bool {
        covering_range(r, self.level).contains(self)
    }

    /// Level-`level` cells whose closed extent touches this tile's closed
    /// extent. Exact integer arithmetic in both directions (coarser or finer).
    pub fn covering_at(&self, level: u8) -> TileRange {
        let (nx, ny) = cells_per_axis(level);
        let span = |i: u32, n: u32| -> RangeInclusive<u32> {
            // closed extent [i, i+1] / 10^self.level, expressed in 10^-level units
            let (lo, hi) = if level >= self.level {
                let f = pow10((level - self.level) as u32) as i64;
                (i as i64 * f - 1, (i as i64 + 1) * f)
            } else {
                let f = pow10((self.level - level) as u32) as i64;
                let lo = div_ceil(i as i64, f) - 1;
                let hi = (i as i64 + 1).div_euclid(f);
                (lo, hi)
            };
            lo.clamp(0, n as i64 - 1) as u32..=hi.clamp(0, n as i64 - 1) as u32
        };
        TileRange {
            level,
            ix: span(self.ix, nx),
            iy: span(self.iy, ny),
        }
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}:{}:{}", self.level, self.ix, self.iy)
    }
}

impl FromStr for Tile {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeoError::TileSyntax(s.to_string());
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let mut it = rest.split(':');
        let mut next = || -> Result<u32, GeoError> { it.next().ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let level = next()?;
        let ix = next()?;
        let iy = next()?;
        if it.next().is_some() || level > u8::MAX as u32 {
            return Err(bad());
        }
        Tile::new(level as u8, ix, iy)
    }
}

/// A rectangular block of same-level tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileRange {
    pub level: u8,
    pub ix: RangeInclusive<u32>,
    pub iy: RangeInclusive<u32>,
}

impl TileRange {
    pub fn contains(&self, t: &Tile) -> bool {
        t.level == self.level && self.ix.contains(&t.ix) && self.iy.contains(&t.iy)
    }

    pub fn len(&self) -> usize {
        (self.ix.end() - self.ix.start() + 1) as usize * (self.iy.end() - self.iy.start() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = Tile> + '_ {
        let level = self.level;
        self.iy
            .clone()
            .flat_map(move |iy| self.ix.clone().map(move |ix| Tile { level, ix, iy }))
    }
}

/// `floor(v * 10^exp)` on the exact value of `v`.
pub(crate) fn scaled_floor<S: Float>(v: S, exp: u32) -> i64 {
    let (mantissa, exponent, sign) = v.integer_decode();
    let num = sign as i128 * mantissa as i128 * pow10(exp) as i128;
    if exponent >= 0 {
        (num << exponent) as i64
    } else {
        let shift = (-exponent) as u32;
        if shift >= 127 {
            if num < 0 {
                -1
            } else {
                0
            }
        } else {
            (num >> shift) as i64
        }
    }
}

/// `ceil(v * 10^exp)` on the exact value of `v`.
pub(crate) fn scaled_ceil<S: Float>(v: S, exp: u32) -> i64 {
    -scaled_floor(-v, exp)
}

fn covering_range<S: Coord>(r: &Rect<S>, level: u8) -> TileRange {
    let (nx, ny) = cells_per_axis(level);
    let e = level as u32;
    let s = pow10(e) as i64;
    let span = |lo: S, hi: S, offset: i64, n: u32| -> RangeInclusive<u32> {
        let a = scaled_ceil(lo, e) + offset * s - 1;
        let b = scaled_floor(hi, e) + offset * s;
        a.clamp(0, n as i64 - 1) as u32..=b.clamp(0, n as i64 - 1) as u32
    };
    TileRange {
        level,
        ix: span(r.min.lon, r.max.lon, 180, nx),
        iy: span(r.min.lat, r.max.lat, 90, ny),
    }
}

/// Grid with `levels` resolution levels (0 through `levels - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    levels: u8,
}

impl Default for Grid {
    fn default() -> Self {
        Self { levels: 3 }
    }
}

impl Grid {
    pub fn new(levels: u8) -> Result<Self, GeoError> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(GeoError::Levels(levels));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn finest(&self) -> u8 {
        self.levels - 1
    }

    fn check(&self, level: u8) -> Result<(), GeoError> {
        if level >= self.levels {
            return Err(GeoError::Level { level, levels: self.levels });
        }
        Ok(())
    }

    pub fn tile(&self, level: u8, ix: u32, iy: u32) -> Result<Tile, GeoError> {
        self.check(level)?;
        Tile::new(level, ix, iy)
    }

    /// Half-open cell containing `p`; the global max latitude edge is closed.
    pub fn tile_of<S: Coord>(&self, p: &Point<S>, level: u8) -> Result<Tile, GeoError> {
        self.check(level)?;
        let (nx, ny) = cells_per_axis(level);
        let s = pow10(level as u32) as i64;
        let ix = scaled_floor(p.lon, level as u32) + 180 * s;
        let iy = scaled_floor(p.lat, level as u32) + 90 * s;
        Ok(Tile {
            level,
            ix: ix.clamp(0, nx as i64 - 1) as u32,
            iy: iy.clamp(0, ny as i64 - 1) as u32,
        })
    }

    /// Every level-`level` tile whose closed extent intersects `r`.
    pub fn tiles_covering<S: Coord>(&self, r: &Rect<S>, level: u8) -> Result<TileRange, GeoError> {
        self.check(level)?;
        Ok(covering_range(r, level))
    }

    pub fn parent(&self, t: &Tile) -> Result<Tile, GeoError> {
        self.check(t.level)?;
        if t.level == 0 {
            return Err(GeoError::Level { level: 0, levels: self.levels });
        }
        t.parent()
    }

    pub fn children(&self, t: &Tile) -> Result<Vec<Tile>, GeoError> {
        if t.level + 1 >= self.levels {
            return Err(GeoError::Level {
                level: t.level + 1,
                levels: self.levels,
            });
        }
        Ok(t.children_unchecked().collect())
    }

    /// Area of `t` counted in finest-level cells; exact.
    pub fn finest_cells(&self, t: &Tile) -> u64 {
        100u64.pow((self.finest() - t.level) as u32)
    }
}

/// Planar area of a tile in degree², computed from the level alone.
pub fn tile_area<A: Num + Copy>(t: &Tile) -> A {
    let ten = (0..10).fold(A::zero(), |acc, _| acc + A::one());
    let side = (0..t.level).fold(A::one(), |acc, _| acc / ten);
    side * side
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn p(lon: f64, lat: f64) -> Point {
        Point::new(lon, lat).unwrap()
    }

    #[test]
    fn tile_of_examples() {
        let g = Grid::default();
        assert_eq!(g.tile_of(&p(0.55, 0.25), 0).unwrap(), Tile { level: 0, ix: 180, iy: 90 });
        assert_eq!(g.tile_of(&p(0.55, 0.25), 1).unwrap(), Tile { level: 1, ix: 1805, iy: 902 });
        for level in 0..3 {
            assert_eq!(g.tile_of(&p(-180.0, -90.0), level).unwrap(), Tile { level, ix: 0, iy: 0 });
        }
        assert!(g.tile_of(&p(0.0, 0.0), 3).is_err());
    }

    #[test]
    fn boundary_goes_to_larger_index_and_top_edge_is_closed() {
        let g = Grid::default();
        assert_eq!(g.tile_of(&p(1.0, 0.5), 0).unwrap().ix, 181);
        assert_eq!(g.tile_of(&p(-1.0, 0.5), 0).unwrap().ix, 179);
        assert_eq!(g.tile_of(&p(0.0, 90.0), 2).unwrap().iy, 17_999);
    }

    #[test]
    fn f32_points_agree_with_f64() {
        let g = Grid::default();
        let a = Point::<f32>::new(12.5, 41.25).unwrap();
        let b = p(12.5, 41.25);
        for level in 0..3 {
            assert_eq!(g.tile_of(&a, level).unwrap(), g.tile_of(&b, level).unwrap());
        }
    }

    #[test]
    fn invalid_points_and_rects() {
        assert!(Point::new(180.0, 0.0).is_err());
        assert!(Point::new(0.0, 90.5).is_err());
        assert!(Point::new(f64::NAN, 0.0).is_err());
        assert!(Rect::from_bounds(170.0, 0.0, -170.0, 1.0).is_err());
    }

    #[test]
    fn covering_examples() {
        let g = Grid::default();
        let q = p(0.55, 0.25);
        let r = g.tiles_covering(&Rect::point(q), 1).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![g.tile_of(&q, 1).unwrap()]);

        let r = Rect::from_bounds(0.05, 0.05, 0.15, 0.15).unwrap();
        assert_eq!(g.tiles_covering(&r, 1).unwrap().len(), 4);

        // level-0 tile (0..1, 0..1) at level 1: 10x10 inside plus the closed
        // boundary ring shared with neighbours
        let r = Rect::from_bounds(0.0, 0.0, 1.0, 1.0).unwrap();
        let cover = g.tiles_covering(&r, 1).unwrap();
        assert_eq!(cover.len(), 12 * 12);
        let inside = cover
            .iter()
            .filter(|t| t.parent().unwrap() == Tile { level: 0, ix: 180, iy: 90 })
            .count();
        assert_eq!(inside, 100);
    }

    #[test]
    fn children_and_parent() {
        let g = Grid::default();
        let t = Tile { level: 0, ix: 180, iy: 90 };
        let kids = g.children(&t).unwrap();
        assert_eq!(kids.len(), 100);
        assert!(kids.iter().all(|c| (1800..=1809).contains(&c.ix) && (900..=909).contains(&c.iy)));
        assert!(kids.iter().all(|c| g.parent(c).unwrap() == t));
        assert_eq!(g.parent(&Tile { level: 1, ix: 1805, iy: 902 }).unwrap(), t);
        assert!(g.parent(&t).is_err());
        assert!(g.children(&Tile { level: 2, ix: 0, iy: 0 }).is_err());
    }

    #[test]
    fn areas() {
        let t = |level| Tile { level, ix: 0, iy: 0 };
        assert_eq!(tile_area::<f64>(&t(0)), 1.0);
        assert!((tile_area::<f64>(&t(1)) - 0.01).abs() < 1e-15);
        assert!((tile_area::<f64>(&t(2)) - 0.0001).abs() < 1e-15);
        assert_eq!(tile_area::<Ratio<i64>>(&t(2)), Ratio::new(1, 10_000));
    }

    #[test]
    fn children_areas_sum_exactly() {
        let g = Grid::default();
        for level in 0..2u8 {
            let t = Tile { level, ix: 7, iy: 3 };
            let sum: Ratio<i64> = g.children(&t).unwrap().iter().map(tile_area::<Ratio<i64>>).sum();
            assert_eq!(sum, tile_area::<Ratio<i64>>(&t));
            let cells: u64 = g.children(&t).unwrap().iter().map(|c| g.finest_cells(c)).sum();
            assert_eq!(cells, g.finest_cells(&t));
        }
    }

    #[test]
    fn tile_text_round_trip() {
        let t = Tile { level: 2, ix: 18_055, iy: 9_025 };
        assert_eq!(t.to_string(), "L2:18055:9025");
        assert_eq!("L2:18055:9025".parse::<Tile>().unwrap(), t);
        assert!("L2:18055".parse::<Tile>().is_err());
        assert!("L0:360:0".parse::<Tile>().is_err());
    }

    #[test]
    fn scaled_floor_is_exact() {
        assert_eq!(scaled_floor(0.1f64, 1), 1);
        assert_eq!(scaled_floor(-0.05f64, 1), -1);
        assert_eq!(scaled_ceil(-0.05f64, 1), 0);
        assert_eq!(scaled_floor(-180.0f64, 2), -18_000);
        assert_eq!(scaled_floor(1e-300f64, 2), 0);
        assert_eq!(scaled_floor(-1e-300f64, 2), -1);
    }

    fn exact(v: f64) -> Ratio<i128> {
        let (m, e, sign) = num_traits::Float::integer_decode(v);
        let m = sign as i128 * m as i128;
        if e >= 0 {
            Ratio::from_integer(m << e)
        } else {
            assert!(e > -120, "test value too small for the i128 oracle");
            Ratio::new(m, 1i128 << (-e))
        }
    }

    fn covering_oracle(r: &Rect, level: u8) -> Vec<Tile> {
        // brute force over the candidate window, exact rational extents
        let (nx, ny) = cells_per_axis(level);
        let s = Ratio::from_integer(10i128.pow(level as u32));
                let (a, b) = (exact(r.min().lon()) + 180, exact(r.max().lon()) + 180);
        let (c, d) = (exact(r.min().lat()) + 90, exact(r.max().lat()) + 90);
        let lo_x = ((a * s).floor().to_integer() - 2).max(0) as u32;
        let hi_x = (((b * s).floor().to_integer() + 2).min(nx as i128 - 1)) as u32;
        let lo_y = ((c * s).floor().to_integer() - 2).max(0) as u32;
        let hi_y = (((d * s).floor().to_integer() + 2).min(ny as i128 - 1)) as u32;
        let mut out = vec![];
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                let x0 = Ratio::from_integer(ix as i128) / s;
                let x1 = Ratio::from_integer(ix as i128 + 1) / s;
                let y0 = Ratio::from_integer(iy as i128) / s;
                let y1 = Ratio::from_integer(iy as i128 + 1) / s;
                if x0 <= b && a <= x1 && y0 <= d && c <= y1 {
                    out.push(Tile { level, ix, iy });
                }
            }
        }
        out
    }

    fn arb_rect() -> impl Strategy<Value = Rect> {
        (-180.0..179.0f64, -90.0..89.0f64, 0.0..0.5f64, 0.0..0.5f64)
            .prop_map(|(x, y, w, h)| Rect::from_bounds(x, y, (x + w).min(179.99), (y + h).min(90.0)).unwrap())
    }

    proptest! {
        #[test]
        fn tile_of_contains_point(lon in -180.0..180.0f64, lat in -90.0..=90.0f64, level in 0u8..3) {
            prop_assume!(lon == 0.0 || lon.abs() > 1e-20);
            prop_assume!(lat == 0.0 || lat.abs() > 1e-20);
            let g = Grid::default();
            let q = p(lon, lat);
            let t = g.tile_of(&q, level).unwrap();
            let s = Ratio::from_integer(10i128.pow(level as u32));
            let x = (exact(lon) + 180) * s;
            let y = (exact(lat) + 90) * s;
            prop_assert!(Ratio::from_integer(t.ix as i128) <= x && x < Ratio::from_integer(t.ix as i128 + 1));
            let (_, ny) = cells_per_axis(level);
            if t.iy + 1 == ny {
                prop_assert!(Ratio::from_integer(t.iy as i128) <= y);
            } else {
                prop_assert!(Ratio::from_integer(t.iy as i128) <= y && y < Ratio::from_integer(t.iy as i128 + 1));
            }
            if level > 0 {
                prop_assert_eq!(t.parent().unwrap(), g.tile_of(&q, level - 1).unwrap());
            }
        }

        #[test]
        fn covering_matches_oracle(r in arb_rect(), level in 0u8..3) {
            let g = Grid::default();
            let got: Vec<Tile> = g.tiles_covering(&r, level).unwrap().iter().collect();
            prop_assert_eq!(got, covering_oracle(&r, level));
        }

        #[test]
        fn covering_refines_by_children(r in arb_rect(), level in 0u8..2) {
            let g = Grid::default();
            let mut fine: Vec<Tile> = g.tiles_covering(&r, level + 1).unwrap().iter().collect();
            let mut via_parents: Vec<Tile> = g
                .tiles_covering(&r, level)
                .unwrap()
                .iter()
                .flat_map(|t| g.children(&t).unwrap())
                .filter(|c| c.intersects_rect(&r))
                .collect();
            fine.sort();
            via_parents.sort();
            prop_assert_eq!(fine, via_parents);
        }

        #[test]
        fn tile_cover_of_tile_matches_extent(level in 0u8..3, to in 0u8..3, ix in 0u32..80, iy in 0u32..80) {
            let (nx, ny) = cells_per_axis(level);
            let t = Tile { level, ix: nx / 2 + ix, iy: ny / 2 + iy };
            let got = t.covering_at(to);
            // oracle: tile at `to` touches t iff their closed extents meet
            let ratio = |i: u32, l: u8| Ratio::new(i as i128, 10i128.pow(l as u32));
            let touches = |u: &Tile| {
                ratio(u.ix, to) <= ratio(t.ix + 1, level) && ratio(t.ix, level) <= ratio(u.ix + 1, to)
                    && ratio(u.iy, to) <= ratio(t.iy + 1, level) && ratio(t.iy, level) <= ratio(u.iy + 1, to)
            };
            prop_assert!(got.iter().all(|u| touches(&u)));
            let lo = |r: &RangeInclusive<u32>| r.start().saturating_sub(1);
            let probe = TileRange { level: to, ix: lo(&got.ix)..=got.ix.end() + 1, iy: lo(&got.iy)..=got.iy.end() + 1 };
            for u in probe.iter() {
                prop_assert_eq!(got.contains(&u), touches(&u));
            }
        }
    }
}
