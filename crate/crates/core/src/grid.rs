//! Finite-resolution sets: sorted lists of cells of one M-adic grid.
//!
//! Text form:
//!
//! ```text
//! GRIDSET 1
//! <d> <M> <depth> <count>
//! <i_1> [<i_2> [<i_3>]]      one line per cell, `count` lines
//! ```
//!
//! Binary form (little endian): magic `GSET`, version byte `1`, `d` (u8),
//! `M` (u32), `depth` (u32), `count` (u64), then `count * d` u64 indices.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{cell_center, cell_side, grid_extent, validate_grid, Cell, Point3};

pub type CellIndex = [u64; 3];

const TEXT_MAGIC: &str = "GRIDSET 1";
const BINARY_MAGIC: &[u8; 4] = b"GSET";
const BINARY_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    dim: u8,
    base: u32,
    depth: u32,
    cells: Vec<CellIndex>,
}

impl GridSet {
    /// Builds a set from arbitrary cell indices; they are sorted and
    /// deduplicated. Indices must lie in `[0, M^depth)`.
    pub fn new(dim: u8, base: u32, depth: u32, mut cells: Vec<CellIndex>) -> Result<Self> {
        validate_grid(dim, base, depth)?;
        let n = grid_extent(base, depth)?;
        for c in &cells {
            for (k, &i) in c.iter().enumerate() {
                if (k < dim as usize && i >= n) || (k >= dim as usize && i != 0) {
                    return Err(Error::param(
                        "cells",
                        format!("index {c:?} outside the {dim}-d grid of extent {n}"),
                    ));
                }
            }
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(GridSet {
            dim,
            base,
            depth,
            cells,
        })
    }

    pub fn empty(dim: u8, base: u32, depth: u32) -> Result<Self> {
        GridSet::new(dim, base, depth, Vec::new())
    }

    /// Already sorted, deduplicated and in range.
    pub(crate) fn from_sorted_unchecked(dim: u8, base: u32, depth: u32, cells: Vec<CellIndex>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        GridSet {
            dim,
            base,
            depth,
            cells,
        }
    }

    /// Every cell of the grid.
    pub fn full(dim: u8, base: u32, depth: u32) -> Result<Self> {
        let pattern: Vec<u32> = (0..base).collect();
        crate::construct::generate_cantor_product(dim, base, &pattern, depth)
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellIndex] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> Cell {
        Cell {
            dim: self.dim,
            base: self.base,
            depth: self.depth,
            index: self.cells[i],
        }
    }

    pub fn cell_side(&self) -> f64 {
        cell_side(self.base, self.depth)
    }

    /// Diameter of a single cell, `sqrt(d) * M^-depth`.
    pub fn cell_diameter(&self) -> f64 {
        self.cell_side() * (self.dim as f64).sqrt()
    }

    pub fn contains(&self, index: &CellIndex) -> bool {
        self.cells.binary_search(index).is_ok()
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = Point3> + '_ {
        let side = self.cell_side();
        let dim = self.dim;
        self.cells.iter().map(move |c| cell_center(c, dim, side))
    }

    /// Upper bound on the diameter of the union of cells: the diagonal of
    /// their bounding box (never more than `sqrt(d)`).
    pub fn diameter_bound(&self) -> f64 {
        let Some((lo, hi)) = self.index_bounds() else {
            return 0.0;
        };
        let side = self.cell_side();
        (0..self.dim as usize)
            .map(|k| ((hi[k] - lo[k] + 1) as f64 * side).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise min and max cell index.
    pub fn index_bounds(&self) -> Option<(CellIndex, CellIndex)> {
        let first = *self.cells.first()?;
        let mut lo = first;
        let mut hi = first;
        for c in &self.cells {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        Some((lo, hi))
    }

    /// The set of depth-`level` ancestors.
    pub fn truncate(&self, level: u32) -> Result<GridSet> {
        if level > self.depth {
            return Err(Error::param("level", format!("{level} exceeds depth {}", self.depth)));
        }
        let div = grid_extent(self.base, self.depth - level)?;
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let mut p = [0; 3];
                for k in 0..self.dim as usize {
                    p[k] = c[k] / div;
                }
                p
            })
            .collect();
        GridSet::new(self.dim, self.base, level, cells)
    }

    /// Number of ancestors at `level`, i.e. the occupied `M^-level`-boxes.
    pub fn ancestor_count(&self, level: u32) -> Result<usize> {
        Ok(self.truncate(level)?.len())
    }

    /// Number of cells whose index lies in the half-open box `[lo, hi)`.
    pub fn count_in_box(&self, lo: &[i64; 3], hi: &[i64; 3]) -> u64 {
        let d = self.dim as usize;
        let mut clo = [0u64; 3];
        let mut chi = [0u64; 3];
        let ext = grid_extent(self.base, self.depth).unwrap_or(u64::MAX) as i64;
        for k in 0..d {
            let a = lo[k].clamp(0, ext);
            let b = hi[k].clamp(0, ext);
            if a >= b {
                return 0;
            }
            clo[k] = a as u64;
            chi[k] = b as u64;
        }
        count_rec(&self.cells, 0, d, &clo, &chi)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TEXT_MAGIC}")?;
        writeln!(w, "{} {} {} {}", self.dim, self.base, self.depth, self.cells.len())?;
        for c in &self.cells {
            match self.dim {
                1 => writeln!(w, "{}", c[0])?,
                2 => writeln!(w, "{} {}", c[0], c[1])?,
                _ => writeln!(w, "{} {} {}", c[0], c[1], c[2])?,
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<GridSet> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(u64, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i as u64 + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i as u64 + 1,
                    message: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected end of input, expected {what}"),
                }),
            }
        };
        let (ln, magic) = next("header")?;
        if magic.trim() != TEXT_MAGIC {
            return Err(Error::Parse {
                line: ln,
                message: format!("expected `{TEXT_MAGIC}`"),
            });
        }
        let (ln, header) = next("dimensions line")?;
        let fields: Vec<u64> = parse_u64s(&header, ln)?;
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: ln,
                message: "expected `d M depth count`".into(),
            });
        }
        let (dim, base, depth, count) = (fields[0], fields[1], fields[2], fields[3]);
        if dim == 0 || dim > 3 || base > u32::MAX as u64 || depth > u32::MAX as u64 {
            return Err(Error::Parse {
                line: ln,
                message: "header values out of range".into(),
            });
        }
        let mut cells = Vec::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            let (ln, line) = next("cell index")?;
            let v = parse_u64s(&line, ln)?;
            if v.len() != dim as usize {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected {dim} indices, found {}", v.len()),
                });
            }
            let mut c = [0; 3];
            c[..v.len()].copy_from_slice(&v);
            cells.push(c);
        }
        let set = GridSet::new(dim as u8, base as u32, depth as u32, cells)?;
        if set.len() as u64 != count {
            return Err(Error::Parse {
                line: 2,
                message: "duplicate cells in input".into(),
            });
        }
        Ok(set)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&[BINARY_VERSION, self.dim])?;
        w.write_all(&self.base.to_le_bytes())?;
        w.write_all(&self.depth.to_le_bytes())?;
        w.write_all(&(self.cells.len() as u64).to_le_bytes())?;
        for c in &self.cells {
            for &i in &c[..self.dim as usize] {
                w.write_all(&i.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(22 + 8 * self.dim as usize * self.cells.len());
        self.write_binary(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<GridSet> {
        let bad = |m: &str| Error::Parse {
            line: 0,
            message: m.to_string(),
        };
        let mut head = [0u8; 22];
        r.read_exact(&mut head).map_err(|_| bad("truncated header"))?;
        if &head[0..4] != BINARY_MAGIC {
            return Err(bad("bad magic"));
        }
        if head[4] != BINARY_VERSION {
            return Err(bad("unsupported version"));
        }
        let dim = head[5];
        if dim == 0 || dim > 3 {
            return Err(bad("dimension out of range"));
        }
        let base = u32::from_le_bytes(head[6..10].try_into().unwrap());
        let depth = u32::from_le_bytes(head[10..14].try_into().unwrap());
        let count = u64::from_le_bytes(head[14..22].try_into().unwrap());
        let mut cells = Vec::with_capacity(count.min(1 << 24) as usize);
        let mut word = [0u8; 8];
        for _ in 0..count {
            let mut c = [0u64; 3];
            for slot in c.iter_mut().take(dim as usize) {
                r.read_exact(&mut word).map_err(|_| bad("truncated cell list"))?;
                *slot = u64::from_le_bytes(word);
            }
            cells.push(c);
        }
        GridSet::new(dim, base, depth, cells)
    }
}

fn parse_u64s(line: &str, ln: u64) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u64>().map_err(|e| Error::Parse {
                line: ln,
                message: format!("`{t}`: {e}"),
            })
        })
        .collect()
}

// Cells are sorted lexicographically, so each coordinate range is a
// contiguous run once the earlier coordinates are fixed.
fn count_rec(cells: &[CellIndex], k: usize, d: usize, lo: &[u64; 3], hi: &[u64; 3]) -> u64 {
    let start = cells.partition_point(|c| c[k] < lo[k]);
    let end = cells.partition_point(|c| c[k] < hi[k]);
    let run = &cells[start..end];
    if k + 1 == d {
        return run.len() as u64;
    }
    let mut total = 0;
    let mut i = 0;
    while i < run.len() {
        let v = run[i][k];
        let j = i + run[i..].partition_point(|c| c[k] == v);
        total += count_rec(&run[i..j], k + 1, d, lo, hi);
        i = j;
    }
    total
}
