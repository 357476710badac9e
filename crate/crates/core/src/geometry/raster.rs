//! Dense bitmaps over a cell-index window, and connectivity on them.

use super::{Cell, CellSet};
use std::collections::VecDeque;

pub const N8: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
pub const N4: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitmap {
    pub min_x: i32,
    pub min_y: i32,
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(min_x: i32, min_y: i32, width: usize, height: usize) -> Self {
        Self { min_x, min_y, width, height, bits: vec![false; width * height] }
    }

    /// Bitmap of `cells`, padded by `pad` empty cells on every side.
    pub fn from_cells(cells: &CellSet, pad: i32) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for c in cells {
            x0 = x0.min(c.x);
            y0 = y0.min(c.y);
            x1 = x1.max(c.x);
            y1 = y1.max(c.y);
        }
        if cells.is_empty() {
            return Self::new(0, 0, 0, 0);
        }
        let mut b = Self::new(
            x0 - pad,
            y0 - pad,
            (x1 - x0 + 1 + 2 * pad) as usize,
            (y1 - y0 + 1 + 2 * pad) as usize,
        );
        for c in cells {
            b.set(c.x, c.y, true);
        }
        b
    }

    #[inline]
    fn index(&self, x: i32, y: i32) -> Option<usize> {
        let (dx, dy) = (x - self.min_x, y - self.min_y);
        if dx < 0 || dy < 0 || dx as usize >= self.width || dy as usize >= self.height {
            None
        } else {
            Some(dy as usize * self.width + dx as usize)
        }
    }

    #[inline]
    pub fn get(&self, x: i32, y: i32) -> bool {
        self.index(x, y).map_or(false, |i| self.bits[i])
    }

    #[inline]
    pub fn set(&mut self, x: i32, y: i32, v: bool) {
        if let Some(i) = self.index(x, y) {
            self.bits[i] = v;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn cells(&self) -> CellSet {
        let mut out = CellSet::new();
        for j in 0..self.height {
            for i in 0..self.width {
                if self.bits[j * self.width + i] {
                    out.insert(Cell::new(self.min_x + i as i32, self.min_y + j as i32));
                }
            }
        }
        out
    }

    /// Number of set 8-neighbours of `(x, y)`.
    pub fn neighbour_count(&self, x: i32, y: i32) -> usize {
        N8.iter().filter(|(dx, dy)| self.get(x + dx, y + dy)).count()
    }

    /// Labels of the 8-connected components of the set cells, in raster
    /// order of their first cell. Returns `(labels, count)` where unset
    /// cells carry `usize::MAX`.
    pub fn label_components(&self) -> (Vec<usize>, usize) {
        let mut labels = vec![usize::MAX; self.bits.len()];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                let (x, y) = ((k % self.width) as i32, (k / self.width) as i32);
                for (dx, dy) in N8 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
                        continue;
                    }
                    let nk = ny as usize * self.width + nx as usize;
                    if self.bits[nk] && labels[nk] == usize::MAX {
                        labels[nk] = next;
                        queue.push_back(nk);
                    }
                }
            }
            next += 1;
        }
        (labels, next)
    }

    /// Number of 4-connected components of the unset cells, the outer
    /// padding included as one component.
    pub fn background_components(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.bits.len() {
            if self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(k) = queue.pop_front() {
                let (x, y) = ((k % self.width) as i32, (k / self.width) as i32);
                for (dx, dy) in N4 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
                        continue;
                    }
                    let nk = ny as usize * self.width + nx as usize;
                    if !self.bits[nk] && !seen[nk] {
                        seen[nk] = true;
                        queue.push_back(nk);
                    }
                }
            }
        }
        count
    }
}

/// The 8-connected components of a cell set, largest first (ties broken by
/// the smallest cell).
pub fn components(cells: &CellSet) -> Vec<CellSet> {
    if cells.is_empty() {
        return Vec::new();
    }
    let bm = Bitmap::from_cells(cells, 0);
    let (labels, n) = bm.label_components();
    let mut out = vec![CellSet::new(); n];
    for (k, &l) in labels.iter().enumerate() {
        if l != usize::MAX {
            let (x, y) = ((k % bm.width) as i32, (k / bm.width) as i32);
            out[l].insert(Cell::new(bm.min_x + x, bm.min_y + y));
        }
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.first().cmp(&b.first())));
    out
}

pub fn is_connected(cells: &CellSet) -> bool {
    !cells.is_empty() && components(cells).len() == 1
}

/// Cells of `within` at Chebyshev distance at most one from `cells`.
pub fn dilate_within(cells: &CellSet, within: &CellSet) -> CellSet {
    let mut out = cells.clone();
    for c in cells {
        for (dx, dy) in N8 {
            let n = Cell::new(c.x + dx, c.y + dy);
            if within.contains(&n) {
                out.insert(n);
            }
        }
    }
    out
}

/// Cells at Chebyshev distance at most one from `cells`, unrestricted.
pub fn dilate(cells: &CellSet) -> CellSet {
    let mut out = cells.clone();
    for c in cells {
        for (dx, dy) in N8 {
            out.insert(Cell::new(c.x + dx, c.y + dy));
        }
    }
    out
}

/// Euler characteristic of the cell union under 8-connectivity for the set
/// and 4-connectivity for its complement: components minus holes.
pub fn euler_characteristic(cells: &CellSet) -> i64 {
    let bm = Bitmap::from_cells(cells, 1);
    let (_, comps) = bm.label_components();
    let holes = bm.background_components() as i64 - 1;
    comps as i64 - holes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pts: &[(i32, i32)]) -> CellSet {
        pts.iter().map(|&(x, y)| Cell::new(x, y)).collect()
    }

    #[test]
    fn diagonal_cells_are_connected() {
        assert!(is_connected(&set(&[(0, 0), (1, 1), (2, 2)])));
        assert_eq!(components(&set(&[(0, 0), (2, 0), (3, 0)])).len(), 2);
    }

    #[test]
    fn ring_has_one_hole() {
        let ring: CellSet = (0..3)
            .flat_map(|x| (0..3).map(move |y| (x, y)))
            .filter(|&(x, y)| !(x == 1 && y == 1))
            .map(|(x, y)| Cell::new(x, y))
            .collect();
        assert_eq!(euler_characteristic(&ring), 0);
        // the diagonal diamond still encloses a 4-connected hole
        assert_eq!(euler_characteristic(&set(&[(1, 0), (0, 1), (2, 1), (1, 2)])), 0);
        assert_eq!(euler_characteristic(&set(&[(0, 0)])), 1);
    }
}
