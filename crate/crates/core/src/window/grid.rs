//! Dense dyadic cell grids: the box covers that approximate windows.
//!
//! A cell at depth `g` is the half-open cube `[i * 2^-g, (i+1) * 2^-g)` per
//! axis; grids store occupancy bits over an integer bounding box. All
//! set operations are order-free, so results never depend on iteration
//! schedules.

/// Occupancy grid over an axis-aligned box of cells at one dyadic depth.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    depth: u32,
    dim: usize,
    lo: Vec<i64>,
    shape: Vec<usize>,
    bits: Vec<bool>,
}

impl CellGrid {
    pub fn new(depth: u32, dim: usize, lo: Vec<i64>, shape: Vec<usize>) -> Self {
        assert_eq!(lo.len(), dim);
        assert_eq!(shape.len(), dim);
        let len = shape.iter().product();
        CellGrid { depth, dim, lo, shape, bits: vec![false; len] }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_width(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn flat(&self, cell: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for d in 0..self.dim {
            let off = cell[d] - self.lo[d];
            if off < 0 || off as usize >= self.shape[d] {
                return None;
            }
            idx = idx * self.shape[d] + off as usize;
        }
        Some(idx)
    }

    pub fn get(&self, cell: &[i64]) -> bool {
        self.flat(cell).is_some_and(|i| self.bits[i])
    }

    pub fn set(&mut self, cell: &[i64]) -> bool {
        match self.flat(cell) {
            Some(i) => {
                let was = self.bits[i];
                self.bits[i] = true;
                !was
            }
            None => false,
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Lebesgue measure of the union of occupied cells.
    pub fn measure(&self) -> f64 {
        self.occupied_count() as f64 * self.cell_width().powi(self.dim as i32)
    }

    /// Visits occupied cells in lexicographic order without allocating.
    pub fn for_each_occupied(&self, mut f: impl FnMut(&[i64])) {
        if self.bits.is_empty() {
            return;
        }
        let mut cell = self.lo.clone();
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                f(&cell);
            }
            if i + 1 < self.bits.len() {
                // odometer increment over the box
                for d in (0..self.dim).rev() {
                    cell[d] += 1;
                    if cell[d] - self.lo[d] < self.shape[d] as i64 {
                        break;
                    }
                    cell[d] = self.lo[d];
                }
            }
        }
    }

    /// Occupied cells in lexicographic order.
    pub fn occupied_cells(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.occupied_count());
        self.for_each_occupied(|cell| out.push(cell.to_vec()));
        out
    }

    /// Cells whose closed cube intersects `[min, max]` (component-wise);
    /// the box is clamped to the grid. Allocation-free: this is the inner
    /// loop of the attractor iteration.
    pub fn mark_box(&mut self, min: &[f64], max: &[f64]) {
        const MAX_DIM: usize = 8;
        assert!(self.dim <= MAX_DIM, "grids support at most 8 dimensions");
        let h = self.cell_width();
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for d in 0..self.dim {
            // clamp to the box so out-of-grid marks drop silently
            lo[d] = ((min[d] / h).floor() as i64).max(self.lo[d]);
            hi[d] = ((max[d] / h).floor() as i64).min(self.lo[d] + self.shape[d] as i64 - 1);
            if lo[d] > hi[d] {
                return;
            }
        }
        match self.dim {
            1 => {
                let base = (lo[0] - self.lo[0]) as usize;
                let end = (hi[0] - self.lo[0]) as usize;
                self.bits[base..=end].fill(true);
            }
            2 => {
                let cols = self.shape[1];
                for r in lo[0]..=hi[0] {
                    let row = (r - self.lo[0]) as usize * cols;
                    let a = row + (lo[1] - self.lo[1]) as usize;
                    let b = row + (hi[1] - self.lo[1]) as usize;
                    self.bits[a..=b].fill(true);
                }
            }
            _ => {
                let mut cell = [0i64; MAX_DIM];
                cell[..self.dim].copy_from_slice(&lo[..self.dim]);
                loop {
                    let mut idx = 0usize;
                    for d in 0..self.dim {
                        idx = idx * self.shape[d] + (cell[d] - self.lo[d]) as usize;
                    }
                    self.bits[idx] = true;
                    let mut d = self.dim;
                    loop {
                        if d == 0 {
                            return;
                        }
                        d -= 1;
                        cell[d] += 1;
                        if cell[d] <= hi[d] {
                            break;
                        }
                        cell[d] = lo[d];
                    }
                }
            }
        }
    }

    pub fn mark_point(&mut self, point: &[f64]) -> bool {
        let h = self.cell_width();
        let cell: Vec<i64> = point.iter().map(|&x| (x / h).floor() as i64).collect();
        self.set(&cell)
    }

    pub fn contains_point(&self, point: &[f64]) -> bool {
        let h = self.cell_width();
        let cell: Vec<i64> = point.iter().map(|&x| (x / h).floor() as i64).collect();
        self.get(&cell)
    }

    /// Bounding box of the occupied cells, as (lo, hi) inclusive.
    pub fn occupied_bbox(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut lo: Option<Vec<i64>> = None;
        let mut hi: Option<Vec<i64>> = None;
        self.for_each_occupied(|cell| match (&mut lo, &mut hi) {
            (Some(l), Some(h)) => {
                for d in 0..self.dim {
                    l[d] = l[d].min(cell[d]);
                    h[d] = h[d].max(cell[d]);
                }
            }
            _ => {
                lo = Some(cell.to_vec());
                hi = Some(cell.to_vec());
            }
        });
        lo.zip(hi)
    }

    /// Number of occupied cells with at least one unoccupied face neighbor.
    pub fn boundary_count(&self) -> usize {
        let mut count = 0;
        let mut nb = vec![0i64; self.dim];
        self.for_each_occupied(|cell| {
            let mut is_boundary = false;
            for d in 0..self.dim {
                for s in [-1i64, 1] {
                    nb.copy_from_slice(cell);
                    nb[d] += s;
                    if !self.get(&nb) {
                        is_boundary = true;
                    }
                }
            }
            if is_boundary {
                count += 1;
            }
        });
        count
    }

    /// Keeps cells whose full Chebyshev-`k` neighborhood is occupied.
    pub fn erode(&self, k: u32) -> CellGrid {
        let mut out = CellGrid::new(self.depth, self.dim, self.lo.clone(), self.shape.clone());
        let k = k as i64;
        let mut nb = vec![0i64; self.dim];
        let mut keep: Vec<Vec<i64>> = vec![];
        self.for_each_occupied(|cell| {
            if self.erode_check(0, cell, &mut nb, k) {
                keep.push(cell.to_vec());
            }
        });
        for cell in keep {
            out.set(&cell);
        }
        out
    }

    fn erode_check(&self, at: usize, cell: &[i64], nb: &mut Vec<i64>, k: i64) -> bool {
        if at == self.dim {
            return self.get(nb);
        }
        for d in -k..=k {
            nb[at] = cell[at] + d;
            if !self.erode_check(at + 1, cell, nb, k) {
                return false;
            }
        }
        true
    }

    /// Marks every cell within Chebyshev distance `k` of an occupied cell.
    pub fn dilate(&self, k: u32) -> CellGrid {
        let k = k as i64;
        let lo: Vec<i64> = self.lo.iter().map(|&l| l - k).collect();
        let shape: Vec<usize> = self.shape.iter().map(|&s| s + 2 * k as usize).collect();
        let mut out = CellGrid::new(self.depth, self.dim, lo, shape);
        let mut nb = vec![0i64; self.dim];
        let mut cells: Vec<Vec<i64>> = vec![];
        self.for_each_occupied(|cell| cells.push(cell.to_vec()));
        for cell in cells {
            dilate_rec(&mut out, 0, &cell, &mut nb, k);
        }
        out
    }

    /// Intersection on the common box (same depth required).
    pub fn intersect(&self, other: &CellGrid) -> CellGrid {
        assert_eq!(self.depth, other.depth);
        let mut out = CellGrid::new(self.depth, self.dim, self.lo.clone(), self.shape.clone());
        let mut cells: Vec<Vec<i64>> = vec![];
        self.for_each_occupied(|cell| {
            if other.get(cell) {
                cells.push(cell.to_vec());
            }
        });
        for cell in cells {
            out.set(&cell);
        }
        out
    }

    /// True when every occupied cell of `self` is occupied in `other`.
    pub fn subset_of(&self, other: &CellGrid) -> bool {
        let mut ok = true;
        self.for_each_occupied(|cell| {
            if ok && !other.get(cell) {
                ok = false;
            }
        });
        ok
    }

    /// Children of the occupied cells at depth + 1.
    pub fn refine(&self) -> CellGrid {
        let lo: Vec<i64> = self.lo.iter().map(|&l| 2 * l).collect();
        let shape: Vec<usize> = self.shape.iter().map(|&s| 2 * s).collect();
        let mut out = CellGrid::new(self.depth + 1, self.dim, lo, shape);
        let mut cells: Vec<Vec<i64>> = vec![];
        self.for_each_occupied(|cell| cells.push(cell.to_vec()));
        let mut child = vec![0i64; self.dim];
        for cell in cells {
            refine_rec(&mut out, 0, &cell, &mut child);
        }
        out
    }
}

fn dilate_rec(out: &mut CellGrid, at: usize, cell: &[i64], nb: &mut Vec<i64>, k: i64) {
    if at == cell.len() {
        out.set(nb);
        return;
    }
    for d in -k..=k {
        nb[at] = cell[at] + d;
        dilate_rec(out, at + 1, cell, nb, k);
    }
}

fn refine_rec(out: &mut CellGrid, at: usize, cell: &[i64], child: &mut Vec<i64>) {
    if at == cell.len() {
        out.set(child);
        return;
    }
    for d in 0..2 {
        child[at] = 2 * cell[at] + d;
        refine_rec(out, at + 1, cell, child);
    }
}

/// Symmetric Hausdorff distance between two covers in cell units
/// (Chebyshev metric), computed by iterated dilation. Returns `cap + 1`
/// when the distance exceeds `cap`, and `None` when one side is empty.
pub fn hausdorff_cells(a: &CellGrid, b: &CellGrid, cap: u32) -> Option<u32> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    for k in 0..=cap {
        let da = if k == 0 { a.clone() } else { a.dilate(k) };
        let db = if k == 0 { b.clone() } else { b.dilate(k) };
        if a.subset_of(&db) && b.subset_of(&da) {
            return Some(k);
        }
    }
    Some(cap + 1)
}
