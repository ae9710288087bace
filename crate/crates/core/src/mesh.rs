use crate::error::{Error, Result};

/// Uniform simplicial mesh of the unit interval or unit square.
///
/// Nodes are ordered lexicographically with the first coordinate fastest:
/// node `(i, j)` has index `j·(n+1) + i` and sits at `(i/n, j/n)`. Each square
/// cell is split along its `(i, j)`–`(i+1, j+1)` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    n: usize,
    nodes: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
}

pub fn build_mesh(dim: usize, n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 cells per axis, got {n}")));
    }
    let h = 1.0 / n as f64;
    match dim {
        1 => {
            let nodes = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
            let cells = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
            Ok(Mesh { dim, n, nodes, cells })
        }
        2 => {
            let stride = n + 1;
            let mut nodes = Vec::with_capacity(stride * stride);
            for j in 0..=n {
                for i in 0..=n {
                    nodes.push([i as f64 * h, j as f64 * h]);
                }
            }
            let mut cells = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let v00 = j * stride + i;
                    let v10 = v00 + 1;
                    let v01 = v00 + stride;
                    let v11 = v01 + 1;
                    cells.push([v00, v10, v11]);
                    cells.push([v00, v11, v01]);
                }
            }
            Ok(Mesh { dim, n, nodes, cells })
        }
        _ => Err(Error::invalid("dim", format!("{dim} is not 1 or 2"))),
    }
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Node coordinates; only the first `dim` entries are meaningful.
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i][..self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.iter().map(move |p| &p[..self.dim])
    }

    /// Vertex indices of cell `c` (`dim + 1` of them).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.iter().map(move |c| &c[..self.dim + 1])
    }

    /// Signed length/area of a cell.
    pub fn measure(&self, c: usize) -> f64 {
        let v = self.cell(c);
        match self.dim {
            1 => self.nodes[v[1]][0] - self.nodes[v[0]][0],
            _ => {
                let [p0, p1, p2] = [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]];
                0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
            }
        }
    }

    pub fn centroid(&self, c: usize) -> [f64; 2] {
        let v = self.cell(c);
        let k = v.len() as f64;
        let mut p = [0.0; 2];
        for &i in v {
            p[0] += self.nodes[i][0] / k;
            p[1] += self.nodes[i][1] / k;
        }
        p
    }

    /// Cell containing point `x` (points on shared edges go to the lower cell).
    pub fn locate(&self, x: &[f64]) -> usize {
        let n = self.n;
        let idx = |t: f64| ((t * n as f64).floor().max(0.0) as usize).min(n - 1);
        match self.dim {
            1 => idx(x[0]),
            _ => {
                let (i, j) = (idx(x[0]), idx(x[1]));
                let h = self.h();
                let (lx, ly) = (x[0] - i as f64 * h, x[1] - j as f64 * h);
                let base = 2 * (j * n + i);
                // lower-right triangle lies below the diagonal
                if lx >= ly {
                    base
                } else {
                    base + 1
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let m = build_mesh(1, 40).unwrap();
        assert_eq!((m.node_count(), m.cell_count()), (41, 40));
        let m = build_mesh(2, 40).unwrap();
        assert_eq!((m.node_count(), m.cell_count()), (1681, 3200));
    }

    #[test]
    fn small_square_cells() {
        let m = build_mesh(2, 2).unwrap();
        assert_eq!((m.node_count(), m.cell_count()), (9, 8));
        for c in 0..m.cell_count() {
            assert!((m.measure(c) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn measures_sum_to_one() {
        for dim in [1, 2] {
            let m = build_mesh(dim, 7).unwrap();
            let total: f64 = (0..m.cell_count()).map(|c| m.measure(c)).sum();
            assert!((total - 1.0).abs() < 1e-13);
            assert!((0..m.cell_count()).all(|c| m.measure(c) > 0.0));
        }
    }

    #[test]
    fn rejects_tiny_or_bad() {
        assert!(build_mesh(1, 1).is_err());
        assert!(build_mesh(3, 4).is_err());
    }

    #[test]
    fn locate_centroids() {
        let m = build_mesh(2, 5).unwrap();
        for c in 0..m.cell_count() {
            assert_eq!(m.locate(&m.centroid(c)), c);
        }
        let m = build_mesh(1, 5).unwrap();
        assert_eq!(m.locate(&[1.0]), 4);
        assert_eq!(m.locate(&[0.0]), 0);
    }
}
