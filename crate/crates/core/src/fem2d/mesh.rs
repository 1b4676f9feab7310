//! Structured triangulations of the unit square.

use serde::{Deserialize, Serialize};

use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Interior,
    Wall,
    /// Nodes on `y = 1`, top corners included.
    Lid,
}

/// Which diagonal splits each grid square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Forward,
    /// Lower-right to upper-left; the mirror image of `Forward` about `x = 1/2`.
    Backward,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_tags: Vec<BoundaryTag>,
    cells_per_side: usize,
    diagonal: Diagonal,
}

/// Uniform `n × n` grid on `(0,1)²`, each square cut by one diagonal.
pub fn build_cavity_mesh(n: usize) -> Result<Mesh, FemError> {
    Mesh::unit_square(n, Diagonal::Forward)
}

pub(crate) fn classify(x: f64, y: f64) -> BoundaryTag {
    if y == 1.0 {
        BoundaryTag::Lid
    } else if x == 0.0 || x == 1.0 || y == 0.0 {
        BoundaryTag::Wall
    } else {
        BoundaryTag::Interior
    }
}

impl Mesh {
    pub fn unit_square(n: usize, diagonal: Diagonal) -> Result<Self, FemError> {
        if n < 2 {
            return Err(FemError::InvalidMesh(format!("need n >= 2, got {n}")));
        }
        let stride = n + 1;
        let coord = |i: usize| if i == n { 1.0 } else { i as f64 / n as f64 };
        let mut nodes = Vec::with_capacity(stride * stride);
        let mut boundary_tags = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                let (x, y) = (coord(i), coord(j));
                nodes.push([x, y]);
                boundary_tags.push(classify(x, y));
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                match diagonal {
                    Diagonal::Forward => {
                        triangles.push([v00, v10, v11]);
                        triangles.push([v00, v11, v01]);
                    }
                    Diagonal::Backward => {
                        triangles.push([v00, v10, v01]);
                        triangles.push([v10, v11, v01]);
                    }
                }
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_tags,
            cells_per_side: n,
            diagonal,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_tags(&self) -> &[BoundaryTag] {
        &self.boundary_tags
    }

    pub fn num_vertices(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn diagonal(&self) -> Diagonal {
        self.diagonal
    }

    /// Grid spacing `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_side as f64
    }

    /// Signed area; positive for counter-clockwise vertex order.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }
}
