//! Taylor-Hood (P2 velocity, P1 pressure) degree-of-freedom numbering.
//!
//! Global layout of a coefficient vector:
//! `[u_x at P2 nodes | u_y at P2 nodes | p at vertices]`.
//! P2 nodes are the mesh vertices followed by the edge midpoints, numbered
//! in order of first appearance while sweeping the triangles.

use std::collections::HashMap;

use super::mesh::{classify, BoundaryTag, Mesh};
use super::quadrature::P2_EDGES;

#[derive(Debug, Clone)]
pub struct DofMap {
    num_vertices: usize,
    num_p2: usize,
    p2_coords: Vec<[f64; 2]>,
    p2_tags: Vec<BoundaryTag>,
    element_p2: Vec<[usize; 6]>,
    element_p1: Vec<[usize; 3]>,
    pressure_pin: usize,
}

/// Fixed degrees of freedom with their prescribed values (full length).
#[derive(Debug, Clone)]
pub struct DirichletData {
    pub fixed: Vec<bool>,
    pub values: Vec<f64>,
}

impl DofMap {
    pub fn taylor_hood(mesh: &Mesh) -> Self {
        let nv = mesh.num_vertices();
        let mut p2_coords: Vec<[f64; 2]> = mesh.nodes().to_vec();
        let mut p2_tags: Vec<BoundaryTag> = mesh.boundary_tags().to_vec();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_p2 = Vec::with_capacity(mesh.num_triangles());
        for tri in mesh.triangles() {
            let mut local = [tri[0], tri[1], tri[2], 0, 0, 0];
            for (e, &(i, j)) in P2_EDGES.iter().enumerate() {
                let (a, b) = (tri[i], tri[j]);
                let key = (a.min(b), a.max(b));
                let next = p2_coords.len();
                let id = *edge_ids.entry(key).or_insert(next);
                if id == next {
                    let (pa, pb) = (mesh.nodes()[a], mesh.nodes()[b]);
                    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    p2_coords.push(mid);
                    p2_tags.push(classify(mid[0], mid[1]));
                }
                local[3 + e] = id;
            }
            element_p2.push(local);
        }
        let num_p2 = p2_coords.len();
        Self {
            num_vertices: nv,
            num_p2,
            p2_coords,
            p2_tags,
            element_p2,
            element_p1: mesh.triangles().to_vec(),
            pressure_pin: 2 * num_p2,
        }
    }

    pub fn num_p2_nodes(&self) -> usize {
        self.num_p2
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.num_vertices
    }

    pub fn num_velocity_dofs(&self) -> usize {
        2 * self.num_p2
    }

    /// Velocity plus pressure unknowns, boundary nodes included.
    pub fn total_dofs(&self) -> usize {
        2 * self.num_p2 + self.num_vertices
    }

    pub fn velocity_dof(&self, node: usize, component: usize) -> usize {
        component * self.num_p2 + node
    }

    pub fn pressure_dof(&self, vertex: usize) -> usize {
        2 * self.num_p2 + vertex
    }

    /// Pressure unknown pinned to zero before the mean is projected out.
    pub fn pressure_pin(&self) -> usize {
        self.pressure_pin
    }

    pub fn p2_coords(&self) -> &[[f64; 2]] {
        &self.p2_coords
    }

    pub fn p2_tags(&self) -> &[BoundaryTag] {
        &self.p2_tags
    }

    pub fn element_p2(&self, t: usize) -> &[usize; 6] {
        &self.element_p2[t]
    }

    pub fn element_p1(&self, t: usize) -> &[usize; 3] {
        &self.element_p1[t]
    }

    pub fn num_elements(&self) -> usize {
        self.element_p2.len()
    }

    /// The 15 element unknowns in local order `[u_x(6), u_y(6), p(3)]`.
    pub fn element_dofs(&self, t: usize) -> [usize; 15] {
        let p2 = &self.element_p2[t];
        let p1 = &self.element_p1[t];
        let mut d = [0usize; 15];
        for a in 0..6 {
            d[a] = p2[a];
            d[6 + a] = self.num_p2 + p2[a];
        }
        for q in 0..3 {
            d[12 + q] = 2 * self.num_p2 + p1[q];
        }
        d
    }

    /// True on velocity entries, false on pressure entries.
    pub fn velocity_mask(&self) -> Vec<bool> {
        let mut m = vec![true; self.total_dofs()];
        for v in &mut m[2 * self.num_p2..] {
            *v = false;
        }
        m
    }

    /// Velocity unknowns on the boundary plus the pinned pressure, with
    /// values taken from `bc`.
    pub fn dirichlet<F>(&self, bc: F) -> DirichletData
    where
        F: Fn(BoundaryTag, f64, f64) -> [f64; 2],
    {
        let n = self.total_dofs();
        let mut fixed = vec![false; n];
        let mut values = vec![0.0; n];
        for (node, (&tag, &[x, y])) in self.p2_tags.iter().zip(&self.p2_coords).enumerate() {
            if tag == BoundaryTag::Interior {
                continue;
            }
            let g = bc(tag, x, y);
            for (c, gc) in g.into_iter().enumerate() {
                let d = self.velocity_dof(node, c);
                fixed[d] = true;
                values[d] = gc;
            }
        }
        fixed[self.pressure_pin] = true;
        values[self.pressure_pin] = 0.0;
        DirichletData { fixed, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem2d::mesh::build_cavity_mesh;

    #[test]
    fn dof_count_matches_taylor_hood_formula() {
        for n in [2usize, 3, 8] {
            let d = DofMap::taylor_hood(&build_cavity_mesh(n).unwrap());
            let p2 = (2 * n + 1).pow(2);
            assert_eq!(d.num_p2_nodes(), p2);
            assert_eq!(d.total_dofs(), 2 * p2 + (n + 1).pow(2));
        }
    }

    #[test]
    fn midpoints_sit_on_edges() {
        let m = build_cavity_mesh(3).unwrap();
        let d = DofMap::taylor_hood(&m);
        for t in 0..d.num_elements() {
            let p2 = d.element_p2(t);
            for (e, &(i, j)) in P2_EDGES.iter().enumerate() {
                let (a, b) = (d.p2_coords()[p2[i]], d.p2_coords()[p2[j]]);
                let mid = d.p2_coords()[p2[3 + e]];
                assert!((mid[0] - 0.5 * (a[0] + b[0])).abs() < 1e-15);
                assert!((mid[1] - 0.5 * (a[1] + b[1])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lid_tags_on_top_edge_only() {
        let d = DofMap::taylor_hood(&build_cavity_mesh(4).unwrap());
        for (&tag, &[x, y]) in d.p2_tags().iter().zip(d.p2_coords()) {
            match tag {
                BoundaryTag::Lid => assert_eq!(y, 1.0),
                BoundaryTag::Wall => assert!(y < 1.0 && (x == 0.0 || x == 1.0 || y == 0.0)),
                BoundaryTag::Interior => assert!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0),
            }
        }
        // 2n+1 lid nodes on the top edge
        assert_eq!(d.p2_tags().iter().filter(|t| **t == BoundaryTag::Lid).count(), 9);
    }
}
