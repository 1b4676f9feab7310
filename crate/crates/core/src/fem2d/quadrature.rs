//! Degree-5 triangle quadrature and the P2/P1 reference bases.

/// Barycentric coordinates and weight (weights sum to one; scale by area).
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Seven-point rule, exact for polynomials of total degree 5.
pub fn triangle_rule_deg5() -> [QuadPoint; 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let b1 = (9.0 + 2.0 * s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let a2 = (6.0 + s) / 21.0;
    let b2 = (9.0 - 2.0 * s) / 21.0;
    let w2 = (155.0 + s) / 1200.0;
    [
        QuadPoint { bary: [1.0 / 3.0; 3], weight: 9.0 / 40.0 },
        QuadPoint { bary: [b1, a1, a1], weight: w1 },
        QuadPoint { bary: [a1, b1, a1], weight: w1 },
        QuadPoint { bary: [a1, a1, b1], weight: w1 },
        QuadPoint { bary: [b2, a2, a2], weight: w2 },
        QuadPoint { bary: [a2, b2, a2], weight: w2 },
        QuadPoint { bary: [a2, a2, b2], weight: w2 },
    ]
}

/// Local P2 node order: three vertices, then midpoints of edges 01, 12, 20.
pub const P2_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients of the P2 basis given the barycentric gradients.
pub fn p2_gradients(l: [f64; 3], dl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        let c = 4.0 * l[i] - 1.0;
        g[i] = [c * dl[i][0], c * dl[i][1]];
    }
    for (e, &(i, j)) in P2_EDGES.iter().enumerate() {
        g[3 + e] = [
            4.0 * (l[i] * dl[j][0] + l[j] * dl[i][0]),
            4.0 * (l[i] * dl[j][1] + l[j] * dl[i][1]),
        ];
    }
    g
}
