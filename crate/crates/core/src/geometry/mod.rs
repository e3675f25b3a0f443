//! Directional neighborhoods and the cone calculus for boxes and the graph
//! of their normal-cone map.

mod cone;
mod graph;

use serde::{Deserialize, Serialize};

pub use cone::{ConeUnion, PolyCone, SignedCoordinateCone, Tag, MAX_DD_DIM, MEMBER_TOL};
pub use graph::{
    critical_cone, directional_graph_normal_interval, directional_normal_convex_box, graph_normal_box,
    graph_pieces_interval, graph_tangent_box, interval_graph_tangent, limiting_graph_normal_interval,
    graph_normal_box_pieces, graph_tangent_box_pieces, normal_cone_box, tangent_cone_box, GraphPiece,
    BOUND_TOL, ZERO_TOL,
};

use crate::linalg::{dist, norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub v: Vec<f64>,
    pub zero: bool,
}

impl Direction {
    pub fn new(v: Vec<f64>) -> Direction {
        let zero = norm(&v) == 0.0;
        Direction { v, zero }
    }

    pub fn unit(&self) -> Option<Vec<f64>> {
        crate::linalg::normalized(&self.v)
    }
}

/// `center + V_{ε,δ}(d)`: the open ε-ball when d = 0, otherwise the center
/// together with the part of the open ε-ball whose unit directions lie within
/// δ of d/‖d‖.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalNeighborhood {
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub direction: Direction,
}

impl DirectionalNeighborhood {
    pub fn new(center: Vec<f64>, epsilon: f64, delta: f64, direction: Vec<f64>) -> Self {
        assert!(epsilon > 0.0 && delta > 0.0, "moduli must be positive");
        DirectionalNeighborhood { center, epsilon, delta, direction: Direction::new(direction) }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        nbhd_contains(self, z)
    }
}

pub fn nbhd_contains(nb: &DirectionalNeighborhood, z: &[f64]) -> bool {
    let h: Vec<f64> = z.iter().zip(&nb.center).map(|(a, b)| a - b).collect();
    let r = norm(&h);
    if r == 0.0 {
        return true;
    }
    if r >= nb.epsilon {
        return false;
    }
    match nb.direction.unit() {
        None => true,
        Some(d) => {
            let hu: Vec<f64> = h.iter().map(|v| v / r).collect();
            dist(&hu, &d) <= nb.delta
        }
    }
}
