//! Planar pin-jointed truss solver (direct stiffness method) and the
//! ten-bar-cantilever dataset generator built on it.
//!
//! Members carry axial force only. Each member contributes
//! `EA/L · [c² cs; cs s²]` blocks to the global stiffness matrix; fixed
//! nodes are eliminated and the reduced system is solved by Cholesky. A
//! Cholesky failure means the reduced matrix is not positive definite,
//! i.e. the structure is a mechanism for some direction of motion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::eval::Dataset;
use crate::learners::linalg;
use crate::space::{lhs_sample, DesignSpace, Normalizer, ParamSpec};

/// Side length of each square bay in the default cantilever, meters.
pub const BAY_M: f64 = 9.144;
/// Aluminum elastic modulus, pascals.
pub const ALUMINUM_E_PA: f64 = 68.95e9;
/// Downward load applied at each free lower node, newtons.
pub const LOAD_N: f64 = 444.8e3;
/// Member cross-section area range, square meters.
pub const AREA_MIN_M2: f64 = 0.6e-4;
pub const AREA_MAX_M2: f64 = 225.8e-4;
/// Tip deflections beyond this are flagged infeasible in generated data.
pub const DEFLECTION_CAP_M: f64 = 0.60;

/// A nodal point load, newtons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeLoad {
    pub node: usize,
    pub fx: f64,
    pub fy: f64,
}

/// Geometry, supports, loads, and material of a planar truss. The design
/// variables (member areas) are supplied separately to the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrussGeometry {
    /// Node coordinates `[x, y]`, meters.
    pub nodes: Vec<[f64; 2]>,
    /// Member end nodes, indices into `nodes`.
    pub members: Vec<[usize; 2]>,
    /// Nodes pinned in both directions.
    pub fixed_nodes: Vec<usize>,
    pub loads: Vec<NodeLoad>,
    /// Elastic modulus shared by all members, pascals.
    pub youngs_modulus: f64,
    /// Node whose vertical displacement is the scalar response.
    pub response_node: usize,
}

impl TrussGeometry {
    /// The classic ten-bar aluminum cantilever: two square bays, pinned at
    /// the left edge, equal downward loads at the two free lower nodes,
    /// response read at the lower tip.
    ///
    /// ```text
    ///   4 ---1--- 2 ---2--- 0
    ///   |  \    / |  \    / |
    ///   |   8  7  5   10 9  6        (member numbers 1-based)
    ///   |  /    \ |  /    \ |
    ///   5 ---3--- 3 ---4--- 1
    ///             v         v   444.8 kN
    /// ```
    pub fn ten_bar_cantilever() -> Self {
        TrussGeometry {
            nodes: vec![
                [2.0 * BAY_M, BAY_M], // 0: upper tip
                [2.0 * BAY_M, 0.0],   // 1: lower tip (response)
                [BAY_M, BAY_M],       // 2: upper middle
                [BAY_M, 0.0],         // 3: lower middle
                [0.0, BAY_M],         // 4: upper support
                [0.0, 0.0],           // 5: lower support
            ],
            members: vec![
                [4, 2], // 1: upper chord, inner
                [2, 0], // 2: upper chord, outer
                [5, 3], // 3: lower chord, inner
                [3, 1], // 4: lower chord, outer
                [2, 3], // 5: middle vertical
                [0, 1], // 6: tip vertical
                [4, 3], // 7: falling diagonal, inner bay
                [5, 2], // 8: rising diagonal, inner bay
                [2, 1], // 9: falling diagonal, outer bay
                [3, 0], // 10: rising diagonal, outer bay
            ],
            fixed_nodes: vec![4, 5],
            loads: vec![
                NodeLoad { node: 1, fx: 0.0, fy: -LOAD_N },
                NodeLoad { node: 3, fx: 0.0, fy: -LOAD_N },
            ],
            youngs_modulus: ALUMINUM_E_PA,
            response_node: 1,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn member_length(&self, m: usize) -> f64 {
        let [i, j] = self.members[m];
        let dx = self.nodes[j][0] - self.nodes[i][0];
        let dy = self.nodes[j][1] - self.nodes[i][1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Geometry(msg));
        if self.nodes.len() < 2 {
            return bad("a truss needs at least two nodes".into());
        }
        if self.members.is_empty() {
            return bad("a truss needs at least one member".into());
        }
        for (m, [i, j]) in self.members.iter().enumerate() {
            if *i >= self.nodes.len() || *j >= self.nodes.len() {
                return bad(format!("member {} references a missing node", m + 1));
            }
            if self.member_length(m) == 0.0 {
                return bad(format!("member {} has zero length", m + 1));
            }
        }
        if self.fixed_nodes.is_empty() {
            return bad("at least one node must be fixed".into());
        }
        for &n in &self.fixed_nodes {
            if n >= self.nodes.len() {
                return bad(format!("fixed node {n} does not exist"));
            }
        }
        for load in &self.loads {
            if load.node >= self.nodes.len() {
                return bad(format!("load references missing node {}", load.node));
            }
            if !load.fx.is_finite() || !load.fy.is_finite() {
                return bad(format!("load at node {} is not finite", load.node));
            }
        }
        if !(self.youngs_modulus > 0.0) || !self.youngs_modulus.is_finite() {
            return bad(format!("elastic modulus must be positive, got {}", self.youngs_modulus));
        }
        if self.response_node >= self.nodes.len() {
            return bad(format!("response node {} does not exist", self.response_node));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let geo: TrussGeometry =
            toml::from_str(text).map_err(|e| BenchError::Geometry(e.to_string()))?;
        geo.validate()?;
        Ok(geo)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("geometry serializes to TOML")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrussSolution {
    /// Nodal displacements `[ux, uy]`, meters; zero at fixed nodes.
    pub displacements: Vec<[f64; 2]>,
    /// Axial member forces, newtons; tension positive.
    pub member_forces: Vec<f64>,
    /// Magnitude of the vertical displacement at the response node, meters.
    pub response_m: f64,
}

fn is_fixed(geo: &TrussGeometry, node: usize) -> bool {
    geo.fixed_nodes.contains(&node)
}

/// Solves the truss for the given member areas (m², one per member).
pub fn solve_truss(geo: &TrussGeometry, areas: &[f64]) -> Result<TrussSolution, BenchError> {
    geo.validate()?;
    if areas.len() != geo.members.len() {
        return Err(BenchError::Geometry(format!(
            "{} areas supplied for {} members",
            areas.len(),
            geo.members.len()
        )));
    }
    for (m, a) in areas.iter().enumerate() {
        if !(a > &0.0) || !a.is_finite() {
            return Err(BenchError::Geometry(format!(
                "member {} area must be positive, got {a}",
                m + 1
            )));
        }
    }

    let n_dof = 2 * geo.nodes.len();
    let mut stiffness = vec![0.0f64; n_dof * n_dof];
    for (m, &[i, j]) in geo.members.iter().enumerate() {
        let length = geo.member_length(m);
        let c = (geo.nodes[j][0] - geo.nodes[i][0]) / length;
        let s = (geo.nodes[j][1] - geo.nodes[i][1]) / length;
        let k = geo.youngs_modulus * areas[m] / length;
        let block = [c * c * k, c * s * k, c * s * k, s * s * k];
        let dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
        // Signs: + on the diagonal blocks, - on the coupling blocks.
        for (bi, &gi) in dofs.iter().enumerate() {
            for (bj, &gj) in dofs.iter().enumerate() {
                let sign = if (bi < 2) == (bj < 2) { 1.0 } else { -1.0 };
                stiffness[gi * n_dof + gj] += sign * block[(bi % 2) * 2 + (bj % 2)];
            }
        }
    }

    let free: Vec<usize> = (0..n_dof)
        .filter(|dof| !is_fixed(geo, dof / 2))
        .collect();
    if free.is_empty() {
        return Err(BenchError::Geometry("every node is fixed".into()));
    }
    let nf = free.len();
    let mut reduced = vec![0.0f64; nf * nf];
    for (r, &gi) in free.iter().enumerate() {
        for (c, &gj) in free.iter().enumerate() {
            reduced[r * nf + c] = stiffness[gi * n_dof + gj];
        }
    }
    let mut rhs = vec![0.0f64; nf];
    for load in &geo.loads {
        if let Some(r) = free.iter().position(|&d| d == 2 * load.node) {
            rhs[r] += load.fx;
            rhs[r + 1] += load.fy; // the y dof follows its x dof in `free`
        }
    }

    let solved = linalg::solve_spd(reduced, nf, &rhs).map_err(|pivot| {
        let dof = free[pivot];
        BenchError::Unstable {
            node: dof / 2,
            axis: if dof % 2 == 0 { "x" } else { "y" },
        }
    })?;

    let mut displacements = vec![[0.0f64; 2]; geo.nodes.len()];
    for (r, &dof) in free.iter().enumerate() {
        displacements[dof / 2][dof % 2] = solved[r];
    }

    let member_forces = geo
        .members
        .iter()
        .enumerate()
        .map(|(m, &[i, j])| {
            let length = geo.member_length(m);
            let c = (geo.nodes[j][0] - geo.nodes[i][0]) / length;
            let s = (geo.nodes[j][1] - geo.nodes[i][1]) / length;
            let stretch = (displacements[j][0] - displacements[i][0]) * c
                + (displacements[j][1] - displacements[i][1]) * s;
            geo.youngs_modulus * areas[m] / length * stretch
        })
        .collect();

    let response_m = displacements[geo.response_node][1].abs();
    Ok(TrussSolution { displacements, member_forces, response_m })
}

/// Worst nodal force-balance violation, relative to the load scale: at
/// every free degree of freedom the member axial forces must sum to the
/// applied load. Checks the solution against the geometry from first
/// principles, without the stiffness matrix.
pub fn equilibrium_residual(geo: &TrussGeometry, sol: &TrussSolution) -> f64 {
    let mut balance = vec![[0.0f64; 2]; geo.nodes.len()];
    for (m, &[i, j]) in geo.members.iter().enumerate() {
        let length = geo.member_length(m);
        let c = (geo.nodes[j][0] - geo.nodes[i][0]) / length;
        let s = (geo.nodes[j][1] - geo.nodes[i][1]) / length;
        let force = sol.member_forces[m];
        // Tension pulls each end node toward the other.
        balance[i][0] += force * c;
        balance[i][1] += force * s;
        balance[j][0] -= force * c;
        balance[j][1] -= force * s;
    }
    for load in &geo.loads {
        balance[load.node][0] += load.fx;
        balance[load.node][1] += load.fy;
    }
    let scale = geo
        .loads
        .iter()
        .flat_map(|l| [l.fx.abs(), l.fy.abs()])
        .chain(sol.member_forces.iter().map(|f| f.abs()))
        .fold(1.0f64, f64::max);
    let mut worst = 0.0f64;
    for (node, b) in balance.iter().enumerate() {
        if is_fixed(geo, node) {
            continue; // the imbalance at a support is the reaction
        }
        worst = worst.max(b[0].abs()).max(b[1].abs());
    }
    worst / scale
}

/// Design space of the ten member areas, square meters.
pub fn tbpt_space() -> DesignSpace {
    let params = (1..=10)
        .map(|i| ParamSpec::continuous(&format!("a{i}"), AREA_MIN_M2, AREA_MAX_M2))
        .collect();
    DesignSpace::new(params).expect("area space is well formed")
}

/// Generates the ten-bar truss dataset: `n` Latin hypercube area designs,
/// each solved for its tip deflection, inputs and response min-max
/// normalized over the generated sample. Designs whose raw deflection
/// exceeds [`DEFLECTION_CAP_M`] keep their rows but are flagged
/// infeasible.
pub fn generate_tbpt_dataset(n: usize, seed: u64) -> Result<Dataset, BenchError> {
    let space = tbpt_space();
    if n < 2 {
        return Err(BenchError::Request(format!(
            "at least 2 rows are needed to normalize a dataset, got {n}"
        )));
    }
    if n < 3 * space.len() {
        log::warn!(
            "tbpt dataset of {n} rows is below the 3-per-variable floor of {}",
            3 * space.len()
        );
    }
    let geo = TrussGeometry::ten_bar_cantilever();
    let points = lhs_sample(&space, &space.full_subspace(), n, seed);
    let raw_x: Vec<Vec<f64>> = points
        .iter()
        .map(|p| (1..=10).map(|i| p.real(&format!("a{i}")).unwrap()).collect())
        .collect();
    let raw_y: Vec<f64> = raw_x
        .par_iter()
        .map(|areas| solve_truss(&geo, areas).map(|sol| sol.response_m))
        .collect::<Result<_, _>>()?;

    let x_scaler = Normalizer::fit(&raw_x).map_err(|e| BenchError::Request(e.to_string()))?;
    let y_rows: Vec<Vec<f64>> = raw_y.iter().map(|y| vec![*y]).collect();
    let y_scaler = Normalizer::fit(&y_rows).map_err(|e| BenchError::Request(e.to_string()))?;
    let feasible = raw_y.iter().map(|&d| d <= DEFLECTION_CAP_M).collect();

    Ok(Dataset {
        name: "tbpt".into(),
        feature_names: (1..=10).map(|i| format!("a{i}")).collect(),
        response_name: "tip_deflection_m".into(),
        xs: raw_x.iter().map(|r| x_scaler.transform_row(r)).collect(),
        ys: raw_y.iter().map(|&y| y_scaler.normalize_col(0, y)).collect(),
        x_scaler,
        y_scaler,
        feasible,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid_areas() -> Vec<f64> {
        vec![0.5 * (AREA_MIN_M2 + AREA_MAX_M2); 10]
    }

    /// Two bars meeting at one free node: closed-form displacements.
    /// Bar a runs horizontally from the origin support, bar b drops from a
    /// support one unit up; stiffnesses k_a = EA_a, k_b = EA_b/√2 give
    ///   u_x = -P/k_a,  u_y = -P·(2/k_b + 1/k_a)
    /// for a downward tip load P.
    #[test]
    fn two_bar_hand_calculation() {
        let geo = TrussGeometry {
            nodes: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
            members: vec![[0, 2], [1, 2]],
            fixed_nodes: vec![0, 1],
            loads: vec![NodeLoad { node: 2, fx: 0.0, fy: -1.0e4 }],
            youngs_modulus: ALUMINUM_E_PA,
            response_node: 2,
        };
        let areas = [1.0e-3, 2.0e-3];
        let sol = solve_truss(&geo, &areas).unwrap();

        let p = 1.0e4;
        let k_a = ALUMINUM_E_PA * areas[0];
        let k_b = ALUMINUM_E_PA * areas[1] / 2.0f64.sqrt();
        let ux = -p / k_a;
        let uy = -p * (2.0 / k_b + 1.0 / k_a);
        assert!((sol.displacements[2][0] - ux).abs() <= 1e-10 * ux.abs());
        assert!((sol.displacements[2][1] - uy).abs() <= 1e-10 * uy.abs());
        assert!(equilibrium_residual(&geo, &sol) < 1e-12);
        // Statically determinate, so the forces follow from joint
        // equilibrium alone: the diagonal must carry the whole vertical
        // load (tension P√2) and the horizontal bar balances the
        // diagonal's horizontal pull (compression P).
        let n_b = p * 2.0f64.sqrt();
        let n_a = -p;
        assert!((sol.member_forces[1] - n_b).abs() <= 1e-10 * n_b.abs());
        assert!((sol.member_forces[0] - n_a).abs() <= 1e-10 * n_a.abs());
    }

    #[test]
    fn default_cantilever_solves_and_balances() {
        let geo = TrussGeometry::ten_bar_cantilever();
        geo.validate().unwrap();
        let sol = solve_truss(&geo, &mid_areas()).unwrap();
        assert!(sol.response_m > 0.0 && sol.response_m.is_finite());
        // Loads push down; the lower tip moves down.
        assert!(sol.displacements[1][1] < 0.0);
        assert!(equilibrium_residual(&geo, &sol) < 1e-10);
        // External work equals strain energy.
        let work: f64 = geo
            .loads
            .iter()
            .map(|l| {
                0.5 * (l.fx * sol.displacements[l.node][0]
                    + l.fy * sol.displacements[l.node][1])
            })
            .sum();
        let energy: f64 = geo
            .members
            .iter()
            .enumerate()
            .map(|(m, _)| {
                let f = sol.member_forces[m];
                f * f * geo.member_length(m)
                    / (2.0 * geo.youngs_modulus * mid_areas()[m])
            })
            .sum();
        assert!(
            (work - energy).abs() <= 1e-8 * work.abs(),
            "work {work} vs energy {energy}"
        );
    }

    #[test]
    fn area_scaling_divides_displacement_exactly() {
        let geo = TrussGeometry::ten_bar_cantilever();
        let base: Vec<f64> = (0..10).map(|i| 1.0e-4 * (i + 3) as f64).collect();
        let doubled: Vec<f64> = base.iter().map(|a| 2.0 * a).collect();
        let u1 = solve_truss(&geo, &base).unwrap().response_m;
        let u2 = solve_truss(&geo, &doubled).unwrap().response_m;
        assert!(
            (u2 - u1 / 2.0).abs() <= 1e-12 * u1,
            "homogeneity: {u2} vs {}",
            u1 / 2.0
        );
    }

    #[test]
    fn mechanisms_are_reported_as_unstable() {
        // Two collinear horizontal bars: the middle and tip nodes can both
        // swing vertically.
        let geo = TrussGeometry {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            members: vec![[0, 1], [1, 2]],
            fixed_nodes: vec![0],
            loads: vec![NodeLoad { node: 2, fx: 0.0, fy: -1.0 }],
            youngs_modulus: 1.0e9,
            response_node: 2,
        };
        match solve_truss(&geo, &[1e-4, 1e-4]) {
            Err(BenchError::Unstable { axis, .. }) => assert_eq!(axis, "y"),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn geometry_errors_are_descriptive() {
        let mut geo = TrussGeometry::ten_bar_cantilever();
        assert!(matches!(
            solve_truss(&geo, &[1e-4; 9]),
            Err(BenchError::Geometry(_))
        ));
        assert!(matches!(
            solve_truss(&geo, &{
                let mut a = [1e-4; 10];
                a[3] = 0.0;
                a
            }),
            Err(BenchError::Geometry(_))
        ));
        geo.members.push([0, 0]);
        assert!(matches!(geo.validate(), Err(BenchError::Geometry(_))));
    }

    #[test]
    fn geometry_round_trips_through_toml() {
        let geo = TrussGeometry::ten_bar_cantilever();
        let text = geo.to_toml_string();
        let back = TrussGeometry::from_toml_str(&text).unwrap();
        assert_eq!(geo, back);
        assert!(TrussGeometry::from_toml_str("nodes = []").is_err());
    }

    #[test]
    fn tbpt_dataset_is_normalized_flagged_and_reproducible() {
        let data = generate_tbpt_dataset(60, 9).unwrap();
        data.validate().unwrap();
        assert_eq!(data.n(), 60);
        assert_eq!(data.d(), 10);
        for row in &data.xs {
            for v in row {
                assert!((0.0..=1.0).contains(v));
            }
        }
        // Flags match the raw deflection read back through the scaler.
        for (i, y) in data.ys.iter().enumerate() {
            let raw = data.y_scaler.denormalize_col(0, *y);
            assert_eq!(data.feasible[i], raw <= DEFLECTION_CAP_M, "row {i}");
        }
        // Some sampled designs are floppy enough to breach 0.6 m and some
        // are stiff enough not to, otherwise the flag is vacuous.
        assert!(data.feasible.iter().any(|f| *f));
        assert!(data.feasible.iter().any(|f| !*f));

        let again = generate_tbpt_dataset(60, 9).unwrap();
        assert_eq!(data.xs, again.xs);
        assert_eq!(data.ys, again.ys);
        let other = generate_tbpt_dataset(60, 10).unwrap();
        assert_ne!(data.xs, other.xs);
    }

    #[test]
    fn tbpt_dataset_rejects_degenerate_sizes() {
        assert!(matches!(
            generate_tbpt_dataset(1, 0),
            Err(BenchError::Request(_))
        ));
    }
}
