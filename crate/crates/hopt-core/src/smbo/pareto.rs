//! Non-dominated sorting, hypervolume, and front-member selection for the
//! two-objective (RMSE, MXAE) loss space.
//!
//! Dominance is the standard weak form: `p` dominates `q` when `p` is no
//! worse in both objectives and strictly better in at least one. Equal
//! points therefore never dominate each other, and tied copies survive on
//! the front together.

use serde::{Deserialize, Serialize};

use crate::eval::EvalRecord;
use crate::util::{median, seeded_rng};

/// Indices of the non-dominated points, ascending. A sorted sweep; agrees
/// exactly with the quadratic definition, including duplicate handling.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
    });

    let mut front = Vec::new();
    // Minimum second objective over all points with strictly smaller first
    // objective than the group being examined.
    let mut best_prev = f64::INFINITY;
    let mut i = 0;
    while i < n {
        // One group of equal first-objective values.
        let x = points[order[i]].0;
        let mut j = i;
        while j < n && points[order[j]].0 == x {
            j += 1;
        }
        let group_min_y = points[order[i]].1;
        for &idx in &order[i..j] {
            let y = points[idx].1;
            // Survives when nothing cheaper-in-x is as good in y, and
            // nothing in its own x-group beats its y.
            if y < best_prev && y == group_min_y {
                front.push(idx);
            }
        }
        best_prev = best_prev.min(group_min_y);
        i = j;
    }
    front.sort_unstable();
    front
}

/// Literal O(n²) dominance filter; the executable definition the sweep is
/// checked against.
pub fn pareto_front_brute_force(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| dominates(*q, points[i])))
        .collect()
}

pub fn dominates(p: (f64, f64), q: (f64, f64)) -> bool {
    p.0 <= q.0 && p.1 <= q.1 && (p.0 < q.0 || p.1 < q.1)
}

/// Area of the loss region dominated by `points`, measured against a
/// reference corner (both objectives at their worst interesting value).
/// Points at or beyond the reference contribute nothing. Monotone: adding
/// points never decreases it.
pub fn hypervolume(points: &[(f64, f64)], reference: (f64, f64)) -> f64 {
    let front = pareto_front(points);
    let mut staircase: Vec<(f64, f64)> = front.iter().map(|&i| points[i]).collect();
    staircase.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = reference.1;
    for (x, y) in staircase {
        if x >= reference.0 || y >= ceiling {
            continue;
        }
        area += (reference.0 - x) * (ceiling - y);
        ceiling = y;
    }
    area
}

/// Every evaluation of a run, in evaluation order, plus the current
/// non-dominated front over `(mean_rmse, mean_mxae)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<EvalRecord>,
    front: Vec<usize>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        ParetoArchive::default()
    }

    pub fn push(&mut self, record: EvalRecord) {
        self.entries.push(record);
        self.front = pareto_front(&self.losses());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EvalRecord] {
        &self.entries
    }

    pub fn losses(&self) -> Vec<(f64, f64)> {
        self.entries.iter().map(|e| e.losses()).collect()
    }

    /// Indices (into [`entries`](Self::entries)) of the front, ascending.
    pub fn front_indices(&self) -> &[usize] {
        &self.front
    }

    pub fn front_records(&self) -> Vec<&EvalRecord> {
        self.front.iter().map(|&i| &self.entries[i]).collect()
    }

    pub fn contains_point(&self, point: &crate::space::HpPoint) -> bool {
        self.entries.iter().any(|e| &e.point == point)
    }

    pub fn best_rmse(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mean_rmse)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn best_mxae(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mean_mxae)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn hypervolume(&self, reference: (f64, f64)) -> f64 {
        hypervolume(&self.losses(), reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectStrategy {
    /// Seeded uniform choice among the filtered members.
    Random,
    /// Minimum normalized distance to the ideal corner.
    Knee,
}

impl std::str::FromStr for SelectStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SelectStrategy::Random),
            "knee" => Ok(SelectStrategy::Knee),
            other => Err(format!("unknown selection strategy `{other}`")),
        }
    }
}

/// Picks one member of a non-empty front.
///
/// Members whose RMSE or MXAE exceeds the front-wise median of that
/// objective are excluded first (members that are poor in either objective
/// are unattractive compromises); if that empties the list, the full front
/// is used. Returns an index into `front`.
pub fn select_from_front(front: &[(f64, f64)], strategy: SelectStrategy, seed: u64) -> usize {
    assert!(!front.is_empty(), "cannot select from an empty front");
    let med_rmse = median(&front.iter().map(|p| p.0).collect::<Vec<_>>());
    let med_mxae = median(&front.iter().map(|p| p.1).collect::<Vec<_>>());
    let mut kept: Vec<usize> = (0..front.len())
        .filter(|&i| front[i].0 <= med_rmse && front[i].1 <= med_mxae)
        .collect();
    if kept.is_empty() {
        kept = (0..front.len()).collect();
    }
    match strategy {
        SelectStrategy::Random => {
            use rand::Rng;
            let mut rng = seeded_rng(seed, 0x53454c);
            kept[rng.gen_range(0..kept.len())]
        }
        SelectStrategy::Knee => {
            let min_r = kept.iter().map(|&i| front[i].0).fold(f64::INFINITY, f64::min);
            let max_r = kept.iter().map(|&i| front[i].0).fold(f64::NEG_INFINITY, f64::max);
            let min_m = kept.iter().map(|&i| front[i].1).fold(f64::INFINITY, f64::min);
            let max_m = kept.iter().map(|&i| front[i].1).fold(f64::NEG_INFINITY, f64::max);
            let norm = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            let mut best = kept[0];
            let mut best_d = f64::INFINITY;
            for &i in &kept {
                let dr = norm(front[i].0, min_r, max_r);
                let dm = norm(front[i].1, min_m, max_m);
                let d = (dr * dr + dm * dm).sqrt();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn front_of_simple_triples() {
        let pts = vec![(1.0, 2.0), (2.0, 1.0), (2.0, 2.0)];
        assert_eq!(pareto_front(&pts), vec![0, 1]);
        assert_eq!(pareto_front(&[(0.3, 0.4)]), vec![0]);
        assert!(pareto_front(&[]).is_empty());
    }

    #[test]
    fn duplicates_survive_together() {
        let pts = vec![(1.0, 1.0), (1.0, 1.0), (2.0, 0.5)];
        assert_eq!(pareto_front(&pts), vec![0, 1, 2]);
        // A strictly better point removes both copies at once.
        let pts = vec![(1.0, 1.0), (1.0, 1.0), (0.5, 1.0)];
        assert_eq!(pareto_front(&pts), vec![2]);
        // Equal first objective, better second: only the better survives.
        let pts = vec![(1.0, 2.0), (1.0, 1.0)];
        assert_eq!(pareto_front(&pts), vec![1]);
    }

    #[test]
    fn sweep_matches_brute_force_on_random_sets() {
        let mut rng = crate::util::seeded_rng(101, 0);
        for round in 0..500 {
            let n = rng.gen_range(1..60);
            // Coarse grid so ties and duplicates actually occur.
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    (
                        f64::from(rng.gen_range(0..8u32)) / 8.0,
                        f64::from(rng.gen_range(0..8u32)) / 8.0,
                    )
                })
                .collect();
            assert_eq!(
                pareto_front(&pts),
                pareto_front_brute_force(&pts),
                "round {round}: {pts:?}"
            );
        }
    }

    #[test]
    fn hypervolume_hand_values() {
        // Single point at (0.5, 0.5) against (1,1): a quarter square.
        assert!((hypervolume(&[(0.5, 0.5)], (1.0, 1.0)) - 0.25).abs() < 1e-15);
        // Staircase of two points.
        let hv = hypervolume(&[(0.2, 0.8), (0.6, 0.4)], (1.0, 1.0));
        // First: (1-0.2)*(1-0.8)=0.16; second adds (1-0.6)*(0.8-0.4)=0.16.
        assert!((hv - 0.32).abs() < 1e-15);
        // Dominated and out-of-reference points contribute nothing.
        let hv2 = hypervolume(&[(0.2, 0.8), (0.6, 0.4), (0.7, 0.9), (1.2, 0.1)], (1.0, 1.0));
        assert!((hv2 - 0.32).abs() < 1e-15);
        assert_eq!(hypervolume(&[(1.0, 1.0)], (1.0, 1.0)), 0.0);
    }

    #[test]
    fn hypervolume_is_monotone_under_insertion() {
        let mut rng = crate::util::seeded_rng(55, 0);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut last = 0.0;
        for _ in 0..200 {
            pts.push((rng.gen(), rng.gen()));
            let hv = hypervolume(&pts, (1.0, 1.0));
            assert!(hv >= last - 1e-15, "hv shrank: {hv} < {last}");
            last = hv;
        }
    }

    #[test]
    fn archive_front_invariant_matches_brute_force() {
        use crate::space::HpPoint;
        let mut rng = crate::util::seeded_rng(77, 0);
        let mut archive = ParetoArchive::new();
        for i in 0..120 {
            let r: f64 = f64::from(rng.gen_range(0..32u32)) / 32.0;
            let m = (r + f64::from(rng.gen_range(0..32u32)) / 32.0).min(1.0);
            let rec = EvalRecord {
                point: HpPoint::from_pairs(&[(
                    "i",
                    crate::space::ParamValue::Int(i as i64),
                )]),
                fold_rmse: vec![r; 5],
                fold_mxae: vec![m; 5],
                fold_failed: vec![false; 5],
                mean_rmse: r,
                sd_rmse: 0.0,
                mean_mxae: m,
                sd_mxae: 0.0,
                train_time_s: 0.0,
            };
            archive.push(rec);
            assert_eq!(
                archive.front_indices(),
                pareto_front_brute_force(&archive.losses()).as_slice()
            );
        }
        assert!(archive.contains_point(&HpPoint::from_pairs(&[(
            "i",
            crate::space::ParamValue::Int(3),
        )])));
    }

    #[test]
    fn selection_filters_by_objective_medians() {
        // One member at or below both medians: always chosen.
        let front = vec![(0.2, 0.3), (0.4, 0.5)];
        assert_eq!(select_from_front(&front, SelectStrategy::Knee, 0), 0);
        assert_eq!(select_from_front(&front, SelectStrategy::Random, 9), 0);
        // Symmetric two-member front: the filter empties (each member
        // exceeds one median), so selection falls back to the full front.
        let sym = vec![(0.1, 0.9), (0.9, 0.1)];
        let pick = select_from_front(&sym, SelectStrategy::Random, 4);
        assert!(pick < 2);
        // Single member: trivially itself.
        assert_eq!(select_from_front(&[(0.5, 0.5)], SelectStrategy::Knee, 0), 0);
    }

    #[test]
    fn knee_picks_the_balanced_member() {
        let front = vec![(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)];
        assert_eq!(select_from_front(&front, SelectStrategy::Knee, 0), 1);
    }

    #[test]
    fn random_selection_is_seed_stable_and_in_range() {
        let front = vec![(0.1, 0.6), (0.2, 0.5), (0.3, 0.4), (0.4, 0.3)];
        let a = select_from_front(&front, SelectStrategy::Random, 11);
        let b = select_from_front(&front, SelectStrategy::Random, 11);
        assert_eq!(a, b);
        assert!(a < front.len());
        // Different seeds eventually reach different members.
        let picks: std::collections::HashSet<usize> = (0..40)
            .map(|s| select_from_front(&front, SelectStrategy::Random, s))
            .collect();
        assert!(picks.len() > 1);
    }
}
