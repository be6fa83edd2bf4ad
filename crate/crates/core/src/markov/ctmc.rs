//! Exact occupancy chain under an arbitrary memoryless admission policy.
//!
//! A state records, for every RAT sub-pool, the number of active calls of each
//! class. Arrivals of class `i` move to `s + e_i` in the pool chosen by
//! first-fit; departures leave at rate `n_i·μ_i`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use super::BlockingReport;
use crate::error::{CacError, Result};
use crate::policies::{first_fit, AdmissionPolicy, NetworkSnapshot};
use crate::traffic::{ClassId, SystemConfig};

pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Largest chain handed to the dense solver.
pub const DENSE_SOLVE_LIMIT: usize = 4_096;

/// Active calls per class in each RAT sub-pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Occupancy(pub Vec<[u32; 3]>);

impl Occupancy {
    pub fn empty(rats: usize) -> Self {
        Self(vec![[0; 3]; rats])
    }

    pub fn snapshots(&self, rat_channels: &[u32]) -> Vec<NetworkSnapshot> {
        self.0
            .iter()
            .zip(rat_channels)
            .map(|(active, &cap)| NetworkSnapshot::new(cap, *active).expect("occupancy within capacity"))
            .collect()
    }

    pub fn occupied_channels(&self) -> u32 {
        self.0.iter().map(|a| ClassId::ALL.iter().map(|c| a[c.index()] * c.channels_required()).sum::<u32>()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct CtmcModel {
    pub rat_channels: Vec<u32>,
    pub arrival_rates: [f64; 3],
    pub states: Vec<Occupancy>,
    /// Off-diagonal rates per row as `(target, rate)`; the diagonal is the negated row sum.
    pub transitions: Vec<Vec<(usize, f64)>>,
    /// Pool chosen for a class-`i` arrival in each state, `None` when blocked.
    pub placements: Vec<[Option<usize>; 3]>,
}

impl CtmcModel {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn exit_rate(&self, state: usize) -> f64 {
        self.transitions[state].iter().map(|&(_, r)| r).sum()
    }

    pub fn generator_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut q = DMatrix::zeros(n, n);
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, rate) in row {
                q[(i, j)] += rate;
            }
            q[(i, i)] -= self.exit_rate(i);
        }
        q
    }

    /// Largest `|(πQ)_j|` for a candidate stationary vector.
    pub fn balance_residual(&self, pi: &[f64]) -> f64 {
        let mut flow = vec![0.0; self.len()];
        for (i, row) in self.transitions.iter().enumerate() {
            flow[i] -= pi[i] * self.exit_rate(i);
            for &(j, rate) in row {
                flow[j] += pi[i] * rate;
            }
        }
        flow.into_iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Enumerates every occupancy reachable from the empty system under `policy`.
pub fn build_ctmc(config: &SystemConfig, policy: &dyn AdmissionPolicy, state_cap: usize) -> Result<CtmcModel> {
    let rat_channels = config.rat_channels.clone();
    let arrival_rates = config.classes.map(|c| c.arrival_rate);
    let service_rates = config.classes.map(|c| c.service_rate);

    let mut index: HashMap<Occupancy, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut placements = Vec::new();
    let mut frontier = VecDeque::new();

    let start = Occupancy::empty(rat_channels.len());
    index.insert(start.clone(), 0);
    states.push(start);
    frontier.push_back(0usize);

    let mut intern = |occ: Occupancy, states: &mut Vec<Occupancy>, frontier: &mut VecDeque<usize>| -> Result<usize> {
        if let Some(&i) = index.get(&occ) {
            return Ok(i);
        }
        if states.len() >= state_cap {
            return Err(CacError::ResourceLimit { cap: state_cap });
        }
        let i = states.len();
        index.insert(occ.clone(), i);
        states.push(occ);
        frontier.push_back(i);
        Ok(i)
    };

    while let Some(s) = frontier.pop_front() {
        let occ = states[s].clone();
        let snaps = occ.snapshots(&rat_channels);
        let mut row = Vec::new();
        let mut placement = [None; 3];
        for class in ClassId::ALL {
            let c = class.index();
            let chosen = first_fit(policy, &snaps, class);
            placement[c] = chosen;
            if let (Some(r), true) = (chosen, arrival_rates[c] > 0.0) {
                let mut next = occ.clone();
                next.0[r][c] += 1;
                let j = intern(next, &mut states, &mut frontier)?;
                row.push((j, arrival_rates[c]));
            }
        }
        for (r, active) in occ.0.iter().enumerate() {
            for class in ClassId::ALL {
                let c = class.index();
                if active[c] > 0 {
                    let mut next = occ.clone();
                    next.0[r][c] -= 1;
                    let j = intern(next, &mut states, &mut frontier)?;
                    row.push((j, active[c] as f64 * service_rates[c]));
                }
            }
        }
        if transitions.len() <= s {
            transitions.resize(s + 1, Vec::new());
            placements.resize(s + 1, [None; 3]);
        }
        transitions[s] = row;
        placements[s] = placement;
    }

    Ok(CtmcModel { rat_channels, arrival_rates, states, transitions, placements })
}

/// Solves `πQ = 0, Σπ = 1` by LU with partial pivoting, one balance equation
/// swapped for the normalisation row.
pub fn ctmc_steady_state(model: &CtmcModel) -> Result<Vec<f64>> {
    let n = model.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    if n > DENSE_SOLVE_LIMIT {
        return Err(CacError::ResourceLimit { cap: DENSE_SOLVE_LIMIT });
    }
    let mut a = model.generator_dense().transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| CacError::NumericalFailure("singular balance system".into()))?;

    let mut pi: Vec<f64> = x.iter().copied().collect();
    for p in pi.iter_mut() {
        if *p < 0.0 {
            if *p < -1e-10 {
                return Err(CacError::NumericalFailure(format!("negative stationary mass {p}")));
            }
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);

    let residual = model.balance_residual(&pi);
    if !(residual < 1e-8) {
        return Err(CacError::NumericalFailure(format!("balance residual {residual:e}")));
    }
    Ok(pi)
}

/// Blocking of class `i` is the stationary mass of states that refuse a
/// class-`i` arrival; the aggregate weights classes by arrival rate.
pub fn ctmc_blocking(model: &CtmcModel, stationary: &[f64]) -> BlockingReport {
    let mut per_class = [0.0f64; 3];
    for (p, placement) in stationary.iter().zip(&model.placements) {
        for c in 0..3 {
            if placement[c].is_none() {
                per_class[c] += p;
            }
        }
    }
    let per_class = per_class.map(|b| b.clamp(0.0, 1.0));
    let total_rate: f64 = model.arrival_rates.iter().sum();
    let aggregate =
        if total_rate > 0.0 { (0..3).map(|c| model.arrival_rates[c] / total_rate * per_class[c]).sum() } else { 0.0 };
    BlockingReport {
        type1_blocking: per_class[0],
        type2_blocking: per_class[1],
        type3_blocking: per_class[2],
        aggregate_blocking: aggregate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::erlang_b;
    use crate::policies::{AlwaysAdmit, RejectAll, ThresholdPolicy};
    use crate::traffic::{symmetric_classes, ThresholdSet, UtilizationRate};

    fn single_class(n: u32, lambda: f64, mu: f64) -> SystemConfig {
        let mut classes = symmetric_classes(lambda, mu).unwrap();
        classes[1].arrival_rate = 0.0;
        classes[2].arrival_rate = 0.0;
        SystemConfig::new(n, classes, None, 0).unwrap()
    }

    fn solve(cfg: &SystemConfig, policy: &dyn AdmissionPolicy) -> (CtmcModel, Vec<f64>, BlockingReport) {
        let m = build_ctmc(cfg, policy, DEFAULT_STATE_CAP).unwrap();
        let pi = ctmc_steady_state(&m).unwrap();
        let b = ctmc_blocking(&m, &pi);
        (m, pi, b)
    }

    #[test]
    fn mm22_is_a_three_state_birth_death_chain() {
        let m = build_ctmc(&single_class(2, 1.0, 1.0), &AlwaysAdmit, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(m.len(), 3);
        let mut occupied: Vec<u32> = m.states.iter().map(|s| s.occupied_channels()).collect();
        occupied.sort();
        assert_eq!(occupied, vec![0, 1, 2]);
        for row in &m.transitions {
            assert!(row.len() <= 2);
        }
    }

    #[test]
    fn state_count_matches_enumeration() {
        // Brute force over all (n1, n2, n3) with n1 + 2 n2 + 3 n3 <= 6.
        let mut brute = 0;
        for n1 in 0..=6u32 {
            for n2 in 0..=3u32 {
                for n3 in 0..=2u32 {
                    if n1 + 2 * n2 + 3 * n3 <= 6 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(brute, 23);
        let cfg = SystemConfig::symmetric(6, 1.0, 1.0, None, 0).unwrap();
        let m = build_ctmc(&cfg, &AlwaysAdmit, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(m.len(), brute);
    }

    #[test]
    fn generator_rows_sum_to_zero() {
        let t = ThresholdSet::new(2, 4, 6).unwrap();
        let cfg = SystemConfig::symmetric(10, 0.8, 1.3, Some(t), 0).unwrap();
        for policy in [&AlwaysAdmit as &dyn AdmissionPolicy, &ThresholdPolicy::new(t)] {
            let m = build_ctmc(&cfg, policy, DEFAULT_STATE_CAP).unwrap();
            let q = m.generator_dense();
            for i in 0..m.len() {
                assert!(q.row(i).sum().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = SystemConfig::symmetric(30, 1.0, 1.0, None, 0).unwrap();
        let err = build_ctmc(&cfg, &AlwaysAdmit, 50).unwrap_err();
        assert_eq!(err, CacError::ResourceLimit { cap: 50 });
    }

    #[test]
    fn two_state_balance() {
        let (_, pi, b) = solve(&single_class(1, 1.0, 1.0), &AlwaysAdmit);
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
        assert!((b.type1_blocking - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mm22_truncated_poisson() {
        let (m, pi, _) = solve(&single_class(2, 1.0, 1.0), &AlwaysAdmit);
        for (s, p) in m.states.iter().zip(&pi) {
            let want = [0.4, 0.4, 0.2][s.occupied_channels() as usize];
            assert!((p - want).abs() < 1e-12);
        }
    }

    #[test]
    fn single_class_matches_erlang_b() {
        for n in 1..=20 {
            for a in [0.2, 0.5, 1.0, 2.0] {
                let (_, _, b) = solve(&single_class(n, a, 1.0), &AlwaysAdmit);
                let eb = erlang_b(n, UtilizationRate(a));
                assert!((b.type1_blocking - eb).abs() < 1e-10, "n={n} a={a}");
                assert!((b.aggregate_blocking - eb).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reject_all_blocks_everything() {
        let cfg = SystemConfig::symmetric(6, 1.0, 1.0, None, 0).unwrap();
        let (m, _, b) = solve(&cfg, &RejectAll);
        assert_eq!(m.len(), 1);
        assert_eq!(b.per_class(), [1.0; 3]);
        assert_eq!(b.aggregate_blocking, 1.0);
    }

    #[test]
    fn wider_classes_block_more() {
        let cfg = SystemConfig::symmetric(6, 1.0, 1.0, None, 0).unwrap();
        let (_, pi, b) = solve(&cfg, &AlwaysAdmit);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(b.type3_blocking >= b.type2_blocking && b.type2_blocking >= b.type1_blocking);
        let mean = b.per_class().iter().sum::<f64>() / 3.0;
        assert!((b.aggregate_blocking - mean).abs() < 1e-12);
    }

    #[test]
    fn blocking_non_increasing_in_channels() {
        let t = ThresholdSet::new(1, 3, 5).unwrap();
        let mut prev_always = [1.0f64; 3];
        let mut prev_thr = [1.0f64; 3];
        for n in 6..=16 {
            let cfg = SystemConfig::symmetric(n, 0.9, 1.0, Some(t), 0).unwrap();
            let (_, _, b) = solve(&cfg, &AlwaysAdmit);
            let (_, _, bt) = solve(&cfg, &ThresholdPolicy::new(t));
            for c in 0..3 {
                for x in [b.per_class()[c], bt.per_class()[c]] {
                    assert!((0.0..=1.0).contains(&x));
                }
                assert!(b.per_class()[c] <= prev_always[c] + 1e-12);
                assert!(bt.per_class()[c] <= prev_thr[c] + 1e-12);
            }
            prev_always = b.per_class();
            prev_thr = bt.per_class();
        }
    }

    #[test]
    fn split_pools_block_more_than_joint_pool() {
        let classes = symmetric_classes(1.0, 1.0).unwrap();
        let joint = SystemConfig::new(8, classes, None, 0).unwrap();
        let split = SystemConfig::with_rats(vec![4, 4], classes, None, 0).unwrap();
        let (_, _, bj) = solve(&joint, &AlwaysAdmit);
        let (ms, pis, bs) = solve(&split, &AlwaysAdmit);
        assert!(ms.balance_residual(&pis) < 1e-8);
        assert!(bs.type3_blocking > bj.type3_blocking);
    }
}
