//! Filtering for a unary (no-overlap) resource.
//!
//! All rules are written for the earliest-start side and reused for the
//! latest-completion side by mirroring time (`t -> -t`). Overload checking
//! and detectable precedences always run; edge-finding and
//! not-first/not-last are switched by [`DisjunctiveRules`].

use serde::{Deserialize, Serialize};

use super::theta::{ThetaLambdaTree, ThetaTree, NEG_INF};
use super::Inconsistency;
use crate::instance::Time;

/// Optional disjunctive filtering rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisjunctiveRules {
    pub edge_finding: bool,
    pub not_first_last: bool,
}

impl DisjunctiveRules {
    /// Overload checking and detectable precedences only.
    pub const BASIC: Self = Self {
        edge_finding: false,
        not_first_last: false,
    };
    pub const ALL: Self = Self {
        edge_finding: true,
        not_first_last: true,
    };
}

impl Default for DisjunctiveRules {
    fn default() -> Self {
        Self::ALL
    }
}

/// Reusable buffers for one machine's filtering pass.
#[derive(Debug, Default)]
pub(crate) struct UnaryFilter {
    tree: ThetaLambdaTree,
    theta: ThetaTree,
    /// Current bounds of the activity set.
    pub est: Vec<Time>,
    pub lct: Vec<Time>,
    pub len: Vec<Time>,
    /// Tightened bounds, filled by [`UnaryFilter::run`].
    pub new_est: Vec<Time>,
    pub new_lct: Vec<Time>,
    m_est: Vec<Time>,
    m_lct: Vec<Time>,
    m_new_est: Vec<Time>,
    m_new_lct: Vec<Time>,
    leaf: Vec<usize>,
    by_est: Vec<usize>,
    order: Vec<usize>,
    queue: Vec<usize>,
    inserted: Vec<usize>,
}

impl UnaryFilter {
    pub fn clear(&mut self) {
        self.est.clear();
        self.lct.clear();
        self.len.clear();
    }

    pub fn push(&mut self, est: Time, lct: Time, len: Time) {
        self.est.push(est);
        self.lct.push(lct);
        self.len.push(len);
    }

    /// One filtering round over the loaded activities. Results land in
    /// `new_est` / `new_lct`; the caller loops until nothing changes.
    pub fn run(&mut self, rules: DisjunctiveRules) -> Result<(), Inconsistency> {
        let n = self.est.len();
        self.new_est.clear();
        self.new_est.extend_from_slice(&self.est);
        self.new_lct.clear();
        self.new_lct.extend_from_slice(&self.lct);
        if n < 2 {
            return Ok(());
        }

        let mut out_est = std::mem::take(&mut self.new_est);
        let mut out_lct = std::mem::take(&mut self.new_lct);
        let (est, lct) = (std::mem::take(&mut self.est), std::mem::take(&mut self.lct));
        let res = self.one_side(&est, &lct, rules, &mut out_est, &mut out_lct);
        self.est = est;
        self.lct = lct;
        self.new_est = out_est;
        self.new_lct = out_lct;
        res?;

        let mut m_est = std::mem::take(&mut self.m_est);
        let mut m_lct = std::mem::take(&mut self.m_lct);
        let mut m_new_est = std::mem::take(&mut self.m_new_est);
        let mut m_new_lct = std::mem::take(&mut self.m_new_lct);
        m_est.clear();
        m_lct.clear();
        m_est.extend(self.lct.iter().map(|&t| -t));
        m_lct.extend(self.est.iter().map(|&t| -t));
        m_new_est.clear();
        m_new_est.extend_from_slice(&m_est);
        m_new_lct.clear();
        m_new_lct.extend_from_slice(&m_lct);
        let res = self.one_side(&m_est, &m_lct, rules, &mut m_new_est, &mut m_new_lct);
        if res.is_ok() {
            for i in 0..n {
                self.new_lct[i] = self.new_lct[i].min(-m_new_est[i]);
                self.new_est[i] = self.new_est[i].max(-m_new_lct[i]);
            }
        }
        self.m_est = m_est;
        self.m_lct = m_lct;
        self.m_new_est = m_new_est;
        self.m_new_lct = m_new_lct;
        res
    }

    fn one_side(
        &mut self,
        est: &[Time],
        lct: &[Time],
        rules: DisjunctiveRules,
        out_est: &mut [Time],
        out_lct: &mut [Time],
    ) -> Result<(), Inconsistency> {
        let n = est.len();
        self.by_est.clear();
        self.by_est.extend(0..n);
        self.by_est.sort_unstable_by_key(|&i| (est[i], i));
        self.leaf.resize(n, 0);
        for (pos, &i) in self.by_est.iter().enumerate() {
            self.leaf[i] = pos;
        }

        if rules.edge_finding {
            self.edge_finding(est, lct, out_est)?;
        } else {
            self.overload_check(est, lct)?;
        }
        self.detectable_precedences(est, lct, out_est);
        if rules.not_first_last {
            self.not_last(est, lct, out_lct);
        }
        Ok(())
    }

    fn overload_check(&mut self, est: &[Time], lct: &[Time]) -> Result<(), Inconsistency> {
        let n = est.len();
        self.order.clear();
        self.order.extend(0..n);
        self.order.sort_unstable_by_key(|&i| (lct[i], i));
        self.theta.reset(n);
        for &j in &self.order {
            self.theta.insert(self.leaf[j], est[j], self.len[j]);
            if self.theta.ect() > lct[j] {
                return Err(Inconsistency);
            }
        }
        Ok(())
    }

    /// If `ect_i > lst_j`, `j` must precede `i`; `est_i` is raised to the
    /// earliest completion of all such `j`.
    fn detectable_precedences(&mut self, est: &[Time], lct: &[Time], out_est: &mut [Time]) {
        let n = est.len();
        let len = &self.len;
        self.order.clear();
        self.order.extend(0..n);
        self.order.sort_unstable_by_key(|&i| (est[i] + len[i], i));
        self.queue.clear();
        self.queue.extend(0..n);
        self.queue.sort_unstable_by_key(|&j| (lct[j] - len[j], j));

        self.theta.reset(n);
        let mut in_theta = std::mem::take(&mut self.inserted);
        in_theta.clear();
        in_theta.resize(n, 0);
        let mut q = 0;
        for &i in &self.order {
            let ect_i = est[i] + self.len[i];
            while q < n {
                let j = self.queue[q];
                if ect_i > lct[j] - self.len[j] {
                    self.theta.insert(self.leaf[j], est[j], self.len[j]);
                    in_theta[j] = 1;
                    q += 1;
                } else {
                    break;
                }
            }
            let bound = if in_theta[i] == 1 {
                self.theta.remove(self.leaf[i]);
                let b = self.theta.ect();
                self.theta.insert(self.leaf[i], est[i], self.len[i]);
                b
            } else {
                self.theta.ect()
            };
            if bound > out_est[i] {
                out_est[i] = bound;
            }
        }
        self.inserted = in_theta;
    }

    /// If the other activities that may start before `lct_i` cannot all end
    /// by `lst_i`, then `i` is not last among them and must end by the
    /// latest of their latest starts.
    fn not_last(&mut self, est: &[Time], lct: &[Time], out_lct: &mut [Time]) {
        let n = est.len();
        let len = &self.len;
        self.order.clear();
        self.order.extend(0..n);
        self.order.sort_unstable_by_key(|&i| (lct[i], i));
        self.queue.clear();
        self.queue.extend(0..n);
        self.queue.sort_unstable_by_key(|&j| (lct[j] - len[j], j));

        self.theta.reset(n);
        self.inserted.clear();
        let mut q = 0;
        for idx in 0..n {
            let i = self.order[idx];
            while q < n {
                let j = self.queue[q];
                if lct[i] > lct[j] - self.len[j] {
                    self.theta.insert(self.leaf[j], est[j], self.len[j]);
                    self.inserted.push(j);
                    q += 1;
                } else {
                    break;
                }
            }
            let lst_i = lct[i] - self.len[i];
            let contains_i = lst_i < lct[i];
            if contains_i {
                self.theta.remove(self.leaf[i]);
            }
            let ect_others = self.theta.ect();
            if contains_i {
                self.theta.insert(self.leaf[i], est[i], self.len[i]);
            }
            if ect_others > lst_i && ect_others != NEG_INF {
                // latest lst among inserted activities other than i
                let last = self.inserted.iter().rev().find(|&&j| j != i);
                if let Some(&j) = last {
                    let bound = lct[j] - self.len[j];
                    if bound < out_lct[i] {
                        out_lct[i] = bound;
                    }
                }
            }
        }
    }

    /// Θ-Λ edge-finding. Also detects overload.
    fn edge_finding(&mut self, est: &[Time], lct: &[Time], out_est: &mut [Time]) -> Result<(), Inconsistency> {
        let n = est.len();
        self.order.clear();
        self.order.extend(0..n);
        self.order
            .sort_unstable_by_key(|&i| (std::cmp::Reverse(lct[i]), std::cmp::Reverse(i)));
        let (by_est, len) = (&self.by_est, &self.len);
        self.tree.build_theta(by_est.iter().map(|&i| (est[i], len[i])));
        let mut idx = 0;
        let mut j = self.order[0];
        loop {
            if self.tree.ect() > lct[j] {
                return Err(Inconsistency);
            }
            self.tree.insert_lambda(self.leaf[j], est[j], self.len[j]);
            idx += 1;
            if idx == n {
                break;
            }
            j = self.order[idx];
            while self.tree.ect_bar() > lct[j] {
                let Some(leaf) = self.tree.responsible_ect() else { break };
                let i = self.by_est[leaf];
                let ect = self.tree.ect();
                if ect > out_est[i] {
                    out_est[i] = ect;
                }
                self.tree.remove(leaf);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filter(acts: &[(Time, Time, Time)], rules: DisjunctiveRules) -> Result<Vec<(Time, Time)>, Inconsistency> {
        let mut f = UnaryFilter::default();
        for &(est, len, lct) in acts {
            f.push(est, lct, len);
        }
        f.run(rules)?;
        Ok(f.new_est.iter().copied().zip(f.new_lct.iter().copied()).collect())
    }

    #[test]
    fn overload_two_long_ops() {
        for rules in [DisjunctiveRules::BASIC, DisjunctiveRules::ALL] {
            assert_eq!(filter(&[(0, 6, 10), (0, 6, 10)], rules), Err(Inconsistency));
        }
    }

    #[test]
    fn forced_pair_order() {
        // B before A would end A at 3 + 4 + 5 = 12 > 9, so A precedes B.
        for rules in [DisjunctiveRules::BASIC, DisjunctiveRules::ALL] {
            let out = filter(&[(0, 5, 9), (3, 4, 8)], rules).unwrap();
            assert_eq!(out[1].0, 5);
            assert_eq!(out[0].1, 4);
        }
    }

    #[test]
    fn edge_finding_pushes_after_a_set() {
        // A and B both fit only in [0, 8); C cannot go before both of them.
        let acts = [(0, 4, 8), (0, 4, 8), (0, 3, 20)];
        let basic = filter(&acts, DisjunctiveRules::BASIC).unwrap();
        let ef = filter(&acts, DisjunctiveRules::ALL).unwrap();
        assert!(ef[2].0 >= 8, "edge-finding est {}", ef[2].0);
        assert!(basic[2].0 <= ef[2].0);
    }
}
