//! Θ-Λ tree over a set of activities ordered by earliest start.
//!
//! Each leaf is empty, white (in Θ) or gray (in Λ). Inner nodes keep the
//! total processing time and earliest completion time of the white leaves in
//! their subtree, plus the same quantities when at most one gray leaf may be
//! added, together with the gray leaf responsible for them.

use crate::instance::Time;

pub(crate) const NEG_INF: Time = Time::MIN / 4;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    sum_p: Time,
    ect: Time,
    sum_p_bar: Time,
    ect_bar: Time,
    resp_p: usize,
    resp_ect: usize,
}

const EMPTY: Node = Node {
    sum_p: 0,
    ect: NEG_INF,
    sum_p_bar: 0,
    ect_bar: NEG_INF,
    resp_p: NONE,
    resp_ect: NONE,
};

#[derive(Debug, Default)]
pub(crate) struct ThetaLambdaTree {
    leaves: usize,
    nodes: Vec<Node>,
}

impl ThetaLambdaTree {
    /// Clears the tree for `n` leaves, all empty.
    pub fn reset(&mut self, n: usize) {
        self.leaves = n.max(1).next_power_of_two();
        self.nodes.clear();
        self.nodes.resize(2 * self.leaves, EMPTY);
    }

    /// Resets the tree with every activity in Θ; `acts[leaf]` is
    /// `(est, p)`.
    pub fn build_theta(&mut self, acts: impl ExactSizeIterator<Item = (Time, Time)>) {
        self.reset(acts.len());
        for (leaf, (est, p)) in acts.enumerate() {
            self.nodes[self.leaves + leaf] = theta_leaf(est, p);
        }
        for i in (1..self.leaves).rev() {
            self.nodes[i] = combine(&self.nodes[2 * i], &self.nodes[2 * i + 1]);
        }
    }

    #[cfg(test)]
    pub fn insert_theta(&mut self, leaf: usize, est: Time, p: Time) {
        self.set(leaf, theta_leaf(est, p));
    }

    pub fn insert_lambda(&mut self, leaf: usize, est: Time, p: Time) {
        self.set(
            leaf,
            Node {
                sum_p: 0,
                ect: NEG_INF,
                sum_p_bar: p,
                ect_bar: est + p,
                resp_p: leaf,
                resp_ect: leaf,
            },
        );
    }

    pub fn remove(&mut self, leaf: usize) {
        self.set(leaf, EMPTY);
    }

    pub fn ect(&self) -> Time {
        self.nodes[1].ect
    }

    pub fn ect_bar(&self) -> Time {
        self.nodes[1].ect_bar
    }

    /// Gray leaf responsible for `ect_bar`, if any.
    pub fn responsible_ect(&self) -> Option<usize> {
        let r = self.nodes[1].resp_ect;
        (r != NONE).then_some(r)
    }

    fn set(&mut self, leaf: usize, node: Node) {
        let mut i = self.leaves + leaf;
        self.nodes[i] = node;
        while i > 1 {
            i /= 2;
            self.nodes[i] = combine(&self.nodes[2 * i], &self.nodes[2 * i + 1]);
        }
    }
}

fn theta_leaf(est: Time, p: Time) -> Node {
    Node {
        sum_p: p,
        ect: est + p,
        sum_p_bar: p,
        ect_bar: est + p,
        resp_p: NONE,
        resp_ect: NONE,
    }
}

#[inline]
fn combine(l: &Node, r: &Node) -> Node {
    let sum_p = l.sum_p + r.sum_p;
    let ect = r.ect.max(l.ect + r.sum_p);

    let (a, b) = (l.sum_p_bar + r.sum_p, l.sum_p + r.sum_p_bar);
    let (sum_p_bar, resp_p) = pick(&[(a, l.resp_p), (b, r.resp_p)]);

    let (ect_bar, resp_ect) = pick(&[
        (r.ect_bar, r.resp_ect),
        (l.ect + r.sum_p_bar, r.resp_p),
        (l.ect_bar + r.sum_p, l.resp_ect),
    ]);

    Node {
        sum_p,
        ect,
        sum_p_bar,
        ect_bar,
        resp_p,
        resp_ect,
    }
}

/// Maximum value; on ties prefer a term that has a responsible gray leaf.
#[inline]
fn pick(terms: &[(Time, usize)]) -> (Time, usize) {
    let mut best = terms[0];
    for &t in &terms[1..] {
        if t.0 > best.0 || (t.0 == best.0 && best.1 == NONE) {
            best = t;
        }
    }
    best
}

/// Θ tree without gray leaves: total processing time and earliest
/// completion time of the inserted activities.
#[derive(Debug, Default)]
pub(crate) struct ThetaTree {
    leaves: usize,
    sum_p: Vec<Time>,
    ect: Vec<Time>,
}

impl ThetaTree {
    pub fn reset(&mut self, n: usize) {
        self.leaves = n.max(1).next_power_of_two();
        self.sum_p.clear();
        self.sum_p.resize(2 * self.leaves, 0);
        self.ect.clear();
        self.ect.resize(2 * self.leaves, NEG_INF);
    }

    pub fn insert(&mut self, leaf: usize, est: Time, p: Time) {
        self.set(leaf, p, est + p);
    }

    pub fn remove(&mut self, leaf: usize) {
        self.set(leaf, 0, NEG_INF);
    }

    pub fn ect(&self) -> Time {
        self.ect[1]
    }

    fn set(&mut self, leaf: usize, p: Time, ect: Time) {
        let mut i = self.leaves + leaf;
        self.sum_p[i] = p;
        self.ect[i] = ect;
        while i > 1 {
            i /= 2;
            let (l, r) = (2 * i, 2 * i + 1);
            self.sum_p[i] = self.sum_p[l] + self.sum_p[r];
            self.ect[i] = self.ect[r].max(self.ect[l] + self.sum_p[r]);
        }
    }
}
