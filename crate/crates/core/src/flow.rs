//! Exact max-flow by shortest augmenting paths (Edmonds–Karp).
//!
//! Capacities are any exact ordered ring element (`i128`, `BigInt`,
//! `BigRational`), so augmenting-path termination is guaranteed and the
//! resulting flows are exact. Arcs are scanned in insertion order, which makes
//! the flow (and any certificate read off it) reproducible.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Sub};

use num_traits::Zero;

pub trait Capacity: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T> Capacity for T where T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T> {}

#[derive(Debug, Clone)]
struct Arc<C> {
    to: usize,
    cap: C,
    flow: C,
}

/// Handle of an arc added with [`FlowNetwork::add_arc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcId(usize);

#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    arcs: Vec<Arc<C>>,
    adjacency: Vec<Vec<usize>>,
}

impl<C: Capacity> FlowNetwork<C> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: C) -> ArcId {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap,
            flow: C::zero(),
        });
        self.arcs.push(Arc {
            to: from,
            cap: C::zero(),
            flow: C::zero(),
        });
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        ArcId(id)
    }

    pub fn flow_on(&self, arc: ArcId) -> &C {
        &self.arcs[arc.0].flow
    }

    fn residual(&self, arc: usize) -> C {
        // Reverse arcs carry the negated flow of their partner.
        let a = &self.arcs[arc];
        if arc % 2 == 0 {
            a.cap.clone() - a.flow.clone()
        } else {
            self.arcs[arc - 1].flow.clone()
        }
    }

    fn push(&mut self, arc: usize, amount: &C) {
        if arc % 2 == 0 {
            let a = &mut self.arcs[arc];
            a.flow = a.flow.clone() + amount.clone();
        } else {
            let a = &mut self.arcs[arc - 1];
            a.flow = a.flow.clone() - amount.clone();
        }
    }

    /// Run to a maximum flow from `source` to `sink` and return its value.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> C {
        let mut total = C::zero();
        if source == sink {
            return total;
        }
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; self.nodes()];
            let mut seen = vec![false; self.nodes()];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &arc in &self.adjacency[u] {
                    let v = self.arcs[arc].to;
                    if !seen[v] && self.residual(arc) > C::zero() {
                        seen[v] = true;
                        parent[v] = Some(arc);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck: Option<C> = None;
            let mut v = sink;
            while let Some(arc) = parent[v] {
                let r = self.residual(arc);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = self.arcs[arc ^ 1].to;
            }
            let amount = bottleneck.expect("augmenting path has at least one arc");
            let mut v = sink;
            while let Some(arc) = parent[v] {
                self.push(arc, &amount);
                v = self.arcs[arc ^ 1].to;
            }
            total = total + amount;
        }
    }

    /// Nodes reachable from `source` in the residual network. After
    /// [`max_flow`](Self::max_flow) this is the source side of a minimum cut.
    pub fn source_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &arc in &self.adjacency[u] {
                let v = self.arcs[arc].to;
                if !seen[v] && self.residual(arc) > C::zero() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

/// Maximum-weight up-closed subset of a finite poset.
///
/// `weights[v]` is the gain of taking `v`; `above[v]` lists elements that
/// must be taken whenever `v` is (it need only generate the order, e.g. cover
/// relations). Returns the optimum value and a maximising selection.
pub fn max_weight_closure<C>(weights: &[C], above: &[Vec<usize>]) -> (C, Vec<bool>)
where
    C: Capacity + num_traits::Signed,
{
    let n = weights.len();
    let source = n;
    let sink = n + 1;
    let mut positive = C::zero();
    let mut infinite = C::one();
    for w in weights {
        infinite = infinite + w.abs();
        if w.is_positive() {
            positive = positive + w.clone();
        }
    }
    let mut net = FlowNetwork::new(n + 2);
    for (v, w) in weights.iter().enumerate() {
        if w.is_positive() {
            net.add_arc(source, v, w.clone());
        } else if w.is_negative() {
            net.add_arc(v, sink, -w.clone());
        }
    }
    for (v, ups) in above.iter().enumerate() {
        for &u in ups {
            net.add_arc(v, u, infinite.clone());
        }
    }
    let cut = net.max_flow(source, sink);
    let side = net.source_side(source);
    (positive - cut, side[..n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, Rational};

    #[test]
    fn small_integer_network() {
        let mut net = FlowNetwork::<i128>::new(4);
        net.add_arc(0, 1, 10);
        net.add_arc(1, 3, 15);
        net.add_arc(0, 2, 20);
        net.add_arc(2, 3, 5);
        net.add_arc(1, 2, 4);
        assert_eq!(net.max_flow(0, 3), 15);
        let side = net.source_side(0);
        assert!(side[0] && !side[3]);
    }

    #[test]
    fn rational_capacities_are_exact() {
        let mut net = FlowNetwork::<Rational>::new(3);
        let a = net.add_arc(0, 1, ratio(1, 3));
        net.add_arc(1, 2, ratio(1, 2));
        assert_eq!(net.max_flow(0, 2), ratio(1, 3));
        assert_eq!(net.flow_on(a), &ratio(1, 3));
    }

    #[test]
    fn closure_respects_order() {
        // 0 -> 1 (taking 0 forces 1): gains 5, -3, and an isolated -1.
        let (best, pick) = max_weight_closure::<i128>(&[5, -3, -1], &[vec![1], vec![], vec![]]);
        assert_eq!(best, 2);
        assert_eq!(pick, vec![true, true, false]);
        let (best, pick) = max_weight_closure::<i128>(&[2, -3], &[vec![1], vec![]]);
        assert_eq!(best, 0);
        assert_eq!(pick, vec![false, false]);
    }
}
