//! The asynchronous post list: three priority regions laid out front to
//! back (high, medium, low), FIFO inside each region, with markers for
//! the head and the tail of the high and medium regions.
//!
//! [`OracleQueue`] is a deliberately naive stand-in that sorts on every
//! dequeue; it exists so the marker-based list can be checked against it.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::syntax::{Expr, Priority};

/// A posted call: target method, argument expression, the argument's value
/// at post time, its priority and a program-wide post counter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsynchNode {
    pub method: String,
    pub arg_expr: Expr,
    pub arg_value: i64,
    pub priority: Priority,
    pub seq: u64,
}

impl AsynchNode {
    pub fn new(
        method: impl Into<String>,
        arg_expr: Expr,
        arg_value: i64,
        priority: Priority,
        seq: u64,
    ) -> Self {
        AsynchNode {
            method: method.into(),
            arg_expr,
            arg_value,
            priority,
            seq,
        }
    }

    fn key(&self) -> (u8, u64) {
        (self.priority.rank(), self.seq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot remove from an empty post list")]
pub struct EmptyList;

/// Scheduler interface used by the interpreter. Both the marker-based list
/// and the oracle implement it, so whole runs can be compared.
pub trait PostQueue: Default + Clone {
    fn post(&mut self, node: AsynchNode);
    fn take(&mut self) -> Option<AsynchNode>;
    fn is_empty(&self) -> bool;
    fn len(&self) -> usize;
    /// Nodes in dispatch order, front first.
    fn to_sequence(&self) -> Vec<AsynchNode>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A node sits in the wrong region.
    Partition {
        pos: usize,
        priority: Priority,
        after: Priority,
    },
    /// Two nodes of the same priority are out of post order.
    Fifo { pos: usize, seq: u64, prev_seq: u64 },
    Marker {
        marker: &'static str,
        expected: Option<usize>,
        actual: Option<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Partition {
                pos,
                priority,
                after,
            } => {
                write!(
                    f,
                    "node {pos} has priority {priority} but follows a {after} node"
                )
            }
            Violation::Fifo { pos, seq, prev_seq } => {
                write!(
                    f,
                    "node {pos} has seq {seq}, not after preceding seq {prev_seq}"
                )
            }
            Violation::Marker {
                marker,
                expected,
                actual,
            } => {
                write!(f, "marker {marker} is {actual:?}, expected {expected:?}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AsynchList {
    nodes: VecDeque<AsynchNode>,
    first: Option<usize>,
    current: Option<usize>,
    high_tail: Option<usize>,
    medium_tail: Option<usize>,
}

impl AsynchList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns a new list with `node` inserted right after the tail of its
    /// priority region. `self` is left untouched.
    pub fn add(&self, node: AsynchNode, priority: Priority) -> AsynchList {
        let mut next = self.clone();
        next.insert(node, priority);
        next
    }

    /// Returns the head node and the remaining list, or [`EmptyList`].
    pub fn remove(&self) -> Result<(AsynchNode, AsynchList), EmptyList> {
        let mut next = self.clone();
        let head = next.pop_front().ok_or(EmptyList)?;
        Ok((head, next))
    }

    pub fn insert(&mut self, node: AsynchNode, priority: Priority) {
        debug_assert_eq!(
            node.priority, priority,
            "node priority must match the posting priority"
        );
        let pos = match priority {
            Priority::High => {
                let pos = self.high_tail.map_or(0, |e| e + 1);
                self.high_tail = Some(pos);
                self.medium_tail = self.medium_tail.map(|e| e + 1);
                pos
            }
            Priority::Medium => {
                let pos = self.medium_tail.or(self.high_tail).map_or(0, |e| e + 1);
                self.medium_tail = Some(pos);
                pos
            }
            // The low region's tail is the end of the list.
            Priority::Low => self.nodes.len(),
        };
        self.nodes.insert(pos, node);
        self.first = Some(0);
        self.current = self.first;
    }

    pub fn pop_front(&mut self) -> Option<AsynchNode> {
        let head = self.nodes.pop_front()?;
        let shift = |marker: Option<usize>| marker.and_then(|e| e.checked_sub(1));
        self.high_tail = shift(self.high_tail);
        self.medium_tail = shift(self.medium_tail);
        self.first = if self.nodes.is_empty() { None } else { Some(0) };
        self.current = self.first;
        Some(head)
    }

    pub fn first_marker(&self) -> Option<usize> {
        self.first
    }

    pub fn current_marker(&self) -> Option<usize> {
        self.current
    }

    pub fn high_tail(&self) -> Option<usize> {
        self.high_tail
    }

    pub fn medium_tail(&self) -> Option<usize> {
        self.medium_tail
    }

    pub fn iter(&self) -> impl Iterator<Item = &AsynchNode> {
        self.nodes.iter()
    }

    /// Recomputes what the markers must be from the node sequence and
    /// compares against the stored ones; also checks region partition and
    /// FIFO order within regions.
    pub fn check_invariants(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for (pos, pair) in self.nodes.iter().collect::<Vec<_>>().windows(2).enumerate() {
            let (prev, node) = (pair[0], pair[1]);
            if node.priority < prev.priority {
                violations.push(Violation::Partition {
                    pos: pos + 1,
                    priority: node.priority,
                    after: prev.priority,
                });
            } else if node.priority == prev.priority && node.seq <= prev.seq {
                violations.push(Violation::Fifo {
                    pos: pos + 1,
                    seq: node.seq,
                    prev_seq: prev.seq,
                });
            }
        }
        let last_of = |p: Priority| self.nodes.iter().rposition(|n| n.priority == p);
        let first = if self.nodes.is_empty() { None } else { Some(0) };
        let expected = [
            ("f", first, self.first),
            ("c", first, self.current),
            ("e_h", last_of(Priority::High), self.high_tail),
            ("e_m", last_of(Priority::Medium), self.medium_tail),
        ];
        for (marker, expected, actual) in expected {
            if expected != actual {
                violations.push(Violation::Marker {
                    marker,
                    expected,
                    actual,
                });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }
}

impl PostQueue for AsynchList {
    fn post(&mut self, node: AsynchNode) {
        let p = node.priority;
        self.insert(node, p);
    }

    fn take(&mut self) -> Option<AsynchNode> {
        self.pop_front()
    }

    fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn to_sequence(&self) -> Vec<AsynchNode> {
        self.nodes.iter().cloned().collect()
    }
}

/// Brute-force reference queue: a flat bag of entries, stably sorted by
/// `(rank, seq)` whenever its order is observed.
#[derive(Clone, Debug, Default)]
pub struct OracleQueue {
    entries: Vec<AsynchNode>,
}

impl OracleQueue {
    pub fn new() -> Self {
        Self::default()
    }

    fn sorted(&self) -> Vec<AsynchNode> {
        let mut v = self.entries.clone();
        v.sort_by_key(AsynchNode::key);
        v
    }
}

impl PostQueue for OracleQueue {
    fn post(&mut self, node: AsynchNode) {
        self.entries.push(node);
    }

    fn take(&mut self) -> Option<AsynchNode> {
        if self.entries.is_empty() {
            return None;
        }
        self.entries.sort_by_key(AsynchNode::key);
        Some(self.entries.remove(0))
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn to_sequence(&self) -> Vec<AsynchNode> {
        self.sorted()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(name: &str, p: Priority, seq: u64) -> AsynchNode {
        AsynchNode::new(name, Expr::int(0), 0, p, seq)
    }

    fn names(li: &AsynchList) -> Vec<String> {
        li.iter().map(|n| n.method.clone()).collect()
    }

    #[test]
    fn singleton_insertion() {
        let li = AsynchList::new().add(node("n1", Priority::High, 1), Priority::High);
        assert_eq!(names(&li), ["n1"]);
        assert_eq!(li.first_marker(), Some(0));
        assert_eq!(li.current_marker(), Some(0));
        assert_eq!(li.high_tail(), Some(0));
        assert_eq!(li.medium_tail(), None);
    }

    #[test]
    fn high_goes_after_high_tail() {
        let li = AsynchList::new()
            .add(node("H1", Priority::High, 1), Priority::High)
            .add(node("M1", Priority::Medium, 2), Priority::Medium)
            .add(node("L1", Priority::Low, 3), Priority::Low);
        let li = li.add(node("H2", Priority::High, 4), Priority::High);
        assert_eq!(names(&li), ["H1", "H2", "M1", "L1"]);
        assert_eq!(li.high_tail(), Some(1));
        assert_eq!(li.medium_tail(), Some(2));
        li.check_invariants().unwrap();
    }

    #[test]
    fn medium_goes_after_high_when_medium_empty() {
        let li = AsynchList::new()
            .add(node("H1", Priority::High, 1), Priority::High)
            .add(node("L1", Priority::Low, 2), Priority::Low)
            .add(node("M1", Priority::Medium, 3), Priority::Medium);
        assert_eq!(names(&li), ["H1", "M1", "L1"]);
        assert_eq!(li.medium_tail(), Some(1));
        let li = AsynchList::new()
            .add(node("L1", Priority::Low, 1), Priority::Low)
            .add(node("M1", Priority::Medium, 2), Priority::Medium);
        assert_eq!(names(&li), ["M1", "L1"]);
    }

    #[test]
    fn add_leaves_original_untouched() {
        let a = AsynchList::new().add(node("a", Priority::Low, 1), Priority::Low);
        let b = a.add(node("b", Priority::High, 2), Priority::High);
        assert_eq!(names(&a), ["a"]);
        assert_eq!(names(&b), ["b", "a"]);
        let (_, rest) = b.remove().unwrap();
        assert_eq!(names(&b), ["b", "a"]);
        assert_eq!(names(&rest), ["a"]);
    }

    #[test]
    fn remove_head_and_singleton_identity() {
        let li = AsynchList::new()
            .add(node("n1", Priority::Low, 1), Priority::Low)
            .add(node("n2", Priority::Low, 2), Priority::Low);
        let (head, rest) = li.remove().unwrap();
        assert_eq!(head.method, "n1");
        assert_eq!(names(&rest), ["n2"]);

        for (i, p) in Priority::ALL.into_iter().enumerate() {
            let n = node("n", p, i as u64 + 1);
            let (head, rest) = AsynchList::new().add(n.clone(), p).remove().unwrap();
            assert_eq!(head, n);
            assert_eq!(rest, AsynchList::new());
        }
    }

    #[test]
    fn remove_from_empty_fails() {
        assert_eq!(AsynchList::new().remove().unwrap_err(), EmptyList);
    }

    #[test]
    fn drain_follows_priority_then_post_order() {
        let mut li = AsynchList::new();
        for (i, (name, p)) in [
            ("L1", Priority::Low),
            ("H1", Priority::High),
            ("M1", Priority::Medium),
            ("H2", Priority::High),
        ]
        .into_iter()
        .enumerate()
        {
            li = li.add(node(name, p, i as u64 + 1), p);
        }
        assert_eq!(names(&li), ["H1", "H2", "M1", "L1"]);
        let mut drained = Vec::new();
        while let Ok((n, rest)) = li.remove() {
            drained.push(n.method);
            rest.check_invariants().unwrap();
            li = rest;
        }
        assert_eq!(drained, ["H1", "H2", "M1", "L1"]);
        assert!(PostQueue::is_empty(&li));
    }

    #[test]
    fn markers_shift_on_remove() {
        let li = AsynchList::new()
            .add(node("H1", Priority::High, 1), Priority::High)
            .add(node("M1", Priority::Medium, 2), Priority::Medium)
            .add(node("M2", Priority::Medium, 3), Priority::Medium);
        let (_, li) = li.remove().unwrap();
        assert_eq!(li.high_tail(), None);
        assert_eq!(li.medium_tail(), Some(1));
        let (_, li) = li.remove().unwrap();
        assert_eq!(li.medium_tail(), Some(0));
        let (_, li) = li.remove().unwrap();
        assert_eq!(li.medium_tail(), None);
        assert_eq!(li.first_marker(), None);
    }

    #[test]
    fn check_invariants_detects_corruption() {
        let mut li = AsynchList::new()
            .add(node("H1", Priority::High, 1), Priority::High)
            .add(node("L1", Priority::Low, 2), Priority::Low);
        li.high_tail = None;
        assert!(matches!(
            li.check_invariants().unwrap_err()[..],
            [Violation::Marker { marker: "e_h", .. }]
        ));

        let mut li = AsynchList::new()
            .add(node("a", Priority::Low, 1), Priority::Low)
            .add(node("b", Priority::Low, 2), Priority::Low);
        li.nodes.swap(0, 1);
        assert!(matches!(
            li.check_invariants().unwrap_err()[..],
            [Violation::Fifo { pos: 1, .. }]
        ));

        let mut li = AsynchList::new()
            .add(node("a", Priority::Low, 1), Priority::Low)
            .add(node("b", Priority::Medium, 2), Priority::Medium);
        li.nodes.swap(0, 1);
        let v = li.check_invariants().unwrap_err();
        assert!(v.iter().any(|v| matches!(v, Violation::Partition { .. })));
    }

    #[test]
    fn oracle_orders_by_rank_then_seq() {
        let mut q = OracleQueue::new();
        for (i, p) in [
            Priority::Low,
            Priority::High,
            Priority::Medium,
            Priority::High,
        ]
        .into_iter()
        .enumerate()
        {
            q.post(node(&format!("n{}", i + 1), p, i as u64 + 1));
        }
        let order: Vec<_> = std::iter::from_fn(|| q.take()).map(|n| n.method).collect();
        assert_eq!(order, ["n2", "n4", "n3", "n1"]);
    }
}
