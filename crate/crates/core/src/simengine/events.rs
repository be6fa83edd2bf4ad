use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::traffic::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival(ClassId),
    Departure(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    /// Insertion order; breaks ties between equal times.
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-time event queue, FIFO among equal times.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        debug_assert!(time >= 0.0);
        self.heap.push(Reverse(Event { time, seq: self.next_seq, kind }));
        self.next_seq += 1;
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_pop_in_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(1.0, EventKind::Departure(7));
        q.schedule(1.0, EventKind::Departure(3));
        q.schedule(0.5, EventKind::Arrival(ClassId::Type2Interactive));
        assert_eq!(q.pop().unwrap().kind, EventKind::Arrival(ClassId::Type2Interactive));
        assert_eq!(q.pop().unwrap().kind, EventKind::Departure(7));
        assert_eq!(q.pop().unwrap().kind, EventKind::Departure(3));
        assert!(q.pop().is_none());
    }

    proptest! {
        #[test]
        fn pops_are_time_ordered(times in proptest::collection::vec(0.0f64..100.0, 1..200)) {
            let mut q = EventQueue::new();
            for (i, t) in times.iter().enumerate() {
                q.schedule(*t, EventKind::Departure(i as u64));
            }
            let mut last = (f64::NEG_INFINITY, 0u64);
            while let Some(e) = q.pop() {
                prop_assert!(e.time > last.0 || (e.time == last.0 && e.seq > last.1));
                last = (e.time, e.seq);
            }
        }
    }
}
