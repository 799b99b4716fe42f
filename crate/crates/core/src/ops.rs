//! Per-thread operation counters.
//!
//! Arithmetic-heavy routines record how many field additions and
//! multiplications, group additions and scalar multiplications, and pairings
//! they execute. Counts are kept per thread so concurrently running tests do
//! not see each other's work; code that fans out to worker threads must hand
//! the workers' counts back with [`absorb`].

use std::cell::Cell;
use std::ops::{Add, AddAssign, Sub};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub field_add: u64,
    pub field_mul: u64,
    pub group_add: u64,
    pub group_mul: u64,
    pub pairings: u64,
}

impl Add for OpCounts {
    type Output = OpCounts;
    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            field_add: self.field_add + o.field_add,
            field_mul: self.field_mul + o.field_mul,
            group_add: self.group_add + o.group_add,
            group_mul: self.group_mul + o.group_mul,
            pairings: self.pairings + o.pairings,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

impl Sub for OpCounts {
    type Output = OpCounts;
    fn sub(self, o: OpCounts) -> OpCounts {
        OpCounts {
            field_add: self.field_add - o.field_add,
            field_mul: self.field_mul - o.field_mul,
            group_add: self.group_add - o.group_add,
            group_mul: self.group_mul - o.group_mul,
            pairings: self.pairings - o.pairings,
        }
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = Cell::new(OpCounts::default());
}

pub fn snapshot() -> OpCounts {
    COUNTS.with(|c| c.get())
}

/// Adds counts gathered on another thread to this thread's tally.
pub fn absorb(counts: OpCounts) {
    COUNTS.with(|c| c.set(c.get() + counts));
}

/// Runs `f` and returns its result with the operations it performed on this
/// thread (plus anything it absorbed from workers).
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}

#[inline]
pub(crate) fn field(adds: u64, muls: u64) {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.field_add += adds;
        v.field_mul += muls;
        c.set(v);
    });
}

#[inline]
pub(crate) fn group(adds: u64, muls: u64) {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.group_add += adds;
        v.group_mul += muls;
        c.set(v);
    });
}

#[inline]
pub(crate) fn pairings(n: u64) {
    COUNTS.with(|c| {
        let mut v = c.get();
        v.pairings += n;
        c.set(v);
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_isolates_work() {
        field(1, 1);
        let ((), got) = measure(|| {
            field(3, 2);
            pairings(3);
        });
        assert_eq!(
            got,
            OpCounts {
                field_add: 3,
                field_mul: 2,
                pairings: 3,
                ..Default::default()
            }
        );
    }

    #[test]
    fn worker_counts_are_absorbed() {
        let ((), got) = measure(|| {
            let child = std::thread::spawn(|| measure(|| group(5, 5)).1).join().unwrap();
            absorb(child);
        });
        assert_eq!(got.group_add, 5);
        assert_eq!(got.group_mul, 5);
    }
}
