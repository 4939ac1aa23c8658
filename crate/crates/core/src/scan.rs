//! Deterministic max-reduction for exhaustive scans.
//!
//! Scans run in parallel, so the reduction has to be independent of the
//! schedule: the larger margin wins and ties go to the lexicographically
//! smallest index tuple.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Worst<K> {
    pub margin: f64,
    pub key: Option<K>,
    pub count: usize,
}

impl<K: Ord + Copy> Worst<K> {
    pub fn empty() -> Self {
        Worst {
            margin: f64::NEG_INFINITY,
            key: None,
            count: 0,
        }
    }

    pub fn push(&mut self, margin: f64, key: K) {
        self.count += 1;
        if self.better(margin, key) {
            self.margin = margin;
            self.key = Some(key);
        }
    }

    fn better(&self, margin: f64, key: K) -> bool {
        match self.key {
            None => true,
            Some(cur) => match margin.total_cmp(&self.margin) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => key < cur,
            },
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        let count = self.count + other.count;
        if let Some(k) = other.key {
            if self.better(other.margin, k) {
                self.margin = other.margin;
                self.key = Some(k);
            }
        }
        self.count = count;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_prefer_smallest_key() {
        let mut a = Worst::empty();
        a.push(1.0, (3, 1));
        a.push(1.0, (2, 9));
        let mut b = Worst::empty();
        b.push(1.0, (2, 5));
        let ab = a.merge(b);
        let ba = b.merge(a);
        assert_eq!(ab.key, Some((2, 5)));
        assert_eq!(ba.key, Some((2, 5)));
        assert_eq!(ab.count, 3);
    }

    #[test]
    fn larger_margin_wins() {
        let mut a = Worst::empty();
        a.push(-1.0, 0usize);
        a.push(2.0, 7);
        a.push(0.5, 1);
        assert_eq!(a.key, Some(7));
        assert_eq!(a.margin, 2.0);
    }
}
