//! Binary indexed tree over nonnegative weights with prefix search.

use std::ops::{AddAssign, Sub, SubAssign};

#[derive(Debug, Clone)]
pub(crate) struct Fenwick<T> {
    tree: Vec<T>,
    values: Vec<T>,
    total: T,
}

impl<T> Fenwick<T>
where
    T: Copy + Default + PartialOrd + AddAssign + SubAssign + Sub<Output = T>,
{
    pub fn from_values(values: Vec<T>) -> Self {
        let n = values.len();
        let mut tree = vec![T::default(); n + 1];
        let mut total = T::default();
        for (i, &v) in values.iter().enumerate() {
            total += v;
            let mut k = i + 1;
            while k <= n {
                tree[k] += v;
                k += k & k.wrapping_neg();
            }
        }
        Self { tree, values, total }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> T {
        self.total
    }

    pub fn set(&mut self, i: usize, v: T) {
        let old = self.values[i];
        if v == old {
            return;
        }
        self.values[i] = v;
        let n = self.len();
        let mut k = i + 1;
        if v > old {
            let d = v - old;
            self.total += d;
            while k <= n {
                self.tree[k] += d;
                k += k & k.wrapping_neg();
            }
        } else {
            let d = old - v;
            self.total -= d;
            while k <= n {
                self.tree[k] -= d;
                k += k & k.wrapping_neg();
            }
        }
    }

    /// Smallest index whose inclusive prefix sum exceeds `u`, for `0 <= u < total`.
    ///
    /// Rounding drift in floating-point trees can push the walk past the
    /// end; the last index with positive weight is returned then.
    pub fn find(&self, mut u: T) -> usize {
        let n = self.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            step >>= 1;
        }
        if pos < n && self.values[pos] > T::default() {
            return pos;
        }
        self.values
            .iter()
            .rposition(|&v| v > T::default())
            .expect("find on an all-zero tree")
    }
}
