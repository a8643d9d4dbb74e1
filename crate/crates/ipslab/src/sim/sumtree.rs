//! Complete binary sum tree over per-site rates.
//!
//! Internal nodes always equal the sum of their children recomputed on
//! update (never adjusted by deltas), so a tree rebuilt from the same
//! leaves is bit-identical; the debug cache check relies on this.

#[derive(Debug, Clone, PartialEq)]
pub struct SumTree {
    len: usize,
    cap: usize,
    nodes: Vec<f64>, // 1-based heap; leaf i at cap + i
}

impl SumTree {
    pub fn new(values: &[f64]) -> SumTree {
        let len = values.len();
        let cap = len.next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * cap];
        nodes[cap..cap + len].copy_from_slice(values);
        for k in (1..cap).rev() {
            nodes[k] = nodes[2 * k] + nodes[2 * k + 1];
        }
        SumTree { len, cap, nodes }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.cap + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut k = self.cap + i;
        self.nodes[k] = value;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    /// Find the leaf holding mass `u` (for `0 <= u < total`) and return it
    /// with the remaining offset into the leaf. Since every internal node
    /// is exactly the sum of its children, the descent never runs past the
    /// stored mass.
    pub fn descend(&self, mut u: f64) -> (usize, f64) {
        let mut k = 1usize;
        while k < self.cap {
            let left = self.nodes[2 * k];
            if u < left {
                k *= 2;
            } else {
                u -= left;
                k = 2 * k + 1;
            }
        }
        let mut leaf = k - self.cap;
        if leaf >= self.len {
            // total() rounding put us past the last real leaf; clamp to the
            // last leaf carrying mass
            leaf = (0..self.len)
                .rev()
                .find(|&i| self.get(i) > 0.0)
                .unwrap_or(0);
            u = 0.0;
        }
        (leaf, u)
    }

    /// Bitwise equality with a tree rebuilt from scratch on `values`.
    pub fn matches_rebuild(&self, values: &[f64]) -> bool {
        *self == SumTree::new(values)
    }
}
