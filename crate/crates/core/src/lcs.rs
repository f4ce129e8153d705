//! Longest common subsequence, shared by the sentence and story scorers.

/// Length of the longest common subsequence of `a` and `b`.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Incremental LCS against a fixed `target`: one DP row per consumed item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcsRow {
    row: Vec<usize>,
}

impl LcsRow {
    pub fn new(target_len: usize) -> Self {
        LcsRow {
            row: vec![0; target_len + 1],
        }
    }

    pub fn push<T: PartialEq>(&self, item: &T, target: &[T]) -> LcsRow {
        let mut next = vec![0usize; self.row.len()];
        for (j, y) in target.iter().enumerate() {
            next[j + 1] = if item == y {
                self.row[j] + 1
            } else {
                next[j].max(self.row[j + 1])
            };
        }
        LcsRow { row: next }
    }

    pub fn value(&self) -> usize {
        *self.row.last().unwrap_or(&0)
    }
}

/// `lcs / max(|current|, |goal|)` as an integer pair; `(0, 1)` when both are empty.
pub fn in_order_ratio<T: PartialEq>(current: &[T], goal: &[T]) -> (u64, u64) {
    let den = current.len().max(goal.len());
    if current.is_empty() || den == 0 {
        return (0, 1);
    }
    (lcs_len(current, goal) as u64, den as u64)
}
