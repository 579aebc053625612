use alloc::vec::Vec;

/// Result of [`enumerate_combinations`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combinations {
    /// Index subsets, grouped by size `1..=n` and lexicographic within a size.
    Subsets(Vec<Vec<usize>>),
    /// More than `cap` items; nothing was enumerated.
    Exceeded { len: usize, cap: usize },
}

/// Every non-empty subset of `0..len`, unless `len > cap`.
pub fn enumerate_combinations(len: usize, cap: usize) -> Combinations {
    if len > cap {
        return Combinations::Exceeded { len, cap };
    }
    let mut out = Vec::with_capacity((1usize << len).saturating_sub(1));
    let mut current = Vec::with_capacity(len);
    for size in 1..=len {
        choose(0, len, size, &mut current, &mut out);
    }
    Combinations::Subsets(out)
}

fn choose(start: usize, len: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for i in start..=len - remaining {
        current.push(i);
        choose(i + 1, len, remaining - 1, current, out);
        current.pop();
    }
}
