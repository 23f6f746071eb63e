use crate::error::{Error, Result};

/// Ground set `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    pub n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn check(&self, set: &ItemSet) -> Result<()> {
        match set.items.last() {
            Some(&last) if last >= self.n => Err(Error::invalid(format!(
                "item {last} outside ground set of size {}",
                self.n
            ))),
            _ => Ok(()),
        }
    }

    pub fn full(&self) -> ItemSet {
        ItemSet {
            items: (0..self.n).collect(),
        }
    }
}

/// Sorted set of distinct item indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet {
    items: Vec<usize>,
}

impl ItemSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts `items`; duplicates are an error.
    pub fn new(mut items: Vec<usize>) -> Result<Self> {
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate item {}", w[0])));
        }
        Ok(Self { items })
    }

    /// Items whose bit is set in `mask`.
    pub fn from_mask(mask: u64) -> Self {
        Self {
            items: (0..64).filter(|b| mask >> b & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    /// Inserts `item`; returns `false` if it was already present.
    pub fn insert(&mut self, item: usize) -> bool {
        match self.items.binary_search(&item) {
            Ok(_) => false,
            Err(pos) => {
                self.items.insert(pos, item);
                true
            }
        }
    }

    pub fn with(&self, item: usize) -> Self {
        let mut s = self.clone();
        s.insert(item);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.items
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut items = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.items.iter().peekable(), other.items.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x <= y {
                        items.push(x);
                        a.next();
                        if x == y {
                            b.next();
                        }
                    } else {
                        items.push(y);
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    items.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    items.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { items }
    }

    /// 0/1 indicator vector of length `n`.
    pub fn indicator<F: crate::Scalar>(&self, n: usize) -> Vec<F> {
        let mut x = vec![F::zero(); n];
        for i in self.iter() {
            x[i] = F::one();
        }
        x
    }
}

impl std::fmt::Display for ItemSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.items.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// Sorted union of all sets.
pub fn union_bicriterion(solutions: &[ItemSet]) -> ItemSet {
    solutions
        .iter()
        .fold(ItemSet::empty(), |acc, s| acc.union(s))
}
