use crate::{Error, Result};

/// Sorted, deduplicated set of vertex ids drawn from `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    members: Vec<usize>,
}

impl VertexSet {
    /// Sorts and deduplicates `members`; ids outside `0..n` are an error.
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidArgument(format!(
                "vertex {bad} out of range for {n} vertices"
            )));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { n, members })
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            members: (0..n).collect(),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            members: Vec::new(),
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            n: mask.len(),
            members: (0..mask.len()).filter(|&i| mask[i]).collect(),
        }
    }

    /// Vertices where `signal` is exactly zero.
    pub fn zeros_of(signal: &[f64]) -> Self {
        Self::from_mask(&signal.iter().map(|&x| x == 0.0).collect::<Vec<_>>())
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.n
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &v in &self.members {
            m[v] = true;
        }
        m
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        Self {
            n: self.n,
            members: (0..self.n).filter(|&v| !mask[v]).collect(),
        }
    }

    /// Position of each vertex within the set, `usize::MAX` for non-members.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in self.members.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }

    /// `signal` restricted to the members, in member order.
    pub fn gather(&self, signal: &[f64]) -> Vec<f64> {
        self.members.iter().map(|&v| signal[v]).collect()
    }

    pub(crate) fn check_universe(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::InvalidArgument(format!(
                "vertex set is over {} vertices, graph has {n}",
                self.n
            )));
        }
        Ok(())
    }
}
