/// Known/erased flags over the `n` positions of a codeword.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ErasurePattern {
    known: Vec<bool>,
}

impl ErasurePattern {
    pub fn all_erased(n: usize) -> Self {
        Self {
            known: vec![false; n],
        }
    }

    pub fn all_known(n: usize) -> Self {
        Self {
            known: vec![true; n],
        }
    }

    pub fn from_known(known: Vec<bool>) -> Self {
        Self { known }
    }

    /// Pattern of length `n` in which exactly the listed positions are known.
    pub fn from_positions(n: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut known = vec![false; n];
        for p in positions {
            known[p] = true;
        }
        Self { known }
    }

    /// Bit `i` of `mask` gives position `i` (n <= 64).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        Self {
            known: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    #[inline]
    pub fn is_known(&self, i: usize) -> bool {
        self.known[i]
    }

    pub fn set_known(&mut self, i: usize) {
        self.known[i] = true;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.known
    }

    pub fn known_count(&self) -> usize {
        self.known.iter().filter(|&&k| k).count()
    }

    pub fn erased_count(&self) -> usize {
        self.len() - self.known_count()
    }

    pub fn is_complete(&self) -> bool {
        self.known.iter().all(|&k| k)
    }

    pub fn known_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(|(i, _)| i)
    }

    pub fn erased_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, &k)| !k)
            .map(|(i, _)| i)
    }

    /// Every position known here is also known in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.len() == other.len() && self.known.iter().zip(&other.known).all(|(&a, &b)| !a || b)
    }

    /// Left and right Plotkin halves.
    pub fn halves(&self) -> (&[bool], &[bool]) {
        self.known.split_at(self.known.len() / 2)
    }
}

impl std::fmt::Debug for ErasurePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self
            .known
            .iter()
            .map(|&k| if k { '1' } else { 'x' })
            .collect();
        write!(f, "ErasurePattern({s})")
    }
}
