use std::collections::BTreeMap;

/// Slot exponents `d_1 < ... < d_L`: free of three-term arithmetic
/// progressions, and no element is twice another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionFreeSet {
    elements: Vec<u64>,
}

impl ProgressionFreeSet {
    /// Greedy smallest-first construction. Deterministic in `len`.
    pub fn build(len: usize) -> Self {
        assert!(len >= 1, "set size must be positive");
        let mut elements: Vec<u64> = Vec::with_capacity(len);
        let mut candidate = 1u64;
        while elements.len() < len {
            if extends(&elements, candidate) {
                elements.push(candidate);
            }
            candidate += 1;
        }
        Self { elements }
    }

    /// Wraps an explicit list after checking it with [`verify_set`].
    pub fn from_elements(elements: Vec<u64>) -> Option<Self> {
        (!elements.is_empty()
            && elements.windows(2).all(|w| w[0] < w[1])
            && verify_set(&elements))
        .then_some(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `d_i` for a 1-based slot index.
    pub fn get(&self, slot: usize) -> u64 {
        self.elements[slot - 1]
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().expect("nonempty")
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    /// Pairwise sums `f(i, j) = d_i + d_j` for `i != j`.
    pub fn cross_indices(&self) -> CrossIndexSet {
        let mut by_value = BTreeMap::new();
        let n = self.elements.len();
        for i in 1..=n {
            for j in (i + 1)..=n {
                let f = self.get(i) + self.get(j);
                by_value.entry(f).or_insert((i, j));
            }
        }
        CrossIndexSet {
            set: self.clone(),
            by_value,
        }
    }
}

/// Incremental check: `x` exceeds every current element.
fn extends(current: &[u64], x: u64) -> bool {
    for (idx, &b) in current.iter().enumerate() {
        // x as the top of a progression a, b, x
        if current[..idx].iter().any(|&a| a + x == 2 * b) {
            return false;
        }
        if x == 2 * b {
            return false;
        }
        // x + b = 2c for some c
        if (x + b).is_multiple_of(2) && current.binary_search(&((x + b) / 2)).is_ok() {
            return false;
        }
    }
    true
}

/// Brute-force check of both set conditions, `O(L^3)`.
pub fn verify_set(d: &[u64]) -> bool {
    let n = d.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if d[i] == d[j] || d[j] == 2 * d[i] {
                return false;
            }
            for k in 0..n {
                if k != i && k != j && j < k && d[j] + d[k] == 2 * d[i] {
                    return false;
                }
            }
        }
    }
    true
}

/// The set `E` of cross indices together with one witness pair per value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossIndexSet {
    set: ProgressionFreeSet,
    by_value: BTreeMap<u64, (usize, usize)>,
}

impl CrossIndexSet {
    /// `f(i, j)` for distinct 1-based slots.
    pub fn f(&self, i: usize, j: usize) -> u64 {
        debug_assert_ne!(i, j);
        self.set.get(i) + self.set.get(j)
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_value.keys().copied()
    }

    pub fn contains(&self, z: u64) -> bool {
        self.by_value.contains_key(&z)
    }

    pub fn len(&self) -> usize {
        self.by_value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_value.is_empty()
    }

    pub fn witness(&self, z: u64) -> Option<(usize, usize)> {
        self.by_value.get(&z).copied()
    }
}
