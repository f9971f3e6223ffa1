use std::collections::BTreeMap;
use std::fmt;

/// A finite multiset with deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset<T: Ord>(BTreeMap<T, usize>);

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Multiset(BTreeMap::new())
    }
}

impl<T: Ord> Multiset<T> {
    pub fn new() -> Self {
        Multiset::default()
    }

    pub fn insert(&mut self, item: T) {
        *self.0.entry(item).or_insert(0) += 1;
    }

    pub fn count(&self, item: &T) -> usize {
        self.0.get(item).copied().unwrap_or(0)
    }

    /// Total number of elements, with multiplicity.
    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct elements with their multiplicities.
    pub fn counts(&self) -> impl Iterator<Item = (&T, usize)> {
        self.0.iter().map(|(k, &v)| (k, v))
    }

    /// Elements with multiplicity, in order.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.0.iter().flat_map(|(k, &n)| std::iter::repeat_n(k, n))
    }

    /// Multiset difference: multiplicities are subtracted, saturating at zero.
    pub fn difference(&self, other: &Multiset<T>) -> Multiset<T>
    where
        T: Clone,
    {
        Multiset(
            self.0
                .iter()
                .filter_map(|(k, &n)| {
                    let left = n.saturating_sub(other.count(k));
                    (left > 0).then(|| (k.clone(), left))
                })
                .collect(),
        )
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for item in iter {
            m.insert(item);
        }
        m
    }
}

impl<T: Ord + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[|")?;
        for (i, item) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            } else {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        if !self.is_empty() {
            f.write_str(" ")?;
        }
        f.write_str("|]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_with_multiplicity() {
        let m: Multiset<&str> = ["a", "b", "a"].into_iter().collect();
        assert_eq!(m.len(), 3);
        assert_eq!(m.count(&"a"), 2);
        assert_eq!(m.iter().copied().collect::<Vec<_>>(), ["a", "a", "b"]);
        assert_eq!(m.to_string(), "[| a, a, b |]");
        assert_eq!(Multiset::<&str>::new().to_string(), "[||]");
    }

    #[test]
    fn difference_saturates() {
        let a: Multiset<u8> = [1, 1, 2].into_iter().collect();
        let b: Multiset<u8> = [1, 2, 2, 3].into_iter().collect();
        assert_eq!(a.difference(&b), [1].into_iter().collect());
        assert!(b.difference(&b).is_empty());
    }
}
