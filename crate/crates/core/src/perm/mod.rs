//! Finite permutations of atoms and permutation groups over a fixed
//! carrier of atoms.

mod group;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::TermError;
use crate::term::{Atom, Expr};

pub use group::{group_extend, group_member, PermGroup};

/// A finite bijection on atoms. Only moved atoms are stored, so two equal
/// permutations always have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation {
    map: BTreeMap<Atom, Atom>,
}

impl Permutation {
    pub fn identity() -> Permutation {
        Permutation { map: BTreeMap::new() }
    }

    /// The swapping `(a b)`.
    pub fn swap(a: Atom, b: Atom) -> Permutation {
        let mut map = BTreeMap::new();
        if a != b {
            map.insert(a.clone(), b.clone());
            map.insert(b, a);
        }
        Permutation { map }
    }

    /// Composition of swappings, applied right to left:
    /// `[(a b), (c d)]` is `(a b) ∘ (c d)`.
    pub fn from_swaps<I>(swaps: I) -> Permutation
    where
        I: IntoIterator<Item = (Atom, Atom)>,
        I::IntoIter: DoubleEndedIterator,
    {
        swaps
            .into_iter()
            .rev()
            .fold(Permutation::identity(), |acc, (a, b)| Permutation::swap(a, b).compose(&acc))
    }

    /// Builds a permutation from an explicit atom map. Fixed points may be
    /// listed or omitted.
    pub fn from_map(map: BTreeMap<Atom, Atom>) -> Result<Permutation, TermError> {
        let map: BTreeMap<Atom, Atom> = map.into_iter().filter(|(a, b)| a != b).collect();
        let mut images: Vec<&Atom> = map.values().collect();
        images.sort();
        images.dedup();
        let keys: Vec<&Atom> = map.keys().collect();
        if images != keys {
            return Err(TermError::NotABijection);
        }
        Ok(Permutation { map })
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, a: &Atom) -> Atom {
        self.map.get(a).cloned().unwrap_or_else(|| a.clone())
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() {
            return self.clone();
        }
        let mut map = BTreeMap::new();
        for a in self.map.keys().chain(other.map.keys()) {
            let img = self.apply(&other.apply(a));
            if &img != a {
                map.insert(a.clone(), img);
            }
        }
        Permutation { map }
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// `dom(π)`: the atoms that are moved.
    pub fn support(&self) -> impl Iterator<Item = Atom> + '_ {
        self.map.keys().cloned()
    }

    pub fn domain_size(&self) -> usize {
        self.map.len()
    }

    pub fn moves(&self, a: &Atom) -> bool {
        self.map.contains_key(a)
    }

    /// A decomposition into at most `|dom(π)| - 1` swappings such that
    /// `from_swaps(to_swaps())` is `self`.
    pub fn to_swaps(&self) -> Vec<(Atom, Atom)> {
        let mut out = Vec::new();
        let mut done: Vec<&Atom> = Vec::new();
        for start in self.map.keys() {
            if done.contains(&start) {
                continue;
            }
            let mut cycle = vec![start.clone()];
            done.push(start);
            let mut cur = &self.map[start];
            while cur != start {
                cycle.push(cur.clone());
                done.push(cur);
                cur = &self.map[cur];
            }
            // x1 -> x2 -> ... -> xk is (x1 x2)(x2 x3)...(x(k-1) xk)
            for w in cycle.windows(2) {
                out.push((w[0].clone(), w[1].clone()));
            }
        }
        out
    }

    pub fn as_map(&self) -> &BTreeMap<Atom, Atom> {
        &self.map
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (a, b) in self.to_swaps() {
            write!(f, "({a} {b})")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn compose(p1: &Permutation, p2: &Permutation) -> Permutation {
    p1.compose(p2)
}

pub fn invert(p: &Permutation) -> Permutation {
    p.inverse()
}

/// `π·e`.
pub fn apply_perm(p: &Permutation, e: &Expr) -> Expr {
    e.permute(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(s: &str) -> Atom {
        Atom::new(s)
    }

    fn cyc3() -> Permutation {
        Permutation::from_map([(at("a"), at("b")), (at("b"), at("c")), (at("c"), at("a"))].into()).unwrap()
    }

    #[test]
    fn compose_identity_and_involution() {
        let ab = Permutation::swap(at("a"), at("b"));
        assert_eq!(ab.compose(&Permutation::identity()), ab);
        assert!(ab.compose(&ab).is_identity());
    }

    #[test]
    fn compose_two_swaps() {
        let r = Permutation::swap(at("a"), at("b")).compose(&Permutation::swap(at("b"), at("c")));
        // oracle: evaluate the factors one after the other
        for x in ["a", "b", "c"] {
            let step = Permutation::swap(at("b"), at("c")).apply(&at(x));
            assert_eq!(r.apply(&at(x)), Permutation::swap(at("a"), at("b")).apply(&step));
        }
        assert_eq!(r, cyc3());
    }

    #[test]
    fn invert_examples() {
        assert!(Permutation::identity().inverse().is_identity());
        let ab = Permutation::swap(at("a"), at("b"));
        assert_eq!(ab.inverse(), ab);
        let inv = Permutation::from_map([(at("a"), at("c")), (at("b"), at("a")), (at("c"), at("b"))].into()).unwrap();
        assert_eq!(cyc3().inverse(), inv);
    }

    #[test]
    fn from_map_rejects_non_bijections() {
        assert!(Permutation::from_map([(at("a"), at("b"))].into()).is_err());
    }

    #[test]
    fn display_is_swap_list() {
        assert_eq!(Permutation::identity().to_string(), "()");
        assert_eq!(Permutation::swap(at("b"), at("a")).to_string(), "((a b))");
    }

    fn arb_perm() -> impl Strategy<Value = Permutation> {
        let atoms = ["a", "b", "c", "d", "e"];
        prop::collection::vec((0..5usize, 0..5usize), 0..6).prop_map(move |sw| {
            Permutation::from_swaps(sw.into_iter().map(|(i, j)| (at(atoms[i]), at(atoms[j]))).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn swaps_roundtrip_and_bound(p in arb_perm()) {
            let sw = p.to_swaps();
            prop_assert!(p.is_identity() || sw.len() < p.domain_size());
            prop_assert_eq!(Permutation::from_swaps(sw), p);
        }

        #[test]
        fn inverse_cancels(p in arb_perm(), q in arb_perm()) {
            prop_assert!(p.compose(&p.inverse()).is_identity());
            let pq = p.compose(&q);
            for x in ["a", "b", "c", "d", "e", "z"] {
                prop_assert_eq!(pq.apply(&at(x)), p.apply(&q.apply(&at(x))));
            }
        }
    }
}
