use std::collections::BTreeMap;

use crate::error::GroupError;
use crate::term::Atom;

use super::Permutation;

type Points = Vec<usize>;

fn identity(n: usize) -> Points {
    (0..n).collect()
}

fn is_identity(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

/// `a ∘ b`
fn mul(a: &[usize], b: &[usize]) -> Points {
    b.iter().map(|&x| a[x]).collect()
}

fn inv(a: &[usize]) -> Points {
    let mut out = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        out[x] = i;
    }
    out
}

#[derive(Clone, Debug)]
struct Level {
    base: usize,
    /// `transversal[β]` maps the base point to `β`.
    transversal: Vec<Option<Points>>,
}

/// Strong generator with the index of the level where it was introduced;
/// it fixes every base point of the earlier levels.
#[derive(Clone, Debug)]
struct Strong {
    perm: Points,
    level: usize,
}

/// A permutation group over a fixed, finite carrier of atoms, given by
/// generators and backed by a stabilizer chain for membership tests.
#[derive(Clone, Debug)]
pub struct PermGroup {
    support: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
    strong: Vec<Strong>,
}

impl PermGroup {
    /// The trivial group on `support`.
    pub fn new(support: impl IntoIterator<Item = Atom>) -> PermGroup {
        let mut support: Vec<Atom> = support.into_iter().collect();
        support.sort();
        support.dedup();
        let index = support.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        PermGroup { support, index, generators: Vec::new(), levels: Vec::new(), strong: Vec::new() }
    }

    /// The group generated by `gens`; redundant generators are dropped.
    pub fn generated(
        support: impl IntoIterator<Item = Atom>,
        gens: impl IntoIterator<Item = Permutation>,
    ) -> Result<PermGroup, GroupError> {
        let mut g = PermGroup::new(support);
        for p in gens {
            g.extend(&p)?;
        }
        Ok(g)
    }

    pub fn support(&self) -> &[Atom] {
        &self.support
    }

    /// The non-redundant generators added so far.
    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    fn n(&self) -> usize {
        self.support.len()
    }

    fn to_points(&self, p: &Permutation) -> Result<Points, GroupError> {
        let mut pts = identity(self.n());
        for (a, b) in p.as_map() {
            let (Some(&i), Some(&j)) = (self.index.get(a), self.index.get(b)) else {
                return Err(GroupError::UnsupportedAtom(a.to_string()));
            };
            pts[i] = j;
        }
        Ok(pts)
    }

    fn from_points(&self, pts: &[usize]) -> Permutation {
        let map = pts
            .iter()
            .enumerate()
            .filter(|(i, j)| i != *j)
            .map(|(i, &j)| (self.support[i].clone(), self.support[j].clone()))
            .collect();
        Permutation::from_map(map).expect("stabilizer chain holds bijections")
    }

    /// Strips `g` through the chain starting at `from`. Returns the residue
    /// and the level at which sifting stopped (`levels.len()` if it passed
    /// every level).
    fn sift(&self, mut g: Points, from: usize) -> (Points, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g[level.base];
            match &level.transversal[beta] {
                None => return (g, i),
                Some(u) => g = mul(&inv(u), &g),
            }
        }
        let len = self.levels.len();
        (g, len)
    }

    /// `p ∈ ⟨generators⟩`
    pub fn contains(&self, p: &Permutation) -> Result<bool, GroupError> {
        let pts = self.to_points(p)?;
        let (res, _) = self.sift(pts, 0);
        Ok(is_identity(&res))
    }

    /// Adds `p` as a generator unless it is already a member. Returns
    /// whether the group grew.
    pub fn extend(&mut self, p: &Permutation) -> Result<bool, GroupError> {
        let pts = self.to_points(p)?;
        let (res, level) = self.sift(pts, 0);
        if is_identity(&res) {
            return Ok(false);
        }
        self.generators.push(p.clone());
        self.add_strong(res, level);
        self.close_from(level);
        Ok(true)
    }

    fn add_strong(&mut self, h: Points, level: usize) {
        if level == self.levels.len() {
            let base = h.iter().enumerate().find(|(i, x)| i != *x).map(|(i, _)| i).expect("non-identity");
            let mut transversal = vec![None; self.n()];
            transversal[base] = Some(identity(self.n()));
            self.levels.push(Level { base, transversal });
        }
        self.strong.push(Strong { perm: h, level });
    }

    fn rebuild_orbit(&mut self, i: usize) {
        let n = self.n();
        let base = self.levels[i].base;
        let gens: Vec<&Points> = self.strong.iter().filter(|s| s.level >= i).map(|s| &s.perm).collect();
        let mut transversal: Vec<Option<Points>> = vec![None; n];
        transversal[base] = Some(identity(n));
        let mut queue = vec![base];
        while let Some(beta) = queue.pop() {
            let u = transversal[beta].clone().expect("orbit point");
            for s in &gens {
                let gamma = s[beta];
                if transversal[gamma].is_none() {
                    transversal[gamma] = Some(mul(s, &u));
                    queue.push(gamma);
                }
            }
        }
        self.levels[i].transversal = transversal;
    }

    /// Restores the chain invariant for levels `0..=start` after a strong
    /// generator was added at `start`.
    fn close_from(&mut self, start: usize) {
        let mut i = start as isize;
        'outer: while i >= 0 {
            let lvl = i as usize;
            self.rebuild_orbit(lvl);
            let orbit: Vec<usize> =
                (0..self.n()).filter(|&b| self.levels[lvl].transversal[b].is_some()).collect();
            let gens: Vec<Points> =
                self.strong.iter().filter(|s| s.level >= lvl).map(|s| s.perm.clone()).collect();
            for &beta in &orbit {
                let u_beta = self.levels[lvl].transversal[beta].clone().unwrap();
                for s in &gens {
                    let target = s[beta];
                    let u_target = self.levels[lvl].transversal[target].as_ref().unwrap();
                    let schreier = mul(&inv(u_target), &mul(s, &u_beta));
                    let (res, at) = self.sift(schreier, lvl + 1);
                    if !is_identity(&res) {
                        self.add_strong(res, at);
                        i = at as isize;
                        continue 'outer;
                    }
                }
            }
            i -= 1;
        }
    }

    /// Group order, saturating at `u128::MAX`.
    pub fn order(&self) -> u128 {
        self.levels.iter().fold(1u128, |acc, l| {
            let orbit = l.transversal.iter().filter(|t| t.is_some()).count() as u128;
            acc.saturating_mul(orbit)
        })
    }

    /// Every element, by walking the transversals. Only sensible for small groups.
    pub fn elements(&self) -> Vec<Permutation> {
        let mut acc = vec![identity(self.n())];
        for level in self.levels.iter().rev() {
            let mut next = Vec::new();
            for u in level.transversal.iter().flatten() {
                for g in &acc {
                    next.push(mul(u, g));
                }
            }
            acc = next;
        }
        acc.iter().map(|p| self.from_points(p)).collect()
    }
}

/// `p ∈ g`
pub fn group_member(p: &Permutation, g: &PermGroup) -> Result<bool, GroupError> {
    g.contains(p)
}

/// `g` extended by `p`; unchanged if `p` is already a member.
pub fn group_extend(g: &PermGroup, p: &Permutation) -> Result<PermGroup, GroupError> {
    let mut g = g.clone();
    g.extend(p)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn at(s: &str) -> Atom {
        Atom::new(s)
    }

    fn sw(a: &str, b: &str) -> Permutation {
        Permutation::swap(at(a), at(b))
    }

    fn abc() -> Vec<Atom> {
        vec![at("a"), at("b"), at("c")]
    }

    fn closure(gens: &[Permutation]) -> BTreeSet<Permutation> {
        let mut set: BTreeSet<Permutation> = [Permutation::identity()].into();
        let mut frontier = vec![Permutation::identity()];
        while let Some(p) = frontier.pop() {
            for g in gens {
                let q = g.compose(&p);
                if set.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
        set
    }

    #[test]
    fn identity_is_always_member() {
        let g = PermGroup::new(abc());
        assert!(g.contains(&Permutation::identity()).unwrap());
    }

    #[test]
    fn single_swap_group() {
        let g = PermGroup::generated(abc(), [sw("a", "b")]).unwrap();
        assert!(!g.contains(&sw("a", "c")).unwrap());
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn two_swaps_generate_s3() {
        let g = PermGroup::generated(abc(), [sw("a", "b"), sw("b", "c")]).unwrap();
        assert!(g.contains(&sw("a", "c")).unwrap());
        assert_eq!(g.order(), 6);
        assert_eq!(closure(&[sw("a", "b"), sw("b", "c")]).len(), 6);
    }

    #[test]
    fn extend_examples() {
        let g = group_extend(&PermGroup::new(abc()), &Permutation::identity()).unwrap();
        assert!(g.generators().is_empty());
        let g = PermGroup::generated(abc(), [sw("a", "b")]).unwrap();
        let g2 = group_extend(&g, &sw("a", "b")).unwrap();
        assert_eq!(g2.generators().len(), 1);
        let g3 = group_extend(&g, &sw("b", "c")).unwrap();
        assert_eq!(g3.order(), 6);
    }

    #[test]
    fn unsupported_atom_is_an_error() {
        let g = PermGroup::new(abc());
        assert!(matches!(g.contains(&sw("a", "z")), Err(GroupError::UnsupportedAtom(_))));
    }

    #[test]
    fn elements_match_closure() {
        let gens = vec![sw("a", "b"), Permutation::from_swaps(vec![(at("c"), at("d")), (at("d"), at("e"))])];
        let support: Vec<Atom> = ["a", "b", "c", "d", "e"].into_iter().map(at).collect();
        let g = PermGroup::generated(support, gens.clone()).unwrap();
        let els: BTreeSet<Permutation> = g.elements().into_iter().collect();
        assert_eq!(els, closure(&gens));
        assert_eq!(g.order() as usize, els.len());
    }
}
