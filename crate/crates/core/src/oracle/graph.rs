use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::GraphError;
use crate::matching::MatchEquation;
use crate::term::{Atom, Env, EnvItem, Expr, FunSym, Var};

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph, GraphError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::Invalid(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(GraphError::Invalid(format!("edge ({u}, {v}) out of range")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("valid")
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|u| (u, (u + 1) % n))).expect("valid")
    }

    pub fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::new(10, outer.chain(spokes).chain(inner)).expect("valid")
    }

    /// `copies` disjoint cycles of length `len`.
    pub fn disjoint_cycles(copies: usize, len: usize) -> Graph {
        let edges = (0..copies).flat_map(|c| (0..len).map(move |i| (c * len + i, c * len + (i + 1) % len)));
        Graph::new(copies * len, edges).expect("valid")
    }

    /// `K<n>`, `C<n>`, `petersen` or `<k>xC<n>`.
    pub fn from_name(name: &str) -> Result<Graph, GraphError> {
        let bad = || GraphError::Invalid(format!("unknown graph `{name}`"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        if name.eq_ignore_ascii_case("petersen") {
            return Ok(Graph::petersen());
        }
        if let Some((k, c)) = name.split_once('x') {
            let len = c.strip_prefix('C').ok_or_else(bad)?;
            return Ok(Graph::disjoint_cycles(num(k)?, num(len)?));
        }
        if let Some(n) = name.strip_prefix('K') {
            return Ok(Graph::complete(num(n)?));
        }
        if let Some(n) = name.strip_prefix('C') {
            let n = num(n)?;
            if n < 3 {
                return Err(bad());
            }
            return Ok(Graph::cycle(n));
        }
        Err(bad())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degree_of(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    /// The common degree, if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree_of(0) };
        (0..self.n).all(|v| self.degree_of(v) == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.n {
                if !seen[v] && self.has_edge(u, v) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Exhaustive search for a Hamiltonian cycle.
pub fn has_hamiltonian_cycle(g: &Graph) -> bool {
    fn extend(g: &Graph, path: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let last = *path.last().expect("non-empty");
        if path.len() == g.n {
            return g.has_edge(last, path[0]);
        }
        for v in 0..g.n {
            if !used[v] && g.has_edge(last, v) {
                used[v] = true;
                path.push(v);
                if extend(g, path, used) {
                    return true;
                }
                path.pop();
                used[v] = false;
            }
        }
        false
    }
    if g.n < 3 {
        return false;
    }
    let mut used = vec![false; g.n];
    used[0] = true;
    extend(g, &mut vec![0], &mut used)
}

/// Exhaustive search over all vertex bijections.
pub fn isomorphic(g1: &Graph, g2: &Graph) -> bool {
    fn extend(g1: &Graph, g2: &Graph, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let u = map.len();
        if u == g1.n {
            return true;
        }
        for v in 0..g2.n {
            if used[v] {
                continue;
            }
            if (0..u).all(|w| g1.has_edge(u, w) == g2.has_edge(v, map[w])) {
                used[v] = true;
                map.push(v);
                if extend(g1, g2, map, used) {
                    return true;
                }
                map.pop();
                used[v] = false;
            }
        }
        false
    }
    g1.n == g2.n && g1.edge_count() == g2.edge_count() && extend(g1, g2, &mut Vec::new(), &mut vec![false; g2.n])
}

/// A uniformly chosen edge set: each edge is present with probability `p`.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect::<Vec<_>>().into_iter().filter(|_| rng.gen_bool(p)).collect();
    Graph::new(n, edges).expect("valid")
}

/// A random `d`-regular graph on `n` vertices by the pairing model with
/// restarts. `None` if `n·d` is odd or `d ≥ n`.
pub fn random_regular_graph<R: Rng>(n: usize, d: usize, rng: &mut R) -> Option<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return None;
    }
    'retry: for _ in 0..10_000 {
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        points.shuffle(rng);
        let mut edges = BTreeSet::new();
        for pair in points.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !edges.insert((u.min(v), u.max(v))) {
                continue 'retry;
            }
        }
        return Some(Graph { n, edges });
    }
    None
}

fn vertex(i: usize) -> Atom {
    Atom::new(&format!("a{}", i + 1))
}

fn app(f: &str, args: Vec<Expr>) -> Expr {
    Expr::App(FunSym::new(f), args)
}

/// Node bindings `ai.(node ai)` followed by `ek.(f a a')` for both
/// orientations of every edge.
fn graph_env(g: &Graph) -> Vec<EnvItem> {
    let mut items: Vec<EnvItem> =
        (0..g.n).map(|i| EnvItem::Bind(vertex(i), app("node", vec![Expr::Atom(vertex(i))]))).collect();
    let mut k = 0;
    for (u, v) in g.edges() {
        for (x, y) in [(u, v), (v, u)] {
            k += 1;
            items.push(EnvItem::Bind(
                Atom::new(&format!("e{k}")),
                app("f", vec![Expr::Atom(vertex(x)), Expr::Atom(vertex(y))]),
            ));
        }
    }
    items
}

fn letrec(items: Vec<EnvItem>, body: Expr) -> Expr {
    Expr::Letrec(Env::new(items).expect("distinct binders"), Box::new(body))
}

/// A matching problem that is solvable iff the regular graph has a
/// Hamiltonian cycle.
pub fn encode_hamiltonian(g: &Graph) -> Result<MatchEquation, GraphError> {
    if g.regular_degree().is_none() {
        return Err(GraphError::NotRegular);
    }
    if g.n < 3 {
        return Err(GraphError::Invalid("a Hamiltonian cycle needs at least 3 vertices".into()));
    }
    let target = letrec(graph_env(g), Expr::constant("0"));
    let x = |i: usize| Expr::plain(Var::new(&format!("X{}", i + 1)));
    let mut items: Vec<EnvItem> = (0..g.n).map(|i| EnvItem::Bind(vertex(i), app("node", vec![x(i)]))).collect();
    for i in 0..g.n {
        items.push(EnvItem::Bind(Atom::new(&format!("c{}", i + 1)), app("f", vec![x(i), x((i + 1) % g.n)])));
    }
    for j in 1..=2 * g.edge_count() - g.n {
        let z = |s: &str| Expr::plain(Var::new(&format!("Z{s}{j}")));
        items.push(EnvItem::Bind(Atom::new(&format!("d{j}")), app("f", vec![z("a"), z("b")])));
    }
    Ok(MatchEquation::new(letrec(items, Expr::constant("0")), target))
}

/// A matching problem that is solvable iff the graphs are isomorphic.
/// The first graph becomes the target, with body `(tupleN a1 … aN)`.
pub fn encode_graph_iso(g1: &Graph, g2: &Graph) -> Result<MatchEquation, GraphError> {
    if g1.n != g2.n {
        return Err(GraphError::SizeMismatch(g1.n, g2.n));
    }
    let body = Expr::tuple((0..g1.n).map(|i| Expr::Atom(vertex(i))).collect());
    let target = letrec(graph_env(g1), body);
    let pattern = letrec(graph_env(g2), Expr::var("X"));
    Ok(MatchEquation::new(pattern, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn named_graphs() {
        assert_eq!(Graph::from_name("K4").unwrap().edge_count(), 6);
        assert_eq!(Graph::from_name("C5").unwrap().regular_degree(), Some(2));
        let p = Graph::from_name("petersen").unwrap();
        assert_eq!((p.edge_count(), p.regular_degree()), (15, Some(3)));
        assert!(p.is_connected());
        let t = Graph::from_name("2xC3").unwrap();
        assert_eq!(t.vertex_count(), 6);
        assert!(!t.is_connected());
        assert!(Graph::from_name("Q3").is_err());
    }

    #[test]
    fn hamiltonian_brute_force() {
        assert!(has_hamiltonian_cycle(&Graph::complete(3)));
        assert!(has_hamiltonian_cycle(&Graph::cycle(5)));
        assert!(has_hamiltonian_cycle(&Graph::complete(5)));
        assert!(!has_hamiltonian_cycle(&Graph::petersen()));
        assert!(!has_hamiltonian_cycle(&Graph::disjoint_cycles(2, 3)));
    }

    #[test]
    fn isomorphism_brute_force() {
        assert!(isomorphic(&Graph::complete(3), &Graph::cycle(3)));
        assert!(!isomorphic(&Graph::cycle(4), &Graph::complete(4)));
        assert!(!isomorphic(&Graph::cycle(6), &Graph::disjoint_cycles(2, 3)));
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let h = Graph::new(4, [(2, 0), (0, 3), (3, 1)]).unwrap();
        assert!(isomorphic(&g, &h));
    }

    #[test]
    fn random_regular_is_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, d) in [(6, 3), (8, 3), (7, 4), (10, 2)] {
            let g = random_regular_graph(n, d, &mut rng).unwrap();
            assert_eq!(g.regular_degree(), Some(d));
        }
        assert!(random_regular_graph(5, 3, &mut rng).is_none());
    }

    #[test]
    fn encodings_have_matching_sizes() {
        let g = Graph::complete(3);
        let eq = encode_hamiltonian(&g).unwrap();
        let (Expr::Letrec(pe, _), Expr::Letrec(te, _)) = (&eq.lhs, &eq.rhs) else { panic!() };
        assert_eq!(pe.len(), te.len());
        assert_eq!(pe.len(), 3 + 6);
        assert!(matches!(encode_hamiltonian(&Graph::new(3, [(0, 1)]).unwrap()), Err(GraphError::NotRegular)));
        assert!(matches!(
            encode_graph_iso(&Graph::cycle(4), &Graph::cycle(5)),
            Err(GraphError::SizeMismatch(4, 5))
        ));
    }

    #[test]
    fn isomorphism_examples() {
        use crate::matching::{letrec_match, MatchConfig};
        let solve = |a: &Graph, b: &Graph| letrec_match(&[encode_graph_iso(a, b).unwrap()], &MatchConfig::collect()).unwrap();
        let k3 = Graph::complete(3);
        let r = solve(&k3, &k3);
        assert!(r.is_solvable());
        let x = r.matchers[0].get(&Var::new("X")).unwrap();
        assert!(matches!(x, Expr::App(f, args) if *f == FunSym::tuple(3) && args.len() == 3));
        assert!(!solve(&Graph::cycle(4), &Graph::complete(4)).is_solvable());
        assert!(!solve(&Graph::cycle(6), &Graph::disjoint_cycles(2, 3)).is_solvable());
    }
}
