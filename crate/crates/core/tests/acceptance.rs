//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use nomlet::gen::{
    example3_conjugates, example3_family, random_dag_problem, random_match_problem, random_unify_problem, rng,
    GenConfig,
};
use nomlet::matching::{env_text, same_matchers, verify_matcher};
use nomlet::oracle::{
    brute_solve_over, enum_ground, encode_graph_iso, encode_hamiltonian, has_hamiltonian_cycle, isomorphic,
    random_graph, small_problems, Graph, GroundEnumConfig,
};
use nomlet::perm::group_extend;
use nomlet::unify::{peel_lambdas, rule7_equation, verify_solution};
use nomlet::*;
use rand::seq::SliceRandom;
use rand::Rng;

const LIMIT_EXAMPLES: Duration = Duration::from_secs(1);
const LIMIT_SOUNDNESS: Duration = Duration::from_secs(60);
const LIMIT_COMPLETENESS: Duration = Duration::from_secs(600);
const LIMIT_BLOWUP: Duration = Duration::from_secs(120);
const LIMIT_HARDNESS: Duration = Duration::from_secs(300);
const LIMIT_PETERSEN: Duration = Duration::from_secs(600);
const LIMIT_MEASURE: Duration = Duration::from_secs(1);
const LIMIT_GROUPS: Duration = Duration::from_secs(30);
const LIMIT_DAG: Duration = Duration::from_secs(120);

const SOUNDNESS_PROBLEMS: usize = 1000;
const BLOWUP_NO_ELIM: std::ops::RangeInclusive<usize> = 3..=10;
const BLOWUP_ELIM: std::ops::RangeInclusive<usize> = 3..=20;
const BLOWUP_TIMING_REPS: usize = 5;
const EXPONENT_MAX: f64 = 4.0;
const EXPONENT_TOL: f64 = 0.5;
const GI_PAIRS: usize = 50;
const GROUP_SETS: usize = 200;
const DAG_PROBLEMS: usize = 200;
const DAG_MAX_SIZE: usize = 1000;

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Verdict {
        Verdict { ok, detail: detail.into() }
    }
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = f();
    let took = t.elapsed();
    let ok = v.ok && took <= limit;
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {id} {status} {name}: {} [{:.2?} of {:.0?}]", v.detail, took, limit);
    ok
}

fn p(s: &str) -> Expr {
    parse_expression(s, &mut ArityTable::new()).unwrap()
}

fn examples() -> Verdict {
    let mut fails = Vec::new();

    let t = p("(letrec (c a) (d b) in (True))");
    let swapped = t.permute(&Permutation::swap(Atom::new("a"), Atom::new("b")));
    if !alpha_eq(&swapped, &t).unwrap() {
        fails.push("fixpoint letrec");
    }

    let l = p("(letrec (a (pair a b)) (b (pair a b)) in b)");
    let r = p("(letrec (b (pair b c)) (c (pair b c)) in c)");
    let prob = UnifyProblem::new(vec![Equation::new(l.clone(), r.clone())]);
    let rep = unify(&prob, &UnifyConfig { trace: true, ..UnifyConfig::collect() }).unwrap();
    let first = rep.trace.iter().position(|x| x.starts_with("branch"));
    let identity_first =
        first.is_some_and(|i| rep.trace[i].contains("output") && rep.trace.get(i + 1).is_some_and(|x| x.contains("[0, 1]")));
    let sound = rep.unifiers.iter().all(|u| verify_solution(&prob, &instantiate_fresh(u)).unwrap());
    let (last, fresh) = peel_lambdas(&rule7_equation(&Equation::new(l, r), &[0, 1]).unwrap());
    let ab = p("(pair a b)");
    let want = Expr::tuple(vec![ab.clone(), ab, p("b")]);
    let discharged = last == Equation::new(want.clone(), want) && fresh.iter().all(|(a, e)| check_fresh(a, e));
    if !(rep.is_solvable() && identity_first && sound && discharged) {
        fails.push("letrec unification");
    }

    let eqs = [MatchEquation::new(p("(app (lam a X1) X2)"), p("(app (lam a a) (lam b b))"))];
    let m = letrec_match(&eqs, &MatchConfig::collect()).unwrap();
    let lbeta = m.matchers.len() == 1
        && m.matchers[0].exprs.len() == 2
        && m.matchers[0].get(&Var::new("X1")) == Some(&p("a"))
        && m.matchers[0].get(&Var::new("X2")) == Some(&p("(lam b b)"));
    if !lbeta {
        fails.push("lbeta");
    }

    let eqs = [MatchEquation::new(
        p("(letrec Env1 in (letrec Env2 in X))"),
        p("(letrec (a (0)) (b (1)) in (letrec (c (tuple a b c)) in c))"),
    )];
    let m = letrec_env_match(&eqs, &MatchConfig::collect()).unwrap();
    let llet = m.matchers.len() == 1 && {
        let s = &m.matchers[0];
        s.get_env(&EnvVar::new("Env1")).map(env_text).as_deref() == Some("(a (0)) (b (1))")
            && s.get_env(&EnvVar::new("Env2")).map(env_text).as_deref() == Some("(c (tuple a b c))")
            && s.get(&Var::new("X")) == Some(&p("c"))
    };
    if !llet {
        fails.push("llet-e");
    }

    if fails.is_empty() {
        Verdict::new(true, "fixpoint letrec, letrec unification, lbeta and llet-e as stated")
    } else {
        Verdict::new(false, format!("wrong: {}", fails.join(", ")))
    }
}

#[derive(Default)]
struct MeasureTally {
    checked: usize,
    violations: usize,
}

fn soundness(tally: &mut MeasureTally) -> Verdict {
    let cfg = GenConfig::default();
    let mut r = rng(20_240_601);
    let (mut unifiers, mut solvable, mut bad) = (0, 0, 0);
    for _ in 0..SOUNDNESS_PROBLEMS {
        let prob = random_unify_problem(&mut r, &cfg);
        let rep = unify(&prob, &UnifyConfig::collect()).unwrap();
        tally.checked += rep.stats.measures_checked;
        tally.violations += rep.stats.measure_violations;
        solvable += rep.is_solvable() as usize;
        for u in &rep.unifiers {
            unifiers += 1;
            if !verify_solution(&prob, &instantiate_fresh(u)).unwrap() {
                bad += 1;
            }
        }
    }
    let (mut matchers, mut msolvable) = (0, 0);
    for _ in 0..SOUNDNESS_PROBLEMS {
        let eqs = random_match_problem(&mut r, &cfg);
        let rep = letrec_match(&eqs, &MatchConfig::collect()).unwrap();
        msolvable += rep.is_solvable() as usize;
        for m in &rep.matchers {
            matchers += 1;
            if !verify_matcher(&eqs, m).unwrap() {
                bad += 1;
            }
        }
    }
    Verdict::new(
        bad == 0 && unifiers > 0 && matchers > 0,
        format!(
            "{SOUNDNESS_PROBLEMS} unification problems ({solvable} solvable, {unifiers} unifiers), \
             {SOUNDNESS_PROBLEMS} matching problems ({msolvable} solvable, {matchers} matchers), {bad} failed witness checks"
        ),
    )
}

fn completeness() -> Verdict {
    let pair = GroundEnumConfig::small(&["a", "b", "c"], &[("f", 1), ("g", 2)], 1, 2);
    let values: Vec<Expr> = enum_ground(&pair).collect();
    let problems = small_problems();
    let (mut solutions, mut missed, mut unsound) = (0, 0, 0);
    for bp in &problems {
        let up = UnifyProblem { equations: bp.equations.clone(), freshness: bp.freshness.clone() };
        let rep = unify(&up, &UnifyConfig::collect()).unwrap();
        unsound += rep.unifiers.iter().filter(|u| !verify_solution(&up, &instantiate_fresh(u)).unwrap()).count();
        for rho in brute_solve_over(bp, &values) {
            solutions += 1;
            let s: Substitution = rho.into_iter().collect();
            if !rep.unifiers.iter().any(|u| is_instance(u, &s).unwrap()) {
                missed += 1;
            }
        }
    }
    Verdict::new(
        missed == 0 && unsound == 0 && problems.len() >= 2000,
        format!(
            "{} problems, {} candidate values per variable, {solutions} oracle solutions, {missed} not covered, {unsound} unsound",
            problems.len(),
            values.len()
        ),
    )
}

fn x1_fixpoints(u: &Unifier) -> usize {
    u.fixpoints.iter().filter(|(x, _)| x.name() == "X1").count()
}

fn blowup() -> Verdict {
    let mut fails = Vec::new();
    let mut counts = Vec::new();
    for n in BLOWUP_NO_ELIM {
        let fam = example3_family(n);
        let cfg = UnifyConfig { elimfp: false, ..UnifyConfig::collect() };
        let rep = unify(&fam.problem, &cfg).unwrap();
        let got = rep.unifiers.first().map(x1_fixpoints).unwrap_or(0);
        let want = 1usize << (n - 1);
        if got != want || example3_conjugates(&fam.pi, &fam.rhos).len() != want {
            fails.push(format!("n={n}: {got} fixpoint equations, expected {want}"));
        }
        if !rep.unifiers.iter().all(|u| verify_solution(&fam.problem, &instantiate_fresh(u)).unwrap()) {
            fails.push(format!("n={n}: unsound unifier"));
        }
        counts.push(got);
    }
    let mut max_stored = 0;
    let mut points = Vec::new();
    for n in BLOWUP_ELIM {
        let fam = example3_family(n);
        let bound = fam.support.len() * fam.support.len();
        let mut best = Duration::MAX;
        for _ in 0..BLOWUP_TIMING_REPS {
            let t = Instant::now();
            let rep = unify(&fam.problem, &UnifyConfig::collect()).unwrap();
            best = best.min(t.elapsed());
            max_stored = max_stored.max(rep.stats.max_fixpoint_eqs);
            if rep.stats.max_fixpoint_eqs > bound || !rep.is_solvable() {
                fails.push(format!("n={n}: {} stored fixpoint equations, bound {bound}", rep.stats.max_fixpoint_eqs));
            }
        }
        points.push(((n as f64).ln(), best.as_secs_f64().ln()));
    }
    let slope = regression_slope(&points);
    if slope > EXPONENT_MAX + EXPONENT_TOL {
        fails.push(format!("fit exponent {slope:.2}"));
    }
    let detail = format!(
        "without ElimFP X1 gets {counts:?} fixpoint equations for n={}..={}; with ElimFP at most {max_stored} stored \
         per variable up to n={}, fit exponent {slope:.2} (limit {EXPONENT_MAX} ± {EXPONENT_TOL})",
        BLOWUP_NO_ELIM.start(),
        BLOWUP_NO_ELIM.end(),
        BLOWUP_ELIM.end()
    );
    if fails.is_empty() {
        Verdict::new(true, detail)
    } else {
        Verdict::new(false, format!("{detail}; {}", fails.join("; ")))
    }
}

fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn measure(tally: &MeasureTally) -> Verdict {
    Verdict::new(
        tally.violations == 0 && tally.checked > 0,
        format!("{} measure comparisons over the soundness runs, {} violations", tally.checked, tally.violations),
    )
}

fn hamiltonian() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, want) in [("K3", true), ("C5", true), ("K4", true), ("K5", true)] {
        let g = Graph::from_name(name).unwrap();
        let eq = encode_hamiltonian(&g).unwrap();
        let got = letrec_match(&[eq], &MatchConfig::decide()).unwrap().is_solvable();
        ok &= got == want && has_hamiltonian_cycle(&g) == want;
        lines.push(format!("{name} {}", if got { "solvable" } else { "unsolvable" }));
    }

    let mut r = rng(6);
    let (mut agree, mut iso) = (0, 0);
    for i in 0..GI_PAIRS {
        let n = r.gen_range(3..=6);
        let g1 = random_graph(n, 0.5, &mut r);
        let g2 = if i % 2 == 0 { relabel(&g1, &mut r) } else { random_graph(n, 0.5, &mut r) };
        let eq = encode_graph_iso(&g1, &g2).unwrap();
        let got = letrec_match(&[eq], &MatchConfig::decide()).unwrap().is_solvable();
        let want = isomorphic(&g1, &g2);
        iso += want as usize;
        agree += (got == want) as usize;
    }
    ok &= agree == GI_PAIRS;
    lines.push(format!("graph isomorphism agrees on {agree}/{GI_PAIRS} pairs ({iso} isomorphic)"));
    Verdict::new(ok, lines.join(", "))
}

fn petersen() -> Verdict {
    let g = Graph::petersen();
    let eq = encode_hamiltonian(&g).unwrap();
    let rep = letrec_match(&[eq], &MatchConfig::decide()).unwrap();
    Verdict::new(
        !rep.is_solvable() && !has_hamiltonian_cycle(&g),
        format!("Petersen unsolvable after {} branch points", rep.branches),
    )
}

fn relabel<R: Rng>(g: &Graph, r: &mut R) -> Graph {
    let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
    perm.shuffle(r);
    Graph::new(g.vertex_count(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

fn closure(gens: &[Permutation]) -> BTreeSet<Permutation> {
    let mut seen: BTreeSet<Permutation> = [Permutation::identity()].into();
    let mut queue: VecDeque<Permutation> = [Permutation::identity()].into();
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.compose(g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

fn random_perm<R: Rng>(support: &[Atom], r: &mut R) -> Permutation {
    let swaps = r.gen_range(0..=support.len());
    Permutation::from_swaps((0..swaps).map(|_| {
        let a = support.choose(r).unwrap().clone();
        let b = support.choose(r).unwrap().clone();
        (a, b)
    }))
}

fn groups() -> Verdict {
    let mut r = rng(7);
    let (mut agree, mut queries, mut max_gens, mut over) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..GROUP_SETS {
        let k = r.gen_range(2..=7);
        let support: Vec<Atom> = (0..k).map(|i| Atom::new(&format!("a{i}"))).collect();
        let gens: Vec<Permutation> = (0..r.gen_range(1..=3)).map(|_| random_perm(&support, &mut r)).collect();
        let mut g = PermGroup::new(support.clone());
        for p in &gens {
            g = group_extend(&g, p).unwrap();
            max_gens = max_gens.max(g.generators().len());
            if g.generators().len() > k * k {
                over += 1;
            }
        }
        let elems = closure(&gens);
        let mut probes: Vec<Permutation> = elems.iter().take(50).cloned().collect();
        probes.extend((0..50).map(|_| random_perm(&support, &mut r)));
        for q in &probes {
            queries += 1;
            if g.contains(q).unwrap() == elems.contains(q) {
                agree += 1;
            }
        }
    }
    Verdict::new(
        agree == queries && over == 0,
        format!(
            "{GROUP_SETS} generator sets, membership agrees on {agree}/{queries} queries, \
             at most {max_gens} stored generators, {over} over the square bound"
        ),
    )
}

fn dag() -> Verdict {
    let cfg = GenConfig::default();
    let mut r = rng(8);
    let (mut agree, mut solvable, mut biggest) = (0, 0, 0);
    for _ in 0..DAG_PROBLEMS {
        let prob = random_dag_problem(&mut r, &cfg, DAG_MAX_SIZE);
        biggest = biggest.max(prob.decompressed_size());
        let flat = letrec_match(&prob.decompress().unwrap(), &MatchConfig::collect()).unwrap();
        let shared = letrec_dag_match(&prob, &MatchConfig::collect()).unwrap();
        solvable += flat.is_solvable() as usize;
        if same_matchers(&flat.matchers, &shared.expanded()) {
            agree += 1;
        }
    }
    Verdict::new(
        agree == DAG_PROBLEMS,
        format!("agreement on {agree}/{DAG_PROBLEMS} problems ({solvable} solvable, largest expansion {biggest})"),
    )
}

fn main() {
    let mut tally = MeasureTally::default();
    let results = [
        run(1, "worked examples", LIMIT_EXAMPLES, examples),
        run(2, "soundness", LIMIT_SOUNDNESS, || soundness(&mut tally)),
        run(3, "completeness", LIMIT_COMPLETENESS, completeness),
        run(4, "fixpoint blow-up", LIMIT_BLOWUP, blowup),
        run(5, "termination measure", LIMIT_MEASURE, || measure(&tally)),
        run(6, "hardness encodings", LIMIT_HARDNESS, hamiltonian)
            && run(6, "hardness encodings (Petersen)", LIMIT_PETERSEN, petersen),
        run(7, "permutation groups", LIMIT_GROUPS, groups),
        run(8, "dag and flat matching", LIMIT_DAG, dag),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
