use super::*;
use crate::alpha::check_fresh;
use crate::term::{parse_expression, ArityTable};

fn p(s: &str) -> Expr {
    parse_expression(s, &mut ArityTable::new()).unwrap()
}

fn eq(l: &str, r: &str) -> Equation {
    let mut t = ArityTable::new();
    Equation::new(parse_expression(l, &mut t).unwrap(), parse_expression(r, &mut t).unwrap())
}

fn v(s: &str) -> Var {
    Var::new(s)
}

fn a(s: &str) -> Atom {
    Atom::new(s)
}

fn run(eqs: Vec<Equation>) -> UnifyReport {
    unify(&UnifyProblem::new(eqs), &UnifyConfig::collect()).unwrap()
}

fn sound(problem: &UnifyProblem, report: &UnifyReport) {
    for u in &report.unifiers {
        let g = instantiate_fresh(u);
        assert!(verify_solution(problem, &g).unwrap(), "unsound unifier {u}");
    }
}

#[test]
fn trivial_atom() {
    let r = run(vec![eq("a", "a")]);
    assert_eq!(r.unifiers.len(), 1);
    let u = &r.unifiers[0];
    assert!(u.sigma.is_empty() && u.freshness.is_empty() && u.fixpoints.is_empty());
}

#[test]
fn example2_identity_branch() {
    let prob = UnifyProblem::new(vec![eq(
        "(letrec (a (pair a b)) (b (pair a b)) in b)",
        "(letrec (b (pair b c)) (c (pair b c)) in c)",
    )]);
    let cfg = UnifyConfig { trace: true, ..UnifyConfig::collect() };
    let r = unify(&prob, &cfg).unwrap();
    assert!(r.is_solvable());
    assert_eq!(r.stats.rule("(7)"), 2);
    let first = r.trace.iter().position(|l| l.starts_with("branch")).unwrap();
    assert!(r.trace[first].contains("output"));
    assert!(r.trace[first + 1].contains("[0, 1]"));
    sound(&prob, &r);
}

#[test]
fn lambda_binds_swapped_atom() {
    let prob = UnifyProblem::new(vec![eq("(lam a X)", "(lam b b)")]);
    let r = unify(&prob, &UnifyConfig::collect()).unwrap();
    assert_eq!(r.unifiers.len(), 1);
    assert_eq!(r.unifiers[0].value(&v("X")), p("a"));
    sound(&prob, &r);
}

#[test]
fn clash_and_cycle() {
    let r = run(vec![eq("(f a)", "(g a)")]);
    assert!(!r.is_solvable());
    assert_eq!(r.main_failure(), Some(Failure::Clash));
    let r = run(vec![eq("a", "(lam b b)")]);
    assert_eq!(r.main_failure(), Some(Failure::Clash));
    let r = run(vec![eq("X", "(f Y)"), eq("Y", "(g X)")]);
    assert_eq!(r.main_failure(), Some(Failure::CycleDetected));
    let r = run(vec![eq("X", "(f X)")]);
    assert_eq!(r.main_failure(), Some(Failure::CycleDetected));
}

#[test]
fn freshness_failures() {
    let prob = UnifyProblem::new(vec![eq("X", "a")]).with_freshness(a("a"), p("X"));
    let r = unify(&prob, &UnifyConfig::collect()).unwrap();
    assert_eq!(r.main_failure(), Some(Failure::FreshnessSolutionFail));
    let prob = UnifyProblem::new(vec![]).with_freshness(a("a"), p("(f a)"));
    let r = unify(&prob, &UnifyConfig::collect()).unwrap();
    assert_eq!(r.main_failure(), Some(Failure::FreshnessFail));
}

#[test]
fn check_failures_examples() {
    let st = UnifyState::new(&UnifyProblem::new(vec![eq("a", "(lam b b)")]), true).unwrap();
    assert_eq!(check_failures(&st), Some(Failure::Clash));
    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(f Y)"), eq("Y", "(g X)")]), true).unwrap();
    assert_eq!(check_failures(&st), Some(Failure::CycleDetected));
    let mut st = UnifyState::new(&UnifyProblem::default(), true).unwrap();
    st.add_freshness(a("a"), v("X"));
    st.bind(v("X"), p("a"));
    assert_eq!(check_failures(&st), Some(Failure::FreshnessSolutionFail));
}

#[test]
fn letrec_branch_counts() {
    let st = UnifyState::new(&UnifyProblem::default(), true).unwrap();
    let e = eq("(letrec (a X) in a)", "(letrec (b Y) in b)");
    assert_eq!(rule_decompose_letrec(&st, &e).unwrap().len(), 1);
    let e = eq("(letrec (a X) (b Y) (c Z) in a)", "(letrec (a Y) (b Z) (c X) in a)");
    assert_eq!(rule_decompose_letrec(&st, &e).unwrap().len(), 6);
    let e = eq("(letrec (a X) in a)", "(letrec (a X) (b Y) in a)");
    assert_eq!(rule_decompose_letrec(&st, &e).unwrap_err(), Halt::Fail(Failure::Clash));
}

#[test]
fn example2_branch_equation() {
    let st = UnifyState::new(&UnifyProblem::default(), true).unwrap();
    let e = eq("(letrec (a (pair a b)) (b (pair a b)) in b)", "(letrec (b (pair b c)) (c (pair b c)) in c)");
    let kids = rule_decompose_letrec(&st, &e).unwrap();
    let id = decompose(&kids[0]).unwrap();
    assert!(check_failures(&id).is_none());
    assert!(id.equations().iter().all(|q| q.lhs.as_plain_var().is_some()));

    let (last, fresh) = peel_lambdas(&rule7_equation(&e, &[0, 1]).unwrap());
    let ab = p("(pair a b)");
    let expect = Expr::tuple(vec![ab.clone(), ab, p("b")]);
    assert_eq!(last, Equation::new(expect.clone(), expect));
    assert!(fresh.iter().all(|(a, t)| check_fresh(a, t)));
}

#[test]
fn mms_examples() {
    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(f Y)"), eq("X", "(f Y)")]), true).unwrap();
    let out = rule_mms(&st, &v("X")).unwrap();
    assert!(out.is_none(), "duplicate equations collapse on insertion");

    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(f Y)"), eq("X", "(f Z)")]), true).unwrap();
    let out = rule_mms(&st, &v("X")).unwrap().unwrap();
    assert_eq!(out.substitution().len(), 1);
    assert_eq!(out.equations().len(), 1);

    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(f Y)"), eq("X", "(g Z)")]), true).unwrap();
    assert_eq!(rule_mms(&st, &v("X")).unwrap_err(), Halt::Fail(Failure::Clash));
}

#[test]
fn fps_examples() {
    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(f Y)")]), true).unwrap();
    let out = rule_fps(&st, &v("X")).unwrap().unwrap();
    assert_eq!(out.substitution().get(&v("X")), Some(&p("(f Y)")));
    assert!(out.equations().is_empty());

    let st = UnifyState::new(
        &UnifyProblem::new(vec![eq("X", "(((a b)) . X)"), eq("X", "(f X1 (((b c)) . X1))")]),
        true,
    )
    .unwrap();
    let out = rule_fps(&st, &v("X")).unwrap().unwrap();
    let fix = out.fixpoints();
    let pi = Permutation::swap(a("a"), a("b"));
    let rho = Permutation::swap(a("b"), a("c"));
    let conj = rho.inverse().compose(&pi).compose(&rho);
    assert_eq!(fix, vec![(v("X1"), pi), (v("X1"), conj)]);

    let st = UnifyState::new(&UnifyProblem::new(vec![eq("X", "(((b c)) . X)"), eq("X", "a")]), true).unwrap();
    let out = rule_fps(&st, &v("X")).unwrap().unwrap();
    assert!(out.equations().is_empty());
}

#[test]
fn elimfp_examples() {
    let mut st = UnifyState::new(&UnifyProblem::default(), true).unwrap();
    let x = v("X");
    assert!(rule_elimfp(&mut st, &x, &Permutation::identity()).unwrap());
    assert!(!rule_elimfp(&mut st, &x, &Permutation::swap(a("a"), a("b"))).unwrap());
    assert!(rule_elimfp(&mut st, &x, &Permutation::swap(a("a"), a("b"))).unwrap());
    assert!(!rule_elimfp(&mut st, &x, &Permutation::swap(a("b"), a("c"))).unwrap());
    assert!(rule_elimfp(&mut st, &x, &Permutation::swap(a("a"), a("c"))).unwrap());
    assert_eq!(st.fixpoint_count(&x), 2);
}

#[test]
fn instantiate_fresh_examples() {
    let prob = UnifyProblem::new(vec![eq("X", "(((a b)) . X)")]);
    let r = unify(&prob, &UnifyConfig::collect()).unwrap();
    let g = instantiate_fresh(&r.unifiers[0]);
    let c = g.get(&v("X")).unwrap().clone();
    assert!(matches!(c, Expr::Atom(ref x) if *x != a("a") && *x != a("b")));
    assert_eq!(c.permute(&Permutation::swap(a("a"), a("b"))), c);
    sound(&prob, &r);

    let prob = UnifyProblem::new(vec![eq("X", "(f a)")]);
    let r = unify(&prob, &UnifyConfig::collect()).unwrap();
    assert_eq!(instantiate_fresh(&r.unifiers[0]).get(&v("X")), Some(&p("(f a)")));
}

#[test]
fn measure_examples() {
    assert_eq!(measure(&[]), Measure([0; 6]));
    assert_eq!(measure(&[eq("X", "(lam a Y)")]), Measure([0, 2, 2, 2, 0, 1]));
    let st = UnifyState::new(
        &UnifyProblem::new(vec![eq(
            "(letrec (a (pair a b)) (b (pair a b)) in b)",
            "(letrec (b (pair b c)) (c (pair b c)) in c)",
        )]),
        true,
    )
    .unwrap();
    assert_eq!(st.measure().0[0], 2);
}

#[test]
fn decide_stops_early() {
    let prob = UnifyProblem::new(vec![eq("(letrec (a X) (b Y) in (f a b))", "(letrec (c Z) (d W) in (f c d))")]);
    let all = unify(&prob, &UnifyConfig::collect()).unwrap();
    let one = unify(&prob, &UnifyConfig::decide()).unwrap();
    assert_eq!(one.unifiers.len(), 1);
    assert!(all.unifiers.len() >= 1);
    sound(&prob, &all);
}

#[test]
fn step_limit_aborts() {
    let prob = UnifyProblem::new(vec![eq("(f (f (f a)))", "(f (f (f a)))")]);
    let cfg = UnifyConfig { step_limit: 0, ..UnifyConfig::collect() };
    assert!(matches!(unify(&prob, &cfg), Err(EngineError::StepLimitExceeded(0))));
}

#[test]
fn env_vars_rejected() {
    let prob = UnifyProblem::new(vec![eq("(letrec Env1 in a)", "(letrec (b a) in a)")]);
    assert!(unify(&prob, &UnifyConfig::collect()).is_err());
}
