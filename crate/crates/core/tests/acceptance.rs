//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.
//!
//! Two criteria cannot hold as stated; for those the line reads FAIL and the
//! run checks that the failure has exactly the predicted shape. Any other
//! failure, or a known failure with a different shape, exits nonzero.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use teamcount::chain::{
    build_gk, count_paired, pm_to_im_interpolate, Carrier, PairedInstance, SearchMatchingOracle, SolutionKind,
};
use teamcount::cnf::QbFormula;
use teamcount::count::{
    count_assignments, count_inclusion_teams, count_relations, count_sigma1_dualhorn, count_teams, CountError,
    CountMode, CountOptions,
};
use teamcount::eval::{eval_tarski, EvalError, Evaluator};
use teamcount::formula::{parse_formula, AtomKind, Formula, Var};
use teamcount::reduce::{
    apply_interpretation, builtin_formula, dep_to_sigma1cnf_neg, incl_to_sigma1_dualhorn, star_turing_reduction,
    translate_formula, BuiltinFormula, Definition, FoInterpretation,
};
use teamcount::structure::{encode_2cnf_plus, encode_dualhorn, encode_sigma1cnf_neg, validate_sigma1cnf_neg_structure, Structure, Team};
use teamcount::Count;

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails as predicted; the text says why it cannot pass.
    KnownFail(String),
}

fn count_u64(c: Count) -> u64 {
    u64::try_from(c).expect("small count")
}

fn team_builtin(name: &str) -> (Formula, Vec<Var>) {
    match builtin_formula(name).unwrap() {
        BuiltinFormula::Team { formula, vars, .. } => (formula, vars),
        _ => unreachable!(),
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (inc, t) = team_builtin("incl-2cnf+");
    let (dep, _) = team_builtin("dep-2cnf+");
    let opts = CountOptions::default();
    let (mut instances, mut inc_ok, mut dep_ok, mut dep_off_by_one) = (0, 0, 0, 0);
    for n in 1..=3i32 {
        let mut clauses: Vec<Vec<i32>> = (1..=n).map(|i| vec![i]).collect();
        for i in 1..=n {
            for j in i + 1..=n {
                clauses.push(vec![i, j]);
            }
        }
        for mask in 1u32..1 << clauses.len() {
            let chosen: Vec<&[i32]> = (0..clauses.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| clauses[i].as_slice())
                .collect();
            let f = QbFormula::from_ints(n as u32, &chosen, &[]);
            let a = encode_2cnf_plus(&f).unwrap().structure;
            let expected = brute_all(&f);
            let fi = count_u64(count_teams(&a, &inc, &t, &opts).unwrap().count);
            let fd = count_u64(count_teams(&a, &dep, &t, &opts).unwrap().count);
            instances += 1;
            inc_ok += usize::from(fi == expected);
            dep_ok += usize::from(fd == expected);
            dep_off_by_one += usize::from(fd + 1 == expected);
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{instances} clause sets; f_inc exact on {inc_ok}, f_dep exact on {dep_ok}, f_dep = #2CNF+ - 1 on {dep_off_by_one}; {:.1}s",
        elapsed.as_secs_f64()
    );
    if inc_ok == instances && dep_ok == instances && elapsed < Duration::from_secs(60) {
        Verdict::Pass(detail)
    } else if inc_ok == instances && dep_off_by_one == instances && elapsed < Duration::from_secs(60) {
        Verdict::KnownFail(format!(
            "{detail}. The dependence encoding maps the all-true assignment to the empty team, which is never counted"
        ))
    } else {
        Verdict::Fail(detail)
    }
}

fn reduction_instances(kind: AtomKind, count: usize, seed: u64) -> Vec<(Structure, Formula, Vec<Var>, teamcount::formula::NormalFormDescriptor)> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for i in 0..count {
        let n = 1 + i % 3;
        let m = 1 + (i / 3) % 2;
        let free: Vec<Var> = (1..=m).map(|j| v(&format!("x{j}"))).collect();
        let depth = rng.gen_range(0..=2usize);
        let k = rng.gen_range(0..=depth);
        let a = random_structure(&mut rng, n, &[("R", 1), ("S", 2)], 0.5);
        let (f, d) = random_normal_form(&mut rng, kind, &free, k, depth - k);
        out.push((a, f, free, d));
    }
    out
}

fn criterion_2() -> Verdict {
    let opts = CountOptions::default();
    let instances = reduction_instances(AtomKind::Dependence, 60, 0x16);
    let mut bad = Vec::new();
    for (i, (a, f, free, d)) in instances.iter().enumerate() {
        let g = dep_to_sigma1cnf_neg(a, d).unwrap();
        let star = count_assignments(&g.formula, CountMode::Star).count;
        let teams = count_teams(a, f, free, &opts).unwrap().count;
        let n = a.size() as u64;
        let expected_vars: u64 = (0..=d.k() + d.l()).map(|j| n.pow((d.m() + j) as u32)).sum();
        let oracle = brute_count_teams(a, f, free);
        if star != teams || u64::from(g.formula.num_vars()) != expected_vars || count_u64(teams) != oracle || !g.formula.classify().cnf_neg {
            bad.push(format!("#{i} `{f}`"));
        }
    }
    let detail = format!("{} instances, {} mismatches {:?}", instances.len(), bad.len(), bad);
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_3() -> Verdict {
    let opts = CountOptions::default();
    let instances = reduction_instances(AtomKind::Inclusion, 60, 0x21);
    let (mut equal, mut dual_horn, mut cnf_neg, mut witnessed) = (0, 0, 0, 0);
    for (a, f, free, d) in &instances {
        let g = incl_to_sigma1_dualhorn(a, d).unwrap();
        let star = count_assignments(&g.formula, CountMode::Star).count;
        let teams = count_teams(a, f, free, &opts).unwrap().count;
        equal += usize::from(star == teams && count_u64(teams) == brute_count_teams(a, f, free));
        let flags = g.formula.classify();
        dual_horn += usize::from(flags.dual_horn);
        cnf_neg += usize::from(flags.cnf_neg);
        witnessed += usize::from(!flags.cnf_neg && downward_witness(a, f, free).is_some());
    }
    let total = instances.len();
    let detail = format!(
        "{total} instances; counts equal on {equal}, DualHorn {dual_horn}/{total}, CNF- {cnf_neg}/{total}; \
{witnessed} of the others have a satisfying team with a failing nonempty subteam"
    );
    if equal == total && dual_horn == total && cnf_neg == total {
        Verdict::Pass(detail)
    } else if equal == total && dual_horn == total && witnessed > 0 {
        Verdict::KnownFail(format!(
            "{detail}. Star models of a formula whose free variables occur only negatively are closed under turning \
free variables off, so no such formula can count a team set that is not downward closed"
        ))
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_4() -> Verdict {
    let mut rng = rng(0x26);
    let (mut trials, mut ok, mut probes_ok) = (0, 0, 0);
    for _ in 0..150 {
        let vars = rng.gen_range(1..=8);
        let gen = CnfGen {
            vars,
            clauses: rng.gen_range(0..=8),
            width: 3,
            bound: rng.gen_range(0..=vars),
            negative_free: true,
            dual_horn: false,
        };
        let f = gen.generate(&mut rng);
        let mut first = None;
        let mut oracle = |g: &QbFormula| -> Result<Count, CountError> {
            let c = count_assignments(g, CountMode::Star).count;
            first.get_or_insert(c.clone());
            Ok(c)
        };
        let r = star_turing_reduction(&f, &mut oracle).unwrap();
        trials += 1;
        ok += usize::from(count_u64(r.count) == brute_projected(&f, false));
        let probe = count_u64(first.unwrap());
        probes_ok += usize::from(probe == 0 || probe == 2);
    }
    let detail = format!("{trials} formulas; exact on {ok}; probe in {{0, 2}} on {probes_ok}");
    if ok == trials && probes_ok == trials {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

/// Runs `trial` until it has produced `wanted` evaluations; trials that hit
/// the evaluation budget are redrawn. Returns (checked, nonvacuous, rejected,
/// violations).
fn closure_suite(
    wanted: usize,
    seed: u64,
    mut trial: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> Result<Option<bool>, EvalError>,
) -> (usize, usize, usize, usize) {
    let mut rng = rng(seed);
    let (mut done, mut nonvacuous, mut rejected, mut violations) = (0, 0, 0, 0);
    while done < wanted {
        match trial(&mut rng) {
            Ok(outcome) => {
                done += 1;
                if let Some(held) = outcome {
                    nonvacuous += 1;
                    violations += usize::from(!held);
                }
            }
            Err(EvalError::BudgetExceeded { .. }) => rejected += 1,
            Err(e) => panic!("{e}"),
        }
    }
    (done, nonvacuous, rejected, violations)
}

fn criterion_5() -> Verdict {
    let xy = vec![v("x"), v("y")];
    let setup = |rng: &mut rand_chacha::ChaCha8Rng, logic: Logic| {
        let n = rng.gen_range(1..=3);
        let a = random_structure(rng, n, &[("R", 1), ("S", 2)], 0.5);
        let f = FormulaGen::new(logic, 3, 2).generate(rng, &xy);
        (a, f)
    };
    let flat = closure_suite(1000, 501, |rng| {
        let (a, f) = setup(rng, Logic::Fo);
        let x = random_team(rng, &xy, a.size(), 4);
        let team = definitional(&a).eval(&x, &f)?;
        let mut pointwise = true;
        for s in x.assignments() {
            pointwise &= eval_tarski(&a, &s, &f)?;
        }
        Ok(Some(team == pointwise))
    });
    let down = closure_suite(1000, 502, |rng| {
        let (a, f) = setup(rng, Logic::Dependence);
        let x = random_team(rng, &xy, a.size(), 4);
        let ev = definitional(&a);
        if !ev.eval(&x, &f)? {
            return Ok(None);
        }
        let mut all = true;
        for y in subteams(&x) {
            all &= ev.eval(&y, &f)?;
        }
        Ok(Some(all))
    });
    let union = closure_suite(1000, 503, |rng| {
        let (a, f) = setup(rng, Logic::Inclusion);
        let x = random_team(rng, &xy, a.size(), 3);
        let y = random_team(rng, &xy, a.size(), 3);
        let ev = definitional(&a);
        if !(ev.eval(&x, &f)? && ev.eval(&y, &f)?) {
            return Ok(None);
        }
        Ok(Some(ev.eval(&x.union(&y).unwrap(), &f)?))
    });
    let empty = closure_suite(1000, 504, |rng| {
        let (a, f) = setup(rng, Logic::Mixed);
        Ok(Some(definitional(&a).eval(&Team::new(xy.clone()).unwrap(), &f)?))
    });
    let suites = [("flat", flat), ("downward", down), ("union", union), ("empty", empty)];
    let violations: usize = suites.iter().map(|(_, s)| s.3).sum();
    let detail = suites
        .iter()
        .map(|(name, (done, nv, rej, viol))| format!("{name}: {done} trials ({nv} nonvacuous, {rej} redrawn), {viol} violations"))
        .collect::<Vec<_>>()
        .join("; ");
    if violations == 0 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_6() -> Verdict {
    let mut rng = rng(0x18);
    let xy = vec![v("x"), v("y")];
    let opts = CountOptions::default();
    let (mut trials, mut bad) = (0, Vec::new());
    for i in 0..300 {
        let n = rng.gen_range(1..=3);
        let a = random_structure(&mut rng, n, &[("R", 1), ("S", 2)], 0.5);
        let f = FormulaGen::new(Logic::Inclusion, 3, 2).generate(&mut rng, &xy);
        let x = random_team(&mut rng, &xy, n, 6);
        let ev = Evaluator::new(&a);
        let m = ev.max_subteam(&x, &f).unwrap();
        let again = ev.max_subteam(&m, &f).unwrap();
        let full = Team::full(xy.clone(), n).unwrap();
        let top = ev.max_subteam(&full, &f).unwrap();
        let positive = count_teams(&a, &f, &xy, &opts).unwrap().count > Count::from(0u32);
        trials += 1;
        if m != brute_max_subteam(&a, &x, &f) || again != m || positive == top.is_empty() {
            bad.push(format!("#{i} `{f}`"));
        }
    }
    let detail = format!("{trials} (formula, team) pairs; {} failures {:?}", bad.len(), bad);
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_7() -> Verdict {
    let opts = CountOptions::default();
    let mut rng = rng(0x22);
    let mut bad = Vec::new();
    let two = Structure::new(2).unwrap();
    let xy = vec![v("x"), v("y")];
    let worked = count_u64(count_inclusion_teams(&two, &parse_formula("inc(x;y)").unwrap(), &xy, &opts).unwrap().count);
    if worked != 11 {
        bad.push(format!("inc(x;y) over 2 elements gave {worked}"));
    }
    let mut team_trials = 0;
    for i in 0..150 {
        let n = rng.gen_range(1..=3);
        let vars = if i % 2 == 0 { vec![v("x")] } else { xy.clone() };
        let a = random_structure(&mut rng, n, &[("R", 1), ("S", 2)], 0.5);
        let f = FormulaGen::new(Logic::Inclusion, 3, 2).generate(&mut rng, &vars);
        let fast = count_u64(count_inclusion_teams(&a, &f, &vars, &opts).unwrap().count);
        team_trials += 1;
        if fast != brute_count_teams(&a, &f, &vars) {
            bad.push(format!("team #{i} `{f}`"));
        }
    }
    let mut sat_trials = 0;
    for i in 0..300 {
        let vars = rng.gen_range(1..=8);
        let gen = CnfGen {
            vars,
            clauses: rng.gen_range(0..=8),
            width: 3,
            bound: rng.gen_range(0..=vars),
            negative_free: false,
            dual_horn: true,
        };
        let f = gen.generate(&mut rng);
        sat_trials += 1;
        if count_u64(count_sigma1_dualhorn(&f).unwrap().count) != brute_projected(&f, false) {
            bad.push(format!("dualhorn #{i}"));
        }
    }
    let detail = format!(
        "inc(x;y) over 2 elements = {worked}; {team_trials} inclusion-team and {sat_trials} DualHorn instances; {} failures {:?}",
        bad.len(),
        bad
    );
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_8() -> Verdict {
    let opts = CountOptions::default();
    let mut rng = rng(0x1420);
    let BuiltinFormula::Relational { query: sigma, .. } = builtin_formula("sigma11-cnfneg").unwrap() else {
        unreachable!()
    };
    let BuiltinFormula::Relational { query: myopic, .. } = builtin_formula("myopic-dualhorn").unwrap() else {
        unreachable!()
    };
    let (mut ok14, mut ok20) = (0, 0);
    let trials = 60;
    for _ in 0..trials {
        let vars = rng.gen_range(1..=4);
        let f = CnfGen {
            vars,
            clauses: rng.gen_range(0..=3),
            width: 3,
            bound: rng.gen_range(0..=vars),
            negative_free: true,
            dual_horn: false,
        }
        .generate(&mut rng);
        let a = encode_sigma1cnf_neg(&f).unwrap().structure;
        let got = count_u64(count_relations(&a, &sigma, true, &opts).unwrap().count);
        ok14 += usize::from(validate_sigma1cnf_neg_structure(&a).unwrap() && got == brute_projected(&f, true));

        let vars = rng.gen_range(1..=4);
        let g = CnfGen {
            vars,
            clauses: rng.gen_range(0..=4),
            width: 3,
            bound: 0,
            negative_free: false,
            dual_horn: true,
        }
        .generate(&mut rng);
        let b = encode_dualhorn(&g).unwrap().structure;
        let got = count_u64(count_relations(&b, &myopic, true, &opts).unwrap().count);
        ok20 += usize::from(got == brute_projected(&g, true));
    }
    let detail = format!("relational prefix CNF- exact on {ok14}/{trials}; myopic DualHorn exact on {ok20}/{trials}");
    if ok14 == trials && ok20 == trials {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn criterion_9() -> Verdict {
    let mut rng = rng(0x25);
    let opts = CountOptions::default();
    let (mut graphs, mut identities, mut bad) = (0, 0, Vec::new());
    for i in 0..120 {
        let (left, right) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let g = random_bigraph(&mut rng, left, right, 8);
        let e = g.edges.len() as u32;
        let psi = if e == 0 || i % 2 == 0 {
            QbFormula::quantifier_free(e, vec![]).unwrap()
        } else {
            let bound = rng.gen_range(0..=2);
            CnfGen {
                vars: e + bound,
                clauses: rng.gen_range(0..=3),
                width: 3,
                bound,
                negative_free: true,
                dual_horn: false,
            }
            .generate(&mut rng)
        };
        let plain = brute_matchings_by_size(&g, |_| true);
        let accepted = brute_matchings_by_size(&g, |sel| brute_accepts(&psi, sel));
        let n1 = g.left.len();
        let bare = PairedInstance::unconstrained(Carrier::Bipartite(g.clone()), SolutionKind::PerfectMatching).unwrap();
        let paired = PairedInstance::new(Carrier::Bipartite(g.clone()), SolutionKind::PerfectMatching, psi.clone()).unwrap();
        graphs += 1;
        for k in 1..=n1 + 1 {
            let poly = |a: &[u64]| -> u64 { (0..=n1).map(|r| a[n1 - r] * ((k as u64 + 1).pow(r as u32))).sum() };
            let total = count_u64(count_paired(&build_gk(&bare, k).unwrap(), &opts).unwrap().count);
            let with_psi = count_u64(count_paired(&build_gk(&paired, k).unwrap(), &opts).unwrap().count);
            identities += 2;
            if total != poly(&plain) || with_psi != poly(&accepted) {
                bad.push(format!("graph #{i}, k = {k}"));
            }
        }
        let r = pm_to_im_interpolate(&paired, &mut SearchMatchingOracle { opts }).unwrap();
        let perfect = if n1 == g.right.len() { accepted[n1] } else { 0 };
        let coefficients: Vec<u64> = r.coefficients.iter().cloned().map(count_u64).collect();
        let expected: Vec<u64> = (0..=n1).map(|r| accepted[n1 - r]).collect();
        if count_u64(r.value) != perfect || coefficients != expected {
            bad.push(format!("interpolation on graph #{i}"));
        }
    }
    let detail = format!("{graphs} graphs, {identities} G_k identities, {} failures {:?}", bad.len(), bad);
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn random_interpretation(rng: &mut rand_chacha::ChaCha8Rng, a: &Structure, k: usize) -> Option<FoInterpretation> {
    let params = |prefix: &str, count: usize| -> Vec<Var> { (1..=count).map(|i| v(&format!("{prefix}{i}"))).collect() };
    let gen = FormulaGen::new(Logic::Fo, 2, 1);
    let domain = Definition::new(params("p", k), gen.generate(rng, &params("p", k)));
    let unary = Definition::new(params("a", k), gen.generate(rng, &params("a", k)));
    let binary = Definition::new(params("b", 2 * k), gen.generate(rng, &params("b", 2 * k)));
    let i = FoInterpretation::new(k, a.vocabulary(), domain, vec![("T".into(), 1, unary), ("U".into(), 2, binary)]).ok()?;
    apply_interpretation(&i, a).ok().map(|_| i)
}

fn criterion_10() -> Verdict {
    let mut rng = rng(0x15);
    let (mut trials, mut bad) = (0, Vec::new());
    while trials < 200 {
        let n = rng.gen_range(2..=3);
        let k = rng.gen_range(1..=2);
        let a = random_structure(&mut rng, n, &[("R", 1), ("S", 2)], 0.5);
        let Some(i) = random_interpretation(&mut rng, &a, k) else {
            continue;
        };
        let b = apply_interpretation(&i, &a).unwrap();
        let logic = [Logic::Fo, Logic::Dependence, Logic::Inclusion][trials % 3];
        let free = if trials % 2 == 0 { vec![v("x")] } else { vec![v("x"), v("y")] };
        let mut gen = FormulaGen::new(logic, 3, if k == 1 { 2 } else { 1 });
        gen.unary = "T";
        gen.binary = "U";
        let phi = gen.generate(&mut rng, &free);
        let target = random_team(&mut rng, &free, b.structure.size(), 3);
        let psi = translate_formula(&i, &phi, &free).unwrap();
        let source = b.source_team(&target);
        let want = Evaluator::new(&b.structure).eval(&target, &phi).unwrap();
        let got = Evaluator::new(&a).eval(&source, &psi).unwrap();
        trials += 1;
        if want != got {
            bad.push(format!("#{trials} k={k} `{phi}`"));
        }
    }
    let detail = format!("{trials} trials, {} counterexamples {:?}", bad.len(), bad);
    if bad.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1 2CNF+ triple equality", criterion_1),
        ("2 dependence grounding", criterion_2),
        ("3 inclusion grounding", criterion_3),
        ("4 star Turing reduction", criterion_4),
        ("5 closure suites", criterion_5),
        ("6 maximal subteam", criterion_6),
        ("7 inclusion and DualHorn counters", criterion_7),
        ("8 relational built-ins", criterion_8),
        ("9 G_k identity and interpolation", criterion_9),
        ("10 interpretation soundness", criterion_10),
    ];
    let mut unexpected = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Verdict::Pass(d) => println!("[PASS] criterion {name} ({secs:.1}s): {d}"),
            Verdict::KnownFail(d) => println!("[FAIL] criterion {name} ({secs:.1}s, as analysed): {d}"),
            Verdict::Fail(d) => {
                unexpected += 1;
                println!("[FAIL] criterion {name} ({secs:.1}s): {d}");
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
