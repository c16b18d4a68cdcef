use std::path::Path;

use anyhow::{Context, Result};
use num_bigint::BigUint;
use teamcount::chain::{
    build_gk, cc_to_pm, combine, count_paired, im_to_2cnf_neg, parse_graph, pm_to_im_interpolate, split_sigma1_3cnf,
    write_graph, Carrier, Graph, PairedInstance, SearchMatchingOracle, SolutionKind,
};
use teamcount::cnf::{write_dimacs, QbFormula};
use teamcount::count::{
    count_assignments, count_inclusion_teams, count_relations, count_sigma1_dualhorn, count_teams, CountMode,
    CountOptions, RelationalQuery, DEFAULT_BUDGET,
};
use teamcount::eval::{Evaluator, Strategy};
use teamcount::formula::{check_normal_form_over, AtomKind};
use teamcount::reduce::{
    builtin_formula, dep_to_sigma1cnf_neg, incl_to_sigma1_dualhorn, star_probe, star_turing_reduction, BuiltinFormula,
    SearchOracle, BUILTIN_NAMES,
};
use teamcount::structure::{encode_2cnf_plus, encode_dualhorn, encode_sigma1cnf_neg, write_structure, write_team};

use crate::input::{self, usage, Source};
use crate::report::Report;
use crate::{oracle, Cli, Command, Common, Mode, ReduceKind, SatMethod, StrategyArg, TeamMethod};

pub fn run(cli: &Cli, argv: &[String]) -> Result<Report> {
    let c = &cli.common;
    let mut r = Report::new(argv);
    match &cli.command {
        Command::Eval { strategy } => eval(c, *strategy, &mut r)?,
        Command::CountTeams { method } => count_teams_cmd(c, *method, &mut r)?,
        Command::CountRelations { relations, nonempty } => count_relations_cmd(c, relations.as_deref(), *nonempty, &mut r)?,
        Command::CountSat { method } => count_sat(c, *method, &mut r)?,
        Command::MaxSubteam => max_subteam(c, &mut r)?,
        Command::Reduce { kind } => reduce(c, *kind, &mut r)?,
        Command::Chain { graph, companion } => chain(c, graph.as_deref(), companion.as_deref(), &mut r)?,
        Command::Verify => verify(c, &mut r)?,
        Command::Builtin { name } => builtin(name.as_deref(), &mut r)?,
    }
    Ok(r)
}

fn budget(c: &Common) -> u64 {
    c.budget.unwrap_or(DEFAULT_BUDGET)
}

fn opts(c: &Common) -> CountOptions {
    CountOptions::default().with_budget(budget(c))
}

fn count_mode(m: Mode) -> CountMode {
    match m {
        Mode::All => CountMode::All,
        Mode::Star => CountMode::Star,
        Mode::Projected => CountMode::Projected,
    }
}

fn eval(c: &Common, strategy: StrategyArg, r: &mut Report) -> Result<()> {
    let a = input::structure(c, r)?;
    let (f, vars) = input::team_formula(c, r)?;
    let team = input::team(c, &vars, a.size(), r)?;
    let strategy = match strategy {
        StrategyArg::Optimized => Strategy::Optimized,
        StrategyArg::Definitional => Strategy::Definitional,
    };
    let ev = Evaluator::new(&a).with_strategy(strategy).with_budget(budget(c));
    let value = r.timed("eval", || ev.eval(&team, &f))?;
    r.push("team.size", team.len());
    r.result("satisfied", value);
    if c.verify {
        let other = match strategy {
            Strategy::Optimized => Strategy::Definitional,
            Strategy::Definitional => Strategy::Optimized,
        };
        let check = Evaluator::new(&a).with_strategy(other).with_budget(budget(c));
        let again = r.timed("verify", || check.eval(&team, &f))?;
        r.check("satisfied", again == value);
    }
    Ok(())
}

fn count_teams_cmd(c: &Common, method: TeamMethod, r: &mut Report) -> Result<()> {
    let a = input::structure(c, r)?;
    let (f, vars) = input::team_formula(c, r)?;
    let o = opts(c);
    let result = r.timed("count", || match method {
        TeamMethod::Auto if f.is_union_closed() && !f.is_downward_closed() => count_inclusion_teams(&a, &f, &vars, &o),
        TeamMethod::Auto => count_teams(&a, &f, &vars, &o),
        TeamMethod::Brute => count_teams(&a, &f, &vars, &CountOptions::brute_force().with_budget(o.budget)),
        TeamMethod::Inclusion => count_inclusion_teams(&a, &f, &vars, &o),
    })?;
    r.result("count", &result.count);
    r.push("stats.nodes", result.stats.nodes);
    r.push("stats.oracle_calls", result.stats.oracle_calls);
    if c.verify {
        let want = r.timed("verify", || oracle::teams(&a, &f, &vars, o.budget))?;
        r.push("oracle.count", &want);
        r.check("count", want == result.count);
    }
    Ok(())
}

fn parse_decls(list: &str) -> Result<Vec<(String, usize)>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|d| {
            let (name, arity) = d.split_once('/').ok_or_else(|| input::UsageError(format!("bad relation `{d}`")))?;
            let arity = arity.parse().map_err(|_| input::UsageError(format!("bad arity in `{d}`")))?;
            Ok((name.to_string(), arity))
        })
        .collect()
}

fn count_relations_cmd(c: &Common, relations: Option<&str>, nonempty: bool, r: &mut Report) -> Result<()> {
    let a = input::structure(c, r)?;
    let (q, nonempty) = match input::formula_source(c, r)? {
        Source::Builtin(_, BuiltinFormula::Relational { query, .. }) => (query, true),
        Source::Builtin(name, _) => return usage(format!("`{name}` is counted with count-teams")),
        Source::Text { label, text } => {
            let Some(list) = relations else {
                return usage("--relations is required for a query");
            };
            let vars = c.vars.as_deref().map(input::var_list);
            (RelationalQuery::parse(&text, parse_decls(list)?, vars).with_context(|| label)?, nonempty)
        }
    };
    r.push("nonempty", nonempty);
    let result = r.timed("count", || count_relations(&a, &q, nonempty, &opts(c)))?;
    r.result("count", &result.count);
    if c.verify {
        let want = r.timed("verify", || oracle::relations(&a, &q, nonempty))?;
        r.push("oracle.count", &want);
        r.check("count", want == result.count);
    }
    Ok(())
}

fn count_sat(c: &Common, method: SatMethod, r: &mut Report) -> Result<()> {
    let f = input::dimacs(c, r)?;
    let flags = f.classify();
    r.push("formula.vars", f.num_vars());
    r.push("formula.clauses", f.clauses().len());
    r.push("formula.cnf_neg", flags.cnf_neg);
    r.push("formula.dual_horn", flags.dual_horn);
    r.push("mode", format!("{:?}", c.mode).to_lowercase());
    let result = r.timed("count", || -> Result<_> {
        Ok(match (method, c.mode) {
            (SatMethod::Search, m) => count_assignments(&f, count_mode(m)),
            (SatMethod::Dualhorn, Mode::Projected) => count_sigma1_dualhorn(&f)?,
            (SatMethod::StarReduction, Mode::Projected) => star_turing_reduction(&f, &mut SearchOracle)?,
            _ => return usage("dualhorn and star-reduction count in projected mode"),
        })
    })?;
    r.result("count", &result.count);
    r.push("stats.nodes", result.stats.nodes);
    r.push("stats.oracle_calls", result.stats.oracle_calls);
    if c.verify {
        let want = r.timed("verify", || oracle::assignments(&f, c.mode))?;
        r.push("oracle.count", &want);
        r.check("count", want == result.count);
    }
    Ok(())
}

fn max_subteam(c: &Common, r: &mut Report) -> Result<()> {
    let a = input::structure(c, r)?;
    let (f, vars) = input::team_formula(c, r)?;
    let team = input::team(c, &vars, a.size(), r)?;
    let ev = Evaluator::new(&a).with_budget(budget(c));
    let m = r.timed("max_subteam", || ev.max_subteam(&team, &f))?;
    r.result("size", m.len());
    input::emit(c, "team", write_team(&m), r)?;
    if c.verify {
        let want = r.timed("verify", || oracle::max_subteam(&a, &team, &f, budget(c)))?;
        r.check("team", want == m);
    }
    Ok(())
}

fn reduce(c: &Common, kind: ReduceKind, r: &mut Report) -> Result<()> {
    match kind {
        ReduceKind::Dep2cnf | ReduceKind::Incl2dualhorn => {
            let a = input::structure(c, r)?;
            let (f, vars) = input::team_formula(c, r)?;
            let atom = if kind == ReduceKind::Dep2cnf { AtomKind::Dependence } else { AtomKind::Inclusion };
            let d = check_normal_form_over(&f, atom, &vars).map_err(|e| input::UsageError(e.to_string()))?;
            let g = r.timed("reduce", || {
                if atom == AtomKind::Dependence {
                    dep_to_sigma1cnf_neg(&a, &d)
                } else {
                    incl_to_sigma1_dualhorn(&a, &d)
                }
            })?;
            let flags = g.formula.classify();
            r.result("vars", g.formula.num_vars());
            r.push("clauses", g.formula.clauses().len());
            r.push("free_vars", g.formula.free_vars().len());
            r.push("cnf_neg", flags.cnf_neg);
            r.push("dual_horn", flags.dual_horn);
            input::emit(c, "dimacs", g.to_dimacs(), r)?;
            if c.verify {
                let star = r.timed("verify", || count_assignments(&g.formula, CountMode::Star).count);
                let teams = count_teams(&a, &f, &vars, &opts(c))?.count;
                r.push("star_count", &star);
                r.push("team_count", &teams);
                r.check("count", star == teams);
            }
        }
        ReduceKind::Star => {
            let f = input::dimacs(c, r)?;
            let probe = star_probe(&f)?;
            let result = r.timed("reduce", || star_turing_reduction(&f, &mut SearchOracle))?;
            r.result("count", &result.count);
            r.push("oracle_calls", result.stats.oracle_calls);
            input::emit(c, "dimacs", write_dimacs(&probe), r)?;
            if c.verify {
                let want = r.timed("verify", || oracle::assignments(&f, Mode::Projected))?;
                r.push("oracle.count", &want);
                r.check("count", want == result.count);
            }
        }
        ReduceKind::Encode2cnfPlus | ReduceKind::EncodeCnfneg | ReduceKind::EncodeDualhorn => {
            let f = input::dimacs(c, r)?;
            let (enc, builtin, mode) = match kind {
                ReduceKind::Encode2cnfPlus => (encode_2cnf_plus(&f)?, "incl-2cnf+", Mode::All),
                ReduceKind::EncodeCnfneg => (encode_sigma1cnf_neg(&f)?, "sigma11-cnfneg", Mode::Star),
                _ => (encode_dualhorn(&f)?, "myopic-dualhorn", Mode::Star),
            };
            r.result("elements", enc.structure.size());
            r.push("builtin", builtin);
            input::emit(c, "structure", write_structure(&enc.structure), r)?;
            if c.verify {
                let o = opts(c);
                let got = r.timed("verify", || -> Result<BigUint> {
                    Ok(match builtin_formula(builtin)? {
                        BuiltinFormula::Team { formula, vars, .. } => count_teams(&enc.structure, &formula, &vars, &o)?.count,
                        BuiltinFormula::Relational { query, .. } => count_relations(&enc.structure, &query, true, &o)?.count,
                    })
                })?;
                let want = oracle::assignments(&f, mode)?;
                r.push("builtin_count", &got);
                r.push("oracle.count", &want);
                r.check("count", got == want);
            }
        }
    }
    Ok(())
}

fn step(r: &mut Report, i: usize, name: &str, count: &BigUint) {
    r.push(format!("step.{i}.name"), name);
    r.push(format!("step.{i}.count"), count);
}

fn save(c: &Common, file: &str, text: String, r: &mut Report) -> Result<()> {
    if let Some(dir) = &c.output {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(file);
        std::fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        r.output(file, &path.display().to_string(), text.as_bytes());
    }
    Ok(())
}

fn chain(c: &Common, graph: Option<&Path>, companion: Option<&Path>, r: &mut Report) -> Result<()> {
    let o = opts(c);
    let mut counts: Vec<BigUint> = Vec::new();
    let mut i = 0;
    let mut record = |r: &mut Report, name: &str, n: BigUint| {
        i += 1;
        step(r, i, name, &n);
        counts.push(n);
    };
    let start = match (graph, &c.formula) {
        (Some(path), _) => {
            let text = input::read_file(path)?;
            r.input("graph", &path.display().to_string(), text.as_bytes());
            let g = parse_graph(&text).with_context(|| path.display().to_string())?;
            let edges = match &g {
                Graph::Directed(d) => d.edges.len(),
                Graph::Bipartite(b) => b.edges.len(),
            } as u32;
            let psi = match companion {
                Some(p) => input::dimacs_file(p, "companion", r)?,
                None => QbFormula::quantifier_free(edges, vec![])?,
            };
            let (carrier, kind) = match g {
                Graph::Directed(d) => (Carrier::Directed(d), SolutionKind::CycleCover),
                Graph::Bipartite(b) => (Carrier::Bipartite(b), SolutionKind::PerfectMatching),
            };
            PairedInstance::new(carrier, kind, psi)?
        }
        (None, Some(_)) => {
            let f = input::dimacs(c, r)?;
            let s = r.timed("split", || split_sigma1_3cnf(&f))?;
            r.push("split.mixed", s.mixed);
            let p = s.paired()?;
            save(c, "split-phi.cnf", write_dimacs(&s.phi), r)?;
            save(c, "split-psi.cnf", write_dimacs(&s.psi), r)?;
            let n = r.timed("count", || count_paired(&p, &o))?.count;
            record(r, "split", n.clone());
            r.result("count", &n);
            if c.verify {
                let want = r.timed("verify", || oracle::assignments(&f, Mode::Projected))?;
                r.push("oracle.count", &want);
                r.check("count", want == n);
            }
            return Ok(());
        }
        (None, None) => return usage("chain needs --graph or --formula"),
    };
    let oracle_start = if c.verify { Some(r.timed("verify", || oracle::paired(&start))?) } else { None };
    let pm = if let Carrier::Directed(_) = start.carrier() {
        let n = r.timed("cycle_covers", || count_paired(&start, &o))?.count;
        record(r, "cycle-covers", n);
        let pm = cc_to_pm(&start)?;
        let n = r.timed("perfect_matchings", || count_paired(&pm, &o))?.count;
        record(r, "perfect-matchings", n);
        pm
    } else {
        let n = r.timed("perfect_matchings", || count_paired(&start, &o))?.count;
        record(r, "perfect-matchings", n);
        start.clone()
    };
    if let Carrier::Bipartite(g) = pm.carrier() {
        save(c, "perfect-matching.graph", write_graph(&Graph::Bipartite(g.clone())), r)?;
    }
    let interp = r.timed("interpolate", || pm_to_im_interpolate(&pm, &mut SearchMatchingOracle { opts: o }))?;
    let queries: Vec<String> = interp.queries.iter().map(|(k, n)| format!("{k}:{n}")).collect();
    r.push("interpolation.queries", queries.join(","));
    r.push(
        "interpolation.coefficients",
        interp.coefficients.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
    );
    record(r, "interpolated", interp.value.clone());
    let g1 = build_gk(&pm, 1)?;
    let matchings = r.timed("matchings", || count_paired(&g1, &o))?.count;
    let cnf = im_to_2cnf_neg(&g1)?;
    let models = r.timed("models", || count_paired(&cnf, &o))?.count;
    let prefix = combine(&cnf)?;
    let projected = r.timed("projected", || count_assignments(&prefix, CountMode::Projected).count);
    if let Carrier::Cnf(phi) = cnf.carrier() {
        save(c, "matching-2cnf.cnf", write_dimacs(phi), r)?;
    }
    save(c, "combined.cnf", write_dimacs(&prefix), r)?;
    r.push("g1.matchings", &matchings);
    r.push("g1.models", &models);
    r.push("g1.projected", &projected);
    r.result("count", &interp.value);
    if c.verify {
        let want = oracle_start.expect("computed");
        r.push("oracle.count", &want);
        r.check("steps", counts.iter().all(|n| *n == want));
        let g1_want = r.timed("verify_g1", || oracle::paired(&g1))?;
        r.check("g1", matchings == g1_want && models == g1_want && projected == g1_want);
    }
    Ok(())
}

fn verify(c: &Common, r: &mut Report) -> Result<()> {
    let a = input::structure(c, r)?;
    let (f, vars) = input::team_formula(c, r)?;
    let o = opts(c);
    let want = r.timed("oracle", || oracle::teams(&a, &f, &vars, o.budget))?;
    r.result("count", &want);
    let pruned = r.timed("count_teams", || count_teams(&a, &f, &vars, &o))?.count;
    r.check("count_teams", pruned == want);
    let full = teamcount::structure::Team::full(vars.clone(), a.size())?;
    let top = Evaluator::new(&a).with_budget(o.budget).max_subteam(&full, &f);
    if f.is_union_closed() {
        let n = r.timed("count_inclusion_teams", || count_inclusion_teams(&a, &f, &vars, &o))?.count;
        r.check("count_inclusion_teams", n == want);
        r.check("max_subteam_nonempty", top?.is_empty() == (want == BigUint::from(0u32)));
    }
    for (atom, name) in [(AtomKind::Dependence, "dep2cnf"), (AtomKind::Inclusion, "incl2dualhorn")] {
        let Ok(d) = check_normal_form_over(&f, atom, &vars) else {
            continue;
        };
        let g = r.timed(name, || {
            if atom == AtomKind::Dependence {
                dep_to_sigma1cnf_neg(&a, &d)
            } else {
                incl_to_sigma1_dualhorn(&a, &d)
            }
        })?;
        let star = count_assignments(&g.formula, CountMode::Star).count;
        r.check(name, star == want);
    }
    if c.team.is_some() {
        let team = input::team(c, &vars, a.size(), r)?;
        let opt = Evaluator::new(&a).with_budget(o.budget).eval(&team, &f)?;
        let def = Evaluator::new(&a).with_strategy(Strategy::Definitional).with_budget(o.budget).eval(&team, &f)?;
        r.push("team.satisfied", opt);
        r.check("eval", opt == def);
    }
    Ok(())
}

fn builtin(name: Option<&str>, r: &mut Report) -> Result<()> {
    let names: Vec<&str> = match name {
        Some(n) => vec![n],
        None => BUILTIN_NAMES.to_vec(),
    };
    for n in &names {
        let b = builtin_formula(n).map_err(|e| input::UsageError(e.to_string()))?;
        let vocab = b.vocabulary().iter().map(|(s, k)| format!("{s}/{k}")).collect::<Vec<_>>().join(",");
        match b {
            BuiltinFormula::Team { formula, vars, .. } => {
                r.push(format!("{n}.kind"), "team");
                r.push(format!("{n}.vars"), vars.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(","));
                r.push(format!("{n}.formula"), formula);
            }
            BuiltinFormula::Relational { query, .. } => {
                r.push(format!("{n}.kind"), "relational");
                let rels = query.free_relations.iter().map(|(s, k)| format!("{s}/{k}")).collect::<Vec<_>>().join(",");
                r.push(format!("{n}.relations"), rels);
                let prefix: String = query.second_order.iter().map(|(s, k)| format!("ER {s}/{k}. ")).collect();
                r.push(format!("{n}.formula"), format!("{prefix}{}", query.body));
            }
        }
        r.push(format!("{n}.vocabulary"), vocab);
    }
    if name.is_some() {
        r.result("name", names[0]);
    } else {
        r.result("names", names.join(","));
    }
    Ok(())
}
