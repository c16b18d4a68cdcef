mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use teamcount::cnf::{parse_dimacs, QbFormula};
use teamcount::count::{count_assignments, CountError, CountMode};
use teamcount::eval::Evaluator;
use teamcount::formula::{AtomKind, Var};
use teamcount::reduce::{
    dep_to_sigma1cnf_neg, incl_to_sigma1_dualhorn, star_probe, star_turing_reduction, ReduceError, SearchOracle,
};
use teamcount::structure::Team;

fn models(f: &QbFormula) -> Vec<Vec<bool>> {
    (0u64..1 << f.num_vars())
        .map(|m| (0..f.num_vars()).map(|i| m >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|a| f.satisfied_by(a))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn grounding_models_decode_to_satisfying_teams(seed: u64, inclusion: bool) {
        let mut r = rng(seed);
        let kind = if inclusion { AtomKind::Inclusion } else { AtomKind::Dependence };
        let n = r.gen_range(1..=2);
        let free: Vec<Var> = vec![v("x1")];
        let a = random_structure(&mut r, n, &[("R", 1), ("S", 2)], 0.5);
        let (k, l) = (r.gen_range(0..=1), r.gen_range(0..=1));
        let (f, d) = random_normal_form(&mut r, kind, &free, k, l);
        let g = if inclusion { incl_to_sigma1_dualhorn(&a, &d) } else { dep_to_sigma1cnf_neg(&a, &d) }.unwrap();
        prop_assume!(g.formula.num_vars() <= 14);
        prop_assert_eq!(parse_dimacs(&g.to_dimacs()).unwrap(), g.formula.clone());
        let ev = Evaluator::new(&a);
        for m in models(&g.formula) {
            let team = Team::from_rows(free.clone(), g.decode_team(&m)).unwrap();
            prop_assert!(ev.eval(&team, &f).unwrap(), "model decodes to a failing team");
        }
    }

    #[test]
    fn star_reduction_matches_projection(seed: u64) {
        let mut r = rng(seed);
        let vars = r.gen_range(1..=10);
        let f = CnfGen { vars, clauses: r.gen_range(0..=10), width: 3, bound: r.gen_range(0..=vars), negative_free: true, dual_horn: false }
            .generate(&mut r);
        let got = star_turing_reduction(&f, &mut SearchOracle).unwrap();
        prop_assert_eq!(u64::try_from(got.count).unwrap(), brute_projected(&f, false));
        let probe = star_probe(&f).unwrap();
        prop_assert!(probe.free_vars().len() == 2 && probe.classify().cnf_neg);
    }
}

#[test]
fn lying_oracle_is_caught() {
    let f = QbFormula::from_ints(2, &[&[-1, 2]], &[2]);
    let mut liar = |_: &QbFormula| -> Result<teamcount::Count, CountError> { Ok(5u32.into()) };
    assert!(matches!(star_turing_reduction(&f, &mut liar), Err(ReduceError::OracleFault(_))));
    let honest = |g: &QbFormula| -> Result<teamcount::Count, CountError> { Ok(count_assignments(g, CountMode::Star).count) };
    let mut honest = honest;
    assert_eq!(star_turing_reduction(&f, &mut honest).unwrap().count, 2u32.into());
}
