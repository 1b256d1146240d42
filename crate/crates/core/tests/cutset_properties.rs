mod common;

use proptest::prelude::*;
use rand::Rng;
use resha_core::cutsets::{brute_force_oracle, minimal_cut_sets};
use resha_core::ftree::FaultTree;

fn is_subset(a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn failed_vector(ft: &FaultTree, ids: &[String]) -> Vec<bool> {
    let mut v = vec![false; ft.len()];
    for id in ids {
        v[ft.find(id).unwrap().0] = true;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn bottom_up_expansion_matches_truth_table(seed in any::<u64>()) {
        let ft = common::random_tree(&mut common::rng(seed), 16);
        let fast = minimal_cut_sets(&ft, None).unwrap();
        let oracle = brute_force_oracle(&ft).unwrap();
        prop_assert_eq!(fast.id_sets(), oracle.id_sets());
        prop_assert_eq!(fast.order_index, oracle.order_index);
    }

    #[test]
    fn cut_sets_are_sufficient_and_minimal(seed in any::<u64>()) {
        let ft = common::random_tree(&mut common::rng(seed), 12);
        let sets = minimal_cut_sets(&ft, None).unwrap().id_sets();
        for (i, s) in sets.iter().enumerate() {
            prop_assert!(ft.evaluate(&failed_vector(&ft, s)), "{:?} does not fail the top", s);
            for drop in 0..s.len() {
                let mut smaller = s.clone();
                smaller.remove(drop);
                prop_assert!(!ft.evaluate(&failed_vector(&ft, &smaller)), "{:?} is not minimal", s);
            }
            for (j, t) in sets.iter().enumerate() {
                prop_assert!(i == j || !is_subset(t, s), "{:?} absorbs {:?}", t, s);
            }
        }
    }

    #[test]
    fn truncation_keeps_exactly_the_low_orders(seed in any::<u64>(), k in 1usize..4) {
        let ft = common::random_tree(&mut common::rng(seed), 14);
        let full = minimal_cut_sets(&ft, None).unwrap();
        let cut = minimal_cut_sets(&ft, Some(k)).unwrap();
        let expected: Vec<Vec<String>> = full.id_sets().into_iter().filter(|s| s.len() <= k).collect();
        prop_assert_eq!(cut.id_sets(), expected);
        prop_assert_eq!(cut.truncation_order, Some(k));
    }

    #[test]
    fn output_order_is_by_order_then_category_and_id(seed in any::<u64>()) {
        let ft = common::random_tree(&mut common::rng(seed), 16);
        let c = minimal_cut_sets(&ft, None).unwrap();
        for s in &c.sets {
            let mut sorted = s.members.clone();
            sorted.sort_by(|a, b| (a.category, &a.id).cmp(&(b.category, &b.id)));
            prop_assert_eq!(&sorted, &s.members);
        }
        for w in c.sets.windows(2) {
            let a: Vec<_> = w[0].members.iter().map(|m| (m.category, m.id.clone())).collect();
            let b: Vec<_> = w[1].members.iter().map(|m| (m.category, m.id.clone())).collect();
            prop_assert!((a.len(), &a) < (b.len(), &b));
        }
    }
}

#[test]
fn failing_more_events_never_repairs_the_top() {
    let mut rng = common::rng(7);
    for t in 0..20 {
        let ft = common::random_tree(&mut rng, 16);
        let events = ft.basic_events();
        let mut violations = 0;
        for _ in 0..1000 {
            let mut state = vec![false; ft.len()];
            for e in &events {
                state[e.0] = rng.gen_bool(0.3);
            }
            let before = ft.evaluate(&state);
            let e = events[rng.gen_range(0..events.len())];
            state[e.0] = true;
            if before && !ft.evaluate(&state) {
                violations += 1;
            }
        }
        assert_eq!(violations, 0, "tree {t}");
    }
}
