use hisa_core::niah::{generate_niah, needle_recall};
use hisa_core::synth::random_inputs;
use hisa_core::{
    build_block_summaries, candidate_union, dsa_select, hisa_select, score_blocks, select_blocks, HisaConfig,
    IndexerInputs, NoCount, Strategy,
};
use proptest::prelude::*;

fn doubled_gates(inputs: &IndexerInputs) -> IndexerInputs {
    IndexerInputs::new(
        inputs.num_heads(),
        inputs.dim(),
        inputs.keys_raw().to_vec(),
        inputs.queries_raw().to_vec(),
        inputs.gates_raw().iter().map(|g| g * 2.0).collect(),
        inputs.query_positions().to_vec(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selection_is_invariant_to_gate_scale(
        b in 1usize..9, m in 1usize..6, len in 1usize..120, seed in any::<u64>(),
    ) {
        let cfg = HisaConfig::new(b, m, (m * b).min(7), 2, 4).unwrap();
        let inputs = random_inputs(len, 2, 4, &[len - 1, len / 2], seed);
        let scaled = doubled_gates(&inputs);
        let (c1, c2) = (build_block_summaries(&inputs, b).unwrap(), build_block_summaries(&scaled, b).unwrap());
        for s in Strategy::ALL {
            for row in 0..2 {
                let a = s.select(&inputs, &c1, &cfg, row, &mut NoCount).unwrap();
                let z = s.select(&scaled, &c2, &cfg, row, &mut NoCount).unwrap();
                prop_assert_eq!(a.token_indices, z.token_indices);
            }
        }
    }

    #[test]
    fn tokens_within_pool_within_prefix(
        b in 1usize..9, m in 1usize..6, len in 1usize..200, seed in any::<u64>(), force in any::<bool>(),
    ) {
        let k = (m * b).min(5);
        let cfg = HisaConfig::builder(b, m, k).heads(1).dim(3).force_first_last(force).build().unwrap();
        let positions = [len - 1, len / 3];
        let inputs = random_inputs(len, 1, 3, &positions, seed);
        let cache = build_block_summaries(&inputs, b).unwrap();
        for (row, &t) in positions.iter().enumerate() {
            let sel = hisa_select(&inputs, &cache, &cfg, row, &mut NoCount).unwrap();
            let pool = candidate_union(&sel.selected_blocks, b, t, len);
            prop_assert!(sel.token_indices.iter().all(|s| pool.contains(s)));
            prop_assert!(pool.iter().all(|&s| s <= t));
            prop_assert_eq!(sel.len(), k.min(pool.len()));
        }
    }

    #[test]
    fn candidate_pool_grows_with_block_budget(len in 1usize..300, seed in any::<u64>()) {
        let b = 8;
        let inputs = random_inputs(len, 2, 4, &[len - 1], seed);
        let cache = build_block_summaries(&inputs, b).unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for m in 1..=len.div_ceil(b) + 1 {
            let cfg = HisaConfig::new(b, m, 4.min(m * b), 2, 4).unwrap();
            let scores = score_blocks(&inputs, &cache, &cfg, 0, &mut NoCount).unwrap();
            let blocks = select_blocks(&scores, &cfg, &mut NoCount).unwrap();
            prop_assert!(prev.iter().all(|p| blocks.contains(p)));
            prev = blocks;
        }
        prop_assert_eq!(prev.len(), len.div_ceil(b));
    }
}

#[test]
fn needle_recall_is_monotone_in_block_budget() {
    let base = HisaConfig::new(64, 1, 64, 4, 16).unwrap();
    for seed in 0..10 {
        for depth in [0.1, 0.5, 0.9] {
            let inst = generate_niah(4096, depth, seed, &base);
            let cache = build_block_summaries(&inst.inputs, 64).unwrap();
            let mut prev = 0.0;
            for m in [1, 2, 4, 8, 16, 32, 64] {
                let cfg = base.with_block_budget(m).unwrap();
                let sel = hisa_select(&inst.inputs, &cache, &cfg, 0, &mut NoCount).unwrap();
                let recall = needle_recall(&inst, &sel);
                assert!(recall >= prev, "seed {seed} depth {depth} m {m}: {recall} < {prev}");
                prev = recall;
            }
            assert_eq!(prev, 1.0);
        }
    }
}

#[test]
fn selections_are_deterministic() {
    let inputs = random_inputs(3000, 4, 16, &[2999, 1500, 10], 42);
    let again = random_inputs(3000, 4, 16, &[2999, 1500, 10], 42);
    assert_eq!(inputs, again);
    let cfg = HisaConfig::new(32, 8, 128, 4, 16).unwrap();
    let cache = build_block_summaries(&inputs, 32).unwrap();
    for row in 0..3 {
        let a = hisa_select(&inputs, &cache, &cfg, row, &mut NoCount).unwrap();
        let b = hisa_select(&again, &cache, &cfg, row, &mut NoCount).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            dsa_select(&inputs, &cfg, row, &mut NoCount).unwrap(),
            dsa_select(&again, &cfg, row, &mut NoCount).unwrap()
        );
    }
}
