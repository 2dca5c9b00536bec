use proptest::prelude::*;
use rcim_core::aig::{Aig, BitMatrix, Lit};
use rcim_core::npn::NpnLibrary;
use rcim_core::transforms::{apply_recipe, apply_transform, enumerate_recipes, TransformId};

fn graph_strategy() -> impl Strategy<Value = Aig> {
    (
        2usize..=7,
        prop::collection::vec((any::<u16>(), any::<u16>(), any::<bool>(), any::<bool>()), 1..60),
        1usize..4,
    )
        .prop_map(|(ni, ops, no)| {
            let mut g = Aig::new();
            let mut pool: Vec<Lit> = (0..ni).map(|_| g.add_input(None)).collect();
            for (x, y, cx, cy) in ops {
                let a = pool[x as usize % pool.len()].xor(cx);
                let b = pool[y as usize % pool.len()].xor(cy);
                let l = g.and(a, b);
                pool.push(l);
            }
            for k in 0..no {
                let l = pool[pool.len() - 1 - k % pool.len()];
                g.add_output(l, None);
            }
            g
        })
}

fn same_function(a: &Aig, b: &Aig) -> bool {
    let m = BitMatrix::exhaustive(a.num_inputs());
    a.simulate(&m).unwrap() == b.simulate(&m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn each_transform_preserves_function(g in graph_strategy()) {
        let lib = NpnLibrary::builtin();
        for t in TransformId::ALL {
            let h = apply_transform(&g, t, &lib);
            prop_assert!(same_function(&g, &h), "{:?}", t);
            prop_assert!(h.check().is_ok());
            if t != TransformId::Balance {
                prop_assert!(h.num_ands() <= g.live_and_count(), "{:?} grew", t);
            } else {
                prop_assert!(h.depth() <= g.depth());
            }
        }
    }

    #[test]
    fn recipes_preserve_function(g in graph_strategy(), pick in 0usize..64) {
        let lib = NpnLibrary::builtin();
        let space = enumerate_recipes(&TransformId::ALL).unwrap();
        let recipes = space.recipes();
        let r = &recipes[pick % recipes.len()];
        let h = apply_recipe(&g, r, &lib);
        prop_assert!(same_function(&g, &h));
    }
}
