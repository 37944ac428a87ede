use casper_bench::manifest::{canonical_json, config_hash};
use casper_bench::seeds::{self, Purpose};
use casper_bench::spec::{parse_list, Method};
use proptest::prelude::*;
use serde_json::{Map, Value};

fn purpose(k: u8) -> Purpose {
    [
        Purpose::Graph,
        Purpose::Weights,
        Purpose::Data,
        Purpose::Method,
    ][k as usize % 4]
}

proptest! {
    #[test]
    fn distinct_keys_never_share_a_seed(
        base in any::<u64>(),
        a in (0u8..4, 0usize..1 << 20, 0u64..4, 0u64..1 << 16),
        b in (0u8..4, 0usize..1 << 20, 0u64..4, 0u64..1 << 16),
    ) {
        let sa = seeds::derive(base, purpose(a.0), a.1, a.2, a.3);
        let sb = seeds::derive(base, purpose(b.0), b.1, b.2, b.3);
        prop_assert_eq!(sa == sb, (purpose(a.0), a.1, a.2, a.3) == (purpose(b.0), b.1, b.2, b.3));
    }

    #[test]
    fn method_seeds_separate_sweep_axes(base in any::<u64>(), trial in 0usize..1000, di in 0usize..8, ni in 0usize..8) {
        let here = seeds::method(base, trial, Method::Casper, di, ni);
        prop_assert_ne!(here, seeds::method(base, trial, Method::Casper, di, ni + 1));
        prop_assert_ne!(here, seeds::method(base, trial, Method::Casper, di + 1, ni));
        prop_assert_ne!(here, seeds::method(base, trial, Method::Notears, di, ni));
        prop_assert_ne!(here, seeds::method(base, trial + 1, Method::Casper, di, ni));
    }

    #[test]
    fn config_hash_ignores_key_order(entries in prop::collection::btree_map("[a-z]{1,6}", any::<i32>(), 1..12), rot in 0usize..12) {
        let pairs: Vec<(String, i32)> = entries.into_iter().collect();
        let mut rotated = pairs.clone();
        rotated.rotate_left(rot % pairs.len());
        rotated.reverse();
        let to_value = |p: &[(String, i32)]| {
            let inner: Map<String, Value> = p.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
            let mut outer = Map::new();
            outer.insert("nested".into(), Value::Object(inner.clone()));
            outer.extend(inner);
            Value::Object(outer)
        };
        let (x, y) = (to_value(&pairs), to_value(&rotated));
        prop_assert_eq!(canonical_json(&x), canonical_json(&y));
        prop_assert_eq!(config_hash(&x), config_hash(&y));
    }

    #[test]
    fn list_parsing_roundtrips(values in prop::collection::vec(-1e6f64..1e6, 1..10)) {
        let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        prop_assert_eq!(parse_list::<f64>(&text, "noise mean").unwrap(), values);
    }
}
