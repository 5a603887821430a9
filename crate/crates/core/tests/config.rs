use proptest::collection::btree_map;
use proptest::prelude::*;
use robustness_law_lab::config::KvConfig;

fn render(entries: &std::collections::BTreeMap<String, String>) -> String {
    entries
        .iter()
        .map(|(k, v)| format!("  {k} =  {v} # trailing\n"))
        .collect()
}

proptest! {
    #[test]
    fn rendered_entries_parse_back(
        entries in btree_map("[a-z]{1,6}(\\.[a-z_]{1,6}){0,2}", "[a-zA-Z0-9_.,\\-]{0,12}", 0..12)
    ) {
        let cfg = KvConfig::parse(&render(&entries)).unwrap();
        prop_assert_eq!(cfg.keys().count(), entries.len());
        for (k, v) in &entries {
            prop_assert_eq!(cfg.raw(k), Some(v.as_str()));
        }
    }

    #[test]
    fn integer_lists_round_trip(xs in proptest::collection::vec(0u64..1_000_000, 1..20)) {
        let joined = xs.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        let cfg = KvConfig::parse(&format!("seeds = [{joined}]")).unwrap();
        prop_assert_eq!(cfg.get_list::<u64>("seeds").unwrap(), Some(xs));
    }

    #[test]
    fn floats_round_trip_through_set(x in proptest::num::f64::NORMAL) {
        let mut cfg = KvConfig::default();
        cfg.set("a.b", x);
        prop_assert_eq!(cfg.get::<f64>("a.b").unwrap(), Some(x));
    }
}

#[test]
fn error_cases_are_config_errors() {
    for text in ["a = 1\nb = 2\na = 3", "just words", "=1", "bad key = 1"] {
        assert!(KvConfig::parse(text).unwrap_err().is_config(), "{text}");
    }
    let cfg = KvConfig::parse("net.hidden = 8\nnet.depth = 2\nseed = 1").unwrap();
    assert!(cfg.ensure_known(&["net.*", "seed"]).is_ok());
    assert!(cfg.ensure_known(&["net.hidden", "seed"]).unwrap_err().is_config());
    // a prefix match must stop at a dot
    let close = KvConfig::parse("network = 1").unwrap();
    assert!(close.ensure_known(&["net.*"]).is_err());
    assert!(cfg.get_list::<usize>("net.hidden").unwrap() == Some(vec![8]));
    assert!(KvConfig::parse("xs = 1, two")
        .unwrap()
        .get_list::<u32>("xs")
        .unwrap_err()
        .is_config());
}

#[test]
fn section_strips_prefix() {
    let cfg = KvConfig::parse("dist.kind = cube\ndist.d = 5\ndistance = 3").unwrap();
    let s = cfg.section("dist");
    assert_eq!(s.keys().collect::<Vec<_>>(), vec!["d", "kind"]);
    assert_eq!(s.get::<usize>("d").unwrap(), Some(5));
}
