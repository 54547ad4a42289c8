use hilbert_cli::config::{parse_config, serialize_config, ConfigError, RunConfig, TestFunctionSpec};
use proptest::prelude::*;

fn sample(text: &str) -> RunConfig {
    parse_config(text).unwrap()
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let c = parse_config(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }
}

#[test]
fn minimal_config_defaults() {
    let c = sample("[domain]\nkind = \"ball\"\ndim = 2\n\n[group]\nbuiltin = \"triangle-2-3-7\"\n");
    assert_eq!(c.seed, 0);
    assert_eq!(c.measure.radius, 12.0);
    assert!(c.out.is_none());
}

#[test]
fn unknown_keys_are_rejected_everywhere() {
    for (text, key) in [
        ("delta_override_typo = 1\n", "delta_override_typo"),
        ("[measure]\nradious = 3.0\n", "radious"),
        ("[mixing.phi]\nkind = \"ball\"\nradius = 0.1\nwidth = 2\n", "width"),
        ("[[equidistribution.caps]]\nname = \"n\"\na = { axis = [1.0, 0.0], angle = 1.0, tilt = 0 }\nb = { axis = [1.0, 0.0], angle = 1.0 }\n", "tilt"),
    ] {
        match parse_config(text) {
            Err(ConfigError::UnknownKey { key: k, .. }) => assert_eq!(k, key),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(parse_config("[nonsense]\n"), Err(ConfigError::UnknownKey { .. })));
}

#[test]
fn semantic_errors_name_the_key() {
    for (text, key) in [
        ("[group]\nbuiltin = \"nope\"\n", "group.builtin"),
        ("[group]\nfree = true\n", "group"),
        ("[points]\nx = [0.1]\n", "points.x"),
        ("[domain]\nkind = \"pnorm\"\n", "domain.p"),
        ("[orbit_counting]\nstep = 0.0\n", "orbit_counting.step"),
        ("[mixing]\nt_grid = [2.0, 1.0]\n", "mixing.t_grid"),
        ("[geodesic_counting]\nratio_band = [1.3, 0.7]\n", "geodesic_counting.ratio_band"),
        ("[domain]\nkind = \"ellipsoid\"\nform = [[1.0, 0.0], [0.0, -1.0]]\n", "domain"),
    ] {
        match parse_config(text) {
            Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn syntax_errors_carry_lines() {
    match parse_config("seed = 3\n[measure]\nradius = = 2\n") {
        Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    match parse_config("seed = \"zero\"\n") {
        Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![0.001f64..100.0, 1e-9f64..1e-3, Just(0.1), Just(1.0 / 3.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(
        seed in 0u64..(i64::MAX as u64),
        radius in finite(),
        offset in finite(),
        x in proptest::collection::vec(-0.5f64..0.5, 2),
        t_max in finite(),
        l_max in 1.0f64..20.0,
        band in (0.1f64..0.9, 1.1f64..3.0),
        phi in finite(),
        constant in proptest::option::of(-5.0f64..5.0),
        exponent in proptest::option::of(finite()),
        out in proptest::option::of("[a-z]{1,8}(/[a-z]{1,8})?"),
        builtin in prop_oneof![Just(None), Just(Some("schottky")), Just(Some("punctured-torus"))],
    ) {
        let mut c = parse_config("").unwrap();
        c.seed = seed;
        c.measure.radius = radius;
        c.measure.offset = offset;
        c.measure.exponent = exponent;
        c.points.x = Some(x);
        c.orbit_counting.t_max = t_max;
        c.geodesic_counting.l_max = l_max;
        c.geodesic_counting.ratio_band = [band.0, band.1];
        c.mixing.phi = TestFunctionSpec::Ball { radius: phi, center: None };
        if let Some(v) = constant {
            c.mixing.psi = TestFunctionSpec::Constant { value: v };
            c.geodesic_counting.test_function = Some(TestFunctionSpec::Ball { radius: phi, center: Some(vec![0.0, 0.25]) });
        }
        c.out = out.map(Into::into);
        if let Some(b) = builtin {
            c = RunConfig { group: Some(hilbert_cli::config::GroupSpec { builtin: Some(b.into()), ..Default::default() }), ..c };
        }
        let text = serialize_config(&c);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_config(&back), text);
    }
}
