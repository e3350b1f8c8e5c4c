use std::path::PathBuf;

use fiscast_cli::config::ArimaPolicy;
use fiscast_cli::{Overrides, RunConfig};
use fiscast_core::estimation::ArimaOrder;
use fiscast_core::revenue_models::{OrderPolicy, Tax};

const BASE: &str = "data_path = \"d.csv\"\ntax = \"PIT\"\nseed = 1\n";

fn parse(extra: &str) -> RunConfig {
    RunConfig::from_toml(&format!("{BASE}{extra}")).unwrap()
}

#[test]
fn defaults_fill_optional_keys() {
    let c = parse("");
    assert_eq!(c.holdout_years, 3);
    assert_eq!(c.hp_lambda, 100.0);
    assert_eq!(c.significance, 0.01);
    assert_eq!(c.output_dir, PathBuf::from("out"));
    assert!(matches!(c.arima, ArimaPolicy::Auto(_)));
    c.validate().unwrap();
}

#[test]
fn unknown_key_is_a_parse_error() {
    let err = RunConfig::from_toml(&format!("{BASE}holdout = 3\n")).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    let err = RunConfig::from_toml(&format!("{BASE}[baseline]\ncolumn = \"X\"\nextra = 1\n")).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn missing_seed_is_a_parse_error() {
    let err = RunConfig::from_toml("data_path = \"d.csv\"\ntax = \"PIT\"\n").unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn out_of_range_values_are_range_errors() {
    for extra in [
        "holdout_years = 0\n",
        "holdout_years = 11\n",
        "hp_lambda = 0.0\n",
        "hp_lambda = -5.0\n",
        "significance = 0.7\n",
        "arima = { p = 5, d = 0, q = 0 }\n",
    ] {
        assert_eq!(parse(extra).validate().unwrap_err().exit_code(), 5, "{extra}");
    }
}

#[test]
fn baseline_needs_exactly_one_source() {
    let both = parse("[baseline]\ncolumn = \"MF\"\nelasticities = { WAGE = 1.0 }\n");
    assert_eq!(both.validate().unwrap_err().exit_code(), 4);
    let neither = parse("[baseline]\n");
    assert_eq!(neither.validate().unwrap_err().exit_code(), 4);
    parse("[baseline]\nelasticities = { WAGE = 1.0, SOC = 0.5 }\n").validate().unwrap();
}

#[test]
fn fixed_order_parses_into_the_model_spec() {
    let c = parse("arima = { p = 1, d = 0, q = 1 }\n");
    assert_eq!(c.model_spec().order, OrderPolicy::Fixed(ArimaOrder { p: 1, d: 0, q: 1 }));
}

#[test]
fn dzp_auto_order_becomes_white_noise() {
    let c = RunConfig::from_toml("data_path = \"d.csv\"\ntax = \"DZP\"\nseed = 1\n").unwrap();
    assert_eq!(c.tax, Tax::Dzp);
    assert_eq!(c.model_spec().order, OrderPolicy::Fixed(ArimaOrder::white_noise()));
}

#[test]
fn overrides_replace_config_values() {
    let mut c = parse("");
    c.apply(&Overrides {
        seed: Some(9),
        hp_lambda: Some(6.25),
        holdout_years: Some(2),
        output_dir: Some(PathBuf::from("elsewhere")),
    });
    assert_eq!((c.seed, c.hp_lambda, c.holdout_years), (9, 6.25, 2));
    assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
}

#[test]
fn fingerprint_ignores_output_dir_only() {
    let a = parse("");
    let mut b = a.clone();
    b.output_dir = PathBuf::from("other");
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.fingerprint().len(), 64);
    let mut c = a.clone();
    c.seed = 2;
    assert_ne!(a.fingerprint(), c.fingerprint());
}
