use std::io::Write;

use rankgame::empirics::{conditional_ecdf, load_records, spearman_rho, Feed, Genre};
use rankgame::equilibrium::{engagement_eq_homogeneous, engagement_eq_two_types, random_eq};
use rankgame::game::write_round_log;
use rankgame::metrics::{closed_form_ucq_homogeneous, estimate_all};
use rankgame::parallel::rng_from_seed;
use rankgame::{Metric, ModelConfig};

#[test]
fn config_to_metrics() {
    let inst = ModelConfig::from_json(r#"{"family": "linear", "alpha": 0.5, "gamma": 0.2, "types": [1]}"#).unwrap();
    let s = engagement_eq_homogeneous(&inst, 2).unwrap();
    let t = estimate_all(&inst, Metric::Engagement, &s, 2, 50_000, &mut rng_from_seed(1)).estimate();
    let exact = closed_form_ucq_homogeneous(0.5, 0.2, 1.0, 2).unwrap();
    assert!((t.ucq.mean - exact).abs() < 4.0 * t.ucq.stderr, "{} vs {exact}", t.ucq.mean);
    // Only the flat zero-quality stretch x in [0, alpha] leaves positive
    // utility. Each creator lands there w.p. gamma*alpha = 0.1 with x uniform,
    // and the larger x wins: E[alpha - max] = alpha / 3.
    let uw = 0.1f64.powi(2) * 0.5 / 3.0;
    assert!((t.uw.mean - uw).abs() < 4.0 * t.uw.stderr, "{} vs {uw}", t.uw.mean);
}

#[test]
fn generated_type_spaces_from_json() {
    let inst = ModelConfig::from_json(
        r#"{"family": "kmr", "W": 1, "gamma": 0, "types": {"ratio_pair": {"epsilon": 0.01, "c": 2.0}}}"#,
    )
    .unwrap();
    assert_eq!(inst.types().len(), 2);
    assert!(engagement_eq_two_types(&inst).is_ok());
    assert!(ModelConfig::from_json(r#"{"family": "kmr", "alpha": 1, "gamma": 0, "types": [1]}"#).is_err());
}

#[test]
fn describe_is_valid_json() {
    let inst = ModelConfig::from_json(r#"{"family": "linear", "alpha": -0.3, "gamma": 0, "types": [1]}"#).unwrap();
    let s = random_eq(&inst, 2).unwrap();
    let v = serde_json::to_value(s.describe()).unwrap();
    assert_eq!(v["construction"]["name"], "random");
    assert_eq!(v["components"].as_array().unwrap().len(), 1);
}

#[test]
fn round_log_csv() {
    let inst = ModelConfig::from_json(r#"{"family": "linear", "alpha": 1, "gamma": 0, "types": [1]}"#).unwrap();
    let s = engagement_eq_homogeneous(&inst, 2).unwrap();
    let mut rng = rng_from_seed(2);
    let rounds: Vec<_> = (0..5).map(|_| rankgame::game::play_round(&inst, Metric::Random, &s, 2, &mut rng)).collect();
    let mut buf = Vec::new();
    write_round_log(&mut buf, &rounds).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("round,user_type,winner,consumed,engagement,quality,user_utility\n0,1,"));
}

#[test]
fn records_from_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "feed,genre,angriness,favorites").unwrap();
    for a in 0..5u64 {
        writeln!(f, "E,P,{a},{}", a * a).unwrap();
        writeln!(f, "E,NP,{a},{}", 7 * a + 1).unwrap();
    }
    let recs = load_records(f.path()).unwrap();
    assert_eq!(recs.len(), 10);
    assert_eq!(spearman_rho(&recs, Feed::E, &[Genre::P]).unwrap().rho, 1.0);
    let e = conditional_ecdf(&recs, 4, Feed::E, &[Genre::P, Genre::NP]).unwrap();
    assert_eq!(e.len(), 2);
    assert!(conditional_ecdf(&recs, 0, Feed::C, &[Genre::P]).is_err());
}
