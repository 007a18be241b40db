use std::collections::BTreeSet;

use probact::action::{check_compatibility, check_consistency};
use probact::fixtures::{self, load_fixture, FIXTURE_NAMES};
use probact::io::{export_dot, DotOptions, Model};
use probact::projection::qual_screens_effects;
use probact::{
    bind, d_separated, enumerate_marginal, joint_probability, marginal, project_modified, project_original,
    project_sequence, Assignment, BeliefNetwork, Error,
};

fn names(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn arc_set(bn: &BeliefNetwork) -> BTreeSet<(String, String)> {
    bn.arcs().clone()
}

#[test]
fn every_fixture_loads() {
    for name in FIXTURE_NAMES {
        load_fixture(name).unwrap();
    }
    assert!(matches!(load_fixture("figure9"), Err(Error::UnknownFixture(_))));
}

#[test]
fn world_state_structure() {
    let bn = fixtures::figure1_state();
    assert!(bn.validate().is_empty());
    assert_eq!(bn.len(), 8);
    let expected: BTreeSet<(String, String)> = [
        ("object_size", "object_weight"),
        ("light_sensor", "alarm"),
        ("sound_sensor", "alarm"),
        ("motion_sensor", "alarm"),
        ("alarm", "guard"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(arc_set(&bn), expected);
    assert_eq!(bn.distinction("object_location").unwrap().domain, ["shelf", "floor", "bay"]);
}

#[test]
fn environment_partition() {
    let env = fixtures::environment();
    let free: BTreeSet<String> = env.cbn().free_names().into_iter().map(str::to_string).collect();
    let bound: BTreeSet<String> = env.cbn().bound_names().into_iter().map(str::to_string).collect();
    assert_eq!(free, names(&["object_location", "light_sensor", "sound_sensor", "motion_sensor"]));
    assert_eq!(bound, names(&["object_size", "object_weight", "alarm", "guard"]));
}

#[test]
fn pickup_sets() {
    let a = fixtures::pickup();
    assert!(a
        .qual()
        .is_superset(&names(&["object_location", "object_size", "object_weight", "sound_sensor", "motion_sensor"])));
    assert!(!a.qual().contains("light_sensor"));
    assert_eq!(a.eff(), names(&["object_location", "sound_sensor", "motion_sensor"]));
    assert!(check_compatibility(&a, &fixtures::environment()).unwrap().compatible);
    assert!(check_compatibility(&fixtures::silent_move(), &fixtures::environment()).unwrap().compatible);
}

#[test]
fn world_state_is_the_bound_environment() {
    let bn = fixtures::figure1_state();
    let env = fixtures::environment();
    let roots = BeliefNetwork::new(
        env.cbn().free().cloned().collect::<Vec<_>>(),
        Vec::<(String, String)>::new(),
        env.cbn()
            .free_names()
            .into_iter()
            .map(|n| bn.cpt(n).unwrap().clone())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert_eq!(bind(env.cbn(), &roots).unwrap(), bn);
    assert!(check_consistency(&bn, &env, 1e-12).unwrap().consistent);
}

// Exact values from an independent rational-arithmetic enumeration.
#[test]
fn frozen_world_state_values() {
    let bn = fixtures::figure1_state();
    let first = Assignment::from_pairs(bn.distinctions().map(|d| (d.name.clone(), d.domain[0].clone())));
    let p = joint_probability(&bn, &first).unwrap();
    assert!((p - 35886375.0 / 134217728.0).abs() < 1e-15);

    let expect = [203971.0 / 262144.0, 58173.0 / 262144.0];
    for dist in [
        marginal(&bn, &["guard"], &Assignment::new()).unwrap(),
        enumerate_marginal(&bn, &["guard"], &Assignment::new()).unwrap(),
    ] {
        for (got, want) in dist.probabilities.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn frozen_pickup_marginals() {
    let pr = project_original(&fixtures::figure1_state(), &fixtures::pickup()).unwrap();
    let expected: [(&str, &[f64]); 5] = [
        ("object_location@1", &[0.195556640625, 0.22100830078125, 0.58343505859375]),
        ("sound_sensor@1", &[0.6894094944000244, 0.3105905055999756]),
        ("motion_sensor@1", &[0.5932769775390625, 0.4067230224609375]),
        ("alarm@1", &[0.4753101340320427, 0.5246898659679573]),
        ("guard@1", &[0.5767757171470294, 0.42322428285297065]),
    ];
    for (node, want) in expected {
        let got = marginal(pr.combined(), &[node], &Assignment::new()).unwrap();
        for (g, w) in got.probabilities.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{node}: {g} vs {w}");
        }
    }
}

#[test]
fn sensors_are_independent_until_the_alarm_is_observed() {
    let bn = fixtures::figure1_state();
    assert!(d_separated(&bn, &["light_sensor"], &["sound_sensor"], &[] as &[&str]).unwrap());
    assert!(!d_separated(&bn, &["light_sensor"], &["sound_sensor"], &["guard"]).unwrap());
    assert!(d_separated(&bn, &["object_size"], &["guard"], &[] as &[&str]).unwrap());
}

#[test]
fn projections_agree_on_the_pickup_case() {
    let state = fixtures::figure1_state();
    let a = project_original(&state, &fixtures::pickup()).unwrap();
    let b = project_modified(&state, &fixtures::pickup(), &fixtures::environment()).unwrap();
    assert_eq!(a.combined(), b.combined());
    assert_eq!(a.persisted(), names(&["light_sensor", "object_size", "object_weight"]));
    assert!(qual_screens_effects(&a, 0).unwrap());
}

#[test]
fn silent_move_leaves_sensors_alone() {
    let pr = project_sequence(
        &fixtures::figure1_state(),
        &[fixtures::pickup(), fixtures::silent_move()],
        &fixtures::environment(),
    )
    .unwrap();
    assert_eq!(pr.latest_slice(), 2);
    let at2: BTreeSet<String> = pr
        .combined()
        .names()
        .filter(|n| n.ends_with("@2"))
        .map(str::to_string)
        .collect();
    assert_eq!(at2, names(&["object_location@2"]));
    assert_eq!(pr.latest_name("alarm").unwrap(), "alarm@1");
}

#[test]
fn dot_export_of_fixtures() {
    let dot = export_dot(&Model::Network(fixtures::figure1_state()), &DotOptions::default());
    assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 8);
    assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 5);

    let pr = project_original(&fixtures::figure1_state(), &fixtures::pickup()).unwrap();
    let dot = export_dot(&Model::Network(pr.combined().clone()), &DotOptions::default());
    let cluster: Vec<&str> = dot
        .split("subgraph \"cluster_slice_1\"")
        .nth(1)
        .expect("slice-1 cluster")
        .split("  }")
        .next()
        .unwrap()
        .lines()
        .filter(|l| l.contains("[label="))
        .collect();
    assert_eq!(cluster.len(), 5);
    assert!(cluster.iter().all(|l| l.contains("@1\"")));
    assert_eq!(dot, export_dot(&Model::Network(pr.combined().clone()), &DotOptions::default()));
}
