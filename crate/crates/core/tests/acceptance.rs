//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use probact::action::{check_consistency, effect_name};
use probact::fixtures::{self, FIXTURE_NAMES};
use probact::generate::{self, GenConfig};
use probact::inference::{enumerate_marginal, forward_sample_indices, joint_probability};
use probact::io::{parse_model, serialize_model, Model};
use probact::projection::{project_modified_with, ProjectionOptions, ProjectionResult};
use probact::{
    bind, extract_successor, marginal, project_modified, project_original, project_sequence, remove_node,
    reverse_arc, Assignment, BeliefNetwork, ConditionalBeliefNet, Cpt, Distinction, Error,
};

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn binary_network(rng: &mut ChaCha8Rng, max_nodes: usize) -> BeliefNetwork {
    let nodes = rng.random_range(1..=max_nodes);
    generate::random_network(
        rng,
        &GenConfig {
            nodes,
            max_card: 2,
            ..GenConfig::default()
        },
    )
}

/// Every total assignment of `bn`, as value indices in name order.
fn all_assignments(bn: &BeliefNetwork) -> Vec<Assignment> {
    let ds: Vec<&Distinction> = bn.distinctions().collect();
    let total: usize = ds.iter().map(|d| d.card()).product();
    (0..total)
        .map(|mut code| {
            let mut a = Assignment::new();
            for d in ds.iter().rev() {
                a.set(d.name.clone(), d.domain[code % d.card()].clone());
                code /= d.card();
            }
            a
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut queries = 0;
    for i in 0..200 {
        let bn = binary_network(&mut rng, 12);
        let names: Vec<String> = bn.names().map(str::to_string).collect();
        let mut shuffled = names.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let n_targets = rng.random_range(1..=names.len().min(3));
        let targets = &shuffled[..n_targets];
        let n_evidence = rng.random_range(0..=(names.len() - n_targets).min(3));
        let mut evidence = Assignment::new();
        for e in &shuffled[n_targets..n_targets + n_evidence] {
            evidence.set(e.clone(), format!("v{}", rng.random_range(0..2)));
        }
        let ve = marginal(&bn, targets, &evidence);
        let oracle = enumerate_marginal(&bn, targets, &evidence);
        match (ve, oracle) {
            (Ok(a), Ok(b)) => {
                ensure(a.scope == b.scope, || format!("network {i}: scope order differs"))?;
                let diff = a.max_abs_diff(&b).ok_or_else(|| format!("network {i}: shapes differ"))?;
                worst = worst.max(diff);
                ensure(diff <= TOL, || format!("network {i}: deviation {diff:e}"))?;
            }
            (Err(Error::ZeroProbabilityEvidence), Err(Error::ZeroProbabilityEvidence)) => {}
            (a, b) => return Err(format!("network {i}: VE {a:?} vs oracle {b:?}")),
        }
        queries += 1;
    }
    Ok(format!("{queries} queries, max deviation {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut reversals = 0;
    let mut removals = 0;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let bn = binary_network(&mut rng, 10);
        let joints: Vec<(Assignment, f64)> = all_assignments(&bn)
            .into_iter()
            .map(|a| {
                let p = joint_probability(&bn, &a).unwrap();
                (a, p)
            })
            .collect();

        for (u, v) in bn.arcs().iter().cloned().collect::<Vec<_>>() {
            match reverse_arc(&bn, &u, &v) {
                Ok(r) => {
                    ensure(r.validate().is_valid(), || format!("network {i}: {u}->{v} reversal invalid"))?;
                    for (a, p) in &joints {
                        let q = joint_probability(&r, a).map_err(|e| e.to_string())?;
                        worst = worst.max((p - q).abs());
                        ensure((p - q).abs() <= TOL, || {
                            format!("network {i}: reversing {u}->{v} moved a joint by {:e}", (p - q).abs())
                        })?;
                    }
                    reversals += 1;
                }
                Err(Error::ReversalCreatesCycle(..)) => {
                    // Must really have another directed path.
                    let other = bn
                        .children(&u)
                        .into_iter()
                        .filter(|c| *c != v)
                        .any(|c| probact::descendants(&bn, c).unwrap().contains(&v));
                    ensure(other, || format!("network {i}: {u}->{v} wrongly refused"))?;
                }
                Err(e) => return Err(format!("network {i}: {e}")),
            }
        }

        for d in bn.names().map(str::to_string).collect::<Vec<_>>() {
            let r = remove_node(&bn, &d).map_err(|e| e.to_string())?;
            ensure(r.validate().is_valid(), || format!("network {i}: removing {d} left an invalid net"))?;
            // Surviving joint = original joint summed over the removed node.
            for a in all_assignments(&r) {
                let expect: f64 = bn
                    .distinction(&d)
                    .unwrap()
                    .domain
                    .iter()
                    .map(|val| {
                        let mut full = a.clone();
                        full.set(d.clone(), val.clone());
                        joint_probability(&bn, &full).unwrap()
                    })
                    .sum();
                let got = joint_probability(&r, &a).unwrap();
                worst = worst.max((expect - got).abs());
                ensure((expect - got).abs() <= TOL, || {
                    format!("network {i}: removing {d} moved a marginal by {:e}", (expect - got).abs())
                })?;
            }
            removals += 1;
        }
    }
    Ok(format!(
        "{reversals} reversals, {removals} removals, max deviation {worst:.2e}"
    ))
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn parents_of(bn: &BeliefNetwork, node: &str) -> BTreeSet<String> {
    bn.parents(node).unwrap().iter().cloned().collect()
}

fn criterion_3() -> Outcome {
    let pr = project_original(&fixtures::figure1_state(), &fixtures::pickup()).map_err(|e| e.to_string())?;
    let direct = pr.direct_effects();
    ensure(direct == set(&["object_location", "sound_sensor", "motion_sensor"]), || {
        format!("direct effects {direct:?}")
    })?;
    let indirect = pr.indirect_effects();
    ensure(indirect == set(&["alarm", "guard"]), || format!("indirect effects {indirect:?}"))?;
    let alarm = parents_of(pr.combined(), "alarm@1");
    ensure(alarm == set(&["sound_sensor@1", "motion_sensor@1", "light_sensor@0"]), || {
        format!("alarm@1 parents {alarm:?}")
    })?;
    ensure(pr.persisted().contains("light_sensor"), || "light sensor not persisted".into())?;
    ensure(!pr.combined().contains("light_sensor@1"), || "light sensor was copied".into())?;
    ensure(parents_of(pr.combined(), "guard@1") == set(&["alarm@1"]), || "guard@1 parents".into())?;
    Ok("F = {location, sound, motion}, K = {alarm, guard}, alarm@1 <- light_sensor@0".into())
}

fn structure(pr: &ProjectionResult) -> (BTreeSet<String>, BTreeSet<(String, String)>) {
    (
        pr.combined().names().map(str::to_string).collect(),
        pr.combined().arcs().clone(),
    )
}

fn criterion_4() -> Outcome {
    let state = fixtures::figure1_state();
    let env = fixtures::environment();
    let original = project_original(&state, &fixtures::pickup()).map_err(|e| e.to_string())?;
    let modified = project_modified(&state, &fixtures::pickup(), &env).map_err(|e| e.to_string())?;
    ensure(structure(&original) == structure(&modified), || {
        "original and modified combined structures differ".into()
    })?;
    ensure(original.combined() == modified.combined(), || "combined tables differ".into())?;

    let seq = project_sequence(&state, &[fixtures::pickup(), fixtures::silent_move()], &env)
        .map_err(|e| e.to_string())?;
    for base in ["sound_sensor", "motion_sensor", "alarm", "guard"] {
        ensure(!seq.combined().contains(&format!("{base}@2")), || format!("{base}@2 exists"))?;
        ensure(seq.latest_name(base).unwrap() == format!("{base}@1"), || format!("{base} not from slice 1"))?;
    }
    ensure(seq.combined().contains("object_location@2"), || "no location@2".into())?;
    ensure(seq.steps()[1].indirect_effects.is_empty(), || "silent move had indirect effects".into())?;

    // On the extracted successor, location now has sensor descendants, so the
    // state-based variant would copy them; the environment-based one does not.
    let successor = extract_successor(&modified).map_err(|e| e.to_string())?;
    let diverged = project_original(&successor, &fixtures::silent_move()).map_err(|e| e.to_string())?;
    let k = diverged.indirect_effects();
    ensure(k.is_superset(&set(&["sound_sensor", "motion_sensor", "alarm", "guard"])), || {
        format!("state-based K after pickup {k:?}")
    })?;
    Ok(format!("structures equal; silent_move: state-based K = {k:?}, environment-based K = {{}}"))
}

/// Largest deviation between the successor and the combined network's latest
/// slice: every single-node marginal, and the full joint when small.
fn extraction_deviation(pr: &ProjectionResult) -> Result<f64, String> {
    let succ = extract_successor(pr).map_err(|e| e.to_string())?;
    let bases: Vec<String> = pr.bases().into_iter().collect();
    let latest: Vec<String> = bases.iter().map(|b| pr.latest_name(b).unwrap()).collect();
    ensure(succ.names().map(str::to_string).collect::<Vec<_>>() == bases, || {
        "successor names differ from the ontology".into()
    })?;
    let none = Assignment::new();
    let mut worst: f64 = 0.0;
    for (b, l) in bases.iter().zip(&latest) {
        let a = marginal(&succ, &[b], &none).map_err(|e| e.to_string())?;
        let c = marginal(pr.combined(), &[l], &none).map_err(|e| e.to_string())?;
        for (x, y) in a.probabilities.iter().zip(&c.probabilities) {
            worst = worst.max((x - y).abs());
        }
    }
    let states: usize = succ.distinctions().map(Distinction::card).product();
    if states <= 4096 {
        let a = marginal(&succ, &bases, &none).map_err(|e| e.to_string())?;
        let c = marginal(pr.combined(), &latest, &none).map_err(|e| e.to_string())?;
        for (x, y) in a.probabilities.iter().zip(&c.probabilities) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// (environment, prior, compatible action) triples for the consistency suite.
fn random_triples() -> Vec<(probact::EnvironmentModel, BeliefNetwork, probact::ActionModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    (0..100)
        .map(|i| {
            let cfg = GenConfig {
                nodes: rng.random_range(2..=10),
                max_card: 3,
                arc_prob: 0.3,
                free_prob: 0.4,
            };
            let env = generate::random_environment(&mut rng, &cfg);
            let prior = generate::random_prior(&mut rng, &env, 0.3);
            let action = generate::random_compatible_action(&mut rng, &env, &format!("act{i}"), 0.4).unwrap();
            (env, prior, action)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    for (i, (env, prior, action)) in random_triples().iter().enumerate() {
        let state = bind(env.cbn(), prior).map_err(|e| e.to_string())?;
        let before = check_consistency(&state, env, 1e-6).map_err(|e| e.to_string())?;
        ensure(before.consistent, || format!("triple {i}: bound prior not consistent"))?;
        let pr = project_modified(&state, action, env).map_err(|e| format!("triple {i}: {e}"))?;
        let succ = extract_successor(&pr).map_err(|e| format!("triple {i}: {e}"))?;
        let report = check_consistency(&succ, env, 1e-6).map_err(|e| e.to_string())?;
        if let Some(w) = report.worst() {
            worst = worst.max(w.max_deviation);
        }
        if report.consistent {
            passed += 1;
        }
    }
    ensure(passed == 100, || format!("{passed}/100 successors consistent"))?;
    Ok(format!("100/100 successors consistent, max deviation {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let state = fixtures::figure1_state();
    let env = fixtures::environment();
    let mut cases = vec![
        ("original pickup", project_original(&state, &fixtures::pickup())),
        ("modified pickup", project_modified(&state, &fixtures::pickup(), &env)),
        (
            "pickup then silent_move",
            project_sequence(&state, &[fixtures::pickup(), fixtures::silent_move()], &env),
        ),
    ];
    for (env, prior, action) in random_triples() {
        let st = bind(env.cbn(), &prior).unwrap();
        cases.push(("random triple", project_modified(&st, &action, &env)));
    }
    let mut worst: f64 = 0.0;
    let n = cases.len();
    for (label, pr) in cases {
        let pr = pr.map_err(|e| format!("{label}: {e}"))?;
        let dev = extraction_deviation(&pr).map_err(|e| format!("{label}: {e}"))?;
        worst = worst.max(dev);
        ensure(dev <= TOL, || format!("{label}: deviation {dev:e}"))?;
    }
    Ok(format!("{n} projections, max deviation {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    const N: usize = 100_000;
    const SEED: u64 = 20_240_601;
    let pr = project_modified(&fixtures::figure1_state(), &fixtures::pickup(), &fixtures::environment())
        .map_err(|e| e.to_string())?;
    let bn = pr.combined();
    let samples = forward_sample_indices(bn, N, SEED).map_err(|e| e.to_string())?;
    let names: Vec<&str> = bn.names().collect();
    let mut checked = 0;
    let mut worst_z: f64 = 0.0;
    let watched: BTreeSet<String> = pr.direct_effects().union(&pr.indirect_effects()).cloned().collect();
    for base in &watched {
        let node = pr.latest_name(base).unwrap();
        let col = names.iter().position(|n| *n == node).unwrap();
        let exact = marginal(bn, &[&node], &Assignment::new()).map_err(|e| e.to_string())?;
        let mut counts = vec![0usize; exact.probabilities.len()];
        for row in &samples {
            counts[row[col]] += 1;
        }
        for (v, (&c, &p)) in counts.iter().zip(&exact.probabilities).enumerate() {
            let se = (p * (1.0 - p) / N as f64).sqrt();
            let dev = (c as f64 / N as f64 - p).abs();
            let z = if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
            ensure(z <= 3.0, || format!("{node} value {v}: {z:.2} standard errors off"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} values over {} nodes, worst {worst_z:.2} standard errors", watched.len()))
}

fn alarm_action() -> probact::ActionModel {
    let d = Distinction::new(effect_name("alarm"), ["off", "on"]);
    let cbn = ConditionalBeliefNet::new([], [d], [], [Cpt::prior(effect_name("alarm"), vec![0.0, 1.0])]).unwrap();
    probact::ActionModel::new("trip_alarm", cbn, false).unwrap()
}

fn criterion_8() -> Outcome {
    let state = fixtures::figure1_state();
    let env = fixtures::environment();
    let action = alarm_action();
    match project_modified(&state, &action, &env) {
        Err(Error::Incompatible { bound_effects, .. }) if bound_effects == ["alarm"] => {}
        other => return Err(format!("expected rejection, got {:?}", other.map(|_| ()))),
    }
    let opts = ProjectionOptions {
        allow_incompatible: true,
        ..ProjectionOptions::default()
    };
    let pr = project_modified_with(&state, &action, &env, opts).map_err(|e| e.to_string())?;
    ensure(pr.combined().cpt("alarm@1").unwrap().rows == vec![vec![0.0, 1.0]], || {
        "override did not keep the action's table".into()
    })?;
    ensure(pr.indirect_effects() == set(&["guard"]), || "guard not an indirect effect".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let act = dir.path().join("trip_alarm.act");
    std::fs::write(&act, serialize_model(&Model::Action(action))).map_err(|e| e.to_string())?;
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_probact"))
            .arg("project")
            .arg(format!("{data}/figure1.bnw"))
            .arg(&act)
            .arg("--env")
            .arg(format!("{data}/figure3.env"))
            .args(extra)
            .output()
            .map_err(|e| e.to_string())
    };
    let refused = run(&[])?;
    ensure(refused.status.code() == Some(1), || format!("CLI exit {:?}", refused.status.code()))?;
    let accepted = run(&["--allow-incompatible"])?;
    ensure(accepted.status.code() == Some(0), || format!("override exit {:?}", accepted.status.code()))?;
    Ok("rejected (CLI exit 1), accepted with --allow-incompatible, action table kept".into())
}

fn random_models(rng: &mut ChaCha8Rng) -> Vec<Model> {
    (0..200)
        .map(|i| {
            let cfg = GenConfig {
                nodes: rng.random_range(1..=9),
                max_card: 4,
                arc_prob: 0.3,
                free_prob: 0.4,
            };
            match i % 4 {
                0 => Model::Network(generate::random_network(rng, &cfg)),
                1 => Model::Environment(generate::random_environment(rng, &cfg)),
                2 => Model::Cbn(generate::random_environment(rng, &cfg).cbn().clone()),
                _ => {
                    let env = generate::random_environment(rng, &cfg);
                    Model::Action(generate::random_compatible_action(rng, &env, &format!("a{i}"), 0.5).unwrap())
                }
            }
        })
        .collect()
}

fn criterion_9() -> Outcome {
    for name in FIXTURE_NAMES {
        let text = fixtures::fixture_text(name).unwrap();
        let model = parse_model(text).map_err(|e| format!("{name}: {e}"))?;
        ensure(serialize_model(&model) == text, || format!("{name}: file is not canonical"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let models = random_models(&mut rng);
    for (i, m) in models.iter().enumerate() {
        let text = serialize_model(m);
        let back = parse_model(&text).map_err(|e| format!("model {i}: {e}"))?;
        ensure(&back == m, || format!("model {i} ({}) changed in round trip", m.kind()))?;
        ensure(serialize_model(&back) == text, || format!("model {i}: output not byte-stable"))?;
    }
    Ok(format!("{} fixtures and {} random models", FIXTURE_NAMES.len(), models.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", criterion_1),
        ("surgery soundness", criterion_2),
        ("robot structural regression", criterion_3),
        ("original/modified equivalence and divergence", criterion_4),
        ("consistency preserved by projection", criterion_5),
        ("extraction fidelity", criterion_6),
        ("Monte Carlo cross-check", criterion_7),
        ("compatibility gate", criterion_8),
        ("I/O round trip", criterion_9),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
