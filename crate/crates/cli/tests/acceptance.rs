//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! straight to the terminal (bypassing libtest capture), then asserts.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::{BigInt, BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{oracle_classification, oracle_regression};
use revfrf_cli::bench::{linear_fit, prediction_sweep, rebuild_vs_retrain, RevocationBench};
use revfrf_cli::config::ExperimentConfig;
use revfrf_cli::experiment::Prepared;
use revfrf_cli::metrics::{compute_metrics, MetricsOptions, MetricsReport};
use revfrf_crypto::{
    decrypt, ho_add, ho_enc, ho_lt_with_coin, ho_re_enc, par_h_dec1, par_h_dec2, FixedPoint, KeyDomain, KeyGenCenter,
    KeyGenConfig, PublicKey,
};
use revfrf_federation::montecarlo::{simulate, RevocationSim};
use revfrf_federation::{Federation, RevocationLevel};
use revfrf_forest::{train_reference_forest, PlainForest, Task};
use revfrf_transport::PartyId;

const SCALE_DIGITS: u32 = 4;

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance criterion {criterion}: {verdict} — {detail}\n");
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

/// 256-bit modulus, shared by every federated check.
fn keys() -> KeyGenCenter {
    static KEYS: OnceLock<KeyGenCenter> = OnceLock::new();
    KEYS.get_or_init(|| {
        let cfg = KeyGenConfig { scale_digits: SCALE_DIGITS, ..KeyGenConfig::with_prime_bits(128) };
        KeyGenCenter::generate(cfg, 2024).unwrap()
    })
    .clone()
}

fn synth_config(task: &str, rows: usize, features: usize, informative: usize, participants: usize, trees: usize, depth: u32, seed: u64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
seed = {seed}
[dataset]
task = "{task}"
test_fraction = 0.2
[dataset.synth]
rows = {rows}
features = {features}
informative = {informative}
noise = 0.05
[partition]
participants = {participants}
[params]
trees = {trees}
depth = {depth}
split_count = 8
range_sample = 32
scale_digits = {SCALE_DIGITS}
[keys]
prime_bits = 128
"#
    ))
    .unwrap()
}

fn accuracy(forest: &PlainForest, rows: &[Vec<i64>], labels: &[f64]) -> f64 {
    let hits = rows.iter().zip(labels).filter(|(r, &y)| forest.predict(r).unwrap() == y).count();
    hits as f64 / rows.len() as f64
}

fn toy_value(v: BigUint) -> u32 {
    u32::try_from(&v).unwrap()
}

#[test]
fn criterion_1_toy_modulus_exhaustive() {
    const N: u32 = 77;
    let start = Instant::now();
    let kgc = KeyGenCenter::from_primes(7u32.into(), 11u32.into(), 0, 2024).unwrap();
    let pp = kgc.params();
    let shares = kgc.strong_shares();
    let (cs, a, b) = (kgc.weak_key(0), kgc.weak_key(3), kgc.weak_key(4));
    let (pa, pb) = (a.public_key(pp), b.public_key(pp));
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut mismatches = 0u64;
    let mut checks = 0u64;
    let mut check = |ok: bool| {
        checks += 1;
        mismatches += !ok as u64;
    };

    let cts: Vec<_> = (0..N).map(|m| ho_enc(pp, &pa, &m.into(), &mut rng).unwrap()).collect();
    for m in 0..N {
        let ct = &cts[m as usize];
        check(decrypt(pp, &a, ct).map(toy_value) == Ok(m));
        check(decrypt(pp, &a, &ct.negate(pp)).map(toy_value) == Ok((N - m) % N));
        let joint = ho_re_enc(pp, &cs, ct).unwrap();
        let half = par_h_dec1(pp, &a, &joint).unwrap();
        check(par_h_dec2(pp, &cs, &half).map(toy_value) == Ok(m));
        for m2 in 0..N {
            let sum = ct.add(&cts[m2 as usize], pp).unwrap();
            check(decrypt(pp, &a, &sum).map(toy_value) == Ok((m + m2) % N));
        }
    }

    let target = PublicKey::combine(pp, &cs.public_key(pp), &pb).unwrap();
    let top = (1i64 << pp.r1_bits()) - 1;
    for m1 in -top..=top {
        for m2 in -top..=top {
            for coin in [false, true] {
                let x1 = FixedPoint::from_ticks(&BigInt::from(m1), pp).unwrap();
                let x2 = FixedPoint::from_ticks(&BigInt::from(m2), pp).unwrap();
                let c1 = ho_enc(pp, &pa, x1.raw(), &mut rng).unwrap();
                let c2 = ho_enc(pp, &pb, x2.raw(), &mut rng).unwrap();
                let l = ho_lt_with_coin(pp, &shares.lambda1, &shares.lambda2, (&c1, &pa), (&c2, &pb), &target, coin, &mut rng)
                    .unwrap();
                let bit = par_h_dec2(pp, &cs, &par_h_dec1(pp, &b, &l).unwrap()).unwrap();
                check(toy_value(bit) == (m1 < m2) as u32);
            }
        }
    }
    let pass = mismatches == 0;
    report(1, pass, &format!("{checks} toy-modulus checks, {mismatches} mismatches, {:.1?}", start.elapsed()));
    assert!(pass);
}

#[test]
fn criterion_2_cross_domain_addition() {
    let start = Instant::now();
    let kgc = keys();
    let pp = kgc.params();
    let shares = kgc.strong_shares();
    let (a, b) = (kgc.weak_key(3), kgc.weak_key(4));
    let (pa, pb) = (a.public_key(pp), b.public_key(pp));
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let n = pp.n().clone();
    let trials = 10_000;
    let mut failures = 0;
    for _ in 0..trials {
        let m1 = rng.gen_biguint_below(&n);
        let m2 = rng.gen_biguint_below(&n);
        let c1 = ho_enc(pp, &pa, &m1, &mut rng).unwrap();
        let c2 = ho_enc(pp, &pb, &m2, &mut rng).unwrap();
        let sum = ho_add(pp, &shares.lambda1, &shares.lambda2, (&c1, &pa), (&c2, &pb), &mut rng).unwrap();
        let got = par_h_dec1(pp, &a, &sum).and_then(|half| par_h_dec2(pp, &b, &half));
        if got != Ok((&m1 + &m2) % &n) {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report(2, pass, &format!("{trials} random HoAdd pairs at {}-bit N, {failures} failures, {:.1?}", pp.modulus_bits(), start.elapsed()));
    assert!(pass);
}

#[test]
fn criterion_3_federated_equals_centralized() {
    let start = Instant::now();
    let cases = [
        synth_config("classification", 500, 10, 3, 4, 20, 6, 31),
        synth_config("regression", 400, 8, 3, 3, 12, 6, 32),
        synth_config("classification", 300, 6, 2, 5, 8, 4, 33),
    ];
    let mut structure_mismatches = 0;
    let mut prediction_mismatches = 0;
    let mut rows_checked = 0;
    for cfg in cases {
        let prepared = Prepared::with_keys(cfg.clone(), keys()).unwrap();
        let owners = prepared.owners();
        let reference = train_reference_forest(prepared.training_data(&owners), &prepared.params, cfg.seed).unwrap();
        let mut fed = prepared.federation().unwrap();
        fed.train().unwrap();
        let plain = fed.escrow_forest().unwrap();
        structure_mismatches += (plain != reference) as usize;
        for row in prepared.test_rows() {
            let requester = owners[0];
            let got = fed.predict(requester, &row).unwrap().value;
            prediction_mismatches += (got != reference.predict(&row).unwrap()) as usize;
            rows_checked += 1;
        }
    }
    let pass = structure_mismatches == 0 && prediction_mismatches == 0;
    report(
        3,
        pass,
        &format!(
            "3 datasets, {structure_mismatches} forest mismatches, {prediction_mismatches}/{rows_checked} prediction mismatches, {:.1?}",
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_forward_revocation() {
    let start = Instant::now();
    // Participant 3 owns features 0 and 4; feature 0 is informative.
    let revoked: PartyId = 3;
    let mut provider_violations = 0;
    let mut gaps = Vec::new();
    for seed in 0..10u64 {
        let cfg = synth_config("classification", 300, 8, 2, 4, 10, 5, 40 + seed);
        let prepared = Prepared::with_keys(cfg, keys()).unwrap();
        let test_rows = prepared.test_rows();
        let labels = &prepared.test.labels;

        let mut fed = prepared.federation().unwrap();
        fed.train().unwrap();
        let request = fed.revocation_request(revoked, seed).unwrap();
        fed.revoke(revoked, request, RevocationLevel::Forward).unwrap();
        provider_violations += fed.forest().unwrap().providers().contains(&revoked) as usize;
        let rebuilt = accuracy(&fed.escrow_forest().unwrap(), &test_rows, labels);

        let mut fresh: Federation = prepared.federation().unwrap();
        fresh.replay_revocations(&[revoked]).unwrap();
        fresh.train().unwrap();
        let retrained = accuracy(&fresh.escrow_forest().unwrap(), &test_rows, labels);
        gaps.push(rebuilt - retrained);
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let pass = provider_violations == 0 && mean_gap.abs() <= 0.05;
    report(
        4,
        pass,
        &format!(
            "{provider_violations} forests still using the revoked provider; mean accuracy gap rebuilt − retrained {:+.2} points over 10 seeds, {:.1?}",
            100.0 * mean_gap,
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_backward_revocation() {
    let start = Instant::now();
    let revoked: PartyId = 3;
    let (mut trials, mut recovered, mut control_trials, mut control_recovered) = (0usize, 0usize, 0usize, 0usize);
    let mut seed = 50;
    while trials < 1000 {
        let cfg = synth_config("regression", 200, 3, 3, 3, 20, 6, seed);
        let prepared = Prepared::with_keys(cfg, keys()).unwrap();
        for level in [RevocationLevel::Backward, RevocationLevel::Forward] {
            let mut fed = prepared.federation().unwrap();
            fed.train().unwrap();
            let pp = fed.public_params().clone();
            let mut originals = BTreeSet::new();
            for tree in &fed.escrow_forest().unwrap().trees {
                tree.visit(&mut |n| {
                    if let Some(s) = n.split().filter(|s| s.provider == revoked) {
                        originals.insert(FixedPoint::from_ticks(&BigInt::from(s.payload), &pp).unwrap().into_raw());
                    }
                });
            }
            let request = fed.revocation_request(revoked, seed).unwrap();
            fed.revoke(revoked, request, level).unwrap();
            // The revoked party's key leaks; the adversary also holds the
            // copies retained at the center and relabels them as plain
            // single-key ciphertexts under that key.
            let leaked = fed.key_center().escrow_key(revoked);
            for archived in fed.archive().iter().filter(|a| a.provider == revoked) {
                let relabelled = archived.ciphertext.clone().with_domain(KeyDomain::Single(revoked));
                let hit = decrypt(&pp, &leaked, &relabelled).is_ok_and(|raw| originals.contains(&raw));
                if level == RevocationLevel::Backward {
                    trials += 1;
                    recovered += hit as usize;
                } else {
                    control_trials += 1;
                    control_recovered += hit as usize;
                }
            }
        }
        seed += 1;
    }
    let pass = recovered == 0 && trials >= 1000;
    report(
        5,
        pass,
        &format!(
            "{recovered}/{trials} thresholds recovered after double refresh (single-refresh control: {control_recovered}/{control_trials}), {:.1?}",
            start.elapsed()
        ),
    );
    assert!(control_recovered == control_trials, "the adversary must succeed without the refresh");
    assert!(pass);
}

#[test]
fn criterion_6_rebuild_versus_retrain() {
    let start = Instant::now();
    let sim = simulate(RevocationSim { participants: 14, depth: 10, trees: 1, forests: 1000, seed: 6 });
    let fraction = sim.destroyed_fraction();

    let bench = RevocationBench { participants: 14, depth: 10, trees: 2, rows: 2048, seed: 6, level: RevocationLevel::Forward };
    let costs = rebuild_vs_retrain(&keys(), bench, Some(&[3, 9, 16])).unwrap();
    let revocation_bytes: u64 = costs.iter().map(|c| c.revocation.bytes_sent).sum();
    let retrain_bytes: u64 = costs.iter().map(|c| c.retrain.bytes_sent).sum();
    let revocation_ops: u64 = costs.iter().map(|c| c.revocation.total_ops()).sum();
    let retrain_ops: u64 = costs.iter().map(|c| c.retrain.total_ops()).sum();
    let byte_ratio = retrain_bytes as f64 / revocation_bytes.max(1) as f64;
    let op_ratio = retrain_ops as f64 / revocation_ops.max(1) as f64;
    let federated_fraction =
        costs.iter().map(|c| c.destroyed_nodes as f64 / c.total_nodes as f64).sum::<f64>() / costs.len() as f64;

    let pass = fraction < 0.25 && byte_ratio >= 3.0;
    report(
        6,
        pass,
        &format!(
            "Monte-Carlo destroyed {:.1} of {} nodes ({:.1}%; exact expectation {:.1}, z = {:+.2}; depth·revoked = {}); \
             federated runs destroyed {:.1}%; retrain/revocation cost {byte_ratio:.2}× bytes, {op_ratio:.2}× ops, {:.1?}",
            sim.mean_destroyed,
            sim.total_nodes,
            100.0 * fraction,
            sim.expected,
            sim.z_score(),
            sim.depth_times_revoked,
            100.0 * federated_fraction,
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_prediction_cost_is_linear() {
    let start = Instant::now();
    let points = prediction_sweep(&keys(), 1..=10, 2..=10, 2048, 7).unwrap();
    let exact = points.iter().all(|p| p.holt == p.visited as u64);
    let xs: Vec<f64> = points.iter().map(|p| (p.trees * p.depth as usize) as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.bytes as f64).collect();
    let fit = linear_fit(&xs, &ys);
    let pass = exact && fit.r2 >= 0.99;
    report(
        7,
        pass,
        &format!(
            "{} sweep points, HoLT = visited nodes at every point: {exact}; bytes ≈ {:.0}·t·d + {:.0} with R² = {:.4}, {:.1?}",
            points.len(),
            fit.slope,
            fit.intercept,
            fit.r2,
            start.elapsed()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_metric_formulas() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(88);
    let mut mismatches = 0;
    let cases = 1000;
    for case in 0..cases {
        let n = rng.gen_range(1..80);
        let k = if case % 2 == 0 { 2 } else { rng.gen_range(3..7) };
        let t: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let p: Vec<usize> = (0..n).map(|i| if rng.gen_bool(0.5) { t[i] } else { rng.gen_range(0..k) }).collect();
        let (accuracy, recall, f1) = oracle_classification(&p, &t, k);
        let as_f = |v: &[usize]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
        let got = compute_metrics(&as_f(&p), &as_f(&t), Task::Classification, k, MetricsOptions::default()).unwrap();
        mismatches += (got != MetricsReport::Classification { accuracy, recall, f1 }) as usize;

        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let yhat: Vec<f64> = y.iter().map(|v| v + rng.gen_range(-5.0..5.0)).collect();
        let (mse, mae, r2, r2s) = oracle_regression(&yhat, &y);
        let got = compute_metrics(&yhat, &y, Task::Regression, 0, MetricsOptions { standard_r2: true }).unwrap();
        mismatches += (got != MetricsReport::Regression { mse, mae, r2, r2_standard: Some(r2s) }) as usize;
    }
    let pass = mismatches == 0;
    report(8, pass, &format!("{} classification and regression cases, {mismatches} mismatches, {:.1?}", 2 * cases, start.elapsed()));
    assert!(pass);
}
