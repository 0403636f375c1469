mod common;

use common::{small_params, Dataset};
use revfrf_federation::{message, Federation, FederationError, FederationSetup, Role};
use revfrf_forest::{train_reference_forest, Task};
use revfrf_transport::{DeliveryOrder, Primitive, Stage};

#[test]
fn federated_training_equals_reference() {
    for (task, seed) in [(Task::Classification, 1), (Task::Regression, 2)] {
        let data = Dataset::new(60, 5, 3, task, seed);
        let mut params = small_params(3, 3);
        if seed == 2 {
            params.row_fraction = Some(0.7);
        }
        let mut fed = data.federation(params, seed);
        fed.train().unwrap();
        let reference = train_reference_forest(data.training(), &params, seed).unwrap();
        assert_eq!(fed.escrow_forest().unwrap(), reference, "{task:?}");
        assert!(reference.internal_count() > 0);
    }
}

#[test]
fn one_hoenc_per_won_split() {
    let data = Dataset::new(40, 4, 2, Task::Classification, 3);
    let mut fed = data.federation(small_params(2, 3), 3);
    let forest = fed.train().unwrap().clone();
    let ledger = fed.ledger();
    let mut won = std::collections::BTreeMap::new();
    for tree in &forest.trees {
        tree.visit(&mut |n| {
            if let Some(s) = n.split() {
                *won.entry(s.provider).or_insert(0u64) += 1;
            }
        });
    }
    for p in [3, 4] {
        let c = ledger.get(Stage::Construction, p);
        assert_eq!(c.ops(Primitive::HoEnc), won.get(&p).copied().unwrap_or(0), "participant {p}");
    }
    assert_eq!(ledger.stage_total(Stage::Construction).ops(Primitive::HoEnc), forest.internal_count() as u64);
    assert_eq!(ledger.stage_total(Stage::Construction).ops(Primitive::HoLT), 0);
}

#[test]
fn participants_send_no_real_values_to_the_center() {
    for row in message::SCHEMA {
        if row.from.contains(&Role::Participant) && row.to.contains(&Role::Center) {
            assert!(!row.fields.contains(&message::Field::Real), "{}", row.name);
        }
    }
}

#[test]
fn training_is_replayable() {
    let data = Dataset::new(30, 4, 2, Task::Regression, 4);
    let run = || {
        let mut fed = data.federation(small_params(2, 2), 9);
        fed.train().unwrap();
        (fed.escrow_forest().unwrap(), fed.ledger().to_csv_string())
    };
    assert_eq!(run(), run());
}

#[test]
fn setup_rejects_bad_partitions() {
    let data = Dataset::new(20, 4, 2, Task::Classification, 5);
    let base = || FederationSetup {
        keys: common::keys(),
        params: small_params(1, 2),
        task: data.task,
        num_classes: data.num_classes,
        labels: data.labels.clone(),
        participants: data.participants(),
        seed: 1,
        delivery: DeliveryOrder::SendOrder,
    };
    let expect_config = |setup: FederationSetup| {
        assert!(matches!(Federation::setup(setup), Err(FederationError::Config(_))));
    };

    let mut one = base();
    one.participants.truncate(1);
    expect_config(one);

    let mut reserved = base();
    reserved.participants[0].id = 1;
    expect_config(reserved);

    let mut overlap = base();
    let column = overlap.participants[0].train[&0].clone();
    overlap.participants[1].train.insert(0, column);
    expect_config(overlap);

    let mut short = base();
    short.participants[0].train.get_mut(&0).unwrap().pop();
    expect_config(short);

    let mut gap = base();
    gap.participants[1].train.remove(&1);
    gap.participants[1].test.remove(&1);
    expect_config(gap);
}
