//! Bundled robot models: a world state, the `pickup` action, the environment
//! model and a `silent_move` variant of picking up.
//!
//! The structure follows the robot example; every probability is authored
//! (see `data/README.md`).

use crate::action::{ActionModel, EnvironmentModel};
use crate::error::{Error, Result};
use crate::io::{parse_model, Model};
use crate::model::BeliefNetwork;

pub const FIXTURE_NAMES: [&str; 4] = ["figure1_state", "figure2_pickup", "figure3_env", "silent_move"];

const FIGURE1: &str = include_str!("../data/figure1.bnw");
const PICKUP: &str = include_str!("../data/figure2_pickup.act");
const ENVIRONMENT: &str = include_str!("../data/figure3.env");
const SILENT_MOVE: &str = include_str!("../data/silent_move.act");

/// Canonical document text of a bundled model.
pub fn fixture_text(name: &str) -> Result<&'static str> {
    match name {
        "figure1_state" => Ok(FIGURE1),
        "figure2_pickup" => Ok(PICKUP),
        "figure3_env" => Ok(ENVIRONMENT),
        "silent_move" => Ok(SILENT_MOVE),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

pub fn load_fixture(name: &str) -> Result<Model> {
    parse_model(fixture_text(name)?)
}

pub fn figure1_state() -> BeliefNetwork {
    load_fixture("figure1_state")
        .and_then(Model::into_network)
        .expect("bundled fixture is valid")
}

pub fn pickup() -> ActionModel {
    load_fixture("figure2_pickup")
        .and_then(Model::into_action)
        .expect("bundled fixture is valid")
}

pub fn environment() -> EnvironmentModel {
    load_fixture("figure3_env")
        .and_then(Model::into_environment)
        .expect("bundled fixture is valid")
}

pub fn silent_move() -> ActionModel {
    load_fixture("silent_move")
        .and_then(Model::into_action)
        .expect("bundled fixture is valid")
}
