//! JSON fixtures: every file carries a `kind` tag.

use std::path::Path;

use monogamy_core::game::{bb84_game, game_power, MonogamyGame, Strategy};
use monogamy_core::posver::{ProverModel, TimingScenario};
use monogamy_core::{ComplexMatrix, DimensionList};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Fixture {
    Matrix {
        matrix: ComplexMatrix,
    },
    Game {
        game: MonogamyGame,
    },
    /// A strategy for `game` (`"bb84"` or an inline game) repeated `n` times.
    Strategy {
        #[serde(default)]
        game: GameRef,
        #[serde(default = "one")]
        n: usize,
        strategy: Strategy,
    },
    /// A tripartite state and two binary measurements on `A`.
    Uncertainty {
        rho_abc: ComplexMatrix,
        dims: DimensionList,
        f0: Vec<ComplexMatrix>,
        f1: Vec<ComplexMatrix>,
    },
    Scenario {
        scenario: TimingScenario,
        prover: ProverModel,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Named(String),
    Inline(MonogamyGame),
}

impl Default for GameRef {
    fn default() -> Self {
        GameRef::Named("bb84".into())
    }
}

fn one() -> usize {
    1
}

impl GameRef {
    pub fn resolve(&self, n: usize) -> Result<MonogamyGame, CliError> {
        let base = match self {
            GameRef::Named(name) if name == "bb84" => bb84_game(),
            GameRef::Named(name) => return Err(CliError::Fixture(format!("unknown built-in game {name:?}"))),
            GameRef::Inline(g) => g.clone(),
        };
        Ok(game_power(&base, n)?)
    }
}

impl Fixture {
    pub fn kind(&self) -> &'static str {
        match self {
            Fixture::Matrix { .. } => "matrix",
            Fixture::Game { .. } => "game",
            Fixture::Strategy { .. } => "strategy",
            Fixture::Uncertainty { .. } => "uncertainty",
            Fixture::Scenario { .. } => "scenario",
        }
    }

    /// Runs the validators of the wrapped objects.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Fixture::Matrix { .. } => {}
            Fixture::Game { game } => game.validate()?,
            Fixture::Strategy { game, n, strategy } => strategy.validate(&game.resolve(*n)?)?,
            Fixture::Uncertainty { rho_abc, dims, f0, f1 } => {
                monogamy_core::uncertainty::post_measurement_state(rho_abc, dims, f0, f1)?;
            }
            Fixture::Scenario { scenario, .. } => scenario.validate()?,
        }
        Ok(())
    }
}

pub fn load(path: &Path) -> Result<Fixture, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Fixture(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Fixture(format!("{}: {e}", path.display())))
}

/// `bb84` or a path to a `game` fixture.
pub fn load_game(source: &str) -> Result<MonogamyGame, CliError> {
    if source == "bb84" {
        return Ok(bb84_game());
    }
    match load(Path::new(source))? {
        Fixture::Game { game } => {
            game.validate()?;
            Ok(game)
        }
        other => Err(CliError::Fixture(format!(
            "{source}: expected a game fixture, found {}",
            other.kind()
        ))),
    }
}
