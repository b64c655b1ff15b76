#pragma once

#include <optional>
#include <string>

#include "scogce/equilibrium.hpp"
#include "scogce/game.hpp"
#include "scogce/simulate.hpp"

namespace scogce {

/// A game fixture: the model plus optional per-player cost budgets.
struct GameFile {
  GameDefinition game;
  std::optional<Eigen::VectorXd> deltas;
};

/// Parses a game from JSON text. Top-level keys: "A", "B" (array of
/// matrices), "C", "E", "Q", "R", "D", "x0", optional "deltas",
/// "error_selectors" and "options". Matrices are arrays of row arrays of
/// finite doubles; any NaN/Inf is rejected. Throws std::runtime_error
/// with a diagnostic on malformed input.
GameFile parse_game_json(const std::string& text);
GameFile load_game_file(const std::string& path);

std::string game_to_json(const GameFile& file);

std::string report_to_json(const VerificationReport& report,
                           const GameDefinition& game,
                           const StrategyProfile& profile);
std::string run_to_json(const EquilibriumRun& run);

/// CSV with columns t, x_1..x_n, per-player running costs.
std::string trajectory_csv(const SimulationResult& sim);
/// CSV with columns delta_1..delta_N, status, rounds, cost_1..cost_N, pos.
std::string sweep_csv(const SweepResult& sweep, int n_players);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace scogce
