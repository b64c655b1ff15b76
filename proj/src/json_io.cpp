#include "scogce/json_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace scogce {
namespace {

using nlohmann::json;

Eigen::MatrixXd parse_matrix(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error("'" + key + "' must be an array of row arrays");
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::runtime_error("'" + key + "' has ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw std::runtime_error("'" + key + "' has a non-numeric entry");
      const double v = j[r][c].get<double>();
      if (!std::isfinite(v))
        throw std::runtime_error("'" + key + "' has a non-finite entry");
      m(r, c) = v;
    }
  }
  return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& key) {
  if (!j.is_array())
    throw std::runtime_error("'" + key + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number())
      throw std::runtime_error("'" + key + "' has a non-numeric entry");
    v(k) = j[k].get<double>();
    if (!std::isfinite(v(k)))
      throw std::runtime_error("'" + key + "' has a non-finite entry");
  }
  return v;
}

std::vector<Eigen::MatrixXd> parse_matrix_list(const json& j,
                                               const std::string& key) {
  if (!j.is_array())
    throw std::runtime_error("'" + key + "' must be an array of matrices");
  std::vector<Eigen::MatrixXd> out;
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(parse_matrix(j[k], key + "[" + std::to_string(k) + "]"));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

const json& require(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error("missing required key '" + key + "'");
  return *it;
}

}  // namespace

GameFile parse_game_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("game file must be an object");

  GameFile file;
  GameDefinition& g = file.game;
  g.a = parse_matrix(require(j, "A"), "A");
  g.b = parse_matrix_list(require(j, "B"), "B");
  g.c = parse_matrix_list(require(j, "C"), "C");
  g.e = parse_matrix(require(j, "E"), "E");
  g.q_weight = parse_matrix_list(require(j, "Q"), "Q");
  g.r_weight = parse_matrix_list(require(j, "R"), "R");
  g.d_weight = parse_matrix_list(require(j, "D"), "D");
  g.x0 = parse_vector(require(j, "x0"), "x0");
  g.state_dim = static_cast<int>(g.a.rows());
  g.n_players = static_cast<int>(g.b.size());
  if (j.contains("error_selectors"))
    g.error_selectors = parse_matrix_list(j["error_selectors"],
                                          "error_selectors");
  if (j.contains("deltas"))
    file.deltas = parse_vector(j["deltas"], "deltas");
  return file;
}

GameFile load_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_game_json(buf.str());
}

std::string game_to_json(const GameFile& file) {
  const GameDefinition& g = file.game;
  json j;
  j["A"] = matrix_to_json(g.a);
  json b = json::array(), c = json::array(), q = json::array(),
       r = json::array(), d = json::array();
  for (int i = 0; i < g.n_players; ++i) {
    b.push_back(matrix_to_json(g.b[i]));
    c.push_back(matrix_to_json(g.c[i]));
    q.push_back(matrix_to_json(g.q_weight[i]));
    r.push_back(matrix_to_json(g.r_weight[i]));
    d.push_back(matrix_to_json(g.d_weight[i]));
  }
  j["B"] = std::move(b);
  j["C"] = std::move(c);
  j["Q"] = std::move(q);
  j["R"] = std::move(r);
  j["D"] = std::move(d);
  j["E"] = matrix_to_json(g.e);
  j["x0"] = vector_to_json(g.x0);
  if (!g.error_selectors.empty()) {
    json sel = json::array();
    for (const auto& m : g.error_selectors) sel.push_back(matrix_to_json(m));
    j["error_selectors"] = std::move(sel);
  }
  if (file.deltas) j["deltas"] = vector_to_json(*file.deltas);
  return j.dump(2);
}

std::string report_to_json(const VerificationReport& report,
                           const GameDefinition& game,
                           const StrategyProfile& profile) {
  json j;
  j["loop_stable"] = report.loop_stable;
  j["all_certified"] = report.all_certified;
  const Eigen::VectorXd exact = exact_worst_case_costs(game, profile);
  json players = json::array();
  for (size_t i = 0; i < report.players.size(); ++i) {
    const auto& cert = report.players[i];
    json pj;
    pj["certified"] = cert.certified;
    pj["exact_worst_case_cost"] =
        std::isfinite(exact(i)) ? json(exact(i)) : json(nullptr);
    if (cert.certified) {
      pj["cost_bound"] = cert.cost_bound;
      pj["gamma"] = cert.gamma;
      pj["bound_gap"] = cert.cost_bound - exact(i);
      pj["P"] = matrix_to_json(cert.p);
      pj["M"] = matrix_to_json(cert.m);
    }
    players.push_back(std::move(pj));
  }
  j["players"] = std::move(players);
  return j.dump(2);
}

std::string run_to_json(const EquilibriumRun& run) {
  json j;
  j["status"] = to_string(run.status);
  j["rounds"] = run.rounds;
  json gains = json::array();
  for (const auto& f : run.profile.gains) gains.push_back(matrix_to_json(f));
  j["gains"] = std::move(gains);
  if (run.worst_case_costs.size() && run.worst_case_costs.allFinite())
    j["worst_case_costs"] = vector_to_json(run.worst_case_costs);
  json history = json::array();
  for (const auto& rec : run.history) {
    json h;
    h["player"] = rec.player;
    h["response_found"] = rec.response_found;
    if (rec.worst_case_costs.size() && rec.worst_case_costs.allFinite())
      h["worst_case_costs"] = vector_to_json(rec.worst_case_costs);
    history.push_back(std::move(h));
  }
  j["history"] = std::move(history);
  return j.dump(2);
}

std::string trajectory_csv(const SimulationResult& sim) {
  std::ostringstream os;
  os.precision(12);
  const Eigen::Index n = sim.states.rows();
  const Eigen::Index nn = sim.running_cost.rows();
  os << "t";
  for (Eigen::Index k = 0; k < n; ++k) os << ",x_" << (k + 1);
  for (Eigen::Index i = 0; i < nn; ++i) os << ",cost_" << (i + 1);
  os << "\n";
  for (size_t step = 0; step < sim.times.size(); ++step) {
    os << sim.times[step];
    for (Eigen::Index k = 0; k < n; ++k) os << "," << sim.states(k, step);
    for (Eigen::Index i = 0; i < nn; ++i)
      os << "," << sim.running_cost(i, step);
    os << "\n";
  }
  return os.str();
}

std::string sweep_csv(const SweepResult& sweep, int n_players) {
  std::ostringstream os;
  os.precision(12);
  for (int i = 0; i < n_players; ++i) os << "delta_" << (i + 1) << ",";
  os << "status,rounds";
  for (int i = 0; i < n_players; ++i) os << ",cost_" << (i + 1);
  os << ",pos\n";
  for (const auto& point : sweep.points) {
    for (int i = 0; i < n_players; ++i) os << point.deltas(i) << ",";
    os << to_string(point.status) << "," << point.rounds;
    for (int i = 0; i < n_players; ++i) {
      os << ",";
      if (point.worst_case_costs.size() == n_players &&
          std::isfinite(point.worst_case_costs(i)))
        os << point.worst_case_costs(i);
    }
    os << ",";
    if (point.status == RunStatus::ScogceFound && point.pos > 0.0)
      os << point.pos;
    os << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace scogce
