#include "scogce/simulate.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "scogce/linalg.hpp"

namespace scogce {
namespace {

// Recursive-descent parser for scalar functions of t.
class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  std::function<double(double)> parse() {
    auto f = expression();
    skip_ws();
    if (pos_ != s_.size())
      throw std::invalid_argument("trailing input in expression: " + s_);
    return f;
  }

 private:
  using Fn = std::function<double(double)>;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  Fn expression() {
    Fn lhs = term();
    while (true) {
      if (consume('+')) {
        Fn rhs = term();
        lhs = [lhs, rhs](double t) { return lhs(t) + rhs(t); };
      } else if (consume('-')) {
        Fn rhs = term();
        lhs = [lhs, rhs](double t) { return lhs(t) - rhs(t); };
      } else {
        return lhs;
      }
    }
  }

  Fn term() {
    Fn lhs = power();
    while (true) {
      if (consume('*')) {
        Fn rhs = power();
        lhs = [lhs, rhs](double t) { return lhs(t) * rhs(t); };
      } else if (consume('/')) {
        Fn rhs = power();
        lhs = [lhs, rhs](double t) { return lhs(t) / rhs(t); };
      } else {
        return lhs;
      }
    }
  }

  Fn power() {
    Fn base = factor();
    if (consume('^')) {
      Fn exp = factor();
      return [base, exp](double t) { return std::pow(base(t), exp(t)); };
    }
    return base;
  }

  Fn factor() {
    skip_ws();
    if (consume('-')) {
      Fn inner = factor();
      return [inner](double t) { return -inner(t); };
    }
    if (consume('+')) return factor();
    if (consume('(')) {
      Fn inner = expression();
      if (!consume(')')) throw std::invalid_argument("missing ')'");
      return inner;
    }
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      return [v](double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             std::isalpha(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "t") return [](double t) { return t; };
      if (!consume('('))
        throw std::invalid_argument("unknown symbol '" + name + "'");
      Fn arg = expression();
      if (!consume(')')) throw std::invalid_argument("missing ')'");
      if (name == "sin")
        return [arg](double t) { return std::sin(arg(t)); };
      if (name == "cos")
        return [arg](double t) { return std::cos(arg(t)); };
      if (name == "exp")
        return [arg](double t) { return std::exp(arg(t)); };
      throw std::invalid_argument("unknown function '" + name + "'");
    }
    throw std::invalid_argument("unexpected character in expression");
  }

  std::string s_;
  size_t pos_ = 0;
};

}  // namespace

std::function<double(double)> parse_time_expression(const std::string& s) {
  return ExprParser(s).parse();
}

DisturbanceSignal zero_disturbance(int q) {
  return [q](double) { return Eigen::VectorXd::Zero(q); };
}

DisturbanceSignal parse_disturbance(const std::vector<std::string>& exprs) {
  std::vector<std::function<double(double)>> fns;
  for (const auto& s : exprs) fns.push_back(parse_time_expression(s));
  return [fns](double t) {
    Eigen::VectorXd d(fns.size());
    for (size_t k = 0; k < fns.size(); ++k) d(k) = fns[k](t);
    return d;
  };
}

SimulationResult simulate(const GameDefinition& game,
                          const StrategyProfile& profile,
                          const DisturbanceSignal& disturbance,
                          double t_final, double dt) {
  const Eigen::MatrixXd acl = closed_loop_matrix(game, profile);
  const double alpha = spectral_abscissa(acl);
  if (t_final <= 0.0) {
    if (alpha >= 0.0)
      throw std::invalid_argument(
          "closed loop is unstable; pass an explicit horizon");
    t_final = 20.0 / std::abs(alpha);
  }
  if (dt <= 0.0)
    dt = std::min(0.01, alpha < 0.0 ? 0.1 / std::abs(alpha) : 0.01);
  const int steps = std::max(1, static_cast<int>(std::ceil(t_final / dt)));
  dt = t_final / steps;

  const int nn = game.n_players;
  const int n = game.state_dim;

  // Per-player cost integrand at (x, t): y'Qy + u'Ru - d'D d.
  std::vector<Eigen::MatrixXd> state_cost(nn);
  for (int i = 0; i < nn; ++i) {
    const Eigen::MatrixXd fc = profile.gains[i] * game.c[i];
    state_cost[i] =
        game.c[i].transpose() * game.q_weight[i] * game.c[i] +
        fc.transpose() * game.r_weight[i] * fc;
  }
  auto integrand = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                       Eigen::VectorXd& out) {
    for (int i = 0; i < nn; ++i)
      out(i) = x.dot(state_cost[i] * x) - d.dot(game.d_weight[i] * d);
  };
  auto dynamics = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
    return (acl * x + game.e * d).eval();
  };

  SimulationResult res;
  res.times.resize(steps + 1);
  res.states.resize(n, steps + 1);
  res.running_cost.resize(nn, steps + 1);
  const bool track_errors =
      static_cast<int>(game.error_selectors.size()) == nn;
  if (track_errors) res.error_norms.resize(nn, steps + 1);

  Eigen::VectorXd x = game.x0;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nn);
  Eigen::VectorXd k(nn);

  auto record = [&](int step, double t) {
    res.times[step] = t;
    res.states.col(step) = x;
    res.running_cost.col(step) = cost;
    if (track_errors)
      for (int i = 0; i < nn; ++i)
        res.error_norms(i, step) =
            (game.error_selectors[i] * game.c[i] * x).cwiseAbs().maxCoeff();
  };
  record(0, 0.0);

  for (int step = 0; step < steps; ++step) {
    const double t = step * dt;
    const Eigen::VectorXd d1 = disturbance(t);
    const Eigen::VectorXd d2 = disturbance(t + 0.5 * dt);
    const Eigen::VectorXd d3 = disturbance(t + dt);

    const Eigen::VectorXd k1 = dynamics(x, d1);
    const Eigen::VectorXd k2 = dynamics(x + 0.5 * dt * k1, d2);
    const Eigen::VectorXd k3 = dynamics(x + 0.5 * dt * k2, d2);
    const Eigen::VectorXd k4 = dynamics(x + dt * k3, d3);

    Eigen::VectorXd c1(nn), c2(nn), c3(nn), c4(nn);
    integrand(x, d1, c1);
    integrand(x + 0.5 * dt * k1, d2, c2);
    integrand(x + 0.5 * dt * k2, d2, c3);
    integrand(x + dt * k3, d3, c4);

    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    cost += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    record(step + 1, (step + 1) * dt);
  }
  res.final_costs = cost;
  return res;
}

}  // namespace scogce
