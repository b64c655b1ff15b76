// Acceptance harness: one pass/fail line per top-level requirement, with
// timings. Exits nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "scogce/care.hpp"
#include "scogce/certify.hpp"
#include "scogce/equilibrium.hpp"
#include "scogce/game.hpp"
#include "scogce/json_io.hpp"
#include "scogce/linalg.hpp"
#include "scogce/lmi.hpp"
#include "scogce/simulate.hpp"
#include "scogce/synth_of.hpp"

using namespace scogce;

namespace {

int n_failed = 0;

std::string fixture(const std::string& name) {
  const char* dir = std::getenv("SCOGCE_FIXTURES");
  if (!dir) {
    std::fprintf(stderr, "SCOGCE_FIXTURES is not set\n");
    std::exit(2);
  }
  return std::string(dir) + "/" + name;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, const std::string& what, bool pass,
            double seconds) {
  std::printf("criterion %d: %-4s %-58s (%.1fs)\n", criterion,
              pass ? "PASS" : "FAIL", what.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++n_failed;
}

bool near(double value, double target, double tol) {
  return std::abs(value - target) <= tol;
}

Eigen::MatrixXd random_matrix(std::mt19937& rng, int r, int c) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
  return m;
}

// Direct LMI decision of whether Psi + (U'F'V).sym() < 0 is solvable in F.
bool recovery_solvable(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& u,
                       const Eigen::MatrixXd& v) {
  LmiProblem prob;
  MatExpr f = prob.rectangular(static_cast<int>(v.rows()),
                               static_cast<int>(u.rows()));
  prob.require_nsd(MatExpr(psi) +
                   (u.transpose() * f.transpose() * v).sym());
  return prob.solve_feasibility(1e-7).status == SdpStatus::Feasible;
}

bool projections_negative(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& u,
                          const Eigen::MatrixXd& v) {
  for (const Eigen::MatrixXd& w : {u, v}) {
    Eigen::MatrixXd n = null_space_basis(w);
    if (n.cols() == 0) continue;
    if (min_symmetric_eigenvalue(-(n.transpose() * psi * n).eval()) <= 0.0)
      return false;
  }
  return true;
}

// Relative quadrature error of the simulated worst-case cost against the
// Riccati value, maximized over players with finite exposure.
double worst_quadrature_error(const GameDefinition& game,
                              const StrategyProfile& profile, double t_final,
                              double dt) {
  double worst = 0.0;
  for (int i = 0; i < game.n_players; ++i) {
    auto exact = exact_worst_case_cost(game, profile, i);
    auto dist = worst_case_disturbance(game, profile, i);
    if (!exact || !dist) return std::numeric_limits<double>::infinity();
    SimulationResult r = simulate(game, profile, *dist, t_final, dt);
    double rel = std::abs(r.final_costs(i) - *exact) /
                 std::max(std::abs(*exact), 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

int main() {
  GameFile ex2 = load_game_file(fixture("example2.json"));
  GameFile ex3 = load_game_file(fixture("example3.json"));
  GameFile ex4 = load_game_file(fixture("example4.json"));
  GameDefinition ex1 = load_game_file(fixture("example1.json")).game;
  GameFile scalar = load_game_file(fixture("scalar.json"));
  const int workers =
      std::max(1u, std::thread::hardware_concurrency());

  // 1. Nash reproduction on the three-player interconnected system.
  Timer t1;
  ScfneResult nash3 = solve_scfne(ex3.game);
  {
    const double targets[3] = {0.0999, 2.3385, 1.9535};
    bool ok = nash3.converged;
    for (int i = 0; i < 3 && ok; ++i)
      ok = near(nash3.costs(i), targets[i], 0.005);
    ok = ok && near(nash3.costs.sum(), 4.3918, 0.01);
    for (double a : nash3.stability_abscissas) ok = ok && a < 0.0;
    double secs = t1.seconds();
    ok = ok && secs < 5.0;
    std::printf("  nash costs: %.4f %.4f %.4f (sum %.4f)\n", nash3.costs(0),
                nash3.costs(1), nash3.costs(2), nash3.costs.sum());
    report(1, "state-feedback Nash costs and stability", ok, secs);
  }

  // 2. Cooperative costs. The centralized value is checked on the
  // three-player system; on the consensus games both the centralized and
  // the structured static-gain value are computed and the matching mode
  // is logged.
  double coop3 = 0.0, coop2_full = 0.0, coop4_full = 0.0;
  {
    Timer t;
    auto v = cooperative_cost(ex3.game, CooperativeMode::FullInformation);
    double secs = t.seconds();
    coop3 = v.value_or(-1.0);
    std::printf("  cooperative (3-player, centralized): %.4f\n", coop3);
    report(2, "cooperative cost, 3-player system = 3.2801",
           v && near(*v, 3.2801, 0.005) && secs < 10.0, secs);
  }
  for (const auto& [gf, target, label] :
       {std::tuple<const GameFile*, double, const char*>{&ex2, 0.875,
                                                         "3-agent consensus"},
        {&ex4, 1.9993, "5-agent consensus"}}) {
    Timer tf;
    auto full = cooperative_cost(gf->game, CooperativeMode::FullInformation);
    double secs_full = tf.seconds();
    Timer ts;
    auto structured =
        cooperative_cost(gf->game, CooperativeMode::StructuredBisection);
    double secs_struct = ts.seconds();
    bool full_match = full && near(*full, target, 0.02);
    bool struct_match = structured && near(*structured, target, 0.02);
    std::printf(
        "  cooperative (%s): centralized %.4f (%.1fs)%s, structured %.4f "
        "(%.1fs)%s, target %.4f\n",
        label, full.value_or(-1.0), secs_full,
        full_match ? " [match]" : "", structured.value_or(-1.0), secs_struct,
        struct_match ? " [match]" : "", target);
    if (gf == &ex2) coop2_full = full.value_or(-1.0);
    if (gf == &ex4) coop4_full = full.value_or(-1.0);
    report(2,
           std::string("cooperative cost, ") + label + " = " +
               std::to_string(target).substr(0, 6),
           (full_match || struct_match) && secs_full < 10.0 &&
               secs_struct < 10.0,
           secs_full + secs_struct);
  }

  // 3. Price of stability at the Nash solution.
  {
    Timer t;
    auto pos = price_of_stability(ex3.game, nash3.profile, coop3);
    bool ok = pos && near(*pos, 1.3390, 0.01);
    std::printf("  price of stability: %.4f\n", pos.value_or(-1.0));
    report(3, "price of stability = 1.3390", ok, t.seconds());
  }

  // 4. State-feedback equilibrium region boundary under a scalar budget
  // sweep, including the certificate-reuse monotonicity needed in 6b.
  bool sweep_monotone = true;
  {
    Timer t;
    std::vector<Eigen::VectorXd> grid;
    for (double d = 1.1; d <= 6.0 + 1e-9; d += 0.05)
      grid.push_back(Eigen::VectorXd::Constant(ex3.game.n_players, d));
    SweepResult sweep =
        delta_sweep(ex3.game, grid, FeedbackMode::StateFeedback, workers);
    bool ok = sweep.points.size() == grid.size();
    bool seen_found = false;
    for (const SweepPoint& pt : sweep.points) {
      bool found = pt.status == RunStatus::ScogceFound;
      if (pt.deltas(0) <= 1.75 + 1e-9 && found) ok = false;
      if (pt.deltas(0) >= 2.2 - 1e-9 && !found) ok = false;
      if (seen_found && !found) sweep_monotone = false;
      seen_found = seen_found || found;
    }
    double secs = t.seconds();
    ok = ok && secs < 600.0;
    report(4, "state-feedback region boundary in (1.75, 2.2]", ok, secs);
  }

  // 5. Output-feedback pipeline soundness over a budget grid on the
  // consensus game: every reported equilibrium verifies, beats its
  // budgets with a positive gap, stabilizes all worst-case loops, and is
  // never exceeded by sampled disturbances.
  std::vector<NslpmmTrace> all_traces;
  {
    Timer t;
    bool ok = true;
    int found_points = 0;
    for (double d1 : {0.5, 0.875, 1.25}) {
      for (double d2 : {0.9, 1.175, 1.45}) {
        Eigen::VectorXd deltas(3);
        deltas << d1, d2, d2;
        EquilibriumRun run =
            run_sequential(ex2.game, deltas, FeedbackMode::OutputFeedback);
        for (auto& tr : run.nslpmm_traces)
          all_traces.push_back(std::move(tr));
        if (run.status != RunStatus::ScogceFound) continue;
        ++found_points;
        VerificationReport rep = verify_scogce(ex2.game, run.profile, deltas);
        ok = ok && rep.all_certified;
        Eigen::VectorXd exact = exact_worst_case_costs(ex2.game, run.profile);
        Eigen::MatrixXd acl = closed_loop_matrix(ex2.game, run.profile);
        ok = ok && spectral_abscissa(acl) < 0.0;
        for (int i = 0; i < 3; ++i) {
          ok = ok && exact(i) < deltas(i) - 1e-9;
          ok = ok && spectral_abscissa(
                         acl + disturbance_gram(ex2.game, i) *
                                   rep.players[i].p) < 0.0;
          double excess = sample_disturbance_supremacy(ex2.game, run.profile,
                                                       i, 100, 1234 + i);
          ok = ok && excess <= 1e-3 * std::max(exact(i), 1e-12);
        }
      }
    }
    std::printf("  equilibria found on the 3x3 budget grid: %d\n",
                found_points);
    report(5, "output-feedback pipeline soundness on the budget grid",
           ok && found_points >= 1, t.seconds());
  }

  // 6a. The Nash solution verifies as a guaranteed-cost equilibrium just
  // above its own costs.
  {
    Timer t;
    Eigen::VectorXd deltas = nash3.costs.array() + 0.05;
    VerificationReport rep = verify_scogce(ex3.game, nash3.profile, deltas);
    report(6, "Nash solution certifies at budgets cost + 0.05",
           rep.all_certified, t.seconds());
  }

  // 6b. Certificate reuse: a certificate found at one budget closes
  // directly at every larger budget, and the sweep's found set is upward
  // closed.
  {
    Timer t;
    bool ok = sweep_monotone;
    EquilibriumRun run =
        run_sequential(ex3.game, Eigen::VectorXd::Constant(3, 2.4),
                       FeedbackMode::StateFeedback);
    ok = ok && run.status == RunStatus::ScogceFound;
    if (ok) {
      for (double larger : {2.6, 3.0, 10.0}) {
        for (int i = 0; i < 3; ++i) {
          const PlayerCertificate& c = run.certificates.players[i];
          ok = ok && check_certificate(ex3.game, run.profile, i, c.p, c.m,
                                       c.gamma, larger);
        }
      }
    }
    report(6, "certificates stay valid at larger budgets", ok, t.seconds());
  }

  // 6c. Gain elimination round trip: solvability of the bilinear recovery
  // inequality coincides with negativity of both null-space projections.
  {
    Timer t;
    std::mt19937 rng(99);
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
      int n = 2 + k % 3;
      Eigen::MatrixXd psi = random_matrix(rng, n, n);
      psi = 0.5 * (psi + psi.transpose()).eval();
      psi -= (k % 2 == 0 ? 2.5 : 0.2) * Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd u = random_matrix(rng, 1, n);
      Eigen::MatrixXd v = random_matrix(rng, 1, n);
      ok = ok && recovery_solvable(psi, u, v) == projections_negative(psi, u, v);
    }
    report(6, "gain elimination round trip on 50 random instances", ok,
           t.seconds());
  }

  // 6d. Every trace-minimization sequence recorded in criterion 5 is
  // nonincreasing and respects the tr(PW) >= n floor.
  {
    Timer t;
    const int n = ex2.game.state_dim;
    if (all_traces.empty()) {
      // The grid runs certified their starting profiles directly; force a
      // response so the trace-minimization path is exercised.
      StrategyProfile init =
          initialize_stabilizing(ex2.game, FeedbackMode::OutputFeedback);
      OfResponse resp = of_guaranteed_cost_response(ex2.game, init, 0, 1.2);
      for (auto& tr : resp.traces) all_traces.push_back(std::move(tr));
    }
    bool ok = !all_traces.empty();
    for (const NslpmmTrace& tr : all_traces) {
      for (std::size_t k = 0; k < tr.trace_values.size(); ++k) {
        ok = ok && tr.trace_values[k] >= n - 1e-6;
        if (k > 0)
          ok = ok && tr.trace_values[k] <= tr.trace_values[k - 1] + 1e-9;
      }
    }
    std::printf("  trace-minimization sequences checked: %zu\n",
                all_traces.size());
    report(6, "trace sequences nonincreasing and above the floor", ok,
           t.seconds());
  }

  // 6e. Cross-term coupling bound on random draws.
  {
    Timer t;
    std::mt19937 rng(7);
    bool ok = true;
    for (int k = 0; k < 5; ++k) {
      int n = 2 + k;
      Eigen::MatrixXd l = random_matrix(rng, n, n);
      Eigen::MatrixXd p = l * l.transpose();
      ok = ok && cross_bound_violation(p, 1000, 100 + k) <= 0.0;
    }
    report(6, "coupling bound holds on 5x1000 random draws", ok, t.seconds());
  }

  // 7. Single-player oracle equivalence: the scalar fixture against the
  // closed form 2 - sqrt(2), and quadrature under the worst-case
  // disturbance against the Riccati value on every fixture.
  {
    Timer t;
    StrategyProfile zero =
        StrategyProfile::zeros(scalar.game, FeedbackMode::OutputFeedback);
    Eigen::VectorXd c = exact_worst_case_costs(scalar.game, zero);
    bool ok = std::abs(c(0) - (2.0 - std::sqrt(2.0))) < 1e-10;
    double err = worst_quadrature_error(scalar.game, zero, 60.0, 0.002);
    ok = ok && err < 1e-3;
    err = worst_quadrature_error(
        ex1, initialize_stabilizing(ex1, FeedbackMode::OutputFeedback), 60.0,
        0.002);
    ok = ok && err < 1e-3;
    err = worst_quadrature_error(
        ex2.game,
        initialize_stabilizing(ex2.game, FeedbackMode::OutputFeedback), 60.0,
        0.002);
    ok = ok && err < 1e-3;
    err = worst_quadrature_error(ex3.game, nash3.profile, 60.0, 0.002);
    ok = ok && err < 1e-3;
    err = worst_quadrature_error(
        ex4.game,
        initialize_stabilizing(ex4.game, FeedbackMode::OutputFeedback), 80.0,
        0.004);
    ok = ok && err < 1e-3;
    report(7, "worst-case costs match closed form and quadrature", ok,
           t.seconds());
  }

  // 8. Five-agent consensus end to end: synthesis at the published
  // budgets, disturbance rejection in simulation, and the efficiency
  // bound relative to cooperation.
  {
    Timer t;
    Eigen::VectorXd deltas(5);
    deltas << 1.30, 0.7, 1.30, 0.7, 1.30;
    EquilibriumRun run =
        run_sequential(ex4.game, deltas, FeedbackMode::OutputFeedback);
    bool ok = run.status == RunStatus::ScogceFound;
    if (ok) {
      Eigen::VectorXd exact = exact_worst_case_costs(ex4.game, run.profile);
      for (int i = 0; i < 5; ++i) ok = ok && exact(i) < deltas(i);
      std::printf("  5-agent costs:");
      for (int i = 0; i < 5; ++i) std::printf(" %.4f", exact(i));
      std::printf("\n");
      DisturbanceSignal d = parse_disturbance({"10*sin(t)*exp(-t)"});
      SimulationResult sim = simulate(ex4.game, run.profile, d, 12.0, 0.005);
      for (std::size_t k = 0; k < sim.times.size(); ++k)
        if (sim.times[k] >= 8.0)
          ok = ok && sim.error_norms.col(static_cast<Eigen::Index>(k))
                             .maxCoeff() < 1e-2;
      auto pos = price_of_stability(ex4.game, run.profile, coop4_full);
      ok = ok && pos && *pos <= deltas.sum() / coop4_full;
    }
    double secs = t.seconds();
    ok = ok && secs < 300.0;
    report(8, "5-agent synthesis, disturbance rejection, efficiency", ok,
           secs);
  }

  std::printf("%d criterion check(s) failed\n", n_failed);
  return n_failed == 0 ? 0 : 1;
}
