#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "brute.hpp"
#include "homtest/harness.hpp"
#include "homtest/solver.hpp"
#include "homtest/testers.hpp"

using namespace homtest;

namespace {

Graph reflexive_path3() {
  return Graph::build({"a", "b", "c"}, {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}});
}

Graph k2() { return Graph::build({"0", "1"}, {{0, 1}}); }

Graph complete_bipartite(int a, int b) {
  std::vector<std::string> names;
  for (int i = 0; i < a + b; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < a; ++i)
    for (int j = a; j < a + b; ++j) edges.push_back({i, j});
  return Graph::build(names, edges);
}

Graph reflexive_complete(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) edges.push_back({i, j});
  return Graph::build(names, edges);
}

Graph cycle(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return Graph::build(names, edges);
}

}  // namespace

TEST_CASE("budget formulas") {
  TesterConfig cfg;
  cfg.epsilon = 0.2;
  REQUIRE(sample_count(4.0, 0.2) == 20);
  REQUIRE(sample_count(4.0, 0.3) == 14);  // ceil(13.33)
  REQUIRE(budget_reflexive_complete(cfg) == 20);
  REQUIRE(budget_icb(cfg) == 20 + 2 * 40);
  REQUIRE(pair_sample_count(8.0, 0.2, 100) == 179);  // ceil(8·sqrt(500))
  REQUIRE(budget_biarc(cfg, 100) == 20 + 2 * 179);
  REQUIRE_THROWS_AS(validate_epsilon(0.0), ContractError);
  REQUIRE_THROWS_AS(validate_epsilon(1.5), ContractError);
}

TEST_CASE("reflexive-complete tester: one-sided, budgeted, sound") {
  Graph h = reflexive_complete(3);
  PlantParams p;
  p.n = 40;
  p.m = 60;
  TesterConfig cfg;
  cfg.epsilon = 0.25;

  Planted planted = plant_instance(h, p, 11);
  for (std::uint64_t s = 0; s < 25; ++s) {
    CountingOracle oracle(planted.planted);
    cfg.seed = s;
    Verdict v = test_reflexive_complete(planted.instance, oracle, cfg);
    REQUIRE(v.decision == Decision::Accept);
    REQUIRE(v.queries <= budget_reflexive_complete(cfg));
  }

  // Rejection needs list violations; push the planted map far.
  FarCertificate far = perturb_to_far(planted.instance, planted.planted, 0.25, 5);
  int rejects = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    CountingOracle oracle(far.f);
    cfg.seed = s;
    Verdict v = test_reflexive_complete(planted.instance, oracle, cfg);
    rejects += v.decision == Decision::Reject;
    REQUIRE(v.queries <= budget_reflexive_complete(cfg));
  }
  REQUIRE(rejects >= 134);  // 2/3 of 200, with slack below the measured rate

  // The target contract is enforced.
  Instance wrong = make_instance(k2(), k2(), {{0, 1}, {0, 1}});
  CountingOracle oracle(planted.planted);
  REQUIRE_THROWS_AS(test_reflexive_complete(wrong, oracle, cfg), ContractError);
}

TEST_CASE("bare edge tester rejects odd cycles without querying") {
  Instance inst = make_instance(cycle(5), k2(),
                                std::vector<std::vector<int>>(5, {0, 1}));
  Assignment any{{0, 1, 0, 1, 0}};
  CountingOracle oracle(any);
  TesterConfig cfg;
  cfg.epsilon = 0.3;
  Verdict v = test_k2(inst, oracle, cfg);
  REQUIRE(v.decision == Decision::Reject);
  REQUIRE(v.queries == 0);
}

TEST_CASE("bare edge tester refuses disconnected inputs and wrong targets") {
  Graph two_edges = Graph::build({"a", "b", "c", "d"}, {{0, 1}, {2, 3}});
  Instance disc = make_instance(two_edges, k2(),
                                std::vector<std::vector<int>>(4, {0, 1}));
  Assignment f{{0, 1, 0, 1}};
  CountingOracle oracle(f);
  TesterConfig cfg;
  REQUIRE_THROWS_AS(test_k2(disc, oracle, cfg), ContractError);

  Instance wrong = make_instance(k2(), reflexive_complete(2), {{0, 1}, {0, 1}});
  REQUIRE_THROWS_AS(test_k2(wrong, oracle, cfg), ContractError);
}

TEST_CASE("constant map on the 4-cycle is half-far and gets caught") {
  // G = C4, H = K2, f ≡ 0: distance exactly 1/2.
  Instance inst = make_instance(cycle(4), k2(),
                                std::vector<std::vector<int>>(4, {0, 1}));
  Assignment f{{0, 0, 0, 0}};
  REQUIRE(distance_to_property(inst, f).distance == Catch::Approx(0.5));

  TesterConfig cfg;
  cfg.epsilon = 0.3;
  int rejects = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    CountingOracle oracle(f);
    cfg.seed = s;
    Verdict v = test_k2(inst, oracle, cfg);
    rejects += v.decision == Decision::Reject;
    REQUIRE(v.queries <= budget_k2(cfg));
  }
  REQUIRE(rejects >= 334);  // ≥ 2/3 of 500
}

TEST_CASE("bipartite tester wraps the edge tester per component") {
  Graph h = complete_bipartite(2, 3);
  PlantParams p;
  p.n = 50;
  p.m = 70;
  p.ensure_connected = true;
  Planted planted = plant_instance(h, p, 21);
  TesterConfig cfg;
  cfg.epsilon = 0.2;
  for (std::uint64_t s = 0; s < 25; ++s) {
    CountingOracle oracle(planted.planted);
    cfg.seed = s;
    Verdict v = test_icb(planted.instance, oracle, cfg);
    REQUIRE(v.decision == Decision::Accept);
    REQUIRE(v.queries <= budget_icb(cfg, 1));  // connected: one component stage
  }

  FarCertificate far = perturb_to_far(planted.instance, planted.planted, 0.2, 31);
  int rejects = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    CountingOracle oracle(far.f);
    cfg.seed = s;
    Verdict v = test_icb(planted.instance, oracle, cfg);
    rejects += v.decision == Decision::Reject;
  }
  REQUIRE(rejects >= 200);
}

TEST_CASE("bipartite tester accepts through an edgeless target") {
  Graph h = Graph::build({"p", "q"}, {});
  Graph g = Graph::build({"u", "v"}, {});
  Instance inst = make_instance(g, h, {{0, 1}, {0}});
  Assignment f{{1, 0}};
  CountingOracle oracle(f);
  TesterConfig cfg;
  cfg.epsilon = 0.5;
  Verdict v = test_icb(inst, oracle, cfg);
  REQUIRE(v.decision == Decision::Accept);
}

TEST_CASE("biarc tester is one-sided and stays within its budget") {
  Graph h = reflexive_path3();
  PlantParams p;
  p.n = 60;
  p.m = 100;
  Planted planted = plant_instance(h, p, 77);
  TesterConfig cfg;
  cfg.epsilon = 0.2;
  for (std::uint64_t s = 0; s < 25; ++s) {
    CountingOracle oracle(planted.planted);
    cfg.seed = s;
    Verdict v = test_biarc(planted.instance, oracle, cfg);
    REQUIRE(v.decision == Decision::Accept);
    REQUIRE(v.queries <= budget_biarc(cfg, planted.instance.n()));
  }
}

TEST_CASE("biarc tester rejects a far alternating map on the 6-cycle") {
  // G = C6 into the reflexive path; alternating a/c is 1/2-far.
  Graph h = reflexive_path3();
  Instance inst = make_instance(cycle(6), h, std::vector<std::vector<int>>(6, {0, 1, 2}));
  Assignment f{{0, 2, 0, 2, 0, 2}};
  REQUIRE(distance_to_property(inst, f).distance == Catch::Approx(0.5));
  TesterConfig cfg;
  cfg.epsilon = 0.3;
  ConsistencyFamily fam = run_minimality(inst);
  int rejects = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    CountingOracle oracle(f);
    cfg.seed = s;
    Verdict v = test_biarc_with_family(inst, fam, oracle, cfg);
    rejects += v.decision == Decision::Reject;
    REQUIRE(v.queries <= budget_biarc(cfg, inst.n()));
  }
  REQUIRE(rejects >= 334);
}

TEST_CASE("unsatisfiable instances are rejected with zero queries") {
  // Odd cycle into a bipartite target can never be satisfied.
  Instance inst = make_instance(cycle(3), complete_bipartite(2, 3),
                                std::vector<std::vector<int>>(3, {0, 1, 2, 3, 4}));
  TestContext ctx = prepare_test(inst);
  REQUIRE(!ctx.satisfiable);
  Assignment f{{0, 2, 0}};
  CountingOracle oracle(f);
  TesterConfig cfg;
  cfg.epsilon = 0.2;
  Verdict v = run_prepared(ctx, inst, oracle, cfg);
  REQUIRE(v.decision == Decision::Reject);
  REQUIRE(v.queries == 0);
}

TEST_CASE("dispatcher refuses targets with no sublinear tester") {
  Graph k3 = Graph::build({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}});
  Instance inst = make_instance(k2(), k3, {{0, 1, 2}, {0, 1, 2}});
  TestContext ctx = prepare_test(inst);
  Assignment f{{0, 1}};
  CountingOracle oracle(f);
  TesterConfig cfg;
  REQUIRE_THROWS_AS(run_prepared(ctx, inst, oracle, cfg), NoSublinearTesterError);
}

TEST_CASE("same seed, same transcript; trials amplify") {
  Graph h = reflexive_path3();
  PlantParams p;
  p.n = 30;
  p.m = 45;
  Planted planted = plant_instance(h, p, 3);
  TestContext ctx = prepare_test(planted.instance);
  TesterConfig cfg;
  cfg.epsilon = 0.2;
  cfg.seed = 99;

  CountingOracle o1(planted.planted), o2(planted.planted);
  Verdict a = run_prepared(ctx, planted.instance, o1, cfg);
  Verdict b = run_prepared(ctx, planted.instance, o2, cfg);
  REQUIRE(a.transcript.samples == b.transcript.samples);
  REQUIRE(a.transcript.notes == b.transcript.notes);
  REQUIRE(a.queries == b.queries);

  FarCertificate far = perturb_to_far(planted.instance, planted.planted, 0.2, 13);
  cfg.trials = 8;
  int rejects = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    cfg.seed = s;
    CountingOracle oracle(far.f);
    Verdict v = run_prepared(ctx, planted.instance, oracle, cfg);
    rejects += v.decision == Decision::Reject;
  }
  REQUIRE(rejects >= 58);  // single-run rate is already high; 8 trials ≈ always
}

TEST_CASE("off-list values at zero-weight vertices never trigger rejection") {
  Graph h = reflexive_path3();
  Graph g = Graph::build({"u", "v", "w"}, {{0, 1}});
  Instance inst = make_instance(g, h, {{0, 1}, {0, 1}, {1}}, {1.0, 1.0, 0.0});
  // w's value violates its list, but w carries no weight: distance stays 0.
  Assignment f{{0, 0, 2}};
  REQUIRE(distance_to_property(inst, f).distance == 0.0);
  TestContext ctx = prepare_test(inst);
  TesterConfig cfg;
  cfg.epsilon = 0.4;
  for (std::uint64_t s = 0; s < 40; ++s) {
    cfg.seed = s;
    CountingOracle oracle(f);
    Verdict v = run_prepared(ctx, inst, oracle, cfg);
    REQUIRE(v.decision == Decision::Accept);
  }
}

TEST_CASE("list stage rejects assignments that leave their lists") {
  Graph h = reflexive_complete(3);
  Graph g = Graph::build({"u", "v"}, {});
  Instance inst = make_instance(g, h, {{0}, {1}});
  Assignment off{{2, 2}};  // both vertices off-list, weight 1/2 each
  TesterConfig cfg;
  cfg.epsilon = 0.4;
  int rejects = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    cfg.seed = s;
    CountingOracle oracle(off);
    Verdict v = test_reflexive_complete(inst, oracle, cfg);
    rejects += v.decision == Decision::Reject;
    if (v.decision == Decision::Reject) {
      REQUIRE(v.transcript.first_violation.has_value());
    }
  }
  REQUIRE(rejects == 100);  // ε = 0.4 < off-list mass 1: every sample hits
}
