#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pcd/report.hpp"

using namespace pcd;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("table1 header and reference rows") {
  const auto lines = lines_of(table1_csv(10));
  CHECK(lines[0] == "K,z_star,p_star");
  bool saw1 = false, saw10 = false, saw100 = false;
  for (const auto& line : lines) {
    if (line.rfind("1,", 0) == 0 && split_csv(line)[0] == "1") {
      CHECK(line == "1,1.138,0.872");
      saw1 = true;
    }
    if (split_csv(line)[0] == "10") {
      CHECK(line == "10,0.497,0.690");
      saw10 = true;
    }
    if (split_csv(line)[0] == "100") {
      CHECK(line == "100,0.165,0.566");
      saw100 = true;
    }
  }
  CHECK(saw1);
  CHECK(saw10);
  CHECK(saw100);  // the canonical K set is included beyond kmax
}

TEST_CASE("table 2 bold row renders byte-exactly") {
  const std::string csv = table_csv(2, 3);
  const auto lines = lines_of(csv);
  CHECK(lines[0] == "K,d12,d13,d23,z1,z2,p1,p2,p3,crit,eff,best");
  bool found = false;
  for (const auto& line : lines) {
    if (line.rfind("2,2,1,1,", 0) == 0) {
      CHECK(line == "2,2,1,1,,,0.375,0.375,0.250,4.171,1.000,1");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("tables are byte-stable across invocations") {
  CHECK(table_csv(2, 4) == table_csv(2, 4));
  CHECK(table_csv(4, 3) == table_csv(4, 3));
  CHECK(table1_csv(6) == table1_csv(6));
}

TEST_CASE("csv probability rows sum to one at full precision") {
  const std::string csv = table_csv(3, 4, /*full_precision=*/true);
  const auto lines = lines_of(csv);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    REQUIRE(f.size() == 12);
    const double sum = std::stod(f[6]) + std::stod(f[7]) + std::stod(f[8]);
    CHECK(std::fabs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("table guards") {
  CHECK_THROWS_AS(table_csv(5, 3), std::invalid_argument);
  CHECK_THROWS_AS(table_csv(2, 13), std::invalid_argument);
  CHECK_THROWS_AS(table_csv(2, 1), std::invalid_argument);
}

TEST_CASE("table json carries collapsed-row annotations") {
  const json doc = json::parse(table_json(2, 2));
  CHECK(doc["table"] == 2);
  bool saw_collapsed = false;
  for (const auto& row : doc["rows"]) {
    if (row.contains("collapsed_pair")) {
      saw_collapsed = true;
      const double combined = row["collapsed_pair"]["combined_p23"];
      CHECK(combined == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
  CHECK(saw_collapsed);
}

TEST_CASE("verify suites pass and are reproducible") {
  for (const std::string suite : {"lemmas", "equivalence", "identities"}) {
    const VerifyReport rep = verify_report(suite, 42);
    CHECK(rep.passed);
    const json doc = json::parse(rep.json);
    CHECK(doc["passed"] == true);
    CHECK(doc["assertions"].size() > 0);
    for (const auto& a : doc["assertions"]) {
      CHECK(a["passed"] == true);
    }
  }
  const VerifyReport a = verify_report("mc", 42);
  const VerifyReport b = verify_report("mc", 42);
  CHECK(a.passed);
  CHECK(a.json == b.json);
  CHECK_THROWS_AS(verify_report("nope", 1), std::invalid_argument);
}

TEST_CASE("design report: paired comparisons") {
  RunConfig cfg;
  cfg.kmax = 2;  // K
  cfg.n_alternatives = 2;
  cfg.kind = ModelKind::kDependent;
  cfg.quantitative = true;
  cfg.beta2 = 1.0;
  const json doc = json::parse(design_report(cfg));
  CHECK(doc["model"] == "dependent");
  CHECK(doc["spec"]["K"] == 2);
  CHECK(doc.contains("support"));
  CHECK(doc.contains("information"));
  CHECK(doc.contains("criterion"));
  CHECK(doc["support"].size() == 4);
  CHECK(doc["z_star"].get<double>() == doctest::Approx(0.938).epsilon(1e-3));
  for (const auto& pt : doc["support"]) {
    const double diff = pt["alternatives"][0]["t"].get<double>() -
                        pt["alternatives"][1]["t"].get<double>();
    CHECK(diff == doctest::Approx(0.938).epsilon(1e-3));
    double sum = 0.0;
    for (const auto& p : pt["probs"]) sum += p.get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("design report: theorem-3 conditional settings") {
  RunConfig cfg;
  cfg.kmax = 1;
  cfg.n_alternatives = 2;
  cfg.kind = ModelKind::kDependent;
  cfg.sigma0_sq = 0.5;
  cfg.quantitative = true;
  cfg.beta1 = {1.0};
  cfg.beta2 = 2.0;
  const json doc = json::parse(design_report(cfg));
  bool saw = false;
  for (const auto& pt : doc["support"]) {
    if (pt["alternatives"][0]["levels"][0] == 1 &&
        pt["alternatives"][1]["levels"][0] == 2) {
      const double diff = pt["alternatives"][0]["t"].get<double>() -
                          pt["alternatives"][1]["t"].get<double>();
      CHECK(diff == doctest::Approx(-0.431).epsilon(2e-3));
      saw = true;
    }
  }
  CHECK(saw);
}

TEST_CASE("design report: best three-alternative orbit") {
  RunConfig cfg;
  cfg.kmax = 3;
  cfg.n_alternatives = 3;
  cfg.kind = ModelKind::kDependent;
  cfg.quantitative = true;
  cfg.sigma_t_sq = 0.0;  // sharp decision
  const json doc = json::parse(design_report(cfg));
  CHECK(doc["best_orbit"] == json::array({3, 2, 1}));
  double wsum = 0.0;
  for (const auto& pt : doc["support"]) wsum += pt["weight"].get<double>();
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));

  RunConfig big = cfg;
  big.kmax = 6;
  CHECK_THROWS_AS(design_report(big), std::invalid_argument);

  RunConfig degen = cfg;
  degen.beta2 = 0.0;
  CHECK_THROWS_AS(design_report(degen), std::invalid_argument);
}
