#ifndef PCD_REPORT_HPP
#define PCD_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcd/choice_model.hpp"

namespace pcd {

// Everything a CLI invocation needs; flags override config-file values.
struct RunConfig {
  int kmax = 7;
  int table_id = 2;  // 2, 3 or 4
  ModelKind kind = ModelKind::kDependent;
  std::optional<double> sigma0_sq;   // default 1/(2K): sigma_max = 1
  double sigma_t_sq = 0.0;
  int n_alternatives = 2;            // design command: m in {2,3}
  int n_levels = 2;
  bool quantitative = false;
  std::vector<double> beta1;         // empty: indifference
  double beta2 = 1.0;
  std::uint64_t seed = 42;
  bool full_precision = false;
};

// CSV table of optimal standardized settings for paired comparisons:
// header "K,z_star,p_star"; rows for K in {1..kmax} united with the
// canonical set {1,2,4,8,10,50,100}.
std::string table1_csv(int kmax, bool full_precision = false);

// CSV with header "K,d12,d13,d23,z1,z2,p1,p2,p3,crit,eff,best".
//   id 2: dependent utilities, qualitative only (z columns empty)
//   id 3: independent utilities plus quantitative attribute
//   id 4: dependent utilities, quantitative attribute, sharp decision
std::string table_csv(int table_id, int kmax, bool full_precision = false);

// Same content as a JSON document (always full precision); collapsed rows
// carry a "collapsed_pair" annotation with the combined probability.
std::string table_json(int table_id, int kmax);
std::string table1_json(int kmax);

struct VerifyReport {
  bool passed = false;
  std::string json;  // one entry per assertion with observed margins
};

// suite is one of "lemmas", "equivalence", "mc", "identities".
VerifyReport verify_report(const std::string& suite, std::uint64_t seed);

// JSON document with fields model, spec, support, information, criterion.
std::string design_report(const RunConfig& cfg);

}  // namespace pcd

#endif  // PCD_REPORT_HPP
