#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actnas/cost_table.hpp"
#include "actnas/model.hpp"

namespace actnas {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();
inline constexpr int kDefaultDiversity = 3;
inline constexpr int kDefaultRandomIterations = 10000;
inline constexpr int kRandomRejectionCap = 100;

/// Every search minimizes a cost. Latency and memory deltas are costs as-is;
/// accuracy deltas are negated (an accuracy loss is a cost). The budget
/// bounds the summed cost of budget_metric: sum of cost deltas <= budget_value.
struct SearchConstraints {
  Metric objective = Metric::Latency;
  Metric budget_metric = Metric::Accuracy;
  double budget_value = kUnbounded;
};

void validate(const SearchConstraints& constraints);

/// Delta matrix in cost orientation (accuracy negated).
Eigen::MatrixXd cost_view(const CostMatrix& matrix);

struct Proposal {
  Assignment assignment;
  /// Summed cost deltas, layer 0 first.
  double objective_total = 0.0;
  double budget_total = 0.0;
  std::size_t rank = 1;
  /// reference_total + summed natural-orientation deltas.
  double objective_predicted = 0.0;
  double budget_predicted = 0.0;
};

/// Objective and budget matrices checked against the constraints and
/// against each other (same layers, same columns).
class SearchProblem {
 public:
  SearchProblem(CostMatrix objective, CostMatrix budget, SearchConstraints constraints);

  const CostMatrix& objective_matrix() const { return objective_; }
  const CostMatrix& budget_matrix() const { return budget_; }
  const SearchConstraints& constraints() const { return constraints_; }
  const Eigen::MatrixXd& objective_cost() const { return objective_cost_; }
  const Eigen::MatrixXd& budget_cost() const { return budget_cost_; }
  const std::vector<ActivationKind>& columns() const { return objective_.columns; }
  std::size_t layers() const { return static_cast<std::size_t>(objective_cost_.rows()); }

  /// Fills totals for an assignment (rank left at 1).
  Proposal evaluate(std::span<const ActivationKind> assignment) const;
  bool feasible(const Proposal& proposal) const {
    return proposal.budget_total <= constraints_.budget_value;
  }

 private:
  CostMatrix objective_;
  CostMatrix budget_;
  SearchConstraints constraints_;
  Eigen::MatrixXd objective_cost_;
  Eigen::MatrixXd budget_cost_;
};

struct SearchResult {
  std::string method;
  SearchConstraints constraints;
  std::vector<Proposal> proposals;
  bool truncated = false;
};

/// Per layer: alt if its accuracy delta is strictly greater than base's,
/// otherwise base. Totals are accuracy costs (negated deltas).
Proposal lzcm_search(const CostMatrix& accuracy_matrix, ActivationKind base, ActivationKind alt);

/// First min(k, layers) slots `early`, the rest `rest`. Totals are zero.
Proposal naive_assignment(std::size_t layers, int k = 3,
                          ActivationKind early = ActivationKind::ReLU,
                          ActivationKind rest = ActivationKind::SiLU);
Proposal naive_assignment(const ModelSpec& model, int k = 3,
                          ActivationKind early = ActivationKind::ReLU,
                          ActivationKind rest = ActivationKind::SiLU);

/// Uniform per-layer sampling with up to kRandomRejectionCap resamples per
/// iteration; keeps the first strictly better feasible sample. Throws
/// NoSolutionError if no sample was feasible.
Proposal random_search(const SearchProblem& problem, int iterations, std::uint64_t seed);

/// Exact multiple-choice minimization by depth-first branch-and-bound,
/// followed by re-solves under no-good cuts that exclude everything within
/// Hamming distance < max(diversity, 1) of an earlier proposal. Ties go to
/// the lexicographically smallest assignment in column order. Throws
/// NoSolutionError if the first solve is infeasible; sets `truncated` when
/// fewer than top_k proposals exist. diversity must lie in [0, layers] when
/// top_k > 1.
SearchResult exact_search(const SearchProblem& problem, int top_k = 1,
                          int diversity = kDefaultDiversity);

// JSON result files.
std::string dump_result(const SearchResult& result);
SearchResult parse_result(std::string_view json_text);

}  // namespace actnas
