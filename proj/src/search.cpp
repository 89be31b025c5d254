#include "actnas/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

namespace actnas {

using nlohmann::json;

void validate(const SearchConstraints& c) {
  if (c.objective == c.budget_metric) {
    throw ConfigError("objective and budget metric must differ");
  }
  if (std::isnan(c.budget_value)) throw ConfigError("budget value is NaN");
}

Eigen::MatrixXd cost_view(const CostMatrix& matrix) {
  return matrix.metric == Metric::Accuracy ? Eigen::MatrixXd(-matrix.values) : matrix.values;
}

SearchProblem::SearchProblem(CostMatrix objective, CostMatrix budget, SearchConstraints constraints)
    : objective_(std::move(objective)), budget_(std::move(budget)), constraints_(constraints) {
  validate(constraints_);
  if (objective_.metric != constraints_.objective || budget_.metric != constraints_.budget_metric) {
    throw ConfigError("matrix metrics do not match the search constraints");
  }
  if (objective_.layers() == 0 || objective_.columns.empty()) {
    throw ConfigError("objective matrix is empty");
  }
  if (objective_.layers() != budget_.layers() || objective_.columns != budget_.columns) {
    throw ConfigError("objective and budget matrices have different layers or columns");
  }
  if (objective_.values.hasNaN() || budget_.values.hasNaN()) {
    throw ConfigError("cost matrices contain NaN");
  }
  objective_cost_ = cost_view(objective_);
  budget_cost_ = cost_view(budget_);
}

Proposal SearchProblem::evaluate(std::span<const ActivationKind> assignment) const {
  if (assignment.size() != layers()) throw ConfigError("assignment length does not match matrices");
  Proposal p;
  p.assignment.assign(assignment.begin(), assignment.end());
  for (std::size_t l = 0; l < assignment.size(); ++l) {
    const auto c = objective_.column(assignment[l]);
    p.objective_total += objective_cost_(static_cast<Eigen::Index>(l), c);
    p.budget_total += budget_cost_(static_cast<Eigen::Index>(l), c);
  }
  p.objective_predicted = predicted_total(objective_, assignment);
  p.budget_predicted = predicted_total(budget_, assignment);
  return p;
}

Proposal lzcm_search(const CostMatrix& accuracy_matrix, ActivationKind base, ActivationKind alt) {
  if (accuracy_matrix.metric != Metric::Accuracy) {
    throw ConfigError("lzcm_search needs an accuracy matrix");
  }
  const auto base_col = accuracy_matrix.column(base);
  const auto alt_col = accuracy_matrix.column(alt);
  Proposal p;
  for (Eigen::Index l = 0; l < accuracy_matrix.layers(); ++l) {
    const bool keep_alt = accuracy_matrix.values(l, alt_col) > accuracy_matrix.values(l, base_col);
    p.assignment.push_back(keep_alt ? alt : base);
    p.objective_total += -accuracy_matrix.values(l, keep_alt ? alt_col : base_col);
  }
  p.objective_predicted = predicted_total(accuracy_matrix, p.assignment);
  return p;
}

Proposal naive_assignment(std::size_t layers, int k, ActivationKind early, ActivationKind rest) {
  if (k < 0) throw ConfigError("naive_assignment: k must be >= 0");
  Proposal p;
  p.assignment.assign(layers, rest);
  std::fill_n(p.assignment.begin(), std::min(static_cast<std::size_t>(k), layers), early);
  return p;
}

Proposal naive_assignment(const ModelSpec& model, int k, ActivationKind early, ActivationKind rest) {
  return naive_assignment(model.size(), k, early, rest);
}

Proposal random_search(const SearchProblem& problem, int iterations, std::uint64_t seed) {
  if (iterations < 1) throw ConfigError("random_search: iterations must be >= 1");
  const auto& obj = problem.objective_cost();
  const auto& bud = problem.budget_cost();
  const std::size_t layers = problem.layers();
  const double budget = problem.constraints().budget_value;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, obj.cols() - 1);
  std::vector<Eigen::Index> sample(layers);
  std::vector<Eigen::Index> best;
  double best_obj = 0.0;

  for (int it = 0; it < iterations; ++it) {
    for (int attempt = 0; attempt < kRandomRejectionCap; ++attempt) {
      double b = 0.0;
      for (std::size_t l = 0; l < layers; ++l) {
        sample[l] = pick(rng);
        b += bud(static_cast<Eigen::Index>(l), sample[l]);
      }
      if (!(b <= budget)) continue;
      double o = 0.0;
      for (std::size_t l = 0; l < layers; ++l) o += obj(static_cast<Eigen::Index>(l), sample[l]);
      if (best.empty() || o < best_obj) {
        best = sample;
        best_obj = o;
      }
      break;
    }
  }
  if (best.empty()) {
    throw NoSolutionError("random search found no assignment within the budget after " +
                          std::to_string(iterations) + " iterations");
  }
  Assignment assignment;
  for (Eigen::Index c : best) assignment.push_back(problem.columns()[static_cast<std::size_t>(c)]);
  return problem.evaluate(assignment);
}

namespace {

// Depth-first branch-and-bound over one activation choice per layer.
//
// Bounds at a node (layer l, partial sums): the budget can still be met only
// if partial_bud + sum of per-layer budget minima <= budget; the objective is
// at least the LP relaxation of the remaining multiple-choice problem, which
// is solved greedily over the lower convex hull of each layer's
// (budget, objective) points.
class BranchAndBound {
 public:
  explicit BranchAndBound(const SearchProblem& problem)
      : obj_(problem.objective_cost()),
        bud_(problem.budget_cost()),
        budget_(problem.constraints().budget_value),
        layers_(problem.layers()) {
    suffix_obj_.assign(layers_ + 1, 0.0);
    suffix_bud_.assign(layers_ + 1, 0.0);
    double magnitude = 0.0;
    for (std::size_t l = layers_; l-- > 0;) {
      const auto row = static_cast<Eigen::Index>(l);
      suffix_obj_[l] = suffix_obj_[l + 1] + obj_.row(row).minCoeff();
      suffix_bud_[l] = suffix_bud_[l + 1] + bud_.row(row).minCoeff();
      magnitude += obj_.row(row).cwiseAbs().maxCoeff() + bud_.row(row).cwiseAbs().maxCoeff();
    }
    const bool finite = obj_.allFinite() && bud_.allFinite();
    // Summation-order rounding between a bound and any leaf below it.
    slack_ = finite ? 8.0 * static_cast<double>(layers_ + 2) *
                          std::numeric_limits<double>::epsilon() * (magnitude + (std::isfinite(budget_) ? std::abs(budget_) : 0.0))
                    : 0.0;
    use_lp_ = finite && std::isfinite(budget_);
    if (use_lp_) init_hulls();

    cheapest_.resize(layers_);
    for (std::size_t l = 0; l < layers_; ++l) {
      const auto row = static_cast<Eigen::Index>(l);
      auto& order = cheapest_[l];
      order.resize(static_cast<std::size_t>(obj_.cols()));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return obj_(row, a) < obj_(row, b); });
    }
  }

  // Lexicographically first minimum among assignments at Hamming distance
  // >= min_distance from every excluded assignment. Phase one finds the
  // optimal value with cheapest-child-first ordering; phase two walks in
  // column order and stops at the first leaf reaching that value.
  std::optional<std::vector<Eigen::Index>> solve(const std::vector<std::vector<Eigen::Index>>& excluded,
                                                 std::size_t min_distance) {
    excluded_ = &excluded;
    min_distance_ = min_distance;
    distance_.assign(excluded.size(), 0);
    current_.assign(layers_, 0);
    best_.clear();
    have_best_ = false;
    lexicographic_ = false;
    found_ = false;
    dfs(0, 0.0, 0.0);
    if (!have_best_) return std::nullopt;

    lexicographic_ = true;
    found_ = false;
    dfs(0, 0.0, 0.0);
    return best_;
  }

 private:
  struct Segment {
    std::size_t layer;
    double budget_saved;
    double objective_added;
    double slope;
  };

  void init_hulls() {
    start_obj_.assign(layers_ + 1, 0.0);
    start_bud_.assign(layers_ + 1, 0.0);
    for (std::size_t l = layers_; l-- > 0;) {
      const auto row = static_cast<Eigen::Index>(l);
      // Start at the objective minimum (least budget among ties).
      Eigen::Index start = 0;
      for (Eigen::Index c = 1; c < obj_.cols(); ++c) {
        if (obj_(row, c) < obj_(row, start) ||
            (obj_(row, c) == obj_(row, start) && bud_(row, c) < bud_(row, start))) {
          start = c;
        }
      }
      start_obj_[l] = start_obj_[l + 1] + obj_(row, start);
      start_bud_[l] = start_bud_[l + 1] + bud_(row, start);

      std::vector<std::pair<double, double>> pts;  // (budget, objective), budget <= start's
      for (Eigen::Index c = 0; c < obj_.cols(); ++c) {
        if (bud_(row, c) <= bud_(row, start)) pts.emplace_back(bud_(row, c), obj_(row, c));
      }
      std::sort(pts.begin(), pts.end());
      std::vector<std::pair<double, double>> hull;
      for (const auto& p : pts) {
        if (!hull.empty() && hull.back().first == p.first) continue;  // keeps min objective
        while (hull.size() >= 2) {
          const auto& a = hull[hull.size() - 2];
          const auto& b = hull.back();
          const double cross = (b.first - a.first) * (p.second - a.second) -
                               (b.second - a.second) * (p.first - a.first);
          if (cross > 0.0) break;
          hull.pop_back();
        }
        hull.push_back(p);
      }
      for (std::size_t k = hull.size(); k-- > 1;) {
        const double saved = hull[k].first - hull[k - 1].first;
        const double added = hull[k - 1].second - hull[k].second;
        segments_.push_back({l, saved, std::max(added, 0.0), std::max(added, 0.0) / saved});
      }
    }
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const Segment& a, const Segment& b) { return a.slope < b.slope; });
  }

  double lp_bound(std::size_t layer, double remaining_budget) const {
    double bound = start_obj_[layer];
    double excess = start_bud_[layer] - remaining_budget;
    for (const Segment& s : segments_) {
      if (excess <= 0.0) break;
      if (s.layer < layer) continue;
      const double fraction = std::min(1.0, excess / s.budget_saved);
      bound += fraction * s.objective_added;
      excess -= fraction * s.budget_saved;
    }
    return bound;
  }

  bool prune(std::size_t layer, double partial_obj, double partial_bud) const {
    if (partial_bud + suffix_bud_[layer] - slack_ > budget_) return true;
    const std::size_t remaining = layers_ - layer;
    for (std::size_t d : distance_) {
      if (d + remaining < min_distance_) return true;
    }
    if (!have_best_) return false;
    // Phase one only needs strictly better leaves; phase two also needs ties.
    const auto beyond = [&](double bound, double margin) {
      return lexicographic_ ? bound - margin > best_obj_ : bound - margin >= best_obj_;
    };
    if (beyond(partial_obj + suffix_obj_[layer], slack_)) return true;
    if (use_lp_) {
      // The LP mixes ratios of deltas; allow a wider rounding margin.
      if (beyond(partial_obj + lp_bound(layer, budget_ - partial_bud + slack_), 64.0 * slack_)) {
        return true;
      }
    }
    return false;
  }

  void dfs(std::size_t layer, double partial_obj, double partial_bud) {
    if (layer == layers_) {
      if (!(partial_bud <= budget_)) return;
      for (std::size_t d : distance_) {
        if (d < min_distance_) return;
      }
      if (lexicographic_) {
        if (partial_obj <= best_obj_) {
          best_ = current_;
          found_ = true;
        }
      } else if (!have_best_ || partial_obj < best_obj_) {
        best_ = current_;
        best_obj_ = partial_obj;
        have_best_ = true;
      }
      return;
    }
    if (prune(layer, partial_obj, partial_bud)) return;
    const auto row = static_cast<Eigen::Index>(layer);
    for (Eigen::Index k = 0; k < obj_.cols() && !found_; ++k) {
      const Eigen::Index c = lexicographic_ ? k : cheapest_[layer][static_cast<std::size_t>(k)];
      current_[layer] = c;
      for (std::size_t e = 0; e < excluded_->size(); ++e) {
        distance_[e] += (*excluded_)[e][layer] != c;
      }
      dfs(layer + 1, partial_obj + obj_(row, c), partial_bud + bud_(row, c));
      for (std::size_t e = 0; e < excluded_->size(); ++e) {
        distance_[e] -= (*excluded_)[e][layer] != c;
      }
    }
  }

  const Eigen::MatrixXd& obj_;
  const Eigen::MatrixXd& bud_;
  double budget_;
  std::size_t layers_;
  std::vector<double> suffix_obj_;
  std::vector<double> suffix_bud_;
  double slack_ = 0.0;
  bool use_lp_ = false;
  std::vector<double> start_obj_;
  std::vector<double> start_bud_;
  std::vector<Segment> segments_;
  std::vector<std::vector<Eigen::Index>> cheapest_;

  const std::vector<std::vector<Eigen::Index>>* excluded_ = nullptr;
  std::size_t min_distance_ = 0;
  std::vector<std::size_t> distance_;
  std::vector<Eigen::Index> current_;
  std::vector<Eigen::Index> best_;
  double best_obj_ = 0.0;
  bool have_best_ = false;
  bool lexicographic_ = false;
  bool found_ = false;
};

}  // namespace

SearchResult exact_search(const SearchProblem& problem, int top_k, int diversity) {
  if (top_k < 1) throw ConfigError("exact_search: top_k must be >= 1");
  if (diversity < 0 || (top_k > 1 && static_cast<std::size_t>(diversity) > problem.layers())) {
    throw ConfigError("exact_search: diversity must be in [0, layers]");
  }
  SearchResult result;
  result.method = "exact";
  result.constraints = problem.constraints();

  BranchAndBound solver(problem);
  std::vector<std::vector<Eigen::Index>> found;
  const auto min_distance = static_cast<std::size_t>(std::max(diversity, 1));
  while (static_cast<int>(found.size()) < top_k) {
    auto solution = solver.solve(found, min_distance);
    if (!solution) break;
    found.push_back(*solution);
    Assignment assignment;
    for (Eigen::Index c : *solution) assignment.push_back(problem.columns()[static_cast<std::size_t>(c)]);
    Proposal p = problem.evaluate(assignment);
    p.rank = found.size();
    result.proposals.push_back(std::move(p));
  }
  if (result.proposals.empty()) {
    throw NoSolutionError("no assignment satisfies " +
                          std::string(to_string(problem.constraints().budget_metric)) +
                          " budget " + format_double(problem.constraints().budget_value));
  }
  result.truncated = static_cast<int>(result.proposals.size()) < top_k;
  return result;
}

// --- JSON -------------------------------------------------------------------

namespace {

json number_to_json(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

double number_from_json(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

std::string dump_result(const SearchResult& result) {
  json proposals = json::array();
  for (const Proposal& p : result.proposals) {
    json names = json::array();
    for (ActivationKind kind : p.assignment) names.push_back(to_string(kind));
    proposals.push_back({{"rank", p.rank},
                         {"assignment", names},
                         {"objective_total", number_to_json(p.objective_total)},
                         {"budget_total", number_to_json(p.budget_total)},
                         {"objective_predicted", number_to_json(p.objective_predicted)},
                         {"budget_predicted", number_to_json(p.budget_predicted)}});
  }
  json j = {{"method", result.method},
            {"constraints",
             {{"objective", to_string(result.constraints.objective)},
              {"budget_metric", to_string(result.constraints.budget_metric)},
              {"budget_value", number_to_json(result.constraints.budget_value)}}},
            {"proposals", proposals},
            {"truncated", result.truncated}};
  return j.dump(2) + "\n";
}

SearchResult parse_result(std::string_view json_text) {
  SearchResult result;
  try {
    const json j = json::parse(json_text);
    result.method = j.at("method").get<std::string>();
    const json& c = j.at("constraints");
    result.constraints.objective = parse_metric(c.at("objective").get<std::string>());
    result.constraints.budget_metric = parse_metric(c.at("budget_metric").get<std::string>());
    result.constraints.budget_value = number_from_json(c.at("budget_value"));
    for (const json& pj : j.at("proposals")) {
      Proposal p;
      p.rank = pj.at("rank").get<std::size_t>();
      for (const json& name : pj.at("assignment")) {
        p.assignment.push_back(parse_activation(name.get<std::string>()));
      }
      p.objective_total = number_from_json(pj.at("objective_total"));
      p.budget_total = number_from_json(pj.at("budget_total"));
      if (pj.contains("objective_predicted")) p.objective_predicted = number_from_json(pj["objective_predicted"]);
      if (pj.contains("budget_predicted")) p.budget_predicted = number_from_json(pj["budget_predicted"]);
      result.proposals.push_back(std::move(p));
    }
    result.truncated = j.value("truncated", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed search result: ") + e.what());
  }
  return result;
}

}  // namespace actnas
