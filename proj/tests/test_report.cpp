#include <doctest.h>

#include <cmath>
#include <sstream>

#include "actnas/error.hpp"
#include "actnas/report.hpp"

using namespace actnas;

namespace {

CostMatrix two_layer_matrix(std::string device, double reference) {
  CostMatrix m;
  m.metric = Metric::Latency;
  m.device = std::move(device);
  m.reference_total = reference;
  m.layer_names = {"a", "b"};
  m.columns = {kAllActivations.begin(), kAllActivations.end()};
  m.values.resize(2, 5);
  // Reference assignment is SiLU everywhere, so the SiLU column is zero.
  m.values << -2.0, 0.0, -1.0, -1.8, -1.5,
              -3.0, 0.0, -2.0, -2.5, -2.2;
  return m;
}

}  // namespace

TEST_CASE("rounding and fixed formatting") {
  CHECK(format_fixed2(22.2772) == "22.28");
  CHECK(format_fixed2(0.0) == "0.00");
  CHECK(format_fixed2(-0.001) == "0.00");
  CHECK(format_fixed2(-21.5409) == "-21.54");
  CHECK(round_half_away(-2.5, 0) == -3.0);
  CHECK(round_half_away(1.005 * 1000, 0) == 1005.0);
}

TEST_CASE("improvement cells") {
  CHECK(format_fixed2(improvement_pct(22.35, 17.37)) == "22.28");
  CHECK(format_fixed2(improvement_pct(937.89, 809.96)) == "13.64");
  CHECK(format_fixed2(improvement_pct(1230, 441)) == "64.15");
  CHECK(format_fixed2(improvement_pct(25.63, 31.15)) == "-21.54");
  CHECK(format_fixed2(improvement_pct(5.0, 5.0)) == "0.00");
  CHECK_THROWS_AS(improvement_pct(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(improvement_pct(-1.0, 1.0), ConfigError);
}

TEST_CASE("report rows and percentages") {
  const std::vector<LabeledValues> models = {
      {"exact1", {17.37, 809.96}},
      {"uniform_silu", {22.35, 937.89}},
      {"uniform_hardswish", {18.53, 900.0}},
  };
  const Report r = build_report("latency (ms)", {"npu", "gpu"}, models,
                                {"uniform_silu", "uniform_hardswish"});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].label == "uniform_silu");
  CHECK(r.rows[0].baseline);
  CHECK(r.rows[1].label == "uniform_hardswish");
  const ReportRow& row = r.rows[2];
  CHECK_FALSE(row.baseline);
  REQUIRE(row.improvements.size() == 2);
  CHECK(format_fixed2(row.improvements[0][0]) == "22.28");
  CHECK(std::abs(row.improvements[0][0] - (22.35 - 17.37) / 22.35 * 100) < 0.005);
  CHECK(std::abs(row.improvements[0][1] - (18.53 - 17.37) / 18.53 * 100) < 0.005);
  CHECK(format_fixed2(row.improvements[1][0]) == "13.64");

  CHECK_THROWS_AS(build_report("x", {"npu", "gpu"}, models, {"uniform_relu"}), ConfigError);
  CHECK_THROWS_AS(build_report("x", {"npu"}, models, {"uniform_silu"}), ConfigError);
}

TEST_CASE("text and csv layouts") {
  const Report r = build_report("latency (ms)", {"npu"},
                                {{"uniform_silu", {22.35}}, {"exact1", {17.37}}}, {"uniform_silu"});
  const std::string csv = format_report_csv(r);
  CHECK(csv ==
        "model,npu,npu_vs_uniform_silu_pct\n"
        "uniform_silu,22.35,\n"
        "exact1,17.37,22.28\n");
  const std::string text = format_report_text(r);
  CHECK(text.find("22.28%") != std::string::npos);
  CHECK(text.find("npu latency (ms)") != std::string::npos);
  // Every line of the table body has the same width.
  std::istringstream lines(text);
  std::string line;
  std::size_t width = 0;
  while (std::getline(lines, line)) {
    if (width == 0) width = line.size();
    CHECK(line.size() == width);
  }
}

TEST_CASE("values csv") {
  std::istringstream in(
      "label,device,value\n"
      "uniform_silu,npu,22.35\n"
      "exact1,npu,17.37\n"
      "uniform_silu,gpu,937.89\n"
      "exact1,gpu,809.96\n");
  std::vector<std::string> devices;
  const auto models = read_values_csv(in, devices);
  CHECK(devices == std::vector<std::string>{"npu", "gpu"});
  REQUIRE(models.size() == 2);
  CHECK(models[1].label == "exact1");
  CHECK(models[1].values == std::vector<double>{17.37, 809.96});

  std::istringstream bad_header("name,device,value\n");
  CHECK_THROWS_AS(read_values_csv(bad_header, devices), ConfigError);
  std::istringstream missing("label,device,value\na,npu,1\nb,gpu,2\n");
  CHECK_THROWS_AS(read_values_csv(missing, devices), ConfigError);
  std::istringstream malformed("label,device,value\na;npu;1\n");
  CHECK_THROWS_AS(read_values_csv(malformed, devices), ConfigError);
}

TEST_CASE("report over cost matrices") {
  const std::vector<CostMatrix> ms = {two_layer_matrix("npu", 10.0), two_layer_matrix("gpu", 20.0)};
  const Assignment relu(2, ActivationKind::ReLU);
  const Report r = report_from_matrices(ms, {{"exact1", relu}},
                                        {ActivationKind::SiLU, ActivationKind::Hardswish});
  CHECK(r.metric_label == "latency (ms)");
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].label == "uniform_silu");
  CHECK(r.rows[0].values == std::vector<double>{10.0, 20.0});
  CHECK(r.rows[1].values == std::vector<double>{7.0, 17.0});
  CHECK(r.rows[2].values == std::vector<double>{5.0, 15.0});
  CHECK(r.rows[2].improvements[0][0] == doctest::Approx(50.0));
  CHECK(r.rows[2].improvements[1][1] == doctest::Approx((17.0 - 15.0) / 17.0 * 100));

  CHECK_THROWS_AS(report_from_matrices({}, {}, {ActivationKind::SiLU}), ConfigError);
  std::vector<CostMatrix> mixed = ms;
  mixed[1].metric = Metric::Memory;
  CHECK_THROWS_AS(report_from_matrices(mixed, {}, {ActivationKind::SiLU}), ConfigError);
}
