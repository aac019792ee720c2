#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace gmusic;

namespace {

ExperimentSpec tiny_spec() {
  return experiment_from_json(json::parse(R"({
    "d": 2, "m": [8, 12], "s": 2, "min_separation": 0.3, "sigma0": 0.05,
    "r": [-0.5, 0.5], "trials": 3, "percentile": 90, "base_seed": 7
  })"));
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST(Percentile, NearestRank) {
  EXPECT_EQ(nearest_rank_percentile({0.3}, 100.0), 0.3);
  EXPECT_EQ(nearest_rank_percentile({0.3}, 1.0), 0.3);
  std::vector<double> v{10, 1, 9, 2, 8, 3, 7, 4, 6, 5};
  EXPECT_EQ(nearest_rank_percentile(v, 90.0), 9.0);
  EXPECT_EQ(nearest_rank_percentile(v, 91.0), 10.0);
  EXPECT_EQ(nearest_rank_percentile(v, 50.0), 5.0);
  EXPECT_EQ(nearest_rank_percentile(v, 5.0), 1.0);
  EXPECT_THROW(nearest_rank_percentile({}, 50.0), InvalidArgument);
  EXPECT_THROW(nearest_rank_percentile(v, 0.0), InvalidArgument);
  EXPECT_THROW(nearest_rank_percentile(v, 100.5), InvalidArgument);
}

TEST(Ols, ExactLineAndNormalEquations) {
  LineFit f = ols({0, 1, 2, 3}, {1, -1, -3, -5});
  EXPECT_NEAR(f.slope, -2.0, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0, 1e-15);
  std::vector<double> x{0.1, 0.7, 1.3, 2.9, 3.3}, y{0.2, -0.1, 0.9, 1.1, 2.5};
  LineFit g = ols(x, y);
  Eigen::MatrixXd A(5, 2);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[static_cast<std::size_t>(i)];
    b[i] = y[static_cast<std::size_t>(i)];
  }
  Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
  EXPECT_NEAR(g.intercept, sol[0], 1e-13);
  EXPECT_NEAR(g.slope, sol[1], 1e-13);
  EXPECT_TRUE(std::isnan(ols({1.0}, {2.0}).slope));
  EXPECT_TRUE(std::isnan(ols({1.0, 1.0}, {2.0, 3.0}).slope));
}

TEST(ExperimentSpec, ParsingDefaultsAndErrors) {
  ExperimentSpec e = experiment_from_json(json::object());
  EXPECT_EQ(e.ms, (std::vector<int>{8, 16, 32, 64}));
  EXPECT_EQ(e.rs, (std::vector<double>{-0.5, 0.0, 0.5}));
  EXPECT_EQ(e.s, 16u);
  EXPECT_EQ(e.trials, 10);
  EXPECT_EQ(e.percentile, 90.0);
  EXPECT_EQ(e.pipeline.order_hint, 16);
  EXPECT_THROW(experiment_from_json(json::array()), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"trials": 0})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"percentile": 0})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"percentile": 101})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"m": []})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"m": "eight"})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"sigma0": -1})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"amplitudes": "given"})")), InvalidArgument);
  EXPECT_THROW(experiment_from_json(json::parse(R"({"pipeline": {"alpha1": 1.5}})")), InvalidArgument);
}

TEST(Experiment, NoiselessSkipsSlopeFit) {
  ExperimentSpec e = experiment_from_json(json::parse(R"({
    "d": 2, "m": [8, 12], "s": 3, "min_separation": 0.3, "sigma0": 0, "r": [0], "trials": 1
  })"));
  ExperimentResult res = run_experiment(e);
  ASSERT_EQ(res.cells.size(), 2u);
  for (const auto &c : res.cells) {
    EXPECT_TRUE(c.complete);
    EXPECT_LE(c.percentile_error, 1e-8);
    EXPECT_EQ(c.percentile_error, res.trials[c.m == 8 ? 0 : 1].error);
  }
  ASSERT_EQ(res.slopes.size(), 1u);
  EXPECT_TRUE(std::isnan(res.slopes[0].fit.slope));
  EXPECT_FALSE(res.slopes[0].note.empty());
}

TEST(Experiment, LayoutSeedsAndDeterminism) {
  ExperimentSpec e = tiny_spec();
  ExperimentResult a = run_experiment(e, 1), b = run_experiment(e, 2);
  ASSERT_EQ(a.trials.size(), 2u * 2u * 3u);
  ASSERT_EQ(a.cells.size(), 4u);
  for (std::size_t i = 0; i < a.trials.size(); ++i)
    EXPECT_EQ(a.trials[i].seed, 7u + static_cast<std::uint64_t>(a.trials[i].trial));
  EXPECT_EQ(min_separation(a.config.theta, Domain::torus(2)) >= 0.3, true);
  for (const auto &c : a.cells) {
    std::vector<double> errs;
    for (const auto &t : a.trials)
      if (t.m == c.m && t.r == c.r)
        errs.push_back(t.error);
    ASSERT_EQ(errs.size(), 3u);
    EXPECT_EQ(c.percentile_error, *std::max_element(errs.begin(), errs.end()));
  }
  for (const auto &s : a.slopes) {
    std::vector<double> x, y;
    for (int m : {8, 12}) {
      x.push_back(std::log(m));
      y.push_back(std::log(a.cell(m, s.r)->percentile_error));
    }
    if (s.excluded_m.empty()) {
      EXPECT_NEAR(s.fit.slope, (y[1] - y[0]) / (x[1] - x[0]), 1e-12);
    }
  }
  EXPECT_EQ(raw_csv(e, a), raw_csv(e, b));
  EXPECT_EQ(summary_csv(e, a), summary_csv(e, b));

  auto dir = std::filesystem::temp_directory_path() / "gmusic_harness_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_experiment(dir, e, a);
  EXPECT_EQ(slurp(dir / "raw.csv"), raw_csv(e, a));
  EXPECT_EQ(slurp(dir / "summary.csv"), summary_csv(e, a));
  json rep = load_json(dir / "report.json");
  EXPECT_EQ(rep.at("cells").size(), 4u);
  EXPECT_EQ(rep.at("config_seed").get<std::uint64_t>(), 7u + config_seed_offset);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, CsvSchema) {
  ExperimentSpec e = tiny_spec();
  e.rs = {0.0};
  e.ms = {8};
  e.trials = 2;
  ExperimentResult a = run_experiment(e);
  std::istringstream raw(raw_csv(e, a));
  std::string line;
  std::vector<std::string> data;
  while (std::getline(raw, line))
    if (!line.empty() && line[0] != '#')
      data.push_back(line);
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data[0], "m,r,trial,seed,error,detected_order,clusters,matvecs,status");
  EXPECT_EQ(data[1].rfind("8,0,0,7,", 0), 0u);
  std::istringstream sum(summary_csv(e, a));
  std::vector<std::string> srows;
  while (std::getline(sum, line))
    if (!line.empty() && line[0] != '#')
      srows.push_back(line);
  ASSERT_EQ(srows.size(), 3u);
  EXPECT_EQ(srows[0], "kind,r,m,value,count,note");
  EXPECT_EQ(srows[1].rfind("percentile_error,0,8,", 0), 0u);
  EXPECT_EQ(srows[2].rfind("slope,0,,", 0), 0u);
}
