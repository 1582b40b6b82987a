#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cuspidal/cli.hpp"
#include "support.hpp"

using namespace cuspidal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "cuspidal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path data_dir() {
  const fs::path d = fs::path(CUSPIDAL_TEST_DATA_DIR) / "cli_data";
  fs::create_directories(d);
  return d;
}

std::string write(const std::string& name, const std::string& content) {
  const fs::path f = data_dir() / name;
  std::ofstream(f, std::ios::binary) << content;
  return f.string();
}

std::string read(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string example_file() { return write("robot.json", R"({"d2": 1, "d3": 2, "d4": 1.5, "r2": 1, "r3": 0})"); }

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Cli, ClassifyReportsCuspidal) {
  const Outcome r = run({"classify", "--robot", example_file()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["result"]["verdict"], "cuspidal");
  EXPECT_EQ(j["result"]["cusp_count"], 4);
  EXPECT_EQ(j["command"], "classify");
  EXPECT_TRUE(j.contains("tolerances"));
}

TEST(Cli, InverseKinematicsAtTheReferencePoint) {
  const Outcome r = run({"ik", "--robot", example_file(), "--at", "2.5", "0", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j["result"]["count"], 4);
  for (const JointConfig& ref : test::printed_solutions()) {
    double best = 1e9;
    for (const Json& s : j["result"]["solutions"]) {
      const JointConfig q(s["theta1"].get<double>(), s["theta2"].get<double>(), s["theta3"].get<double>());
      best = std::min(best, test::max_joint_error(q, ref));
    }
    EXPECT_LT(best, 0.06);
  }
}

TEST(Cli, DegreesAreConvertedOnIngestion) {
  const std::string f = write("robot_deg.json", R"({"d2": 1, "d3": 2, "d4": 1.5, "r2": 1, "alpha2": -90, "alpha3": 90})");
  const Outcome a = run({"classify", "--robot", f, "--degrees"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(Json::parse(a.out)["result"]["cusp_count"], 4);
  EXPECT_NEAR(Json::parse(a.out)["robot"]["alpha3"].get<double>(), kPi / 2, 1e-15);
}

TEST(Cli, MalformedRobotFileExitsThree) {
  const Outcome a = run({"classify", "--robot", write("bad.json", "{\"d2\": 1, ")});
  EXPECT_EQ(a.code, 3);
  const Json e = Json::parse(a.err);
  EXPECT_EQ(e["error"]["kind"], "input_file");
  EXPECT_EQ(e["exit_code"], 3);
  EXPECT_EQ(run({"classify", "--robot", write("neg.json", R"({"d2": 1, "d3": -2, "d4": 1.5, "r2": 1})")}).code, 3);
  EXPECT_EQ(run({"classify", "--robot", (data_dir() / "missing.json").string()}).code, 3);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"classify", "--robot", example_file(), "--resolution", "100"}).code, 2);
  EXPECT_EQ(run({"classify", "--robot", example_file(), "--tol", "merge=-1"}).code, 2);
  EXPECT_EQ(run({"ik", "--robot", example_file()}).code, 2);
}

TEST(Cli, UnreachablePathStartExitsThree) {
  const std::string path = write("far.csv", "rho,z\n9,0\n3,0\n");
  EXPECT_EQ(run({"check-path", "--robot", example_file(), "--path", path}).code, 3);
}

TEST(Cli, SingularitiesSvgHasTwoCurvesAndFourCusps) {
  const fs::path out = data_dir() / "sing";
  const Outcome r = run({"singularities", "--robot", example_file(), "--out", out.string(), "--format", "svg", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = read(out / "singularities.svg");
  EXPECT_EQ(count_of(svg, "class=\"joint-curve\""), 2);
  EXPECT_EQ(count_of(svg, "class=\"cusp\""), 4);
  EXPECT_EQ(Json::parse(r.out)["result"]["cusps"].size(), 4u);
}

TEST(Cli, EmptyCuspListOmitsTheCuspLayer) {
  const std::string f = write("plain.json", R"({"d2": 1, "d3": 2, "d4": 1.5, "r2": 0})");
  const fs::path out = data_dir() / "plain";
  ASSERT_EQ(run({"singularities", "--robot", f, "--out", out.string(), "--format", "svg"}).code, 0);
  const std::string svg = read(out / "singularities.svg");
  EXPECT_EQ(svg.find("cusp"), std::string::npos);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
  const std::string chord = write("seg.csv", "rho,z\n3.8,0\n3.9,0.1\n");
  const std::vector<std::vector<std::string>> cmds = {
      {"classify"}, {"singularities"}, {"aspects"}, {"check-path", "--path", chord}};
  for (const auto& c : cmds) {
    std::vector<std::string> base = c;
    base.insert(base.end(), {"--robot", example_file(), "--format", "json", "--format", "csv", "--format", "svg",
                             "--resolution", "128"});
    if (c[0] == "check-path") base.resize(base.size() - 2);
    auto a = base, b = base;
    const fs::path da = data_dir() / ("det_a_" + c[0]), db = data_dir() / ("det_b_" + c[0]);
    fs::remove_all(da);
    fs::remove_all(db);
    a.insert(a.end(), {"--out", da.string()});
    b.insert(b.end(), {"--out", db.string()});
    const Outcome ra = run(a), rb = run(b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(ra.out, rb.out);
    int files = 0;
    for (const auto& e : fs::directory_iterator(da)) {
      EXPECT_EQ(read(e.path()), read(db / e.path().filename())) << e.path();
      ++files;
    }
    EXPECT_GT(files, 0) << c[0];
  }
}

TEST(Cli, PathFilesInBothFormats) {
  const std::string csv = write("p.csv", "rho,z\n3.8,0\n3.9,0.1\n");
  const std::string json = write("p.json", R"({"frame": "xyz", "waypoints": [[3.8, 0, 0], [3.9, 0, 0.1]]})");
  const Outcome a = run({"check-path", "--robot", example_file(), "--path", csv});
  const Outcome b = run({"check-path", "--robot", example_file(), "--path", json});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(Json::parse(a.out)["result"]["feasible_forward"], 2);
  EXPECT_EQ(Json::parse(b.out)["result"]["feasible_forward"], 2);
  EXPECT_EQ(run({"check-path", "--robot", example_file(), "--path", write("bad.csv", "a,b\n1,2\n")}).code, 3);
}

TEST(Cli, PlanBetweenAspectsIsImpossible) {
  const IkSolutionSet s = inverse_kinematics(test::example_robot(), IkTarget::planar(2.5, 0.5));
  const JointConfig q1 = test::closest(s, test::printed_solutions()[0])->q;
  const JointConfig q2 = test::closest(s, test::printed_solutions()[1])->q;
  auto str = [](double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
  };
  const Outcome r = run({"plan-posture-change", "--robot", example_file(), "--start", str(q2.theta1), str(q2.theta2),
                     str(q2.theta3), "--goal", str(q1.theta1), str(q1.theta2), str(q1.theta3), "--planner-grid", "128"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["result"]["found"], false);
}
