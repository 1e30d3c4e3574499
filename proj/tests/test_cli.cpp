#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "cli_harness.hpp"
#include "surfdist/fitting.hpp"
#include "surfdist/matching.hpp"
#include "surfdist/mesh.hpp"
#include "surfdist/serialization.hpp"

using namespace surfdist;
namespace fs = std::filesystem;

TEST(Cli, LatticeEntryCounts) {
  const auto dir = cli::scratch("lattice");
  ASSERT_EQ(cli::run("lattice --rays 6 --kind canonical", dir), 0);
  EXPECT_EQ(nlohmann::json::parse(cli::slurp(dir / "stdout.txt")).at("control_layout").size(), 38u);
  ASSERT_EQ(cli::run("lattice --rays 12 --out \"" + (dir / "l12.json").string() + "\"", dir), 0);
  EXPECT_EQ(nlohmann::json::parse(cli::slurp(dir / "l12.json")).at("control_layout").size(), 92u);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto dir = cli::scratch("usage");
  EXPECT_EQ(cli::run("lattice --rays 3", dir), 2);
  EXPECT_EQ(cli::run("lattice --rays 5 --kind canonical", dir), 2);
  EXPECT_EQ(cli::run("", dir), 2);
  EXPECT_EQ(cli::run("nonsense", dir), 2);
  EXPECT_EQ(cli::run("lattice", dir), 2);
  EXPECT_EQ(cli::run("reconstruct-sphere --kinds voxel", dir), 2);
  EXPECT_EQ(cli::run("--help", dir), 0);
}

TEST(Cli, IoErrorsExitThree) {
  const auto dir = cli::scratch("io");
  EXPECT_EQ(cli::run("reconstruct-sphere --radius 4 --rays 6 --out /nonexistent_dir/x.csv", dir), 3);
  EXPECT_EQ(cli::run("export-obj --instance \"" + (dir / "missing.json").string() + "\"", dir), 3);
  EXPECT_EQ(cli::run("evaluate --truth \"" + (dir / "a").string() + "\" --pred \"" + (dir / "b").string() + "\"", dir),
            3);
}

TEST(Cli, SchemaErrorReportsLine) {
  const auto dir = cli::scratch("schema");
  write_text_file((dir / "bad.json").string(),
                  "{\n  \"version\": 1,\n  \"rays\": 6,\n  \"kind\": \"canonical\",\n  \"center\": [0, 0],\n"
                  "  \"distances\": []\n}\n");
  EXPECT_EQ(cli::run("export-obj --instance \"" + (dir / "bad.json").string() + "\"", dir), 2);
  EXPECT_NE(cli::slurp(dir / "stderr.txt").find("bad.json:5:"), std::string::npos) << cli::slurp(dir / "stderr.txt");
}

TEST(Cli, ReconstructSphereCsv) {
  const auto dir = cli::scratch("reconstruct");
  const std::string args = "reconstruct-sphere --radius 4,8 --rays 6,12 --out \"" + (dir / "a.csv").string() + "\"";
  ASSERT_EQ(cli::run(args, dir), 0);
  const auto csv = cli::slurp(dir / "a.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  std::istringstream in(csv);
  std::string row;
  while (std::getline(in, row)) EXPECT_EQ(std::count(row.begin(), row.end(), ','), 6) << row;
  ASSERT_EQ(cli::run("reconstruct-sphere --radius 4,8 --rays 6,12 --out \"" + (dir / "b.csv").string() + "\"", dir), 0);
  EXPECT_EQ(csv, cli::slurp(dir / "b.csv"));
}

TEST(Cli, FitThenVoxelizeRecoversSphere) {
  const auto dir = cli::scratch("fit");
  const auto ball = sphere_mask(8);
  save_volume(ball, (dir / "ball").string());
  ASSERT_EQ(cli::run("fit --volume \"" + (dir / "ball").string() + "\" --instance-id 1 --rays 12 --out \"" +
                         (dir / "fit.json").string() + "\"",
                     dir),
            0)
      << cli::slurp(dir / "stderr.txt");
  ASSERT_EQ(cli::run("voxelize --instance \"" + (dir / "fit.json").string() + "\" --grid 17,17,17 --out \"" +
                         (dir / "vox").string() + "\"",
                     dir),
            0)
      << cli::slurp(dir / "stderr.txt");
  EXPECT_GE(pair_iou(load_volume((dir / "vox").string()), ball), 0.9);
}

TEST(Cli, ExportObjIsWatertight) {
  const auto dir = cli::scratch("obj");
  const auto lat = make_lattice({LatticeKind::canonical, 12, {1, 1, 1}});
  std::vector<double> d(lat->parameter_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 2.0 + 0.01 * static_cast<double>(i % 17);
  write_text_file((dir / "s.json").string(), instance_to_json(InstanceShape(lat, {1, 2, 3}, d)));
  for (int subdiv : {0, 1, 2}) {
    const auto obj = dir / ("s" + std::to_string(subdiv) + ".obj");
    ASSERT_EQ(cli::run("export-obj --instance \"" + (dir / "s.json").string() + "\" --subdiv " +
                           std::to_string(subdiv) + " --out \"" + obj.string() + "\"",
                       dir),
              0);
    std::istringstream in(cli::slurp(obj));
    const auto mesh = read_obj(in);
    EXPECT_EQ(mesh.faces.size(), 20u << (2 * subdiv));
    EXPECT_TRUE(audit_mesh(mesh).watertight());
  }
}

TEST(Cli, EvaluateCsv) {
  const auto dir = cli::scratch("evaluate");
  LabelVolume truth(Grid{1, 1, 20, {1, 1, 1}}), pred(Grid{1, 1, 20, {1, 1, 1}});
  for (int i = 0; i < 15; ++i) truth.labels[static_cast<std::size_t>(i)] = 1;
  for (int i = 4; i < 20; ++i) pred.labels[static_cast<std::size_t>(i)] = 1;
  save_volume(truth, (dir / "t").string());
  save_volume(pred, (dir / "p").string());
  ASSERT_EQ(cli::run("evaluate --truth \"" + (dir / "t").string() + "\" --pred \"" + (dir / "p").string() + "\"", dir),
            0);
  const auto csv = cli::slurp(dir / "stdout.txt");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,precision,recall,accuracy,f1,pq");
  EXPECT_NE(csv.find("\n0.5,1.000000,1.000000,1.000000,1.000000,0.550000\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n0.6,0.000000,"), std::string::npos);
  EXPECT_NE(csv.find("\nmean,0.555556,0.555556,"), std::string::npos) << csv;
}

TEST(Cli, NmsKeepsHighestOfDuplicates) {
  const auto dir = cli::scratch("nms");
  const auto lat = make_lattice({LatticeKind::canonical, 12, {1, 1, 1}});
  std::vector<Candidate> c{{InstanceShape::uniform(lat, {10, 10, 10}, 5), 0.7},
                           {InstanceShape::uniform(lat, {10, 10, 10}, 5), 0.9},
                           {InstanceShape::uniform(lat, {25, 25, 25}, 4), 0.8}};
  write_text_file((dir / "c.json").string(), candidates_to_json(c));
  ASSERT_EQ(cli::run("nms --candidates \"" + (dir / "c.json").string() + "\" --grid 32,32,32", dir), 0)
      << cli::slurp(dir / "stderr.txt");
  const auto j = nlohmann::json::parse(cli::slurp(dir / "stdout.txt"));
  EXPECT_EQ(j.at("kept"), (std::vector<int>{1, 2}));
  EXPECT_EQ(j.at("candidates").size(), 2u);
}

TEST(Cli, GradcheckPasses) {
  const auto dir = cli::scratch("gradcheck");
  EXPECT_EQ(cli::run("gradcheck --trials 100 --seed 0", dir), 0);
  EXPECT_NE(cli::slurp(dir / "stdout.txt").find("failures=0"), std::string::npos);
}

TEST(Cli, LossEval) {
  const auto dir = cli::scratch("loss");
  const auto ball = sphere_mask(6);
  save_volume(ball, (dir / "ball").string());
  const auto lat = make_lattice({LatticeKind::canonical, 6, {1, 1, 1}});
  write_text_file((dir / "s.json").string(), instance_to_json(InstanceShape::uniform(lat, {6, 6, 6}, 6.0)));
  ASSERT_EQ(cli::run("loss-eval --volume \"" + (dir / "ball").string() + "\" --instance \"" + (dir / "s.json").string() +
                         "\" --prob 0.5 --lambda-d 0",
                     dir),
            0)
      << cli::slurp(dir / "stderr.txt");
  const auto out = cli::slurp(dir / "stdout.txt");
  std::istringstream in(out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "z,y,x,p,p_hat,object,distance,total");
  // Center voxel: p = 1, so the object term is -ln 0.5.
  EXPECT_EQ(row.rfind("6,6,6,1,0.5,", 0), 0u) << row;
  EXPECT_NEAR(std::stod(row.substr(row.rfind(',') + 1)), std::log(2.0), 1e-12);
}
