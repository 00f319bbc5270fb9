#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "compsim/corpus.hpp"
#include "compsim/embedding_cache.hpp"
#include "compsim/returns.hpp"
#include "compsim/synthetic.hpp"
#include "config.hpp"
#include "oracles.hpp"

using namespace compsim;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = COMPSIM_FIXTURES;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("compsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// data rows of a report, header first, '#' lines dropped
std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

fs::path fixture_config(const fs::path& dir, const std::string& corpus) {
  cli::RunConfig cfg;
  cfg.corpus = kFixtures + "/corpus/" + corpus;
  cfg.hierarchy = kFixtures + "/corpus/hierarchy.csv";
  cfg.returns = kFixtures + "/corpus/returns.csv";
  cfg.output_dir = (dir / "out").string();
  const auto path = dir / "config.json";
  cli::save_config(cfg, path.string());
  return path;
}

// One synthetic universe shared by the pipeline tests.
class Pipeline : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = fresh_dir("pipeline");
    const auto r = run({"synth", "--dir", dir_.string(), "--companies", "240", "--sectors", "4",
                        "--words", "300", "--outlier", "--seed", "3", "-q"});
    ASSERT_EQ(r.code, 0) << r.err;
    config_ = (dir_ / "config.json").string();
  }
  static Result cmd(std::vector<std::string> args) {
    args.insert(args.begin(), {"-q", "-c", config_});
    return run(args);
  }
  static fs::path out(const std::string& name) { return dir_ / "out" / name; }

  static inline fs::path dir_;
  static inline std::string config_;
};

} // namespace

TEST(Cli, IngestFixtureCorpus) {
  const auto dir = fresh_dir("ingest");
  const auto r = run({"-c", fixture_config(dir, "corpus.jsonl").string(), "ingest"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("companies: 3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("sectors: 2\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "corpus_summary.csv"));
}

TEST(Cli, BadCorpusLineExitsWithDataError) {
  const auto dir = fresh_dir("bad");
  const auto r = run({"-c", fixture_config(dir, "bad_corpus.jsonl").string(), "ingest"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
}

TEST(Cli, UnknownConfigKeyExitsWithUsageError) {
  const auto dir = fresh_dir("unknown_key");
  std::ofstream(dir / "config.json") << R"({"corpus": "x.jsonl", "clusterr": {}})";
  EXPECT_EQ(run({"-c", (dir / "config.json").string(), "ingest"}).code, 1);
  EXPECT_EQ(run({"-c", fixture_config(dir, "corpus.jsonl").string(), "-s", "similarity.nope=3", "ingest"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ConfigRoundTripAndHash) {
  cli::RunConfig cfg;
  cfg.cluster.n_clusters = {3, 7};
  cfg.provider.id = "hash-bow";
  const auto back = cli::from_json(cli::to_json(cfg));
  EXPECT_EQ(cli::to_json(back), cli::to_json(cfg));
  EXPECT_EQ(cli::config_hash(back), cli::config_hash(cfg));
  EXPECT_EQ(cli::config_hash(cfg).size(), 16u);
  cfg.split.seed = 9;
  EXPECT_NE(cli::config_hash(back), cli::config_hash(cfg));
}

TEST(Cli, ExecutableExitCodes) {
  const std::string tool = COMPSIM_TOOL;
  EXPECT_EQ(std::system((tool + " --help > /dev/null").c_str()), 0);
  const int status = std::system((tool + " frobnicate > /dev/null 2>&1").c_str());
  EXPECT_NE(status, 0);
}

TEST_F(Pipeline, IngestSharesMatchRecount) {
  const auto r = cmd({"ingest"});
  ASSERT_EQ(r.code, 0) << r.err;
  CorpusOptions o;
  const auto corpus = load_corpus((dir_ / "corpus.jsonl").string(), (dir_ / "hierarchy.csv").string(), o);
  std::map<std::string, int> counts;
  for (const auto& [id, s] : corpus.labels(GicsLevel::Sector)) ++counts[s];
  const auto table = rows(out("corpus_summary.csv"));
  ASSERT_EQ(table.size(), counts.size() + 1);
  for (std::size_t i = 1; i < table.size(); ++i) {
    EXPECT_EQ(std::stoi(table[i][1]), counts.at(table[i][0]));
    EXPECT_NEAR(std::stod(table[i][2]), static_cast<double>(counts.at(table[i][0])) / 240.0, 1e-4);
  }
}

TEST_F(Pipeline, EmbedIsResumable) {
  auto r = cmd({"embed"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = cmd({"embed"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("computed: 0\n"), std::string::npos) << r.out;

  const auto cache = out("embeddings.bin").string();
  const auto full = load_embeddings(cache);
  std::vector<std::string> keep(full.ids().begin() + 1, full.ids().end());
  fs::remove(cache);
  fs::remove(ids_sidecar_path(cache));
  save_embeddings(full.subset(keep), cache);
  r = cmd({"embed"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("computed: 1\n"), std::string::npos) << r.out;
  EXPECT_EQ(load_embeddings(cache).sorted(), full.sorted());
}

TEST_F(Pipeline, EndToEndIsFastDeterministicAndComplete) {
  const std::vector<std::string> steps = {"embed", "classify", "peers", "cluster", "attribute", "project", "outliers",
                                          "report"};
  const std::vector<std::string> reports = {"classification.csv", "similarity.csv", "cluster_sweep.csv",
                                            "attribution_summary.csv", "projection.csv", "outliers.csv", "summary.csv"};
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : steps) {
    const auto r = cmd({s});
    ASSERT_EQ(r.code, 0) << s << ": " << r.err;
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::minutes(2));
  std::map<std::string, std::string> first;
  for (const auto& name : reports) {
    ASSERT_TRUE(fs::exists(out(name))) << name;
    first[name] = slurp(out(name));
    EXPECT_NE(first[name].find("# compsim "), std::string::npos) << name;
  }
  for (const auto& s : steps) ASSERT_EQ(cmd({s}).code, 0) << s;
  for (const auto& name : reports) EXPECT_EQ(slurp(out(name)), first[name]) << name;
  EXPECT_EQ(rows(out("projection.csv")).size(), 241u);
}

TEST_F(Pipeline, PeersForOneCompany) {
  ASSERT_EQ(cmd({"embed"}).code, 0);
  const auto r = cmd({"peers", "--company", "C007", "--k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line;
  std::vector<double> sims;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("rank", 0) == 0) continue;
    sims.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    EXPECT_EQ(line.find("C007"), std::string::npos);
  }
  ASSERT_EQ(sims.size(), 5u);
  for (std::size_t i = 1; i < sims.size(); ++i) EXPECT_GE(sims[i - 1], sims[i]);
  EXPECT_EQ(cmd({"peers", "--company", "NOPE", "--k", "5"}).code, 1);
}

TEST_F(Pipeline, PlantedOutlierRanksInTopFivePercent) {
  ASSERT_EQ(cmd({"embed"}).code, 0);
  ASSERT_EQ(cmd({"outliers"}).code, 0);
  const auto universe = [] {
    SyntheticOptions o;
    o.n_companies = 240;
    o.n_sectors = 4;
    o.words_per_description = 300;
    o.plant_outlier = true;
    o.seed = 3;
    o.with_returns = false;
    return make_synthetic_universe(o);
  }();
  const auto table = rows(out("outliers.csv"));
  ASSERT_EQ(table.size(), 241u);
  std::size_t rank = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i][1] == *universe.outlier_id) rank = static_cast<std::size_t>(std::stoul(table[i][0]));
  }
  ASSERT_GT(rank, 0u);
  EXPECT_LE(rank, 12u);
}

TEST(Cli, ProjectionSeparatesOrthogonalSectors) {
  const auto dir = fresh_dir("orthogonal");
  SyntheticOptions o;
  o.n_companies = 80;
  o.n_sectors = 2;
  o.industries_per_sector = 1;
  o.sector_word_share = 1.0;
  o.industry_word_share = 0.0;
  o.words_per_description = 120;
  o.with_returns = false;
  o.seed = 2;
  const auto u = make_synthetic_universe(o);
  save_corpus(u.corpus, (dir / "corpus.jsonl").string());
  save_hierarchy(u.corpus.hierarchy(), (dir / "hierarchy.csv").string());
  cli::RunConfig cfg;
  cfg.fiscal_year = u.corpus.fiscal_year();
  save_config(cfg, (dir / "config.json").string());
  const std::vector<std::string> base = {"-q", "-c", (dir / "config.json").string()};
  auto with = [&](const std::string& c) {
    auto a = base;
    a.push_back(c);
    return run(a);
  };
  ASSERT_EQ(with("embed").code, 0);
  const auto r = with("project");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = rows(dir / "out" / "projection.csv");
  ASSERT_EQ(table.size(), 81u);
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (std::size_t i = 1; i < table.size(); ++i) {
    pts.push_back({std::stod(table[i][1]), std::stod(table[i][2])});
    labels.push_back(table[i][3]);
  }
  EXPECT_GT(compsim::testing::silhouette(pts, labels), 0.5);
}
