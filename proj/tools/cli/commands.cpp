#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "compsim/attribution.hpp"
#include "compsim/classify.hpp"
#include "compsim/cluster.hpp"
#include "compsim/corpus.hpp"
#include "compsim/csv.hpp"
#include "compsim/embed.hpp"
#include "compsim/embedding_cache.hpp"
#include "compsim/error.hpp"
#include "compsim/remote.hpp"
#include "compsim/returns.hpp"
#include "compsim/similarity.hpp"
#include "compsim/synthetic.hpp"
#include "compsim/textprep.hpp"
#include "config.hpp"

namespace compsim::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  RunConfig cfg;
  std::string hash;
  bool quiet = false;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& message) const {
    if (!quiet) err << message << '\n';
  }

  fs::path output(const std::string& name) const {
    fs::create_directories(cfg.output_dir);
    return fs::path(cfg.output_dir) / name;
  }

  std::string header(const std::string& command, const std::string& seeds) const {
    return "# compsim " + command + " config=" + hash + (seeds.empty() ? "" : " " + seeds) + "\n";
  }

  ChunkingConfig chunking() const {
    ChunkingConfig c;
    c.window = cfg.window;
    c.context_budget = cfg.context_budget;
    c.tokens_per_word = cfg.tokens_per_word;
    c.validate();
    return c;
  }
};

std::ofstream open_report(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

Corpus read_corpus(const Context& ctx) {
  CorpusOptions options;
  options.min_description_chars = ctx.cfg.min_description_chars;
  options.min_item1_chars = ctx.cfg.min_item1_chars;
  options.fiscal_year = ctx.cfg.fiscal_year;
  return load_corpus(ctx.cfg.corpus, ctx.cfg.hierarchy, options);
}

CachePrecision precision(const Context& ctx) {
  if (ctx.cfg.cache_precision == "float32") return CachePrecision::Float32;
  if (ctx.cfg.cache_precision == "float64") return CachePrecision::Float64;
  throw ArgumentError("cache_precision must be float32 or float64");
}

Pooling pooling(const Context& ctx) {
  if (ctx.cfg.pooling == "equal") return Pooling::Equal;
  if (ctx.cfg.pooling == "length-weighted") return Pooling::LengthWeighted;
  throw ArgumentError("pooling must be equal or length-weighted");
}

std::unique_ptr<EmbeddingProvider> make_provider(const Context& ctx, const Corpus& corpus) {
  const auto& p = ctx.cfg.provider;
  if (p.id == "hash-bow") return std::make_unique<HashBowProvider>(p.dimension, p.seed);
  if (p.id == "tfidf-rp") {
    const auto chunking = ctx.chunking();
    std::vector<TokenSequence> docs;
    for (const auto& r : corpus.records()) {
      docs.push_back(truncate(tokenize(clean_text(r.description), r.company_id), chunking.word_budget()));
    }
    auto model = tfidf_fit(docs, p.max_features);
    std::optional<Projection> projection;
    if (p.dimension > 0) projection = Projection{p.dimension, p.seed};
    return std::make_unique<TfidfProvider>(std::move(model), projection);
  }
  if (p.id == "remote") {
    RemoteOptions o;
    o.endpoint = p.endpoint;
    o.provider_id = p.remote_id.empty() ? "remote" : p.remote_id;
    o.timeout = std::chrono::milliseconds(p.timeout_ms);
    o.retries = p.retries;
    o.auth_env = p.auth_env;
    o.expected_dimension = p.dimension;
    if (p.dimension == 0) throw ArgumentError("remote provider needs provider.dimension");
    return std::make_unique<RemoteProvider>(o, p.dimension, p.batch_size);
  }
  throw ArgumentError("unknown provider '" + p.id + "'");
}

fs::path cache_path(const Context& ctx) { return ctx.output("embeddings.bin"); }

EmbeddingMatrix read_matrix(const Context& ctx, const Corpus& corpus) {
  const auto path = cache_path(ctx);
  if (!fs::exists(path)) throw DataError("no embedding cache at " + path.string() + "; run 'embed' first");
  const auto all = load_embeddings(path.string());
  std::vector<std::string> missing;
  for (const auto& id : corpus.ids()) {
    if (!all.index_of(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    throw DataError("embedding cache lacks " + std::to_string(missing.size()) + " companies (first: " + missing[0] +
                    "); run 'embed' again");
  }
  const auto ids = corpus.ids();
  return all.subset(ids);
}

std::map<std::string, std::string> labels_at(const Corpus& corpus, const std::string& level) {
  return corpus.labels(parse_gics_level(level));
}

ReturnsMap read_returns(const Context& ctx, const Corpus& corpus) {
  auto all = load_returns(ctx.cfg.returns);
  ReturnsMap out;
  for (const auto& id : corpus.ids()) {
    if (auto it = all.find(id); it != all.end()) out.emplace(id, std::move(it->second));
  }
  return out;
}

std::vector<int> scoring_years(const Context& ctx, const ReturnsMap& returns) {
  if (!ctx.cfg.similarity.years.empty()) return ctx.cfg.similarity.years;
  if (ctx.cfg.fiscal_year > 0) return {ctx.cfg.fiscal_year + 1};
  std::set<int> years;
  for (const auto& [id, s] : returns) {
    for (const auto& o : s.observations()) years.insert(year_of(o.date));
  }
  return {years.begin(), years.end()};
}

ClusterSettings selected_settings(const Context& ctx) {
  const auto& c = ctx.cfg.cluster;
  ClusterSettings s;
  s.method = parse_cluster_method(c.method);
  s.n_clusters = c.n;
  s.reduced_dim = c.reduced_dim;
  s.reduction = parse_reduction(c.reduction);
  s.affinity.kind = parse_affinity(c.affinity);
  s.affinity.knn = c.knn;
  s.seed = c.seed;
  return s;
}

std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------------------

int cmd_ingest(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto sectors = corpus.labels(GicsLevel::Sector);
  std::map<std::string, std::size_t> counts;
  std::vector<std::size_t> lengths;
  for (const auto& r : corpus.records()) {
    ++counts[r.gics.sector.code];
    lengths.push_back(tokenize(clean_text(r.description)).size());
  }
  std::sort(lengths.begin(), lengths.end());
  const double mean = static_cast<double>(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0})) /
                      static_cast<double>(lengths.size());

  auto file = open_report(ctx.output("corpus_summary.csv"));
  file << ctx.header("ingest", "");
  csv::write_row(file, {"sector", "companies", "share"});
  ctx.out << "companies: " << corpus.size() << "\nsectors: " << counts.size() << '\n';
  for (const auto& [sector, n] : counts) {
    const double share = static_cast<double>(n) / static_cast<double>(corpus.size());
    csv::write_row(file, {sector, std::to_string(n), fmt(share)});
    ctx.out << "  " << sector << '\t' << n << '\t' << std::fixed << std::setprecision(4) << share
            << std::defaultfloat << '\n';
  }
  ctx.out << "tokens per description: min " << lengths.front() << ", median " << lengths[lengths.size() / 2]
          << ", mean " << std::llround(mean) << ", max " << lengths.back() << '\n';
  return 0;
}

int cmd_pairs(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto data = generate_finetune_pairs(corpus, ctx.cfg.pairs_seed);
  for (const auto& w : data.warnings) ctx.log("warning: " + w);
  const auto path = ctx.output("pairs.csv");
  save_pairs(data.pairs, path.string());
  ctx.out << "pairs: " << data.pairs.size() << '\n';
  return 0;
}

int cmd_embed(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto provider = make_provider(ctx, corpus);
  const auto chunking = ctx.chunking();
  const auto path = cache_path(ctx);
  std::set<std::string> cached;
  if (fs::exists(path)) {
    const auto existing = load_embeddings(path.string());
    if (existing.provider_id() != provider->id() || existing.context_budget() != ctx.cfg.context_budget ||
        existing.dimension() != provider->dimension()) {
      throw DataError("cache " + path.string() + " holds " + existing.provider_id() + "/" +
                      std::to_string(existing.context_budget()) + "/" + std::to_string(existing.dimension()) +
                      " embeddings; remove it or choose another output_dir");
    }
    cached.insert(existing.ids().begin(), existing.ids().end());
  }
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> rows;
  for (const auto& r : corpus.records()) {
    if (cached.count(r.company_id)) continue;
    const auto chunks = prepare_document(r.description, chunking, r.company_id);
    if (chunks.empty()) throw DataError(r.company_id + ": description has no tokens after cleaning");
    try {
      rows.push_back(embed_document(*provider, chunks, pooling(ctx)));
    } catch (const ProviderError& e) {
      throw ComputeError(r.company_id + ": " + e.what());
    }
    ids.push_back(r.company_id);
  }
  if (!ids.empty()) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(provider->dimension()));
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    append_embeddings(EmbeddingMatrix(provider->id(), ctx.cfg.context_budget, ids, std::move(m)), path.string(),
                      precision(ctx));
  }
  ctx.log("embedded " + std::to_string(ids.size()) + " new, " + std::to_string(cached.size()) + " cached");
  ctx.out << "computed: " << ids.size() << "\ncached: " << cached.size() << '\n';
  return 0;
}

Eigen::MatrixXd rows_of(const EmbeddingMatrix& m, const std::vector<std::string>& ids) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(m.dimension()));
  for (std::size_t i = 0; i < ids.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = m.row(ids[i]).transpose();
  return X;
}

int cmd_classify(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto matrix = read_matrix(ctx, corpus);
  const auto& cc = ctx.cfg.classifier;
  const auto labels = labels_at(corpus, cc.level);
  const auto split = stratified_split(labels, ctx.cfg.split.test_fraction, ctx.cfg.split.seed);
  if (split.test.empty()) throw ComputeError("classification: test split is empty");
  std::vector<std::string> y_train, y_test;
  for (const auto& id : split.train) y_train.push_back(labels.at(id));
  for (const auto& id : split.test) y_test.push_back(labels.at(id));

  FitOptions options;
  options.lambda = cc.lambda;
  options.tol = cc.tol;
  options.max_iter = cc.max_iter;
  options.seed = ctx.cfg.split.seed;
  auto model = fit(rows_of(matrix, split.train), y_train, options);
  model.metadata = {matrix.provider_id(), matrix.context_budget(), cc.level, ctx.cfg.split.seed};
  if (!model.diagnostics.converged()) {
    ctx.log("warning: classifier stopped with " + std::string(to_string(model.diagnostics.reason)) + " after " +
            std::to_string(model.diagnostics.iterations) + " iterations");
  }

  const auto X_test = rows_of(matrix, split.test);
  std::vector<std::string> predictions;
  for (Eigen::Index i = 0; i < X_test.rows(); ++i) predictions.push_back(predict(model, X_test.row(i).transpose()));
  const auto report = evaluate(predictions, y_test);

  const std::string seeds = "split_seed=" + std::to_string(ctx.cfg.split.seed);
  {
    auto f = open_report(ctx.output("classification.csv"));
    f << ctx.header("classify", seeds);
    csv::write_row(f, {"provider", "context_budget", "level", "accuracy", "micro_f1", "weighted_f1", "n_train",
                       "n_test", "termination"});
    csv::write_row(f, {matrix.provider_id(), std::to_string(matrix.context_budget()), cc.level, fmt(report.accuracy),
                       fmt(report.micro_f1), fmt(report.weighted_f1), std::to_string(split.train.size()),
                       std::to_string(split.test.size()), std::string(to_string(model.diagnostics.reason))});
  }
  {
    auto f = open_report(ctx.output("classification_per_class.csv"));
    f << ctx.header("classify", seeds);
    csv::write_row(f, {"class", "precision", "recall", "f1", "support"});
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
      const auto& m = report.per_class[c];
      csv::write_row(f, {report.classes[c], fmt(m.precision), fmt(m.recall), fmt(m.f1), std::to_string(m.support)});
    }
  }
  {
    auto f = open_report(ctx.output("soft_sectors.csv"));
    f << ctx.header("classify", seeds);
    csv::write_row(f, {"company_id", "split", "rank", "class", "probability"});
    const std::set<std::string> test_ids(split.test.begin(), split.test.end());
    for (const auto& id : matrix.ids()) {
      const auto dist = soft_sector_distribution(model, matrix.row(id));
      for (std::size_t r = 0; r < std::min<std::size_t>(3, dist.size()); ++r) {
        csv::write_row(f, {id, test_ids.count(id) ? "test" : "train", std::to_string(r + 1), dist[r].first,
                           fmt(dist[r].second)});
      }
    }
  }
  save_model(model, ctx.output("model.json").string());

  std::ostringstream table;
  table << std::fixed << std::setprecision(3) << "provider\tcontext\tAcc.\tF1 Micro\tF1 Weighted\n"
        << matrix.provider_id() << '\t' << matrix.context_budget() << '\t' << report.accuracy << '\t'
        << report.micro_f1 << '\t' << report.weighted_f1;
  ctx.log(table.str());
  return 0;
}

int cmd_peers(const Context& ctx, const std::string& company, std::size_t k) {
  const auto corpus = read_corpus(ctx);
  const auto matrix = read_matrix(ctx, corpus);
  if (!company.empty()) {
    const auto peers = top_k_peers(matrix, company, k);
    csv::write_row(ctx.out, {"rank", "company_id", "similarity"});
    for (std::size_t i = 0; i < peers.neighbors.size(); ++i) {
      csv::write_row(ctx.out, {std::to_string(i + 1), peers.neighbors[i].company_id, fmt(peers.neighbors[i].similarity)});
    }
    return 0;
  }
  const auto returns = read_returns(ctx, corpus);
  const auto years = scoring_years(ctx, returns);
  CorrelationOptions options;
  options.min_overlap = ctx.cfg.similarity.min_overlap;
  std::vector<std::size_t> ks;
  for (auto kk : ctx.cfg.similarity.ks) {
    if (kk >= 1 && kk < matrix.size()) {
      ks.push_back(kk);
    } else {
      ctx.log("skipping k=" + std::to_string(kk) + " for " + std::to_string(matrix.size()) + " companies");
    }
  }
  auto reports = avg_peer_correlation(matrix, returns, ks, years, options);
  for (const auto& level : ctx.cfg.similarity.baselines) {
    reports.push_back(gics_baseline_correlation(corpus, returns, parse_gics_level(level), years, options));
  }
  auto f = open_report(ctx.output("similarity.csv"));
  f << ctx.header("peers", "");
  write_correlation_report(f, reports);
  for (const auto& r : reports) ctx.log(r.method + " k=" + r.k_label() + " rho=" + fmt(r.rho_bar));
  return 0;
}

int cmd_cluster(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto matrix = read_matrix(ctx, corpus);
  const auto& cc = ctx.cfg.cluster;
  const auto labels = labels_at(corpus, cc.label_level);
  std::vector<ClusterMethod> methods;
  for (const auto& m : cc.methods) methods.push_back(parse_cluster_method(m));
  const auto base = selected_settings(ctx);
  const auto cells = cluster_sweep(matrix, labels, methods, cc.n_clusters, cc.reduced_dims, base);
  const std::string seeds = "cluster_seed=" + std::to_string(cc.seed);
  {
    auto f = open_report(ctx.output("cluster_sweep.csv"));
    f << ctx.header("cluster", seeds);
    write_sweep_report(f, cells);
  }
  const auto assignment = cluster_embeddings(matrix, base);
  save_assignment(assignment, ctx.output("clusters.csv").string());
  const auto q = cluster_quality(assignment, labels);
  ctx.log("selected " + cc.method + " N=" + std::to_string(base.n_clusters) + ": homogeneity " + fmt(q.homogeneity) +
          ", completeness " + fmt(q.completeness) + ", v-measure " + fmt(q.v_measure));
  return 0;
}

int cmd_attribute(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto clusters_file = ctx.output("clusters.csv");
  ClusterAssignment assignment;
  if (fs::exists(clusters_file)) {
    assignment = load_assignment(clusters_file.string());
  } else {
    assignment = cluster_embeddings(read_matrix(ctx, corpus), selected_settings(ctx));
  }
  const auto returns = read_returns(ctx, corpus);
  if (returns.empty()) throw DataError("no returns for any corpus company");
  const auto& ac = ctx.cfg.attribution;
  DateRange span{Date::max(), Date::min()};
  for (const auto& [id, s] : returns) {
    if (s.empty()) continue;
    span.first = std::min(span.first, s.observations().front().date);
    span.last = std::max(span.last, s.observations().back().date);
  }
  if (!ac.first.empty()) span.first = parse_date(ac.first);
  if (!ac.last.empty()) span.last = parse_date(ac.last);
  const auto panel = monthly_cumulative_returns(returns, span, ac.min_days);
  AttributionOptions options;
  options.winsorize = ac.winsorize;

  const auto main = attribution_metric(panel, assignment, options);
  const std::string seeds =
      "cluster_seed=" + std::to_string(ctx.cfg.cluster.seed) + " random_seed=" + std::to_string(ac.random_seed);
  {
    auto f = open_report(ctx.output("attribution.csv"));
    f << ctx.header("attribute", seeds);
    write_attribution_report(f, main);
  }

  struct Row {
    std::string method;
    AttributionReport report;
  };
  std::vector<Row> rows;
  rows.push_back({"embedding-clusters", main});
  for (const auto* level : {"sector", "industry"}) {
    try {
      rows.push_back({std::string("gics-") + level,
                      attribution_metric(panel, assignment_from_labels(labels_at(corpus, level)), options)});
    } catch (const ComputeError& e) {
      ctx.log(std::string("gics-") + level + " skipped: " + e.what());
    }
  }
  rows.push_back({"random", attribution_metric(
                                panel, random_assignment(assignment.ids, assignment.n_clusters, ac.random_seed), options)});
  auto f = open_report(ctx.output("attribution_summary.csv"));
  f << ctx.header("attribute", seeds);
  csv::write_row(f, {"method", "n_clusters", "avg_r2", "avg_adj_r2", "months_fitted", "months_skipped"});
  for (const auto& r : rows) {
    csv::write_row(f, {r.method, std::to_string(r.report.n_clusters), fmt(r.report.avg_r2), fmt(r.report.avg_adj_r2),
                       std::to_string(r.report.per_month.size()), std::to_string(r.report.skipped.size())});
    ctx.log(r.method + " avg R2 " + fmt(r.report.avg_r2));
  }
  return 0;
}

int cmd_project(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto matrix = read_matrix(ctx, corpus);
  const auto s = selected_settings(ctx);
  const auto reduced = reduce_dims(matrix, 2, s.reduction, s.seed, s.affinity);
  const auto sectors = corpus.labels(GicsLevel::Sector);
  auto f = open_report(ctx.output("projection.csv"));
  f << ctx.header("project", "cluster_seed=" + std::to_string(s.seed));
  csv::write_row(f, {"company_id", "x", "y", "sector"});
  for (std::size_t i = 0; i < reduced.ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    csv::write_row(f, {reduced.ids[i], fmt(reduced.vectors(r, 0)), fmt(reduced.vectors(r, 1)),
                       sectors.at(reduced.ids[i])});
  }
  return 0;
}

int cmd_outliers(const Context& ctx) {
  const auto corpus = read_corpus(ctx);
  const auto matrix = read_matrix(ctx, corpus);
  const auto sectors = corpus.labels(GicsLevel::Sector);
  std::map<std::string, Eigen::VectorXd> centroid;
  for (const auto& id : matrix.ids()) {
    Eigen::VectorXd v = matrix.row(id);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    auto [it, inserted] = centroid.try_emplace(sectors.at(id), Eigen::VectorXd::Zero(v.size()));
    it->second += v / norm;
  }
  if (centroid.size() < 2) throw ComputeError("outliers: need at least two sectors");
  for (auto& [sector, c] : centroid) {
    if (c.norm() > 0) c.normalize();
  }
  struct Scored {
    std::string id, sector, nearest;
    double score;
  };
  std::vector<Scored> scored;
  for (const auto& id : matrix.ids()) {
    const Eigen::VectorXd v = matrix.row(id);
    if (v.norm() == 0.0) {
      ctx.log("skipping " + id + ": zero embedding");
      continue;
    }
    const auto& own = sectors.at(id);
    const double own_d = 1.0 - cosine_similarity(v, centroid.at(own));
    double best = std::numeric_limits<double>::infinity();
    std::string nearest;
    for (const auto& [sector, c] : centroid) {
      if (sector == own || c.norm() == 0.0) continue;
      const double d = 1.0 - cosine_similarity(v, c);
      if (d < best) {
        best = d;
        nearest = sector;
      }
    }
    scored.push_back({id, own, nearest, own_d - best});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  auto f = open_report(ctx.output("outliers.csv"));
  f << ctx.header("outliers", "");
  csv::write_row(f, {"rank", "company_id", "sector", "score", "nearest_other_sector"});
  for (std::size_t i = 0; i < scored.size(); ++i) {
    csv::write_row(f, {std::to_string(i + 1), scored[i].id, scored[i].sector, fmt(scored[i].score), scored[i].nearest});
  }
  return 0;
}

int cmd_report(const Context& ctx) {
  auto f = open_report(ctx.output("summary.csv"));
  f << ctx.header("report", "");
  csv::write_row(f, {"task", "configuration", "metric", "value"});
  std::size_t merged = 0;
  auto merge = [&](const char* file, const char* task, auto&& emit) {
    const auto path = ctx.output(file);
    if (!fs::exists(path)) {
      ctx.log(std::string("report: ") + file + " not found, skipped");
      return;
    }
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto fields = csv::split_line(line);
      if (header.empty()) {
        header = std::move(fields);
        continue;
      }
      emit(task, header, fields);
    }
    ++merged;
  };
  auto col = [](const std::vector<std::string>& h, const std::vector<std::string>& row, const std::string& name) {
    const auto it = std::find(h.begin(), h.end(), name);
    return it == h.end() || static_cast<std::size_t>(it - h.begin()) >= row.size() ? std::string()
                                                                                    : row[static_cast<std::size_t>(it - h.begin())];
  };
  merge("similarity.csv", "peer-correlation", [&](const char* task, const auto& h, const auto& row) {
    csv::write_row(f, {task, col(h, row, "method") + " k=" + col(h, row, "k"), "avg_pairwise_correlation",
                       col(h, row, "avg_pairwise_correlation")});
  });
  merge("attribution_summary.csv", "return-attribution", [&](const char* task, const auto& h, const auto& row) {
    csv::write_row(f, {task, col(h, row, "method") + " N=" + col(h, row, "n_clusters"), "avg_r2",
                       col(h, row, "avg_r2")});
  });
  merge("classification.csv", "classification", [&](const char* task, const auto& h, const auto& row) {
    const auto config = col(h, row, "provider") + " context=" + col(h, row, "context_budget");
    for (const auto* metric : {"accuracy", "micro_f1", "weighted_f1"}) {
      csv::write_row(f, {task, config, metric, col(h, row, metric)});
    }
  });
  merge("cluster_sweep.csv", "clustering", [&](const char* task, const auto& h, const auto& row) {
    csv::write_row(f, {task,
                       col(h, row, "method") + " N=" + col(h, row, "n_clusters") + " r=" + col(h, row, "reduced_dim"),
                       "v_measure", col(h, row, "v_measure")});
  });
  if (merged == 0) throw DataError("report: no task reports found in " + ctx.cfg.output_dir);
  return 0;
}

struct SynthArgs {
  std::string dir = "synthetic";
  SyntheticOptions options;
};

int cmd_synth(const Context& ctx, const SynthArgs& args) {
  const auto universe = make_synthetic_universe(args.options);
  const fs::path dir(args.dir);
  fs::create_directories(dir);
  save_corpus(universe.corpus, (dir / "corpus.jsonl").string());
  save_hierarchy(universe.corpus.hierarchy(), (dir / "hierarchy.csv").string());
  if (!universe.returns.empty()) save_returns(universe.returns, (dir / "returns.csv").string());
  RunConfig cfg;
  cfg.fiscal_year = universe.corpus.fiscal_year();
  cfg.output_dir = "out";
  cfg.cluster.n = args.options.n_sectors;
  cfg.cluster.n_clusters = {args.options.n_sectors, args.options.n_sectors * args.options.industries_per_sector};
  cfg.cluster.reduced_dims = {5, 10};
  save_config(cfg, (dir / "config.json").string());
  if (universe.outlier_id) ctx.log("planted outlier: " + *universe.outlier_id);
  ctx.out << "wrote " << universe.corpus.size() << " companies to " << dir.string() << '\n';
  return 0;
}

void resolve_paths(RunConfig& cfg, const fs::path& base) {
  for (auto* p : {&cfg.corpus, &cfg.hierarchy, &cfg.returns, &cfg.output_dir}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Company similarity from business descriptions"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("-s,--set", overrides, "override a config key, e.g. cluster.seed=3")->take_all();
  app.add_option("-o,--output-dir", output_dir, "override output_dir");
  app.add_flag("-q,--quiet", quiet, "suppress progress messages");

  std::string company;
  std::size_t k = 5;
  SynthArgs synth;
  std::map<std::string, CLI::App*> commands;
  for (const auto* name : {"ingest", "pairs", "embed", "classify", "peers", "cluster", "attribute", "project",
                           "outliers", "report", "synth"}) {
    commands[name] = app.add_subcommand(name);
  }
  commands["ingest"]->description("validate the corpus and print summary statistics");
  commands["pairs"]->description("write balanced same-industry document pairs");
  commands["embed"]->description("embed every company (resumable cache)");
  commands["classify"]->description("fit and evaluate the GICS classifier");
  commands["peers"]->description("peer return correlation, or one company's nearest peers");
  commands["peers"]->add_option("--company", company, "print the peers of this company");
  commands["peers"]->add_option("--k", k, "number of peers with --company");
  commands["cluster"]->description("clustering sweep and selected assignment");
  commands["attribute"]->description("monthly cross-sectional R2 of cluster indicators");
  commands["project"]->description("2-D coordinates for plotting");
  commands["outliers"]->description("rank companies by distance from their sector");
  commands["report"]->description("merge task reports into one summary");
  auto* s = commands["synth"];
  s->description("write a synthetic corpus, hierarchy, returns and config");
  s->add_option("--dir", synth.dir, "destination directory");
  s->add_option("--companies", synth.options.n_companies);
  s->add_option("--sectors", synth.options.n_sectors);
  s->add_option("--industries-per-sector", synth.options.industries_per_sector);
  s->add_option("--words", synth.options.words_per_description);
  s->add_option("--years", synth.options.n_years);
  s->add_option("--first-year", synth.options.first_year);
  s->add_option("--signal-share", synth.options.signal_share);
  s->add_option("--seed", synth.options.seed);
  s->add_flag("--outlier", synth.options.plant_outlier, "plant one company with another sector's vocabulary");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    nlohmann::json j = nlohmann::json::object();
    fs::path base = fs::current_path();
    if (!config_path.empty()) {
      j = to_json(load_config(config_path));
      base = fs::absolute(config_path).parent_path();
    }
    for (const auto& o : overrides) apply_override(j, o);
    if (!output_dir.empty()) j["output_dir"] = fs::absolute(output_dir).string();
    Context ctx{from_json(j), "", quiet, out, err};
    ctx.hash = config_hash(ctx.cfg);
    resolve_paths(ctx.cfg, base);

    if (commands["synth"]->parsed()) return cmd_synth(ctx, synth);
    if (commands["ingest"]->parsed()) return cmd_ingest(ctx);
    if (commands["pairs"]->parsed()) return cmd_pairs(ctx);
    if (commands["embed"]->parsed()) return cmd_embed(ctx);
    if (commands["classify"]->parsed()) return cmd_classify(ctx);
    if (commands["peers"]->parsed()) return cmd_peers(ctx, company, k);
    if (commands["cluster"]->parsed()) return cmd_cluster(ctx);
    if (commands["attribute"]->parsed()) return cmd_attribute(ctx);
    if (commands["project"]->parsed()) return cmd_project(ctx);
    if (commands["outliers"]->parsed()) return cmd_outliers(ctx);
    if (commands["report"]->parsed()) return cmd_report(ctx);
    return 1;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ComputeError& e) {
    err << "computation error: " << e.what() << '\n';
    return 3;
  } catch (const RemoteError& e) {
    err << "computation error: " << e.what() << '\n';
    return 3;
  } catch (const ProviderError& e) {
    err << "computation error: " << e.what() << '\n';
    return 3;
  } catch (const CorrelationError& e) {
    err << "computation error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

} // namespace compsim::cli
