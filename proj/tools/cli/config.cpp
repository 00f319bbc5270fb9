#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "compsim/embed.hpp"
#include "compsim/error.hpp"

namespace compsim::cli {

using nlohmann::json;

namespace {

// Walks one JSON object, reading known keys and rejecting the rest.
class Fields {
public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ArgumentError("config: " + label() + " must be an object");
  }
  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ArgumentError("config: unknown key '" + prefix() + key + "'");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ArgumentError("config: key '" + prefix() + key + "' has the wrong type");
    }
  }

  template <typename F>
  void object(const char* key, F&& read) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Fields sub(*it, prefix() + key);
    read(sub);
  }

private:
  std::string prefix() const { return where_.empty() ? "" : where_ + "."; }
  std::string label() const { return where_.empty() ? "document" : "'" + where_ + "'"; }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

} // namespace

json to_json(const RunConfig& c) {
  json j;
  j["corpus"] = c.corpus;
  j["hierarchy"] = c.hierarchy;
  j["returns"] = c.returns;
  j["output_dir"] = c.output_dir;
  j["min_description_chars"] = c.min_description_chars;
  j["min_item1_chars"] = c.min_item1_chars;
  j["fiscal_year"] = c.fiscal_year;
  const auto& p = c.provider;
  j["provider"] = {{"id", p.id},           {"dimension", p.dimension}, {"seed", p.seed},
                   {"max_features", p.max_features}, {"endpoint", p.endpoint}, {"remote_id", p.remote_id},
                   {"auth_env", p.auth_env}, {"timeout_ms", p.timeout_ms}, {"retries", p.retries},
                   {"batch_size", p.batch_size}};
  j["context_budget"] = c.context_budget;
  j["window"] = c.window;
  j["tokens_per_word"] = c.tokens_per_word;
  j["pooling"] = c.pooling;
  j["cache_precision"] = c.cache_precision;
  j["pairs_seed"] = c.pairs_seed;
  j["split"] = {{"seed", c.split.seed}, {"test_fraction", c.split.test_fraction}};
  j["classifier"] = {{"level", c.classifier.level},
                     {"lambda", c.classifier.lambda},
                     {"tol", c.classifier.tol},
                     {"max_iter", c.classifier.max_iter}};
  j["similarity"] = {{"ks", c.similarity.ks},
                     {"years", c.similarity.years},
                     {"min_overlap", c.similarity.min_overlap},
                     {"baselines", c.similarity.baselines}};
  const auto& k = c.cluster;
  j["cluster"] = {{"methods", k.methods},   {"n_clusters", k.n_clusters}, {"reduced_dims", k.reduced_dims},
                  {"reduction", k.reduction}, {"affinity", k.affinity},   {"knn", k.knn},
                  {"label_level", k.label_level}, {"seed", k.seed},      {"method", k.method},
                  {"n", k.n},               {"reduced_dim", k.reduced_dim}};
  const auto& a = c.attribution;
  j["attribution"] = {{"first", a.first},
                      {"last", a.last},
                      {"min_days", a.min_days},
                      {"winsorize", a.winsorize},
                      {"random_seed", a.random_seed}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  Fields f(j, "");
  f.get("corpus", c.corpus);
  f.get("hierarchy", c.hierarchy);
  f.get("returns", c.returns);
  f.get("output_dir", c.output_dir);
  f.get("min_description_chars", c.min_description_chars);
  f.get("min_item1_chars", c.min_item1_chars);
  f.get("fiscal_year", c.fiscal_year);
  f.object("provider", [&](Fields& p) {
    p.get("id", c.provider.id);
    p.get("dimension", c.provider.dimension);
    p.get("seed", c.provider.seed);
    p.get("max_features", c.provider.max_features);
    p.get("endpoint", c.provider.endpoint);
    p.get("remote_id", c.provider.remote_id);
    p.get("auth_env", c.provider.auth_env);
    p.get("timeout_ms", c.provider.timeout_ms);
    p.get("retries", c.provider.retries);
    p.get("batch_size", c.provider.batch_size);
  });
  f.get("context_budget", c.context_budget);
  f.get("window", c.window);
  f.get("tokens_per_word", c.tokens_per_word);
  f.get("pooling", c.pooling);
  f.get("cache_precision", c.cache_precision);
  f.get("pairs_seed", c.pairs_seed);
  f.object("split", [&](Fields& s) {
    s.get("seed", c.split.seed);
    s.get("test_fraction", c.split.test_fraction);
  });
  f.object("classifier", [&](Fields& s) {
    s.get("level", c.classifier.level);
    s.get("lambda", c.classifier.lambda);
    s.get("tol", c.classifier.tol);
    s.get("max_iter", c.classifier.max_iter);
  });
  f.object("similarity", [&](Fields& s) {
    s.get("ks", c.similarity.ks);
    s.get("years", c.similarity.years);
    s.get("min_overlap", c.similarity.min_overlap);
    s.get("baselines", c.similarity.baselines);
  });
  f.object("cluster", [&](Fields& s) {
    s.get("methods", c.cluster.methods);
    s.get("n_clusters", c.cluster.n_clusters);
    s.get("reduced_dims", c.cluster.reduced_dims);
    s.get("reduction", c.cluster.reduction);
    s.get("affinity", c.cluster.affinity);
    s.get("knn", c.cluster.knn);
    s.get("label_level", c.cluster.label_level);
    s.get("seed", c.cluster.seed);
    s.get("method", c.cluster.method);
    s.get("n", c.cluster.n);
    s.get("reduced_dim", c.cluster.reduced_dim);
  });
  f.object("attribution", [&](Fields& s) {
    s.get("first", c.attribution.first);
    s.get("last", c.attribution.last);
    s.get("min_days", c.attribution.min_days);
    s.get("winsorize", c.attribution.winsorize);
    s.get("random_seed", c.attribution.random_seed);
  });
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArgumentError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json(config).dump(2) << '\n';
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError("override must look like key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ArgumentError("bad override key: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object()) {
      if (!node->is_null()) throw ArgumentError("override key '" + path + "' is not an object path");
      *node = json::object();
    }
    start = dot + 1;
  }
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
  return buf;
}

} // namespace compsim::cli
