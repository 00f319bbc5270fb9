#include "compsim/embedding_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "compsim/error.hpp"

namespace compsim {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'S', 'E', 'M', 'B', 'E', 'D', '\0'};
constexpr std::size_t kFixedHeader = 36;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out += static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

struct Header {
  std::uint32_t version = 0;
  std::uint32_t value_bytes = 0;
  std::uint32_t context_budget = 0;
  std::uint32_t dimension = 0;
  std::uint64_t count = 0;
  std::string provider_id;
  std::size_t payload_offset = 0;
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding cache " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Header parse_header(const std::string& bytes, const std::string& path) {
  if (bytes.size() < kFixedHeader) throw DataError(path + ": truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic.data(), kMagic.size()) != 0) throw DataError(path + ": bad magic");
  Header h;
  h.version = get_le<std::uint32_t>(p + 8);
  if (h.version != kCacheVersion) {
    throw DataError(path + ": unsupported cache version " + std::to_string(h.version));
  }
  h.value_bytes = get_le<std::uint32_t>(p + 12);
  if (h.value_bytes != 4 && h.value_bytes != 8) {
    throw DataError(path + ": unsupported value width " + std::to_string(h.value_bytes));
  }
  h.context_budget = get_le<std::uint32_t>(p + 16);
  h.dimension = get_le<std::uint32_t>(p + 20);
  h.count = get_le<std::uint64_t>(p + 24);
  const auto id_len = get_le<std::uint32_t>(p + 32);
  if (bytes.size() < kFixedHeader + id_len) throw DataError(path + ": truncated provider id");
  h.provider_id.assign(bytes.data() + kFixedHeader, id_len);
  h.payload_offset = kFixedHeader + id_len;
  if (h.dimension == 0) throw DataError(path + ": declared dimension is 0");
  const auto expected = h.payload_offset + h.count * h.dimension * h.value_bytes;
  if (bytes.size() != expected) {
    throw DataError(path + ": payload size " + std::to_string(bytes.size() - h.payload_offset) +
                    " bytes does not match declared dimension " + std::to_string(h.dimension) +
                    " x " + std::to_string(h.count) + " rows");
  }
  return h;
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(ids_sidecar_path(path));
  if (!in) throw DataError("missing id index " + ids_sidecar_path(path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

} // namespace

std::string ids_sidecar_path(const std::string& path) { return path + ".ids"; }

EmbeddingMatrix quantize(const EmbeddingMatrix& matrix, CachePrecision precision) {
  if (precision == CachePrecision::Float64) return matrix;
  Eigen::MatrixXd q = matrix.vectors().cast<float>().cast<double>();
  return EmbeddingMatrix(matrix.provider_id(), matrix.context_budget(), matrix.ids(), std::move(q));
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::string& path, CachePrecision precision) {
  static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);
  for (const auto& id : matrix.ids()) {
    if (id.empty() || id.find_first_of("\r\n") != std::string::npos) {
      throw DataError("company_id '" + id + "' cannot be stored in the id index");
    }
  }
  std::string out;
  out.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(precision));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.context_budget()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dimension()));
  put_le<std::uint64_t>(out, matrix.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.provider_id().size()));
  out += matrix.provider_id();
  const auto& m = matrix.vectors();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (precision == CachePrecision::Float32) {
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
      } else {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(r, c)));
      }
    }
  }
  // write to temporaries, then rename, so a crash never leaves a half cache
  const auto tmp = path + ".tmp";
  const auto ids_tmp = ids_sidecar_path(path) + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    std::ofstream g(ids_tmp, std::ios::trunc);
    if (!g) throw DataError("cannot write " + ids_tmp);
    for (const auto& id : matrix.ids()) g << id << '\n';
  }
  std::filesystem::rename(tmp, path);
  std::filesystem::rename(ids_tmp, ids_sidecar_path(path));
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  const auto bytes = read_bytes(path);
  const auto h = parse_header(bytes, path);
  auto ids = read_ids(path);
  if (ids.size() != h.count) {
    throw DataError(path + ": id index has " + std::to_string(ids.size()) + " rows, header declares " +
                    std::to_string(h.count));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(h.count), static_cast<Eigen::Index>(h.dimension));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + h.payload_offset;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (h.value_bytes == 4) {
        m(r, c) = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)));
      } else {
        m(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(p));
      }
      p += h.value_bytes;
    }
  }
  return EmbeddingMatrix(h.provider_id, h.context_budget, std::move(ids), std::move(m));
}

void append_embeddings(const EmbeddingMatrix& rows, const std::string& path, CachePrecision precision) {
  if (!std::filesystem::exists(path)) {
    save_embeddings(rows, path, precision);
    return;
  }
  const auto bytes = read_bytes(path);
  const auto h = parse_header(bytes, path);
  if (h.provider_id != rows.provider_id() || h.context_budget != rows.context_budget() ||
      h.dimension != rows.dimension() || h.value_bytes != static_cast<std::uint32_t>(precision)) {
    throw DataError(path + ": cache metadata does not match the rows being appended");
  }
  auto existing = load_embeddings(path);
  std::unordered_set<std::string> seen(existing.ids().begin(), existing.ids().end());
  for (const auto& id : rows.ids()) {
    if (seen.contains(id)) throw DataError(path + ": duplicate company_id '" + id + "'");
  }
  auto ids = existing.ids();
  ids.insert(ids.end(), rows.ids().begin(), rows.ids().end());
  Eigen::MatrixXd m(existing.vectors().rows() + rows.vectors().rows(), existing.vectors().cols());
  m << existing.vectors(), rows.vectors();
  save_embeddings(EmbeddingMatrix(rows.provider_id(), rows.context_budget(), std::move(ids), std::move(m)),
                  path, precision);
}

void export_embeddings_jsonl(const EmbeddingMatrix& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto row = matrix.vectors().row(static_cast<Eigen::Index>(i));
    nlohmann::json j;
    j["company_id"] = matrix.ids()[i];
    j["provider_id"] = matrix.provider_id();
    j["context_budget"] = matrix.context_budget();
    std::vector<double> values(static_cast<std::size_t>(row.size()));
    for (Eigen::Index c = 0; c < row.size(); ++c) values[static_cast<std::size_t>(c)] = row[c];
    j["vector"] = std::move(values);
    out << j.dump() << '\n';
  }
}

EmbeddingMatrix import_embeddings_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string provider;
  std::size_t budget = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto p = j.at("provider_id").get<std::string>();
      const auto b = j.at("context_budget").get<std::size_t>();
      if (ids.empty()) {
        provider = p;
        budget = b;
      } else if (p != provider || b != budget) {
        throw DataError("mixed provider/context in one file");
      }
      ids.push_back(j.at("company_id").get<std::string>());
      rows.push_back(j.at("vector").get<std::vector<double>>());
      if (rows.back().size() != rows.front().size()) throw DataError("dimension mismatch");
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto d = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return EmbeddingMatrix(provider, budget, std::move(ids), std::move(m));
}

} // namespace compsim
