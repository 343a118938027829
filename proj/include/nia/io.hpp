#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nia/agent_graph.hpp"
#include "nia/dataset.hpp"
#include "nia/protocol.hpp"

namespace nia {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(std::string_view bytes) {
    for (unsigned char ch : bytes) {
      hash_ ^= ch;
      hash_ *= 0x100000001B3ULL;
    }
  }
  [[nodiscard]] std::uint64_t value() const { return hash_; }
  [[nodiscard]] std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash_;
    return os.str();
  }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline std::string fnv1a_hex(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.hex();
}

/// Writes to `<path>.tmp` and renames over the destination.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Dataset binary: "NIA1", u64 n, u64 d, n*d row-major f64, n label bytes.

inline constexpr std::array<char, 4> kDatasetMagic = {'N', 'I', 'A', '1'};

namespace detail {
template <class T>
void append_raw(std::string& out, const T& value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}
template <class T>
T read_raw(std::string_view bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) throw IoError("truncated binary input");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}
}  // namespace detail

inline std::string encode_dataset(const Dataset& ds) {
  std::string out;
  out.reserve(4 + 16 + ds.n() * ds.d() * 8 + ds.n());
  out.append(kDatasetMagic.data(), kDatasetMagic.size());
  detail::append_raw<std::uint64_t>(out, ds.n());
  detail::append_raw<std::uint64_t>(out, ds.d());
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) detail::append_raw<double>(out, ds.features(i, j));
  }
  for (Eigen::Index i = 0; i < ds.labels.size(); ++i) {
    out.push_back(static_cast<char>(ds.labels[i] != 0.0 ? 1 : 0));
  }
  return out;
}

inline Dataset decode_dataset(std::string_view bytes) {
  if (bytes.size() < 20 || !std::equal(kDatasetMagic.begin(), kDatasetMagic.end(), bytes.begin())) {
    throw IoError("dataset file does not start with magic NIA1");
  }
  std::size_t off = 4;
  const auto n = detail::read_raw<std::uint64_t>(bytes, off);
  const auto d = detail::read_raw<std::uint64_t>(bytes, off);
  if (d != 0 && n > (bytes.size() - off) / (d * 8 + 1)) throw IoError("dataset header exceeds file size");
  if (bytes.size() != off + n * d * 8 + n) throw IoError("dataset size does not match header");
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) ds.features(i, j) = detail::read_raw<double>(bytes, off);
  }
  for (Eigen::Index i = 0; i < ds.labels.size(); ++i) {
    const auto b = static_cast<unsigned char>(bytes[off++]);
    if (b > 1) throw IoError("label byte other than 0/1 at row " + std::to_string(i));
    ds.labels[i] = b;
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Graph description JSON: {"d": int, "agents": [{"id", "features", "parents"}]}

inline nlohmann::json graph_to_json(const AgentGraph& g) {
  nlohmann::json agents = nlohmann::json::array();
  for (AgentId id = 1; id <= g.num_agents(); ++id) {
    agents.push_back({{"id", id},
                      {"features", std::vector<std::size_t>(g.features(id).begin(), g.features(id).end())},
                      {"parents", g.parents(id)}});
  }
  return {{"d", g.num_features()}, {"agents", agents}};
}

inline AgentGraph graph_from_json(const nlohmann::json& j) {
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto& agents = j.at("agents");
    const std::size_t n = agents.size();
    std::vector<FeatureSet> sets(n);
    std::vector<bool> seen(n, false);
    std::vector<std::pair<std::size_t, std::vector<AgentId>>> parent_lists;
    for (const auto& a : agents) {
      const auto id = a.at("id").get<std::size_t>();
      if (id < 1 || id > n) {
        throw IndexOutOfRange("agent id " + std::to_string(id) + " outside 1.." + std::to_string(n));
      }
      if (seen[id - 1]) throw InvalidConfig("duplicate agent id " + std::to_string(id));
      seen[id - 1] = true;
      for (auto l : a.at("features").get<std::vector<std::size_t>>()) sets[id - 1].insert(l);
      parent_lists.emplace_back(id, a.value("parents", std::vector<AgentId>{}));
    }
    std::sort(parent_lists.begin(), parent_lists.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Edge> edges;
    for (const auto& [child, parents] : parent_lists) {
      for (AgentId parent : parents) edges.emplace_back(parent, child);
    }
    return build_agent_graph(edges, sets, d);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("malformed graph description: ") + e.what());
  }
}

inline AgentGraph load_graph(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig("cannot parse " + path.string() + ": " + e.what());
  }
  return graph_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Shortest representation that round-trips.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw DimensionMismatch("CSV row width differs from header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_field(fields[i]);
    }
    text_ += "\r\n";
  }

  [[nodiscard]] const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

/// Trace CSV: agent_id, topo_pos, loss, grad_norm, converged, l1_weight_norm.
inline std::string trace_to_csv(const ProtocolTrace& trace) {
  CsvWriter csv({"agent_id", "topo_pos", "loss", "grad_norm", "converged", "l1_weight_norm"});
  for (std::size_t pos = 0; pos < trace.order.size(); ++pos) {
    const AgentModel& m = trace.model(trace.order[pos]);
    csv.row({std::to_string(m.id), std::to_string(pos + 1), format_real(m.loss), format_real(m.grad_norm),
             m.converged ? "true" : "false", format_real(m.l1_weight_norm())});
  }
  return csv.str();
}

/// Logit dump: u64 n, u64 D, then n*D f64 row-major (row = sample,
/// column = agent in topological order).
inline std::string encode_logits(const ProtocolTrace& trace) {
  const std::size_t depth = trace.order.size();
  const std::size_t n = depth ? static_cast<std::size_t>(trace.logits(trace.order[0]).size()) : 0;
  std::string out;
  out.reserve(16 + n * depth * 8);
  detail::append_raw<std::uint64_t>(out, n);
  detail::append_raw<std::uint64_t>(out, depth);
  for (std::size_t i = 0; i < n; ++i) {
    for (AgentId id : trace.order) detail::append_raw<double>(out, trace.logits(id)[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

inline Matrix decode_logits(std::string_view bytes) {
  std::size_t off = 0;
  const auto n = detail::read_raw<std::uint64_t>(bytes, off);
  const auto depth = detail::read_raw<std::uint64_t>(bytes, off);
  if (bytes.size() != 16 + n * depth * 8) throw IoError("logit dump size does not match header");
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(depth));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = detail::read_raw<double>(bytes, off);
  }
  return out;
}

}  // namespace nia
