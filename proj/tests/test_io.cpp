#include <gtest/gtest.h>

#include <cstring>

#include "nia/instance_lab.hpp"
#include "nia/io.hpp"
#include "test_util.hpp"

using namespace nia;

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(DatasetBinary, LayoutAndRoundTrip) {
  const Dataset ds = generate_hard_instance({3, 5, 1});
  const std::string bytes = encode_dataset(ds);
  ASSERT_EQ(bytes.size(), 4u + 16u + 5 * 3 * 8 + 5);
  EXPECT_EQ(bytes.substr(0, 4), "NIA1");
  std::uint64_t n = 0, d = 0;
  std::memcpy(&n, bytes.data() + 4, 8);
  std::memcpy(&d, bytes.data() + 12, 8);
  EXPECT_EQ(n, 5u);
  EXPECT_EQ(d, 3u);
  double second = 0;  // row 0, column 1
  std::memcpy(&second, bytes.data() + 20 + 8, 8);
  EXPECT_EQ(second, ds.features(0, 1));
  EXPECT_EQ(static_cast<double>(bytes[20 + 5 * 3 * 8 + 2]), ds.labels[2]);

  const Dataset back = decode_dataset(bytes);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(DatasetBinary, RejectsCorruptInput) {
  const std::string bytes = encode_dataset(generate_hard_instance({2, 4, 1}));
  EXPECT_THROW(decode_dataset("NOPE" + bytes.substr(4)), IoError);
  EXPECT_THROW(decode_dataset(bytes.substr(0, bytes.size() - 1)), IoError);
  std::string bad = bytes;
  bad.back() = 7;
  EXPECT_THROW(decode_dataset(bad), IoError);
}

TEST(GraphJson, RoundTrip) {
  const AgentGraph g = build_agent_graph({{1, 3}, {2, 3}}, {{1, 2}, {}, {3}}, 3);
  const auto j = graph_to_json(g);
  EXPECT_EQ(j.at("d"), 3);
  const AgentGraph back = graph_from_json(j);
  EXPECT_EQ(back.topo_order(), g.topo_order());
  EXPECT_EQ(back.parents(3), g.parents(3));
  EXPECT_EQ(back.features(1), g.features(1));
}

TEST(GraphJson, Errors) {
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"agents": []})")), InvalidConfig);
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(
                   R"({"d": 1, "agents": [{"id": 1, "features": [1], "parents": [2]},
                                          {"id": 2, "features": [1], "parents": [1]}]})")),
               CycleDetected);
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"d": 1, "agents": [{"id": 3, "features": [1]}]})")),
               IndexOutOfRange);
}

TEST(Csv, Rfc4180Quoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  CsvWriter w({"x", "y"});
  w.row({"1", "a,b"});
  EXPECT_EQ(w.str(), "x,y\r\n1,\"a,b\"\r\n");
  EXPECT_THROW(w.row({"1"}), DimensionMismatch);
}

TEST(Csv, RealsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_real(v)), v);
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
}

TEST(TraceCsv, ColumnsAndRows) {
  const Dataset ds = generate_hard_instance({2, 200, 1});
  const ProtocolTrace t = run_protocol(ds, cyclic_path_assignment(2, 3));
  const std::string csv = trace_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "agent_id,topo_pos,loss,grad_norm,converged,l1_weight_norm");
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = csv.find("\r\n", pos)) != std::string::npos; pos += 2) ++lines;
  EXPECT_EQ(lines, 4u);
}

TEST(Logits, RoundTrip) {
  const Dataset ds = generate_hard_instance({2, 30, 1});
  const ProtocolTrace t = run_protocol(ds, cyclic_path_assignment(2, 4));
  const std::string bytes = encode_logits(t);
  EXPECT_EQ(bytes.size(), 16u + 30 * 4 * 8);
  const Matrix m = decode_logits(bytes);
  for (AgentId id = 1; id <= 4; ++id) EXPECT_EQ(m.col(static_cast<Eigen::Index>(id - 1)), t.logits(id));
  EXPECT_THROW(decode_logits(bytes.substr(0, 20)), IoError);
}

TEST(AtomicWrite, ReplacesWithoutLeftovers) {
  ScratchDir dir("io");
  const auto p = dir.path / "sub" / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
  EXPECT_THROW(read_file(dir.path / "missing"), IoError);
}
