#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gain/checkpoint.h"
#include "gain/errors.h"

namespace gain {
namespace {

std::filesystem::path TempPath(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gain_ckpt_" + name);
}

TEST(Checkpoint, RoundTripIsExact) {
  Checkpoint c;
  c.seed = 1234567890123ULL;
  c.metadata = "{\"k\": 1}";
  c.params.emplace("a.weight", Tensor({2, 2}, {0.1, -1e-300, 3.0 / 7.0, 1e300}, true));
  c.params.emplace("b", Tensor({3}, {1, 2, 3}, true));
  const auto path = TempPath("roundtrip");
  SaveCheckpoint(path, c);
  const Checkpoint r = LoadCheckpoint(path);
  EXPECT_EQ(r.seed, c.seed);
  EXPECT_EQ(r.metadata, c.metadata);
  ASSERT_EQ(r.params.size(), 2u);
  for (const auto& [name, t] : c.params) {
    const Tensor& u = r.params.at(name);
    EXPECT_EQ(u.shape(), t.shape());
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), u.data().begin()));
    EXPECT_TRUE(u.requires_grad());
  }
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const auto path = TempPath("corrupt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACKPT";
  }
  EXPECT_THROW(LoadCheckpoint(path), LoadError);
  EXPECT_THROW(LoadCheckpoint(TempPath("missing_file")), LoadError);

  Checkpoint c;
  c.params.emplace("w", Tensor({4}, {1, 2, 3, 4}, true));
  SaveCheckpoint(path, c);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(LoadCheckpoint(path), LoadError);
}

TEST(AssignParameters, ReportsMissingAndExtraNames) {
  ParamStore source, target;
  source.emplace("shared", Tensor({1}, {5.0}, true));
  source.emplace("only_source", Tensor({1}, {1.0}, true));
  target.emplace("shared", Tensor({1}, {0.0}, true));
  target.emplace("only_target", Tensor({1}, {0.0}, true));
  try {
    AssignParameters(source, target);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("only_source"), std::string::npos);
    EXPECT_NE(msg.find("only_target"), std::string::npos);
  }
}

TEST(AssignParameters, ShapeMismatchAndSuccess) {
  ParamStore source, target;
  source.emplace("w", Tensor({2}, {1.0, 2.0}, true));
  target.emplace("w", Tensor({1, 2}, {0.0, 0.0}, true));
  EXPECT_THROW(AssignParameters(source, target), LoadError);
  target.erase("w");
  target.emplace("w", Tensor({2}, {0.0, 0.0}, true));
  AssignParameters(source, target);
  EXPECT_DOUBLE_EQ(target.at("w")[1], 2.0);
}

}  // namespace
}  // namespace gain
