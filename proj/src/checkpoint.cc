#include "gain/checkpoint.h"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "gain/errors.h"

namespace gain {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'I', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void Put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw LoadError("checkpoint " + path.string() + ": truncated file");
  }
  return value;
}

std::string GetString(std::istream& in, std::size_t len, const std::filesystem::path& path) {
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), static_cast<std::streamsize>(len))) {
    throw LoadError("checkpoint " + path.string() + ": truncated file");
  }
  return s;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, checkpoint.version);
  Put<std::uint64_t>(out, checkpoint.seed);
  Put<std::uint64_t>(out, checkpoint.metadata.size());
  out.write(checkpoint.metadata.data(), static_cast<std::streamsize>(checkpoint.metadata.size()));
  Put<std::uint64_t>(out, checkpoint.params.size());
  for (const auto& [name, tensor] : checkpoint.params) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) Put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data().data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("checkpoint " + path.string() + ": bad magic");
  }
  Checkpoint ck;
  ck.version = Get<std::uint32_t>(in, path);
  if (ck.version != Checkpoint::kFormatVersion) {
    throw LoadError("checkpoint " + path.string() + ": unsupported format version " + std::to_string(ck.version));
  }
  ck.seed = Get<std::uint64_t>(in, path);
  ck.metadata = GetString(in, Get<std::uint64_t>(in, path), path);
  const auto count = Get<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = GetString(in, Get<std::uint32_t>(in, path), path);
    const auto rank = Get<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = Get<std::uint64_t>(in, path);
    std::vector<double> data(NumElements(shape));
    if (!data.empty() &&
        !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw LoadError("checkpoint " + path.string() + ": truncated tensor '" + name + "'");
    }
    ck.params.emplace(std::move(name), Tensor(std::move(shape), std::move(data), true));
  }
  return ck;
}

void AssignParameters(const ParamStore& source, ParamStore& target) {
  std::vector<std::string> missing, extra;
  for (const auto& [name, t] : target)
    if (!source.contains(name)) missing.push_back(name);
  for (const auto& [name, t] : source)
    if (!target.contains(name)) extra.push_back(name);
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "checkpoint does not match model;";
    if (!missing.empty()) {
      msg += " missing:";
      for (const auto& n : missing) msg += " " + n;
    }
    if (!extra.empty()) {
      msg += (missing.empty() ? "" : ";");
      msg += " extra:";
      for (const auto& n : extra) msg += " " + n;
    }
    throw LoadError(msg);
  }
  for (auto& [name, t] : target) {
    const Tensor& src = source.at(name);
    if (src.shape() != t.shape()) {
      throw LoadError("checkpoint tensor '" + name + "' has shape " + ShapeString(src.shape()) +
                      ", model expects " + ShapeString(t.shape()));
    }
    std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
  }
}

}  // namespace gain
