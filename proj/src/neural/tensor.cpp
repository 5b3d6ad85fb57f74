#include "mrrnn/neural/tensor.hpp"

#include "mrrnn/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mrrnn::neural {
namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw ResourceError("truncated tensor payload");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

constexpr std::uint64_t kMaxName = 4096;
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 34;

}  // namespace

void write_tensors(std::ostream& out, const ParameterSet<double>& params) {
  put_u64(out, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    const auto& m = params.at(i);
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const int rank = params.rank(i);
    put_u64(out, static_cast<std::uint64_t>(rank));
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    if (rank == 2) put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
    }
  }
}

ParameterSet<double> read_tensors(std::istream& in) {
  ParameterSet<double> params;
  const std::uint64_t count = get_u64(in);
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::uint64_t len = get_u64(in);
    if (len == 0 || len > kMaxName) throw ResourceError("bad tensor name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) {
      throw ResourceError("truncated tensor name");
    }
    const std::uint64_t rank = get_u64(in);
    if (rank != 1 && rank != 2) throw ResourceError("bad rank for tensor " + name);
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = rank == 2 ? get_u64(in) : 1;
    if (rows == 0 || cols == 0 || rows * cols > kMaxEntries) {
      throw ResourceError("bad shape for tensor " + name);
    }
    ParamId id = params.add(name, static_cast<Index>(rows), static_cast<Index>(cols),
                            static_cast<int>(rank));
    auto& m = params[id];
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = std::bit_cast<double>(get_u64(in));
    }
  }
  return params;
}

}  // namespace mrrnn::neural
