#include "cnsp/grid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

// Layout: "CNSP1", u32 dim, u32 n, f64 box length, u32 components, u8 payload
// kind (0 real, 1 complex), then the components one after another, each
// row-major.  Everything little-endian.

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace cnsp {

namespace {
constexpr char magic[5] = {'C', 'N', 'S', 'P', '1'};

template <class T> void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T> T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("snapshot truncated");
  return v;
}

void header(std::ofstream& os, const Grid& g, int rank, bool cplx) {
  os.write(magic, 5);
  put<std::uint32_t>(os, g.dim());
  put<std::uint32_t>(os, g.n());
  put<double>(os, g.box_length());
  put<std::uint32_t>(os, rank);
  put<std::uint8_t>(os, cplx ? 1 : 0);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}
} // namespace

void write_snapshot(const std::string& path, const PhysicalField& f) {
  auto os = open_out(path);
  header(os, *f.grid, f.rank, false);
  os.write(reinterpret_cast<const char*>(f.data.data()), f.data.size() * sizeof(double));
}

void write_snapshot(const std::string& path, const SpectralField& f) {
  auto os = open_out(path);
  header(os, *f.grid, f.rank, true);
  os.write(reinterpret_cast<const char*>(f.data.data()), f.data.size() * sizeof(cd));
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char m[5];
  is.read(m, 5);
  if (!is || std::memcmp(m, magic, 5) != 0) throw std::runtime_error("not a snapshot file: " + path);
  Snapshot s;
  s.dim = (int)get<std::uint32_t>(is);
  s.n = (int)get<std::uint32_t>(is);
  s.box_length = get<double>(is);
  s.rank = (int)get<std::uint32_t>(is);
  s.complex_payload = get<std::uint8_t>(is) != 0;
  if (s.dim < 1 || s.dim > 3 || s.n < 1) throw std::runtime_error("corrupt snapshot header");
  std::size_t count = s.rank;
  for (int a = 0; a < s.dim; ++a) count *= (std::size_t)s.n;
  if (s.complex_payload) count *= 2;
  s.payload.resize(count);
  is.read(reinterpret_cast<char*>(s.payload.data()), count * sizeof(double));
  if (!is) throw std::runtime_error("snapshot truncated");
  return s;
}

} // namespace cnsp
