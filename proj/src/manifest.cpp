#include "cnsp/manifest.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace cnsp {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), (std::size_t)in.gcount());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << (int)md[i];
  return os.str();
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  const auto path = std::filesystem::path(dir) / "manifest.txt";
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "version = " << m.version << '\n';
  os << "status = " << m.status << '\n';
  if (!m.message.empty()) {
    std::string msg = m.message;
    for (auto& c : msg)
      if (c == '\n') c = ';';
    os << "message = " << msg << '\n';
  }
  os << "threads = " << m.threads << '\n';
  os << "wall_seconds = " << std::fixed << std::setprecision(3) << m.wall_seconds << '\n';
  os.unsetf(std::ios::fixed);
  for (const auto& [k, v] : m.config) os << "config." << k << " = " << v << '\n';
  for (const auto& [k, v] : m.fitted) os << "fitted." << k << " = " << v << '\n';
  for (const auto& f : m.files) {
    auto p = std::filesystem::path(dir) / f;
    os << "file." << f << " = " << (std::filesystem::exists(p) ? sha256_file(p.string()) : "missing")
       << '\n';
  }
}

} // namespace cnsp
