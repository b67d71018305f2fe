#include <array>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <openssl/evp.h>

#include "cli.hpp"

namespace obswin::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * length);
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  file.close();
  if (!file) throw IoError("failed writing " + path.string());
}

}  // namespace

Json report_bundle(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  if (artifacts.empty()) throw PreconditionError("report bundle needs at least one artifact");

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));

  Json files = Json::array();
  for (const Artifact& a : artifacts) {
    write_file(dir / a.name, a.content);
    files.push_back({{"name", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  }
  Json index = {{"schema_version", kSchemaVersion}, {"kind", "index"}, {"files", files}};
  write_file(dir / "index.json", canonical_dump(index));
  return index;
}

}  // namespace obswin::cli
