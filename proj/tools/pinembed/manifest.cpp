#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "pinembed/error.hpp"

namespace pinembed::cli {

namespace {

using nlohmann::json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw InternalError("SHA-256 initialisation failed");
    }
  }
  void update(const char* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw InternalError("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) throw InternalError("SHA-256 final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

json RunManifest::to_json() const {
  return json{{"argv", argv},
              {"command", command},
              {"exit_code", exit_code},
              {"format", "pinembed.run-manifest"},
              {"inputs", inputs},
              {"outputs", outputs},
              {"seeds", seeds.is_null() ? json::object() : seeds},
              {"spec", spec},
              {"timings", {{"wall_seconds", wall_seconds}}},
              {"tool_version", tool_version}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    if (j.value("format", "") != "pinembed.run-manifest") throw DomainError("not a pinembed run manifest");
    RunManifest m;
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.command = j.at("command").get<std::string>();
    m.exit_code = j.at("exit_code").get<int>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds");
    m.spec = j.at("spec");
    m.wall_seconds = j.at("timings").at("wall_seconds").get<double>();
    m.tool_version = j.at("tool_version").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed run manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << manifest.to_json().dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return RunManifest::from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("malformed run manifest: ") + e.what());
  }
}

}  // namespace pinembed::cli
