#include "rtaprop/cli/manifest.hpp"

#include "rtaprop/error.hpp"
#include "rtaprop/io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <memory>

namespace rtaprop::cli {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", digest[i]);
  }
  return hex;
}

void RunManifest::add_input(const std::filesystem::path& path, const std::string& name) {
  input_digests.emplace_back(name, sha256_hex(io::read_text_file(path)));
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["tool_version"] = tool_version;
  doc["seed"] = seed;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) {
    cfg[k] = v;
  }
  doc["config"] = cfg;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& [name, digest] : input_digests) {
    inputs.push_back({{"name", name}, {"sha256", digest}});
  }
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  return doc.dump(2) + "\n";
}

} // namespace rtaprop::cli
