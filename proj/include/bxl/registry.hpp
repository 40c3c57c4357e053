#pragma once

// Module distribution: fetch component source over file paths or HTTP(S),
// cache it by content hash, import it into a workbook under a prefix, and
// apply interface-compatibility checks when updating.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bxl/lint.hpp"
#include "bxl/workbook.hpp"

#include <openssl/evp.h>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "../../vendor/httplib.h"

namespace bxl {

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline bool valid_utf8(std::string_view text) {
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  const auto* end = p + text.size();
  while (p < end) {
    const unsigned char b = *p;
    int follow = 0;
    unsigned char lo = 0x80, hi = 0xBF;
    if (b < 0x80) { ++p; continue; }
    else if (b >= 0xC2 && b <= 0xDF) follow = 1;
    else if (b == 0xE0) { follow = 2; lo = 0xA0; }
    else if (b >= 0xE1 && b <= 0xEC) follow = 2;
    else if (b == 0xED) { follow = 2; hi = 0x9F; }
    else if (b >= 0xEE && b <= 0xEF) follow = 2;
    else if (b == 0xF0) { follow = 3; lo = 0x90; }
    else if (b >= 0xF1 && b <= 0xF3) follow = 3;
    else if (b == 0xF4) { follow = 3; hi = 0x8F; }
    else return false;
    if (end - p <= follow) return false;
    ++p;
    for (int i = 0; i < follow; ++i, ++p) {
      if (*p < (i == 0 ? lo : 0x80) || *p > (i == 0 ? hi : 0xBF)) return false;
    }
  }
  return true;
}

inline std::string iso8601_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

struct FetchResult {
  std::string text;
  ModuleSource source;
};

class Registry {
 public:
  explicit Registry(std::filesystem::path cache_dir = default_cache_dir())
      : dir_(std::move(cache_dir)) {}

  static std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("BXL_CACHE"); env && *env)
      return std::filesystem::path(env);
    if (const char* home = std::getenv("HOME"); home && *home)
      return std::filesystem::path(home) / ".cache" / "bxl";
    return std::filesystem::temp_directory_path() / "bxl-cache";
  }

  const std::filesystem::path& cache_dir() const { return dir_; }
  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }

  FetchResult fetch(const std::string& locator) {
    std::string text;
    if (locator.rfind("http://", 0) == 0 || locator.rfind("https://", 0) == 0)
      text = fetch_url(locator);
    else
      text = read_file(local_path(locator));
    if (!valid_utf8(text))
      throw RegistryError("'" + locator + "' is not valid UTF-8 text");
    FetchResult result;
    result.text = std::move(text);
    result.source.locator = locator;
    result.source.sha256 = sha256_hex(result.text);
    result.source.retrieved_at = iso8601_utc_now();
    record(result);
    return result;
  }

 private:
  static std::filesystem::path local_path(const std::string& locator) {
    std::string path = locator;
    if (path.rfind("file:", 0) == 0) {
      path.erase(0, 5);
      if (path.rfind("//", 0) == 0) path.erase(0, 2);
    }
    return std::filesystem::path(path);
  }

  static std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RegistryError("cannot read '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof())
      throw RegistryError("cannot read '" + path.string() + "'");
    return text;
  }

  std::string fetch_url(const std::string& url) const {
    const std::size_t scheme_end = url.find("://") + 3;
    const std::size_t path_at = url.find('/', scheme_end);
    const std::string base =
        path_at == std::string::npos ? url : url.substr(0, path_at);
    const std::string path =
        path_at == std::string::npos ? "/" : url.substr(path_at);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const httplib::Result res = client.Get(path);
    if (!res)
      throw RegistryError("fetch of '" + url + "' failed: " +
                          httplib::to_string(res.error()));
    if (res->status != 200)
      throw RegistryError("fetch of '" + url + "' failed: HTTP " +
                          std::to_string(res->status));
    return res->body;
  }

  static void write_atomic(const std::filesystem::path& path,
                           const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw RegistryError("cannot write '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
  }

  void record(const FetchResult& fetched) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    write_atomic(dir_ / (fetched.source.sha256 + ".bxl"), fetched.text);

    nlohmann::json index = nlohmann::json::object();
    const std::filesystem::path index_path = dir_ / "index.json";
    if (std::filesystem::exists(index_path)) {
      std::ifstream in(index_path);
      try {
        index = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        index = nlohmann::json::object();
      }
      if (!index.is_object()) index = nlohmann::json::object();
    }
    std::string version;
    try {
      version = parse_module(fetched.text).version;
    } catch (const ParseError&) {
    }
    index[fetched.source.locator] = {
        {"sha256", fetched.source.sha256},
        {"version", version},
        {"retrieved_at", fetched.source.retrieved_at},
    };
    write_atomic(index_path, index.dump(2) + "\n");
  }

  std::filesystem::path dir_;
  std::chrono::milliseconds timeout_{5000};
};

inline bool valid_import_prefix(std::string_view prefix) {
  if (prefix.empty()) return false;
  const auto alpha = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  if (!alpha(prefix.front())) return false;
  for (const char c : prefix)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

inline std::vector<std::string> imported_names(const ImportRecord& record) {
  std::vector<std::string> names;
  names.reserve(record.module.definitions.size());
  for (const Definition& d : record.module.definitions)
    names.push_back(record.prefix + "." + d.name);
  return names;
}

namespace registry_detail {

/// Every name the workbook's name manager already holds, case-folded.
inline std::unordered_set<std::string> taken_names(const Workbook& wb,
                                                   const ImportRecord* skip) {
  std::unordered_set<std::string> taken;
  for (const DefinedName& n : wb.names) taken.insert(ci_fold(n.name));
  for (const Table& t : wb.tables) taken.insert(ci_fold(t.name));
  for (const auto& record : wb.imports) {
    if (record.get() == skip) continue;
    for (const std::string& name : imported_names(*record))
      taken.insert(ci_fold(name));
  }
  return taken;
}

inline void require_no_collisions(const Workbook& wb, const Module& m,
                                  const std::string& prefix,
                                  const ImportRecord* skip) {
  const auto taken = taken_names(wb, skip);
  std::string colliding;
  for (const Definition& d : m.definitions) {
    const std::string candidate = prefix + "." + d.name;
    if (taken.count(ci_fold(candidate))) {
      if (!colliding.empty()) colliding += ", ";
      colliding += candidate;
    }
  }
  if (!colliding.empty())
    throw RegistryError("name collision on import: " + colliding);
}

}  // namespace registry_detail

/// Registers every definition as `prefix.name`. Atomic: on collision or a
/// bad prefix the workbook is untouched and all colliding names are listed.
inline void import_module(Workbook& wb, Module m, const std::string& prefix,
                          ModuleSource source = {}) {
  if (!valid_import_prefix(prefix))
    throw RegistryError("invalid import prefix '" + prefix + "'");
  if (wb.find_import(prefix))
    throw RegistryError("prefix '" + prefix + "' is already imported");
  registry_detail::require_no_collisions(wb, m, prefix, nullptr);
  auto record = std::make_shared<ImportRecord>();
  record->prefix = prefix;
  record->module = std::move(m);
  record->source = std::move(source);
  wb.imports.push_back(std::move(record));
}

inline void remove_module(Workbook& wb, const std::string& prefix) {
  for (auto it = wb.imports.begin(); it != wb.imports.end(); ++it) {
    if (ci_equal((*it)->prefix, prefix)) {
      wb.imports.erase(it);
      return;
    }
  }
  throw RegistryError("prefix '" + prefix + "' is not imported");
}

struct UpdateResult {
  bool applied = false;
  std::vector<Finding> findings;
};

/// Replaces the module under `prefix`, reporting interface-compatibility
/// findings. With `strict` any finding refuses the update and leaves the
/// workbook unchanged.
inline UpdateResult update_module(Workbook& wb, const std::string& prefix,
                                  Module next, ModuleSource source = {},
                                  bool strict = false) {
  std::shared_ptr<ImportRecord>* slot = nullptr;
  for (auto& record : wb.imports)
    if (ci_equal(record->prefix, prefix)) {
      slot = &record;
      break;
    }
  if (!slot) throw RegistryError("prefix '" + prefix + "' is not imported");

  UpdateResult result;
  result.findings = check_version_compat((*slot)->module, next);
  if (strict && !result.findings.empty()) return result;

  registry_detail::require_no_collisions(wb, next, (*slot)->prefix,
                                         slot->get());
  auto record = std::make_shared<ImportRecord>();
  record->prefix = (*slot)->prefix;
  record->module = std::move(next);
  record->source = std::move(source);
  *slot = std::move(record);
  result.applied = true;
  return result;
}

}  // namespace bxl
