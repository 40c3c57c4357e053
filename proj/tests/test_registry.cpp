#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bxl/recalc.hpp"
#include "bxl/registry.hpp"

using namespace bxl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bxl-registry-test-" +
            std::to_string(std::chrono::steady_clock::now()
                               .time_since_epoch()
                               .count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kModuleText =
    "// DESCRIPTION: Doubles a number.\n"
    "Twice\xce\xbb = LAMBDA(x, x*2);\n"
    "Plus\xce\xbb = LAMBDA(x, Twice\xce\xbb(x)+1);\n";

double eval_num(const Workbook& wb, const std::string& formula) {
  Recalculator engine(wb);
  engine.run();
  const Value v = engine.evaluate(formula);
  REQUIRE(std::holds_alternative<Scalar>(v));
  const Scalar s = std::get<Scalar>(v);
  INFO(formula << " -> " << (s.is_error() ? error_code_text(s.error()) : "ok"));
  REQUIRE(s.is_number());
  return s.number();
}

ErrorCode eval_err(const Workbook& wb, const std::string& formula) {
  Recalculator engine(wb);
  engine.run();
  const Scalar s = std::get<Scalar>(engine.evaluate(formula));
  REQUIRE(s.is_error());
  return s.error();
}

}  // namespace

TEST_CASE("sha256 matches the published test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == sha256_hex("abc"));
}

TEST_CASE("utf8 validation accepts real text and rejects broken bytes") {
  CHECK(valid_utf8("plain ascii"));
  CHECK(valid_utf8("Sum\xce\xbb with \xe2\x86\x92 arrows \xc2\xb6"));
  CHECK(valid_utf8(""));
  CHECK_FALSE(valid_utf8("\xff\xfe"));
  CHECK_FALSE(valid_utf8("truncated \xce"));
  CHECK_FALSE(valid_utf8("\xe0\x80\x80"));
  CHECK_FALSE(valid_utf8("\xed\xa0\x80"));
}

TEST_CASE("fetching a file records content, hash, and cache entries") {
  TempDir tmp;
  const fs::path module_path = tmp.path / "demo.bxl";
  write_file(module_path, kModuleText);
  Registry registry(tmp.path / "cache");

  const FetchResult direct = registry.fetch(module_path.string());
  CHECK(direct.text == kModuleText);
  CHECK(direct.source.sha256 == sha256_hex(kModuleText));
  CHECK(direct.source.locator == module_path.string());
  CHECK(direct.source.retrieved_at.find('T') != std::string::npos);

  const FetchResult prefixed = registry.fetch("file:" + module_path.string());
  CHECK(prefixed.text == kModuleText);
  CHECK(prefixed.source.sha256 == direct.source.sha256);

  const fs::path cached = tmp.path / "cache" / (direct.source.sha256 + ".bxl");
  REQUIRE(fs::exists(cached));
  CHECK(read_file(cached) == kModuleText);

  const auto index =
      nlohmann::json::parse(read_file(tmp.path / "cache" / "index.json"));
  REQUIRE(index.contains(module_path.string()));
  CHECK(index.at(module_path.string()).at("sha256") == direct.source.sha256);
  CHECK(index.at(module_path.string()).contains("retrieved_at"));
  CHECK(index.at(module_path.string()).contains("version"));
}

TEST_CASE("fetch failures raise registry errors") {
  TempDir tmp;
  Registry registry(tmp.path / "cache");
  CHECK_THROWS_AS(registry.fetch((tmp.path / "missing.bxl").string()),
                  RegistryError);

  const fs::path binary = tmp.path / "not-text.bxl";
  write_file(binary, std::string("\xff\xfe\x00\x01", 4));
  CHECK_THROWS_AS(registry.fetch(binary.string()), RegistryError);

  registry.set_timeout(std::chrono::milliseconds(300));
  CHECK_THROWS_AS(registry.fetch("https://127.0.0.1:1/mod.bxl"), RegistryError);
}

TEST_CASE("fetch pulls module text over http") {
  httplib::Server server;
  server.Get("/mod.bxl", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(kModuleText, "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir tmp;
  Registry registry(tmp.path / "cache");
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  const FetchResult fetched = registry.fetch(base + "/mod.bxl");
  CHECK(fetched.text == kModuleText);
  CHECK(fetched.source.sha256 == sha256_hex(kModuleText));
  CHECK_THROWS_AS(registry.fetch(base + "/absent.bxl"), RegistryError);

  server.stop();
  runner.join();
}

TEST_CASE("import registers prefixed names that evaluate in the workbook") {
  Workbook wb;
  wb.ensure_sheet("S");
  import_module(wb, parse_module(kModuleText), "M",
                {"file:demo.bxl", sha256_hex(kModuleText), "2023-04-10"});

  REQUIRE(wb.imports.size() == 1);
  const auto names = imported_names(*wb.imports[0]);
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "M.Twice\xce\xbb");
  CHECK(names[1] == "M.Plus\xce\xbb");

  CHECK(eval_num(wb, "=M.Twice\xce\xbb(4)") == 8.0);
  CHECK(eval_num(wb, "=M.Plus\xce\xbb(4)") == 9.0);

  const Workbook reloaded = workbook_from_json(workbook_to_json(wb));
  CHECK(eval_num(reloaded, "=M.Plus\xce\xbb(4)") == 9.0);
  CHECK(reloaded.imports[0]->source.sha256 == sha256_hex(kModuleText));
}

TEST_CASE("invalid prefixes are rejected") {
  Workbook wb;
  const Module m = parse_module(kModuleText);
  for (const char* bad : {"", "9X", "B D", "B.D", "pre-fix"})
    CHECK_THROWS_AS(import_module(wb, m, bad), RegistryError);
  CHECK(wb.imports.empty());
}

TEST_CASE("colliding imports change nothing and list every collision") {
  Workbook wb;
  wb.names.push_back({"M.Twice\xce\xbb", "=1"});
  wb.names.push_back({"m.plus\xce\xbb", "=2"});
  const std::size_t names_before = wb.names.size();

  try {
    import_module(wb, parse_module(kModuleText), "M");
    FAIL("import should have thrown");
  } catch (const RegistryError& e) {
    const std::string what = e.what();
    CHECK(what.find("M.Twice\xce\xbb") != std::string::npos);
    CHECK(what.find("M.Plus\xce\xbb") != std::string::npos);
  }
  CHECK(wb.imports.empty());
  CHECK(wb.names.size() == names_before);
}

TEST_CASE("the same prefix cannot be imported twice") {
  Workbook wb;
  import_module(wb, parse_module(kModuleText), "M");
  CHECK_THROWS_AS(import_module(wb, parse_module(kModuleText), "M"),
                  RegistryError);
  CHECK_THROWS_AS(import_module(wb, parse_module(kModuleText), "m"),
                  RegistryError);
  CHECK(wb.imports.size() == 1);
}

TEST_CASE("a second prefix for the same module coexists with the first") {
  Workbook wb;
  import_module(wb, parse_module(kModuleText), "BXD");
  import_module(wb, parse_module(kModuleText), "BXD2");
  CHECK(eval_num(wb, "=BXD.Twice\xce\xbb(3)") == 6.0);
  CHECK(eval_num(wb, "=BXD2.Twice\xce\xbb(3)") == 6.0);
}

TEST_CASE("table names participate in collision detection") {
  Workbook wb;
  Table t;
  t.name = "M.Twice\xce\xbb";
  t.sheet = "S";
  t.columns = {"c"};
  wb.tables.push_back(t);
  wb.ensure_sheet("S");
  CHECK_THROWS_AS(import_module(wb, parse_module(kModuleText), "M"),
                  RegistryError);
}

TEST_CASE("removing an import restores the original name set") {
  Workbook wb;
  wb.ensure_sheet("S");
  import_module(wb, parse_module(kModuleText), "M");
  CHECK(eval_num(wb, "=M.Twice\xce\xbb(4)") == 8.0);

  remove_module(wb, "m");
  CHECK(wb.imports.empty());
  CHECK(eval_err(wb, "=M.Twice\xce\xbb(4)") == ErrorCode::Name);
  CHECK_THROWS_AS(remove_module(wb, "M"), RegistryError);

  import_module(wb, parse_module(kModuleText), "M");
  CHECK(eval_num(wb, "=M.Twice\xce\xbb(4)") == 8.0);
}

TEST_CASE("a compatible update keeps old call sites working") {
  Workbook wb;
  wb.ensure_sheet("S");
  import_module(wb, parse_module("f = LAMBDA(a, a*2);"), "M");
  CHECK(eval_num(wb, "=M.f(5)") == 10.0);

  const UpdateResult result = update_module(
      wb, "M",
      parse_module("f = LAMBDA(a,[b], IF(ISOMITTED(b), a*2, a*2+b));"));
  CHECK(result.applied);
  CHECK(result.findings.empty());
  CHECK(eval_num(wb, "=M.f(5)") == 10.0);
  CHECK(eval_num(wb, "=M.f(5,1)") == 11.0);
}

TEST_CASE("a breaking update proceeds with findings unless strict") {
  const auto fresh = [] {
    Workbook wb;
    wb.ensure_sheet("S");
    import_module(wb, parse_module("f = LAMBDA(a, a*2);"), "M");
    return wb;
  };

  SECTION("default: applied, findings reported") {
    Workbook wb = fresh();
    const UpdateResult result =
        update_module(wb, "M", parse_module("f = LAMBDA(z, z*3);"));
    CHECK(result.applied);
    REQUIRE_FALSE(result.findings.empty());
    CHECK(result.findings[0].rule == LintRule::VersionCompat);
    CHECK(eval_num(wb, "=M.f(5)") == 15.0);
  }
  SECTION("strict: refused, workbook unchanged") {
    Workbook wb = fresh();
    const UpdateResult result = update_module(
        wb, "M", parse_module("f = LAMBDA(z, z*3);"), {}, true);
    CHECK_FALSE(result.applied);
    CHECK_FALSE(result.findings.empty());
    CHECK(eval_num(wb, "=M.f(5)") == 10.0);
  }
  SECTION("unknown prefix") {
    Workbook wb = fresh();
    CHECK_THROWS_AS(update_module(wb, "ZZ", parse_module("f = LAMBDA(a, a);")),
                    RegistryError);
  }
}

TEST_CASE("imported source re-parses to the registered definitions") {
  Workbook wb;
  import_module(wb, parse_module(kModuleText), "M");
  const ImportRecord& record = *wb.imports[0];
  const Module reparsed = parse_module(record.module.source_text);
  REQUIRE(reparsed.definitions.size() == record.module.definitions.size());
  for (std::size_t i = 0; i < reparsed.definitions.size(); ++i) {
    CHECK(reparsed.definitions[i].name == record.module.definitions[i].name);
    CHECK(expr_equal(reparsed.definitions[i].lambda,
                     record.module.definitions[i].lambda));
  }
}

TEST_CASE("component listings pair names with their descriptions") {
  const auto rows = list_components(parse_module(kModuleText));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].name == "Twice\xce\xbb");
  CHECK(rows[0].description == "Doubles a number.");
  CHECK(rows[1].name == "Plus\xce\xbb");
  CHECK(rows[1].description.empty());
  CHECK(list_components(parse_module("")).empty());
}

TEST_CASE("the cache directory honors the environment override") {
  TempDir tmp;
  const std::string previous =
      std::getenv("BXL_CACHE") ? std::getenv("BXL_CACHE") : "";
  setenv("BXL_CACHE", tmp.path.c_str(), 1);
  CHECK(Registry::default_cache_dir() == tmp.path);
  if (previous.empty())
    unsetenv("BXL_CACHE");
  else
    setenv("BXL_CACHE", previous.c_str(), 1);
}
