#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "pdpset/instance.hpp"

using namespace pdpset;
using nlohmann::json;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs) {
    if (v.code == code) return true;
  }
  return false;
}

std::string parse_error(const json& doc) {
  try {
    (void)load_instance(doc);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("generator is deterministic per seed") {
  GenerateParams p;
  p.seed = 42;
  const Instance a = generate_instance(p);
  const Instance b = generate_instance(p);
  CHECK(same_instance(a, b));
  CHECK(save_instance(a).dump() == save_instance(b).dump());
}

TEST_CASE("generated instances are valid and well formed") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GenerateParams p;
    p.seed = seed;
    p.vehicles = 1 + static_cast<int>(seed % 4);
    p.requests = 1 + static_cast<int>(seed % 7);
    const Instance inst = generate_instance(p);
    CHECK(validate_instance(inst).empty());
    CHECK(inst.vehicles.size() == static_cast<std::size_t>(p.vehicles));
    CHECK(inst.requests.size() == static_cast<std::size_t>(p.requests));
    for (std::size_t k = 0; k < inst.vehicles.size(); ++k) {
      CHECK(inst.vehicles[k].id == static_cast<int>(k) + 1);
      CHECK(inst.vehicles[k].capacity == 6);
      CHECK_FALSE(inst.vehicles[k].destination.has_value());
    }
    for (const auto& r : inst.requests) {
      CHECK(r.pickup != r.dropoff);
      CHECK(r.qty == 1);
    }
  }
}

TEST_CASE("different seeds give different instances") {
  std::set<std::string> seen;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GenerateParams p;
    p.seed = seed;
    auto doc = save_instance(generate_instance(p));
    doc.erase("seed");
    seen.insert(doc.dump());
  }
  CHECK(seen.size() >= 99);
}

TEST_CASE("json round trip preserves every field") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GenerateParams p;
    p.seed = seed;
    p.rows = 3 + static_cast<int>(seed % 5);
    p.cols = 2 + static_cast<int>(seed % 6);
    p.weights = {0.5 + seed % 3, 1.25, 2.0, 0.75};
    Instance inst = generate_instance(p);
    if (seed % 2 == 0) inst.wait_metric = WaitMetric::journey;
    const Instance back = load_instance(json::parse(save_instance(inst).dump()));
    CHECK(same_instance(inst, back));
  }
}

TEST_CASE("file round trip") {
  const Instance inst = illustrative_instance();
  const auto path = std::filesystem::temp_directory_path() / "pdpset_instance_rt.json";
  save_instance_file(inst, path.string());
  CHECK(same_instance(inst, load_instance_file(path.string())));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_instance_file(path.string()), Error);
}

TEST_CASE("illustrative instance layout") {
  const Instance inst = illustrative_instance();
  CHECK(validate_instance(inst).empty());
  REQUIRE(inst.vehicles.size() == 2);
  CHECK(inst.vehicles[0].origin == 2);
  CHECK(inst.vehicles[1].origin == 9);
  CHECK(inst.requests[0].pickup == 1);
  CHECK(inst.requests[0].dropoff == 20);
  CHECK(inst.requests[1].pickup == 7);
  CHECK(inst.requests[1].dropoff == 19);
  CHECK(inst.requests[2].pickup == 3);
  CHECK(inst.requests[2].dropoff == 25);
  CHECK(inst.d_max == 2.0);
  CHECK(inst.t_range == 8.0);
}

TEST_CASE("validation reports each broken rule") {
  Instance inst = illustrative_instance();
  inst.requests[0].qty = 4;
  auto vs = validate_instance(inst);
  REQUIRE(has_code(vs, "unservable"));
  for (const auto& v : vs) {
    if (v.code == "unservable") CHECK(v.message.find("unservable request") != std::string::npos);
  }

  inst = illustrative_instance();
  inst.requests[1].dropoff = inst.requests[1].pickup;
  CHECK(has_code(validate_instance(inst), "same-location"));

  inst = illustrative_instance();
  inst.vehicles[1].id = 1;
  CHECK(has_code(validate_instance(inst), "duplicate-id"));

  inst = illustrative_instance();
  inst.vehicles[0].capacity = 0;
  CHECK(has_code(validate_instance(inst), "capacity"));

  inst = illustrative_instance();
  inst.weights.delta = -1.0;
  CHECK(has_code(validate_instance(inst), "weights"));

  inst = illustrative_instance();
  inst.d_max = -0.5;
  CHECK(has_code(validate_instance(inst), "d_max"));

  inst = illustrative_instance();
  inst.requests[2].pickup = 99;
  CHECK(has_code(validate_instance(inst), "node"));

  inst = illustrative_instance();
  inst.requests.clear();
  CHECK(has_code(validate_instance(inst), "requests"));
}

TEST_CASE("generator rejects bad parameters") {
  GenerateParams p;
  p.rows = 0;
  CHECK_THROWS_AS(generate_instance(p), Error);
  p = {};
  p.requests = 0;
  CHECK_THROWS_AS(generate_instance(p), Error);
  p = {};
  p.capacity = 0;
  CHECK_THROWS_AS(generate_instance(p), Error);
  p = {};
  p.d_max = -1;
  try {
    generate_instance(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::generation);
  }
}

TEST_CASE("parse errors name the offending field") {
  const json good = save_instance(illustrative_instance());

  json doc = good;
  doc["grid"].erase("cols");
  CHECK(parse_error(doc).find("/grid/cols") != std::string::npos);

  doc = good;
  doc["vehicles"][1]["origin"] = 26;
  CHECK(parse_error(doc).find("/vehicles/1/origin") != std::string::npos);

  doc = good;
  doc["requests"][0]["qty"] = "two";
  CHECK(parse_error(doc).find("/requests/0/qty") != std::string::npos);

  doc = good;
  doc["weights"]["beta"] = nullptr;
  CHECK(parse_error(doc).find("/weights/beta") != std::string::npos);

  doc = good;
  doc["wait_metric"] = "sometimes";
  CHECK(parse_error(doc).find("/wait_metric") != std::string::npos);

  doc = good;
  doc["vehicles"] = json::array();
  CHECK(parse_error(doc).find("/vehicles") != std::string::npos);

  CHECK_FALSE(parse_error(json::array()).empty());
}

TEST_CASE("optional destination is parsed") {
  json doc = save_instance(illustrative_instance());
  doc["vehicles"][0]["destination"] = 5;
  const Instance inst = load_instance(doc);
  REQUIRE(inst.vehicles[0].destination.has_value());
  CHECK(*inst.vehicles[0].destination == 5);
  CHECK_FALSE(inst.vehicles[1].destination.has_value());
  CHECK(save_instance(inst)["vehicles"][0]["destination"] == 5);
}
