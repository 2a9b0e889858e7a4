#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nmor/io.hpp"

using namespace nmor;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 9.0);
  std::uniform_int_distribution<int> pick(0, 1);
  RunConfig c;
  c.scenario = pick(rng) ? Scenario::colliding : Scenario::single_probe;
  c.model.d_p1 = u(rng) + 5.0;
  c.model.d_p2 = -u(rng);
  c.model.alpha_p1 = u(rng) / 1000.0;
  c.model.alpha_p2 = u(rng) / 1000.0;
  c.model.far_detuned = pick(rng);
  c.boundary.probe1 = {u(rng), u(rng), u(rng) - 4.5, 0.1};
  c.boundary.probe2 = {u(rng), u(rng), 0.0, u(rng)};
  c.boundary.cross_angle = u(rng) / 3.0;
  c.boundary.length = u(rng);
  c.field.d_B = u(rng) - 4.5;
  if (pick(rng)) c.field.modulation = Modulation{Waveform::triangle, u(rng), u(rng) / 10.0};
  if (pick(rng)) c.field.physical = PhysicalField{1e-7 * u(rng), 8.8e10, 2.0e3};
  c.solver.grid_size = 16 + static_cast<int>(u(rng) * 10);
  c.solver.tol = 1e-9 * u(rng);
  c.solver.relaxation = u(rng) / 10.0;
  c.solver.mirror = pick(rng) ? MirrorRule::level_structure : MirrorRule::label_exchange;
  c.solver.cross_angle_mode = pick(rng) ? CrossAngleMode::tracking : CrossAngleMode::fixed;
  c.integrator.rtol = 1e-8 * u(rng);
  c.single = {u(rng), 10 + static_cast<int>(u(rng))};
  c.sweep.axes = {{"d_B", -u(rng), u(rng), 7, {}}, {"ratio", 0, 0, 0, {0.5, u(rng)}}};
  c.sweep.workers = 3;
  c.angle_scan = {0.0, u(rng), 9};
  c.signal = {1.0, 128.0, u(rng) / 100.0};
  c.output_dir = "dir with, comma";
  c.seed = rng();
  return c;
}

}  // namespace

TEST_CASE("empty configuration yields the defaults", "[config]") {
  const RunConfig d;
  CHECK(parse_config("") == d);
  CHECK(parse_config("{}") == d);
  CHECK(d.model.d_p1 == 10.0);
  CHECK(d.model.d_p2 == 5.0);
  CHECK(d.boundary.probe1.S_plus == 25.0);
  CHECK(d.boundary.length == 5.0);
}

TEST_CASE("invalid values and unknown keys name their path", "[config]") {
  CHECK_THAT(error_of(R"({"model": {"alpha_p1": -1}})"), StartsWith("model.alpha_p1"));
  CHECK_THAT(error_of(R"({"model": {"alpha_p3": 1}})"), ContainsSubstring("model.alpha_p3: unknown key"));
  CHECK_THAT(error_of(R"({"boundary": {"p2": {"Splus": 1}}})"), ContainsSubstring("boundary.p2.Splus"));
  CHECK_THAT(error_of(R"({"bogus": 1})"), ContainsSubstring("bogus: unknown key"));
  CHECK_THAT(error_of(R"({"solver": {"grid": 2.5}})"), ContainsSubstring("solver.grid: expected an integer"));
  CHECK_THAT(error_of(R"({"solver": {"mirror": "sideways"}})"), ContainsSubstring("solver.mirror"));
  CHECK_THAT(error_of(R"({"model": {"far_detuned": 1}})"), ContainsSubstring("expected true or false"));
  CHECK_THAT(error_of(R"({"sweep": {"axes": [{"name": "d_B", "extra": 0}]}})"),
             ContainsSubstring("sweep.axes[0].extra"));
  CHECK_THAT(error_of(R"({"model": )"), StartsWith("<syntax>"));
  CHECK_THAT(error_of("[1, 2]"), ContainsSubstring("expected an object"));
  CHECK_THAT(error_of(R"({"seed": -3})"), ContainsSubstring("seed"));
  CHECK_THAT(error_of(R"({"sweep": {"preset": "fig7"}})"), ContainsSubstring("unknown preset"));
}

TEST_CASE("serialisation round-trips", "[config]") {
  std::mt19937_64 rng(31337);
  for (int k = 0; k < 50; ++k) {
    const auto c = random_config(rng);
    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
  for (const auto& name : preset_names()) {
    const auto c = parse_config("", name);
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("presets as a base, explicit keys on top", "[config]") {
  const auto c = parse_config(R"({"model": {"d_p2": 7}})", "fig4");
  CHECK(c.model.d_p2 == 7.0);
  CHECK(c.field.d_B == preset_fig4().d_B);
  CHECK(c.sweep.preset == "fig4");
  const auto demo = parse_config("", "fig1-demo");
  REQUIRE(demo.field.modulation);
  CHECK(demo.field.modulation->frequency_hz == 20.0);
  CHECK(demo.seed == fig1_demo().seed);
  const auto cleared = parse_config(R"({"field": {"modulation": null}})", "fig1-demo");
  CHECK_FALSE(cleared.field.modulation);
  const auto f3 = parse_config(R"({"sweep": {"preset": "fig3"}})");
  CHECK(f3.scenario == Scenario::single_probe);
}

TEST_CASE("physical field adapter", "[config]") {
  const auto c = parse_config(R"({"field": {"physical": {"B_tesla": 1e-6, "g_mu0": 8.8e10, "gamma_rate": 4.4e4}}})");
  CHECK(c.field.static_d_B() == 8.8e10 * 1e-6 / 4.4e4);
  CHECK_THAT(error_of(R"({"field": {"physical": {"B_tesla": 1e-6}}})"), ContainsSubstring("gamma_rate"));
}

TEST_CASE("FNV-1a test vectors", "[io]") {
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("manifest hash tracks the inputs", "[io]") {
  RunConfig a;
  RunConfig b;
  CHECK(manifest_hash("sweep", a) == manifest_hash("sweep", b));
  CHECK(manifest_hash("sweep", a) != manifest_hash("colliding", a));
  b.sweep.workers = 7;
  b.output_dir = "elsewhere";
  CHECK(manifest_hash("sweep", a) == manifest_hash("sweep", b));
  b.solver.tol = 1e-9;
  CHECK(manifest_hash("sweep", a) != manifest_hash("sweep", b));
}

TEST_CASE("CSV formatting", "[io]") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(std::stod(csv_number(0.1)) == 0.1);
  CHECK(std::stod(csv_number(-1.0 / 3.0)) == -1.0 / 3.0);

  const auto path = std::filesystem::temp_directory_path() / "nmor_csv_test.csv";
  {
    CsvWriter w(path, "0123456789abcdef", {"x", "y,z"});
    w.row({1.5, 2.0});
  }
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "# manifest-hash: 0123456789abcdef\nx,\"y,z\"\n1.5,2\n");
  std::filesystem::remove(path);
}
