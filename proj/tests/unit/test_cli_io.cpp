#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "expander/cli_io.hpp"

using namespace expander;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "expander_unit";
  fs::create_directories(d);
  return d / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error for: " << text);
  return ErrorCode::IoError;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("parse a full configuration") {
    const RunConfig c = parse_config(
        "n=2, k=1, alpha=0.5\n"
        "phi.mode=cosine  # comment\n"
        "phi.c0=1.2, phi.coefficients=[2:0.3, 3:0.1:0.5]\n"
        "grid.n_r=16, grid.n_theta=32, grid.grading=1.5\n"
        "schedule.s_values=[0.5, 0.9], schedule.r_values=[0.5,0.9]\n"
        "newton.tol=1e-10, audit.delta1=0.02\n");
    CHECK(c.spec.n == 2);
    CHECK(c.spec.k == 1);
    CHECK(c.spec.alpha == 0.5);
    CHECK(c.spec.phi.c0 == 1.2);
    REQUIRE(c.spec.phi.terms.size() == 2);
    CHECK(c.spec.phi.terms[1].frequency == 3);
    CHECK(c.spec.phi.terms[1].phase == 0.5);
    CHECK(c.grid.n_r == 16);
    CHECK(c.grid.grading_exponent == 1.5);
    CHECK(c.schedule.s_values == std::vector<double>{0.5, 0.9});
    CHECK(c.schedule.newton_tol == 1e-10);
    CHECK(c.delta1 == 0.02);
  }

  TEST_CASE("defaults") {
    const RunConfig c = parse_config("n=2, alpha=1");
    CHECK(c.spec.k == 2);
    CHECK(c.spec.phi.mode == BoundaryData::Mode::constant);
    CHECK(c.delta0 == 0.1);
    CHECK(parse_config("n=2, alpha=1, phi.coefficients=[2:0.1]").spec.phi.mode == BoundaryData::Mode::cosine_series);
  }

  TEST_CASE("errors") {
    CHECK(code_of("alpha=1") == ErrorCode::ParseError);
    CHECK(message_of("alpha=1").find("'n'") != std::string::npos);
    CHECK(code_of("n=2, alpha=1, bogus=3") == ErrorCode::ParseError);
    CHECK(message_of("n=2, alpha=1\nbogus=3").find("line 2") != std::string::npos);
    CHECK(code_of("n=2, n=2, alpha=1") == ErrorCode::ParseError);
    CHECK(code_of("n=2, alpha=x") == ErrorCode::ParseError);
    CHECK(code_of("n=2, alpha=3") == ErrorCode::ValidationError);
    CHECK(code_of("k=1, alpha=1.5") == ErrorCode::ValidationError);
    CHECK(code_of("n=2, alpha=1, grid.n_theta=9") == ErrorCode::ValidationError);
    CHECK(code_of("n=2, alpha=1, audit.delta0=0.3") == ErrorCode::ValidationError);
  }

  TEST_CASE("round trip and overrides") {
    RunConfig c = parse_config("n=2, k=1, alpha=0.75, phi.coefficients=[2:0.3], schedule.r_values=[0.5,0.9,0.99]");
    const std::string text = config_to_text(c);
    CHECK(text.find("0.9000000") == std::string::npos);
    CHECK(config_to_text(parse_config(text)) == text);
    apply_override(c, "alpha=0.5");
    CHECK(c.spec.alpha == 0.5);
    CHECK_THROWS_AS(apply_override(c, "alpha=2"), Error);
    CHECK_THROWS_AS(apply_override(c, "nonsense"), Error);
  }

  TEST_CASE("field export and import") {
    GridSpec gs;
    gs.n_r = 4;
    gs.n_theta = 8;
    const auto g = std::make_shared<BallGrid>(build_grid(gs, 1.0));
    DualField f{g, std::vector<double>(g->node_count()), 0.9};
    for (int p = 0; p < g->node_count(); ++p) f.values[p] = -1.0 + 0.1 * std::sin(p + 0.3) * (1.0 / 3.0);
    const fs::path path = scratch("field.csv");
    const RunConfig cfg = parse_config("n=2, alpha=1");
    export_field(f, path, CaseTag::gauss, &cfg);
    const std::string text = slurp(path);
    CHECK(text.find("# param=0.9") != std::string::npos);
    CHECK(text.find("# config: ") != std::string::npos);
    int rows = 0;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);)
      if (!l.empty() && l[0] != '#') ++rows;
    CHECK(rows == 33);
    const DualField back = import_field(path);
    CHECK(back.param == 0.9);
    CHECK(back.grid->n_r == 4);
    CHECK(back.values == f.values);
    CHECK_THROWS_AS(import_field(scratch("absent.csv")), Error);
  }

  TEST_CASE("report text") {
    CheckRecord r;
    r.name = "demo";
    r.anchor = "a bound";
    r.passed = false;
    r.add("value", 0.25);
    const EstimateReport rep = emit_report({r}, {{"source", "unit"}});
    const std::string text = report_to_text(rep);
    CHECK(text.find("passed = false") != std::string::npos);
    CHECK(text.find("    - demo\n") != std::string::npos);
    CHECK(text.find("check demo {") != std::string::npos);
    CHECK(text.find("value = 0.25") != std::string::npos);
    CHECK(text.find("source = unit") != std::string::npos);
    CHECK(report_to_text(EstimateReport{}) == "# expander estimate report\n");
  }

  TEST_CASE("plot data of a hyperboloid") {
    PrimalSurface s;
    for (double th : {1.0, 0.0}) {
      for (double R : {20.0, 10.0}) {
        s.x.push_back(R * std::cos(th));
        s.y.push_back(R * std::sin(th));
        s.u.push_back(std::sqrt(R * R + 1.0));
      }
    }
    BoundaryData phi;
    phi.c0 = 0.0;
    const fs::path path = scratch("plot.csv");
    emit_plotdata(s, phi, path);
    std::istringstream is(slurp(path));
    std::vector<std::string> rows;
    for (std::string l; std::getline(is, l);)
      if (!l.empty() && l[0] != '#') rows.push_back(l);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("0,10,", 0) == 0);
    CHECK(rows[1].rfind("0,20,", 0) == 0);
    CHECK(rows[2].rfind("1,10,", 0) == 0);
    const double excess = std::stod(rows[1].substr(5, rows[1].rfind(',') - 5));
    CHECK(excess == doctest::Approx(std::sqrt(401.0) - 20.0));
  }

  TEST_CASE("reconstruction radii") {
    const auto r = reconstruction_radii(12.0);
    CHECK(r.front() == 0.0);
    CHECK(r[8] == 1.0);
    CHECK(r.back() == 12.0);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
  }
}
