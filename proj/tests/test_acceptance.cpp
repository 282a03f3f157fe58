#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "geoforms/acceptance.hpp"

using namespace geoforms;

TEST_CASE("acceptance gate") {
  std::vector<CriterionResult> results = run_acceptance();
  std::fputs(format_acceptance(results).c_str(), stdout);
  REQUIRE(results.size() == 11);
  for (const auto& r : results) {
    CAPTURE(r.index);
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
  CHECK(all_passed(results));
}
