#pragma once

// Batch front end: a sectioned key-value metric-spec format, the six batch
// commands (curvature, forms, classify, yamabe, conformal-check, selftest),
// and deterministic JSON reports. Reports serialize every number as a
// %.15g string so two runs on the same spec are byte-identical.
//
// Spec file format (hand-editable; '#' starts a comment):
//   dim = 4
//   kind = normal_form            # or base_like
//   coords = t x y z              # first name is the transverse coordinate
//   [gbar]
//   x,x = "exp(2*t)"              # upper triangle; omitted entries are 0
//   y,y = "exp(2*t)"
//   z,z = "exp(2*t)"
//   [warp]
//   h = "exp(2*t)"                # declared fiber warp (classify)
//   f = "exp(x^2)"                # base warp, required for kind = base_like
//   omega = "exp(x)"              # conformal factor (conformal-check)
//   [grid]
//   x = -0.5 0.5 3                # lo hi count
//   margin = 0.1                  # excluded strip at the range boundaries
//
// Exit codes: 0 success, 1 failed classification/verification, 2 spec syntax
// error, 3 spec semantic error.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoforms/hypersurface.hpp"

namespace geoforms {

class CliError : public std::runtime_error {
public:
  CliError(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code(exit_code) {}
  int exit_code;
};

struct GridAxis {
  double lo = -1.0, hi = 1.0;
  int count = 2;
};

struct MetricSpec {
  int dim = 0;
  std::vector<std::string> coords;  // [transverse, sigma...]
  bool base_like = false;
  // Upper-triangle components by sigma-coordinate index pair (i <= j).
  std::map<std::pair<int, int>, Expression> gbar;
  std::map<std::pair<int, int>, std::string> gbar_sources;
  std::optional<Expression> fiber_warp;  // h
  std::optional<Expression> base_warp;   // f
  std::optional<Expression> omega;
  std::map<std::string, std::string> warp_sources;
  std::map<std::string, GridAxis> grid;  // by sigma coordinate name
  double margin = 0.1;
};

MetricSpec read_spec(const std::string& path);
MetricSpec read_spec_text(const std::string& text, const std::string& name);

Chart to_chart(const MetricSpec& spec);

// Deterministic sample grid: per-axis linspace over [lo+margin, hi-margin]
// (declared or default axes), cartesian product in coordinate order. A
// positive limit keeps only the first `limit` points.
std::vector<Point> sample_points(const MetricSpec& spec, int limit = 0);

struct RunFlags {
  int max_order = kDefaultMaxOrder;
  double tol = 1e-8;
  int points = 0;     // 0 = whole grid
  std::string out;    // optional report copy target (handled by the caller)
};

struct RunResult {
  std::string report;  // JSON text
  int exit_code = 0;
};

// Worker count for point sweeps: GEOFORMS_WORKERS, default 1.
int worker_count();

RunResult run(const std::string& command, const std::optional<MetricSpec>& spec,
              const RunFlags& flags);

}  // namespace geoforms
