#include "geoforms/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "geoforms/acceptance.hpp"
#include "geoforms/classify.hpp"
#include "geoforms/conformal.hpp"
#include "geoforms/yamabe.hpp"

namespace geoforms {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec-file parsing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strip a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

struct RawEntry {
  std::string section;  // "" for top level
  std::string key;
  std::string value;  // trimmed, quotes kept
  int line = 0;
};

[[noreturn]] void syntax_error(const std::string& name, int line,
                               const std::string& what) {
  throw CliError(2, name + ":" + std::to_string(line) + ": syntax error: " + what);
}

[[noreturn]] void semantic_error(const std::string& name, int line,
                                 const std::string& what) {
  std::string loc = line > 0 ? ":" + std::to_string(line) : "";
  throw CliError(3, name + loc + ": semantic error: " + what);
}

std::vector<RawEntry> tokenize_spec(const std::string& text,
                                    const std::string& name) {
  std::vector<RawEntry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') syntax_error(name, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) syntax_error(name, line, "empty section name");
      continue;
    }
    std::size_t eq = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      else if (s[i] == '=' && !quoted) { eq = i; break; }
    }
    if (eq == std::string::npos)
      syntax_error(name, line, "expected 'key = value'");
    RawEntry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) syntax_error(name, line, "empty key");
    if (e.value.empty()) syntax_error(name, line, "empty value");
    if (!seen.insert({section, e.key}).second)
      syntax_error(name, line, "duplicate key '" + e.key + "'" +
                                   (section.empty() ? "" : " in section [" + section + "]"));
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

// Value must be a quoted expression string; parse it in the spec's DSL.
Expression parse_quoted_expr(const RawEntry& e, const std::string& name) {
  const std::string& v = e.value;
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    syntax_error(name, e.line, "expected a quoted expression string");
  try {
    return parse_expression(v.substr(1, v.size() - 2));
  } catch (const ParseError& err) {
    syntax_error(name, e.line, std::string("bad expression: ") + err.what());
  }
}

void collect_variables(const NodeRef& n, std::set<std::string>& out,
                       std::unordered_set<const ExprNode*>& visited) {
  if (!n || !visited.insert(n.get()).second) return;
  if (n->kind == ExprNode::Kind::Variable) out.insert(n->name);
  collect_variables(n->a, out, visited);
  collect_variables(n->b, out, visited);
}

void check_declared(const Expression& e, const MetricSpec& spec,
                    const std::string& name, int line, bool allow_transverse) {
  std::set<std::string> vars;
  std::unordered_set<const ExprNode*> visited;
  collect_variables(e.node(), vars, visited);
  for (const std::string& v : vars) {
    auto it = std::find(spec.coords.begin(), spec.coords.end(), v);
    if (it == spec.coords.end())
      semantic_error(name, line, "undeclared coordinate '" + v + "'");
    if (!allow_transverse && it == spec.coords.begin())
      semantic_error(name, line,
                     "transverse coordinate '" + v + "' not allowed here");
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, const std::string& name, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    syntax_error(name, line, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size())
    syntax_error(name, line, "expected a number, got '" + tok + "'");
  return v;
}

int sigma_index(const MetricSpec& spec, const std::string& coord,
                const std::string& name, int line) {
  for (std::size_t i = 1; i < spec.coords.size(); ++i)
    if (spec.coords[i] == coord) return static_cast<int>(i) - 1;
  if (!spec.coords.empty() && spec.coords[0] == coord)
    semantic_error(name, line,
                   "transverse coordinate '" + coord + "' not allowed here");
  semantic_error(name, line, "undeclared coordinate '" + coord + "'");
}

MetricSpec interpret(const std::vector<RawEntry>& entries,
                     const std::string& name) {
  MetricSpec spec;
  bool have_dim = false, have_coords = false;
  // Pass 1: top-level structure, so section entries can refer to coords
  // regardless of ordering in the file.
  for (const RawEntry& e : entries) {
    if (!e.section.empty()) continue;
    if (e.key == "dim") {
      double v = parse_number(e.value, name, e.line);
      spec.dim = static_cast<int>(v);
      if (spec.dim != v || spec.dim < 3)
        semantic_error(name, e.line, "dim must be an integer >= 3");
      have_dim = true;
    } else if (e.key == "kind") {
      if (e.value == "normal_form") spec.base_like = false;
      else if (e.value == "base_like") spec.base_like = true;
      else semantic_error(name, e.line,
                          "kind must be normal_form or base_like, got '" + e.value + "'");
    } else if (e.key == "coords") {
      spec.coords = split_ws(e.value);
      std::set<std::string> uniq;
      for (const std::string& c : spec.coords) {
        if (!valid_identifier(c))
          syntax_error(name, e.line, "bad coordinate name '" + c + "'");
        if (!uniq.insert(c).second)
          semantic_error(name, e.line, "repeated coordinate '" + c + "'");
      }
      have_coords = true;
    } else {
      semantic_error(name, e.line, "unknown top-level key '" + e.key + "'");
    }
  }
  if (!have_dim) semantic_error(name, 0, "missing required key 'dim'");
  if (!have_coords) semantic_error(name, 0, "missing required key 'coords'");
  if (static_cast<int>(spec.coords.size()) != spec.dim)
    semantic_error(name, 0, "coords lists " + std::to_string(spec.coords.size()) +
                                " names but dim = " + std::to_string(spec.dim));

  // Pass 2: sections.
  for (const RawEntry& e : entries) {
    if (e.section.empty()) continue;
    if (e.section == "gbar") {
      std::size_t comma = e.key.find(',');
      if (comma == std::string::npos)
        syntax_error(name, e.line, "gbar keys look like 'x,y'");
      int i = sigma_index(spec, trim(e.key.substr(0, comma)), name, e.line);
      int j = sigma_index(spec, trim(e.key.substr(comma + 1)), name, e.line);
      if (i > j) std::swap(i, j);
      Expression comp = parse_quoted_expr(e, name);
      check_declared(comp, spec, name, e.line, /*allow_transverse=*/!spec.base_like);
      if (!spec.gbar.emplace(std::make_pair(i, j), comp).second)
        syntax_error(name, e.line, "duplicate gbar component '" + e.key + "'");
      spec.gbar_sources[{i, j}] = unquote(e.value);
    } else if (e.section == "warp") {
      Expression w = parse_quoted_expr(e, name);
      if (e.key == "h") {
        check_declared(w, spec, name, e.line, /*allow_transverse=*/true);
        spec.fiber_warp = w;
      } else if (e.key == "f") {
        check_declared(w, spec, name, e.line, /*allow_transverse=*/false);
        spec.base_warp = w;
      } else if (e.key == "omega") {
        check_declared(w, spec, name, e.line, /*allow_transverse=*/true);
        spec.omega = w;
      } else {
        semantic_error(name, e.line, "unknown warp key '" + e.key + "' (h, f, omega)");
      }
      spec.warp_sources[e.key] = unquote(e.value);
    } else if (e.section == "grid") {
      if (e.key == "margin") {
        spec.margin = parse_number(e.value, name, e.line);
        if (spec.margin < 0.0)
          semantic_error(name, e.line, "margin must be >= 0");
        continue;
      }
      (void)sigma_index(spec, e.key, name, e.line);
      std::vector<std::string> toks = split_ws(e.value);
      if (toks.size() != 3)
        syntax_error(name, e.line, "grid axes look like 'lo hi count'");
      GridAxis ax;
      ax.lo = parse_number(toks[0], name, e.line);
      ax.hi = parse_number(toks[1], name, e.line);
      double c = parse_number(toks[2], name, e.line);
      ax.count = static_cast<int>(c);
      if (ax.count != c || ax.count < 1)
        semantic_error(name, e.line, "grid count must be an integer >= 1");
      if (!(ax.lo < ax.hi))
        semantic_error(name, e.line, "grid range needs lo < hi");
      spec.grid[e.key] = ax;
    } else {
      semantic_error(name, e.line, "unknown section [" + e.section + "]");
    }
  }

  for (int i = 0; i < spec.dim - 1; ++i)
    if (!spec.gbar.count({i, i}))
      semantic_error(name, 0, "missing diagonal gbar component '" +
                                  spec.coords[i + 1] + "," + spec.coords[i + 1] + "'");
  if (spec.base_like && !spec.base_warp)
    semantic_error(name, 0, "kind = base_like requires warp f");
  for (const auto& [coord, ax] : spec.grid)
    if (ax.hi - ax.lo <= 2.0 * spec.margin)
      semantic_error(name, 0, "grid range for '" + coord +
                                  "' is swallowed by the margin");
  return spec;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

std::string fmt15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

json num(double v) { return json(fmt15(v)); }

json tensor_json_rec(const TensorValue& t, std::vector<int>& idx, int depth) {
  if (depth == t.rank())
    return num(t.at(std::span<const int>(idx.data(), idx.size())));
  json arr = json::array();
  for (int i = 0; i < t.dim(); ++i) {
    idx[depth] = i;
    arr.push_back(tensor_json_rec(t, idx, depth + 1));
  }
  return arr;
}

json tensor_json(const TensorValue& t) {
  std::vector<int> idx(t.rank(), 0);
  return tensor_json_rec(t, idx, 0);
}

json conventions_json() {
  return json{
      {"ff_sign", ff_sign() > 0 ? "+1" : "-1"},
      {"riemann", "R_abcd = g_ce R_ab^e_d; Sc(unit round S^3) = +6"},
      {"schouten", "P = (Ric - Sc g / (2(d-1))) / (d-2)"},
  };
}

json spec_echo(const std::optional<MetricSpec>& spec) {
  if (!spec) return json(nullptr);
  json gbar = json::object();
  for (const auto& [ij, src] : spec->gbar_sources)
    gbar[spec->coords[ij.first + 1] + "," + spec->coords[ij.second + 1]] = src;
  json warp = json::object();
  for (const auto& [k, src] : spec->warp_sources) warp[k] = src;
  json grid = json::object();
  for (const auto& [coord, ax] : spec->grid)
    grid[coord] = json{{"lo", num(ax.lo)}, {"hi", num(ax.hi)},
                       {"count", ax.count}};
  return json{{"dim", spec->dim},
              {"kind", spec->base_like ? "base_like" : "normal_form"},
              {"coords", spec->coords},
              {"gbar", gbar},
              {"warp", warp},
              {"grid", grid},
              {"margin", num(spec->margin)}};
}

std::string point_key(const Point& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ";";
    out += k + "=" + fmt15(v);
  }
  return out;
}

RunResult finish(const std::string& command,
                 const std::optional<MetricSpec>& spec, json results,
                 json residual_summary, const std::string& verdict,
                 int exit_code) {
  json report{{"command", command},
              {"conventions", conventions_json()},
              {"results", std::move(results)},
              {"residual-summary", std::move(residual_summary)},
              {"spec-echo", spec_echo(spec)},
              {"verdict", verdict}};
  return RunResult{report.dump(2) + "\n", exit_code};
}

const MetricSpec& require_spec(const std::optional<MetricSpec>& spec,
                               const std::string& command) {
  if (!spec)
    throw CliError(3, "command '" + command + "' requires a metric spec file");
  return *spec;
}

// Run f(i) for i in [0, n) across GEOFORMS_WORKERS threads. Symbolic field
// construction is serialized inside the workspaces; workers must only write
// to their own output slots.
template <typename F>
void sweep(std::size_t n, F&& f) {
  int w = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

RunResult run_curvature(const MetricSpec& spec, const RunFlags& flags) {
  Chart chart = to_chart(spec);
  MetricWorkspace ws(chart.full);
  std::vector<Point> pts = sample_points(spec, flags.points);
  bool want_bach = spec.dim >= 4;
  std::vector<json> rows(pts.size());
  sweep(pts.size(), [&](std::size_t i) {
    Point p = pts[i];
    p[chart.transverse] = 0.0;
    CurvatureStack st = curvature_stack(ws, p, want_bach);
    json row{{"point", point_key(pts[i])},
             {"Sc", num(st.sc)},
             {"J", num(st.j)},
             {"Ricci", tensor_json(st.ricci)},
             {"Schouten", tensor_json(st.schouten)},
             {"max_abs_Weyl", num(st.weyl.max_abs())},
             {"max_abs_Cotton", num(st.cotton.max_abs())},
             {"max_abs_Bach", st.bach ? num(st.bach->max_abs()) : json(nullptr)},
             {"condition_estimate", num(st.condition_estimate)}};
    rows[i] = std::move(row);
  });
  json results{{"points", json(rows)}};
  Point p0 = pts.front();
  p0[chart.transverse] = 0.0;
  double fd = fd_check(ws, FdQuantity::Riemann, p0, 1e-4);
  json summary{{"fd_riemann_first_point", num(fd)}};
  return finish("curvature", spec, results, summary, "ok", 0);
}

RunResult run_forms(const MetricSpec& spec, const RunFlags& flags) {
  Chart chart = to_chart(spec);
  Hypersurface hs(chart, flags.max_order);
  std::vector<Point> pts = sample_points(spec, flags.points);
  std::vector<json> rows(pts.size());
  std::vector<std::map<int, double>> worst(pts.size());
  sweep(pts.size(), [&](std::size_t i) {
    const Point& p = pts[i];
    json ff = json::object();
    for (int k = 2; k <= flags.max_order; ++k) {
      TensorValue v = hs.fundamental_form(k, p);
      ff[std::to_string(k)] = tensor_json(v);
      worst[i][k] = v.max_abs();
    }
    rows[i] = json{{"point", point_key(p)},
                   {"H", num(hs.mean_curvature(p))},
                   {"FF", std::move(ff)}};
  });
  json summary = json::object();
  for (int k = 2; k <= flags.max_order; ++k) {
    double m = 0.0;
    for (const auto& w : worst) m = std::max(m, w.at(k));
    summary["max_abs_FF" + std::to_string(k)] = num(m);
  }
  json results{{"points", json(rows)}};
  return finish("forms", spec, results, summary, "ok", 0);
}

RunResult run_classify(const MetricSpec& spec, const RunFlags& flags) {
  Chart chart = to_chart(spec);
  Hypersurface hs(chart, flags.max_order);
  std::vector<Point> pts = sample_points(spec, flags.points);
  ClassificationReport rep = check_product(hs, flags.max_order, pts, flags.tol);
  if (rep.verdict != Verdict::Product) {
    if (spec.base_like && spec.base_warp) {
      rep = check_base_like(hs, *spec.base_warp, flags.max_order, pts, flags.tol);
    } else if (spec.fiber_warp) {
      rep = check_fiber_like(hs, *spec.fiber_warp, flags.max_order, pts, flags.tol);
    }
  }
  json residuals = json::object();
  double worst = 0.0;
  for (const auto& [k, r] : rep.residuals) {
    residuals[std::to_string(k)] = num(r);
    worst = std::max(worst, r);
  }
  json diag = json::object();
  for (const auto& [k, v] : rep.diagnostics) diag[k] = num(v);
  json results{{"verdict", verdict_string(rep)},
               {"checked_order", rep.checked_order},
               {"rejected_order", rep.rejected_order},
               {"residuals", residuals},
               {"diagnostics", diag},
               {"product_subverdict", rep.product_subverdict},
               {"num_points", static_cast<int>(pts.size())}};
  json summary{{"max_order_residual", num(worst)}, {"tol", num(flags.tol)}};
  bool accepted = rep.verdict == Verdict::Product ||
                  rep.verdict == Verdict::FiberLike ||
                  rep.verdict == Verdict::BaseLike;
  return finish("classify", spec, results, summary, verdict_string(rep),
                accepted ? 0 : 1);
}

RunResult run_yamabe(const MetricSpec& spec, const RunFlags& flags) {
  const std::string& t = spec.coords[0];
  for (const auto& [ij, comp] : spec.gbar)
    if (comp.depends_on(t))
      throw CliError(3, "yamabe requires a product metric: gbar component '" +
                            spec.coords[ij.first + 1] + "," +
                            spec.coords[ij.second + 1] +
                            "' depends on the transverse coordinate");
  if (spec.base_like)
    throw CliError(3, "yamabe requires kind = normal_form");

  std::vector<std::string> sigma_coords(spec.coords.begin() + 1,
                                        spec.coords.end());
  int n = spec.dim - 1;
  std::vector<Expression> comps(static_cast<std::size_t>(n) * n, Expression());
  for (const auto& [ij, comp] : spec.gbar) {
    comps[ij.first * n + ij.second] = comp;
    comps[ij.second * n + ij.first] = comp;
  }
  MetricWorkspace fiber(MetricField(sigma_coords, comps));
  int target = flags.max_order == kDefaultMaxOrder ? -1 : flags.max_order;
  std::optional<YamabeSolution> solved;
  try {
    solved = solve_series(fiber, target);
  } catch (const YamabeError& e) {
    throw CliError(3, std::string("yamabe: ") + e.what());
  }
  const YamabeSolution& sol = *solved;
  SeriesInS residual = yamabe_residual(sol.sigma, fiber, spec.dim);

  std::vector<Point> pts = sample_points(spec, flags.points);
  std::vector<json> rows(pts.size());
  std::vector<double> worst(pts.size(), 0.0);
  sweep(pts.size(), [&](std::size_t i) {
    const Point& p = pts[i];
    Evaluator ev(p);
    json coeffs = json::object();
    for (int j = 3; j <= sol.solved_order; j += 2)
      coeffs["phi" + std::to_string(j)] = num(ev(sol.sigma.coeff(j)));
    json row{{"point", point_key(p)}, {"sigma_coefficients", std::move(coeffs)}};
    row["willmore"] = sol.willmore ? num(ev(*sol.willmore)) : json(nullptr);
    double w = 0.0;
    for (int j = 0; j <= sol.solved_order - 1 && j <= residual.truncation(); ++j)
      w = std::max(w, std::abs(ev(residual.coeff(j))));
    row["max_abs_residual_coeff"] = num(w);
    worst[i] = w;
    rows[i] = std::move(row);
  });
  double wmax = *std::max_element(worst.begin(), worst.end());
  json results{{"points", json(rows)},
               {"solved_order", sol.solved_order},
               {"has_willmore_obstruction", sol.willmore.has_value()}};
  json summary{{"max_abs_residual_coeff", num(wmax)}};
  return finish("yamabe", spec, results, summary, "ok", 0);
}

RunResult run_conformal_check(const MetricSpec& spec, const RunFlags& flags) {
  Chart chart = to_chart(spec);
  Hypersurface hs(chart, flags.max_order);
  std::optional<Hypersurface> rescaled;
  if (spec.omega) rescaled.emplace(rescale(chart, *spec.omega), flags.max_order);

  std::vector<Point> pts = sample_points(spec, flags.points);
  std::vector<json> rows(pts.size());
  std::vector<double> worst(pts.size(), 0.0);
  sweep(pts.size(), [&](std::size_t i) {
    const Point& p = pts[i];
    double bad = 0.0;
    WeightedForm iio = trace_free_second_ff(hs, p);
    WeightedForm iiio = third_conformal_ff(hs, p);
    TensorValue g = hs.induced_metric(p);
    TensorValue gi = hs.intrinsic().inverse_at(p);
    double tr_iio = std::abs(trace(raise_slot(iio.value, 0, gi), 0, 1).at({}));
    double gs = gauss_schouten_residual(hs, p).max_abs();
    bad = std::max({bad, tr_iio, gs});
    json row{{"point", point_key(p)},
             {"IIo", tensor_json(iio.value)},
             {"IIo_weight", num(iio.weight)},
             {"IIIo", tensor_json(iiio.value)},
             {"IIIo_weight", num(iiio.weight)},
             {"IIIo_representative", iiio.representative},
             {"trace_IIo", num(tr_iio)},
             {"gauss_schouten_residual", num(gs)}};
    if (iiio.product_comparison) {
      double cmp = max_abs_diff(iiio.value, *iiio.product_comparison);
      row["product_comparison_residual"] = num(cmp);
      bad = std::max(bad, cmp);
    } else {
      row["product_comparison_residual"] = json(nullptr);
    }
    if (rescaled) {
      Point p0 = p;
      p0[chart.transverse] = 0.0;
      Evaluator ev0(p0);
      double omega_p = ev0(*spec.omega);
      WeightedForm iio2 = trace_free_second_ff(*rescaled, p);
      WeightedForm iiio2 = third_conformal_ff(*rescaled, p);
      double w2 = max_abs_diff(iio2.value, geoforms::scale(iio.value, omega_p));
      double w3 = max_abs_diff(iiio2.value, iiio.value);
      row["weight_law_IIo_residual"] = num(w2);
      row["weight_law_IIIo_residual"] = num(w3);
      bad = std::max({bad, w2, w3});
    }
    worst[i] = bad;
    rows[i] = std::move(row);
  });
  double wmax = *std::max_element(worst.begin(), worst.end());
  bool ok = wmax <= flags.tol;
  json results{{"points", json(rows)},
               {"omega_checked", spec.omega.has_value()}};
  json summary{{"max_residual", num(wmax)}, {"tol", num(flags.tol)}};
  return finish("conformal-check", spec, results, summary, ok ? "ok" : "failed",
                ok ? 0 : 1);
}

RunResult run_selftest(const std::optional<MetricSpec>& spec) {
  std::vector<CriterionResult> crits = run_acceptance();
  std::vector<json> rows;
  rows.reserve(crits.size());
  for (const CriterionResult& c : crits)
    rows.push_back(json{{"index", c.index},
                        {"name", c.name},
                        {"pass", c.pass},
                        {"detail", c.detail}});
  bool ok = all_passed(crits);
  json results{{"criteria", json(rows)}, {"table", format_acceptance(crits)}};
  json summary{{"passed", static_cast<int>(std::count_if(
                              crits.begin(), crits.end(),
                              [](const CriterionResult& c) { return c.pass; }))},
               {"total", static_cast<int>(crits.size())}};
  return finish("selftest", spec, results, summary,
                ok ? "all-passed" : "failed", ok ? 0 : 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

MetricSpec read_spec_text(const std::string& text, const std::string& name) {
  return interpret(tokenize_spec(text, name), name);
}

MetricSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(2, "cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_spec_text(buf.str(), path);
}

Chart to_chart(const MetricSpec& spec) {
  int n = spec.dim - 1;
  std::vector<std::string> sigma_coords(spec.coords.begin() + 1,
                                        spec.coords.end());
  std::vector<Expression> comps(static_cast<std::size_t>(n) * n, Expression());
  for (const auto& [ij, comp] : spec.gbar) {
    comps[ij.first * n + ij.second] = comp;
    comps[ij.second * n + ij.first] = comp;
  }
  if (spec.base_like)
    return base_like_chart(*spec.base_warp, sigma_coords, comps, spec.coords[0]);
  return normal_form_chart(sigma_coords, comps, spec.coords[0]);
}

std::vector<Point> sample_points(const MetricSpec& spec, int limit) {
  std::vector<std::string> axes(spec.coords.begin() + 1, spec.coords.end());
  std::vector<std::vector<double>> values;
  for (const std::string& c : axes) {
    GridAxis ax;
    auto it = spec.grid.find(c);
    if (it != spec.grid.end()) ax = it->second;
    double a = ax.lo + spec.margin, b = ax.hi - spec.margin;
    std::vector<double> v;
    if (ax.count == 1) {
      v.push_back(0.5 * (a + b));
    } else {
      for (int i = 0; i < ax.count; ++i)
        v.push_back(a + (b - a) * i / (ax.count - 1));
    }
    values.push_back(std::move(v));
  }
  std::vector<Point> pts;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Point p;
    for (std::size_t i = 0; i < axes.size(); ++i) p[axes[i]] = values[i][idx[i]];
    pts.push_back(std::move(p));
    if (limit > 0 && static_cast<int>(pts.size()) >= limit) break;
    // Odometer, last axis fastest.
    std::size_t i = axes.size();
    while (i > 0) {
      --i;
      if (++idx[i] < values[i].size()) break;
      idx[i] = 0;
      if (i == 0) return pts;
    }
  }
  return pts;
}

int worker_count() {
  const char* s = std::getenv("GEOFORMS_WORKERS");
  if (!s || !*s) return 1;
  int n = std::atoi(s);
  return std::clamp(n, 1, 64);
}

RunResult run(const std::string& command, const std::optional<MetricSpec>& spec,
              const RunFlags& flags) {
  if (flags.max_order < 2)
    throw CliError(3, "--max-order must be at least 2");
  if (command == "selftest") return run_selftest(spec);
  const MetricSpec& s = require_spec(spec, command);
  if (command == "curvature") return run_curvature(s, flags);
  if (command == "forms") return run_forms(s, flags);
  if (command == "classify") return run_classify(s, flags);
  if (command == "yamabe") return run_yamabe(s, flags);
  if (command == "conformal-check") return run_conformal_check(s, flags);
  throw CliError(3, "unknown command '" + command + "'");
}

}  // namespace geoforms
