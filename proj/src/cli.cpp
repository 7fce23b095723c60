#include "dirac/cli.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "dirac/amplitude.hpp"
#include "dirac/csv.hpp"
#include "dirac/dynamical.hpp"
#include "dirac/gbdt.hpp"
#include "dirac/inverse.hpp"
#include "dirac/spectral.hpp"
#include "json.hpp"

namespace dirac::cli {

namespace {

using json = nlohmann::json;

/// Raised for malformed command lines that CLI11 itself accepts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    csv::write_text(path, content);
  }
}

void print_warnings(const Diagnostics& d, std::ostream& err) {
  for (const auto& w : d.warnings) err << "warning: " << w << '\n';
}

/// Options shared by the subcommands that take a potential.
struct PotentialArgs {
  std::string csv;
  std::string params;

  void attach(CLI::App* app) {
    app->add_option("--potential", csv, "potential CSV (x,p,q)");
    app->add_option("--params", params, "GBDT params JSON");
  }

  bool given() const { return !csv.empty() || !params.empty(); }

  std::optional<gbdt::Params> gbdt_params() const {
    if (params.empty()) return std::nullopt;
    return gbdt::params_from_json(csv::read_text(params));
  }

  /// Potential with m1 estimated on [0, x_max].
  DynamicalPotential load(double x_max, double h) const {
    if (!csv.empty() && !params.empty()) throw UsageError("give either --potential or --params");
    const Grid grid = Grid::over(0.0, x_max, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x_max / h))));
    if (!csv.empty()) return csv::parse_potential(csv::read_text(csv), csv).with_estimated_bound(grid);
    if (auto p = gbdt_params()) {
      auto shared = std::make_shared<gbdt::Params>(std::move(*p));
      DynamicalPotential pot{RealProfile([shared](double x) { return -gbdt::potential(*shared, x).real(); }),
                             RealProfile([shared](double x) { return gbdt::potential(*shared, x).imag(); }),
                             std::nullopt};
      return pot.with_estimated_bound(grid);
    }
    return zero_dynamical_potential();
  }
};

struct ControlArgs {
  std::string name = "t2exp";
  std::string csv;

  void attach(CLI::App* app) {
    app->add_option("--control", name, "built-in control: t2exp, t2gauss, zero")
        ->check(CLI::IsMember({"t2exp", "t2gauss", "zero"}));
    app->add_option("--control-csv", csv, "sampled control CSV (x,re,im with x = t)");
  }

  BoundaryControl load() const {
    if (!csv.empty()) return BoundaryControl::from_samples(csv::parse_function(csv::read_text(csv), csv));
    if (name == "t2gauss") return BoundaryControl::t2gauss();
    if (name == "zero") return BoundaryControl::zero();
    return BoundaryControl::t2exp();
  }
};

std::vector<cplx> parse_z_list(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "--z must be a JSON array of [re, im] pairs", e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::parse, "--z must be a JSON array of [re, im] pairs");
  std::vector<cplx> zs;
  for (const auto& item : doc) {
    if (item.is_array() && item.size() == 2 && item[0].is_number() && item[1].is_number()) {
      zs.emplace_back(item[0].get<double>(), item[1].get<double>());
    } else {
      throw Error(ErrorKind::parse, "--z entries must be [re, im] pairs", item.dump());
    }
  }
  return zs;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorKind::parameter, std::string(name) + " must be positive");
}

std::size_t steps_for(double length, double h) {
  const double n = length / h;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * n || rounded < 1.0) {
    throw Error(ErrorKind::parameter, "length must be a multiple of h",
                "length=" + std::to_string(length) + " h=" + std::to_string(h));
  }
  return static_cast<std::size_t>(rounded);
}

/// Appends `--key value` for each config entry whose flag is not already on
/// the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  json doc;
  try {
    doc = json::parse(csv::read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "config is not valid JSON", e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::parse, "config must be a JSON object", path);
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
    const bool present = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else {
      args.push_back(flag);
      args.push_back(value.dump());
    }
  }
  return args;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
      return 2;
    case ErrorKind::parameter:
    case ErrorKind::domain:
    case ErrorKind::grid_mismatch:
    case ErrorKind::precondition:
    case ErrorKind::invalid_params:
      return 3;
    case ErrorKind::ill_posed:
    case ErrorKind::residual:
    case ErrorKind::non_contractive:
    case ErrorKind::moebius_pole:
    case ErrorKind::not_accelerant:
    case ErrorKind::pole:
    case ErrorKind::truncation:
      return 4;
    case ErrorKind::io:
      return 5;
    case ErrorKind::internal:
      return 1;
  }
  return 1;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  const auto report = [&err](const std::string& kind, const std::string& message,
                             const std::string& context) {
    err << json{{"kind", kind}, {"message", message}, {"context", context}}.dump() << '\n';
  };

  CLI::App app{"Boundary-controlled Dirac systems: forward, response and inverse problems"};
  app.name("dirac-echo");
  // --h is the grid step, so help is long-only
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON file of flag values; command-line flags win");
  app.fallthrough();

  // forward
  auto* fwd = app.add_subcommand("forward", "simulate the time-domain system");
  PotentialArgs fwd_pot;
  ControlArgs fwd_ctrl;
  double fwd_X = 2.0, fwd_T = 2.0, fwd_h = 1.0 / 128;
  std::size_t fwd_kmax = 48, fwd_quad = 4;
  std::string fwd_solver = "series", fwd_scheme = "euler", fwd_out_field, fwd_out_trace;
  fwd_pot.attach(fwd);
  fwd_ctrl.attach(fwd);
  fwd->add_option("--X", fwd_X, "space extent (characteristics solver)");
  fwd->add_option("--T", fwd_T, "time horizon");
  fwd->add_option("--h", fwd_h, "grid step");
  fwd->add_option("--kmax", fwd_kmax, "Neumann series terms");
  fwd->add_option("--quad-order", fwd_quad, "Gauss-Legendre order per cell");
  fwd->add_option("--solver", fwd_solver)->check(CLI::IsMember({"series", "characteristics"}));
  fwd->add_option("--scheme", fwd_scheme, "characteristics scheme")
      ->check(CLI::IsMember({"euler", "trapezoidal"}));
  fwd->add_option("--out-field", fwd_out_field, "WaveField CSV");
  fwd->add_option("--out-trace", fwd_out_trace, "u2(0,t) CSV (stdout when absent)");

  // response
  auto* rsp = app.add_subcommand("response", "extract the response function r");
  PotentialArgs rsp_pot;
  ControlArgs rsp_ctrl;
  double rsp_T = 2.0, rsp_h = 1.0 / 256;
  std::size_t rsp_kmax = 48, rsp_quad = 4;
  std::string rsp_solver = "series", rsp_trace, rsp_out;
  rsp_pot.attach(rsp);
  rsp_ctrl.attach(rsp);
  rsp->add_option("--T", rsp_T, "time horizon");
  rsp->add_option("--h", rsp_h, "grid step");
  rsp->add_option("--kmax", rsp_kmax);
  rsp->add_option("--quad-order", rsp_quad);
  rsp->add_option("--solver", rsp_solver)->check(CLI::IsMember({"series", "characteristics"}));
  rsp->add_option("--trace", rsp_trace, "measured u2(0,t) CSV instead of a forward solve");
  rsp->add_option("--out", rsp_out, "response CSV");

  // invert
  auto* inv = app.add_subcommand("invert", "recover the potential from a response function");
  std::string inv_in, inv_out;
  std::size_t inv_N = 0;
  bool inv_half_warn = false;
  inv->add_option("--response", inv_in, "response CSV on [0, 2L]")->required();
  inv->add_option("--N", inv_N, "subintervals of [0, 2L] (default: those of the input)");
  inv->add_flag("--half-warn", inv_half_warn, "restate the half-interval rule");
  inv->add_option("--out", inv_out, "potential CSV");

  // gbdt
  auto* gb = app.add_subcommand("gbdt", "evaluate the explicit family");
  std::string gb_params, gb_out_pot, gb_out_rsp, gb_out_weyl, gb_z;
  double gb_L = 1.0, gb_T = 2.0, gb_h = 1.0 / 512;
  gb->add_option("--params", gb_params, "GBDT params JSON")->required();
  gb->add_option("--L", gb_L, "potential on [0, L]");
  gb->add_option("--T", gb_T, "response on [0, T]");
  gb->add_option("--h", gb_h, "grid step");
  gb->add_option("--z", gb_z, "JSON array of [re, im] for the Weyl function");
  gb->add_option("--out-potential", gb_out_pot);
  gb->add_option("--out-response", gb_out_rsp);
  gb->add_option("--out-weyl", gb_out_weyl, "Weyl CSV for --z (stdout when absent)");

  // roundtrip
  auto* rt = app.add_subcommand("roundtrip", "explicit response -> inversion -> compare");
  std::string rt_params, rt_out;
  double rt_L = 1.0;
  std::size_t rt_N = 600;
  rt->add_option("--params", rt_params, "GBDT params JSON")->required();
  rt->add_option("--L", rt_L, "recover on [0, L]");
  rt->add_option("--N", rt_N, "subintervals of [0, 2L]; N/2 is used for the order estimate");
  rt->add_option("--out", rt_out, "JSON report (stdout when absent)");

  // weyl-check
  auto* wc = app.add_subcommand("weyl-check", "estimate the Weyl function");
  PotentialArgs wc_pot;
  std::string wc_z, wc_out;
  double wc_L = 12.0, wc_h = 1.0 / 512, wc_eta = 0.5;
  wc_pot.attach(wc);
  wc->add_option("--z", wc_z, "JSON array of [re, im]")->required();
  wc->add_option("--L", wc_L, "truncation length");
  wc->add_option("--h", wc_h, "integration step");
  wc->add_option("--eta-min", wc_eta, "smallest admissible Im z");
  wc->add_option("--out", wc_out, "CSV output");

  // amplitude
  auto* amp = app.add_subcommand("amplitude", "response function to accelerant");
  std::string amp_in, amp_out;
  amp->add_option("--response", amp_in, "response CSV")->required();
  amp->add_option("--out", amp_out, "accelerant CSV");

  for (auto* sub : {fwd, rsp, inv, gb, rt, wc, amp}) sub->add_option("--config", config);

  try {
    auto args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (fwd->parsed()) {
      require_positive(fwd_h, "--h");
      require_positive(fwd_T, "--T");
      const bool series = fwd_solver == "series";
      const double X = series ? fwd_T : fwd_X;
      require_positive(X, "--X");
      const auto pot = fwd_pot.load(X, fwd_h);
      const auto ctrl = fwd_ctrl.load();
      ForwardSolution sol = [&] {
        if (series) {
          NeumannOptions o;
          o.k_max = fwd_kmax;
          o.quad_order = fwd_quad;
          return neumann_solve(pot, ctrl, SolveGrid::square(fwd_T, fwd_T, fwd_h), o);
        }
        CharacteristicsOptions o;
        o.scheme = fwd_scheme == "trapezoidal" ? CharacteristicsOptions::Scheme::trapezoidal
                                               : CharacteristicsOptions::Scheme::upwind_euler;
        return characteristics_solve(pot, ctrl, SolveGrid{X, fwd_T, fwd_h, fwd_h}, o);
      }();
      print_warnings(sol.diagnostics, err);
      if (!fwd_out_field.empty()) csv::write_text(fwd_out_field, csv::format_field(sol.field));
      emit(fwd_out_trace, csv::format_function(sol.field.boundary_u2()), out);
      return 0;
    }

    if (rsp->parsed()) {
      require_positive(rsp_h, "--h");
      require_positive(rsp_T, "--T");
      const auto ctrl = rsp_ctrl.load();
      SampledFunction trace = [&] {
        if (!rsp_trace.empty()) {
          if (rsp_pot.given()) throw UsageError("--trace replaces the forward solve; drop the potential");
          return csv::parse_function(csv::read_text(rsp_trace), rsp_trace);
        }
        const auto pot = rsp_pot.load(rsp_T, rsp_h);
        if (rsp_solver == "series") {
          NeumannOptions o;
          o.k_max = rsp_kmax;
          o.quad_order = rsp_quad;
          auto sol = neumann_solve(pot, ctrl, SolveGrid::square(rsp_T, rsp_T, rsp_h), o);
          print_warnings(sol.diagnostics, err);
          return sol.field.boundary_u2();
        }
        auto sol = characteristics_solve(pot, ctrl, SolveGrid{rsp_h, rsp_T, rsp_h, rsp_h});
        print_warnings(sol.diagnostics, err);
        return sol.field.boundary_u2();
      }();
      const auto res = extract_response_detailed(trace, ctrl);
      emit(rsp_out, csv::format_function(res.response.r), out);
      return 0;
    }

    if (inv->parsed()) {
      const auto r = csv::parse_function(csv::read_text(inv_in), inv_in);
      const std::size_t N = inv_N == 0 ? r.grid().intervals() : inv_N;
      const auto res = invert_response_detailed({r, ResponseFunction::Origin::extracted}, N);
      if (inv_half_warn) {
        err << "warning: the response on [0, " << r.grid().back()
            << "] determines the potential on [0, " << r.grid().back() / 2.0 << "] only\n";
      }
      print_warnings(res.diagnostics, err);
      emit(inv_out, csv::format_potential(res.potential, res.thetas.grid), out);
      return 0;
    }

    if (gb->parsed()) {
      const auto p = gbdt::params_from_json(csv::read_text(gb_params));
      require_positive(gb_h, "--h");
      if (gb_out_pot.empty() && gb_out_rsp.empty() && gb_z.empty()) {
        throw UsageError("give at least one of --out-potential, --out-response, --z");
      }
      if (!gb_out_pot.empty()) {
        const Grid g = Grid::over(0.0, gb_L, steps_for(gb_L, gb_h));
        const auto v = SampledFunction::sample(g, [&p](double x) { return gbdt::potential(p, x); });
        csv::write_text(gb_out_pot, csv::format_potential(spec_to_dyn({ComplexProfile(v)}), g));
      }
      if (!gb_out_rsp.empty()) {
        const Grid g = Grid::over(0.0, gb_T, steps_for(gb_T, gb_h));
        csv::write_text(gb_out_rsp, csv::format_function(SampledFunction::sample(
                                        g, [&p](double t) { return gbdt::response(p, t); })));
      }
      if (!gb_out_weyl.empty() && gb_z.empty()) throw UsageError("--out-weyl needs --z");
      if (!gb_z.empty()) {
        std::vector<WeylValue> values;
        for (cplx z : parse_z_list(gb_z)) {
          WeylValue w;
          w.z = z;
          w.phi_H = gbdt::weyl(p, z);
          w.phi = contractive_from_herglotz(w.phi_H);
          values.push_back(w);
        }
        emit(gb_out_weyl, csv::format_weyl(values), out);
      }
      return 0;
    }

    if (rt->parsed()) {
      const auto p = gbdt::params_from_json(csv::read_text(rt_params));
      require_positive(rt_L, "--L");
      if (rt_N < 8 || rt_N % 4 != 0) {
        throw Error(ErrorKind::parameter, "--N must be a multiple of 4 and at least 8",
                    "N=" + std::to_string(rt_N));
      }
      struct Errors {
        double v = 0.0, p = 0.0, q = 0.0, v_sup = 0.0, min_eig = 0.0;
      };
      const auto run_at = [&](std::size_t N) {
        const Grid g = Grid::over(0.0, 2.0 * rt_L, N);
        ResponseFunction r{SampledFunction::sample(g, [&p](double t) { return gbdt::response(p, t); }),
                           ResponseFunction::Origin::explicit_formula};
        const auto res = invert_response_detailed(r, N);
        Errors e;
        e.min_eig = res.min_eigenvalue;
        const Grid& xg = res.thetas.grid;
        for (std::size_t k = 0; k < xg.size(); ++k) {
          const double x = xg.node(k);
          const cplx exact = gbdt::potential(p, x);
          const cplx got = res.v.v(x);
          e.v = std::max(e.v, std::abs(got - exact));
          e.p = std::max(e.p, std::abs(res.potential.p(x) + exact.real()));
          e.q = std::max(e.q, std::abs(res.potential.q(x) - exact.imag()));
          e.v_sup = std::max(e.v_sup, std::abs(exact));
        }
        return e;
      };
      const Errors fine = run_at(rt_N);
      const Errors coarse = run_at(rt_N / 2);
      json rep;
      rep["L"] = rt_L;
      rep["N"] = rt_N;
      rep["sup_error_v"] = fine.v;
      rep["sup_error_p"] = fine.p;
      rep["sup_error_q"] = fine.q;
      rep["relative_error_v"] = fine.v_sup > 0.0 ? fine.v / fine.v_sup : fine.v;
      rep["order_estimate"] =
          fine.v > 0.0 && coarse.v > 0.0 ? json(std::log2(coarse.v / fine.v)) : json(nullptr);
      rep["positivity_min_eig"] = fine.min_eig;
      emit(rt_out, rep.dump(2) + "\n", out);
      return 0;
    }

    if (wc->parsed()) {
      require_positive(wc_L, "--L");
      require_positive(wc_h, "--h");
      const auto v = dyn_to_spec(wc_pot.load(wc_L, wc_h));
      WeylOptions o;
      o.eta_min = wc_eta;
      std::vector<WeylValue> values;
      for (cplx z : parse_z_list(wc_z)) values.push_back(weyl_estimate(v, z, wc_L, wc_h, o));
      emit(wc_out, csv::format_weyl(values), out);
      return 0;
    }

    if (amp->parsed()) {
      const auto r = csv::parse_function(csv::read_text(amp_in), amp_in);
      emit(amp_out, csv::format_accelerant(accelerant_from_response({r, ResponseFunction::Origin::extracted})),
           out);
      return 0;
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report("usage", e.what(), "");
    return 3;
  } catch (const UsageError& e) {
    report("usage", e.what(), "");
    return 3;
  } catch (const Error& e) {
    report(std::string(to_string(e.kind())), e.what(), e.context());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report("internal", e.what(), "");
    return 1;
  }
  return 0;
}

}  // namespace dirac::cli
