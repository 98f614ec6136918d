// Copyright 2026 the igboltz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "igb/cli_config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "igb/boltzmann.hpp"
#include "igb/divergence.hpp"
#include "igb/hyvarinen.hpp"
#include "igb/kinematics.hpp"
#include "igb/manifold.hpp"
#include "igb/orlicz.hpp"

namespace igb {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(path + "." + key + ": unknown key");
    }
  }
}

double positive_number(const json& obj, const std::string& path,
                       const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError(path + "." + key + ": must be a number");
  }
  const double value = obj[key].get<double>();
  if (!(value > 0.0)) {
    throw ConfigError(path + "." + key + ": must be positive");
  }
  return value;
}

int positive_int(const json& obj, const std::string& path, const char* key,
                 int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(path + "." + key + ": must be an integer");
  }
  const int value = obj[key].get<int>();
  if (value < 1) {
    throw ConfigError(path + "." + key + ": must be >= 1");
  }
  return value;
}

std::vector<BasisFunction> parse_basis(const json& list, int dimension,
                                       const std::string& path) {
  std::vector<BasisFunction> basis;
  int index = 0;
  for (const auto& item : list) {
    const std::string at = path + "[" + std::to_string(index++) + "]";
    if (!item.is_object() || !item.contains("kind")) {
      throw ConfigError(at + ": expected an object with a 'kind' key");
    }
    require_keys(item, at, {"kind", "multi_index", "frequency"});
    const std::string kind = item["kind"].get<std::string>();
    if (kind == "hermite") {
      if (!item.contains("multi_index")) {
        throw ConfigError(at + ".multi_index: required for hermite kind");
      }
      auto alpha = item["multi_index"].get<std::vector<int>>();
      if (static_cast<int>(alpha.size()) != dimension) {
        throw ConfigError(at + ".multi_index: length must equal dimension");
      }
      basis.push_back(BasisFunction::hermite(std::move(alpha)));
    } else if (kind == "cos" || kind == "sin") {
      if (!item.contains("frequency")) {
        throw ConfigError(at + ".frequency: required for " + kind + " kind");
      }
      auto freq = item["frequency"].get<std::vector<double>>();
      if (static_cast<int>(freq.size()) != dimension) {
        throw ConfigError(at + ".frequency: length must equal dimension");
      }
      basis.push_back(kind == "cos" ? BasisFunction::cosine(std::move(freq))
                                    : BasisFunction::sine(std::move(freq)));
    } else {
      throw ConfigError(at + ".kind: must be hermite, cos or sin");
    }
  }
  return basis;
}

json basis_to_json(const std::vector<BasisFunction>& basis) {
  json list = json::array();
  for (const auto& b : basis) {
    json item;
    switch (b.kind()) {
      case BasisFunction::Kind::hermite:
        item["kind"] = "hermite";
        item["multi_index"] = b.multi_index();
        break;
      case BasisFunction::Kind::cosine:
        item["kind"] = "cos";
        item["frequency"] = b.frequency();
        break;
      case BasisFunction::Kind::sine:
        item["kind"] = "sin";
        item["frequency"] = b.frequency();
        break;
    }
    list.push_back(item);
  }
  return list;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  require_keys(doc, "$",
               {"run", "seed", "threads", "out", "dimension", "quadrature",
                "basis", "initial", "flow", "basis_degree", "interaction",
                "time"});

  RunConfig config;
  if (!doc.contains("run") || !doc["run"].is_string()) {
    throw ConfigError("$.run: required string");
  }
  config.run = doc["run"].get<std::string>();
  const std::set<std::string> kinds{"geodesic", "boltzmann", "hyvarinen-check",
                                    "kinematics-test", "orlicz-check"};
  if (!kinds.count(config.run)) {
    throw ConfigError("$.run: unknown run kind '" + config.run + "'");
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<long long>() < 0) {
      throw ConfigError("$.seed: must be a nonnegative integer");
    }
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  config.threads = positive_int(doc, "$", "threads", 1);
  config.dimension = positive_int(doc, "$", "dimension", 1);

  if (doc.contains("quadrature")) {
    const json& q = doc["quadrature"];
    require_keys(q, "$.quadrature",
                 {"hermite_nodes", "sphere_polar", "sphere_azimuthal"});
    config.quadrature.hermite_nodes =
        positive_int(q, "$.quadrature", "hermite_nodes", 24);
    config.quadrature.sphere_polar =
        positive_int(q, "$.quadrature", "sphere_polar", 6);
    config.quadrature.sphere_azimuthal =
        positive_int(q, "$.quadrature", "sphere_azimuthal", 12);
  }

  if (doc.contains("basis_degree")) {
    if (!doc["basis_degree"].is_number_integer() ||
        doc["basis_degree"].get<int>() < 1) {
      throw ConfigError("$.basis_degree: must be a positive integer");
    }
    config.basis_degree = doc["basis_degree"].get<int>();
  }

  if (doc.contains("flow")) {
    config.flow = doc["flow"].get<std::string>();
    if (config.flow != "first" && config.flow != "second") {
      throw ConfigError("$.flow: must be 'first' or 'second'");
    }
  }

  if (doc.contains("basis")) {
    if (!doc["basis"].is_array()) throw ConfigError("$.basis: must be a list");
    config.basis = parse_basis(doc["basis"], config.dimension, "$.basis");
  } else {
    // Default chart: the coordinate statistics x_1..x_n.
    for (int d = 0; d < config.dimension; ++d) {
      std::vector<int> alpha(config.dimension, 0);
      alpha[d] = 1;
      config.basis.push_back(BasisFunction::hermite(std::move(alpha)));
    }
  }

  config.u0.assign(config.basis.size(), 0.0);
  config.u_target.assign(config.basis.size(), 0.0);
  if (!config.u_target.empty()) config.u_target[0] = 1.0;
  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    require_keys(init, "$.initial",
                 {"u0", "u_target", "kind", "coefficient", "values"});
    if (init.contains("u0")) {
      config.u0 = init["u0"].get<std::vector<double>>();
      if (config.u0.size() != config.basis.size()) {
        throw ConfigError("$.initial.u0: length must match the basis");
      }
    }
    if (init.contains("u_target")) {
      config.u_target = init["u_target"].get<std::vector<double>>();
      if (config.u_target.size() != config.basis.size()) {
        throw ConfigError("$.initial.u_target: length must match the basis");
      }
    }
    if (init.contains("kind")) {
      config.initial_kind = init["kind"].get<std::string>();
      if (config.initial_kind != "isotropic4" &&
          config.initial_kind != "coefficients") {
        throw ConfigError("$.initial.kind: must be isotropic4 or coefficients");
      }
    }
    if (init.contains("coefficient")) {
      config.initial_coefficient = init["coefficient"].get<double>();
    }
    if (init.contains("values")) {
      config.initial_values = init["values"].get<std::vector<double>>();
    }
  }

  if (doc.contains("interaction")) {
    const json& b = doc["interaction"];
    require_keys(b, "$.interaction", {"type", "constant", "lambda"});
    if (b.contains("type")) {
      config.interaction.type = b["type"].get<std::string>();
      if (config.interaction.type != "maxwell" &&
          config.interaction.type != "power_law") {
        throw ConfigError("$.interaction.type: must be maxwell or power_law");
      }
    }
    config.interaction.constant =
        positive_number(b, "$.interaction", "constant", 1.0);
    config.interaction.lambda =
        positive_number(b, "$.interaction", "lambda", 1.0);
  }

  config.time.t_end = config.run == "boltzmann" ? 8.0 : 5.0;
  if (doc.contains("time")) {
    const json& t = doc["time"];
    require_keys(t, "$.time", {"t_end", "dt", "integrator", "store_every"});
    config.time.t_end = positive_number(t, "$.time", "t_end", config.time.t_end);
    config.time.dt = positive_number(t, "$.time", "dt", config.time.dt);
    config.time.store_every = positive_int(t, "$.time", "store_every", 10);
    if (t.contains("integrator")) {
      config.time.integrator = t["integrator"].get<std::string>();
      if (config.time.integrator != "rk4" &&
          config.time.integrator != "euler") {
        throw ConfigError("$.time.integrator: must be rk4 or euler");
      }
    }
  }

  config.out = doc.value("out", config.run + ".csv");

  json resolved;
  resolved["run"] = config.run;
  resolved["seed"] = config.seed;
  resolved["threads"] = config.threads;
  resolved["out"] = config.out;
  resolved["dimension"] = config.dimension;
  resolved["quadrature"] = {
      {"hermite_nodes", config.quadrature.hermite_nodes},
      {"sphere_polar", config.quadrature.sphere_polar},
      {"sphere_azimuthal", config.quadrature.sphere_azimuthal}};
  resolved["time"] = {{"t_end", config.time.t_end},
                      {"dt", config.time.dt},
                      {"integrator", config.time.integrator},
                      {"store_every", config.time.store_every}};
  if (config.run == "geodesic") {
    resolved["basis"] = basis_to_json(config.basis);
    resolved["initial"] = {{"u0", config.u0}, {"u_target", config.u_target}};
    resolved["flow"] = config.flow;
  }
  if (config.run == "boltzmann") {
    resolved["basis_degree"] = config.basis_degree;
    resolved["interaction"] = {{"type", config.interaction.type},
                               {"constant", config.interaction.constant},
                               {"lambda", config.interaction.lambda}};
    resolved["initial"] = {{"kind", config.initial_kind},
                           {"coefficient", config.initial_coefficient}};
  }
  config.resolved_json = resolved.dump(2);
  return config;
}

void write_csv_atomic(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file " + tmp);
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    char buf[40];
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
        out << buf << (i + 1 < row.size() ? "," : "\n");
      }
    }
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::vector<std::vector<double>> trace_rows(
    const FlowTrace& trace, const std::vector<std::string>& columns) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.times.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::vector<double> row;
    row.reserve(columns.size() + 1);
    row.push_back(trace.times[i]);
    for (const auto& name : columns) row.push_back(trace.column(name)[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_geodesic(const RunConfig& config) {
  const HermiteRule rule =
      make_hermite_rule(config.dimension, config.quadrature.hermite_nodes);
  ChartSpacePtr space = make_chart_space(rule, config.basis);
  const auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
  };
  const ExpDensity q0 =
      chart_to_density(ChartVector::centered(space, to_vec(config.u0)));
  const ExpDensity q1 =
      chart_to_density(ChartVector::centered(space, to_vec(config.u_target)));

  const TimeGrid grid{config.time.t_end, config.time.dt,
                      config.time.store_every};
  const Integrator integrator = config.time.integrator == "euler"
                                    ? Integrator::euler
                                    : Integrator::rk4;
  const FlowTrace trace = config.flow == "first"
                              ? kl_flow_first(q0, q1, grid, integrator)
                              : kl_flow_second(q0, q1, grid, integrator);

  const std::vector<std::string> columns{"kl", "entropy", "norm_check"};
  std::vector<std::string> header{"t"};
  header.insert(header.end(), columns.begin(), columns.end());
  write_csv_atomic(config.out, header, trace_rows(trace, columns));
  std::cout << "geodesic: flow=" << config.flow
            << " steps=" << trace.times.size()
            << " final_kl=" << trace.column("kl").back() << " -> "
            << config.out << "\n";
  return kExitOk;
}

int run_boltzmann(const RunConfig& config) {
  auto basis = std::make_shared<const HermiteBasis3>(config.basis_degree);
  PolyDensity f0 = PolyDensity::maxwell(basis);
  if (config.initial_kind == "isotropic4") {
    f0 = PolyDensity::isotropic4(basis, config.initial_coefficient);
  } else {
    Eigen::VectorXd coeff = Eigen::Map<const Eigen::VectorXd>(
        config.initial_values.data(), config.initial_values.size());
    f0 = PolyDensity::from_coeff(basis, coeff);
  }
  const Interaction b =
      config.interaction.type == "maxwell"
          ? Interaction::maxwell(config.interaction.constant)
          : Interaction::power_law(config.interaction.lambda,
                                   config.interaction.constant);

  const CollisionTensor tensor = CollisionTensor::build(basis);
  RelaxOptions opts;
  opts.grid = TimeGrid{config.time.t_end, config.time.dt,
                       config.time.store_every};
  opts.integrator = config.time.integrator == "euler" ? Integrator::euler
                                                      : Integrator::rk4;
  const FlowTrace trace = relax(f0, b, tensor, opts);

  const std::vector<std::string> columns{
      "H",      "entropy_production", "mass",   "mom_x",
      "mom_y",  "mom_z",              "energy", "kl_to_equilibrium",
      "clipped_mass"};
  std::vector<std::string> header{"t"};
  header.insert(header.end(), columns.begin(), columns.end());
  write_csv_atomic(config.out, header, trace_rows(trace, columns));
  std::cout << "boltzmann: degree=" << config.basis_degree
            << " steps=" << trace.times.size()
            << " final_H=" << trace.column("H").back()
            << " final_kl=" << trace.column("kl_to_equilibrium").back()
            << " -> " << config.out << "\n";
  return kExitOk;
}

struct CheckTable {
  bool all_ok = true;
  void row(const std::string& name, double error, double tol) {
    const bool ok = error < tol;
    all_ok = all_ok && ok;
    std::printf("%-52s %11.3e  (tol %8.1e)  %s\n", name.c_str(), error, tol,
                ok ? "PASS" : "FAIL");
  }
};

int run_kinematics_test(const RunConfig& config) {
  SeededSampler rng(config.seed);
  CheckTable table;

  double worst_momentum = 0, worst_energy = 0, worst_gap = 0, worst_dot = 0;
  for (int i = 0; i < 10000; ++i) {
    const VelocityPair pair{{rng.normal(), rng.normal(), rng.normal()},
                            {rng.normal(), rng.normal(), rng.normal()}};
    const double t = 1.0 - 2.0 * rng.uniform();
    const double phi = 2.0 * M_PI * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    const CollisionQuadruple q = collide_sigma(
        pair, Vec3(s * std::cos(phi), s * std::sin(phi), t));
    const auto r = q.residuals();
    worst_momentum = std::max(worst_momentum, r.momentum);
    worst_energy = std::max(worst_energy, r.energy);
    worst_gap = std::max(worst_gap, r.gap);
    worst_dot = std::max(worst_dot, r.dot);
  }
  table.row("collision momentum conservation", worst_momentum, 1e-11);
  table.row("collision energy conservation", worst_energy, 1e-11);
  table.row("collision |v-w| conservation", worst_gap, 1e-11);
  table.row("collision v.w conservation", worst_dot, 1e-11);

  double worst_orth = 0, worst_round = 0, worst_consistency = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    const RankOneProjector pi(dir);
    const auto a = pi.collision_matrix();
    worst_orth = std::max(
        worst_orth,
        (a * a.transpose() - Eigen::Matrix<double, 6, 6>::Identity())
            .cwiseAbs()
            .maxCoeff());

    const VelocityPair pair{{rng.normal(), rng.normal(), rng.normal()},
                            {rng.normal(), rng.normal(), rng.normal()}};
    const Vec3 sigma = sigma_from_pi(pair, pi);
    const auto back = pi_from_sigma(pair, sigma);
    if (!back) {
      worst_round = 1.0;
      continue;
    }
    worst_round = std::max(
        worst_round,
        (back->matrix() - pi.matrix()).cwiseAbs().maxCoeff());
    const CollisionQuadruple qs = collide_sigma(pair, sigma);
    const CollisionQuadruple qp = collide_pi(pair, pi);
    worst_consistency = std::max(
        worst_consistency,
        std::max((qs.v_post - qp.v_post).cwiseAbs().maxCoeff(),
                 (qs.w_post - qp.w_post).cwiseAbs().maxCoeff()));
  }
  table.row("A_Pi orthogonality", worst_orth, 1e-13);
  table.row("sigma <-> Pi round trip", worst_round, 1e-12);
  table.row("collide_sigma vs collide_pi", worst_consistency, 1e-12);

  {
    const VelocityPair pair{{rng.normal(), rng.normal(), rng.normal()},
                            {rng.normal(), rng.normal(), rng.normal()}};
    const CollisionQuadruple generic =
        collide_sigma(pair, Vec3(0.0, 0.0, 1.0));
    const CollisionQuadruple degenerate{Vec3(1, 2, 3), Vec3(1, 2, 3),
                                        Vec3(1, 2, 3), Vec3(1, 2, 3)};
    table.row("jacobian rank generic (want 4)",
              std::abs(jacobian_rank(generic) - 4), 0.5);
    table.row("jacobian rank degenerate (want 3)",
              std::abs(jacobian_rank(degenerate) - 3), 0.5);
  }

  {
    const SphereRule rule = make_sphere_rule(config.quadrature.sphere_polar,
                                             config.quadrature.sphere_azimuthal);
    const Vec3 kappa = Vec3(0.3, -1.2, 0.5).normalized();
    const auto f = [](const Vec3& w) {
      return 1.0 + w[0] + w[2] * w[2] + w[0] * w[1] * w[2];
    };
    table.row("pushforward sigma-to-omega",
              pushforward_check_sigma_to_omega(f, kappa, rule).abs_error, 1e-7);
    const auto f_even = [](const Vec3& w) {
      return w[0] * w[0] + 0.5 * w[1] * w[2];
    };
    table.row(
        "pushforward symmetric form",
        pushforward_check_sigma_to_omega_sym(f_even, kappa, rule).abs_error,
        1e-7);
    table.row("kappa-integrated pushforward",
              pushforward_check_kappa_integrated(f, rule).abs_error, 1e-7);
    const SphereRule oriented = make_sphere_rule_oriented(
        rule.polar_order, rule.azimuthal_order, kappa);
    const double quarter = expect(oriented, [&](const Vec3& sigma) {
      const double d = kappa.dot(sigma);
      return d > 0.0 ? d : 0.0;
    });
    table.row("hemisphere quarter integral", std::abs(quarter - 0.25), 1e-10);
  }

  return table.all_ok ? kExitOk : kExitCheckFailure;
}

int run_orlicz_check(const RunConfig& config) {
  CheckTable table;
  auto rule = std::make_shared<const HermiteRule>(
      make_hermite_rule(1, std::max(config.quadrature.hermite_nodes, 24)));
  const DensityHandle m = DensityHandle::maxwell(rule);

  const double c = 1.7;
  const double norm_const = luxemburg_norm(
      [c](std::span<const double>) { return c; }, m, Young::phi);
  table.row("constant Luxemburg norm vs arccosh(2)",
            std::abs(norm_const - c / std::acosh(2.0)), 1e-9);

  const double norm_linear = luxemburg_norm(
      [](std::span<const double> x) { return x[0]; }, m, Young::phi);
  table.row("linear Luxemburg norm vs 1/sqrt(2 log 2)",
            std::abs(norm_linear - 1.0 / std::sqrt(2.0 * std::log(2.0))),
            1e-9);

  SeededSampler rng(config.seed);
  bool holder_ok = true;
  for (int i = 0; i < 200; ++i) {
    const double a0 = rng.normal(), a1 = rng.normal(), a2 = 0.5 * rng.normal();
    const double b0 = rng.normal(), b1 = rng.normal(), b2 = 0.5 * rng.normal();
    const auto u = [=](std::span<const double> x) {
      return a0 + a1 * x[0] + a2 * (x[0] * x[0] - 1.0);
    };
    const auto v = [=](std::span<const double> x) {
      return b0 + b1 * x[0] + b2 * (x[0] * x[0] - 1.0);
    };
    holder_ok = holder_ok && holder_pairing_check(u, v, m).ok;
  }
  table.row("Holder pairing sweep (200 seeded pairs)", holder_ok ? 0.0 : 1.0,
            0.5);

  double delta2_excess = 0.0;
  for (double ly = -6.0; ly <= 3.0; ly += 0.25) {
    const double y = std::pow(10.0, ly);
    const double phi_star_y = YoungPair::phi_star(y);
    for (double la = -3.0; la <= 3.0; la += 0.25) {
      const double alpha = std::pow(10.0, la);
      const double lhs = YoungPair::phi_star(alpha * y);
      const double rhs = std::max(1.0, alpha * alpha) * phi_star_y;
      delta2_excess = std::max(delta2_excess, lhs - rhs * (1.0 + 1e-12));
    }
  }
  table.row("Delta_2 grid for phi_star", std::max(delta2_excess, 0.0), 1e-15);

  {
    const double target = 0.5 / norm_linear;
    const auto u = [target](std::span<const double> x) {
      return target * x[0];
    };
    const auto errors = exp_series_convergence(u, 2.0, m, 30);
    table.row("exponential series error at k=30", errors.back(), 1e-8);
    bool monotone = true;
    for (std::size_t k = 5; k + 1 < errors.size(); ++k) {
      monotone = monotone && errors[k + 1] < errors[k] * (1.0 + 1e-12);
    }
    table.row("exponential series monotone decay", monotone ? 0.0 : 1.0, 0.5);
  }

  return table.all_ok ? kExitOk : kExitCheckFailure;
}

int run_hyvarinen_check(const RunConfig& config) {
  SeededSampler rng(config.seed);
  auto rule = make_hermite_rule(1, std::max(config.quadrature.hermite_nodes, 32));
  std::vector<BasisFunction> basis;
  basis.push_back(BasisFunction::hermite({1}));
  basis.push_back(BasisFunction::hermite({2}));
  basis.push_back(BasisFunction::cosine({1.1}));
  basis.push_back(BasisFunction::sine({0.7}));
  ChartSpacePtr space = make_chart_space(rule, basis);

  const auto random_chart = [&](double scale) {
    Eigen::VectorXd coeff(space->size());
    for (int i = 0; i < coeff.size(); ++i) coeff[i] = scale * rng.normal();
    coeff[1] = std::min(coeff[1], 0.2);  // keep I - 2Q comfortably definite
    return ChartVector::centered(space, coeff);
  };

  nlohmann::json checks = nlohmann::json::array();
  bool all_ok = true;
  const auto push = [&](const std::string& name, double err, double tol) {
    const bool ok = err < tol;
    all_ok = all_ok && ok;
    checks.push_back({{"name", name}, {"max_error", err}, {"tol", tol},
                      {"pass", ok}});
  };

  double adjoint_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const SmoothFn f = smooth_from_chart(random_chart(0.4));
    const SmoothFn g = smooth_from_chart(random_chart(0.4));
    adjoint_err =
        std::max(adjoint_err, stein_adjoint_check(f, g, rule).max_error);
  }
  push("stein adjoint identity (100 seeded pairs)", adjoint_err, 1e-8);

  double score_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    score_err = std::max(score_err,
                         score_identities(random_chart(0.3), random_chart(0.3))
                             .max_error());
  }
  push("score identities (20 seeded pairs)", score_err, 1e-8);

  double grad_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ChartVector u = random_chart(0.3);
    const ChartVector v = random_chart(0.3);
    const ChartVector w = random_chart(0.4);
    const ExpDensity g = chart_to_density(v);
    const ExpDensity f = chart_to_density(u);
    const double eps = 1e-4;
    const auto dh_u = [&](double s) {
      return hyvarinen(g, chart_to_density(u + (s * w))).value;
    };
    const double fd1 = (dh_u(eps) - dh_u(-eps)) / (2.0 * eps);
    const double an1 = hyvarinen_grad_first(g, f, w);
    grad_err = std::max(grad_err, std::abs(fd1 - an1) /
                                      std::max(1.0, std::abs(an1)));
    const auto dh_v = [&](double s) {
      return hyvarinen(chart_to_density(v + (s * w)), f).value;
    };
    const double fd2 = (dh_v(eps) - dh_v(-eps)) / (2.0 * eps);
    const double an2 = hyvarinen_grad_second(g, f, w);
    grad_err = std::max(grad_err, std::abs(fd2 - an2) /
                                      std::max(1.0, std::abs(an2)));
  }
  push("hyvarinen gradients vs finite differences", grad_err, 1e-5);

  double w1w2_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    w1w2_err = std::max(w1w2_err,
                        w1w2_check(random_chart(0.4), random_chart(0.4),
                                   random_chart(0.3))
                            .abs_error);
  }
  push("weak Laplacian pairing decomposition", w1w2_err, 1e-8);

  nlohmann::json report;
  report["checks"] = checks;
  report["pass"] = all_ok;
  std::cout << report.dump(2) << "\n";
  return all_ok ? kExitOk : kExitCheckFailure;
}

}  // namespace

int run(const RunConfig& config) {
  std::cout << "resolved config:\n" << config.resolved_json << "\n";
  try {
    if (config.run == "geodesic") return run_geodesic(config);
    if (config.run == "boltzmann") return run_boltzmann(config);
    if (config.run == "kinematics-test") return run_kinematics_test(config);
    if (config.run == "orlicz-check") return run_orlicz_check(config);
    if (config.run == "hyvarinen-check") return run_hyvarinen_check(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  }
  std::cerr << "config error: unhandled run kind\n";
  return kExitConfigError;
}

}  // namespace igb
