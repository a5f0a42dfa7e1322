#pragma once

// JSON mappings for the library's value types (nlohmann::json ADL hooks).

#include <algorithm>
#include <iterator>
#include <string>

#include "json.hpp"
#include "seuler/domains.hpp"
#include "seuler/dynamics.hpp"
#include "seuler/errors.hpp"
#include "seuler/modulus.hpp"
#include "seuler/velocity.hpp"
#include "seuler/vorticity.hpp"

namespace seuler {

inline void to_json(nlohmann::json& j, const Modulus& m) {
  j = nlohmann::json{{"family", to_string(m.family())}};
  switch (m.family()) {
    case ModulusFamily::zero: break;
    case ModulusFamily::linear: j["C"] = m.slope(); break;
    case ModulusFamily::capped_log: j["a"] = m.a(); break;
    case ModulusFamily::iterated_log:
      j["k"] = m.depth();
      j["a"] = m.a();
      break;
    case ModulusFamily::tabulated: {
      auto arr = nlohmann::json::array();
      for (const auto& [r, v] : m.knots()) arr.push_back({r, v});
      j["knots"] = arr;
      break;
    }
  }
}

inline void from_json(const nlohmann::json& j, Modulus& m) {
  if (!j.is_object() || !j.contains("family")) {
    throw ConstructionError("modulus JSON: object with a \"family\" field expected");
  }
  const auto fam = j.at("family").get<std::string>();
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      throw ConstructionError(std::string("modulus JSON: numeric field \"") + key + "\" required for " + fam);
    }
    return j.at(key).get<double>();
  };
  if (fam == "zero") {
    m = Modulus::zero();
  } else if (fam == "linear") {
    m = Modulus::linear(num("C"));
  } else if (fam == "capped_log") {
    m = Modulus::capped_log(num("a"));
  } else if (fam == "iterated_log") {
    m = Modulus::iterated_log(static_cast<int>(num("k")), num("a"));
  } else if (fam == "tabulated") {
    if (!j.contains("knots") || !j.at("knots").is_array()) {
      throw ConstructionError("modulus JSON: tabulated family needs a \"knots\" array");
    }
    std::vector<Knot> knots;
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2) throw ConstructionError("modulus JSON: knots are [r, m] pairs");
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    m = Modulus::tabulated(std::move(knots));
  } else {
    throw ConstructionError("modulus JSON: unknown family \"" + fam + "\"");
  }
}

namespace detail {

inline double json_number(const nlohmann::json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConstructionError(what + " JSON: numeric field \"" + key + "\" required");
  }
  return j.at(key).get<double>();
}

inline double json_number_or(const nlohmann::json& j, const char* key, double fallback, const std::string& what) {
  return j.contains(key) ? json_number(j, key, what) : fallback;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const DomainSpec& d) {
  auto atoms = nlohmann::json::array();
  for (const auto& a : d.atoms) atoms.push_back({a.theta, a.mass});
  j = {{"construction", d.construction}, {"atoms", atoms}};
  if (d.uniform_density != 0.0) j["uniform_density"] = d.uniform_density;
  if (d.modulus) {
    j["beta_tilde"] = {{"modulus", *d.modulus}, {"r0", d.r0}};
  } else {
    j["beta_tilde"] = nullptr;
  }
}

inline void from_json(const nlohmann::json& j, DomainSpec& d) {
  if (!j.is_object()) throw ConstructionError("domain JSON: object expected");
  d = DomainSpec{};
  d.construction = j.value("construction", std::string("raw"));
  if (j.contains("atoms")) {
    if (!j.at("atoms").is_array()) throw ConstructionError("domain JSON: \"atoms\" must be an array");
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw ConstructionError("domain JSON: atoms are [theta, mass] pairs");
      }
      d.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  }
  d.uniform_density = detail::json_number_or(j, "uniform_density", 0.0, "domain");
  if (j.contains("beta_tilde") && !j.at("beta_tilde").is_null()) {
    const auto& bt = j.at("beta_tilde");
    if (!bt.is_object() || !bt.contains("modulus")) {
      throw ConstructionError("domain JSON: \"beta_tilde\" must be {\"modulus\": ..., \"r0\": ...} or null");
    }
    d.modulus = bt.at("modulus").get<Modulus>();
    d.r0 = detail::json_number_or(bt, "r0", d.r0, "domain");
  }
  static const char* known[] = {"raw", "modulus_domain", "disc", "triangle", "square"};
  if (std::find(std::begin(known), std::end(known), d.construction) == std::end(known)) {
    throw ConstructionError("domain JSON: unknown construction \"" + d.construction + "\"");
  }
}

inline void to_json(nlohmann::json& j, const VorticityField& w) {
  j = {{"kind", to_string(w.kind())}};
  switch (w.kind()) {
    case VorticityKind::constant:
    case VorticityKind::odd_half: j["c"] = w.c(); break;
    case VorticityKind::ring:
      j["c"] = w.c();
      j["R"] = w.R();
      break;
    case VorticityKind::grid:
      j["nr"] = w.nr();
      j["nphi"] = w.nphi();
      j["values"] = w.values();
      break;
  }
}

inline void from_json(const nlohmann::json& j, VorticityField& w) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConstructionError("field JSON: object with a \"kind\" string expected");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    w = VorticityField::constant(detail::json_number(j, "c", "field"));
  } else if (kind == "odd_half") {
    w = VorticityField::odd_half(detail::json_number(j, "c", "field"));
  } else if (kind == "ring") {
    w = VorticityField::ring(detail::json_number(j, "c", "field"), detail::json_number(j, "R", "field"));
  } else if (kind == "grid") {
    if (!j.contains("values") || !j.at("values").is_array()) {
      throw ConstructionError("field JSON: grid needs a \"values\" array");
    }
    w = VorticityField::grid(static_cast<int>(detail::json_number(j, "nr", "field")),
                             static_cast<int>(detail::json_number(j, "nphi", "field")),
                             j.at("values").get<std::vector<double>>());
  } else {
    throw ConstructionError("field JSON: unknown kind \"" + kind + "\"");
  }
}

inline void to_json(nlohmann::json& j, const VelocityOptions& o) {
  j = {{"rel_tol", o.rel_tol},
       {"abs_tol", o.abs_tol},
       {"use_symmetry", o.use_symmetry},
       {"cache_det", o.cache_det},
       {"ball_order", o.ball_order}};
}

inline void from_json(const nlohmann::json& j, VelocityOptions& o) {
  o = VelocityOptions{};
  o.rel_tol = detail::json_number_or(j, "rel_tol", o.rel_tol, "velocity options");
  o.abs_tol = detail::json_number_or(j, "abs_tol", o.abs_tol, "velocity options");
  o.use_symmetry = j.value("use_symmetry", o.use_symmetry);
  o.cache_det = j.value("cache_det", o.cache_det);
  o.ball_order = static_cast<int>(detail::json_number_or(j, "ball_order", o.ball_order, "velocity options"));
}

inline void to_json(nlohmann::json& j, const TrajectoryOptions& o) {
  j = {{"horizon", o.horizon}, {"eps_stop", o.eps_stop}, {"tol", o.tol}, {"max_steps", o.max_steps}};
}

inline void from_json(const nlohmann::json& j, TrajectoryOptions& o) {
  o = TrajectoryOptions{};
  o.horizon = detail::json_number_or(j, "horizon", o.horizon, "trajectory");
  o.eps_stop = detail::json_number_or(j, "eps_stop", o.eps_stop, "trajectory");
  o.tol = detail::json_number_or(j, "tol", o.tol, "trajectory");
  o.max_steps = static_cast<std::size_t>(detail::json_number_or(j, "max_steps", double(o.max_steps), "trajectory"));
}

}  // namespace seuler
