// Run configuration: a single versioned JSON file describing structure,
// loading, solver settings, optional sweep axis, and output wiring.
//
// Schema (version 1), all moduli in GPa (converted to pascals on load):
//
//   {
//     "schema": 1,
//     "structure": {
//       "kind": "hashin" | "laminate" | "phase_map",
//       "n": 128,                  // defaults to 64
//       "d": 2,                    // laminate / phase_map only, defaults to 2
//       // hashin: "r1", "r2", "core", "coating", "matrix"
//       // laminate: "normal_axis", "volume_fraction", "phase_a", "phase_b"
//       // phase_map: "path" (u8 ids, row-major), "materials": [...]
//     },
//     "loading": {
//       "strain": [[...], ...],            // d x d, symmetric
//       "strain_gradient": [[[...]]]       // optional, d x d x d, [m][n][j]
//     },
//     "solver": {"alpha": 1, "method": "fixed_point" | "fp" | "krylov",
//                "tolerance": 1e-6, "max_iterations": 50000},
//     "reference": {"lambda_gpa": ..., "mu_gpa": ...},        // optional
//     "sweep": {"axis": "grid", "grid_sizes": [...]} |
//              {"axis": "contrast", "contrasts": [...]},      // optional
//     "output": {"directory": "...", "dump_fields": false}    // optional
//   }
//
// Materials are {"young_gpa": ..., "poisson": ...}. Sweep lists must be
// non-empty and strictly increasing. A contrast sweep keeps the configured
// matrix material and rebuilds core/coating from the core's modulus.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spechom/grid.hpp"
#include "spechom/higher_order.hpp"
#include "spechom/microstructure.hpp"
#include "spechom/solver.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

constexpr int kConfigSchema = 1;
constexpr double kGigapascal = 1e9;

enum class StructureKind { hashin, laminate, phase_map };
enum class SweepAxis { none, grid, contrast };

struct RunConfig {
  StructureKind kind = StructureKind::hashin;
  int d = 2;
  int n = 64;
  // hashin
  double r1 = 0.0;
  double r2 = 0.0;
  // laminate
  int normal_axis = 0;
  double volume_fraction = 0.5;
  // phase_map
  std::string phase_map_path;
  // hashin: core, coating, matrix; laminate: a, b; phase_map: id table
  std::vector<IsotropicMaterial> materials;

  int alpha = 1;
  SolveConfig solve;
  SymTensor2 strain{2};
  Tensor3 strain_gradient{2};

  std::optional<ReferenceMaterial> reference;

  SweepAxis sweep = SweepAxis::none;
  std::vector<int> grid_sizes;
  std::vector<double> contrasts;

  std::string output_directory = "out";
  bool dump_fields = false;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) {
  throw std::runtime_error("config: " + what);
}

inline IsotropicMaterial parse_material(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("young_gpa") || !j.contains("poisson"))
    config_error("material '" + name + "' needs young_gpa and poisson");
  return IsotropicMaterial(j.at("young_gpa").get<double>() * kGigapascal,
                           j.at("poisson").get<double>());
}

template <typename T>
void check_strictly_increasing(const std::vector<T>& v, const std::string& name) {
  if (v.empty()) config_error(name + " must be non-empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) config_error(name + " must be strictly increasing");
}

}  // namespace detail

inline const char* method_name(Method m) {
  return m == Method::fixed_point ? "fixed_point" : "krylov";
}

inline Method parse_method(const std::string& s) {
  if (s == "fixed_point" || s == "fp") return Method::fixed_point;
  if (s == "krylov") return Method::krylov;
  detail::config_error("unknown method '" + s + "' (expected fp, fixed_point, or krylov)");
}

/// Parse a config document. Relative phase-map paths resolve against
/// base_dir. Throws std::runtime_error with a message naming the offending
/// key on any structural or semantic problem.
inline RunConfig parse_run_config(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = ".") {
  using detail::config_error;
  RunConfig cfg;

  if (!doc.contains("schema") || !doc.at("schema").is_number_integer())
    config_error("missing integer 'schema'");
  if (doc.at("schema").get<int>() != kConfigSchema)
    config_error("unsupported schema version");

  if (!doc.contains("structure")) config_error("missing 'structure'");
  const auto& st = doc.at("structure");
  const std::string kind = st.value("kind", "");
  cfg.n = st.value("n", 64);
  cfg.d = st.value("d", 2);
  if (kind == "hashin") {
    cfg.kind = StructureKind::hashin;
    cfg.d = 2;
    if (!st.contains("r1") || !st.contains("r2")) config_error("hashin needs r1 and r2");
    cfg.r1 = st.at("r1").get<double>();
    cfg.r2 = st.at("r2").get<double>();
    cfg.materials = {detail::parse_material(st.value("core", nlohmann::json()), "core"),
                     detail::parse_material(st.value("coating", nlohmann::json()), "coating"),
                     detail::parse_material(st.value("matrix", nlohmann::json()), "matrix")};
  } else if (kind == "laminate") {
    cfg.kind = StructureKind::laminate;
    cfg.normal_axis = st.value("normal_axis", 0);
    if (!st.contains("volume_fraction")) config_error("laminate needs volume_fraction");
    cfg.volume_fraction = st.at("volume_fraction").get<double>();
    cfg.materials = {detail::parse_material(st.value("phase_a", nlohmann::json()), "phase_a"),
                     detail::parse_material(st.value("phase_b", nlohmann::json()), "phase_b")};
  } else if (kind == "phase_map") {
    cfg.kind = StructureKind::phase_map;
    if (!st.contains("path")) config_error("phase_map needs a path");
    std::filesystem::path p = st.at("path").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg.phase_map_path = p.string();
    if (!std::filesystem::exists(p)) config_error("phase map file not found: " + p.string());
    if (!st.contains("materials") || !st.at("materials").is_array() ||
        st.at("materials").empty())
      config_error("phase_map needs a non-empty materials array");
    int idx = 0;
    for (const auto& m : st.at("materials"))
      cfg.materials.push_back(detail::parse_material(m, "materials[" + std::to_string(idx++) + "]"));
  } else {
    config_error("structure.kind must be hashin, laminate, or phase_map");
  }

  if (doc.contains("solver")) {
    const auto& sv = doc.at("solver");
    cfg.alpha = sv.value("alpha", 1);
    cfg.solve.method = parse_method(sv.value("method", "fixed_point"));
    cfg.solve.tolerance = sv.value("tolerance", 1e-6);
    cfg.solve.max_iterations = sv.value("max_iterations", 50000L);
  }
  if (cfg.alpha != 1 && cfg.alpha != 2) config_error("solver.alpha must be 1 or 2");
  if (!(cfg.solve.tolerance > 0.0)) config_error("solver.tolerance must be positive");
  if (cfg.solve.max_iterations < 1) config_error("solver.max_iterations must be positive");

  cfg.strain = SymTensor2(cfg.d);
  cfg.strain_gradient = Tensor3(cfg.d);
  if (!doc.contains("loading") || !doc.at("loading").contains("strain"))
    config_error("missing loading.strain");
  {
    const auto& e = doc.at("loading").at("strain");
    if (!e.is_array() || static_cast<int>(e.size()) != cfg.d)
      config_error("loading.strain must be a d x d array");
    for (int i = 0; i < cfg.d; ++i) {
      if (!e[i].is_array() || static_cast<int>(e[i].size()) != cfg.d)
        config_error("loading.strain must be a d x d array");
      for (int j = 0; j < cfg.d; ++j) {
        const double v = e[i][j].get<double>();
        if (j < i && std::abs(v - cfg.strain(j, i)) > 1e-12 * (1.0 + std::abs(v)))
          config_error("loading.strain must be symmetric");
        if (j >= i) cfg.strain.set(i, j, v);
      }
    }
  }
  if (doc.at("loading").contains("strain_gradient")) {
    const auto& ge = doc.at("loading").at("strain_gradient");
    if (!ge.is_array() || static_cast<int>(ge.size()) != cfg.d)
      config_error("loading.strain_gradient must be a d x d x d array");
    for (int m = 0; m < cfg.d; ++m) {
      if (!ge[m].is_array() || static_cast<int>(ge[m].size()) != cfg.d)
        config_error("loading.strain_gradient must be a d x d x d array");
      for (int n = 0; n < cfg.d; ++n) {
        if (!ge[m][n].is_array() || static_cast<int>(ge[m][n].size()) != cfg.d)
          config_error("loading.strain_gradient must be a d x d x d array");
        for (int j = 0; j < cfg.d; ++j)
          cfg.strain_gradient.set(m, n, j, ge[m][n][j].get<double>());
      }
    }
    if (!cfg.strain_gradient.symmetric_first_pair(1e-12))
      config_error("loading.strain_gradient must be symmetric in its first two indices");
  }

  if (doc.contains("reference")) {
    const auto& r = doc.at("reference");
    if (!r.contains("lambda_gpa") || !r.contains("mu_gpa"))
      config_error("reference needs lambda_gpa and mu_gpa");
    cfg.reference = ReferenceMaterial(r.at("lambda_gpa").get<double>() * kGigapascal,
                                      r.at("mu_gpa").get<double>() * kGigapascal);
  }

  if (doc.contains("sweep")) {
    const auto& sw = doc.at("sweep");
    const std::string axis = sw.value("axis", "");
    if (axis == "grid") {
      cfg.sweep = SweepAxis::grid;
      if (!sw.contains("grid_sizes")) config_error("grid sweep needs grid_sizes");
      cfg.grid_sizes = sw.at("grid_sizes").get<std::vector<int>>();
      detail::check_strictly_increasing(cfg.grid_sizes, "sweep.grid_sizes");
      if (cfg.kind == StructureKind::phase_map)
        config_error("a phase-map structure cannot be resized for a grid sweep");
    } else if (axis == "contrast") {
      cfg.sweep = SweepAxis::contrast;
      if (!sw.contains("contrasts")) config_error("contrast sweep needs contrasts");
      cfg.contrasts = sw.at("contrasts").get<std::vector<double>>();
      detail::check_strictly_increasing(cfg.contrasts, "sweep.contrasts");
      for (double c : cfg.contrasts)
        if (!(c > 0.0)) config_error("contrasts must be positive");
      if (cfg.kind != StructureKind::hashin)
        config_error("the contrast sweep is defined for the hashin structure");
    } else {
      config_error("sweep.axis must be grid or contrast");
    }
  }

  if (doc.contains("output")) {
    const auto& out = doc.at("output");
    cfg.output_directory = out.value("directory", cfg.output_directory);
    cfg.dump_fields = out.value("dump_fields", false);
  }
  return cfg;
}

/// Load and parse a config file; phase-map paths resolve against its
/// directory.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, std::filesystem::path(path).parent_path());
}

/// Rasterize the configured structure at grid size n.
inline StiffnessField structure_at(const RunConfig& cfg, int n) {
  switch (cfg.kind) {
    case StructureKind::hashin:
      return rasterize_hashin(
          HashinSpec(cfg.r1, cfg.r2, cfg.materials[0], cfg.materials[1], cfg.materials[2]),
          GridSpec(2, n));
    case StructureKind::laminate:
      return rasterize_laminate(LaminateSpec(cfg.normal_axis, cfg.volume_fraction,
                                             cfg.materials[0], cfg.materials[1]),
                                GridSpec(cfg.d, n));
    case StructureKind::phase_map:
      if (n != cfg.n)
        throw std::runtime_error("a phase-map structure cannot be resized");
      return load_phase_map(cfg.phase_map_path, cfg.materials, GridSpec(cfg.d, cfg.n));
  }
  throw std::logic_error("unreachable structure kind");
}

inline StiffnessField build_structure(const RunConfig& cfg) { return structure_at(cfg, cfg.n); }

/// The configured hashin geometry with core/coating rebuilt for a contrast
/// point: the core keeps its modulus, the coating gets contrast * core, both
/// at nu = 0.3; the matrix material is unchanged.
inline StiffnessField structure_at_contrast(const RunConfig& cfg, int n, double contrast) {
  if (cfg.kind != StructureKind::hashin)
    throw std::invalid_argument("contrast points require the hashin structure");
  const auto [core, coating] = contrast_materials(cfg.materials[0].young(), contrast);
  return rasterize_hashin(HashinSpec(cfg.r1, cfg.r2, core, coating, cfg.materials[2]),
                          GridSpec(2, n));
}

inline ReferenceMaterial reference_for(const RunConfig& cfg, const StiffnessField& field) {
  return cfg.reference ? *cfg.reference : default_reference(field);
}

inline MacroData macro_for(const RunConfig& cfg) {
  return MacroData(cfg.strain, cfg.strain_gradient);
}

}  // namespace spechom
