// Field dumps: flat binary of 64-bit floats next to a JSON sidecar header.
//
// The binary holds the components in storage order (component-major, each
// component a row-major grid scan). Real-space fields store one double per
// entry; Fourier-space fields store interleaved re, im pairs. The sidecar
// records everything needed to reinterpret the bytes, so a dump round-trips
// bit-exactly on any IEEE-754 platform.

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spechom/field.hpp"
#include "spechom/grid.hpp"

namespace spechom {

constexpr int kFieldDumpSchema = 1;

/// Write base_path + ".bin" and base_path + ".json".
inline void save_field(const TensorField& field, const std::string& base_path) {
  const bool fourier = field.representation() == Representation::fourier;
  const std::size_t total = field.num_components() * field.num_points();
  std::vector<double> buf;
  buf.reserve(fourier ? 2 * total : total);
  const std::complex<double>* data = field.data();
  for (std::size_t i = 0; i < total; ++i) {
    buf.push_back(data[i].real());
    if (fourier) buf.push_back(data[i].imag());
  }
  {
    std::ofstream out(base_path + ".bin", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + base_path + ".bin for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to " + base_path + ".bin");
  }
  nlohmann::json header = {
      {"schema", kFieldDumpSchema},
      {"d", field.grid().d},
      {"n", field.grid().n},
      {"order", field.order()},
      {"representation", fourier ? "fourier" : "real"},
      {"components", field.num_components()},
      {"points", field.num_points()},
      {"layout", "component-major, row-major grid scan"},
      {"scalar", fourier ? "f64 interleaved re,im" : "f64"},
  };
  std::ofstream out(base_path + ".json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + base_path + ".json for writing");
  out << header.dump(2) << "\n";
  if (!out) throw std::runtime_error("short write to " + base_path + ".json");
}

/// Read a dump written by save_field. Validates the sidecar against the
/// binary payload size.
inline TensorField load_field(const std::string& base_path) {
  nlohmann::json header;
  {
    std::ifstream in(base_path + ".json");
    if (!in) throw std::runtime_error("cannot open " + base_path + ".json");
    try {
      in >> header;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad field header " + base_path + ".json: " + e.what());
    }
  }
  int schema, d, n, order;
  std::string rep;
  try {
    schema = header.at("schema").get<int>();
    d = header.at("d").get<int>();
    n = header.at("n").get<int>();
    order = header.at("order").get<int>();
    rep = header.at("representation").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad field header " + base_path + ".json: " + e.what());
  }
  if (schema != kFieldDumpSchema)
    throw std::runtime_error("unsupported field dump schema in " + base_path + ".json");
  if (rep != "real" && rep != "fourier")
    throw std::runtime_error("unknown representation in " + base_path + ".json");
  const bool fourier = rep == "fourier";

  TensorField field(GridSpec(d, n), order,
                    fourier ? Representation::fourier : Representation::real);
  const std::size_t total = field.num_components() * field.num_points();
  const std::size_t doubles = fourier ? 2 * total : total;

  std::ifstream in(base_path + ".bin", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + base_path + ".bin");
  std::vector<double> buf(doubles);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(doubles * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != doubles * sizeof(double))
    throw std::runtime_error(base_path + ".bin is shorter than its header promises");
  in.peek();
  if (!in.eof()) throw std::runtime_error(base_path + ".bin is longer than its header promises");

  std::complex<double>* data = field.data();
  for (std::size_t i = 0; i < total; ++i)
    data[i] = fourier ? std::complex<double>(buf[2 * i], buf[2 * i + 1])
                      : std::complex<double>(buf[i], 0.0);
  return field;
}

}  // namespace spechom
