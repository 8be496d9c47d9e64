#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgstd/dataset.hpp"
#include "mgstd/errors.hpp"
#include "mgstd/grid.hpp"

namespace mgstd {

inline nlohmann::json to_json(const GridSpec& g) {
  return nlohmann::json{
      {"m", g.dim()}, {"h", g.h()}, {"L", g.L()}, {"delta", g.delta()}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec(j.at("m").get<int>(), j.at("h").get<double>(),
                  j.at("L").get<double>(),
                  j.at("delta").get<std::vector<double>>());
}

/// Binary row format: every point as m little-endian f64 values, series
/// after series, with a JSON sidecar {m, series:[{id, n}, ...]}.
inline void save_binary(const Dataset& d, const std::string& data_path,
                        const std::string& header_path) {
  nlohmann::json hdr;
  hdr["m"] = d.dim();
  hdr["series"] = nlohmann::json::array();
  for (std::size_t k = 0; k < d.n_series(); ++k)
    hdr["series"].push_back(
        {{"id", d.series(k).id}, {"n", d.series_length(k)}});
  std::ofstream hout(header_path);
  if (!hout) throw data_error("cannot write " + header_path);
  hout << hdr.dump() << '\n';

  std::ofstream bout(data_path, std::ios::binary);
  if (!bout) throw data_error("cannot write " + data_path);
  const auto& v = d.raw_values();
  bout.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!bout) throw data_error("short write to " + data_path);
}

inline Dataset load_binary(const std::string& data_path,
                           const std::string& header_path) {
  std::ifstream hin(header_path);
  if (!hin) throw data_error("cannot read " + header_path);
  nlohmann::json hdr;
  try {
    hin >> hdr;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(header_path + ": " + e.what());
  }
  const int m = hdr.at("m").get<int>();
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  for (const auto& s : hdr.at("series")) {
    ids.push_back(s.at("id").get<std::string>());
    lengths.push_back(s.at("n").get<std::size_t>());
  }
  Dataset d = Dataset::with_layout(m, std::move(ids), lengths);
  std::ifstream bin(data_path, std::ios::binary);
  if (!bin) throw data_error("cannot read " + data_path);
  std::vector<double> row(m);
  for (std::size_t k = 0; k < d.n_series(); ++k)
    for (std::size_t n = 0; n < d.series_length(k); ++n) {
      bin.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(row.size() * sizeof(double)));
      if (!bin)
        throw data_error(data_path + ": truncated (series " +
                         d.series(k).id + ")");
      for (int l = 0; l < m; ++l)
        if (!std::isfinite(row[l]))
          throw data_error(data_path + ": non-finite value in series " +
                           d.series(k).id);
      d.set_point(k, n, row.data());
    }
  char extra;
  if (bin.read(&extra, 1))
    throw data_error(data_path + ": trailing bytes beyond the header's count");
  return d;
}

}  // namespace mgstd
