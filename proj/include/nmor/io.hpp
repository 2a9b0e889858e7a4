#pragma once
//
// CSV and manifest output.  Every CSV opens with a "# manifest-hash:" comment
// and a header row; numbers are written with 17 significant digits so files
// are lossless and byte-stable across runs.
//

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nmor/colliding_probe.hpp"
#include "nmor/config.hpp"
#include "nmor/oracle.hpp"
#include "nmor/signal.hpp"
#include "nmor/single_probe.hpp"
#include "nmor/sweep.hpp"
#include "nmor/version.hpp"

namespace nmor {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of everything that determines a run's outputs.  Wall time, the
/// worker count and the output directory are left out: results depend on
/// none of them.
inline std::string manifest_hash(const std::string& subcommand, const RunConfig& c) {
  json j = config_to_json(c);
  j["sweep"].erase("workers");
  j.erase("output_dir");
  return hex64(fnv1a64(std::string("nmor ") + NMOR_VERSION + "\n" + subcommand + "\n" + j.dump()));
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    out_ << "# manifest-hash: " << hash << "\n";
    row_strings(header);
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << csv_number(values[i]);
    out_ << "\n";
  }

  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << csv_field(values[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_sp_trajectory(const std::filesystem::path& path, const std::string& hash, const SpTrajectory& tr) {
  CsvWriter w(path, hash, {"eta", "S_plus", "S_minus", "theta_plus", "theta_minus", "DeltaS", "Theta"});
  for (const auto& n : tr) w.row({n.eta, n.S_plus, n.S_minus, n.theta_plus, n.theta_minus, n.delta_S, n.theta});
}

inline void write_cp_profiles(const std::filesystem::path& path, const std::string& hash, const CpProfiles& pr,
                              const CpObservables& ob) {
  CsvWriter w(path, hash,
              {"eta", "S_p1_plus", "S_p1_minus", "theta_plus", "theta_minus", "S_p2_plus", "S_p2_minus", "phi_plus",
               "phi_minus", "DeltaS_p1", "DeltaTheta", "G", "dS_p1_plus_deta", "dS_p2_plus_dminus_eta"});
  for (std::size_t i = 0; i < pr.points.size(); ++i) {
    const auto& y = pr.points[i];
    w.row({pr.eta[i], y.p1[0], y.p1[1], y.p1[2], y.p1[3], y.p2[0], y.p2[1], y.p2[2], y.p2[3], ob.delta_S_p1[i],
           ob.delta_theta[i], ob.gain[i], ob.growth_p1_plus[i], ob.growth_p2_plus[i]});
  }
}

/// Gridded map: rows follow axis 0, columns axis 1 (a single column for 1-D).
inline void write_grid(const std::filesystem::path& path, const std::string& hash, const SweepResult& r,
                       const std::string& observable) {
  std::vector<std::string> header{r.axis_names[0] + (r.axis_names.size() > 1 ? "\\" + r.axis_names[1] : "")};
  if (r.axis_names.size() > 1)
    for (double v : r.axis_values[1]) header.push_back(csv_number(v));
  else
    header.push_back(observable);
  CsvWriter w(path, hash, header);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    std::vector<double> row{r.axis_values[0][i]};
    for (std::size_t j = 0; j < r.cols(); ++j) row.push_back(r.at(observable, i, j));
    w.row(row);
  }
}

inline void write_angle_scan(const std::filesystem::path& path, const std::string& hash,
                             const std::vector<AngleScanPoint>& scan) {
  CsvWriter w(path, hash, {"theta0", "DeltaTheta", "iterations"});
  for (const auto& s : scan) w.row({s.theta0, s.delta_theta, static_cast<double>(s.iterations)});
}

inline void write_series(const std::filesystem::path& path, const std::string& hash, const TimeSeriesSpec& spec,
                         const std::vector<double>& colliding, const std::vector<double>& single) {
  CsvWriter w(path, hash, {"t_s", "d_B", "rotation_colliding", "rotation_single"});
  for (std::size_t k = 0; k < colliding.size(); ++k) {
    const double t = static_cast<double>(k) / spec.sample_rate_hz;
    w.row({t, spec.field.at(t), colliding[k], single[k]});
  }
}

inline void write_spectrum(const std::filesystem::path& path, const std::string& hash, const SpectrumResult& s) {
  CsvWriter w(path, hash, {"frequency_hz", "magnitude_db"});
  for (std::size_t k = 0; k < s.frequency_hz.size(); ++k) w.row({s.frequency_hz[k], s.magnitude_db[k]});
}

inline void write_oracle_report(const std::filesystem::path& path, const std::string& hash,
                                const std::vector<OracleRow>& rows) {
  CsvWriter w(path, hash,
              {"S_p1_plus", "S_p1_minus", "S_p2_plus", "S_p2_minus", "d_p1", "d_p2", "d_B", "component", "abs_pert",
               "abs_fp", "rel_error"});
  for (const auto& r : rows)
    w.row_strings({csv_number(r.S_p1_plus), csv_number(r.S_p1_minus), csv_number(r.S_p2_plus),
                   csv_number(r.S_p2_minus), csv_number(r.d_p1), csv_number(r.d_p2), csv_number(r.d_B),
                   coherence_name(r.component), csv_number(r.pert_abs), csv_number(r.fp_abs),
                   csv_number(r.rel_error)});
}

struct Manifest {
  std::string subcommand;
  RunConfig config;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  json extra = json::object();  ///< per-subcommand summary (iterations, snr, failures, ...)

  std::string hash() const { return manifest_hash(subcommand, config); }

  json to_json() const {
    return {{"tool", "nmor"},        {"version", NMOR_VERSION}, {"subcommand", subcommand},
            {"manifest_hash", hash()}, {"config", config_to_json(config)}, {"outputs", outputs},
            {"wall_time_s", wall_seconds}, {"summary", extra}};
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << to_json().dump(2) << "\n";
  }
};

}  // namespace nmor
