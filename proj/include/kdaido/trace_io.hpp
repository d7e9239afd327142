// kdaido/trace_io.hpp
//
// Trace serialization.  CSV columns are fixed as t, Re eta1, Im eta1,
// Re eta2, Im eta2; every number is rendered with %.17g so equal runs
// produce byte-identical files.  The JSON sidecar carries the config
// provenance hash and an optional measurement block.

#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "kdaido/errors.hpp"
#include "kdaido/simulate.hpp"

namespace kdaido {

namespace detail_io {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail_io

inline void write_trace_csv(const trace& tr, std::ostream& os) {
    os << "t,re_eta1,im_eta1,re_eta2,im_eta2\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << detail_io::g17(tr.times[k]) << ',' << detail_io::g17(tr.eta1[k].real()) << ','
           << detail_io::g17(tr.eta1[k].imag()) << ',' << detail_io::g17(tr.eta2[k].real()) << ','
           << detail_io::g17(tr.eta2[k].imag()) << '\n';
    }
}

inline void write_trace_csv(const trace& tr, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path + " for writing");
    write_trace_csv(tr, os);
}

inline nlohmann::json measurement_json(const steady_state& ss) {
    return {{"r_mean", ss.r_mean},
            {"r_std", ss.r_std},
            {"velocity", ss.velocity},
            {"velocity_stderr", ss.velocity_stderr}};
}

inline nlohmann::json trace_json(const trace& tr, const steady_state* measurement = nullptr) {
    nlohmann::json j{{"config_hash", detail_io::hex64(tr.config_hash)},
                     {"samples", tr.times.size()},
                     {"t_begin", tr.times.empty() ? 0.0 : tr.times.front()},
                     {"t_end", tr.times.empty() ? 0.0 : tr.times.back()}};
    if (measurement) j["measurement"] = measurement_json(*measurement);
    return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
}

}  // namespace kdaido
