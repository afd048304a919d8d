#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>
#include <openssl/evp.h>

#include "../analysis.hpp"
#include "../estimation.hpp"
#include "../flows.hpp"
#include "../optimizers.hpp"

namespace accel::harness {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest text with 17 significant digits ("%.17g"); non-finite values print as nan/inf/-inf.
inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string discrete_csv(const Trajectory& traj) {
    std::string out = "k,f_gap,grad_norm,monotone_flag\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        out += std::to_string(traj.states[i].k);
        out += ',' + fmt17(traj.f_gaps[i]);
        out += ',' + fmt17(traj.grad_norms[i]);
        out += traj.monotone_flag(i) ? ",1\n" : ",0\n";
    }
    return out;
}

inline std::string flow_csv(const FlowTrajectory& flow) {
    std::string out = "t,f_gap,grad_norm,m0_residual_norm,mp_residual_norm,storage\n";
    for (const auto& s : flow.samples) {
        out += fmt17(s.state.t);
        for (double v : {s.f_gap, s.grad_norm, s.m0_residual_norm, s.mp_residual_norm, s.storage})
            out += ',' + fmt17(v);
        out += '\n';
    }
    return out;
}

/// k, phi_star, lambda, gap_phi_minus_f.
inline std::string estimation_csv(const CoupledRun& run) {
    std::string out = "k,phi_star,lambda,gap_phi_minus_f\n";
    for (std::size_t i = 0; i < run.history.size(); ++i) {
        const auto& e = run.history[i];
        out += std::to_string(e.k) + ',' + fmt17(e.phi_star) + ',' + fmt17(e.lambda) + ',' +
               fmt17(e.phi_star - run.trajectory.f_values[i]) + '\n';
    }
    return out;
}

inline nlohmann::json to_json(const RateReport& r) {
    return {{"fitted_contraction", r.fitted_contraction},
            {"r_squared", r.r_squared},
            {"theoretical", r.theoretical},
            {"verdict", r.verdict == Verdict::Pass ? "pass" : "fail"},
            {"window", {r.window_start, r.window_end}}};
}

inline nlohmann::json to_json(const CycleReport& c) {
    nlohmann::json j = {{"converged", c.converged},
                        {"min_recurrence_distance", c.min_recurrence_distance},
                        {"gap_floor", c.gap_floor}};
    j["recurrence_period"] = c.recurrence_period ? nlohmann::json(*c.recurrence_period) : nlohmann::json();
    return j;
}

/// Lowercase hex SHA-256.
inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

/// Write to a sibling temporary and rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, bytes);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

} // namespace accel::harness
