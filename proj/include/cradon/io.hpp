#pragma once

// Binary containers and report writers.
//
// Container layout, shared by sinograms ("CRDN1") and volumes ("CRVL1"):
// 5-byte magic, u32 little-endian header length, UTF-8 JSON header with the
// grid geometry, then the samples as little-endian float64 pairs (re, im).
// Sinogram payloads are row-major over (node, s-row, s-col); volumes over
// the four real axes (Re z1, Im z1, Re z2, Im z2).

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cradon/harness.hpp"

namespace cradon::io {

using json = nlohmann::json;

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_f64le(std::string& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32le(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

inline double get_f64le(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open " + path + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("io: short write to " + path);
}

inline std::string pack(const char magic[5], const json& header,
                        const std::vector<cplx>& values) {
    std::string head = header.dump();
    std::string out;
    out.reserve(5 + 4 + head.size() + values.size() * 16);
    out.append(magic, 5);
    put_u32le(out, std::uint32_t(head.size()));
    out += head;
    for (const cplx& v : values) {
        put_f64le(out, v.real());
        put_f64le(out, v.imag());
    }
    return out;
}

inline json unpack(const char magic[5], const std::string& bytes, std::vector<cplx>& values,
                   const std::string& what) {
    if (bytes.size() < 9 || std::memcmp(bytes.data(), magic, 5) != 0)
        throw std::runtime_error("io: not a " + what + " container");
    std::uint32_t hlen = get_u32le(bytes.data() + 5);
    if (bytes.size() < 9 + std::size_t(hlen))
        throw std::runtime_error("io: truncated " + what + " header");
    json header = json::parse(bytes.substr(9, hlen));
    std::size_t payload = bytes.size() - 9 - hlen;
    if (payload % 16 != 0) throw std::runtime_error("io: ragged " + what + " payload");
    values.resize(payload / 16);
    const char* p = bytes.data() + 9 + hlen;
    for (std::size_t i = 0; i < values.size(); ++i, p += 16)
        values[i] = cplx(get_f64le(p), get_f64le(p + 8));
    return header;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sinogram container

inline void write_sinogram(const std::string& path, const numerics::Sinogram& S) {
    json header = {
        {"kind", "sinogram"},
        {"n", 2},
        {"sphere", {{"n_eta", S.sphere.n_eta}, {"n_theta", S.sphere.n_theta}}},
        {"grid",
         {{"center", {S.grid.center.real(), S.grid.center.imag()}},
          {"extent", S.grid.extent},
          {"count", S.grid.count}}},
        {"valid_margin", S.valid_margin},
        {"provenance", S.provenance},
    };
    detail::write_file(path, detail::pack("CRDN1", header, S.values));
}

inline numerics::Sinogram read_sinogram(const std::string& path) {
    std::vector<cplx> values;
    json h = detail::unpack("CRDN1", detail::read_file(path), values, "sinogram");
    const json& g = h.at("grid");
    numerics::SphereGrid sphere =
        numerics::sphere_grid(h.at("sphere").at("n_eta").get<int>(),
                              h.at("sphere").at("n_theta").get<int>());
    numerics::SGrid grid(cplx(g.at("center").at(0).get<double>(),
                              g.at("center").at(1).get<double>()),
                         g.at("extent").get<double>(), g.at("count").get<int>());
    numerics::Sinogram S(sphere, grid);
    if (values.size() != S.values.size())
        throw std::runtime_error("io: sinogram payload does not match its header");
    S.values = std::move(values);
    S.valid_margin = h.value("valid_margin", 0);
    S.provenance = h.value("provenance", "");
    return S;
}

// ---------------------------------------------------------------------------
// Volume container

inline void write_volume(const std::string& path, const transform::VolumeGrid& V) {
    json header = {
        {"kind", "volume"},
        {"n", 2},
        {"extent", V.extent},
        {"count", V.count},
    };
    detail::write_file(path, detail::pack("CRVL1", header, V.values));
}

inline transform::VolumeGrid read_volume(const std::string& path) {
    std::vector<cplx> values;
    json h = detail::unpack("CRVL1", detail::read_file(path), values, "volume");
    transform::VolumeGrid V;
    V.extent = h.at("extent").get<double>();
    V.count = h.at("count").get<int>();
    std::size_t want = 1;
    for (int i = 0; i < 4; ++i) want *= std::size_t(V.count);
    if (values.size() != want)
        throw std::runtime_error("io: volume payload does not match its header");
    V.values = std::move(values);
    return V;
}

// ---------------------------------------------------------------------------
// Reports

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
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

// The canonical serialization sorts keys (nlohmann objects are ordered maps)
// and prints doubles shortest-roundtrip, so the digest is reproducible.
inline std::string config_digest(const json& config) {
    return hex64(fnv1a64(config.dump()));
}

inline json report_json(const harness::ExperimentReport& rep, const json& config) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"measured", c.measured},
                          {"reference", c.reference},
                          {"tol", c.tol},
                          {"pass", c.pass}});
    return json{{"experiment", rep.experiment},
                {"config_digest", config_digest(config)},
                {"status", harness::status_name(rep.status)},
                {"provenance", rep.provenance},
                {"checks", checks},
                {"wall_ms", rep.wall_ms},
                {"config", config}};
}

// The flat CSV view carries no timing, so it is byte-stable across runs.
inline std::string report_csv(const harness::ExperimentReport& rep) {
    std::string out = "name,measured,reference,tol,pass\n";
    char buf[96];
    for (const auto& c : rep.checks) {
        out += c.name;
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%d\n", c.measured, c.reference,
                      c.tol, int(c.pass));
        out += buf;
    }
    return out;
}

// Report bytes with the timing field dropped: two runs of the same config
// must agree on this string exactly.
inline std::string report_fingerprint(json report) {
    report.erase("wall_ms");
    return report.dump();
}

}  // namespace cradon::io
