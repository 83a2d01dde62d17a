#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "wlsim/field.hpp"
#include "wlsim/wigner.hpp"

namespace wlsim {

// Grid snapshot binary format, shared by all modules:
//   magic "WLSIM01\0", then little-endian
//   u32 dim, u32 kind (0 complex x-field, 1 real phase-field, 2 complex
//   phase-field), u64 per-dimension sizes, f64 extents, payload f64 row-major
//   (complex interleaved re, im).
// Phase-field records carry 2*dim size/extent entries: the x lattice followed
// by the p lattice (full momentum width).

namespace snap {

inline constexpr char kMagic[8] = {'W', 'L', 'S', 'I', 'M', '0', '1', '\0'};

enum class Kind : std::uint32_t { ComplexX = 0, RealPhase = 1, ComplexPhase = 2 };

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::string& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(out, v);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw std::runtime_error("snapshot: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t v = u64();
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
};

struct Record {
    std::uint32_t dim = 0;
    Kind kind = Kind::ComplexX;
    std::vector<std::uint64_t> sizes;
    std::vector<double> extents;
    std::vector<double> payload;
};

inline void write_file(const std::filesystem::path& path, const Record& r) {
    std::string out;
    out.append(kMagic, 8);
    put_u32(out, r.dim);
    put_u32(out, static_cast<std::uint32_t>(r.kind));
    for (std::uint64_t s : r.sizes) put_u64(out, s);
    for (double e : r.extents) put_f64(out, e);
    for (double d : r.payload) put_f64(out, d);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("snapshot: cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("snapshot: short write to " + path.string());
}

inline Record read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("snapshot: cannot open " + path.string());
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path.string());
    Reader rd{buf, 8};
    Record r;
    r.dim = rd.u32();
    const std::uint32_t kind = rd.u32();
    if (kind > 2) throw std::runtime_error("snapshot: unknown field kind");
    r.kind = static_cast<Kind>(kind);
    if (r.dim < 1 || r.dim > 2) throw std::runtime_error("snapshot: unsupported dim");
    const std::size_t naxes = (r.kind == Kind::ComplexX) ? r.dim : 2 * r.dim;
    std::size_t count = 1;
    for (std::size_t a = 0; a < naxes; ++a) {
        r.sizes.push_back(rd.u64());
        count *= static_cast<std::size_t>(r.sizes.back());
    }
    for (std::size_t a = 0; a < naxes; ++a) r.extents.push_back(rd.f64());
    const std::size_t doubles = (r.kind == Kind::RealPhase) ? count : 2 * count;
    r.payload.resize(doubles);
    for (std::size_t i = 0; i < doubles; ++i) r.payload[i] = rd.f64();
    if (rd.pos != buf.size()) throw std::runtime_error("snapshot: trailing bytes");
    return r;
}

}  // namespace snap

inline void write_snapshot(const std::filesystem::path& path, const ComplexField& f) {
    snap::Record r;
    r.dim = static_cast<std::uint32_t>(f.grid.dim);
    r.kind = snap::Kind::ComplexX;
    for (int d = 0; d < f.grid.dim; ++d) {
        r.sizes.push_back(f.grid.n[d]);
        r.extents.push_back(f.grid.length[d]);
    }
    r.payload.reserve(2 * f.v.size());
    for (const cx& z : f.v) {
        r.payload.push_back(z.real());
        r.payload.push_back(z.imag());
    }
    snap::write_file(path, r);
}

inline void write_snapshot(const std::filesystem::path& path, const WignerField& w,
                           bool as_real) {
    snap::Record r;
    r.dim = 1;
    r.kind = as_real ? snap::Kind::RealPhase : snap::Kind::ComplexPhase;
    r.sizes = {w.grid.nx(), w.grid.np};
    r.extents = {w.grid.space.length[0], w.grid.momentum_extent()};
    if (as_real) {
        r.payload.reserve(w.v.size());
        for (const cx& z : w.v) r.payload.push_back(z.real());
    } else {
        r.payload.reserve(2 * w.v.size());
        for (const cx& z : w.v) {
            r.payload.push_back(z.real());
            r.payload.push_back(z.imag());
        }
    }
    snap::write_file(path, r);
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
    const snap::Record r = snap::read_file(path);
    if (r.kind != snap::Kind::ComplexX)
        throw std::runtime_error("snapshot: expected a complex x-field in " + path.string());
    SpatialGrid g = r.dim == 1 ? SpatialGrid(r.sizes[0], r.extents[0])
                               : SpatialGrid(r.sizes[0], r.extents[0], r.sizes[1], r.extents[1]);
    ComplexField f(g);
    for (std::size_t i = 0; i < f.v.size(); ++i)
        f.v[i] = cx(r.payload[2 * i], r.payload[2 * i + 1]);
    return f;
}

inline WignerField read_wigner_field(const std::filesystem::path& path) {
    const snap::Record r = snap::read_file(path);
    if (r.kind == snap::Kind::ComplexX)
        throw std::runtime_error("snapshot: expected a phase-space field in " + path.string());
    PhaseGrid pg{SpatialGrid(r.sizes[0], r.extents[0])};
    if (r.sizes[1] != pg.np || std::abs(r.extents[1] - pg.momentum_extent()) > 1e-12)
        throw std::runtime_error("snapshot: momentum lattice is not the dual lattice");
    WignerField w(pg);
    if (r.kind == snap::Kind::RealPhase) {
        for (std::size_t i = 0; i < w.v.size(); ++i) w.v[i] = r.payload[i];
    } else {
        for (std::size_t i = 0; i < w.v.size(); ++i)
            w.v[i] = cx(r.payload[2 * i], r.payload[2 * i + 1]);
    }
    return w;
}

}  // namespace wlsim
