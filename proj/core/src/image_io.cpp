#include "qus/image_io.hpp"

#include <bit>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "qus/error.hpp"

namespace qus::io {
namespace {

constexpr char kMetaMagic[] = "QUSMETA1\n";

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw FormatError("truncated header in " + path.string());
    return tok;
}

std::size_t parse_dim(const std::string& tok, const std::filesystem::path& path) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(tok, &pos);
    } catch (const std::exception&) {
        throw FormatError("bad header field '" + tok + "' in " + path.string());
    }
    if (pos != tok.size() || v == 0 || v > (1u << 20)) {
        throw FormatError("bad header field '" + tok + "' in " + path.string());
    }
    return v;
}

void check_meta_value(const std::string& s) {
    if (s.find('\n') != std::string::npos) throw InvalidArgument("metadata must not contain newlines");
}

}  // namespace

Grid<double> read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    if (next_token(in, path) != "P5") throw FormatError(path.string() + " is not a binary PGM (P5)");
    const std::size_t w = parse_dim(next_token(in, path), path);
    const std::size_t h = parse_dim(next_token(in, path), path);
    const std::size_t maxval = parse_dim(next_token(in, path), path);
    if (maxval > 65535) throw FormatError("PGM maxval out of range in " + path.string());
    const std::size_t bytes_per = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(w * h * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError("truncated PGM raster in " + path.string());
    }
    Grid<double> out(w, h);
    for (std::size_t i = 0; i < w * h; ++i) {
        // 16-bit samples are big-endian.
        const unsigned v = bytes_per == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
        if (v > maxval) throw FormatError("PGM sample exceeds maxval in " + path.string());
        out[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const Grid<double>& gray, unsigned maxval,
               const Metadata& meta) {
    if (maxval != 255 && maxval != 65535) throw InvalidArgument("write_pgm: maxval must be 255 or 65535");
    auto out = open_out(path);
    out << "P5\n";
    for (const auto& [k, v] : meta) {
        check_meta_value(k);
        check_meta_value(v);
        out << "# " << k << ": " << v << '\n';
    }
    out << gray.width() << ' ' << gray.height() << '\n' << maxval << '\n';
    for (double g : gray.values()) {
        if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("write_pgm: values must lie in [0, 1]");
        const auto v = static_cast<unsigned>(std::lround(g * maxval));
        if (maxval == 255) {
            out.put(static_cast<char>(v));
        } else {
            out.put(static_cast<char>(v >> 8));
            out.put(static_cast<char>(v & 0xff));
        }
    }
    finish(out, path);
}

FloatMap read_pfm(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string magic, dims, scale_line;
    if (!std::getline(in, magic) || magic != "Pf") throw FormatError(path.string() + " is not a grayscale PFM");
    if (!std::getline(in, dims)) throw FormatError("truncated PFM header in " + path.string());
    std::istringstream ds(dims);
    std::string ws, hs;
    ds >> ws >> hs;
    const std::size_t w = parse_dim(ws, path);
    const std::size_t h = parse_dim(hs, path);
    if (!std::getline(in, scale_line)) throw FormatError("truncated PFM header in " + path.string());
    double scale = 0.0;
    try {
        scale = std::stod(scale_line);
    } catch (const std::exception&) {
        throw FormatError("bad PFM scale in " + path.string());
    }
    if (scale == 0.0) throw FormatError("bad PFM scale in " + path.string());
    const bool little = scale < 0.0;

    std::vector<unsigned char> raw(w * h * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError("truncated PFM raster in " + path.string());
    }
    FloatMap fm{Grid<double>(w, h), {}};
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t y = h - 1 - row;
        for (std::size_t x = 0; x < w; ++x) {
            const unsigned char* b = &raw[(row * w + x) * 4];
            std::uint32_t bits = little ? (std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
                                           std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24)
                                        : (std::uint32_t(b[3]) | std::uint32_t(b[2]) << 8 |
                                           std::uint32_t(b[1]) << 16 | std::uint32_t(b[0]) << 24);
            fm.values(x, y) = static_cast<double>(std::bit_cast<float>(bits));
        }
    }

    // Optional trailer.
    std::string line;
    if (std::getline(in, line)) {
        if (line + "\n" != kMetaMagic) throw FormatError("unexpected data after PFM raster in " + path.string());
        while (std::getline(in, line)) {
            const auto sep = line.find('=');
            if (sep == std::string::npos) throw FormatError("malformed metadata line in " + path.string());
            fm.meta[line.substr(0, sep)] = line.substr(sep + 1);
        }
    }
    return fm;
}

void write_pfm(const std::filesystem::path& path, const Grid<double>& values, const Metadata& meta) {
    auto out = open_out(path);
    out << "Pf\n" << values.width() << ' ' << values.height() << "\n-1.0\n";
    for (std::size_t row = 0; row < values.height(); ++row) {
        const std::size_t y = values.height() - 1 - row;
        for (std::size_t x = 0; x < values.width(); ++x) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values(x, y)));
            const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                               static_cast<char>((bits >> 16) & 0xff), static_cast<char>(bits >> 24)};
            out.write(b, 4);
        }
    }
    if (!meta.empty()) {
        out << kMetaMagic;
        for (const auto& [k, v] : meta) {
            check_meta_value(k);
            check_meta_value(v);
            if (k.find('=') != std::string::npos) throw InvalidArgument("metadata key must not contain '='");
            out << k << '=' << v << '\n';
        }
    }
    finish(out, path);
}

void write_csv(const std::filesystem::path& path, const Grid<double>& values, const Metadata& meta) {
    auto out = open_out(path);
    for (const auto& [k, v] : meta) {
        check_meta_value(k);
        check_meta_value(v);
        out << "# " << k << ": " << v << '\n';
    }
    char buf[32];
    for (std::size_t y = 0; y < values.height(); ++y) {
        for (std::size_t x = 0; x < values.width(); ++x) {
            if (x) out << ',';
            const double v = values(x, y);
            if (std::isnan(v)) {
                out << "nan";
            } else {
                std::snprintf(buf, sizeof buf, "%.9g", v);
                out << buf;
            }
        }
        out << '\n';
    }
    finish(out, path);
}

void save_envelope(const std::filesystem::path& path, const EnvelopeImage& img, const Metadata& meta) {
    Metadata m = meta;
    m.emplace("kind", "envelope");
    write_pfm(path, img.amplitudes(), m);
}

EnvelopeImage load_envelope(const std::filesystem::path& path) {
    auto fm = read_pfm(path);
    return EnvelopeImage(std::move(fm.values));
}

void save_param_map(const std::filesystem::path& path, const ParamMap& map) {
    Metadata m = map.meta;
    m["kind"] = "param_map";
    write_pfm(path, map.m, m);
}

ParamMap load_param_map(const std::filesystem::path& path) {
    auto fm = read_pfm(path);
    ParamMap out(fm.values.width(), fm.values.height());
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
        if (std::isfinite(fm.values[i])) {
            out.m[i] = fm.values[i];
            out.valid[i] = 1;
        }
    }
    out.meta = std::move(fm.meta);
    return out;
}

}  // namespace qus::io
