#include "qus/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qus/error.hpp"

namespace qus::score {
namespace {

constexpr unsigned char kMagic[8] = {'Q', 'U', 'S', 'S', 'C', 'O', 'R', 'E'};

// FNV-1a over the payload, stored as the last 8 bytes.
std::uint64_t fnv1a(const unsigned char* p, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        out.insert(out.end(), b, b + n);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::vector<unsigned char> out;

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
};

class Reader {
public:
    Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t u64() { return get_le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
        pos_ += len;
        return s;
    }
    void raw(void* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, p_ + pos_, n);
        pos_ += n;
    }
    std::size_t remaining() const { return n_ - pos_; }

private:
    void need(std::size_t k) const {
        if (k > n_ - pos_) throw FormatError("checkpoint: truncated file");
    }
    std::uint64_t get_le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(p_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const unsigned char* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

}  // namespace

bool Checkpoint::operator==(const Checkpoint& o) const {
    return model.arch == o.model.arch && model.params == o.model.params &&
           model.norm.training_rms == o.model.norm.training_rms && epoch == o.epoch && seed == o.seed &&
           loss_history == o.loss_history && meta == o.meta;
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& c) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.str(c.model.arch.describe());
    w.u64(c.model.params.size());
    for (double v : c.model.params) w.f64(v);
    w.f64(c.model.norm.training_rms);
    w.u32(c.epoch);
    w.u64(c.seed);
    w.u64(c.loss_history.size());
    for (double v : c.loss_history) w.f64(v);
    w.u32(static_cast<std::uint32_t>(c.meta.size()));
    for (const auto& [k, v] : c.meta) {
        w.str(k);
        w.str(v);
    }
    w.u64(fnv1a(w.out.data(), w.out.size()));
    return w.out;
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof kMagic + 4 + 8) throw FormatError("checkpoint: truncated file");
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw FormatError("checkpoint: bad magic");
    Reader r(bytes.data() + sizeof kMagic, bytes.size() - sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw UnsupportedVersion("checkpoint: unsupported format version " + std::to_string(version) + " (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
    }
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t(bytes[body + i]) << (8 * i);
    if (stored != fnv1a(bytes.data(), body)) throw FormatError("checkpoint: checksum mismatch (corrupt or truncated)");

    Checkpoint c;
    Architecture arch;
    try {
        arch = Architecture::parse(r.str());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("checkpoint: bad architecture descriptor: ") + e.what());
    }
    const std::uint64_t n = r.u64();
    if (n != arch.parameter_count()) throw FormatError("checkpoint: parameter count does not match architecture");
    c.model = ScoreModel(arch);
    for (auto& v : c.model.params) v = r.f64();
    c.model.norm.training_rms = r.f64();
    c.epoch = r.u32();
    c.seed = r.u64();
    const std::uint64_t nh = r.u64();
    if (nh > r.remaining() / 8) throw FormatError("checkpoint: truncated loss history");
    c.loss_history.resize(nh);
    for (auto& v : c.loss_history) v = r.f64();
    const std::uint32_t nm = r.u32();
    for (std::uint32_t i = 0; i < nm; ++i) {
        std::string k = r.str();
        c.meta[std::move(k)] = r.str();
    }
    if (r.remaining() != 8) throw FormatError("checkpoint: unexpected trailing bytes");
    return c;
}

void save(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace qus::score
