#include "ringid/latent.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ringid/rng.hpp"

namespace ringid {

namespace {

constexpr char kMagic[8] = {'R', 'I', 'N', 'G', 'L', 'A', 'T', '1'};

void put_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("latent: truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

} // namespace

Plane Latent::channel_plane(int c) const {
    if (c < 0 || c >= channels) throw std::runtime_error("latent: channel out of range");
    Plane p(size);
    const size_t n2 = static_cast<size_t>(size) * size;
    std::memcpy(p.data.data(), data.data() + static_cast<size_t>(c) * n2,
                n2 * sizeof(double));
    return p;
}

void Latent::set_channel(int c, const Plane& p) {
    if (c < 0 || c >= channels) throw std::runtime_error("latent: channel out of range");
    if (p.size != size) throw std::runtime_error("latent: plane size mismatch");
    const size_t n2 = static_cast<size_t>(size) * size;
    std::memcpy(data.data() + static_cast<size_t>(c) * n2, p.data.data(),
                n2 * sizeof(double));
}

Latent sample_latent(int channels, int n, uint64_t seed) {
    if (channels <= 0 || n <= 0) throw std::runtime_error("latent: bad dimensions");
    Latent out(channels, n);
    GaussianSampler g(seed);
    for (auto& v : out.data) v = g.next();
    return out;
}

void save_latent(const Latent& latent, std::ostream& out) {
    out.write(kMagic, 8);
    put_u32(out, static_cast<uint32_t>(latent.channels));
    put_u32(out, static_cast<uint32_t>(latent.size));
    put_u32(out, static_cast<uint32_t>(latent.size));
    for (double v : latent.data) {
        float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    if (!out) throw std::runtime_error("latent: write failed");
}

Latent load_latent(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("latent: bad magic");
    const uint32_t channels = get_u32(in);
    const uint32_t rows = get_u32(in);
    const uint32_t cols = get_u32(in);
    if (rows != cols) throw std::runtime_error("latent: non-square plane");
    if (channels == 0 || rows == 0 || channels > 4096 || rows > 65536)
        throw std::runtime_error("latent: implausible dimensions");
    Latent out(static_cast<int>(channels), static_cast<int>(rows));
    for (auto& v : out.data) {
        uint32_t bits = get_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        v = static_cast<double>(f);
    }
    return out;
}

void save_latent_file(const Latent& latent, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("latent: cannot open for write: " + path);
    save_latent(latent, out);
}

Latent load_latent_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("latent: cannot open for read: " + path);
    return load_latent(in);
}

} // namespace ringid
