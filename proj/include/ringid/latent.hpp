#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ringid {

// Single square real-valued plane, row-major.
struct Plane {
    int size = 0;
    std::vector<double> data;

    Plane() = default;
    explicit Plane(int n) : size(n), data(static_cast<size_t>(n) * n, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * size + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * size + c]; }
};

// Multi-channel square latent tensor, channel-major then row-major.
struct Latent {
    int channels = 0;
    int size = 0;
    std::vector<double> data;

    Latent() = default;
    Latent(int c, int n)
        : channels(c), size(n), data(static_cast<size_t>(c) * n * n, 0.0) {}

    double& at(int c, int r, int col) {
        return data[(static_cast<size_t>(c) * size + r) * size + col];
    }
    double at(int c, int r, int col) const {
        return data[(static_cast<size_t>(c) * size + r) * size + col];
    }

    Plane channel_plane(int c) const;
    void set_channel(int c, const Plane& p);
};

// i.i.d. standard normal latent, deterministic in the seed.
Latent sample_latent(int channels, int n, uint64_t seed);

// Binary container: magic "RINGLAT1", then channels/size/size as u32 LE, then
// float32 LE samples in storage order. Round-trips bit-exactly at f32.
void save_latent(const Latent& latent, std::ostream& out);
Latent load_latent(std::istream& in);
void save_latent_file(const Latent& latent, const std::string& path);
Latent load_latent_file(const std::string& path);

} // namespace ringid
