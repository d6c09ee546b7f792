#include "sgan/synthdata.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sgan::synth {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("synthdata: " + msg); }

}  // namespace

void MixtureSpec::validate() const {
    if (centers.empty()) fail("mixture has no modes");
    if (centers.size() != weights.size()) fail("mixture centers/weights length mismatch");
    if (!(stddev > 0.0)) fail("mixture stddev must be positive");
    double s = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) fail("mixture weight is negative");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) fail("mixture weights must sum to 1");
}

MixtureSpec ring_mixture(int k, double radius, double stddev) {
    if (k < 1) fail("ring mixture needs at least one mode");
    if (radius < 0.0) fail("ring radius must be non-negative");
    MixtureSpec spec;
    spec.stddev = stddev;
    spec.centers.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double a = 2.0 * kPi * j / k;
        spec.centers.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    spec.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
    spec.validate();
    return spec;
}

Tensor sample_real(const MixtureSpec& spec, int n, Rng& rng) {
    spec.validate();
    if (n < 0) fail("sample count must be non-negative");
    Tensor x(n, 2);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t j = 0;
        double acc = 0.0;
        for (; j + 1 < spec.weights.size(); ++j) {
            acc += spec.weights[j];
            if (u < acc) break;
        }
        x.at(i, 0) = spec.centers[j][0] + spec.stddev * rng.gaussian();
        x.at(i, 1) = spec.centers[j][1] + spec.stddev * rng.gaussian();
    }
    return x;
}

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    return buf;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) fail("zlib init failed");
    std::vector<std::uint8_t> out;
    out.reserve(in.size() * 4);
    std::uint8_t chunk[1 << 16];
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk;
        zs.avail_out = sizeof(chunk);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            fail("corrupt gzip stream in '" + path + "'");
        }
        out.insert(out.end(), chunk, chunk + sizeof(chunk) - zs.avail_out);
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
    std::vector<std::uint8_t> raw = read_file(path);
    if (raw.size() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b) return gunzip(raw, path);
    return raw;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 24));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

void check_len(const std::vector<std::uint8_t>& b, std::size_t need, const std::string& path) {
    if (b.size() < need) fail("'" + path + "' is truncated");
}

}  // namespace

ImageData load_idx_images(const std::string& path) {
    const std::vector<std::uint8_t> b = read_maybe_gzip(path);
    check_len(b, 16, path);
    const std::uint32_t magic = be32(b, 0);
    if (magic != 2051)
        fail("'" + path + "': expected image magic 2051, got " + std::to_string(magic));
    ImageData d;
    d.count = static_cast<int>(be32(b, 4));
    d.rows = static_cast<int>(be32(b, 8));
    d.cols = static_cast<int>(be32(b, 12));
    const std::size_t npix =
        static_cast<std::size_t>(d.count) * d.rows * d.cols;
    check_len(b, 16 + npix, path);
    d.pixels.resize(d.count, d.rows * d.cols);
    for (std::size_t k = 0; k < npix; ++k)
        d.pixels.data[k] = (b[16 + k] / 255.0 - 0.5) / 0.5;
    return d;
}

std::vector<int> load_idx_labels(const std::string& path) {
    const std::vector<std::uint8_t> b = read_maybe_gzip(path);
    check_len(b, 8, path);
    const std::uint32_t magic = be32(b, 0);
    if (magic != 2049)
        fail("'" + path + "': expected label magic 2049, got " + std::to_string(magic));
    const std::uint32_t count = be32(b, 4);
    check_len(b, 8 + count, path);
    std::vector<int> labels(count);
    for (std::uint32_t k = 0; k < count; ++k) labels[k] = b[8 + k];
    return labels;
}

LabeledImages load_image_dataset(const std::string& images_path, const std::string& labels_path) {
    LabeledImages d;
    d.images = load_idx_images(images_path);
    d.labels = load_idx_labels(labels_path);
    if (static_cast<std::size_t>(d.images.count) != d.labels.size())
        fail("image count " + std::to_string(d.images.count) + " != label count " +
             std::to_string(d.labels.size()));
    return d;
}

namespace {

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes, bool gzip) {
    if (!gzip) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("cannot write '" + path + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        return;
    }
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) fail("cannot write '" + path + "'");
    if (gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size())) !=
        static_cast<int>(bytes.size())) {
        gzclose(f);
        fail("gzip write failed for '" + path + "'");
    }
    gzclose(f);
}

}  // namespace

void write_idx_images(const std::string& path, int count, int rows, int cols,
                      const std::vector<std::uint8_t>& pixels, bool gzip) {
    if (pixels.size() != static_cast<std::size_t>(count) * rows * cols)
        fail("pixel buffer does not match dims");
    std::vector<std::uint8_t> b;
    b.reserve(16 + pixels.size());
    put_be32(b, 2051);
    put_be32(b, static_cast<std::uint32_t>(count));
    put_be32(b, static_cast<std::uint32_t>(rows));
    put_be32(b, static_cast<std::uint32_t>(cols));
    b.insert(b.end(), pixels.begin(), pixels.end());
    write_bytes(path, b, gzip);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                      bool gzip) {
    std::vector<std::uint8_t> b;
    b.reserve(8 + labels.size());
    put_be32(b, 2049);
    put_be32(b, static_cast<std::uint32_t>(labels.size()));
    b.insert(b.end(), labels.begin(), labels.end());
    write_bytes(path, b, gzip);
}

}  // namespace sgan::synth
