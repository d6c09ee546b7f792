#include "sgan/svg.hpp"

#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sgan::svg {

namespace {

constexpr int kSize = 600;
constexpr double kLo = -3.0, kHi = 3.0;

constexpr const char* kPalette[10] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

double px(double v) { return (v - kLo) / (kHi - kLo) * kSize; }
double py(double v) { return kSize - (v - kLo) / (kHi - kLo) * kSize; }

void appendf(std::string& s, const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    const int n = std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    if (n > 0) s.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string scatter(const Tensor& x, const std::vector<int>& labels,
                    const std::vector<std::array<double, 2>>& centers) {
    if (x.rows > 0 && x.cols != 2)
        throw std::invalid_argument("svg: samples must be 2-D");
    if (labels.size() != static_cast<std::size_t>(x.rows))
        throw std::invalid_argument("svg: labels/sample count mismatch");

    std::string s;
    s.reserve(1024 + static_cast<std::size_t>(x.rows) * 64);
    appendf(s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
            "viewBox=\"0 0 %d %d\">\n",
            kSize, kSize, kSize, kSize);
    appendf(s, "<rect width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n", kSize, kSize);
    appendf(s, "<line x1=\"%.2f\" y1=\"0\" x2=\"%.2f\" y2=\"%d\" stroke=\"#dddddd\"/>\n",
            px(0.0), px(0.0), kSize);
    appendf(s, "<line x1=\"0\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n",
            py(0.0), kSize, py(0.0));

    for (int i = 0; i < x.rows; ++i) {
        const int lab = labels[static_cast<std::size_t>(i)];
        const char* color = kPalette[((lab % 10) + 10) % 10];
        appendf(s, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"%s\"/>\n",
                px(x.at(i, 0)), py(x.at(i, 1)), color);
    }

    for (const auto& c : centers) {
        const double cx = px(c[0]), cy = py(c[1]);
        appendf(s,
                "<path d=\"M %.2f %.2f L %.2f %.2f M %.2f %.2f L %.2f %.2f\" "
                "stroke=\"#000000\" stroke-width=\"1.5\"/>\n",
                cx - 6.0, cy, cx + 6.0, cy, cx, cy - 6.0, cx, cy + 6.0);
    }
    s += "</svg>\n";
    return s;
}

void write_scatter(const std::string& path, const Tensor& x, const std::vector<int>& labels,
                   const std::vector<std::array<double, 2>>& centers) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot write '" + path + "'");
    out << scatter(x, labels, centers);
}

}  // namespace sgan::svg
