#include <algorithm>
#include <vector>

#include "qus/error.hpp"
#include "qus/imaging.hpp"

namespace qus::imaging {

std::string to_string(FilterKind k) { return k == FilterKind::Median ? "median" : "average"; }

FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "median") return FilterKind::Median;
    if (s == "average" || s == "mean") return FilterKind::Average;
    throw InvalidArgument("unknown filter kind '" + s + "'");
}

ParamMap low_pass(const ParamMap& map, FilterKind kind, std::size_t side) {
    if (side < 3 || side % 2 == 0) throw InvalidArgument("low_pass: side must be odd and >= 3");
    const std::size_t w = map.width(), h = map.height();
    const std::size_t half = side / 2;
    ParamMap out(w, h);
    out.meta = map.meta;
    out.meta["filter"] = to_string(kind) + ":" + std::to_string(side);
    std::vector<double> buf;
    buf.reserve(side * side);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t y0 = y >= half ? y - half : 0, y1 = std::min(h, y + half + 1);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t x0 = x >= half ? x - half : 0, x1 = std::min(w, x + half + 1);
            buf.clear();
            for (std::size_t yy = y0; yy < y1; ++yy) {
                for (std::size_t xx = x0; xx < x1; ++xx) {
                    if (map.valid(xx, yy)) buf.push_back(map.m(xx, yy));
                }
            }
            if (buf.empty()) continue;
            double v;
            if (kind == FilterKind::Average) {
                // Running mean keeps constant neighbourhoods exact.
                v = 0.0;
                for (std::size_t k = 0; k < buf.size(); ++k) v += (buf[k] - v) / static_cast<double>(k + 1);
            } else {
                const std::size_t mid = buf.size() / 2;
                std::nth_element(buf.begin(), buf.begin() + static_cast<long>(mid), buf.end());
                v = buf[mid];
                if (buf.size() % 2 == 0) {
                    const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<long>(mid));
                    v = 0.5 * (v + lower);
                }
            }
            out.m(x, y) = v;
            out.valid(x, y) = 1;
        }
    }
    return out;
}

}  // namespace qus::imaging
