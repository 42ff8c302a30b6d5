#include "meshreg/svg.hpp"

#include <cmath>
#include <cstdio>

namespace meshreg {

namespace {

std::string svg_header(int width, int height) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n",
                  width * 4, height * 4, width, height, width, height);
    return buf;
}

void append_contour(std::string& out, const Image& img, const char* color) {
    out += "<g fill=\"";
    out += color;
    out += "\">\n";
    char buf[96];
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!is_contour(img.at(x, y))) continue;
            std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"1\" height=\"1\"/>\n",
                          x, y);
            out += buf;
        }
    }
    out += "</g>\n";
}

}  // namespace

std::string overlay_svg(const Image& source, const Image& target, const Image& deformed) {
    std::string out = svg_header(source.width, source.height);
    append_contour(out, source, "red");
    append_contour(out, target, "blue");
    append_contour(out, deformed, "green");
    out += "</svg>\n";
    return out;
}

std::string grid_svg(const DeformationField& field, double spacing) {
    std::string out = svg_header(field.width, field.height);
    out += "<g stroke=\"black\" stroke-width=\"0.3\" fill=\"none\">\n";
    char buf[64];

    // grid content under a backward warp appears displaced by -u
    auto displaced = [&](double gx, double gy) -> Vec2 {
        int ix = std::min(field.width - 1, std::max(0, static_cast<int>(std::lround(gx))));
        int iy = std::min(field.height - 1, std::max(0, static_cast<int>(std::lround(gy))));
        Vec2 u = field.at(ix, iy);
        return Vec2(gx - u.x, gy - u.y);
    };

    auto polyline = [&](bool horizontal, double fixed) {
        out += "<polyline points=\"";
        double extent = horizontal ? field.width - 1 : field.height - 1;
        for (double s = 0.0; s <= extent; s += 1.0) {
            Vec2 p = horizontal ? displaced(s, fixed) : displaced(fixed, s);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p.x, p.y);
            out += buf;
        }
        out += "\"/>\n";
    };

    for (double y = 0.0; y <= field.height - 1; y += spacing) polyline(true, y);
    for (double x = 0.0; x <= field.width - 1; x += spacing) polyline(false, x);
    out += "</g>\n</svg>\n";
    return out;
}

std::string quiver_svg(const GradientField& field, const Image& contour) {
    std::string out = svg_header(field.width, field.height);
    append_contour(out, contour, "#cccccc");
    out += "<g stroke=\"crimson\" stroke-width=\"0.2\">\n";
    char buf[128];
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            Vec2 v = field.at(x, y);
            if (v.x == 0.0 && v.y == 0.0) continue;
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%d\" y1=\"%d\" x2=\"%.2f\" y2=\"%.2f\"/>\n", x, y,
                          x + v.x, y + v.y);
            out += buf;
        }
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace meshreg
