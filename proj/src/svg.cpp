#include "kdx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kdx/errors.hpp"

namespace kdx {

namespace {

constexpr double kMargin = 40.0;

void check_points(const Matrix& points) {
    if (points.rows() == 0) throw EmptyInput("svg: empty point layer");
    if (points.cols() != 2)
        throw DimensionMismatch("svg: layers need 2 columns, got " +
                                std::to_string(points.cols()));
    if (!points.allFinite())
        throw NonFiniteInput("svg: points contain non-finite values");
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

// Linear blend of two 8-bit channels.
int blend(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

// Blue -> gray -> red diverging map on t in [0, 1].
std::string diverging_color(double t) {
    const int blue[3] = {0x3b, 0x6f, 0xb6};
    const int gray[3] = {0xb0, 0xb0, 0xb0};
    const int red[3] = {0xc4, 0x3a, 0x3a};
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = t < 0.5 ? blend(blue[c], gray[c], 2.0 * t)
                         : blend(gray[c], red[c], 2.0 * t - 1.0);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return std::string(buf);
}

}  // namespace

SvgFigure::SvgFigure(int width, int height) : width_(width), height_(height) {
    if (width < 100 || height < 100)
        throw ConfigError("svg: canvas must be at least 100x100");
}

void SvgFigure::add_scatter(const Matrix& points, const std::string& color,
                            double radius) {
    check_points(points);
    Layer layer;
    layer.kind = Layer::Kind::Scatter;
    layer.points = points;
    layer.color = color;
    layer.radius = radius;
    layers_.push_back(std::move(layer));
}

void SvgFigure::add_heat_scatter(const Matrix& points, const Vector& values,
                                 double radius) {
    check_points(points);
    if (values.size() != points.rows())
        throw SampleCountMismatch("svg: " + std::to_string(values.size()) +
                                  " values for " +
                                  std::to_string(points.rows()) + " points");
    if (!values.allFinite())
        throw NonFiniteInput("svg: heat values contain non-finite entries");
    Layer layer;
    layer.kind = Layer::Kind::HeatScatter;
    layer.points = points;
    layer.values = values;
    layer.radius = radius;
    layers_.push_back(std::move(layer));
}

void SvgFigure::add_arrows(const Matrix& points, const Matrix& vectors,
                           double scale, const std::string& color) {
    check_points(points);
    if (vectors.rows() != points.rows() || vectors.cols() != 2)
        throw SampleCountMismatch("svg: arrow vectors must match points");
    if (!vectors.allFinite() || !std::isfinite(scale))
        throw NonFiniteInput("svg: arrow vectors contain non-finite values");
    Layer layer;
    layer.kind = Layer::Kind::Arrows;
    layer.points = points;
    layer.vectors = vectors;
    layer.color = color;
    layer.scale = scale;
    layers_.push_back(std::move(layer));
}

void SvgFigure::write(const std::string& path) const {
    // Joint bounding box over every drawn coordinate, arrow tips included.
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto grow = [&](double x, double y) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    };
    for (const auto& layer : layers_) {
        for (Index i = 0; i < layer.points.rows(); ++i) {
            grow(layer.points(i, 0), layer.points(i, 1));
            if (layer.kind == Layer::Kind::Arrows)
                grow(layer.points(i, 0) + layer.scale * layer.vectors(i, 0),
                     layer.points(i, 1) + layer.scale * layer.vectors(i, 1));
        }
    }
    if (layers_.empty()) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double sx = (width_ - 2.0 * kMargin) / (xmax - xmin);
    const double sy = (height_ - 2.0 * kMargin) / (ymax - ymin);
    auto px = [&](double x) { return kMargin + (x - xmin) * sx; };
    auto py = [&](double y) { return height_ - kMargin - (y - ymin) * sy; };

    std::ofstream out(path);
    if (!out) throw Error("svg: cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
        << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << ' '
        << height_ << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (const auto& layer : layers_) {
        switch (layer.kind) {
            case Layer::Kind::Scatter:
                for (Index i = 0; i < layer.points.rows(); ++i)
                    out << "<circle cx=\"" << num(px(layer.points(i, 0)))
                        << "\" cy=\"" << num(py(layer.points(i, 1)))
                        << "\" r=\"" << num(layer.radius) << "\" fill=\""
                        << layer.color << "\"/>\n";
                break;
            case Layer::Kind::HeatScatter: {
                const double lo = layer.values.minCoeff();
                const double hi = layer.values.maxCoeff();
                const double span = hi - lo;
                for (Index i = 0; i < layer.points.rows(); ++i) {
                    const double t =
                        span > 0.0 ? (layer.values[i] - lo) / span : 0.5;
                    out << "<circle cx=\"" << num(px(layer.points(i, 0)))
                        << "\" cy=\"" << num(py(layer.points(i, 1)))
                        << "\" r=\"" << num(layer.radius) << "\" fill=\""
                        << diverging_color(t) << "\"/>\n";
                }
                break;
            }
            case Layer::Kind::Arrows:
                for (Index i = 0; i < layer.points.rows(); ++i) {
                    const double x0 = px(layer.points(i, 0));
                    const double y0 = py(layer.points(i, 1));
                    const double x1 =
                        px(layer.points(i, 0) + layer.scale * layer.vectors(i, 0));
                    const double y1 =
                        py(layer.points(i, 1) + layer.scale * layer.vectors(i, 1));
                    const double len = std::hypot(x1 - x0, y1 - y0);
                    if (len < 1e-9) {
                        out << "<circle cx=\"" << num(x0) << "\" cy=\""
                            << num(y0) << "\" r=\"2.00\" fill=\""
                            << layer.color << "\"/>\n";
                        continue;
                    }
                    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0)
                        << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y1)
                        << "\" stroke=\"" << layer.color
                        << "\" stroke-width=\"1.5\"/>\n";
                    // Two short strokes form the head.
                    const double head = std::min(8.0, 0.3 * len);
                    const double ang = std::atan2(y1 - y0, x1 - x0);
                    for (double side : {0.5, -0.5}) {
                        const double hx = x1 - head * std::cos(ang + side);
                        const double hy = y1 - head * std::sin(ang + side);
                        out << "<line x1=\"" << num(x1) << "\" y1=\""
                            << num(y1) << "\" x2=\"" << num(hx) << "\" y2=\""
                            << num(hy) << "\" stroke=\"" << layer.color
                            << "\" stroke-width=\"1.5\"/>\n";
                    }
                }
                break;
        }
    }
    out << "</svg>\n";
    if (!out) throw Error("svg: write to '" + path + "' failed");
}

}  // namespace kdx
