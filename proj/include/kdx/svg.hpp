#pragma once

#include <string>
#include <vector>

#include "kdx/linalg.hpp"

namespace kdx {

// Minimal self-contained SVG figure writer (scatter, arrow and value-colored
// scatter layers) so figures need no plotting dependency. Data coordinates
// are mapped to the canvas on write() using the joint bounding box of all
// layers; the y axis points up.
class SvgFigure {
public:
    SvgFigure(int width = 640, int height = 480);

    // Fixed-color scatter; color is any SVG color string.
    void add_scatter(const Matrix& points, const std::string& color,
                     double radius = 3.0);

    // Scatter colored by a per-point value through a blue-gray-red diverging
    // colormap (values are min-max normalized).
    void add_heat_scatter(const Matrix& points, const Vector& values,
                          double radius = 3.0);

    // One arrow per row: base points(i,:) toward points(i,:)+scale*vec(i,:).
    // Zero-length vectors still draw the base marker.
    void add_arrows(const Matrix& points, const Matrix& vectors, double scale,
                    const std::string& color = "#333333");

    void write(const std::string& path) const;

private:
    struct Layer {
        enum class Kind { Scatter, HeatScatter, Arrows } kind;
        Matrix points;
        Matrix vectors;  // arrows only
        Vector values;   // heat scatter only
        std::string color;
        double radius = 3.0;
        double scale = 1.0;
    };

    int width_;
    int height_;
    std::vector<Layer> layers_;
};

}  // namespace kdx
