#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lanekit/geometry.hpp"

namespace lanekit {

/// Plain grayscale raster (camera-space masks, PGM I/O).
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;  // row-major, row 0 first

    std::uint8_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
    void set(int u, int v, std::uint8_t val) { values[static_cast<std::size_t>(v) * width + u] = val; }
    bool in_bounds(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
};

/// Metric BEV grid in the vehicle frame.
///
/// Cell (u, v) is centered at x = origin.x + v * resolution (forward) and
/// y = origin.y - u * resolution (columns run left to right).
struct MaskGrid {
    int width = 0;   // columns (lateral)
    int height = 0;  // rows (forward)
    double resolution = 0.05;
    CartesianPoint origin;  // center of cell (0, 0)
    std::vector<std::uint8_t> values;

    std::uint8_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
    void set(int u, int v, std::uint8_t val) { values[static_cast<std::size_t>(v) * width + u] = val; }
    bool in_bounds(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }

    CartesianPoint cell_center(int u, int v) const {
        return {origin.x + v * resolution, origin.y - u * resolution};
    }
    /// Cell containing a vehicle-frame point; false when outside the grid.
    bool cell_of(CartesianPoint p, int& u, int& v) const {
        u = static_cast<int>(std::lround((origin.y - p.y) / resolution));
        v = static_cast<int>(std::lround((p.x - origin.x) / resolution));
        return in_bounds(u, v);
    }
    double x_min() const { return origin.x; }
    double x_max() const { return origin.x + (height - 1) * resolution; }
};

/// Grid extents in metric units, used by config files and the rasterizer.
struct GridSpec {
    double x_min = 0.0;
    double x_max = 32.0;
    double y_min = -8.0;
    double y_max = 8.0;
    double resolution = 0.05;
    double disc_radius = 0.12;  // radius of the disc stamped per feature point
};

MaskGrid make_grid(const GridSpec& spec);

/// Homography mapping image pixels to BEV grid cells.
struct CameraModel {
    Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();
};

/// Inverse perspective mapping: sample every BEV cell from the source image
/// through the inverse homography (nearest neighbor); out-of-view cells are 0.
/// Throws NonInvertibleHomography.
MaskGrid ipm_project(const Raster& image, const CameraModel& camera, const MaskGrid& target);

/// Binarize at `threshold` then apply morphological opening with a square
/// structuring element of the given radius (in cells).
MaskGrid clean_mask(const MaskGrid& grid, int threshold, int open_radius);

struct WlfConfig {
    double window_width = 1.0;       // lateral extent [m]
    double window_height = 1.5;      // forward extent [m]
    int min_points = 5;              // cells needed to accept a window
    int max_windows = 64;
    double seed_band_height = 3.0;   // forward extent of the seeding band [m]
    double recovery_radius = 3.0;    // forward reach of the recovery search [m]
};

enum class LineStatus { tracked, recovered, lost };

const char* to_string(LineStatus status);

/// One followed line: `points` are per-row lateral centroids of the claimed
/// cells (strictly increasing forward coordinate); `cells` keeps the raw
/// claimed cell centers for diagnostics.
struct WlfLine {
    std::vector<CartesianPoint> points;
    std::vector<CartesianPoint> cells;
    LineStatus status = LineStatus::lost;
};

/// Expected line polylines from the previous frame, vehicle frame.
struct WlfPrior {
    std::vector<CartesianPoint> left;
    std::vector<CartesianPoint> right;
};

struct WlfResult {
    WlfLine left;
    WlfLine right;
};

/// Window-based line following over a binary grid: seed near the vehicle on
/// each side of the longitudinal axis (or at the prior's predicted base),
/// then march windows forward along the line, with a recovery search around
/// the predicted position when a window runs empty.
WlfResult wlf_select(const MaskGrid& grid, const WlfConfig& config,
                     const WlfPrior* prior = nullptr);

// Binary PGM (P5) I/O. Throw IoError on malformed files.
Raster read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Raster& raster);
Raster to_raster(const MaskGrid& grid);

}  // namespace lanekit
