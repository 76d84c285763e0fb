#include "lanekit/perceive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "lanekit/errors.hpp"

namespace lanekit {

MaskGrid make_grid(const GridSpec& spec) {
    MaskGrid grid;
    grid.resolution = spec.resolution;
    grid.width = static_cast<int>(std::lround((spec.y_max - spec.y_min) / spec.resolution)) + 1;
    grid.height = static_cast<int>(std::lround((spec.x_max - spec.x_min) / spec.resolution)) + 1;
    grid.origin = {spec.x_min, spec.y_max};
    grid.values.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
    return grid;
}

MaskGrid ipm_project(const Raster& image, const CameraModel& camera, const MaskGrid& target) {
    if (std::abs(camera.homography.determinant()) <= 1e-12)
        throw NonInvertibleHomography("ipm_project: homography is not invertible");
    const Eigen::Matrix3d inv = camera.homography.inverse();

    MaskGrid out = target;
    std::fill(out.values.begin(), out.values.end(), 0);
    for (int v = 0; v < out.height; ++v) {
        for (int u = 0; u < out.width; ++u) {
            const Eigen::Vector3d src = inv * Eigen::Vector3d(u, v, 1.0);
            if (std::abs(src[2]) < 1e-12) continue;
            const int px = static_cast<int>(std::lround(src[0] / src[2]));
            const int py = static_cast<int>(std::lround(src[1] / src[2]));
            if (image.in_bounds(px, py)) out.set(u, v, image.at(px, py));
        }
    }
    return out;
}

namespace {

MaskGrid erode_or_dilate(const MaskGrid& grid, int radius, bool erode) {
    MaskGrid out = grid;
    for (int v = 0; v < grid.height; ++v) {
        for (int u = 0; u < grid.width; ++u) {
            bool all = true, any = false;
            for (int dv = -radius; dv <= radius && (all || !any); ++dv) {
                for (int du = -radius; du <= radius; ++du) {
                    const int uu = u + du, vv = v + dv;
                    const bool on = grid.in_bounds(uu, vv) && grid.at(uu, vv) > 0;
                    all = all && on;
                    any = any || on;
                }
            }
            out.set(u, v, (erode ? all : any) ? 255 : 0);
        }
    }
    return out;
}

}  // namespace

MaskGrid clean_mask(const MaskGrid& grid, int threshold, int open_radius) {
    MaskGrid binary = grid;
    for (auto& v : binary.values) v = (v >= threshold) ? 255 : 0;
    if (open_radius <= 0) return binary;
    return erode_or_dilate(erode_or_dilate(binary, open_radius, true), open_radius, false);
}

const char* to_string(LineStatus status) {
    switch (status) {
        case LineStatus::tracked: return "tracked";
        case LineStatus::recovered: return "recovered";
        case LineStatus::lost: return "lost";
    }
    return "lost";
}

namespace {

struct Cluster {
    double y = 0.0;  // weighted mean lateral position
    int weight = 0;
};

// Column-density clusters within the seed band on one side of the axis.
std::vector<Cluster> seed_clusters(const MaskGrid& grid, int seed_rows, bool left_side) {
    std::vector<int> hist(grid.width, 0);
    for (int v = 0; v < std::min(seed_rows, grid.height); ++v)
        for (int u = 0; u < grid.width; ++u)
            if (grid.at(u, v) > 0) {
                const double y = grid.cell_center(u, v).y;
                if ((left_side && y > 0.0) || (!left_side && y < 0.0)) ++hist[u];
            }

    std::vector<Cluster> clusters;
    int gap = 3;  // columns; tolerate small holes inside one cluster
    int run_start = -1, since_hit = 0;
    double wy = 0.0;
    int weight = 0;
    for (int u = 0; u <= grid.width; ++u) {
        const int count = (u < grid.width) ? hist[u] : 0;
        if (count > 0) {
            if (run_start < 0) run_start = u;
            wy += count * grid.cell_center(u, 0).y;
            weight += count;
            since_hit = 0;
        } else if (run_start >= 0 && (++since_hit > gap || u == grid.width)) {
            clusters.push_back({wy / weight, weight});
            run_start = -1;
            wy = 0.0;
            weight = 0;
        }
    }
    return clusters;
}

std::optional<double> pick_seed(const std::vector<Cluster>& clusters, int min_points) {
    int best_weight = 0;
    for (const auto& c : clusters) best_weight = std::max(best_weight, c.weight);
    std::optional<double> y;
    double best_dist = 0.0;
    for (const auto& c : clusters) {
        if (c.weight < min_points || c.weight < best_weight / 3) continue;
        const double d = std::abs(c.y);
        if (!y || d < best_dist) {
            y = c.y;
            best_dist = d;
        }
    }
    return y;
}

// Lateral position of the prior polyline at a forward coordinate.
std::optional<double> prior_y_at(const std::vector<CartesianPoint>& prior, double x) {
    if (prior.size() < 2) return std::nullopt;
    for (std::size_t i = 0; i + 1 < prior.size(); ++i) {
        const auto &a = prior[i], &b = prior[i + 1];
        if ((x >= a.x && x <= b.x) || (x >= b.x && x <= a.x)) {
            const double t = (std::abs(b.x - a.x) > 1e-9) ? (x - a.x) / (b.x - a.x) : 0.0;
            return a.y + t * (b.y - a.y);
        }
    }
    // extrapolate off the nearer end
    const auto &a = prior.front(), &b = prior.back();
    if (std::abs(x - a.x) < std::abs(x - b.x)) return a.y;
    return b.y;
}

class WindowFollower {
public:
    WindowFollower(const MaskGrid& grid, const WlfConfig& cfg, std::vector<std::uint8_t>& claimed)
        : grid_(grid), cfg_(cfg), claimed_(claimed) {}

    WlfLine follow(double seed_y, const std::vector<CartesianPoint>* prior) {
        WlfLine line;
        bool recovered = false;
        CartesianPoint center{grid_.x_min() + 0.5 * cfg_.window_height, seed_y};
        CartesianPoint dir{1.0, 0.0};
        std::optional<CartesianPoint> last_mean;

        for (int step = 0; step < cfg_.max_windows; ++step) {
            if (center.x > grid_.x_max() + 0.5 * cfg_.window_height) break;
            auto cells = collect(center);
            if (static_cast<int>(cells.size()) < cfg_.min_points) {
                // recovery: probe forward around where the line is expected
                bool found = false;
                const int reach = std::max(1, static_cast<int>(std::ceil(cfg_.recovery_radius / cfg_.window_height)));
                for (int m = 1; m <= reach && !found; ++m) {
                    CartesianPoint cand = center + (m * cfg_.window_height) * dir;
                    if (prior) {
                        if (auto y = prior_y_at(*prior, cand.x)) cand.y = *y;
                    }
                    auto rec = collect(cand);
                    if (static_cast<int>(rec.size()) >= cfg_.min_points) {
                        cells = std::move(rec);
                        center = cand;
                        recovered = true;
                        found = true;
                    }
                }
                if (!found) break;  // lost beyond this point
            }

            claim(cells);
            CartesianPoint mean{0.0, 0.0};
            for (const auto& c : cells) mean = mean + (1.0 / cells.size()) * c;
            line.cells.insert(line.cells.end(), cells.begin(), cells.end());

            if (last_mean) {
                CartesianPoint d = mean - *last_mean;
                const double len = norm(d);
                if (len > 1e-9) {
                    d = (1.0 / len) * d;
                    // keep the march moving forward
                    if (d.x < 0.05) {
                        d.x = 0.05;
                        const double n2 = norm(d);
                        d = (1.0 / n2) * d;
                    }
                    dir = d;
                }
            }
            last_mean = mean;
            center = mean + cfg_.window_height * dir;
        }

        finalize(line);
        line.status = (static_cast<int>(line.cells.size()) < cfg_.min_points)
                          ? LineStatus::lost
                          : (recovered ? LineStatus::recovered : LineStatus::tracked);
        return line;
    }

private:
    std::vector<CartesianPoint> collect(CartesianPoint center) const {
        std::vector<CartesianPoint> cells;
        const int v0 = std::max(0, static_cast<int>(std::floor((center.x - 0.5 * cfg_.window_height - grid_.origin.x) / grid_.resolution)));
        const int v1 = std::min(grid_.height - 1, static_cast<int>(std::ceil((center.x + 0.5 * cfg_.window_height - grid_.origin.x) / grid_.resolution)));
        const int u0 = std::max(0, static_cast<int>(std::floor((grid_.origin.y - (center.y + 0.5 * cfg_.window_width)) / grid_.resolution)));
        const int u1 = std::min(grid_.width - 1, static_cast<int>(std::ceil((grid_.origin.y - (center.y - 0.5 * cfg_.window_width)) / grid_.resolution)));
        for (int v = v0; v <= v1; ++v)
            for (int u = u0; u <= u1; ++u) {
                if (grid_.at(u, v) == 0 || claimed_[index(u, v)]) continue;
                const CartesianPoint p = grid_.cell_center(u, v);
                if (std::abs(p.x - center.x) <= 0.5 * cfg_.window_height &&
                    std::abs(p.y - center.y) <= 0.5 * cfg_.window_width)
                    cells.push_back(p);
            }
        return cells;
    }

    void claim(const std::vector<CartesianPoint>& cells) {
        for (const auto& p : cells) {
            int u, v;
            if (grid_.cell_of(p, u, v)) claimed_[index(u, v)] = 1;
        }
    }

    // per-row centroids, ordered by forward coordinate
    static void finalize(WlfLine& line) {
        std::map<long, std::pair<double, int>> rows;  // key: x quantized to sub-mm
        for (const auto& c : line.cells) {
            auto& acc = rows[static_cast<long>(std::llround(c.x * 10000.0))];
            acc.first += c.y;
            acc.second += 1;
        }
        line.points.clear();
        line.points.reserve(rows.size());
        for (const auto& [key, acc] : rows)
            line.points.push_back({key / 10000.0, acc.first / acc.second});
    }

    std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * grid_.width + u; }

    const MaskGrid& grid_;
    const WlfConfig& cfg_;
    std::vector<std::uint8_t>& claimed_;
};

}  // namespace

WlfResult wlf_select(const MaskGrid& grid, const WlfConfig& config, const WlfPrior* prior) {
    WlfResult result;
    std::vector<std::uint8_t> claimed(grid.values.size(), 0);
    const int seed_rows = std::max(1, static_cast<int>(std::lround(config.seed_band_height / grid.resolution)));

    std::optional<double> left_seed, right_seed;
    if (prior && !prior->left.empty())
        left_seed = prior_y_at(prior->left, grid.x_min() + 0.5 * config.window_height);
    if (prior && !prior->right.empty())
        right_seed = prior_y_at(prior->right, grid.x_min() + 0.5 * config.window_height);
    if (!left_seed) left_seed = pick_seed(seed_clusters(grid, seed_rows, true), config.min_points);
    if (!right_seed) right_seed = pick_seed(seed_clusters(grid, seed_rows, false), config.min_points);

    WindowFollower follower(grid, config, claimed);
    if (left_seed)
        result.left = follower.follow(*left_seed, prior && !prior->left.empty() ? &prior->left : nullptr);
    if (right_seed)
        result.right = follower.follow(*right_seed, prior && !prior->right.empty() ? &prior->right : nullptr);
    return result;
}

Raster read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_pgm: cannot open " + path.string());

    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("read_pgm: truncated header in " + path.string());
    };

    if (next_token() != "P5") throw IoError("read_pgm: not a binary PGM: " + path.string());
    Raster raster;
    raster.width = std::stoi(next_token());
    raster.height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (raster.width <= 0 || raster.height <= 0 || maxval <= 0 || maxval > 255)
        throw IoError("read_pgm: unsupported header in " + path.string());
    in.get();  // single whitespace after maxval
    raster.values.resize(static_cast<std::size_t>(raster.width) * raster.height);
    in.read(reinterpret_cast<char*>(raster.values.data()), static_cast<std::streamsize>(raster.values.size()));
    if (!in) throw IoError("read_pgm: truncated pixel data in " + path.string());
    return raster;
}

void write_pgm(const std::filesystem::path& path, const Raster& raster) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path.string());
    out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.values.data()), static_cast<std::streamsize>(raster.values.size()));
    if (!out) throw IoError("write_pgm: write failed for " + path.string());
}

Raster to_raster(const MaskGrid& grid) {
    Raster raster;
    raster.width = grid.width;
    raster.height = grid.height;
    raster.values = grid.values;
    return raster;
}

}  // namespace lanekit
