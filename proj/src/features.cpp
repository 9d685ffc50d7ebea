#include "metatrace/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace metatrace {

int TileCodingConfig::tiles_per_tiling() const {
    int n = 1;
    for (int t : tiles_per_dim) n *= t + 1;
    return n;
}

void TileCodingConfig::validate() const {
    if (n_tilings < 1) throw std::invalid_argument("tile coding needs at least one tiling");
    if (tiles_per_dim.empty() || tiles_per_dim.size() != bounds.size()) {
        throw std::invalid_argument("tiles_per_dim and bounds must have equal, nonzero length");
    }
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        if (tiles_per_dim[d] < 1 || !(bounds[d].second > bounds[d].first)) {
            throw std::invalid_argument("bad tiling along dimension " + std::to_string(d));
        }
    }
}

TileCodingConfig TileCodingConfig::frozen_lake() {
    return TileCodingConfig{4, {2, 2}, {{0.0, 4.0}, {0.0, 4.0}}};
}

TileCodingConfig TileCodingConfig::mountain_car() {
    return TileCodingConfig{8, {8, 8}, {{-1.2, 0.5}, {-0.07, 0.07}}};
}

FeatureVector onehot(int index, int n) {
    if (index < 0 || index >= n) {
        throw std::out_of_range("onehot index " + std::to_string(index) + " outside [0, " +
                                std::to_string(n) + ")");
    }
    FeatureVector x = FeatureVector::Zero(n);
    x[index] = 1.0;
    return x;
}

std::vector<int> active_tiles(const std::vector<double>& point, const TileCodingConfig& config) {
    const std::size_t dims = config.tiles_per_dim.size();
    if (point.size() != dims) throw std::invalid_argument("point dimension does not match tiling");
    const int per_tiling = config.tiles_per_tiling();
    const double n = config.n_tilings;

    std::vector<int> active;
    active.reserve(static_cast<std::size_t>(config.n_tilings));
    for (int k = 0; k < config.n_tilings; ++k) {
        const double shift = (k - (n - 1.0) / 2.0) / n;
        int flat = 0;
        for (std::size_t d = 0; d < dims; ++d) {
            const auto [lo, hi] = config.bounds[d];
            const int tiles = config.tiles_per_dim[d];
            const double width = (hi - lo) / tiles;
            const double u = (point[d] - lo) / width + 0.5 + shift;
            const int idx = std::clamp(static_cast<int>(std::floor(u)), 0, tiles);
            flat = flat * (tiles + 1) + idx;
        }
        active.push_back(k * per_tiling + flat);
    }
    return active;
}

namespace {

FeatureVector binary_features(const std::vector<int>& active, int dim) {
    FeatureVector x = FeatureVector::Zero(dim);
    for (int i : active) x[i] = 1.0;
    return x;
}

}  // namespace

FeatureVector tile_code_discrete(int row, int col, const TileCodingConfig& config) {
    config.validate();
    const int rows = static_cast<int>(std::lround(config.bounds[0].second - config.bounds[0].first));
    const int cols = static_cast<int>(std::lround(config.bounds[1].second - config.bounds[1].first));
    if (row < 0 || row >= rows || col < 0 || col >= cols) {
        throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                                ") outside the grid");
    }
    const std::vector<double> centre{config.bounds[0].first + row + 0.5,
                                     config.bounds[1].first + col + 0.5};
    return binary_features(active_tiles(centre, config), config.dimension());
}

FeatureVector tile_code_continuous(double position, double velocity, const TileCodingConfig& config) {
    config.validate();
    if (config.bounds.size() != 2) throw std::invalid_argument("continuous coder expects 2 dimensions");
    const std::vector<double> point{
        std::clamp(position, config.bounds[0].first, config.bounds[0].second),
        std::clamp(velocity, config.bounds[1].first, config.bounds[1].second)};
    return binary_features(active_tiles(point, config), config.dimension());
}

}  // namespace metatrace
