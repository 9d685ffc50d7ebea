#pragma once

#include "metatrace/core.hpp"

#include <utility>
#include <vector>

namespace metatrace {

/// Grid tile coding with symmetric, evenly spaced offsets.
///
/// Tiling k of n is shifted by (k - (n-1)/2) / n tile widths in every dimension.
/// Tile indices are taken on a grid whose origin sits half a tile below the lower
/// bound, so each dimension needs exactly one extra tile of overhang.
struct TileCodingConfig {
    int n_tilings = 1;
    std::vector<int> tiles_per_dim;
    std::vector<std::pair<double, double>> bounds;

    int tiles_per_tiling() const;
    int dimension() const { return n_tilings * tiles_per_tiling(); }
    void validate() const;

    /// 4 tilings of 2x2 tiles over the 4x4 FrozenLake grid; each tile spans 2x2 cells.
    static TileCodingConfig frozen_lake();
    /// 8 tilings of 8x8 tiles over position x velocity.
    static TileCodingConfig mountain_car();
};

FeatureVector onehot(int index, int n);

/// Indices of the active tile in every tiling (one per tiling), for a point already
/// clamped into the configured bounds.
std::vector<int> active_tiles(const std::vector<double>& point, const TileCodingConfig& config);

/// Cell (row, col) of a 4x4 grid, coded at the cell centre.
FeatureVector tile_code_discrete(int row, int col, const TileCodingConfig& config);

/// Out-of-bounds inputs are clamped to the configured box.
FeatureVector tile_code_continuous(double position, double velocity, const TileCodingConfig& config);

}  // namespace metatrace
