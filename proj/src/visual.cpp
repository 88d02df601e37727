#include "mmpm/visual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmpm/errors.hpp"

namespace mmpm {

FeatureMap nms_per_filter(const FeatureMap& map) {
    FeatureMap out = FeatureMap::zero(map.height, map.width, map.filters);
    const int cells = map.cell_count();
    if (cells == 0) return out;
    for (int f = 0; f < map.filters; ++f) {
        int best_cell = 0;
        float best = map.cells(0, f);
        for (int c = 1; c < cells; ++c) {
            if (map.cells(c, f) > best) {
                best = map.cells(c, f);
                best_cell = c;
            }
        }
        out.cells(best_cell, f) = best;
    }
    return out;
}

std::vector<VisualItemset> binarize_patches(const FeatureMap& map_nms, int k_top) {
    if (k_top < 1) throw ConfigError("k_top must be >= 1, got " + std::to_string(k_top));
    std::vector<VisualItemset> out;
    std::vector<int> candidates;
    for (int c = 0; c < map_nms.cell_count(); ++c) {
        candidates.clear();
        for (int f = 0; f < map_nms.filters; ++f)
            if (map_nms.cells(c, f) != 0.0f) candidates.push_back(f);
        if (candidates.empty()) continue;

        const int keep = std::min<int>(k_top, static_cast<int>(candidates.size()));
        // Larger magnitude first; equal magnitudes keep the smaller filter.
        std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            return std::abs(map_nms.cells(c, a)) > std::abs(map_nms.cells(c, b));
        });
        candidates.resize(keep);
        std::sort(candidates.begin(), candidates.end());

        VisualItemset itemset;
        itemset.cell = {c / map_nms.width, c % map_nms.width};
        itemset.items = candidates;
        out.push_back(std::move(itemset));
    }
    return out;
}

std::vector<VisualItemset> visual_itemsets(const FeatureMap& map, int k_top) {
    return binarize_patches(nms_per_filter(map), k_top);
}

RoiRect cell_to_roi(PatchCell cell, const PatchGeometry& geom) {
    const int y_start = geom.stride * cell.row - geom.pad;
    const int x_start = geom.stride * cell.col - geom.pad;
    RoiRect rect;
    rect.y0 = std::max(0, y_start);
    rect.x0 = std::max(0, x_start);
    rect.y1 = std::min(geom.image_side, y_start + geom.patch_side);
    rect.x1 = std::min(geom.image_side, x_start + geom.patch_side);
    if (rect.x0 >= rect.x1 || rect.y0 >= rect.y1)
        throw ConfigError("patch geometry maps cell (" + std::to_string(cell.row) + "," +
                          std::to_string(cell.col) + ") to an empty pixel rectangle");
    return rect;
}

void validate_geometry(const PatchGeometry& geom, int grid_h, int grid_w) {
    if (geom.image_side < 1 || geom.patch_side < 1 || geom.stride < 1 || geom.pad < 0)
        throw ConfigError("patch geometry fields must be positive (pad may be zero)");
    for (int r = 0; r < grid_h; ++r)
        for (int c = 0; c < grid_w; ++c) cell_to_roi({r, c}, geom);
}

}  // namespace mmpm
