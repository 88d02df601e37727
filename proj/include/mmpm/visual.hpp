#pragma once

#include <vector>

#include "mmpm/featuremap.hpp"

namespace mmpm {

struct PatchCell {
    int row{0};
    int col{0};

    bool operator==(const PatchCell&) const = default;
};

// Per-patch binary visual itemset: the filter indices that survive NMS and
// top-k binarization at one grid cell.
struct VisualItemset {
    PatchCell cell;
    std::vector<int> items;  // strictly increasing filter indices
};

// Half-open pixel rectangle in the unpadded image.
struct RoiRect {
    int x0{0};
    int y0{0};
    int x1{0};
    int y1{0};

    bool operator==(const RoiRect&) const = default;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

// Receptive-field geometry of a grid cell over the resized input image.
struct PatchGeometry {
    int image_side{227};
    int patch_side{196};
    int stride{32};
    int pad{64};
};

// Keeps, per filter, only the maximal cell (ties: smallest row-major cell
// index); every other cell is zeroed. Idempotent.
FeatureMap nms_per_filter(const FeatureMap& map);

// Per cell, the top-k largest-magnitude nonzero responses become items
// (ties: smaller filter index). Cells with no nonzero response are omitted.
std::vector<VisualItemset> binarize_patches(const FeatureMap& map_nms, int k_top);

// nms_per_filter followed by binarize_patches.
std::vector<VisualItemset> visual_itemsets(const FeatureMap& map, int k_top);

// Pixel ROI feeding a grid cell: top-left (stride*col - pad, stride*row - pad),
// side patch_side, clipped to [0, image_side)^2. Throws ConfigError if the
// clipped rectangle is empty.
RoiRect cell_to_roi(PatchCell cell, const PatchGeometry& geom);

// Rejects a geometry under which any cell of an h x w grid maps to an empty
// pixel rectangle.
void validate_geometry(const PatchGeometry& geom, int grid_h, int grid_w);

}  // namespace mmpm
