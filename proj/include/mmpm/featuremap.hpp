#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

namespace mmpm {

struct FeatureDims {
    int h{0};
    int w{0};
    int f{0};

    bool operator==(const FeatureDims&) const = default;
    std::string str() const;
};

// One pooled convolutional response grid. Cells are stored as the rows of a
// row-major (H*W) x F matrix, so the in-memory layout equals the on-disk
// layout: row-major (row, col, filter) with filter fastest.
struct FeatureMap {
    using CellMatrix =
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    int height{0};
    int width{0};
    int filters{0};
    CellMatrix cells;  // (height*width) x filters

    static FeatureMap zero(int height, int width, int filters);

    int cell_count() const { return height * width; }
    int cell_index(int row, int col) const { return row * width + col; }
    FeatureDims dims() const { return {height, width, filters}; }

    float at(int row, int col, int filter) const {
        return cells(cell_index(row, col), filter);
    }
    float& at(int row, int col, int filter) {
        return cells(cell_index(row, col), filter);
    }
};

// Binary file layout: magic "MMPM", then u32-LE height, width, filters,
// then height*width*filters f32-LE values, row-major with filter fastest.
FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const std::filesystem::path& path, const FeatureMap& map);

// Header-only read for dimension validation during ingest.
FeatureDims read_feature_dims(const std::filesystem::path& path);

}  // namespace mmpm
