#include <doctest.h>

#include <random>

#include "mmpm/errors.hpp"
#include "mmpm/visual.hpp"

using namespace mmpm;

namespace {

FeatureMap map_2x2(std::initializer_list<float> filter0) {
    FeatureMap m = FeatureMap::zero(2, 2, 1);
    int i = 0;
    for (float v : filter0) m.cells(i++, 0) = v;
    return m;
}

// Reference NMS: scan each filter column for its max, zero the rest.
FeatureMap naive_nms(const FeatureMap& map) {
    FeatureMap out = FeatureMap::zero(map.height, map.width, map.filters);
    for (int f = 0; f < map.filters; ++f) {
        int best = 0;
        for (int c = 1; c < map.cell_count(); ++c)
            if (map.cells(c, f) > map.cells(best, f)) best = c;
        if (map.cells(best, f) != 0.0f) out.cells(best, f) = map.cells(best, f);
    }
    return out;
}

}  // namespace

TEST_CASE("nms keeps each filter's maximal cell") {
    const FeatureMap out = nms_per_filter(map_2x2({1, 3, 2, 0}));
    CHECK(out.cells(0, 0) == 0.0f);
    CHECK(out.cells(1, 0) == 3.0f);
    CHECK(out.cells(2, 0) == 0.0f);
    CHECK(out.cells(3, 0) == 0.0f);
}

TEST_CASE("nms tie goes to the first row-major cell") {
    const FeatureMap out = nms_per_filter(map_2x2({5, 0, 0, 5}));
    CHECK(out.cells(0, 0) == 5.0f);
    CHECK(out.cells(3, 0) == 0.0f);
}

TEST_CASE("nms leaves an all-zero map all-zero") {
    const FeatureMap out = nms_per_filter(FeatureMap::zero(3, 3, 4));
    CHECK(out.cells.isZero());
}

TEST_CASE("nms properties on random maps") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<float> dist(0.0f, 10.0f);
    std::bernoulli_distribution sparse(0.3);

    for (int trial = 0; trial < 100; ++trial) {
        FeatureMap m = FeatureMap::zero(4, 5, 7);
        for (int c = 0; c < m.cell_count(); ++c)
            for (int f = 0; f < m.filters; ++f)
                if (sparse(gen)) m.cells(c, f) = dist(gen);

        const FeatureMap once = nms_per_filter(m);
        const FeatureMap twice = nms_per_filter(once);
        CHECK(once.cells == twice.cells);
        CHECK(once.cells == naive_nms(m).cells);

        for (int f = 0; f < m.filters; ++f) {
            int nonzero = 0;
            for (int c = 0; c < m.cell_count(); ++c)
                if (once.cells(c, f) != 0.0f) ++nonzero;
            CHECK(nonzero <= 1);
        }
    }
}

TEST_CASE("binarization ranks magnitudes per cell") {
    FeatureMap m = FeatureMap::zero(1, 1, 6);
    const float vals[6] = {0, 7.2f, 0, 3.1f, 0.5f, 0};
    for (int f = 0; f < 6; ++f) m.cells(0, f) = vals[f];

    const auto sets = binarize_patches(m, 2);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].cell == PatchCell{0, 0});
    CHECK(sets[0].items == std::vector<int>{1, 3});

    SUBCASE("k_top larger than the candidate count keeps all candidates") {
        const auto all = binarize_patches(m, 10);
        CHECK(all[0].items == std::vector<int>{1, 3, 4});
    }
}

TEST_CASE("binarization tie goes to the smaller filter index") {
    FeatureMap m = FeatureMap::zero(1, 1, 6);
    m.cells(0, 0) = 2;
    m.cells(0, 1) = 2;
    m.cells(0, 2) = 2;
    const auto sets = binarize_patches(m, 2);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].items == std::vector<int>{0, 1});
}

TEST_CASE("cells without candidates are omitted") {
    FeatureMap m = FeatureMap::zero(2, 2, 3);
    m.cells(2, 1) = 4.0f;
    const auto sets = binarize_patches(m, 5);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].cell == PatchCell{1, 0});
    CHECK(sets[0].items == std::vector<int>{1});

    CHECK(binarize_patches(FeatureMap::zero(2, 2, 3), 5).empty());
    CHECK_THROWS_AS(binarize_patches(m, 0), ConfigError);
}

TEST_CASE("visual itemsets: filters contribute to at most one cell") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    FeatureMap m = FeatureMap::zero(6, 6, 32);
    for (int c = 0; c < m.cell_count(); ++c)
        for (int f = 0; f < m.filters; ++f) m.cells(c, f) = dist(gen);

    const auto sets = visual_itemsets(m, 20);
    std::size_t total = 0;
    for (const VisualItemset& s : sets) {
        CHECK(s.items.size() <= 20);
        CHECK(std::is_sorted(s.items.begin(), s.items.end()));
        total += s.items.size();
    }
    CHECK(total <= 32);
}

TEST_CASE("roi geometry for the default 6x6 grid") {
    const PatchGeometry geom{};

    CHECK(cell_to_roi({0, 0}, geom) == RoiRect{0, 0, 132, 132});
    CHECK(cell_to_roi({2, 2}, geom) == RoiRect{0, 0, 196, 196});
    CHECK(cell_to_roi({5, 5}, geom) == RoiRect{96, 96, 227, 227});

    // x follows the column, y follows the row.
    const RoiRect r = cell_to_roi({0, 5}, geom);
    CHECK(r.x0 == 96);
    CHECK(r.x1 == 227);
    CHECK(r.y0 == 0);
    CHECK(r.y1 == 132);

    for (int row = 0; row < 6; ++row)
        for (int col = 0; col < 6; ++col) {
            const RoiRect roi = cell_to_roi({row, col}, geom);
            CHECK(roi.x0 >= 0);
            CHECK(roi.y0 >= 0);
            CHECK(roi.x1 <= 227);
            CHECK(roi.y1 <= 227);
            CHECK(roi.width() > 0);
            CHECK(roi.height() > 0);
        }

    SUBCASE("interior cells keep the full patch side") {
        for (int row = 2; row <= 2; ++row)
            for (int col = 2; col <= 2; ++col) {
                const RoiRect roi = cell_to_roi({row, col}, geom);
                CHECK(roi.width() == 196);
                CHECK(roi.height() == 196);
            }
    }

    SUBCASE("a cell far outside the image is a config error") {
        CHECK_THROWS_AS(cell_to_roi({50, 50}, geom), ConfigError);
        CHECK_NOTHROW(validate_geometry(geom, 6, 6));
        CHECK_THROWS_AS(validate_geometry(geom, 50, 50), ConfigError);
        CHECK_THROWS_AS(validate_geometry({227, 196, 32, 500}, 6, 6), ConfigError);
    }
}
