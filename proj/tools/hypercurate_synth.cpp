// Generates a synthetic tile catalog, tile rasters and a label raster.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hypercurate/errors.hpp"
#include "hypercurate/raster_io.hpp"
#include "hypercurate/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hypercurate;

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic tile manifest with rasters and a matching label raster"};
    synthetic::LayoutOptions opts;
    std::string out = "synthetic";
    std::string aggregation;
    bool rasters = true;
    int block_px = 16;
    app.add_option("--out", out, "output directory");
    app.add_option("--tiles", opts.tiles);
    app.add_option("--extent-px", opts.extent_px, "side of the area tile centres are drawn from");
    app.add_option("--min-side-px", opts.min_side_px);
    app.add_option("--max-side-px", opts.max_side_px);
    app.add_option("--dates", opts.dates);
    app.add_option("--bands", opts.bands);
    app.add_option("--seed", opts.seed);
    app.add_option("--aggregation", aggregation, "draw label codes from this aggregation table");
    app.add_option("--block-px", block_px, "label block size in pixels");
    app.add_flag("!--no-rasters", rasters, "write metadata only");
    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(fs::path(out) / "rasters");
        auto tiles = synthetic::random_layout(opts);
        std::mt19937_64 rng(opts.seed);
        if (rasters) {
            for (auto& t : tiles) {
                synthetic::write_tile_raster(t, (fs::path(out) / "rasters" / (t.tile_id + ".hsrc")).string(), rng);
                t.raster_ref = "rasters/" + t.tile_id + ".hsrc";
            }
        }
        write_tile_manifest((fs::path(out) / "tiles.jsonl").string(), tiles);

        std::vector<std::int32_t> codes{1, 2, 3, 4};
        if (!aggregation.empty()) {
            codes.clear();
            for (const auto& [code, target] : AggregationMap::load(aggregation).targets) codes.push_back(code);
        }
        std::int64_t c0 = INT64_MAX, c1 = INT64_MIN, r0 = INT64_MAX, r1 = INT64_MIN;
        for (const auto& t : tiles) {
            const RasterGrid g = effective_grid(t);
            c0 = std::min(c0, g.origin_col);
            c1 = std::max(c1, g.origin_col + g.width);
            r1 = std::max(r1, g.origin_row);
            r0 = std::min(r0, g.origin_row - g.height);
        }
        const auto labels = synthetic::random_label_raster(c0, r1, static_cast<std::uint32_t>(c1 - c0),
                                                           static_cast<std::uint32_t>(r1 - r0), opts.gsd, opts.crs,
                                                           codes, block_px, rng);
        synthetic::write_label_raster(labels, (fs::path(out) / "labels.hsrc").string());
        std::cerr << "wrote " << tiles.size() << " tiles to " << out << '\n';
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::internal);
    }
    return 0;
}
