#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "meshreg/config.hpp"
#include "meshreg/core.hpp"
#include "meshreg/dtransform.hpp"
#include "meshreg/image_io.hpp"
#include "meshreg/metrics.hpp"
#include "meshreg/optimizer.hpp"
#include "meshreg/svg.hpp"
#include "meshreg/synth.hpp"

namespace fs = std::filesystem;
using namespace meshreg;

namespace {

int thread_cap_from_env() {
    const char* env = std::getenv("MESHREG_THREADS");
    if (!env) return 0;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
        throw std::invalid_argument("MESHREG_THREADS must be a positive integer");
    return static_cast<int>(v);
}

Image load_contour(const std::string& path, int threshold = 128) {
    return binarize_loaded(load_image(path), threshold);
}

int run_register(const std::string& source_path, const std::string& target_path,
                 const std::string& config_path, const std::string& out_dir, int levels,
                 double lambda, const std::string& placement, int basis_order) {
    RegistrationConfig cfg;
    if (!config_path.empty()) cfg = load_registration_config(config_path);
    if (levels > 0) cfg.pyramid_levels = levels;
    if (lambda >= 0.0) cfg.lambda = lambda;
    if (!placement.empty()) {
        bool spacing_default = cfg.patch.spacing == 6.0;
        cfg.placement = placement_mode_from_string(placement);
        if (cfg.placement == PlacementMode::adaptive && spacing_default)
            cfg.patch.spacing = 10.0;
    }
    if (basis_order >= 0) cfg.basis_order = basis_order;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    cfg.threads = std::max(1, std::min(hw, 4));
    if (int cap = thread_cap_from_env()) cfg.threads = std::min(cfg.threads, cap);

    Image source = load_contour(source_path);
    Image target = load_contour(target_path);

    RegistrationResult res = register_shapes(source, target, cfg);

    fs::create_directories(out_dir);
    atomic_write_file((fs::path(out_dir) / "model.json").string(), model_to_json(res.model));
    atomic_write_file((fs::path(out_dir) / "field.csv").string(), field_csv(res.field));
    atomic_write_file((fs::path(out_dir) / "report.json").string(), report_json(res.report));

    Image warped = detect_edges(warp_image(source, res.field), cfg.edge_threshold);
    atomic_write_file((fs::path(out_dir) / "overlay.svg").string(),
                      overlay_svg(source, target, warped));
    atomic_write_file((fs::path(out_dir) / "grid.svg").string(), grid_svg(res.field));

    const DistanceStats& st = res.report.final_stats;
    std::printf("registered in %.2fs over %d iterations\n", res.report.wall_time_sec,
                res.report.total_iterations);
    std::printf("mutual distance: mean %.4f max %.4f variance %.4f (n=%lld)\n", st.mean,
                st.max, st.variance, st.n_points);
    return 0;
}

int run_synth(std::uint64_t seed, const std::string& family, int size, double peak,
              double tx, double ty, double occlude, const std::string& out_dir) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.family = shape_family_from_string(family);
    cfg.size = size;
    cfg.peak = peak;
    cfg.translate = Vec2(tx, ty);
    cfg.occlude_frac = occlude;

    SynthPair pair = make_synth_pair(cfg);
    fs::create_directories(out_dir);
    save_pgm((fs::path(out_dir) / "source.pgm").string(), pair.source);
    save_pgm((fs::path(out_dir) / "target.pgm").string(), pair.target);
    atomic_write_file((fs::path(out_dir) / "field.csv").string(),
                      synth_field_csv(pair.field, cfg.size, cfg.size));
    std::printf("synth pair (%s, seed %llu) written to %s\n", family.c_str(),
                static_cast<unsigned long long>(seed), out_dir.c_str());
    return 0;
}

int run_dt(const std::string& source_path, const std::string& out_dir) {
    Image edges = load_contour(source_path);
    DistanceField field = compute_distance_transform(edges);

    fs::create_directories(out_dir);
    atomic_write_file((fs::path(out_dir) / "dt.csv").string(), distance_field_csv(field));

    // blue near the contour through red at the far end
    double mx = 0.0;
    for (double d : field.dist) mx = std::max(mx, d);
    std::vector<unsigned char> rgb(field.dist.size() * 3);
    for (size_t i = 0; i < field.dist.size(); ++i) {
        double t = mx > 0.0 ? field.dist[i] / mx : 0.0;
        rgb[3 * i] = static_cast<unsigned char>(255.0 * t);
        rgb[3 * i + 1] = static_cast<unsigned char>(80.0 * (1.0 - t));
        rgb[3 * i + 2] = static_cast<unsigned char>(255.0 * (1.0 - t));
    }
    save_png_rgb((fs::path(out_dir) / "dt.png").string(), field.width, field.height, rgb);
    return 0;
}

int run_eval(const std::string& source_path, const std::string& target_path) {
    Image a = load_contour(source_path);
    Image b = load_contour(target_path);
    std::fputs(stats_json(mutual_distance_stats(a, b)).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meshreg: nonrigid 2-D shape registration"};
    app.require_subcommand(1);

    std::string source_path, target_path, config_path, out_dir, placement, family = "ellipse";
    int levels = -1, basis_order = -1, size = 150;
    double lambda = -1.0, peak = 10.0, tx = 0.0, ty = 0.0, occlude = 0.0;
    std::uint64_t seed = 1;

    auto* reg = app.add_subcommand("register", "register a source contour onto a target");
    reg->add_option("--source", source_path)->required();
    reg->add_option("--target", target_path)->required();
    reg->add_option("--config", config_path);
    reg->add_option("--out", out_dir)->required();
    reg->add_option("--levels", levels);
    reg->add_option("--lambda", lambda);
    reg->add_option("--placement", placement)->check(CLI::IsMember({"regular", "adaptive"}));
    reg->add_option("--basis-order", basis_order);

    auto* synth = app.add_subcommand("synth", "generate a synthetic contour pair");
    synth->add_option("--seed", seed)->required();
    synth->add_option("--family", family)->required()
        ->check(CLI::IsMember({"ellipse", "star", "polyline"}));
    synth->add_option("--size", size);
    synth->add_option("--peak", peak);
    synth->add_option("--translate-x", tx);
    synth->add_option("--translate-y", ty);
    synth->add_option("--occlude", occlude);
    synth->add_option("--out", out_dir)->required();

    auto* dt = app.add_subcommand("dt", "distance transform of an edge map");
    dt->add_option("--source", source_path)->required();
    dt->add_option("--out", out_dir)->required();

    auto* ev = app.add_subcommand("eval", "mutual contour distance of two edge maps");
    ev->add_option("--source", source_path)->required();
    ev->add_option("--target", target_path)->required();

    try {
        app.parse(argc, argv);
        if (reg->parsed())
            return run_register(source_path, target_path, config_path, out_dir, levels, lambda,
                                placement, basis_order);
        if (synth->parsed())
            return run_synth(seed, family, size, peak, tx, ty, occlude, out_dir);
        if (dt->parsed()) return run_dt(source_path, out_dir);
        if (ev->parsed()) return run_eval(source_path, target_path);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RegistrationError& e) {
        std::fprintf(stderr, "registration error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
