#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gmis/io/png.hpp"
#include "gmis/lab/lab.hpp"
#include "gmis/render/integrator.hpp"

using namespace gmis;

namespace {

// Exit-code contract: 2 flag/parse, 3 scene, 4 I/O, 5 verdict failure.
constexpr int kExitFlags = 2;
constexpr int kExitScene = 3;
constexpr int kExitIo = 4;
constexpr int kExitVerdict = 5;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw image_io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw image_io_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw image_io_error("failed writing '" + path + "'");
}

std::string replace_extension(const std::string& path,
                              const std::string& ext) {
    return std::filesystem::path(path).replace_extension(ext).string();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_render(const std::string& scene_path, const std::string& integrator,
               const std::string& out_path, int iterations, double seconds,
               int width, int height, const std::string& reference_path,
               const std::string& log_path, std::uint64_t seed,
               int max_samples, int branch) {
    if (iterations <= 0 && seconds <= 0.0) {
        std::fprintf(stderr, "render: need --iterations or --seconds\n");
        return kExitFlags;
    }
    if (!log_path.empty() && reference_path.empty()) {
        std::fprintf(stderr, "render: --log requires --reference\n");
        return kExitFlags;
    }

    IntegratorConfig cfg;
    try {
        cfg.kind = integrator_from_string(integrator);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "render: %s\n", e.what());
        return kExitFlags;
    }
    cfg.seed = seed;
    cfg.max_samples = max_samples;
    cfg.branch = branch;
    cfg.threads = resolve_thread_count(0);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "render: %s\n", e.what());
        return kExitFlags;
    }

    Scene scene;
    try {
        scene = parse_scene_string(read_text_file(scene_path));
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "render: %s\n", e.what());
        return kExitIo;
    } catch (const scene_parse_error& e) {
        std::fprintf(stderr, "render: %s: %s\n", scene_path.c_str(),
                     e.what());
        return kExitScene;
    }

    try {
        Image reference;
        const Image* ref = nullptr;
        if (!reference_path.empty()) {
            reference = read_pfm(reference_path);
            ref = &reference;
        }
        RenderResult result = render_progressive(scene, cfg, width, height,
                                                 iterations, seconds, ref);
        write_pfm(ends_with(out_path, ".png")
                      ? replace_extension(out_path, ".pfm")
                      : out_path,
                  result.image);
        if (ends_with(out_path, ".png")) write_png(out_path, result.image);
        write_text_file(replace_extension(out_path, ".stats.json"),
                        stats_sidecar(result.stats));
        if (!log_path.empty())
            write_text_file(log_path, convergence_csv(result.log));
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "render: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "render: %s\n", e.what());
        return kExitFlags;
    }
    return 0;
}

int cmd_rmse(const std::string& path_a, const std::string& path_b) {
    Image a, b;
    try {
        a = read_pfm(path_a);
        b = read_pfm(path_b);
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "rmse: %s\n", e.what());
        return kExitIo;
    }
    if (a.width != b.width || a.height != b.height) {
        std::fprintf(stderr, "rmse: dimension mismatch (%dx%d vs %dx%d)\n",
                     a.width, a.height, b.width, b.height);
        return kExitFlags;
    }
    std::printf("%.6f\n", image_rmse(a, b));
    return 0;
}

int cmd_lab(const std::string& config_path, const std::string& out_path,
            std::uint64_t seed, bool seed_given) {
    LabConfig cfg;
    try {
        cfg = parse_lab_config(read_text_file(config_path));
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "lab: %s\n", e.what());
        return kExitIo;
    } catch (const lab_config_error& e) {
        std::fprintf(stderr, "lab: %s: %s\n", config_path.c_str(), e.what());
        return kExitFlags;
    }
    if (seed_given) cfg.seed = seed;

    LabReport report =
        run_ordering_experiment(cfg, unsigned(resolve_thread_count(0)));
    try {
        write_text_file(out_path, lab_report_csv(report));
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "lab: %s\n", e.what());
        return kExitIo;
    }
    auto verdict = [](const char* name, const OrderingVerdict& v) {
        std::printf("%s: %s\n", name, v.pass ? "pass" : "FAIL");
        for (const auto& f : v.failures) std::printf("  %s\n", f.c_str());
    };
    verdict("ordering-a", report.ordering_a);
    verdict("ordering-b", report.ordering_b);
    std::printf("unbiased: %s\n", report.unbiased ? "pass" : "FAIL");
    return report.ordering_a.pass && report.ordering_b.pass ? 0 : kExitVerdict;
}

int cmd_uniformity(const std::string& strategy_name, std::size_t n,
                   std::size_t cycles, std::uint64_t seed) {
    SelectionStrategy strategy;
    if (strategy_name == "s1") strategy = SelectionStrategy::S1;
    else if (strategy_name == "s2") strategy = SelectionStrategy::S2;
    else if (strategy_name == "s3") strategy = SelectionStrategy::S3;
    else {
        std::fprintf(stderr, "uniformity: unknown strategy '%s'\n",
                     strategy_name.c_str());
        return kExitFlags;
    }
    UniformityReport rep;
    try {
        rep = run_uniformity_test(strategy, n, cycles, seed);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "uniformity: %s\n", e.what());
        return kExitFlags;
    }
    std::printf("strategy=%s n=%zu cycles=%zu%s\n", to_string(strategy),
                rep.n, rep.cycles, rep.exact ? " (exact)" : "");
    for (std::size_t i = 0; i < rep.n; ++i)
        std::printf("index %zu: count %zu frequency %.6f\n", i,
                    rep.totals[i],
                    double(rep.totals[i]) / double(rep.cycles * rep.n));
    std::printf("chi_square %.6f p_value %.6g\n", rep.aggregate_statistic,
                rep.aggregate_p_value);
    return 0;
}

// Small scene suite exercising the distinct material paths; each renders
// usefully at 64x64.
const struct {
    const char* name;
    const char* text;
} kFixtures[] = {
    {"box.scn", R"(material white diffuse 0.73 0.73 0.73
material red diffuse 0.65 0.15 0.15
material green diffuse 0.15 0.55 0.15
material chrome mirror 0.9 0.9 0.9
material crystal glass 0.95 0.95 0.95 1.5
box 0 0 0  1 1 1 white
tri 0 0 0  0 0 1  0 1 0 red
tri 0 1 0  0 0 1  0 1 1 red
tri 1 0 0  1 1 0  1 0 1 green
tri 1 1 0  1 1 1  1 0 1 green
sphere 0.3 0.2 0.6 0.2 chrome
sphere 0.72 0.17 0.35 0.17 crystal
arealight 0.35 0.998 0.35  0.3 0 0  0 0 0.3  14 14 14
camera 0.5 0.5 0.04  0.5 0.45 1  0 1 0  62
)"},
    {"diffuse-room.scn", R"(material white diffuse 0.7 0.7 0.7
material blue diffuse 0.25 0.3 0.65
material tan diffuse 0.6 0.5 0.35
box 0 0 0  1 1 1 white
box 0.15 0 0.55  0.4 0.45 0.8 blue
box 0.6 0 0.3  0.85 0.25 0.55 tan
arealight 0.4 0.998 0.1  0.2 0 0  0 0 0.2  18 18 18
camera 0.5 0.55 0.03  0.5 0.4 1  0 1 0  68
)"},
    {"mirror-wall.scn", R"(material white diffuse 0.72 0.72 0.72
material floor diffuse 0.55 0.5 0.45
material chrome mirror 0.92 0.92 0.92
box 0 0 0  1 1 1 white
box 0 0.05 0.05  0.015 0.95 0.95 chrome
box 0 0 0  1 0.01 1 floor
sphere 0.55 0.22 0.55 0.22 white
arealight 0.6 0.998 0.55  0.25 0 0  0 0 0.25  16 16 16
camera 0.85 0.5 0.08  0.3 0.35 0.9  0 1 0  64
)"},
    {"glossy-floor.scn", R"(material white diffuse 0.7 0.7 0.7
material gloss phong 0.6 0.6 0.55 48
material red diffuse 0.6 0.2 0.2
material blue diffuse 0.2 0.25 0.6
box 0 0 0  1 1 1 white
box 0 0 0  1 0.02 1 gloss
sphere 0.35 0.22 0.6 0.2 red
sphere 0.68 0.15 0.35 0.13 blue
arealight 0.35 0.998 0.3  0.3 0 0  0 0 0.3  15 15 15
camera 0.5 0.45 0.05  0.5 0.3 1  0 1 0  66
)"},
    {"furnace.scn", R"(material gray diffuse 0.5 0.5 0.5
arealight 0 0 0  1 0 0  0 1 0  1 1 1 gray
arealight 0 0 1  0 1 0  1 0 0  1 1 1 gray
arealight 0 0 0  0 0 1  1 0 0  1 1 1 gray
arealight 0 1 0  1 0 0  0 0 1  1 1 1 gray
arealight 0 0 0  0 1 0  0 0 1  1 1 1 gray
arealight 1 0 0  0 0 1  0 1 0  1 1 1 gray
camera 0.5 0.5 0.2  0.5 0.5 1  0 1 0  60
)"},
};

int cmd_fixtures(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "fixtures: cannot create '%s': %s\n",
                     dir.c_str(), ec.message().c_str());
        return kExitIo;
    }
    try {
        for (const auto& f : kFixtures) {
            // round-trip through the parser so shipped files are canonical
            Scene scene = parse_scene_string(f.text);
            write_text_file((std::filesystem::path(dir) / f.name).string(),
                            serialize_scene(scene));
            std::printf("%s\n",
                        (std::filesystem::path(dir) / f.name).string().c_str());
        }
    } catch (const image_io_error& e) {
        std::fprintf(stderr, "fixtures: %s\n", e.what());
        return kExitIo;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"progressive light transport renderer and MIS lab"};
    app.require_subcommand(1);

    auto* render = app.add_subcommand("render", "render a scene to an image");
    std::string scene_path, integrator, out_path, reference_path, log_path;
    int iterations = 0, width = 512, height = 512;
    int max_samples = 20, branch = 4;
    double seconds = 0.0;
    std::uint64_t seed = 1;
    render->add_option("--scene", scene_path)->required();
    render->add_option("--integrator", integrator)->required();
    render->add_option("--out", out_path)->required();
    render->add_option("--iterations", iterations);
    render->add_option("--seconds", seconds);
    render->add_option("--width", width);
    render->add_option("--height", height);
    render->add_option("--reference", reference_path);
    render->add_option("--log", log_path);
    render->add_option("--seed", seed);
    render->add_option("--max-samples", max_samples);
    render->add_option("--branch", branch);

    auto* rmse = app.add_subcommand("rmse", "RMSE between two images");
    std::string rmse_a, rmse_b;
    rmse->add_option("image_a", rmse_a)->required();
    rmse->add_option("image_b", rmse_b)->required();

    auto* lab = app.add_subcommand("lab", "variance ordering experiment");
    std::string lab_config, lab_out;
    std::uint64_t lab_seed = 1;
    lab->add_option("--config", lab_config)->required();
    lab->add_option("--out", lab_out)->required();
    auto* lab_seed_opt = lab->add_option("--seed", lab_seed);

    auto* uniformity =
        app.add_subcommand("uniformity", "index-selection frequency test");
    std::string strategy = "s1";
    std::size_t uni_n = 4, uni_cycles = 100000;
    std::uint64_t uni_seed = 1;
    uniformity->add_option("--strategy", strategy);
    uniformity->add_option("--n", uni_n);
    uniformity->add_option("--cycles", uni_cycles);
    uniformity->add_option("--seed", uni_seed);

    auto* fixtures =
        app.add_subcommand("fixtures", "write the bundled scene suite");
    std::string fixtures_dir = "fixtures";
    fixtures->add_option("--dir", fixtures_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the diagnostic
        return kExitFlags;
    }

    if (render->parsed())
        return cmd_render(scene_path, integrator, out_path, iterations,
                          seconds, width, height, reference_path, log_path,
                          seed, max_samples, branch);
    if (rmse->parsed()) return cmd_rmse(rmse_a, rmse_b);
    if (lab->parsed())
        return cmd_lab(lab_config, lab_out, lab_seed,
                       lab_seed_opt->count() > 0);
    if (uniformity->parsed())
        return cmd_uniformity(strategy, uni_n, uni_cycles, uni_seed);
    if (fixtures->parsed()) return cmd_fixtures(fixtures_dir);
    return kExitFlags;
}
